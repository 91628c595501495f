// Acceptance gate: nine pass/fail checks covering hashing statistics,
// structural invariants, determinism, update locality, relative update cost,
// retrieval exactness, incremental convergence, biased retrieval accounting,
// and context budget safety. Every tolerance is pinned below.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "erarag/bench.hpp"
#include "erarag/persist.hpp"
#include "erarag/retrieve.hpp"
#include "erarag/rng.hpp"
#include "erarag/tokens.hpp"
#include "erarag/update.hpp"

using namespace erarag;

namespace {

// pinned tolerances
constexpr double kCollisionTol = 0.02;       // criterion 1
constexpr double kScoreTol = 1e-9;           // criterion 6
constexpr double kHitRateTolPts = 2.0;       // criterion 7, percentage points
constexpr double kHalfPlusTenRatio = 0.50;   // criterion 5
constexpr double kOneEntryRatio = 0.10;      // criterion 5

std::uint64_t g_budget_checks = 0;
std::uint64_t g_budget_violations = 0;

void note_budget(const std::string& context, std::uint32_t budget) {
    ++g_budget_checks;
    if (token_count(context) > budget) ++g_budget_violations;
}

BuildConfig base_config(std::uint64_t seed) {
    BuildConfig cfg;
    cfg.seed = seed;
    cfg.dim = 16;
    cfg.hyperplane_count = 16;
    cfg.bounds = {4, 8};
    cfg.chunk_tokens = 32;
    cfg.summary_tokens = 24;
    cfg.embedder.dim = cfg.dim;
    cfg.embedder.mock_seed = seed;
    return cfg;
}

// Documents arrive in topical runs of twelve (shared token suffix), the shape
// an incremental ingest actually sees; rounds of the growth protocol then
// cluster instead of spraying across every bucket.
Corpus synthetic_corpus(std::size_t docs, std::size_t tokens_per_doc, std::uint64_t seed) {
    static const char* vocab[] = {"ore",  "vein", "shaft", "drill", "lamp", "cart",
                                  "rail", "dust", "seam",  "coal",  "gear", "pump",
                                  "rope", "cage", "crew",  "depth"};
    std::mt19937_64 rng(seed);
    Corpus out;
    for (std::size_t d = 0; d < docs; ++d) {
        std::ostringstream text;
        for (std::size_t t = 0; t < tokens_per_doc; ++t) {
            if (t) text << ' ';
            text << vocab[rng() % 16] << d / 12;
        }
        out.emplace_back("doc" + std::to_string(d), text.str());
    }
    return out;
}

struct Rig {
    BuildConfig cfg;
    std::unique_ptr<Embedder> embedder;
    std::unique_ptr<Summarizer> summarizer;

    explicit Rig(std::uint64_t seed) : cfg(base_config(seed)) {
        embedder = make_embedder(cfg.embedder);
        summarizer = make_summarizer(cfg.summarizer);
    }

    LayeredGraph build(const Corpus& corpus) {
        CostLedger ledger;
        return build_graph(corpus, cfg, *embedder, *summarizer, ledger);
    }
};

std::map<NodeId, std::vector<std::uint8_t>> node_bytes(const LayeredGraph& g) {
    std::map<NodeId, std::vector<std::uint8_t>> out;
    for (const auto& [id, n] : g.nodes)
        out[id] = serialize_node(n, g.config.dim, g.hyperplanes.count);
    return out;
}

// --- criterion 1: Theorem-1 collision rate -------------------------------

bool criterion_collision_rate() {
    auto planes = sample_hyperplanes(424242, 2, 10000);
    for (double deg : {30.0, 60.0, 90.0, 120.0}) {
        double theta = deg * M_PI / 180.0;
        std::vector<float> a{1.0f, 0.0f};
        std::vector<float> b{static_cast<float>(std::cos(theta)),
                             static_cast<float>(std::sin(theta))};
        auto ca = hash_vector(a, planes);
        auto cb = hash_vector(b, planes);
        double agree = 1.0 - static_cast<double>(hamming_distance(ca, cb)) / 10000.0;
        if (std::abs(agree - collision_probability(theta)) >= kCollisionTol) return false;
    }
    return true;
}

// --- criteria 2 + 4: bounds under churn, and update locality --------------

bool criterion_bounds_under_churn(LayeredGraph graph, Rig& rig) {
    if (!verify_graph(graph).empty()) return false;
    std::mt19937_64 rng(1001);
    for (int round = 0; round < 100; ++round) {
        Corpus one = synthetic_corpus(1, 24, rng());
        one[0].first = "churn" + std::to_string(round);
        CostLedger ledger;
        insert_chunks(graph, one, *rig.embedder, *rig.summarizer, ledger);
        if (!verify_graph(graph).empty()) return false;
    }
    return true;
}

bool criterion_locality(LayeredGraph graph, Rig& rig) {
    std::mt19937_64 rng(2002);
    for (int round = 0; round < 500; ++round) {
        auto before = node_bytes(graph);
        std::size_t depth = graph.layers.size();

        Corpus one = synthetic_corpus(1, 24, rng());
        one[0].first = "loc" + std::to_string(round);
        CostLedger ledger;
        auto report = insert_chunks(graph, one, *rig.embedder, *rig.summarizer, ledger);

        if (report.summarize_calls > 3 * depth) return false;

        std::vector<NodeId> seeds = report.inserted_chunk_ids;
        seeds.insert(seeds.end(), report.restructured_ids.begin(),
                     report.restructured_ids.end());
        auto closure = affected_closure(graph, seeds);
        std::set<NodeId> removed(report.removed_ids.begin(), report.removed_ids.end());
        for (const auto& [id, bytes] : before) {
            if (closure.contains(id) || removed.contains(id)) continue;
            auto it = graph.nodes.find(id);
            if (it == graph.nodes.end()) return false;
            if (serialize_node(it->second, graph.config.dim, graph.hyperplanes.count) != bytes)
                return false;
        }
    }
    return true;
}

// --- criterion 3: determinism --------------------------------------------

bool criterion_determinism() {
    Rig rig(77);
    auto corpus = synthetic_corpus(40, 96, 77);
    auto bytes_a = serialize_graph(rig.build(corpus));
    Rig rig2(77);
    auto bytes_b = serialize_graph(rig2.build(corpus));
    if (bytes_a != bytes_b) return false;
    auto reloaded = deserialize_graph(bytes_a);
    return serialize_graph(reloaded) == bytes_a;
}

// --- criterion 5: relative update cost -----------------------------------

bool criterion_update_cost(const Corpus& corpus, const BuildConfig& cfg) {
    auto rows = bench_half_plus_ten(corpus, cfg, true, true);
    std::uint64_t inc_calls = 0, inc_tokens = 0, reb_calls = 0, reb_tokens = 0;
    for (const auto& r : rows) {
        if (r.stage == 0) continue;  // initial builds are identical by protocol
        auto& calls = r.strategy == "incremental" ? inc_calls : reb_calls;
        auto& tokens = r.strategy == "incremental" ? inc_tokens : reb_tokens;
        calls += r.llm_calls;
        tokens += r.prompt_tokens + r.completion_tokens;
    }
    if (!(inc_calls < kHalfPlusTenRatio * static_cast<double>(reb_calls))) return false;
    if (!(inc_tokens < kHalfPlusTenRatio * static_cast<double>(reb_tokens))) return false;

    auto one = bench_one_entry(corpus, cfg, true, true);
    std::uint64_t one_inc = 0, one_reb = 0;
    for (const auto& r : one) {
        if (r.stage != 1) continue;
        (r.strategy == "incremental" ? one_inc : one_reb) =
            r.prompt_tokens + r.completion_tokens;
    }
    return one_inc < kOneEntryRatio * static_cast<double>(one_reb);
}

// --- criterion 6: retrieval oracle ---------------------------------------

bool criterion_retrieval_oracle() {
    std::mt19937_64 rng(3003);
    for (int trial = 0; trial < 100; ++trial) {
        LayeredGraph g;
        g.config.dim = 12;
        g.layers.resize(1);
        std::size_t n = 5 + rng() % 196;
        for (std::size_t i = 0; i < n; ++i) {
            GraphNode node;
            node.id = g.allocate_id();
            std::vector<float> raw(12);
            NormalStream stream(rng());
            for (auto& x : raw) x = static_cast<float>(stream.next());
            node.embedding = normalize(raw);
            g.layers[0].push_back(node.id);
            g.nodes.emplace(node.id, std::move(node));
        }
        std::vector<float> raw(12);
        NormalStream stream(rng());
        for (auto& x : raw) x = static_cast<float>(stream.next());
        auto q = normalize(raw);

        auto got = top_k(g, q, 7);

        std::vector<Hit> oracle;
        for (const auto& [id, node] : g.nodes)
            oracle.push_back(Hit{id, cosine(q, node.embedding), node.layer});
        std::sort(oracle.begin(), oracle.end(), [](const Hit& a, const Hit& b) {
            if (a.score != b.score) return a.score > b.score;
            return a.id < b.id;
        });
        if (oracle.size() > 7) oracle.resize(7);

        if (got.size() != oracle.size()) return false;
        for (std::size_t i = 0; i < got.size(); ++i) {
            if (got[i].id != oracle[i].id) return false;
            if (std::abs(got[i].score - oracle[i].score) > kScoreTol) return false;
        }
    }
    return true;
}

// --- criterion 7: incremental convergence --------------------------------

// Labeled corpus: every document carries its own distinctive token so each
// probe has exactly one ground-truth chunk, identified by source_doc.
Corpus labeled_corpus(std::size_t docs) {
    Corpus out;
    for (std::size_t d = 0; d < docs; ++d) {
        std::ostringstream text;
        for (int t = 0; t < 24; ++t)
            text << (t ? " " : "") << "marker" << d << "x" << t % 6;
        out.emplace_back("label" + std::to_string(d), text.str());
    }
    return out;
}

double hit_rate_at_k(const LayeredGraph& g, Embedder& embedder, const Corpus& probes,
                     std::uint32_t k) {
    CostLedger ledger;
    std::size_t hits = 0;
    for (const auto& [doc_id, text] : probes) {
        QueryConfig qc;
        qc.k = k;
        qc.budget_tokens = 4096;
        auto res = retrieve(g, text, qc, embedder, ledger);
        note_budget(res.context, qc.budget_tokens);
        for (const auto& h : res.hits)
            if (g.node(h.id).chunk.source_doc == doc_id) {
                ++hits;
                break;
            }
    }
    return 100.0 * static_cast<double>(hits) / static_cast<double>(probes.size());
}

bool criterion_convergence() {
    auto corpus = labeled_corpus(120);
    Rig full_rig(55);
    auto full = full_rig.build(corpus);

    Rig inc_rig(55);
    Corpus half(corpus.begin(), corpus.begin() + 60);
    auto grown = inc_rig.build(half);
    std::size_t pos = 60;
    for (int batch = 0; batch < 10; ++batch) {
        std::size_t n = 6;
        Corpus slice(corpus.begin() + static_cast<std::ptrdiff_t>(pos),
                     corpus.begin() + static_cast<std::ptrdiff_t>(pos + n));
        pos += n;
        CostLedger ledger;
        insert_chunks(grown, slice, *inc_rig.embedder, *inc_rig.summarizer, ledger);
    }

    Corpus probes(corpus.begin(), corpus.begin() + 100);
    double full_rate = hit_rate_at_k(full, *full_rig.embedder, probes, 5);
    double inc_rate = hit_rate_at_k(grown, *inc_rig.embedder, probes, 5);
    return std::abs(full_rate - inc_rate) <= kHitRateTolPts;
}

// --- criteria 8 + 9: biased accounting and budget safety ------------------

bool criterion_biased_accounting(const LayeredGraph& g, Rig& rig) {
    std::size_t leaves = g.layers[0].size();
    std::size_t uppers = g.nodes.size() - leaves;
    if (leaves < 8 || uppers < 8) return false;  // fixture must offer both pools

    std::mt19937_64 rng(4004);
    for (int trial = 0; trial < 30; ++trial) {
        std::string q = "probe " + std::to_string(rng() % 1000) + " seam drill";
        CostLedger ledger;

        QueryConfig qc;
        qc.k = 10;
        qc.p = 0.8;
        qc.budget_tokens = 64 + static_cast<std::uint32_t>(rng() % 512);

        qc.mode = QueryMode::detailed;
        auto det = retrieve(g, q, qc, *rig.embedder, ledger);
        note_budget(det.context, qc.budget_tokens);
        if (det.hits.size() != 10) return false;
        auto leaf_hits = std::count_if(det.hits.begin(), det.hits.end(),
                                       [](const Hit& h) { return h.layer == 0; });
        if (leaf_hits != 8) return false;

        qc.mode = QueryMode::summarized;
        auto sum = retrieve(g, q, qc, *rig.embedder, ledger);
        note_budget(sum.context, qc.budget_tokens);
        if (sum.hits.size() != 10) return false;
        auto upper_hits = std::count_if(sum.hits.begin(), sum.hits.end(),
                                        [](const Hit& h) { return h.layer > 0; });
        if (upper_hits != 8) return false;

        qc.mode = QueryMode::collapsed;
        qc.p.reset();
        auto col = retrieve(g, q, qc, *rig.embedder, ledger);
        note_budget(col.context, qc.budget_tokens);
        if (col.hits.size() != 10) return false;
    }
    return true;
}

bool criterion_budget_safety() {
    return g_budget_checks > 0 && g_budget_violations == 0;
}

}  // namespace

int main() {
    int failures = 0;
    auto report = [&](int idx, const char* name, bool ok) {
        std::printf("%s - %d. %s\n", ok ? "PASS" : "FAIL", idx, name);
        if (!ok) ++failures;
    };

    report(1, "hyperplane collision rate matches the closed form (+/-0.02, 10000 planes)",
           criterion_collision_rate());

    Rig rig(99);
    auto corpus = synthetic_corpus(250, 128, 99);  // 1000 chunks of 32 tokens
    auto graph = rig.build(corpus);

    report(2, "segment bounds, tree integrity and decay hold through 100 single inserts",
           criterion_bounds_under_churn(graph, rig));
    report(3, "identical builds and snapshot round-trips are byte-identical",
           criterion_determinism());
    report(4, "500 single inserts stay local and each costs <= 3x depth summaries",
           criterion_locality(graph, rig));
    report(5, "incremental updates cost <50% (half-plus-ten) and <10% (one-entry) of rebuilds",
           criterion_update_cost(synthetic_corpus(400, 128, 99), rig.cfg));
    report(6, "collapsed top-k equals the exhaustive oracle (scores within 1e-9)",
           criterion_retrieval_oracle());
    report(7, "incremental hit-rate@5 within 2 points of the one-shot build",
           criterion_convergence());
    report(8, "biased modes reserve floor(p*k) slots exactly and always return k hits",
           criterion_biased_accounting(graph, rig));
    report(9, "every assembled context respected its token budget",
           criterion_budget_safety());

    return failures == 0 ? 0 : 1;
}
