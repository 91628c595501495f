#include "erarag/bench.hpp"

#include <sstream>

namespace erarag {

namespace {

BenchRow row_from(const CostLedger& ledger, Phase phase, const std::string& strategy,
                  std::uint32_t stage) {
    const auto& c = ledger.phase_totals(phase);
    BenchRow r;
    r.strategy = strategy;
    r.stage = stage;
    r.llm_calls = c.llm_calls;
    r.prompt_tokens = c.prompt_tokens;
    r.completion_tokens = c.completion_tokens;
    r.embed_calls = c.embed_calls;
    r.wall_ms = c.wall_ms;
    return r;
}

// Consecutive document batches: the first `initial` docs, then `rounds`
// near-equal groups over the rest.
std::vector<Corpus> batches(const Corpus& corpus, std::size_t rounds) {
    if (corpus.size() < rounds + 1)
        throw InputError("bench: corpus too small for the protocol");
    std::size_t initial = corpus.size() / 2;
    if (initial == 0) initial = 1;
    std::vector<Corpus> out;
    out.emplace_back(corpus.begin(), corpus.begin() + static_cast<std::ptrdiff_t>(initial));
    std::size_t rest = corpus.size() - initial;
    std::size_t base = rest / rounds;
    std::size_t rem = rest % rounds;
    std::size_t pos = initial;
    for (std::size_t i = 0; i < rounds; ++i) {
        std::size_t n = base + (i < rem ? 1 : 0);
        out.emplace_back(corpus.begin() + static_cast<std::ptrdiff_t>(pos),
                         corpus.begin() + static_cast<std::ptrdiff_t>(pos + n));
        pos += n;
    }
    return out;
}

std::vector<BenchRow> run_protocol(const std::vector<Corpus>& stages, const BuildConfig& config,
                                   bool run_incremental, bool run_rebuild) {
    std::vector<BenchRow> rows;
    auto embedder = make_embedder(config.embedder);
    auto summarizer = make_summarizer(config.summarizer);

    if (run_incremental) {
        CostLedger build_ledger;
        auto graph = build_graph(stages[0], config, *embedder, *summarizer, build_ledger);
        rows.push_back(row_from(build_ledger, Phase::build, "incremental", 0));
        for (std::uint32_t i = 1; i < stages.size(); ++i) {
            if (stages[i].empty()) continue;
            CostLedger ledger;
            insert_chunks(graph, stages[i], *embedder, *summarizer, ledger);
            rows.push_back(row_from(ledger, Phase::update, "incremental", i));
        }
    }
    if (run_rebuild) {
        Corpus cumulative;
        for (std::uint32_t i = 0; i < stages.size(); ++i) {
            cumulative.insert(cumulative.end(), stages[i].begin(), stages[i].end());
            CostLedger ledger;
            build_graph(cumulative, config, *embedder, *summarizer, ledger);
            rows.push_back(row_from(ledger, Phase::build, "rebuild", i));
        }
    }
    return rows;
}

}  // namespace

std::vector<BenchRow> bench_half_plus_ten(const Corpus& corpus, const BuildConfig& config,
                                          bool run_incremental, bool run_rebuild) {
    return run_protocol(batches(corpus, 10), config, run_incremental, run_rebuild);
}

std::vector<BenchRow> bench_one_entry(const Corpus& corpus, const BuildConfig& config,
                                      bool run_incremental, bool run_rebuild) {
    if (corpus.size() < 2) throw InputError("bench: one-entry protocol needs >= 2 documents");
    std::size_t initial = corpus.size() / 2;
    if (initial == 0) initial = 1;
    if (initial == corpus.size()) initial = corpus.size() - 1;
    std::vector<Corpus> stages;
    stages.emplace_back(corpus.begin(), corpus.begin() + static_cast<std::ptrdiff_t>(initial));
    stages.emplace_back(corpus.begin() + static_cast<std::ptrdiff_t>(initial),
                        corpus.begin() + static_cast<std::ptrdiff_t>(initial + 1));
    return run_protocol(stages, config, run_incremental, run_rebuild);
}

std::string bench_csv(const std::vector<BenchRow>& rows) {
    std::ostringstream out;
    out << "strategy,stage,llm_calls,prompt_tokens,completion_tokens,embed_calls,wall_ms\n";
    for (const auto& r : rows)
        out << r.strategy << ',' << r.stage << ',' << r.llm_calls << ',' << r.prompt_tokens << ','
            << r.completion_tokens << ',' << r.embed_calls << ',' << r.wall_ms << '\n';
    return out.str();
}

}  // namespace erarag
