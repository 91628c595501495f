#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "erarag/bench.hpp"
#include "erarag/persist.hpp"
#include "erarag/retrieve.hpp"
#include "erarag/tokens.hpp"

namespace {

using namespace erarag;

// Advisory lock beside the snapshot; released when the fd closes on exit.
struct PathLock {
    int fd = -1;
    explicit PathLock(const std::string& path) {
        fd = ::open((path + ".lock").c_str(), O_CREAT | O_RDWR, 0644);
        if (fd >= 0 && ::flock(fd, LOCK_EX) != 0) {
            ::close(fd);
            fd = -1;
        }
    }
    ~PathLock() {
        if (fd >= 0) ::close(fd);
    }
};

void emit_metrics(const CostLedger& ledger, const std::string& metrics_path) {
    if (metrics_path.empty()) {
        std::cout << ledger.report("csv");
    } else {
        std::ofstream out(metrics_path);
        out << ledger.report("csv");
    }
}

struct BuildFlags {
    std::string corpus_path;
    std::string out_path;
    std::string metrics_path;
    std::string embedder = "mock";
    std::string summarizer = "mock";
    std::string stop_rule = "smax";
    std::string embed_model;
    std::string chat_model;
    bool force = false;
    BuildConfig cfg;
};

void add_config_flags(CLI::App* cmd, BuildFlags& f) {
    cmd->add_option("--seed", f.cfg.seed, "PRNG seed for hyperplanes and mock providers");
    cmd->add_option("--hyperplanes", f.cfg.hyperplane_count, "number of LSH hyperplanes")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--smin", f.cfg.bounds.s_min, "segment size lower bound (must be > 1)")
        ->check(CLI::Range(2u, 1000000u));
    cmd->add_option("--smax", f.cfg.bounds.s_max, "segment size upper bound")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--chunk-tokens", f.cfg.chunk_tokens, "tokens per corpus chunk");
    cmd->add_option("--summary-tokens", f.cfg.summary_tokens, "summary token budget");
    cmd->add_option("--max-depth", f.cfg.max_depth, "maximum layer index");
    cmd->add_option("--dim", f.cfg.dim, "embedding dimensionality");
    cmd->add_option("--embedder", f.embedder, "embedding provider")
        ->check(CLI::IsMember({"mock", "remote"}));
    cmd->add_option("--summarizer", f.summarizer, "summarization provider")
        ->check(CLI::IsMember({"mock", "remote"}));
    cmd->add_option("--stop-rule", f.stop_rule, "recursion stopping rule")
        ->check(CLI::IsMember({"smax", "dim-floor"}));
    cmd->add_option("--embed-model", f.embed_model, "remote embedding model name");
    cmd->add_option("--chat-model", f.chat_model, "remote chat model name");
}

void finalize_config(BuildFlags& f) {
    f.cfg.embedder.kind = f.embedder == "remote" ? ProviderKind::remote : ProviderKind::mock;
    f.cfg.embedder.dim = f.cfg.dim;
    f.cfg.embedder.mock_seed = f.cfg.seed;
    f.cfg.embedder.model = f.embed_model;
    f.cfg.summarizer.kind = f.summarizer == "remote" ? ProviderKind::remote : ProviderKind::mock;
    f.cfg.summarizer.model = f.chat_model;
    f.cfg.stop_rule = f.stop_rule == "dim-floor" ? StopRule::dim_floor : StopRule::smax;
    if (f.cfg.embedder.kind == ProviderKind::remote && !f.out_path.empty())
        f.cfg.embedder.cache_path = f.out_path + ".embedcache";
}

int cmd_build(BuildFlags& f) {
    finalize_config(f);
    f.cfg.validate();
    PathLock lock(f.out_path);
    auto corpus = load_corpus_jsonl(f.corpus_path);
    auto embedder = make_embedder(f.cfg.embedder);
    auto summarizer = make_summarizer(f.cfg.summarizer);
    CostLedger ledger;
    auto graph = build_graph(corpus, f.cfg, *embedder, *summarizer, ledger);
    save_snapshot(graph, f.out_path, f.force);
    std::cout << "layers:";
    for (const auto& layer : graph.layers) std::cout << ' ' << layer.size();
    std::cout << '\n';
    emit_metrics(ledger, f.metrics_path);
    return 0;
}

int cmd_insert(const std::string& graph_path, const std::string& corpus_path,
               const std::string& out_path, bool verify_locality, bool force,
               const std::string& metrics_path) {
    PathLock lock(out_path);
    auto graph = load_snapshot(graph_path);
    auto embedder = make_embedder(graph.config.embedder);
    auto summarizer = make_summarizer(graph.config.summarizer);
    auto corpus = load_corpus_jsonl(corpus_path);
    CostLedger ledger;

    std::map<NodeId, std::vector<std::uint8_t>> before;
    if (verify_locality)
        for (const auto& [id, n] : graph.nodes)
            before[id] = serialize_node(n, graph.config.dim, graph.hyperplanes.count);

    auto report = insert_chunks(graph, corpus, *embedder, *summarizer, ledger);
    save_snapshot(graph, out_path, force || out_path == graph_path);

    std::cout << "inserted_chunks: " << report.inserted_chunk_ids.size() << '\n';
    for (std::size_t l = 0; l < report.per_layer.size(); ++l) {
        const auto& c = report.per_layer[l];
        std::cout << "layer " << l << ": affected_buckets=" << c.affected_buckets
                  << " resummarized=" << c.segments_resummarized
                  << " deleted=" << c.nodes_deleted << " created=" << c.nodes_created << '\n';
    }
    std::cout << "summarize_calls: " << report.summarize_calls
              << " embed_calls: " << report.embed_calls << '\n';
    std::cout << "token_delta: prompt=" << report.usage.prompt_tokens
              << " completion=" << report.usage.completion_tokens << '\n';
    std::cout << "new_layer_created: " << (report.new_layer_created ? "yes" : "no") << '\n';

    if (verify_locality) {
        std::vector<NodeId> seeds = report.inserted_chunk_ids;
        seeds.insert(seeds.end(), report.restructured_ids.begin(),
                     report.restructured_ids.end());
        auto closure = affected_closure(graph, seeds);
        std::set<NodeId> removed(report.removed_ids.begin(), report.removed_ids.end());
        std::size_t changed_outside = 0;
        for (const auto& [id, bytes] : before) {
            if (closure.contains(id) || removed.contains(id)) continue;
            auto it = graph.nodes.find(id);
            if (it == graph.nodes.end() ||
                serialize_node(it->second, graph.config.dim, graph.hyperplanes.count) != bytes)
                ++changed_outside;
        }
        std::cout << "locality: " << (changed_outside == 0 ? "ok" : "VIOLATED") << " ("
                  << changed_outside << " nodes changed outside the affected closure)\n";
        if (changed_outside != 0) return 1;
    }
    emit_metrics(ledger, metrics_path);
    return 0;
}

int cmd_query(const std::string& graph_path, const std::string& query, std::uint32_t k,
              std::uint32_t budget, const std::string& mode, double p, bool p_set,
              bool want_answer) {
    auto graph = load_snapshot(graph_path);
    QueryConfig qc;
    qc.k = k;
    qc.budget_tokens = budget;
    if (mode == "collapsed") {
        if (p_set) throw InputError("--p requires --mode detailed or summarized");
        qc.mode = QueryMode::collapsed;
    } else {
        qc.mode = mode == "detailed" ? QueryMode::detailed : QueryMode::summarized;
        if (!p_set) throw InputError("--mode " + mode + " requires --p");
        qc.p = p;
    }
    auto embedder = make_embedder(graph.config.embedder);
    CostLedger ledger;
    RetrievalResult res;
    if (want_answer) {
        std::unique_ptr<ChatClient> chat;
        if (graph.config.summarizer.kind == ProviderKind::mock) {
            chat = std::make_unique<MockChatClient>();
        } else {
            struct RemoteChat : ChatClient {
                RemoteSummarizer remote;
                explicit RemoteChat(const SummarizerConfig& c) : remote(c) {}
                std::pair<std::string, TokenUsage> complete(const std::string& prompt) override {
                    return remote.chat(prompt);
                }
            };
            chat = std::make_unique<RemoteChat>(graph.config.summarizer);
        }
        res = answer(graph, query, qc, *embedder, *chat, ledger);
    } else {
        res = retrieve(graph, query, qc, *embedder, ledger);
    }
    for (const auto& h : res.hits) {
        char line[128];
        std::snprintf(line, sizeof(line), "hit id=%llu layer=%u score=%.6f",
                      (unsigned long long)h.id, h.layer, h.score);
        std::cout << line << '\n';
    }
    std::cout << "context tokens: " << token_count(res.context) << "\n---\n"
              << res.context << '\n';
    if (res.answer) std::cout << "answer: " << *res.answer << '\n';
    if (res.answer_error) {
        std::cout << "answer error: " << *res.answer_error << '\n';
        return 1;
    }
    return 0;
}

int cmd_verify(const std::string& graph_path) {
    std::ifstream in(graph_path, std::ios::binary);
    if (!in) throw InputError("cannot open snapshot file: " + graph_path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    LayeredGraph graph;
    try {
        graph = deserialize_graph(bytes);
    } catch (const IntegrityError& e) {
        std::cout << "violation: " << e.what() << '\n';
        return 1;
    }
    auto violations = verify_graph(graph);
    if (violations.empty()) {
        std::cout << "ok: all structural invariants hold\n";
        return 0;
    }
    for (const auto& v : violations) std::cout << "violation: " << v << '\n';
    return 1;
}

int cmd_stats(const std::string& graph_path) {
    auto graph = load_snapshot(graph_path);
    std::cout << "layer,nodes,mean_segment_size,token_total\n";
    for (const auto& s : layer_stats(graph)) {
        char line[128];
        std::snprintf(line, sizeof(line), "%u,%zu,%.3f,%llu", s.layer, s.node_count,
                      s.mean_segment_size, (unsigned long long)s.token_total);
        std::cout << line << '\n';
    }
    return 0;
}

int cmd_bench(BuildFlags& f, const std::string& protocol, const std::string& baseline,
              const std::string& out_csv) {
    finalize_config(f);
    f.cfg.validate();
    auto corpus = load_corpus_jsonl(f.corpus_path);
    bool inc = baseline != "rebuild";
    bool reb = baseline != "incremental";
    auto rows = protocol == "one-entry" ? bench_one_entry(corpus, f.cfg, inc, reb)
                                        : bench_half_plus_ten(corpus, f.cfg, inc, reb);
    auto csv = bench_csv(rows);
    if (out_csv.empty()) {
        std::cout << csv;
    } else {
        std::ofstream out(out_csv);
        out << csv;
        std::cout << "wrote " << rows.size() << " rows to " << out_csv << '\n';
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Incrementally updatable hierarchical retrieval index"};
    app.require_subcommand(1);

    BuildFlags bf;
    auto* build = app.add_subcommand("build", "build a graph from a JSONL corpus");
    build->add_option("--corpus", bf.corpus_path, "JSONL corpus path")->required();
    build->add_option("--out", bf.out_path, "snapshot output path")->required();
    build->add_option("--metrics", bf.metrics_path, "write ledger CSV here instead of stdout");
    build->add_flag("--force", bf.force, "overwrite an existing snapshot");
    add_config_flags(build, bf);

    std::string in_graph, in_corpus, in_out, in_metrics;
    bool verify_locality = false, in_force = false;
    auto* insert = app.add_subcommand("insert", "insert new documents into a graph");
    insert->add_option("--graph", in_graph, "existing snapshot")->required();
    insert->add_option("--corpus", in_corpus, "JSONL corpus of new documents")->required();
    insert->add_option("--out", in_out, "updated snapshot path")->required();
    insert->add_option("--metrics", in_metrics, "write ledger CSV here instead of stdout");
    insert->add_flag("--verify-locality", verify_locality,
                     "diff unaffected nodes byte-for-byte before/after");
    insert->add_flag("--force", in_force, "overwrite an existing snapshot");

    std::string q_graph, q_text, q_mode = "collapsed";
    std::uint32_t q_k = 5, q_budget = 1 << 20;
    double q_p = 0.0;
    bool q_answer = false;
    auto* query = app.add_subcommand("query", "run retrieval against a snapshot");
    query->add_option("--graph", q_graph, "snapshot path")->required();
    query->add_option("--q", q_text, "query text")->required();
    auto* kopt = query->add_option("--k", q_k, "number of hits");
    query->add_option("--budget", q_budget, "context token budget");
    query->add_option("--mode", q_mode, "retrieval mode")
        ->check(CLI::IsMember({"collapsed", "detailed", "summarized"}));
    auto* popt = query->add_option("--p", q_p, "leaf/summary proportion for biased modes");
    query->add_flag("--answer", q_answer, "generate an answer with the chat client");

    std::string v_graph;
    auto* verify = app.add_subcommand("verify", "check all structural invariants");
    verify->add_option("--graph", v_graph, "snapshot path")->required();

    std::string s_graph;
    auto* stats = app.add_subcommand("stats", "per-layer statistics");
    stats->add_option("--graph", s_graph, "snapshot path")->required();

    BuildFlags benchf;
    std::string protocol = "half-plus-ten", baseline = "both", bench_out;
    auto* bench = app.add_subcommand("bench", "growth-protocol cost benchmark");
    bench->add_option("--corpus", benchf.corpus_path, "JSONL corpus path")->required();
    bench->add_option("--protocol", protocol, "growth protocol")
        ->check(CLI::IsMember({"half-plus-ten", "one-entry"}));
    bench->add_option("--baseline", baseline, "which strategies to run")
        ->check(CLI::IsMember({"rebuild", "incremental", "both"}));
    bench->add_option("--out", bench_out, "CSV output path (stdout if omitted)");
    add_config_flags(bench, benchf);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        std::cerr << "usage error: " << e.what() << '\n';
        return 2;
    }

    try {
        if (build->parsed()) return cmd_build(bf);
        if (insert->parsed())
            return cmd_insert(in_graph, in_corpus, in_out, verify_locality, in_force, in_metrics);
        if (query->parsed()) {
            if (kopt->count() && q_k == 0) throw InputError("--k must be positive");
            return cmd_query(q_graph, q_text, q_k, q_budget, q_mode, q_p, popt->count() > 0,
                             q_answer);
        }
        if (verify->parsed()) return cmd_verify(v_graph);
        if (stats->parsed()) return cmd_stats(s_graph);
        if (bench->parsed()) return cmd_bench(benchf, protocol, baseline, bench_out);
    } catch (const ConfigError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const InputError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}
