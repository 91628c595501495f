#include "erarag/build.hpp"

#include <fstream>

#include <json.hpp>

#include "erarag/tokens.hpp"

namespace erarag {

Corpus load_corpus_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open corpus file: " + path);
    Corpus docs;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.contains("id") || !j.contains("text"))
            throw InputError("corpus line " + std::to_string(lineno) +
                             " is not a {\"id\", \"text\"} record");
        docs.emplace_back(j["id"].get<std::string>(), j["text"].get<std::string>());
    }
    return docs;
}

std::vector<Chunk> chunk_corpus(const Corpus& docs, std::uint32_t chunk_budget) {
    if (chunk_budget < 16) throw ConfigError("chunk_corpus: chunk_budget must be >= 16");
    if (docs.empty()) throw InputError("chunk_corpus: empty corpus");
    std::vector<Chunk> chunks;
    for (const auto& [doc_id, text] : docs) {
        auto toks = split_tokens(text);
        for (std::size_t pos = 0; pos < toks.size(); pos += chunk_budget) {
            Chunk c;
            c.text = join_tokens(toks, pos, chunk_budget);
            c.token_len = token_count(c.text);
            c.source_doc = doc_id;
            c.origin = ChunkOrigin::original;
            chunks.push_back(std::move(c));
        }
    }
    if (chunks.empty()) throw InputError("chunk_corpus: corpus contains no tokens");
    return chunks;
}

std::vector<NodeId> summarize_layer(LayeredGraph& graph, std::uint32_t layer,
                                    const std::vector<NodeId>& member_ids,
                                    Embedder& embedder, Summarizer& summarizer,
                                    CostLedger& ledger) {
    std::vector<std::pair<NodeId, HashCode>> keyed;
    keyed.reserve(member_ids.size());
    for (NodeId id : member_ids) keyed.emplace_back(id, graph.node(id).code);
    auto segments = repartition(assign_buckets(keyed), graph.config.bounds);

    if (graph.layers.size() <= layer + 1) graph.layers.resize(layer + 2);

    std::vector<NodeId> created;
    for (const auto& seg : segments) {
        SummaryRequest req;
        req.budget_tokens = graph.config.summary_tokens;
        for (NodeId id : seg.member_ids) req.member_texts.push_back(graph.node(id).chunk.text);
        auto res = summarizer.summarize(req);
        ledger.record(CostEvent::summarize, res.usage, static_cast<int>(layer + 1));

        GraphNode n;
        n.id = graph.allocate_id();
        n.layer = layer + 1;
        n.chunk.id = n.id;
        n.chunk.text = res.text;
        n.chunk.token_len = token_count(res.text);
        n.chunk.origin = ChunkOrigin::summary;
        n.summary_truncated = res.truncated;
        n.embedding = embedder.embed_text(n.chunk.text.empty() ? "(empty)" : n.chunk.text);
        ledger.record(CostEvent::embed, TokenUsage{}, static_cast<int>(layer + 1));
        n.code = hash_vector(n.embedding, graph.hyperplanes);
        n.child_ids = seg.member_ids;
        for (NodeId child : seg.member_ids) graph.node(child).parent_id = n.id;

        graph.layers[layer + 1].push_back(n.id);
        created.push_back(n.id);
        graph.nodes.emplace(n.id, std::move(n));
    }
    return created;
}

LayeredGraph build_graph(const Corpus& corpus, const BuildConfig& config,
                         Embedder& embedder, Summarizer& summarizer, CostLedger& ledger) {
    config.validate();
    auto chunks = chunk_corpus(corpus, config.chunk_tokens);

    LayeredGraph graph;
    graph.config = config;
    graph.hyperplanes = sample_hyperplanes(config.seed, config.dim, config.hyperplane_count);

    bool own_phase = !ledger.active_phase();
    if (own_phase) ledger.begin_phase(Phase::build);

    graph.layers.resize(1);
    for (auto& c : chunks) {
        GraphNode n;
        n.id = graph.allocate_id();
        n.layer = 0;
        c.id = n.id;
        n.chunk = std::move(c);
        n.embedding = embedder.embed_text(n.chunk.text);
        ledger.record(CostEvent::embed, TokenUsage{}, 0);
        n.code = hash_vector(n.embedding, graph.hyperplanes);
        graph.layers[0].push_back(n.id);
        graph.nodes.emplace(n.id, std::move(n));
    }

    // Recursive summarization. A layer that already fits within s_max gets one
    // final round (collapsing it to a single root), then recursion stops; a
    // single-node layer is never summarized. The dim_floor rule instead halts
    // as soon as a layer has fewer than dim + 1 nodes.
    while (true) {
        std::uint32_t top = graph.top_layer();
        std::size_t top_size = graph.layers[top].size();
        if (top_size <= 1 || top >= config.max_depth) break;
        if (config.stop_rule == StopRule::dim_floor && top_size < config.dim + 1) break;
        summarize_layer(graph, top, graph.layers[top], embedder, summarizer, ledger);
        if (top_size <= config.bounds.s_max) break;
    }

    if (own_phase) ledger.end_phase();
    graph.rebuild_parent_links();
    return graph;
}

}  // namespace erarag
