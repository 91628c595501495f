#include "erarag/retrieve.hpp"

#include <algorithm>

#include "erarag/rng.hpp"
#include "erarag/tokens.hpp"

namespace erarag {

void QueryConfig::validate() const {
    if (k == 0) throw InputError("query: k must be positive");
    if (budget_tokens == 0) throw InputError("query: budget must be positive");
    if (mode == QueryMode::collapsed) return;
    if (!p) throw InputError("query: detailed/summarized modes require p");
    if (*p < 0.0 || *p > 1.0) throw InputError("query: p must be in [0, 1]");
}

std::vector<Hit> top_k(const LayeredGraph& graph, std::span<const float> query_embedding,
                       std::uint32_t k,
                       const std::optional<std::set<std::uint32_t>>& layer_filter) {
    if (k == 0) throw InputError("top_k: k must be positive");
    std::vector<Hit> scored;
    for (const auto& [id, n] : graph.nodes) {
        if (layer_filter && !layer_filter->contains(n.layer)) continue;
        scored.push_back(Hit{id, cosine(query_embedding, n.embedding), n.layer});
    }
    std::sort(scored.begin(), scored.end(), [](const Hit& a, const Hit& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.id < b.id;
    });
    if (scored.size() > k) scored.resize(k);
    return scored;
}

namespace {

std::string assemble_context(const LayeredGraph& graph, const std::vector<Hit>& hits,
                             std::uint32_t budget) {
    std::string context;
    std::uint32_t used = 0;
    for (const auto& h : hits) {
        const auto& text = graph.node(h.id).chunk.text;
        std::uint32_t len = graph.node(h.id).chunk.token_len;
        if (used + len > budget) break;  // whole-chunk granularity
        if (!context.empty()) context += "\n\n";
        context += text;
        used += len;
    }
    return context;
}

}  // namespace

RetrievalResult retrieve(const LayeredGraph& graph, const std::string& query_text,
                         const QueryConfig& cfg, Embedder& embedder, CostLedger& ledger) {
    cfg.validate();
    if (graph.layers.empty() || graph.layers[0].empty())
        throw InputError("retrieve: graph is empty");

    bool own_phase = !ledger.active_phase();
    if (own_phase) ledger.begin_phase(Phase::query);

    RetrievalResult res;
    auto qe = embedder.embed_text(query_text);
    ledger.record(CostEvent::embed, TokenUsage{});

    if (cfg.mode == QueryMode::collapsed) {
        res.hits = top_k(graph, qe, cfg.k);
    } else {
        std::set<std::uint32_t> leaf{0};
        std::set<std::uint32_t> upper;
        for (std::uint32_t l = 1; l < graph.layers.size(); ++l) upper.insert(l);

        auto primary_is_leaf = cfg.mode == QueryMode::detailed;
        std::uint32_t primary_want = static_cast<std::uint32_t>(*cfg.p * cfg.k);
        auto& primary_filter = primary_is_leaf ? leaf : upper;
        auto& secondary_filter = primary_is_leaf ? upper : leaf;

        std::vector<Hit> primary =
            primary_want == 0 ? std::vector<Hit>{}
                              : top_k(graph, qe, primary_want, primary_filter);
        // shortfall in one pool is backfilled from the other so k hits return
        std::uint32_t remaining = cfg.k - static_cast<std::uint32_t>(primary.size());
        std::vector<Hit> secondary =
            remaining == 0 ? std::vector<Hit>{} : top_k(graph, qe, remaining, secondary_filter);
        if (primary.size() + secondary.size() < cfg.k) {
            std::uint32_t shortfall =
                cfg.k - static_cast<std::uint32_t>(primary.size() + secondary.size());
            auto extra = top_k(graph, qe, static_cast<std::uint32_t>(primary.size()) + shortfall,
                               primary_filter);
            for (const auto& h : extra) {
                if (std::none_of(primary.begin(), primary.end(),
                                 [&](const Hit& p) { return p.id == h.id; }))
                    primary.push_back(h);
                if (primary.size() + secondary.size() >= cfg.k) break;
            }
        }
        res.hits = std::move(primary);
        res.hits.insert(res.hits.end(), secondary.begin(), secondary.end());
        std::sort(res.hits.begin(), res.hits.end(), [](const Hit& a, const Hit& b) {
            if (a.score != b.score) return a.score > b.score;
            return a.id < b.id;
        });
    }

    res.context = assemble_context(graph, res.hits, cfg.budget_tokens);
    if (own_phase) ledger.end_phase();
    return res;
}

std::string query_prompt(const std::string& query_text, const std::string& context) {
    return "Given external context:" + context +
           "\nGive the best full answer amongst the option to question:" + query_text;
}

std::pair<std::string, TokenUsage> MockChatClient::complete(const std::string& prompt) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "mock-answer-%016llx",
                  static_cast<unsigned long long>(fnv1a64(prompt)));
    TokenUsage usage;
    usage.prompt_tokens = token_count(prompt);
    usage.completion_tokens = 1;
    return {buf, usage};
}

RetrievalResult answer(const LayeredGraph& graph, const std::string& query_text,
                       const QueryConfig& cfg, Embedder& embedder, ChatClient& chat,
                       CostLedger& ledger) {
    bool own_phase = !ledger.active_phase();
    if (own_phase) ledger.begin_phase(Phase::query);
    auto res = retrieve(graph, query_text, cfg, embedder, ledger);
    try {
        auto [text, usage] = chat.complete(query_prompt(query_text, res.context));
        ledger.record(CostEvent::generate, usage);
        res.answer = text;
        res.usage += usage;
    } catch (const ProviderError& e) {
        res.answer_error = e.what();
    }
    if (own_phase) ledger.end_phase();
    return res;
}

}  // namespace erarag
