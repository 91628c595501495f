#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "erarag/graph.hpp"
#include "erarag/metrics.hpp"

namespace erarag {

enum class QueryMode { collapsed, detailed, summarized };

struct QueryConfig {
    std::uint32_t k = 5;
    std::uint32_t budget_tokens = 1 << 20;
    QueryMode mode = QueryMode::collapsed;
    std::optional<double> p;  // biased modes only

    void validate() const;
};

struct Hit {
    NodeId id = 0;
    double score = 0.0;
    std::uint32_t layer = 0;
};

struct RetrievalResult {
    std::vector<Hit> hits;     // score descending, ties by ascending id
    std::string context;       // hit texts joined by "\n\n", whole chunks under budget
    std::optional<std::string> answer;
    std::optional<std::string> answer_error;  // provider failure, hits preserved
    TokenUsage usage;
};

// Exact brute-force cosine top-k over every node whose layer passes the
// filter. Desk-scale exactness is the contract; the store is a seam for
// approximate backends.
std::vector<Hit> top_k(const LayeredGraph& graph, std::span<const float> query_embedding,
                       std::uint32_t k, const std::optional<std::set<std::uint32_t>>& layer_filter = {});

RetrievalResult retrieve(const LayeredGraph& graph, const std::string& query_text,
                         const QueryConfig& cfg, Embedder& embedder, CostLedger& ledger);

// Chat client used for answer generation; mock echoes a deterministic digest
// of (query, context) for pipeline tests.
class ChatClient {
public:
    virtual ~ChatClient() = default;
    virtual std::pair<std::string, TokenUsage> complete(const std::string& prompt) = 0;
};

class MockChatClient : public ChatClient {
public:
    std::pair<std::string, TokenUsage> complete(const std::string& prompt) override;
};

std::string query_prompt(const std::string& query_text, const std::string& context);

RetrievalResult answer(const LayeredGraph& graph, const std::string& query_text,
                       const QueryConfig& cfg, Embedder& embedder, ChatClient& chat,
                       CostLedger& ledger);

}  // namespace erarag
