#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "erarag/common.hpp"
#include "erarag/metrics.hpp"

namespace erarag {

struct SummarizerConfig {
    ProviderKind kind = ProviderKind::mock;
    std::string endpoint;  // remote only; falls back to ERA_API_BASE
    std::string model;     // remote only
    bool operator==(const SummarizerConfig&) const = default;
};

struct SummaryRequest {
    std::vector<std::string> member_texts;  // segment order
    std::uint32_t budget_tokens = 0;
};

struct SummaryResult {
    std::string text;
    TokenUsage usage;
    bool truncated = false;  // remote output exceeded the budget and was cut
};

class Summarizer {
public:
    virtual ~Summarizer() = default;
    virtual SummaryResult summarize(const SummaryRequest& req) = 0;
};

// Extractive mock: concatenates member texts in order and keeps the first
// budget_tokens tokens. prompt_tokens = total member tokens,
// completion_tokens = summary tokens. Order-sensitive by construction.
class MockSummarizer : public Summarizer {
public:
    SummaryResult summarize(const SummaryRequest& req) override;
};

// OpenAI-compatible POST /v1/chat/completions client. Sends the fixed summary
// prompt with the token budget inlined; over-budget outputs are truncated and
// flagged. Reads provider-reported usage when present.
class RemoteSummarizer : public Summarizer {
public:
    explicit RemoteSummarizer(const SummarizerConfig& cfg);
    ~RemoteSummarizer() override;
    SummaryResult summarize(const SummaryRequest& req) override;

    // Also used by the answer-generation path in retrieve.
    std::pair<std::string, TokenUsage> chat(const std::string& prompt);

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

std::unique_ptr<Summarizer> make_summarizer(const SummarizerConfig& cfg);

void validate(const SummaryRequest& req);

}  // namespace erarag
