#include "erarag/summarize.hpp"

#include <chrono>
#include <cstdlib>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "erarag/tokens.hpp"

namespace erarag {

void validate(const SummaryRequest& req) {
    if (req.member_texts.empty())
        throw InputError("summarize: at least one member text is required");
    if (req.budget_tokens < 1)
        throw InputError("summarize: budget_tokens must be positive");
}

SummaryResult MockSummarizer::summarize(const SummaryRequest& req) {
    validate(req);
    std::string joined;
    std::uint64_t prompt = 0;
    for (const auto& t : req.member_texts) {
        prompt += token_count(t);
        if (!joined.empty()) joined += ' ';
        joined += t;
    }
    auto toks = split_tokens(joined);
    SummaryResult res;
    res.text = join_tokens(toks, 0, req.budget_tokens);
    res.usage.prompt_tokens = prompt;
    res.usage.completion_tokens = token_count(res.text);
    return res;
}

// ---------------------------------------------------------------------------

namespace {

std::string env_or(const char* name, const std::string& fallback) {
    const char* v = std::getenv(name);
    return v ? std::string(v) : fallback;
}

std::string summary_prompt(const SummaryRequest& req) {
    std::string grouped;
    for (const auto& t : req.member_texts) {
        if (!grouped.empty()) grouped += '\n';
        grouped += t;
    }
    return "Summarize the following text within " + std::to_string(req.budget_tokens) +
           " tokens.\nInclude as many key details as possible. Output ONLY the summary: " +
           grouped;
}

}  // namespace

struct RemoteSummarizer::Impl {
    SummarizerConfig cfg;
    std::string endpoint;
    std::string api_key;

    std::pair<std::string, TokenUsage> chat(const std::string& prompt) {
        auto scheme_end = endpoint.find("://");
        if (scheme_end == std::string::npos)
            throw ConfigError("summarizer endpoint must include a scheme: " + endpoint);
        auto path_start = endpoint.find('/', scheme_end + 3);
        std::string host = path_start == std::string::npos ? endpoint
                                                           : endpoint.substr(0, path_start);
        std::string base = path_start == std::string::npos ? "" : endpoint.substr(path_start);
        while (!base.empty() && base.back() == '/') base.pop_back();

        nlohmann::json body{
            {"model", cfg.model},
            {"messages", nlohmann::json::array({{{"role", "user"}, {"content", prompt}}})}};

        int delay_s = 1;
        std::string last_err;
        for (int attempt = 1; attempt <= 5; ++attempt) {
            httplib::Client cli(host);
            cli.set_read_timeout(300, 0);
            httplib::Headers headers;
            if (!api_key.empty()) headers.emplace("Authorization", "Bearer " + api_key);
            auto res = cli.Post(base + "/v1/chat/completions", headers, body.dump(),
                                "application/json");
            if (res && res->status == 200) {
                auto j = nlohmann::json::parse(res->body, nullptr, false);
                if (j.is_discarded() || !j.contains("choices") || j["choices"].empty())
                    throw ProviderError("chat response is not valid JSON", attempt);
                std::string text = j["choices"][0]["message"].value("content", "");
                TokenUsage usage;
                if (j.contains("usage")) {
                    usage.prompt_tokens = j["usage"].value("prompt_tokens", 0ULL);
                    usage.completion_tokens = j["usage"].value("completion_tokens", 0ULL);
                } else {
                    usage.prompt_tokens = token_count(prompt);
                    usage.completion_tokens = token_count(text);
                }
                return {text, usage};
            }
            last_err = res ? "HTTP " + std::to_string(res->status)
                           : "transport error: " + httplib::to_string(res.error());
            if (attempt < 5) {
                std::this_thread::sleep_for(std::chrono::seconds(delay_s));
                delay_s *= 2;
            }
        }
        throw ProviderError("chat request failed after 5 tries: " + last_err, 5);
    }
};

RemoteSummarizer::RemoteSummarizer(const SummarizerConfig& cfg)
    : impl_(std::make_unique<Impl>()) {
    impl_->cfg = cfg;
    impl_->endpoint = cfg.endpoint.empty() ? env_or("ERA_API_BASE", "") : cfg.endpoint;
    impl_->api_key = env_or("ERA_API_KEY", "");
    if (impl_->endpoint.empty())
        throw ConfigError("remote summarizer requires an endpoint (flag or ERA_API_BASE)");
    if (cfg.model.empty())
        throw ConfigError("remote summarizer requires a model name");
}

RemoteSummarizer::~RemoteSummarizer() = default;

std::pair<std::string, TokenUsage> RemoteSummarizer::chat(const std::string& prompt) {
    return impl_->chat(prompt);
}

SummaryResult RemoteSummarizer::summarize(const SummaryRequest& req) {
    validate(req);
    auto [text, usage] = impl_->chat(summary_prompt(req));
    SummaryResult res;
    res.usage = usage;
    if (token_count(text) > req.budget_tokens) {
        auto toks = split_tokens(text);
        res.text = join_tokens(toks, 0, req.budget_tokens);
        res.truncated = true;
    } else {
        res.text = text;
    }
    return res;
}

std::unique_ptr<Summarizer> make_summarizer(const SummarizerConfig& cfg) {
    if (cfg.kind == ProviderKind::mock) return std::make_unique<MockSummarizer>();
    return std::make_unique<RemoteSummarizer>(cfg);
}

}  // namespace erarag
