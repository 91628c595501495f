#include "erarag/embed.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "erarag/rng.hpp"
#include "erarag/tokens.hpp"

namespace erarag {

Embedding normalize(std::span<const float> v) {
    double sq = 0.0;
    for (float x : v) sq += static_cast<double>(x) * x;
    if (sq <= 0.0) throw InputError("normalize: zero vector");
    double inv = 1.0 / std::sqrt(sq);
    Embedding out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i)
        out[i] = static_cast<float>(v[i] * inv);
    return out;
}

double cosine(std::span<const float> a, std::span<const float> b) {
    if (a.size() != b.size()) throw InputError("cosine: dimension mismatch");
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += static_cast<double>(a[i]) * b[i];
        na += static_cast<double>(a[i]) * a[i];
        nb += static_cast<double>(b[i]) * b[i];
    }
    if (na <= 0.0 || nb <= 0.0) throw InputError("cosine: zero vector");
    return dot / std::sqrt(na * nb);
}

MockEmbedder::MockEmbedder(std::uint32_t dim, std::uint64_t seed)
    : dim_(dim), seed_(seed) {
    if (dim < 2) throw ConfigError("mock embedder requires dim >= 2");
}

Embedding MockEmbedder::embed_text(const std::string& text) {
    if (text.empty()) throw InputError("embed_text: empty text");
    auto toks = split_tokens(text);
    if (toks.empty()) throw InputError("embed_text: whitespace-only text");

    std::vector<double> acc(dim_, 0.0);
    std::map<std::string_view, std::uint32_t> counts;
    for (auto t : toks) counts[t] += 1;
    for (const auto& [tok, n] : counts) {
        NormalStream stream(mix64(seed_, fnv1a64(tok)));
        for (std::uint32_t i = 0; i < dim_; ++i)
            acc[i] += static_cast<double>(n) * stream.next();
    }
    std::vector<float> raw(dim_);
    for (std::uint32_t i = 0; i < dim_; ++i) raw[i] = static_cast<float>(acc[i]);
    return normalize(raw);
}

// ---------------------------------------------------------------------------
// Remote provider

namespace {

std::string env_or(const char* name, const std::string& fallback) {
    const char* v = std::getenv(name);
    return v ? std::string(v) : fallback;
}

struct ParsedUrl {
    std::string host_port;  // scheme://host[:port]
    std::string base_path;  // path prefix, no trailing slash
};

ParsedUrl parse_endpoint(const std::string& url) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos)
        throw ConfigError("embedder endpoint must include a scheme: " + url);
    auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, ""};
    std::string path = url.substr(path_start);
    while (!path.empty() && path.back() == '/') path.pop_back();
    return {url.substr(0, path_start), path};
}

}  // namespace

struct RemoteEmbedder::Impl {
    EmbedderConfig cfg;
    std::string endpoint;
    std::string api_key;
    std::mutex cache_mu;
    std::map<std::string, Embedding> cache;

    std::string cache_key(const std::string& text) const {
        std::ostringstream k;
        k << cfg.model << ':' << std::hex << fnv1a64(text) << ':' << fnv1a64(text + "#2");
        return k.str();
    }

    void load_cache() {
        if (cfg.cache_path.empty()) return;
        std::ifstream in(cfg.cache_path);
        if (!in) return;
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            auto j = nlohmann::json::parse(line, nullptr, false);
            if (j.is_discarded()) continue;
            Embedding v = j.value("vector", Embedding{});
            if (!v.empty()) cache[j.value("digest", "")] = std::move(v);
        }
    }

    void append_cache(const std::string& key, const Embedding& v) {
        if (cfg.cache_path.empty()) return;
        nlohmann::json j{{"digest", key}, {"dim", v.size()}, {"vector", v}};
        std::ofstream out(cfg.cache_path, std::ios::app);
        out << j.dump() << '\n';
    }

    std::vector<Embedding> request(const std::vector<std::string>& texts) {
        auto parsed = parse_endpoint(endpoint);
        nlohmann::json body{{"model", cfg.model}, {"input", texts}};

        int delay_s = 1;
        std::string last_err;
        for (int attempt = 1; attempt <= 5; ++attempt) {
            httplib::Client cli(parsed.host_port);
            cli.set_read_timeout(120, 0);
            httplib::Headers headers;
            if (!api_key.empty()) headers.emplace("Authorization", "Bearer " + api_key);
            auto res = cli.Post(parsed.base_path + "/v1/embeddings", headers,
                                body.dump(), "application/json");
            if (res && res->status == 200) {
                auto j = nlohmann::json::parse(res->body, nullptr, false);
                if (j.is_discarded() || !j.contains("data"))
                    throw ProviderError("embeddings response is not valid JSON", attempt);
                std::vector<Embedding> out(texts.size());
                for (const auto& item : j["data"]) {
                    std::size_t idx = item.value("index", out.size());
                    if (idx >= out.size())
                        throw ProviderError("embeddings response index out of range", attempt);
                    out[idx] = item["embedding"].get<Embedding>();
                }
                return out;
            }
            last_err = res ? "HTTP " + std::to_string(res->status)
                           : "transport error: " + httplib::to_string(res.error());
            if (attempt < 5) {
                std::this_thread::sleep_for(std::chrono::seconds(delay_s));
                delay_s *= 2;
            }
        }
        throw ProviderError("embeddings request failed after 5 tries: " + last_err, 5);
    }
};

RemoteEmbedder::RemoteEmbedder(const EmbedderConfig& cfg)
    : impl_(std::make_unique<Impl>()), dim_(cfg.dim) {
    impl_->cfg = cfg;
    impl_->endpoint = cfg.endpoint.empty() ? env_or("ERA_API_BASE", "") : cfg.endpoint;
    impl_->api_key = env_or("ERA_API_KEY", "");
    if (impl_->endpoint.empty())
        throw ConfigError("remote embedder requires an endpoint (flag or ERA_API_BASE)");
    if (cfg.model.empty())
        throw ConfigError("remote embedder requires a model name");
    impl_->load_cache();
}

RemoteEmbedder::~RemoteEmbedder() = default;

std::vector<Embedding> RemoteEmbedder::embed_batch(const std::vector<std::string>& texts) {
    std::vector<Embedding> out(texts.size());
    std::vector<std::size_t> missing;
    {
        std::lock_guard lock(impl_->cache_mu);
        for (std::size_t i = 0; i < texts.size(); ++i) {
            if (texts[i].empty()) throw InputError("embed_text: empty text");
            auto it = impl_->cache.find(impl_->cache_key(texts[i]));
            if (it != impl_->cache.end())
                out[i] = it->second;
            else
                missing.push_back(i);
        }
    }
    // batches of at most 64 inputs
    for (std::size_t start = 0; start < missing.size(); start += 64) {
        std::size_t end = std::min(missing.size(), start + 64);
        std::vector<std::string> batch;
        for (std::size_t i = start; i < end; ++i) batch.push_back(texts[missing[i]]);
        auto vecs = impl_->request(batch);
        std::lock_guard lock(impl_->cache_mu);
        for (std::size_t i = start; i < end; ++i) {
            Embedding& raw = vecs[i - start];
            if (raw.empty())
                throw ProviderError("provider returned an empty embedding");
            double sq = 0.0;
            for (float x : raw) sq += static_cast<double>(x) * x;
            if (sq <= 0.0)
                throw ProviderError("provider returned a zero-norm embedding");
            Embedding unit = normalize(raw);
            auto key = impl_->cache_key(texts[missing[i]]);
            impl_->cache[key] = unit;
            impl_->append_cache(key, unit);
            out[missing[i]] = std::move(unit);
        }
    }
    for (auto& v : out)
        if (v.size() != dim_)
            throw ProviderError("embedding dim " + std::to_string(v.size()) +
                                " does not match configured dim " + std::to_string(dim_));
    return out;
}

Embedding RemoteEmbedder::embed_text(const std::string& text) {
    return embed_batch({text})[0];
}

std::unique_ptr<Embedder> make_embedder(const EmbedderConfig& cfg) {
    if (cfg.kind == ProviderKind::mock)
        return std::make_unique<MockEmbedder>(cfg.dim, cfg.mock_seed);
    return std::make_unique<RemoteEmbedder>(cfg);
}

}  // namespace erarag
