#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "erarag/common.hpp"

namespace erarag {

using Embedding = std::vector<float>;

struct EmbedderConfig {
    ProviderKind kind = ProviderKind::mock;
    std::uint32_t dim = 64;
    std::uint64_t mock_seed = 0;     // mock only
    std::string endpoint;            // remote only; falls back to ERA_API_BASE
    std::string model;               // remote only
    std::string cache_path;          // remote response cache, beside the snapshot
    bool operator==(const EmbedderConfig&) const = default;
};

// v / |v|2, computed with double accumulation. Throws on the zero vector.
Embedding normalize(std::span<const float> v);

double cosine(std::span<const float> a, std::span<const float> b);

class Embedder {
public:
    virtual ~Embedder() = default;
    virtual Embedding embed_text(const std::string& text) = 0;
    virtual std::uint32_t dim() const = 0;
};

// Deterministic offline embedder: each whitespace token contributes a
// standard-normal vector seeded by (mock_seed, token digest), weighted by its
// multiplicity; the sum is normalized. Similar token multisets give similar
// vectors, which is all the structural tests need.
class MockEmbedder : public Embedder {
public:
    MockEmbedder(std::uint32_t dim, std::uint64_t seed);
    Embedding embed_text(const std::string& text) override;
    std::uint32_t dim() const override { return dim_; }

private:
    std::uint32_t dim_;
    std::uint64_t seed_;
};

// OpenAI-compatible POST /v1/embeddings client with exponential backoff and a
// persistent content-addressed cache (append-only JSONL of digest,dim,vector).
class RemoteEmbedder : public Embedder {
public:
    explicit RemoteEmbedder(const EmbedderConfig& cfg);
    ~RemoteEmbedder() override;
    Embedding embed_text(const std::string& text) override;
    std::vector<Embedding> embed_batch(const std::vector<std::string>& texts);
    std::uint32_t dim() const override { return dim_; }

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    std::uint32_t dim_;
};

std::unique_ptr<Embedder> make_embedder(const EmbedderConfig& cfg);

}  // namespace erarag
