#pragma once

#include <random>
#include <sstream>
#include <string>

#include "erarag/build.hpp"

namespace testutil {

inline erarag::BuildConfig mock_config(std::uint64_t seed = 1, std::uint32_t dim = 16) {
    erarag::BuildConfig cfg;
    cfg.seed = seed;
    cfg.dim = dim;
    cfg.hyperplane_count = 8;
    cfg.bounds = {2, 4};
    cfg.chunk_tokens = 32;
    cfg.summary_tokens = 24;
    cfg.embedder.dim = dim;
    cfg.embedder.mock_seed = seed;
    return cfg;
}

// Deterministic synthetic corpus with a small shared vocabulary so documents
// overlap enough for hashing to form non-trivial buckets.
inline erarag::Corpus make_corpus(std::size_t docs, std::size_t tokens_per_doc,
                                  std::uint64_t seed = 9) {
    static const char* vocab[] = {
        "ore",   "vein",  "shaft",  "drill", "lamp",  "cart",  "rail",  "dust",
        "seam",  "coal",  "flint",  "spark", "gear",  "pump",  "rope",  "cage",
        "tunnel", "brace", "ledger", "quota", "shift", "crew",  "depth", "map"};
    std::mt19937_64 rng(seed);
    erarag::Corpus out;
    for (std::size_t d = 0; d < docs; ++d) {
        std::ostringstream text;
        for (std::size_t t = 0; t < tokens_per_doc; ++t) {
            if (t) text << ' ';
            text << vocab[rng() % (sizeof(vocab) / sizeof(vocab[0]))] << d % 7;
        }
        out.emplace_back("doc" + std::to_string(d), text.str());
    }
    return out;
}

}  // namespace testutil
