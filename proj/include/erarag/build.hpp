#pragma once

#include <string>
#include <utility>
#include <vector>

#include "erarag/graph.hpp"
#include "erarag/metrics.hpp"

namespace erarag {

using Corpus = std::vector<std::pair<std::string, std::string>>;  // (doc_id, text)

// JSONL corpus: one {"id": ..., "text": ...} record per line, file order kept.
Corpus load_corpus_jsonl(const std::string& path);

// Splits each document into consecutive windows of chunk_budget whitespace
// tokens (the last window may be shorter). Ids are not assigned here.
std::vector<Chunk> chunk_corpus(const Corpus& docs, std::uint32_t chunk_budget);

// Full initial construction: chunk, embed, hash, then recursive
// partition/summarize rounds until the stopping rule fires. All provider
// calls are metered under phase=build.
LayeredGraph build_graph(const Corpus& corpus, const BuildConfig& config,
                         Embedder& embedder, Summarizer& summarizer, CostLedger& ledger);

// Internal step shared with the update path: partitions `member_ids` (nodes at
// `layer`) and creates one summary node per segment at layer+1. Appends new
// node ids to `graph.layers[layer + 1]`. Returns the created ids in segment
// order.
std::vector<NodeId> summarize_layer(LayeredGraph& graph, std::uint32_t layer,
                                    const std::vector<NodeId>& member_ids,
                                    Embedder& embedder, Summarizer& summarizer,
                                    CostLedger& ledger);

}  // namespace erarag
