#pragma once

#include <set>
#include <vector>

#include "erarag/build.hpp"

namespace erarag {

struct UpdateReport {
    std::vector<NodeId> inserted_chunk_ids;
    struct LayerCounts {
        std::uint64_t affected_buckets = 0;
        std::uint64_t segments_resummarized = 0;
        std::uint64_t nodes_deleted = 0;
        std::uint64_t nodes_created = 0;
    };
    std::vector<LayerCounts> per_layer;  // index = layer
    TokenUsage usage;                    // token deltas of this update
    std::uint64_t summarize_calls = 0;
    std::uint64_t embed_calls = 0;
    bool new_layer_created = false;

    // Every node id created or whose child list changed; together with
    // inserted_chunk_ids these seed the affected closure for locality checks.
    std::vector<NodeId> restructured_ids;

    // Old summary nodes deleted during propagation; part of the update's
    // footprint even though they no longer appear in the graph.
    std::vector<NodeId> removed_ids;
};

// Algorithm: hash new chunks with the frozen hyperplanes, route them into the
// segment owning their code (new segment for unseen codes), re-check bounds on
// affected segments only, re-summarize segments whose membership changed
// (replacing the old parent with a fresh node), and propagate the replacements
// upward as inserts at the next layer. Grows a new top layer when the top
// exceeds s_max. Runs on a staged copy; the graph is untouched on failure.
UpdateReport insert_chunks(LayeredGraph& graph, const Corpus& new_texts,
                           Embedder& embedder, Summarizer& summarizer, CostLedger& ledger);

// Seed ids plus all their ancestors up to the top layer.
std::set<NodeId> affected_closure(const LayeredGraph& graph, const std::vector<NodeId>& seeds);

}  // namespace erarag
