#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "erarag/common.hpp"
#include "erarag/embed.hpp"
#include "erarag/lsh.hpp"
#include "erarag/partition.hpp"
#include "erarag/summarize.hpp"

namespace erarag {

enum class ChunkOrigin : std::uint8_t { original = 0, summary = 1 };

// Stopping rule for recursive summarization. smax keeps summarizing until the
// layer being summarized already fits in one segment's worth of nodes;
// dim_floor stops once a layer has fewer than dim + 1 nodes.
enum class StopRule : std::uint8_t { smax = 0, dim_floor = 1 };

struct Chunk {
    NodeId id = 0;
    std::string text;
    std::uint32_t token_len = 0;
    std::string source_doc;
    ChunkOrigin origin = ChunkOrigin::original;
};

struct GraphNode {
    NodeId id = 0;
    std::uint32_t layer = 0;
    Chunk chunk;
    Embedding embedding;
    HashCode code;
    std::optional<NodeId> parent_id;   // derived from child lists; not serialized
    std::vector<NodeId> child_ids;     // segment members, in segment order
    bool summary_truncated = false;
};

struct BuildConfig {
    std::uint64_t seed = 0;
    std::uint32_t dim = 64;
    std::uint32_t hyperplane_count = 16;
    SizeBounds bounds{2, 4};
    std::uint32_t chunk_tokens = 200;
    std::uint32_t summary_tokens = 64;
    std::uint32_t max_depth = 8;  // maximum layer index L
    StopRule stop_rule = StopRule::smax;
    EmbedderConfig embedder;
    SummarizerConfig summarizer;

    void validate() const;
    bool operator==(const BuildConfig&) const = default;
};

struct LayeredGraph {
    BuildConfig config;
    Hyperplanes hyperplanes;
    std::map<NodeId, GraphNode> nodes;
    std::vector<std::vector<NodeId>> layers;  // index = layer
    NodeId next_id = 1;

    NodeId allocate_id() { return next_id++; }

    const GraphNode& node(NodeId id) const;
    GraphNode& node(NodeId id);
    std::uint32_t top_layer() const;

    // Re-derives parent_id from child lists; throws IntegrityError if a node
    // has more than one parent.
    void rebuild_parent_links();
};

struct LayerStats {
    std::uint32_t layer = 0;
    std::size_t node_count = 0;
    double mean_segment_size = 0.0;  // mean child count of this layer's nodes
    std::uint64_t token_total = 0;
};

std::vector<LayerStats> layer_stats(const LayeredGraph& graph);

// Runs every structural invariant: segment bounds, tree integrity, geometric
// decay, unit norms, code lengths, token counts, summary budget. Returns a
// human-readable description per violation; empty means the graph is sound.
std::vector<std::string> verify_graph(const LayeredGraph& graph);

}  // namespace erarag
