#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "erarag/graph.hpp"

namespace erarag {

// Snapshot format (little-endian throughout):
//   magic "ERAG", u16 major, u16 minor
//   config block, hyperplanes (seed, dim, count, count*dim f32),
//   next_id, layer id lists, then nodes in ascending id order.
// Counts are LEB128 varints, strings are length-prefixed UTF-8, embeddings
// are f32, hash codes are bit-packed. Saving an unchanged graph is
// byte-identical; parent links are rebuilt on load from child lists.
inline constexpr std::uint16_t kSnapshotMajor = 1;
inline constexpr std::uint16_t kSnapshotMinor = 0;

std::vector<std::uint8_t> serialize_graph(const LayeredGraph& graph);

// Per-node encoding, used by locality checks to compare nodes byte-for-byte.
std::vector<std::uint8_t> serialize_node(const GraphNode& node, std::uint32_t dim,
                                         std::uint32_t code_bits);

LayeredGraph deserialize_graph(const std::vector<std::uint8_t>& bytes);

// Refuses to overwrite an existing file unless force is set.
void save_snapshot(const LayeredGraph& graph, const std::string& path, bool force = false);

// Runs verify_graph after parsing; throws IntegrityError naming the first
// violated invariant.
LayeredGraph load_snapshot(const std::string& path);

}  // namespace erarag
