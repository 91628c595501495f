#include "erarag/graph.hpp"

#include <cmath>
#include <set>
#include <sstream>

#include "erarag/tokens.hpp"

namespace erarag {

void BuildConfig::validate() const {
    bounds.validate();
    if (dim < 1) throw ConfigError("config: dim must be positive");
    if (hyperplane_count < 1) throw ConfigError("config: hyperplane count must be positive");
    if (chunk_tokens < 16) throw ConfigError("config: chunk_tokens must be >= 16");
    if (summary_tokens < 16) throw ConfigError("config: summary_tokens must be >= 16");
    if (embedder.dim != dim) throw ConfigError("config: embedder dim must match graph dim");
}

const GraphNode& LayeredGraph::node(NodeId id) const {
    auto it = nodes.find(id);
    if (it == nodes.end())
        throw InputError("unknown node id " + std::to_string(id));
    return it->second;
}

GraphNode& LayeredGraph::node(NodeId id) {
    auto it = nodes.find(id);
    if (it == nodes.end())
        throw InputError("unknown node id " + std::to_string(id));
    return it->second;
}

std::uint32_t LayeredGraph::top_layer() const {
    if (layers.empty()) throw InputError("graph has no layers (unbuilt)");
    return static_cast<std::uint32_t>(layers.size() - 1);
}

void LayeredGraph::rebuild_parent_links() {
    for (auto& [id, n] : nodes) n.parent_id.reset();
    for (auto& [id, n] : nodes) {
        for (NodeId child : n.child_ids) {
            auto it = nodes.find(child);
            if (it == nodes.end())
                throw IntegrityError("tree integrity: child " + std::to_string(child) +
                                     " of node " + std::to_string(id) + " does not exist");
            if (it->second.parent_id)
                throw IntegrityError("tree integrity: node " + std::to_string(child) +
                                     " has more than one parent");
            it->second.parent_id = id;
        }
    }
}

std::vector<LayerStats> layer_stats(const LayeredGraph& graph) {
    if (graph.layers.empty()) throw InputError("layer_stats: graph is unbuilt");
    std::vector<LayerStats> out;
    for (std::uint32_t l = 0; l < graph.layers.size(); ++l) {
        LayerStats s;
        s.layer = l;
        s.node_count = graph.layers[l].size();
        std::uint64_t children = 0;
        for (NodeId id : graph.layers[l]) {
            const auto& n = graph.node(id);
            s.token_total += n.chunk.token_len;
            children += n.child_ids.size();
        }
        s.mean_segment_size =
            l == 0 ? 0.0 : static_cast<double>(children) / static_cast<double>(s.node_count);
        out.push_back(s);
    }
    return out;
}

std::vector<std::string> verify_graph(const LayeredGraph& graph) {
    std::vector<std::string> violations;
    auto fail = [&](const std::string& msg) { violations.push_back(msg); };

    if (graph.layers.empty() || graph.layers[0].empty()) {
        fail("layers: layer 0 is empty");
        return violations;
    }

    // id bookkeeping
    std::set<NodeId> seen;
    for (std::uint32_t l = 0; l < graph.layers.size(); ++l) {
        for (NodeId id : graph.layers[l]) {
            if (!seen.insert(id).second)
                fail("layers: node " + std::to_string(id) + " listed twice");
            auto it = graph.nodes.find(id);
            if (it == graph.nodes.end()) {
                fail("layers: node " + std::to_string(id) + " missing from node map");
                continue;
            }
            if (it->second.layer != l)
                fail("layers: node " + std::to_string(id) + " has layer " +
                     std::to_string(it->second.layer) + " but is listed at " + std::to_string(l));
            if (id >= graph.next_id)
                fail("ids: node " + std::to_string(id) + " >= next_id");
        }
    }
    for (const auto& [id, n] : graph.nodes)
        if (!seen.contains(id))
            fail("layers: node " + std::to_string(id) + " not listed in any layer");

    const auto& bounds = graph.config.bounds;
    std::uint32_t top = static_cast<std::uint32_t>(graph.layers.size() - 1);

    // parent/child integrity, derived from child lists
    std::map<NodeId, NodeId> parent_of;
    for (const auto& [id, n] : graph.nodes) {
        for (NodeId c : n.child_ids) {
            auto it = graph.nodes.find(c);
            if (it == graph.nodes.end()) {
                fail("tree integrity: dangling child " + std::to_string(c));
                continue;
            }
            if (parent_of.contains(c))
                fail("tree integrity: node " + std::to_string(c) + " has two parents");
            parent_of[c] = id;
            if (n.layer == 0 || it->second.layer != n.layer - 1)
                fail("tree integrity: child " + std::to_string(c) + " of node " +
                     std::to_string(id) + " is not one layer below");
        }
    }
    for (const auto& [id, n] : graph.nodes) {
        if (n.layer < top && !parent_of.contains(id))
            fail("tree integrity: non-top node " + std::to_string(id) + " has no parent");
        if (n.parent_id && (!parent_of.contains(id) || parent_of[id] != *n.parent_id))
            fail("tree integrity: cached parent link of node " + std::to_string(id) +
                 " does not match child lists");
    }

    // segment bounds; a single undersized segment is allowed only when it
    // covers an entire layer smaller than s_min
    for (const auto& [id, n] : graph.nodes) {
        if (n.layer == 0) {
            if (!n.child_ids.empty())
                fail("tree integrity: layer-0 node " + std::to_string(id) + " has children");
            if (n.chunk.origin != ChunkOrigin::original)
                fail("origin: layer-0 node " + std::to_string(id) + " is not an original chunk");
            continue;
        }
        if (n.chunk.origin != ChunkOrigin::summary)
            fail("origin: summary node " + std::to_string(id) + " is not marked summary");
        std::size_t sz = n.child_ids.size();
        if (sz == 0) {
            fail("segment bounds: node " + std::to_string(id) + " has no children");
        } else if (sz > bounds.s_max) {
            fail("segment bounds: node " + std::to_string(id) + " has " + std::to_string(sz) +
                 " children > s_max");
        } else if (sz < bounds.s_min) {
            std::size_t below = graph.layers[n.layer - 1].size();
            if (!(graph.layers[n.layer].size() == 1 && below == sz))
                fail("segment bounds: node " + std::to_string(id) + " has " + std::to_string(sz) +
                     " children < s_min");
        }
    }

    // geometric decay
    for (std::uint32_t l = 0; l + 1 < graph.layers.size(); ++l) {
        std::size_t nl = graph.layers[l].size();
        std::size_t nl1 = graph.layers[l + 1].size();
        std::size_t cap = (nl + bounds.s_min - 1) / bounds.s_min;
        if (nl1 > cap)
            fail("decay: |layers[" + std::to_string(l + 1) + "]| = " + std::to_string(nl1) +
                 " exceeds ceil(" + std::to_string(nl) + "/s_min) = " + std::to_string(cap));
    }
    if (graph.layers.size() > static_cast<std::size_t>(graph.config.max_depth) + 1)
        fail("depth: layer count exceeds max depth");

    // per-node payload checks
    for (const auto& [id, n] : graph.nodes) {
        if (n.embedding.size() != graph.config.dim) {
            fail("embedding: node " + std::to_string(id) + " has wrong dimension");
            continue;
        }
        double sq = 0.0;
        for (float x : n.embedding) sq += static_cast<double>(x) * x;
        if (std::abs(std::sqrt(sq) - 1.0) > 1e-5)
            fail("unit norm: node " + std::to_string(id) + " embedding norm is " +
                 std::to_string(std::sqrt(sq)));
        if (n.code.length() != graph.hyperplanes.count)
            fail("hash code: node " + std::to_string(id) + " code length mismatch");
        if (n.chunk.token_len != token_count(n.chunk.text))
            fail("token count: node " + std::to_string(id) + " token_len is stale");
        if (n.chunk.origin == ChunkOrigin::summary &&
            n.chunk.token_len > graph.config.summary_tokens)
            fail("summary budget: node " + std::to_string(id) + " exceeds summary_tokens");
        if (n.chunk.id != n.id)
            fail("ids: node " + std::to_string(id) + " chunk id mismatch");
    }

    if (graph.hyperplanes.dim != graph.config.dim ||
        graph.hyperplanes.count != graph.config.hyperplane_count)
        fail("hyperplanes: stored matrix does not match config");

    return violations;
}

}  // namespace erarag
