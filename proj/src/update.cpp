#include "erarag/update.hpp"

#include <algorithm>
#include <optional>

#include "erarag/tokens.hpp"

namespace erarag {

std::set<NodeId> affected_closure(const LayeredGraph& graph, const std::vector<NodeId>& seeds) {
    std::set<NodeId> out;
    for (NodeId seed : seeds) {
        NodeId cur = seed;
        graph.node(cur);  // throws on unknown id
        while (out.insert(cur).second) {
            const auto& n = graph.node(cur);
            if (!n.parent_id) break;
            cur = *n.parent_id;
        }
    }
    return out;
}

namespace {

// Working view of one segment of a layer during propagation.
struct SegState {
    std::optional<NodeId> parent;   // current summary node at layer+1, if any
    std::vector<NodeId> members;    // (code, id)-ordered
    bool affected = false;
    std::vector<NodeId> consumed;   // old parents to delete once re-summarized
};

HashCode min_member_code(const LayeredGraph& g, const SegState& s) {
    HashCode best;
    for (NodeId id : s.members) {
        const auto& c = g.node(id).code;
        if (best.bits.empty() || c < best) best = c;
    }
    return best;
}

std::uint32_t seg_distance(const LayeredGraph& g, const SegState& a, const SegState& b) {
    std::uint32_t best = UINT32_MAX;
    for (NodeId ia : a.members)
        for (NodeId ib : b.members)
            best = std::min(best, hamming_distance(g.node(ia).code, g.node(ib).code));
    return best;
}

void insert_member_sorted(const LayeredGraph& g, SegState& seg, NodeId id) {
    const auto& code = g.node(id).code;
    auto pos = std::find_if(seg.members.begin(), seg.members.end(), [&](NodeId m) {
        const auto& mc = g.node(m).code;
        return mc > code || (mc == code && m > id);
    });
    seg.members.insert(pos, id);
}

void erase_from_layer(LayeredGraph& g, std::uint32_t layer, NodeId id) {
    auto& lst = g.layers[layer];
    lst.erase(std::remove(lst.begin(), lst.end(), id), lst.end());
}

}  // namespace

UpdateReport insert_chunks(LayeredGraph& graph, const Corpus& new_texts,
                           Embedder& embedder, Summarizer& summarizer, CostLedger& ledger) {
    if (graph.layers.empty() || graph.layers[0].empty())
        throw InputError("insert_chunks: graph is not built");
    if (new_texts.empty())
        throw InputError("insert_chunks: no texts to insert");

    LayeredGraph staged = graph;  // committed only on success
    UpdateReport report;
    auto layer_counts = [&](std::uint32_t l) -> UpdateReport::LayerCounts& {
        if (report.per_layer.size() <= l) report.per_layer.resize(l + 1);
        return report.per_layer[l];
    };

    bool own_phase = !ledger.active_phase();
    if (own_phase) ledger.begin_phase(Phase::update);

    auto meter_summary = [&](const TokenUsage& usage, std::uint32_t target_layer) {
        ledger.record(CostEvent::summarize, usage, static_cast<int>(target_layer));
        report.usage += usage;
        report.summarize_calls += 1;
    };
    auto meter_embed = [&](std::uint32_t target_layer) {
        ledger.record(CostEvent::embed, TokenUsage{}, static_cast<int>(target_layer));
        report.embed_calls += 1;
    };

    // New chunks enter layer 0 hashed with the frozen hyperplanes.
    auto chunks = chunk_corpus(new_texts, staged.config.chunk_tokens);
    std::vector<NodeId> additions;
    for (auto& c : chunks) {
        GraphNode n;
        n.id = staged.allocate_id();
        n.layer = 0;
        c.id = n.id;
        n.chunk = std::move(c);
        n.embedding = embedder.embed_text(n.chunk.text);
        meter_embed(0);
        n.code = hash_vector(n.embedding, staged.hyperplanes);
        staged.layers[0].push_back(n.id);
        report.inserted_chunk_ids.push_back(n.id);
        additions.push_back(n.id);
        staged.nodes.emplace(n.id, std::move(n));
    }

    std::vector<NodeId> removals;

    for (std::uint32_t l = 0;; ++l) {
        std::uint32_t top = staged.top_layer();
        if (l == top) {
            for (NodeId id : removals) {
                erase_from_layer(staged, l, id);
                staged.nodes.erase(id);
                report.removed_ids.push_back(id);
                layer_counts(l).nodes_deleted += 1;
            }
            // Grow a new layer while the top is oversized and depth allows.
            while (staged.layers[staged.top_layer()].size() > staged.config.bounds.s_max &&
                   staged.top_layer() < staged.config.max_depth) {
                std::uint32_t t = staged.top_layer();
                std::size_t calls_before = report.summarize_calls;
                // summarize_layer meters through the ledger; mirror into the report
                auto snapshot = ledger.phase_totals(Phase::update);
                auto created = summarize_layer(staged, t, staged.layers[t], embedder,
                                               summarizer, ledger);
                auto after = ledger.phase_totals(Phase::update);
                report.usage.prompt_tokens += after.prompt_tokens - snapshot.prompt_tokens;
                report.usage.completion_tokens +=
                    after.completion_tokens - snapshot.completion_tokens;
                report.summarize_calls += after.llm_calls - snapshot.llm_calls;
                report.embed_calls += after.embed_calls - snapshot.embed_calls;
                (void)calls_before;
                for (NodeId id : created) {
                    report.restructured_ids.push_back(id);
                    layer_counts(t + 1).nodes_created += 1;
                }
                layer_counts(t).segments_resummarized += created.size();
                report.new_layer_created = true;
            }
            break;
        }

        // Segments of layer l are the child lists of layer l+1, ordered by
        // their lowest member code.
        std::vector<SegState> segs;
        for (NodeId pid : staged.layers[l + 1]) {
            SegState s;
            s.parent = pid;
            s.members = staged.node(pid).child_ids;
            segs.push_back(std::move(s));
        }
        std::stable_sort(segs.begin(), segs.end(), [&](const SegState& a, const SegState& b) {
            auto ca = min_member_code(staged, a);
            auto cb = min_member_code(staged, b);
            if (ca != cb) return ca < cb;
            return *a.parent < *b.parent;
        });

        // Deletions first: an old parent replaced below vanishes from its segment.
        for (NodeId id : removals) {
            const auto& victim = staged.node(id);
            std::optional<NodeId> parent = victim.parent_id;
            for (auto& s : segs) {
                auto it = std::find(s.members.begin(), s.members.end(), id);
                if (it != s.members.end()) {
                    s.members.erase(it);
                    s.affected = true;
                    break;
                }
            }
            (void)parent;
            erase_from_layer(staged, l, id);
            staged.nodes.erase(id);
            report.removed_ids.push_back(id);
            layer_counts(l).nodes_deleted += 1;
        }

        // Route additions into the segment that owns their code; unseen codes
        // open a fresh segment at the code-ordered position.
        for (NodeId id : additions) {
            const auto& code = staged.node(id).code;
            SegState* best = nullptr;
            for (auto& s : segs) {
                bool owns = std::any_of(s.members.begin(), s.members.end(), [&](NodeId m) {
                    return staged.node(m).code == code;
                });
                if (owns && (!best || s.members.size() < best->members.size())) best = &s;
            }
            if (best) {
                insert_member_sorted(staged, *best, id);
                best->affected = true;
            } else {
                SegState fresh;
                fresh.members = {id};
                fresh.affected = true;
                auto pos = std::find_if(segs.begin(), segs.end(), [&](const SegState& s) {
                    return min_member_code(staged, s) > code;
                });
                segs.insert(pos, std::move(fresh));
            }
        }
        layer_counts(l).affected_buckets += static_cast<std::uint64_t>(
            std::count_if(segs.begin(), segs.end(), [](const SegState& s) { return s.affected; }));

        // Bounds pass over affected segments.
        for (std::size_t i = 0; i < segs.size();) {
            SegState& s = segs[i];
            if (!s.affected) { ++i; continue; }
            if (s.members.empty()) {
                // every member moved or was deleted; retire the parent
                std::vector<NodeId> consumed = s.consumed;
                if (s.parent) consumed.push_back(*s.parent);
                segs.erase(segs.begin() + static_cast<std::ptrdiff_t>(i));
                if (!segs.empty() && !consumed.empty()) {
                    auto& sink = segs[i < segs.size() ? i : segs.size() - 1];
                    sink.consumed.insert(sink.consumed.end(), consumed.begin(), consumed.end());
                    sink.affected = true;
                }
                continue;
            }
            if (s.members.size() > staged.config.bounds.s_max) {
                auto sizes = split_sizes(s.members.size(), staged.config.bounds.s_max);
                std::vector<SegState> runs;
                std::size_t pos = 0;
                for (std::size_t k = 0; k < sizes.size(); ++k) {
                    SegState r;
                    r.members.assign(
                        s.members.begin() + static_cast<std::ptrdiff_t>(pos),
                        s.members.begin() + static_cast<std::ptrdiff_t>(pos + sizes[k]));
                    r.affected = true;
                    pos += sizes[k];
                    runs.push_back(std::move(r));
                }
                runs[0].consumed = s.consumed;
                if (s.parent) runs[0].consumed.push_back(*s.parent);
                segs.erase(segs.begin() + static_cast<std::ptrdiff_t>(i));
                segs.insert(segs.begin() + static_cast<std::ptrdiff_t>(i),
                            std::make_move_iterator(runs.begin()),
                            std::make_move_iterator(runs.end()));
                i += sizes.size();  // runs are final; re-merging would undo the split
                continue;
            }
            if (s.members.size() < staged.config.bounds.s_min && segs.size() > 1) {
                bool has_prev = i > 0;
                bool has_next = i + 1 < segs.size();
                bool take_prev;
                if (has_prev && has_next) {
                    take_prev = seg_distance(staged, s, segs[i - 1]) <=
                                seg_distance(staged, s, segs[i + 1]);
                } else {
                    take_prev = has_prev;
                }
                std::size_t j = take_prev ? i - 1 : i + 1;
                SegState& other = segs[j];
                SegState merged;
                const SegState& left = take_prev ? other : s;
                const SegState& right = take_prev ? s : other;
                merged.members = left.members;
                merged.members.insert(merged.members.end(), right.members.begin(),
                                      right.members.end());
                merged.affected = true;
                merged.consumed = s.consumed;
                merged.consumed.insert(merged.consumed.end(), other.consumed.begin(),
                                       other.consumed.end());
                if (s.parent) merged.consumed.push_back(*s.parent);
                if (other.parent) merged.consumed.push_back(*other.parent);
                std::size_t lo = std::min(i, j);
                segs.erase(segs.begin() + static_cast<std::ptrdiff_t>(std::max(i, j)));
                segs[lo] = std::move(merged);
                i = lo;
                continue;
            }
            ++i;
        }
        removals.clear();

        // Re-summarize every segment whose membership changed; the old parent
        // is replaced by a fresh node that becomes an insertion one layer up.
        std::vector<NodeId> next_additions;
        std::vector<NodeId> next_removals;
        for (auto& s : segs) {
            if (!s.affected) continue;
            SummaryRequest req;
            req.budget_tokens = staged.config.summary_tokens;
            for (NodeId id : s.members) req.member_texts.push_back(staged.node(id).chunk.text);
            auto res = summarizer.summarize(req);
            meter_summary(res.usage, l + 1);

            GraphNode n;
            n.id = staged.allocate_id();
            n.layer = l + 1;
            n.chunk.id = n.id;
            n.chunk.text = res.text;
            n.chunk.token_len = token_count(res.text);
            n.chunk.origin = ChunkOrigin::summary;
            n.summary_truncated = res.truncated;
            n.embedding = embedder.embed_text(n.chunk.text.empty() ? "(empty)" : n.chunk.text);
            meter_embed(l + 1);
            n.code = hash_vector(n.embedding, staged.hyperplanes);
            n.child_ids = s.members;
            for (NodeId child : s.members) staged.node(child).parent_id = n.id;

            staged.layers[l + 1].push_back(n.id);
            next_additions.push_back(n.id);
            report.restructured_ids.push_back(n.id);
            layer_counts(l).segments_resummarized += 1;
            layer_counts(l + 1).nodes_created += 1;
            if (s.parent) next_removals.push_back(*s.parent);
            next_removals.insert(next_removals.end(), s.consumed.begin(), s.consumed.end());
            staged.nodes.emplace(n.id, std::move(n));
        }
        // de-duplicate (a parent can appear as both replaced and consumed)
        std::sort(next_removals.begin(), next_removals.end());
        next_removals.erase(std::unique(next_removals.begin(), next_removals.end()),
                            next_removals.end());

        additions = std::move(next_additions);
        removals = std::move(next_removals);
        if (additions.empty() && removals.empty()) break;
    }

    if (own_phase) ledger.end_phase();
    staged.rebuild_parent_links();
    graph = std::move(staged);
    return report;
}

}  // namespace erarag
