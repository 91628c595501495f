#include "erarag/partition.hpp"

#include <algorithm>
#include <map>

namespace erarag {

std::vector<Bucket> assign_buckets(const std::vector<std::pair<NodeId, HashCode>>& nodes) {
    std::vector<Bucket> out;
    if (nodes.empty()) return out;
    std::size_t len = nodes.front().second.length();
    std::map<HashCode, std::size_t> index;  // code -> position in out
    for (const auto& [id, code] : nodes) {
        if (code.length() != len)
            throw InputError("assign_buckets: mixed hash code lengths");
        auto [it, inserted] = index.try_emplace(code, out.size());
        if (inserted) out.push_back(Bucket{code, {}, false});
        out[it->second].members.push_back(id);
    }
    // one bucket per code, ascending by code ordinal
    std::sort(out.begin(), out.end(),
              [](const Bucket& a, const Bucket& b) { return a.code < b.code; });
    return out;
}

std::vector<std::size_t> split_sizes(std::size_t m, std::uint32_t s_max) {
    std::size_t parts = (m + s_max - 1) / s_max;
    std::size_t base = m / parts;
    std::size_t rem = m % parts;
    std::vector<std::size_t> sizes(parts, base);
    for (std::size_t i = 0; i < rem; ++i) sizes[i] += 1;
    return sizes;
}

namespace {

struct Group {
    std::vector<NodeId> members;
    std::vector<HashCode> member_codes;  // parallel to members
    std::vector<HashCode> codes;         // distinct source codes, ascending
    bool affected = false;
};

std::uint32_t group_distance(const Group& a, const Group& b) {
    std::uint32_t best = UINT32_MAX;
    for (const auto& ca : a.codes)
        for (const auto& cb : b.codes)
            best = std::min(best, hamming_distance(ca, cb));
    return best;
}

void absorb(Group& into, Group&& other, bool other_is_left) {
    if (other_is_left) {
        other.members.insert(other.members.end(), into.members.begin(), into.members.end());
        other.member_codes.insert(other.member_codes.end(), into.member_codes.begin(),
                                  into.member_codes.end());
        into.members = std::move(other.members);
        into.member_codes = std::move(other.member_codes);
    } else {
        into.members.insert(into.members.end(), other.members.begin(), other.members.end());
        into.member_codes.insert(into.member_codes.end(), other.member_codes.begin(),
                                 other.member_codes.end());
    }
    into.codes.insert(into.codes.end(), other.codes.begin(), other.codes.end());
    std::sort(into.codes.begin(), into.codes.end());
    into.codes.erase(std::unique(into.codes.begin(), into.codes.end()), into.codes.end());
    into.affected = into.affected || other.affected;
}

}  // namespace

std::vector<Segment> repartition(const std::vector<Bucket>& buckets, const SizeBounds& bounds) {
    bounds.validate();
    std::vector<Group> groups;
    groups.reserve(buckets.size());
    for (const auto& b : buckets) {
        Group g;
        g.members = b.members;
        g.member_codes.assign(b.members.size(), b.code);
        g.codes = {b.code};
        g.affected = b.affected;
        groups.push_back(std::move(g));
    }

    // Merge pass: left to right, repeating on a group until it reaches s_min.
    for (std::size_t i = 0; i < groups.size();) {
        if (groups[i].members.size() >= bounds.s_min || groups.size() == 1) {
            ++i;
            continue;
        }
        bool has_prev = i > 0;
        bool has_next = i + 1 < groups.size();
        bool take_prev;
        if (has_prev && has_next) {
            std::uint32_t dp = group_distance(groups[i], groups[i - 1]);
            std::uint32_t dn = group_distance(groups[i], groups[i + 1]);
            take_prev = dp <= dn;  // tie goes to the smaller-ordinal neighbor
        } else {
            take_prev = has_prev;
        }
        if (take_prev) {
            absorb(groups[i], std::move(groups[i - 1]), /*other_is_left=*/true);
            groups.erase(groups.begin() + static_cast<std::ptrdiff_t>(i - 1));
            --i;
        } else {
            absorb(groups[i], std::move(groups[i + 1]), /*other_is_left=*/false);
            groups.erase(groups.begin() + static_cast<std::ptrdiff_t>(i + 1));
        }
    }

    // Split pass: near-equal contiguous runs, member order preserved.
    std::vector<Segment> out;
    for (auto& g : groups) {
        if (g.members.size() <= bounds.s_max) {
            Segment s;
            s.member_ids = std::move(g.members);
            s.source_codes = std::move(g.codes);
            s.affected = g.affected;
            out.push_back(std::move(s));
            continue;
        }
        auto sizes = split_sizes(g.members.size(), bounds.s_max);
        std::size_t pos = 0;
        for (std::size_t sz : sizes) {
            Segment s;
            s.member_ids.assign(g.members.begin() + static_cast<std::ptrdiff_t>(pos),
                                g.members.begin() + static_cast<std::ptrdiff_t>(pos + sz));
            s.source_codes.assign(g.member_codes.begin() + static_cast<std::ptrdiff_t>(pos),
                                  g.member_codes.begin() + static_cast<std::ptrdiff_t>(pos + sz));
            std::sort(s.source_codes.begin(), s.source_codes.end());
            s.source_codes.erase(std::unique(s.source_codes.begin(), s.source_codes.end()),
                                 s.source_codes.end());
            s.affected = g.affected;
            out.push_back(std::move(s));
            pos += sz;
        }
    }
    return out;
}

}  // namespace erarag
