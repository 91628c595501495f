#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "erarag/common.hpp"
#include "erarag/lsh.hpp"

namespace erarag {

struct SizeBounds {
    std::uint32_t s_min = 0;
    std::uint32_t s_max = 0;

    void validate() const {
        if (!(1 < s_min && s_min <= s_max))
            throw ConfigError("size bounds require 1 < s_min <= s_max");
    }

    bool operator==(const SizeBounds&) const = default;
};

struct Bucket {
    HashCode code;
    std::vector<NodeId> members;  // insertion order
    bool affected = false;
};

struct Segment {
    std::vector<NodeId> member_ids;      // bucket-ordinal order, intra-bucket order kept
    std::vector<HashCode> source_codes;  // ascending, deduplicated
    bool affected = false;
};

// Groups nodes by code; one bucket per distinct code, ascending by ordinal,
// members in input order. All codes must share one length.
std::vector<Bucket> assign_buckets(const std::vector<std::pair<NodeId, HashCode>>& nodes);

// Merge-then-split: a left-to-right merge pass brings every undersized bucket
// up to s_min (merging into the Hamming-nearer neighbor, ties to the
// smaller-ordinal side), then oversized groups are split into near-equal
// contiguous runs. If the total member count is below s_min the result is one
// undersized segment. Pure and deterministic.
std::vector<Segment> repartition(const std::vector<Bucket>& buckets, const SizeBounds& bounds);

// Split helper shared with the update path: sizes of the near-equal contiguous
// runs for a group of m members under s_max (sizes differ by at most 1).
std::vector<std::size_t> split_sizes(std::size_t m, std::uint32_t s_max);

}  // namespace erarag
