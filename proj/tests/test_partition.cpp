#include <doctest.h>

#include <map>
#include <numeric>
#include <random>

#include "erarag/partition.hpp"

using namespace erarag;

namespace {

std::vector<Bucket> buckets_of(const std::vector<std::pair<std::string, std::size_t>>& spec,
                               NodeId first_id = 1) {
    std::vector<std::pair<NodeId, HashCode>> nodes;
    NodeId id = first_id;
    for (const auto& [code, n] : spec)
        for (std::size_t i = 0; i < n; ++i)
            nodes.emplace_back(id++, HashCode::from_string(code));
    return assign_buckets(nodes);
}

std::vector<std::size_t> sizes_of(const std::vector<Segment>& segs) {
    std::vector<std::size_t> out;
    for (const auto& s : segs) out.push_back(s.member_ids.size());
    return out;
}

// Independent validity checker: bounds (with the whole-layer degenerate
// exception), exact permutation, and preservation of bucket-concatenation
// order.
void check_valid(const std::vector<Bucket>& buckets, const std::vector<Segment>& segs,
                 const SizeBounds& bounds) {
    std::vector<NodeId> original;
    for (const auto& b : buckets)
        original.insert(original.end(), b.members.begin(), b.members.end());
    std::vector<NodeId> flat;
    for (const auto& s : segs) flat.insert(flat.end(), s.member_ids.begin(), s.member_ids.end());
    REQUIRE(flat == original);

    if (original.size() < bounds.s_min) {
        REQUIRE(segs.size() == 1);
        return;
    }
    for (const auto& s : segs) {
        CHECK(s.member_ids.size() >= bounds.s_min);
        CHECK(s.member_ids.size() <= bounds.s_max);
    }
}

}  // namespace

TEST_CASE("bucket assignment groups by code in ordinal order") {
    std::vector<std::pair<NodeId, HashCode>> nodes{
        {1, HashCode::from_string("10")},
        {2, HashCode::from_string("01")},
        {3, HashCode::from_string("10")},
        {4, HashCode::from_string("01")},
    };
    auto buckets = assign_buckets(nodes);
    REQUIRE(buckets.size() == 2);
    CHECK(buckets[0].code.to_string() == "01");
    CHECK(buckets[0].members == std::vector<NodeId>{2, 4});
    CHECK(buckets[1].code.to_string() == "10");
    CHECK(buckets[1].members == std::vector<NodeId>{1, 3});

    CHECK(assign_buckets({}).empty());
    auto single = assign_buckets({{7, HashCode::from_string("111")}});
    REQUIRE(single.size() == 1);
    CHECK(single[0].members == std::vector<NodeId>{7});

    std::vector<std::pair<NodeId, HashCode>> mixed{
        {1, HashCode::from_string("10")}, {2, HashCode::from_string("011")}};
    CHECK_THROWS_AS(assign_buckets(mixed), InputError);
}

TEST_CASE("merge then split on sizes [1,4,9] with bounds (3,6)") {
    auto buckets = buckets_of({{"000", 1}, {"001", 4}, {"010", 9}});
    SizeBounds bounds{3, 6};
    auto segs = repartition(buckets, bounds);
    CHECK(sizes_of(segs) == std::vector<std::size_t>{5, 5, 4});
    check_valid(buckets, segs, bounds);
    // the undersized bucket merged right into its adjacent code
    CHECK(segs[0].source_codes.size() == 2);
}

TEST_CASE("segments already within bounds are untouched") {
    auto buckets = buckets_of({{"00", 4}, {"11", 4}});
    auto segs = repartition(buckets, {3, 6});
    CHECK(sizes_of(segs) == std::vector<std::size_t>{4, 4});
    CHECK(segs[0].source_codes == std::vector<HashCode>{HashCode::from_string("00")});
}

TEST_CASE("a whole layer below s_min collapses to one undersized segment") {
    auto buckets = buckets_of({{"01", 1}});
    auto segs = repartition(buckets, {2, 4});
    REQUIRE(segs.size() == 1);
    CHECK(segs[0].member_ids.size() == 1);
}

TEST_CASE("split sizes are near-equal and cover the group") {
    CHECK(split_sizes(9, 6) == std::vector<std::size_t>{5, 4});
    CHECK(split_sizes(12, 4) == std::vector<std::size_t>{4, 4, 4});
    CHECK(split_sizes(13, 4) == std::vector<std::size_t>{4, 3, 3, 3});
    for (std::size_t m = 1; m <= 200; ++m) {
        auto sizes = split_sizes(m, 7);
        CHECK(std::accumulate(sizes.begin(), sizes.end(), std::size_t{0}) == m);
        auto [lo, hi] = std::minmax_element(sizes.begin(), sizes.end());
        CHECK(*hi <= 7);
        CHECK(*hi - *lo <= 1);
    }
}

TEST_CASE("repartition properties over randomized bucket layouts") {
    std::mt19937 rng(2024);
    for (int trial = 0; trial < 300; ++trial) {
        std::uniform_int_distribution<std::uint32_t> smin_d(2, 5);
        SizeBounds bounds;
        bounds.s_min = smin_d(rng);
        // s_max >= 2*s_min - 1 guarantees every near-equal split run clears s_min
        std::uniform_int_distribution<std::uint32_t> smax_d(2 * bounds.s_min - 1,
                                                            2 * bounds.s_min + 4);
        bounds.s_max = smax_d(rng);

        std::uniform_int_distribution<int> nbuckets_d(1, 12);
        std::uniform_int_distribution<int> bsize_d(1, 15);
        int nbuckets = nbuckets_d(rng);
        std::vector<std::pair<std::string, std::size_t>> layout;
        for (int b = 0; b < nbuckets && layout.size() < 16; ++b) {
            std::string code;
            for (int bit = 0; bit < 4; ++bit) code += (rng() & 1) ? '1' : '0';
            layout.emplace_back(code, static_cast<std::size_t>(bsize_d(rng)));
        }
        // merge duplicate codes to keep bucket invariants
        std::map<std::string, std::size_t> merged;
        for (auto& [c, n] : layout) merged[c] += n;
        layout.assign(merged.begin(), merged.end());

        auto buckets = buckets_of(layout);
        auto segs = repartition(buckets, bounds);
        check_valid(buckets, segs, bounds);
    }
}

TEST_CASE("size bounds validation") {
    CHECK_THROWS_AS((SizeBounds{1, 4}.validate()), ConfigError);
    CHECK_THROWS_AS((SizeBounds{5, 4}.validate()), ConfigError);
    CHECK_NOTHROW((SizeBounds{2, 2}.validate()));
}
