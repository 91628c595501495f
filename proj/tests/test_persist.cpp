#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "erarag/persist.hpp"
#include "helpers.hpp"

using namespace erarag;
using testutil::make_corpus;
using testutil::mock_config;

namespace {

LayeredGraph build_fixture(std::uint64_t seed = 71) {
    auto cfg = mock_config(seed);
    auto embedder = make_embedder(cfg.embedder);
    auto summarizer = make_summarizer(cfg.summarizer);
    CostLedger ledger;
    return build_graph(make_corpus(15, 64, seed), cfg, *embedder, *summarizer, ledger);
}

}  // namespace

TEST_CASE("serialize, deserialize, serialize is byte stable") {
    auto g = build_fixture();
    auto bytes = serialize_graph(g);
    auto loaded = deserialize_graph(bytes);
    CHECK(serialize_graph(loaded) == bytes);

    // payloads survive the round trip
    CHECK(loaded.nodes.size() == g.nodes.size());
    for (const auto& [id, n] : g.nodes) {
        const auto& m = loaded.node(id);
        CHECK(m.chunk.text == n.chunk.text);
        CHECK(m.embedding == n.embedding);
        CHECK(m.code == n.code);
        CHECK(m.child_ids == n.child_ids);
        CHECK(m.parent_id == n.parent_id);
    }
    CHECK(loaded.config == g.config);
}

TEST_CASE("save and load through the filesystem") {
    auto g = build_fixture();
    const char* path = "snapshot_roundtrip_test.erag";
    std::remove(path);
    save_snapshot(g, path);
    CHECK_THROWS_AS(save_snapshot(g, path), InputError);  // refuses overwrite
    CHECK_NOTHROW(save_snapshot(g, path, /*force=*/true));
    auto loaded = load_snapshot(path);
    CHECK(serialize_graph(loaded) == serialize_graph(g));
    std::remove(path);
    CHECK_THROWS_AS(load_snapshot(path), InputError);
}

TEST_CASE("wrong magic is a format error") {
    auto bytes = serialize_graph(build_fixture());
    bytes[0] = 'X';
    CHECK_THROWS_AS(deserialize_graph(bytes), FormatError);
}

TEST_CASE("a newer major version is rejected explicitly") {
    auto bytes = serialize_graph(build_fixture());
    bytes[4] = static_cast<std::uint8_t>(kSnapshotMajor + 1);  // little-endian u16 at offset 4
    try {
        deserialize_graph(bytes);
        FAIL("expected a format error");
    } catch (const FormatError& e) {
        CHECK(std::string(e.what()).find("incompatible") != std::string::npos);
    }
}

TEST_CASE("truncation is an integrity error") {
    auto bytes = serialize_graph(build_fixture());
    for (std::size_t keep : {bytes.size() - 1, bytes.size() / 2, std::size_t{6}}) {
        std::vector<std::uint8_t> cut(bytes.begin(),
                                      bytes.begin() + static_cast<std::ptrdiff_t>(keep));
        CHECK_THROWS_AS(deserialize_graph(cut), IntegrityError);
    }
    bytes.push_back(0);  // trailing garbage
    CHECK_THROWS_AS(deserialize_graph(bytes), IntegrityError);
}

TEST_CASE("a snapshot with an out-of-bounds segment names the violation") {
    auto g = build_fixture();
    // move one child between two layer-1 parents, leaving the tree valid but
    // one segment under s_min and possibly one over s_max
    REQUIRE(g.layers.size() >= 2);
    REQUIRE(g.layers[1].size() >= 2);
    auto& donor = g.node(g.layers[1][0]);
    auto& taker = g.node(g.layers[1][1]);
    while (donor.child_ids.size() > 1) {
        taker.child_ids.push_back(donor.child_ids.back());
        donor.child_ids.pop_back();
    }
    auto bytes = serialize_graph(g);
    try {
        deserialize_graph(bytes);
        FAIL("expected an integrity error");
    } catch (const IntegrityError& e) {
        CHECK(std::string(e.what()).find("segment bounds") != std::string::npos);
    }
}

TEST_CASE("a node listed in two layers is flagged") {
    auto g = build_fixture();
    g.layers[0].push_back(g.layers[0].front());
    auto violations = verify_graph(g);
    bool found = false;
    for (const auto& v : violations)
        if (v.find("listed twice") != std::string::npos) found = true;
    CHECK(found);
}
