#include "erarag/persist.hpp"

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>

namespace erarag {

namespace {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

struct Writer {
    std::vector<std::uint8_t> out;

    void u8(std::uint8_t v) { out.push_back(v); }
    void u16(std::uint16_t v) {
        out.push_back(static_cast<std::uint8_t>(v));
        out.push_back(static_cast<std::uint8_t>(v >> 8));
    }
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void varint(std::uint64_t v) {
        while (v >= 0x80) {
            out.push_back(static_cast<std::uint8_t>(v) | 0x80);
            v >>= 7;
        }
        out.push_back(static_cast<std::uint8_t>(v));
    }
    void f32(float v) {
        std::uint32_t bits;
        std::memcpy(&bits, &v, 4);
        u32(bits);
    }
    void str(const std::string& s) {
        varint(s.size());
        out.insert(out.end(), s.begin(), s.end());
    }
};

struct Reader {
    const std::vector<std::uint8_t>& in;
    std::size_t pos = 0;

    void need(std::size_t n) const {
        if (pos + n > in.size()) throw IntegrityError("snapshot truncated");
    }
    std::uint8_t u8() {
        need(1);
        return in[pos++];
    }
    std::uint16_t u16() {
        need(2);
        std::uint16_t v = static_cast<std::uint16_t>(in[pos] | (in[pos + 1] << 8));
        pos += 2;
        return v;
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(in[pos + i]) << (8 * i);
        pos += 4;
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(in[pos + i]) << (8 * i);
        pos += 8;
        return v;
    }
    std::uint64_t varint() {
        std::uint64_t v = 0;
        int shift = 0;
        while (true) {
            std::uint8_t b = u8();
            v |= static_cast<std::uint64_t>(b & 0x7f) << shift;
            if (!(b & 0x80)) return v;
            shift += 7;
            if (shift > 63) throw IntegrityError("snapshot varint overflow");
        }
    }
    float f32() {
        std::uint32_t bits = u32();
        float v;
        std::memcpy(&v, &bits, 4);
        return v;
    }
    std::string str() {
        std::size_t n = static_cast<std::size_t>(varint());
        need(n);
        std::string s(in.begin() + static_cast<std::ptrdiff_t>(pos),
                      in.begin() + static_cast<std::ptrdiff_t>(pos + n));
        pos += n;
        return s;
    }
};

void write_embedder(Writer& w, const EmbedderConfig& c) {
    w.u8(static_cast<std::uint8_t>(c.kind));
    w.u32(c.dim);
    w.u64(c.mock_seed);
    w.str(c.endpoint);
    w.str(c.model);
    w.str(c.cache_path);
}

EmbedderConfig read_embedder(Reader& r) {
    EmbedderConfig c;
    c.kind = static_cast<ProviderKind>(r.u8());
    c.dim = r.u32();
    c.mock_seed = r.u64();
    c.endpoint = r.str();
    c.model = r.str();
    c.cache_path = r.str();
    return c;
}

}  // namespace

std::vector<std::uint8_t> serialize_node(const GraphNode& node, std::uint32_t dim,
                                         std::uint32_t code_bits) {
    Writer w;
    w.varint(node.id);
    w.varint(node.layer);
    w.u8(static_cast<std::uint8_t>(node.chunk.origin));
    w.u8(node.summary_truncated ? 1 : 0);
    w.str(node.chunk.source_doc);
    w.str(node.chunk.text);
    w.varint(node.chunk.token_len);
    if (node.embedding.size() != dim)
        throw IntegrityError("serialize: embedding dim mismatch on node " +
                             std::to_string(node.id));
    for (float x : node.embedding) w.f32(x);
    if (node.code.length() != code_bits)
        throw IntegrityError("serialize: code length mismatch on node " + std::to_string(node.id));
    std::uint8_t acc = 0;
    int nbits = 0;
    for (std::uint8_t b : node.code.bits) {
        acc = static_cast<std::uint8_t>((acc << 1) | (b & 1));
        if (++nbits == 8) {
            w.u8(acc);
            acc = 0;
            nbits = 0;
        }
    }
    if (nbits > 0) w.u8(static_cast<std::uint8_t>(acc << (8 - nbits)));
    w.varint(node.child_ids.size());
    for (NodeId c : node.child_ids) w.varint(c);
    return w.out;
}

std::vector<std::uint8_t> serialize_graph(const LayeredGraph& graph) {
    Writer w;
    w.out.insert(w.out.end(), {'E', 'R', 'A', 'G'});
    w.u16(kSnapshotMajor);
    w.u16(kSnapshotMinor);

    const auto& c = graph.config;
    w.u64(c.seed);
    w.u32(c.dim);
    w.u32(c.hyperplane_count);
    w.u32(c.bounds.s_min);
    w.u32(c.bounds.s_max);
    w.u32(c.chunk_tokens);
    w.u32(c.summary_tokens);
    w.u32(c.max_depth);
    w.u8(static_cast<std::uint8_t>(c.stop_rule));
    write_embedder(w, c.embedder);
    w.u8(static_cast<std::uint8_t>(c.summarizer.kind));
    w.str(c.summarizer.endpoint);
    w.str(c.summarizer.model);

    w.u64(graph.hyperplanes.seed);
    w.u32(graph.hyperplanes.dim);
    w.u32(graph.hyperplanes.count);
    for (float x : graph.hyperplanes.planes) w.f32(x);

    w.varint(graph.next_id);
    w.varint(graph.layers.size());
    for (const auto& layer : graph.layers) {
        w.varint(layer.size());
        for (NodeId id : layer) w.varint(id);
    }

    w.varint(graph.nodes.size());
    for (const auto& [id, node] : graph.nodes)  // std::map: ascending id
        for (std::uint8_t b : serialize_node(node, c.dim, graph.hyperplanes.count))
            w.u8(b);
    return w.out;
}

LayeredGraph deserialize_graph(const std::vector<std::uint8_t>& bytes) {
    Reader r{bytes};
    r.need(4);
    if (std::memcmp(bytes.data(), "ERAG", 4) != 0)
        throw FormatError("not an ERAG snapshot (bad magic)");
    r.pos = 4;
    std::uint16_t major = r.u16();
    std::uint16_t minor = r.u16();
    (void)minor;
    if (major != kSnapshotMajor)
        throw FormatError("snapshot major version " + std::to_string(major) +
                          " is incompatible with supported version " +
                          std::to_string(kSnapshotMajor));

    LayeredGraph g;
    auto& c = g.config;
    c.seed = r.u64();
    c.dim = r.u32();
    c.hyperplane_count = r.u32();
    c.bounds.s_min = r.u32();
    c.bounds.s_max = r.u32();
    c.chunk_tokens = r.u32();
    c.summary_tokens = r.u32();
    c.max_depth = r.u32();
    c.stop_rule = static_cast<StopRule>(r.u8());
    c.embedder = read_embedder(r);
    c.summarizer.kind = static_cast<ProviderKind>(r.u8());
    c.summarizer.endpoint = r.str();
    c.summarizer.model = r.str();

    g.hyperplanes.seed = r.u64();
    g.hyperplanes.dim = r.u32();
    g.hyperplanes.count = r.u32();
    if (g.hyperplanes.dim != c.dim || g.hyperplanes.count != c.hyperplane_count)
        throw IntegrityError("hyperplanes: stored matrix does not match config");
    g.hyperplanes.planes.resize(static_cast<std::size_t>(g.hyperplanes.dim) *
                                g.hyperplanes.count);
    for (auto& x : g.hyperplanes.planes) x = r.f32();

    g.next_id = r.varint();
    std::size_t layer_count = static_cast<std::size_t>(r.varint());
    g.layers.resize(layer_count);
    for (auto& layer : g.layers) {
        std::size_t n = static_cast<std::size_t>(r.varint());
        layer.resize(n);
        for (auto& id : layer) id = r.varint();
    }

    std::size_t node_count = static_cast<std::size_t>(r.varint());
    for (std::size_t i = 0; i < node_count; ++i) {
        GraphNode n;
        n.id = r.varint();
        n.layer = static_cast<std::uint32_t>(r.varint());
        n.chunk.origin = static_cast<ChunkOrigin>(r.u8());
        n.summary_truncated = r.u8() != 0;
        n.chunk.source_doc = r.str();
        n.chunk.text = r.str();
        n.chunk.token_len = static_cast<std::uint32_t>(r.varint());
        n.chunk.id = n.id;
        n.embedding.resize(c.dim);
        for (auto& x : n.embedding) x = r.f32();
        n.code.bits.resize(g.hyperplanes.count);
        std::size_t nbytes = (g.hyperplanes.count + 7) / 8;
        for (std::size_t b = 0; b < nbytes; ++b) {
            std::uint8_t byte = r.u8();
            for (int bit = 0; bit < 8; ++bit) {
                std::size_t idx = b * 8 + static_cast<std::size_t>(bit);
                if (idx < g.hyperplanes.count)
                    n.code.bits[idx] = (byte >> (7 - bit)) & 1;
            }
        }
        std::size_t children = static_cast<std::size_t>(r.varint());
        n.child_ids.resize(children);
        for (auto& cid : n.child_ids) cid = r.varint();
        auto id = n.id;
        if (!g.nodes.emplace(id, std::move(n)).second)
            throw IntegrityError("snapshot contains duplicate node id " + std::to_string(id));
    }
    if (r.pos != bytes.size()) throw IntegrityError("snapshot has trailing bytes");

    g.rebuild_parent_links();
    auto violations = verify_graph(g);
    if (!violations.empty())
        throw IntegrityError("snapshot violates invariant: " + violations.front());
    return g;
}

void save_snapshot(const LayeredGraph& graph, const std::string& path, bool force) {
    if (!force && std::filesystem::exists(path))
        throw InputError("refusing to overwrite existing snapshot " + path +
                         " (pass force to allow)");
    auto bytes = serialize_graph(graph);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot open snapshot path for writing: " + path);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw InputError("short write while saving snapshot: " + path);
}

LayeredGraph load_snapshot(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open snapshot file: " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return deserialize_graph(bytes);
}

}  // namespace erarag
