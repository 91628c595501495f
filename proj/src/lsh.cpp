#include "erarag/lsh.hpp"

#include <cmath>

#include "erarag/rng.hpp"

namespace erarag {

std::uint64_t HashCode::ordinal() const {
    std::uint64_t v = 0;
    for (std::uint8_t b : bits) v = (v << 1) | (b ? 1u : 0u);
    return v;
}

std::string HashCode::to_string() const {
    std::string s;
    s.reserve(bits.size());
    for (std::uint8_t b : bits) s += b ? '1' : '0';
    return s;
}

HashCode HashCode::from_string(std::string_view s) {
    HashCode c;
    c.bits.reserve(s.size());
    for (char ch : s) {
        if (ch != '0' && ch != '1') throw InputError("hash code string must be binary");
        c.bits.push_back(ch == '1' ? 1 : 0);
    }
    return c;
}

std::uint32_t hamming_distance(const HashCode& a, const HashCode& b) {
    if (a.length() != b.length())
        throw InputError("hamming_distance: code lengths differ");
    std::uint32_t d = 0;
    for (std::size_t i = 0; i < a.bits.size(); ++i)
        d += a.bits[i] != b.bits[i];
    return d;
}

Hyperplanes sample_hyperplanes(std::uint64_t seed, std::uint32_t dim, std::uint32_t count) {
    if (dim == 0) throw ConfigError("sample_hyperplanes: dim must be positive");
    if (count == 0) throw ConfigError("sample_hyperplanes: count must be positive");

    Hyperplanes h;
    h.seed = seed;
    h.dim = dim;
    h.count = count;
    h.planes.resize(static_cast<std::size_t>(count) * dim);

    NormalStream stream(mix64(seed, 0x4c53485f504c4e53ULL));
    for (auto& x : h.planes) x = static_cast<float>(stream.next());

    // A zero row has probability zero but would make a bit meaningless; resample it.
    for (std::uint32_t j = 0; j < count; ++j) {
        bool all_zero = true;
        for (float x : h.row(j))
            if (x != 0.0f) { all_zero = false; break; }
        while (all_zero) {
            for (std::uint32_t k = 0; k < dim; ++k) {
                float x = static_cast<float>(stream.next());
                h.planes[static_cast<std::size_t>(j) * dim + k] = x;
                if (x != 0.0f) all_zero = false;
            }
        }
    }
    return h;
}

HashCode hash_vector(std::span<const float> v, const Hyperplanes& planes) {
    if (v.size() != planes.dim)
        throw InputError("hash_vector: vector length does not match hyperplane dim");
    HashCode code;
    code.bits.resize(planes.count);
    for (std::uint32_t j = 0; j < planes.count; ++j) {
        auto row = planes.row(j);
        double dot = 0.0;
        for (std::uint32_t k = 0; k < planes.dim; ++k)
            dot += static_cast<double>(v[k]) * static_cast<double>(row[k]);
        code.bits[j] = dot >= 0.0 ? 1 : 0;
    }
    return code;
}

double collision_probability(double theta) {
    constexpr double kPi = 3.14159265358979323846;
    if (theta < 0.0 || theta > kPi + 1e-12)
        throw InputError("collision_probability: theta must be in [0, pi]");
    // Agreement law of the sign hash for a Gaussian hyperplane (Goemans &
    // Williamson / Charikar): two unit vectors at angle theta land on the
    // same side with probability 1 - theta/pi.
    return 1.0 - theta / kPi;
}

}  // namespace erarag
