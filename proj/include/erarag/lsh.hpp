#pragma once

#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "erarag/common.hpp"

namespace erarag {

// Fixed-length binary signature. Bit j corresponds to hyperplane j; bit 0 is
// the most significant when the code is read as an unsigned integer.
struct HashCode {
    std::vector<std::uint8_t> bits;  // each entry 0 or 1

    std::size_t length() const { return bits.size(); }

    // Big-endian integer value; only defined for codes of up to 64 bits.
    std::uint64_t ordinal() const;

    std::string to_string() const;
    static HashCode from_string(std::string_view s);

    // Lexicographic over bits == ascending ordinal for equal lengths.
    auto operator<=>(const HashCode&) const = default;
};

std::uint32_t hamming_distance(const HashCode& a, const HashCode& b);

// Frozen set of random hyperplanes. Fully determined by (seed, dim, count);
// immutable after sampling.
struct Hyperplanes {
    std::uint64_t seed = 0;
    std::uint32_t dim = 0;
    std::uint32_t count = 0;
    std::vector<float> planes;  // row-major, count x dim

    std::span<const float> row(std::uint32_t j) const {
        return {planes.data() + static_cast<std::size_t>(j) * dim, dim};
    }
};

// Entries drawn i.i.d. standard normal from a seeded deterministic stream
// (mt19937_64 + Box-Muller, see rng.hpp); stable across platforms.
Hyperplanes sample_hyperplanes(std::uint64_t seed, std::uint32_t dim, std::uint32_t count);

// bit j = 1 iff v . h_j >= 0 (zero dot product maps to 1).
HashCode hash_vector(std::span<const float> v, const Hyperplanes& planes);

// P[same bit] for two unit vectors at angle theta under the sign hash:
// 1 - theta/pi (exact for Gaussian hyperplanes; 1, 0.5, 0 at 0, pi/2, pi).
double collision_probability(double theta);

}  // namespace erarag
