#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace hcover {

/// Name recorded in every output file next to the seed.
inline constexpr std::string_view kRngName = "mt19937_64";

/// Seeded 64-bit generator with a portable stream.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the C++
/// standard. The conversions below are spelled out instead of using the
/// <random> distributions, whose algorithms differ between standard
/// libraries, so fixtures reproduce bit-for-bit across toolchains.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform double in [0, 1) built from the top 53 bits.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// One draw per call, true with probability p (p >= 1 always true, p <= 0 never).
    bool bernoulli(double p) { return uniform01() < p; }

    /// Unbiased integer in [0, bound) by Lemire's multiply-and-reject method. bound > 0.
    std::uint64_t below(std::uint64_t bound);

private:
    std::mt19937_64 engine_;
};

/// splitmix64 finaliser; used to decorrelate derived seeds.
std::uint64_t mix64(std::uint64_t x);

/// Seed for stream `index` under `parent` (trial seeds, per-cell seeds).
std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t index);

/// 64-bit FNV-1a, for folding text (decimal p strings) into seeds.
std::uint64_t hash_text(std::string_view text);

} // namespace hcover
