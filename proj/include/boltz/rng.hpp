#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <string>

namespace boltz {

/// Per-chain random stream: a 64-bit Mersenne twister plus the cached state
/// of its normal distribution, so that save()/restore() capture everything.
class Rng {
public:
    using engine_type = std::mt19937_64;

    explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    double normal() { return normal_(engine_); }

    /// Rate-one exponential variate.
    double exponential() { return -std::log1p(-uniform()); }

    /// Uniform integer in [0, n).
    std::size_t index(std::size_t n)
    {
        return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
    }

    bool coin(double p) { return uniform() < p; }

    engine_type& engine() { return engine_; }

    std::string save() const
    {
        std::ostringstream os;
        os << engine_ << ' ' << normal_;
        return os.str();
    }

    void restore(const std::string& text)
    {
        std::istringstream is(text);
        is >> engine_ >> normal_;
    }

private:
    engine_type engine_;
    std::normal_distribution<double> normal_;
};

/// splitmix64 finaliser; a bijection on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z)
{
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Chain seed for (run, chain) under a master seed. For fixed master seed the
/// map is injective on run, chain < 2^32 because mix64 is a bijection.
constexpr std::uint64_t seed_split(std::uint64_t master_seed, std::uint32_t run, std::uint32_t chain)
{
    const std::uint64_t key = (static_cast<std::uint64_t>(run) << 32) | chain;
    return mix64(key ^ mix64(master_seed));
}

}  // namespace boltz
