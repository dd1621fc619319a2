#pragma once

#include <cstdint>
#include <initializer_list>
#include <string_view>

#include <boost/random/mersenne_twister.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_01.hpp>
#include <boost/random/uniform_int_distribution.hpp>

namespace biasaudit {

// Boost's engines and distributions are specified down to the bit, so the same
// seed yields the same stream on every platform and standard library.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double normal() { return normal_(engine_); }
    double uniform() { return uniform_(engine_); }

    // Uniform integer in [lo, hi].
    std::uint64_t uniform_int(std::uint64_t lo, std::uint64_t hi)
    {
        return boost::random::uniform_int_distribution<std::uint64_t>(lo, hi)(engine_);
    }

    boost::random::mt19937_64& engine() { return engine_; }

private:
    boost::random::mt19937_64 engine_;
    boost::random::normal_distribution<double> normal_{0.0, 1.0};
    boost::random::uniform_01<double> uniform_{};
};

// Stable 64-bit string hash (FNV-1a); std::hash is not stable across builds.
std::uint64_t stable_hash(std::string_view text);

// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

// Child seed from a master seed and a sequence of keys. Used wherever work is
// fanned out so serial and parallel runs draw identical streams.
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> keys);

} // namespace biasaudit
