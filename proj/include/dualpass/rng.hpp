#pragma once

#include <cstdint>
#include <fstream>
#include <random>
#include <string>
#include <string_view>

namespace dualpass {

/// Random source with two modes: a seeded deterministic engine for tests and
/// scenario runs, and a system mode drawing from the OS entropy pool for
/// live deployments. Bounded draws are implemented here (rejection
/// sampling) so seeded sequences are identical across platforms.
class Rng {
public:
    static Rng seeded(std::uint64_t seed);
    static Rng system();

    Rng(Rng&&) = default;
    Rng& operator=(Rng&&) = default;

    std::uint64_t next_u64();

    /// Uniform integer in [lo, hi], inclusive. Requires lo <= hi.
    std::int64_t uniform(std::int64_t lo, std::int64_t hi);

    /// Uniform element of a non-empty character set.
    char pick(std::string_view alphabet);

    /// n random bytes.
    std::string bytes(std::size_t n);

    /// 2n-char lowercase hex of n random bytes.
    std::string token_hex(std::size_t n_bytes);

    bool deterministic() const { return deterministic_; }

private:
    Rng(std::uint64_t seed, bool deterministic);

    bool deterministic_;
    std::mt19937_64 engine_; // deterministic mode (and fallback)
    std::ifstream urandom_;  // system mode
};

} // namespace dualpass
