#include "dualpass/rng.hpp"

#include "dualpass/errors.hpp"
#include "dualpass/sha256.hpp"

namespace dualpass {

Rng::Rng(std::uint64_t seed, bool deterministic)
    : deterministic_(deterministic), engine_(seed) {
    if (!deterministic_) {
        urandom_.open("/dev/urandom", std::ios::binary);
    }
}

Rng Rng::seeded(std::uint64_t seed) {
    return Rng(seed, true);
}

Rng Rng::system() {
    std::random_device rd;
    std::uint64_t seed = (std::uint64_t(rd()) << 32) ^ rd();
    seed ^= std::uint64_t(rd()) << 16;
    return Rng(seed, false); // the seeded engine is only the fallback
}

std::uint64_t Rng::next_u64() {
    if (!deterministic_ && urandom_.is_open()) {
        std::uint64_t v = 0;
        urandom_.read(reinterpret_cast<char*>(&v), sizeof(v));
        if (urandom_) {
            return v;
        }
        urandom_.close(); // fall back to the seeded engine
    }
    return engine_();
}

std::int64_t Rng::uniform(std::int64_t lo, std::int64_t hi) {
    if (lo > hi) {
        raise(Errc::invalid_argument, "uniform: empty range");
    }
    std::uint64_t span = std::uint64_t(hi) - std::uint64_t(lo) + 1;
    if (span == 0) { // full 64-bit range
        return std::int64_t(next_u64());
    }
    // rejection sampling keeps the draw exactly uniform
    std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
    std::uint64_t v;
    do {
        v = next_u64();
    } while (v >= limit);
    return lo + std::int64_t(v % span);
}

char Rng::pick(std::string_view alphabet) {
    if (alphabet.empty()) {
        raise(Errc::invalid_argument, "pick: empty alphabet");
    }
    return alphabet[std::size_t(uniform(0, std::int64_t(alphabet.size()) - 1))];
}

std::string Rng::bytes(std::size_t n) {
    std::string out(n, '\0');
    if (!deterministic_ && urandom_.is_open()) {
        urandom_.read(out.data(), std::streamsize(n));
        if (urandom_) {
            return out;
        }
        urandom_.close();
    }
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = char(uniform(0, 255));
    }
    return out;
}

std::string Rng::token_hex(std::size_t n_bytes) {
    return to_hex(bytes(n_bytes));
}

} // namespace dualpass
