#include "doctest.h"

#include <map>
#include <set>

#include "dualpass/errors.hpp"
#include "dualpass/rng.hpp"

using namespace dualpass;

TEST_CASE("seeded rng reproduces the same stream") {
    Rng a = Rng::seeded(7);
    Rng b = Rng::seeded(7);
    for (int i = 0; i < 100; ++i) {
        CHECK(a.next_u64() == b.next_u64());
    }
    CHECK(a.uniform(0, 999) == b.uniform(0, 999));
    CHECK(a.bytes(32) == b.bytes(32));
    CHECK(a.token_hex(16) == b.token_hex(16));
}

TEST_CASE("uniform stays inside its bounds and covers them") {
    Rng rng = Rng::seeded(8);
    std::set<std::int64_t> seen;
    for (int i = 0; i < 2000; ++i) {
        auto v = rng.uniform(3, 9);
        CHECK(v >= 3);
        CHECK(v <= 9);
        seen.insert(v);
    }
    CHECK(seen.size() == 7);
    CHECK(rng.uniform(5, 5) == 5);
    CHECK_THROWS_AS(rng.uniform(2, 1), Error);
}

TEST_CASE("pick draws from the alphabet") {
    Rng rng = Rng::seeded(9);
    std::map<char, int> counts;
    for (int i = 0; i < 600; ++i) {
        counts[rng.pick("xyz")] += 1;
    }
    CHECK(counts.size() == 3);
    CHECK_THROWS_AS(rng.pick(""), Error);
}

TEST_CASE("system rng produces distinct tokens") {
    Rng rng = Rng::system();
    CHECK(!rng.deterministic());
    std::set<std::string> tokens;
    for (int i = 0; i < 64; ++i) {
        CHECK(tokens.insert(rng.token_hex(16)).second);
    }
    std::string b = rng.bytes(1000);
    CHECK(b.size() == 1000);
    // 1000 entropy bytes are never all identical
    CHECK(std::set<char>(b.begin(), b.end()).size() > 1);
}
