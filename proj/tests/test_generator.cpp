#include "doctest.h"

#include <numeric>
#include <set>

#include "dualpass/errors.hpp"
#include "dualpass/generator.hpp"
#include "dualpass/policy.hpp"

using namespace dualpass;

namespace {

std::string random_login_password(Rng& rng, int min_len = 5, int max_len = 15) {
    int len = int(rng.uniform(min_len, max_len));
    std::string out;
    for (int i = 0; i < len; ++i) {
        out.push_back(rng.pick(login_alphabet()));
    }
    return out;
}

} // namespace

TEST_CASE("sample_digit_composition: sums and bounds hold") {
    Rng rng = Rng::seeded(21);
    for (int i = 0; i < 500; ++i) {
        int parts = int(rng.uniform(1, 15));
        int max_part = int(rng.uniform(1, 6));
        int lo = parts;
        int hi = parts * max_part;
        int total = int(rng.uniform(lo, hi));
        auto digits = sample_digit_composition(total, parts, max_part, rng);
        CHECK(int(digits.size()) == parts);
        CHECK(std::accumulate(digits.begin(), digits.end(), 0) == total);
        for (int d : digits) {
            CHECK(d >= 1);
            CHECK(d <= max_part);
        }
    }
}

TEST_CASE("sample_digit_composition: every composition of a small case appears") {
    // 4 into 3 parts, max 2: (1,1,2), (1,2,1), (2,1,1)
    Rng rng = Rng::seeded(22);
    std::set<std::vector<int>> seen;
    for (int i = 0; i < 200; ++i) {
        seen.insert(sample_digit_composition(4, 3, 2, rng));
    }
    CHECK(seen.size() == 3);
}

TEST_CASE("sample_digit_composition: infeasible budgets") {
    Rng rng = Rng::seeded(23);
    CHECK_THROWS_AS(sample_digit_composition(4, 5, 6, rng), Error);  // total < parts
    CHECK_THROWS_AS(sample_digit_composition(20, 3, 6, rng), Error); // total > parts*max
    CHECK_THROWS_AS(sample_digit_composition(5, 0, 6, rng), Error);
}

TEST_CASE("generate_converter: postconditions on a seeded run") {
    Rng rng = Rng::seeded(24);
    GeneratorConfig config;
    auto spec = generate_converter("abc123", config, rng);

    CHECK(spec.units.size() == 6);
    CHECK(spec.labels.size() == 5);
    CHECK(spec.target_length == 20);
    int digit_sum = 0;
    for (const auto& unit : spec.units) {
        digit_sum += unit.digit;
        CHECK(unit.digit >= 1);
        CHECK(unit.digit <= config.max_digit);
        CHECK(unit.table.size() == config.login_alphabet.size());
    }
    CHECK(digit_sum == 20);
    CHECK(spec.registered_login_password() == "abc123");

    std::string auth = generate_auth_password(spec, "abc123");
    PolicyConfig policy;
    CHECK(validate_auth_password(auth, policy).empty());
}

TEST_CASE("generate_converter: deterministic under a fixed seed") {
    GeneratorConfig config;
    Rng a = Rng::seeded(25);
    Rng b = Rng::seeded(25);
    auto spec_a = generate_converter("xyz789", config, a);
    auto spec_b = generate_converter("xyz789", config, b);
    CHECK(spec_a == spec_b);
}

TEST_CASE("generate_converter: seeded soundness sweep") {
    Rng rng = Rng::seeded(26);
    GeneratorConfig config;
    PolicyConfig policy;
    for (int i = 0; i < 200; ++i) {
        std::string password = random_login_password(rng);
        auto spec = generate_converter(password, config, rng);
        std::string auth = generate_auth_password(spec, password);
        CHECK(auth.size() == 20);
        CHECK(validate_auth_password(auth, policy).empty());
        // the pair never collides in the password field
        CHECK(classify_field_input(auth, policy) == FieldInputClass::StrengthViolation);
        CHECK(classify_field_input(password, policy) == FieldInputClass::LocalCandidate);
    }
}

TEST_CASE("generate_converter: length-15 passwords still compose to 20") {
    Rng rng = Rng::seeded(27);
    GeneratorConfig config;
    auto spec = generate_converter("abcdefghij01234", config, rng);
    CHECK(spec.units.size() == 15);
    int digit_sum = 0;
    for (const auto& unit : spec.units) {
        digit_sum += unit.digit;
    }
    CHECK(digit_sum == 20);
}

TEST_CASE("generate_converter: infeasible target") {
    Rng rng = Rng::seeded(28);
    GeneratorConfig config;
    config.target_length = 4; // five characters cannot sum to 4
    try {
        generate_converter("abcde", config, rng);
        FAIL("expected infeasible budget");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::infeasible_budget);
    }
}

TEST_CASE("generate_converter: rejects characters outside the login alphabet") {
    Rng rng = Rng::seeded(29);
    GeneratorConfig config;
    try {
        generate_converter("Abc123", config, rng);
        FAIL("expected alphabet violation");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::alphabet_violation);
    }
}

TEST_CASE("generate_converter: single-position sensitivity on a small spec") {
    Rng rng = Rng::seeded(30);
    GeneratorConfig config;
    const std::string password = "abc12";
    auto spec = generate_converter(password, config, rng);
    std::string registered = generate_auth_password(spec, password);
    auto registered_strings = convert_chars(spec, password);
    for (std::size_t pos = 0; pos < password.size(); ++pos) {
        for (char c : login_alphabet()) {
            if (c == password[pos]) {
                continue;
            }
            std::string perturbed = password;
            perturbed[pos] = c;
            CHECK(generate_auth_password(spec, perturbed) != registered);
            // the conversion differs at the perturbed position and only there
            auto strings = convert_chars(spec, perturbed);
            for (std::size_t i = 0; i < strings.size(); ++i) {
                if (i == pos) {
                    CHECK(strings[i] != registered_strings[i]);
                } else {
                    CHECK(strings[i] == registered_strings[i]);
                }
            }
        }
    }
}

TEST_CASE("generated authentication passwords permute the converted strings") {
    Rng rng = Rng::seeded(31);
    GeneratorConfig config;
    for (int i = 0; i < 50; ++i) {
        std::string password = random_login_password(rng);
        auto spec = generate_converter(password, config, rng);
        std::string concat;
        for (const auto& piece : convert_chars(spec, password)) {
            concat += piece;
        }
        std::string auth = generate_auth_password(spec, password);
        std::multiset<char> expected(concat.begin(), concat.end());
        std::multiset<char> got(auth.begin(), auth.end());
        CHECK(expected == got);
    }
}
