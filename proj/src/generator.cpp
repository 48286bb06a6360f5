#include "dualpass/generator.hpp"

#include <set>
#include <sstream>

#include "dualpass/errors.hpp"
#include "dualpass/policy.hpp"
#include "dualpass/sha256.hpp"

namespace dualpass {

namespace {

constexpr std::uint64_t count_cap = std::uint64_t(1) << 62;

std::uint64_t saturating_add(std::uint64_t a, std::uint64_t b) {
    std::uint64_t s = a + b;
    if (s < a || s > count_cap) {
        return count_cap;
    }
    return s;
}

// ways[p][s] = number of compositions of s into p parts, each in [1, max_part]
std::vector<std::vector<std::uint64_t>> composition_counts(int total, int parts, int max_part) {
    std::vector<std::vector<std::uint64_t>> ways(
        std::size_t(parts) + 1, std::vector<std::uint64_t>(std::size_t(total) + 1, 0));
    ways[0][0] = 1;
    for (int p = 1; p <= parts; ++p) {
        for (int s = 1; s <= total; ++s) {
            std::uint64_t acc = 0;
            for (int v = 1; v <= max_part && v <= s; ++v) {
                acc = saturating_add(acc, ways[p - 1][s - v]);
            }
            ways[p][s] = acc;
        }
    }
    return ways;
}

std::uint64_t checked_pow(std::uint64_t base, int exp, std::uint64_t cap) {
    std::uint64_t out = 1;
    for (int i = 0; i < exp; ++i) {
        if (out > cap / base) {
            return cap;
        }
        out *= base;
    }
    return out;
}

} // namespace

std::vector<int> sample_digit_composition(int total, int parts, int max_part, Rng& rng) {
    if (parts < 1 || max_part < 1 || total < parts || total > parts * max_part) {
        std::ostringstream msg;
        msg << "no composition of " << total << " into " << parts
            << " digits bounded by " << max_part;
        raise(Errc::infeasible_budget, msg.str());
    }
    auto ways = composition_counts(total, parts, max_part);
    std::vector<int> digits;
    digits.reserve(std::size_t(parts));
    int remaining = total;
    for (int p = parts; p >= 1; --p) {
        std::uint64_t total_ways = ways[p][remaining];
        std::uint64_t r = std::uint64_t(rng.uniform(1, std::int64_t(total_ways)));
        int chosen = 0;
        for (int v = 1; v <= max_part && v <= remaining; ++v) {
            std::uint64_t w = ways[p - 1][remaining - v];
            if (r <= w) {
                chosen = v;
                break;
            }
            r -= w;
        }
        digits.push_back(chosen);
        remaining -= chosen;
    }
    return digits;
}

ConverterSpec generate_converter(std::string_view login_password,
                                 const GeneratorConfig& config, Rng& rng) {
    if (login_password.empty()) {
        raise(Errc::invalid_argument, "generate_converter: empty login password");
    }
    for (std::size_t i = 0; i < login_password.size(); ++i) {
        if (config.login_alphabet.find(login_password[i]) == std::string::npos) {
            raise(Errc::alphabet_violation,
                  "login password character at position " + std::to_string(i + 1) +
                      " is outside the login alphabet");
        }
    }
    const int length = int(login_password.size());
    const std::size_t table_size = config.login_alphabet.size();

    PolicyConfig policy;
    policy.auth_length = config.target_length;

    for (int attempt = 0; attempt < config.max_regeneration_attempts; ++attempt) {
        ConverterSpec spec;
        spec.target_length = config.target_length;
        auto digits = sample_digit_composition(config.target_length, length,
                                               config.max_digit, rng);
        for (int i = 0; i < length; ++i) {
            ConversionUnit unit;
            unit.position = i + 1;
            unit.expected_char = login_password[std::size_t(i)];
            unit.digit = digits[std::size_t(i)];
            if (checked_pow(config.string_alphabet.size(), unit.digit, count_cap) <
                table_size) {
                raise(Errc::infeasible_budget,
                      "string alphabet too small for distinct table values");
            }
            std::set<std::string> seen;
            for (char c : config.login_alphabet) {
                std::string value;
                do {
                    value.clear();
                    for (int k = 0; k < unit.digit; ++k) {
                        value.push_back(rng.pick(config.string_alphabet));
                    }
                } while (!seen.insert(value).second);
                unit.table[c] = std::move(value);
            }
            spec.units.push_back(std::move(unit));
        }
        for (int i = 1; i < length; ++i) {
            Label label;
            label.point = int(rng.uniform(1, config.target_length));
            label.order = rng.uniform(0, 1) == 0 ? Order::Forward : Order::Reverse;
            spec.labels.push_back(label);
        }

        std::string candidate = generate_auth_password(spec, login_password);
        bool ok = validate_auth_password(candidate, policy).empty();
        secure_wipe(candidate);
        if (ok) {
            validate_spec(spec);
            return spec;
        }
    }
    raise(Errc::generation_exhausted,
          "no acceptable authentication password within " +
              std::to_string(config.max_regeneration_attempts) + " attempts");
}

} // namespace dualpass
