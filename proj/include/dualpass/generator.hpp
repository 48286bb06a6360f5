#pragma once

#include <string_view>
#include <vector>

#include "dualpass/converter.hpp"
#include "dualpass/rng.hpp"

namespace dualpass {

/// System-side parameters for converter generation. All pair parameters
/// (digits, tables, labels) are selected here, never by the user.
struct GeneratorConfig {
    std::string login_alphabet{dualpass::login_alphabet()};
    std::string string_alphabet{default_string_alphabet()};
    int target_length = 20;
    int max_digit = 6;
    int max_regeneration_attempts = 1000;
};

/// Uniform draw over all compositions of `total` into `parts` addends,
/// each in [1, max_part]. Throws Errc::infeasible_budget when none exist.
std::vector<int> sample_digit_composition(int total, int parts, int max_part, Rng& rng);

/// Builds a fresh converter for a policy-valid login password: digits from
/// a uniform composition, per-unit tables of distinct random strings, and
/// random shuffling labels. Rejection-samples until the registered
/// authentication password has at least four character classes and an
/// uppercase letter or symbol within its first four characters.
ConverterSpec generate_converter(std::string_view login_password,
                                 const GeneratorConfig& config, Rng& rng);

} // namespace dualpass
