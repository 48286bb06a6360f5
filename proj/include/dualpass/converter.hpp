#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "vendor_json.hpp"

namespace dualpass {

/// The 36 characters a login password may contain.
std::string_view login_alphabet();

/// Default alphabet for converted strings: printable ASCII 0x21..0x7E,
/// space excluded (94 characters).
std::string_view default_string_alphabet();

bool is_login_char(char c);

enum class Order { Forward, Reverse };

/// Shuffling label: "4F" inserts the next string forward at point 4,
/// "16R" inserts it reversed at point 16 (clamped to the last point
/// when out of range).
struct Label {
    int point = 1; // 1-based insertion point
    Order order = Order::Forward;

    friend bool operator==(const Label&, const Label&) = default;
};

Label parse_label(std::string_view text);
std::string format_label(const Label& label);

/// Inserts `piece` (reversed when the label says so) into `base` at the
/// label's insertion point. Points run 1 (before the first char) through
/// n+1 (after the last); out-of-range points clamp to n+1. Never fails for
/// non-empty pieces and always grows the string by |piece|.
std::string insert_string(std::string_view base, std::string_view piece, const Label& label);

/// Left fold of insert_string over the string list; labels[i] applies to
/// strings[i+1]. Result length is the sum of the input lengths.
std::string shuffle_strings(const std::vector<std::string>& strings,
                            const std::vector<Label>& labels);

/// One row of the converter: the expected login character, the chosen
/// digit, and the substitution table mapping every admissible entered
/// character to a distinct string of exactly `digit` characters.
struct ConversionUnit {
    int position = 1; // 1-based
    char expected_char = 'a';
    int digit = 1;
    std::map<char, std::string> table;

    const std::string& registered_string() const;

    friend bool operator==(const ConversionUnit&, const ConversionUnit&) = default;
};

/// The per-account quasi-matrix converter: L conversion units plus L-1
/// shuffling labels (the first row carries no label).
struct ConverterSpec {
    std::vector<ConversionUnit> units;
    std::vector<Label> labels;
    int target_length = 0;

    std::size_t length() const { return units.size(); }

    /// The registered login password, read back from the units.
    std::string registered_login_password() const;

    friend bool operator==(const ConverterSpec&, const ConverterSpec&) = default;
};

/// Per-position substitution of the entered characters through the units'
/// tables. A wrong character at any position yields a different string
/// there, which is what makes downstream verification password-dependent.
std::vector<std::string> convert_chars(const ConverterSpec& spec, std::string_view entered);

/// convert_chars followed by shuffle_strings: the full open-hash path from
/// entered login characters to the authentication password.
std::string generate_auth_password(const ConverterSpec& spec, std::string_view entered);

/// Structural invariants: positions 1..L without gaps, label count L-1,
/// table values of exact digit length and pairwise distinct per unit,
/// digits summing to target_length. Throws Errc::store_corrupt on failure.
void validate_spec(const ConverterSpec& spec);

/// Canonical, versioned JSON form; this is the persistence contract.
nlohmann::ordered_json spec_to_json(const ConverterSpec& spec);
ConverterSpec spec_from_json(const nlohmann::json& j);

} // namespace dualpass
