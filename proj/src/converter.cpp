#include "dualpass/converter.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "dualpass/errors.hpp"

namespace dualpass {

std::string_view login_alphabet() {
    static const std::string alphabet = "abcdefghijklmnopqrstuvwxyz0123456789";
    return alphabet;
}

std::string_view default_string_alphabet() {
    static const std::string alphabet = [] {
        std::string s;
        for (char c = 0x21; c <= 0x7e; ++c) {
            s.push_back(c);
        }
        return s;
    }();
    return alphabet;
}

bool is_login_char(char c) {
    return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9');
}

Label parse_label(std::string_view text) {
    if (text.size() < 2) {
        raise(Errc::malformed_label, "label too short: \"" + std::string(text) + "\"");
    }
    char order_char = text.back();
    if (order_char != 'F' && order_char != 'R') {
        raise(Errc::malformed_label,
              "label must end in F or R: \"" + std::string(text) + "\"");
    }
    std::string_view digits = text.substr(0, text.size() - 1);
    long point = 0;
    for (char c : digits) {
        if (c < '0' || c > '9') {
            raise(Errc::malformed_label,
                  "label prefix must be decimal digits: \"" + std::string(text) + "\"");
        }
        point = point * 10 + (c - '0');
        if (point > 1'000'000) {
            raise(Errc::malformed_label, "label point out of range");
        }
    }
    if (point < 1) {
        raise(Errc::malformed_label, "label points are 1-based");
    }
    return Label{int(point), order_char == 'F' ? Order::Forward : Order::Reverse};
}

std::string format_label(const Label& label) {
    return std::to_string(label.point) + (label.order == Order::Forward ? 'F' : 'R');
}

std::string insert_string(std::string_view base, std::string_view piece, const Label& label) {
    if (piece.empty()) {
        raise(Errc::invalid_argument, "insert_string: empty piece");
    }
    if (label.point < 1) {
        raise(Errc::invalid_argument, "insert_string: label point must be >= 1");
    }
    std::size_t n = base.size();
    std::size_t point = std::min<std::size_t>(std::size_t(label.point), n + 1);
    std::string text(piece);
    if (label.order == Order::Reverse) {
        std::reverse(text.begin(), text.end());
    }
    std::string out;
    out.reserve(n + piece.size());
    out.append(base.substr(0, point - 1));
    out.append(text);
    out.append(base.substr(point - 1));
    return out;
}

std::string shuffle_strings(const std::vector<std::string>& strings,
                            const std::vector<Label>& labels) {
    if (strings.empty()) {
        raise(Errc::invalid_argument, "shuffle_strings: no strings");
    }
    if (labels.size() + 1 != strings.size()) {
        std::ostringstream msg;
        msg << "shuffle_strings: " << strings.size() << " strings need "
            << strings.size() - 1 << " labels, got " << labels.size();
        raise(Errc::arity_mismatch, msg.str());
    }
    std::string temp = strings.front();
    if (temp.empty()) {
        raise(Errc::invalid_argument, "shuffle_strings: empty string");
    }
    for (std::size_t i = 0; i + 1 < strings.size(); ++i) {
        temp = insert_string(temp, strings[i + 1], labels[i]);
    }
    return temp;
}

const std::string& ConversionUnit::registered_string() const {
    auto it = table.find(expected_char);
    if (it == table.end()) {
        raise(Errc::store_corrupt,
              "conversion unit has no table entry for its expected character");
    }
    return it->second;
}

std::string ConverterSpec::registered_login_password() const {
    std::string out;
    out.reserve(units.size());
    for (const auto& unit : units) {
        out.push_back(unit.expected_char);
    }
    return out;
}

std::vector<std::string> convert_chars(const ConverterSpec& spec, std::string_view entered) {
    if (entered.size() != spec.units.size()) {
        std::ostringstream msg;
        msg << "convert_chars: entered length " << entered.size()
            << " does not match converter length " << spec.units.size();
        raise(Errc::length_mismatch, msg.str());
    }
    std::vector<std::string> out;
    out.reserve(entered.size());
    for (std::size_t i = 0; i < entered.size(); ++i) {
        auto it = spec.units[i].table.find(entered[i]);
        if (it == spec.units[i].table.end()) {
            std::ostringstream msg;
            msg << "convert_chars: character at position " << i + 1
                << " is outside the unit's alphabet";
            raise(Errc::alphabet_violation, msg.str());
        }
        out.push_back(it->second);
    }
    return out;
}

std::string generate_auth_password(const ConverterSpec& spec, std::string_view entered) {
    return shuffle_strings(convert_chars(spec, entered), spec.labels);
}

void validate_spec(const ConverterSpec& spec) {
    if (spec.units.empty()) {
        raise(Errc::store_corrupt, "converter has no units");
    }
    if (spec.labels.size() + 1 != spec.units.size()) {
        raise(Errc::store_corrupt, "converter label count does not match unit count");
    }
    int digit_sum = 0;
    for (std::size_t i = 0; i < spec.units.size(); ++i) {
        const auto& unit = spec.units[i];
        if (unit.position != int(i) + 1) {
            raise(Errc::store_corrupt, "converter unit positions must be 1..L without gaps");
        }
        if (unit.digit < 1) {
            raise(Errc::store_corrupt, "converter digit must be positive");
        }
        if (unit.table.find(unit.expected_char) == unit.table.end()) {
            raise(Errc::store_corrupt, "unit table misses its expected character");
        }
        std::set<std::string_view> values;
        for (const auto& [ch, value] : unit.table) {
            if (int(value.size()) != unit.digit) {
                raise(Errc::store_corrupt, "unit table value length differs from digit");
            }
            if (!values.insert(value).second) {
                raise(Errc::store_corrupt, "unit table values must be pairwise distinct");
            }
        }
        digit_sum += unit.digit;
    }
    if (digit_sum != spec.target_length) {
        raise(Errc::store_corrupt, "converter digits do not sum to target length");
    }
    for (const auto& label : spec.labels) {
        if (label.point < 1) {
            raise(Errc::store_corrupt, "converter label point must be >= 1");
        }
    }
}

nlohmann::ordered_json spec_to_json(const ConverterSpec& spec) {
    nlohmann::ordered_json j;
    j["version"] = 1;
    j["target_length"] = spec.target_length;
    auto units = nlohmann::ordered_json::array();
    for (const auto& unit : spec.units) {
        nlohmann::ordered_json u;
        u["position"] = unit.position;
        u["expected_char"] = std::string(1, unit.expected_char);
        u["digit"] = unit.digit;
        auto table = nlohmann::ordered_json::object();
        for (const auto& [ch, value] : unit.table) { // std::map keeps keys sorted
            table[std::string(1, ch)] = value;
        }
        u["table"] = std::move(table);
        units.push_back(std::move(u));
    }
    j["units"] = std::move(units);
    auto labels = nlohmann::ordered_json::array();
    for (const auto& label : spec.labels) {
        labels.push_back(format_label(label));
    }
    j["labels"] = std::move(labels);
    return j;
}

ConverterSpec spec_from_json(const nlohmann::json& j) {
    try {
        if (j.at("version").get<int>() != 1) {
            raise(Errc::store_corrupt, "unsupported converter version");
        }
        ConverterSpec spec;
        spec.target_length = j.at("target_length").get<int>();
        for (const auto& u : j.at("units")) {
            ConversionUnit unit;
            unit.position = u.at("position").get<int>();
            std::string expected = u.at("expected_char").get<std::string>();
            if (expected.size() != 1) {
                raise(Errc::store_corrupt, "expected_char must be a single character");
            }
            unit.expected_char = expected[0];
            unit.digit = u.at("digit").get<int>();
            for (const auto& [key, value] : u.at("table").items()) {
                if (key.size() != 1) {
                    raise(Errc::store_corrupt, "table keys must be single characters");
                }
                unit.table[key[0]] = value.get<std::string>();
            }
            spec.units.push_back(std::move(unit));
        }
        for (const auto& l : j.at("labels")) {
            spec.labels.push_back(parse_label(l.get<std::string>()));
        }
        validate_spec(spec);
        return spec;
    } catch (const nlohmann::json::exception& e) {
        raise(Errc::store_corrupt, std::string("converter json malformed: ") + e.what());
    }
}

} // namespace dualpass
