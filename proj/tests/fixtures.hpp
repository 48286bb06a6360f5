#pragma once

// Shared test fixtures: the worked-example converter and small helpers.

#include <string>
#include <vector>

#include "dualpass/converter.hpp"
#include "dualpass/credstore.hpp"

namespace fixtures {

/// The six-unit converter from the worked example: expected characters
/// "b@0N8m" with digits 6,3,5,2,3,1 and labels 4F,16R,13F,13R,5F. The
/// tables carry the registered strings plus a few filler rows; this
/// pre-policy fixture exists to pin the documented conversion vectors.
inline dualpass::ConverterSpec example_spec() {
    using dualpass::ConversionUnit;
    dualpass::ConverterSpec spec;
    spec.target_length = 20;

    auto unit = [](int pos, char expected, int digit,
                   std::map<char, std::string> table) {
        ConversionUnit u;
        u.position = pos;
        u.expected_char = expected;
        u.digit = digit;
        u.table = std::move(table);
        return u;
    };

    spec.units.push_back(unit(1, 'b', 6,
                              {{'b', "3Mo&(E"}, {'a', "p!Kd72"}, {'c', "0)rTe$"}}));
    spec.units.push_back(unit(2, '@', 3, {{'@', "vX#"}, {'a', "8_w"}, {'b', "Jq("}}));
    spec.units.push_back(unit(3, '0', 5, {{'0', "z%9CP"}, {'1', "fR@2k"}}));
    spec.units.push_back(unit(4, 'N', 2, {{'N', "?G"}, {'a', "u5"}}));
    spec.units.push_back(unit(5, '8', 3, {{'8', "d$L"}, {'9', "mW)"}}));
    spec.units.push_back(unit(6, 'm', 1, {{'m', "Q"}, {'n', "c"}}));

    spec.labels = {
        dualpass::parse_label("4F"), dualpass::parse_label("16R"),
        dualpass::parse_label("13F"), dualpass::parse_label("13R"),
        dualpass::parse_label("5F"),
    };
    return spec;
}

inline const std::vector<std::string>& example_strings() {
    static const std::vector<std::string> strings = {"3Mo&(E", "vX#", "z%9CP",
                                                     "?G",     "d$L", "Q"};
    return strings;
}

inline const std::string& example_auth_password() {
    static const std::string value = "3MovQX#&(EPC9L$d?G%z";
    return value;
}

inline dualpass::DeviceDescriptor phone(const std::string& suffix = "01") {
    dualpass::DeviceDescriptor d;
    d.phone_number = "155501000" + suffix;
    d.imei = "3569380356438" + suffix;
    d.sim_id = "89014103211118510" + suffix;
    d.kind = dualpass::DeviceKind::Smartphone;
    return d;
}

inline dualpass::DeviceDescriptor desktop(const std::string& tag = "desk-01") {
    dualpass::DeviceDescriptor d;
    d.phone_number = "";
    d.imei = tag;
    d.sim_id = "";
    d.kind = dualpass::DeviceKind::Desktop;
    return d;
}

} // namespace fixtures
