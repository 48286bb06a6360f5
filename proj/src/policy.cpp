#include "dualpass/policy.hpp"

#include <cctype>
#include <sstream>

#include "dualpass/converter.hpp"

namespace dualpass {

namespace {

bool is_symbol_char(unsigned char c) {
    if (c < 0x21 || c > 0x7e) {
        return false;
    }
    return !std::isalnum(c);
}

} // namespace

CharClassSet char_classes(std::string_view s) {
    CharClassSet out = 0;
    for (unsigned char c : s) {
        if (c >= 'a' && c <= 'z') {
            out |= unsigned(CharClass::Lower);
        } else if (c >= 'A' && c <= 'Z') {
            out |= unsigned(CharClass::Upper);
        } else if (c >= '0' && c <= '9') {
            out |= unsigned(CharClass::Digit);
        } else if (is_symbol_char(c)) {
            out |= unsigned(CharClass::Symbol);
        }
    }
    return out;
}

int class_count(CharClassSet classes) {
    int n = 0;
    while (classes) {
        n += int(classes & 1);
        classes >>= 1;
    }
    return n;
}

bool has_class(CharClassSet classes, CharClass c) {
    return (classes & unsigned(c)) != 0;
}

const char* violation_kind_name(ViolationKind kind) {
    switch (kind) {
    case ViolationKind::TooShort: return "too_short";
    case ViolationKind::TooLong: return "too_long";
    case ViolationKind::InvalidCharacter: return "invalid_character";
    case ViolationKind::MissingClasses: return "missing_classes";
    case ViolationKind::FirstWindowRule: return "first_window_rule";
    }
    return "unknown";
}

std::vector<Violation> validate_login_password(std::string_view s, const PolicyConfig& cfg) {
    std::vector<Violation> out;
    if (int(s.size()) < cfg.login_min) {
        std::ostringstream msg;
        msg << "login password has " << s.size() << " characters, minimum is "
            << cfg.login_min;
        out.push_back({ViolationKind::TooShort, 0, msg.str()});
    }
    if (int(s.size()) > cfg.login_max) {
        std::ostringstream msg;
        msg << "login password has " << s.size() << " characters, maximum is "
            << cfg.login_max;
        out.push_back({ViolationKind::TooLong, 0, msg.str()});
    }
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (!is_login_char(s[i])) {
            std::ostringstream msg;
            msg << "character at position " << i + 1
                << " is not a lowercase letter or digit";
            out.push_back({ViolationKind::InvalidCharacter, int(i) + 1, msg.str()});
        }
    }
    return out;
}

std::vector<Violation> validate_auth_password(std::string_view s, const PolicyConfig& cfg) {
    std::vector<Violation> out;
    if (int(s.size()) < cfg.auth_length) {
        out.push_back({ViolationKind::TooShort, 0,
                       "authentication password shorter than " +
                           std::to_string(cfg.auth_length)});
    }
    if (int(s.size()) > cfg.auth_length) {
        out.push_back({ViolationKind::TooLong, 0,
                       "authentication password longer than " +
                           std::to_string(cfg.auth_length)});
    }
    CharClassSet classes = char_classes(s);
    if (class_count(classes) < cfg.auth_min_classes) {
        out.push_back({ViolationKind::MissingClasses, 0,
                       "authentication password must contain at least " +
                           std::to_string(cfg.auth_min_classes) + " character classes"});
    }
    std::size_t window = std::min<std::size_t>(s.size(), std::size_t(cfg.first_window));
    CharClassSet head = char_classes(s.substr(0, window));
    if (!has_class(head, CharClass::Upper) && !has_class(head, CharClass::Symbol)) {
        out.push_back({ViolationKind::FirstWindowRule, 0,
                       "first " + std::to_string(cfg.first_window) +
                           " characters need an uppercase letter or a symbol"});
    }
    return out;
}

FieldInputClass classify_field_input(std::string_view s, const PolicyConfig& cfg) {
    return validate_login_password(s, cfg).empty() ? FieldInputClass::LocalCandidate
                                                   : FieldInputClass::StrengthViolation;
}

} // namespace dualpass
