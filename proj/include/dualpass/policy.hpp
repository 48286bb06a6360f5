#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace dualpass {

enum class CharClass : unsigned {
    Lower = 1u << 0,
    Upper = 1u << 1,
    Digit = 1u << 2,
    Symbol = 1u << 3, // printable ASCII minus alphanumerics minus space
};

using CharClassSet = unsigned;

CharClassSet char_classes(std::string_view s);
int class_count(CharClassSet classes);
bool has_class(CharClassSet classes, CharClass c);

/// Length and complexity policy for the password pair. Login passwords are
/// short, lowercase/digit only; authentication passwords are long, four
/// classes, with an uppercase letter or symbol in the first window.
struct PolicyConfig {
    int login_min = 5;
    int login_max = 15;
    int auth_min_classes = 4;
    int auth_length = 20;
    int first_window = 4;
};

enum class ViolationKind {
    TooShort,
    TooLong,
    InvalidCharacter,
    MissingClasses,
    FirstWindowRule,
};

const char* violation_kind_name(ViolationKind kind);

struct Violation {
    ViolationKind kind;
    int position = 0; // 1-based, set for InvalidCharacter
    std::string detail;
};

/// Exhaustive check against the login-password policy; empty result means ok.
std::vector<Violation> validate_login_password(std::string_view s, const PolicyConfig& cfg);

/// Exhaustive check against the authentication-password policy.
std::vector<Violation> validate_auth_password(std::string_view s, const PolicyConfig& cfg);

enum class FieldInputClass {
    LocalCandidate,    // valid login-password shape; may proceed
    StrengthViolation, // nonlocal indicator; never initiates authentication
};

/// Every password-field input falls in exactly one class. Anything shaped
/// like an authentication password (uppercase, symbols, spaces, wrong
/// length) is a strength violation.
FieldInputClass classify_field_input(std::string_view s, const PolicyConfig& cfg);

} // namespace dualpass
