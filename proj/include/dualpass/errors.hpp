#pragma once

#include <stdexcept>
#include <string>

namespace dualpass {

enum class Errc {
    malformed_label,
    arity_mismatch,
    length_mismatch,
    alphabet_violation,
    generation_exhausted,
    infeasible_budget,
    invalid_strategy,
    row_out_of_range,
    duplicate_username,
    device_already_bound,
    unknown_account,
    store_corrupt,
    protocol_error,
    not_a_smartphone,
    not_authenticated,
    token_expired,
    token_used,
    token_unknown,
    invalid_argument,
    io_error,
};

const char* errc_name(Errc code);

/// Single exception type for the whole library; the code tells callers
/// (and the wire layer) which contract was broken.
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    Errc code() const { return code_; }

private:
    Errc code_;
};

[[noreturn]] inline void raise(Errc code, const std::string& what) {
    throw Error(code, what);
}

} // namespace dualpass
