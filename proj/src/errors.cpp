#include "dualpass/errors.hpp"

namespace dualpass {

const char* errc_name(Errc code) {
    switch (code) {
    case Errc::malformed_label: return "malformed_label";
    case Errc::arity_mismatch: return "arity_mismatch";
    case Errc::length_mismatch: return "length_mismatch";
    case Errc::alphabet_violation: return "alphabet_violation";
    case Errc::generation_exhausted: return "generation_exhausted";
    case Errc::infeasible_budget: return "infeasible_budget";
    case Errc::invalid_strategy: return "invalid_strategy";
    case Errc::row_out_of_range: return "row_out_of_range";
    case Errc::duplicate_username: return "duplicate_username";
    case Errc::device_already_bound: return "device_already_bound";
    case Errc::unknown_account: return "unknown_account";
    case Errc::store_corrupt: return "store_corrupt";
    case Errc::protocol_error: return "protocol_error";
    case Errc::not_a_smartphone: return "not_a_smartphone";
    case Errc::not_authenticated: return "not_authenticated";
    case Errc::token_expired: return "token_expired";
    case Errc::token_used: return "token_used";
    case Errc::token_unknown: return "token_unknown";
    case Errc::invalid_argument: return "invalid_argument";
    case Errc::io_error: return "io_error";
    }
    return "unknown_error";
}

} // namespace dualpass
