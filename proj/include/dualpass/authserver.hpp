#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dualpass/clock.hpp"
#include "dualpass/credstore.hpp"
#include "dualpass/generator.hpp"
#include "dualpass/policy.hpp"
#include "dualpass/rng.hpp"

namespace dualpass {

struct ServiceConfig {
    PolicyConfig policy;
    GeneratorConfig generator;
    LockoutConfig lockout;
    std::int64_t link_token_ttl_seconds = 120;
    IdentifierStrategy identifier_strategy = IdentifierStrategy::combo(4);
};

ServiceConfig service_config_from_json(const nlohmann::json& j);

enum class Phase { Fresh, UsernameAccepted, FieldDisabled, Authenticated };

enum class FieldState { Enabled, Disabled };

enum class PasswordOutcome { Granted, Denied, LockedOut, Disabled };

const char* password_outcome_name(PasswordOutcome outcome);

struct Session {
    std::string id;
    DeviceDescriptor device;
    Phase phase = Phase::Fresh;
    std::string username;      // accepted at the username stage
    std::string account;       // set once authenticated
    std::string session_token; // opaque, in-memory only
    std::string issued_token;  // link token issued by this (non-smartphone) session
    std::string issued_request_id;
};

struct PasswordDecision {
    PasswordOutcome outcome;
    std::string session_token; // set when granted
};

struct RegisterResult {
    bool ok = false;
    std::vector<Violation> violations;
    int target_length = 0;
    std::string strategy_kind;
};

struct ModifyLoginResult {
    bool ok = false;
    std::vector<Violation> violations;
    bool regenerated = false; // length change forced a full converter rebuild
};

struct LinkIssueResult {
    std::string token;
    std::int64_t expires_in = 0;
};

struct RedeemResult {
    std::string account;
    std::string desktop_session_id;
    std::string desktop_session_token;
};

/// The system routines over one credential store: username gating,
/// password gating with isolated authentication, registration,
/// modification, and cross-device link tokens. Not thread-safe; the wire
/// layer serializes calls.
class AuthService {
public:
    AuthService(Store& store, ServiceConfig config, Clock& clock, Rng rng);

    std::string open_session(const DeviceDescriptor& device);
    const Session* find_session(const std::string& session_id) const;

    /// Forgets a session (connection closed). Safe for unknown ids.
    void close_session(const std::string& session_id);

    /// Client hint only: the username whose registered smartphone equals
    /// this device, if any.
    std::optional<std::string> known_username(const DeviceDescriptor& device) const;

    FieldState username_entry(const std::string& session_id, const std::string& username);
    PasswordDecision password_entry(const std::string& session_id, const std::string& input);

    RegisterResult register_account(const std::string& session_id,
                                    const std::string& username,
                                    const std::string& login_password);

    ModifyLoginResult modify_login(const std::string& session_id,
                                   const std::string& new_login_password);

    /// Returns true when the authentication password was regenerated,
    /// false when the request was declined.
    bool modify_auth(const std::string& session_id, bool accept);

    LinkIssueResult issue_link(const std::string& session_id,
                               const std::string& request_id);
    RedeemResult redeem_link(const std::string& session_id, const std::string& token);

    void admin_unlock(const std::string& username);

    /// How many times the isolated authentication step has run. Nonlocal
    /// attempts must never move this counter.
    std::uint64_t authentication_initiations() const { return initiations_; }

    const ServiceConfig& config() const { return config_; }

    /// JSON-level dispatcher shared by the socket server and the scenario
    /// runner. `session_id` is empty until a hello has been handled;
    /// `pushes` carries messages for other sessions (link redemption).
    struct Handled {
        nlohmann::ordered_json response;
        std::vector<std::pair<std::string, nlohmann::ordered_json>> pushes;
        std::string new_session_id; // set when the request was a hello
    };
    Handled handle_message(const std::string& session_id, const nlohmann::json& request);

private:
    Session& session_or_throw(const std::string& session_id);
    const AccountRecord& account_or_throw(const std::string& username) const;

    Store& store_;
    ServiceConfig config_;
    Clock& clock_;
    Rng rng_;
    std::map<std::string, Session> sessions_;
    std::uint64_t initiations_ = 0;
    std::uint64_t session_counter_ = 0;
};

nlohmann::ordered_json violations_to_json(const std::vector<Violation>& violations);

} // namespace dualpass
