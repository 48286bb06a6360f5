#include "dualpass/authserver.hpp"

#include "dualpass/errors.hpp"
#include "dualpass/identity.hpp"
#include "dualpass/sha256.hpp"

namespace dualpass {

namespace {

IdentifierStrategy strategy_from_json(const nlohmann::json& j) {
    std::string kind = j.at("kind").get<std::string>();
    if (kind == "row") {
        return IdentifierStrategy::whole_row(j.at("row").get<int>());
    }
    if (kind == "column") {
        return IdentifierStrategy::whole_column(
            cell_column_from_name(j.at("column").get<std::string>()));
    }
    if (kind == "combo") {
        return IdentifierStrategy::combo(j.value("k", 4));
    }
    raise(Errc::invalid_argument, "unknown identifier strategy \"" + kind + "\"");
}

const char* strategy_kind_name(const IdentifierStrategy& s) {
    switch (s.kind) {
    case IdentifierStrategy::Kind::Row: return "row";
    case IdentifierStrategy::Kind::Column: return "column";
    case IdentifierStrategy::Kind::Combo: return "combo";
    }
    return "unknown";
}

} // namespace

ServiceConfig service_config_from_json(const nlohmann::json& j) {
    try {
        ServiceConfig cfg;
        if (j.contains("policy")) {
            const auto& p = j.at("policy");
            cfg.policy.login_min = p.value("login_min", cfg.policy.login_min);
            cfg.policy.login_max = p.value("login_max", cfg.policy.login_max);
            cfg.policy.auth_min_classes = p.value("auth_min_classes", cfg.policy.auth_min_classes);
            cfg.policy.auth_length = p.value("auth_length", cfg.policy.auth_length);
            cfg.policy.first_window = p.value("first_window", cfg.policy.first_window);
        }
        if (j.contains("generator")) {
            const auto& g = j.at("generator");
            cfg.generator.target_length = g.value("target_length", cfg.generator.target_length);
            cfg.generator.max_digit = g.value("max_digit", cfg.generator.max_digit);
            cfg.generator.max_regeneration_attempts =
                g.value("max_regeneration_attempts", cfg.generator.max_regeneration_attempts);
            cfg.generator.string_alphabet =
                g.value("string_alphabet", cfg.generator.string_alphabet);
            if (cfg.generator.string_alphabet.size() < 2) {
                raise(Errc::invalid_argument, "generator.string_alphabet is too small");
            }
        }
        if (j.contains("lockout")) {
            const auto& l = j.at("lockout");
            cfg.lockout.max_attempts = l.value("max_attempts", cfg.lockout.max_attempts);
            cfg.lockout.lock_expiry_seconds =
                l.value("lock_expiry_seconds", cfg.lockout.lock_expiry_seconds);
        }
        cfg.link_token_ttl_seconds = j.value("link_token_ttl_seconds", cfg.link_token_ttl_seconds);
        if (j.contains("identifier_strategy")) {
            cfg.identifier_strategy = strategy_from_json(j.at("identifier_strategy"));
        }
        if (cfg.policy.auth_length != cfg.generator.target_length) {
            raise(Errc::invalid_argument,
                  "policy.auth_length and generator.target_length must agree");
        }
        return cfg;
    } catch (const nlohmann::json::exception& e) {
        raise(Errc::invalid_argument, std::string("config malformed: ") + e.what());
    }
}

const char* password_outcome_name(PasswordOutcome outcome) {
    switch (outcome) {
    case PasswordOutcome::Granted: return "granted";
    case PasswordOutcome::Denied: return "denied";
    case PasswordOutcome::LockedOut: return "locked_out";
    case PasswordOutcome::Disabled: return "disabled";
    }
    return "unknown";
}

AuthService::AuthService(Store& store, ServiceConfig config, Clock& clock, Rng rng)
    : store_(store), config_(std::move(config)), clock_(clock), rng_(std::move(rng)) {}

std::string AuthService::open_session(const DeviceDescriptor& device) {
    Session s;
    s.id = "s" + std::to_string(++session_counter_) + "-" + rng_.token_hex(8);
    s.device = device;
    std::string id = s.id;
    sessions_[id] = std::move(s);
    return id;
}

const Session* AuthService::find_session(const std::string& session_id) const {
    auto it = sessions_.find(session_id);
    return it == sessions_.end() ? nullptr : &it->second;
}

void AuthService::close_session(const std::string& session_id) {
    sessions_.erase(session_id);
}

Session& AuthService::session_or_throw(const std::string& session_id) {
    auto it = sessions_.find(session_id);
    if (it == sessions_.end()) {
        raise(Errc::protocol_error, "unknown session; send hello first");
    }
    return it->second;
}

const AccountRecord& AuthService::account_or_throw(const std::string& username) const {
    const AccountRecord* rec = store_.find_by_username(username);
    if (!rec) {
        raise(Errc::unknown_account, "no account \"" + username + "\"");
    }
    return *rec;
}

std::optional<std::string> AuthService::known_username(const DeviceDescriptor& device) const {
    if (device.kind != DeviceKind::Smartphone) {
        return std::nullopt;
    }
    for (const auto& [name, rec] : store_.accounts()) {
        if (rec.device == device) {
            return name;
        }
    }
    return std::nullopt;
}

FieldState AuthService::username_entry(const std::string& session_id,
                                       const std::string& username) {
    Session& s = session_or_throw(session_id);
    if (s.phase != Phase::Fresh) {
        raise(Errc::protocol_error, "username already processed on this session");
    }
    const AccountRecord* rec = store_.find_by_username(username);
    if (rec && rec->device == s.device) {
        s.phase = Phase::UsernameAccepted;
        s.username = username;
        return FieldState::Enabled;
    }
    // nonlocal attempt: the password field stays disabled for the whole
    // session no matter what the client does next
    s.phase = Phase::FieldDisabled;
    return FieldState::Disabled;
}

PasswordDecision AuthService::password_entry(const std::string& session_id,
                                             const std::string& input) {
    Session& s = session_or_throw(session_id);

    // 1. only a session whose username/device matched may submit at all
    if (s.phase != Phase::UsernameAccepted) {
        return {PasswordOutcome::Disabled, ""};
    }
    // 2. strength violations are nonlocal indicators: no authentication,
    //    no attempt counted
    if (classify_field_input(input, config_.policy) == FieldInputClass::StrengthViolation) {
        return {PasswordOutcome::LockedOut, ""};
    }
    const AccountRecord* rec = store_.find_by_username(s.username);
    if (!rec) {
        return {PasswordOutcome::Disabled, ""};
    }
    // 3. lockout gate
    if (store_.effective_lock_state(s.username, config_.lockout, clock_.now()) ==
        LockState::Locked) {
        return {PasswordOutcome::LockedOut, ""};
    }
    // 4. process-identifier gate
    if (verify_identifier(rec->converter, input, rec->identifier) ==
        IdentifierCheck::Mismatch) {
        store_.record_attempt(s.username, AttemptOutcome::Failure, config_.lockout,
                              clock_.now());
        store_.save();
        return {PasswordOutcome::Denied, ""};
    }
    // 5. isolated authentication: reestablish the converter output for the
    //    entered password and compare verifiers; the plaintext never leaves
    //    this block
    ++initiations_;
    bool match = false;
    try {
        std::string candidate = generate_auth_password(rec->converter, input);
        match = verifier_matches(rec->verifier, candidate);
        secure_wipe(candidate);
    } catch (const Error& e) {
        if (e.code() != Errc::length_mismatch && e.code() != Errc::alphabet_violation) {
            throw;
        }
        match = false;
    }
    if (!match) {
        store_.record_attempt(s.username, AttemptOutcome::Failure, config_.lockout,
                              clock_.now());
        store_.save();
        return {PasswordOutcome::Denied, ""};
    }
    store_.record_attempt(s.username, AttemptOutcome::Success, config_.lockout, clock_.now());
    store_.save();
    s.phase = Phase::Authenticated;
    s.account = s.username;
    s.session_token = rng_.token_hex(16);
    return {PasswordOutcome::Granted, s.session_token};
}

RegisterResult AuthService::register_account(const std::string& session_id,
                                             const std::string& username,
                                             const std::string& login_password) {
    Session& s = session_or_throw(session_id);
    if (s.device.kind != DeviceKind::Smartphone) {
        raise(Errc::not_a_smartphone, "registration requires the user's smartphone");
    }
    if (s.phase == Phase::Authenticated || s.phase == Phase::UsernameAccepted) {
        raise(Errc::protocol_error, "registration needs a fresh session");
    }
    if (username.empty()) {
        raise(Errc::invalid_argument, "username must not be empty");
    }

    RegisterResult result;
    result.violations = validate_login_password(login_password, config_.policy);
    if (!result.violations.empty()) {
        return result;
    }
    if (store_.find_by_username(username)) {
        raise(Errc::duplicate_username, "username \"" + username + "\" already registered");
    }

    AccountRecord rec;
    rec.username = username;
    rec.user_identifier = s.device.phone_number;
    rec.device = s.device;
    rec.converter = generate_converter(login_password, config_.generator, rng_);
    {
        std::string auth = generate_auth_password(rec.converter, login_password);
        rec.verifier = make_verifier(auth, rng_.bytes(16));
        secure_wipe(auth);
    }
    rec.identifier =
        derive_identifier(rec.converter, login_password, config_.identifier_strategy, rng_);
    store_.create_account(std::move(rec));
    store_.save();

    result.ok = true;
    result.target_length = config_.generator.target_length;
    result.strategy_kind = strategy_kind_name(config_.identifier_strategy);
    return result;
}

ModifyLoginResult AuthService::modify_login(const std::string& session_id,
                                            const std::string& new_login_password) {
    Session& s = session_or_throw(session_id);
    if (s.phase != Phase::Authenticated) {
        raise(Errc::not_authenticated, "login-password modification requires authentication");
    }

    ModifyLoginResult result;
    result.violations = validate_login_password(new_login_password, config_.policy);
    if (!result.violations.empty()) {
        return result;
    }

    AccountRecord rec = account_or_throw(s.account);
    if (new_login_password.size() == rec.converter.units.size()) {
        // re-key in place: each unit swaps the strings of the old and new
        // expected characters, so registered strings, digits, and labels --
        // and therefore the verifier -- stay untouched
        for (std::size_t i = 0; i < rec.converter.units.size(); ++i) {
            auto& unit = rec.converter.units[i];
            char old_char = unit.expected_char;
            char new_char = new_login_password[i];
            auto old_it = unit.table.find(old_char);
            auto new_it = unit.table.find(new_char);
            if (old_it == unit.table.end() || new_it == unit.table.end()) {
                raise(Errc::alphabet_violation, "converter table does not cover the new character");
            }
            std::swap(old_it->second, new_it->second);
            unit.expected_char = new_char;
        }
        result.regenerated = false;
    } else {
        // length changed: rebuild the converter outright
        rec.converter = generate_converter(new_login_password, config_.generator, rng_);
        std::string auth = generate_auth_password(rec.converter, new_login_password);
        rec.verifier = make_verifier(auth, rng_.bytes(16));
        secure_wipe(auth);
        result.regenerated = true;
    }
    rec.identifier = derive_identifier(rec.converter, new_login_password,
                                       rec.identifier.strategy, rng_);
    rec.version += 1;
    store_.replace_account(rec);
    store_.save();
    result.ok = true;
    return result;
}

bool AuthService::modify_auth(const std::string& session_id, bool accept) {
    Session& s = session_or_throw(session_id);
    if (s.phase != Phase::Authenticated) {
        raise(Errc::not_authenticated, "authentication-password modification requires authentication");
    }
    if (s.device.kind != DeviceKind::Smartphone) {
        raise(Errc::not_a_smartphone, "only the registered smartphone can accept the modification");
    }
    if (!accept) {
        return false;
    }
    AccountRecord rec = account_or_throw(s.account);
    std::string login_password = rec.converter.registered_login_password();
    rec.converter = generate_converter(login_password, config_.generator, rng_);
    {
        std::string auth = generate_auth_password(rec.converter, login_password);
        rec.verifier = make_verifier(auth, rng_.bytes(16));
        secure_wipe(auth);
    }
    rec.identifier =
        derive_identifier(rec.converter, login_password, rec.identifier.strategy, rng_);
    rec.version += 1;
    store_.replace_account(rec);
    store_.save();
    return true;
}

LinkIssueResult AuthService::issue_link(const std::string& session_id,
                                        const std::string& request_id) {
    Session& s = session_or_throw(session_id);
    if (s.device.kind == DeviceKind::Smartphone) {
        raise(Errc::not_a_smartphone,
              "link tokens are for logging non-smartphone devices in");
    }
    LinkToken token;
    token.token = rng_.token_hex(16);
    token.desktop_session = s.id;
    token.expires_at = clock_.now() + config_.link_token_ttl_seconds;
    token.used = false;
    store_.put_token(token);
    store_.save();
    s.issued_token = token.token;
    s.issued_request_id = request_id;
    return {token.token, config_.link_token_ttl_seconds};
}

RedeemResult AuthService::redeem_link(const std::string& session_id,
                                      const std::string& token) {
    Session& s = session_or_throw(session_id);
    if (s.device.kind != DeviceKind::Smartphone) {
        raise(Errc::not_a_smartphone, "link tokens are redeemed by the registered smartphone");
    }
    if (s.phase != Phase::Authenticated) {
        raise(Errc::not_authenticated, "authenticate on the smartphone before scanning");
    }
    const LinkToken* found = store_.find_token(token);
    if (!found) {
        raise(Errc::token_unknown, "unknown link token");
    }
    if (found->used) {
        raise(Errc::token_used, "link token was already redeemed");
    }
    if (clock_.now() >= found->expires_at) {
        raise(Errc::token_expired, "link token expired");
    }
    store_.mark_token_used(token);
    store_.save();

    RedeemResult result;
    result.account = s.account; // the redeeming phone's own account, never a choice
    result.desktop_session_id = found->desktop_session;
    auto it = sessions_.find(found->desktop_session);
    if (it != sessions_.end()) {
        Session& desktop = it->second;
        desktop.phase = Phase::Authenticated;
        desktop.account = s.account;
        desktop.session_token = rng_.token_hex(16);
        result.desktop_session_token = desktop.session_token;
    }
    return result;
}

void AuthService::admin_unlock(const std::string& username) {
    if (!store_.find_by_username(username)) {
        raise(Errc::unknown_account, "no account \"" + username + "\"");
    }
    store_.unlock(username);
    store_.save();
}

nlohmann::ordered_json violations_to_json(const std::vector<Violation>& violations) {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& v : violations) {
        nlohmann::ordered_json item;
        item["kind"] = violation_kind_name(v.kind);
        item["position"] = v.position;
        item["detail"] = v.detail;
        arr.push_back(std::move(item));
    }
    return arr;
}

AuthService::Handled AuthService::handle_message(const std::string& session_id,
                                                 const nlohmann::json& request) {
    Handled handled;
    nlohmann::ordered_json& res = handled.response;
    if (request.contains("request_id")) {
        res["request_id"] = request.at("request_id");
    }
    try {
        if (!request.is_object() || !request.contains("type") ||
            !request.at("type").is_string()) {
            raise(Errc::protocol_error, "request must be an object with a \"type\"");
        }
        const std::string type = request.at("type").get<std::string>();

        if (type == "hello") {
            DeviceDescriptor device = device_from_json(request.at("device"));
            std::string id = open_session(device);
            handled.new_session_id = id;
            res["status"] = "ok";
            res["session_id"] = id;
            if (auto hint = known_username(device)) {
                res["known_username"] = *hint;
            }
            return handled;
        }
        if (session_id.empty()) {
            raise(Errc::protocol_error, "send hello before other messages");
        }

        if (type == "username_entry") {
            FieldState state =
                username_entry(session_id, request.at("username").get<std::string>());
            res["status"] = "ok";
            res["field_state"] = state == FieldState::Enabled ? "enabled" : "disabled";
        } else if (type == "password_entry") {
            PasswordDecision decision =
                password_entry(session_id, request.at("password").get<std::string>());
            res["status"] = "ok";
            res["result"] = password_outcome_name(decision.outcome);
            if (decision.outcome == PasswordOutcome::Granted) {
                res["session_token"] = decision.session_token;
            }
        } else if (type == "register") {
            RegisterResult result =
                register_account(session_id, request.at("username").get<std::string>(),
                                 request.at("login_password").get<std::string>());
            if (result.ok) {
                res["status"] = "ok";
                res["target_length"] = result.target_length;
                res["identifier_strategy"] = result.strategy_kind;
            } else {
                res["status"] = "error";
                res["error"] = "policy_violation";
                res["violations"] = violations_to_json(result.violations);
            }
        } else if (type == "modify_login") {
            ModifyLoginResult result = modify_login(
                session_id, request.at("new_login_password").get<std::string>());
            if (result.ok) {
                res["status"] = "ok";
                res["regenerated"] = result.regenerated;
            } else {
                res["status"] = "error";
                res["error"] = "policy_violation";
                res["violations"] = violations_to_json(result.violations);
            }
        } else if (type == "modify_auth") {
            bool modified = modify_auth(session_id, request.at("accept").get<bool>());
            res["status"] = "ok";
            res["modified"] = modified;
        } else if (type == "issue_link") {
            std::string request_id = request.value("request_id", std::string());
            LinkIssueResult result = issue_link(session_id, request_id);
            res["status"] = "ok";
            res["link_token"] = result.token;
            res["expires_in"] = result.expires_in;
        } else if (type == "redeem_link") {
            RedeemResult result =
                redeem_link(session_id, request.at("token").get<std::string>());
            res["status"] = "ok";
            res["result"] = "granted";
            res["account"] = result.account;
            if (!result.desktop_session_token.empty()) {
                nlohmann::ordered_json push;
                const Session* desktop = find_session(result.desktop_session_id);
                if (desktop && !desktop->issued_request_id.empty()) {
                    push["request_id"] = desktop->issued_request_id;
                }
                push["type"] = "link_redeemed";
                push["status"] = "ok";
                push["result"] = "granted";
                push["account"] = result.account;
                push["session_token"] = result.desktop_session_token;
                handled.pushes.emplace_back(result.desktop_session_id, std::move(push));
            }
        } else if (type == "admin_unlock") {
            admin_unlock(request.at("username").get<std::string>());
            res["status"] = "ok";
        } else {
            raise(Errc::protocol_error, "unknown message type \"" + type + "\"");
        }
    } catch (const Error& e) {
        res["status"] = "error";
        res["error"] = errc_name(e.code());
        res["message"] = e.what();
    } catch (const nlohmann::json::exception& e) {
        res["status"] = "error";
        res["error"] = errc_name(Errc::protocol_error);
        res["message"] = std::string("malformed payload: ") + e.what();
    }
    return handled;
}

} // namespace dualpass
