#include "dualpass/scenario.hpp"

#include <unistd.h>

#include <deque>
#include <filesystem>
#include <map>
#include <sstream>

#include "dualpass/errors.hpp"

namespace dualpass {

namespace {

nlohmann::json common_profiles() {
    return nlohmann::json{
        {"alice_phone",
         {{"phone_number", "15550100001"},
          {"imei", "356938035643809"},
          {"sim_id", "8901410321111851072"},
          {"device_kind", "smartphone"}}},
        {"mallory_phone",
         {{"phone_number", "15550100777"},
          {"imei", "990000862471854"},
          {"sim_id", "8901410321111859990"},
          {"device_kind", "smartphone"}}},
        {"intruder_phone",
         {{"phone_number", "15550100002"},
          {"imei", "111111111111119"},
          {"sim_id", "8901410000000000010"},
          {"device_kind", "smartphone"}}},
        {"swap_phone",
         {{"phone_number", "15550100001"}, // the victim's number after the swap
          {"imei", "222222222222226"},
          {"sim_id", "8901410999999999990"},
          {"device_kind", "smartphone"}}},
        {"attacker_desktop",
         {{"phone_number", ""},
          {"imei", ""},
          {"sim_id", ""},
          {"device_kind", "desktop"}}},
        {"alice_desktop",
         {{"phone_number", ""},
          {"imei", "desk-0001"},
          {"sim_id", ""},
          {"device_kind", "desktop"}}},
    };
}

nlohmann::json register_step(const std::string& device, const std::string& user,
                             const std::string& password) {
    return nlohmann::json{
        {"device", device},
        {"message",
         {{"type", "register"}, {"username", user}, {"login_password", password}}},
        {"expect", {{"status", "ok"}}}};
}

nlohmann::json username_step(const std::string& session, const std::string& device,
                             const std::string& user, const std::string& state) {
    return nlohmann::json{{"device", device},
                          {"session", session},
                          {"message", {{"type", "username_entry"}, {"username", user}}},
                          {"expect", {{"status", "ok"}, {"field_state", state}}}};
}

nlohmann::json password_step(const std::string& session, const std::string& device,
                             const std::string& input, const std::string& result) {
    return nlohmann::json{{"device", device},
                          {"session", session},
                          {"message", {{"type", "password_entry"}, {"password", input}}},
                          {"expect", {{"status", "ok"}, {"result", result}}}};
}

nlohmann::json build_nonlocal_matrix() {
    nlohmann::json scenario;
    scenario["name"] = "nonlocal-matrix";
    scenario["seed"] = 7001;
    scenario["profiles"] = common_profiles();
    auto steps = nlohmann::json::array();
    steps.push_back(register_step("alice_phone", "alice", "abc123"));

    const std::vector<std::string> devices = {"intruder_phone", "attacker_desktop"};
    const std::vector<std::string> usernames = {"alice", "mallory"};
    const std::vector<std::string> inputs = {"abc123", "$auth_password(alice)", "zq1x9w"};
    int n = 0;
    for (const auto& device : devices) {
        for (const auto& username : usernames) {
            for (const auto& input : inputs) {
                std::string session = "n" + std::to_string(++n);
                steps.push_back(username_step(session, device, username, "disabled"));
                steps.push_back(password_step(session, device, input, "disabled"));
            }
        }
    }
    steps.push_back({{"check", "initiations"}, {"equals", 0}});
    scenario["steps"] = steps;
    return scenario;
}

nlohmann::json build_credential_theft() {
    nlohmann::json scenario;
    scenario["name"] = "credential-theft";
    scenario["seed"] = 7002;
    scenario["profiles"] = common_profiles();
    scenario["steps"] = nlohmann::json::array({
        register_step("alice_phone", "alice", "abc123"),
        // the thief knows the login password but owns no registered device
        username_step("t1", "attacker_desktop", "alice", "disabled"),
        password_step("t1", "attacker_desktop", "abc123", "disabled"),
        nlohmann::json{{"check", "initiations"}, {"equals", 0}},
    });
    return scenario;
}

nlohmann::json build_sim_swap() {
    nlohmann::json scenario;
    scenario["name"] = "sim-swap";
    scenario["seed"] = 7003;
    scenario["profiles"] = common_profiles();
    scenario["steps"] = nlohmann::json::array({
        register_step("alice_phone", "alice", "abc123"),
        // the attacker's phone carries the victim's number but was never
        // bound to the account by registration
        username_step("w1", "swap_phone", "alice", "disabled"),
        password_step("w1", "swap_phone", "abc123", "disabled"),
        nlohmann::json{{"check", "initiations"}, {"equals", 0}},
    });
    return scenario;
}

nlohmann::json build_lockout() {
    nlohmann::json scenario;
    scenario["name"] = "lockout";
    scenario["seed"] = 7004;
    scenario["profiles"] = common_profiles();
    scenario["steps"] = nlohmann::json::array({
        register_step("alice_phone", "alice", "abc123"),
        // two failures then a success: the consecutive counter resets
        username_step("p1", "alice_phone", "alice", "enabled"),
        password_step("p1", "alice_phone", "wrong1", "denied"),
        password_step("p1", "alice_phone", "wrong2", "denied"),
        password_step("p1", "alice_phone", "abc123", "granted"),
        // three consecutive failures lock the account on the third
        username_step("p2", "alice_phone", "alice", "enabled"),
        password_step("p2", "alice_phone", "wrong1", "denied"),
        password_step("p2", "alice_phone", "wrong2", "denied"),
        password_step("p2", "alice_phone", "wrong3", "denied"),
        // even the correct password is now locked out
        password_step("p2", "alice_phone", "abc123", "locked_out"),
        nlohmann::json{{"device", "alice_phone"},
                       {"session", "admin"},
                       {"message", {{"type", "admin_unlock"}, {"username", "alice"}}},
                       {"expect", {{"status", "ok"}}}},
        username_step("p3", "alice_phone", "alice", "enabled"),
        password_step("p3", "alice_phone", "abc123", "granted"),
    });
    return scenario;
}

nlohmann::json build_strength_violation() {
    nlohmann::json scenario;
    scenario["name"] = "strength-violation";
    scenario["seed"] = 7005;
    scenario["profiles"] = common_profiles();
    scenario["steps"] = nlohmann::json::array({
        register_step("alice_phone", "alice", "abc123"),
        username_step("v1", "alice_phone", "alice", "enabled"),
        // the account's own authentication password is untypable even here
        password_step("v1", "alice_phone", "$auth_password(alice)", "locked_out"),
        password_step("v1", "alice_phone", "Abc123!", "locked_out"),
        nlohmann::json{{"check", "initiations"}, {"equals", 0}},
        // strength violations never touch the consecutive-failure counter
        password_step("v1", "alice_phone", "abc123", "granted"),
    });
    return scenario;
}

nlohmann::json build_link_replay() {
    nlohmann::json scenario;
    scenario["name"] = "link-replay";
    scenario["seed"] = 7006;
    scenario["profiles"] = common_profiles();
    scenario["steps"] = nlohmann::json::array({
        register_step("alice_phone", "alice", "abc123"),
        nlohmann::json{{"device", "alice_desktop"},
                       {"session", "d1"},
                       {"message", {{"type", "issue_link"}}},
                       {"expect", {{"status", "ok"}}},
                       {"capture", {{"tok", "link_token"}}}},
        username_step("p1", "alice_phone", "alice", "enabled"),
        password_step("p1", "alice_phone", "abc123", "granted"),
        nlohmann::json{{"device", "alice_phone"},
                       {"session", "p1"},
                       {"message", {{"type", "redeem_link"}, {"token", "$tok"}}},
                       {"expect", {{"status", "ok"}, {"result", "granted"}, {"account", "alice"}}}},
        nlohmann::json{{"collect", "d1"},
                       {"expect",
                        {{"type", "link_redeemed"}, {"result", "granted"}, {"account", "alice"}}}},
        nlohmann::json{{"device", "alice_phone"},
                       {"session", "p1"},
                       {"message", {{"type", "redeem_link"}, {"token", "$tok"}}},
                       {"expect", {{"status", "error"}, {"error", "token_used"}}}},
    });
    return scenario;
}

nlohmann::json build_link_expiry() {
    nlohmann::json scenario;
    scenario["name"] = "link-expiry";
    scenario["seed"] = 7007;
    scenario["profiles"] = common_profiles();
    scenario["steps"] = nlohmann::json::array({
        register_step("alice_phone", "alice", "abc123"),
        nlohmann::json{{"device", "alice_desktop"},
                       {"session", "d1"},
                       {"message", {{"type", "issue_link"}}},
                       {"expect", {{"status", "ok"}}},
                       {"capture", {{"tok", "link_token"}}}},
        username_step("p1", "alice_phone", "alice", "enabled"),
        password_step("p1", "alice_phone", "abc123", "granted"),
        nlohmann::json{{"advance_clock", 121}},
        nlohmann::json{{"device", "alice_phone"},
                       {"session", "p1"},
                       {"message", {{"type", "redeem_link"}, {"token", "$tok"}}},
                       {"expect", {{"status", "error"}, {"error", "token_expired"}}}},
    });
    return scenario;
}

nlohmann::json build_link_cross_account() {
    nlohmann::json scenario;
    scenario["name"] = "link-cross-account";
    scenario["seed"] = 7008;
    scenario["profiles"] = common_profiles();
    scenario["steps"] = nlohmann::json::array({
        register_step("alice_phone", "alice", "abc123"),
        register_step("mallory_phone", "mallory", "mmm999"),
        // a stranger's phone scanning the token logs the desktop into the
        // stranger's own account, never someone else's
        nlohmann::json{{"device", "attacker_desktop"},
                       {"session", "d1"},
                       {"message", {{"type", "issue_link"}}},
                       {"expect", {{"status", "ok"}}},
                       {"capture", {{"tok", "link_token"}}}},
        username_step("m1", "mallory_phone", "mallory", "enabled"),
        password_step("m1", "mallory_phone", "mmm999", "granted"),
        nlohmann::json{{"device", "mallory_phone"},
                       {"session", "m1"},
                       {"message", {{"type", "redeem_link"}, {"token", "$tok"}}},
                       {"expect", {{"status", "ok"}, {"account", "mallory"}}}},
        nlohmann::json{{"collect", "d1"}, {"expect", {{"account", "mallory"}}}},
        // and the legitimate owner's phone binds a fresh token to alice
        nlohmann::json{{"device", "alice_desktop"},
                       {"session", "d2"},
                       {"message", {{"type", "issue_link"}}},
                       {"expect", {{"status", "ok"}}},
                       {"capture", {{"tok2", "link_token"}}}},
        username_step("p1", "alice_phone", "alice", "enabled"),
        password_step("p1", "alice_phone", "abc123", "granted"),
        nlohmann::json{{"device", "alice_phone"},
                       {"session", "p1"},
                       {"message", {{"type", "redeem_link"}, {"token", "$tok2"}}},
                       {"expect", {{"status", "ok"}, {"account", "alice"}}}},
        nlohmann::json{{"collect", "d2"}, {"expect", {{"account", "alice"}}}},
    });
    return scenario;
}

struct TempStoreFile {
    std::filesystem::path path;

    explicit TempStoreFile(std::uint64_t seed) {
        path = std::filesystem::temp_directory_path() /
               ("dualpass-scenario-" + std::to_string(::getpid()) + "-" +
                std::to_string(seed) + ".json");
        std::error_code ec;
        std::filesystem::remove(path, ec);
    }

    ~TempStoreFile() {
        std::error_code ec;
        std::filesystem::remove(path, ec);
        std::filesystem::path tmp = path;
        tmp += ".tmp";
        std::filesystem::remove(tmp, ec);
    }
};

/// True when every key in `expected` is present in `actual` with an equal
/// value (recursing into objects).
bool subset_match(const nlohmann::json& expected, const nlohmann::json& actual) {
    if (!expected.is_object()) {
        return expected == actual;
    }
    if (!actual.is_object()) {
        return false;
    }
    for (const auto& [key, value] : expected.items()) {
        if (!actual.contains(key)) {
            return false;
        }
        if (!subset_match(value, actual.at(key))) {
            return false;
        }
    }
    return true;
}

} // namespace

std::vector<std::string> builtin_scenario_names() {
    return {"nonlocal-matrix", "credential-theft", "sim-swap",     "lockout",
            "strength-violation", "link-replay",   "link-expiry", "link-cross-account"};
}

nlohmann::json builtin_scenario(const std::string& name) {
    if (name == "nonlocal-matrix") return build_nonlocal_matrix();
    if (name == "credential-theft") return build_credential_theft();
    if (name == "sim-swap") return build_sim_swap();
    if (name == "lockout") return build_lockout();
    if (name == "strength-violation") return build_strength_violation();
    if (name == "link-replay") return build_link_replay();
    if (name == "link-expiry") return build_link_expiry();
    if (name == "link-cross-account") return build_link_cross_account();
    raise(Errc::invalid_argument, "unknown builtin scenario \"" + name + "\"");
}

namespace {

class Runner {
public:
    Runner(const nlohmann::json& scenario, std::uint64_t seed)
        : scenario_(scenario), seed_(seed), temp_(seed), store_(temp_.path),
          clock_(1700000000),
          service_(store_,
                   scenario.contains("config")
                       ? service_config_from_json(scenario.at("config"))
                       : ServiceConfig{},
                   clock_, Rng::seeded(seed)) {}

    ScenarioReport run() {
        ScenarioReport report;
        report.name = scenario_.value("name", "unnamed");
        report.seed = seed_;
        int index = 0;
        for (const auto& step : scenario_.at("steps")) {
            ++index;
            StepResult result;
            result.index = index;
            try {
                run_step(step, result);
            } catch (const Error& e) {
                result.pass = false;
                result.actual = nlohmann::ordered_json{
                    {"runner_error", errc_name(e.code())}, {"message", e.what()}};
            }
            report.steps.push_back(std::move(result));
        }
        report.pass = true;
        for (const auto& step : report.steps) {
            report.pass = report.pass && step.pass;
        }
        return report;
    }

private:
    void run_step(const nlohmann::json& step, StepResult& result) {
        if (step.contains("advance_clock")) {
            std::int64_t seconds = step.at("advance_clock").get<std::int64_t>();
            clock_.advance(seconds);
            result.description = "advance clock by " + std::to_string(seconds) + "s";
            result.pass = true;
            return;
        }
        if (step.contains("check")) {
            std::string what = step.at("check").get<std::string>();
            if (what != "initiations") {
                raise(Errc::invalid_argument, "unknown check \"" + what + "\"");
            }
            auto expected = step.at("equals").get<std::uint64_t>();
            auto actual = service_.authentication_initiations();
            result.description = "check authentication initiations";
            result.expected = nlohmann::ordered_json{{"initiations", expected}};
            result.actual = nlohmann::ordered_json{{"initiations", actual}};
            result.pass = expected == actual;
            return;
        }
        if (step.contains("collect")) {
            std::string session_name = step.at("collect").get<std::string>();
            result.description = "collect notification for " + session_name;
            result.expected = step.value("expect", nlohmann::json::object());
            auto& queue = notifications_[session_name];
            if (queue.empty()) {
                result.actual = nlohmann::ordered_json{{"error", "no notification pending"}};
                result.pass = false;
                return;
            }
            result.actual = queue.front();
            queue.pop_front();
            result.pass = subset_match(result.expected, result.actual);
            return;
        }

        std::string device_name = step.at("device").get<std::string>();
        std::string session_name = step.value("session", device_name);
        nlohmann::json message = step.at("message");
        substitute(message);
        if (!message.contains("request_id")) {
            message["request_id"] = "q" + std::to_string(++request_counter_);
        }

        std::string session_id = session_id_for(session_name, device_name);
        auto handled = service_.handle_message(session_id, message);
        route_pushes(handled);

        result.description = message.value("type", "?") + " (" + session_name + ")";
        result.expected = step.value("expect", nlohmann::json::object());
        result.actual = handled.response;
        result.pass = subset_match(result.expected, result.actual);

        if (step.contains("capture") && handled.response.is_object()) {
            for (const auto& [var, field] : step.at("capture").items()) {
                std::string field_name = field.get<std::string>();
                if (handled.response.contains(field_name)) {
                    vars_[var] = handled.response.at(field_name).get<std::string>();
                }
            }
        }
    }

    std::string session_id_for(const std::string& session_name,
                               const std::string& device_name) {
        auto it = session_ids_.find(session_name);
        if (it != session_ids_.end()) {
            return it->second;
        }
        const auto& profiles = scenario_.at("profiles");
        if (!profiles.contains(device_name)) {
            raise(Errc::invalid_argument,
                  "scenario references unknown profile \"" + device_name + "\"");
        }
        nlohmann::json hello = {{"type", "hello"},
                                {"request_id", "h" + std::to_string(++request_counter_)},
                                {"device", profiles.at(device_name)}};
        auto handled = service_.handle_message("", hello);
        if (handled.new_session_id.empty()) {
            raise(Errc::protocol_error, "hello failed during scenario setup");
        }
        session_ids_[session_name] = handled.new_session_id;
        return handled.new_session_id;
    }

    void route_pushes(const AuthService::Handled& handled) {
        for (const auto& [session_id, message] : handled.pushes) {
            for (const auto& [name, id] : session_ids_) {
                if (id == session_id) {
                    notifications_[name].push_back(message);
                    break;
                }
            }
        }
    }

    void substitute(nlohmann::json& node) {
        if (node.is_object() || node.is_array()) {
            for (auto& child : node) {
                substitute(child);
            }
            return;
        }
        if (!node.is_string()) {
            return;
        }
        std::string value = node.get<std::string>();
        if (value.size() < 2 || value[0] != '$') {
            return;
        }
        const std::string auth_fn = "$auth_password(";
        if (value.rfind(auth_fn, 0) == 0 && value.back() == ')') {
            std::string username =
                value.substr(auth_fn.size(), value.size() - auth_fn.size() - 1);
            const AccountRecord* rec = store_.find_by_username(username);
            if (!rec) {
                raise(Errc::invalid_argument,
                      "$auth_password refers to unregistered \"" + username + "\"");
            }
            node = generate_auth_password(rec->converter,
                                          rec->converter.registered_login_password());
            return;
        }
        auto it = vars_.find(value.substr(1));
        if (it != vars_.end()) {
            node = it->second;
        }
    }

    const nlohmann::json& scenario_;
    std::uint64_t seed_;
    TempStoreFile temp_;
    Store store_;
    MockClock clock_;
    AuthService service_;
    std::map<std::string, std::string> session_ids_;
    std::map<std::string, std::string> vars_;
    std::map<std::string, std::deque<nlohmann::ordered_json>> notifications_;
    int request_counter_ = 0;
};

} // namespace

ScenarioReport run_scenario(const nlohmann::json& scenario,
                            std::optional<std::uint64_t> seed_override) {
    if (!scenario.is_object() || !scenario.contains("steps")) {
        raise(Errc::invalid_argument, "scenario must be an object with steps");
    }
    std::uint64_t seed = seed_override.value_or(scenario.value("seed", std::uint64_t(1)));
    Runner runner(scenario, seed);
    return runner.run();
}

std::string render_report_text(const ScenarioReport& report) {
    std::ostringstream out;
    out << "scenario: " << report.name << " (seed " << report.seed << ")\n";
    for (const auto& step : report.steps) {
        out << "  [" << (step.pass ? "ok" : "FAIL") << "] step " << step.index << ": "
            << step.description << "\n";
        if (!step.pass) {
            out << "        expected " << step.expected.dump() << "\n";
            out << "        actual   " << step.actual.dump() << "\n";
        }
    }
    std::size_t passed = 0;
    for (const auto& step : report.steps) {
        passed += step.pass ? 1 : 0;
    }
    out << "result: " << (report.pass ? "PASS" : "FAIL") << " (" << passed << "/"
        << report.steps.size() << " steps)\n";
    return out.str();
}

nlohmann::ordered_json report_to_json(const ScenarioReport& report) {
    nlohmann::ordered_json j;
    j["name"] = report.name;
    j["seed"] = report.seed;
    j["pass"] = report.pass;
    auto steps = nlohmann::ordered_json::array();
    for (const auto& step : report.steps) {
        nlohmann::ordered_json s;
        s["index"] = step.index;
        s["description"] = step.description;
        s["pass"] = step.pass;
        s["expected"] = step.expected;
        s["actual"] = step.actual;
        steps.push_back(std::move(s));
    }
    j["steps"] = std::move(steps);
    return j;
}

} // namespace dualpass
