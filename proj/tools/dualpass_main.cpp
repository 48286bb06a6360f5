// dualpass: operator CLI. Simulates smartphones and desktops through device
// profile files, drives the wire protocol, and runs the adversarial
// scenario corpus.

#include <termios.h>
#include <unistd.h>

#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "dualpass/credstore.hpp"
#include "dualpass/errors.hpp"
#include "dualpass/scenario.hpp"
#include "dualpass/wire.hpp"

namespace {

using nlohmann::json;

json load_profile(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw dualpass::Error(dualpass::Errc::io_error,
                              "cannot read device profile " + path);
    }
    json profile = json::parse(in);
    dualpass::device_from_json(profile); // validate the descriptor shape
    return profile;
}

std::string prompt_password(const std::string& label, bool from_stdin) {
    if (from_stdin) {
        std::string line;
        if (!std::getline(std::cin, line)) {
            throw dualpass::Error(dualpass::Errc::io_error, "no password on stdin");
        }
        return line;
    }
    std::cerr << label << ": " << std::flush;
    termios before{};
    bool tty = tcgetattr(STDIN_FILENO, &before) == 0;
    if (tty) {
        termios muted = before;
        muted.c_lflag &= ~tcflag_t(ECHO);
        tcsetattr(STDIN_FILENO, TCSAFLUSH, &muted);
    }
    std::string line;
    std::getline(std::cin, line);
    if (tty) {
        tcsetattr(STDIN_FILENO, TCSAFLUSH, &before);
        std::cerr << "\n";
    }
    return line;
}

struct Connection {
    dualpass::WireClient client;
    json hello_response;

    static Connection open(const std::string& server_addr, const json& device) {
        auto [host, port] = dualpass::parse_listen_addr(server_addr);
        auto client = dualpass::WireClient::connect(host, port);
        json hello = client.call({{"type", "hello"}, {"device", device}});
        if (hello.value("status", "") != "ok") {
            throw dualpass::Error(dualpass::Errc::protocol_error,
                                  "hello failed: " + hello.dump());
        }
        return Connection{std::move(client), std::move(hello)};
    }

    /// Runs the username and password stages; returns the final response of
    /// whichever stage decided the attempt.
    json login(const std::string& username, const std::string& password) {
        json entry =
            client.call({{"type", "username_entry"}, {"username", username}});
        if (entry.value("field_state", "") != "enabled") {
            entry["result"] = "disabled";
            return entry;
        }
        return client.call({{"type", "password_entry"}, {"password", password}});
    }
};

void print_result(const json& result, bool as_json, const std::string& human) {
    if (as_json) {
        std::cout << result.dump() << "\n";
    } else {
        std::cout << human << "\n";
    }
}

int run_login_command(const std::string& server, const std::string& device_path,
                      const std::string& user, bool password_stdin, bool as_json) {
    auto conn = Connection::open(server, load_profile(device_path));
    std::string password = prompt_password("login password", password_stdin);
    json result = conn.login(user, password);
    std::string outcome = result.value("result", "error");
    print_result(result, as_json, outcome);
    return outcome == "granted" ? 0 : 1;
}

int run_scenario_command(const std::string& name_or_path,
                         std::optional<std::uint64_t> seed, bool as_json) {
    json scenario;
    std::string name = name_or_path;
    if (name.rfind("builtin:", 0) == 0) {
        name = name.substr(std::string("builtin:").size());
    }
    auto builtins = dualpass::builtin_scenario_names();
    if (std::find(builtins.begin(), builtins.end(), name) != builtins.end()) {
        scenario = dualpass::builtin_scenario(name);
    } else {
        std::ifstream in(name_or_path);
        if (!in) {
            std::cerr << "unknown scenario \"" << name_or_path
                      << "\" (not a builtin, not a readable file)\n";
            return 2;
        }
        scenario = json::parse(in);
    }
    dualpass::ScenarioReport report = dualpass::run_scenario(scenario, seed);
    if (as_json) {
        std::cout << dualpass::report_to_json(report).dump(2) << "\n";
    } else {
        std::cout << dualpass::render_report_text(report);
    }
    return report.pass ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"dual-password login-authentication client"};
    app.require_subcommand(1);

    std::string server = "127.0.0.1:7777";
    bool as_json = false;
    app.add_option("--server", server, "server address (host:port)");
    app.add_flag("--json", as_json, "machine-readable output");

    std::string device_path;
    std::string user;
    bool password_stdin = false;

    auto add_device_user = [&](CLI::App* cmd, bool with_user = true) {
        cmd->add_option("--device", device_path, "device profile JSON file")->required();
        if (with_user) {
            cmd->add_option("--user", user, "username")->required();
        }
        cmd->add_flag("--password-stdin", password_stdin,
                      "read passwords from stdin instead of prompting");
    };

    auto* cmd_register = app.add_subcommand("register", "create an account");
    add_device_user(cmd_register);

    auto* cmd_login = app.add_subcommand("login", "attempt a login");
    add_device_user(cmd_login);

    auto* cmd_modify_login =
        app.add_subcommand("modify-login", "replace the login password");
    add_device_user(cmd_modify_login);

    auto* cmd_modify_auth = app.add_subcommand(
        "modify-auth", "regenerate the authentication password");
    add_device_user(cmd_modify_auth);
    bool accept = false;
    bool decline = false;
    cmd_modify_auth->add_flag("--accept", accept, "accept without prompting");
    cmd_modify_auth->add_flag("--decline", decline, "decline the modification");

    auto* cmd_link = app.add_subcommand("link", "cross-device login");
    auto* cmd_link_issue =
        cmd_link->add_subcommand("issue", "request a link token for this device");
    cmd_link_issue->add_option("--device", device_path, "device profile JSON file")
        ->required();
    int wait_seconds = 180;
    bool no_wait = false;
    cmd_link_issue->add_option("--wait-seconds", wait_seconds,
                               "how long to wait for redemption");
    cmd_link_issue->add_flag("--no-wait", no_wait, "print the token and exit");

    auto* cmd_link_redeem =
        cmd_link->add_subcommand("redeem", "redeem a token from the registered phone");
    add_device_user(cmd_link_redeem);
    std::string token;
    cmd_link_redeem->add_option("--token", token, "link token to redeem")->required();

    auto* cmd_admin = app.add_subcommand("admin", "operator maintenance");
    auto* cmd_admin_unlock = cmd_admin->add_subcommand("unlock", "unlock an account");
    cmd_admin_unlock->add_option("--user", user, "username")->required();

    auto* cmd_scenario = app.add_subcommand("scenario", "adversarial scenario runner");
    auto* cmd_scenario_run =
        cmd_scenario->add_subcommand("run", "run a builtin or scenario file");
    std::string scenario_name;
    std::uint64_t scenario_seed = 0;
    cmd_scenario_run->add_option("name", scenario_name, "builtin:<name> or a JSON file")
        ->required();
    auto* seed_opt =
        cmd_scenario_run->add_option("--seed", scenario_seed, "override the scenario seed");
    auto* cmd_scenario_list = cmd_scenario->add_subcommand("list", "list builtins");

    CLI11_PARSE(app, argc, argv);

    try {
        if (cmd_register->parsed()) {
            auto conn = Connection::open(server, load_profile(device_path));
            std::string password = prompt_password("choose a login password", password_stdin);
            json result = conn.client.call(
                {{"type", "register"}, {"username", user}, {"login_password", password}});
            bool ok = result.value("status", "") == "ok";
            print_result(result, as_json,
                         ok ? "registered " + user : "registration failed: " + result.dump());
            return ok ? 0 : 1;
        }
        if (cmd_login->parsed()) {
            return run_login_command(server, device_path, user, password_stdin, as_json);
        }
        if (cmd_modify_login->parsed()) {
            auto conn = Connection::open(server, load_profile(device_path));
            std::string current = prompt_password("current login password", password_stdin);
            json login = conn.login(user, current);
            if (login.value("result", "") != "granted") {
                print_result(login, as_json, "login failed: " + login.value("result", "error"));
                return 1;
            }
            std::string next = prompt_password("new login password", password_stdin);
            json result = conn.client.call(
                {{"type", "modify_login"}, {"new_login_password", next}});
            bool ok = result.value("status", "") == "ok";
            print_result(result, as_json,
                         ok ? "login password updated" : "update failed: " + result.dump());
            return ok ? 0 : 1;
        }
        if (cmd_modify_auth->parsed()) {
            auto conn = Connection::open(server, load_profile(device_path));
            std::string current = prompt_password("login password", password_stdin);
            json login = conn.login(user, current);
            if (login.value("result", "") != "granted") {
                print_result(login, as_json, "login failed: " + login.value("result", "error"));
                return 1;
            }
            bool do_accept = accept;
            if (!accept && !decline) {
                std::cerr << "accept authentication-password modification? [y/N] "
                          << std::flush;
                std::string answer;
                std::getline(std::cin, answer);
                do_accept = !answer.empty() && (answer[0] == 'y' || answer[0] == 'Y');
            }
            json result =
                conn.client.call({{"type", "modify_auth"}, {"accept", do_accept}});
            bool ok = result.value("status", "") == "ok";
            print_result(result, as_json,
                         result.value("modified", false) ? "authentication password regenerated"
                                                         : "modification declined");
            return ok ? 0 : 1;
        }
        if (cmd_link_issue->parsed()) {
            auto conn = Connection::open(server, load_profile(device_path));
            json issued = conn.client.call({{"type", "issue_link"}});
            if (issued.value("status", "") != "ok") {
                print_result(issued, as_json, "issue failed: " + issued.dump());
                return 1;
            }
            if (!as_json) {
                std::cout << "link token: " << issued.value("link_token", "") << "\n";
                std::cout << "scan it from the registered phone: dualpass link redeem "
                             "--token <token> ...\n";
                std::cout.flush(); // the wait below may block for a while
            }
            if (no_wait) {
                if (as_json) {
                    std::cout << issued.dump() << "\n";
                }
                return 0;
            }
            json push = conn.client.recv(wait_seconds * 1000);
            bool granted = push.value("result", "") == "granted";
            print_result(push, as_json,
                         granted ? "granted into account " + push.value("account", "")
                                 : "link not redeemed: " + push.dump());
            return granted ? 0 : 1;
        }
        if (cmd_link_redeem->parsed()) {
            auto conn = Connection::open(server, load_profile(device_path));
            std::string password = prompt_password("login password", password_stdin);
            json login = conn.login(user, password);
            if (login.value("result", "") != "granted") {
                print_result(login, as_json, "login failed: " + login.value("result", "error"));
                return 1;
            }
            json result = conn.client.call({{"type", "redeem_link"}, {"token", token}});
            bool ok = result.value("status", "") == "ok";
            print_result(result, as_json,
                         ok ? "desktop session granted into " + result.value("account", "")
                            : "redeem failed: " + result.dump());
            return ok ? 0 : 1;
        }
        if (cmd_admin_unlock->parsed()) {
            json admin_device = {{"phone_number", ""},
                                 {"imei", "operator-console"},
                                 {"sim_id", ""},
                                 {"device_kind", "desktop"}};
            auto conn = Connection::open(server, admin_device);
            json result =
                conn.client.call({{"type", "admin_unlock"}, {"username", user}});
            bool ok = result.value("status", "") == "ok";
            print_result(result, as_json, ok ? "unlocked " + user : "unlock failed");
            return ok ? 0 : 1;
        }
        if (cmd_scenario_list->parsed()) {
            for (const auto& name : dualpass::builtin_scenario_names()) {
                std::cout << "builtin:" << name << "\n";
            }
            return 0;
        }
        if (cmd_scenario_run->parsed()) {
            std::optional<std::uint64_t> seed;
            if (seed_opt->count() > 0) {
                seed = scenario_seed;
            }
            return run_scenario_command(scenario_name, seed, as_json);
        }
    } catch (const dualpass::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
