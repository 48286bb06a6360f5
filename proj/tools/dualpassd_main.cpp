// dualpassd: the authentication server. Speaks newline-delimited JSON over
// TCP; owns the credential store file.

#include <csignal>
#include <cstdlib>
#include <iostream>

#include "CLI11.hpp"
#include "dualpass/authserver.hpp"
#include "dualpass/errors.hpp"
#include "dualpass/wire.hpp"

#include <fstream>

int main(int argc, char** argv) {
    CLI::App app{"dual-password login-authentication server"};

    std::string store_path;
    std::string listen_addr = "127.0.0.1:7777";
    std::string config_path;
    std::uint64_t seed = 0;
    bool seeded = false;

    app.add_option("--store", store_path, "credential store file")
        ->envname("DUALPASS_STORE");
    app.add_option("--listen", listen_addr, "listen address (host:port)");
    app.add_option("--config", config_path, "service config JSON file");
    auto* seed_opt =
        app.add_option("--seed", seed, "deterministic rng seed (test mode)");

    CLI11_PARSE(app, argc, argv);
    seeded = seed_opt->count() > 0;

    if (store_path.empty()) {
        std::cerr << "error: --store (or DUALPASS_STORE) is required\n";
        return 2;
    }

    try {
        dualpass::ServiceConfig config;
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            if (!in) {
                std::cerr << "error: cannot read config " << config_path << "\n";
                return 2;
            }
            config = dualpass::service_config_from_json(nlohmann::json::parse(in));
        }

        dualpass::Store store{std::filesystem::path(store_path)};
        dualpass::SystemClock clock;
        dualpass::Rng rng = seeded ? dualpass::Rng::seeded(seed) : dualpass::Rng::system();
        dualpass::AuthService service(store, config, clock, std::move(rng));

        dualpass::WireServer server(service, listen_addr, &std::cerr);
        server.start();
        std::cerr << "dualpassd listening on " << listen_addr;
        if (server.port() != 0) {
            std::cerr << " (port " << server.port() << ")";
        }
        std::cerr << ", store " << store_path << "\n";

        sigset_t set;
        sigemptyset(&set);
        sigaddset(&set, SIGINT);
        sigaddset(&set, SIGTERM);
        pthread_sigmask(SIG_BLOCK, &set, nullptr);
        int sig = 0;
        sigwait(&set, &sig);
        std::cerr << "shutting down\n";
        server.stop();
        return 0;
    } catch (const dualpass::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
