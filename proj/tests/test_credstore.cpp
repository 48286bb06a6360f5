#include "doctest.h"

#include <unistd.h>

#include <filesystem>
#include <fstream>

#include "dualpass/credstore.hpp"
#include "dualpass/errors.hpp"
#include "dualpass/generator.hpp"
#include "dualpass/sha256.hpp"
#include "fixtures.hpp"

using namespace dualpass;

namespace {

struct TempDir {
    std::filesystem::path path;

    TempDir() {
        path = std::filesystem::temp_directory_path() /
               ("dualpass-test-" + std::to_string(::getpid()) + "-" +
                std::to_string(counter()++));
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    static int& counter() {
        static int n = 0;
        return n;
    }
};

AccountRecord make_account(const std::string& username, const std::string& password,
                           const DeviceDescriptor& device, Rng& rng) {
    GeneratorConfig config;
    AccountRecord rec;
    rec.username = username;
    rec.user_identifier = device.phone_number;
    rec.device = device;
    rec.converter = generate_converter(password, config, rng);
    std::string auth = generate_auth_password(rec.converter, password);
    rec.verifier = make_verifier(auth, rng.bytes(16));
    rec.identifier =
        derive_identifier(rec.converter, password, IdentifierStrategy::combo(4), rng);
    return rec;
}

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)),
                       std::istreambuf_iterator<char>());
}

} // namespace

TEST_CASE("verifier: match and reject") {
    Rng rng = Rng::seeded(71);
    auto verifier = make_verifier("3MovQX#&(EPC9L$d?G%z", rng.bytes(16));
    CHECK(verifier_matches(verifier, "3MovQX#&(EPC9L$d?G%z"));
    CHECK(!verifier_matches(verifier, "3MovQX#&(EPC9L$d?G%x"));
    CHECK(!verifier_matches(verifier, ""));
    // same password, fresh salt: different hash
    auto resalted = make_verifier("3MovQX#&(EPC9L$d?G%z", rng.bytes(16));
    CHECK(verifier.hash_hex != resalted.hash_hex);
}

TEST_CASE("store: create, find, duplicate username") {
    Rng rng = Rng::seeded(72);
    Store store;
    store.create_account(make_account("alice", "abc123", fixtures::phone("01"), rng));

    CHECK(store.find_by_username("alice") != nullptr);
    CHECK(store.find_by_username("mallory") == nullptr);

    try {
        store.create_account(make_account("alice", "xyz789", fixtures::phone("02"), rng));
        FAIL("expected duplicate username");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::duplicate_username);
    }
}

TEST_CASE("store: one smartphone binds one account") {
    Rng rng = Rng::seeded(73);
    Store store;
    auto device = fixtures::phone("01");
    store.create_account(make_account("alice", "abc123", device, rng));
    try {
        store.create_account(make_account("alice2", "xyz789", device, rng));
        FAIL("expected device already bound");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::device_already_bound);
    }
    // a different imei is a different device
    auto other = device;
    other.imei = "000000000000000";
    store.create_account(make_account("bob", "qrs456", other, rng));
    CHECK(store.account_count() == 2);
}

TEST_CASE("store: save/load round-trip is byte-identical") {
    TempDir dir;
    auto path = dir.path / "store.json";
    Rng rng = Rng::seeded(74);
    {
        Store store{path};
        store.create_account(make_account("alice", "abc123", fixtures::phone("01"), rng));
        store.create_account(make_account("bob", "top555", fixtures::phone("02"), rng));
        LinkToken token{"deadbeef", "s1", 1700000120, false};
        store.put_token(token);
        store.save();
    }
    std::string first = read_file(path);
    {
        Store reloaded{path};
        CHECK(reloaded.account_count() == 2);
        REQUIRE(reloaded.find_token("deadbeef") != nullptr);
        CHECK(reloaded.find_token("deadbeef")->expires_at == 1700000120);
        reloaded.save();
    }
    std::string second = read_file(path);
    CHECK(first == second);
    CHECK(!first.empty());
}

TEST_CASE("store: round-trip holds for randomly generated stores") {
    Rng rng = Rng::seeded(82);
    for (int round = 0; round < 3; ++round) {
        TempDir dir;
        auto path = dir.path / "store.json";
        {
            Store store{path};
            int accounts = int(rng.uniform(1, 5));
            for (int i = 0; i < accounts; ++i) {
                std::string name = "user" + std::to_string(round) + std::to_string(i);
                std::string password;
                for (int k = 0; k < int(rng.uniform(5, 12)); ++k) {
                    password.push_back(rng.pick(login_alphabet()));
                }
                store.create_account(make_account(
                    name, password, fixtures::phone(std::to_string(10 + round * 8 + i)),
                    rng));
            }
            int tokens = int(rng.uniform(0, 3));
            for (int i = 0; i < tokens; ++i) {
                store.put_token(LinkToken{rng.token_hex(16), "sess" + std::to_string(i),
                                          std::int64_t(rng.uniform(0, 1 << 30)),
                                          rng.uniform(0, 1) == 1});
            }
            store.save();
        }
        std::string first = read_file(path);
        {
            Store reloaded{path};
            reloaded.save();
        }
        CHECK(read_file(path) == first);
    }
}

TEST_CASE("store: round-trip preserves authentication behavior") {
    TempDir dir;
    auto path = dir.path / "store.json";
    Rng rng = Rng::seeded(75);
    std::string auth_before;
    {
        Store store{path};
        store.create_account(make_account("alice", "abc123", fixtures::phone("01"), rng));
        auth_before =
            generate_auth_password(store.find_by_username("alice")->converter, "abc123");
        store.save();
    }
    Store reloaded{path};
    const AccountRecord* rec = reloaded.find_by_username("alice");
    REQUIRE(rec != nullptr);
    CHECK(generate_auth_password(rec->converter, "abc123") == auth_before);
    CHECK(verifier_matches(rec->verifier, auth_before));
    CHECK(verify_identifier(rec->converter, "abc123", rec->identifier) ==
          IdentifierCheck::Match);
}

TEST_CASE("store: checksum tamper is corruption") {
    TempDir dir;
    auto path = dir.path / "store.json";
    Rng rng = Rng::seeded(76);
    {
        Store store{path};
        store.create_account(make_account("alice", "abc123", fixtures::phone("01"), rng));
        store.save();
    }
    std::string bytes = read_file(path);
    auto flip = bytes.find("\"alice\"");
    REQUIRE(flip != std::string::npos);
    bytes[flip + 1] = 'b';
    {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        out << bytes;
    }
    try {
        Store reloaded{path};
        FAIL("expected store corruption");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::store_corrupt);
    }
}

TEST_CASE("store: files without a checksum line or with a bad version are corrupt") {
    TempDir dir;
    auto write = [&](const std::string& name, const std::string& bytes) {
        auto p = dir.path / name;
        std::ofstream out(p, std::ios::binary);
        out << bytes;
        return p;
    };

    auto no_checksum = write("a.json", "{\"format_version\": 1}\n");
    CHECK_THROWS_AS(Store{no_checksum}, Error);

    std::string doc = "{\"format_version\": 9, \"accounts\": {}, \"link_tokens\": {}}\n";
    auto wrong_version = write("b.json", doc + "sha256:" + sha256_hex(doc) + "\n");
    try {
        Store s{wrong_version};
        FAIL("expected store corruption");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::store_corrupt);
    }

    auto empty = write("c.json", "");
    CHECK_THROWS_AS(Store{empty}, Error);
}

TEST_CASE("store: crash mid-save leaves the committed state") {
    TempDir dir;
    auto path = dir.path / "store.json";
    Rng rng = Rng::seeded(77);
    {
        Store store{path};
        store.create_account(make_account("alice", "abc123", fixtures::phone("01"), rng));
        store.save();
    }
    // a crash between temp-write and rename leaves a garbage .tmp behind
    {
        std::ofstream out(path.string() + ".tmp", std::ios::binary);
        out << "{\"format_version\": 1, \"accounts\": {"; // truncated
    }
    Store reloaded{path};
    CHECK(reloaded.account_count() == 1);
    CHECK(reloaded.find_by_username("alice") != nullptr);
    // and the next save replaces the leftover temp file cleanly
    reloaded.save();
    Store again{path};
    CHECK(again.account_count() == 1);
}

TEST_CASE("store: no plaintext authentication password on disk") {
    TempDir dir;
    auto path = dir.path / "store.json";
    Rng rng = Rng::seeded(78);
    Store store{path};
    store.create_account(make_account("alice", "abc123", fixtures::phone("01"), rng));
    std::string auth =
        generate_auth_password(store.find_by_username("alice")->converter, "abc123");
    store.save();
    std::string bytes = read_file(path);
    CHECK(bytes.find(auth) == std::string::npos);
}

TEST_CASE("record_attempt: three consecutive failures lock") {
    Rng rng = Rng::seeded(79);
    Store store;
    store.create_account(make_account("alice", "abc123", fixtures::phone("01"), rng));
    LockoutConfig cfg;

    CHECK(store.record_attempt("alice", AttemptOutcome::Failure, cfg, 100) ==
          LockState::Unlocked);
    CHECK(store.record_attempt("alice", AttemptOutcome::Failure, cfg, 101) ==
          LockState::Unlocked);
    CHECK(store.record_attempt("alice", AttemptOutcome::Failure, cfg, 102) ==
          LockState::Locked);
    CHECK(store.find_by_username("alice")->locked_since == 102);

    // failure while locked: stays locked, counter frozen
    CHECK(store.record_attempt("alice", AttemptOutcome::Failure, cfg, 103) ==
          LockState::Locked);
    CHECK(store.find_by_username("alice")->failed_attempts == 3);

    store.unlock("alice");
    CHECK(store.find_by_username("alice")->lock_state == LockState::Unlocked);
    CHECK(store.find_by_username("alice")->failed_attempts == 0);
}

TEST_CASE("record_attempt: success resets the consecutive counter") {
    Rng rng = Rng::seeded(80);
    Store store;
    store.create_account(make_account("alice", "abc123", fixtures::phone("01"), rng));
    LockoutConfig cfg;
    store.record_attempt("alice", AttemptOutcome::Failure, cfg, 1);
    store.record_attempt("alice", AttemptOutcome::Failure, cfg, 2);
    CHECK(store.record_attempt("alice", AttemptOutcome::Success, cfg, 3) ==
          LockState::Unlocked);
    CHECK(store.find_by_username("alice")->failed_attempts == 0);
    // two more failures do not lock
    store.record_attempt("alice", AttemptOutcome::Failure, cfg, 4);
    CHECK(store.record_attempt("alice", AttemptOutcome::Failure, cfg, 5) ==
          LockState::Unlocked);
}

TEST_CASE("record_attempt: unknown account") {
    Store store;
    LockoutConfig cfg;
    CHECK_THROWS_AS(store.record_attempt("ghost", AttemptOutcome::Failure, cfg, 1), Error);
}

TEST_CASE("effective_lock_state: configured expiry unlocks") {
    Rng rng = Rng::seeded(81);
    Store store;
    store.create_account(make_account("alice", "abc123", fixtures::phone("01"), rng));
    LockoutConfig cfg;
    cfg.lock_expiry_seconds = 60;
    store.record_attempt("alice", AttemptOutcome::Failure, cfg, 1000);
    store.record_attempt("alice", AttemptOutcome::Failure, cfg, 1001);
    store.record_attempt("alice", AttemptOutcome::Failure, cfg, 1002);
    CHECK(store.effective_lock_state("alice", cfg, 1030) == LockState::Locked);
    CHECK(store.effective_lock_state("alice", cfg, 1062) == LockState::Unlocked);
    CHECK(store.find_by_username("alice")->failed_attempts == 0);
}
