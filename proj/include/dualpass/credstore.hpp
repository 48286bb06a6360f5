#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "dualpass/converter.hpp"
#include "dualpass/identity.hpp"

namespace dualpass {

enum class DeviceKind { Smartphone, Desktop, Laptop, Tablet };

const char* device_kind_name(DeviceKind kind);
DeviceKind device_kind_from_name(const std::string& name);

/// Self-declared device identity (the simulation's stand-in for IMEI/SIM
/// collection). Equality is all-field equality.
struct DeviceDescriptor {
    std::string phone_number;
    std::string imei;
    std::string sim_id;
    DeviceKind kind = DeviceKind::Smartphone;

    friend bool operator==(const DeviceDescriptor&, const DeviceDescriptor&) = default;
};

nlohmann::ordered_json device_to_json(const DeviceDescriptor& device);
DeviceDescriptor device_from_json(const nlohmann::json& j);

/// Salted SHA-256 verifier; the authentication password plaintext is never
/// stored anywhere.
struct AuthVerifier {
    std::string salt_hex; // 16 random bytes
    std::string hash_hex; // SHA-256(salt || authentication password)

    friend bool operator==(const AuthVerifier&, const AuthVerifier&) = default;
};

AuthVerifier make_verifier(std::string_view auth_password, const std::string& salt_bytes);
bool verifier_matches(const AuthVerifier& verifier, std::string_view auth_password);

enum class LockState { Unlocked, Locked };
enum class AttemptOutcome { Success, Failure };

struct LockoutConfig {
    int max_attempts = 3;
    std::int64_t lock_expiry_seconds = 0; // 0 = manual unlock only
};

struct AccountRecord {
    std::string username;
    std::string user_identifier; // the registered phone number
    DeviceDescriptor device;
    ConverterSpec converter;
    AuthVerifier verifier;
    ProcessIdentifier identifier;
    int failed_attempts = 0;
    LockState lock_state = LockState::Unlocked;
    std::int64_t locked_since = 0;
    int version = 1;
};

struct LinkToken {
    std::string token; // 128-bit random, hex
    std::string desktop_session;
    std::int64_t expires_at = 0;
    bool used = false;
};

/// Whole-store persistence: one canonical JSON document plus a trailing
/// SHA-256 checksum line, replaced atomically on every save. Single writer,
/// callers serialize mutations.
class Store {
public:
    Store() = default;                                // in-memory only
    explicit Store(std::filesystem::path file_path);  // loads the file if present

    const std::filesystem::path& path() const { return path_; }

    void save();

    void create_account(AccountRecord record);
    const AccountRecord* find_by_username(const std::string& username) const;
    void replace_account(const AccountRecord& record);

    LockState record_attempt(const std::string& username, AttemptOutcome outcome,
                             const LockoutConfig& cfg, std::int64_t now);
    void unlock(const std::string& username);

    /// Lock state after applying any configured expiry; unlock-on-expiry is
    /// written back to the record.
    LockState effective_lock_state(const std::string& username, const LockoutConfig& cfg,
                                   std::int64_t now);

    void put_token(const LinkToken& token);
    const LinkToken* find_token(const std::string& token) const;
    void mark_token_used(const std::string& token);

    std::size_t account_count() const { return accounts_.size(); }
    const std::map<std::string, AccountRecord>& accounts() const { return accounts_; }

    /// Canonical file bytes (document + checksum line).
    std::string serialize() const;
    static Store deserialize(const std::string& bytes);

private:
    AccountRecord& account_or_throw(const std::string& username);

    std::filesystem::path path_;
    std::map<std::string, AccountRecord> accounts_;
    std::map<std::string, LinkToken> tokens_;
};

} // namespace dualpass
