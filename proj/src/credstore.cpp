#include "dualpass/credstore.hpp"

#include <cstdio>
#include <fstream>

#include "dualpass/errors.hpp"
#include "dualpass/sha256.hpp"

namespace dualpass {

namespace {

constexpr int store_format_version = 1;
constexpr const char* checksum_prefix = "sha256:";

std::string hex_of_bytes(const std::string& bytes) {
    return to_hex(bytes);
}

nlohmann::ordered_json account_to_json(const AccountRecord& rec) {
    nlohmann::ordered_json j;
    j["username"] = rec.username;
    j["user_identifier"] = rec.user_identifier;
    j["device"] = device_to_json(rec.device);
    j["converter"] = spec_to_json(rec.converter);
    j["auth_verifier"] = {{"salt", rec.verifier.salt_hex}, {"hash", rec.verifier.hash_hex}};
    j["process_identifier"] = identifier_to_json(rec.identifier);
    j["failed_attempts"] = rec.failed_attempts;
    j["lock_state"] = rec.lock_state == LockState::Locked ? "locked" : "unlocked";
    j["locked_since"] = rec.locked_since;
    j["version"] = rec.version;
    return j;
}

AccountRecord account_from_json(const nlohmann::json& j) {
    try {
        AccountRecord rec;
        rec.username = j.at("username").get<std::string>();
        rec.user_identifier = j.at("user_identifier").get<std::string>();
        rec.device = device_from_json(j.at("device"));
        rec.converter = spec_from_json(j.at("converter"));
        rec.verifier.salt_hex = j.at("auth_verifier").at("salt").get<std::string>();
        rec.verifier.hash_hex = j.at("auth_verifier").at("hash").get<std::string>();
        rec.identifier = identifier_from_json(j.at("process_identifier"));
        rec.failed_attempts = j.at("failed_attempts").get<int>();
        std::string lock = j.at("lock_state").get<std::string>();
        if (lock == "locked") {
            rec.lock_state = LockState::Locked;
        } else if (lock == "unlocked") {
            rec.lock_state = LockState::Unlocked;
        } else {
            raise(Errc::store_corrupt, "unknown lock state \"" + lock + "\"");
        }
        rec.locked_since = j.at("locked_since").get<std::int64_t>();
        rec.version = j.at("version").get<int>();
        return rec;
    } catch (const nlohmann::json::exception& e) {
        raise(Errc::store_corrupt, std::string("account json malformed: ") + e.what());
    }
}

} // namespace

const char* device_kind_name(DeviceKind kind) {
    switch (kind) {
    case DeviceKind::Smartphone: return "smartphone";
    case DeviceKind::Desktop: return "desktop";
    case DeviceKind::Laptop: return "laptop";
    case DeviceKind::Tablet: return "tablet";
    }
    return "unknown";
}

DeviceKind device_kind_from_name(const std::string& name) {
    if (name == "smartphone") return DeviceKind::Smartphone;
    if (name == "desktop") return DeviceKind::Desktop;
    if (name == "laptop") return DeviceKind::Laptop;
    if (name == "tablet") return DeviceKind::Tablet;
    raise(Errc::store_corrupt, "unknown device kind \"" + name + "\"");
}

nlohmann::ordered_json device_to_json(const DeviceDescriptor& device) {
    nlohmann::ordered_json j;
    j["phone_number"] = device.phone_number;
    j["imei"] = device.imei;
    j["sim_id"] = device.sim_id;
    j["device_kind"] = device_kind_name(device.kind);
    return j;
}

DeviceDescriptor device_from_json(const nlohmann::json& j) {
    try {
        DeviceDescriptor d;
        d.phone_number = j.at("phone_number").get<std::string>();
        d.imei = j.at("imei").get<std::string>();
        d.sim_id = j.at("sim_id").get<std::string>();
        d.kind = device_kind_from_name(j.at("device_kind").get<std::string>());
        return d;
    } catch (const nlohmann::json::exception& e) {
        raise(Errc::store_corrupt, std::string("device json malformed: ") + e.what());
    }
}

AuthVerifier make_verifier(std::string_view auth_password, const std::string& salt_bytes) {
    Sha256 h;
    h.update(salt_bytes);
    h.update(auth_password);
    auto digest = h.finish();
    return AuthVerifier{hex_of_bytes(salt_bytes), to_hex(digest.data(), digest.size())};
}

bool verifier_matches(const AuthVerifier& verifier, std::string_view auth_password) {
    std::string salt;
    salt.reserve(verifier.salt_hex.size() / 2);
    auto nibble = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        raise(Errc::store_corrupt, "verifier salt is not lowercase hex");
    };
    for (std::size_t i = 0; i + 1 < verifier.salt_hex.size(); i += 2) {
        salt.push_back(char(nibble(verifier.salt_hex[i]) * 16 + nibble(verifier.salt_hex[i + 1])));
    }
    Sha256 h;
    h.update(salt);
    h.update(auth_password);
    auto digest = h.finish();
    std::string hash = to_hex(digest.data(), digest.size());
    // constant-time comparison
    if (hash.size() != verifier.hash_hex.size()) {
        return false;
    }
    unsigned diff = 0;
    for (std::size_t i = 0; i < hash.size(); ++i) {
        diff |= unsigned(hash[i] ^ verifier.hash_hex[i]);
    }
    return diff == 0;
}

Store::Store(std::filesystem::path file_path) : path_(std::move(file_path)) {
    if (std::filesystem::exists(path_)) {
        std::ifstream in(path_, std::ios::binary);
        if (!in) {
            raise(Errc::io_error, "cannot read store file " + path_.string());
        }
        std::string bytes((std::istreambuf_iterator<char>(in)),
                          std::istreambuf_iterator<char>());
        Store loaded = deserialize(bytes);
        accounts_ = std::move(loaded.accounts_);
        tokens_ = std::move(loaded.tokens_);
    }
}

std::string Store::serialize() const {
    nlohmann::ordered_json j;
    j["format_version"] = store_format_version;
    auto accounts = nlohmann::ordered_json::object();
    for (const auto& [name, rec] : accounts_) {
        accounts[name] = account_to_json(rec);
    }
    j["accounts"] = std::move(accounts);
    auto tokens = nlohmann::ordered_json::object();
    for (const auto& [key, tok] : tokens_) {
        tokens[key] = {{"desktop_session", tok.desktop_session},
                       {"expires_at", tok.expires_at},
                       {"used", tok.used}};
    }
    j["link_tokens"] = std::move(tokens);

    std::string doc = j.dump(2);
    doc.push_back('\n');
    std::string checksum = sha256_hex(doc);
    return doc + checksum_prefix + checksum + "\n";
}

Store Store::deserialize(const std::string& bytes) {
    // split off the trailing checksum line
    std::size_t end = bytes.size();
    if (end > 0 && bytes[end - 1] == '\n') {
        --end;
    }
    std::size_t line_start = bytes.rfind('\n', end == 0 ? std::string::npos : end - 1);
    if (line_start == std::string::npos) {
        raise(Errc::store_corrupt, "store file has no checksum line");
    }
    std::string checksum_line = bytes.substr(line_start + 1, end - line_start - 1);
    std::string doc = bytes.substr(0, line_start + 1);
    if (checksum_line.rfind(checksum_prefix, 0) != 0) {
        raise(Errc::store_corrupt, "store checksum line is malformed");
    }
    std::string expected = checksum_line.substr(std::string(checksum_prefix).size());
    if (sha256_hex(doc) != expected) {
        raise(Errc::store_corrupt, "store checksum mismatch");
    }

    nlohmann::json j;
    try {
        j = nlohmann::json::parse(doc);
    } catch (const nlohmann::json::exception& e) {
        raise(Errc::store_corrupt, std::string("store json malformed: ") + e.what());
    }
    try {
        if (j.at("format_version").get<int>() != store_format_version) {
            raise(Errc::store_corrupt, "unsupported store format version");
        }
        Store store;
        for (const auto& [name, rec] : j.at("accounts").items()) {
            store.accounts_[name] = account_from_json(rec);
        }
        for (const auto& [key, tok] : j.at("link_tokens").items()) {
            LinkToken t;
            t.token = key;
            t.desktop_session = tok.at("desktop_session").get<std::string>();
            t.expires_at = tok.at("expires_at").get<std::int64_t>();
            t.used = tok.at("used").get<bool>();
            store.tokens_[key] = std::move(t);
        }
        return store;
    } catch (const nlohmann::json::exception& e) {
        raise(Errc::store_corrupt, std::string("store json malformed: ") + e.what());
    }
}

void Store::save() {
    if (path_.empty()) {
        return; // in-memory store
    }
    std::string bytes = serialize();
    std::filesystem::path tmp = path_;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            raise(Errc::io_error, "cannot write " + tmp.string());
        }
        out.write(bytes.data(), std::streamsize(bytes.size()));
        out.flush();
        if (!out) {
            raise(Errc::io_error, "short write to " + tmp.string());
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path_, ec);
    if (ec) {
        raise(Errc::io_error, "cannot replace store file: " + ec.message());
    }
}

void Store::create_account(AccountRecord record) {
    if (accounts_.count(record.username) > 0) {
        raise(Errc::duplicate_username,
              "username \"" + record.username + "\" already registered");
    }
    if (record.device.kind == DeviceKind::Smartphone) {
        for (const auto& [name, existing] : accounts_) {
            if (existing.device.kind == DeviceKind::Smartphone &&
                existing.device == record.device) {
                raise(Errc::device_already_bound,
                      "smartphone is already bound to account \"" + name + "\"");
            }
        }
    }
    accounts_[record.username] = std::move(record);
}

const AccountRecord* Store::find_by_username(const std::string& username) const {
    auto it = accounts_.find(username);
    return it == accounts_.end() ? nullptr : &it->second;
}

AccountRecord& Store::account_or_throw(const std::string& username) {
    auto it = accounts_.find(username);
    if (it == accounts_.end()) {
        raise(Errc::unknown_account, "no account \"" + username + "\"");
    }
    return it->second;
}

void Store::replace_account(const AccountRecord& record) {
    account_or_throw(record.username) = record;
}

LockState Store::record_attempt(const std::string& username, AttemptOutcome outcome,
                                const LockoutConfig& cfg, std::int64_t now) {
    AccountRecord& rec = account_or_throw(username);
    if (rec.lock_state == LockState::Locked) {
        return LockState::Locked; // counter frozen while locked
    }
    if (outcome == AttemptOutcome::Success) {
        rec.failed_attempts = 0;
        return LockState::Unlocked;
    }
    rec.failed_attempts += 1;
    if (rec.failed_attempts >= cfg.max_attempts) {
        rec.lock_state = LockState::Locked;
        rec.locked_since = now;
    }
    return rec.lock_state;
}

void Store::unlock(const std::string& username) {
    AccountRecord& rec = account_or_throw(username);
    rec.lock_state = LockState::Unlocked;
    rec.failed_attempts = 0;
    rec.locked_since = 0;
}

LockState Store::effective_lock_state(const std::string& username, const LockoutConfig& cfg,
                                      std::int64_t now) {
    AccountRecord& rec = account_or_throw(username);
    if (rec.lock_state == LockState::Locked && cfg.lock_expiry_seconds > 0 &&
        now - rec.locked_since >= cfg.lock_expiry_seconds) {
        rec.lock_state = LockState::Unlocked;
        rec.failed_attempts = 0;
        rec.locked_since = 0;
    }
    return rec.lock_state;
}

void Store::put_token(const LinkToken& token) {
    tokens_[token.token] = token;
}

const LinkToken* Store::find_token(const std::string& token) const {
    auto it = tokens_.find(token);
    return it == tokens_.end() ? nullptr : &it->second;
}

void Store::mark_token_used(const std::string& token) {
    auto it = tokens_.find(token);
    if (it == tokens_.end()) {
        raise(Errc::token_unknown, "unknown link token");
    }
    it->second.used = true;
}

} // namespace dualpass
