#include "dualpass/identity.hpp"

#include <algorithm>

#include "dualpass/errors.hpp"
#include "dualpass/sha256.hpp"

namespace dualpass {

namespace {

std::string hex_to_bytes(const std::string& hex) {
    if (hex.size() % 2 != 0) {
        raise(Errc::store_corrupt, "odd-length hex string");
    }
    auto nibble = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        raise(Errc::store_corrupt, "invalid hex digit");
    };
    std::string out;
    out.reserve(hex.size() / 2);
    for (std::size_t i = 0; i < hex.size(); i += 2) {
        out.push_back(char(nibble(hex[i]) * 16 + nibble(hex[i + 1])));
    }
    return out;
}

std::vector<CellRef> all_cell_refs(std::size_t length) {
    std::vector<CellRef> out;
    for (int row = 1; row <= int(length); ++row) {
        out.push_back({row, CellColumn::LoginChar});
        out.push_back({row, CellColumn::Digit});
        out.push_back({row, CellColumn::String});
        if (row >= 2) {
            out.push_back({row, CellColumn::Label});
        }
    }
    return out;
}

/// Value of one cell for a given entered password.
std::string cell_value(const ConverterSpec& spec, std::string_view entered,
                       const CellRef& ref) {
    if (ref.row < 1 || ref.row > int(spec.units.size())) {
        raise(Errc::row_out_of_range,
              "identifier references row " + std::to_string(ref.row) +
                  " of a " + std::to_string(spec.units.size()) + "-row converter");
    }
    const auto& unit = spec.units[std::size_t(ref.row) - 1];
    switch (ref.column) {
    case CellColumn::LoginChar:
        return std::string(1, entered[std::size_t(ref.row) - 1]);
    case CellColumn::Digit:
        return std::to_string(unit.digit);
    case CellColumn::String: {
        auto it = unit.table.find(entered[std::size_t(ref.row) - 1]);
        if (it == unit.table.end()) {
            raise(Errc::alphabet_violation,
                  "entered character at row " + std::to_string(ref.row) +
                      " has no table entry");
        }
        return it->second;
    }
    case CellColumn::Label:
        if (ref.row < 2) {
            raise(Errc::row_out_of_range, "row 1 has no shuffling label");
        }
        return format_label(spec.labels[std::size_t(ref.row) - 2]);
    }
    raise(Errc::invalid_argument, "unknown cell column");
}

} // namespace

const char* cell_column_name(CellColumn column) {
    switch (column) {
    case CellColumn::LoginChar: return "login_char";
    case CellColumn::Digit: return "digit";
    case CellColumn::String: return "string";
    case CellColumn::Label: return "label";
    }
    return "unknown";
}

CellColumn cell_column_from_name(const std::string& name) {
    if (name == "login_char") return CellColumn::LoginChar;
    if (name == "digit") return CellColumn::Digit;
    if (name == "string") return CellColumn::String;
    if (name == "label") return CellColumn::Label;
    raise(Errc::store_corrupt, "unknown cell column \"" + name + "\"");
}

IdentifierStrategy IdentifierStrategy::whole_row(int row) {
    IdentifierStrategy s;
    s.kind = Kind::Row;
    s.row = row;
    return s;
}

IdentifierStrategy IdentifierStrategy::whole_column(CellColumn column) {
    IdentifierStrategy s;
    s.kind = Kind::Column;
    s.column = column;
    return s;
}

IdentifierStrategy IdentifierStrategy::combo(int k) {
    IdentifierStrategy s;
    s.kind = Kind::Combo;
    s.combo_size = k;
    return s;
}

nlohmann::ordered_json cells_to_json(const std::vector<IdentifierCell>& cells) {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& cell : cells) {
        arr.push_back({cell.ref.row, cell_column_name(cell.ref.column), cell.value});
    }
    return arr;
}

std::string identifier_fingerprint(const std::vector<IdentifierCell>& cells,
                                   const std::string& salt_bytes) {
    Sha256 h;
    h.update(salt_bytes);
    h.update(cells_to_json(cells).dump());
    auto digest = h.finish();
    return to_hex(digest.data(), digest.size());
}

ProcessIdentifier derive_identifier(const ConverterSpec& spec,
                                    std::string_view login_password,
                                    const IdentifierStrategy& strategy, Rng& rng) {
    if (login_password.size() != spec.units.size()) {
        raise(Errc::length_mismatch,
              "login password length does not match converter length");
    }
    const std::size_t length = spec.units.size();

    std::vector<CellRef> refs;
    switch (strategy.kind) {
    case IdentifierStrategy::Kind::Row: {
        if (strategy.row < 1 || strategy.row > int(length)) {
            raise(Errc::invalid_strategy,
                  "row " + std::to_string(strategy.row) + " out of range");
        }
        refs.push_back({strategy.row, CellColumn::LoginChar});
        refs.push_back({strategy.row, CellColumn::Digit});
        refs.push_back({strategy.row, CellColumn::String});
        if (strategy.row >= 2) {
            refs.push_back({strategy.row, CellColumn::Label});
        }
        break;
    }
    case IdentifierStrategy::Kind::Column: {
        if (strategy.column == CellColumn::LoginChar) {
            raise(Errc::invalid_strategy,
                  "the Login Character column cannot serve as the identifier");
        }
        int first_row = strategy.column == CellColumn::Label ? 2 : 1;
        for (int row = first_row; row <= int(length); ++row) {
            refs.push_back({row, strategy.column});
        }
        if (refs.empty()) {
            raise(Errc::invalid_strategy, "column selection is empty");
        }
        break;
    }
    case IdentifierStrategy::Kind::Combo: {
        auto pool = all_cell_refs(length);
        if (strategy.combo_size < 1 || strategy.combo_size > int(pool.size())) {
            raise(Errc::invalid_strategy,
                  "combo size " + std::to_string(strategy.combo_size) +
                      " exceeds the " + std::to_string(pool.size()) + " available cells");
        }
        // re-draw until the combination is password-dependent
        while (true) {
            auto remaining = pool;
            refs.clear();
            for (int k = 0; k < strategy.combo_size; ++k) {
                std::size_t idx =
                    std::size_t(rng.uniform(0, std::int64_t(remaining.size()) - 1));
                refs.push_back(remaining[idx]);
                remaining.erase(remaining.begin() + std::ptrdiff_t(idx));
            }
            bool has_string = std::any_of(refs.begin(), refs.end(), [](const CellRef& r) {
                return r.column == CellColumn::String;
            });
            if (has_string) {
                break;
            }
        }
        break;
    }
    }

    std::sort(refs.begin(), refs.end());

    ProcessIdentifier ident;
    ident.strategy = strategy;
    for (const auto& ref : refs) {
        ident.cells.push_back({ref, cell_value(spec, login_password, ref)});
    }
    std::string salt = rng.bytes(16);
    ident.salt_hex = to_hex(salt);
    ident.fingerprint_hex = identifier_fingerprint(ident.cells, salt);
    return ident;
}

IdentifierCheck verify_identifier(const ConverterSpec& spec, std::string_view entered,
                                  const ProcessIdentifier& stored) {
    if (entered.size() != spec.units.size()) {
        return IdentifierCheck::Mismatch;
    }
    for (const auto& cell : stored.cells) {
        if (cell.ref.row < 1 || cell.ref.row > int(spec.units.size()) ||
            (cell.ref.column == CellColumn::Label && cell.ref.row < 2)) {
            raise(Errc::row_out_of_range,
                  "stored identifier is inconsistent with the converter");
        }
        std::string recomputed;
        try {
            recomputed = cell_value(spec, entered, cell.ref);
        } catch (const Error& e) {
            if (e.code() == Errc::alphabet_violation) {
                return IdentifierCheck::Mismatch; // entered char has no conversion
            }
            throw;
        }
        if (recomputed != cell.value) {
            return IdentifierCheck::Mismatch;
        }
    }
    std::string salt = hex_to_bytes(stored.salt_hex);
    if (identifier_fingerprint(stored.cells, salt) != stored.fingerprint_hex) {
        raise(Errc::store_corrupt, "identifier fingerprint does not match its cells");
    }
    return IdentifierCheck::Match;
}

nlohmann::ordered_json identifier_to_json(const ProcessIdentifier& ident) {
    nlohmann::ordered_json j;
    nlohmann::ordered_json strategy;
    switch (ident.strategy.kind) {
    case IdentifierStrategy::Kind::Row:
        strategy["kind"] = "row";
        strategy["row"] = ident.strategy.row;
        break;
    case IdentifierStrategy::Kind::Column:
        strategy["kind"] = "column";
        strategy["column"] = cell_column_name(ident.strategy.column);
        break;
    case IdentifierStrategy::Kind::Combo:
        strategy["kind"] = "combo";
        strategy["k"] = ident.strategy.combo_size;
        break;
    }
    j["strategy"] = std::move(strategy);
    j["cells"] = cells_to_json(ident.cells);
    j["salt"] = ident.salt_hex;
    j["fingerprint"] = ident.fingerprint_hex;
    return j;
}

ProcessIdentifier identifier_from_json(const nlohmann::json& j) {
    try {
        ProcessIdentifier ident;
        const auto& strategy = j.at("strategy");
        std::string kind = strategy.at("kind").get<std::string>();
        if (kind == "row") {
            ident.strategy = IdentifierStrategy::whole_row(strategy.at("row").get<int>());
        } else if (kind == "column") {
            ident.strategy = IdentifierStrategy::whole_column(
                cell_column_from_name(strategy.at("column").get<std::string>()));
        } else if (kind == "combo") {
            ident.strategy = IdentifierStrategy::combo(strategy.at("k").get<int>());
        } else {
            raise(Errc::store_corrupt, "unknown identifier strategy \"" + kind + "\"");
        }
        for (const auto& cell : j.at("cells")) {
            if (!cell.is_array() || cell.size() != 3) {
                raise(Errc::store_corrupt, "identifier cell must be [row, column, value]");
            }
            IdentifierCell c;
            c.ref.row = cell[0].get<int>();
            c.ref.column = cell_column_from_name(cell[1].get<std::string>());
            c.value = cell[2].get<std::string>();
            ident.cells.push_back(std::move(c));
        }
        ident.salt_hex = j.at("salt").get<std::string>();
        ident.fingerprint_hex = j.at("fingerprint").get<std::string>();
        return ident;
    } catch (const nlohmann::json::exception& e) {
        raise(Errc::store_corrupt, std::string("identifier json malformed: ") + e.what());
    }
}

} // namespace dualpass
