#pragma once

#include <string>
#include <vector>

#include "dualpass/converter.hpp"
#include "dualpass/rng.hpp"

namespace dualpass {

enum class CellColumn { LoginChar, Digit, String, Label };

const char* cell_column_name(CellColumn column);
CellColumn cell_column_from_name(const std::string& name);

/// Addresses one converter element. (row 1, Label) does not exist: the
/// first row carries no label.
struct CellRef {
    int row = 1; // 1-based unit position
    CellColumn column = CellColumn::String;

    friend bool operator==(const CellRef&, const CellRef&) = default;
    friend auto operator<=>(const CellRef&, const CellRef&) = default;
};

/// How the system picks identifier cells: a whole row, a whole column
/// (Login Character excluded), or a random combination. Combo draws are
/// re-taken until at least one String cell is present, since only
/// password-dependent cells can gate anything.
struct IdentifierStrategy {
    enum class Kind { Row, Column, Combo };

    Kind kind = Kind::Combo;
    int row = 0;                              // Row
    CellColumn column = CellColumn::String;   // Column
    int combo_size = 4;                       // Combo

    static IdentifierStrategy whole_row(int row);
    static IdentifierStrategy whole_column(CellColumn column);
    static IdentifierStrategy combo(int k);

    friend bool operator==(const IdentifierStrategy&, const IdentifierStrategy&) = default;
};

struct IdentifierCell {
    CellRef ref;
    std::string value;

    friend bool operator==(const IdentifierCell&, const IdentifierCell&) = default;
};

/// The login-process identifier: system-selected converter cells with their
/// registration-time values, plus a salted fingerprint of the canonical
/// serialization. Carries no personal information by construction.
struct ProcessIdentifier {
    IdentifierStrategy strategy;
    std::vector<IdentifierCell> cells; // sorted by (row, column)
    std::string salt_hex;              // 16 random bytes
    std::string fingerprint_hex;       // SHA-256(salt || canonical cells)

    friend bool operator==(const ProcessIdentifier&, const ProcessIdentifier&) = default;
};

enum class IdentifierCheck { Match, Mismatch };

/// Canonical serialization: JSON array of [row, column, value] triples
/// sorted by (row, column). This is what the fingerprint covers.
nlohmann::ordered_json cells_to_json(const std::vector<IdentifierCell>& cells);

std::string identifier_fingerprint(const std::vector<IdentifierCell>& cells,
                                   const std::string& salt_bytes);

ProcessIdentifier derive_identifier(const ConverterSpec& spec,
                                    std::string_view login_password,
                                    const IdentifierStrategy& strategy, Rng& rng);

/// Recomputes each cell's value for the entered password and compares with
/// the stored values. String and LoginChar cells are password-dependent;
/// Digit and Label cells are not.
IdentifierCheck verify_identifier(const ConverterSpec& spec, std::string_view entered,
                                  const ProcessIdentifier& stored);

nlohmann::ordered_json identifier_to_json(const ProcessIdentifier& ident);
ProcessIdentifier identifier_from_json(const nlohmann::json& j);

} // namespace dualpass
