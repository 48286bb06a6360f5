#include "doctest.h"

#include <set>

#include "dualpass/errors.hpp"
#include "dualpass/generator.hpp"
#include "dualpass/identity.hpp"
#include "fixtures.hpp"

using namespace dualpass;

TEST_CASE("derive_identifier: whole row 1 of the worked example") {
    auto spec = fixtures::example_spec();
    Rng rng = Rng::seeded(51);
    auto ident = derive_identifier(spec, "b@0N8m", IdentifierStrategy::whole_row(1), rng);

    REQUIRE(ident.cells.size() == 3); // no label cell in row 1
    CHECK(ident.cells[0].ref == CellRef{1, CellColumn::LoginChar});
    CHECK(ident.cells[0].value == "b");
    CHECK(ident.cells[1].ref == CellRef{1, CellColumn::Digit});
    CHECK(ident.cells[1].value == "6");
    CHECK(ident.cells[2].ref == CellRef{1, CellColumn::String});
    CHECK(ident.cells[2].value == "3Mo&(E");
    CHECK(ident.fingerprint_hex.size() == 64);
}

TEST_CASE("derive_identifier: row 2 includes its label") {
    auto spec = fixtures::example_spec();
    Rng rng = Rng::seeded(52);
    auto ident = derive_identifier(spec, "b@0N8m", IdentifierStrategy::whole_row(2), rng);
    REQUIRE(ident.cells.size() == 4);
    CHECK(ident.cells[3].ref == CellRef{2, CellColumn::Label});
    CHECK(ident.cells[3].value == "4F");
}

TEST_CASE("derive_identifier: label column covers rows 2..L") {
    auto spec = fixtures::example_spec();
    Rng rng = Rng::seeded(53);
    auto ident = derive_identifier(spec, "b@0N8m",
                                   IdentifierStrategy::whole_column(CellColumn::Label), rng);
    REQUIRE(ident.cells.size() == 5);
    CHECK(ident.cells[0].value == "4F");
    CHECK(ident.cells[4].value == "5F");
}

TEST_CASE("derive_identifier: the login-character column is excluded") {
    auto spec = fixtures::example_spec();
    Rng rng = Rng::seeded(54);
    try {
        derive_identifier(spec, "b@0N8m",
                          IdentifierStrategy::whole_column(CellColumn::LoginChar), rng);
        FAIL("expected invalid strategy");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::invalid_strategy);
    }
}

TEST_CASE("derive_identifier: combo draws always include a string cell") {
    auto spec = fixtures::example_spec();
    Rng rng = Rng::seeded(55);
    for (int i = 0; i < 1000; ++i) {
        auto ident = derive_identifier(spec, "b@0N8m", IdentifierStrategy::combo(4), rng);
        bool has_string = false;
        for (const auto& cell : ident.cells) {
            has_string = has_string || cell.ref.column == CellColumn::String;
        }
        CHECK(has_string);
        CHECK(ident.cells.size() == 4);
        // sorted by (row, column)
        for (std::size_t k = 1; k < ident.cells.size(); ++k) {
            CHECK(ident.cells[k - 1].ref < ident.cells[k].ref);
        }
    }
}

TEST_CASE("derive_identifier: combo size bounded by the cell pool") {
    auto spec = fixtures::example_spec(); // 6 rows -> 3*6 + 5 = 23 cells
    Rng rng = Rng::seeded(56);
    auto ident = derive_identifier(spec, "b@0N8m", IdentifierStrategy::combo(23), rng);
    CHECK(ident.cells.size() == 23);
    CHECK_THROWS_AS(
        derive_identifier(spec, "b@0N8m", IdentifierStrategy::combo(24), rng), Error);
}

TEST_CASE("verify_identifier: recomputation idempotence") {
    auto spec = fixtures::example_spec();
    Rng rng = Rng::seeded(57);
    for (auto strategy :
         {IdentifierStrategy::whole_row(1), IdentifierStrategy::whole_row(3),
          IdentifierStrategy::whole_column(CellColumn::String),
          IdentifierStrategy::whole_column(CellColumn::Digit),
          IdentifierStrategy::combo(4), IdentifierStrategy::combo(10)}) {
        auto ident = derive_identifier(spec, "b@0N8m", strategy, rng);
        CHECK(verify_identifier(spec, "b@0N8m", ident) == IdentifierCheck::Match);
    }
}

TEST_CASE("verify_identifier: row-1 identifier rejects a perturbed first character") {
    auto spec = fixtures::example_spec();
    Rng rng = Rng::seeded(58);
    auto ident = derive_identifier(spec, "b@0N8m", IdentifierStrategy::whole_row(1), rng);
    CHECK(verify_identifier(spec, "a@0N8m", ident) == IdentifierCheck::Mismatch);
    CHECK(verify_identifier(spec, "c@0N8m", ident) == IdentifierCheck::Mismatch);
    // perturbations in rows the identifier does not reference pass this gate
    CHECK(verify_identifier(spec, "b@1N8m", ident) == IdentifierCheck::Match);
}

TEST_CASE("verify_identifier: digit-only column is password-independent") {
    auto spec = fixtures::example_spec();
    Rng rng = Rng::seeded(59);
    auto ident = derive_identifier(spec, "b@0N8m",
                                   IdentifierStrategy::whole_column(CellColumn::Digit), rng);
    // wrong password, same digits: the identifier alone cannot reject it,
    // which is why the default combo strategy requires a string cell
    CHECK(verify_identifier(spec, "a@0N8m", ident) == IdentifierCheck::Match);
}

TEST_CASE("verify_identifier: wrong length never matches") {
    auto spec = fixtures::example_spec();
    Rng rng = Rng::seeded(60);
    auto ident = derive_identifier(spec, "b@0N8m", IdentifierStrategy::combo(4), rng);
    CHECK(verify_identifier(spec, "b@0N8", ident) == IdentifierCheck::Mismatch);
}

TEST_CASE("verify_identifier: stored rows outside the converter are corruption") {
    auto spec = fixtures::example_spec();
    Rng rng = Rng::seeded(61);
    auto ident = derive_identifier(spec, "b@0N8m", IdentifierStrategy::combo(4), rng);
    ident.cells[0].ref.row = 99;
    try {
        verify_identifier(spec, "b@0N8m", ident);
        FAIL("expected row out of range");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::row_out_of_range);
    }
}

TEST_CASE("identifier json round-trip") {
    auto spec = fixtures::example_spec();
    Rng rng = Rng::seeded(62);
    auto ident = derive_identifier(spec, "b@0N8m", IdentifierStrategy::combo(5), rng);
    auto j = identifier_to_json(ident);
    auto restored = identifier_from_json(nlohmann::json::parse(j.dump()));
    CHECK(restored == ident);
    CHECK(verify_identifier(spec, "b@0N8m", restored) == IdentifierCheck::Match);
}

TEST_CASE("identifier serialization carries no personal information") {
    Rng rng = Rng::seeded(63);
    GeneratorConfig config;
    auto spec = generate_converter("tulip7", config, rng);
    auto ident = derive_identifier(spec, "tulip7", IdentifierStrategy::combo(4), rng);
    std::string serialized = identifier_to_json(ident).dump();

    auto device = fixtures::phone("42");
    for (const std::string& secret :
         {std::string("alice"), device.phone_number, device.imei, device.sim_id}) {
        CHECK(serialized.find(secret) == std::string::npos);
    }
}

TEST_CASE("fingerprints are unique across a thousand accounts") {
    Rng rng = Rng::seeded(64);
    GeneratorConfig config;
    std::set<std::string> fingerprints;
    for (int i = 0; i < 1000; ++i) {
        std::string password;
        for (int k = 0; k < 8; ++k) {
            password.push_back(rng.pick(login_alphabet()));
        }
        auto spec = generate_converter(password, config, rng);
        auto ident = derive_identifier(spec, password, IdentifierStrategy::combo(4), rng);
        CHECK(fingerprints.insert(ident.fingerprint_hex).second);
    }
}
