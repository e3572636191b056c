#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "chemprompt/chem.hpp"
#include "chemprompt/hash.hpp"

using namespace chemprompt;
using namespace chemprompt::chem;

namespace {

ChemErrorKind kind_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const ChemError& e) {
        return e.kind();
    }
    FAIL("expected a ChemError");
    return ChemErrorKind::UnsupportedToken;
}

// Mass table duplicated here on purpose: weight checks below must not lean on
// the implementation's own constants.
double ref_mass(const std::string& el) {
    if (el == "H") return 1.008;
    if (el == "B") return 10.81;
    if (el == "C") return 12.01;
    if (el == "N") return 14.01;
    if (el == "O") return 16.00;
    if (el == "F") return 19.00;
    if (el == "P") return 30.97;
    if (el == "S") return 32.06;
    if (el == "Cl") return 35.45;
    if (el == "Br") return 79.90;
    if (el == "I") return 126.90;
    FAIL("no reference mass for ", el);
    return 0;
}

double ref_weight(const AtomCounts& counts) {
    double w = 0;
    for (const auto& [el, n] : counts) w += ref_mass(el) * n;
    return w;
}

}  // namespace

TEST_CASE("acetaminophen composition") {
    AtomCounts counts = atom_counts("CC(=O)Nc1ccc(O)cc1");
    CHECK(counts == AtomCounts{{"C", 8}, {"H", 9}, {"N", 1}, {"O", 2}});
    CHECK(molecular_formula("CC(=O)Nc1ccc(O)cc1") == "C8H9NO2");
    // 8*12.01 + 9*1.008 + 14.01 + 2*16.00
    CHECK(molecular_weight(counts) == doctest::Approx(151.162).epsilon(1e-9));
    CHECK(h_bond_acceptors("CC(=O)Nc1ccc(O)cc1") == 3);
    CHECK(h_bond_donors("CC(=O)Nc1ccc(O)cc1") == 2);
    CHECK(distinct_element_count(counts) == 4);
}

TEST_CASE("small molecules with implicit hydrogens") {
    CHECK(atom_counts("C") == AtomCounts{{"C", 1}, {"H", 4}});
    CHECK(atom_counts("CC(C)O") == AtomCounts{{"C", 3}, {"H", 8}, {"O", 1}});
    CHECK(molecular_formula("CC(C)O") == "C3H8O");
    CHECK(molecular_weight(std::string("CC(C)O")) == doctest::Approx(60.094).epsilon(1e-9));
    CHECK(atom_counts("CCO") == AtomCounts{{"C", 2}, {"H", 6}, {"O", 1}});
    CHECK(h_bond_acceptors("CCO") == 1);
    CHECK(h_bond_donors("CCO") == 1);
    // methyl acetate: two acceptor oxygens, no donor
    CHECK(h_bond_acceptors("CC(=O)OC") == 2);
    CHECK(h_bond_donors("CC(=O)OC") == 0);
    // triple bond saturates carbon: HCN
    CHECK(atom_counts("C#N") == AtomCounts{{"C", 1}, {"H", 1}, {"N", 1}});
}

TEST_CASE("aromatic rings") {
    // benzene by hand: six aromatic carbons, two ring bonds each at order 1.5,
    // ceil(3.0) = 3 of 4 used, one hydrogen per atom
    CHECK(atom_counts("c1ccccc1") == AtomCounts{{"C", 6}, {"H", 6}});
    CHECK(molecular_weight(std::string("c1ccccc1")) == doctest::Approx(78.108).epsilon(1e-9));
    // pyridine nitrogen: ceil(3.0) = 3 fills the nitrogen valence, no H
    CHECK(atom_counts("c1ccncc1") == AtomCounts{{"C", 5}, {"H", 5}, {"N", 1}});
    // pyrrole must write its NH explicitly
    CHECK(atom_counts("c1cc[nH]c1") == AtomCounts{{"C", 4}, {"H", 5}, {"N", 1}});
    // naphthalene bridgeheads: three aromatic bonds, ceil(4.5) = 5 > 4, no H
    CHECK(atom_counts("c1ccc2ccccc2c1") == AtomCounts{{"C", 10}, {"H", 8}});
    // toluene: substituted ring carbon reaches bond order 4
    CHECK(atom_counts("Cc1ccccc1") == AtomCounts{{"C", 7}, {"H", 8}});
}

TEST_CASE("bracket atoms") {
    CHECK(atom_counts("[NH4+]") == AtomCounts{{"H", 4}, {"N", 1}});
    CHECK(atom_counts("[OH-]") == AtomCounts{{"H", 1}, {"O", 1}});
    CHECK(atom_counts("[H][H]") == AtomCounts{{"H", 2}});
    CHECK(hill_formula(atom_counts("[H][H]")) == "H2");
    // stereo markers are composition-neutral: lactic acid
    CHECK(atom_counts("C[C@@H](O)C(=O)O") == AtomCounts{{"C", 3}, {"H", 6}, {"O", 3}});
    CHECK(atom_counts("C[C@@H](O)C(=O)O") == atom_counts("CC(O)C(=O)O"));
    // bracket atoms carry exactly the written hydrogens
    CHECK(atom_counts("[CH3]C") == AtomCounts{{"C", 2}, {"H", 6}});
    CHECK(atom_counts("[C]") == AtomCounts{{"C", 1}});
    CHECK(h_bond_donors("C[NH3+]") == 1);
}

TEST_CASE("ring closure variants") {
    CHECK(atom_counts("C1CCCCC1") == AtomCounts{{"C", 6}, {"H", 12}});
    CHECK(atom_counts("C%10CCCCC%10") == atom_counts("C1CCCCC1"));
    // explicit double bond on the closure digit: cyclohexene either way
    CHECK(atom_counts("C1=CCCCC1") == AtomCounts{{"C", 6}, {"H", 10}});
    CHECK(atom_counts("C=1CCCCC=1") == AtomCounts{{"C", 6}, {"H", 10}});
}

TEST_CASE("paclitaxel") {
    const std::string smiles =
        "CC1=C2C(C(=O)C3(C(CC4C(C3C(C(C2(C)C)(CC1OC(=O)C(C(C5=CC=CC=C5)NC(=O)C6=CC=CC=C6)O)O)"
        "OC(=O)C7=CC=CC=C7)(CO4)OC(=O)C)O)C)OC(=O)C";
    AtomCounts counts = atom_counts(smiles);
    CHECK(counts == AtomCounts{{"C", 47}, {"H", 51}, {"N", 1}, {"O", 14}});
    CHECK(molecular_formula(smiles) == "C47H51NO14");
    // independent mass summation over the frozen composition
    double expected = 47 * 12.01 + 51 * 1.008 + 1 * 14.01 + 14 * 16.00;
    CHECK(expected == doctest::Approx(853.888).epsilon(1e-12));
    CHECK(molecular_weight(counts) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("hill ordering") {
    CHECK(hill_formula({{"C", 8}, {"H", 9}, {"N", 1}, {"O", 2}}) == "C8H9NO2");
    CHECK(hill_formula({{"H", 2}, {"O", 1}}) == "H2O");           // no carbon: alphabetical
    CHECK(hill_formula({{"Br", 1}, {"H", 1}}) == "BrH");          // Br before H alphabetically
    CHECK(hill_formula({{"C", 1}, {"Cl", 3}, {"H", 1}}) == "CHCl3");
    CHECK(atom_counts("O") == AtomCounts{{"H", 2}, {"O", 1}});
    CHECK(molecular_formula("O") == "H2O");
}

TEST_CASE("smiles parse errors") {
    CHECK(kind_of([] { parse_smiles(""); }) == ChemErrorKind::UnsupportedToken);
    CHECK(kind_of([] { parse_smiles("CX"); }) == ChemErrorKind::UnsupportedToken);
    CHECK(kind_of([] { parse_smiles("C.C"); }) == ChemErrorKind::UnsupportedToken);
    CHECK(kind_of([] { parse_smiles("C*"); }) == ChemErrorKind::UnsupportedToken);
    CHECK(kind_of([] { parse_smiles("[13C]"); }) == ChemErrorKind::UnsupportedToken);
    CHECK(kind_of([] { parse_smiles("[Fe]"); }) == ChemErrorKind::UnknownElement);
    CHECK(kind_of([] { parse_smiles("CC(C"); }) == ChemErrorKind::UnbalancedBranch);
    CHECK(kind_of([] { parse_smiles("CC)C"); }) == ChemErrorKind::UnbalancedBranch);
    CHECK(kind_of([] { parse_smiles("C1CC"); }) == ChemErrorKind::DanglingRingClosure);
    CHECK(kind_of([] { parse_smiles("C11"); }) == ChemErrorKind::DanglingRingClosure);
    CHECK(kind_of([] { parse_smiles("C="); }) == ChemErrorKind::UnsupportedToken);
    CHECK(kind_of([] { parse_smiles("=C"); }) == ChemErrorKind::UnsupportedToken);
}

TEST_CASE("composition parsing") {
    CHECK(parse_composition("Fe2N") == std::map<std::string, int>{{"Fe", 2}, {"N", 1}});
    CHECK(parse_composition("LiCoO2") ==
          std::map<std::string, int>{{"Co", 1}, {"Li", 1}, {"O", 2}});
    CHECK(parse_composition("Ca(OH)2") ==
          std::map<std::string, int>{{"Ca", 1}, {"H", 2}, {"O", 2}});
    CHECK(parse_composition("Al2(SO4)3") ==
          std::map<std::string, int>{{"Al", 2}, {"O", 12}, {"S", 3}});
    CHECK(formula_atom_count(parse_composition("Fe2N")) == 3);
    CHECK(formula_atom_count(parse_composition("Al2(SO4)3")) == 17);
    CHECK(kind_of([] { parse_composition(""); }) == ChemErrorKind::UnsupportedToken);
    CHECK(kind_of([] { parse_composition("Fe2("); }) == ChemErrorKind::UnbalancedBranch);
    CHECK(kind_of([] { parse_composition("Fe2)"); }) == ChemErrorKind::UnbalancedBranch);
    CHECK(kind_of([] { parse_composition("2Fe"); }) == ChemErrorKind::UnsupportedToken);
}

TEST_CASE("drugability screen") {
    CHECK(lipinski_drugable(151.162, 3, 2, 0.46, true));
    CHECK_FALSE(lipinski_drugable(853.888, 14, 4, 2.5, false));
    // boundary semantics: strict on weight and logp, inclusive on the counts
    CHECK_FALSE(lipinski_drugable(500.0, 3, 2, 1.0, true));
    CHECK(lipinski_drugable(499.999, 10, 5, 4.999, true));
    CHECK_FALSE(lipinski_drugable(100.0, 11, 0, 1.0, true));
    CHECK_FALSE(lipinski_drugable(100.0, 0, 6, 1.0, true));
    CHECK_FALSE(lipinski_drugable(100.0, 0, 0, 5.0, true));
    CHECK_FALSE(lipinski_drugable(100.0, 0, 0, 1.0, false));

    // brute-force cross-check against the negated-failure formulation
    std::vector<double> mws = {100, 499.999, 500, 600};
    std::vector<int> counts = {0, 5, 6, 10, 11};
    std::vector<double> logps = {-1, 4.999, 5, 7};
    for (double mw : mws)
        for (int acc : counts)
            for (int don : counts)
                for (double lp : logps)
                    for (bool sol : {false, true}) {
                        bool fails = mw >= 500 || acc > 10 || don > 5 || lp >= 5 || !sol;
                        CHECK(lipinski_drugable(mw, acc, don, lp, sol) == !fails);
                    }
}

TEST_CASE("enzyme classes") {
    CHECK(ec_category("1.1.1.363") == EnzymeCategory::Oxidoreductases);
    CHECK(ec_category("2.7.7.7") == EnzymeCategory::Transferases);
    CHECK(ec_category("3.2.1.17") == EnzymeCategory::Hydrolases);
    CHECK(ec_category("4.2.1.1") == EnzymeCategory::Lyases);
    CHECK(ec_category("5.3.1.9") == EnzymeCategory::Isomerases);
    CHECK(ec_category("6.3.4.13") == EnzymeCategory::Ligases);
    CHECK(ec_category("7.1.1.2") == EnzymeCategory::Translocases);
    CHECK(ec_category("7") == EnzymeCategory::Translocases);
    CHECK(std::string(to_string(ec_category("1.1.1.363"))) == "Oxidoreductases");

    for (const char* bad : {"", "0.1", "8.1", "1.2.3.4.5", "a.b", "1..2", " 1.1", "1.-2"})
        CHECK(kind_of([bad] { ec_category(bad); }) == ChemErrorKind::MalformedEc);
}

TEST_CASE("cell volume") {
    Lattice cubic{5, 5, 5, 90, 90, 90};
    CHECK(cell_volume_a3(cubic) == 125.0);  // right angles collapse the discriminant to 1
    CHECK(cell_volume_cm3(cubic) == doctest::Approx(1.25e-22).epsilon(1e-12));

    // hexagonal closed form sqrt(3)/2 * a^2 * c against the triclinic expression
    Lattice hex{4.75, 4.75, 4.32, 90, 90, 120};
    double closed = std::sqrt(3.0) / 2.0 * 4.75 * 4.75 * 4.32;
    CHECK(cell_volume_a3(hex) == doctest::Approx(closed).epsilon(1e-12));

    // orthorhombic: plain product
    CHECK(cell_volume_a3({2, 3, 4, 90, 90, 90}) == doctest::Approx(24.0).epsilon(1e-12));

    CHECK(kind_of([] { cell_volume_a3({0, 1, 1, 90, 90, 90}); }) == ChemErrorKind::DegenerateCell);
    CHECK(kind_of([] { cell_volume_a3({1, 1, 1, 180, 90, 90}); }) ==
          ChemErrorKind::DegenerateCell);
    // flat cell: alpha + beta + gamma degenerate
    CHECK(kind_of([] { cell_volume_a3({1, 1, 1, 30, 30, 60}); }) == ChemErrorKind::DegenerateCell);
}

TEST_CASE("crystal density") {
    Lattice cubic{5, 5, 5, 90, 90, 90};
    CHECK(crystal_density(cubic, 150.0, 1) == doctest::Approx(1.9926).epsilon(1e-4));

    // iron nitride cell: frozen from sqrt(3)/2 * 4.75^2 * 4.32 = 84.4115 A^3,
    // FW 125.71, Z = 3
    Lattice fe2n{4.75, 4.75, 4.32, 90, 90, 120};
    CHECK(crystal_density(fe2n, 125.71, 3) == doctest::Approx(7.4189).epsilon(2e-4));

    // doubling Z doubles the density
    CHECK(crystal_density(cubic, 150.0, 2) ==
          doctest::Approx(2 * crystal_density(cubic, 150.0, 1)).epsilon(1e-12));
    CHECK(crystal_density(cubic, 0.0, 1) == 0.0);
    CHECK(kind_of([] { crystal_density({5, 5, 5, 90, 90, 90}, 150.0, 0); }) ==
          ChemErrorKind::DegenerateCell);
    CHECK(kind_of([] { crystal_density({5, 5, 5, 90, 90, 90}, -1.0, 1); }) ==
          ChemErrorKind::DegenerateCell);
}

TEST_CASE("density scale invariance") {
    // rho(k * lengths) = rho / k^3 for any valid cell
    SplitMix64 rng(20240817);
    for (int i = 0; i < 200; ++i) {
        Lattice cell;
        cell.a = 2.0 + (rng.next() % 1000) / 100.0;
        cell.b = 2.0 + (rng.next() % 1000) / 100.0;
        cell.c = 2.0 + (rng.next() % 1000) / 100.0;
        cell.alpha = 60.0 + (rng.next() % 600) / 10.0;
        cell.beta = 60.0 + (rng.next() % 600) / 10.0;
        cell.gamma = 60.0 + (rng.next() % 600) / 10.0;
        double base;
        try {
            base = crystal_density(cell, 200.0, 2);
        } catch (const ChemError&) {
            continue;  // randomly degenerate angle triple
        }
        double k = 1.0 + (rng.next() % 300) / 100.0;
        Lattice scaled = cell;
        scaled.a *= k;
        scaled.b *= k;
        scaled.c *= k;
        double expect = base / (k * k * k);
        CHECK(crystal_density(scaled, 200.0, 2) == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("hull stability") {
    CHECK(stable_on_hull(0.0));
    CHECK(stable_on_hull(1e-12));
    CHECK_FALSE(stable_on_hull(0.060));
    CHECK_FALSE(stable_on_hull(0.001));
    CHECK(kind_of([] { stable_on_hull(-0.5); }) == ChemErrorKind::NegativeEhull);
    CHECK(stable_on_hull(-1e-12));  // numeric zero from upstream rounding
}

TEST_CASE("metallicity and ordering") {
    CHECK(metallic(0.0));
    CHECK(metallic(0.01));
    CHECK_FALSE(metallic(0.011));
    CHECK_FALSE(metallic(5.0));
    CHECK(magnetic_ordering(3.00) == MagneticOrdering::FerroOrFerri);
    CHECK(magnetic_ordering(0.0) == MagneticOrdering::AfmOrNone);
    CHECK(magnetic_ordering(0.50) == MagneticOrdering::AfmOrNone);
    CHECK(magnetic_ordering(0.501) == MagneticOrdering::FerroOrFerri);
    CHECK(magnetic_ordering(-2.0) == MagneticOrdering::FerroOrFerri);
}

namespace {

// Grammar-driven generator: every emitted string is inside the supported
// subset, so the parser must accept all of them.
std::string random_smiles(SplitMix64& rng) {
    static const std::vector<std::string> atoms = {"C", "C", "C", "N", "O", "S",
                                                   "P", "F", "Cl", "Br", "I"};
    static const std::vector<std::string> bonds = {"", "", "", "-", "=", "#"};
    std::string out;
    int ring_digit = 0;      // 0 = no ring open
    int ring_opened_at = -1;
    int atom_index = -1;
    int length = 2 + static_cast<int>(rng.below(7));
    for (int i = 0; i < length; ++i) {
        if (i > 0) out += bonds[rng.below(bonds.size())];
        out += atoms[rng.below(atoms.size())];
        ++atom_index;
        if (ring_digit == 0 && rng.below(4) == 0) {
            ring_digit = 1 + static_cast<int>(rng.below(9));
            ring_opened_at = atom_index;
            out += std::to_string(ring_digit);
        } else if (ring_digit != 0 && ring_opened_at != atom_index && rng.below(3) == 0) {
            out += std::to_string(ring_digit);
            ring_digit = 0;
        }
        if (rng.below(5) == 0) {
            out += "(";
            out += atoms[rng.below(atoms.size())];
            ++atom_index;
            out += ")";
        }
    }
    if (ring_digit != 0) {
        // close on a fresh atom so the ring never bites its own tail
        out += "C" + std::to_string(ring_digit);
    }
    return out;
}

}  // namespace

TEST_CASE("parser totality over generated strings") {
    SplitMix64 rng(99173);
    for (int i = 0; i < 2000; ++i) {
        std::string s = random_smiles(rng);
        CAPTURE(s);
        AtomCounts counts;
        REQUIRE_NOTHROW(counts = atom_counts(s));
        for (const auto& [el, n] : counts) CHECK(n >= 1);

        // weight from the SMILES path must match a re-derivation through the
        // printed formula and the reference mass table
        std::string formula = hill_formula(counts);
        auto comp = parse_composition(formula);
        CHECK(AtomCounts(comp.begin(), comp.end()) == counts);
        CHECK(molecular_weight(counts) == doctest::Approx(ref_weight(counts)).epsilon(1e-9));
    }
}
