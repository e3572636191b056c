#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

// Deterministic reference chemistry: SMILES composition, Lipinski screening,
// EC classification, and crystal-cell arithmetic. Everything here is closed
// form; no lookups beyond the built-in mass table.
namespace chemprompt::chem {

enum class ChemErrorKind {
    UnsupportedToken,
    UnbalancedBranch,
    DanglingRingClosure,
    UnknownElement,
    MalformedEc,
    DegenerateCell,
    NegativeEhull,
};

class ChemError : public std::runtime_error {
public:
    ChemError(ChemErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ChemErrorKind kind() const { return kind_; }

private:
    ChemErrorKind kind_;
};

struct Atom {
    std::string element;   // canonical symbol, e.g. "C", "Cl"
    bool aromatic = false;
    int charge = 0;
    int hydrogens = 0;     // explicit (bracket) or assigned implicit count
    bool bracket = false;
};

struct Molecule {
    std::vector<Atom> atoms;
    // parallel to atoms: sum of bond orders at each atom, aromatic bonds as 1.5
    std::vector<double> bond_order_sum;
};

// Supported subset: organic-subset atoms B C N O P S F Cl Br I (+ aromatic
// b c n o p s), bracket atoms of the same elements with charge and explicit
// H count, branches, ring closures (digit and %nn), bond symbols - = # : and
// directional / \ read as single. Isotopes, wildcards, and dot-separated
// fragments are rejected. Stereo markers @ / @@ inside brackets are ignored.
Molecule parse_smiles(const std::string& smiles);

// element -> count including hydrogens
using AtomCounts = std::map<std::string, int>;

AtomCounts atom_counts(const Molecule& mol);
AtomCounts atom_counts(const std::string& smiles);

// Hill order: C first, H second, the rest alphabetical. Without carbon all
// elements sort alphabetically (H2O, not OH2).
std::string hill_formula(const AtomCounts& counts);
std::string molecular_formula(const std::string& smiles);

double atomic_mass(const std::string& element);  // UnknownElement if absent from table
double molecular_weight(const AtomCounts& counts);
double molecular_weight(const std::string& smiles);

int h_bond_acceptors(const std::string& smiles);  // N and O atoms
int h_bond_donors(const std::string& smiles);     // N and O atoms carrying >= 1 H

int distinct_element_count(const AtomCounts& counts);

// Crystal / stoichiometric formula like "Fe2N" or "Ca(OH)2"; syntax-level
// element validation only ([A-Z][a-z]? symbols), arbitrary nesting.
std::map<std::string, int> parse_composition(const std::string& formula);
int formula_atom_count(const std::map<std::string, int>& composition);

// Strict < for molecular weight and LogP, <= for the two counts; solubility
// enters as an upstream boolean.
bool lipinski_drugable(double molecular_weight, int acceptors, int donors, double logp,
                       bool soluble);

enum class EnzymeCategory {
    Oxidoreductases,
    Transferases,
    Hydrolases,
    Lyases,
    Isomerases,
    Ligases,
    Translocases,
};

const char* to_string(EnzymeCategory c);

// "1.1.1.363" -> Oxidoreductases. 1 to 4 dot-separated positive integers,
// class digit 1..7; anything else is MalformedEc.
EnzymeCategory ec_category(const std::string& ec);

struct Lattice {
    double a = 0, b = 0, c = 0;          // lengths, angstrom
    double alpha = 0, beta = 0, gamma = 0;  // angles, degrees
};

// General triclinic volume; reduces to a*b*c for right angles.
double cell_volume_a3(const Lattice& cell);   // angstrom^3, DegenerateCell on invalid geometry
double cell_volume_cm3(const Lattice& cell);  // 1 angstrom^3 = 1e-24 cm^3

constexpr double kAvogadro = 6.02214076e23;

// rho = FW * Z / (V * N_A), g/cm^3
double crystal_density(const Lattice& cell, double formula_weight, int z);

// Energy above hull at (numerically) zero means on the hull.
bool stable_on_hull(double e_hull_ev_per_atom);  // NegativeEhull if below -1e-9

bool metallic(double band_gap_ev);  // gap <= 0.01 eV

enum class MagneticOrdering { FerroOrFerri, AfmOrNone };

// Net moment above 0.50 muB per formula unit implies a ferro- or
// ferrimagnetic ground state; at or below it the net moment is consistent
// with antiferromagnetic or non-magnetic order.
MagneticOrdering magnetic_ordering(double total_magnetization_mub);

}  // namespace chemprompt::chem
