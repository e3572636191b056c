#include "chemprompt/chem.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace chemprompt::chem {
namespace {

constexpr double kPi = 3.14159265358979323846;

const std::map<std::string, double>& mass_table() {
    static const std::map<std::string, double> table = {
        {"H", 1.008},  {"B", 10.81},  {"C", 12.01},  {"N", 14.01},
        {"O", 16.00},  {"F", 19.00},  {"P", 30.97},  {"S", 32.06},
        {"Cl", 35.45}, {"Br", 79.90}, {"I", 126.90},
    };
    return table;
}

// Default valences used to fill hydrogens on organic-subset atoms; the
// smallest valence not below the bond order total wins.
const std::map<std::string, std::vector<int>>& valence_table() {
    static const std::map<std::string, std::vector<int>> table = {
        {"B", {3}},  {"C", {4}}, {"N", {3}},  {"O", {2}},      {"P", {3, 5}},
        {"S", {2, 4, 6}}, {"F", {1}}, {"Cl", {1}}, {"Br", {1}}, {"I", {1}},
    };
    return table;
}

bool supported_element(const std::string& sym) { return mass_table().count(sym) != 0; }

// Full periodic-table symbols, for tokenizing bracket atoms; anything parsed
// here but absent from the mass table reports UnknownElement.
bool periodic_symbol(const std::string& sym) {
    static const std::map<std::string, bool> symbols = [] {
        std::map<std::string, bool> m;
        for (const char* s :
             {"H",  "He", "Li", "Be", "B",  "C",  "N",  "O",  "F",  "Ne", "Na", "Mg", "Al",
              "Si", "P",  "S",  "Cl", "Ar", "K",  "Ca", "Sc", "Ti", "V",  "Cr", "Mn", "Fe",
              "Co", "Ni", "Cu", "Zn", "Ga", "Ge", "As", "Se", "Br", "Kr", "Rb", "Sr", "Y",
              "Zr", "Nb", "Mo", "Tc", "Ru", "Rh", "Pd", "Ag", "Cd", "In", "Sn", "Sb", "Te",
              "I",  "Xe", "Cs", "Ba", "La", "Ce", "Pr", "Nd", "Pm", "Sm", "Eu", "Gd", "Tb",
              "Dy", "Ho", "Er", "Tm", "Yb", "Lu", "Hf", "Ta", "W",  "Re", "Os", "Ir", "Pt",
              "Au", "Hg", "Tl", "Pb", "Bi", "Po", "At", "Rn", "Fr", "Ra", "Ac", "Th", "Pa",
              "U",  "Np", "Pu", "Am", "Cm", "Bk", "Cf", "Es", "Fm", "Md", "No", "Lr"})
            m[s] = true;
        return m;
    }();
    return symbols.count(sym) != 0;
}

[[noreturn]] void fail(ChemErrorKind kind, const std::string& msg) { throw ChemError(kind, msg); }

// Bond orders; 0 encodes "not written", resolved from atom aromaticity.
constexpr double kUnspecified = 0.0;

struct Parser {
    const std::string& s;
    size_t pos = 0;
    Molecule mol;
    int current = -1;               // attachment atom for the next bond
    double pending_bond = kUnspecified;
    std::vector<int> branch_stack;
    // ring number -> (atom index, bond symbol at the opening side)
    std::map<int, std::pair<int, double>> open_rings;

    explicit Parser(const std::string& text) : s(text) {}

    char peek() const { return pos < s.size() ? s[pos] : '\0'; }
    char take() { return s[pos++]; }
    bool done() const { return pos >= s.size(); }

    int add_atom(Atom atom) {
        mol.atoms.push_back(std::move(atom));
        mol.bond_order_sum.push_back(0.0);
        return static_cast<int>(mol.atoms.size()) - 1;
    }

    void bond(int u, int v, double order) {
        if (order == kUnspecified)
            order = (mol.atoms[u].aromatic && mol.atoms[v].aromatic) ? 1.5 : 1.0;
        mol.bond_order_sum[u] += order;
        mol.bond_order_sum[v] += order;
    }

    void attach(int atom) {
        if (current >= 0) bond(current, atom, pending_bond);
        else if (pending_bond != kUnspecified)
            fail(ChemErrorKind::UnsupportedToken, "bond symbol before any atom");
        pending_bond = kUnspecified;
        current = atom;
    }

    void ring_closure(int number) {
        if (current < 0)
            fail(ChemErrorKind::UnsupportedToken, "ring closure before any atom");
        auto it = open_rings.find(number);
        if (it == open_rings.end()) {
            open_rings.emplace(number, std::make_pair(current, pending_bond));
        } else {
            auto [other, open_bond] = it->second;
            open_rings.erase(it);
            if (other == current)
                fail(ChemErrorKind::DanglingRingClosure, "ring bond to the same atom");
            double order = pending_bond;
            if (order == kUnspecified) order = open_bond;
            else if (open_bond != kUnspecified && open_bond != order)
                fail(ChemErrorKind::UnsupportedToken, "conflicting ring bond orders");
            bond(other, current, order);
        }
        pending_bond = kUnspecified;
    }

    std::string read_organic_symbol() {
        char c = take();
        // two-letter symbols before their one-letter prefixes
        if (c == 'C' && peek() == 'l') { take(); return "Cl"; }
        if (c == 'B' && peek() == 'r') { take(); return "Br"; }
        switch (c) {
            case 'B': case 'C': case 'N': case 'O': case 'P': case 'S':
            case 'F': case 'I':
                return std::string(1, c);
            case 'b': case 'c': case 'n': case 'o': case 'p': case 's':
                return std::string(1, c);
            default:
                fail(ChemErrorKind::UnsupportedToken,
                     std::string("unsupported token '") + c + "' at offset " +
                         std::to_string(pos - 1));
        }
    }

    Atom read_bracket_atom() {
        Atom atom;
        atom.bracket = true;
        if (done()) fail(ChemErrorKind::UnbalancedBranch, "unterminated bracket atom");
        if (std::isdigit(static_cast<unsigned char>(peek())))
            fail(ChemErrorKind::UnsupportedToken, "isotope labels are not supported");
        // element symbol: uppercase + optional lowercase, or aromatic lowercase
        std::string sym;
        char c = take();
        if (std::isupper(static_cast<unsigned char>(c))) {
            sym = c;
            if (!done() && std::islower(static_cast<unsigned char>(peek()))) {
                std::string two = sym + peek();
                // a lowercase continuation is part of the symbol only when it
                // forms one; [CH4] must read as C + hcount
                if (periodic_symbol(two)) { sym = two; take(); }
            }
        } else if (std::islower(static_cast<unsigned char>(c)) &&
                   std::string("bcnops").find(c) != std::string::npos) {
            sym = c;
            atom.aromatic = true;
        } else {
            fail(ChemErrorKind::UnsupportedToken,
                 std::string("bad bracket atom start '") + c + "'");
        }
        if (atom.aromatic) sym[0] = static_cast<char>(std::toupper(sym[0]));
        if (!supported_element(sym))
            fail(ChemErrorKind::UnknownElement, "element '" + sym + "' is outside the supported set");
        atom.element = sym;

        while (!done() && peek() != ']') {
            char t = take();
            if (t == '@') continue;  // stereo centre, composition-irrelevant
            if (t == 'H') {
                atom.hydrogens = 1;
                if (std::isdigit(static_cast<unsigned char>(peek()))) {
                    atom.hydrogens = 0;
                    while (std::isdigit(static_cast<unsigned char>(peek())))
                        atom.hydrogens = atom.hydrogens * 10 + (take() - '0');
                }
            } else if (t == '+' || t == '-') {
                int sign = t == '+' ? 1 : -1;
                int magnitude = 1;
                if (std::isdigit(static_cast<unsigned char>(peek()))) {
                    magnitude = 0;
                    while (std::isdigit(static_cast<unsigned char>(peek())))
                        magnitude = magnitude * 10 + (take() - '0');
                } else {
                    while (peek() == t) { take(); ++magnitude; }
                }
                atom.charge = sign * magnitude;
            } else {
                fail(ChemErrorKind::UnsupportedToken,
                     std::string("unsupported bracket token '") + t + "'");
            }
        }
        if (done()) fail(ChemErrorKind::UnbalancedBranch, "unterminated bracket atom");
        take();  // ']'
        return atom;
    }

    void run() {
        if (s.empty()) fail(ChemErrorKind::UnsupportedToken, "empty SMILES");
        while (!done()) {
            char c = peek();
            if (c == '-') { take(); pending_bond = 1.0; }
            else if (c == '=') { take(); pending_bond = 2.0; }
            else if (c == '#') { take(); pending_bond = 3.0; }
            else if (c == ':') { take(); pending_bond = 1.5; }
            else if (c == '/' || c == '\\') { take(); pending_bond = 1.0; }  // cis/trans marker
            else if (c == '(') {
                take();
                if (current < 0)
                    fail(ChemErrorKind::UnbalancedBranch, "branch before any atom");
                branch_stack.push_back(current);
            } else if (c == ')') {
                take();
                if (branch_stack.empty())
                    fail(ChemErrorKind::UnbalancedBranch, "unmatched ')'");
                current = branch_stack.back();
                branch_stack.pop_back();
            } else if (std::isdigit(static_cast<unsigned char>(c))) {
                ring_closure(take() - '0');
            } else if (c == '%') {
                take();
                if (!std::isdigit(static_cast<unsigned char>(peek())))
                    fail(ChemErrorKind::UnsupportedToken, "'%' without ring number");
                int number = 0;
                for (int i = 0; i < 2 && std::isdigit(static_cast<unsigned char>(peek())); ++i)
                    number = number * 10 + (take() - '0');
                ring_closure(number);
            } else if (c == '[') {
                take();
                attach(add_atom(read_bracket_atom()));
            } else if (c == '.') {
                fail(ChemErrorKind::UnsupportedToken, "disconnected fragments are not supported");
            } else if (c == '*' || c == '~') {
                fail(ChemErrorKind::UnsupportedToken,
                     std::string("unsupported token '") + c + "'");
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                fail(ChemErrorKind::UnsupportedToken, "whitespace inside SMILES");
            } else {
                std::string sym = read_organic_symbol();
                Atom atom;
                atom.aromatic = std::islower(static_cast<unsigned char>(sym[0])) != 0;
                if (atom.aromatic) sym[0] = static_cast<char>(std::toupper(sym[0]));
                atom.element = sym;
                attach(add_atom(std::move(atom)));
            }
        }
        if (!branch_stack.empty())
            fail(ChemErrorKind::UnbalancedBranch, "unclosed '('");
        if (!open_rings.empty())
            fail(ChemErrorKind::DanglingRingClosure,
                 "ring bond " + std::to_string(open_rings.begin()->first) + " never closed");
        if (pending_bond != kUnspecified)
            fail(ChemErrorKind::UnsupportedToken, "trailing bond symbol");
        assign_implicit_hydrogens();
    }

    void assign_implicit_hydrogens() {
        for (size_t i = 0; i < mol.atoms.size(); ++i) {
            Atom& atom = mol.atoms[i];
            if (atom.bracket) continue;  // bracket atoms carry only written hydrogens
            auto it = valence_table().find(atom.element);
            if (it == valence_table().end()) continue;
            int needed = static_cast<int>(std::ceil(mol.bond_order_sum[i] - 1e-9));
            atom.hydrogens = 0;
            for (int v : it->second) {
                if (v >= needed) { atom.hydrogens = v - needed; break; }
            }
        }
    }
};

}  // namespace

Molecule parse_smiles(const std::string& smiles) {
    Parser p(smiles);
    p.run();
    return std::move(p.mol);
}

AtomCounts atom_counts(const Molecule& mol) {
    AtomCounts counts;
    for (const Atom& atom : mol.atoms) {
        counts[atom.element] += 1;
        if (atom.hydrogens > 0) counts["H"] += atom.hydrogens;
    }
    return counts;
}

AtomCounts atom_counts(const std::string& smiles) { return atom_counts(parse_smiles(smiles)); }

std::string hill_formula(const AtomCounts& counts) {
    std::vector<std::string> order;
    bool has_carbon = counts.count("C") != 0;
    if (has_carbon) {
        order.push_back("C");
        if (counts.count("H")) order.push_back("H");
    }
    for (const auto& [el, n] : counts) {
        if (has_carbon && (el == "C" || el == "H")) continue;
        order.push_back(el);  // std::map iterates alphabetically
    }
    std::string out;
    for (const std::string& el : order) {
        out += el;
        int n = counts.at(el);
        if (n > 1) out += std::to_string(n);
    }
    return out;
}

std::string molecular_formula(const std::string& smiles) {
    return hill_formula(atom_counts(smiles));
}

double atomic_mass(const std::string& element) {
    auto it = mass_table().find(element);
    if (it == mass_table().end())
        fail(ChemErrorKind::UnknownElement, "no mass for element '" + element + "'");
    return it->second;
}

double molecular_weight(const AtomCounts& counts) {
    double total = 0;
    for (const auto& [el, n] : counts) total += atomic_mass(el) * n;
    return total;
}

double molecular_weight(const std::string& smiles) {
    return molecular_weight(atom_counts(smiles));
}

int h_bond_acceptors(const std::string& smiles) {
    Molecule mol = parse_smiles(smiles);
    int n = 0;
    for (const Atom& atom : mol.atoms)
        if (atom.element == "N" || atom.element == "O") ++n;
    return n;
}

int h_bond_donors(const std::string& smiles) {
    Molecule mol = parse_smiles(smiles);
    int n = 0;
    for (const Atom& atom : mol.atoms)
        if ((atom.element == "N" || atom.element == "O") && atom.hydrogens >= 1) ++n;
    return n;
}

int distinct_element_count(const AtomCounts& counts) { return static_cast<int>(counts.size()); }

namespace {

void parse_group(const std::string& s, size_t& pos, int multiplier,
                 std::map<std::string, int>& out) {
    while (pos < s.size() && s[pos] != ')') {
        char c = s[pos];
        if (c == '(') {
            ++pos;
            std::map<std::string, int> inner;
            parse_group(s, pos, 1, inner);
            if (pos >= s.size() || s[pos] != ')')
                fail(ChemErrorKind::UnbalancedBranch, "unclosed '(' in formula");
            ++pos;
            int count = 0;
            while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos])))
                count = count * 10 + (s[pos++] - '0');
            if (count == 0) count = 1;
            for (const auto& [el, n] : inner) out[el] += n * count * multiplier;
        } else if (std::isupper(static_cast<unsigned char>(c))) {
            std::string sym(1, s[pos++]);
            if (pos < s.size() && std::islower(static_cast<unsigned char>(s[pos])))
                sym += s[pos++];
            int count = 0;
            while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos])))
                count = count * 10 + (s[pos++] - '0');
            if (count == 0) count = 1;
            out[sym] += count * multiplier;
        } else {
            fail(ChemErrorKind::UnsupportedToken,
                 std::string("unexpected '") + c + "' in formula at offset " +
                     std::to_string(pos));
        }
    }
}

}  // namespace

std::map<std::string, int> parse_composition(const std::string& formula) {
    if (formula.empty()) fail(ChemErrorKind::UnsupportedToken, "empty formula");
    std::map<std::string, int> out;
    size_t pos = 0;
    parse_group(formula, pos, 1, out);
    if (pos != formula.size()) fail(ChemErrorKind::UnbalancedBranch, "unmatched ')' in formula");
    return out;
}

int formula_atom_count(const std::map<std::string, int>& composition) {
    int total = 0;
    for (const auto& [el, n] : composition) total += n;
    return total;
}

bool lipinski_drugable(double molecular_weight, int acceptors, int donors, double logp,
                       bool soluble) {
    return molecular_weight < 500.0 && acceptors <= 10 && donors <= 5 && logp < 5.0 && soluble;
}

const char* to_string(EnzymeCategory c) {
    switch (c) {
        case EnzymeCategory::Oxidoreductases: return "Oxidoreductases";
        case EnzymeCategory::Transferases: return "Transferases";
        case EnzymeCategory::Hydrolases: return "Hydrolases";
        case EnzymeCategory::Lyases: return "Lyases";
        case EnzymeCategory::Isomerases: return "Isomerases";
        case EnzymeCategory::Ligases: return "Ligases";
        case EnzymeCategory::Translocases: return "Translocases";
    }
    return "?";
}

EnzymeCategory ec_category(const std::string& ec) {
    auto parts = [&] {
        std::vector<std::string> out;
        size_t start = 0;
        for (size_t i = 0; i <= ec.size(); ++i) {
            if (i == ec.size() || ec[i] == '.') {
                out.push_back(ec.substr(start, i - start));
                start = i + 1;
            }
        }
        return out;
    }();
    if (parts.empty() || parts.size() > 4)
        fail(ChemErrorKind::MalformedEc, "EC number needs 1 to 4 components: '" + ec + "'");
    for (const std::string& part : parts) {
        if (part.empty() || !std::all_of(part.begin(), part.end(), [](unsigned char c) {
                return std::isdigit(c) != 0;
            }))
            fail(ChemErrorKind::MalformedEc, "non-numeric EC component in '" + ec + "'");
    }
    int cls = std::stoi(parts[0]);
    if (cls < 1 || cls > 7)
        fail(ChemErrorKind::MalformedEc, "EC class out of range in '" + ec + "'");
    return static_cast<EnzymeCategory>(cls - 1);
}

double cell_volume_a3(const Lattice& cell) {
    if (!(cell.a > 0) || !(cell.b > 0) || !(cell.c > 0))
        fail(ChemErrorKind::DegenerateCell, "cell lengths must be positive");
    for (double angle : {cell.alpha, cell.beta, cell.gamma})
        if (!(angle > 0) || !(angle < 180))
            fail(ChemErrorKind::DegenerateCell, "cell angles must lie in (0, 180)");
    double ca = std::cos(cell.alpha * kPi / 180.0);
    double cb = std::cos(cell.beta * kPi / 180.0);
    double cg = std::cos(cell.gamma * kPi / 180.0);
    double disc = 1.0 - ca * ca - cb * cb - cg * cg + 2.0 * ca * cb * cg;
    if (disc <= 0)
        fail(ChemErrorKind::DegenerateCell, "angles do not close a three-dimensional cell");
    return cell.a * cell.b * cell.c * std::sqrt(disc);
}

double cell_volume_cm3(const Lattice& cell) { return cell_volume_a3(cell) * 1e-24; }

double crystal_density(const Lattice& cell, double formula_weight, int z) {
    if (formula_weight < 0)
        fail(ChemErrorKind::DegenerateCell, "formula weight must be non-negative");
    if (z < 1) fail(ChemErrorKind::DegenerateCell, "formula units per cell must be >= 1");
    return formula_weight * z / (cell_volume_cm3(cell) * kAvogadro);
}

bool stable_on_hull(double e_hull_ev_per_atom) {
    if (e_hull_ev_per_atom < -1e-9)
        fail(ChemErrorKind::NegativeEhull, "energy above hull cannot be negative");
    return e_hull_ev_per_atom <= 1e-9;
}

bool metallic(double band_gap_ev) { return band_gap_ev <= 0.01; }

MagneticOrdering magnetic_ordering(double total_magnetization_mub) {
    return std::fabs(total_magnetization_mub) > 0.50 ? MagneticOrdering::FerroOrFerri
                                                     : MagneticOrdering::AfmOrNone;
}

}  // namespace chemprompt::chem
