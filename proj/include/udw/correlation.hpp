#pragma once

#include <optional>
#include <string>
#include <vector>

#include "udw/geometry.hpp"
#include "udw/state_assignment.hpp"

namespace udw::correlation {

using quantum::cplx;
using quantum::Mat;
using quantum::Vec;

// Field insertion snapped to the nearest lattice slot and site(s).
struct Insertion {
    geometry::SpacetimePoint center;
    state::Generator op;
};

// width consecutive sites starting at the nearest one, equal weights.
Insertion insertion_at(const lattice::LatticeParams& p, const geometry::SpacetimePoint& x, int width = 1,
                       const state::GeneratorOptions& opt = {});

// Tr[ρ φ_{f₁}⋯φ_{f_n}], operator order = list order.
cplx smeared_wightman(const state::Ensemble& rho, const std::vector<Insertion>& ins, const lattice::LatticeField& f);

struct CorrelationResult {
    cplx value = 0.0;
    std::string prescription;
    std::string state;
    std::vector<geometry::Relation> relations;  // one per insertion
    std::optional<geometry::PrescriptionStatus> status;
    bool conflict = false;
    // Value under the competing prescription when in conflict.
    std::optional<cplx> alternative;
    // d = 2 configuration with no common bridge: raw value, no equality claim.
    bool no_bridge = false;
};

// P1/P2 against the single measurement `label`; the record entry for it decides the inside state.
CorrelationResult n_point_pgm(const std::vector<Insertion>& ins, const state::Scenario& s, const std::string& label,
                              const geometry::PrescriptionOptions& opt = {});

enum class AlgebraicMode { Selective, NonSelectiveAverage };
const char* to_string(AlgebraicMode m);

CorrelationResult n_point_algebraic(const std::vector<Insertion>& ins, const state::Scenario& s, AlgebraicMode mode);

// |Σ_m p_m ω^(m)(L) − ω₀(L)| for the monomial L = Π word, every factor supported in S_M.
double no_signalling_check(const std::vector<state::Generator>& word, const state::Scenario& s,
                           const std::string& label);

}  // namespace udw::correlation
