#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "udw/detector.hpp"
#include "udw/state_assignment.hpp"

namespace udw::oracle {

using quantum::cplx;
using quantum::Mat;
using quantum::Vec;

struct TrialReport {
    std::string suite;
    std::size_t trials = 0;
    std::size_t failures = 0;
    std::size_t degenerate = 0;
    double worst_residual = 0.0;
    std::vector<std::string> witnesses;
    // Expected to find nothing; passes when no witness appears.
    bool designed_negative = false;

    bool passed() const { return failures == 0; }
    // One machine-readable line, fixed formatting.
    std::string summary() const;
};

// |Tr[ρ (Γ⊗L)] − Tr[ρ (𝕀⊗L)] Tr[ρ (Γ⊗𝕀)]| for ρ = |ψ⟩⟨ψ| on C^det ⊗ C^field, ψ indexed det-major.
double factorization_residual(const Vec& psi, int det_dim, int field_dim, const Mat& gamma, const Mat& l);

// Random entangled ψ and effects Γ; equality over the matrix-unit basis must match Γ ∝ 𝕀.
TrialReport factorization_lemma_trial(int det_dim, std::uint64_t seed, std::size_t trials = 100, int max_field_dim = 8);

struct SeparationOptions {
    int a = 1;
    int b = 1;
    std::size_t random_observables = 20;
    std::uint64_t seed = 1;
    state::GeneratorOptions generators;
};

struct SeparationResult {
    TrialReport report;
    double noise_floor = 0.0;
    double chain_residual = 0.0;       // ρ₁…ρ₄ on S_AB
    double compatibility_residual = 0.0;  // ρ₅~ρ₆, ρ₇~ρ₈
    double min_separation = 0.0;
    std::vector<std::pair<std::string, double>> separations;
};

// ρ₂ vs ρ₅, ρ₃ vs ρ₇ and ρ₉ vs ρ₁…ρ₈ on their regions, by direct branch sums.
SeparationResult nine_state_separation_trial(const state::Scenario& s, const SeparationOptions& opt = {});

// Outcome a is non-informative iff ‖K_a†K_a − c𝕀‖ ≤ tol for the best c.
std::vector<bool> trivial_kraus_detector(const detector::KrausSet& ks, double tol = 1e-9);

struct BellReport {
    double before = 0.0;
    double after = 0.0;  // worst over outcomes
    double marginal_residual = 0.0;
    std::vector<double> angles;
};

double chsh(const Mat& rho, const std::vector<double>& angles);
double optimize_chsh(const Mat& rho, std::uint64_t seed, int restarts, std::vector<double>* best = nullptr);
BellReport bell_update_demo(std::uint64_t seed, int restarts = 20);

struct GeometryCheckOptions {
    int dimension = 3;
    std::size_t trials = 100;
    std::size_t convexity_samples = 10000;
    std::size_t avoidance_samples = 2000;
    std::uint64_t seed = 1;
};

// Bridges avoid J(M) and are causally convex; margin diamonds avoid J(M).
TrialReport geometry_cross_check(const GeometryCheckOptions& opt);
// d = 2 with the two points on opposite sides of M: every trial must raise NoBridge.
TrialReport opposite_side_check(std::size_t trials, std::uint64_t seed);

}  // namespace udw::oracle
