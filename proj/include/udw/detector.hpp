#pragma once

#include <optional>
#include <string>
#include <vector>

#include "udw/geometry.hpp"
#include "udw/lattice.hpp"
#include "udw/quantum.hpp"

namespace udw::detector {

using quantum::cplx;
using quantum::Mat;
using quantum::Vec;

// Compactly supported switching χ(τ).
struct Switching {
    std::string name = "cos2";  // cos2 | box
    double duration = 1.0;
    double center = 0.0;

    double operator()(double tau) const;
    double on() const { return center - 0.5 * duration; }
    double off() const { return center + 0.5 * duration; }
};

// Compactly supported spatial profile, normalised to unit integral.
struct Smearing {
    std::string name = "bump";  // bump | box
    double radius = 0.1;

    double operator()(double x) const;
    // Integral of the profile over [a, b].
    double integral(double a, double b) const;
};

struct DetectorSpec {
    std::string label = "A";
    double gap = 1.0;
    double coupling = 0.1;
    Switching switching;
    Smearing smearing;
    std::vector<double> position{0.0};
    Vec initial_state = Vec::Unit(2, 0);
    // Columns are the measurement basis vectors b_i.
    Mat basis = Mat::Identity(2, 2);
    std::optional<geometry::BoxRegion> output;
    std::optional<geometry::BoxRegion> delay;

    void validate() const;
};

// Where a detector couples to the lattice: one slot, a contiguous block of sites.
struct LatticeCoupling {
    int slot = 0;
    int first_site = 0;
    std::vector<double> weights;
    Mat field;  // Σ w_j φ_j on the block

    int count() const { return static_cast<int>(weights.size()); }
};

// Slot and site weights only; `field` is left empty.
LatticeCoupling couple_sites(const DetectorSpec& spec, const lattice::LatticeParams& p);
LatticeCoupling couple(const DetectorSpec& spec, const lattice::LatticeField& field);

// m(τ) = e^{iωτ}|1⟩⟨0| + e^{-iωτ}|0⟩⟨1|
Mat monopole(double gap, double tau);
// λ χ(τ) m(τ) ⊗ φ_f on ℂ² ⊗ block.
quantum::Operator interaction_hamiltonian(const DetectorSpec& spec, const Mat& field, double tau);

struct Evolution {
    Mat unitary;
    int steps = 0;
    double error_estimate = 0.0;
    double unitarity_residual = 0.0;
};

// Time-ordered product of exact midpoint step exponentials; error from comparison with twice the steps.
Evolution evolve(const DetectorSpec& spec, const Mat& field, int steps, double max_error = 1e-6);

struct KrausSet {
    std::vector<Mat> ops;
    int slot = 0;
    int first_site = 0;
    int count = 1;

    double completeness_residual() const;
};

KrausSet kraus_from_detector(const Mat& unitary, const Vec& gamma, const Mat& basis, double tol);
std::vector<double> povm_probabilities(const quantum::DensityState& rho, const KrausSet& ks);

// Cutoff leakage ‖P_top U P_0‖: amplitude pushed from the block vacuum onto occupation n_max.
double cutoff_leakage(const Mat& unitary, int local_dim, int count);

// Continuum anatomy: M_c = [τ_on, τ_off] × (x₀ + supp f), M_o and M_d defaulted when absent.
geometry::MeasurementRegion measurement_region_of(const DetectorSpec& spec);
// Widened to the full lattice slot and the coupled sites, as required for exact causality on the lattice.
geometry::MeasurementRegion lattice_measurement_region(const DetectorSpec& spec, const LatticeCoupling& c,
                                                       const lattice::LatticeParams& p);

struct DetectorRun {
    DetectorSpec spec;
    LatticeCoupling coupling;
    Evolution evolution;
    KrausSet kraus;
    geometry::MeasurementRegion region;
    double leakage = 0.0;
};

DetectorRun run_detector(const DetectorSpec& spec, const lattice::LatticeField& field, int steps,
                         double completeness_tol);

}  // namespace udw::detector
