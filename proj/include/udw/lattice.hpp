#pragma once

#include <memory>
#include <vector>

#include "udw/quantum.hpp"

namespace udw::lattice {

using quantum::Mat;
using quantum::Vec;

struct LatticeParams {
    double mass = 1.0;
    double spacing = 1.0;
    int sites = 6;
    int n_max = 3;
    std::size_t dimension_limit = std::size_t{1} << 16;
    // Slot at which the vacuum is prepared; Heisenberg operators refer to it.
    int reference_slot = 0;
};

// Free massive scalar on an open chain, one truncated oscillator per site.
//
// Time is cut into slots of length a: slot k is the open interval ((k-1/2)a, (k+1/2)a) and
// the field is constant inside it. Between slots k and k+1 a brickwork layer acts:
// nearest-neighbour gates exp(2ia φ_j φ_{j+1}/a²) on pairs (j, j+1) with j ≡ k (mod 2),
// then exp(-ia Ω n_j) on every site. Two layers Trotterize exp(-2iaH) for
//   H = Σ_j Ω n_j − Σ_j φ_j φ_{j+1} / a²,   Ω² = m² + 2/a²,   φ_j = (b_j + b_j†)/√(2Ω).
// Each layer moves support by at most one site, so field operators at (k, j) and (k', j')
// commute exactly whenever |j − j'| > |k − k'|. An event inside slot k that is spacelike, in
// the continuum sense, to a box spanning a whole slot k' and lying within half a spacing of site j'
// satisfies that bound.
class LatticeField {
public:
    explicit LatticeField(const LatticeParams& p);

    const LatticeParams& params() const { return p_; }
    int sites() const { return p_.sites; }
    int local_dim() const { return p_.n_max + 1; }
    Eigen::Index dim() const { return dim_; }
    double omega() const { return omega_; }
    double site_position(int j) const { return j * p_.spacing; }
    double slot_time(int k) const { return k * p_.spacing; }
    // Slot whose closed interval contains t (ties go to the later slot).
    int slot_of(double t) const;

    const Mat& phi_local() const { return phi_; }
    const Mat& b_local() const { return b_; }
    const Mat& number_local() const { return num_; }
    // Σ_j w_j φ_j on a block of weights.size() consecutive sites.
    Mat smeared_block(const std::vector<double>& weights) const;

    void apply_block(Vec& v, int first, int count, const Mat& op) const;
    void evolve(Vec& v, int from_slot, int to_slot) const;
    // v ↦ W† O W v with W the evolution from the reference slot to `slot`.
    Vec apply_at(const Vec& v, int slot, int first, int count, const Mat& op) const;

    void apply_hamiltonian(const Vec& in, Vec& out) const;
    Mat hamiltonian_dense() const;
    const Vec& vacuum() const;
    double vacuum_energy() const;
    double vacuum_residual() const;

    static bool lattice_spacelike(int slot_a, int site_a, int slot_b, int site_b) {
        const int dj = site_a > site_b ? site_a - site_b : site_b - site_a;
        const int dk = slot_a > slot_b ? slot_a - slot_b : slot_b - slot_a;
        return dj > dk;
    }

private:
    void layer(Vec& v, int slot, bool inverse) const;

    LatticeParams p_;
    Eigen::Index dim_ = 0;
    double omega_ = 0.0;
    Mat b_, phi_, num_;
    Mat pair_gate_, pair_gate_inv_, pair_h_;
    Vec site_phase_;
    Eigen::VectorXd occupation_;

    struct VacuumCache {
        Vec state;
        double energy = 0.0;
        double residual = 0.0;
        bool ready = false;
    };
    std::shared_ptr<VacuumCache> vac_;
};

}  // namespace udw::lattice
