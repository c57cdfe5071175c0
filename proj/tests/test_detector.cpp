#include <cmath>

#include "doctest.h"
#include "udw/detector.hpp"
#include "udw/rng.hpp"

using namespace udw::detector;
using udw::lattice::LatticeField;
using udw::lattice::LatticeParams;
using udw::quantum::DensityState;
using udw::quantum::Operator;

namespace {

LatticeParams small_lattice() {
    LatticeParams p;
    p.sites = 4;
    p.n_max = 3;
    return p;
}

DetectorSpec spec_at(double x, double lambda) {
    DetectorSpec s;
    s.position = {x};
    s.coupling = lambda;
    return s;
}

Mat random_density(udw::Rng& rng, Eigen::Index n) {
    Mat g(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) g(i, j) = rng.complex_normal();
    Mat r = g * g.adjoint();
    return r / r.trace();
}

// ∫ χ(τ) e^{iωτ} dτ by a fine trapezoid sum.
cplx switching_transform(const Switching& sw, double gap) {
    const int n = 200000;
    const double h = sw.duration / n;
    cplx s = 0.0;
    for (int i = 0; i <= n; ++i) {
        const double t = sw.on() + i * h;
        s += (i == 0 || i == n ? 0.5 : 1.0) * sw(t) * std::exp(cplx(0.0, gap * t));
    }
    return s * h;
}

}  // namespace

TEST_CASE("profiles") {
    const Smearing bump;
    CHECK(std::abs(bump.integral(-1.0, 1.0) - 1.0) < 1e-10);
    CHECK(std::abs(bump.integral(0.0, 1.0) - 0.5) < 1e-10);
    CHECK(bump(0.2) == 0.0);
    const Smearing box{"box", 0.5};
    CHECK(std::abs(box.integral(0.0, 0.25) - 0.25) < 1e-15);
    const Switching sw;
    CHECK(std::abs(sw(0.0) - 1.0) < 1e-15);
    CHECK(sw(0.6) == 0.0);
    CHECK(std::abs(sw(0.25) - 0.5) < 1e-15);
}

TEST_CASE("lattice coupling picks the covering cell") {
    const LatticeField f(small_lattice());
    const LatticeCoupling c = couple(spec_at(1.0, 0.1), f);
    CHECK(c.slot == 0);
    CHECK(c.first_site == 1);
    REQUIRE(c.count() == 1);
    CHECK(std::abs(c.weights[0] - 1.0) < 1e-10);

    // Straddling a cell boundary couples two sites with half weight each.
    const LatticeCoupling mid = couple(spec_at(1.5, 0.1), f);
    REQUIRE(mid.count() == 2);
    CHECK(std::abs(mid.weights[0] - 0.5) < 1e-10);
    CHECK(std::abs(mid.weights[1] - 0.5) < 1e-10);

    DetectorSpec wide = spec_at(1.0, 0.1);
    wide.switching.duration = 1.5;
    CHECK_THROWS_AS(couple(wide, f), udw::quantum::QuantumError);
    CHECK_THROWS_AS(couple(spec_at(10.0, 0.1), f), udw::quantum::QuantumError);
}

TEST_CASE("zero coupling gives the trivial instrument") {
    const LatticeField f(small_lattice());
    const DetectorRun run = run_detector(spec_at(1.0, 0.0), f, 50, 1e-8);
    const Eigen::Index n = run.evolution.unitary.rows();
    CHECK((run.evolution.unitary - Mat::Identity(n, n)).norm() == 0.0);
    REQUIRE(run.kraus.ops.size() == 2);
    CHECK((run.kraus.ops[0] - Mat::Identity(n / 2, n / 2)).norm() == 0.0);
    CHECK(run.kraus.ops[1].norm() == 0.0);
    const auto p = povm_probabilities(DensityState::pure(Vec::Unit(n / 2, 0)), run.kraus);
    CHECK(p[0] == 1.0);
    CHECK(p[1] == 0.0);
}

TEST_CASE("second-order convergence under step doubling") {
    const LatticeField f(small_lattice());
    DetectorSpec s = spec_at(1.5, 0.5);
    s.gap = 3.0;
    const Mat field = couple(s, f).field;
    const Evolution coarse = evolve(s, field, 20, 1.0);
    const Evolution fine = evolve(s, field, 40, 1.0);
    const double ratio = coarse.error_estimate / fine.error_estimate;
    CHECK(ratio > 3.5);
    CHECK(ratio < 4.5);
    CHECK(coarse.unitarity_residual < 1e-12);
}

TEST_CASE("first-order Kraus operator matches the Dyson term") {
    const LatticeField f(small_lattice());
    const double lambda = 1e-3;
    const DetectorSpec s = spec_at(1.0, lambda);
    const DetectorRun run = run_detector(s, f, 400, 1e-8);
    const cplx amp = cplx(0.0, -lambda) * switching_transform(s.switching, s.gap);
    const Mat dyson = amp * run.coupling.field;
    // The λ² term is diagonal in the detector basis, so the remainder is O(λ³).
    CHECK((run.kraus.ops[1] - dyson).norm() / dyson.norm() < 1e-5);
}

TEST_CASE("zero gap reduces to a single exponential") {
    const LatticeField f(small_lattice());
    DetectorSpec s = spec_at(1.5, 0.4);
    s.gap = 0.0;
    const Mat field = couple(s, f).field;
    const Evolution ev = evolve(s, field, 64);
    // ∫cos²(πτ) over one period is 1/2.
    const double big = s.coupling * 0.5;
    Eigen::SelfAdjointEigenSolver<Mat> es(field);
    const Eigen::Index nf = field.rows();
    Vec c(nf), sn(nf);
    for (Eigen::Index i = 0; i < nf; ++i) {
        c(i) = std::cos(big * es.eigenvalues()(i));
        sn(i) = std::sin(big * es.eigenvalues()(i));
    }
    const Mat cosm = es.eigenvectors() * c.asDiagonal() * es.eigenvectors().adjoint();
    const Mat sinm = es.eigenvectors() * sn.asDiagonal() * es.eigenvectors().adjoint();
    Mat exact(2 * nf, 2 * nf);
    exact << cosm, cplx(0.0, -1.0) * sinm, cplx(0.0, -1.0) * sinm, cosm;
    CHECK((ev.unitary - exact).norm() < 1e-10);
}

TEST_CASE("interaction hamiltonian is hermitian") {
    const LatticeField f(small_lattice());
    const DetectorSpec s = spec_at(1.5, 0.3);
    const Mat field = couple(s, f).field;
    udw::Rng rng(7);
    for (int i = 0; i < 20; ++i) {
        const Operator h = interaction_hamiltonian(s, field, rng.uniform(-0.5, 0.5));
        CHECK(h.hermiticity_residual() < 1e-14);
    }
}

TEST_CASE("detectors on separate sites commute") {
    LatticeParams p;
    p.sites = 2;
    p.n_max = 2;
    const LatticeField f(p);
    const std::vector<int> dims{2, 2, f.local_dim(), f.local_dim()};
    const DetectorSpec a = spec_at(0.0, 0.2), b = spec_at(1.0, 0.3);
    udw::Rng rng(11);
    for (int i = 0; i < 10; ++i) {
        const double t1 = rng.uniform(-0.5, 0.5), t2 = rng.uniform(-0.5, 0.5);
        const Mat ha = udw::quantum::embed(monopole(a.gap, t1), 0, 1, dims).matrix() *
                       udw::quantum::embed(f.phi_local(), 2, 1, dims).matrix() * a.coupling * a.switching(t1);
        const Mat hb = udw::quantum::embed(monopole(b.gap, t2), 1, 1, dims).matrix() *
                       udw::quantum::embed(f.phi_local(), 3, 1, dims).matrix() * b.coupling * b.switching(t2);
        CHECK((ha * hb - hb * ha).norm() < 1e-10);
    }
}

TEST_CASE("measurement region of a detector") {
    DetectorSpec s = spec_at(0.0, 0.1);
    s.switching.center = 0.5;
    const auto m = measurement_region_of(s);
    CHECK(m.coupling.lo.t == 0.0);
    CHECK(m.coupling.hi.t == 1.0);
    CHECK(std::abs(m.coupling.lo.x[0] + 0.1) < 1e-15);
    CHECK(std::abs(m.coupling.hi.x[0] - 0.1) < 1e-15);
    CHECK(m.output.lo.t == 1.0);
    CHECK_NOTHROW(m.validate());

    const LatticeField f(small_lattice());
    const DetectorSpec t = spec_at(1.5, 0.1);
    const auto lm = lattice_measurement_region(t, couple(t, f), f.params());
    CHECK(lm.coupling.lo.t == -0.5);
    CHECK(lm.coupling.hi.t == 0.5);
    CHECK(lm.coupling.lo.x[0] == 1.0);
    CHECK(lm.coupling.hi.x[0] == 2.0);
}

TEST_CASE("probabilities of random states sum to one") {
    const LatticeField f(small_lattice());
    DetectorSpec s = spec_at(1.5, 0.8);
    s.initial_state = Vec::Constant(2, 1.0 / std::sqrt(2.0));
    const DetectorRun run = run_detector(s, f, 400, 1e-8);
    CHECK(run.kraus.completeness_residual() < 1e-8);
    udw::Rng rng(3);
    const Eigen::Index n = run.kraus.ops[0].rows();
    for (int i = 0; i < 50; ++i) {
        const auto rho = DensityState::from(Operator(random_density(rng, n)));
        const auto p = povm_probabilities(rho, run.kraus);
        CHECK(std::abs(p[0] + p[1] - 1.0) < 1e-10);
        CHECK(p[0] >= 0.0);
        CHECK(p[1] >= 0.0);
    }
}

TEST_CASE("truncation leakage is small at default coupling") {
    const LatticeField f(small_lattice());
    const DetectorRun run = run_detector(spec_at(1.0, 0.1), f, 200, 1e-8);
    CHECK(run.leakage < 1e-3);
    CHECK(run.leakage > 0.0);
}
