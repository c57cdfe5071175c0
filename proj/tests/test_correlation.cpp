#include <cmath>

#include "doctest.h"
#include "udw/correlation.hpp"
#include "udw/scenario.hpp"

using namespace udw::correlation;
using udw::geometry::PrescriptionStatus;
using udw::geometry::Relation;
using udw::geometry::SpacetimePoint;
using udw::state::Mode;

namespace {

// Single detector A at x = 2 on a 5-site lattice, outcome 1 recorded.
const udw::state::Scenario& single() {
    static const udw::state::Scenario s = [] {
        auto c = udw::scenario::default_config();
        c.lattice.sites = 5;
        c.detectors.resize(1);
        c.detectors[0].spec.position = {2.0};
        c.detectors[0].spec.coupling = 0.3;
        c.record.entries = {{"A", Mode::Selective, 1}};
        return udw::scenario::build_scenario(c);
    }();
    return s;
}

Insertion at(double t, double x) { return insertion_at(single().field->params(), SpacetimePoint{t, {x}}); }

udw::state::Scenario with_mode(Mode m) {
    udw::state::Scenario s = single();
    s.record.entries = {{"A", m, 1}};
    return s;
}

}  // namespace

TEST_CASE("wightman basics") {
    const auto& s = single();
    const auto vac = s.initial();
    CHECK(std::abs(smeared_wightman(vac, {}, *s.field) - 1.0) < 1e-14);
    // Vacuum is even in φ.
    CHECK(std::abs(smeared_wightman(vac, {at(0, 1)}, *s.field)) < 1e-12);
    const Insertion x = at(0, 0), y = at(1, 4);
    const cplx xy = smeared_wightman(vac, {x, y}, *s.field), yx = smeared_wightman(vac, {y, x}, *s.field);
    CHECK(std::abs(xy - yx) <= 1e-10);
    CHECK(std::abs(xy) > 1e-6);
    // Timelike insertions do not commute.
    const Insertion z = at(1, 0);
    CHECK(std::abs(smeared_wightman(vac, {x, z}, *s.field) - smeared_wightman(vac, {z, x}, *s.field)) > 1e-4);
    CHECK_THROWS(at(0, 9));
}

TEST_CASE("equal-time two-point function against the dense ground state") {
    udw::lattice::LatticeParams p;
    p.sites = 3;
    p.n_max = 2;
    const udw::lattice::LatticeField f(p);
    Eigen::SelfAdjointEigenSolver<Mat> es(f.hamiltonian_dense());
    const Vec g = es.eigenvectors().col(0);
    const std::vector<int> dims(3, f.local_dim());
    const Mat phi0 = udw::quantum::embed(f.phi_local(), 0, 1, dims).matrix();
    const Mat phi1 = udw::quantum::embed(f.phi_local(), 1, 1, dims).matrix();
    const cplx ref = g.dot((phi0 + phi1) * (phi0 + phi1) * g) / 4.0;
    const Insertion pair = insertion_at(p, SpacetimePoint{0.0, {0.0}}, 2);
    const cplx val = smeared_wightman(udw::state::Ensemble{"vac", {f.vacuum()}}, {pair, pair}, f);
    CHECK(std::abs(val - ref) < 1e-10);
}

TEST_CASE("equal-time correlator approaches the free mode sum") {
    udw::lattice::LatticeParams p;
    p.sites = 4;
    p.n_max = 5;
    const udw::lattice::LatticeField f(p);
    // Normal modes of Ω² − coupling: ⟨φ_iφ_j⟩ = Σ_k u_ik u_jk / (2ω_k).
    const double w2 = p.mass * p.mass + 2.0;
    Eigen::MatrixXd k = Eigen::MatrixXd::Identity(4, 4) * w2;
    for (int i = 0; i + 1 < 4; ++i) k(i, i + 1) = k(i + 1, i) = -1.0;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k);
    double ref = 0.0;
    for (int m = 0; m < 4; ++m) ref += es.eigenvectors()(1, m) * es.eigenvectors()(1, m) / (2.0 * std::sqrt(es.eigenvalues()(m)));
    const Insertion x = insertion_at(p, SpacetimePoint{0.0, {1.0}});
    const cplx val = smeared_wightman(udw::state::Ensemble{"vac", {f.vacuum()}}, {x, x}, f);
    CHECK(std::abs(val.real() - ref) / ref < 1e-2);
}

TEST_CASE("pgm prescriptions") {
    const auto& s = single();
    const Insertion in1 = at(2, 2), in2 = at(3, 2), left = at(0, 0), right = at(0, 4);
    REQUIRE(udw::geometry::classify(in1.op.support, s.detector("A").region) == Relation::InPPlus);
    REQUIRE(udw::geometry::classify(left.op.support, s.detector("A").region) == Relation::Spacelike);

    const auto inside = n_point_pgm({in1, in2}, s, "A");
    CHECK(inside.status == PrescriptionStatus::P1Inside);
    const auto alg = n_point_algebraic({in1, in2}, s, AlgebraicMode::Selective);
    CHECK(std::abs(inside.value - alg.value) < 1e-12);

    const auto mixed = n_point_pgm({in1, left}, s, "A");
    CHECK(mixed.status == PrescriptionStatus::P2);
    CHECK(std::abs(mixed.value - n_point_algebraic({in1, left}, s, AlgebraicMode::Selective).value) < 1e-12);

    const auto one = n_point_pgm({left}, s, "A");
    CHECK(one.status == PrescriptionStatus::P1Outside);
    CHECK_FALSE(one.conflict);

    const auto straddle = n_point_pgm({left, right}, s, "A");
    CHECK(straddle.status == PrescriptionStatus::ConflictContained);
    CHECK(straddle.conflict);
    REQUIRE(straddle.alternative);
    CHECK(std::abs(*straddle.alternative - straddle.value) > 1e-6);

    const auto near = n_point_pgm({left, at(0, 1)}, s, "A");
    CHECK(near.status == PrescriptionStatus::ConflictPartial);

    REQUIRE(udw::geometry::classify(at(1, 3).op.support, s.detector("A").region) != Relation::InPPlus);
    CHECK_THROWS_AS(n_point_pgm({at(1, 3)}, s, "A"), udw::geometry::GeometryError);
}

TEST_CASE("algebraic prescription") {
    const auto& s = single();
    const Insertion left = at(0, 0), right = at(0, 4), left2 = at(1, 0);
    const cplx vac = smeared_wightman(s.initial(), {left, right}, *s.field);

    const auto sel = n_point_algebraic({left, right}, s, AlgebraicMode::Selective);
    CHECK(std::abs(sel.value - vac) > 1e-6);
    const auto avg = n_point_algebraic({left, right}, s, AlgebraicMode::NonSelectiveAverage);
    CHECK(std::abs(avg.value - vac) <= 1e-9);
    CHECK(avg.no_bridge);
    const auto same_side = n_point_algebraic({left, left2}, s, AlgebraicMode::NonSelectiveAverage);
    CHECK_FALSE(same_side.no_bridge);

    // Average equals Σ_m p_m × selective value.
    const auto& k = s.detector("A").kraus;
    cplx sum = 0.0;
    for (int m = 0; m < 2; ++m) {
        auto sm = with_mode(Mode::Selective);
        sm.record.entries[0].outcome = m;
        const double pm = udw::state::apply_kraus(*s.field, k, m, s.field->vacuum()).squaredNorm();
        sum += pm * n_point_algebraic({left, right}, sm, AlgebraicMode::Selective).value;
    }
    CHECK(std::abs(sum - avg.value) < 1e-12);

    // One-point function in S_M reproduces the vacuum value.
    CHECK(std::abs(n_point_algebraic({left}, s, AlgebraicMode::NonSelectiveAverage).value) < 1e-12);

    CHECK_THROWS_AS(n_point_algebraic({left}, with_mode(Mode::Unknown), AlgebraicMode::Selective), udw::state::StateError);
    // Entirely in the past: no update.
    const Insertion past = at(-3, 2);
    CHECK(std::abs(n_point_algebraic({past, past}, s, AlgebraicMode::Selective).value -
                   smeared_wightman(s.initial(), {past, past}, *s.field)) < 1e-14);
}

TEST_CASE("no-signalling") {
    const auto& s = single();
    CHECK(no_signalling_check({}, s, "A") < 1e-12);
    const auto gens = udw::state::generator_library(*s.field);
    std::size_t checked = 0;
    for (const auto& g : gens)
        for (const auto& h : gens) {
            if (udw::geometry::classify(g.support, s.detector("A").region) != Relation::Spacelike) continue;
            if (udw::geometry::classify(h.support, s.detector("A").region) != Relation::Spacelike) continue;
            CHECK(no_signalling_check({g, h}, s, "A") <= 1e-9);
            ++checked;
        }
    CHECK(checked > 10);
    CHECK_THROWS_AS(no_signalling_check({at(2, 2).op}, s, "A"), udw::state::StateError);
}
