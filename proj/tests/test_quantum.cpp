#include <cmath>

#include "doctest.h"
#include "udw/quantum.hpp"
#include "udw/rng.hpp"

using namespace udw::quantum;

namespace {

Mat random_density(udw::Rng& rng, int n) {
    Mat g(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) g(i, j) = rng.complex_normal();
    Mat r = g * g.adjoint();
    return r / r.trace();
}

}  // namespace

TEST_CASE("ladder operators") {
    const auto a1 = mode_operators(FockLayout{1, 1});
    REQUIRE(a1.size() == 1);
    Vec one = Vec::Zero(2), zero = Vec::Zero(2);
    one(1) = 1.0;
    zero(0) = 1.0;
    CHECK((a1[0].matrix() * one - zero).norm() == 0.0);
    CHECK((a1[0].matrix() * zero).norm() == 0.0);

    const int nmax = 4;
    const Mat a = annihilation(nmax);
    for (int n = 1; n < nmax; ++n) CHECK(std::abs(a(n - 1, n) - std::sqrt(double(n))) < 1e-15);
    // [a, a†] = 1 below the cutoff.
    const Mat comm = a * a.adjoint() - a.adjoint() * a;
    for (int n = 0; n < nmax; ++n) CHECK(std::abs(comm(n, n) - 1.0) < 1e-14);

    const auto modes = mode_operators(FockLayout{2, 2});
    const Mat c = modes[0].matrix() * modes[1].matrix().adjoint() - modes[1].matrix().adjoint() * modes[0].matrix();
    CHECK(c.norm() < 1e-14);
    CHECK_THROWS_AS(FockLayout({20, 3, 1 << 16}).dim(), QuantumError);
}

TEST_CASE("smeared field") {
    const FockLayout one{1, 3};
    const Operator phi = smeared_field(one, {cplx(1.0, 0.0)});
    CHECK(std::abs(phi.matrix()(1, 0) - 1.0) < 1e-15);
    CHECK(phi.hermiticity_residual() == 0.0);

    const FockLayout three{3, 2};
    const std::vector<cplx> f{{0.3, 0.1}, {-0.2, 0.4}, {0.05, 0.0}};
    const Operator g = smeared_field(three, f);
    CHECK(g.hermiticity_residual() < 1e-15);
    Vec vac = Vec::Zero(27);
    vac(0) = 1.0;
    double sum = 0.0;
    for (const auto& c : f) sum += std::norm(c);
    CHECK(std::abs(expectation(DensityState::pure(vac), g * g) - sum) < 1e-14);
}

TEST_CASE("density state invariants") {
    udw::Rng rng(1);
    const DensityState rho = DensityState::from(Operator(random_density(rng, 4)));
    CHECK(std::abs(expectation(rho, Operator::identity(4)) - 1.0) < 1e-12);
    Mat bad = Mat::Identity(2, 2);
    CHECK_THROWS_AS(DensityState::from(Operator(bad)), QuantumError);
    bad << 1.5, 0, 0, -0.5;
    CHECK_THROWS_AS(DensityState::from(Operator(bad)), QuantumError);

    Vec zero = Vec::Zero(3);
    zero(0) = 1.0;
    const Mat num = annihilation(2).adjoint() * annihilation(2);
    CHECK(std::abs(expectation(DensityState::pure(zero), Operator(num))) == 0.0);
}

TEST_CASE("tensor and partial trace") {
    udw::Rng rng(2);
    const Mat a = random_density(rng, 2), b = random_density(rng, 3);
    const Operator ab = tensor(Operator(a), Operator(b));
    CHECK(std::abs(ab.trace() - Operator(a).trace() * Operator(b).trace()) < 1e-14);
    const CompositeSpace space{{2, 3}};
    CHECK((partial_trace(ab.matrix(), space, {0}) - a).norm() < 1e-12);
    CHECK((partial_trace(ab.matrix(), space, {1}) - b).norm() < 1e-12);

    Vec bell = Vec::Zero(4);
    bell(0) = bell(3) = 1.0 / std::sqrt(2.0);
    const DensityState half = partial_trace(DensityState::pure(bell), CompositeSpace{{2, 2}}, {0});
    CHECK((half.matrix() - 0.5 * Mat::Identity(2, 2)).norm() < 1e-15);

    // Middle factor of three, against an explicit index loop.
    const Mat c = random_density(rng, 2);
    const Mat abc = tensor({Operator(a), Operator(b), Operator(c)}).matrix();
    const Mat mid = partial_trace(abc, CompositeSpace{{2, 3, 2}}, {1});
    CHECK((mid - b).norm() < 1e-12);
    const Mat outer = partial_trace(abc, CompositeSpace{{2, 3, 2}}, {0, 2});
    CHECK((outer - tensor(Operator(a), Operator(c)).matrix()).norm() < 1e-12);
    CHECK_THROWS_AS(partial_trace(abc, CompositeSpace{{2, 3, 2}}, {3}), QuantumError);

    for (int trial = 0; trial < 20; ++trial) {
        const Mat r = random_density(rng, 6);
        const DensityState red = partial_trace(DensityState::from(Operator(r)), CompositeSpace{{2, 3}}, {0});
        CHECK(red.residuals().min_eigenvalue > -1e-12);
        CHECK(red.residuals().trace < 1e-12);
    }
}

TEST_CASE("embed places a block between identities") {
    const Mat x = annihilation(1);
    const Operator e = embed(x, 1, 1, {2, 2, 2});
    const Operator ref = tensor({Operator::identity(2), Operator(x), Operator::identity(2)});
    CHECK((e.matrix() - ref.matrix()).norm() == 0.0);
}
