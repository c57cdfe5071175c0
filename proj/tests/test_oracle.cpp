#include <chrono>
#include <cmath>
#include <cstdio>

#include "doctest.h"
#include "udw/oracle.hpp"
#include "udw/scenario.hpp"

using namespace udw::oracle;

TEST_CASE("factorization residual on explicit states") {
    // |ψ⟩ = (|0⟩|0⟩ + |1⟩|1⟩)/√2 with Γ = diag(1, 0), L = |0⟩⟨0|: 1/2 vs 1/4.
    Vec psi = Vec::Zero(4);
    psi(0) = psi(3) = 1.0 / std::sqrt(2.0);
    Mat g = Mat::Zero(2, 2), l = Mat::Zero(2, 2);
    g(0, 0) = 1.0;
    l(0, 0) = 1.0;
    CHECK(std::abs(factorization_residual(psi, 2, 2, g, l) - 0.25) < 1e-15);
    CHECK(factorization_residual(psi, 2, 2, 0.7 * Mat::Identity(2, 2), l) < 1e-15);
    // Product states factorize for every Γ.
    Vec prod = Vec::Zero(4);
    prod(1) = 1.0;
    CHECK(factorization_residual(prod, 2, 2, g, l) < 1e-15);
}

TEST_CASE("factorization lemma trials") {
    for (int d : {2, 3}) {
        const auto rep = factorization_lemma_trial(d, 7, 100);
        INFO(rep.summary());
        CHECK(rep.passed());
        CHECK(rep.trials == 100);
        CHECK(rep.worst_residual <= 1e-10);
    }
    CHECK_THROWS(factorization_lemma_trial(1, 1, 1));
}

TEST_CASE("trivial kraus detection") {
    udw::detector::KrausSet ks;
    ks.ops = {Mat::Identity(3, 3) * 0.6, Mat::Identity(3, 3) * 0.8};
    const auto t = trivial_kraus_detector(ks);
    CHECK(t == std::vector<bool>{true, true});
    Mat p = Mat::Zero(3, 3);
    p(0, 0) = 1.0;
    ks.ops = {p, Mat::Identity(3, 3) - p};
    CHECK(trivial_kraus_detector(ks) == std::vector<bool>{false, false});
}

TEST_CASE("chsh optimisation") {
    Vec beta = Vec::Zero(4);
    beta(0) = beta(3) = 1.0 / std::sqrt(2.0);
    const Mat rho = beta * beta.adjoint();
    const std::vector<double> tsirelson{0.0, M_PI / 2, M_PI / 4, -M_PI / 4};
    CHECK(std::abs(chsh(rho, tsirelson) - 2.0 * std::sqrt(2.0)) < 1e-12);
    const auto rep = bell_update_demo(3);
    CHECK(std::abs(rep.before - 2.0 * std::sqrt(2.0)) < 1e-9);
    CHECK(rep.after <= 2.0 + 1e-9);
    CHECK(rep.after >= 2.0 - 1e-6);
    CHECK(rep.marginal_residual < 1e-15);
}

namespace {

udw::state::Scenario two_detectors(double coupling) {
    auto c = udw::scenario::default_config();
    for (auto& d : c.detectors) d.spec.coupling = coupling;
    return udw::scenario::build_scenario(c);
}

}  // namespace

TEST_CASE("nine-state separation") {
    const auto s = two_detectors(0.5);
    const auto res = nine_state_separation_trial(s);
    INFO(res.report.summary());
    CHECK(res.report.passed());
    CHECK_FALSE(res.report.designed_negative);
    CHECK(res.chain_residual <= 1e-9);
    CHECK(res.compatibility_residual <= 1e-9);
    CHECK(res.separations.size() == 10);
    CHECK(res.min_separation > 10.0 * res.noise_floor);
}

TEST_CASE("nine-state separation designed negative") {
    const auto s = two_detectors(0.0);
    SeparationOptions opt;
    opt.a = opt.b = 0;
    const auto res = nine_state_separation_trial(s, opt);
    INFO(res.report.summary());
    CHECK(res.report.designed_negative);
    CHECK(res.report.witnesses.empty());
    CHECK(res.report.passed());
}

TEST_CASE("geometry cross-check") {
    for (int d : {3, 4}) {
        GeometryCheckOptions opt;
        opt.dimension = d;
        opt.trials = 20;
        opt.convexity_samples = 2000;
        opt.avoidance_samples = 500;
        const auto rep = geometry_cross_check(opt);
        INFO(rep.summary());
        for (const auto& w : rep.witnesses) INFO(w);
        CHECK(rep.passed());
        CHECK(rep.trials == 20);
    }
    const auto opp = opposite_side_check(50, 5);
    INFO(opp.summary());
    CHECK(opp.passed());
}
