#include "udw/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <sstream>

#include "udw/geometry.hpp"
#include "udw/rng.hpp"

namespace udw::oracle {

using geometry::BoxRegion;
using geometry::SpacetimePoint;

std::string TrialReport::summary() const {
    char buf[256];
    std::snprintf(buf, sizeof buf, "suite=%s trials=%zu failures=%zu degenerate=%zu witnesses=%zu worst=%.6e designed_negative=%d status=%s",
                  suite.c_str(), trials, failures, degenerate, witnesses.size(), worst_residual,
                  designed_negative ? 1 : 0, passed() ? "PASS" : "FAIL");
    return buf;
}

// Factorization lemma

double factorization_residual(const Vec& psi, int det_dim, int field_dim, const Mat& gamma, const Mat& l) {
    // ⟨ψ|(A⊗B)|ψ⟩ with explicit index loops.
    auto expect = [&](const Mat& a, const Mat& b) {
        cplx s = 0.0;
        for (int i = 0; i < det_dim; ++i)
            for (int j = 0; j < det_dim; ++j) {
                if (a(i, j) == cplx(0.0)) continue;
                for (int x = 0; x < field_dim; ++x)
                    for (int y = 0; y < field_dim; ++y)
                        s += std::conj(psi(i * field_dim + x)) * a(i, j) * b(x, y) * psi(j * field_dim + y);
            }
        return s;
    };
    const Mat id_d = Mat::Identity(det_dim, det_dim), id_f = Mat::Identity(field_dim, field_dim);
    return std::abs(expect(gamma, l) - expect(id_d, l) * expect(gamma, id_f));
}

namespace {

Vec random_unit(Rng& rng, int n) {
    Vec v(n);
    for (int i = 0; i < n; ++i) v(i) = rng.complex_normal();
    return v / v.norm();
}

Mat random_effect(Rng& rng, int n) {
    Mat g(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) g(i, j) = rng.complex_normal();
    Mat e = g * g.adjoint();
    Eigen::SelfAdjointEigenSolver<Mat> es(e, Eigen::EigenvaluesOnly);
    return e / es.eigenvalues().maxCoeff();
}

}  // namespace

TrialReport factorization_lemma_trial(int det_dim, std::uint64_t seed, std::size_t trials, int max_field_dim) {
    TrialReport rep;
    rep.suite = "appA-d" + std::to_string(det_dim);
    if (det_dim < 2) throw std::invalid_argument("detector dimension must be at least 2");
    Rng rng(seed);
    const double tol = 1e-10;
    while (rep.trials < trials) {
        const int field_dim = det_dim + static_cast<int>(rng.index(static_cast<std::size_t>(max_field_dim - det_dim + 1)));
        // ψ = Σ γ_i |i⟩|φ_i⟩ with every γ_i nonzero and independent φ_i.
        Vec gamma = random_unit(rng, det_dim);
        Mat phis(field_dim, det_dim);
        for (int i = 0; i < det_dim; ++i) phis.col(i) = random_unit(rng, field_dim);
        Eigen::SelfAdjointEigenSolver<Mat> gram(phis.adjoint() * phis, Eigen::EigenvaluesOnly);
        if (gram.eigenvalues().minCoeff() < 1e-3 || gamma.cwiseAbs().minCoeff() < 1e-3) {
            ++rep.degenerate;
            continue;
        }
        Vec psi(det_dim * field_dim);
        for (int i = 0; i < det_dim; ++i) psi.segment(i * field_dim, field_dim) = gamma(i) * phis.col(i);

        const bool proportional = rep.trials % 2 == 0;
        const Mat effect = proportional ? Mat(rng.uniform(0.05, 1.0) * Mat::Identity(det_dim, det_dim))
                                        : random_effect(rng, det_dim);
        const cplx c = effect.trace() / static_cast<double>(det_dim);
        const bool predicate = (effect - c * Mat::Identity(det_dim, det_dim)).norm() <= tol;

        double worst = 0.0;
        for (int x = 0; x < field_dim; ++x)
            for (int y = 0; y < field_dim; ++y) {
                Mat l = Mat::Zero(field_dim, field_dim);
                l(x, y) = 1.0;
                worst = std::max(worst, factorization_residual(psi, det_dim, field_dim, effect, l));
            }
        const bool equal = worst <= tol;
        if (equal != predicate) {
            ++rep.failures;
            std::ostringstream os;
            os << "trial " << rep.trials << ": equality=" << equal << " proportional=" << predicate;
            rep.witnesses.push_back(os.str());
        }
        if (equal) rep.worst_residual = std::max(rep.worst_residual, worst);
        ++rep.trials;
    }
    return rep;
}

// Nine-state separation

namespace {

struct Branches {
    std::string name;
    std::vector<Vec> v;
};

// Degree ≤ 2 moments: [1, ⟨Φ_g⟩..., ⟨Φ_gΦ_h⟩ (g ≤ h)...].
std::vector<cplx> moments(const Branches& rho, const std::vector<state::Generator>& gens, const std::vector<Mat>& blocks,
                          const lattice::LatticeField& f) {
    double tr = 0.0;
    for (const auto& v : rho.v) tr += v.squaredNorm();
    const std::size_t n = gens.size();
    std::vector<cplx> out(1 + n + n * (n + 1) / 2, 0.0);
    out[0] = 1.0;
    for (const auto& v : rho.v) {
        std::vector<Vec> w;
        for (std::size_t g = 0; g < n; ++g)
            w.push_back(f.apply_at(v, gens[g].slot, gens[g].first_site, static_cast<int>(gens[g].weights.size()), blocks[g]));
        std::size_t k = 1 + n;
        for (std::size_t g = 0; g < n; ++g) {
            out[1 + g] += v.dot(w[g]) / tr;
            for (std::size_t h = g; h < n; ++h) out[k++] += w[g].dot(w[h]) / tr;
        }
    }
    return out;
}

struct Separation {
    double generator = 0.0;
    double random = 0.0;
};

// Symmetrised products have expectation Re⟨Φ_gΦ_h⟩.
Separation separate(const std::vector<cplx>& a, const std::vector<cplx>& b, Rng& rng, std::size_t random_obs) {
    Separation s;
    for (std::size_t i = 0; i < a.size(); ++i) s.generator = std::max(s.generator, std::abs(a[i] - b[i]));
    // Random hermitian L = Σ c_g Φ_g + Σ d_gh (Φ_gΦ_h + Φ_hΦ_g)/2, unit coefficient norm.
    for (std::size_t r = 0; r < random_obs; ++r) {
        std::vector<double> c(a.size() - 1);
        double norm = 0.0;
        for (auto& x : c) {
            x = rng.normal();
            norm += x * x;
        }
        norm = std::sqrt(norm);
        double val = 0.0;
        for (std::size_t i = 1; i < a.size(); ++i) {
            const cplx d = a[i] - b[i];
            val += c[i - 1] / norm * d.real();
        }
        s.random = std::max(s.random, std::abs(val));
    }
    return s;
}

}  // namespace

std::vector<bool> trivial_kraus_detector(const detector::KrausSet& ks, double tol) {
    std::vector<bool> out;
    for (const auto& k : ks.ops) {
        const Mat e = k.adjoint() * k;
        const cplx c = e.trace() / static_cast<double>(e.rows());
        out.push_back((e - c * Mat::Identity(e.rows(), e.cols())).norm() <= tol);
    }
    return out;
}

SeparationResult nine_state_separation_trial(const state::Scenario& s, const SeparationOptions& opt) {
    if (s.detectors.size() < 2) throw std::invalid_argument("separation trial needs two detectors");
    const auto& A = s.detectors[0];
    const auto& B = s.detectors[1];
    const auto& f = *s.field;
    auto K = [&](const detector::DetectorRun& d, int i, const Vec& v) {
        return f.apply_at(v, d.kraus.slot, d.kraus.first_site, d.kraus.count, d.kraus.ops.at(i));
    };
    const Vec vac = f.vacuum();
    const int na = static_cast<int>(A.kraus.ops.size()), nb = static_cast<int>(B.kraus.ops.size());
    std::vector<Branches> rho(9);
    rho[0] = {"rho1", {vac}};
    for (int i = 0; i < na; ++i) rho[1].v.push_back(K(A, i, vac));
    for (int j = 0; j < nb; ++j) rho[2].v.push_back(K(B, j, vac));
    for (int i = 0; i < na; ++i)
        for (int j = 0; j < nb; ++j) rho[3].v.push_back(K(A, i, K(B, j, vac)));
    rho[4].v.push_back(K(A, opt.a, vac));
    for (int j = 0; j < nb; ++j) rho[5].v.push_back(K(A, opt.a, K(B, j, vac)));
    rho[6].v.push_back(K(B, opt.b, vac));
    for (int i = 0; i < na; ++i) rho[7].v.push_back(K(B, opt.b, K(A, i, vac)));
    rho[8].v.push_back(K(A, opt.a, K(B, opt.b, vac)));
    for (int i = 0; i < 9; ++i) rho[i].name = "rho" + std::to_string(i + 1);

    const std::string a = A.spec.label, b = B.spec.label;
    const auto library = state::generator_library(f, opt.generators);
    auto gens_of = [&](const std::string& region) { return state::generators_in(state::named_region(region, s), library); };

    SeparationResult res;
    res.report.suite = "appB";
    const auto triv_a = trivial_kraus_detector(A.kraus), triv_b = trivial_kraus_detector(B.kraus);
    res.report.designed_negative = triv_a.at(opt.a) || triv_b.at(opt.b);
    Rng rng(opt.seed);

    struct Group {
        std::string region;
        std::vector<std::pair<int, int>> equal, differ;
    };
    const std::vector<Group> groups{
        {"S_" + a + b, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}, {}},
        {"P+_" + a + "\\P+_" + b, {{4, 5}}, {{1, 4}}},
        {"P+_" + b + "\\P+_" + a, {{6, 7}}, {{2, 6}}},
        {"P+_" + a + "∩P+_" + b, {}, {{8, 0}, {8, 1}, {8, 2}, {8, 3}, {8, 4}, {8, 5}, {8, 6}, {8, 7}}},
    };
    struct Pending {
        std::string name;
        double sep;
    };
    std::vector<Pending> pending;
    for (const auto& g : groups) {
        const auto gens = gens_of(g.region);
        if (gens.empty()) throw state::StateError(state::StateErrc::EmptyGenerators, g.region + ": no generators");
        std::vector<Mat> blocks;
        for (const auto& x : gens) blocks.push_back(f.smeared_block(x.weights));
        std::vector<std::vector<cplx>> mom(9);
        auto get = [&](int i) -> const std::vector<cplx>& {
            if (mom[i].empty()) {
                double tr = 0.0;
                for (const auto& v : rho[i].v) tr += v.squaredNorm();
                if (!(tr > 0.0)) mom[i] = std::vector<cplx>(1, std::numeric_limits<double>::quiet_NaN());
                else mom[i] = moments(rho[i], gens, blocks, f);
            }
            return mom[i];
        };
        for (auto [i, j] : g.equal) {
            if (get(i).size() == 1 || get(j).size() == 1) continue;
            const double d = separate(get(i), get(j), rng, 0).generator;
            if (g.region[0] == 'S') res.chain_residual = std::max(res.chain_residual, d);
            else res.compatibility_residual = std::max(res.compatibility_residual, d);
        }
        for (auto [i, j] : g.differ) {
            const std::string name = rho[i].name + "-vs-" + rho[j].name + "@" + g.region;
            if (get(i).size() == 1 || get(j).size() == 1) {
                pending.push_back({name + "(zero-probability)", 0.0});
                continue;
            }
            const Separation sp = separate(get(i), get(j), rng, opt.random_observables);
            pending.push_back({name, std::max(sp.generator, sp.random)});
        }
    }
    res.noise_floor = std::max(res.chain_residual, 64.0 * std::numeric_limits<double>::epsilon());
    res.min_separation = std::numeric_limits<double>::infinity();
    for (const auto& p : pending) {
        res.separations.push_back({p.name, p.sep});
        res.min_separation = std::min(res.min_separation, p.sep);
        ++res.report.trials;
        const bool witness = p.sep > 10.0 * res.noise_floor;
        if (witness) {
            char buf[160];
            std::snprintf(buf, sizeof buf, "%s sep=%.6e", p.name.c_str(), p.sep);
            res.report.witnesses.push_back(buf);
        }
        if (witness == res.report.designed_negative) ++res.report.failures;
    }
    res.report.worst_residual = std::max(res.chain_residual, res.compatibility_residual);
    return res;
}

// ---------------------------------------------------------------- Bell

double chsh(const Mat& rho, const std::vector<double>& t) {
    Mat z(2, 2), x(2, 2);
    z << 1, 0, 0, -1;
    x << 0, 1, 1, 0;
    auto obs = [&](double a) { Mat m = std::cos(a) * z + std::sin(a) * x; return m; };
    auto corr = [&](double a, double b) {
        const Mat oa = obs(a), ob = obs(b);
        cplx s = 0.0;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                for (int k = 0; k < 2; ++k)
                    for (int l = 0; l < 2; ++l) s += rho(k * 2 + l, i * 2 + j) * oa(i, k) * ob(j, l);
        return s.real();
    };
    return corr(t[0], t[2]) + corr(t[0], t[3]) + corr(t[1], t[2]) - corr(t[1], t[3]);
}

double optimize_chsh(const Mat& rho, std::uint64_t seed, int restarts, std::vector<double>* best) {
    Rng rng(seed);
    double best_val = -std::numeric_limits<double>::infinity();
    for (int r = 0; r < restarts; ++r) {
        std::vector<double> t(4);
        for (auto& x : t) x = rng.uniform(0.0, 2.0 * M_PI);
        const double sign = r % 2 == 0 ? 1.0 : -1.0;
        double val = sign * chsh(rho, t);
        for (int sweep = 0; sweep < 1000; ++sweep) {
            const double prev = val;
            for (int k = 0; k < 4; ++k) {
                // S is A cos θ + B sin θ + C in each angle separately.
                auto at = [&](double th) { auto u = t; u[k] = th; return sign * chsh(rho, u); };
                const double s0 = at(0.0), s1 = at(0.5 * M_PI), s2 = at(M_PI);
                const double c = 0.5 * (s0 + s2), a = s0 - c, b = s1 - c;
                t[k] = std::atan2(b, a);
                val = at(t[k]);
            }
            if (val - prev < 1e-15) break;
        }
        if (val > best_val) {
            best_val = val;
            if (best) *best = t;
        }
    }
    return best_val;
}

BellReport bell_update_demo(std::uint64_t seed, int restarts) {
    Vec beta = Vec::Zero(4);
    beta(0) = beta(3) = 1.0 / std::sqrt(2.0);
    const Mat rho = beta * beta.adjoint();
    BellReport rep;
    rep.before = optimize_chsh(rho, seed, restarts, &rep.angles);

    // Selective computational-basis update on qubit A.
    Mat avg = Mat::Zero(4, 4);
    rep.after = -std::numeric_limits<double>::infinity();
    for (int m = 0; m < 2; ++m) {
        Mat k = Mat::Zero(4, 4);
        k(m * 2 + 0, m * 2 + 0) = 1.0;
        k(m * 2 + 1, m * 2 + 1) = 1.0;
        Mat post = k * rho * k.adjoint();
        const double p = post.trace().real();
        avg += post;
        post /= p;
        rep.after = std::max(rep.after, optimize_chsh(post, seed + 1 + m, restarts));
    }
    // Marginal of B: trace out A explicitly.
    auto marginal_b = [](const Mat& r) {
        Mat out = Mat::Zero(2, 2);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                for (int a = 0; a < 2; ++a) out(i, j) += r(a * 2 + i, a * 2 + j);
        return out;
    };
    rep.marginal_residual = (marginal_b(avg) - marginal_b(rho)).cwiseAbs().maxCoeff();
    return rep;
}

// Bridge geometry

namespace {

double spatial_dist_to_box(const SpacetimePoint& p, const BoxRegion& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < p.x.size(); ++i) {
        const double d = std::max({b.lo.x[i] - p.x[i], 0.0, p.x[i] - b.hi.x[i]});
        s += d * d;
    }
    return std::sqrt(s);
}

bool in_j_of(const SpacetimePoint& p, const std::vector<BoxRegion>& boxes) {
    for (const auto& b : boxes) {
        const double r = spatial_dist_to_box(p, b);
        if (p.t - b.lo.t >= r || b.hi.t - p.t >= r) return true;
    }
    return false;
}

bool in_diamond(const SpacetimePoint& p, const geometry::Diamond& d) {
    auto dist = [](const SpacetimePoint& a, const SpacetimePoint& b) {
        double s = 0.0;
        for (std::size_t i = 0; i < a.x.size(); ++i) s += (a.x[i] - b.x[i]) * (a.x[i] - b.x[i]);
        return std::sqrt(s);
    };
    return p.t - d.past.t > dist(p, d.past) && d.future.t - p.t > dist(p, d.future);
}

std::optional<SpacetimePoint> sample_diamond(Rng& rng, const geometry::Diamond& d) {
    const double h = d.future.t - d.past.t;
    for (int attempt = 0; attempt < 20000; ++attempt) {
        SpacetimePoint p{rng.uniform(d.past.t, d.future.t), d.past.x};
        for (auto& x : p.x) x += rng.uniform(-h, h);
        if (in_diamond(p, d)) return p;
    }
    return std::nullopt;
}

geometry::MeasurementRegion random_measurement(Rng& rng, int n) {
    SpacetimePoint lo{0.0, std::vector<double>(n)}, hi{0.0, std::vector<double>(n)};
    const double ht = rng.uniform(0.1, 0.5);
    lo.t = -ht;
    hi.t = ht;
    for (int i = 0; i < n; ++i) {
        const double c = rng.uniform(-1.0, 1.0), w = rng.uniform(0.1, 0.5);
        lo.x[i] = c - w;
        hi.x[i] = c + w;
    }
    return geometry::MeasurementRegion::with_defaults("M", BoxRegion::make(lo, hi));
}

SpacetimePoint random_spacelike(Rng& rng, int n, const std::vector<BoxRegion>& parts) {
    while (true) {
        SpacetimePoint p{rng.uniform(-2.0, 2.0), std::vector<double>(n)};
        for (auto& x : p.x) x = rng.uniform(-3.0, 3.0);
        if (!in_j_of(p, parts)) return p;
    }
}

// Exact for a diamond: it meets J+(M) iff its future tip does, J−(M) iff its past tip does.
bool diamond_avoids(const geometry::Diamond& d, const std::vector<BoxRegion>& parts) {
    for (const auto& b : parts) {
        const double rf = spatial_dist_to_box(d.future, b), rp = spatial_dist_to_box(d.past, b);
        if (d.future.t - b.lo.t > rf || b.hi.t - d.past.t > rp) return false;
    }
    return true;
}

}  // namespace

TrialReport geometry_cross_check(const GeometryCheckOptions& opt) {
    TrialReport rep;
    rep.suite = "appC-d" + std::to_string(opt.dimension);
    const int n = opt.dimension - 1;
    Rng rng(opt.seed);
    for (std::size_t t = 0; t < opt.trials; ++t) {
        const auto m = random_measurement(rng, n);
        const auto parts = m.parts();
        const SpacetimePoint x = random_spacelike(rng, n, parts), y = random_spacelike(rng, n, parts);
        std::ostringstream fail;
        try {
            const auto bridge = geometry::causally_convex_bridge(x, y, m);
            bool has_x = false, has_y = false;
            for (const auto& d : bridge.diamonds) {
                has_x = has_x || in_diamond(x, d);
                has_y = has_y || in_diamond(y, d);
                if (!diamond_avoids(d, parts)) fail << " diamond-meets-J(M)";
            }
            if (!has_x || !has_y) fail << " endpoint-missing";
            for (std::size_t s = 0; s < opt.avoidance_samples && !bridge.diamonds.empty(); ++s) {
                const auto p = sample_diamond(rng, bridge.diamonds[rng.index(bridge.diamonds.size())]);
                if (p && in_j_of(*p, parts)) {
                    fail << " sample-in-J(M)";
                    break;
                }
            }
            const auto conv = geometry::is_causally_convex_sampled(bridge, opt.convexity_samples, opt.seed + t);
            if (!conv.convex) fail << " not-convex";
        } catch (const geometry::GeometryError& e) {
            fail << " " << e.what();
        }
        // Margin neighbourhood of a random spacelike point.
        const SpacetimePoint p = random_spacelike(rng, n, parts);
        const auto d = geometry::safe_diamond(p, m.region());
        if (!in_diamond(p, d) || !diamond_avoids(d, parts)) fail << " margin-diamond";
        ++rep.trials;
        if (!fail.str().empty()) {
            ++rep.failures;
            rep.witnesses.push_back("trial " + std::to_string(t) + ":" + fail.str());
        }
    }
    return rep;
}

TrialReport opposite_side_check(std::size_t trials, std::uint64_t seed) {
    TrialReport rep;
    rep.suite = "appC-d2-opposite";
    rep.designed_negative = true;
    Rng rng(seed);
    for (std::size_t t = 0; t < trials; ++t) {
        const auto m = random_measurement(rng, 1);
        const auto parts = m.parts();
        SpacetimePoint x, y;
        do x = random_spacelike(rng, 1, parts);
        while (x.x[0] > m.coupling.lo.x[0]);
        do y = random_spacelike(rng, 1, parts);
        while (y.x[0] < m.coupling.hi.x[0]);
        ++rep.trials;
        try {
            geometry::causally_convex_bridge(x, y, m);
            ++rep.failures;
            rep.witnesses.push_back("trial " + std::to_string(t) + ": bridge built across M");
        } catch (const geometry::GeometryError& e) {
            if (e.code() != geometry::GeometryErrc::NoBridge) {
                ++rep.failures;
                rep.witnesses.push_back("trial " + std::to_string(t) + ": " + e.what());
            }
        }
    }
    return rep;
}

}  // namespace udw::oracle
