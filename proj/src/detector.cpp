#include "udw/detector.hpp"

#include <cmath>
#include <sstream>

namespace udw::detector {

using quantum::QuantumErrc;
using quantum::QuantumError;

namespace {

double bump_shape(double u) { return std::abs(u) < 1.0 ? std::exp(-1.0 / (1.0 - u * u)) : 0.0; }

double simpson(double (*f)(double), double a, double b, int n) {
    if (b <= a) return 0.0;
    const double h = (b - a) / n;
    double s = f(a) + f(b);
    for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
}

double bump_norm() {
    static const double norm = simpson(bump_shape, -1.0, 1.0, 4000);
    return norm;
}

}  // namespace

double Switching::operator()(double tau) const {
    if (tau < on() || tau > off()) return 0.0;
    if (name == "box") return 1.0;
    const double c = std::cos(M_PI * (tau - center) / duration);
    return c * c;
}

double Smearing::operator()(double x) const {
    if (std::abs(x) > radius) return 0.0;
    if (name == "box") return 0.5 / radius;
    return bump_shape(x / radius) / (radius * bump_norm());
}

double Smearing::integral(double a, double b) const {
    a = std::max(a, -radius);
    b = std::min(b, radius);
    if (b <= a) return 0.0;
    if (name == "box") return (b - a) * 0.5 / radius;
    return simpson(bump_shape, a / radius, b / radius, 2000) / bump_norm();
}

void DetectorSpec::validate() const {
    std::ostringstream err;
    if (!(gap >= 0.0)) err << label << ": gap must be >= 0. ";
    if (!std::isfinite(coupling)) err << label << ": coupling must be finite. ";
    if (!(switching.duration > 0.0) || (switching.name != "cos2" && switching.name != "box"))
        err << label << ": switching must be cos2 or box with positive duration. ";
    if (!(smearing.radius > 0.0) || (smearing.name != "bump" && smearing.name != "box"))
        err << label << ": smearing must be bump or box with positive radius. ";
    if (initial_state.size() != 2 || std::abs(initial_state.norm() - 1.0) > 1e-12)
        err << label << ": initial state must be a unit vector in C^2. ";
    if (basis.rows() != 2 || basis.cols() != 2 || (basis.adjoint() * basis - Mat::Identity(2, 2)).norm() > 1e-12)
        err << label << ": measurement basis must be orthonormal. ";
    if (position.empty()) err << label << ": position missing. ";
    const std::string s = err.str();
    if (!s.empty()) throw QuantumError(QuantumErrc::InvalidState, s);
}

LatticeCoupling couple_sites(const DetectorSpec& spec, const lattice::LatticeParams& p) {
    spec.validate();
    if (spec.position.size() != 1)
        throw QuantumError(QuantumErrc::DimensionMismatch, spec.label + ": lattice dynamics is defined for d = 2 only");
    const double a = p.spacing;
    LatticeCoupling c;
    c.slot = static_cast<int>(std::floor(spec.switching.center / a + 0.5));
    const double lo = (c.slot - 0.5) * a, hi = (c.slot + 0.5) * a;
    if (spec.switching.on() < lo - 1e-12 || spec.switching.off() > hi + 1e-12) {
        std::ostringstream os;
        os << spec.label << ": switching support [" << spec.switching.on() << ", " << spec.switching.off()
           << "] must fit inside one time slot of length " << a;
        throw QuantumError(QuantumErrc::InvalidState, os.str());
    }
    const double x0 = spec.position[0];
    int first = -1;
    for (int j = 0; j < p.sites; ++j) {
        const double xj = j * a;
        const double w = spec.smearing.integral(xj - 0.5 * a - x0, xj + 0.5 * a - x0);
        if (w <= 0.0) continue;
        if (first < 0) first = j;
        c.weights.resize(j - first + 1, 0.0);
        c.weights[j - first] = w;
    }
    if (first < 0) throw QuantumError(QuantumErrc::IndexOutOfRange, spec.label + ": smearing misses every lattice site");
    c.first_site = first;
    return c;
}

LatticeCoupling couple(const DetectorSpec& spec, const lattice::LatticeField& field) {
    LatticeCoupling c = couple_sites(spec, field.params());
    c.field = field.smeared_block(c.weights);
    return c;
}

Mat monopole(double gap, double tau) {
    Mat m = Mat::Zero(2, 2);
    m(1, 0) = std::exp(cplx(0.0, gap * tau));
    m(0, 1) = std::exp(cplx(0.0, -gap * tau));
    return m;
}

quantum::Operator interaction_hamiltonian(const DetectorSpec& spec, const Mat& field, double tau) {
    const double s = spec.coupling * spec.switching(tau);
    return quantum::tensor(quantum::Operator(monopole(spec.gap, tau) * s), quantum::Operator(field));
}

namespace {

Mat ordered_product(const DetectorSpec& spec, const Eigen::SelfAdjointEigenSolver<Mat>& es, int steps) {
    const Eigen::Index nf = es.eigenvalues().size();
    const Mat& v = es.eigenvectors();
    const double t0 = spec.switching.on();
    const double dt = spec.switching.duration / steps;
    Mat u = Mat::Identity(2 * nf, 2 * nf);
    Mat step(2 * nf, 2 * nf);
    Vec ph(nf);
    for (int s = 0; s < steps; ++s) {
        const double tau = t0 + (s + 0.5) * dt;
        const double c = spec.coupling * spec.switching(tau) * dt;
        if (c == 0.0) continue;
        // m(τ) = P₊ − P₋ with |±⟩ = (|0⟩ ± e^{iωτ}|1⟩)/√2, so exp(−ic m⊗φ) = Σ± P± ⊗ exp(∓icφ).
        const cplx e = std::exp(cplx(0.0, spec.gap * tau));
        Mat pplus(2, 2);
        pplus << 0.5, 0.5 * std::conj(e), 0.5 * e, 0.5;
        const Mat pminus = Mat::Identity(2, 2) - pplus;
        for (Eigen::Index i = 0; i < nf; ++i) ph(i) = std::exp(cplx(0.0, -c * es.eigenvalues()(i)));
        const Mat eminus = v * ph.asDiagonal() * v.adjoint();
        const Mat eplus = eminus.adjoint();
        for (int r = 0; r < 2; ++r)
            for (int q = 0; q < 2; ++q) step.block(r * nf, q * nf, nf, nf) = pplus(r, q) * eminus + pminus(r, q) * eplus;
        u = step * u;
    }
    return u;
}

}  // namespace

Evolution evolve(const DetectorSpec& spec, const Mat& field, int steps, double max_error) {
    if (steps < 1) throw QuantumError(QuantumErrc::InvalidState, "evolution needs at least one step");
    spec.validate();
    Eigen::SelfAdjointEigenSolver<Mat> es(field);
    Evolution ev;
    ev.steps = steps;
    ev.unitary = ordered_product(spec, es, steps);
    const Mat fine = ordered_product(spec, es, 2 * steps);
    ev.error_estimate = (fine - ev.unitary).norm();
    ev.unitarity_residual = (ev.unitary.adjoint() * ev.unitary - Mat::Identity(ev.unitary.rows(), ev.unitary.cols())).norm();
    if (ev.error_estimate > max_error) {
        std::ostringstream os;
        os << spec.label << ": " << steps << " steps leave error estimate " << ev.error_estimate << " above " << max_error;
        throw QuantumError(QuantumErrc::Completeness, os.str());
    }
    return ev;
}

double KrausSet::completeness_residual() const {
    if (ops.empty()) return 0.0;
    Mat s = Mat::Zero(ops.front().rows(), ops.front().cols());
    for (const auto& k : ops) s += k.adjoint() * k;
    return (s - Mat::Identity(s.rows(), s.cols())).norm();
}

KrausSet kraus_from_detector(const Mat& unitary, const Vec& gamma, const Mat& basis, double tol) {
    const Eigen::Index nf = unitary.rows() / 2;
    if (unitary.rows() != 2 * nf || unitary.cols() != unitary.rows())
        throw QuantumError(QuantumErrc::DimensionMismatch, "detector unitary must act on C^2 ⊗ field");
    KrausSet ks;
    for (Eigen::Index i = 0; i < basis.cols(); ++i) {
        Mat k = Mat::Zero(nf, nf);
        for (int d = 0; d < 2; ++d)
            for (int d2 = 0; d2 < 2; ++d2) {
                const cplx w = std::conj(basis(d, i)) * gamma(d2);
                if (w != cplx(0.0)) k += w * unitary.block(d * nf, d2 * nf, nf, nf);
            }
        ks.ops.push_back(std::move(k));
    }
    const double r = ks.completeness_residual();
    if (r > tol) {
        std::ostringstream os;
        os << "Kraus completeness residual " << r << " above " << tol;
        throw QuantumError(QuantumErrc::Completeness, os.str());
    }
    return ks;
}

std::vector<double> povm_probabilities(const quantum::DensityState& rho, const KrausSet& ks) {
    std::vector<double> p;
    for (const auto& k : ks.ops) {
        if (k.rows() != rho.dim()) throw QuantumError(QuantumErrc::DimensionMismatch, "state and Kraus dimensions differ");
        const double v = (k * rho.matrix() * k.adjoint()).trace().real();
        if (v < -1e-10) throw QuantumError(QuantumErrc::NegativeProbability, "negative outcome probability");
        p.push_back(v);
    }
    return p;
}

double cutoff_leakage(const Mat& unitary, int local_dim, int count) {
    const Eigen::Index nf = unitary.rows() / 2;
    std::vector<Eigen::Index> top;
    for (Eigen::Index f = 0; f < nf; ++f) {
        Eigen::Index r = f;
        bool at_top = false;
        for (int s = 0; s < count; ++s) {
            at_top = at_top || r % local_dim == local_dim - 1;
            r /= local_dim;
        }
        if (at_top) top.push_back(f);
    }
    Mat sub(2 * static_cast<Eigen::Index>(top.size()), 2);
    for (int d = 0; d < 2; ++d)
        for (std::size_t i = 0; i < top.size(); ++i)
            for (int d2 = 0; d2 < 2; ++d2) sub(d * top.size() + i, d2) = unitary(d * nf + top[i], d2 * nf);
    if (sub.rows() == 0) return 0.0;
    Eigen::JacobiSVD<Mat> svd(sub);
    return svd.singularValues()(0);
}

geometry::MeasurementRegion measurement_region_of(const DetectorSpec& spec) {
    geometry::SpacetimePoint lo{spec.switching.on(), spec.position}, hi{spec.switching.off(), spec.position};
    for (std::size_t i = 0; i < spec.position.size(); ++i) {
        lo.x[i] -= spec.smearing.radius;
        hi.x[i] += spec.smearing.radius;
    }
    return geometry::MeasurementRegion::with_defaults(spec.label, geometry::BoxRegion::make(lo, hi), spec.output,
                                                      spec.delay);
}

geometry::MeasurementRegion lattice_measurement_region(const DetectorSpec& spec, const LatticeCoupling& c,
                                                       const lattice::LatticeParams& p) {
    const double a = p.spacing;
    const double x0 = spec.position.at(0);
    geometry::SpacetimePoint lo{std::min((c.slot - 0.5) * a, spec.switching.on()),
                                {std::min(x0 - spec.smearing.radius, c.first_site * a)}};
    geometry::SpacetimePoint hi{std::max((c.slot + 0.5) * a, spec.switching.off()),
                                {std::max(x0 + spec.smearing.radius, (c.first_site + c.count() - 1) * a)}};
    return geometry::MeasurementRegion::with_defaults(spec.label, geometry::BoxRegion::make(lo, hi), spec.output,
                                                      spec.delay);
}

DetectorRun run_detector(const DetectorSpec& spec, const lattice::LatticeField& field, int steps,
                         double completeness_tol) {
    DetectorRun run;
    run.spec = spec;
    run.coupling = couple(spec, field);
    run.evolution = evolve(spec, run.coupling.field, steps);
    run.kraus = kraus_from_detector(run.evolution.unitary, spec.initial_state, spec.basis, completeness_tol);
    run.kraus.slot = run.coupling.slot;
    run.kraus.first_site = run.coupling.first_site;
    run.kraus.count = run.coupling.count();
    run.region = lattice_measurement_region(spec, run.coupling, field.params());
    run.leakage = cutoff_leakage(run.evolution.unitary, field.local_dim(), run.coupling.count());
    return run;
}

}  // namespace udw::detector
