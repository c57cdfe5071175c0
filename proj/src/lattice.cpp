#include "udw/lattice.hpp"

#include <cmath>
#include <sstream>

namespace udw::lattice {

using quantum::cplx;
using quantum::QuantumErrc;
using quantum::QuantumError;

namespace {

// Lowest eigenpair of a Hermitian operator by Lanczos with full reorthogonalisation.
template <class Apply>
std::pair<double, Vec> lanczos_ground(Apply apply, const Vec& start, int max_iter, double tol) {
    std::vector<Vec> basis;
    std::vector<double> alpha, beta;
    basis.push_back(start.normalized());
    Vec w(start.size());
    double theta = 0.0;
    Eigen::VectorXd y;
    for (int k = 0; k < max_iter; ++k) {
        apply(basis[k], w);
        alpha.push_back(basis[k].dot(w).real());
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& b : basis) w -= b * b.dot(w);
        const double bnorm = w.norm();
        const int m = k + 1;
        Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, m);
        for (int i = 0; i < m; ++i) {
            t(i, i) = alpha[i];
            if (i + 1 < m) t(i, i + 1) = t(i + 1, i) = beta[i];
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
        theta = es.eigenvalues()(0);
        y = es.eigenvectors().col(0);
        if (bnorm * std::abs(y(m - 1)) < tol || bnorm < 1e-14) break;
        beta.push_back(bnorm);
        basis.push_back(w / bnorm);
    }
    Vec psi = Vec::Zero(start.size());
    for (Eigen::Index i = 0; i < y.size(); ++i) psi += y(i) * basis[i];
    psi.normalize();
    return {theta, psi};
}

}  // namespace

LatticeField::LatticeField(const LatticeParams& p) : p_(p) {
    if (!(p.mass > 0.0) || !(p.spacing > 0.0))
        throw QuantumError(QuantumErrc::InvalidState, "lattice needs mass > 0 and spacing > 0");
    if (p.sites < 1) throw QuantumError(QuantumErrc::DimensionMismatch, "lattice needs at least one site");
    quantum::FockLayout layout{p.sites, p.n_max, p.dimension_limit};
    dim_ = static_cast<Eigen::Index>(layout.dim());
    omega_ = std::sqrt(p.mass * p.mass + 2.0 / (p.spacing * p.spacing));

    const int d = local_dim();
    b_ = quantum::annihilation(p.n_max);
    phi_ = (b_ + b_.adjoint()) / std::sqrt(2.0 * omega_);
    num_ = b_.adjoint() * b_;

    const Mat pp = quantum::tensor(quantum::Operator(phi_), quantum::Operator(phi_)).matrix();
    pair_h_ = -pp / (p.spacing * p.spacing);
    Eigen::SelfAdjointEigenSolver<Mat> es(pair_h_);
    const Eigen::VectorXd ev = es.eigenvalues();
    Vec ph(ev.size());
    for (Eigen::Index i = 0; i < ev.size(); ++i) ph(i) = std::exp(cplx(0.0, -2.0 * p.spacing * ev(i)));
    pair_gate_ = es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
    pair_gate_inv_ = pair_gate_.adjoint();

    site_phase_.resize(dim_);
    occupation_.resize(dim_);
    for (Eigen::Index i = 0; i < dim_; ++i) {
        Eigen::Index r = i;
        int total = 0;
        for (int s = 0; s < p.sites; ++s) {
            total += static_cast<int>(r % d);
            r /= d;
        }
        occupation_(i) = total;
        site_phase_(i) = std::exp(cplx(0.0, -p.spacing * omega_ * total));
    }

    vac_ = std::make_shared<VacuumCache>();
    Vec start = Vec::Zero(dim_);
    start(0) = 1.0;
    const int max_iter = static_cast<int>(std::min<Eigen::Index>(dim_, 400));
    auto [energy, psi] = lanczos_ground([this](const Vec& in, Vec& out) { apply_hamiltonian(in, out); }, start, max_iter, 1e-13);
    if (std::abs(psi(0)) > 0.0) psi *= std::abs(psi(0)) / psi(0);
    Vec hpsi(dim_);
    apply_hamiltonian(psi, hpsi);
    vac_->state = psi;
    vac_->energy = energy;
    vac_->residual = (hpsi - energy * psi).norm();
    vac_->ready = true;
}

int LatticeField::slot_of(double t) const { return static_cast<int>(std::floor(t / p_.spacing + 0.5)); }

Mat LatticeField::smeared_block(const std::vector<double>& weights) const {
    const int count = static_cast<int>(weights.size());
    std::vector<int> dims(count, local_dim());
    Eigen::Index n = 1;
    for (int i = 0; i < count; ++i) n *= local_dim();
    Mat out = Mat::Zero(n, n);
    for (int i = 0; i < count; ++i)
        if (weights[i] != 0.0) out += weights[i] * quantum::embed(phi_, i, 1, dims).matrix();
    return out;
}

void LatticeField::apply_block(Vec& v, int first, int count, const Mat& op) const {
    if (first < 0 || count < 1 || first + count > p_.sites)
        throw QuantumError(QuantumErrc::IndexOutOfRange, "site block out of range");
    if (v.size() != dim_) throw QuantumError(QuantumErrc::DimensionMismatch, "state vector has wrong dimension");
    Eigen::Index block = 1, low = 1, high = 1;
    for (int s = 0; s < first; ++s) high *= local_dim();
    for (int s = first; s < first + count; ++s) block *= local_dim();
    for (int s = first + count; s < p_.sites; ++s) low *= local_dim();
    if (op.rows() != block) throw QuantumError(QuantumErrc::DimensionMismatch, "block operator has wrong dimension");
    const Mat opt = op.transpose();
    Mat tmp(low, block);
    for (Eigen::Index h = 0; h < high; ++h) {
        Eigen::Map<Mat> m(v.data() + h * block * low, low, block);
        tmp.noalias() = m * opt;
        m = tmp;
    }
}

void LatticeField::layer(Vec& v, int slot, bool inverse) const {
    const int parity = ((slot % 2) + 2) % 2;
    if (inverse) v.array() *= site_phase_.array().conjugate();
    for (int j = parity; j + 1 < p_.sites; j += 2) apply_block(v, j, 2, inverse ? pair_gate_inv_ : pair_gate_);
    if (!inverse) v.array() *= site_phase_.array();
}

void LatticeField::evolve(Vec& v, int from_slot, int to_slot) const {
    for (int k = from_slot; k < to_slot; ++k) layer(v, k, false);
    for (int k = from_slot - 1; k >= to_slot; --k) layer(v, k, true);
}

Vec LatticeField::apply_at(const Vec& v, int slot, int first, int count, const Mat& op) const {
    Vec w = v;
    evolve(w, p_.reference_slot, slot);
    apply_block(w, first, count, op);
    evolve(w, slot, p_.reference_slot);
    return w;
}

void LatticeField::apply_hamiltonian(const Vec& in, Vec& out) const {
    out = (omega_ * occupation_).cast<cplx>().cwiseProduct(in);
    for (int j = 0; j + 1 < p_.sites; ++j) {
        Vec tmp = in;
        apply_block(tmp, j, 2, pair_h_);
        out += tmp;
    }
}

Mat LatticeField::hamiltonian_dense() const {
    Mat h(dim_, dim_);
    Vec e = Vec::Zero(dim_), col(dim_);
    for (Eigen::Index i = 0; i < dim_; ++i) {
        e.setZero();
        e(i) = 1.0;
        apply_hamiltonian(e, col);
        h.col(i) = col;
    }
    return h;
}

const Vec& LatticeField::vacuum() const { return vac_->state; }
double LatticeField::vacuum_energy() const { return vac_->energy; }
double LatticeField::vacuum_residual() const { return vac_->residual; }

}  // namespace udw::lattice
