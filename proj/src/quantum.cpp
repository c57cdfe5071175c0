#include "udw/quantum.hpp"

#include <sstream>

namespace udw::quantum {

namespace {

void require_same(Eigen::Index a, Eigen::Index b, const char* what) {
    if (a != b) {
        std::ostringstream os;
        os << what << ": dimension " << a << " vs " << b;
        throw QuantumError(QuantumErrc::DimensionMismatch, os.str());
    }
}

}  // namespace

Operator::Operator(Mat m) : m_(std::move(m)) {
    if (m_.rows() != m_.cols()) throw QuantumError(QuantumErrc::DimensionMismatch, "operator must be square");
    if (!m_.allFinite()) throw QuantumError(QuantumErrc::InvalidState, "operator has non-finite entries");
}

Operator Operator::operator*(const Operator& o) const {
    require_same(dim(), o.dim(), "product");
    return Operator(m_ * o.m_);
}

Operator Operator::operator+(const Operator& o) const {
    require_same(dim(), o.dim(), "sum");
    return Operator(m_ + o.m_);
}

Operator Operator::operator-(const Operator& o) const {
    require_same(dim(), o.dim(), "difference");
    return Operator(m_ - o.m_);
}

StateResiduals residuals_of(const Mat& rho) {
    StateResiduals r;
    r.hermiticity = (rho - rho.adjoint()).norm();
    r.trace = std::abs(rho.trace() - cplx(1.0, 0.0));
    const Mat h = 0.5 * (rho + rho.adjoint());
    Eigen::SelfAdjointEigenSolver<Mat> es(h, Eigen::EigenvaluesOnly);
    r.min_eigenvalue = es.eigenvalues().minCoeff();
    return r;
}

DensityState DensityState::from(const Operator& op, const StateTolerances& tol) {
    const StateResiduals r = residuals_of(op.matrix());
    if (r.hermiticity > tol.hermiticity || r.trace > tol.trace || r.min_eigenvalue < -tol.positivity) {
        std::ostringstream os;
        os << "density invariants violated: hermiticity " << r.hermiticity << ", trace error " << r.trace
           << ", min eigenvalue " << r.min_eigenvalue;
        throw QuantumError(QuantumErrc::InvalidState, os.str());
    }
    return DensityState(op);
}

DensityState DensityState::pure(const Vec& psi) {
    const double n = psi.norm();
    if (n == 0.0) throw QuantumError(QuantumErrc::InvalidState, "zero vector");
    const Vec u = psi / n;
    return DensityState(Operator(u * u.adjoint()));
}

StateResiduals DensityState::residuals() const { return residuals_of(op_.matrix()); }

Eigen::Index CompositeSpace::total_dim() const {
    Eigen::Index n = 1;
    for (int d : factor_dims) {
        if (d < 1) throw QuantumError(QuantumErrc::DimensionMismatch, "factor dimension must be positive");
        n *= d;
    }
    return n;
}

Operator tensor(const Operator& a, const Operator& b) {
    const Mat& x = a.matrix();
    const Mat& y = b.matrix();
    Mat out(x.rows() * y.rows(), x.cols() * y.cols());
    for (Eigen::Index i = 0; i < x.rows(); ++i)
        for (Eigen::Index j = 0; j < x.cols(); ++j) out.block(i * y.rows(), j * y.cols(), y.rows(), y.cols()) = x(i, j) * y;
    return Operator(std::move(out));
}

Operator tensor(const std::vector<Operator>& ops) {
    if (ops.empty()) return Operator::identity(1);
    Operator acc = ops.front();
    for (std::size_t i = 1; i < ops.size(); ++i) acc = tensor(acc, ops[i]);
    return acc;
}

Vec tensor(const Vec& a, const Vec& b) {
    Vec out(a.size() * b.size());
    for (Eigen::Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a(i) * b;
    return out;
}

DensityState tensor(const DensityState& a, const DensityState& b) {
    return DensityState::from(tensor(a.op(), b.op()));
}

Mat partial_trace(const Mat& m, const CompositeSpace& space, const std::vector<int>& keep) {
    const Eigen::Index total = space.total_dim();
    require_same(m.rows(), total, "partial trace");
    const int nf = static_cast<int>(space.factor_dims.size());
    std::vector<bool> kept(nf, false);
    for (int k : keep) {
        if (k < 0 || k >= nf) throw QuantumError(QuantumErrc::IndexOutOfRange, "partial trace keep index out of range");
        kept[k] = true;
    }
    std::vector<Eigen::Index> stride(nf);
    Eigen::Index s = 1;
    for (int f = nf - 1; f >= 0; --f) {
        stride[f] = s;
        s *= space.factor_dims[f];
    }
    // Offsets of every multi-index restricted to kept / traced factors, in declared order.
    auto offsets = [&](bool want_kept) {
        std::vector<Eigen::Index> out{0};
        for (int f = 0; f < nf; ++f) {
            if (kept[f] != want_kept) continue;
            std::vector<Eigen::Index> next;
            next.reserve(out.size() * space.factor_dims[f]);
            for (Eigen::Index o : out)
                for (int d = 0; d < space.factor_dims[f]; ++d) next.push_back(o + d * stride[f]);
            out.swap(next);
        }
        return out;
    };
    const auto ko = offsets(true);
    const auto to = offsets(false);
    const auto nk = static_cast<Eigen::Index>(ko.size());
    Mat out = Mat::Zero(nk, nk);
    for (Eigen::Index i = 0; i < nk; ++i)
        for (Eigen::Index j = 0; j < nk; ++j) {
            cplx acc = 0.0;
            for (Eigen::Index t : to) acc += m(ko[i] + t, ko[j] + t);
            out(i, j) = acc;
        }
    return out;
}

DensityState partial_trace(const DensityState& rho, const CompositeSpace& space, const std::vector<int>& keep) {
    return DensityState::from(Operator(partial_trace(rho.matrix(), space, keep)));
}

cplx expectation(const DensityState& rho, const Operator& o) {
    require_same(rho.dim(), o.dim(), "expectation");
    return (rho.matrix() * o.matrix()).trace();
}

std::size_t FockLayout::dim() const {
    if (oscillators < 1 || n_max < 1) throw QuantumError(QuantumErrc::DimensionMismatch, "need >= 1 oscillator and n_max >= 1");
    std::size_t d = 1;
    for (int i = 0; i < oscillators; ++i) {
        d *= static_cast<std::size_t>(n_max + 1);
        if (d > dimension_limit) {
            std::ostringstream os;
            os << "Fock dimension (" << n_max + 1 << ")^" << oscillators << " exceeds limit " << dimension_limit;
            throw QuantumError(QuantumErrc::DimensionOverflow, os.str());
        }
    }
    return d;
}

Mat annihilation(int n_max) {
    Mat a = Mat::Zero(n_max + 1, n_max + 1);
    for (int n = 1; n <= n_max; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
    return a;
}

Operator embed(const Mat& local, int first, int count, const std::vector<int>& dims) {
    const int nf = static_cast<int>(dims.size());
    if (first < 0 || count < 1 || first + count > nf)
        throw QuantumError(QuantumErrc::IndexOutOfRange, "embedding block out of range");
    Eigen::Index before = 1, block = 1, after = 1;
    for (int f = 0; f < first; ++f) before *= dims[f];
    for (int f = first; f < first + count; ++f) block *= dims[f];
    for (int f = first + count; f < nf; ++f) after *= dims[f];
    require_same(local.rows(), block, "embed");
    return tensor({Operator::identity(before), Operator(local), Operator::identity(after)});
}

std::vector<Operator> mode_operators(const FockLayout& layout) {
    layout.dim();
    const std::vector<int> dims(layout.oscillators, layout.n_max + 1);
    const Mat a = annihilation(layout.n_max);
    std::vector<Operator> out;
    for (int k = 0; k < layout.oscillators; ++k) out.push_back(embed(a, k, 1, dims));
    return out;
}

Operator smeared_field(const FockLayout& layout, const std::vector<cplx>& coeffs) {
    if (static_cast<int>(coeffs.size()) != layout.oscillators)
        throw QuantumError(QuantumErrc::DimensionMismatch, "one coefficient per oscillator required");
    const auto modes = mode_operators(layout);
    const auto n = static_cast<Eigen::Index>(layout.dim());
    Mat phi = Mat::Zero(n, n);
    for (std::size_t k = 0; k < modes.size(); ++k) {
        const Mat& a = modes[k].matrix();
        phi += coeffs[k] * a + std::conj(coeffs[k]) * a.adjoint();
    }
    return Operator(std::move(phi));
}

}  // namespace udw::quantum
