#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace udw::quantum {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

enum class QuantumErrc { DimensionMismatch, DimensionOverflow, InvalidState, IndexOutOfRange, Completeness, NegativeProbability };

class QuantumError : public std::runtime_error {
public:
    QuantumError(QuantumErrc code, const std::string& what) : std::runtime_error(what), code_(code) {}
    QuantumErrc code() const noexcept { return code_; }

private:
    QuantumErrc code_;
};

class Operator {
public:
    Operator() = default;
    explicit Operator(Mat m);

    static Operator identity(Eigen::Index n) { return Operator(Mat::Identity(n, n)); }
    static Operator zero(Eigen::Index n) { return Operator(Mat::Zero(n, n)); }

    Eigen::Index dim() const { return m_.rows(); }
    const Mat& matrix() const { return m_; }
    Operator adjoint() const { return Operator(m_.adjoint()); }
    cplx trace() const { return m_.trace(); }
    double hermiticity_residual() const { return (m_ - m_.adjoint()).norm(); }

    Operator operator*(const Operator& o) const;
    Operator operator+(const Operator& o) const;
    Operator operator-(const Operator& o) const;
    Operator operator*(cplx s) const { return Operator(m_ * s); }

private:
    Mat m_;
};

struct StateTolerances {
    double hermiticity = 1e-12;
    double trace = 1e-10;
    double positivity = 1e-10;
};

struct StateResiduals {
    double hermiticity = 0.0;
    double trace = 0.0;
    double min_eigenvalue = 0.0;
};

class DensityState {
public:
    // Validates the three invariants; throws InvalidState otherwise.
    static DensityState from(const Operator& op, const StateTolerances& tol = {});
    static DensityState pure(const Vec& psi);

    const Operator& op() const { return op_; }
    const Mat& matrix() const { return op_.matrix(); }
    Eigen::Index dim() const { return op_.dim(); }
    StateResiduals residuals() const;

private:
    explicit DensityState(Operator op) : op_(std::move(op)) {}
    Operator op_;
};

StateResiduals residuals_of(const Mat& rho);

struct CompositeSpace {
    std::vector<int> factor_dims;

    Eigen::Index total_dim() const;
};

Operator tensor(const Operator& a, const Operator& b);
Operator tensor(const std::vector<Operator>& ops);
Vec tensor(const Vec& a, const Vec& b);
DensityState tensor(const DensityState& a, const DensityState& b);

Mat partial_trace(const Mat& m, const CompositeSpace& space, const std::vector<int>& keep);
DensityState partial_trace(const DensityState& rho, const CompositeSpace& space, const std::vector<int>& keep);

cplx expectation(const DensityState& rho, const Operator& o);

// Truncated oscillators, occupation 0..n_max each.
struct FockLayout {
    int oscillators = 1;
    int n_max = 1;
    std::size_t dimension_limit = std::size_t{1} << 16;

    std::size_t dim() const;
};

Mat annihilation(int n_max);
std::vector<Operator> mode_operators(const FockLayout& layout);
// Σ_k (f_k a_k + f_k* a_k†)
Operator smeared_field(const FockLayout& layout, const std::vector<cplx>& coeffs);
// Operator acting on a contiguous block of factors, identity elsewhere.
Operator embed(const Mat& local, int first, int count, const std::vector<int>& dims);

}  // namespace udw::quantum
