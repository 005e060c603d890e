// SPDX-License-Identifier: Apache-2.0

#ifndef IRSBF_TYPES_HPP
#define IRSBF_TYPES_HPP

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace irsbf {

using cplx = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;
inline constexpr cplx kJ{0.0, 1.0};

/// Precondition violated on a scalar argument (negative distance, bad count, ...).
class DomainError : public std::domain_error {
  public:
    using std::domain_error::domain_error;
};

/// Inconsistent or non-finite input data.
class InputError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// Rejected experiment configuration; raised before any run starts.
class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Numerical failure inside a solver step.
class SolverError : public std::runtime_error {
  public:
    SolverError(const std::string& what, double smallest_singular_value)
        : std::runtime_error(what), smallest_singular_value_(smallest_singular_value) {}

    double smallest_singular_value() const noexcept { return smallest_singular_value_; }

  private:
    double smallest_singular_value_;
};

namespace detail {

inline void require_dims(bool ok, const char* what) {
    if (!ok) throw InputError(std::string("dimension mismatch: ") + what);
}

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& m) {
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            const auto v = m(i, j);
            if (!std::isfinite(std::real(v)) || !std::isfinite(std::imag(v))) return false;
        }
    return true;
}

/// Column-wise Kronecker product: column n is a_n (x) b_n.
inline CMat khatri_rao(const CMat& a, const CMat& b) {
    require_dims(a.cols() == b.cols(), "khatri_rao column count");
    CMat out(a.rows() * b.rows(), a.cols());
    for (Eigen::Index n = 0; n < a.cols(); ++n)
        for (Eigen::Index i = 0; i < a.rows(); ++i)
            out.col(n).segment(i * b.rows(), b.rows()) = a(i, n) * b.col(n);
    return out;
}

inline CMat kronecker(const CMat& a, const CMat& b) {
    CMat out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index j = 0; j < a.cols(); ++j)
        for (Eigen::Index i = 0; i < a.rows(); ++i)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

/// Column-stacking vectorization.
inline CVec vec(const CMat& m) {
    return Eigen::Map<const CVec>(m.data(), m.size());
}

inline CMat unvec(const CVec& v, Eigen::Index rows, Eigen::Index cols) {
    require_dims(v.size() == rows * cols, "unvec size");
    return Eigen::Map<const CMat>(v.data(), rows, cols);
}

/// log2 det of a Hermitian positive-definite matrix.
inline double log2det_hpd(const CMat& a) {
    Eigen::LLT<CMat> llt(a);
    if (llt.info() != Eigen::Success) throw InputError("log2det_hpd: matrix not positive definite");
    double acc = 0.0;
    for (Eigen::Index i = 0; i < a.rows(); ++i) acc += std::log2(std::real(llt.matrixL()(i, i)));
    return 2.0 * acc;
}

}  // namespace detail
}  // namespace irsbf

#endif  // IRSBF_TYPES_HPP
