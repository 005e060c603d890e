// SPDX-License-Identifier: Apache-2.0

#ifndef IRSBF_OFPB_HPP
#define IRSBF_OFPB_HPP

#include <cmath>

#include "irsbf/channel.hpp"

namespace irsbf {

/// Vectorized form of the OF-PB objective. With x the IRS reflection vector,
///   vec(H_eq,B H_eq,E^H) = h_tilde_a + H1 x^* + H2 x + H3 vec(x x^H)
///   vec(H_eq,B)          = h_ab + H4 x
/// and H5, H6 collect every quadratic x-term of the squared norms so that the
/// split objective f(x, y1, y2) is linear in x on the unit torus.
struct OfpbOperatorSet {
    CVec h_tilde_a;  // N_B N_E
    CMat h_pb1;      // N_B N_E x N_I
    CMat h_pb2;      // N_B N_E x N_I
    CMat h_pb3;      // N_B N_E x N_I^2
    CMat h_pb4;      // N_B N_A x N_I
    CMat h_pb5;      // N_I x N_I, Hermitian
    CMat h_pb6;      // N_I x N_I
    CVec h_ab_vec;   // N_B N_A
    RMat h_pb3_lifted;  // [Re -Im; Im Re] of h_pb3
    double alpha_b = 0.0;

    Eigen::Index n_irs() const { return h_pb1.cols(); }
};

inline RMat lift_matrix(const CMat& m) {
    const auto r = m.rows(), c = m.cols();
    RMat out(2 * r, 2 * c);
    out.topLeftCorner(r, c) = m.real();
    out.topRightCorner(r, c) = -m.imag();
    out.bottomLeftCorner(r, c) = m.imag();
    out.bottomRightCorner(r, c) = m.real();
    return out;
}

inline OfpbOperatorSet build_operators(const ChannelSet& set, double alpha_b) {
    set.validate();
    if (!(alpha_b >= 0.0)) throw DomainError("build_operators: alpha_b must be >= 0");
    using detail::khatri_rao;
    using detail::kronecker;
    using detail::vec;

    OfpbOperatorSet ops;
    ops.alpha_b = alpha_b;
    ops.h_tilde_a = vec(set.h_ab * set.h_ae.adjoint());
    ops.h_pb1 = khatri_rao(set.h_ie.conjugate(), set.h_ab * set.h_ai.adjoint());
    ops.h_pb2 = khatri_rao((set.h_ai * set.h_ae.adjoint()).transpose(), set.h_ib);
    ops.h_pb4 = khatri_rao(set.h_ai.transpose(), set.h_ib);
    const CVec gram = vec(set.h_ai * set.h_ai.adjoint());
    ops.h_pb3 = kronecker(set.h_ie.conjugate(), set.h_ib) * gram.asDiagonal();
    ops.h_ab_vec = vec(set.h_ab);
    ops.h_pb5 = (ops.h_pb1.adjoint() * ops.h_pb1).conjugate() + ops.h_pb2.adjoint() * ops.h_pb2 -
                alpha_b * ops.h_pb4.adjoint() * ops.h_pb4;
    ops.h_pb6 = ops.h_pb1.adjoint() * ops.h_pb2;
    ops.h_pb3_lifted = lift_matrix(ops.h_pb3);
    return ops;
}

/// vec(y y^H) = conj(y) (x) y.
inline CVec outer_vec(const CVec& y) {
    const auto n = y.size();
    CVec out(n * n);
    for (Eigen::Index j = 0; j < n; ++j) out.segment(j * n, n) = std::conj(y(j)) * y;
    return out;
}

/// a_y = h_tilde_a + H1 x^* + H2 x, the part of the fourth-order residual fixed by x.
inline CVec y_anchor(const OfpbOperatorSet& ops, const CVec& x) {
    return ops.h_tilde_a + ops.h_pb1 * x.conjugate() + ops.h_pb2 * x;
}

/// The split objective f(x, y1, y2).
inline double eval_f(const OfpbOperatorSet& ops, const CVec& x, const CVec& y1, const CVec& y2) {
    const auto n = ops.n_irs();
    detail::require_dims(x.size() == n && y1.size() == n && y2.size() == n, "eval_f vector length");
    const double t_quartic = (y_anchor(ops, x) + ops.h_pb3 * outer_vec(y1)).squaredNorm();
    const double t_bob = ops.alpha_b * (ops.h_ab_vec + ops.h_pb4 * x).squaredNorm();
    const cplx quad = -(x.adjoint() * ops.h_pb5 * x)(0) - 2.0 * std::real((x.transpose() * ops.h_pb6 * x)(0)) +
                      (y2.adjoint() * ops.h_pb5 * y2)(0) + 2.0 * std::real((y2.transpose() * ops.h_pb6 * y2)(0));
    const double value = t_quartic - t_bob + std::real(quad);
    if (std::abs(std::imag(quad)) > 1e-9 * (1.0 + std::abs(value) + std::abs(std::real(quad))))
        throw InputError("eval_f: Hermitian quadratic form has a non-negligible imaginary part");
    return value;
}

inline RVec real_lift(const CVec& y) {
    RVec out(2 * y.size());
    out.head(y.size()) = y.real();
    out.tail(y.size()) = y.imag();
    return out;
}

inline CVec complex_from_lift(const RVec& y_hat) {
    detail::require_dims(y_hat.size() % 2 == 0, "complex_from_lift even length");
    const auto n = y_hat.size() / 2;
    CVec out(n);
    for (Eigen::Index i = 0; i < n; ++i) out(i) = cplx(y_hat(i), y_hat(n + i));
    return out;
}

/// (K1 y (x) K2 + K3 y (x) K4) y, the lifted image of vec(y y^H).
/// K1 = diag(I, -I), K2 = [I 0], K3 = [0 I; I 0], K4 = [0 I].
inline RVec lifted_outer(const RVec& y_hat) {
    const auto n = y_hat.size() / 2;
    const RVec u = y_hat.head(n);
    const RVec v = y_hat.tail(n);
    RVec k1y(2 * n), k3y(2 * n);
    k1y << u, -v;
    k3y << v, u;
    RVec out(2 * n * n);
    for (Eigen::Index i = 0; i < 2 * n; ++i) out.segment(i * n, n) = k1y(i) * u + k3y(i) * v;
    return out;
}

/// f_y(y_hat) = || H3_hat lifted_outer(y_hat) + a_hat ||^2.
inline double lifted_quartic(const OfpbOperatorSet& ops, const RVec& y_hat, const CVec& anchor) {
    detail::require_dims(y_hat.size() == 2 * ops.n_irs(), "lifted_quartic length");
    return (ops.h_pb3_lifted * lifted_outer(y_hat) + real_lift(anchor)).squaredNorm();
}

/// Gradient of lifted_quartic with respect to y_hat.
inline RVec grad_fy(const OfpbOperatorSet& ops, const RVec& y_hat, const CVec& anchor) {
    const auto n = ops.n_irs();
    detail::require_dims(y_hat.size() == 2 * n, "grad_fy length");
    const RVec r = ops.h_pb3_lifted * lifted_outer(y_hat) + real_lift(anchor);
    const RVec s = ops.h_pb3_lifted.transpose() * r;
    const Eigen::Map<const RMat> s1(s.data(), n, n);
    const Eigen::Map<const RMat> s2(s.data() + n * n, n, n);
    const RVec u = y_hat.head(n);
    const RVec v = y_hat.tail(n);
    const RMat sym = s1 + s1.transpose();
    const RMat skew = s2 - s2.transpose();
    RVec g(2 * n);
    g.head(n) = 2.0 * (sym * u - skew * v);
    g.tail(n) = 2.0 * (sym * v + skew * u);
    return g;
}

/// Terms of the sufficient Lipschitz constant of grad f_y. The iterate bound
/// c in c2 = max(c, 1) defaults to 1.
struct LipschitzBound {
    double quartic = 0.0;  // 8 c2^2 |sum(H3_hat^T H3_hat)|
    double cross = 0.0;    // 4 c2^2 |sum(H3_hat^T H3_hat)|
    double anchor = 0.0;   // 4 || |H3_hat|^T a_tilde ||_1

    double total() const { return quartic + cross + anchor; }
};

inline LipschitzBound lipschitz_terms(const OfpbOperatorSet& ops, double c = 1.0) {
    const double c2 = std::max(c, 1.0);
    const RMat& h = ops.h_pb3_lifted;
    // sum of all entries of H^T H is ||H 1||^2
    const double gram_sum = (h * RVec::Ones(h.cols())).squaredNorm();
    // a_tilde bounds |a_y| entrywise over every unit-modulus x; Re and Im share it.
    const auto m = ops.h_tilde_a.size();
    RVec a_tilde(2 * m);
    for (Eigen::Index i = 0; i < m; ++i) {
        const double b = std::abs(ops.h_tilde_a(i)) + ops.h_pb1.row(i).cwiseAbs().sum() +
                         ops.h_pb2.row(i).cwiseAbs().sum();
        a_tilde(i) = b;
        a_tilde(m + i) = b;
    }
    LipschitzBound out;
    out.quartic = 8.0 * c2 * c2 * std::abs(gram_sum);
    out.cross = 4.0 * c2 * c2 * std::abs(gram_sum);
    out.anchor = 4.0 * (h.cwiseAbs().transpose() * a_tilde).lpNorm<1>();
    return out;
}

inline double lipschitz_bound(const OfpbOperatorSet& ops) { return lipschitz_terms(ops).total(); }

}  // namespace irsbf

#endif  // IRSBF_OFPB_HPP
