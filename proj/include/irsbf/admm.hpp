// SPDX-License-Identifier: Apache-2.0

#ifndef IRSBF_ADMM_HPP
#define IRSBF_ADMM_HPP

#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <vector>

#include "irsbf/ofpb.hpp"

namespace irsbf {

/// Random: x, y1, y2 independent uniform phases and Gaussian duals.
/// Consensus: random x with y1 = y2 = x and zero duals.
enum class AdmmInit { Random, Consensus };

struct AdmmParams {
    double rho1 = 16.0;
    double rho2 = 16.0;
    double l_y = 8.0;
    double eps1 = 1e-5;
    int max_iter = 1000;
    // Rescale the channels so the operator energy equals target_energy before
    // solving. The minimizer is unchanged; only the solver's working units move.
    bool normalize = true;
    double target_energy = 4.0;
    AdmmInit init = AdmmInit::Random;
    double dual_init_scale = 1.0;  // std-dev of the random dual entries, solver units

    void validate() const {
        if (!(rho1 > 0.0) || !(rho2 > 0.0) || !(l_y > 0.0) || !(eps1 > 0.0))
            throw DomainError("AdmmParams: rho1, rho2, l_y and eps1 must be > 0");
        if (!(eps1 < 1.0)) throw DomainError("AdmmParams: eps1 must be < 1");
        if (max_iter < 1) throw DomainError("AdmmParams: max_iter must be >= 1");
        if (!(target_energy > 0.0)) throw DomainError("AdmmParams: target_energy must be > 0");
        if (!(dual_init_scale >= 0.0)) throw DomainError("AdmmParams: dual_init_scale must be >= 0");
    }
};

struct AdmmState {
    CVec x;
    CVec y1;
    CVec y2;
    CVec lambda1;
    CVec lambda2;
    int k = 0;

    /// Feasible consensus start: y1 = y2 = x, zero duals.
    static AdmmState consensus(const CVec& x0) {
        return {x0, x0, x0, CVec::Zero(x0.size()), CVec::Zero(x0.size()), 0};
    }

    double primal_residual() const { return (x - y1).squaredNorm() + (x - y2).squaredNorm(); }
};

struct TraceRecord {
    int iter = 0;
    double residual = 0.0;
    double lagrangian = 0.0;  // solver units
    double objective = 0.0;   // OF-PB objective in the caller's units
    double ms = 0.0;
};

using ConvergenceTrace = std::vector<TraceRecord>;

// ---------------------------------------------------------------------------
// x-step

/// L(x, y1, y2, lambda) restricted to |x_n| = 1 equals Re(c^H x) + const.
inline CVec x_coefficient(const OfpbOperatorSet& ops, const AdmmState& st, const AdmmParams& p) {
    const CVec w = ops.h_tilde_a + ops.h_pb3 * outer_vec(st.y1);
    return 2.0 * ops.h_pb1.transpose() * w.conjugate() + 2.0 * ops.h_pb2.adjoint() * w -
           2.0 * ops.alpha_b * ops.h_pb4.adjoint() * ops.h_ab_vec - st.lambda1 - st.lambda2 - p.rho1 * st.y1 -
           p.rho2 * st.y2;
}

/// argmin over the torus of Re(c^H x); zero coefficients keep the previous entry.
inline CVec minimize_linear_on_torus(const CVec& c, const CVec& previous) {
    detail::require_dims(c.size() == previous.size(), "minimize_linear_on_torus length");
    CVec x = previous;
    for (Eigen::Index n = 0; n < c.size(); ++n) {
        const double mag = std::abs(c(n));
        if (mag > 0.0) x(n) = -c(n) / mag;
    }
    return x;
}

inline CVec update_x(const OfpbOperatorSet& ops, const AdmmState& st, const AdmmParams& p) {
    return minimize_linear_on_torus(x_coefficient(ops, st, p), st.x);
}

// ---------------------------------------------------------------------------
// y1-step: quadratic majorizer of the fourth-order block anchored at x^{k+1}

struct Y1Model {
    RVec x_hat;
    RVec linear;  // grad f_y(x_hat) + lambda1_hat
    double f_at_x = 0.0;
    double curvature = 0.0;  // rho1 + L_y
};

inline Y1Model y1_model(const OfpbOperatorSet& ops, const AdmmState& st, const AdmmParams& p) {
    const CVec anchor = y_anchor(ops, st.x);
    Y1Model m;
    m.x_hat = real_lift(st.x);
    m.f_at_x = lifted_quartic(ops, m.x_hat, anchor);
    m.linear = grad_fy(ops, m.x_hat, anchor) + real_lift(st.lambda1);
    m.curvature = p.rho1 + p.l_y;
    return m;
}

inline double y1_majorizer(const Y1Model& m, const RVec& y_hat) {
    const RVec d = y_hat - m.x_hat;
    return m.f_at_x + m.linear.dot(d) + 0.5 * m.curvature * d.squaredNorm();
}

inline RVec y1_majorizer_gradient(const Y1Model& m, const RVec& y_hat) {
    return m.linear + m.curvature * (y_hat - m.x_hat);
}

inline CVec update_y1(const OfpbOperatorSet& ops, const AdmmState& st, const AdmmParams& p) {
    const Y1Model m = y1_model(ops, st, p);
    return complex_from_lift(m.x_hat - m.linear / m.curvature);
}

// ---------------------------------------------------------------------------
// y2-step: widely-linear quadratic, solved in the real-lifted domain.
//   y^H H5 y         = y_hat^T lift(H5) y_hat
//   Re(y^T H6 y)     = y_hat^T [P -Q; -Q -P] y_hat,  P + jQ = (H6 + H6^T)/2
// Stationarity: (2 (A5 + 2 B6) + rho2 I) y_hat = rho2 x_hat - lambda2_hat.

inline RMat y2_system_matrix(const OfpbOperatorSet& ops, double rho2) {
    const auto n = ops.n_irs();
    const CMat hs = 0.5 * (ops.h_pb6 + ops.h_pb6.transpose());
    RMat b6(2 * n, 2 * n);
    b6.topLeftCorner(n, n) = hs.real();
    b6.topRightCorner(n, n) = -hs.imag();
    b6.bottomLeftCorner(n, n) = -hs.imag();
    b6.bottomRightCorner(n, n) = -hs.real();
    RMat m = 2.0 * (lift_matrix(ops.h_pb5) + 2.0 * b6);
    m.diagonal().array() += rho2;
    return 0.5 * (m + m.transpose());
}

inline RVec y2_rhs(const AdmmState& st, double rho2) { return rho2 * real_lift(st.x) - real_lift(st.lambda2); }

/// Gradient of L with respect to y2_hat.
inline RVec y2_gradient(const OfpbOperatorSet& ops, const AdmmState& st, const AdmmParams& p, const RVec& y2_hat) {
    return y2_system_matrix(ops, p.rho2) * y2_hat - y2_rhs(st, p.rho2);
}

/// Factorizes the y2 system once; it depends only on the operators and rho2.
class Y2Solver {
  public:
    Y2Solver(const OfpbOperatorSet& ops, double rho2) : rho2_(rho2), system_(y2_system_matrix(ops, rho2)) {
        Eigen::SelfAdjointEigenSolver<RMat> eig(system_, Eigen::EigenvaluesOnly);
        const RVec mags = eig.eigenvalues().cwiseAbs();
        smallest_sv_ = mags.size() ? mags.minCoeff() : 0.0;
        const double largest = mags.size() ? mags.maxCoeff() : 0.0;
        if (!(smallest_sv_ > 1e-13 * std::max(largest, 1.0)))
            throw SolverError("y2 system is singular (rho2 does not dominate the indefinite H_PB5 block)",
                              smallest_sv_);
        ldlt_.compute(system_);
    }

    CVec solve(const AdmmState& st) const { return complex_from_lift(ldlt_.solve(y2_rhs(st, rho2_))); }

    double smallest_singular_value() const noexcept { return smallest_sv_; }
    const RMat& system() const noexcept { return system_; }

  private:
    double rho2_;
    RMat system_;
    Eigen::LDLT<RMat> ldlt_;
    double smallest_sv_ = 0.0;
};

inline CVec update_y2(const OfpbOperatorSet& ops, const AdmmState& st, const AdmmParams& p) {
    return Y2Solver(ops, p.rho2).solve(st);
}

// ---------------------------------------------------------------------------

inline void update_duals(AdmmState& st, const AdmmParams& p) {
    st.lambda1 += p.rho1 * (st.y1 - st.x);
    st.lambda2 += p.rho2 * (st.y2 - st.x);
}

inline double augmented_lagrangian(const OfpbOperatorSet& ops, const AdmmState& st, const AdmmParams& p) {
    const CVec r1 = st.y1 - st.x;
    const CVec r2 = st.y2 - st.x;
    return eval_f(ops, st.x, st.y1, st.y2) + std::real(st.lambda1.dot(r1) + st.lambda2.dot(r2)) +
           0.5 * p.rho1 * r1.squaredNorm() + 0.5 * p.rho2 * r2.squaredNorm();
}

// ---------------------------------------------------------------------------
// Sufficient conditions for descent and boundedness of the Lagrangian.

struct ConditionReport {
    double eps_x = 0.0;
    double eps_y1 = 0.0;
    double eps_y2 = 0.0;
    double lower_bound_margin = 0.0;  // rho1 - 5 L_y
    bool satisfied = false;
};

inline ConditionReport check_convergence_conditions(double rho1, double rho2, double l_y, double l_y2) {
    if (!(rho1 > 0.0) || !(rho2 > 0.0) || !(l_y >= 0.0) || !(l_y2 >= 0.0))
        throw DomainError("check_convergence_conditions: positive inputs required");
    ConditionReport r;
    r.eps_x = 0.5 * (rho1 + rho2) - (8.0 * l_y * l_y * rho1 + 32.0 * l_y * l_y * l_y) / (rho1 * rho1);
    r.eps_y1 = 0.5 * (rho1 - 7.0 * l_y) - (2.0 * rho1 + 8.0 * l_y) / (rho1 * rho1);
    r.eps_y2 = 0.5 * l_y2 * rho2 - l_y2 / (rho2 * rho2);
    r.lower_bound_margin = rho1 - 5.0 * l_y;
    r.satisfied = r.eps_x >= 0.0 && r.eps_y1 >= 0.0 && r.eps_y2 >= 0.0 && r.lower_bound_margin >= 0.0;
    return r;
}

/// Largest entry modulus of H5 + H6 + H6^*, the Lipschitz proxy of the y2 block.
inline double l_y2_constant(const OfpbOperatorSet& ops) {
    return (ops.h_pb5 + ops.h_pb6 + ops.h_pb6.conjugate()).cwiseAbs().maxCoeff();
}

/// Same quantity with the index set [H4 + H5 + H5^*]; defined only when
/// H4 happens to be square of size N_I (N_B * N_A == N_I).
inline std::optional<double> l_y2_constant_alt(const OfpbOperatorSet& ops) {
    if (ops.h_pb4.rows() != ops.h_pb5.rows()) return std::nullopt;
    return (ops.h_pb4 + ops.h_pb5 + ops.h_pb5.conjugate()).cwiseAbs().maxCoeff();
}

// ---------------------------------------------------------------------------

struct AdmmResult {
    PhaseVector phases;
    ConvergenceTrace trace;
    bool converged = false;
    int iterations = 0;
    double objective = 0.0;    // OF-PB objective of the returned phases, caller units
    double scale = 1.0;        // channel scale used internally
    AdmmState final_state;     // solver units
};

/// Channel scale that brings ||h_a||^2 + ||H1||^2 + ||H2||^2 + ||H3||^2 (the mean
/// of the quartic term over independent uniform phases, up to cross terms) to target.
inline double normalization_scale(const OfpbOperatorSet& ops, double target_energy) {
    const double energy = ops.h_tilde_a.squaredNorm() + ops.h_pb1.squaredNorm() + ops.h_pb2.squaredNorm() +
                          ops.h_pb3.squaredNorm();
    if (!(energy > 0.0) || !std::isfinite(energy)) return 1.0;
    return std::pow(target_energy / energy, 0.25);
}

inline CVec random_unit_vector(Eigen::Index n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> phase(0.0, kTwoPi);
    CVec x(n);
    for (Eigen::Index i = 0; i < n; ++i) x(i) = std::polar(1.0, phase(rng));
    return x;
}

inline CVec random_unit_vector(Eigen::Index n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    return random_unit_vector(n, rng);
}

inline AdmmState initial_state(Eigen::Index n, const AdmmParams& p, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    AdmmState st = AdmmState::consensus(random_unit_vector(n, rng));
    if (p.init == AdmmInit::Consensus) return st;
    st.y1 = random_unit_vector(n, rng);
    st.y2 = random_unit_vector(n, rng);
    std::normal_distribution<double> gauss(0.0, p.dual_init_scale / std::sqrt(2.0));
    for (Eigen::Index i = 0; i < n; ++i) st.lambda1(i) = cplx(gauss(rng), gauss(rng));
    for (Eigen::Index i = 0; i < n; ++i) st.lambda2(i) = cplx(gauss(rng), gauss(rng));
    return st;
}

/// One CA-ADMM iteration in place: x, y1, y2, then both duals.
inline void admm_iteration(const OfpbOperatorSet& ops, const Y2Solver& y2, AdmmState& st, const AdmmParams& p) {
    st.x = update_x(ops, st, p);
    st.y1 = update_y1(ops, st, p);
    st.y2 = y2.solve(st);
    update_duals(st, p);
    ++st.k;
}

/// Runs CA-ADMM from a given start on an already-scaled operator set.
inline AdmmResult run_ca_admm_from(const OfpbOperatorSet& ops, const AdmmParams& p, AdmmState st,
                                   double objective_unit = 1.0) {
    p.validate();
    const auto t0 = std::chrono::steady_clock::now();
    const Y2Solver y2(ops, p.rho2);

    AdmmResult out;
    CVec best_x = st.x;
    double best_obj = std::numeric_limits<double>::infinity();
    out.trace.reserve(static_cast<std::size_t>(std::min(p.max_iter, 4096)));
    // The stopping test is applied to each new iterate, so at least one step
    // runs even from a zero-residual consensus start.
    for (int it = 0; it < p.max_iter; ++it) {
        admm_iteration(ops, y2, st, p);
        TraceRecord rec;
        rec.iter = st.k;
        rec.residual = st.primal_residual();
        rec.lagrangian = augmented_lagrangian(ops, st, p);
        rec.objective = eval_f(ops, st.x, st.x, st.x) * objective_unit;
        rec.ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        out.trace.push_back(rec);
        if (!std::isfinite(rec.residual) || !std::isfinite(rec.lagrangian)) break;
        if (rec.objective < best_obj) {
            best_obj = rec.objective;
            best_x = st.x;
        }
        if (rec.residual < p.eps1) {
            out.converged = true;
            break;
        }
    }
    out.iterations = st.k;
    const CVec& x_out = out.converged ? st.x : best_x;
    out.phases = PhaseVector::from_unit(x_out);
    out.objective = out.converged ? out.trace.back().objective : best_obj;
    out.final_state = std::move(st);
    return out;
}

/// CA-ADMM for the OF-PB subproblem.
inline AdmmResult run_ca_admm(const ChannelSet& set, const AdmmParams& p, double alpha_b, std::uint64_t seed) {
    p.validate();
    set.validate();
    OfpbOperatorSet ops = build_operators(set, alpha_b);
    double s = 1.0;
    if (p.normalize) {
        s = normalization_scale(ops, p.target_energy);
        if (s != 1.0) ops = build_operators(scaled(set, s), alpha_b * s * s);
    }
    const double unit = 1.0 / (s * s * s * s);
    AdmmResult out = run_ca_admm_from(ops, p, initial_state(set.n_irs(), p, seed), unit);
    out.scale = s;
    return out;
}

}  // namespace irsbf

#endif  // IRSBF_ADMM_HPP
