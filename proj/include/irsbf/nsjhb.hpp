// SPDX-License-Identifier: Apache-2.0

#ifndef IRSBF_NSJHB_HPP
#define IRSBF_NSJHB_HPP

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "irsbf/secrecy.hpp"

namespace irsbf {

/// Fraction of P_max spent on artificial noise.
struct PowerSplit {
    double beta_an = 0.2;

    void validate() const {
        if (!(beta_an >= 0.0 && beta_an < 1.0)) throw DomainError("PowerSplit: beta_an must lie in [0, 1)");
    }
};

enum class FdbMethod { Svd, Ascent };

struct FdbSolution {
    CMat w_tilde_s;  // N_A x L_s
    CMat w_tilde_z;  // N_A x L_z
    double power = 0.0;
    int bob_rank = 0;
    bool rank_deficient = false;  // rank(H_eq,B) < L_s
    int ascent_iterations = 0;
};

namespace detail {

inline double rank_tolerance(const RVec& singular_values) {
    return singular_values.size() ? 1e-10 * singular_values(0) : 0.0;
}

inline int numerical_rank(const RVec& singular_values) {
    const double tol = rank_tolerance(singular_values);
    int r = 0;
    for (Eigen::Index i = 0; i < singular_values.size(); ++i)
        if (singular_values(i) > tol && singular_values(i) > 0.0) ++r;
    return r;
}

/// Projects both precoders jointly onto the power ball of radius sqrt(p_max).
inline void project_power(CMat& ws, CMat& wz, double p_max) {
    const double p = ws.squaredNorm() + wz.squaredNorm();
    if (p > p_max) {
        const double s = std::sqrt(p_max / p);
        ws *= s;
        wz *= s;
    }
}

}  // namespace detail

/// Orthonormal null-space basis of h (columns), via the full right singular basis.
inline CMat null_space_basis(const CMat& h) {
    Eigen::JacobiSVD<CMat> svd(h, Eigen::ComputeFullV);
    const int r = detail::numerical_rank(svd.singularValues());
    return svd.matrixV().rightCols(h.cols() - r);
}

struct AnResult {
    CMat w_z;  // N_RF x L_z
    int null_dim = 0;
    double unused_power = 0.0;  // AN budget left unassigned because the null space is empty
};

/// Artificial noise confined to the null space of Bob's effective channel H_eq,B F,
/// equal power over the first L_z basis columns.
inline AnResult an_nullspace(const CMat& h_eq_b, const CMat& f_analog, double an_power, int l_z) {
    detail::require_dims(h_eq_b.cols() == f_analog.rows(), "an_nullspace H_eq,B * F");
    if (!(an_power >= 0.0) || l_z < 1) throw DomainError("an_nullspace: an_power >= 0 and l_z >= 1 required");
    const CMat z = null_space_basis(h_eq_b * f_analog);
    AnResult out{CMat::Zero(f_analog.cols(), l_z), static_cast<int>(z.cols()), 0.0};
    if (out.null_dim == 0) {
        out.unused_power = an_power;
        return out;
    }
    if (an_power == 0.0) return out;
    const auto cols = std::min<Eigen::Index>(l_z, z.cols());
    const CMat zl = z.leftCols(cols);
    const double radiated = (f_analog * zl).squaredNorm();
    if (!(radiated > 0.0)) {
        out.unused_power = an_power;
        return out;
    }
    out.w_z.leftCols(cols) = std::sqrt(an_power / radiated) * zl;
    return out;
}

namespace detail {

/// Unclamped rate gap and its Wirtinger-derived ascent directions.
struct SecrecyGradient {
    double value = 0.0;
    CMat d_ws;
    CMat d_wz;
};

inline SecrecyGradient secrecy_gradient(const CMat& hb, const CMat& he, const CMat& ws, const CMat& wz,
                                        double sigma2) {
    SecrecyGradient g;
    g.d_ws = CMat::Zero(ws.rows(), ws.cols());
    g.d_wz = CMat::Zero(wz.rows(), wz.cols());
    const double inv_ln2 = 1.0 / std::log(2.0);
    auto accumulate = [&](const CMat& h, double sign) {
        const CMat hz = h * wz;
        const CMat hs = h * ws;
        CMat noise = hz * hz.adjoint();
        noise.diagonal().array() += sigma2;
        const CMat total = noise + hs * hs.adjoint();
        const CMat total_inv = total.llt().solve(CMat::Identity(total.rows(), total.cols()));
        const CMat noise_inv = noise.llt().solve(CMat::Identity(noise.rows(), noise.cols()));
        g.value += sign * (log2det_hpd(total) - log2det_hpd(noise));
        g.d_ws += sign * 2.0 * inv_ln2 * h.adjoint() * total_inv * hs;
        g.d_wz += sign * 2.0 * inv_ln2 * h.adjoint() * (total_inv - noise_inv) * hz;
    };
    accumulate(hb, 1.0);
    accumulate(he, -1.0);
    return g;
}

}  // namespace detail

/// Full-digital IS/AN precoders. Svd: equal power over the strongest right
/// singular vectors of H_eq,B with null-space AN. Ascent: projected gradient
/// ascent on the secrecy rate from the Svd point with backtracking.
inline FdbSolution solve_fdb(const ChannelSet& set, const PhaseVector& phases, double p_max, const PowerSplit& split,
                             FdbMethod method, int l_s, int l_z, int max_ascent_iter = 200) {
    set.validate();
    split.validate();
    if (!(p_max > 0.0) || l_s < 1 || l_z < 1) throw DomainError("solve_fdb: p_max > 0, l_s >= 1, l_z >= 1");
    const CMat hb = equivalent_channel(set, phases, Node::Bob);
    const auto na = hb.cols();

    Eigen::JacobiSVD<CMat> svd(hb, Eigen::ComputeFullV);
    FdbSolution out;
    out.bob_rank = detail::numerical_rank(svd.singularValues());
    out.rank_deficient = out.bob_rank < l_s;
    const int streams = std::min(l_s, out.bob_rank);
    const double is_power = (1.0 - split.beta_an) * p_max;
    out.w_tilde_s = CMat::Zero(na, l_s);
    if (streams > 0)
        out.w_tilde_s.leftCols(streams) =
            std::sqrt(is_power / static_cast<double>(streams)) * svd.matrixV().leftCols(streams);
    out.w_tilde_z = an_nullspace(hb, CMat::Identity(na, na), split.beta_an * p_max, l_z).w_z;

    if (method == FdbMethod::Ascent) {
        const CMat he = equivalent_channel(set, phases, Node::Eve);
        const double sigma2 = set.noise_power;
        CMat ws = out.w_tilde_s, wz = out.w_tilde_z;
        auto g = detail::secrecy_gradient(hb, he, ws, wz, sigma2);
        const double grad_norm = std::sqrt(g.d_ws.squaredNorm() + g.d_wz.squaredNorm());
        double step = grad_norm > 0.0 ? 0.05 * std::sqrt(p_max) / grad_norm : 0.0;
        for (int it = 0; it < max_ascent_iter && step > 0.0; ++it) {
            bool accepted = false;
            for (int tries = 0; tries < 40; ++tries) {
                CMat ws_try = ws + step * g.d_ws;
                CMat wz_try = wz + step * g.d_wz;
                detail::project_power(ws_try, wz_try, p_max);
                const LinkRates rates = link_rates(hb, he, ws_try, wz_try, sigma2);
                const double value = rates.bob - rates.eve;
                if (value > g.value) {
                    ws = std::move(ws_try);
                    wz = std::move(wz_try);
                    accepted = true;
                    step *= 1.5;
                    break;
                }
                step *= 0.5;
            }
            if (!accepted) break;
            g = detail::secrecy_gradient(hb, he, ws, wz, sigma2);
            out.ascent_iterations = it + 1;
        }
        out.w_tilde_s = std::move(ws);
        out.w_tilde_z = std::move(wz);
    }
    out.power = out.w_tilde_s.squaredNorm() + out.w_tilde_z.squaredNorm();
    return out;
}

/// Candidate analog columns: array responses on a grid uniform in sine space.
struct Dictionary {
    CMat atoms;  // N_A x G
    std::vector<double> angles;

    Eigen::Index size() const { return atoms.cols(); }
};

inline Dictionary build_dictionary(int n_alice, int grid_size, std::span<const double> hint_angles = {}) {
    if (n_alice < 1 || grid_size < 1) throw DomainError("build_dictionary: n_alice and grid_size must be >= 1");
    const auto total = static_cast<Eigen::Index>(grid_size) + static_cast<Eigen::Index>(hint_angles.size());
    Dictionary d{CMat(n_alice, total), {}};
    d.angles.reserve(static_cast<std::size_t>(total));
    for (int g = 0; g < grid_size; ++g)
        d.angles.push_back(std::asin(-1.0 + 2.0 * static_cast<double>(g) / static_cast<double>(grid_size)));
    d.angles.insert(d.angles.end(), hint_angles.begin(), hint_angles.end());
    for (Eigen::Index k = 0; k < total; ++k)
        d.atoms.col(k) = array_response(n_alice, d.angles[static_cast<std::size_t>(k)]);
    return d;
}

struct OmpResult {
    CMat f_analog;  // N_A x N_RF
    CMat w_s;       // N_RF x L_s
    std::vector<Eigen::Index> selected;
    std::vector<double> residual_history;  // ||W_tilde - F W||_F after each pick, before rescaling
};

/// Greedy spatially-sparse factorization W_tilde ~ F W_s with F drawn from the dictionary.
/// W_s is rescaled at the end so ||F W_s||_F = ||W_tilde||_F.
inline OmpResult omp_factorize(const CMat& w_tilde, const Dictionary& dict, int n_rf) {
    detail::require_dims(w_tilde.rows() == dict.atoms.rows(), "omp_factorize antenna count");
    if (n_rf < 1 || n_rf > dict.size()) throw DomainError("omp_factorize: need 1 <= n_rf <= dictionary size");
    OmpResult out;
    const double target_norm = w_tilde.norm();
    if (target_norm == 0.0) {
        out.f_analog = dict.atoms.leftCols(n_rf);
        out.w_s = CMat::Zero(n_rf, w_tilde.cols());
        for (int i = 0; i < n_rf; ++i) out.selected.push_back(i);
        out.residual_history.assign(static_cast<std::size_t>(n_rf), 0.0);
        return out;
    }

    std::vector<bool> taken(static_cast<std::size_t>(dict.size()), false);
    CMat residual = w_tilde;
    CMat f(w_tilde.rows(), 0);
    CMat w;
    for (int i = 0; i < n_rf; ++i) {
        const CMat corr = dict.atoms.adjoint() * residual;
        Eigen::Index best = -1;
        double best_score = -1.0;
        for (Eigen::Index g = 0; g < dict.size(); ++g) {
            if (taken[static_cast<std::size_t>(g)]) continue;
            const double score = corr.row(g).squaredNorm();
            if (score > best_score) {
                best_score = score;
                best = g;
            }
        }
        taken[static_cast<std::size_t>(best)] = true;
        out.selected.push_back(best);
        f.conservativeResize(Eigen::NoChange, i + 1);
        f.col(i) = dict.atoms.col(best);
        w = f.colPivHouseholderQr().solve(w_tilde);
        residual = w_tilde - f * w;
        out.residual_history.push_back(residual.norm());
    }
    const double fit_norm = (f * w).norm();
    if (fit_norm > 0.0) w *= target_norm / fit_norm;
    out.f_analog = std::move(f);
    out.w_s = std::move(w);
    return out;
}

struct NsjhbConfig {
    int n_rf = 4;
    int l_s = 2;
    int l_z = 2;
    int dictionary_size = 64;
    bool hint_aods = true;
    FdbMethod fdb_method = FdbMethod::Svd;
    bool reassign_unused = true;  // move AN budget to the IS when Bob's effective channel has no null space
};

struct NsjhbResult {
    HybridBeamformer bf;
    FdbSolution fdb;
    OmpResult omp;
    AnResult an;
    double is_power = 0.0;
    double an_power = 0.0;
    double unused_power = 0.0;
    double secrecy_rate = 0.0;
};

/// Full-digital solve, OMP hybrid factorization, null-space AN.
inline NsjhbResult run_nsjhb(const ChannelSet& set, const PhaseVector& phases, double p_max, const PowerSplit& split,
                             const NsjhbConfig& cfg) {
    set.validate();
    split.validate();
    NsjhbResult out;
    out.fdb = solve_fdb(set, phases, p_max, split, cfg.fdb_method, cfg.l_s, cfg.l_z);
    const CMat hb = equivalent_channel(set, phases, Node::Bob);

    const std::span<const double> hints =
        cfg.hint_aods ? std::span<const double>(set.alice_aods) : std::span<const double>{};
    const Dictionary dict = build_dictionary(static_cast<int>(set.n_alice()), cfg.dictionary_size, hints);
    out.omp = omp_factorize(out.fdb.w_tilde_s, dict, cfg.n_rf);

    const double is_budget = out.fdb.w_tilde_s.squaredNorm();
    // Rounding residue of p_max - is_budget is not an AN budget.
    double an_budget = split.beta_an > 0.0 ? std::max(0.0, p_max - is_budget) : 0.0;
    if (an_budget <= 1e-12 * p_max) an_budget = 0.0;
    out.an = an_nullspace(hb, out.omp.f_analog, an_budget, cfg.l_z);

    CMat w_s = out.omp.w_s;
    double unused = out.an.unused_power;
    if (cfg.reassign_unused && unused > 0.0 && is_budget > 0.0) {
        w_s *= std::sqrt((is_budget + unused) / is_budget);
        unused = 0.0;
    }
    out.bf = HybridBeamformer{out.omp.f_analog, std::move(w_s), out.an.w_z, p_max, false};
    out.is_power = out.bf.precoder_is().squaredNorm();
    out.an_power = out.bf.precoder_an().squaredNorm();
    out.unused_power = unused;
    out.secrecy_rate = secrecy_capacity(set, phases, out.bf);
    return out;
}

}  // namespace irsbf

#endif  // IRSBF_NSJHB_HPP
