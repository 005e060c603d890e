// SPDX-License-Identifier: Apache-2.0

#ifndef IRSBF_SECRECY_HPP
#define IRSBF_SECRECY_HPP

#include <algorithm>
#include <cmath>

#include "irsbf/channel.hpp"

namespace irsbf {

/// Transmit precoder F * (W_s s + W_z z). A full-digital precoder is
/// represented with F = I and is exempt from the constant-modulus check.
struct HybridBeamformer {
    CMat f_analog;  // N_A x N_RF
    CMat w_s;       // N_RF x L_s
    CMat w_z;       // N_RF x L_z
    double p_max = 1.0;
    bool full_digital = false;

    CMat precoder_is() const { return f_analog * w_s; }
    CMat precoder_an() const { return f_analog * w_z; }

    void validate(double tol = 1e-9) const {
        detail::require_dims(w_s.rows() == f_analog.cols() && w_z.rows() == f_analog.cols(),
                             "HybridBeamformer RF dimension");
        if (!full_digital) {
            const double target = 1.0 / std::sqrt(static_cast<double>(f_analog.rows()));
            for (Eigen::Index j = 0; j < f_analog.cols(); ++j)
                for (Eigen::Index i = 0; i < f_analog.rows(); ++i)
                    if (std::abs(std::abs(f_analog(i, j)) - target) > tol)
                        throw InputError("HybridBeamformer: analog entry violates constant modulus");
        }
        const double p = precoder_is().squaredNorm() + precoder_an().squaredNorm();
        if (p > p_max * (1.0 + tol)) throw InputError("HybridBeamformer: transmit power exceeds p_max");
    }
};

inline double transmit_power(const HybridBeamformer& bf) {
    detail::require_dims(bf.w_s.rows() == bf.f_analog.cols() && bf.w_z.rows() == bf.f_analog.cols(),
                         "transmit_power RF dimension");
    return bf.precoder_is().squaredNorm() + bf.precoder_an().squaredNorm();
}

struct LinkRates {
    double bob = 0.0;  // bits/s/Hz
    double eve = 0.0;

    double secrecy() const { return std::max(0.0, bob - eve); }
};

/// log2 det(I + S C^-1) for one receiver, with S, C built from the full-digital precoders.
inline double receiver_rate(const CMat& h_eq, const CMat& ws_full, const CMat& wz_full, double sigma2) {
    const CMat hs = h_eq * ws_full;
    const CMat hz = h_eq * wz_full;
    CMat c = hz * hz.adjoint();
    c.diagonal().array() += sigma2;
    const CMat cs = c + hs * hs.adjoint();
    return detail::log2det_hpd(cs) - detail::log2det_hpd(c);
}

inline LinkRates link_rates(const CMat& h_eq_b, const CMat& h_eq_e, const CMat& ws_full, const CMat& wz_full,
                            double sigma2) {
    return {receiver_rate(h_eq_b, ws_full, wz_full, sigma2), receiver_rate(h_eq_e, ws_full, wz_full, sigma2)};
}

inline LinkRates link_rates(const ChannelSet& set, const PhaseVector& phases, const HybridBeamformer& bf) {
    set.validate();
    const CMat hb = equivalent_channel(set, phases, Node::Bob);
    const CMat he = equivalent_channel(set, phases, Node::Eve);
    return link_rates(hb, he, bf.precoder_is(), bf.precoder_an(), set.noise_power);
}

/// {log det(I + S_B C_B^-1) - log det(I + S_E C_E^-1)}^+ in bits/s/Hz.
inline double secrecy_capacity(const ChannelSet& set, const PhaseVector& phases, const HybridBeamformer& bf) {
    return link_rates(set, phases, bf).secrecy();
}

/// High-SNR surrogate that depends on the phases only.
inline double lower_bound_secrecy(const ChannelSet& set, const PhaseVector& phases, double p_max, int l_s) {
    if (!(p_max > 0.0) || l_s < 1) throw DomainError("lower_bound_secrecy: p_max > 0 and l_s >= 1 required");
    const CMat hb = equivalent_channel(set, phases, Node::Bob);
    const CMat he = equivalent_channel(set, phases, Node::Eve);
    const double snr = p_max / (set.noise_power * static_cast<double>(l_s));
    const CMat cross = hb * he.adjoint();
    CMat m = snr * cross * cross.adjoint();
    m.diagonal().array() += 1.0;
    return std::log2(1.0 + snr * hb.squaredNorm()) - detail::log2det_hpd(m);
}

/// ||H_eq,B H_eq,E^H||_F^2 - alpha_b ||H_eq,B||_F^2.
inline double ofpb_objective(const ChannelSet& set, const PhaseVector& phases, double alpha_b) {
    if (!(alpha_b >= 0.0)) throw DomainError("ofpb_objective: alpha_b must be >= 0");
    const CMat hb = equivalent_channel(set, phases, Node::Bob);
    const CMat he = equivalent_channel(set, phases, Node::Eve);
    return (hb * he.adjoint()).squaredNorm() - alpha_b * hb.squaredNorm();
}

}  // namespace irsbf

#endif  // IRSBF_SECRECY_HPP
