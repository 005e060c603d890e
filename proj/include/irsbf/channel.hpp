// SPDX-License-Identifier: Apache-2.0

#ifndef IRSBF_CHANNEL_HPP
#define IRSBF_CHANNEL_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "irsbf/types.hpp"

namespace irsbf {

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

inline double distance(const Point2& a, const Point2& b) { return std::hypot(a.x - b.x, a.y - b.y); }

/// Node positions (meters) and array sizes of the wiretap scenario.
struct SystemGeometry {
    Point2 pos_alice{0.0, 5.0};
    Point2 pos_bob{60.0, 0.0};
    Point2 pos_eve{45.0, 0.0};
    Point2 pos_irs{55.0, 5.0};
    int n_alice = 32;
    int n_bob = 2;
    int n_eve = 2;
    int n_irs = 32;
    int n_rf = 4;
    int l_s = 2;
    int l_z = 2;

    void validate() const {
        if (n_alice < 1 || n_bob < 1 || n_eve < 1 || n_irs < 1 || n_rf < 1 || l_s < 1 || l_z < 1)
            throw DomainError("SystemGeometry: all counts must be >= 1");
        if (n_rf > n_alice) throw DomainError("SystemGeometry: n_rf must not exceed n_alice");
        if (l_s + l_z > n_rf) throw DomainError("SystemGeometry: l_s + l_z must not exceed n_rf");
        const Point2* pts[] = {&pos_alice, &pos_bob, &pos_eve, &pos_irs};
        for (int i = 0; i < 4; ++i)
            for (int j = i + 1; j < 4; ++j)
                if (!(distance(*pts[i], *pts[j]) > 0.0))
                    throw DomainError("SystemGeometry: node positions must be pairwise distinct");
    }
};

struct ChannelParams {
    int n_paths = 4;
    double rician_kappa = 13.2;  // linear LoS / scattered power ratio
    double pathloss_exp_direct = 4.0;
    double pathloss_exp_reflected = 2.0;
    double reference_gain = 1.0;  // linear gain at 1 m
    double noise_dbm = -59.0;

    void validate() const {
        if (n_paths < 1) throw DomainError("ChannelParams: n_paths must be >= 1");
        if (!(rician_kappa >= 0.0)) throw DomainError("ChannelParams: rician_kappa must be >= 0");
        if (!(pathloss_exp_direct >= 0.0) || !(pathloss_exp_reflected >= 0.0))
            throw DomainError("ChannelParams: path-loss exponents must be >= 0");
        if (!(reference_gain > 0.0)) throw DomainError("ChannelParams: reference_gain must be > 0");
        if (!std::isfinite(noise_dbm)) throw DomainError("ChannelParams: noise_dbm must be finite");
    }
};

inline double dbm_to_watts(double p_dbm) {
    if (!std::isfinite(p_dbm)) throw DomainError("dbm_to_watts: input must be finite");
    return std::pow(10.0, (p_dbm - 30.0) / 10.0);
}

/// The five link matrices of the IRS wiretap channel plus receiver noise power.
struct ChannelSet {
    CMat h_ab;  // N_B x N_A
    CMat h_ae;  // N_E x N_A
    CMat h_ai;  // N_I x N_A
    CMat h_ib;  // N_B x N_I
    CMat h_ie;  // N_E x N_I
    double noise_power = 1.0;
    std::vector<double> alice_aods;  // departure angles of every generated path leaving Alice

    Eigen::Index n_alice() const { return h_ab.cols(); }
    Eigen::Index n_bob() const { return h_ab.rows(); }
    Eigen::Index n_eve() const { return h_ae.rows(); }
    Eigen::Index n_irs() const { return h_ai.rows(); }

    void validate() const {
        const auto na = n_alice(), nb = n_bob(), ne = n_eve(), ni = n_irs();
        detail::require_dims(h_ae.cols() == na && h_ai.cols() == na, "ChannelSet Alice dimension");
        detail::require_dims(h_ib.rows() == nb && h_ib.cols() == ni, "ChannelSet H_IB shape");
        detail::require_dims(h_ie.rows() == ne && h_ie.cols() == ni, "ChannelSet H_IE shape");
        if (!(noise_power > 0.0)) throw InputError("ChannelSet: noise_power must be > 0");
        if (!detail::all_finite(h_ab) || !detail::all_finite(h_ae) || !detail::all_finite(h_ai) ||
            !detail::all_finite(h_ib) || !detail::all_finite(h_ie))
            throw InputError("ChannelSet: non-finite channel entry");
    }
};

/// IRS phases; the diagonal of the reflection matrix is exp(j*theta).
struct PhaseVector {
    RVec theta;

    static double wrap(double t) {
        double w = std::fmod(t, kTwoPi);
        if (w < 0.0) w += kTwoPi;
        if (w >= kTwoPi) w = 0.0;
        return w;
    }

    static PhaseVector zeros(Eigen::Index n) { return {RVec::Zero(n)}; }

    static PhaseVector from_angles(const RVec& t) {
        PhaseVector p{t};
        for (auto& v : p.theta) v = wrap(v);
        return p;
    }

    /// Principal argument of each entry, mapped into [0, 2pi).
    static PhaseVector from_unit(const CVec& x) {
        PhaseVector p{RVec(x.size())};
        for (Eigen::Index n = 0; n < x.size(); ++n) p.theta(n) = wrap(std::arg(x(n)));
        return p;
    }

    CVec unit() const {
        CVec x(theta.size());
        for (Eigen::Index n = 0; n < theta.size(); ++n) x(n) = std::polar(1.0, theta(n));
        return x;
    }

    Eigen::Index size() const { return theta.size(); }
};

/// Half-wavelength ULA steering vector, unit norm.
inline CVec array_response(Eigen::Index n, double angle) {
    if (n < 1) throw DomainError("array_response: n must be >= 1");
    CVec a(n);
    const double s = std::sin(angle);
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    for (Eigen::Index k = 0; k < n; ++k) a(k) = std::polar(scale, kPi * static_cast<double>(k) * s);
    return a;
}

inline double path_gain(double distance_m, double exponent, double reference_gain) {
    if (!(distance_m > 0.0)) throw DomainError("path_gain: distance must be > 0");
    return reference_gain * std::pow(distance_m, -exponent);
}

/// LoS geometry of one link. Arrays are ULAs along the y axis, so the
/// sine of each angle is the y component of the unit pointing vector.
struct LinkGeometry {
    double distance = 1.0;
    double aod = 0.0;
    double aoa = 0.0;

    static LinkGeometry between(const Point2& tx, const Point2& rx) {
        const double d = irsbf::distance(tx, rx);
        if (!(d > 0.0)) throw DomainError("LinkGeometry: coincident endpoints");
        return {d, std::asin((rx.y - tx.y) / d), std::asin((tx.y - rx.y) / d)};
    }
};

struct LinkChannel {
    CMat h;
    std::vector<double> aods;
};

/// Independent RNG stream for (seed, link index).
inline std::mt19937_64 link_rng(std::uint64_t seed, std::uint32_t link) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), link};
    return std::mt19937_64(seq);
}

/// Clustered sparse channel: path 1 is LoS at the geometric angles, the
/// rest are Gaussian-weighted scatterers with uniform angles.
inline LinkChannel generate_link_channel(int n_rx, int n_tx, const LinkGeometry& link, double exponent,
                                         const ChannelParams& params, std::uint64_t seed,
                                         std::uint32_t link_index = 0) {
    if (n_rx < 1 || n_tx < 1) throw DomainError("generate_link_channel: counts must be >= 1");
    params.validate();
    auto rng = link_rng(seed, link_index);
    std::uniform_real_distribution<double> phase(0.0, kTwoPi);
    std::uniform_real_distribution<double> angle(-kPi / 2.0, kPi / 2.0);
    std::normal_distribution<double> gauss(0.0, 1.0);

    const double kappa = params.rician_kappa;
    const int np = params.n_paths;
    double los_power = 1.0;
    double nlos_power = 0.0;
    if (np > 1 && std::isfinite(kappa)) {
        los_power = kappa / (kappa + 1.0);
        nlos_power = 1.0 / ((kappa + 1.0) * static_cast<double>(np - 1));
    }

    const double g = path_gain(link.distance, exponent, params.reference_gain);
    const double scale = std::sqrt(static_cast<double>(n_tx) * static_cast<double>(n_rx) * g);

    LinkChannel out{CMat::Zero(n_rx, n_tx), {}};
    out.aods.reserve(static_cast<std::size_t>(np));
    const cplx alpha_los = std::polar(std::sqrt(los_power), phase(rng));
    out.h += alpha_los * array_response(n_rx, link.aoa) * array_response(n_tx, link.aod).adjoint();
    out.aods.push_back(link.aod);
    for (int l = 1; l < np; ++l) {
        const double sd = std::sqrt(nlos_power / 2.0);
        const cplx alpha(sd * gauss(rng), sd * gauss(rng));
        const double aoa = angle(rng);
        const double aod = angle(rng);
        out.h += alpha * array_response(n_rx, aoa) * array_response(n_tx, aod).adjoint();
        out.aods.push_back(aod);
    }
    out.h *= scale;
    return out;
}

/// Matrix-only form with broadside LoS.
inline CMat generate_link_channel(int n_rx, int n_tx, double distance_m, double exponent,
                                  const ChannelParams& params, std::uint64_t seed) {
    return generate_link_channel(n_rx, n_tx, LinkGeometry{distance_m, 0.0, 0.0}, exponent, params, seed).h;
}

enum class LinkId : std::uint32_t { AliceBob = 1, AliceEve = 2, AliceIrs = 3, IrsBob = 4, IrsEve = 5 };

inline ChannelSet generate_channel_set(const SystemGeometry& geo, const ChannelParams& params, std::uint64_t seed) {
    geo.validate();
    params.validate();
    const double ed = params.pathloss_exp_direct;
    const double er = params.pathloss_exp_reflected;
    auto link = [&](int n_rx, int n_tx, const Point2& tx, const Point2& rx, double e, LinkId id) {
        return generate_link_channel(n_rx, n_tx, LinkGeometry::between(tx, rx), e, params, seed,
                                     static_cast<std::uint32_t>(id));
    };
    auto ab = link(geo.n_bob, geo.n_alice, geo.pos_alice, geo.pos_bob, ed, LinkId::AliceBob);
    auto ae = link(geo.n_eve, geo.n_alice, geo.pos_alice, geo.pos_eve, ed, LinkId::AliceEve);
    auto ai = link(geo.n_irs, geo.n_alice, geo.pos_alice, geo.pos_irs, er, LinkId::AliceIrs);
    auto ib = link(geo.n_bob, geo.n_irs, geo.pos_irs, geo.pos_bob, er, LinkId::IrsBob);
    auto ie = link(geo.n_eve, geo.n_irs, geo.pos_irs, geo.pos_eve, er, LinkId::IrsEve);

    ChannelSet set;
    set.h_ab = std::move(ab.h);
    set.h_ae = std::move(ae.h);
    set.h_ai = std::move(ai.h);
    set.h_ib = std::move(ib.h);
    set.h_ie = std::move(ie.h);
    set.noise_power = dbm_to_watts(params.noise_dbm);
    for (const auto* l : {&ab, &ae, &ai})
        set.alice_aods.insert(set.alice_aods.end(), l->aods.begin(), l->aods.end());
    return set;
}

enum class Node { Bob, Eve };

/// H_A,node + H_I,node * diag(exp(j theta)) * H_AI.
inline CMat equivalent_channel(const ChannelSet& set, const PhaseVector& phases, Node node) {
    detail::require_dims(phases.size() == set.n_irs(), "equivalent_channel phase count");
    const CVec x = phases.unit();
    const CMat& direct = node == Node::Bob ? set.h_ab : set.h_ae;
    const CMat& reflect = node == Node::Bob ? set.h_ib : set.h_ie;
    detail::require_dims(reflect.cols() == set.h_ai.rows() && direct.cols() == set.h_ai.cols(),
                         "equivalent_channel link shapes");
    return direct + reflect * x.asDiagonal() * set.h_ai;
}

/// Same set with the IRS removed from the propagation (reflected links zeroed).
inline ChannelSet without_irs(ChannelSet set) {
    set.h_ib.setZero();
    set.h_ie.setZero();
    return set;
}

/// Scales both equivalent channels by s (direct links by s, each reflected
/// segment by sqrt(s)). The OF-PB objective scales by s^4 when alpha_b scales by s^2.
inline ChannelSet scaled(ChannelSet set, double s) {
    if (!(s > 0.0)) throw DomainError("scaled: factor must be > 0");
    const double r = std::sqrt(s);
    set.h_ab *= s;
    set.h_ae *= s;
    set.h_ai *= r;
    set.h_ib *= r;
    set.h_ie *= r;
    return set;
}

}  // namespace irsbf

#endif  // IRSBF_CHANNEL_HPP
