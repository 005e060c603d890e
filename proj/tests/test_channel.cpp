#include <gtest/gtest.h>

#include <sstream>

#include "irsbf/channel.hpp"
#include "irsbf/io.hpp"

using namespace irsbf;

namespace {

CMat random_complex(Eigen::Index r, Eigen::Index c, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    CMat m(r, c);
    for (Eigen::Index j = 0; j < c; ++j)
        for (Eigen::Index i = 0; i < r; ++i) m(i, j) = cplx(g(rng), g(rng));
    return m;
}

}  // namespace

TEST(ArrayResponse, BroadsideIsFlat) {
    const CVec a = array_response(4, 0.0);
    for (Eigen::Index k = 0; k < 4; ++k) EXPECT_NEAR(std::abs(a(k) - cplx(0.5, 0.0)), 0.0, 1e-15);
}

TEST(ArrayResponse, EndfireAlternatesSign) {
    const CVec a = array_response(8, kPi / 2.0);
    for (Eigen::Index k = 0; k < 8; ++k) {
        const double sign = (k % 2 == 0) ? 1.0 : -1.0;
        EXPECT_NEAR(std::abs(a(k) - cplx(sign / std::sqrt(8.0), 0.0)), 0.0, 1e-14);
    }
}

TEST(ArrayResponse, UnitNormAndPhaseProgression) {
    for (double th : {-1.2, -0.3, 0.0, 0.7, 1.5}) {
        const CVec a = array_response(16, th);
        EXPECT_NEAR(a.norm(), 1.0, 1e-14);
        for (Eigen::Index k = 1; k < 16; ++k)
            EXPECT_NEAR(std::abs(a(k) / a(k - 1) - std::polar(1.0, kPi * std::sin(th))), 0.0, 1e-12);
    }
    EXPECT_THROW(array_response(0, 0.1), DomainError);
}

TEST(PathGain, PowerLaw) {
    EXPECT_DOUBLE_EQ(path_gain(10.0, 2.0, 1.0), 0.01);
    EXPECT_DOUBLE_EQ(path_gain(2.0, 4.0, 3.0), 3.0 / 16.0);
    EXPECT_THROW(path_gain(0.0, 2.0, 1.0), DomainError);
    EXPECT_THROW(path_gain(-1.0, 2.0, 1.0), DomainError);
}

TEST(DbmToWatts, KnownValues) {
    EXPECT_DOUBLE_EQ(dbm_to_watts(30.0), 1.0);
    EXPECT_NEAR(dbm_to_watts(0.0), 1e-3, 1e-18);
    EXPECT_NEAR(dbm_to_watts(-59.0), 1.2589254117941673e-9, 1e-13);
    EXPECT_THROW(dbm_to_watts(std::nan("")), DomainError);
}

TEST(LinkGeometry, AnglesFromPositions) {
    const auto l = LinkGeometry::between({0.0, 5.0}, {60.0, 0.0});
    EXPECT_NEAR(l.distance, std::hypot(60.0, 5.0), 1e-12);
    EXPECT_NEAR(std::sin(l.aod), -5.0 / l.distance, 1e-14);
    EXPECT_NEAR(l.aoa, -l.aod, 1e-15);
    EXPECT_THROW(LinkGeometry::between({1.0, 1.0}, {1.0, 1.0}), DomainError);
}

TEST(LinkChannel, PureLosIsRankOne) {
    ChannelParams p;
    p.rician_kappa = std::numeric_limits<double>::infinity();
    const CMat h = generate_link_channel(2, 4, 30.0, 2.0, p, 11);
    Eigen::JacobiSVD<CMat> svd(h);
    const RVec s = svd.singularValues();
    EXPECT_GT(s(0), 0.0);
    EXPECT_LT(s(1), 1e-12 * s(0));
    // All power sits on the LoS path: ||H||_F^2 = n_rx n_tx g.
    EXPECT_NEAR(h.squaredNorm(), 8.0 * path_gain(30.0, 2.0, 1.0), 1e-12 * h.squaredNorm());
}

TEST(LinkChannel, SinglePathIsRankOne) {
    ChannelParams p;
    p.n_paths = 1;
    const CMat h = generate_link_channel(3, 5, 10.0, 2.0, p, 4);
    Eigen::JacobiSVD<CMat> svd(h);
    EXPECT_LT(svd.singularValues()(1), 1e-12 * svd.singularValues()(0));
}

TEST(LinkChannel, DeterministicPerSeed) {
    ChannelParams p;
    const CMat a = generate_link_channel(2, 16, 25.0, 2.0, p, 99);
    const CMat b = generate_link_channel(2, 16, 25.0, 2.0, p, 99);
    EXPECT_EQ(a, b);
    const CMat c = generate_link_channel(2, 16, 25.0, 2.0, p, 100);
    EXPECT_NE(a, c);
}

TEST(LinkChannel, MeanPowerMatchesPathLoss) {
    ChannelParams p;
    const double g = path_gain(60.0, 4.0, p.reference_gain);
    double acc = 0.0;
    const int n = 1000;
    for (int s = 0; s < n; ++s) acc += generate_link_channel(2, 32, 60.0, 4.0, p, static_cast<std::uint64_t>(s)).squaredNorm();
    const double expected = 2.0 * 32.0 * g;
    EXPECT_NEAR(acc / n, expected, 0.10 * expected);
}

TEST(LinkChannel, LosShareOfPower) {
    // The LoS term of a broadside link carries kappa / (kappa + 1) of the power;
    // estimate it from the projection onto the LoS rank-one direction.
    ChannelParams p;
    p.rician_kappa = 3.0;
    const CVec arx = array_response(8, 0.0), atx = array_response(8, 0.0);
    double los = 0.0, total = 0.0;
    for (int s = 0; s < 2000; ++s) {
        const CMat h = generate_link_channel(8, 8, 1.0, 0.0, p, static_cast<std::uint64_t>(s));
        los += std::norm((arx.adjoint() * h * atx)(0));
        total += h.squaredNorm();
    }
    // NLoS paths leak into the LoS direction by about 1/N per side; allow for it.
    const double share = los / total;
    EXPECT_GT(share, 0.75 - 0.02);
    EXPECT_LT(share, 0.75 + 0.25 / 8.0 + 0.02);
}

TEST(ChannelSet, ShapesAndNoise) {
    SystemGeometry g;
    g.n_alice = 8;
    g.n_irs = 6;
    const ChannelSet set = generate_channel_set(g, ChannelParams{}, 5);
    EXPECT_EQ(set.h_ab.rows(), 2);
    EXPECT_EQ(set.h_ab.cols(), 8);
    EXPECT_EQ(set.h_ae.rows(), 2);
    EXPECT_EQ(set.h_ai.rows(), 6);
    EXPECT_EQ(set.h_ai.cols(), 8);
    EXPECT_EQ(set.h_ib.rows(), 2);
    EXPECT_EQ(set.h_ib.cols(), 6);
    EXPECT_EQ(set.h_ie.cols(), 6);
    EXPECT_NEAR(set.noise_power, dbm_to_watts(-59.0), 1e-22);
    EXPECT_EQ(set.alice_aods.size(), 3u * 4u);
    EXPECT_NO_THROW(set.validate());
}

TEST(ChannelSet, PureFunctionOfSeed) {
    SystemGeometry g;
    g.n_alice = 8;
    g.n_irs = 4;
    const ChannelSet a = generate_channel_set(g, ChannelParams{}, 77);
    const ChannelSet b = generate_channel_set(g, ChannelParams{}, 77);
    EXPECT_EQ(a.h_ab, b.h_ab);
    EXPECT_EQ(a.h_ie, b.h_ie);
    const ChannelSet c = generate_channel_set(g, ChannelParams{}, 78);
    EXPECT_NE(a.h_ab, c.h_ab);
}

TEST(ChannelSet, LinksUseIndependentStreams) {
    // Equal-shape links between the same nodes must not share a stream.
    SystemGeometry g;
    g.n_bob = g.n_eve = 2;
    g.pos_eve = {60.0, 0.5};
    const ChannelSet set = generate_channel_set(g, ChannelParams{}, 3);
    EXPECT_GT((set.h_ab - set.h_ae).norm(), 1e-3 * set.h_ab.norm());
    // Adjacent seeds must not reuse one another's link streams.
    const ChannelSet next = generate_channel_set(g, ChannelParams{}, 4);
    EXPECT_NE(set.h_ae, next.h_ab);
}

TEST(ChannelSet, SwappingBobAndEveSwapsLinkStatistics) {
    SystemGeometry g;
    g.n_alice = 8;
    g.n_irs = 4;
    SystemGeometry sw = g;
    std::swap(sw.pos_bob, sw.pos_eve);
    double ab = 0.0, ae = 0.0, ab_sw = 0.0, ae_sw = 0.0;
    for (int s = 0; s < 600; ++s) {
        const ChannelSet a = generate_channel_set(g, ChannelParams{}, static_cast<std::uint64_t>(s));
        const ChannelSet b = generate_channel_set(sw, ChannelParams{}, static_cast<std::uint64_t>(s));
        ab += a.h_ab.squaredNorm();
        ae += a.h_ae.squaredNorm();
        ab_sw += b.h_ab.squaredNorm();
        ae_sw += b.h_ae.squaredNorm();
    }
    EXPECT_NEAR(ab_sw / ae, 1.0, 0.1);
    EXPECT_NEAR(ae_sw / ab, 1.0, 0.1);
}

TEST(ChannelSet, RejectsBadGeometry) {
    SystemGeometry g;
    g.n_rf = 1;
    EXPECT_THROW(generate_channel_set(g, ChannelParams{}, 1), DomainError);
    SystemGeometry h;
    h.pos_bob = h.pos_eve;
    EXPECT_THROW(generate_channel_set(h, ChannelParams{}, 1), DomainError);
    ChannelParams p;
    p.n_paths = 0;
    EXPECT_THROW(generate_channel_set(SystemGeometry{}, p, 1), DomainError);
}

TEST(EquivalentChannel, MatchesExplicitSum) {
    SystemGeometry g;
    g.n_alice = 6;
    g.n_irs = 5;
    const ChannelSet set = generate_channel_set(g, ChannelParams{}, 21);
    RVec th(5);
    th << 0.1, 1.0, 2.0, 3.0, 6.0;
    const PhaseVector ph = PhaseVector::from_angles(th);
    CMat expected = set.h_ab;
    for (int n = 0; n < 5; ++n) expected += std::polar(1.0, th(n)) * set.h_ib.col(n) * set.h_ai.row(n);
    EXPECT_LT((equivalent_channel(set, ph, Node::Bob) - expected).norm(), 1e-13 * expected.norm());
    EXPECT_THROW(equivalent_channel(set, PhaseVector::zeros(4), Node::Bob), InputError);
}

TEST(EquivalentChannel, WithoutIrsLeavesDirectLinks) {
    SystemGeometry g;
    g.n_alice = 6;
    g.n_irs = 5;
    const ChannelSet set = without_irs(generate_channel_set(g, ChannelParams{}, 2));
    const PhaseVector ph = PhaseVector::from_angles(RVec::Constant(5, 1.3));
    EXPECT_EQ(equivalent_channel(set, ph, Node::Bob), set.h_ab);
    EXPECT_EQ(equivalent_channel(set, ph, Node::Eve), set.h_ae);
}

TEST(EquivalentChannel, ScaledSetScalesEquivalentChannels) {
    SystemGeometry g;
    g.n_alice = 6;
    g.n_irs = 5;
    const ChannelSet set = generate_channel_set(g, ChannelParams{}, 8);
    const PhaseVector ph = PhaseVector::from_angles(RVec::LinSpaced(5, 0.0, 3.0));
    const double s = 37.5;
    const ChannelSet big = scaled(set, s);
    for (Node node : {Node::Bob, Node::Eve}) {
        const CMat a = equivalent_channel(set, ph, node);
        EXPECT_LT((equivalent_channel(big, ph, node) - s * a).norm(), 1e-12 * s * a.norm());
    }
    EXPECT_THROW(scaled(set, 0.0), DomainError);
}

TEST(PhaseVector, WrapsIntoPrincipalRange) {
    RVec t(4);
    t << -0.5, 7.0, kTwoPi, 0.0;
    const PhaseVector p = PhaseVector::from_angles(t);
    for (Eigen::Index i = 0; i < 4; ++i) {
        EXPECT_GE(p.theta(i), 0.0);
        EXPECT_LT(p.theta(i), kTwoPi);
    }
    EXPECT_NEAR(p.theta(0), kTwoPi - 0.5, 1e-15);
    EXPECT_NEAR(p.theta(1), 7.0 - kTwoPi, 1e-15);
    CVec x(2);
    x << cplx(0.0, -2.0), cplx(-1.0, 0.0);
    const PhaseVector q = PhaseVector::from_unit(x);
    EXPECT_NEAR(q.theta(0), 1.5 * kPi, 1e-15);
    EXPECT_NEAR(q.theta(1), kPi, 1e-15);
    for (Eigen::Index i = 0; i < 4; ++i) EXPECT_NEAR(std::abs(p.unit()(i)), 1.0, 1e-15);
}

TEST(Fixture, ChannelSetRoundTripIsExact) {
    SystemGeometry g;
    g.n_alice = 5;
    g.n_irs = 3;
    const ChannelSet set = generate_channel_set(g, ChannelParams{}, 1234);
    std::stringstream ss;
    io::write_channel_set(ss, set);
    const ChannelSet back = io::read_channel_set(ss);
    EXPECT_EQ(back.h_ab, set.h_ab);
    EXPECT_EQ(back.h_ae, set.h_ae);
    EXPECT_EQ(back.h_ai, set.h_ai);
    EXPECT_EQ(back.h_ib, set.h_ib);
    EXPECT_EQ(back.h_ie, set.h_ie);
    EXPECT_EQ(back.noise_power, set.noise_power);
    EXPECT_EQ(back.alice_aods, set.alice_aods);
}

TEST(Fixture, MatrixBlockLayout) {
    CMat m(2, 2);
    m << cplx(1.0, -2.0), cplx(0.5, 0.0), cplx(-3.0, 4.0), cplx(0.0, 0.25);
    std::stringstream ss;
    io::write_matrix(ss, "m", m);
    EXPECT_EQ(ss.str(), "matrix m 2 2\n1,-2,0.5,0\n-3,4,0,0.25\n");
    const auto fx = io::read_fixture(ss);
    EXPECT_EQ(fx.matrix("m"), m);
}

TEST(Fixture, RejectsMalformedInput) {
    {
        std::stringstream ss("matrix a 1 2\n1,2,3\n");
        EXPECT_THROW(io::read_fixture(ss), InputError);
    }
    {
        std::stringstream ss("matrix a 2 1\n1,2\n");
        EXPECT_THROW(io::read_fixture(ss), InputError);
    }
    {
        std::stringstream ss("matrix a 1 1\n1,x\n");
        EXPECT_THROW(io::read_fixture(ss), InputError);
    }
    {
        std::stringstream ss("tensor a 1\n");
        EXPECT_THROW(io::read_fixture(ss), InputError);
    }
    {
        std::stringstream ss("matrix h_ab 1 1\n1,0\n");
        EXPECT_THROW(io::read_channel_set(ss), InputError);
    }
}

TEST(Fixture, RandomMatrixRoundTrip) {
    const CMat m = random_complex(7, 3, 5) * 1e-7;
    std::stringstream ss;
    io::write_matrix(ss, "x", m);
    EXPECT_EQ(io::read_fixture(ss).matrix("x"), m);
}
