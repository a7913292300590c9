#include "cmvdyn/error.hpp"
#include "cmvdyn/qwalk.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

using namespace cmvdyn;
using cmvdyn::testing::gram_defect;
using cmvdyn::testing::random_unit_state;

namespace {

Coin random_coin(std::mt19937_64& rng) {
    // U(2) element: global phase times SU(2) parameterised by a, b with |a|^2 + |b|^2 = 1.
    std::normal_distribution<double> g;
    std::uniform_real_distribution<double> u(0.0, 2.0 * std::numbers::pi);
    Complex a{g(rng), g(rng)}, b{g(rng), g(rng)};
    const double n = std::sqrt(std::norm(a) + std::norm(b));
    a /= n;
    b /= n;
    const Complex ph = std::polar(1.0, u(rng));
    return {ph * a, ph * b, -ph * std::conj(b), ph * std::conj(a)};
}

CoinSequence random_coins(std::mt19937_64& rng, Index lo, Index hi) {
    std::map<Index, Coin> t;
    for (Index n = lo; n < hi; ++n) t[n] = random_coin(rng);
    return CoinSequence(t);
}

// Independent construction of the update-rule matrix straight from the tensor-product picture.
Eigen::MatrixXcd update_rule_dense(const CoinSequence& coins, Index lo, Index hi) {
    const Index n = hi - lo;
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
    auto flat = [](Index site, int spin) { return 2 * site + spin; };
    for (Index site = lo / 2 - 2; site <= hi / 2 + 2; ++site) {
        if (!coins.contains(site)) continue;
        const Coin c = coins.coin(site);
        const Complex image[2][2] = {{c.c11, c.c21}, {c.c12, c.c22}};  // [spin in][up at n+1, down at n-1]
        for (int s = 0; s < 2; ++s) {
            const Index col = flat(site, s);
            const Index up = flat(site + 1, 0), down = flat(site - 1, 1);
            if (col < lo || col >= hi) continue;
            if (up >= lo && up < hi) m(up - lo, col - lo) += image[s][0];
            if (down >= lo && down < hi) m(down - lo, col - lo) += image[s][1];
        }
    }
    return m;
}

}  // namespace

TEST(Coin, Validation) {
    EXPECT_LT(rotation_coin(0.3).unitarity_defect(), 1e-15);
    std::map<Index, Coin> bad{{0, Coin{1.0, 0.1, 0.0, 1.0}}};
    EXPECT_THROW(CoinSequence{bad}, Error);
    auto seq = rotation_coins([](Index n) { return 0.1 * static_cast<double>(n); }, {0, 5});
    EXPECT_TRUE(seq.contains(4));
    EXPECT_FALSE(seq.contains(5));
    try {
        seq.coin(7);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::configuration);
    }
}

TEST(Coin, TextRoundTrip) {
    std::mt19937_64 rng(1);
    auto coins = random_coins(rng, -3, 3);
    std::ostringstream out;
    write_coins(out, coins, {-3, 3});
    std::istringstream in("# coins\n" + out.str());
    auto back = read_coins(in);
    for (Index n = -3; n < 3; ++n) {
        EXPECT_EQ(back.coin(n).c21, coins.coin(n).c21);
        EXPECT_EQ(back.coin(n).c12, coins.coin(n).c12);
    }
}

TEST(WalkOperator, IdentityCoinShifts) {
    auto u = build_walk_operator(constant_coins(identity_coin()), {-20, 20}, WalkConvention::update_rule);
    for (Index n = -5; n <= 5; ++n) {
        auto up = apply(u, State::basis(2 * n));
        ASSERT_EQ(up.support(), (Window{2 * n + 2, 2 * n + 3}));
        EXPECT_EQ(up.at(2 * n + 2), Complex(1.0));
        auto down = apply(u, State::basis(2 * n + 1));
        ASSERT_EQ(down.support(), (Window{2 * n - 1, 2 * n}));
        EXPECT_EQ(down.at(2 * n - 1), Complex(1.0));
    }
}

TEST(WalkOperator, RotationColumn) {
    const double theta = 0.37;
    auto u = build_walk_operator(rotation_coins(theta), {-10, 10}, WalkConvention::update_rule);
    // |0,up> -> cos at |1,up> (flat 2) and sin at |-1,down> (flat -1).
    EXPECT_NEAR(std::abs(u(2, 0) - std::cos(theta)), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(u(-1, 0) - std::sin(theta)), 0.0, 1e-15);
    for (Index r = -10; r < 10; ++r)
        if (r != 2 && r != -1) EXPECT_EQ(u(r, 0), Complex(0.0));
}

TEST(WalkOperator, DisplayedEntries) {
    std::mt19937_64 rng(2);
    auto coins = random_coins(rng, -12, 12);
    auto d = build_walk_operator(coins, {-20, 20});
    for (Index n = -8; n < 8; ++n) {
        const Coin c = coins.coin(n);
        EXPECT_EQ(d(2 * n, 2 * n - 1), c.c21);
        EXPECT_EQ(d(2 * n, 2 * n + 2), c.c11);
        EXPECT_EQ(d(2 * n + 1, 2 * n - 1), c.c22);
        EXPECT_EQ(d(2 * n + 1, 2 * n + 2), c.c12);
    }
}

TEST(WalkOperator, ConventionsAreTransposes) {
    std::mt19937_64 rng(3);
    auto coins = random_coins(rng, -15, 15);
    auto d = build_walk_operator(coins, {-20, 20}, WalkConvention::displayed);
    auto t = build_walk_operator(coins, {-20, 20}, WalkConvention::update_rule);
    const Eigen::MatrixXcd oracle = update_rule_dense(coins, -20, 20);
    EXPECT_LT((t.dense() - oracle).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_LT((d.dense() - oracle.transpose()).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_LT((d.transposed().dense() - t.dense()).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(WalkOperator, RandomCoinsOrthonormalAndNormPreserving) {
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 10; ++trial) {
        auto coins = random_coins(rng, -22, 22);
        for (auto conv : {WalkConvention::displayed, WalkConvention::update_rule}) {
            auto u = build_walk_operator(coins, {-20, 20}, conv);
            EXPECT_LT(gram_defect(u.dense(), 2, 38), 1e-12);
            auto v = random_unit_state(rng, -10, 10);
            EXPECT_NEAR(apply(u, v).norm(), 1.0, 1e-12);
        }
    }
}

TEST(WalkOperator, MissingCoin) {
    std::map<Index, Coin> t;
    for (Index n = -2; n < 2; ++n) t[n] = identity_coin();
    try {
        build_walk_operator(CoinSequence(t), {-20, 20});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::configuration);
    }
}

TEST(Gauge, RealRotationsHaveTrivialPhases) {
    auto coins = rotation_coins([](Index n) { return 1.2 * std::sin(0.7 * static_cast<double>(n)); }, whole_line);
    auto g = cgmv_gauge(coins, {-10, 10});
    for (const auto& [n, lam] : g.phases.lambdas) EXPECT_EQ(lam, Complex(1.0)) << n;
    for (Index n = -10; n < 10; ++n) {
        EXPECT_NEAR(std::abs(g.alphas.alpha(2 * n) - std::sin(1.2 * std::sin(0.7 * static_cast<double>(n)))), 0.0,
                    1e-15);
        EXPECT_EQ(g.alphas.alpha(2 * n + 1), Complex(0.0));
    }
    auto u = build_walk_operator(coins, {-16, 16});
    auto e = build_extended_cmv(g.alphas, {-16, 16});
    EXPECT_LE(verify_gauge_equivalence(u, g.phases, e), 1e-12);
}

TEST(Gauge, IdentityCoinsGiveFreeCmv) {
    auto g = cgmv_gauge(constant_coins(identity_coin()), {-10, 10});
    for (Index k = -21; k < 20; ++k) EXPECT_EQ(g.alphas.alpha(k), Complex(0.0));
    auto u = build_walk_operator(constant_coins(identity_coin()), {-16, 16});
    auto e = build_extended_cmv(constant_verblunsky(0.0, false), {-16, 16});
    EXPECT_LE(verify_gauge_equivalence(u, g.phases, e), 1e-12);
}

TEST(Gauge, PhaseStep) {
    const double r = 0.6;
    const Complex ph = std::polar(1.0, std::numbers::pi / 3);
    const double s = std::sqrt(1 - r * r);
    // [[ph r, -s], [s, conj(ph) r]] is unitary.
    auto coins = constant_coins(Coin{ph * r, -s, s, std::conj(ph) * r});
    auto g = cgmv_gauge(coins, {-4, 4});
    for (Index n = -4; n < 3; ++n) {
        EXPECT_NEAR(std::abs(g.phases.at(2 * n + 2) / g.phases.at(2 * n) - std::polar(1.0, -std::numbers::pi / 3)),
                    0.0, 1e-15);
    }
}

TEST(Gauge, RandomCoinsMatchExtendedCmv) {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        auto coins = random_coins(rng, -40, 40);
        auto g = cgmv_gauge(coins, {-34, 34});
        for (const auto& [n, lam] : g.phases.lambdas) EXPECT_NEAR(std::abs(lam), 1.0, 1e-12);
        EXPECT_EQ(g.phases.at(0), Complex(1.0));
        EXPECT_EQ(g.phases.at(-1), Complex(1.0));
        for (Index n = -34; n < 34; ++n) {
            EXPECT_NEAR(std::abs(g.alphas.alpha(2 * n)), std::abs(coins.coin(n).c21), 1e-15);
        }
        auto u = build_walk_operator(coins, {-64, 64});
        auto e = build_extended_cmv(g.alphas, {-64, 64});
        EXPECT_LE(verify_gauge_equivalence(u, g.phases, e), 1e-12);
    }
}

TEST(Gauge, PreservesSiteProbabilities) {
    std::mt19937_64 rng(6);
    auto coins = random_coins(rng, -40, 40);
    auto g = cgmv_gauge(coins, {-34, 34});
    auto u = build_walk_operator(coins, {-64, 64});
    auto e = build_extended_cmv(g.alphas, {-64, 64});
    State psi = random_unit_state(rng, -2, 2);
    // E = Lambda^* U Lambda, so U^k psi = Lambda E^k Lambda^* psi.
    State chi = psi;
    for (Index n = chi.first(); n < chi.end(); ++n) chi.amplitudes[n - chi.first()] *= std::conj(g.phases.at(n));
    for (int k = 0; k < 25; ++k) {
        for (Index n = -60; n < 60; ++n) EXPECT_NEAR(std::abs(psi.at(n)), std::abs(chi.at(n)), 1e-10);
        psi = apply(u, psi);
        chi = apply(e, chi);
    }
}

TEST(Gauge, DegenerateCoins) {
    auto coins = constant_coins(rotation_coin(std::numbers::pi / 2));
    try {
        cgmv_gauge(coins, {-3, 3});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::gauge_degenerate);
    }
    // The walk operator itself is still fine.
    auto u = build_walk_operator(coins, {-10, 10});
    EXPECT_LT(gram_defect(u.dense(), 2, 18), 1e-12);
}

TEST(Gauge, WindowMismatch) {
    auto g = cgmv_gauge(constant_coins(identity_coin()), {-10, 10});
    auto u = build_walk_operator(constant_coins(identity_coin()), {-16, 16});
    auto e = build_extended_cmv(constant_verblunsky(0.0, false), {-14, 14});
    try {
        verify_gauge_equivalence(u, g.phases, e);
        FAIL();
    } catch (const Error& err) {
        EXPECT_EQ(err.kind(), ErrorKind::alignment);
    }
}

TEST(Coins, RandomCoinsAreUnitaryAndReproducible) {
    const auto a = random_coins(42), b = random_coins(42), c = random_coins(43);
    double differ = 0.0;
    for (Index n = -200; n < 200; ++n) {
        const Coin x = a.coin(n), y = b.coin(n);
        EXPECT_LT(x.unitarity_defect(), 1e-14) << n;
        EXPECT_EQ(x.c11, y.c11);
        EXPECT_EQ(x.c21, y.c21);
        differ = std::max(differ, std::abs(x.c11 - c.coin(n).c11));
    }
    EXPECT_GT(differ, 0.1);
    EXPECT_FALSE(random_coins(1, {0, 4}).contains(4));
}
