#include <gtest/gtest.h>

#include "oracles.hpp"
#include "ternary_stab/trif_operator.hpp"
#include "ternary_stab/scenario_lab.hpp"

using namespace tstab;

namespace {

std::vector<RingElement> sample_tuple(const TrifParams& p, Shape s, std::uint64_t seed) {
    ElementSampler sampler(s, 2.0, seed);
    std::vector<RingElement> xs;
    for (int j = 0; j < p.d; ++j) {
        xs.push_back(sampler.next());
    }
    return xs;
}

double max_norm(const std::vector<RingElement>& xs) {
    double m = 1.0;
    for (const auto& x : xs) {
        m = std::max(m, norm(x));
    }
    return m;
}

}  // namespace

TEST(Params, ThreeTwo) {
    const auto p = make_params(3, 2);
    EXPECT_EQ(p.q, Rational(4));
    EXPECT_EQ(p.r, Rational(-2));
    EXPECT_EQ(p.c_dm2_lm2, 1);
    EXPECT_EQ(p.c_dm2_lm1, 1);
    EXPECT_EQ(p.c_dm1_lm1, 2);
    EXPECT_EQ(p.c_d_l, 3);
}

TEST(Params, FourThree) {
    const auto p = make_params(4, 3);
    EXPECT_EQ(p.q, Rational(9));
    EXPECT_EQ(p.r, Rational(-3));
    EXPECT_EQ(p.c_dm2_lm2, 2);
    EXPECT_EQ(p.c_dm2_lm1, 1);
    EXPECT_EQ(p.c_dm1_lm1, 3);
    EXPECT_EQ(p.c_d_l, 4);
}

TEST(Params, FourTwo) {
    const auto p = make_params(4, 2);
    EXPECT_EQ(p.q, Rational(3));
    EXPECT_EQ(p.r, Rational(-1));
    EXPECT_EQ(p.c_dm2_lm2, 1);
    EXPECT_EQ(p.c_dm2_lm1, 2);
    EXPECT_EQ(p.c_dm1_lm1, 3);
    EXPECT_EQ(p.c_d_l, 6);
}

TEST(Params, BinomialsMatchGammaOracle) {
    for (int n = 0; n <= 20; ++n) {
        for (int k = 0; k <= n; ++k) {
            EXPECT_EQ(double(binomial(n, k)), oracle::binom(n, k)) << n << " " << k;
        }
    }
}

TEST(Params, OutOfRangeRejected) {
    EXPECT_THROW(make_params(3, 1), RejectedInput);
    EXPECT_THROW(make_params(3, 3), RejectedInput);
    EXPECT_THROW(make_params(2, 2), RejectedInput);
    EXPECT_THROW(make_params(13, 2), RejectedInput);
    EXPECT_NO_THROW(make_params(13, 2, 13));
}

TEST(Subsets, ThreeTwoOrder) {
    const std::vector<std::vector<int>> expected{{0, 1}, {0, 2}, {1, 2}};
    EXPECT_EQ(l_subsets(3, 2), expected);
}

TEST(Subsets, MatchBitmaskOracleAsSets) {
    for (int d = 3; d <= 10; ++d) {
        for (int l = 2; l < d; ++l) {
            auto ours = l_subsets(d, l);
            auto theirs = oracle::bitmask_subsets(d, l);
            EXPECT_EQ(ours.size(), std::size_t(binomial(d, l)));
            EXPECT_TRUE(std::is_sorted(ours.begin(), ours.end()));
            std::sort(theirs.begin(), theirs.end());
            EXPECT_EQ(ours, theirs) << d << " " << l;
        }
    }
    EXPECT_EQ(l_subsets(4, 2).size(), 6u);
}

TEST(TrifDefect, LinearMapVanishes) {
    const auto S = random_exact_hom({2, 2}, {3, 3}, 5);
    for (auto [d, l] : {std::pair{3, 2}, {4, 2}, {4, 3}, {6, 4}}) {
        const auto p = make_params(d, l);
        for (std::uint64_t s = 0; s < 10; ++s) {
            const auto xs = sample_tuple(p, {2, 2}, s);
            EXPECT_LE(trif_defect(S, p, xs), 1e-9 * max_norm(xs));
        }
    }
}

TEST(TrifDefect, ConstantMapVanishes) {
    const auto c = random_element({2, 2}, 1.0, 3);
    auto f = [&](const RingElement&) { return c; };
    for (auto [d, l] : {std::pair{3, 2}, {4, 3}}) {
        const auto p = make_params(d, l);
        // the weights add to zero: d C(d-2,l-2) + d C(d-2,l-1) - l C(d,l)
        EXPECT_EQ(p.leading_weight() + p.d * p.c_dm2_lm1 - p.l * p.c_d_l, 0);
        EXPECT_LE(trif_defect(f, p, sample_tuple(p, {2, 2}, 8)), 1e-12);
    }
}

TEST(TrifDefect, CubicScalarMap) {
    const auto p = make_params(3, 2);
    auto f = [](const RingElement& x) { return tprod(x, x, x); };  // |t|^2 t on 1x1
    auto one = [](double v) { return RingElement::from_entries({1, 1}, std::vector<Complex>{v}); };
    const std::vector<RingElement> ones{one(1), one(1), one(1)};
    EXPECT_EQ(trif_defect(f, p, ones), 0.0);

    // brute force for (1, 1, 4): 3 f(2) + (f(1)+f(1)+f(4)) - 2 (f(1) + f(5/2) + f(5/2))
    auto g = [](double t) { return t * t * t; };
    const double expected = std::abs(3 * g(2.0) + (2 * g(1.0) + g(4.0)) - 2 * (g(1.0) + 2 * g(2.5)));
    const std::vector<RingElement> xs{one(1), one(1), one(4)};
    EXPECT_NEAR(trif_defect(f, p, xs), expected, 1e-12 * expected);
    EXPECT_GT(expected, 1.0);
}

TEST(TrifDefect, ShapeMismatchRejected) {
    const auto p = make_params(3, 2);
    auto id = [](const RingElement& x) { return x; };
    const std::vector<RingElement> xs{RingElement::zero({2, 2}), RingElement::zero({2, 2}),
                                      RingElement::zero({2, 3})};
    EXPECT_THROW(trif_defect(id, p, xs), RejectedInput);
    const std::vector<RingElement> short_xs{RingElement::zero({2, 2})};
    EXPECT_THROW(trif_defect(id, p, short_xs), RejectedInput);
}

TEST(DMu, ExactHomZeroArguments) {
    const auto S = random_exact_hom({2, 3}, {3, 4}, 2);
    for (auto [d, l] : {std::pair{3, 2}, {4, 3}}) {
        const auto p = make_params(d, l);
        const std::vector<RingElement> zeros(std::size_t(d), RingElement::zero({2, 3}));
        ElementSampler s({2, 3}, 2.0, 4);
        const auto u = s.next(), v = s.next(), w = s.next();
        EXPECT_LE(d_mu_defect(S, p, 1.0, zeros, u, v, w), 1e-12);
    }
}

TEST(DMu, ZeroMap) {
    const auto p = make_params(4, 2);
    auto zero = [](const RingElement& x) { return RingElement::zero(x.shape()); };
    const auto xs = sample_tuple(p, {2, 2}, 1);
    EXPECT_EQ(d_mu_defect(zero, p, Complex(0.6, 0.8), xs, xs[0], xs[1], xs[2]), 0.0);
}

TEST(DMu, MatchesDirectTranscription) {
    const auto S = random_exact_hom({2, 2}, {3, 3}, 21);
    const auto pert = make_perturbed_hom(S, NoiseSpec::constant_ball(0.3), make_params(3, 2), 21);
    oracle::RawMap raw = [&](const oracle::Matrix& m) { return pert(RingElement::from_matrix(m)).matrix(); };
    for (auto [d, l] : {std::pair{3, 2}, {4, 2}, {4, 3}, {5, 3}}) {
        const auto p = make_params(d, l);
        for (std::uint64_t s = 0; s < 5; ++s) {
            const auto xs = sample_tuple(p, {2, 2}, 100 + s);
            ElementSampler e({2, 2}, 2.0, 200 + s);
            const auto u = e.next(), v = e.next(), w = e.next();
            const Complex mu = std::polar(1.0, 0.7 * double(s));
            std::vector<oracle::Matrix> raw_xs;
            for (const auto& x : xs) {
                raw_xs.push_back(x.matrix());
            }
            const double ours = d_mu_defect(pert, p, mu, xs, u, v, w);
            const double theirs = oracle::d_mu_direct(raw, d, l, mu, raw_xs, u.matrix(), v.matrix(), w.matrix());
            EXPECT_NEAR(ours, theirs, 1e-10 * std::max(1.0, theirs));
        }
    }
}

TEST(Collapse, LinearMapVanishes) {
    const auto S = random_exact_hom({2, 2}, {2, 2}, 9);
    for (auto [d, l] : {std::pair{3, 2}, {4, 2}, {4, 3}}) {
        const auto p = make_params(d, l);
        EXPECT_LE(collapse_defect(S, p, random_element({2, 2}, 2.0, 1)), 1e-12);
    }
}

TEST(Collapse, TruncatedBeyondUnitBall) {
    const auto p = make_params(3, 2);
    const auto f = make_truncated_hom(random_exact_hom({2, 2}, {2, 2}, 4), p);
    const auto x = scale(1.5 / norm(random_element({2, 2}, 1.0, 6)), random_element({2, 2}, 1.0, 6));
    EXPECT_EQ(collapse_defect(f, p, x), 0.0);
}

TEST(Collapse, EqualsSubstitutedTrifDefect) {
    const auto p = make_params(3, 2);
    const auto f = make_perturbed_hom(random_exact_hom({2, 2}, {3, 3}, 3), NoiseSpec::pnorm(0.2, 0.5), p, 3);
    for (std::uint64_t s = 0; s < 10; ++s) {
        const auto x = random_element({2, 2}, 2.0, s);
        EXPECT_NEAR(collapse_defect(f, p, x), trif_defect(f, p, substituted_tuple(p, x)), 1e-12);
    }
}

TEST(Collapse, NeedsZeroAtZero) {
    const auto p = make_params(3, 2);
    auto shifted = [](const RingElement& x) {
        return x + RingElement::matrix_unit(x.shape(), 0, 0);
    };
    EXPECT_THROW(collapse_defect(shifted, p, RingElement::identity(2)), PreconditionViolation);
}

TEST(ScalarDomain, Samples) {
    ScalarDomain unit{ScalarDomainKind::UnitCircle, 50, 1};
    for (auto mu : unit.samples()) {
        EXPECT_NEAR(std::abs(mu), 1.0, 1e-15);
    }
    ScalarDomain oi{ScalarDomainKind::OneAndI};
    EXPECT_EQ(oi.samples(), (std::vector<Complex>{1.0, Complex(0.0, 1.0)}));
    EXPECT_THROW(scalar_domain_from_string("reals"), RejectedInput);
}
