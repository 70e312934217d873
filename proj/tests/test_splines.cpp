#include <cmath>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "iga/splines.hpp"

using namespace iga;

TEST(KnotVector, OpenTwoElementsLinear) {
    const auto kv = make_open_knot_vector(2, 1, 0);
    const std::vector<double> expected{0.0, 0.0, 0.5, 1.0, 1.0};
    EXPECT_EQ(kv.knots(), expected);
    EXPECT_EQ(kv.n_basis(), 3);
}

TEST(KnotVector, SingleElementLinear) {
    const auto kv = make_open_knot_vector(1, 1, 0);
    const std::vector<double> expected{0.0, 0.0, 1.0, 1.0};
    EXPECT_EQ(kv.knots(), expected);
    EXPECT_EQ(kv.n_basis(), 2);
}

TEST(KnotVector, SixteenElementsQuadraticC1) {
    const auto kv = make_open_knot_vector(16, 2, 1);
    EXPECT_EQ(kv.n_basis(), 18);
    // distinct knots are the 17 element boundaries, interior multiplicity 1
    std::set<double> distinct(kv.knots().begin(), kv.knots().end());
    EXPECT_EQ(distinct.size(), 17u);
    EXPECT_EQ(static_cast<int>(kv.knots().size()) - kv.degree() - 1, 18);
}

TEST(KnotVector, CountFormulaAcrossContinuities) {
    for (int p = 1; p <= 4; ++p) {
        for (int c = 0; c < p; ++c) {
            const auto kv = make_open_knot_vector(5, p, c);
            EXPECT_EQ(kv.n_basis(), 5 * (p - c) + c + 1) << "p=" << p << " c=" << c;
        }
    }
}

TEST(KnotVector, InvalidContinuityThrows) {
    EXPECT_THROW(make_open_knot_vector(4, 2, 2), parameter_error);
    EXPECT_THROW(make_open_knot_vector(4, 2, -1), parameter_error);
    EXPECT_THROW(make_open_knot_vector(0, 2, 1), parameter_error);
}

TEST(KnotVector, RejectsUnclampedOrDecreasing) {
    EXPECT_THROW(knot_vector(1, {0.0, 0.5, 1.0, 1.0}), parameter_error);
    EXPECT_THROW(knot_vector(1, {0.0, 0.0, 0.7, 0.5, 1.0, 1.0}), parameter_error);
    EXPECT_THROW(knot_vector(2, {0.0, 0.0, 0.0, 0.5, 0.5, 0.5, 1.0, 1.0, 1.0}), parameter_error);
}

TEST(EvalBasis, HatFunctionsByHand) {
    const knot_vector kv{1, {0.0, 0.0, 0.5, 1.0, 1.0}};
    const auto b = eval_basis(kv, 0.25);
    ASSERT_EQ(b.values.size(), 2u);
    EXPECT_EQ(b.first, 0);
    EXPECT_NEAR(b.values[0], 0.5, 1e-15);
    EXPECT_NEAR(b.values[1], 0.5, 1e-15);
    EXPECT_NEAR(b.derivatives[0], -2.0, 1e-14);
    EXPECT_NEAR(b.derivatives[1], 2.0, 1e-14);
}

TEST(EvalBasis, LeftEndpointInterpolates) {
    for (int p = 1; p <= 4; ++p) {
        const auto kv = make_open_knot_vector(3, p, p - 1);
        const auto b = eval_basis(kv, 0.0);
        EXPECT_EQ(b.first, 0);
        EXPECT_DOUBLE_EQ(b.values[0], 1.0);
        for (std::size_t a = 1; a < b.values.size(); ++a) {
            EXPECT_DOUBLE_EQ(b.values[a], 0.0);
        }
    }
}

TEST(EvalBasis, RightEndpointInterpolates) {
    const auto kv = make_open_knot_vector(4, 3, 2);
    const auto b = eval_basis(kv, 1.0);
    EXPECT_EQ(b.first + static_cast<int>(b.values.size()), kv.n_basis());
    EXPECT_NEAR(b.values.back(), 1.0, 1e-15);
}

TEST(EvalBasis, QuadraticValuesAgainstClosedForm) {
    // one element [0, 1], p = 2: Bernstein polynomials
    const knot_vector kv{2, {0.0, 0.0, 0.0, 1.0, 1.0, 1.0}};
    for (double x : {0.1, 0.35, 0.8}) {
        const auto b = eval_basis(kv, x);
        EXPECT_NEAR(b.values[0], (1 - x) * (1 - x), 1e-15);
        EXPECT_NEAR(b.values[1], 2 * x * (1 - x), 1e-15);
        EXPECT_NEAR(b.values[2], x * x, 1e-15);
        EXPECT_NEAR(b.derivatives[0], -2 * (1 - x), 1e-14);
        EXPECT_NEAR(b.derivatives[1], 2 - 4 * x, 1e-14);
        EXPECT_NEAR(b.derivatives[2], 2 * x, 1e-14);
    }
}

TEST(EvalBasis, DerivativeMatchesFiniteDifference) {
    const auto kv = make_open_knot_vector(5, 3, 2);
    const double h = 1e-6;
    for (double x : {0.13, 0.41, 0.77}) {
        const auto b = eval_basis(kv, x);
        const auto bp = eval_basis(kv, x + h);
        const auto bm = eval_basis(kv, x - h);
        ASSERT_EQ(bp.first, b.first);
        ASSERT_EQ(bm.first, b.first);
        for (std::size_t a = 0; a < b.values.size(); ++a) {
            EXPECT_NEAR(b.derivatives[a], (bp.values[a] - bm.values[a]) / (2 * h), 1e-7);
        }
    }
}

TEST(EvalBasis, OutsideDomainThrows) {
    const auto kv = make_open_knot_vector(2, 2, 1);
    EXPECT_THROW(eval_basis(kv, -0.01), domain_error);
    EXPECT_THROW(eval_basis(kv, 1.01), domain_error);
}

TEST(Greville, Examples) {
    EXPECT_EQ(greville_points(knot_vector{1, {0, 0, 1, 1}}), (std::vector<double>{0.0, 1.0}));
    EXPECT_EQ(greville_points(knot_vector{1, {0, 0, 0.5, 1, 1}}), (std::vector<double>{0.0, 0.5, 1.0}));
    EXPECT_EQ(greville_points(knot_vector{2, {0, 0, 0, 0.5, 1, 1, 1}}), (std::vector<double>{0.0, 0.25, 0.75, 1.0}));
}

TEST(Gauss, MidpointRule) {
    const auto rule = gauss_rule(1, make_open_knot_vector(1, 1, 0));
    ASSERT_EQ(rule.size(), 1u);
    EXPECT_DOUBLE_EQ(rule.points[0], 0.5);
    EXPECT_DOUBLE_EQ(rule.weights[0], 1.0);
}

TEST(Gauss, TwoPointIntegratesSquare) {
    const auto rule = gauss_rule(2, make_open_knot_vector(1, 1, 0));
    double s = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i) {
        s += rule.weights[i] * rule.points[i] * rule.points[i];
    }
    EXPECT_NEAR(s, 1.0 / 3.0, 1e-15);
}

TEST(Gauss, ExactUpToDegree2qMinus1) {
    const auto kv = make_open_knot_vector(3, 1, 0);
    for (int q = 1; q <= 6; ++q) {
        const auto rule = gauss_rule(q, kv);
        for (int d = 0; d <= 2 * q - 1; ++d) {
            double s = 0.0;
            for (std::size_t i = 0; i < rule.size(); ++i) {
                s += rule.weights[i] * std::pow(rule.points[i], d);
            }
            EXPECT_NEAR(s, 1.0 / (d + 1), 1e-14) << "q=" << q << " d=" << d;
        }
    }
}

TEST(Gauss, WeightsPositiveAndSumToElementLength) {
    const knot_vector kv{2, {0, 0, 0, 0.2, 0.7, 1, 1, 1}};
    const auto rule = gauss_rule(4, kv);
    std::vector<double> per(kv.n_elements(), 0.0);
    for (std::size_t i = 0; i < rule.size(); ++i) {
        EXPECT_GT(rule.weights[i], 0.0);
        per[rule.element[i]] += rule.weights[i];
    }
    for (int e = 0; e < kv.n_elements(); ++e) {
        EXPECT_NEAR(per[e], kv.element_upper(e) - kv.element_lower(e), 1e-15);
    }
}

TEST(Gauss, MassEntriesExactWithPPlusOne) {
    // p = 2 basis products have degree 4 <= 2 * 3 - 1; compare q = 3 with q = 8
    const auto kv = make_open_knot_vector(4, 2, 1);
    auto mass = [&](int q) {
        const auto rule = gauss_rule(q, kv);
        std::vector<double> m(static_cast<std::size_t>(kv.n_basis()) * kv.n_basis(), 0.0);
        for (std::size_t i = 0; i < rule.size(); ++i) {
            const auto b = eval_basis(kv, rule.points[i]);
            for (std::size_t a = 0; a < b.values.size(); ++a) {
                for (std::size_t c = 0; c < b.values.size(); ++c) {
                    m[(b.first + a) * kv.n_basis() + b.first + c] += rule.weights[i] * b.values[a] * b.values[c];
                }
            }
        }
        return m;
    };
    const auto m3 = mass(3);
    const auto m8 = mass(8);
    for (std::size_t i = 0; i < m3.size(); ++i) {
        EXPECT_NEAR(m3[i], m8[i], 1e-15);
    }
}

TEST(Tabulate, MatchesPointwiseEvaluation) {
    const auto kv = make_open_knot_vector(3, 2, 1);
    const std::vector<double> pts{0.0, 0.2, 0.5, 0.9, 1.0};
    const auto t = tabulate(kv, pts);
    for (std::size_t q = 0; q < pts.size(); ++q) {
        const auto b = eval_basis(kv, pts[q]);
        EXPECT_EQ(t.first[q], b.first);
        for (int a = 0; a <= kv.degree(); ++a) {
            EXPECT_EQ(t.value(q, a), b.values[a]);
            EXPECT_EQ(t.derivative(q, a), b.derivatives[a]);
        }
    }
}
