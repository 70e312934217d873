#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "iga/verify.hpp"

using namespace iga;

namespace {

const double gamma_a = 2.0 / std::sqrt(14.0);

vec3 random_point(std::mt19937& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    return {u(rng), u(rng), u(rng)};
}

// curl of a point function by central differences
vec3 fd_curl(const std::function<vec3(const vec3&)>& f, const vec3& x, double h) {
    auto d = [&](int comp, int axis) {
        vec3 xp = x, xm = x;
        xp[axis] += h;
        xm[axis] -= h;
        return (f(xp)[comp] - f(xm)[comp]) / (2 * h);
    };
    return {d(2, 1) - d(1, 2), d(0, 2) - d(2, 0), d(1, 0) - d(0, 1)};
}

double max_coefficient(const em_state& s) {
    double m = 0.0;
    for (int c = 0; c < 3; ++c) m = std::max({m, s.E[c].max_abs(), s.H[c].max_abs()});
    return m;
}

} // namespace

TEST(Manufactured, PresetAtCenter) {
    const auto ms = manufactured_solution::preset_a();
    EXPECT_DOUBLE_EQ(manufactured_solution::gamma(), std::sqrt(4.0 / 14.0));
    const auto v = eval_manufactured(ms, {0.5, 0.5, 0.5}, 0.0);
    EXPECT_NEAR(v.E[0], gamma_a, 1e-15);
    EXPECT_NEAR(v.E[1], 2 * gamma_a, 1e-15);
    EXPECT_NEAR(v.E[2], 3 * gamma_a, 1e-15);
    for (double h : v.H) EXPECT_EQ(h, 0.0);
}

TEST(Manufactured, MagneticFieldVanishesAtTimeZero) {
    std::mt19937 rng{1};
    for (int f = 1; f <= 3; ++f) {
        const manufactured_solution ms{{{f, 2, 3, 1.0}}};
        for (int n = 0; n < 20; ++n) {
            const auto v = eval_manufactured(ms, random_point(rng), 0.0);
            for (double h : v.H) EXPECT_EQ(h, 0.0);
        }
    }
}

TEST(Manufactured, FamilyOneVanishesOnXTwoZero) {
    const manufactured_solution ms{{{1, 1, 1, 1.0}}};
    for (double t : {0.0, 0.3}) {
        const auto v = eval_manufactured(ms, {0.3, 0.0, 0.7}, t);
        for (int c = 0; c < 3; ++c) EXPECT_NEAR(v.E[c], 0.0, 1e-15);
        // H_3 carries cos(pi x2); H_1 and H_2 vanish with sin(pi x2)
        EXPECT_NEAR(v.H[0], 0.0, 1e-15);
        EXPECT_NEAR(v.H[1], 0.0, 1e-15);
    }
}

TEST(Manufactured, InvalidModesRejected) {
    EXPECT_THROW((manufactured_solution{{{4, 1, 1, 1.0}}}.validate()), parameter_error);
    EXPECT_THROW((manufactured_solution{{{1, 0, 1, 1.0}}}.validate()), parameter_error);
}

TEST(AnalyticCurl, MatchesFiniteDifferences) {
    std::mt19937 rng{2};
    std::uniform_real_distribution<double> ut(0.0, 1.0);
    const manufactured_solution ms{{{1, 1, 2, 0.7}, {2, 2, 1, -1.1}, {3, 1, 3, 0.4}, {1, 3, 1, 0.2}}};
    const double h = 1e-4;
    for (int n = 0; n < 100; ++n) {
        vec3 x = random_point(rng);
        for (auto& c : x) c = std::clamp(c, 2 * h, 1 - 2 * h);
        const double t = ut(rng);
        const auto exact = analytic_curl(ms, x, t);
        const auto ce = fd_curl([&](const vec3& y) { return eval_manufactured(ms, y, t).E; }, x, h);
        const auto ch = fd_curl([&](const vec3& y) { return eval_manufactured(ms, y, t).H; }, x, h);
        for (int c = 0; c < 3; ++c) {
            EXPECT_NEAR(exact.E[c], ce[c], 1e-6);
            EXPECT_NEAR(exact.H[c], ch[c], 1e-6);
        }
    }
}

TEST(AnalyticCurl, TimeDerivativeMatchesFiniteDifferences) {
    std::mt19937 rng{3};
    const auto ms = manufactured_solution::preset_a();
    const double h = 1e-5;
    for (int n = 0; n < 50; ++n) {
        const auto x = random_point(rng);
        const double t = 0.1 + 0.8 * (n / 50.0);
        const auto d = time_derivative(ms, x, t);
        const auto p = eval_manufactured(ms, x, t + h);
        const auto m = eval_manufactured(ms, x, t - h);
        for (int c = 0; c < 3; ++c) {
            EXPECT_NEAR(d.E[c], (p.E[c] - m.E[c]) / (2 * h), 1e-7);
            EXPECT_NEAR(d.H[c], (p.H[c] - m.H[c]) / (2 * h), 1e-7);
        }
    }
}

TEST(AnalyticCurl, CurlEEqualsMinusHtAtTimeZero) {
    std::mt19937 rng{4};
    const auto ms = manufactured_solution::preset_a();
    for (int n = 0; n < 50; ++n) {
        const auto x = random_point(rng);
        const auto curl = analytic_curl(ms, x, 0.0);
        const auto dt = time_derivative(ms, x, 0.0);
        for (int c = 0; c < 3; ++c) EXPECT_NEAR(curl.E[c], -dt.H[c], 1e-14);
    }
}

TEST(AnalyticCurl, EmptySolutionHasZeroCurl) {
    const manufactured_solution ms{};
    const auto v = analytic_curl(ms, {0.2, 0.4, 0.6}, 0.5);
    for (int c = 0; c < 3; ++c) {
        EXPECT_EQ(v.E[c], 0.0);
        EXPECT_EQ(v.H[c], 0.0);
    }
}

TEST(Manufactured, SatisfiesMaxwellEquations) {
    std::mt19937 rng{5};
    std::uniform_real_distribution<double> ut(0.0, 2.0);
    const manufactured_solution ms{{{1, 1, 1, gamma_a}, {2, 1, 1, 2 * gamma_a}, {3, 1, 1, 3 * gamma_a},
                                    {2, 2, 3, 0.5}, {3, -1, 2, 0.25}}};
    for (int n = 0; n < 200; ++n) {
        const auto x = random_point(rng);
        const double t = ut(rng);
        const auto curl = analytic_curl(ms, x, t);
        const auto dt = time_derivative(ms, x, t);
        for (int c = 0; c < 3; ++c) {
            EXPECT_LE(std::abs(dt.E[c] - curl.H[c]), 1e-10);
            EXPECT_LE(std::abs(dt.H[c] + curl.E[c]), 1e-10);
        }
    }
}

TEST(Manufactured, TangentialElectricFieldVanishesOnFaces) {
    std::mt19937 rng{6};
    const auto ms = manufactured_solution::preset_a();
    for (int n = 0; n < 100; ++n) {
        auto x = random_point(rng);
        const int axis = n % 3;
        x[axis] = (n / 3) % 2 == 0 ? 0.0 : 1.0;
        const auto v = eval_manufactured(ms, x, 0.37 * n / 100.0);
        for (int c = 0; c < 3; ++c) {
            if (c != axis) {
                EXPECT_LE(std::abs(v.E[c]), 1e-12) << "face " << axis << " component " << c;
            }
        }
    }
}

TEST(Normalization, PresetHasUnitL2Norm) {
    const auto ms = manufactured_solution::preset_a();
    const auto spaces = uniform_spaces(8, 2, 1);
    const double n = l2_norm(electric_at(ms, 0.0), spaces, 6);
    EXPECT_NEAR(n * n, 1.0, 1e-10);
    // closed form: (1/4 + 1 + 9/4) gamma^2
    EXPECT_NEAR((0.25 + 1.0 + 2.25) * gamma_a * gamma_a, 1.0, 1e-15);
}

TEST(Normalization, ZeroStateErrorIsSolutionNorm) {
    const auto ms = manufactured_solution::preset_a();
    const auto spaces = uniform_spaces(4, 2, 1);
    const error_evaluator ev{ms, spaces, 6};
    const auto zero = em_state::zero({6, 6, 6});
    const auto r = ev(zero);
    EXPECT_NEAR(r.l2_E, 1.0, 1e-10);
    EXPECT_EQ(r.l2_H, 0.0);
    // curl of the preset at t = 0: its L2 norm squared is w^2-weighted sum
    EXPECT_GT(r.hcurl_E, r.l2_E);
}

TEST(ErrorEvaluator, EmptySolutionAndZeroStateGiveZero) {
    const manufactured_solution ms{};
    const auto spaces = uniform_spaces(3, 2, 1);
    const error_evaluator ev{ms, spaces, 4};
    const auto r = ev(em_state::zero({5, 5, 5}));
    EXPECT_EQ(r.l2_E, 0.0);
    EXPECT_EQ(r.l2_H, 0.0);
    EXPECT_EQ(r.hcurl_E, 0.0);
    EXPECT_EQ(r.hcurl_H, 0.0);
}

TEST(ErrorEvaluator, MatchesPointwiseQuadrature) {
    const auto ms = manufactured_solution::preset_a();
    const auto spaces = uniform_spaces(4, 2, 1);
    const auto ops = assemble_operators(spaces, 0.1, scalar_material{});
    const double t = 0.3;
    const auto s0 = project_manufactured(ms, ops, 0.0);
    auto s = s0;
    s.t = t; // compare the t = 0 projection against the exact field at t
    const error_evaluator ev{ms, spaces, 5};
    const auto r = ev(s);
    // brute force: evaluate the spline through a one-point grid per quadrature point
    const auto grid = make_quadrature_grid(spaces, 5);
    const auto d = grid.dims();
    field3 vals{evaluate_on_grid(s.E[0], grid), evaluate_on_grid(s.E[1], grid), evaluate_on_grid(s.E[2], grid)};
    double sum = 0.0;
    for (int i = 0; i < d[0]; ++i)
        for (int j = 0; j < d[1]; ++j)
            for (int k = 0; k < d[2]; ++k) {
                const auto e = eval_manufactured(ms, {grid.tables[0].points[i], grid.tables[1].points[j],
                                                      grid.tables[2].points[k]},
                                                 t)
                                   .E;
                double q = 0.0;
                for (int c = 0; c < 3; ++c) q += (vals[c](i, j, k) - e[c]) * (vals[c](i, j, k) - e[c]);
                sum += grid.weights[0][i] * grid.weights[1][j] * grid.weights[2][k] * q;
            }
    EXPECT_NEAR(r.l2_E, std::sqrt(sum), 1e-12);
}

TEST(ErrorEvaluator, ProjectionErrorConvergesAtOrderPPlusOne) {
    const auto ms = manufactured_solution::preset_a();
    std::vector<double> h, e;
    for (int ne : {8, 16, 32}) {
        const auto spaces = uniform_spaces(ne, 2, 1);
        const auto ops = assemble_operators(spaces, 0.1, scalar_material{});
        const auto s = project_manufactured(ms, ops, 0.0);
        const error_evaluator ev{ms, spaces, 4};
        h.push_back(1.0 / ne);
        e.push_back(ev(s).l2_E);
    }
    EXPECT_NEAR(fit_slope(h, e), 3.0, 0.3);
}

TEST(ErrorEvaluator, SingleComponentProjectionConverges) {
    const auto f = [](const vec3& x) {
        return vec3{std::sin(std::numbers::pi * x[1]) * std::sin(std::numbers::pi * x[2]), 0.0, 0.0};
    };
    std::vector<double> h, e;
    for (int ne : {8, 16, 32}) {
        const auto spaces = uniform_spaces(ne, 2, 1);
        const auto ops = assemble_operators(spaces, 0.1, scalar_material{});
        const auto p = l2_project(f, ops);
        const error_evaluator ev{manufactured_solution{{{1, 1, 1, 1.0}}}, spaces, 4};
        em_state s = em_state::zero(ops.dims());
        s.E = p;
        h.push_back(1.0 / ne);
        e.push_back(ev(s).l2_E);
    }
    EXPECT_NEAR(fit_slope(h, e), 3.0, 0.3);
}

TEST(ErrorReport, NormDominanceAndSummaries) {
    const auto cfg = make_scheme_config(uniform_spaces(6, 2, 1), 0.1, 0.5);
    const auto rep = run_manufactured(cfg, manufactured_solution::preset_a());
    ASSERT_EQ(rep.rows.size(), 6u);
    for (std::size_t n = 0; n < rep.rows.size(); ++n) {
        const auto& r = rep.rows[n];
        EXPECT_EQ(r.step, static_cast<int>(n));
        EXPECT_NEAR(r.t, 0.1 * n, 1e-14);
        EXPECT_GE(r.hcurl_E, r.l2_E);
        EXPECT_GE(r.hcurl_H, r.l2_H);
    }
    const auto mx = rep.max_over_steps();
    const auto fin = rep.at_final();
    EXPECT_GE(mx.l2_E, fin.l2_E);
    EXPECT_EQ(fin.l2_H, rep.rows.back().l2_H);
    EXPECT_EQ(error_report{}.at_final().l2_E, 0.0);
}

TEST(Stability, DiscreteNormDoesNotGrowOverUnitTime) {
    const auto ms = manufactured_solution::preset_a();
    const auto cfg = make_scheme_config(uniform_spaces(16, 2, 1), 0.1, 1.0);
    const auto ops = assemble_operators(cfg);
    const error_evaluator zero_ref{manufactured_solution{}, cfg.spaces, 3};
    auto norm = [&](const em_state& s) {
        const auto r = zero_ref(s);
        return std::sqrt(r.l2_E * r.l2_E + r.l2_H * r.l2_H);
    };
    auto s = project_manufactured(ms, ops);
    const double n0 = norm(s);
    EXPECT_NEAR(n0, 1.0, 1e-3);
    for (int k = 0; k < cfg.n_steps; ++k) {
        s = step(s, ops);
        EXPECT_LE(norm(s), (1.0 + 1e-2) * n0) << "step " << k + 1;
    }
}

TEST(TimeAccuracy, MagneticErrorIsSecondOrder) {
    const auto ms = manufactured_solution::preset_a();
    std::vector<double> taus{0.05, 0.025}, errs;
    for (double tau : taus) {
        const auto cfg = make_scheme_config(uniform_spaces(12, 3, 2), tau, 0.2);
        errs.push_back(run_manufactured(cfg, ms).at_final().l2_H);
    }
    EXPECT_NEAR(std::log2(errs[0] / errs[1]), 2.0, 0.4);
}

TEST(DenseOracle, ZeroStateAndSizeGuard) {
    const auto small = make_scheme_config(uniform_spaces(2, 2, 1), 0.1, 0.1);
    const auto z = dense_oracle_step(small, em_state::zero(small.dims()));
    EXPECT_EQ(max_coefficient(z), 0.0);
    const auto big = make_scheme_config(uniform_spaces(12, 2, 1), 0.1, 0.1);
    EXPECT_THROW(dense_oracle_step(big, em_state::zero(big.dims())), size_guard_error);
}

TEST(DenseOracle, SingleModeOneStepAgrees) {
    for (auto mode : {boundary_mode::natural, boundary_mode::tangential_dirichlet}) {
        const auto cfg = make_scheme_config(uniform_spaces(2, 2, 1), 0.1, 0.1, scalar_material{}, mode);
        const auto ops = assemble_operators(cfg);
        const auto s = project_manufactured(manufactured_solution{{{2, 1, 1, 1.0}}}, ops);
        const auto a = step(s, ops);
        const auto b = dense_oracle_step(cfg, s);
        for (int c = 0; c < 3; ++c) {
            for (std::size_t n = 0; n < a.E[c].size(); ++n) {
                EXPECT_NEAR(a.E[c].data()[n], b.E[c].data()[n], 1e-12);
                EXPECT_NEAR(a.H[c].data()[n], b.H[c].data()[n], 1e-12);
            }
        }
    }
}

TEST(FitSlope, ExactPowerLaws) {
    EXPECT_NEAR(fit_slope({1, 2, 4}, {1, 4, 16}), 2.0, 1e-14);
    EXPECT_NEAR(fit_slope({0.1, 0.05}, {3e-3, 3.75e-4}), 3.0, 1e-12);
    EXPECT_THROW(fit_slope({1.0}, {1.0}), parameter_error);
    EXPECT_THROW(fit_slope({1.0, 2.0}, {0.0, 1.0}), parameter_error);
}

TEST(Convergence, SingleTauHasNoFit) {
    const auto base = make_scheme_config(uniform_spaces(4, 2, 1), 0.1, 0.2);
    const auto t = convergence_study(base, manufactured_solution::preset_a(), {0.1});
    ASSERT_EQ(t.rows.size(), 1u);
    EXPECT_TRUE(std::isnan(t.order_l2_E));
    EXPECT_THROW(convergence_study(base, manufactured_solution::preset_a(), {0.05, 0.1}), parameter_error);
}

TEST(Convergence, HalvingTauQuartersTheError) {
    const auto base = make_scheme_config(uniform_spaces(12, 3, 2), 0.05, 0.4);
    const auto t = convergence_study(base, manufactured_solution::preset_a(), {0.05, 0.025});
    ASSERT_EQ(t.rows.size(), 2u);
    EXPECT_EQ(t.rows[1].n_steps, 16);
    EXPECT_NEAR(t.order_l2_E, 2.0, 0.4);
    EXPECT_NEAR(t.order_l2_H, 2.0, 0.4);
}

TEST(Scaling, SingleSizeAndOrdering) {
    const auto one = scaling_study({4}, 2, 0.1, 1);
    ASSERT_EQ(one.size(), 1u);
    EXPECT_EQ(one[0].unknowns, 216);
    EXPECT_TRUE(std::isnan(one[0].ratio));
    EXPECT_THROW(scaling_study({8, 4}, 2, 0.1, 1), parameter_error);
}

TEST(Scaling, RepeatedRunsAgreeWithinNoiseBand) {
    const auto a = scaling_study({10}, 2, 0.1, 3, 3, {}, 0.05);
    const auto b = scaling_study({10}, 2, 0.1, 3, 3, {}, 0.05);
    const double r = a[0].seconds_per_step / b[0].seconds_per_step;
    EXPECT_GE(r, 0.5);
    EXPECT_LE(r, 2.0);
}
