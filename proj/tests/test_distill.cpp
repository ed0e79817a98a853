// Copyright 2026 The pdistill Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at

//     http://www.apache.org/licenses/LICENSE-2.0

// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.hpp"

namespace pdistill {
namespace {

const std::vector<double> kEpsGrid{0.01, 0.05, 0.1, 0.2, 0.3};

std::vector<SourceModel> bound_models(double eps) {
    return {SourceModel::all_same(eps), SourceModel::all_distinct(eps),
            SourceModel::uniform_modes(eps, 2), SourceModel::uniform_modes(eps, 5)};
}

CaseOutcome case3(std::vector<std::size_t> modes) { return analyze_configuration(distill3(), modes); }

TEST(Distill3, CaseTable) {
    const struct {
        std::vector<std::size_t> modes;
        double p;
        double ideal;
    } cases[] = {
        {{0, 0, 0}, 1.0 / 3, 1.0},     {{1, 0, 0}, 1.0 / 9, 2.0 / 3}, {{0, 1, 0}, 1.0 / 9, 2.0 / 3},
        {{0, 0, 1}, 1.0 / 9, 2.0 / 3}, {{1, 1, 0}, 1.0 / 9, 1.0 / 3}, {{0, 1, 1}, 1.0 / 9, 1.0 / 3},
        {{1, 2, 0}, 2.0 / 9, 1.0 / 3}, {{1, 0, 2}, 2.0 / 9, 1.0 / 3}, {{1, 1, 1}, 1.0 / 3, 0.0},
        {{1, 1, 2}, 1.0 / 9, 0.0},     {{1, 2, 1}, 1.0 / 9, 0.0},     {{1, 2, 3}, 2.0 / 9, 0.0},
    };
    for (const auto &c : cases) {
        const auto r = case3(c.modes);
        EXPECT_NEAR(r.p_success, c.p, 1e-10);
        EXPECT_NEAR(r.ideal_fraction, c.ideal, 1e-10);
    }
}

// Mixture oracle: weighted sum of per-configuration outcomes.
TEST(Distill3, AnalyzeEqualsCaseMixture) {
    for (const auto &m : bound_models(0.15)) {
        double p = 0.0;
        double good = 0.0;
        for (const auto &cfg : enumerate_error_configurations(3, m)) {
            const auto c = analyze_configuration(distill3(), cfg.modes);
            p += cfg.weight * c.p_success;
            good += cfg.weight * c.p_success * c.ideal_fraction;
        }
        const auto r = analyze(distill3(), m);
        EXPECT_NEAR(r.p_success, p, 1e-12);
        EXPECT_NEAR(r.epsilon_out, 1.0 - good / p, 1e-12);
    }
}

TEST(Distill3, BoundsSandwichExactResult) {
    for (double eps : kEpsGrid) {
        for (const auto &m : bound_models(eps)) {
            const auto r = analyze(distill3(), m);
            ASSERT_TRUE(r.bounds);
            EXPECT_TRUE(r.bounds->contains(r.epsilon_out, 1e-10)) << m.describe() << " " << eps;
            EXPECT_GE(r.p_success, n3_psuccess_lower(eps) - 1e-10);
            EXPECT_NEAR(r.expected_photons_per_output, 3.0 / r.p_success, 1e-9);
        }
    }
}

// The bounds follow from the case table with the extreme per-case probabilities.
TEST(Distill3, BoundsFromCaseTable) {
    for (double e : kEpsGrid) {
        const double f = 1 - e;
        const double p0 = f * f * f / 3;
        const double p1 = 3 * e * f * f / 9;
        const double up_good = p0 + p1 * 2 / 3 + 3 * e * e * f * (2.0 / 9) / 3;
        const double up_all = p0 + p1 + 3 * e * e * f * (2.0 / 9) + e * e * e / 3;
        const double lo_good = p0 + p1 * 2 / 3 + 3 * e * e * f * (1.0 / 9) / 3;
        const double lo_all = p0 + p1 + 3 * e * e * f / 9 + e * e * e / 9;
        EXPECT_NEAR(n3_error_upper(e), 1 - up_good / up_all, 1e-12);
        EXPECT_NEAR(n3_error_lower(e), 1 - lo_good / lo_all, 1e-12);
        // the closed-form P bound sits below the case-table minimum by (4/9)ε³
        EXPECT_NEAR(lo_all - n3_psuccess_lower(e), 4.0 / 9 * e * e * e, 1e-12);
    }
}

TEST(Distill3, AsymptoticSlope) {
    for (const auto &m : bound_models(1e-4)) {
        EXPECT_NEAR(analyze(distill3(), m).epsilon_out / 1e-4, 1.0 / 3, 1e-3);
    }
}

TEST(Distill4, CasesAndSlope) {
    const auto nc = distill4();
    const std::vector<std::size_t> ideal{0, 0, 0, 0};
    EXPECT_NEAR(analyze_configuration(nc, ideal).p_success, 0.25, 1e-10);
    for (std::size_t r = 0; r < 4; ++r) {
        std::vector<std::size_t> one(4, 0);
        one[r] = 1;
        const auto c = analyze_configuration(nc, one);
        EXPECT_NEAR(c.p_success, 1.0 / 16, 1e-10);
        EXPECT_NEAR(c.ideal_fraction, 0.75, 1e-10);
    }
    for (const auto &m : bound_models(1e-4)) {
        const auto rep = analyze(nc, m);
        EXPECT_NEAR(rep.epsilon_out / 1e-4, 0.25, 1e-3);
        EXPECT_FALSE(rep.bounds);
        EXPECT_GE(rep.p_success, n4_psuccess_lower(1e-4) - 1e-12);
    }
}

TEST(Analyze, PatternChecks) {
    EXPECT_THROW(analyze(distill3(), parse_pattern("1:1"), SourceModel::all_same(0.1)),
                 std::invalid_argument);
    const auto r = analyze(distill3(), parse_pattern("1:2,2:0"), SourceModel::all_same(0.1));
    EXPECT_FALSE(r.bounds);
}

double output_purity(const SourceModel &m) {
    const auto nc = distill3();
    const auto ps = postselect(run_circuit(enumerate_inputs(3, m), nc.circuit), nc.pattern);
    return purity(reduced_internal_density(ps.conditional, 0));
}

TEST(Analyze, PurityImproves) {
    for (double eps : {0.05, 0.1, 0.2, 0.3, 0.4, 0.42}) {
        const double in_purity = (1 - eps) * (1 - eps) + eps * eps;
        EXPECT_GE(output_purity(SourceModel::all_same(eps)), in_purity - 1e-12) << eps;
        if (eps <= 0.3) {
            for (const auto &m : {SourceModel::all_distinct(eps), SourceModel::uniform_modes(eps, 2),
                                  SourceModel::uniform_modes(eps, 5)}) {
                EXPECT_GE(output_purity(m), in_purity - 1e-12) << m.describe() << " " << eps;
            }
        }
    }
}

// Near break-even, distinct error modes spread the residual error over several
// orthogonal states: fidelity still improves while purity does not.
TEST(Analyze, PurityCanDropForDistinctErrorsNearBreakEven) {
    const double eps = 0.4;
    const auto m = SourceModel::all_distinct(eps);
    EXPECT_LT(output_purity(m), (1 - eps) * (1 - eps) + eps * eps);
    EXPECT_LT(analyze(distill3(), m).epsilon_out, eps);
}

TEST(Sb, SuccessProbability) {
    for (std::size_t n = 2; n <= 12; ++n) {
        // product over bunching steps m/2^m and the final n/2^n subtraction
        double p = n / std::pow(2.0, n);
        for (std::size_t m = 2; m <= n; ++m) {
            p *= m / std::pow(2.0, m);
        }
        EXPECT_NEAR(sb_success_prob(n) / p, 1.0, 1e-12);
        EXPECT_NEAR(sb_success_prob_closed_form(n) / p, 1.0, 1e-12);
    }
    EXPECT_NEAR(sb_success_prob(2), 0.25, 1e-15);
    EXPECT_THROW(sb_success_prob(1), std::invalid_argument);
    EXPECT_THROW(sb_error(4, 0.1), std::invalid_argument);
}

TEST(Sb, PhotonCounts) {
    const double expected[] = {8, 42.67, 341.33, 4369.07, 93206};
    for (std::size_t n = 2; n <= 6; ++n) {
        EXPECT_NEAR(sb_expected_photons(n) / expected[n - 2], 1.0, 5e-3);
    }
    EXPECT_NEAR(sb_expected_photons(3), 128.0 / 3, 1e-10);
}

TEST(Sb, TwelvePhotonProbability) {
    // 12²·11!/sqrt(2^(144+36−2)), evaluated by hand in logs.
    const double log10p = std::log10(144.0) + std::log10(39916800.0) - 89.0 * std::log10(2.0);
    EXPECT_NEAR(std::log10(sb_success_prob(12)), log10p, 1e-10);
    EXPECT_GT(sb_success_prob(12), 1e-18);
}

TEST(Sb, FitExponent) {
    std::vector<std::size_t> ns(11);
    std::iota(ns.begin(), ns.end(), 2);
    const auto fit = sb_fit_check(ns);
    EXPECT_GE(fit.alpha, 1.85);
    EXPECT_LE(fit.alpha, 2.05);
    EXPECT_GE(fit.c, 0.2);
    EXPECT_LE(fit.c, 0.4);
    const std::vector<std::size_t> few{2, 3};
    EXPECT_THROW(sb_fit_check(few), std::invalid_argument);
    const std::vector<std::size_t> big{2, 3, 13};
    EXPECT_THROW(sb_fit_check(big), std::invalid_argument);
}

TEST(Sb, SimulationMatchesClosedForms) {
    for (std::size_t n : {2U, 3U}) {
        EXPECT_NEAR(simulate_sb(n, SourceModel::all_same(0.0)).p_success, sb_success_prob(n), 1e-10);
        for (double eps : {0.05, 0.1}) {
            const auto best = simulate_sb(n, SourceModel::all_distinct(eps));
            EXPECT_NEAR(best.epsilon_out, sb_error(n, eps), 1e-10);
            const auto same = simulate_sb(n, SourceModel::all_same(eps));
            EXPECT_GT(same.epsilon_out, best.epsilon_out);
        }
    }
}

TEST(Sb, SeriesSlopeMatchesPresent3) {
    EXPECT_NEAR(sb_error(3, 1e-7) / 1e-7, 1.0 / 3, 1e-6);
    EXPECT_NEAR(n3_error_upper(1e-7) / 1e-7, 1.0 / 3, 1e-6);
    EXPECT_NEAR(sb_error(2, 1e-7) / 1e-7, 0.5, 1e-6);
}

TEST(BreakEven, RootAndClosedForm) {
    const double be = break_even();
    EXPECT_GE(be, 0.42);
    EXPECT_LE(be, 0.44);
    EXPECT_NEAR(n3_error_upper(be) - be, 0.0, 1e-9);
    // (ε/3)(1+2ε) = ε(1−2ε+3ε²−ε³) reduces to (ε−1)(3ε²−6ε+2) = 0.
    EXPECT_NEAR(be, 1.0 - 1.0 / std::sqrt(3.0), 1e-9);
    const double below = be - 0.01;
    EXPECT_LT(analyze(distill3(), SourceModel::all_same(below)).epsilon_out, below);
    EXPECT_LT(analyze(distill3(), SourceModel::all_distinct(below)).epsilon_out, below);
}

TEST(Crossover, Ranges) {
    const double n2 = crossover_sb(SbVariant::n2);
    EXPECT_GE(n2, 0.10);
    EXPECT_LE(n2, 0.20);
    EXPECT_NEAR(n3_error_upper(n2), sb_error(2, n2), 1e-9);
    const double n3 = crossover_sb(SbVariant::n3);
    EXPECT_GE(n3, 0.01);
    EXPECT_LE(n3, 0.06);
    for (double e = 1e-4; e < 0.03; e += 1e-4) {
        EXPECT_LT(std::abs(n3_error_upper(e) - sb_error(3, e)) / sb_error(3, e), 0.1);
    }
    EXPECT_GT(crossover_sb(SbVariant::n3, 0.2), n3);
}

TEST(Plan, SmallErrorLimits) {
    const double e = 1e-9;
    auto one = plan(e, e * 0.5, Scheme::present3());
    ASSERT_EQ(one.steps.size(), 1U);
    EXPECT_NEAR(one.total_expected_photons, 9.0, 1e-6);
    auto two = plan(e, e / 5, Scheme::present3());
    ASSERT_EQ(two.steps.size(), 2U);
    EXPECT_NEAR(two.total_expected_photons, 81.0, 1e-5);
    EXPECT_NEAR(two.steps.back().epsilon_after / e, 1.0 / 9, 1e-6);
    auto four = plan(e, e * 0.5, Scheme::present4());
    ASSERT_EQ(four.steps.size(), 1U);
    EXPECT_NEAR(four.total_expected_photons, 16.0, 1e-5);
}

TEST(Plan, CliExampleAndEdges) {
    const auto p = plan(1e-3, 1.5e-4, Scheme::present3());
    ASSERT_EQ(p.steps.size(), 2U);
    EXPECT_NEAR(p.total_expected_photons / 81.0, 1.0, 1e-2);
    EXPECT_GT(p.total_expected_photons, 81.0);
    EXPECT_TRUE(plan(0.1, 0.1, Scheme::present3()).steps.empty());
    EXPECT_EQ(plan(0.1, 0.1, Scheme::present3()).total_expected_photons, 1.0);
    try {
        plan(0.5, 0.01, Scheme::present3());
        FAIL() << "expected UnreachableTarget";
    } catch (const UnreachableTarget &u) {
        EXPECT_NEAR(u.break_even(), break_even(), 1e-12);
    }
    EXPECT_THROW(plan(0.1, 0.0, Scheme::present3()), std::invalid_argument);
    EXPECT_THROW(Scheme::sb(4), std::invalid_argument);
}

TEST(Plan, SbSchemes) {
    const auto p = plan(0.1, 0.01, Scheme::sb(2));
    EXPECT_FALSE(p.steps.empty());
    for (const auto &s : p.steps) {
        EXPECT_NEAR(s.cost_multiplier, 8.0, 1e-12);
    }
    EXPECT_EQ(scheme_break_even(Scheme::sb(2)), 1.0);
}

} // namespace
} // namespace pdistill
