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
#include <map>
#include <random>
#include <stdexcept>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.hpp"

namespace pdistill {
namespace {

std::vector<SourceModel> models(double eps) {
    std::vector<SourceModel> m{SourceModel::all_same(eps), SourceModel::all_distinct(eps)};
    if (eps > 0.0) {
        m.push_back(SourceModel::uniform_modes(eps, 2));
        m.push_back(SourceModel::uniform_modes(eps, 5));
        m.push_back(SourceModel::explicit_modes({eps * 0.7, eps * 0.2, eps * 0.1}));
    }
    return m;
}

TEST(SourceModel, Validation) {
    EXPECT_THROW(SourceModel::all_same(1.0), std::invalid_argument);
    EXPECT_THROW(SourceModel::all_same(-0.1), std::invalid_argument);
    EXPECT_THROW(SourceModel(0.1, ExplicitErrorModes{{0.05}}), std::invalid_argument);
    EXPECT_THROW(SourceModel(0.1, ExplicitErrorModes{{0.1, 0.0}}), std::invalid_argument);
    EXPECT_THROW(SourceModel(0.0, ExplicitErrorModes{{}}), std::invalid_argument);
    EXPECT_THROW(SourceModel::uniform_modes(0.1, 0), std::invalid_argument);
    EXPECT_NEAR(SourceModel::explicit_modes({0.01, 0.02}).epsilon(), 0.03, 1e-15);
}

TEST(Enumerate, WeightsSumToOne) {
    for (double eps : {0.0, 0.01, 0.3, 0.9}) {
        for (const auto &m : models(eps)) {
            for (std::size_t n = 1; n <= 6; ++n) {
                double total = 0.0;
                for (const auto &c : enumerate_error_configurations(n, m)) {
                    total += c.weight;
                }
                EXPECT_NEAR(total, 1.0, 1e-12) << m.describe() << " n=" << n;
            }
        }
    }
}

TEST(Enumerate, LowOrderWeights) {
    const double eps = 0.07;
    for (const auto &m : models(eps)) {
        for (std::size_t n = 2; n <= 5; ++n) {
            std::map<std::size_t, double> single;
            double none = 0.0;
            for (const auto &c : enumerate_error_configurations(n, m)) {
                if (c.error_count() == 0) {
                    none += c.weight;
                } else if (c.error_count() == 1) {
                    for (std::size_t r = 0; r < n; ++r) {
                        if (c.modes[r] != 0) {
                            single[r] += c.weight;
                        }
                    }
                }
            }
            EXPECT_NEAR(none, std::pow(1 - eps, n), 1e-15);
            ASSERT_EQ(single.size(), n);
            for (const auto &[r, w] : single) {
                EXPECT_NEAR(w, eps * std::pow(1 - eps, n - 1), 1e-15);
            }
        }
    }
}

TEST(Enumerate, ExplicitModesAreCanonicalized) {
    const double eps = 0.2;
    const auto cfgs = enumerate_error_configurations(2, SourceModel::uniform_modes(eps, 2));
    std::map<std::vector<std::size_t>, double> w;
    for (const auto &c : cfgs) {
        w[c.modes] = c.weight;
    }
    EXPECT_NEAR((w[{1, 1}]), eps * eps / 2, 1e-15);
    EXPECT_NEAR((w[{1, 2}]), eps * eps / 2, 1e-15);
    EXPECT_EQ(w.count({2, 1}), 0U);
}

double collision_weight(std::size_t n, const SourceModel &m) {
    double w = 0.0;
    for (const auto &c : enumerate_error_configurations(n, m)) {
        std::map<std::size_t, int> seen;
        bool collision = false;
        for (auto k : c.modes) {
            collision = collision || (k != 0 && ++seen[k] > 1);
        }
        if (collision) {
            w += c.weight;
        }
    }
    return w;
}

TEST(Enumerate, CollisionWeightIsExtremal) {
    for (double eps : {0.05, 0.2, 0.4}) {
        const double same = collision_weight(3, SourceModel::all_same(eps));
        const double distinct = collision_weight(3, SourceModel::all_distinct(eps));
        EXPECT_EQ(distinct, 0.0);
        for (const auto &m : models(eps)) {
            const double c = collision_weight(3, m);
            EXPECT_LE(c, same + 1e-15);
            EXPECT_GE(c, distinct - 1e-15);
        }
    }
}

TEST(Enumerate, ZeroEpsilonIsSingleIdealBranch) {
    const auto ens = enumerate_inputs(3, SourceModel::all_same(0.0));
    ASSERT_EQ(ens.size(), 1U);
    EXPECT_EQ(ens.branches()[0].state.internal_extent(), 1U);
}

TEST(Sample, MatchesEnumeratedFrequencies) {
    const auto m = SourceModel::uniform_modes(0.3, 2);
    std::map<std::vector<std::size_t>, double> expected;
    for (const auto &c : enumerate_error_configurations(3, m)) {
        expected[c.modes] = c.weight;
    }
    std::mt19937_64 rng(42);
    const int shots = 200000;
    std::map<std::vector<std::size_t>, double> seen;
    for (int i = 0; i < shots; ++i) {
        seen[sample_error_configuration(3, m, rng).modes] += 1.0 / shots;
    }
    for (const auto &[modes, w] : expected) {
        EXPECT_NEAR(seen[modes], w, 5.0 * std::sqrt(w / shots) + 1e-9);
    }
}

TEST(Sample, DeterministicForSeed) {
    const auto m = SourceModel::all_distinct(0.4);
    std::mt19937_64 a(5);
    std::mt19937_64 b(5);
    for (int i = 0; i < 100; ++i) {
        const auto x = sample_input(4, m, a);
        const auto y = sample_input(4, m, b);
        EXPECT_EQ(x.weight, y.weight);
        EXPECT_EQ(x.state.terms(), y.state.terms());
    }
}

} // namespace
} // namespace pdistill
