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
#include <gtest/gtest.h>

#include "properties.hpp"

namespace pdistill::testing {
namespace {

constexpr std::uint64_t kSeed = 1234;

void expect_ok(const PropertyResult &r) {
    EXPECT_GE(r.cases, 100) << r.name;
    EXPECT_EQ(r.failures, 0) << r.name << " worst deviation " << r.worst;
}

TEST(Property, Unitarity) { expect_ok(unitarity(kSeed)); }
TEST(Property, InverseComposition) { expect_ok(inverse_composition(kSeed)); }
TEST(Property, PhotonNumberConservation) { expect_ok(photon_number_conservation(kSeed)); }
TEST(Property, ErrorLabelEquivariance) { expect_ok(label_equivariance(kSeed)); }
TEST(Property, PermanentOracle) { expect_ok(permanent_agreement(kSeed)); }
TEST(Property, ProbabilityCompleteness) { expect_ok(probability_completeness(kSeed)); }
TEST(Property, SourceLabelInvariance) { expect_ok(source_label_invariance(kSeed)); }
TEST(Property, SeedDeterminism) { expect_ok(seed_determinism(kSeed)); }

} // namespace
} // namespace pdistill::testing
