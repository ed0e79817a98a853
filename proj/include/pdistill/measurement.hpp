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
/**
 * @file measurement.hpp
 * Mixed states as weighted pure-state ensembles, photon-number-resolving
 * post-selection with partial trace over the measured rails, and the internal
 * mode density matrix of a single output photon.
 */
#pragma once

#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "fock.hpp"

namespace pdistill {

/// Detection requirement: rail -> total photon count over internal modes.
struct DetectionPattern {
    std::map<std::size_t, unsigned> counts;

    [[nodiscard]] bool measures(std::size_t rail) const { return counts.count(rail) != 0; }

    bool operator==(const DetectionPattern &) const = default;
};

/// Parses "1:1,2:1" (rail:count pairs). The empty string is the empty pattern.
inline DetectionPattern parse_pattern(const std::string &text) {
    DetectionPattern p;
    std::istringstream in(text);
    for (std::string item; std::getline(in, item, ',');) {
        if (item.empty()) {
            continue;
        }
        const auto colon = item.find(':');
        if (colon == std::string::npos) {
            throw std::invalid_argument("pattern item '" + item + "' is not rail:count");
        }
        std::size_t used_r = 0;
        std::size_t used_c = 0;
        long rail = -1;
        long count = -1;
        try {
            rail = std::stol(item.substr(0, colon), &used_r);
            count = std::stol(item.substr(colon + 1), &used_c);
        } catch (const std::exception &) {
            throw std::invalid_argument("pattern item '" + item + "' is not rail:count");
        }
        if (used_r != colon || used_c != item.size() - colon - 1 || rail < 0 || count < 0) {
            throw std::invalid_argument("pattern item '" + item + "' is not rail:count");
        }
        if (!p.counts.emplace(static_cast<std::size_t>(rail), static_cast<unsigned>(count))
                 .second) {
            throw std::invalid_argument("pattern lists rail " + std::to_string(rail) + " twice");
        }
    }
    return p;
}

struct WeightedBranch {
    double weight = 0.0;
    FockState state;
};

/**
 * @brief Probability-weighted list of pure states.
 *
 * Weights either sum to 1 (a normalized mixture) or to the probability of
 * having reached this ensemble (a raw, post-selected one).
 */
class WeightedEnsemble {
  public:
    WeightedEnsemble() = default;

    static WeightedEnsemble pure(FockState state) {
        WeightedEnsemble e;
        e.add(1.0, std::move(state));
        return e;
    }

    /// Zero weights are dropped; negative ones are rejected.
    void add(double weight, FockState state) {
        if (!(weight >= 0.0) || !std::isfinite(weight)) {
            throw std::invalid_argument("WeightedEnsemble: weight must be finite and >= 0");
        }
        if (weight > 0.0) {
            branches_.push_back({weight, std::move(state)});
        }
    }

    [[nodiscard]] const std::vector<WeightedBranch> &branches() const { return branches_; }
    [[nodiscard]] std::size_t size() const { return branches_.size(); }
    [[nodiscard]] bool empty() const { return branches_.empty(); }

    [[nodiscard]] double total_weight() const {
        double s = 0.0;
        for (const auto &b : branches_) {
            s += b.weight;
        }
        return s;
    }

    [[nodiscard]] WeightedEnsemble normalized() const {
        const double t = total_weight();
        if (t <= 0.0) {
            throw std::domain_error("WeightedEnsemble: cannot normalize an empty ensemble");
        }
        WeightedEnsemble out;
        for (const auto &b : branches_) {
            out.add(b.weight / t, b.state);
        }
        return out;
    }

  private:
    std::vector<WeightedBranch> branches_;
};

struct PostSelectionResult {
    /// Total weight matching the pattern (absolute, not divided by the input weight).
    double probability = 0.0;
    /// Normalized conditional mixture; measured rails keep their indices but hold no photons.
    WeightedEnsemble conditional;
};

namespace detail {

/// Splits every term of `state` into (measured part, rest) and groups by the measured part.
inline std::map<OccupationConfig, FockState> split_by_measured(const FockState &state,
                                                                const DetectionPattern &pattern) {
    std::map<OccupationConfig, FockState> groups;
    for (const auto &[config, amp] : state.terms()) {
        auto measured = config.filtered([&](std::size_t r) { return pattern.measures(r); });
        auto rest = config.filtered([&](std::size_t r) { return !pattern.measures(r); });
        auto [it, inserted] = groups.try_emplace(std::move(measured), state.num_rails());
        it->second.add(rest, amp);
    }
    return groups;
}

inline bool matches(const OccupationConfig &measured, const DetectionPattern &pattern) {
    for (const auto &[rail, n] : pattern.counts) {
        if (measured.rail_total(rail) != n) {
            return false;
        }
    }
    return true;
}

inline constexpr double kNegligibleNorm = 1e-28;

} // namespace detail

/**
 * @brief Heralds on `pattern` with internal-mode-blind number-resolving detectors.
 *
 * Each internal-mode-resolved outcome on the measured rails that is consistent
 * with the pattern becomes its own conditional branch: coherence between
 * distinct resolved outcomes is lost, coherence within one is kept exactly.
 * A pattern asking for more photons than present yields probability 0.
 */
inline PostSelectionResult postselect(const WeightedEnsemble &input,
                                      const DetectionPattern &pattern) {
    if (input.empty()) {
        throw std::invalid_argument("postselect: empty ensemble");
    }
    PostSelectionResult result;
    std::vector<WeightedBranch> raw;
    for (const auto &branch : input.branches()) {
        for (const auto &[rail, n] : pattern.counts) {
            if (rail >= branch.state.num_rails()) {
                throw std::out_of_range("postselect: pattern rail " + std::to_string(rail) +
                                        " outside " + std::to_string(branch.state.num_rails()) +
                                        "-rail state");
            }
        }
        for (auto &[measured, rest] : detail::split_by_measured(branch.state, pattern)) {
            if (!detail::matches(measured, pattern)) {
                continue;
            }
            const double n2 = rest.norm_squared();
            const double w = branch.weight * n2;
            result.probability += w;
            if (n2 > detail::kNegligibleNorm) {
                raw.push_back({w, rest.scaled(1.0 / std::sqrt(n2))});
            }
        }
    }
    if (result.probability > 0.0) {
        for (auto &b : raw) {
            result.conditional.add(b.weight / result.probability, std::move(b.state));
        }
    }
    return result;
}

inline PostSelectionResult postselect(const FockState &state, const DetectionPattern &pattern) {
    return postselect(WeightedEnsemble::pure(state), pattern);
}

/// The single rail left unmeasured by `pattern`; throws unless there is exactly one.
inline std::size_t unmeasured_rail(std::size_t num_rails, const DetectionPattern &pattern) {
    std::optional<std::size_t> rail;
    for (std::size_t r = 0; r < num_rails; ++r) {
        if (!pattern.measures(r)) {
            if (rail) {
                throw std::invalid_argument("pattern leaves more than one rail unmeasured");
            }
            rail = r;
        }
    }
    if (!rail) {
        throw std::invalid_argument("pattern leaves no output rail");
    }
    return *rail;
}

using DensityMatrix = Eigen::MatrixXcd;

/**
 * @brief Internal-mode density matrix of the single photon on `rail`, traced
 * over everything else. Every branch must hold exactly one photon there.
 */
inline DensityMatrix reduced_internal_density(const WeightedEnsemble &ens, std::size_t rail) {
    if (ens.empty()) {
        throw std::invalid_argument("reduced_internal_density: empty ensemble");
    }
    std::size_t dim = 1;
    for (const auto &b : ens.branches()) {
        dim = std::max(dim, b.state.internal_extent());
    }
    DensityMatrix rho = DensityMatrix::Zero(static_cast<Eigen::Index>(dim),
                                            static_cast<Eigen::Index>(dim));
    double total = 0.0;
    for (const auto &b : ens.branches()) {
        const double n2 = b.state.norm_squared();
        if (n2 <= 0.0) {
            continue;
        }
        std::map<OccupationConfig, Eigen::VectorXcd> by_rest;
        for (const auto &[config, amp] : b.state.terms()) {
            if (config.rail_total(rail) != 1) {
                throw std::invalid_argument("reduced_internal_density: branch has " +
                                            std::to_string(config.rail_total(rail)) +
                                            " photons on rail " + std::to_string(rail));
            }
            std::size_t internal = 0;
            for (const auto &[mode, n] : config.entries()) {
                if (mode.rail == rail) {
                    internal = mode.internal;
                }
            }
            auto rest = config.filtered([rail](std::size_t r) { return r != rail; });
            auto [it, inserted] = by_rest.try_emplace(
                std::move(rest), Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(dim)));
            it->second(static_cast<Eigen::Index>(internal)) += amp;
        }
        for (const auto &[rest, v] : by_rest) {
            rho += (b.weight / n2) * (v * v.adjoint());
        }
        total += b.weight;
    }
    if (total <= 0.0) {
        throw std::invalid_argument("reduced_internal_density: zero total weight");
    }
    return rho / total;
}

/// tr(ρ²).
inline double purity(const DensityMatrix &dm) { return (dm * dm).trace().real(); }

/// ⟨ψ0|ρ|ψ0⟩ for the photon on `rail`, i.e. 1 − ε′.
inline double fidelity_to_ideal(const WeightedEnsemble &ens, std::size_t rail) {
    return reduced_internal_density(ens, rail)(0, 0).real();
}

} // namespace pdistill
