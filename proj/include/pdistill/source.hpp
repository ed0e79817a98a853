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
 * @file source.hpp
 * Dephased single-photon source: ideal mode with probability 1 − ε, otherwise
 * an orthogonal error mode drawn from a distribution {p_i}. Inputs of n
 * photons are enumerated exactly to all orders in ε, or sampled.
 */
#pragma once

#include <cmath>
#include <cstddef>
#include <map>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "fock.hpp"
#include "measurement.hpp"

namespace pdistill {

/// Every error lands in the same error mode.
struct AllSameErrorMode {};
/// Every error event populates a fresh error mode.
struct AllDistinctErrorModes {};
/// Error mode i (1-based) with probability p[i-1]; sum(p) = ε.
struct ExplicitErrorModes {
    std::vector<double> p;
};

using ErrorDistribution =
    std::variant<AllSameErrorMode, AllDistinctErrorModes, ExplicitErrorModes>;

class SourceModel {
  public:
    SourceModel(double epsilon, ErrorDistribution distribution)
        : epsilon_(epsilon), distribution_(std::move(distribution)) {
        validate();
    }

    static SourceModel all_same(double epsilon) { return {epsilon, AllSameErrorMode{}}; }
    static SourceModel all_distinct(double epsilon) { return {epsilon, AllDistinctErrorModes{}}; }
    /// ε is the sum of the weights.
    static SourceModel explicit_modes(std::vector<double> p) {
        const double eps = std::accumulate(p.begin(), p.end(), 0.0);
        return {eps, ExplicitErrorModes{std::move(p)}};
    }
    /// ε split evenly over `modes` error modes.
    static SourceModel uniform_modes(double epsilon, std::size_t modes) {
        if (modes == 0) {
            throw std::invalid_argument("SourceModel: need at least one error mode");
        }
        return {epsilon, ExplicitErrorModes{std::vector<double>(modes, epsilon / modes)}};
    }

    [[nodiscard]] double epsilon() const { return epsilon_; }
    [[nodiscard]] const ErrorDistribution &distribution() const { return distribution_; }

    [[nodiscard]] std::string describe() const {
        if (std::holds_alternative<AllSameErrorMode>(distribution_)) {
            return "allsame";
        }
        if (std::holds_alternative<AllDistinctErrorModes>(distribution_)) {
            return "alldistinct";
        }
        return "explicit(" + std::to_string(std::get<ExplicitErrorModes>(distribution_).p.size()) +
               " modes)";
    }

  private:
    void validate() const {
        if (!(epsilon_ >= 0.0 && epsilon_ < 1.0)) {
            throw std::invalid_argument("SourceModel: epsilon must lie in [0, 1)");
        }
        if (const auto *ex = std::get_if<ExplicitErrorModes>(&distribution_)) {
            if (ex->p.empty()) {
                throw std::invalid_argument("SourceModel: explicit distribution is empty");
            }
            double s = 0.0;
            for (double pi : ex->p) {
                if (!(pi > 0.0)) {
                    throw std::invalid_argument("SourceModel: explicit weights must be > 0");
                }
                s += pi;
            }
            if (std::abs(s - epsilon_) > 1e-12) {
                throw std::invalid_argument("SourceModel: explicit weights must sum to epsilon");
            }
        }
    }

    double epsilon_;
    ErrorDistribution distribution_;
};

/// Internal mode per rail (0 = ideal) and the probability of that assignment.
struct ErrorConfiguration {
    std::vector<std::size_t> modes;
    double weight = 0.0;

    [[nodiscard]] std::size_t error_count() const {
        std::size_t k = 0;
        for (auto m : modes) {
            k += m != 0 ? 1 : 0;
        }
        return k;
    }
};

namespace detail {

/// Relabels error modes 1, 2, ... in order of first appearance.
inline std::vector<std::size_t> canonical_labels(const std::vector<std::size_t> &modes) {
    std::map<std::size_t, std::size_t> relabel;
    std::vector<std::size_t> out;
    out.reserve(modes.size());
    for (auto m : modes) {
        if (m == 0) {
            out.push_back(0);
            continue;
        }
        auto [it, inserted] = relabel.try_emplace(m, relabel.size() + 1);
        out.push_back(it->second);
    }
    return out;
}

inline constexpr std::size_t kMaxEnumeratedConfigurations = 1U << 22;

} // namespace detail

/**
 * @brief All per-rail error assignments for n i.i.d. photons, with weights.
 *
 * AllSame uses mode 1 for every error, AllDistinct gives rail k's error mode
 * k + 1, and Explicit draws each error's mode from p_i/ε independently, then
 * merges assignments that differ only by a relabeling of error modes.
 * Zero-weight assignments are omitted.
 */
inline std::vector<ErrorConfiguration> enumerate_error_configurations(std::size_t n,
                                                                      const SourceModel &model) {
    if (n < 1) {
        throw std::invalid_argument("enumerate_error_configurations: n must be >= 1");
    }
    const double eps = model.epsilon();

    // Per-rail options: (label, probability). Label 0 = ideal.
    std::vector<std::pair<std::size_t, double>> options{{0, 1.0 - eps}};
    const auto *ex = std::get_if<ExplicitErrorModes>(&model.distribution());
    if (ex != nullptr) {
        for (std::size_t i = 0; i < ex->p.size(); ++i) {
            options.emplace_back(i + 1, ex->p[i]);
        }
    } else {
        options.emplace_back(1, eps);
    }
    const bool distinct = std::holds_alternative<AllDistinctErrorModes>(model.distribution());

    double space = 1.0;
    for (std::size_t k = 0; k < n; ++k) {
        space *= static_cast<double>(options.size());
    }
    if (space > static_cast<double>(detail::kMaxEnumeratedConfigurations)) {
        throw std::invalid_argument("enumerate_error_configurations: too many configurations");
    }

    std::map<std::vector<std::size_t>, double> merged;
    std::vector<std::size_t> digits(n, 0);
    do {
        std::vector<std::size_t> modes(n);
        double w = 1.0;
        for (std::size_t r = 0; r < n; ++r) {
            const auto [label, p] = options[digits[r]];
            w *= p;
            modes[r] = label == 0 ? 0 : (distinct ? r + 1 : label);
        }
        if (w > 0.0) {
            merged[ex != nullptr ? detail::canonical_labels(modes) : modes] += w;
        }
    } while (detail::next_digits(digits, options.size()));

    std::vector<ErrorConfiguration> out;
    out.reserve(merged.size());
    for (auto &[modes, w] : merged) {
        out.push_back({modes, w});
    }
    return out;
}

/// Mixed n-photon input, one product-state branch per error configuration.
inline WeightedEnsemble enumerate_inputs(std::size_t n, const SourceModel &model) {
    WeightedEnsemble ens;
    for (const auto &cfg : enumerate_error_configurations(n, model)) {
        ens.add(cfg.weight, product_state(cfg.modes));
    }
    return ens;
}

/// Draws one error configuration; its weight is the probability of what was drawn.
template <class Rng>
ErrorConfiguration sample_error_configuration(std::size_t n, const SourceModel &model, Rng &rng) {
    if (n < 1) {
        throw std::invalid_argument("sample_error_configuration: n must be >= 1");
    }
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double eps = model.epsilon();
    const auto *ex = std::get_if<ExplicitErrorModes>(&model.distribution());
    const bool distinct = std::holds_alternative<AllDistinctErrorModes>(model.distribution());

    ErrorConfiguration cfg{std::vector<std::size_t>(n, 0), 1.0};
    for (std::size_t r = 0; r < n; ++r) {
        double u = unit(rng);
        if (u < 1.0 - eps) {
            cfg.weight *= 1.0 - eps;
            continue;
        }
        if (ex == nullptr) {
            cfg.modes[r] = distinct ? r + 1 : 1;
            cfg.weight *= eps;
            continue;
        }
        u -= 1.0 - eps;
        std::size_t i = 0;
        while (i + 1 < ex->p.size() && u >= ex->p[i]) {
            u -= ex->p[i];
            ++i;
        }
        cfg.modes[r] = i + 1;
        cfg.weight *= ex->p[i];
    }
    if (ex != nullptr) {
        cfg.modes = detail::canonical_labels(cfg.modes);
    }
    return cfg;
}

/// Monte Carlo counterpart of enumerate_inputs.
template <class Rng>
WeightedBranch sample_input(std::size_t n, const SourceModel &model, Rng &rng) {
    auto cfg = sample_error_configuration(n, model, rng);
    return {cfg.weight, product_state(cfg.modes)};
}

} // namespace pdistill
