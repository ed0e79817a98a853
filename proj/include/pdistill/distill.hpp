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
 * @file distill.hpp
 * Protocol-level analysis: exact post-selected error and success probability,
 * closed-form bounds for the three-photon distiller, the HOM-filtering
 * (bunch-then-subtract) comparison protocol, break-even and crossover points,
 * and an iterated-distillation resource planner.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "circuits.hpp"
#include "fock.hpp"
#include "measurement.hpp"
#include "numeric.hpp"
#include "source.hpp"

namespace pdistill {

namespace detail {

inline void check_epsilon(double eps, const char *who) {
    if (!(eps >= 0.0 && eps < 1.0)) {
        throw std::invalid_argument(std::string(who) + ": epsilon must lie in [0, 1)");
    }
}

} // namespace detail

// --- three-photon closed forms -------------------------------------------

/// Worst-case output error of the three-photon distiller.
inline double n3_error_upper(double eps) {
    detail::check_epsilon(eps, "n3_error_upper");
    return eps / 3.0 * (1.0 + 2.0 * eps) / (1.0 - 2.0 * eps + 3.0 * eps * eps - eps * eps * eps);
}

/// Best-case output error of the three-photon distiller.
inline double n3_error_lower(double eps) {
    detail::check_epsilon(eps, "n3_error_lower");
    return eps / (3.0 - 6.0 * eps + 6.0 * eps * eps - 2.0 * eps * eps * eps);
}

/// Lower bound on the three-photon heralding probability.
inline double n3_psuccess_lower(double eps) {
    detail::check_epsilon(eps, "n3_psuccess_lower");
    return (1.0 - 2.0 * eps + 2.0 * eps * eps - 2.0 * eps * eps * eps) / 3.0;
}

/// Lower bound on the four-photon heralding probability, (1/4)(1 − ε)³.
inline double n4_psuccess_lower(double eps) {
    detail::check_epsilon(eps, "n4_psuccess_lower");
    return 0.25 * std::pow(1.0 - eps, 3);
}

// --- exact analysis -------------------------------------------------------

struct BoundInterval {
    double lower = 0.0;
    double upper = 0.0;

    [[nodiscard]] bool contains(double x, double tolerance = 0.0) const {
        return x >= lower - tolerance && x <= upper + tolerance;
    }
};

struct DistillationReport {
    std::string circuit;
    std::string model;
    double epsilon_in = 0.0;
    double p_success = 0.0;
    double epsilon_out = 0.0;
    /// Closed-form interval, available for the three-photon distiller only.
    std::optional<BoundInterval> bounds;
    double expected_photons_per_output = 0.0;
};

/// Heralding probability and ideal fraction for one definite input assignment.
struct CaseOutcome {
    double p_success = 0.0;
    double ideal_fraction = 0.0;
};

inline CaseOutcome analyze_configuration(const NamedCircuit &nc,
                                         std::span<const std::size_t> internal_modes,
                                         const DetectionPattern &pattern) {
    const std::size_t out = unmeasured_rail(nc.circuit.num_rails, pattern);
    const auto ps = postselect(run_circuit(product_state(internal_modes), nc.circuit), pattern);
    CaseOutcome c{ps.probability, 0.0};
    if (ps.probability > 0.0) {
        c.ideal_fraction = fidelity_to_ideal(ps.conditional, out);
    }
    return c;
}

inline CaseOutcome analyze_configuration(const NamedCircuit &nc,
                                         std::span<const std::size_t> internal_modes) {
    return analyze_configuration(nc, internal_modes, nc.pattern);
}

/**
 * @brief Exact ε′ and heralding probability: enumerate every source error
 * configuration, run it through the circuit, post-select, and read off the
 * fidelity of the output photon.
 */
inline DistillationReport analyze(const NamedCircuit &nc, const DetectionPattern &pattern,
                                  const SourceModel &model) {
    const std::size_t out = unmeasured_rail(nc.circuit.num_rails, pattern);
    if (nc.photons != nc.circuit.num_rails) {
        throw std::invalid_argument("analyze: circuit must take one photon per rail");
    }
    const auto input = enumerate_inputs(nc.photons, model);
    const auto ps = postselect(run_circuit(input, nc.circuit), pattern);

    DistillationReport r;
    r.circuit = nc.name;
    r.model = model.describe();
    r.epsilon_in = model.epsilon();
    r.p_success = ps.probability;
    if (ps.probability > 0.0) {
        r.epsilon_out = 1.0 - fidelity_to_ideal(ps.conditional, out);
        r.expected_photons_per_output = static_cast<double>(nc.photons) / ps.probability;
    } else {
        r.epsilon_out = std::numeric_limits<double>::quiet_NaN();
        r.expected_photons_per_output = std::numeric_limits<double>::infinity();
    }
    if (nc.name == "distill3" && pattern == distill3().pattern) {
        r.bounds = BoundInterval{n3_error_lower(r.epsilon_in), n3_error_upper(r.epsilon_in)};
    }
    return r;
}

inline DistillationReport analyze(const NamedCircuit &nc, const SourceModel &model) {
    return analyze(nc, nc.pattern, model);
}

// --- HOM filtering (bunch, then subtract) --------------------------------

/// Zero-error heralding probability of n-photon HOM filtering, as a running product.
inline double sb_success_prob(std::size_t n) {
    if (n < 2) {
        throw std::invalid_argument("sb_success_prob: n must be >= 2");
    }
    // subtraction step n/2^n times the bunching steps m/2^m, m = 2..n
    double p = std::ldexp(static_cast<double>(n), -static_cast<int>(n));
    for (std::size_t m = 2; m <= n; ++m) {
        p *= std::ldexp(static_cast<double>(m), -static_cast<int>(m));
    }
    return p;
}

/// Same quantity from the closed form n²(n−1)!/sqrt(2^{n²+3n−2}).
inline double sb_success_prob_closed_form(std::size_t n) {
    if (n < 2) {
        throw std::invalid_argument("sb_success_prob_closed_form: n must be >= 2");
    }
    const double nn = static_cast<double>(n);
    return nn * nn * std::tgamma(nn) / std::sqrt(std::ldexp(1.0, static_cast<int>(n * n + 3 * n - 2)));
}

inline double sb_expected_photons(std::size_t n) {
    return static_cast<double>(n) / sb_success_prob(n);
}

/// Best-case HOM-filtering output error for n = 2 or 3.
inline double sb_error(std::size_t n, double eps) {
    detail::check_epsilon(eps, "sb_error");
    if (n == 2) {
        return eps / (2.0 - 2.0 * eps + eps * eps);
    }
    if (n == 3) {
        const double e2 = eps * eps;
        const double e3 = e2 * eps;
        return (2.0 * eps - 2.0 * e2 + e3) / (6.0 - 12.0 * eps + 9.0 * e2 - 2.0 * e3);
    }
    throw std::invalid_argument("sb_error: closed form available for n = 2, 3 only");
}

struct SbFit {
    double c = 0.0;
    double alpha = 0.0;
    double r2 = 0.0;
};

/// Fits P ≈ exp(−c·n^α) by least squares of log(−log P) against log n.
inline SbFit sb_fit_check(std::span<const std::size_t> ns) {
    if (ns.size() < 3) {
        throw std::invalid_argument("sb_fit_check: need at least 3 points");
    }
    std::vector<double> xs;
    std::vector<double> ys;
    for (auto n : ns) {
        if (n < 2 || n > 12) {
            throw std::invalid_argument("sb_fit_check: n must lie in [2, 12]");
        }
        xs.push_back(std::log(static_cast<double>(n)));
        ys.push_back(std::log(-std::log(sb_success_prob(n))));
    }
    const auto fit = linear_fit(xs, ys);
    return {std::exp(fit.intercept), fit.slope, fit.r2};
}

struct SbSimulation {
    double p_success = 0.0;
    double epsilon_out = 0.0;
};

/**
 * @brief Exact simulation of n-photon HOM filtering on two rails.
 *
 * Rail 0 accumulates photons: each fresh photon enters rail 1, a 50:50
 * splitter acts, and rail 1 must be found empty. After n − 1 bunching steps a
 * final 50:50 splitter with rail 1 heralded on n − 1 photons leaves one photon
 * on rail 0.
 */
inline SbSimulation simulate_sb(std::size_t n, const SourceModel &model) {
    if (n < 2) {
        throw std::invalid_argument("simulate_sb: n must be >= 2");
    }
    const Circuit step = sb_step_circuit(1);
    const DetectionPattern bunched{{{1, 0U}}};
    const DetectionPattern subtracted{{{1, static_cast<unsigned>(n - 1)}}};

    double p_total = 0.0;
    double p_ideal = 0.0;
    for (const auto &cfg : enumerate_error_configurations(n, model)) {
        auto ens = WeightedEnsemble::pure(single_photon_state(0, cfg.modes[0], 2));
        double p = 1.0;
        for (std::size_t m = 1; m < n && p > 0.0; ++m) {
            WeightedEnsemble fed;
            for (const auto &b : ens.branches()) {
                fed.add(b.weight, tensor(b.state, single_photon_state(0, cfg.modes[m], 1), 1));
            }
            auto ps = postselect(run_circuit(fed, step), bunched);
            p *= ps.probability;
            ens = std::move(ps.conditional);
        }
        if (p > 0.0) {
            auto ps = postselect(run_circuit(ens, step), subtracted);
            p *= ps.probability;
            if (p > 0.0) {
                p_ideal += cfg.weight * p * fidelity_to_ideal(ps.conditional, 0);
            }
        }
        p_total += cfg.weight * p;
    }
    SbSimulation s{p_total, std::numeric_limits<double>::quiet_NaN()};
    if (p_total > 0.0) {
        s.epsilon_out = 1.0 - p_ideal / p_total;
    }
    return s;
}

// --- break-even and crossovers -------------------------------------------

inline constexpr double kRootBracketLow = 1e-6;
inline constexpr double kRootBracketHigh = 0.99;
inline constexpr double kRootTolerance = 1e-10;

/// ε at which the worst-case three-photon map stops reducing the error.
inline double break_even() {
    return bisect([](double e) { return n3_error_upper(e) - e; }, kRootBracketLow,
                  kRootBracketHigh, kRootTolerance);
}

enum class SbVariant { n2, n3 };

/**
 * @brief n2: ε where the worst-case three-photon error equals the n = 2
 * filtering error. n3: smallest ε at which the two differ by `closeness`
 * relative to the filtering error; below it they are considered converged.
 */
inline double crossover_sb(SbVariant which, double closeness = 0.1) {
    const auto f = [which, closeness](double e) {
        if (which == SbVariant::n2) {
            return n3_error_upper(e) - sb_error(2, e);
        }
        const double sb = sb_error(3, e);
        return std::abs(n3_error_upper(e) - sb) / sb - closeness;
    };
    const auto bracket = first_sign_change(f, kRootBracketLow, kRootBracketHigh, 2000);
    if (!bracket) {
        throw std::domain_error("crossover_sb: no crossing in the search range");
    }
    return bisect(f, bracket->first, bracket->second, kRootTolerance);
}

// --- planner --------------------------------------------------------------

enum class SchemeKind { present3, present4, sb };

struct Scheme {
    SchemeKind kind = SchemeKind::present3;
    std::size_t n = 3;

    static Scheme present3() { return {SchemeKind::present3, 3}; }
    static Scheme present4() { return {SchemeKind::present4, 4}; }
    static Scheme sb(std::size_t n) {
        if (n != 2 && n != 3) {
            throw std::invalid_argument("Scheme::sb: n must be 2 or 3");
        }
        return {SchemeKind::sb, n};
    }

    [[nodiscard]] std::string name() const {
        switch (kind) {
        case SchemeKind::present3:
            return "present3";
        case SchemeKind::present4:
            return "present4";
        case SchemeKind::sb:
            return "sb" + std::to_string(n);
        }
        return "?";
    }
};

/// Worst-case ε′ used for planning.
inline double scheme_error_map(const Scheme &s, double eps) {
    switch (s.kind) {
    case SchemeKind::present3:
        return n3_error_upper(eps);
    case SchemeKind::present4: {
        // no closed-form bound beyond first order; take the worse of the two extreme models
        const auto same = analyze(distill4(), SourceModel::all_same(eps));
        const auto distinct = analyze(distill4(), SourceModel::all_distinct(eps));
        return std::max(same.epsilon_out, distinct.epsilon_out);
    }
    case SchemeKind::sb:
        return sb_error(s.n, eps);
    }
    return eps;
}

/// Heralding probability used for photon accounting.
inline double scheme_success_prob(const Scheme &s, double eps) {
    switch (s.kind) {
    case SchemeKind::present3:
        return n3_psuccess_lower(eps);
    case SchemeKind::present4:
        return n4_psuccess_lower(eps);
    case SchemeKind::sb:
        detail::check_epsilon(eps, "scheme_success_prob");
        return sb_success_prob(s.n);
    }
    return 0.0;
}

/// ε above which the scheme no longer reduces the error; 1 if it always does on [1e-6, 0.99].
inline double scheme_break_even(const Scheme &s) {
    if (s.kind == SchemeKind::present3) {
        return break_even();
    }
    const auto f = [&s](double e) { return scheme_error_map(s, e) - e; };
    const auto bracket = first_sign_change(f, kRootBracketLow, kRootBracketHigh, 100);
    if (!bracket) {
        return 1.0;
    }
    return bisect(f, bracket->first, bracket->second, kRootTolerance);
}

struct PlanStep {
    std::size_t round = 0;
    double epsilon_before = 0.0;
    double epsilon_after = 0.0;
    double p_success = 0.0;
    /// Input photons consumed per output photon of this round (n / p_success).
    double cost_multiplier = 0.0;
};

struct Plan {
    std::vector<PlanStep> steps;
    /// Raw source photons consumed per final output photon.
    double total_expected_photons = 1.0;
};

class UnreachableTarget : public std::runtime_error {
  public:
    UnreachableTarget(const std::string &what, double break_even)
        : std::runtime_error(what), break_even_(break_even) {}

    [[nodiscard]] double break_even() const { return break_even_; }

  private:
    double break_even_;
};

/**
 * @brief Rounds of distillation needed to bring ε0 to `target` or below,
 * iterating the scheme's worst-case error map. Costs compound as the product
 * of n / p_success(ε) over rounds.
 */
inline Plan plan(double epsilon0, double target, const Scheme &scheme,
                 std::size_t max_rounds = 200) {
    detail::check_epsilon(epsilon0, "plan");
    if (!(target > 0.0)) {
        throw std::invalid_argument("plan: target must be > 0");
    }
    Plan p;
    if (epsilon0 <= target) {
        return p;
    }
    const double be = scheme_break_even(scheme);
    if (epsilon0 >= be) {
        throw UnreachableTarget("plan: epsilon0 = " + std::to_string(epsilon0) +
                                    " is not below the " + scheme.name() +
                                    " break-even error " + std::to_string(be),
                                be);
    }
    double eps = epsilon0;
    for (std::size_t round = 1; eps > target; ++round) {
        if (round > max_rounds) {
            throw UnreachableTarget("plan: target not reached within " +
                                        std::to_string(max_rounds) + " rounds",
                                    be);
        }
        PlanStep step;
        step.round = round;
        step.epsilon_before = eps;
        step.epsilon_after = scheme_error_map(scheme, eps);
        step.p_success = scheme_success_prob(scheme, eps);
        step.cost_multiplier = static_cast<double>(scheme.n) / step.p_success;
        if (!(step.epsilon_after < eps)) {
            throw UnreachableTarget("plan: error stopped decreasing at " + std::to_string(eps), be);
        }
        p.total_expected_photons *= step.cost_multiplier;
        eps = step.epsilon_after;
        p.steps.push_back(step);
    }
    return p;
}

} // namespace pdistill
