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
 * @file detector_noise.hpp
 * Imperfect heralding: per-mode photon loss before detection, dark counts and
 * ±1 miscounts at each number-resolving detector. Exact enumeration up to a
 * configurable number of noise events, or full order, plus a Monte Carlo
 * cross-check and scaling-law fits.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "circuits.hpp"
#include "fock.hpp"
#include "measurement.hpp"
#include "numeric.hpp"
#include "source.hpp"

namespace pdistill {

struct DetectorModel {
    /// Probability that a detector registers one extra click.
    double dark_count_prob = 0.0;
    /// Probability that a detector reports n ± 1 instead of n.
    double miscount_prob = 0.0;
    /// Independent per-photon loss probability before detection.
    double loss_prob = 0.0;
    /// Fraction of miscounts that read high.
    double miscount_up_fraction = 0.5;

    void validate() const {
        for (double p : {dark_count_prob, miscount_prob, loss_prob, miscount_up_fraction}) {
            if (!(p >= 0.0 && p <= 1.0)) {
                throw std::invalid_argument("DetectorModel: probabilities must lie in [0, 1]");
            }
        }
        if (loss_prob >= 1.0) {
            throw std::invalid_argument("DetectorModel: loss probability must be < 1");
        }
    }
};

struct NoisyPostSelection {
    double accept_prob = 0.0;
    double reject_prob = 0.0;
    /// Accepted with the output rail holding one photon in the ideal mode.
    double ideal_output_prob = 0.0;
    /// Accepted with anything else on the output rail, vacuum included.
    double false_accept_bad_output_prob = 0.0;
    /// Accepted with an empty output rail.
    double vacuum_output_prob = 0.0;
    /// Bad accepted outputs that needed at least one dark count or miscount.
    double detector_induced_bad_prob = 0.0;
    /// Accept probability split by the number of photons lost.
    std::vector<double> accept_prob_by_lost;

    [[nodiscard]] double output_error() const {
        return accept_prob > 0.0 ? false_accept_bad_output_prob / accept_prob
                                 : std::numeric_limits<double>::quiet_NaN();
    }
};

namespace detail {

struct LossBranch {
    std::size_t lost = 0;
    FockState state;
};

/// Applies per-mode binomial loss Kraus operators; patterns losing more than `budget` photons are skipped.
inline std::vector<LossBranch> loss_branches(const FockState &state, double loss,
                                             std::size_t budget) {
    if (loss == 0.0 || budget == 0) {
        return {{0, state}};
    }
    std::vector<ModeKey> modes;
    std::vector<unsigned> max_n;
    for (const auto &[config, amp] : state.terms()) {
        for (const auto &[mode, n] : config.entries()) {
            auto it = std::find(modes.begin(), modes.end(), mode);
            if (it == modes.end()) {
                modes.push_back(mode);
                max_n.push_back(n);
            } else {
                auto &m = max_n[static_cast<std::size_t>(it - modes.begin())];
                m = std::max(m, n);
            }
        }
    }
    std::vector<LossBranch> out;
    std::vector<unsigned> pattern(modes.size(), 0);
    const std::function<void(std::size_t, std::size_t)> recurse = [&](std::size_t k,
                                                                       std::size_t used) {
        if (k == modes.size()) {
            FockState s(state.num_rails());
            for (const auto &[config, amp] : state.terms()) {
                OccupationConfig c = config;
                double coeff = 1.0;
                bool possible = true;
                for (std::size_t i = 0; i < modes.size() && possible; ++i) {
                    const unsigned n = config.count(modes[i]);
                    const unsigned l = pattern[i];
                    if (l > n) {
                        possible = false;
                        break;
                    }
                    coeff *= std::sqrt(binomial(n, l) * std::pow(loss, l) *
                                       std::pow(1.0 - loss, n - l));
                    c.set(modes[i], n - l);
                }
                if (possible) {
                    s.add(c, amp * coeff);
                }
            }
            if (!s.empty()) {
                out.push_back({used, std::move(s)});
            }
            return;
        }
        for (unsigned l = 0; l <= max_n[k] && used + l <= budget; ++l) {
            pattern[k] = l;
            recurse(k + 1, used + l);
        }
        pattern[k] = 0;
    };
    recurse(0, 0);
    return out;
}

/// One detector's possible (reading shift, event count, probability) outcomes.
struct DetectorOutcome {
    int dark = 0;
    int miscount = 0;
    std::size_t events = 0;
    double prob = 1.0;
};

inline std::vector<DetectorOutcome> detector_outcomes(const DetectorModel &dm) {
    std::vector<DetectorOutcome> out;
    for (int dark = 0; dark <= 1; ++dark) {
        const double pd = dark != 0 ? dm.dark_count_prob : 1.0 - dm.dark_count_prob;
        for (int mis = -1; mis <= 1; ++mis) {
            double pm = 1.0 - dm.miscount_prob;
            if (mis > 0) {
                pm = dm.miscount_prob * dm.miscount_up_fraction;
            } else if (mis < 0) {
                pm = dm.miscount_prob * (1.0 - dm.miscount_up_fraction);
            }
            if (pd * pm > 0.0) {
                out.push_back({dark, mis, static_cast<std::size_t>(dark + std::abs(mis)), pd * pm});
            }
        }
    }
    return out;
}

inline unsigned reading(unsigned true_count, const DetectorOutcome &o) {
    const long r = static_cast<long>(true_count) + o.dark + o.miscount;
    return r < 0 ? 0U : static_cast<unsigned>(r);
}

/// Classification of the unmeasured rail for one measured outcome.
struct RestSummary {
    double ideal_fraction = 0.0;
    bool vacuum = false;
};

inline RestSummary summarize_rest(const FockState &rest, std::size_t output_rail) {
    RestSummary s;
    const double n2 = rest.norm_squared();
    const unsigned photons = rest.photon_count();
    s.vacuum = photons == 0;
    if (photons == 1 && n2 > 0.0) {
        s.ideal_fraction =
            std::norm(rest.amplitude(OccupationConfig{{ModeKey{output_rail, 0}, 1U}})) / n2;
    }
    return s;
}

/// A measured outcome after loss: true counts per detector and what the output rail holds.
struct MeasuredOutcome {
    double prob = 0.0;
    std::size_t lost = 0;
    std::vector<unsigned> true_counts;
    RestSummary rest;
};

inline std::vector<MeasuredOutcome> measured_outcomes(const WeightedEnsemble &input,
                                                      const DetectionPattern &pattern,
                                                      double loss, std::size_t loss_budget,
                                                      std::size_t output_rail) {
    std::vector<MeasuredOutcome> out;
    for (const auto &branch : input.branches()) {
        for (const auto &lb : loss_branches(branch.state, loss, loss_budget)) {
            for (const auto &[measured, rest] : split_by_measured(lb.state, pattern)) {
                MeasuredOutcome m;
                m.prob = branch.weight * rest.norm_squared();
                if (m.prob <= 0.0) {
                    continue;
                }
                m.lost = lb.lost;
                for (const auto &[rail, n] : pattern.counts) {
                    m.true_counts.push_back(measured.rail_total(rail));
                }
                m.rest = summarize_rest(rest, output_rail);
                out.push_back(std::move(m));
            }
        }
    }
    return out;
}

} // namespace detail

/**
 * @brief Post-selection through noisy detectors, enumerated exactly.
 *
 * Loss acts first as independent per-photon Kraus operators; each detector
 * then adds an optional dark click and an optional ±1 miscount (a reading
 * never drops below zero). Every lost photon, dark click and miscount counts
 * as one event; combinations with more than `max_events` events are dropped,
 * so probabilities are exact through that order. `std::nullopt` keeps all.
 * The pattern must leave exactly one output rail.
 */
inline NoisyPostSelection noisy_postselect(const WeightedEnsemble &input,
                                           const DetectionPattern &pattern,
                                           const DetectorModel &dm,
                                           std::optional<std::size_t> max_events = 2) {
    dm.validate();
    if (input.empty()) {
        throw std::invalid_argument("noisy_postselect: empty ensemble");
    }
    const std::size_t num_rails = input.branches().front().state.num_rails();
    for (const auto &[rail, n] : pattern.counts) {
        if (rail >= num_rails) {
            throw std::out_of_range("noisy_postselect: pattern rail outside state");
        }
    }
    const std::size_t out_rail = unmeasured_rail(num_rails, pattern);
    const std::size_t budget = max_events.value_or(std::numeric_limits<std::size_t>::max() / 4);

    const auto outcomes = detail::measured_outcomes(input, pattern, dm.loss_prob, budget, out_rail);
    const auto per_detector = detail::detector_outcomes(dm);
    std::vector<unsigned> wanted;
    for (const auto &[rail, n] : pattern.counts) {
        wanted.push_back(n);
    }

    NoisyPostSelection r;
    double enumerated = 0.0;
    for (const auto &m : outcomes) {
        if (r.accept_prob_by_lost.size() <= m.lost) {
            r.accept_prob_by_lost.resize(m.lost + 1, 0.0);
        }
        // accept weight split by whether any detector event happened
        double acc_clean = 0.0;
        double acc_noisy = 0.0;
        const std::function<void(std::size_t, std::size_t, double, bool)> recurse =
            [&](std::size_t d, std::size_t events, double q, bool accepted) {
                if (d == wanted.size()) {
                    enumerated += m.prob * q;
                    if (accepted) {
                        (events > m.lost ? acc_noisy : acc_clean) += q;
                    }
                    return;
                }
                for (const auto &o : per_detector) {
                    if (events + o.events > budget) {
                        continue;
                    }
                    recurse(d + 1, events + o.events, q * o.prob,
                            accepted && detail::reading(m.true_counts[d], o) == wanted[d]);
                }
            };
        recurse(0, m.lost, 1.0, true);

        const double acc = m.prob * (acc_clean + acc_noisy);
        const double bad = 1.0 - m.rest.ideal_fraction;
        r.accept_prob += acc;
        r.accept_prob_by_lost[m.lost] += acc;
        r.ideal_output_prob += acc * m.rest.ideal_fraction;
        r.false_accept_bad_output_prob += acc * bad;
        r.detector_induced_bad_prob += m.prob * acc_noisy * bad;
        if (m.rest.vacuum) {
            r.vacuum_output_prob += acc;
        }
    }
    r.reject_prob = enumerated - r.accept_prob;
    return r;
}

/// Monte Carlo estimate of the same quantities (all orders).
template <class Rng>
NoisyPostSelection noisy_postselect_mc(const WeightedEnsemble &input,
                                       const DetectionPattern &pattern, const DetectorModel &dm,
                                       std::size_t shots, Rng &rng) {
    dm.validate();
    if (input.empty()) {
        throw std::invalid_argument("noisy_postselect_mc: empty ensemble");
    }
    if (shots == 0) {
        throw std::invalid_argument("noisy_postselect_mc: shots must be > 0");
    }
    const std::size_t num_rails = input.branches().front().state.num_rails();
    const std::size_t out_rail = unmeasured_rail(num_rails, pattern);
    const auto outcomes = detail::measured_outcomes(
        input, pattern, dm.loss_prob, std::numeric_limits<std::size_t>::max() / 4, out_rail);
    std::vector<double> weights;
    for (const auto &m : outcomes) {
        weights.push_back(m.prob);
    }
    std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<unsigned> wanted;
    for (const auto &[rail, n] : pattern.counts) {
        wanted.push_back(n);
    }

    NoisyPostSelection r;
    std::size_t accepted = 0;
    for (std::size_t s = 0; s < shots; ++s) {
        const auto &m = outcomes[pick(rng)];
        bool ok = true;
        bool event = false;
        for (std::size_t d = 0; d < wanted.size(); ++d) {
            detail::DetectorOutcome o;
            o.dark = unit(rng) < dm.dark_count_prob ? 1 : 0;
            if (unit(rng) < dm.miscount_prob) {
                o.miscount = unit(rng) < dm.miscount_up_fraction ? 1 : -1;
            }
            event = event || o.dark != 0 || o.miscount != 0;
            ok = ok && detail::reading(m.true_counts[d], o) == wanted[d];
        }
        if (!ok) {
            continue;
        }
        ++accepted;
        if (r.accept_prob_by_lost.size() <= m.lost) {
            r.accept_prob_by_lost.resize(m.lost + 1, 0.0);
        }
        r.accept_prob_by_lost[m.lost] += 1.0;
        const double bad = 1.0 - m.rest.ideal_fraction;
        r.ideal_output_prob += m.rest.ideal_fraction;
        r.false_accept_bad_output_prob += bad;
        if (event) {
            r.detector_induced_bad_prob += bad;
        }
        if (m.rest.vacuum) {
            r.vacuum_output_prob += 1.0;
        }
    }
    const double n = static_cast<double>(shots);
    r.accept_prob = static_cast<double>(accepted) / n;
    r.reject_prob = 1.0 - r.accept_prob;
    r.ideal_output_prob /= n;
    r.false_accept_bad_output_prob /= n;
    r.detector_induced_bad_prob /= n;
    r.vacuum_output_prob /= n;
    for (auto &a : r.accept_prob_by_lost) {
        a /= n;
    }
    return r;
}

// --- scaling fits ---------------------------------------------------------

enum class NoiseParameter { dark_count, miscount, loss };

struct OrderFit {
    double slope = 0.0;
    double r2 = 0.0;
    std::vector<double> values;
    std::vector<double> metric;
};

/**
 * @brief Log-log slope of the noise signature against one detector parameter,
 * everything else ideal. Dark counts and miscounts are scored by false
 * acceptance of a bad output, loss by acceptance with a vacuum output.
 */
inline OrderFit noise_order_slope(NoiseParameter which, std::span<const double> values,
                                  const NamedCircuit &nc = distill3(), double source_eps = 0.0) {
    if (values.size() < 2) {
        throw std::invalid_argument("noise_order_slope: need at least two parameter values");
    }
    const auto ens = run_circuit(enumerate_inputs(nc.photons, SourceModel::all_same(source_eps)),
                                 nc.circuit);
    OrderFit fit;
    std::vector<double> lx;
    std::vector<double> ly;
    for (double v : values) {
        if (!(v > 0.0 && v <= 0.05)) {
            throw std::invalid_argument("noise_order_slope: values must lie in (0, 0.05]");
        }
        DetectorModel dm;
        switch (which) {
        case NoiseParameter::dark_count:
            dm.dark_count_prob = v;
            break;
        case NoiseParameter::miscount:
            dm.miscount_prob = v;
            break;
        case NoiseParameter::loss:
            dm.loss_prob = v;
            break;
        }
        const auto r = noisy_postselect(ens, nc.pattern, dm, std::nullopt);
        const double y =
            which == NoiseParameter::loss ? r.vacuum_output_prob : r.false_accept_bad_output_prob;
        if (!(y > 0.0)) {
            throw std::domain_error("noise_order_slope: signature vanishes; no power law");
        }
        fit.values.push_back(v);
        fit.metric.push_back(y);
        lx.push_back(std::log(v));
        ly.push_back(std::log(y));
    }
    const auto lf = linear_fit(lx, ly);
    fit.slope = lf.slope;
    fit.r2 = lf.r2;
    return fit;
}

struct MixedOrderFit {
    /// Coefficient of ε_d².
    double quadratic = 0.0;
    /// Coefficient of ε·ε_d.
    double bilinear = 0.0;
    /// ||F − fit|| / ||F|| over the grid.
    double relative_residual = 0.0;
    std::size_t points = 0;
};

/**
 * @brief Least-squares fit of the detector-induced false-accept probability
 * F(ε, ε_d) ≈ a·ε_d² + b·ε·ε_d over a grid of source error ε and dark-count
 * probability ε_d, with the source modelled by `model_for`.
 */
inline MixedOrderFit mixed_order_scan(
    std::span<const double> eps_grid, std::span<const double> dark_grid,
    const NamedCircuit &nc = distill3(),
    const std::function<SourceModel(double)> &model_for = SourceModel::all_same) {
    if (eps_grid.empty() || dark_grid.empty()) {
        throw std::invalid_argument("mixed_order_scan: empty grid");
    }
    for (auto grid : {eps_grid, dark_grid}) {
        for (double v : grid) {
            if (!(v >= 0.0 && v <= 0.05)) {
                throw std::invalid_argument("mixed_order_scan: grid values must lie in [0, 0.05]");
            }
        }
    }
    Eigen::MatrixXd a(static_cast<Eigen::Index>(eps_grid.size() * dark_grid.size()), 2);
    Eigen::VectorXd f(a.rows());
    Eigen::Index row = 0;
    for (double eps : eps_grid) {
        const auto ens = run_circuit(enumerate_inputs(nc.photons, model_for(eps)), nc.circuit);
        for (double ed : dark_grid) {
            DetectorModel dm;
            dm.dark_count_prob = ed;
            a(row, 0) = ed * ed;
            a(row, 1) = eps * ed;
            f(row) = noisy_postselect(ens, nc.pattern, dm, std::nullopt).detector_induced_bad_prob;
            ++row;
        }
    }
    const Eigen::MatrixXd normal = a.transpose() * a;
    if (std::abs(normal.determinant()) <= 1e-14 * normal.squaredNorm()) {
        throw std::invalid_argument("mixed_order_scan: grid cannot separate the two terms");
    }
    const Eigen::Vector2d coeff = normal.ldlt().solve(a.transpose() * f);
    MixedOrderFit fit;
    fit.quadratic = coeff(0);
    fit.bilinear = coeff(1);
    fit.points = static_cast<std::size_t>(a.rows());
    const double fn = f.norm();
    fit.relative_residual = fn > 0.0 ? (a * coeff - f).norm() / fn : 0.0;
    return fit;
}

} // namespace pdistill
