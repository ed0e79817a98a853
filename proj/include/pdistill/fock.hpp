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
 * @file fock.hpp
 * Sparse second-quantized states of photons that carry a spatial rail and an
 * internal (distinguishability) mode, and their evolution through two-rail
 * beamsplitters.
 */
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <compare>
#include <complex>
#include <cstddef>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace pdistill {

using Amplitude = std::complex<double>;

inline constexpr double kDefaultPruneTolerance = 1e-12;

/// Phase convention used by every builtin beamsplitter.
inline constexpr double kDefaultPhi0 = std::numbers::pi / 2;
inline constexpr double kDefaultPhiR = -std::numbers::pi / 2;
inline constexpr double kDefaultPhiT = 0.0;

/// A single bosonic mode: spatial rail plus internal label. Internal mode 0 is
/// the ideal photon, labels k > 0 are mutually orthogonal error modes.
struct ModeKey {
    std::size_t rail = 0;
    std::size_t internal = 0;

    auto operator<=>(const ModeKey &) const = default;
};

/**
 * @brief Photon counts per mode, stored as a flat map sorted rail-major,
 * internal-minor. Zero counts are never stored, so two configurations compare
 * equal iff they describe the same basis state.
 */
class OccupationConfig {
  public:
    using Entry = std::pair<ModeKey, unsigned>;

    OccupationConfig() = default;

    OccupationConfig(std::initializer_list<Entry> entries) {
        for (const auto &[mode, n] : entries) {
            add(mode, n);
        }
    }

    [[nodiscard]] unsigned count(ModeKey mode) const {
        auto it = find(mode);
        return (it != entries_.end() && it->first == mode) ? it->second : 0U;
    }

    void set(ModeKey mode, unsigned n) {
        auto it = find(mode);
        const bool present = it != entries_.end() && it->first == mode;
        if (n == 0) {
            if (present) {
                entries_.erase(it);
            }
        } else if (present) {
            it->second = n;
        } else {
            entries_.insert(it, Entry{mode, n});
        }
    }

    void add(ModeKey mode, unsigned n) { set(mode, count(mode) + n); }

    [[nodiscard]] unsigned total() const {
        unsigned t = 0;
        for (const auto &e : entries_) {
            t += e.second;
        }
        return t;
    }

    [[nodiscard]] unsigned rail_total(std::size_t rail) const {
        unsigned t = 0;
        for (const auto &[mode, n] : entries_) {
            if (mode.rail == rail) {
                t += n;
            }
        }
        return t;
    }

    /// Highest occupied rail index + 1 (0 for the vacuum).
    [[nodiscard]] std::size_t rail_extent() const {
        return entries_.empty() ? 0 : entries_.back().first.rail + 1;
    }

    [[nodiscard]] std::size_t internal_extent() const {
        std::size_t m = 0;
        for (const auto &e : entries_) {
            m = std::max(m, e.first.internal + 1);
        }
        return m;
    }

    /// Entries whose rail satisfies the predicate.
    template <class Pred>
    [[nodiscard]] OccupationConfig filtered(Pred &&keep_rail) const {
        OccupationConfig out;
        for (const auto &e : entries_) {
            if (keep_rail(e.first.rail)) {
                out.entries_.push_back(e);
            }
        }
        return out;
    }

    [[nodiscard]] const std::vector<Entry> &entries() const { return entries_; }
    [[nodiscard]] bool empty() const { return entries_.empty(); }

    auto operator<=>(const OccupationConfig &) const = default;
    bool operator==(const OccupationConfig &) const = default;

  private:
    std::vector<Entry>::iterator find(ModeKey mode) {
        return std::lower_bound(
            entries_.begin(), entries_.end(), mode,
            [](const Entry &e, const ModeKey &m) { return e.first < m; });
    }
    [[nodiscard]] std::vector<Entry>::const_iterator find(ModeKey mode) const {
        return std::lower_bound(
            entries_.begin(), entries_.end(), mode,
            [](const Entry &e, const ModeKey &m) { return e.first < m; });
    }

    std::vector<Entry> entries_;
};

/// Occupations of a configuration summed over internal modes, one per rail.
inline std::vector<unsigned> rail_occupations(const OccupationConfig &config,
                                              std::size_t num_rails) {
    std::vector<unsigned> occ(num_rails, 0U);
    for (const auto &[mode, n] : config.entries()) {
        if (mode.rail < num_rails) {
            occ[mode.rail] += n;
        }
    }
    return occ;
}

/**
 * @brief Pure state of a fixed number of photons on `num_rails` rails, as a
 * sparse superposition of occupation configurations.
 *
 * The amplitudes are not forced to unit norm: post-selected branches are
 * carried unnormalized until the caller decides otherwise.
 */
class FockState {
  public:
    using Terms = std::map<OccupationConfig, Amplitude>;

    explicit FockState(std::size_t num_rails = 0) : num_rails_(num_rails) {}

    FockState(std::size_t num_rails, Terms terms)
        : num_rails_(num_rails), terms_(std::move(terms)) {
        for (const auto &[config, amp] : terms_) {
            check_config(config);
        }
    }

    /// Accumulates `amp` onto the configuration's amplitude.
    void add(const OccupationConfig &config, Amplitude amp) {
        check_config(config);
        if (!terms_.empty() && terms_.begin()->first.total() != config.total()) {
            throw std::invalid_argument(
                "FockState: mixing photon numbers violates superselection");
        }
        terms_[config] += amp;
    }

    [[nodiscard]] Amplitude amplitude(const OccupationConfig &config) const {
        auto it = terms_.find(config);
        return it == terms_.end() ? Amplitude{} : it->second;
    }

    [[nodiscard]] const Terms &terms() const { return terms_; }
    [[nodiscard]] std::size_t num_rails() const { return num_rails_; }
    [[nodiscard]] std::size_t size() const { return terms_.size(); }
    [[nodiscard]] bool empty() const { return terms_.empty(); }

    [[nodiscard]] unsigned photon_count() const {
        return terms_.empty() ? 0U : terms_.begin()->first.total();
    }

    [[nodiscard]] bool is_photon_number_consistent() const {
        const unsigned n = photon_count();
        return std::all_of(terms_.begin(), terms_.end(),
                           [n](const auto &t) { return t.first.total() == n; });
    }

    [[nodiscard]] double norm_squared() const {
        double s = 0.0;
        for (const auto &t : terms_) {
            s += std::norm(t.second);
        }
        return s;
    }

    [[nodiscard]] std::size_t internal_extent() const {
        std::size_t m = 0;
        for (const auto &t : terms_) {
            m = std::max(m, t.first.internal_extent());
        }
        return m;
    }

    [[nodiscard]] FockState scaled(Amplitude factor) const {
        FockState out(num_rails_);
        for (const auto &[config, amp] : terms_) {
            out.terms_.emplace(config, amp * factor);
        }
        return out;
    }

    [[nodiscard]] FockState normalized() const {
        const double n2 = norm_squared();
        if (n2 <= 0.0) {
            throw std::domain_error("FockState: cannot normalize the zero vector");
        }
        return scaled(1.0 / std::sqrt(n2));
    }

  private:
    void check_config(const OccupationConfig &config) const {
        if (config.rail_extent() > num_rails_) {
            throw std::out_of_range("FockState: rail " +
                                    std::to_string(config.rail_extent() - 1) +
                                    " outside " + std::to_string(num_rails_) +
                                    "-rail space");
        }
    }

    std::size_t num_rails_;
    Terms terms_;
};

/// One photon in internal mode `internal` on `rail`.
inline FockState single_photon_state(std::size_t rail, std::size_t internal,
                                     std::size_t num_rails) {
    if (rail >= num_rails) {
        throw std::out_of_range("single_photon_state: rail " + std::to_string(rail) +
                                " >= num_rails " + std::to_string(num_rails));
    }
    FockState s(num_rails);
    s.add(OccupationConfig{{ModeKey{rail, internal}, 1U}}, 1.0);
    return s;
}

/**
 * @brief One photon per rail, rail k carrying internal mode `internal_modes[k]`.
 *
 * `internal_cap` bounds the labels; it defaults to n + 1 for n photons, which
 * covers the ideal mode plus one distinct error mode per photon.
 */
inline FockState product_state(std::span<const std::size_t> internal_modes,
                               std::optional<std::size_t> internal_cap = std::nullopt) {
    const std::size_t n = internal_modes.size();
    const std::size_t cap = internal_cap.value_or(n + 1);
    OccupationConfig config;
    for (std::size_t rail = 0; rail < n; ++rail) {
        if (internal_modes[rail] >= cap) {
            throw std::out_of_range("product_state: internal mode " +
                                    std::to_string(internal_modes[rail]) +
                                    " exceeds cap " + std::to_string(cap));
        }
        config.add(ModeKey{rail, internal_modes[rail]}, 1U);
    }
    FockState s(n);
    s.add(config, 1.0);
    return s;
}

/// Basis state with the given per-rail counts, every photon in internal mode 0.
inline FockState fock_basis_state(std::span<const unsigned> occupations,
                                  std::size_t internal = 0) {
    OccupationConfig config;
    for (std::size_t rail = 0; rail < occupations.size(); ++rail) {
        config.add(ModeKey{rail, internal}, occupations[rail]);
    }
    FockState s(occupations.size());
    s.add(config, 1.0);
    return s;
}

/// ⟨a|b⟩, antilinear in the first argument.
inline Amplitude inner_product(const FockState &a, const FockState &b) {
    Amplitude s{};
    const auto &small = a.size() <= b.size() ? a.terms() : b.terms();
    const auto &large = a.size() <= b.size() ? b.terms() : a.terms();
    for (const auto &[config, amp] : small) {
        auto it = large.find(config);
        if (it != large.end()) {
            s += &small == &a.terms() ? std::conj(amp) * it->second
                                      : std::conj(it->second) * amp;
        }
    }
    return s;
}

/// Drops every term with |amplitude| <= tolerance.
inline FockState prune(const FockState &state, double tolerance = kDefaultPruneTolerance) {
    if (tolerance < 0.0) {
        throw std::invalid_argument("prune: negative tolerance");
    }
    FockState::Terms kept;
    for (const auto &[config, amp] : state.terms()) {
        if (std::abs(amp) > tolerance) {
            kept.emplace(config, amp);
        }
    }
    return FockState(state.num_rails(), std::move(kept));
}

/**
 * @brief Product state with `b`'s rails shifted up by `rail_offset`.
 *
 * Throws if any rail would be occupied by both factors. The result spans
 * max(a.num_rails(), rail_offset + b.num_rails()) rails.
 */
inline FockState tensor(const FockState &a, const FockState &b, std::size_t rail_offset) {
    std::vector<bool> used(std::max(a.num_rails(), rail_offset + b.num_rails()), false);
    for (const auto &t : a.terms()) {
        for (const auto &e : t.first.entries()) {
            used[e.first.rail] = true;
        }
    }
    for (const auto &t : b.terms()) {
        for (const auto &e : t.first.entries()) {
            if (used[e.first.rail + rail_offset]) {
                throw std::invalid_argument("tensor: rail " +
                                            std::to_string(e.first.rail + rail_offset) +
                                            " occupied by both factors");
            }
        }
    }
    FockState out(used.size());
    for (const auto &[ca, xa] : a.terms()) {
        for (const auto &[cb, xb] : b.terms()) {
            OccupationConfig c = ca;
            for (const auto &[mode, n] : cb.entries()) {
                c.add(ModeKey{mode.rail + rail_offset, mode.internal}, n);
            }
            out.add(c, xa * xb);
        }
    }
    return out;
}

/// Applies `relabel` to every internal label, rails untouched.
inline FockState relabel_internal(const FockState &state,
                                  const std::function<std::size_t(std::size_t)> &relabel) {
    FockState out(state.num_rails());
    for (const auto &[config, amp] : state.terms()) {
        OccupationConfig c;
        for (const auto &[mode, n] : config.entries()) {
            c.add(ModeKey{mode.rail, relabel(mode.internal)}, n);
        }
        out.add(c, amp);
    }
    return out;
}

/**
 * @brief Lossless two-rail coupler acting identically on every internal mode.
 *
 * Creation operators transform as
 *   a† -> e^{i(φ0+φR)} sinθ a† + e^{i(φ0+φT)} cosθ b†
 *   b† -> e^{i(φ0−φT)} cosθ a† − e^{i(φ0−φR)} sinθ b†
 * with a the operator of `rail_a`. θ = π/4 is a 50:50 splitter.
 */
struct BeamsplitterSpec {
    std::size_t rail_a = 0;
    std::size_t rail_b = 1;
    double theta = std::numbers::pi / 4;
    double phi0 = kDefaultPhi0;
    double phiR = kDefaultPhiR;
    double phiT = kDefaultPhiT;

    /// Row-major {a→a, a→b, b→a, b→b} images of the creation operators.
    [[nodiscard]] std::array<Amplitude, 4> matrix() const {
        const Amplitude i{0.0, 1.0};
        const double s = std::sin(theta);
        const double c = std::cos(theta);
        return {std::exp(i * (phi0 + phiR)) * s, std::exp(i * (phi0 + phiT)) * c,
                std::exp(i * (phi0 - phiT)) * c, -std::exp(i * (phi0 - phiR)) * s};
    }

    /// Spec whose matrix is the conjugate transpose of this one.
    [[nodiscard]] BeamsplitterSpec inverse() const {
        return {rail_a, rail_b, theta, -phi0, -phiR, phiT};
    }

    bool operator==(const BeamsplitterSpec &) const = default;
};

inline BeamsplitterSpec fifty_fifty(std::size_t rail_a, std::size_t rail_b) {
    return {rail_a, rail_b, std::numbers::pi / 4};
}

namespace detail {

inline double factorial(unsigned n) {
    double f = 1.0;
    for (unsigned k = 2; k <= n; ++k) {
        f *= k;
    }
    return f;
}

inline double binomial(unsigned n, unsigned k) {
    return factorial(n) / (factorial(k) * factorial(n - k));
}

/// Advances a mixed-radix counter, last digit fastest. False once it wraps to zero.
inline bool next_digits(std::vector<std::size_t> &digits, std::size_t radix) {
    for (std::size_t pos = digits.size(); pos > 0; --pos) {
        if (++digits[pos - 1] < radix) {
            return true;
        }
        digits[pos - 1] = 0;
    }
    return false;
}

} // namespace detail

/**
 * @brief Evolves `state` through one beamsplitter.
 *
 * Each internal mode is expanded independently: (n_a, n_b) photons become
 * (α a† + β b†)^{n_a} (γ a† + δ b†)^{n_b} / sqrt(n_a! n_b!), expanded
 * binomially and renormalized by sqrt(p! q!) for the output counts (p, q).
 * No pruning is done here.
 */
inline FockState apply_beamsplitter(const FockState &state, const BeamsplitterSpec &bs) {
    if (bs.rail_a == bs.rail_b) {
        throw std::invalid_argument("apply_beamsplitter: rail_a == rail_b");
    }
    if (bs.rail_a >= state.num_rails() || bs.rail_b >= state.num_rails()) {
        throw std::out_of_range("apply_beamsplitter: beamsplitter on rails (" +
                                std::to_string(bs.rail_a) + "," + std::to_string(bs.rail_b) +
                                ") outside " + std::to_string(state.num_rails()) +
                                "-rail state");
    }
    const auto [alpha, beta, gamma, delta] = bs.matrix();
    const auto on_pair = [&](std::size_t r) { return r == bs.rail_a || r == bs.rail_b; };

    FockState::Terms out;
    std::vector<std::pair<OccupationConfig, Amplitude>> partial;
    std::vector<std::pair<OccupationConfig, Amplitude>> next;

    for (const auto &[config, amp] : state.terms()) {
        partial.clear();
        partial.emplace_back(config.filtered([&](std::size_t r) { return !on_pair(r); }), amp);

        std::vector<std::size_t> internals;
        for (const auto &[mode, n] : config.entries()) {
            if (on_pair(mode.rail)) {
                internals.push_back(mode.internal);
            }
        }
        std::sort(internals.begin(), internals.end());
        internals.erase(std::unique(internals.begin(), internals.end()), internals.end());

        for (std::size_t internal : internals) {
            const unsigned na = config.count(ModeKey{bs.rail_a, internal});
            const unsigned nb = config.count(ModeKey{bs.rail_b, internal});
            const double in_norm = std::sqrt(detail::factorial(na) * detail::factorial(nb));

            // Output counts (p on a, q on b) only depend on p; accumulate per p.
            std::vector<Amplitude> by_p(na + nb + 1, Amplitude{});
            for (unsigned j = 0; j <= na; ++j) {
                const Amplitude ca = detail::binomial(na, j) * std::pow(alpha, static_cast<int>(j)) *
                                     std::pow(beta, static_cast<int>(na - j));
                for (unsigned k = 0; k <= nb; ++k) {
                    const Amplitude cb = detail::binomial(nb, k) *
                                         std::pow(gamma, static_cast<int>(k)) *
                                         std::pow(delta, static_cast<int>(nb - k));
                    by_p[j + k] += ca * cb;
                }
            }

            next.clear();
            for (const auto &[base, base_amp] : partial) {
                for (unsigned p = 0; p <= na + nb; ++p) {
                    if (by_p[p] == Amplitude{}) {
                        continue;
                    }
                    const unsigned q = na + nb - p;
                    const double out_norm =
                        std::sqrt(detail::factorial(p) * detail::factorial(q));
                    OccupationConfig c = base;
                    c.add(ModeKey{bs.rail_a, internal}, p);
                    c.add(ModeKey{bs.rail_b, internal}, q);
                    next.emplace_back(std::move(c), base_amp * by_p[p] * out_norm / in_norm);
                }
            }
            partial.swap(next);
        }

        for (auto &[c, a] : partial) {
            out[c] += a;
        }
    }
    return FockState(state.num_rails(), std::move(out));
}

/**
 * @brief Rotates the state so that its largest-magnitude amplitude is real and
 * positive. Ties within 1e-9 resolve to the canonically first configuration.
 */
inline FockState normalize_global_phase(const FockState &state) {
    const Amplitude *ref = nullptr;
    for (const auto &t : state.terms()) {
        if (ref == nullptr || std::abs(t.second) > std::abs(*ref) + 1e-9) {
            ref = &t.second;
        }
    }
    if (ref == nullptr || *ref == Amplitude{}) {
        return state;
    }
    return state.scaled(std::abs(*ref) / *ref);
}

/// True iff b = e^{iφ} a for some φ, compared term by term within `tolerance`.
inline bool equal_up_to_global_phase(const FockState &a, const FockState &b,
                                     double tolerance = 1e-10) {
    const FockState pa = prune(a, tolerance);
    const FockState pb = prune(b, tolerance);
    if (pa.size() != pb.size()) {
        return false;
    }
    if (pa.empty()) {
        return true;
    }
    const auto ref = std::max_element(
        pa.terms().begin(), pa.terms().end(),
        [](const auto &x, const auto &y) { return std::abs(x.second) < std::abs(y.second); });
    const Amplitude b_ref = pb.amplitude(ref->first);
    if (b_ref == Amplitude{}) {
        return false;
    }
    Amplitude phase = b_ref / ref->second;
    phase /= std::abs(phase);
    for (const auto &[config, amp] : pa.terms()) {
        if (std::abs(amp * phase - pb.amplitude(config)) > tolerance) {
            return false;
        }
    }
    return true;
}

} // namespace pdistill
