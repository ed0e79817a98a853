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
 * @file circuits.hpp
 * Beamsplitter circuits: the builtin distillation circuits, a search that
 * resolves rail pairings against a known output state, and a line-oriented
 * text format for user circuits.
 */
#pragma once

#include <cmath>
#include <cstddef>
#include <iomanip>
#include <istream>
#include <map>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fock.hpp"
#include "measurement.hpp"

namespace pdistill {

/// Ordered list of beamsplitters on `num_rails` rails.
struct Circuit {
    std::size_t num_rails = 2;
    std::vector<BeamsplitterSpec> elements;

    void validate() const {
        if (num_rails < 2) {
            throw std::invalid_argument("Circuit: need at least 2 rails");
        }
        for (const auto &bs : elements) {
            if (bs.rail_a >= num_rails || bs.rail_b >= num_rails) {
                throw std::out_of_range("Circuit: element rail outside " +
                                        std::to_string(num_rails) + " rails");
            }
            if (bs.rail_a == bs.rail_b) {
                throw std::invalid_argument("Circuit: element couples a rail to itself");
            }
        }
    }

    bool operator==(const Circuit &) const = default;
};

/// Folds apply_beamsplitter over the elements, pruning after each step.
inline FockState run_circuit(const FockState &state, const Circuit &circuit,
                             double tolerance = kDefaultPruneTolerance) {
    circuit.validate();
    if (state.num_rails() < circuit.num_rails) {
        throw std::invalid_argument("run_circuit: state has " +
                                    std::to_string(state.num_rails()) + " rails, circuit needs " +
                                    std::to_string(circuit.num_rails));
    }
    FockState s = state;
    for (const auto &bs : circuit.elements) {
        s = prune(apply_beamsplitter(s, bs), tolerance);
    }
    return s;
}

/// Runs every branch of an ensemble through the circuit; weights are unchanged.
inline WeightedEnsemble run_circuit(const WeightedEnsemble &input, const Circuit &circuit,
                                    double tolerance = kDefaultPruneTolerance) {
    WeightedEnsemble out;
    for (const auto &b : input.branches()) {
        out.add(b.weight, run_circuit(b.state, circuit, tolerance));
    }
    return out;
}

/**
 * @brief A circuit together with the way it is meant to be used: photon count,
 * heralding pattern and the rail that carries the output photon.
 */
struct NamedCircuit {
    std::string name;
    Circuit circuit;
    std::size_t photons = 0;
    DetectionPattern pattern;
    std::optional<std::size_t> output_rail;
};

/// Angle sequence with unknown rail pairings.
struct LayoutTemplate {
    std::size_t num_rails = 3;
    std::vector<double> angles;
};

inline const double kAsymmetricTheta = std::atan(std::sqrt(2.0));

inline LayoutTemplate distill3_template() {
    return {3, {std::numbers::pi / 4, kAsymmetricTheta, std::numbers::pi / 4}};
}

inline LayoutTemplate distill4_template() {
    const double q = std::numbers::pi / 4;
    return {4, {q, q, q, q}};
}

/// Ideal three-photon output: (i/√3)|1,1,1⟩ + (√2/3)(|3,0,0⟩ + i|0,3,0⟩ + |0,0,3⟩).
inline FockState distill3_target() {
    const Amplitude i{0.0, 1.0};
    const double c = std::sqrt(2.0) / 3.0;
    FockState s(3);
    const auto put = [&s](std::vector<unsigned> occ, Amplitude amp) {
        OccupationConfig config;
        for (std::size_t r = 0; r < occ.size(); ++r) {
            config.add(ModeKey{r, 0}, occ[r]);
        }
        s.add(config, amp);
    };
    put({1, 1, 1}, i / std::sqrt(3.0));
    put({3, 0, 0}, c);
    put({0, 3, 0}, i * c);
    put({0, 0, 3}, c);
    return s;
}

/// Ideal four-photon output of the all-50:50 circuit (11 terms).
inline FockState distill4_target() {
    const double q = std::sqrt(3.0 / 32.0);
    FockState s(4);
    const auto put = [&s](std::vector<unsigned> occ, double amp) {
        OccupationConfig config;
        for (std::size_t r = 0; r < occ.size(); ++r) {
            config.add(ModeKey{r, 0}, occ[r]);
        }
        s.add(config, amp);
    };
    put({1, 1, 1, 1}, 0.5);
    put({2, 2, 0, 0}, 0.25);
    put({2, 0, 2, 0}, -0.25);
    put({2, 0, 0, 2}, 0.25);
    put({0, 2, 2, 0}, 0.25);
    put({0, 2, 0, 2}, -0.25);
    put({0, 0, 2, 2}, 0.25);
    put({4, 0, 0, 0}, q);
    put({0, 4, 0, 0}, q);
    put({0, 0, 4, 0}, q);
    put({0, 0, 0, 4}, q);
    return s;
}

namespace detail {

inline std::vector<std::pair<std::size_t, std::size_t>> ordered_rail_pairs(std::size_t rails) {
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t a = 0; a < rails; ++a) {
        for (std::size_t b = 0; b < rails; ++b) {
            if (a != b) {
                pairs.emplace_back(a, b);
            }
        }
    }
    return pairs;
}

inline FockState ideal_input(std::size_t rails) {
    const std::vector<std::size_t> zeros(rails, 0);
    return product_state(zeros);
}

} // namespace detail

/**
 * @brief Enumerates every assignment of ordered rail pairs to the template's
 * beamsplitters (first element most significant, pairs in lexicographic
 * order) and returns the first whose output on one ideal photon per rail
 * equals `target` up to a global phase.
 *
 * Throws if the target is not normalized or no assignment matches.
 */
inline Circuit resolve_layout(const LayoutTemplate &tmpl, const FockState &target,
                              double tolerance = 1e-10) {
    if (std::abs(target.norm_squared() - 1.0) > tolerance) {
        throw std::invalid_argument("resolve_layout: target is not normalized");
    }
    if (tmpl.num_rails < 2 || tmpl.angles.empty()) {
        throw std::invalid_argument("resolve_layout: empty template");
    }
    const auto pairs = detail::ordered_rail_pairs(tmpl.num_rails);
    const FockState input = detail::ideal_input(tmpl.num_rails);
    const std::size_t k = tmpl.angles.size();
    std::vector<std::size_t> digits(k, 0);

    do {
        Circuit c{tmpl.num_rails, {}};
        for (std::size_t e = 0; e < k; ++e) {
            const auto [a, b] = pairs[digits[e]];
            c.elements.push_back(BeamsplitterSpec{a, b, tmpl.angles[e]});
        }
        if (equal_up_to_global_phase(target, run_circuit(input, c), tolerance)) {
            return c;
        }
    } while (detail::next_digits(digits, pairs.size()));
    throw std::runtime_error("resolve_layout: no rail assignment reproduces the target state");
}

/// Two rails, one 50:50 splitter: the HOM experiment.
inline NamedCircuit hom2() {
    return {"hom2", Circuit{2, {fifty_fifty(0, 1)}}, 2, {}, std::nullopt};
}

/**
 * Three-photon distiller. Rail 0 carries the output; rails 1 and 2 are
 * heralded on one photon each. The layout is the first match found by
 * resolve_layout for distill3_template() and distill3_target().
 */
inline NamedCircuit distill3() {
    Circuit c{3,
              {BeamsplitterSpec{0, 2, std::numbers::pi / 4},
               BeamsplitterSpec{0, 1, kAsymmetricTheta},
               BeamsplitterSpec{1, 2, std::numbers::pi / 4}}};
    return {"distill3", std::move(c), 3, DetectionPattern{{{1, 1U}, {2, 1U}}}, 0};
}

/// Four-photon distiller, all splitters 50:50, heralded on one photon in each of rails 1-3.
inline NamedCircuit distill4() {
    Circuit c{4,
              {fifty_fifty(0, 1), fifty_fifty(2, 3), fifty_fifty(0, 3), fifty_fifty(1, 2)}};
    return {"distill4", std::move(c), 4, DetectionPattern{{{1, 1U}, {2, 1U}, {3, 1U}}}, 0};
}

/// One bunching step of the HOM-filtering chain: |m,1⟩ on rails (0,1), herald rail 1 empty.
inline Circuit sb_step_circuit(std::size_t m) {
    if (m < 1) {
        throw std::invalid_argument("sb_step_circuit: m must be >= 1");
    }
    return Circuit{2, {fifty_fifty(0, 1)}};
}

inline NamedCircuit sb_step(std::size_t m) {
    return {"sb_step(" + std::to_string(m) + ")", sb_step_circuit(m), m + 1,
            DetectionPattern{{{1, 0U}}}, 0};
}

/// Builtin lookup by name: hom2, distill3, distill4, sb_step:<m>.
inline NamedCircuit builtin_circuit(std::string_view name) {
    if (name == "hom2") {
        return hom2();
    }
    if (name == "distill3") {
        return distill3();
    }
    if (name == "distill4") {
        return distill4();
    }
    constexpr std::string_view sb_prefix = "sb_step:";
    if (name.substr(0, sb_prefix.size()) == sb_prefix) {
        const std::string digits(name.substr(sb_prefix.size()));
        std::size_t used = 0;
        unsigned long m = 0;
        try {
            m = std::stoul(digits, &used);
        } catch (const std::exception &) {
            used = 0;
        }
        if (used == digits.size() && !digits.empty()) {
            return sb_step(m);
        }
    }
    throw std::invalid_argument("unknown builtin circuit '" + std::string(name) + "'");
}

/// Parse failure carrying the 1-based line number.
class CircuitParseError : public std::runtime_error {
  public:
    CircuitParseError(std::size_t line, const std::string &what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

    [[nodiscard]] std::size_t line() const { return line_; }

  private:
    std::size_t line_;
};

/**
 * @brief Reads the circuit text format.
 *
 * @code
 * # comment
 * rails 3
 * bs 0 2 0.785398163397
 * bs 0 1 0.955316618125 1.570796326795 -1.570796326795 0
 * @endcode
 *
 * `rails` must precede any `bs` line. Phases default to the module convention.
 */
inline Circuit parse_circuit(std::istream &in) {
    std::optional<Circuit> circuit;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        std::istringstream ls(line);
        std::string keyword;
        if (!(ls >> keyword)) {
            continue;
        }
        std::vector<std::string> args;
        for (std::string tok; ls >> tok;) {
            args.push_back(tok);
        }
        const auto number = [&](const std::string &tok) {
            std::size_t used = 0;
            double v = 0.0;
            try {
                v = std::stod(tok, &used);
            } catch (const std::exception &) {
                used = 0;
            }
            if (used != tok.size() || !std::isfinite(v)) {
                throw CircuitParseError(lineno, "expected a number, got '" + tok + "'");
            }
            return v;
        };
        const auto index = [&](const std::string &tok) {
            const double v = number(tok);
            if (v < 0 || v != std::floor(v)) {
                throw CircuitParseError(lineno, "expected a non-negative integer, got '" + tok +
                                                    "'");
            }
            return static_cast<std::size_t>(v);
        };

        if (keyword == "rails") {
            if (circuit) {
                throw CircuitParseError(lineno, "duplicate 'rails' header");
            }
            if (args.size() != 1) {
                throw CircuitParseError(lineno, "'rails' takes exactly one argument");
            }
            const std::size_t n = index(args[0]);
            if (n < 2) {
                throw CircuitParseError(lineno, "need at least 2 rails");
            }
            circuit = Circuit{n, {}};
        } else if (keyword == "bs") {
            if (!circuit) {
                throw CircuitParseError(lineno, "'bs' before 'rails' header");
            }
            if (args.size() != 3 && args.size() != 6) {
                throw CircuitParseError(lineno,
                                        "'bs' takes <rail_a> <rail_b> <theta> [phi0 phiR phiT]");
            }
            BeamsplitterSpec bs{index(args[0]), index(args[1]), number(args[2])};
            if (args.size() == 6) {
                bs.phi0 = number(args[3]);
                bs.phiR = number(args[4]);
                bs.phiT = number(args[5]);
            }
            if (bs.rail_a == bs.rail_b) {
                throw CircuitParseError(lineno, "beamsplitter couples rail " +
                                                    std::to_string(bs.rail_a) + " to itself");
            }
            if (bs.rail_a >= circuit->num_rails || bs.rail_b >= circuit->num_rails) {
                throw CircuitParseError(lineno, "rail outside the declared " +
                                                    std::to_string(circuit->num_rails) + " rails");
            }
            circuit->elements.push_back(bs);
        } else {
            throw CircuitParseError(lineno, "unknown keyword '" + keyword + "'");
        }
    }
    if (!circuit) {
        throw CircuitParseError(lineno == 0 ? 1 : lineno, "missing 'rails' header");
    }
    return *circuit;
}

inline Circuit parse_circuit(const std::string &text) {
    std::istringstream in(text);
    return parse_circuit(in);
}

/// Writes the text format with full double precision.
inline void write_circuit(std::ostream &out, const Circuit &circuit) {
    const auto old = out.precision(17);
    out << "rails " << circuit.num_rails << '\n';
    for (const auto &bs : circuit.elements) {
        out << "bs " << bs.rail_a << ' ' << bs.rail_b << ' ' << bs.theta << ' ' << bs.phi0 << ' '
            << bs.phiR << ' ' << bs.phiT << '\n';
    }
    out.precision(old);
}

} // namespace pdistill
