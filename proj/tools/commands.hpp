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
 * @file commands.hpp
 * Command implementations behind the pdistill executable. Each command writes
 * results to `out` and throws on failure; run_guarded maps exceptions to exit
 * codes.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <pdistill/pdistill.hpp>

namespace pdistill::cli {

inline constexpr std::uint64_t kDefaultSeed = 20260101;

enum ExitCode : int { kOk = 0, kFailure = 1, kUsage = 2 };

/// Invalid flags or input text; maps to exit code 2.
class UsageError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct GlobalOptions {
    std::uint64_t seed = kDefaultSeed;
    double tolerance = kDefaultPruneTolerance;
    /// CSV destination; empty means standard output.
    std::string output;
};

// --- input mini-language --------------------------------------------------

/**
 * Whitespace- or ';'-separated tokens:
 *   ideal:n               n photons, all ideal
 *   error:k@r             rail r carries error mode k
 *   model:allsame | model:alldistinct | model:explicit=p1,p2,...
 *   eps=x                 source error for allsame / alldistinct
 */
struct InputSpec {
    std::optional<std::size_t> photons;
    std::map<std::size_t, std::size_t> overrides;
    std::string model;
    std::vector<double> explicit_p;
    std::optional<double> eps;

    [[nodiscard]] bool is_mixed() const { return !model.empty(); }

    [[nodiscard]] std::size_t photon_count(std::size_t fallback) const {
        return photons.value_or(fallback);
    }

    [[nodiscard]] SourceModel source_model() const {
        if (model == "allsame") {
            return SourceModel::all_same(eps.value_or(0.0));
        }
        if (model == "alldistinct") {
            return SourceModel::all_distinct(eps.value_or(0.0));
        }
        if (model == "explicit") {
            return SourceModel::explicit_modes(explicit_p);
        }
        throw UsageError("input: no source model given");
    }

    [[nodiscard]] WeightedEnsemble ensemble(std::size_t fallback_photons) const {
        const std::size_t n = photon_count(fallback_photons);
        if (is_mixed()) {
            return enumerate_inputs(n, source_model());
        }
        std::vector<std::size_t> modes(n, 0);
        for (const auto &[rail, k] : overrides) {
            if (rail >= n) {
                throw UsageError("input: error override on rail " + std::to_string(rail) +
                                 " but only " + std::to_string(n) + " photons");
            }
            modes[rail] = k;
        }
        return WeightedEnsemble::pure(product_state(modes));
    }
};

namespace detail {

inline double parse_double(const std::string &s, const std::string &what) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception &) {
        used = 0;
    }
    if (used != s.size() || s.empty() || !std::isfinite(v)) {
        throw UsageError(what + ": expected a number, got '" + s + "'");
    }
    return v;
}

inline std::size_t parse_index(const std::string &s, const std::string &what) {
    if (s.empty() || !std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; })) {
        throw UsageError(what + ": expected a non-negative integer, got '" + s + "'");
    }
    return std::stoul(s);
}

inline std::vector<std::string> split(const std::string &s, char sep) {
    std::vector<std::string> parts;
    std::istringstream in(s);
    for (std::string p; std::getline(in, p, sep);) {
        parts.push_back(p);
    }
    return parts;
}

} // namespace detail

inline InputSpec parse_input_spec(const std::string &text) {
    InputSpec spec;
    std::string normalized = text;
    std::replace(normalized.begin(), normalized.end(), ';', ' ');
    std::istringstream in(normalized);
    for (std::string tok; in >> tok;) {
        if (tok.rfind("ideal:", 0) == 0) {
            spec.photons = detail::parse_index(tok.substr(6), "ideal:n");
            if (*spec.photons == 0) {
                throw UsageError("ideal:n needs n >= 1");
            }
        } else if (tok.rfind("error:", 0) == 0) {
            const auto body = tok.substr(6);
            const auto at = body.find('@');
            if (at == std::string::npos) {
                throw UsageError("error override '" + tok + "' is not error:k@r");
            }
            const auto k = detail::parse_index(body.substr(0, at), "error:k@r");
            const auto r = detail::parse_index(body.substr(at + 1), "error:k@r");
            if (k == 0) {
                throw UsageError("error mode labels start at 1");
            }
            spec.overrides[r] = k;
        } else if (tok.rfind("model:", 0) == 0) {
            const auto body = tok.substr(6);
            if (body == "allsame" || body == "alldistinct") {
                spec.model = body;
            } else if (body.rfind("explicit=", 0) == 0) {
                spec.model = "explicit";
                for (const auto &p : detail::split(body.substr(9), ',')) {
                    spec.explicit_p.push_back(detail::parse_double(p, "explicit weights"));
                }
            } else {
                throw UsageError("unknown model '" + body + "'");
            }
        } else if (tok.rfind("eps=", 0) == 0) {
            spec.eps = detail::parse_double(tok.substr(4), "eps");
        } else {
            throw UsageError("unrecognized input token '" + tok + "'");
        }
    }
    if (spec.is_mixed() && !spec.overrides.empty()) {
        throw UsageError("input: error overrides cannot be combined with a source model");
    }
    if (spec.eps && spec.model != "allsame" && spec.model != "alldistinct") {
        throw UsageError("input: eps= needs model:allsame or model:alldistinct");
    }
    return spec;
}

// --- formatting -----------------------------------------------------------

/// Rail occupations; rails holding non-ideal photons list mode:count in parentheses.
inline std::string format_config(const OccupationConfig &config, std::size_t num_rails) {
    std::ostringstream s;
    s << '|';
    for (std::size_t r = 0; r < num_rails; ++r) {
        if (r != 0) {
            s << ',';
        }
        s << config.rail_total(r);
        bool mixed = false;
        for (const auto &[mode, n] : config.entries()) {
            mixed = mixed || (mode.rail == r && mode.internal != 0);
        }
        if (mixed) {
            s << '(';
            bool first = true;
            for (const auto &[mode, n] : config.entries()) {
                if (mode.rail == r) {
                    s << (first ? "" : " ") << 'm' << mode.internal << ':' << n;
                    first = false;
                }
            }
            s << ')';
        }
    }
    s << ">";
    return s.str();
}

inline std::string format_number(double v) {
    std::ostringstream s;
    s << std::setprecision(12) << v;
    return s.str();
}

inline void print_state(std::ostream &out, const FockState &state, double tolerance) {
    const auto shown = normalize_global_phase(prune(state, tolerance));
    const double dust = std::max(tolerance, 1e-14);
    for (const auto &[config, amp] : shown.terms()) {
        const double re = std::abs(amp.real()) < dust ? 0.0 : amp.real();
        const double im = std::abs(amp.imag()) < dust ? 0.0 : amp.imag();
        out << "  " << format_config(config, shown.num_rails()) << "  " << format_number(re)
            << (im < 0 ? " - " : " + ") << format_number(std::abs(im)) << "i"
            << "  |a|^2=" << format_number(std::norm(amp)) << '\n';
    }
}

inline void print_ensemble(std::ostream &out, const WeightedEnsemble &ens, double tolerance) {
    for (const auto &b : ens.branches()) {
        if (ens.size() > 1) {
            out << " branch weight " << format_number(b.weight) << '\n';
        }
        print_state(out, b.state, tolerance);
    }
}

/// Writes to the file named by `path`, or to `fallback` when the path is empty.
template <class Fn>
void with_output(const std::string &path, std::ostream &fallback, Fn &&write) {
    if (path.empty()) {
        write(fallback);
        return;
    }
    std::ofstream file(path, std::ios::binary);
    if (!file) {
        throw std::runtime_error("cannot open '" + path + "' for writing");
    }
    write(file);
    file.flush();
    if (!file) {
        throw std::runtime_error("failed writing '" + path + "'");
    }
}

// --- circuit selection ----------------------------------------------------

struct CircuitChoice {
    std::string builtin;
    std::string file;
};

inline NamedCircuit load_circuit(const CircuitChoice &c) {
    if (!c.builtin.empty() && !c.file.empty()) {
        throw UsageError("give either --builtin or --circuit, not both");
    }
    if (!c.file.empty()) {
        std::ifstream in(c.file);
        if (!in) {
            throw UsageError("cannot read circuit file '" + c.file + "'");
        }
        try {
            auto circuit = parse_circuit(in);
            const std::size_t rails = circuit.num_rails;
            return {c.file, std::move(circuit), rails, {}, std::nullopt};
        } catch (const CircuitParseError &e) {
            throw UsageError(c.file + ":" + std::to_string(e.line()) + ": " + e.what());
        }
    }
    try {
        return builtin_circuit(c.builtin.empty() ? "distill3" : c.builtin);
    } catch (const std::invalid_argument &e) {
        throw UsageError(e.what());
    }
}

inline DetectionPattern pattern_or_default(const std::optional<std::string> &text,
                                           const NamedCircuit &nc) {
    if (!text) {
        return nc.pattern;
    }
    try {
        return parse_pattern(*text);
    } catch (const std::invalid_argument &e) {
        throw UsageError(e.what());
    }
}

// --- simulate -------------------------------------------------------------

struct SimulateOptions {
    CircuitChoice circuit;
    std::optional<std::string> input;
    std::optional<std::string> pattern;
};

inline void cmd_simulate(const SimulateOptions &o, const GlobalOptions &g, std::ostream &out) {
    const auto nc = load_circuit(o.circuit);
    const auto spec = parse_input_spec(o.input.value_or(""));
    const std::size_t n = spec.photon_count(nc.circuit.num_rails);
    if (n != nc.circuit.num_rails) {
        throw UsageError("input has " + std::to_string(n) + " photons but circuit '" + nc.name +
                         "' has " + std::to_string(nc.circuit.num_rails) + " rails");
    }
    const auto pattern = pattern_or_default(o.pattern, nc);
    const auto output = run_circuit(spec.ensemble(n), nc.circuit, g.tolerance);

    out << "circuit " << nc.name << " (" << nc.circuit.num_rails << " rails, "
        << nc.circuit.elements.size() << " beamsplitters)\n";
    out << "output amplitudes:\n";
    print_ensemble(out, output, g.tolerance);
    if (pattern.counts.empty()) {
        return;
    }
    const auto ps = postselect(output, pattern);
    out << "pattern";
    for (const auto &[rail, k] : pattern.counts) {
        out << ' ' << rail << ':' << k;
    }
    out << "\nprobability " << format_number(ps.probability) << '\n';
    if (ps.probability <= 0.0) {
        return;
    }
    out << "conditional state:\n";
    print_ensemble(out, ps.conditional, g.tolerance);
    std::size_t out_rail = 0;
    try {
        out_rail = unmeasured_rail(nc.circuit.num_rails, pattern);
    } catch (const std::invalid_argument &) {
        return;
    }
    const auto &front = ps.conditional.branches().front().state;
    if (front.terms().begin()->first.rail_total(out_rail) == 1) {
        out << "output fidelity " << format_number(fidelity_to_ideal(ps.conditional, out_rail))
            << '\n';
    }
}

// --- analyze --------------------------------------------------------------

struct AnalyzeOptions {
    CircuitChoice circuit;
    std::string input = "model:allsame;eps=0.1";
    std::optional<std::string> pattern;
    /// Monte Carlo shots over sampled source configurations; 0 disables.
    std::size_t shots = 0;
};

inline void cmd_analyze(const AnalyzeOptions &o, const GlobalOptions &g, std::ostream &out) {
    const auto nc = load_circuit(o.circuit);
    const auto spec = parse_input_spec(o.input);
    if (!spec.is_mixed()) {
        throw UsageError("analyze needs a source model (model:... and eps=...)");
    }
    if (spec.photons && *spec.photons != nc.circuit.num_rails) {
        throw UsageError("input photon count does not match the circuit");
    }
    const auto pattern = pattern_or_default(o.pattern, nc);
    if (pattern.counts.empty()) {
        throw UsageError("analyze needs a detection pattern");
    }
    const auto model = spec.source_model();
    const auto r = analyze(nc, pattern, model);

    out << "circuit " << r.circuit << '\n';
    out << "model " << r.model << '\n';
    out << "epsilon_in " << format_number(r.epsilon_in) << '\n';
    out << "p_success " << format_number(r.p_success) << '\n';
    out << "epsilon_out " << format_number(r.epsilon_out) << '\n';
    if (r.bounds) {
        out << "epsilon_out_bounds " << format_number(r.bounds->lower) << ' '
            << format_number(r.bounds->upper) << '\n';
        out << "p_success_lower_bound " << format_number(n3_psuccess_lower(r.epsilon_in)) << '\n';
    }
    out << "photons_per_output " << format_number(r.expected_photons_per_output) << '\n';

    if (o.shots > 0) {
        std::mt19937_64 rng(g.seed);
        std::bernoulli_distribution coin;
        std::map<std::vector<std::size_t>, CaseOutcome> cache;
        std::size_t accepted = 0;
        double ideal = 0.0;
        for (std::size_t s = 0; s < o.shots; ++s) {
            const auto cfg = sample_error_configuration(nc.photons, model, rng);
            auto it = cache.find(cfg.modes);
            if (it == cache.end()) {
                it = cache.emplace(cfg.modes, analyze_configuration(nc, cfg.modes, pattern)).first;
            }
            if (coin(rng, std::bernoulli_distribution::param_type(it->second.p_success))) {
                ++accepted;
                ideal += it->second.ideal_fraction;
            }
        }
        out << "mc_shots " << o.shots << " seed " << g.seed << '\n';
        out << "mc_p_success " << format_number(static_cast<double>(accepted) / o.shots) << '\n';
        if (accepted > 0) {
            out << "mc_epsilon_out " << format_number(1.0 - ideal / accepted) << '\n';
        }
    }
}

// --- sweep ----------------------------------------------------------------

struct SweepOptions {
    double start = 0.0;
    double stop = 0.4;
    std::size_t count = 41;
    std::string scale = "linear";
    /// Source model used for psuccess_exact.
    std::string model = "allsame";
};

inline std::vector<double> sweep_grid(const SweepOptions &o) {
    if (o.count < 2) {
        throw UsageError("sweep: --count must be >= 2");
    }
    if (!(o.start >= 0.0 && o.stop < 0.5 && o.start < o.stop)) {
        throw UsageError("sweep: need 0 <= start < stop < 0.5");
    }
    std::vector<double> grid(o.count);
    for (std::size_t i = 0; i < o.count; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(o.count - 1);
        if (o.scale == "linear") {
            grid[i] = o.start + t * (o.stop - o.start);
        } else if (o.scale == "log") {
            if (o.start <= 0.0) {
                throw UsageError("sweep: log scale needs start > 0");
            }
            grid[i] = o.start * std::pow(o.stop / o.start, t);
        } else {
            throw UsageError("sweep: --scale must be linear or log");
        }
    }
    return grid;
}

inline void cmd_sweep(const SweepOptions &o, const GlobalOptions &g, std::ostream &out) {
    if (o.model != "allsame" && o.model != "alldistinct") {
        throw UsageError("sweep: --model must be allsame or alldistinct");
    }
    const auto grid = sweep_grid(o);
    const auto nc = distill3();
    std::ostringstream csv;
    csv << std::setprecision(12);
    csv << "epsilon,present3_lower,present3_upper,present3_exact_allsame,"
           "present3_exact_alldistinct,sb2,sb3,psuccess_exact,psuccess_bound\n";
    for (double e : grid) {
        const auto same = analyze(nc, SourceModel::all_same(e));
        const auto distinct = analyze(nc, SourceModel::all_distinct(e));
        const double p = o.model == "allsame" ? same.p_success : distinct.p_success;
        csv << e << ',' << n3_error_lower(e) << ',' << n3_error_upper(e) << ','
            << same.epsilon_out << ',' << distinct.epsilon_out << ',' << sb_error(2, e) << ','
            << sb_error(3, e) << ',' << p << ',' << n3_psuccess_lower(e) << '\n';
    }
    with_output(g.output, out, [&](std::ostream &dst) { dst << csv.str(); });
}

// --- sb -------------------------------------------------------------------

inline void cmd_sb(std::size_t n_max, const GlobalOptions &g, std::ostream &out) {
    if (n_max < 2 || n_max > 12) {
        throw UsageError("sb: --n-max must lie in [2, 12]");
    }
    std::ostringstream table;
    table << std::scientific << std::setprecision(11);
    table << "n,p_success,expected_photons\n";
    for (std::size_t n = 2; n <= n_max; ++n) {
        table << n << ',' << sb_success_prob(n) << ',' << sb_expected_photons(n) << '\n';
    }
    with_output(g.output, out, [&](std::ostream &dst) { dst << table.str(); });
}

// --- plan -----------------------------------------------------------------

struct PlanOptions {
    double eps0 = 1e-3;
    double target = 1e-4;
    std::string scheme = "present3";
};

inline Scheme parse_scheme(const std::string &name) {
    if (name == "present3") {
        return Scheme::present3();
    }
    if (name == "present4") {
        return Scheme::present4();
    }
    if (name == "sb2") {
        return Scheme::sb(2);
    }
    if (name == "sb3") {
        return Scheme::sb(3);
    }
    throw UsageError("unknown scheme '" + name + "' (present3, present4, sb2, sb3)");
}

inline void cmd_plan(const PlanOptions &o, const GlobalOptions &, std::ostream &out) {
    const auto scheme = parse_scheme(o.scheme);
    if (!(o.eps0 >= 0.0 && o.eps0 < 1.0) || !(o.target > 0.0)) {
        throw UsageError("plan: need 0 <= eps0 < 1 and target > 0");
    }
    const auto p = plan(o.eps0, o.target, scheme);
    out << "scheme " << scheme.name() << '\n';
    out << "round  eps_in  eps_out  p_success  photons_per_output\n";
    for (const auto &s : p.steps) {
        out << s.round << "  " << format_number(s.epsilon_before) << "  "
            << format_number(s.epsilon_after) << "  " << format_number(s.p_success) << "  "
            << format_number(s.cost_multiplier) << '\n';
    }
    out << "rounds " << p.steps.size() << '\n';
    out << "total_expected_photons " << format_number(p.total_expected_photons) << '\n';
}

// --- noise-scan -----------------------------------------------------------

struct NoiseScanOptions {
    std::vector<std::string> parameters{"dark", "miscount", "loss"};
    std::vector<double> values{1e-3, 5e-4, 2.5e-4, 1.25e-4};
    double source_eps = 0.0;
};

inline NoiseParameter parse_noise_parameter(const std::string &name) {
    if (name == "dark") {
        return NoiseParameter::dark_count;
    }
    if (name == "miscount") {
        return NoiseParameter::miscount;
    }
    if (name == "loss") {
        return NoiseParameter::loss;
    }
    throw UsageError("unknown noise parameter '" + name + "' (dark, miscount, loss)");
}

inline void cmd_noise_scan(const NoiseScanOptions &o, const GlobalOptions &g, std::ostream &out) {
    if (o.values.size() < 2) {
        throw UsageError("noise-scan: need at least two --values");
    }
    if (o.parameters.empty()) {
        throw UsageError("noise-scan: no parameters to scan");
    }
    std::ostringstream csv;
    csv << std::setprecision(12);
    csv << "parameter,values,slope,r2\n";
    for (const auto &name : o.parameters) {
        OrderFit fit;
        try {
            fit = noise_order_slope(parse_noise_parameter(name), o.values, distill3(),
                                    o.source_eps);
        } catch (const std::invalid_argument &e) {
            throw UsageError(e.what());
        }
        csv << name << ",\"";
        for (std::size_t i = 0; i < fit.values.size(); ++i) {
            csv << (i != 0 ? ";" : "") << fit.values[i];
        }
        csv << "\"," << fit.slope << ',' << fit.r2 << '\n';
    }
    with_output(g.output, out, [&](std::ostream &dst) { dst << csv.str(); });
}

// --- error mapping --------------------------------------------------------

/// Runs `fn`, reporting failures on `err`: 2 for usage errors, 1 for anything else.
template <class Fn>
int run_guarded(Fn &&fn, std::ostream &err) {
    try {
        fn();
        return kOk;
    } catch (const UsageError &e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::exception &e) {
        err << "error: " << e.what() << '\n';
        return kFailure;
    }
}

} // namespace pdistill::cli
