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
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"

namespace cli = pdistill::cli;

int main(int argc, char **argv) {
    CLI::App app{"pdistill: linear-optical photon distillation simulator"};
    app.require_subcommand(1);
    app.fallthrough();

    cli::GlobalOptions global;
    app.add_option("--seed", global.seed, "Seed for Monte Carlo paths")
        ->capture_default_str();
    app.add_option("--tolerance", global.tolerance, "Amplitude prune tolerance")
        ->capture_default_str()
        ->check(CLI::NonNegativeNumber);
    app.add_option("--output", global.output, "Write CSV output to this path");

    const auto add_circuit = [](CLI::App *sub, cli::CircuitChoice &c) {
        sub->add_option("--builtin", c.builtin, "hom2, distill3, distill4 or sb_step:<m>");
        sub->add_option("--circuit", c.file, "Circuit description file");
    };

    cli::SimulateOptions sim;
    auto *simulate = app.add_subcommand("simulate", "Run a circuit and print amplitudes");
    add_circuit(simulate, sim.circuit);
    simulate->add_option("--input", sim.input, "Input spec, e.g. ideal:3 or 'ideal:3;error:1@0'");
    simulate->add_option("--pattern", sim.pattern, "Detection pattern rail:count,...");

    cli::AnalyzeOptions an;
    auto *analyze = app.add_subcommand("analyze", "Exact output error and heralding probability");
    add_circuit(analyze, an.circuit);
    analyze->add_option("--input", an.input, "Source model, e.g. 'model:allsame;eps=0.1'")
        ->capture_default_str();
    analyze->add_option("--pattern", an.pattern, "Detection pattern rail:count,...");
    analyze->add_option("--shots", an.shots, "Also estimate by Monte Carlo with this many shots");

    cli::SweepOptions sw;
    auto *sweep = app.add_subcommand("sweep", "CSV of output error and success probability vs epsilon");
    sweep->add_option("--start", sw.start)->capture_default_str();
    sweep->add_option("--stop", sw.stop)->capture_default_str();
    sweep->add_option("--count", sw.count)->capture_default_str();
    sweep->add_option("--scale", sw.scale, "linear or log")->capture_default_str();
    sweep->add_option("--model", sw.model, "Model for psuccess_exact: allsame or alldistinct")
        ->capture_default_str();

    std::size_t n_max = 6;
    auto *sb = app.add_subcommand("sb", "HOM-filtering success probability table");
    sb->add_option("--n-max", n_max)->capture_default_str();

    cli::PlanOptions pl;
    auto *plan = app.add_subcommand("plan", "Rounds and photons to reach a target error");
    plan->add_option("--eps0", pl.eps0)->capture_default_str();
    plan->add_option("--target", pl.target)->capture_default_str();
    plan->add_option("--scheme", pl.scheme, "present3, present4, sb2 or sb3")
        ->capture_default_str();

    cli::NoiseScanOptions ns;
    auto *noise = app.add_subcommand("noise-scan", "Log-log slopes of detector noise signatures");
    noise->add_option("--parameter", ns.parameters, "dark, miscount, loss (repeatable)")
        ->delimiter(',');
    noise->add_option("--values", ns.values, "Comma-separated parameter values")
        ->delimiter(',');
    noise->add_option("--source-eps", ns.source_eps, "Source error while scanning")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : cli::kUsage;
    }

    return cli::run_guarded(
        [&] {
            if (simulate->parsed()) {
                cli::cmd_simulate(sim, global, std::cout);
            } else if (analyze->parsed()) {
                cli::cmd_analyze(an, global, std::cout);
            } else if (sweep->parsed()) {
                cli::cmd_sweep(sw, global, std::cout);
            } else if (sb->parsed()) {
                cli::cmd_sb(n_max, global, std::cout);
            } else if (plan->parsed()) {
                cli::cmd_plan(pl, global, std::cout);
            } else if (noise->parsed()) {
                cli::cmd_noise_scan(ns, global, std::cout);
            }
        },
        std::cerr);
}
