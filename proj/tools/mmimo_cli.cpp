// SPDX-License-Identifier: Apache-2.0
// Command-line front end: simulate, asymptotic, optimize-tau, sweep, reproduce.
#include "mmimo/experiment.hpp"
#include "mmimo/training.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using namespace mmimo;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitNumerical = 2;
constexpr int kExitIo = 3;

struct CommonFlags {
    std::string scenario;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> trials;
    std::string snr;
    std::string schemes = "conv,stat";
    std::string mode = "both";
    bool bits = false;
    std::string out;
    std::string format = "csv";
    unsigned workers = 0;
};

void add_common(CLI::App* app, CommonFlags& f, bool needs_scenario) {
    auto* opt = app->add_option("--scenario", f.scenario, "Scenario file");
    if (needs_scenario) opt->required();
    app->add_option("--seed", f.seed, "Master seed (overrides the scenario)");
    app->add_option("--trials", f.trials, "Monte Carlo trials (overrides the scenario)")->check(CLI::PositiveNumber);
    app->add_option("--snr", f.snr, "SNR grid in dB as lo:hi:step or a comma list");
    app->add_option("--schemes", f.schemes, "Comma list of conv, stat");
    app->add_option("--mode", f.mode, "mc, de or both")->check(CLI::IsMember({"mc", "de", "both"}));
    app->add_flag("--bits", f.bits, "Report SE in bit/s/Hz instead of nat/s/Hz");
    app->add_option("--out", f.out, "Output path (stdout when omitted)");
    app->add_option("--format", f.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    app->add_option("--workers", f.workers, "Worker threads (default: MMIMO_WORKERS or hardware concurrency)");
}

std::vector<double> parse_snr_grid(const std::string& text) {
    ScenarioSpec probe = parse_scenario("snr_db = " + text + "\n");
    return probe.snr_db;
}

ScenarioSpec load_with_overrides(const CommonFlags& f) {
    ScenarioSpec s = load_scenario(f.scenario);
    if (f.seed) s.seed = *f.seed;
    if (f.trials) s.trials = *f.trials;
    if (!f.snr.empty()) s.snr_db = parse_snr_grid(f.snr);
    if (f.bits) s.log_base = LogBase::base2;
    s.validate();
    return s;
}

EvalMode parse_mode(const std::string& m) {
    if (m == "mc") return EvalMode::mc;
    if (m == "de") return EvalMode::de;
    return EvalMode::both;
}

std::vector<SchemeFamily> parse_schemes(const std::string& list) {
    std::vector<SchemeFamily> out;
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item == "conv")
            out.push_back(SchemeFamily::conv);
        else if (item == "stat")
            out.push_back(SchemeFamily::stat);
        else
            throw ConfigError("schemes", "unknown scheme '" + item + "' (expected conv or stat)");
    }
    if (out.empty()) throw ConfigError("schemes", "at least one scheme is required");
    return out;
}

void write_text(const std::string& path, const std::string& text) {
    if (path.empty()) {
        std::cout << text;
        std::cout.flush();
        return;
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::ios_base::failure("cannot open '" + path + "' for writing");
    out << text;
    out.flush();
    if (!out) throw std::ios_base::failure("failed writing '" + path + "'");
}

void write_rows(const std::vector<ResultRow>& rows, const CommonFlags& f) {
    const OutputFormat format = f.format == "json" ? OutputFormat::json : OutputFormat::csv;
    if (f.out.empty())
        write_text("", format == OutputFormat::csv ? rows_to_csv(rows) : rows_to_json(rows));
    else
        emit_results(rows, format, f.out);
}

int run(int argc, char** argv) {
    CLI::App app{"Uplink massive MIMO spectral-efficiency simulator"};
    app.require_subcommand(1);

    CommonFlags sim_flags, de_flags, tau_flags, sweep_flags, repro_flags;

    auto* simulate = app.add_subcommand("simulate", "Monte Carlo (and optionally deterministic) SE over the SNR grid");
    add_common(simulate, sim_flags, true);

    auto* asymptotic = app.add_subcommand("asymptotic", "Deterministic-equivalent SE over the SNR grid");
    add_common(asymptotic, de_flags, true);

    auto* optimize = app.add_subcommand("optimize-tau", "Optimal training length per SNR point (single cell)");
    add_common(optimize, tau_flags, true);

    auto* sweep = app.add_subcommand("sweep", "Sweep one scenario parameter");
    add_common(sweep, sweep_flags, true);
    std::string axis = "snr";
    std::string values;
    sweep->add_option("--axis", axis, "snr, kappa_max, n_antennas or tau")
        ->check(CLI::IsMember({"snr", "kappa_max", "n_antennas", "tau"}));
    sweep->add_option("--values", values, "Axis values as lo:hi:step or a comma list");

    auto* reproduce = app.add_subcommand("reproduce", "Run a built-in figure preset");
    add_common(reproduce, repro_flags, false);
    std::string figure = "all";
    reproduce->add_option("--figure", figure, "fig1a, fig1b, fig2a, fig2b, fig4a, fig4b, fig5 or all");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (simulate->parsed() || asymptotic->parsed()) {
            const CommonFlags& f = simulate->parsed() ? sim_flags : de_flags;
            SweepOptions o;
            o.schemes = parse_schemes(f.schemes);
            o.mode = asymptotic->parsed() ? EvalMode::de : parse_mode(f.mode);
            o.workers = f.workers;
            write_rows(run_sweep(load_with_overrides(f), o), f);
        } else if (optimize->parsed()) {
            const ScenarioSpec s = load_with_overrides(tau_flags);
            const Scenario sc = build_scenario(s);
            std::vector<TauStarEntry> table;
            const std::vector<UserLinkProfile> local = sc.local_profiles(0);
            for (double snr : s.snr_db) {
                const TrainingSolution sol = solve_tau_star(local, sc.config(snr, s.k));
                const char* method = sol.method == TauMethod::boundary      ? "boundary"
                                     : sol.method == TauMethod::fixed_point ? "fixed_point"
                                                                            : "bisection";
                table.push_back({s.kappa_max, snr, sol.tau_star, sol.tau_continuous, method});
            }
            write_text(tau_flags.out, tau_table_csv(table));
        } else if (sweep->parsed()) {
            SweepOptions o;
            o.schemes = parse_schemes(sweep_flags.schemes);
            o.mode = parse_mode(sweep_flags.mode);
            o.workers = sweep_flags.workers;
            o.axis = axis == "kappa_max"    ? SweepAxis::kappa_max
                     : axis == "n_antennas" ? SweepAxis::n_antennas
                     : axis == "tau"        ? SweepAxis::tau
                                            : SweepAxis::snr;
            if (o.axis != SweepAxis::snr) {
                if (values.empty()) throw ConfigError("values", "--values is required for axis " + axis);
                o.axis_values = parse_snr_grid(values);
            }
            write_rows(run_sweep(load_with_overrides(sweep_flags), o), sweep_flags);
        } else if (reproduce->parsed()) {
            std::vector<FigureId> figures;
            if (figure == "all") {
                figures = all_figures();
            } else if (auto id = parse_figure_id(figure)) {
                figures = {*id};
            } else {
                throw ConfigError("figure", "unknown figure '" + figure + "'");
            }
            ReproduceOptions o;
            o.trials = repro_flags.trials;
            o.seed = repro_flags.seed;
            if (reproduce->count("--mode") > 0) o.mode = parse_mode(repro_flags.mode);
            if (repro_flags.bits) o.log_base = LogBase::base2;
            o.workers = repro_flags.workers;
            const std::string dir = repro_flags.out.empty() ? "results" : repro_flags.out;
            std::filesystem::create_directories(dir);
            const bool json = repro_flags.format == "json";
            for (FigureId id : figures) {
                const ReproduceResult r = reproduce_figure(id, o);
                const std::string base = (std::filesystem::path(dir) / std::string(to_string(id))).string();
                emit_results(r.rows, json ? OutputFormat::json : OutputFormat::csv, base + (json ? ".json" : ".csv"));
                if (!r.tau_table.empty()) write_text(base + "_tau_star.csv", tau_table_csv(r.tau_table));
                const std::string summary = summary_text(r);
                write_text(base + "_summary.txt", summary);
                std::cout << summary;
                std::cout.flush();
            }
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const SweepError& e) {
        std::cerr << (e.numerical() ? "numerical failure: " : "error: ") << e.what() << "\n";
        return e.numerical() ? kExitNumerical : kExitConfig;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::ios_base::failure& e) {
        std::cerr << "I/O error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "I/O error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) { return run(argc, argv); }
