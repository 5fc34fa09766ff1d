// SPDX-License-Identifier: Apache-2.0
#include "mmimo/experiment.hpp"

#include "mmimo/asymptotics.hpp"
#include "mmimo/spectral_efficiency.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

namespace mmimo {

namespace {

constexpr const char* kCsvHeader = "scenario_id,scheme,snr_db,user_id,se_value,se_stderr,se_de,tau_used,prelog,seed";

std::string describe(const std::exception& e) { return e.what(); }

}  // namespace

SweepError::SweepError(const std::string& context, const std::exception& cause, bool numerical)
    : std::runtime_error(context + ": " + describe(cause)), numerical_(numerical) {}

std::string_view to_string(SchemeFamily v) { return v == SchemeFamily::conv ? "conv" : "stat"; }

std::string_view to_string(EvalMode v) {
    switch (v) {
        case EvalMode::mc: return "mc";
        case EvalMode::de: return "de";
        case EvalMode::both: return "both";
    }
    return "?";
}

std::string_view to_string(SweepAxis v) {
    switch (v) {
        case SweepAxis::snr: return "snr";
        case SweepAxis::kappa_max: return "kappa_max";
        case SweepAxis::n_antennas: return "n_antennas";
        case SweepAxis::tau: return "tau";
    }
    return "?";
}

int resolve_tau(const Scenario& scenario, double snr_db) {
    const ScenarioSpec& s = scenario.spec;
    switch (s.tau.kind) {
        case TauModeKind::minimum: return s.k;
        case TauModeKind::fixed: return s.tau.value;
        case TauModeKind::optimal: {
            const std::vector<UserLinkProfile> local = scenario.local_profiles(0);
            return solve_tau_star(local, scenario.config(snr_db, s.k)).tau_star;
        }
    }
    return s.k;
}

namespace {

void append_rows(std::vector<ResultRow>& out, const std::string& id, Scheme scheme, double snr_db, int tau,
                 double prelog, std::uint64_t seed, int first_user, const std::vector<double>* mc,
                 const std::vector<double>* mc_stderr, const std::vector<double>* de) {
    const std::size_t count = mc ? mc->size() : de->size();
    for (std::size_t k = 0; k < count; ++k) {
        ResultRow r;
        r.scenario_id = id;
        r.scheme = std::string(scheme_name(scheme));
        r.snr_db = snr_db;
        r.user_id = first_user + static_cast<int>(k);
        r.se_value = mc ? (*mc)[k] : (*de)[k];
        if (mc_stderr) r.se_stderr = (*mc_stderr)[k];
        if (de) r.se_de = (*de)[k];
        r.tau_used = tau;
        r.prelog = prelog;
        r.seed = seed;
        out.push_back(std::move(r));
    }
}

void evaluate_conv(const Scenario& sc, const std::string& id, double snr_db, const SweepOptions& options,
                   std::vector<ResultRow>& out) {
    const ScenarioSpec& s = sc.spec;
    const int tau = resolve_tau(sc, snr_db);
    const SystemConfig config = sc.config(snr_db, tau);
    config.validate();
    const bool want_mc = options.mode != EvalMode::de;
    const bool want_de = options.mode != EvalMode::mc;
    MonteCarloOptions mco;
    mco.trials = s.trials;
    mco.seed = s.seed;
    mco.workers = options.workers;

    if (s.l == 1) {
        std::vector<double> de;
        if (want_de) {
            std::vector<EstimatorState> est;
            for (const auto& p : sc.profiles) est.push_back(build_estimator_singlecell(p, tau, config.snr_training));
            de = se_conv_singlecell_de(build_q_singlecell(sc.profiles, est, config.snr_data), config);
        }
        if (want_mc) {
            const SEReport mc = se_conv_singlecell_mc(sc.profiles, config, mco);
            append_rows(out, id, Scheme::conv_single, snr_db, tau, config.prelog(), s.seed, 0, &mc.per_user_se,
                        &mc.per_user_stderr, want_de ? &de : nullptr);
        } else {
            append_rows(out, id, Scheme::conv_single, snr_db, tau, config.prelog(), s.seed, 0, nullptr, nullptr, &de);
        }
        return;
    }

    const LinkTable links = sc.links();
    std::vector<std::vector<double>> de(static_cast<std::size_t>(s.l));
    if (want_de) {
        const NetworkEstimators net = build_network_estimators(links, tau, config.snr_training);
        for (int j = 0; j < s.l; ++j)
            de[static_cast<std::size_t>(j)] =
                se_conv_multicell_de(build_q_multicell(links, net, j, config.snr_data), config).se;
    }
    std::vector<SEReport> mc;
    if (want_mc) mc = se_conv_multicell_mc(links, config, mco);
    for (int j = 0; j < s.l; ++j) {
        const auto ju = static_cast<std::size_t>(j);
        append_rows(out, id, Scheme::conv_multi, snr_db, tau, config.prelog(), s.seed, j * s.k,
                    want_mc ? &mc[ju].per_user_se : nullptr, want_mc ? &mc[ju].per_user_stderr : nullptr,
                    want_de ? &de[ju] : nullptr);
    }
}

void evaluate_stat(const Scenario& sc, const std::string& id, double snr_db, const SweepOptions& options,
                   std::vector<ResultRow>& out) {
    const ScenarioSpec& s = sc.spec;
    const SystemConfig config = sc.config(snr_db, s.k);
    const bool want_exact = options.mode != EvalMode::de;
    const bool want_de = options.mode != EvalMode::mc;

    if (s.l == 1) {
        std::vector<double> de;
        if (want_de) de = se_stat_singlecell_de(sc.profiles, config).full;
        std::vector<double> exact;
        if (want_exact) exact = se_stat_singlecell(sc.profiles, config).per_user_se;
        append_rows(out, id, Scheme::stat_single, snr_db, 0, 1.0, s.seed, 0, want_exact ? &exact : nullptr, nullptr,
                    want_de ? &de : nullptr);
        return;
    }

    const LinkTable links = sc.links();
    std::vector<SEReport> exact;
    if (want_exact) exact = se_stat_multicell(links, config);
    for (int j = 0; j < s.l; ++j) {
        std::vector<double> de;
        if (want_de) {
            std::vector<const UserLinkProfile*> local;
            for (int k = 0; k < s.k; ++k) local.push_back(&links(j, j, k));
            de = se_stat_multicell_de(local, config);
        }
        append_rows(out, id, Scheme::stat_multi, snr_db, 0, 1.0, s.seed, j * s.k,
                    want_exact ? &exact[static_cast<std::size_t>(j)].per_user_se : nullptr, nullptr,
                    want_de ? &de : nullptr);
    }
}

}  // namespace

std::vector<ResultRow> evaluate_scenario(const Scenario& scenario, const std::string& scenario_id,
                                         const SweepOptions& options) {
    std::vector<SchemeFamily> schemes = options.schemes;
    std::sort(schemes.begin(), schemes.end());
    schemes.erase(std::unique(schemes.begin(), schemes.end()), schemes.end());
    std::vector<ResultRow> rows;
    for (double snr : scenario.spec.snr_db) {
        for (SchemeFamily f : schemes) {
            try {
                if (f == SchemeFamily::conv)
                    evaluate_conv(scenario, scenario_id, snr, options, rows);
                else
                    evaluate_stat(scenario, scenario_id, snr, options, rows);
            } catch (const ConfigError&) {
                throw;
            } catch (const NumericalError& e) {
                throw SweepError(scenario_id + " at " + format_double(snr) + " dB", e, true);
            } catch (const std::exception& e) {
                throw SweepError(scenario_id + " at " + format_double(snr) + " dB", e, false);
            }
        }
    }
    return rows;
}

std::vector<ResultRow> run_sweep(const ScenarioSpec& spec, const SweepOptions& options) {
    spec.validate();
    if (options.axis == SweepAxis::snr) return evaluate_scenario(build_scenario(spec), spec.name, options);
    if (options.axis_values.empty()) throw ConfigError("axis", "sweep needs at least one axis value");
    std::vector<ResultRow> rows;
    for (double v : options.axis_values) {
        ScenarioSpec point = spec;
        switch (options.axis) {
            case SweepAxis::kappa_max: point.kappa_max = v; break;
            case SweepAxis::n_antennas:
                if (v != std::floor(v)) throw ConfigError("n", "antenna counts must be integers");
                point.n = static_cast<int>(v);
                break;
            case SweepAxis::tau:
                if (v != std::floor(v)) throw ConfigError("tau", "training lengths must be integers");
                point.tau = {TauModeKind::fixed, static_cast<int>(v)};
                break;
            case SweepAxis::snr: break;
        }
        point.validate();
        const std::string id = spec.name + "/" + std::string(to_string(options.axis)) + "=" + format_double(v);
        auto part = evaluate_scenario(build_scenario(point), id, options);
        rows.insert(rows.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    fields.push_back(std::move(cur));
    return fields;
}

template <class T>
T read_number(const std::string& s, const char* what) {
    T out{};
    const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw std::invalid_argument(std::string("bad ") + what + " field '" + s + "'");
    return out;
}

}  // namespace

std::string rows_to_csv(const std::vector<ResultRow>& rows) {
    std::string out = kCsvHeader;
    out += '\n';
    for (const ResultRow& r : rows) {
        out += csv_field(r.scenario_id);
        out += ',' + csv_field(r.scheme);
        out += ',' + format_double(r.snr_db);
        out += ',' + std::to_string(r.user_id);
        out += ',' + format_double(r.se_value);
        out += ',' + (r.se_stderr ? format_double(*r.se_stderr) : std::string());
        out += ',' + (r.se_de ? format_double(*r.se_de) : std::string());
        out += ',' + std::to_string(r.tau_used);
        out += ',' + format_double(r.prelog);
        out += ',' + std::to_string(r.seed);
        out += '\n';
    }
    return out;
}

std::vector<ResultRow> rows_from_csv(std::string_view text) {
    std::vector<ResultRow> rows;
    std::size_t pos = 0;
    bool header = true;
    while (pos < text.size()) {
        const auto end = text.find('\n', pos);
        const std::string_view line = text.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos);
        pos = end == std::string_view::npos ? text.size() : end + 1;
        if (line.empty()) continue;
        if (header) {
            if (line != kCsvHeader) throw std::invalid_argument("unexpected CSV header");
            header = false;
            continue;
        }
        const auto f = split_csv_line(line);
        if (f.size() != 10) throw std::invalid_argument("CSV row needs 10 fields");
        ResultRow r;
        r.scenario_id = f[0];
        r.scheme = f[1];
        r.snr_db = read_number<double>(f[2], "snr_db");
        r.user_id = read_number<int>(f[3], "user_id");
        r.se_value = read_number<double>(f[4], "se_value");
        if (!f[5].empty()) r.se_stderr = read_number<double>(f[5], "se_stderr");
        if (!f[6].empty()) r.se_de = read_number<double>(f[6], "se_de");
        r.tau_used = read_number<int>(f[7], "tau_used");
        r.prelog = read_number<double>(f[8], "prelog");
        r.seed = read_number<std::uint64_t>(f[9], "seed");
        rows.push_back(std::move(r));
    }
    return rows;
}

std::string rows_to_json(const std::vector<ResultRow>& rows) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const ResultRow& r : rows) {
        nlohmann::ordered_json o;
        o["scenario_id"] = r.scenario_id;
        o["scheme"] = r.scheme;
        o["snr_db"] = r.snr_db;
        o["user_id"] = r.user_id;
        o["se_value"] = r.se_value;
        o["se_stderr"] = r.se_stderr ? nlohmann::ordered_json(*r.se_stderr) : nlohmann::ordered_json(nullptr);
        o["se_de"] = r.se_de ? nlohmann::ordered_json(*r.se_de) : nlohmann::ordered_json(nullptr);
        o["tau_used"] = r.tau_used;
        o["prelog"] = r.prelog;
        o["seed"] = r.seed;
        arr.push_back(std::move(o));
    }
    return arr.dump(1) + "\n";
}

std::vector<ResultRow> rows_from_json(std::string_view text) {
    const auto arr = nlohmann::json::parse(text);
    if (!arr.is_array()) throw std::invalid_argument("expected a JSON array");
    std::vector<ResultRow> rows;
    for (const auto& o : arr) {
        ResultRow r;
        r.scenario_id = o.at("scenario_id").get<std::string>();
        r.scheme = o.at("scheme").get<std::string>();
        r.snr_db = o.at("snr_db").get<double>();
        r.user_id = o.at("user_id").get<int>();
        r.se_value = o.at("se_value").get<double>();
        if (!o.at("se_stderr").is_null()) r.se_stderr = o.at("se_stderr").get<double>();
        if (!o.at("se_de").is_null()) r.se_de = o.at("se_de").get<double>();
        r.tau_used = o.at("tau_used").get<int>();
        r.prelog = o.at("prelog").get<double>();
        r.seed = o.at("seed").get<std::uint64_t>();
        rows.push_back(std::move(r));
    }
    return rows;
}

void emit_results(const std::vector<ResultRow>& rows, OutputFormat format, const std::string& path) {
    if (rows.empty()) throw std::invalid_argument("emit_results: no rows to write");
    const std::string text = format == OutputFormat::csv ? rows_to_csv(rows) : rows_to_json(rows);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::ios_base::failure("cannot open '" + path + "' for writing");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    out.flush();
    if (!out) throw std::ios_base::failure("failed writing '" + path + "'");
}

// ---------------------------------------------------------------------------
// Figure presets

std::string_view to_string(FigureId v) {
    switch (v) {
        case FigureId::fig1a: return "fig1a";
        case FigureId::fig1b: return "fig1b";
        case FigureId::fig2a: return "fig2a";
        case FigureId::fig2b: return "fig2b";
        case FigureId::fig4a: return "fig4a";
        case FigureId::fig4b: return "fig4b";
        case FigureId::fig5: return "fig5";
    }
    return "?";
}

const std::vector<FigureId>& all_figures() {
    static const std::vector<FigureId> figures = {FigureId::fig1a, FigureId::fig1b, FigureId::fig2a, FigureId::fig2b,
                                                  FigureId::fig4a, FigureId::fig4b, FigureId::fig5};
    return figures;
}

std::optional<FigureId> parse_figure_id(std::string_view s) {
    for (FigureId f : all_figures())
        if (to_string(f) == s) return f;
    return std::nullopt;
}

namespace {

constexpr std::uint64_t kSeedFig1 = 1001;
constexpr std::uint64_t kSeedFig2 = 2002;
constexpr std::uint64_t kSeedFig4 = 4004;
constexpr std::uint64_t kSeedFig5 = 5005;

ScenarioSpec single_cell_base(std::uint64_t seed) {
    ScenarioSpec s;
    s.seed = seed;
    return s;
}

ScenarioSpec three_cell_base(std::uint64_t seed) {
    ScenarioSpec s;
    s.layout = Layout::three_cell_edge;
    s.l = 3;
    s.placement = Placement::cell_edge;
    s.seed = seed;
    return s;
}

std::string kappa_tag(double kappa) { return "kappa_max=" + format_double(kappa); }

}  // namespace

std::vector<ScenarioSpec> figure_presets(FigureId figure) {
    std::vector<ScenarioSpec> out;
    switch (figure) {
        case FigureId::fig1a:
            for (double kappa : {0.0, 0.5, 4.0, 10.0}) {
                for (TauMode tau : {TauMode{TauModeKind::minimum, 0}, TauMode{TauModeKind::optimal, 0},
                                    TauMode{TauModeKind::fixed, 120}}) {
                    ScenarioSpec s = single_cell_base(kSeedFig1);
                    s.kappa_max = kappa;
                    s.tau = tau;
                    s.name = "fig1a";
                    out.push_back(s);
                }
            }
            break;
        case FigureId::fig1b:
            for (double kappa : {0.0, 0.5, 4.0, 10.0}) {
                ScenarioSpec s = single_cell_base(kSeedFig1);
                s.kappa_max = kappa;
                s.tau = {TauModeKind::optimal, 0};
                s.name = "fig1b";
                out.push_back(s);
            }
            break;
        case FigureId::fig2a:
        case FigureId::fig2b:
            for (double kappa : {0.5, 1.5, 4.0, 10.0}) {
                ScenarioSpec s = single_cell_base(kSeedFig2);
                s.kappa_max = kappa;
                s.tau = {TauModeKind::optimal, 0};
                s.propagation = figure == FigureId::fig2a ? Propagation::ordinary : Propagation::favorable;
                s.name = std::string(to_string(figure));
                out.push_back(s);
            }
            break;
        case FigureId::fig4a:
        case FigureId::fig4b:
            for (double kappa : {0.5, 1.5, 4.0, 10.0}) {
                ScenarioSpec s = three_cell_base(kSeedFig4);
                s.kappa_max = kappa;
                s.propagation = figure == FigureId::fig4a ? Propagation::ordinary : Propagation::favorable;
                s.name = std::string(to_string(figure));
                out.push_back(s);
            }
            break;
        case FigureId::fig5:
            for (double kappa : {1.0, 2.0}) {
                ScenarioSpec s = three_cell_base(kSeedFig5);
                s.kappa_max = kappa;
                s.name = "fig5";
                out.push_back(s);
            }
            break;
    }
    return out;
}

std::vector<std::pair<double, double>> mean_curve(const std::vector<ResultRow>& rows, std::string_view scenario_id,
                                                  std::string_view scheme, const std::vector<int>& user_ids) {
    std::map<double, std::vector<double>> by_snr;
    for (const ResultRow& r : rows) {
        if (r.scenario_id != scenario_id || r.scheme != scheme) continue;
        if (!user_ids.empty() && std::find(user_ids.begin(), user_ids.end(), r.user_id) == user_ids.end()) continue;
        by_snr[r.snr_db].push_back(r.se_value);
    }
    std::vector<std::pair<double, double>> out;
    for (const auto& [snr, values] : by_snr) out.emplace_back(snr, pairwise_sum(values) / double(values.size()));
    return out;
}

CurveComparison compare_curves(std::string label, const std::vector<std::pair<double, double>>& conv,
                               const std::vector<std::pair<double, double>>& stat) {
    if (conv.size() != stat.size() || conv.empty()) throw std::invalid_argument("compare_curves: grids differ");
    CurveComparison c;
    c.label = std::move(label);
    c.crossover_db = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < conv.size(); ++i) {
        if (conv[i].first != stat[i].first) throw std::invalid_argument("compare_curves: grids differ");
        const double d = stat[i].second - conv[i].second;
        if (d > 0.0) {
            if (i == 0) {
                c.crossover_db = conv[0].first;
            } else {
                const double d0 = stat[i - 1].second - conv[i - 1].second;
                const double x0 = conv[i - 1].first, x1 = conv[i].first;
                c.crossover_db = x0 + (x1 - x0) * (-d0) / (d - d0);
            }
            break;
        }
    }
    c.high_snr_db = conv.back().first;
    c.high_snr_gain = (stat.back().second - conv.back().second) / conv.back().second;
    return c;
}

namespace {

std::string check_line(bool ok, const std::string& text) { return (ok ? "PASS " : "FAIL ") + text; }

std::string scheme_for(const ScenarioSpec& s, SchemeFamily f) {
    const bool single = s.l == 1;
    if (f == SchemeFamily::conv) return std::string(scheme_name(single ? Scheme::conv_single : Scheme::conv_multi));
    return std::string(scheme_name(single ? Scheme::stat_single : Scheme::stat_multi));
}

// Copy of cell j as an isolated single cell with identical local statistics.
Scenario matched_single_cell(const Scenario& multi, int j) {
    Scenario single;
    single.spec = multi.spec;
    single.spec.layout = Layout::single_cell;
    single.spec.l = 1;
    const int K = multi.spec.k;
    single.geometry.cell_centers = {multi.geometry.cell_centers[static_cast<std::size_t>(j)]};
    single.geometry.cell_radius = multi.geometry.cell_radius;
    single.geometry.pathloss_exponent = multi.geometry.pathloss_exponent;
    single.geometry.user_positions = {multi.geometry.user_positions[static_cast<std::size_t>(j)]};
    single.kappa.assign(multi.kappa.begin() + j * K, multi.kappa.begin() + (j + 1) * K);
    single.local_aoa.assign(multi.local_aoa.begin() + j * K, multi.local_aoa.begin() + (j + 1) * K);
    single.profiles = multi.local_profiles(j);
    return single;
}

void flag_stderr(const std::vector<ResultRow>& rows, std::vector<std::string>& checks) {
    std::size_t flagged = 0, checked = 0;
    for (const ResultRow& r : rows) {
        if (!r.se_stderr || r.snr_db > 20.0) continue;
        ++checked;
        if (*r.se_stderr > 0.02 * r.se_value) ++flagged;
    }
    if (checked > 0)
        checks.push_back(check_line(flagged == 0, "Monte Carlo stderr within 2% of SE at SNR <= 20 dB (" +
                                                      std::to_string(flagged) + " of " + std::to_string(checked) +
                                                      " rows flagged)"));
}

bool nondecreasing(const std::vector<double>& v, double tol = 0.0) {
    for (std::size_t i = 1; i < v.size(); ++i)
        if (v[i] < v[i - 1] - tol) return false;
    return true;
}

std::vector<double> values_of(const std::vector<std::pair<double, double>>& curve) {
    std::vector<double> out;
    for (const auto& p : curve) out.push_back(p.second);
    return out;
}

}  // namespace

ReproduceResult reproduce_figure(FigureId figure, const ReproduceOptions& options) {
    ReproduceResult res;
    res.figure = figure;
    std::vector<ScenarioSpec> specs = figure_presets(figure);
    for (ScenarioSpec& s : specs) {
        if (options.trials) s.trials = *options.trials;
        if (options.seed) s.seed = *options.seed;
        if (options.log_base) s.log_base = *options.log_base;
    }
    SweepOptions sweep;
    sweep.mode = options.mode.value_or(EvalMode::both);
    sweep.workers = options.workers;

    switch (figure) {
        case FigureId::fig1a: {
            sweep.schemes = {SchemeFamily::conv};
            std::map<double, std::map<std::string, std::vector<double>>> curves;  // kappa -> tau tag -> mean SE
            for (const ScenarioSpec& s : specs) {
                const std::string id = "fig1a/" + kappa_tag(s.kappa_max) + "/tau=" + to_string(s.tau);
                auto rows = evaluate_scenario(build_scenario(s), id, sweep);
                curves[s.kappa_max][to_string(s.tau)] = values_of(mean_curve(rows, id, "conv_single"));
                res.rows.insert(res.rows.end(), rows.begin(), rows.end());
            }
            bool opt_best = true, long_worse = true, kappa_helps = true;
            std::vector<double> previous;
            for (auto& [kappa, by_tau] : curves) {
                const auto& best = by_tau["optimal"];
                for (std::size_t i = 0; i < best.size(); ++i) {
                    const double tol = 0.01 * best[i];
                    if (best[i] < by_tau["minimum"][i] - tol || best[i] < by_tau["120"][i] - tol) opt_best = false;
                }
                if (kappa == 10.0)
                    for (std::size_t i = 0; i < best.size(); ++i)
                        if (by_tau["minimum"][i] < by_tau["120"][i]) long_worse = false;
                if (!previous.empty())
                    for (std::size_t i = 0; i < best.size(); ++i)
                        if (best[i] < previous[i]) kappa_helps = false;
                previous = best;
            }
            res.checks.push_back(check_line(opt_best, "tau* is within 1% of the best of {K, tau*, K+100} at every point"));
            res.checks.push_back(check_line(long_worse, "kappa_max=10: SE(tau=K) >= SE(tau=K+100) at every SNR"));
            res.checks.push_back(check_line(kappa_helps, "SE at tau* is nondecreasing in kappa_max"));
            break;
        }
        case FigureId::fig1b: {
            sweep.schemes = {SchemeFamily::conv};
            sweep.mode = EvalMode::de;
            std::map<double, std::vector<int>> taus;
            for (const ScenarioSpec& s : specs) {
                const Scenario sc = build_scenario(s);
                const std::vector<UserLinkProfile> local = sc.local_profiles(0);
                for (double snr : s.snr_db) {
                    const TrainingSolution sol = solve_tau_star(local, sc.config(snr, s.k));
                    const char* method = sol.method == TauMethod::boundary      ? "boundary"
                                         : sol.method == TauMethod::fixed_point ? "fixed_point"
                                                                                : "bisection";
                    res.tau_table.push_back({s.kappa_max, snr, sol.tau_star, sol.tau_continuous, method});
                    taus[s.kappa_max].push_back(sol.tau_star);
                }
                const std::string id = "fig1b/" + kappa_tag(s.kappa_max);
                auto rows = evaluate_scenario(sc, id, sweep);
                res.rows.insert(res.rows.end(), rows.begin(), rows.end());
            }
            bool ordered = true;
            for (std::size_t i = 0; i < taus[0.0].size(); ++i)
                if (taus[10.0][i] > taus[0.0][i]) ordered = false;
            std::vector<double> rayleigh(taus[0.0].begin(), taus[0.0].end());
            res.checks.push_back(check_line(ordered, "tau*(kappa_max=10) <= tau*(kappa_max=0) at every SNR"));
            res.checks.push_back(check_line(nondecreasing(rayleigh), "tau*(kappa_max=0) is nondecreasing in SNR"));
            const int k = specs.front().k;
            const int at_k = static_cast<int>(std::count(taus[10.0].begin(), taus[10.0].end(), k));
            res.checks.push_back(check_line(at_k * 2 >= static_cast<int>(taus[10.0].size()),
                                            "tau*(kappa_max=10) equals K on at least half of the SNR grid (" +
                                                std::to_string(at_k) + " of " + std::to_string(taus[10.0].size()) +
                                                ")"));
            break;
        }
        case FigureId::fig2a:
        case FigureId::fig2b:
        case FigureId::fig4a:
        case FigureId::fig4b: {
            std::vector<double> stat_high;
            for (const ScenarioSpec& s : specs) {
                const std::string id = std::string(to_string(figure)) + "/" + kappa_tag(s.kappa_max);
                auto rows = evaluate_scenario(build_scenario(s), id, sweep);
                const auto conv = mean_curve(rows, id, scheme_for(s, SchemeFamily::conv));
                const auto stat = mean_curve(rows, id, scheme_for(s, SchemeFamily::stat));
                res.comparisons.push_back(compare_curves(id, conv, stat));
                stat_high.push_back(stat.back().second);
                res.rows.insert(res.rows.end(), rows.begin(), rows.end());
            }
            res.checks.push_back(
                check_line(nondecreasing(stat_high), "statistical SE at the highest SNR grows with kappa_max"));
            const CurveComparison& strongest = res.comparisons.back();
            res.checks.push_back(check_line(std::isfinite(strongest.crossover_db),
                                            "statistical combining overtakes conventional at kappa_max=10"));
            break;
        }
        case FigureId::fig5: {
            std::map<double, std::pair<CurveComparison, CurveComparison>> by_kappa;
            std::vector<int> cell0;
            for (int k = 0; k < specs.front().k; ++k) cell0.push_back(k);
            for (const ScenarioSpec& s : specs) {
                const Scenario multi = build_scenario(s);
                const std::string multi_id = "fig5/" + kappa_tag(s.kappa_max) + "/multi";
                const std::string single_id = "fig5/" + kappa_tag(s.kappa_max) + "/single";
                auto rows_m = evaluate_scenario(multi, multi_id, sweep);
                auto rows_s = evaluate_scenario(matched_single_cell(multi, 0), single_id, sweep);
                const CurveComparison cm = compare_curves(multi_id, mean_curve(rows_m, multi_id, "conv_multi", cell0),
                                                          mean_curve(rows_m, multi_id, "stat_multi", cell0));
                const CurveComparison cs = compare_curves(single_id, mean_curve(rows_s, single_id, "conv_single"),
                                                          mean_curve(rows_s, single_id, "stat_single"));
                res.comparisons.push_back(cm);
                res.comparisons.push_back(cs);
                by_kappa[s.kappa_max] = {cm, cs};
                res.rows.insert(res.rows.end(), rows_m.begin(), rows_m.end());
                res.rows.insert(res.rows.end(), rows_s.begin(), rows_s.end());
            }
            const auto& [m1, s1] = by_kappa[1.0];
            res.checks.push_back(check_line(std::isfinite(m1.crossover_db) && m1.crossover_db <= s1.crossover_db - 4.0,
                                            "kappa_max=1: multi-cell crossover at least 4 dB below single-cell (" +
                                                format_double(m1.crossover_db) + " vs " +
                                                format_double(s1.crossover_db) + " dB)"));
            const auto& [m2, s2] = by_kappa[2.0];
            const bool gain_ok = m2.high_snr_gain > 0.0 && m2.high_snr_gain >= 2.0 * s2.high_snr_gain;
            res.checks.push_back(check_line(gain_ok, "kappa_max=2: multi-cell statistical gain at least twice the "
                                                     "single-cell gain (" +
                                                         format_double(100.0 * m2.high_snr_gain) + "% vs " +
                                                         format_double(100.0 * s2.high_snr_gain) + "%)"));
            break;
        }
    }
    flag_stderr(res.rows, res.checks);
    return res;
}

std::string summary_text(const ReproduceResult& r) {
    std::ostringstream o;
    o << "figure " << to_string(r.figure) << "\n";
    o << "rows " << r.rows.size() << "\n";
    for (const CurveComparison& c : r.comparisons) {
        o << "comparison " << c.label << " crossover_db="
          << (std::isfinite(c.crossover_db) ? format_double(c.crossover_db) : std::string("none"))
          << " gain_at_" << format_double(c.high_snr_db) << "dB=" << format_double(100.0 * c.high_snr_gain) << "%\n";
    }
    for (const TauStarEntry& e : r.tau_table)
        o << "tau_star kappa_max=" << format_double(e.kappa_max) << " snr_db=" << format_double(e.snr_db)
          << " tau=" << e.tau_star << " continuous=" << format_double(e.tau_continuous) << " method=" << e.method
          << "\n";
    for (const std::string& c : r.checks) o << c << "\n";
    return o.str();
}

std::string tau_table_csv(const std::vector<TauStarEntry>& table) {
    std::string out = "kappa_max,snr_db,tau_star,tau_continuous,method\n";
    for (const TauStarEntry& e : table)
        out += format_double(e.kappa_max) + "," + format_double(e.snr_db) + "," + std::to_string(e.tau_star) + "," +
               format_double(e.tau_continuous) + "," + e.method + "\n";
    return out;
}

}  // namespace mmimo
