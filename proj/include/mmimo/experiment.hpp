// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "mmimo/scenario.hpp"
#include "mmimo/training.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mmimo {

/// One spectral-efficiency value for one (scheme, SNR point, user).
struct ResultRow {
    std::string scenario_id;
    std::string scheme;
    double snr_db = 0.0;
    int user_id = 0;  // j * K + k
    double se_value = 0.0;
    std::optional<double> se_stderr;  // Monte Carlo rows only
    std::optional<double> se_de;
    int tau_used = 0;  // 0 for the statistical scheme, which sends no pilots
    double prelog = 1.0;
    std::uint64_t seed = 0;

    bool operator==(const ResultRow&) const = default;
};

enum class SchemeFamily { conv, stat };
enum class EvalMode { mc, de, both };
enum class SweepAxis { snr, kappa_max, n_antennas, tau };
enum class OutputFormat { csv, json };

struct SweepOptions {
    std::vector<SchemeFamily> schemes = {SchemeFamily::conv, SchemeFamily::stat};
    EvalMode mode = EvalMode::both;
    SweepAxis axis = SweepAxis::snr;
    std::vector<double> axis_values;  // ignored for the snr axis
    unsigned workers = 0;
};

/// Thrown when a sweep point fails; the message carries the scenario id and SNR.
class SweepError : public std::runtime_error {
public:
    SweepError(const std::string& context, const std::exception& cause, bool numerical);
    bool numerical() const { return numerical_; }

private:
    bool numerical_;
};

/// Training length used by the conventional scheme at one SNR point.
int resolve_tau(const Scenario& scenario, double snr_db);

/// Evaluates every requested scheme at every SNR point of `scenario`; rows are ordered by
/// SNR, scheme, then user. Monte Carlo draws reuse the scenario seed at every point.
std::vector<ResultRow> evaluate_scenario(const Scenario& scenario, const std::string& scenario_id,
                                         const SweepOptions& options);

/// Rebuilds the scenario at each axis value and concatenates evaluate_scenario; the axis
/// value is appended to the scenario id as "name/axis=value".
std::vector<ResultRow> run_sweep(const ScenarioSpec& spec, const SweepOptions& options);

std::string rows_to_csv(const std::vector<ResultRow>& rows);
std::string rows_to_json(const std::vector<ResultRow>& rows);
std::vector<ResultRow> rows_from_csv(std::string_view text);
std::vector<ResultRow> rows_from_json(std::string_view text);

/// Writes rows to `path`. Throws std::invalid_argument for an empty row set and
/// std::ios_base::failure when the file cannot be written.
void emit_results(const std::vector<ResultRow>& rows, OutputFormat format, const std::string& path);

std::string_view to_string(SchemeFamily v);
std::string_view to_string(EvalMode v);
std::string_view to_string(SweepAxis v);

// ---------------------------------------------------------------------------
// Figure presets

enum class FigureId { fig1a, fig1b, fig2a, fig2b, fig4a, fig4b, fig5 };

std::string_view to_string(FigureId v);
std::optional<FigureId> parse_figure_id(std::string_view s);
const std::vector<FigureId>& all_figures();

struct ReproduceOptions {
    std::optional<std::size_t> trials;  // overrides the preset
    std::optional<std::uint64_t> seed;
    std::optional<EvalMode> mode;
    std::optional<LogBase> log_base;
    unsigned workers = 0;
};

/// Crossover of the mean statistical SE over the mean conventional SE: the first SNR at
/// which statistical SE exceeds conventional SE, linearly interpolated between grid points.
struct CurveComparison {
    std::string label;
    double crossover_db = 0.0;  // +inf when statistical never exceeds conventional
    double high_snr_db = 0.0;
    double high_snr_gain = 0.0;  // (stat - conv) / conv at the highest SNR point
};

struct TauStarEntry {
    double kappa_max = 0.0;
    double snr_db = 0.0;
    int tau_star = 0;
    double tau_continuous = 0.0;
    std::string method;
};

struct ReproduceResult {
    FigureId figure = FigureId::fig1a;
    std::vector<ResultRow> rows;
    std::vector<TauStarEntry> tau_table;  // fig1b only
    std::vector<CurveComparison> comparisons;
    std::vector<std::string> checks;  // one line per qualitative check, prefixed PASS/FAIL
};

/// Scenario specs used by a preset (one per curve family).
std::vector<ScenarioSpec> figure_presets(FigureId figure);

ReproduceResult reproduce_figure(FigureId figure, const ReproduceOptions& options);

std::string summary_text(const ReproduceResult& result);
std::string tau_table_csv(const std::vector<TauStarEntry>& table);

/// Mean over `user_ids` (all users when empty) of se_value per SNR point for one scheme and
/// scenario id, in SNR order.
std::vector<std::pair<double, double>> mean_curve(const std::vector<ResultRow>& rows, std::string_view scenario_id,
                                                  std::string_view scheme, const std::vector<int>& user_ids = {});

CurveComparison compare_curves(std::string label, const std::vector<std::pair<double, double>>& conv,
                               const std::vector<std::pair<double, double>>& stat);

}  // namespace mmimo
