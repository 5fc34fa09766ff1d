// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "mmimo/channel_model.hpp"
#include "mmimo/estimation.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mmimo {

enum class Layout { single_cell, three_cell_edge };
enum class Correlation { one_ring, exponential, identity };
enum class Propagation { ordinary, favorable };
enum class PathlossReference { cell_edge, none };
enum class TauModeKind { minimum, optimal, fixed };

struct TauMode {
    TauModeKind kind = TauModeKind::minimum;
    int value = 0;  // used when kind == fixed
    bool operator==(const TauMode&) const = default;
};

/// Experiment description read from a scenario file. The file grammar is documented in
/// docs/scenario_format.md.
struct ScenarioSpec {
    std::string name = "scenario";
    Layout layout = Layout::single_cell;
    int n = 150;
    int k = 20;
    int l = 1;
    int t = 500;
    double radius_m = 150.0;
    double alpha = 2.5;
    double kappa_max = 0.0;
    Correlation correlation = Correlation::one_ring;
    double ring_spacing = 0.5;
    double exp_corr = 0.5;
    Placement placement = Placement::uniform_disk;
    Propagation propagation = Propagation::ordinary;
    PathlossReference pathloss_reference = PathlossReference::cell_edge;
    std::uint64_t seed = 1;
    std::size_t trials = 1000;
    std::vector<double> snr_db = {-10, -5, 0, 5, 10, 15, 20, 25, 30};
    // Training SNR: fixed at this value when set, otherwise the data SNR plus the offset.
    std::optional<double> training_snr_db;
    double training_snr_offset_db = 0.0;
    TauMode tau;
    LogBase log_base = LogBase::natural;

    bool operator==(const ScenarioSpec&) const = default;

    /// Throws ConfigError naming the offending field.
    void validate() const;
};

/// Parses the flat `key = value` format. Errors carry the line number and key.
ScenarioSpec parse_scenario(std::string_view text);
ScenarioSpec load_scenario(const std::string& path);

/// Canonical text form; parse_scenario(serialize_scenario(s)) == s.
std::string serialize_scenario(const ScenarioSpec& spec);

/// A scenario resolved into geometry, Rician factors and link statistics.
struct Scenario {
    ScenarioSpec spec;
    ScenarioGeometry geometry;
    std::vector<double> kappa;                // [cell * K + user]
    std::vector<double> local_aoa;            // arrival angle of each user at its own base station
    std::vector<UserLinkProfile> profiles;    // (j, l, k) at index (j L + l) K + k

    int n_cells() const { return spec.l; }
    int n_users() const { return spec.k; }

    LinkTable links() const;
    /// Copies of the local links of base station j (the single-cell view of cell j).
    std::vector<UserLinkProfile> local_profiles(int j) const;
    /// Configuration at one SNR point with training length tau.
    SystemConfig config(double snr_db, int tau) const;
};

Scenario build_scenario(const ScenarioSpec& spec);

std::string_view to_string(Layout v);
std::string_view to_string(Correlation v);
std::string_view to_string(Propagation v);
std::string_view to_string(Placement v);
std::string_view to_string(PathlossReference v);
std::string_view to_string(LogBase v);
std::string to_string(const TauMode& v);

/// Shortest decimal text that reads back to the same double.
std::string format_double(double v);

}  // namespace mmimo
