// SPDX-License-Identifier: Apache-2.0
#include "mmimo/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

namespace mmimo {

namespace {

constexpr double kPi = std::numbers::pi;

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

template <class E>
struct EnumTable {
    std::vector<std::pair<std::string_view, E>> entries;

    E parse(std::string_view word, const std::string& field, const std::string& where) const {
        for (const auto& [name, value] : entries)
            if (name == word) return value;
        std::string allowed;
        for (const auto& [name, value] : entries) allowed += (allowed.empty() ? "" : ", ") + std::string(name);
        throw ConfigError(field, where + "expected one of {" + allowed + "}, got '" + std::string(word) + "'");
    }
    std::string_view name(E v) const {
        for (const auto& [name, value] : entries)
            if (value == v) return name;
        return "?";
    }
};

const EnumTable<Layout> kLayouts{{{"single_cell", Layout::single_cell}, {"three_cell_edge", Layout::three_cell_edge}}};
const EnumTable<Correlation> kCorrelations{
    {{"one_ring", Correlation::one_ring}, {"exponential", Correlation::exponential}, {"identity", Correlation::identity}}};
const EnumTable<Propagation> kPropagations{
    {{"ordinary", Propagation::ordinary}, {"favorable", Propagation::favorable}}};
const EnumTable<Placement> kPlacements{
    {{"uniform_disk", Placement::uniform_disk}, {"cell_edge", Placement::cell_edge}}};
const EnumTable<PathlossReference> kReferences{
    {{"cell_edge", PathlossReference::cell_edge}, {"none", PathlossReference::none}}};
const EnumTable<LogBase> kLogBases{{{"natural", LogBase::natural}, {"base2", LogBase::base2}}};

long long parse_integer(std::string_view v, const std::string& field, const std::string& where) {
    long long out = 0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size())
        throw ConfigError(field, where + "expected an integer, got '" + std::string(v) + "'");
    return out;
}

std::uint64_t parse_u64(std::string_view v, const std::string& field, const std::string& where) {
    std::uint64_t out = 0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size())
        throw ConfigError(field, where + "expected an unsigned 64-bit integer, got '" + std::string(v) + "'");
    return out;
}

double parse_real(std::string_view v, const std::string& field, const std::string& where) {
    double out = 0.0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size() || !std::isfinite(out))
        throw ConfigError(field, where + "expected a real number, got '" + std::string(v) + "'");
    return out;
}

int parse_int(std::string_view v, const std::string& field, const std::string& where) {
    const long long x = parse_integer(v, field, where);
    if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max())
        throw ConfigError(field, where + "integer out of range");
    return static_cast<int>(x);
}

// "a, b, c" or "lo:hi:step" (inclusive of hi up to rounding).
std::vector<double> parse_real_list(std::string_view v, const std::string& field, const std::string& where) {
    std::vector<double> out;
    if (v.find(':') != std::string_view::npos) {
        std::vector<double> parts;
        std::size_t pos = 0;
        while (true) {
            const auto next = v.find(':', pos);
            parts.push_back(parse_real(trim(v.substr(pos, next - pos)), field, where));
            if (next == std::string_view::npos) break;
            pos = next + 1;
        }
        if (parts.size() != 3) throw ConfigError(field, where + "range must read lo:hi:step");
        const double lo = parts[0], hi = parts[1], step = parts[2];
        if (!(step > 0.0) || hi < lo) throw ConfigError(field, where + "range needs step > 0 and hi >= lo");
        const auto count = static_cast<long long>(std::floor((hi - lo) / step + 1e-9));
        if (count > 100000) throw ConfigError(field, where + "range has too many points");
        for (long long i = 0; i <= count; ++i) out.push_back(lo + double(i) * step);
        return out;
    }
    std::size_t pos = 0;
    while (true) {
        const auto next = v.find(',', pos);
        out.push_back(parse_real(trim(v.substr(pos, next - pos)), field, where));
        if (next == std::string_view::npos) break;
        pos = next + 1;
    }
    return out;
}

TauMode parse_tau(std::string_view v, const std::string& field, const std::string& where) {
    if (v == "minimum") return {TauModeKind::minimum, 0};
    if (v == "optimal") return {TauModeKind::optimal, 0};
    long long x = 0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), x);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size())
        throw ConfigError(field, where + "expected 'minimum', 'optimal' or an integer, got '" + std::string(v) + "'");
    if (x < 0 || x > std::numeric_limits<int>::max()) throw ConfigError(field, where + "integer out of range");
    return {TauModeKind::fixed, static_cast<int>(x)};
}

bool valid_name(std::string_view v) {
    if (v.empty()) return false;
    return std::all_of(v.begin(), v.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
    });
}

double wrap_angle(double a) {
    double w = std::fmod(a + kPi, 2.0 * kPi);
    if (w < 0.0) w += 2.0 * kPi;
    return w - kPi;
}

// Moves each arrival angle to the nearest unused point of the grid sin(theta) = -1 + 2m/N,
// keeping the front/back side of the array, so that the steering vectors are orthogonal.
std::vector<double> snap_to_orthogonal_grid(const std::vector<double>& aoa, int n) {
    if (static_cast<int>(aoa.size()) > n) throw ConfigError("k", "favorable propagation needs K <= N");
    std::vector<bool> used(static_cast<std::size_t>(n), false);
    std::vector<double> out;
    for (double a : aoa) {
        const double target = (std::sin(a) + 1.0) * n / 2.0;
        int best = -1;
        double best_dist = 0.0;
        for (int m = 0; m < n; ++m) {
            if (used[static_cast<std::size_t>(m)]) continue;
            const double d = std::abs(m - target);
            if (best < 0 || d < best_dist) {
                best = m;
                best_dist = d;
            }
        }
        used[static_cast<std::size_t>(best)] = true;
        const double s = -1.0 + 2.0 * best / double(n);
        double snapped = std::cos(a) >= 0.0 ? std::asin(s) : kPi - std::asin(s);
        // Keep away from broadside-forward angles whose one-ring window would be empty.
        if (std::abs(wrap_angle(snapped)) < 1e-3) snapped = kPi - std::asin(s);
        out.push_back(wrap_angle(snapped));
    }
    return out;
}

}  // namespace

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string_view to_string(Layout v) { return kLayouts.name(v); }
std::string_view to_string(Correlation v) { return kCorrelations.name(v); }
std::string_view to_string(Propagation v) { return kPropagations.name(v); }
std::string_view to_string(Placement v) { return kPlacements.name(v); }
std::string_view to_string(PathlossReference v) { return kReferences.name(v); }
std::string_view to_string(LogBase v) { return kLogBases.name(v); }
std::string to_string(const TauMode& v) {
    switch (v.kind) {
        case TauModeKind::minimum: return "minimum";
        case TauModeKind::optimal: return "optimal";
        case TauModeKind::fixed: return std::to_string(v.value);
    }
    return "?";
}

void ScenarioSpec::validate() const {
    if (!valid_name(name)) throw ConfigError("name", "must be non-empty and use only [A-Za-z0-9_.-]");
    if (n < 1) throw ConfigError("n", "must be >= 1");
    if (k < 1) throw ConfigError("k", "must be >= 1");
    if (t < 2) throw ConfigError("t", "must be >= 2");
    if (k >= t) throw ConfigError("t", "K < T required (K=" + std::to_string(k) + ", T=" + std::to_string(t) + ")");
    const int expected_l = layout == Layout::single_cell ? 1 : 3;
    if (l != expected_l)
        throw ConfigError("l", "layout " + std::string(to_string(layout)) + " requires l = " + std::to_string(expected_l));
    if (!(radius_m > kMinUserDistance)) throw ConfigError("radius_m", "must exceed the 1 m minimum user distance");
    if (!(alpha > 0.0)) throw ConfigError("alpha", "must be > 0");
    if (!(kappa_max >= 0.0)) throw ConfigError("kappa_max", "must be >= 0");
    if (!(ring_spacing > 0.0)) throw ConfigError("ring_spacing", "must be > 0");
    if (!(exp_corr >= 0.0 && exp_corr < 1.0)) throw ConfigError("exp_corr", "must lie in [0, 1)");
    if (trials < 1) throw ConfigError("trials", "must be >= 1");
    if (snr_db.empty()) throw ConfigError("snr_db", "needs at least one point");
    if (tau.kind == TauModeKind::fixed) {
        if (tau.value < k)
            throw ConfigError("tau", "K ≤ τ violated (tau=" + std::to_string(tau.value) + ", K=" + std::to_string(k) + ")");
        if (tau.value >= t)
            throw ConfigError("tau", "τ < T violated (tau=" + std::to_string(tau.value) + ", T=" + std::to_string(t) + ")");
    }
    if (tau.kind == TauModeKind::optimal && layout != Layout::single_cell)
        throw ConfigError("tau", "'optimal' is defined for the single_cell layout only");
    if (propagation == Propagation::favorable && k > n) throw ConfigError("propagation", "favorable propagation needs K <= N");
}

ScenarioSpec parse_scenario(std::string_view text) {
    ScenarioSpec s;
    std::set<std::string> seen;

    using Setter = std::function<void(std::string_view, const std::string&, const std::string&)>;
    const std::map<std::string, Setter> setters = {
        {"name", [&](auto v, auto& f, auto& w) {
             if (!valid_name(v)) throw ConfigError(f, w + "must be non-empty and use only [A-Za-z0-9_.-]");
             s.name = std::string(v);
         }},
        {"layout", [&](auto v, auto& f, auto& w) { s.layout = kLayouts.parse(v, f, w); }},
        {"n", [&](auto v, auto& f, auto& w) { s.n = parse_int(v, f, w); }},
        {"k", [&](auto v, auto& f, auto& w) { s.k = parse_int(v, f, w); }},
        {"l", [&](auto v, auto& f, auto& w) { s.l = parse_int(v, f, w); }},
        {"t", [&](auto v, auto& f, auto& w) { s.t = parse_int(v, f, w); }},
        {"radius_m", [&](auto v, auto& f, auto& w) { s.radius_m = parse_real(v, f, w); }},
        {"alpha", [&](auto v, auto& f, auto& w) { s.alpha = parse_real(v, f, w); }},
        {"kappa_max", [&](auto v, auto& f, auto& w) { s.kappa_max = parse_real(v, f, w); }},
        {"correlation", [&](auto v, auto& f, auto& w) { s.correlation = kCorrelations.parse(v, f, w); }},
        {"ring_spacing", [&](auto v, auto& f, auto& w) { s.ring_spacing = parse_real(v, f, w); }},
        {"exp_corr", [&](auto v, auto& f, auto& w) { s.exp_corr = parse_real(v, f, w); }},
        {"placement", [&](auto v, auto& f, auto& w) { s.placement = kPlacements.parse(v, f, w); }},
        {"propagation", [&](auto v, auto& f, auto& w) { s.propagation = kPropagations.parse(v, f, w); }},
        {"pathloss_reference", [&](auto v, auto& f, auto& w) { s.pathloss_reference = kReferences.parse(v, f, w); }},
        {"seed", [&](auto v, auto& f, auto& w) { s.seed = parse_u64(v, f, w); }},
        {"trials", [&](auto v, auto& f, auto& w) {
             const long long x = parse_integer(v, f, w);
             if (x < 1) throw ConfigError(f, w + "must be >= 1");
             s.trials = static_cast<std::size_t>(x);
         }},
        {"snr_db", [&](auto v, auto& f, auto& w) { s.snr_db = parse_real_list(v, f, w); }},
        {"training_snr_db", [&](auto v, auto& f, auto& w) {
             if (v == "coupled")
                 s.training_snr_db.reset();
             else
                 s.training_snr_db = parse_real(v, f, w);
         }},
        {"training_snr_offset_db", [&](auto v, auto& f, auto& w) { s.training_snr_offset_db = parse_real(v, f, w); }},
        {"tau", [&](auto v, auto& f, auto& w) { s.tau = parse_tau(v, f, w); }},
        {"log_base", [&](auto v, auto& f, auto& w) { s.log_base = kLogBases.parse(v, f, w); }},
    };

    std::map<std::string, std::size_t> key_line;
    bool l_given = false;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto end = text.find('\n', pos);
        std::string_view line = text.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos);
        pos = end == std::string_view::npos ? text.size() + 1 : end + 1;
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::string where = "line " + std::to_string(line_no) + ": ";
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw ConfigError("", where + "expected 'key = value'");
        const std::string key(trim(line.substr(0, eq)));
        const std::string_view value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError("", where + "missing key");
        const auto it = setters.find(key);
        if (it == setters.end()) throw ConfigError(key, where + "unknown key");
        if (!seen.insert(key).second) throw ConfigError(key, where + "duplicate key");
        if (value.empty()) throw ConfigError(key, where + "missing value");
        it->second(value, key, where);
        key_line[key] = line_no;
        if (key == "l") l_given = true;
    }
    if (!l_given) s.l = s.layout == Layout::single_cell ? 1 : 3;
    try {
        s.validate();
    } catch (const ConfigError& e) {
        const auto line = key_line.find(e.field());
        if (line == key_line.end()) throw;
        std::string message = e.what();
        const std::string prefix = e.field() + ": ";
        if (message.rfind(prefix, 0) == 0) message.erase(0, prefix.size());
        throw ConfigError(e.field(), "line " + std::to_string(line->second) + ": " + message);
    }
    return s;
}

ScenarioSpec load_scenario(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::ios_base::failure("cannot open scenario file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str());
}

std::string serialize_scenario(const ScenarioSpec& s) {
    std::ostringstream o;
    o << "name = " << s.name << "\n";
    o << "layout = " << to_string(s.layout) << "\n";
    o << "n = " << s.n << "\n";
    o << "k = " << s.k << "\n";
    o << "l = " << s.l << "\n";
    o << "t = " << s.t << "\n";
    o << "radius_m = " << format_double(s.radius_m) << "\n";
    o << "alpha = " << format_double(s.alpha) << "\n";
    o << "kappa_max = " << format_double(s.kappa_max) << "\n";
    o << "correlation = " << to_string(s.correlation) << "\n";
    o << "ring_spacing = " << format_double(s.ring_spacing) << "\n";
    o << "exp_corr = " << format_double(s.exp_corr) << "\n";
    o << "placement = " << to_string(s.placement) << "\n";
    o << "propagation = " << to_string(s.propagation) << "\n";
    o << "pathloss_reference = " << to_string(s.pathloss_reference) << "\n";
    o << "seed = " << s.seed << "\n";
    o << "trials = " << s.trials << "\n";
    o << "snr_db = ";
    for (std::size_t i = 0; i < s.snr_db.size(); ++i) o << (i ? ", " : "") << format_double(s.snr_db[i]);
    o << "\n";
    o << "training_snr_db = " << (s.training_snr_db ? format_double(*s.training_snr_db) : std::string("coupled"))
      << "\n";
    o << "training_snr_offset_db = " << format_double(s.training_snr_offset_db) << "\n";
    o << "tau = " << to_string(s.tau) << "\n";
    o << "log_base = " << to_string(s.log_base) << "\n";
    return o.str();
}

LinkTable Scenario::links() const {
    std::vector<const UserLinkProfile*> ptrs;
    for (const auto& p : profiles) ptrs.push_back(&p);
    return LinkTable(spec.l, spec.k, std::move(ptrs));
}

std::vector<UserLinkProfile> Scenario::local_profiles(int j) const {
    const int L = spec.l, K = spec.k;
    std::vector<UserLinkProfile> out;
    for (int k = 0; k < K; ++k) out.push_back(profiles[static_cast<std::size_t>((j * L + j) * K + k)]);
    return out;
}

SystemConfig Scenario::config(double snr_db, int tau) const {
    SystemConfig c;
    c.n_antennas = spec.n;
    c.n_users = spec.k;
    c.n_cells = spec.l;
    c.coherence_len = spec.t;
    c.training_len = tau;
    c.snr_data = db_to_linear(snr_db);
    c.snr_training = db_to_linear(spec.training_snr_db ? *spec.training_snr_db : snr_db + spec.training_snr_offset_db);
    c.log_base = spec.log_base;
    return c;
}

Scenario build_scenario(const ScenarioSpec& spec) {
    spec.validate();
    Scenario sc;
    sc.spec = spec;
    const int L = spec.l, K = spec.k, N = spec.n;

    const std::vector<Point> centers =
        spec.layout == Layout::single_cell ? std::vector<Point>{Point{}} : three_cell_centers(spec.radius_m);
    RngStream geo = RngStream::substream(spec.seed, StreamTag::geometry, 0);
    sc.geometry = drop_users(centers, spec.radius_m, spec.alpha, K, spec.placement, geo);

    RngStream rician = RngStream::substream(spec.seed, StreamTag::rician, 0);
    for (int l = 0; l < L; ++l)
        for (int k = 0; k < K; ++k) sc.kappa.push_back(rician.uniform(0.0, spec.kappa_max));

    for (int l = 0; l < L; ++l) {
        std::vector<double> aoa;
        for (int k = 0; k < K; ++k) aoa.push_back(sc.geometry.arrival_angle(l, l, k));
        if (spec.propagation == Propagation::favorable) aoa = snap_to_orthogonal_grid(aoa, N);
        sc.local_aoa.insert(sc.local_aoa.end(), aoa.begin(), aoa.end());
    }

    const double reference =
        spec.pathloss_reference == PathlossReference::cell_edge ? std::pow(spec.radius_m, spec.alpha) : 1.0;
    sc.profiles.reserve(static_cast<std::size_t>(L * L * K));
    for (int j = 0; j < L; ++j) {
        for (int l = 0; l < L; ++l) {
            for (int k = 0; k < K; ++k) {
                const bool local = (j == l);
                const double aoa =
                    local ? sc.local_aoa[static_cast<std::size_t>(l * K + k)] : sc.geometry.arrival_angle(j, l, k);
                CMatrix theta;
                switch (spec.correlation) {
                    case Correlation::one_ring: {
                        auto [lo, hi] = one_ring_window(aoa);
                        if (hi - lo < 1e-9) hi = lo + 1e-9;
                        theta = one_ring_correlation(0.0, lo, hi, spec.ring_spacing, N);
                        break;
                    }
                    case Correlation::exponential: theta = exponential_correlation(spec.exp_corr, N); break;
                    case Correlation::identity: theta = CMatrix::Identity(N, N); break;
                }
                const double beta = reference * pathloss(sc.geometry.distance(j, l, k), spec.alpha);
                sc.profiles.push_back(build_profile(beta, sc.kappa[static_cast<std::size_t>(l * K + k)], theta,
                                                    los_steering(aoa, N), local));
            }
        }
    }
    return sc;
}

}  // namespace mmimo
