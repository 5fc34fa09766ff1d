// SPDX-License-Identifier: Apache-2.0
#include "mmimo/channel_model.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace mmimo {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kPanelPoints = 32;
constexpr int kPanels = 64;  // 64 x 32 = 2048 nodes

struct GaussLegendre {
    std::array<double, kPanelPoints> nodes{};
    std::array<double, kPanelPoints> weights{};
};

// Nodes and weights on [-1, 1] by Newton iteration on P_n.
GaussLegendre make_gauss_legendre() {
    GaussLegendre gl;
    const int n = kPanelPoints;
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
            const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        gl.nodes[i] = -x;
        gl.nodes[n - 1 - i] = x;
        gl.weights[i] = w;
        gl.weights[n - 1 - i] = w;
    }
    return gl;
}

const GaussLegendre& gauss_legendre() {
    static const GaussLegendre gl = make_gauss_legendre();
    return gl;
}

double wrap_angle(double a) {
    double w = std::fmod(a + kPi, 2.0 * kPi);
    if (w < 0.0) w += 2.0 * kPi;
    return w - kPi;
}

}  // namespace

std::pair<double, double> one_ring_window(double aoa) {
    const double a = -kPi;
    const double b = aoa - kPi;
    return a <= b ? std::pair{a, b} : std::pair{b, a};
}

CMatrix one_ring_correlation(double theta_center, double theta_min, double theta_max, double spacing, int n) {
    if (n < 1) throw std::invalid_argument("one_ring_correlation: n must be positive");
    if (!(theta_max > theta_min)) throw std::invalid_argument("one_ring_correlation: degenerate angular spread");

    const auto& gl = gauss_legendre();
    const double panel = (theta_max - theta_min) / kPanels;
    std::vector<double> cosines;
    std::vector<double> weights;
    cosines.reserve(kPanels * kPanelPoints);
    weights.reserve(kPanels * kPanelPoints);
    for (int p = 0; p < kPanels; ++p) {
        const double mid = theta_min + (p + 0.5) * panel;
        for (int i = 0; i < kPanelPoints; ++i) {
            cosines.push_back(std::cos(theta_center + mid + 0.5 * panel * gl.nodes[i]));
            weights.push_back(0.5 * panel * gl.weights[i] / (theta_max - theta_min));
        }
    }

    // Toeplitz: entry (u, v) depends on d = u - v only.
    std::vector<cd> lag(n);
    lag[0] = 1.0;
    for (int d = 1; d < n; ++d) {
        double re = 0.0, im = 0.0;
        const double phase = 2.0 * kPi * spacing * d;
        for (std::size_t q = 0; q < cosines.size(); ++q) {
            const double arg = phase * cosines[q];
            re += weights[q] * std::cos(arg);
            im += weights[q] * std::sin(arg);
        }
        lag[d] = {re, im};
    }
    CMatrix theta(n, n);
    for (int u = 0; u < n; ++u) {
        for (int v = 0; v < n; ++v) theta(u, v) = u >= v ? lag[u - v] : std::conj(lag[v - u]);
    }
    return theta;
}

CMatrix exponential_correlation(cd rho, int n) {
    if (n < 1) throw std::invalid_argument("exponential_correlation: n must be positive");
    if (!(std::abs(rho) < 1.0)) throw std::invalid_argument("exponential_correlation: |rho| must be < 1");
    CMatrix theta(n, n);
    for (int u = 0; u < n; ++u) {
        theta(u, u) = 1.0;
        cd p = 1.0;
        for (int v = u + 1; v < n; ++v) {
            p *= rho;
            theta(u, v) = p;
            theta(v, u) = std::conj(p);
        }
    }
    return theta;
}

CVector los_steering(double theta, int n) {
    if (n < 1) throw std::invalid_argument("los_steering: n must be positive");
    CVector z(n);
    const double s = std::sin(theta);
    for (int m = 0; m < n; ++m) z(m) = std::polar(1.0, -m * kPi * s);
    return z;
}

double pathloss(double distance, double alpha) {
    if (!(distance > 0.0)) throw std::invalid_argument("pathloss: distance must be positive");
    return std::pow(distance, -alpha);
}

UserLinkProfile build_profile(double beta, double kappa, const CMatrix& theta, const CVector& los_dir,
                              bool is_local) {
    if (!(beta >= 0.0) || !std::isfinite(beta)) throw std::invalid_argument("build_profile: beta must be >= 0");
    if (!(kappa >= 0.0) || !std::isfinite(kappa)) throw std::invalid_argument("build_profile: kappa must be >= 0");
    if (theta.rows() != theta.cols() || theta.rows() != los_dir.size())
        throw std::invalid_argument("build_profile: dimension mismatch between theta and los_dir");
    if (hermitian_defect(theta) > 1e-10 * std::max(1.0, theta.cwiseAbs().maxCoeff()))
        throw std::invalid_argument("build_profile: theta is not Hermitian");

    HermitianEigen spectrum = hermitian_eigen(theta);
    if (spectrum.values.size() > 0 && spectrum.values.minCoeff() < -kPsdTolerance)
        throw std::invalid_argument("build_profile: theta is not positive semi-definite");

    UserLinkProfile p;
    p.beta = beta;
    p.kappa = kappa;
    p.is_local = is_local;
    p.theta = theta;
    p.los_dir = los_dir;

    const double scatter = is_local ? beta / (1.0 + kappa) : beta;
    const double specular = is_local ? beta * kappa / (1.0 + kappa) : 0.0;
    p.r_cov = scatter * theta;
    symmetrize(p.r_cov);
    p.h_bar = std::sqrt(specular) * los_dir;

    spectrum.values = (scatter * spectrum.values).cwiseMax(0.0);
    p.r_sqrt = from_spectrum(spectrum.vectors, spectrum.values.cwiseSqrt());
    p.r_spectrum = std::move(spectrum);
    return p;
}

CVector sample_channel(const UserLinkProfile& profile, RngStream& rng) {
    CVector z(profile.n());
    rng.fill_complex_normal(z);
    return profile.h_bar + profile.r_sqrt * z;
}

double ScenarioGeometry::distance(int j, int l, int k) const {
    const Point& b = cell_centers.at(j);
    const Point& u = user_positions.at(l).at(k);
    return std::hypot(u.x - b.x, u.y - b.y);
}

double ScenarioGeometry::arrival_angle(int j, int l, int k) const {
    const Point& b = cell_centers.at(j);
    const Point& u = user_positions.at(l).at(k);
    return wrap_angle(std::atan2(u.y - b.y, u.x - b.x));
}

std::vector<Point> three_cell_centers(double cell_radius) {
    std::vector<Point> centers;
    for (int l = 0; l < 3; ++l) {
        const double phi = 2.0 * kPi * l / 3.0;
        centers.push_back({cell_radius * std::cos(phi), cell_radius * std::sin(phi)});
    }
    return centers;
}

ScenarioGeometry drop_users(const std::vector<Point>& cell_centers, double cell_radius, double pathloss_exponent,
                            int users_per_cell, Placement placement, RngStream& rng) {
    if (users_per_cell < 1) throw std::invalid_argument("drop_users: K must be positive");
    if (cell_centers.empty()) throw std::invalid_argument("drop_users: no cells");
    if (!(cell_radius > kMinUserDistance)) throw std::invalid_argument("drop_users: radius must exceed 1 m");

    ScenarioGeometry g;
    g.cell_centers = cell_centers;
    g.cell_radius = cell_radius;
    g.pathloss_exponent = pathloss_exponent;

    Point centroid;
    for (const Point& c : cell_centers) {
        centroid.x += c.x / double(cell_centers.size());
        centroid.y += c.y / double(cell_centers.size());
    }

    constexpr double jitter = 5.0 * kPi / 180.0;
    for (const Point& c : cell_centers) {
        std::vector<Point> users;
        users.reserve(users_per_cell);
        double facing = 0.0;
        if (cell_centers.size() > 1) facing = std::atan2(centroid.y - c.y, centroid.x - c.x);
        for (int k = 0; k < users_per_cell; ++k) {
            double r = 0.0, phi = 0.0;
            if (placement == Placement::uniform_disk) {
                const double r2 = rng.uniform(kMinUserDistance * kMinUserDistance, cell_radius * cell_radius);
                r = std::sqrt(r2);
                phi = rng.uniform(-kPi, kPi);
            } else {
                r = 0.95 * cell_radius;
                phi = facing + rng.uniform(-jitter, jitter);
            }
            users.push_back({c.x + r * std::cos(phi), c.y + r * std::sin(phi)});
        }
        g.user_positions.push_back(std::move(users));
    }
    return g;
}

}  // namespace mmimo
