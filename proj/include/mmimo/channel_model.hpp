// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "mmimo/linalg.hpp"
#include "mmimo/rng.hpp"
#include "mmimo/types.hpp"

#include <utility>
#include <vector>

namespace mmimo {

/// Absolute tolerance below which negative eigenvalues are treated as round-off.
inline constexpr double kPsdTolerance = 1e-10;

/// Statistics of one (base station, cell, user) link.
struct UserLinkProfile {
    double beta = 0.0;    // large-scale fading
    double kappa = 0.0;   // Rician factor
    bool is_local = true; // user served by this base station
    CMatrix theta;        // spatial correlation
    CVector los_dir;      // LoS steering direction
    CMatrix r_cov;        // scattered-component covariance
    CVector h_bar;        // channel mean, zero for inter-cell links
    HermitianEigen r_spectrum;  // eigendecomposition of r_cov, eigenvalues clamped at 0
    CMatrix r_sqrt;             // Hermitian square root of r_cov

    int n() const { return static_cast<int>(r_cov.rows()); }
};

/// Integration window used for a user seen at arrival angle `aoa` (radians):
/// the ordered pair spanning -pi and aoa - pi.
std::pair<double, double> one_ring_window(double aoa);

/// One-ring correlation [T]_uv = mean over phi in [theta_min, theta_max] of
/// exp(j 2 pi spacing (u - v) cos(theta_center + phi)); `spacing` is the element spacing in
/// wavelengths. Evaluated with a fixed 2048-point composite Gauss-Legendre rule.
CMatrix one_ring_correlation(double theta_center, double theta_min, double theta_max, double spacing, int n);

/// [T]_uv = rho^(v-u) for v >= u, Hermitian completion below the diagonal. Requires |rho| < 1.
CMatrix exponential_correlation(cd rho, int n);

/// Uniform linear array response, entry m (0-based) = exp(-j m pi sin(theta)).
CVector los_steering(double theta, int n);

/// distance^(-alpha); distance must be positive.
double pathloss(double distance, double alpha);

/// Builds a link profile: local links get R = beta/(1+kappa) Theta and
/// h_bar = sqrt(beta kappa/(1+kappa)) z; inter-cell links get R = beta Theta and h_bar = 0.
/// Rejects a Theta with an eigenvalue below -kPsdTolerance.
UserLinkProfile build_profile(double beta, double kappa, const CMatrix& theta, const CVector& los_dir,
                              bool is_local);

/// h_bar + R^{1/2} z with z ~ CN(0, I).
CVector sample_channel(const UserLinkProfile& profile, RngStream& rng);

// ---------------------------------------------------------------------------
// Geometry

struct Point {
    double x = 0.0;
    double y = 0.0;
};

enum class Placement { uniform_disk, cell_edge };

inline constexpr double kMinUserDistance = 1.0;  // meters

struct ScenarioGeometry {
    std::vector<Point> cell_centers;
    double cell_radius = 0.0;
    double pathloss_exponent = 0.0;
    std::vector<std::vector<Point>> user_positions;  // [cell][user]

    int n_cells() const { return static_cast<int>(cell_centers.size()); }
    int n_users() const { return user_positions.empty() ? 0 : static_cast<int>(user_positions[0].size()); }

    /// Distance from base station j to user k of cell l.
    double distance(int j, int l, int k) const;
    /// Arrival angle in [-pi, pi) at base station j of user k of cell l.
    double arrival_angle(int j, int l, int k) const;
};

/// Three base stations whose cells meet at the origin; the direction from each base station
/// toward the shared corner is 180, -60 and 60 degrees respectively.
std::vector<Point> three_cell_centers(double cell_radius);

/// Places K users per cell. uniform_disk: uniform over the annulus [kMinUserDistance, radius];
/// cell_edge: at 0.95 radius toward the centroid of the layout (the +x direction for a single
/// cell) with uniform angular jitter of +-5 degrees.
ScenarioGeometry drop_users(const std::vector<Point>& cell_centers, double cell_radius, double pathloss_exponent,
                            int users_per_cell, Placement placement, RngStream& rng);

}  // namespace mmimo
