// SPDX-License-Identifier: Apache-2.0
// Shared fixtures for the test programs.
#pragma once

#include "mmimo/channel_model.hpp"
#include "mmimo/estimation.hpp"
#include "mmimo/rng.hpp"

#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

namespace mmimo::testing {

inline constexpr double kPi = std::numbers::pi;

/// Random Hermitian PSD matrix G G^H / cols with G complex Gaussian, scaled to trace n.
inline CMatrix random_psd(int n, int cols, RngStream& rng) {
    CMatrix g(n, cols);
    rng.fill_complex_normal(g);
    CMatrix a = g * g.adjoint();
    a *= double(n) / a.trace().real();
    symmetrize(a);
    return a;
}

/// Local profiles with one-ring correlation at random angles and uniform kappa.
inline std::vector<UserLinkProfile> random_local_profiles(int n, int k, double kappa_max, RngStream& rng,
                                                          bool orthogonal_los = false) {
    std::vector<UserLinkProfile> out;
    for (int i = 0; i < k; ++i) {
        const double aoa = rng.uniform(-kPi, kPi);
        auto [lo, hi] = one_ring_window(aoa);
        if (hi - lo < 0.3) hi = lo + 0.3;
        const CMatrix theta = one_ring_correlation(0.0, lo, hi, 0.5, n);
        CVector los;
        if (orthogonal_los) {
            los = los_steering(std::asin(-1.0 + 2.0 * i / double(n)), n);
        } else {
            los = los_steering(aoa, n);
        }
        const double beta = rng.uniform(0.5, 2.0);
        out.push_back(build_profile(beta, rng.uniform(0.0, kappa_max), theta, los, true));
    }
    return out;
}

/// Network of L cells with random PSD covariances; local links carry LoS.
struct RandomNetwork {
    int L = 0, K = 0, N = 0;
    std::vector<UserLinkProfile> profiles;  // (j L + l) K + k
    LinkTable links() const {
        std::vector<const UserLinkProfile*> p;
        for (const auto& x : profiles) p.push_back(&x);
        return LinkTable(L, K, std::move(p));
    }
};

inline RandomNetwork random_network(int n, int k, int l, double kappa_max, RngStream& rng, int rank = 0) {
    RandomNetwork net;
    net.L = l;
    net.K = k;
    net.N = n;
    std::vector<double> kappa(static_cast<std::size_t>(l * k));
    for (auto& x : kappa) x = rng.uniform(0.0, kappa_max);
    for (int j = 0; j < l; ++j)
        for (int c = 0; c < l; ++c)
            for (int u = 0; u < k; ++u) {
                const CMatrix theta = random_psd(n, rank > 0 ? rank : n, rng);
                const double beta = j == c ? rng.uniform(0.5, 2.0) : rng.uniform(0.05, 0.5);
                const CVector los = los_steering(rng.uniform(-kPi, kPi), n);
                net.profiles.push_back(build_profile(beta, kappa[static_cast<std::size_t>(c * k + u)], theta, los, j == c));
            }
    return net;
}

/// Adaptive Simpson integration of a complex function, absolute tolerance `tol`.
inline cd adaptive_simpson(const std::function<cd(double)>& f, double a, double b, double tol, int depth = 50) {
    std::function<cd(double, double, cd, cd, cd, cd, double, int)> rec =
        [&](double lo, double hi, cd flo, cd fmid, cd fhi, cd whole, double eps, int d) -> cd {
        const double mid = 0.5 * (lo + hi);
        const double lm = 0.5 * (lo + mid), rm = 0.5 * (mid + hi);
        const cd flm = f(lm), frm = f(rm);
        const cd left = (mid - lo) / 6.0 * (flo + 4.0 * flm + fmid);
        const cd right = (hi - mid) / 6.0 * (fmid + 4.0 * frm + fhi);
        const cd delta = left + right - whole;
        if (d <= 0 || std::abs(delta) <= 15.0 * eps) return left + right + delta / 15.0;
        return rec(lo, mid, flo, flm, fmid, left, eps / 2.0, d - 1) + rec(mid, hi, fmid, frm, fhi, right, eps / 2.0, d - 1);
    };
    const cd fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    const cd whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return rec(a, b, fa, fm, fb, whole, tol, depth);
}

/// J0(x) by its power series.
inline double bessel_j0_series(double x) {
    double term = 1.0, sum = 1.0;
    const double q = -(x * x) / 4.0;
    for (int m = 1; m < 80; ++m) {
        term *= q / (double(m) * double(m));
        sum += term;
    }
    return sum;
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace mmimo::testing
