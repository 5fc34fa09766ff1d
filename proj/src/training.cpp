// SPDX-License-Identifier: Apache-2.0
#include "mmimo/training.hpp"

#include "mmimo/linalg.hpp"

#include <cmath>
#include <stdexcept>

namespace mmimo {

TrainingCurve::TrainingCurve(std::span<const UserLinkProfile> profiles, const SystemConfig& config)
    : n_(config.n_antennas),
      k_(config.n_users),
      t_(config.coherence_len),
      rho_d_(config.snr_data),
      rho_tr_(config.snr_training) {
    if (profiles.empty() || static_cast<int>(profiles.size()) != k_)
        throw std::invalid_argument("TrainingCurve: expected K profiles");
    if (!(rho_d_ > 0.0) || !(rho_tr_ > 0.0)) throw std::invalid_argument("TrainingCurve: SNRs must be positive");
    if (!(k_ < t_)) throw ConfigError("t", "K < T required");
    CMatrix h(n_, k_);
    for (int k = 0; k < k_; ++k) {
        if (profiles[static_cast<std::size_t>(k)].n() != n_) throw std::invalid_argument("TrainingCurve: antenna count mismatch");
        h.col(k) = profiles[static_cast<std::size_t>(k)].h_bar;
        eigenvalues_.push_back(profiles[static_cast<std::size_t>(k)].r_spectrum.values.cwiseMax(0.0));
    }
    los_gram_ = h.adjoint() * h / double(n_);
    symmetrize(los_gram_);
}

RVector TrainingCurve::traces(double tau) const {
    const double eps = 1.0 / (tau * rho_tr_);
    RVector t(k_);
    for (int l = 0; l < k_; ++l) {
        const RVector& lam = eigenvalues_[static_cast<std::size_t>(l)];
        t(l) = (lam.array().square() / (lam.array() + eps)).sum() / double(n_);
    }
    return t;
}

CMatrix TrainingCurve::q_of(double tau) const {
    CMatrix m = los_gram_;
    m.diagonal() += traces(tau).cast<cd>();
    m.diagonal().array() += 1.0 / rho_d_;
    CMatrix q = hermitian_factor(m).solve(CMatrix::Identity(k_, k_));
    symmetrize(q);
    return q;
}

RVector TrainingCurve::d_alpha_diag(double tau, int alpha) const {
    if (alpha < 1) throw std::invalid_argument("d_alpha_diag: alpha must be positive");
    const double eps = 1.0 / (tau * rho_tr_);
    const double sign = (alpha % 2 == 0) ? 1.0 : -1.0;
    const double scale = sign / (rho_tr_ * std::pow(tau, alpha));
    RVector d(k_);
    for (int l = 0; l < k_; ++l) {
        const RVector& lam = eigenvalues_[static_cast<std::size_t>(l)];
        d(l) = scale * (lam.array() / (lam.array() + eps)).pow(alpha).sum() / double(n_);
    }
    return d;
}

RVector TrainingCurve::gamma(double tau) const {
    if (!(tau > 0.0)) throw std::invalid_argument("gamma: tau must be positive");
    // Schur complement of the k-th diagonal entry avoids the cancellation in rho/[Q]_kk - 1.
    CMatrix a = los_gram_;
    a.diagonal() += traces(tau).cast<cd>();
    RVector out(k_);
    for (int k = 0; k < k_; ++k) {
        if (k_ == 1) {
            out(k) = rho_d_ * a(0, 0).real();
            continue;
        }
        CMatrix sub(k_ - 1, k_ - 1);
        CVector col(k_ - 1);
        for (int r = 0, rr = 0; r < k_; ++r) {
            if (r == k) continue;
            col(rr) = a(r, k);
            for (int c = 0, cc = 0; c < k_; ++c) {
                if (c == k) continue;
                sub(rr, cc++) = a(r, c);
            }
            ++rr;
        }
        sub.diagonal().array() += 1.0 / rho_d_;
        const CVector x = hermitian_factor(sub).solve(col);
        out(k) = rho_d_ * (a(k, k).real() - col.dot(x).real());
    }
    return out;
}

RVector TrainingCurve::gamma_prime(double tau) const {
    const CMatrix q = q_of(tau);
    const RVector d2 = d_alpha_diag(tau, 2);
    RVector out(k_);
    for (int k = 0; k < k_; ++k) {
        const CVector qk = q.col(k);
        const double quad = (qk.cwiseAbs2().array() * d2.array()).sum();
        const double qkk = q(k, k).real();
        out(k) = rho_d_ * quad / (qkk * qkk);
    }
    return out;
}

RVector TrainingCurve::gamma_second(double tau) const {
    const CMatrix q = q_of(tau);
    const RVector d2 = d_alpha_diag(tau, 2);
    const RVector d3 = d_alpha_diag(tau, 3);
    RVector out(k_);
    for (int k = 0; k < k_; ++k) {
        const CVector qk = q.col(k);
        const double qkk = q(k, k).real();
        const CVector w = d2.cast<cd>().asDiagonal() * qk;  // D2 q
        const CMatrix inner = q * qkk - qk * qk.adjoint();
        const double first = w.dot(inner * w).real();
        const double third = (qk.cwiseAbs2().array() * d3.array()).sum();
        out(k) = -2.0 * rho_d_ * (first - qkk * third) / (qkk * qkk * qkk);
    }
    return out;
}

double TrainingCurve::average_se(double tau) const {
    const RVector g = gamma(tau);
    double s = 0.0;
    for (int k = 0; k < k_; ++k) s += std::log1p(g(k));
    return (1.0 - tau / double(t_)) * s / double(k_);
}

double TrainingCurve::average_se_slope(double tau) const {
    const RVector g = gamma(tau);
    const RVector gp = gamma_prime(tau);
    double level = 0.0, gain = 0.0;
    for (int k = 0; k < k_; ++k) {
        level += std::log1p(g(k));
        gain += gp(k) / (1.0 + g(k));
    }
    level /= double(k_);
    gain /= double(k_);
    return -level / double(t_) + (1.0 - tau / double(t_)) * gain;
}

RVector gamma_of_tau(std::span<const UserLinkProfile> profiles, const SystemConfig& config, double tau) {
    return TrainingCurve(profiles, config).gamma(tau);
}

RVector gamma_prime(std::span<const UserLinkProfile> profiles, const SystemConfig& config, double tau) {
    return TrainingCurve(profiles, config).gamma_prime(tau);
}

namespace {

int best_integer(const TrainingCurve& curve, double tau, double& se) {
    const int lo = curve.n_users();
    const int hi = curve.coherence_len() - 1;
    const int a = std::clamp(static_cast<int>(std::floor(tau)), lo, hi);
    const int b = std::clamp(static_cast<int>(std::ceil(tau)), lo, hi);
    const double sa = curve.average_se(a);
    const double sb = curve.average_se(b);
    if (sb > sa) {
        se = sb;
        return b;
    }
    se = sa;
    return a;
}

}  // namespace

TrainingSolution solve_tau_star(const TrainingCurve& curve) {
    const double K = curve.n_users();
    const double T = curve.coherence_len();
    TrainingSolution sol;

    // Boundary condition, evaluated as T times the slope of the average SE at tau = K.
    if (curve.average_se_slope(K) <= 0.0) {
        sol.boundary_hit = true;
        sol.method = TauMethod::boundary;
        sol.tau_continuous = K;
        sol.tau_star = static_cast<int>(K);
        sol.avg_se_at_star = curve.average_se(K);
        return sol;
    }

    bool converged = false;
    double tau = K;
    for (int it = 1; it <= kTauMaxIterations; ++it) {
        const RVector g = curve.gamma(tau);
        const RVector gp = curve.gamma_prime(tau);
        double level = 0.0, gain = 0.0;
        for (Eigen::Index k = 0; k < g.size(); ++k) {
            level += std::log1p(g(k));
            gain += gp(k) / (1.0 + g(k));
        }
        sol.iterations = it;
        if (!(gain > 0.0)) break;
        const double target = T - level / gain;
        const double next = tau + kTauDamping * (target - tau);
        if (!std::isfinite(next) || next < K || next >= T) break;
        const double step = next - tau;
        tau = next;
        if (std::abs(step) <= kTauRelTolerance * T) {
            converged = true;
            break;
        }
    }

    if (converged) {
        sol.method = TauMethod::fixed_point;
    } else {
        // The slope is decreasing in tau, positive at K and negative as tau -> T.
        double lo = K, hi = T;
        while (hi - lo > 1e-10 * T) {
            const double mid = 0.5 * (lo + hi);
            if (curve.average_se_slope(mid) > 0.0)
                lo = mid;
            else
                hi = mid;
        }
        tau = 0.5 * (lo + hi);
        sol.method = TauMethod::bisection;
    }
    sol.tau_continuous = tau;
    sol.tau_star = best_integer(curve, tau, sol.avg_se_at_star);
    return sol;
}

TrainingSolution solve_tau_star(std::span<const UserLinkProfile> profiles, const SystemConfig& config) {
    return solve_tau_star(TrainingCurve(profiles, config));
}

double kappa_threshold(const UserLinkProfile& profile, const SystemConfig& config) {
    const double n = double(profile.theta.rows());
    const double k = double(config.n_users);
    const double t = double(config.coherence_len);
    return profile.theta.trace().real() / n * (t - k) / k;
}

}  // namespace mmimo
