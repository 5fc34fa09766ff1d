// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "mmimo/channel_model.hpp"

#include <span>

namespace mmimo {

/// Effective SINR of the simplified single-cell deterministic equivalent as a function of a
/// continuous training length, together with its first two derivatives.
///
/// gamma_k(tau) = rho_d/[Q(tau)]_kk - 1, where only the diagonal (1/N) tr Rtilde_l(tau) of
/// Q^{-1} depends on tau. The eigenvalues of every R_l are cached, so each evaluation costs
/// O(K^3 + K N).
class TrainingCurve {
public:
    /// Uses N, K, T, rho_d and rho_tr from `config`; its training length is ignored.
    TrainingCurve(std::span<const UserLinkProfile> profiles, const SystemConfig& config);

    RVector gamma(double tau) const;
    RVector gamma_prime(double tau) const;
    RVector gamma_second(double tau) const;

    /// Diagonal of D_alpha: (-1)^alpha / (rho_tr tau^alpha) (1/N) tr(R_l^alpha Phi_l^alpha).
    RVector d_alpha_diag(double tau, int alpha) const;

    /// (1 - tau/T) mean_k log(1 + gamma_k(tau)), in nats.
    double average_se(double tau) const;
    /// d/dtau of average_se.
    double average_se_slope(double tau) const;

    int n_users() const { return k_; }
    int coherence_len() const { return t_; }

private:
    CMatrix q_of(double tau) const;
    RVector traces(double tau) const;

    int n_ = 0, k_ = 0, t_ = 0;
    double rho_d_ = 0.0, rho_tr_ = 0.0;
    CMatrix los_gram_;                  // (1/N) Hbar^H Hbar
    std::vector<RVector> eigenvalues_;  // spectrum of each R_l, clamped at 0
};

RVector gamma_of_tau(std::span<const UserLinkProfile> profiles, const SystemConfig& config, double tau);
RVector gamma_prime(std::span<const UserLinkProfile> profiles, const SystemConfig& config, double tau);

enum class TauMethod { boundary, fixed_point, bisection };

struct TrainingSolution {
    int tau_star = 0;             // integer optimum in [K, T-1]
    double tau_continuous = 0.0;  // stationary point (K when the boundary condition holds)
    bool boundary_hit = false;
    double avg_se_at_star = 0.0;  // nats
    TauMethod method = TauMethod::boundary;
    int iterations = 0;
};

inline constexpr double kTauDamping = 0.5;
inline constexpr int kTauMaxIterations = 200;
inline constexpr double kTauRelTolerance = 1e-6;

/// Boundary check, then the damped fixed point tau <- T - mean log(1+gamma) / mean(gamma'/(1+gamma))
/// from tau = K; falls back to bisection on the slope of the average SE if the iteration does
/// not settle inside [K, T).
TrainingSolution solve_tau_star(std::span<const UserLinkProfile> profiles, const SystemConfig& config);
TrainingSolution solve_tau_star(const TrainingCurve& curve);

/// Sufficient Rician factor for statistical combining to beat conventional combining:
/// (tr Theta / N)(T - K)/K.
double kappa_threshold(const UserLinkProfile& profile, const SystemConfig& config);

}  // namespace mmimo
