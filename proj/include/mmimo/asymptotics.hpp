// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "mmimo/estimation.hpp"

#include <span>
#include <vector>

namespace mmimo {

/// Large-system quantities for one base station.
///
/// With A = (1/N) Hbar^H Hbar + diag{(1/N) tr Rtilde_l}, Q = (A + I/rho_d)^{-1}. The product
/// Q A = I - Q/rho_d is kept separately because forming it by subtraction loses all
/// precision at low SNR.
struct AsymptoticState {
    int n_antennas = 0;
    double snr_data = 0.0;
    CMatrix gram;       // A
    CMatrix q_matrix;   // Q
    CMatrix q_times_a;  // Q A
    RVector trace_rtilde;  // (1/N) tr Rtilde_l
    // Single cell: T_i = Hbar^H E_i Hbar + diag{tr(Rtilde_l E_i)} with E_i the error covariance.
    std::vector<CMatrix> t_matrices;
    // Multi-cell: cross_traces(l, i) = (1/N) tr(R_jli Phi_ji R_jji), zero row for l = j.
    Eigen::MatrixXcd cross_traces;
    int serving_cell = 0;
};

AsymptoticState build_q_singlecell(std::span<const UserLinkProfile> profiles,
                                   std::span<const EstimatorState> estimators, double rho_d);

/// Per-user deterministic equivalent of conventional combining (single cell), with the
/// estimation-error term. Values in the config's log base.
std::vector<double> se_conv_singlecell_de(const AsymptoticState& state, const SystemConfig& config);

/// Simplified form (1 - tau/T) log(rho_d / [Q]_kk), evaluated as log(1 + gamma_k) with
/// gamma_k from a Schur complement.
std::vector<double> se_conv_singlecell_de_simplified(const AsymptoticState& state, const SystemConfig& config);

/// Mutually orthogonal LoS closed form: (1 - tau/T) log(1 + (rho_d/N)(tr Rtilde_k + |hbar_k|^2)).
std::vector<double> se_conv_favorable(std::span<const UserLinkProfile> profiles,
                                      std::span<const EstimatorState> estimators, const SystemConfig& config);

/// Estimation-error term (1/N^2) sum_i q_k^H T_i q_k of every user.
std::vector<double> estimation_error_term(const AsymptoticState& state);

struct StatisticalDE {
    std::vector<double> full;        // quotient evaluated at the statistical combiner
    std::vector<double> simplified;  // log(1 + hbar_k^H (Hbar_k Hbar_k^H + (N/rho_d) I)^{-1} hbar_k)
};

StatisticalDE se_stat_singlecell_de(std::span<const UserLinkProfile> profiles, const SystemConfig& config);

/// Q of base station j built from its local links; caches the pilot-contamination traces.
AsymptoticState build_q_multicell(const LinkTable& links, const NetworkEstimators& estimators, int j,
                                  double rho_d);

struct MulticellConvDE {
    std::vector<double> se;           // compact closed form
    std::vector<double> se_expanded;  // expanded form, separating the interference types
    std::vector<double> pilot_contamination;  // sum_{l != j} |(rho_d/N) tr(R_jlk Phi_jk R_jjk)|^2
    std::vector<double> uncorrelated;         // remaining inter-cell term of the expanded form
};

MulticellConvDE se_conv_multicell_de(const AsymptoticState& state, const SystemConfig& config);

/// Closed form for mutually orthogonal local LoS directions (Q diagonal).
std::vector<double> se_conv_multicell_favorable(const AsymptoticState& state, const SystemConfig& config);

/// f = (1/N) tr(sum_{l != serving} R_l Phi R_serving) for the links sharing one pilot.
double pilot_contamination_term(std::span<const UserLinkProfile* const> same_pilot, std::size_t serving, int tau,
                                double rho_tr);

/// log(1 + hbar_k^H (Hbar_k Hbar_k^H + (N/rho_d) I)^{-1} hbar_k) from local statistics only.
std::vector<double> se_stat_multicell_de(std::span<const UserLinkProfile* const> local, const SystemConfig& config);

}  // namespace mmimo
