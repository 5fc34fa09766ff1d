// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "mmimo/combining.hpp"
#include "mmimo/estimation.hpp"

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace mmimo {

enum class Scheme { conv_single, stat_single, conv_multi, stat_multi };

std::string_view scheme_name(Scheme scheme);

struct SEReport {
    std::vector<double> per_user_se;      // in the config's log base
    std::vector<double> per_user_stderr;  // Monte Carlo standard error; empty for deterministic reports
    Scheme scheme = Scheme::conv_single;
    std::size_t trials = 0;  // 0 for deterministic reports
    std::uint64_t seed = 0;
    double prelog = 1.0;
    double snr_data = 0.0;
    LogBase log_base = LogBase::natural;
    std::vector<std::vector<double>> sinr_samples;  // [user][trial], only when requested

    double mean_se() const;
};

struct MonteCarloOptions {
    std::size_t trials = 1000;
    std::uint64_t seed = 0;
    unsigned workers = 0;  // 0: default_workers()
    bool keep_sinr_samples = false;
};

/// Trials are evaluated in fixed blocks of this many draws; the block layout is part of the
/// reproducibility contract (results do not depend on the worker count).
inline constexpr std::size_t kTrialBlock = 16;

/// SINR of receive vector g for user k given the estimates (columns of `estimates`):
/// |g^H h_k|^2 / (sum_{i != k} |g^H h_i|^2 + sum_m |g^H m_m|^2 + g^H C g + noise_scale |g|^2),
/// where m_m are the columns of `cross_means` (may be empty) and C the residual covariance.
double conventional_sinr(const CVector& g, const CMatrix& estimates, Eigen::Index k, const CMatrix& cross_means,
                         const CMatrix& residual_cov, double noise_scale);

/// Conventional combining, single cell: (1 - tau/T) E[log(1 + SINR_k)] over `trials` draws.
SEReport se_conv_singlecell_mc(std::span<const UserLinkProfile> profiles, const SystemConfig& config,
                               const MonteCarloOptions& options);

/// Conventional combining with pilot contamination; one report per cell. With L = 1 this is
/// the single-cell evaluation draw for draw.
std::vector<SEReport> se_conv_multicell_mc(const LinkTable& links, const SystemConfig& config,
                                           const MonteCarloOptions& options);

/// Statistical combining, single cell; deterministic.
SEReport se_stat_singlecell(std::span<const UserLinkProfile> profiles, const SystemConfig& config);

/// Statistical combining built from local statistics, evaluated against all L*K users;
/// one report per cell.
std::vector<SEReport> se_stat_multicell(const LinkTable& links, const SystemConfig& config);

}  // namespace mmimo
