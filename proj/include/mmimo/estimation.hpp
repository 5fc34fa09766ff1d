// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "mmimo/channel_model.hpp"

#include <span>
#include <vector>

namespace mmimo {

/// Non-owning (j, l, k)-indexed view of link profiles: user k of cell l seen by base station j.
class LinkTable {
public:
    LinkTable() = default;
    LinkTable(int n_cells, int n_users, std::vector<const UserLinkProfile*> links);

    /// Single-cell table (L = 1) over `profiles`.
    static LinkTable single_cell(std::span<const UserLinkProfile> profiles);

    const UserLinkProfile& operator()(int j, int l, int k) const {
        return *links_[static_cast<std::size_t>((j * n_cells_ + l) * n_users_ + k)];
    }
    int n_cells() const { return n_cells_; }
    int n_users() const { return n_users_; }
    int n_antennas() const { return links_.empty() ? 0 : links_.front()->n(); }

    /// Profiles of pilot k at base station j, ordered by cell.
    std::vector<const UserLinkProfile*> same_pilot(int j, int k) const;

private:
    int n_cells_ = 0;
    int n_users_ = 0;
    std::vector<const UserLinkProfile*> links_;
};

/// LMMSE estimator of one served channel given its (possibly contaminated) pilot observation.
struct EstimatorState {
    CMatrix phi;      // (sum of same-pilot covariances + eps I)^{-1}, eps = 1/(tau rho_tr)
    CMatrix r_tilde;  // R Phi R, covariance of the estimate
    CMatrix err_cov;  // R - R Phi R, covariance of the estimation error
    CMatrix gain;     // R Phi, applied to the centred observation
    double pilot_noise = 0.0;  // eps
    std::size_t serving = 0;   // position of the served link among the same-pilot links
    // Per same-pilot link l (entry `serving` left empty): R_l Phi and R_l - R_l Phi R_l, the
    // conditional mean map and covariance of h_l given the observation.
    std::vector<CMatrix> cross_gain;
    std::vector<CMatrix> cross_cov;
};

EstimatorState build_estimator_singlecell(const UserLinkProfile& profile, int tau, double rho_tr);

/// Estimator for same_pilot[serving] with every link in `same_pilot` sharing the pilot.
/// With a single link this is exactly build_estimator_singlecell.
EstimatorState build_estimator_multicell(std::span<const UserLinkProfile* const> same_pilot, std::size_t serving,
                                         int tau, double rho_tr);

/// Draws n ~ CN(0, I), forms y = h + sqrt(eps) n and returns R Phi (y - h_bar) + h_bar.
CVector estimate_singlecell(const UserLinkProfile& profile, const EstimatorState& estimator,
                            const CVector& true_channel, RngStream& rng);

struct MulticellEstimate {
    CVector observation;  // y, the despread pilot observation
    CVector estimate;     // estimate of the served channel
    std::vector<CVector> cond_mean;  // E[h_l | y] for l != serving (entry `serving` empty)
    std::vector<CMatrix> cond_cov;   // Cov[h_l | y] for l != serving (entry `serving` empty)
};

MulticellEstimate estimate_multicell(std::span<const UserLinkProfile* const> same_pilot,
                                     const EstimatorState& estimator, std::span<const CVector> true_channels,
                                     RngStream& rng);

/// Estimators for every (j, k) of a network.
struct NetworkEstimators {
    int n_cells = 0;
    int n_users = 0;
    std::vector<EstimatorState> states;  // index j * K + k
    const EstimatorState& at(int j, int k) const { return states[static_cast<std::size_t>(j * n_users + k)]; }
};

NetworkEstimators build_network_estimators(const LinkTable& links, int tau, double rho_tr);

/// One joint realization of every channel, pilot observation and estimate of a network.
struct ChannelDraw {
    std::vector<CVector> channels;    // (j, l, k) -> h_jlk, index (j L + l) K + k
    std::vector<CVector> pilot_obs;   // (j, k) -> y_jk, index j K + k
    std::vector<CVector> estimates;   // (j, k) -> estimate of h_jjk
    std::vector<CVector> cond_means;  // (j, l, k) -> E[h_jlk | y_jk], empty for l == j
};

/// Draw order: for j, l, k the scattered components of h_jlk, then for j, k the pilot noise.
ChannelDraw draw_network(const LinkTable& links, const NetworkEstimators& estimators, RngStream& rng);

}  // namespace mmimo
