// SPDX-License-Identifier: Apache-2.0
#include "mmimo/estimation.hpp"

#include <cmath>
#include <stdexcept>

namespace mmimo {

LinkTable::LinkTable(int n_cells, int n_users, std::vector<const UserLinkProfile*> links)
    : n_cells_(n_cells), n_users_(n_users), links_(std::move(links)) {
    if (links_.size() != static_cast<std::size_t>(n_cells_) * n_cells_ * n_users_)
        throw std::invalid_argument("LinkTable: expected L*L*K links");
    for (const auto* p : links_) {
        if (p == nullptr) throw std::invalid_argument("LinkTable: null link");
        if (p->n() != links_.front()->n()) throw std::invalid_argument("LinkTable: antenna count mismatch");
    }
}

LinkTable LinkTable::single_cell(std::span<const UserLinkProfile> profiles) {
    std::vector<const UserLinkProfile*> links;
    for (const auto& p : profiles) links.push_back(&p);
    return LinkTable(1, static_cast<int>(profiles.size()), std::move(links));
}

std::vector<const UserLinkProfile*> LinkTable::same_pilot(int j, int k) const {
    std::vector<const UserLinkProfile*> out;
    for (int l = 0; l < n_cells_; ++l) out.push_back(&(*this)(j, l, k));
    return out;
}

EstimatorState build_estimator_singlecell(const UserLinkProfile& profile, int tau, double rho_tr) {
    if (!(tau > 0) || !(rho_tr > 0.0)) throw std::invalid_argument("estimator: tau * rho_tr must be positive");
    const double eps = 1.0 / (double(tau) * rho_tr);
    const RVector& lam = profile.r_spectrum.values;
    const CMatrix& v = profile.r_spectrum.vectors;
    const RVector denom = (lam.array() + eps).matrix();

    EstimatorState s;
    s.pilot_noise = eps;
    s.serving = 0;
    s.phi = from_spectrum(v, denom.cwiseInverse());
    s.r_tilde = from_spectrum(v, (lam.array().square() / denom.array()).matrix());
    s.err_cov = from_spectrum(v, (lam.array() * eps / denom.array()).matrix());
    s.gain = from_spectrum(v, (lam.array() / denom.array()).matrix());
    s.cross_gain.resize(1);
    s.cross_cov.resize(1);
    return s;
}

EstimatorState build_estimator_multicell(std::span<const UserLinkProfile* const> same_pilot, std::size_t serving,
                                         int tau, double rho_tr) {
    if (same_pilot.empty() || serving >= same_pilot.size())
        throw std::invalid_argument("estimator: serving link out of range");
    if (same_pilot.size() == 1) return build_estimator_singlecell(*same_pilot[0], tau, rho_tr);
    if (!(tau > 0) || !(rho_tr > 0.0)) throw std::invalid_argument("estimator: tau * rho_tr must be positive");

    const double eps = 1.0 / (double(tau) * rho_tr);
    const int n = same_pilot[serving]->n();
    const std::size_t links = same_pilot.size();

    CMatrix total = CMatrix::Zero(n, n);
    for (const auto* p : same_pilot) {
        if (p->n() != n) throw std::invalid_argument("estimator: antenna count mismatch");
        total += p->r_cov;
    }
    HermitianEigen spec = hermitian_eigen(total);
    spec.values = spec.values.cwiseMax(0.0);
    const RVector inv = (spec.values.array() + eps).inverse().matrix();
    const CMatrix& v = spec.vectors;

    EstimatorState s;
    s.pilot_noise = eps;
    s.serving = serving;
    s.phi = from_spectrum(v, inv);
    s.cross_gain.resize(links);
    s.cross_cov.resize(links);

    const CMatrix scaled_vh = inv.cast<cd>().asDiagonal() * v.adjoint();
    for (std::size_t l = 0; l < links; ++l) {
        const CMatrix rv = same_pilot[l]->r_cov * v;
        CMatrix gain = rv * scaled_vh;
        // Sum of the other same-pilot covariances plus eps I.
        CMatrix others = total - same_pilot[l]->r_cov;
        others.diagonal().array() += eps;
        CMatrix residual = gain * others;  // R_l Phi (S - R_l + eps I) = R_l - R_l Phi R_l
        symmetrize(residual);
        if (l == serving) {
            s.r_tilde = rv * inv.cast<cd>().asDiagonal() * rv.adjoint();
            symmetrize(s.r_tilde);
            s.err_cov = std::move(residual);
            s.gain = std::move(gain);
        } else {
            s.cross_gain[l] = std::move(gain);
            s.cross_cov[l] = std::move(residual);
        }
    }
    return s;
}

CVector estimate_singlecell(const UserLinkProfile& profile, const EstimatorState& estimator,
                            const CVector& true_channel, RngStream& rng) {
    CVector noise(profile.n());
    rng.fill_complex_normal(noise);
    const CVector y = true_channel + std::sqrt(estimator.pilot_noise) * noise;
    return estimator.gain * (y - profile.h_bar) + profile.h_bar;
}

MulticellEstimate estimate_multicell(std::span<const UserLinkProfile* const> same_pilot,
                                     const EstimatorState& estimator, std::span<const CVector> true_channels,
                                     RngStream& rng) {
    if (true_channels.size() != same_pilot.size())
        throw std::invalid_argument("estimate_multicell: one channel per same-pilot link required");
    const std::size_t serving = estimator.serving;
    const int n = same_pilot[serving]->n();
    CVector noise(n);
    rng.fill_complex_normal(noise);

    MulticellEstimate out;
    out.observation = std::sqrt(estimator.pilot_noise) * noise;
    for (const auto& h : true_channels) out.observation += h;
    const CVector centred = out.observation - same_pilot[serving]->h_bar;
    out.estimate = estimator.gain * centred + same_pilot[serving]->h_bar;
    out.cond_mean.resize(same_pilot.size());
    out.cond_cov.resize(same_pilot.size());
    for (std::size_t l = 0; l < same_pilot.size(); ++l) {
        if (l == serving) continue;
        out.cond_mean[l] = estimator.cross_gain[l] * centred;
        out.cond_cov[l] = estimator.cross_cov[l];
    }
    return out;
}

NetworkEstimators build_network_estimators(const LinkTable& links, int tau, double rho_tr) {
    NetworkEstimators out;
    out.n_cells = links.n_cells();
    out.n_users = links.n_users();
    out.states.reserve(static_cast<std::size_t>(out.n_cells * out.n_users));
    for (int j = 0; j < out.n_cells; ++j) {
        for (int k = 0; k < out.n_users; ++k) {
            const auto same = links.same_pilot(j, k);
            out.states.push_back(build_estimator_multicell(same, static_cast<std::size_t>(j), tau, rho_tr));
        }
    }
    return out;
}

ChannelDraw draw_network(const LinkTable& links, const NetworkEstimators& estimators, RngStream& rng) {
    const int L = links.n_cells();
    const int K = links.n_users();
    const int n = links.n_antennas();
    ChannelDraw d;
    d.channels.reserve(static_cast<std::size_t>(L * L * K));
    for (int j = 0; j < L; ++j)
        for (int l = 0; l < L; ++l)
            for (int k = 0; k < K; ++k) d.channels.push_back(sample_channel(links(j, l, k), rng));

    d.cond_means.resize(static_cast<std::size_t>(L * L * K));
    for (int j = 0; j < L; ++j) {
        for (int k = 0; k < K; ++k) {
            const EstimatorState& est = estimators.at(j, k);
            CVector noise(n);
            rng.fill_complex_normal(noise);
            CVector y = std::sqrt(est.pilot_noise) * noise;
            for (int l = 0; l < L; ++l) y += d.channels[static_cast<std::size_t>((j * L + l) * K + k)];
            const CVector centred = y - links(j, j, k).h_bar;
            d.estimates.push_back(est.gain * centred + links(j, j, k).h_bar);
            for (int l = 0; l < L; ++l) {
                if (l == j) continue;
                d.cond_means[static_cast<std::size_t>((j * L + l) * K + k)] = est.cross_gain[l] * centred;
            }
            d.pilot_obs.push_back(std::move(y));
        }
    }
    return d;
}

}  // namespace mmimo
