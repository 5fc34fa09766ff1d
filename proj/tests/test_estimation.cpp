// SPDX-License-Identifier: Apache-2.0
#include "helpers.hpp"
#include "mmimo/estimation.hpp"

#include <catch_amalgamated.hpp>

using namespace mmimo;
using namespace mmimo::testing;

namespace {

UserLinkProfile correlated_profile(int n, double beta, double kappa, std::uint64_t seed, bool local = true) {
    RngStream rng(seed);
    return build_profile(beta, kappa, random_psd(n, n / 2 + 1, rng), los_steering(0.3 + 0.1 * double(seed), n), local);
}

}  // namespace

TEST_CASE("single-cell estimator closed forms") {
    const int n = 8;
    const UserLinkProfile p = correlated_profile(n, 1.2, 0.8, 1);
    const double rnorm = p.r_cov.norm();

    for (double rho : {1e-3, 0.1, 1.0, 10.0}) {
        const EstimatorState s = build_estimator_singlecell(p, 4, rho);
        const double eps = 1.0 / (4.0 * rho);
        CHECK(s.pilot_noise == Catch::Approx(eps));
        const CMatrix phi_ref = (p.r_cov + eps * CMatrix::Identity(n, n)).inverse();
        CHECK((s.phi - phi_ref).norm() <= 1e-10 * phi_ref.norm());
        CHECK((s.r_tilde - p.r_cov * phi_ref * p.r_cov).norm() <= 1e-10 * rnorm);
        CHECK((s.r_tilde + s.err_cov - p.r_cov).norm() <= 1e-10 * rnorm);
        CHECK(hermitian_eigen(s.err_cov).values.minCoeff() >= -1e-12 * rnorm);
        CHECK(hermitian_defect(s.r_tilde) <= 1e-14 * rnorm);
    }

    const EstimatorState clean = build_estimator_singlecell(p, 1, 1e12);
    CHECK((clean.r_tilde - p.r_cov).norm() <= 1e-6 * rnorm);
    const EstimatorState noisy = build_estimator_singlecell(p, 1, 1e-12);
    CHECK(noisy.r_tilde.trace().real() <= 1e-6 * p.r_cov.trace().real());

    const double c = 2.5, tau = 3, rho = 0.7, eps = 1.0 / (tau * rho);
    const UserLinkProfile scaled = build_profile(c, 0.0, CMatrix::Identity(n, n), los_steering(0.0, n), true);
    const EstimatorState sc = build_estimator_singlecell(scaled, 3, rho);
    CHECK((sc.r_tilde - (c * c / (c + eps)) * CMatrix::Identity(n, n)).norm() <= 1e-12);
}

TEST_CASE("estimate quality grows with tau rho_tr") {
    const UserLinkProfile p = correlated_profile(10, 1.0, 0.5, 2);
    double previous = -1.0;
    for (double rho : {1e-4, 1e-3, 1e-2, 0.1, 1.0, 10.0, 100.0, 1e4}) {
        const double tr = build_estimator_singlecell(p, 2, rho).r_tilde.trace().real();
        CHECK(tr >= previous);
        previous = tr;
    }
}

TEST_CASE("single-cell estimate limits") {
    const int n = 8;
    const UserLinkProfile p = correlated_profile(n, 1.0, 1.0, 3);
    RngStream rng(10);
    const CVector h = sample_channel(p, rng);
    const CVector est = estimate_singlecell(p, build_estimator_singlecell(p, 1, 1e12), h, rng);
    CHECK((est - h).norm() / h.norm() <= 1e-5);

    const UserLinkProfile los_only = correlated_profile(n, 1.0, 1e12, 4);
    const CVector h2 = sample_channel(los_only, rng);
    const CVector est2 = estimate_singlecell(los_only, build_estimator_singlecell(los_only, 2, 1.0), h2, rng);
    CHECK((est2 - los_only.h_bar).norm() <= 1e-5);
}

TEST_CASE("MMSE orthogonality and covariance split over 1e5 draws") {
    const int n = 8;
    const int draws = 100000;
    const UserLinkProfile p = correlated_profile(n, 1.0, 1.0, 5);
    const EstimatorState s = build_estimator_singlecell(p, 2, 0.5);
    RngStream rng(2024);
    CMatrix cross = CMatrix::Zero(n, n), cov_est = CMatrix::Zero(n, n), cov_err = CMatrix::Zero(n, n);
    CVector mean_est = CVector::Zero(n);
    for (int t = 0; t < draws; ++t) {
        const CVector h = sample_channel(p, rng);
        const CVector est = estimate_singlecell(p, s, h, rng);
        const CVector err = h - est;
        cross += est * err.adjoint();
        const CVector c = est - p.h_bar;
        cov_est += c * c.adjoint();
        cov_err += err * err.adjoint();
        mean_est += est;
    }
    cross /= double(draws);
    cov_est /= double(draws);
    cov_err /= double(draws);
    mean_est /= double(draws);
    const double bound = 4.0 / std::sqrt(double(draws)) * p.r_cov.norm();
    CHECK(cross.norm() <= bound);
    CHECK((cov_est + cov_err - p.r_cov).norm() <= 6.0 * p.r_cov.trace().real() / std::sqrt(double(draws)));
    CHECK((cov_est - s.r_tilde).norm() <= 6.0 * p.r_cov.trace().real() / std::sqrt(double(draws)));
    CHECK((mean_est - p.h_bar).norm() <= 6.0 * std::sqrt(s.r_tilde.trace().real() / double(draws)));
}

TEST_CASE("multi-cell estimator reductions") {
    const int n = 6;
    const UserLinkProfile serving = correlated_profile(n, 1.0, 0.7, 6);
    const EstimatorState single = build_estimator_singlecell(serving, 3, 2.0);

    const UserLinkProfile* one[] = {&serving};
    const EstimatorState m1 = build_estimator_multicell(one, 0, 3, 2.0);
    CHECK(m1.phi == single.phi);
    CHECK(m1.r_tilde == single.r_tilde);
    CHECK(m1.err_cov == single.err_cov);

    const UserLinkProfile silent =
        build_profile(0.0, 0.0, CMatrix::Identity(n, n), los_steering(0.0, n), false);
    const UserLinkProfile* with_silent[] = {&silent, &serving, &silent};
    const EstimatorState m3 = build_estimator_multicell(with_silent, 1, 3, 2.0);
    CHECK((m3.r_tilde - single.r_tilde).norm() <= 1e-12 * single.r_tilde.norm());
    CHECK((m3.err_cov - single.err_cov).norm() <= 1e-12 * serving.r_cov.norm());

    const double c = 1.5, tau = 2, rho = 0.4, eps = 1.0 / (tau * rho);
    const UserLinkProfile a = build_profile(c, 0.0, CMatrix::Identity(n, n), los_steering(0.0, n), true);
    const UserLinkProfile b = build_profile(c, 0.0, CMatrix::Identity(n, n), los_steering(0.0, n), false);
    const UserLinkProfile* three[] = {&a, &b, &b};
    const EstimatorState e = build_estimator_multicell(three, 0, 2, rho);
    CHECK((e.r_tilde - (c * c / (3.0 * c + eps)) * CMatrix::Identity(n, n)).norm() <= 1e-12);
    CHECK((e.r_tilde + e.err_cov - a.r_cov).norm() <= 1e-12);
}

TEST_CASE("multi-cell estimate with silent interferers equals the single-cell estimate") {
    const int n = 6;
    const UserLinkProfile serving = correlated_profile(n, 1.0, 0.7, 7);
    const UserLinkProfile silent =
        build_profile(0.0, 0.0, CMatrix::Identity(n, n), los_steering(0.0, n), false);
    const UserLinkProfile* links[] = {&serving, &silent};
    const EstimatorState ms = build_estimator_multicell(links, 0, 2, 1.0);
    const EstimatorState ss = build_estimator_singlecell(serving, 2, 1.0);
    RngStream setup(3);
    const CVector h = sample_channel(serving, setup);
    const CVector zero = CVector::Zero(n);
    const std::vector<CVector> channels = {h, zero};
    RngStream r1(99), r2(99);
    const MulticellEstimate m = estimate_multicell(links, ms, channels, r1);
    const CVector s = estimate_singlecell(serving, ss, h, r2);
    CHECK((m.estimate - s).norm() <= 1e-12 * s.norm());
}

TEST_CASE("pilot-contamination cross moment matches the trace formula") {
    const int n = 8;
    const int draws = 100000;
    const UserLinkProfile serving = correlated_profile(n, 1.0, 1.0, 8);
    const UserLinkProfile inter1 = correlated_profile(n, 0.6, 0.0, 9, false);
    const UserLinkProfile inter2 = correlated_profile(n, 0.3, 0.0, 10, false);
    const UserLinkProfile* links[] = {&inter1, &serving, &inter2};
    const EstimatorState s = build_estimator_multicell(links, 1, 2, 1.0);
    const cd oracle = (inter1.r_cov * s.phi * serving.r_cov).trace() / double(n);

    RngStream rng(17);
    cd acc = 0.0;
    CVector mean_est = CVector::Zero(n);
    std::vector<CVector> channels(3);
    for (int t = 0; t < draws; ++t) {
        for (int l = 0; l < 3; ++l) channels[static_cast<std::size_t>(l)] = sample_channel(*links[l], rng);
        const MulticellEstimate m = estimate_multicell(links, s, channels, rng);
        acc += (m.estimate - serving.h_bar).dot(channels[0]) / double(n);
        mean_est += m.estimate;
    }
    acc /= double(draws);
    mean_est /= double(draws);
    // Standard deviation of one sample is at most sqrt(tr Rtilde tr R_1)/N.
    const double sd = std::sqrt(s.r_tilde.trace().real() * inter1.r_cov.trace().real()) / n;
    CHECK(std::abs(acc - oracle) <= 5.0 * sd / std::sqrt(double(draws)));
    CHECK((mean_est - serving.h_bar).norm() <= 6.0 * std::sqrt(s.r_tilde.trace().real() / double(draws)));
}

TEST_CASE("network draw is consistent with the estimator maps") {
    RngStream setup(21);
    const RandomNetwork net = random_network(6, 2, 2, 2.0, setup);
    const LinkTable links = net.links();
    const NetworkEstimators est = build_network_estimators(links, 3, 1.5);
    RngStream rng(5);
    const ChannelDraw d = draw_network(links, est, rng);
    const int L = 2, K = 2;
    for (int j = 0; j < L; ++j)
        for (int k = 0; k < K; ++k) {
            const EstimatorState& s = est.at(j, k);
            const CVector& y = d.pilot_obs[static_cast<std::size_t>(j * K + k)];
            const CVector centred = y - links(j, j, k).h_bar;
            const CVector& hat = d.estimates[static_cast<std::size_t>(j * K + k)];
            CHECK((hat - (s.gain * centred + links(j, j, k).h_bar)).norm() <= 1e-12 * hat.norm());
            // Pilot observation is the sum of the same-pilot channels plus noise of variance 1/(tau rho).
            CVector noise = y;
            for (int l = 0; l < L; ++l) noise -= d.channels[static_cast<std::size_t>((j * L + l) * K + k)];
            const double ratio = noise.squaredNorm() / 6.0 * (3.0 * 1.5);
            CHECK(ratio > 0.05);
            CHECK(ratio < 5.0);
            for (int l = 0; l < L; ++l) {
                if (l == j) continue;
                const CVector& m = d.cond_means[static_cast<std::size_t>((j * L + l) * K + k)];
                CHECK((m - s.cross_gain[static_cast<std::size_t>(l)] * centred).norm() <= 1e-12 * (1.0 + m.norm()));
            }
        }
    RngStream again(5);
    const ChannelDraw d2 = draw_network(links, est, again);
    for (std::size_t i = 0; i < d.estimates.size(); ++i) CHECK(d.estimates[i] == d2.estimates[i]);
}
