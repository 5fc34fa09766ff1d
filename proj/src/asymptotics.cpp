// SPDX-License-Identifier: Apache-2.0
#include "mmimo/asymptotics.hpp"

#include "mmimo/combining.hpp"

#include <cmath>
#include <stdexcept>

namespace mmimo {

namespace {

cd trace_of_product(const CMatrix& a, const CMatrix& b) { return (a.array() * b.transpose().array()).sum(); }

CMatrix los_matrix(std::span<const UserLinkProfile* const> local) {
    const int n = local.front()->n();
    CMatrix h(n, static_cast<Eigen::Index>(local.size()));
    for (std::size_t k = 0; k < local.size(); ++k) h.col(static_cast<Eigen::Index>(k)) = local[k]->h_bar;
    return h;
}

void fill_q(AsymptoticState& s, const CMatrix& h_bar, const RVector& traces, double rho_d) {
    if (!(rho_d > 0.0)) throw std::invalid_argument("asymptotics: rho_d must be positive");
    const double n = double(h_bar.rows());
    const Eigen::Index k = h_bar.cols();
    s.n_antennas = static_cast<int>(h_bar.rows());
    s.snr_data = rho_d;
    s.trace_rtilde = traces;
    s.gram = (h_bar.adjoint() * h_bar) / n;
    s.gram.diagonal() += traces.cast<cd>();
    symmetrize(s.gram);
    CMatrix m = s.gram;
    m.diagonal().array() += 1.0 / rho_d;
    const auto llt = hermitian_factor(m);
    s.q_matrix = llt.solve(CMatrix::Identity(k, k));
    symmetrize(s.q_matrix);
    s.q_times_a = llt.solve(s.gram);
}

// gamma_k = rho/[Q]_kk - 1 = rho (A_kk - a_k^H (A_{/k} + I/rho)^{-1} a_k).
RVector effective_sinr(const CMatrix& gram, double rho) {
    const Eigen::Index k_users = gram.rows();
    RVector gamma(k_users);
    for (Eigen::Index k = 0; k < k_users; ++k) {
        if (k_users == 1) {
            gamma(k) = rho * gram(0, 0).real();
            continue;
        }
        std::vector<Eigen::Index> others;
        for (Eigen::Index i = 0; i < k_users; ++i)
            if (i != k) others.push_back(i);
        const auto m = static_cast<Eigen::Index>(others.size());
        CMatrix sub(m, m);
        CVector a(m);
        for (Eigen::Index r = 0; r < m; ++r) {
            a(r) = gram(others[static_cast<std::size_t>(r)], k);
            for (Eigen::Index c = 0; c < m; ++c)
                sub(r, c) = gram(others[static_cast<std::size_t>(r)], others[static_cast<std::size_t>(c)]);
        }
        sub.diagonal().array() += 1.0 / rho;
        const CVector x = hermitian_factor(sub).solve(a);
        gamma(k) = rho * (gram(k, k).real() - a.dot(x).real());
    }
    return gamma;
}

double noise_term(const AsymptoticState& s, Eigen::Index k) {
    // (1/rho)([Q]_kk - (1/rho)[Q^2]_kk) = (1/rho)[Q (QA)]_kk
    return (s.q_matrix.row(k) * s.q_times_a.col(k)).value().real() / s.snr_data;
}

double intra_interference(const AsymptoticState& s, Eigen::Index k) {
    double v = 0.0;
    for (Eigen::Index i = 0; i < s.q_times_a.cols(); ++i)
        if (i != k) v += std::norm(s.q_times_a(k, i));
    return v;
}

}  // namespace

AsymptoticState build_q_singlecell(std::span<const UserLinkProfile> profiles,
                                   std::span<const EstimatorState> estimators, double rho_d) {
    if (profiles.empty() || profiles.size() != estimators.size())
        throw std::invalid_argument("asymptotics: one estimator per profile required");
    std::vector<const UserLinkProfile*> local;
    for (const auto& p : profiles) local.push_back(&p);
    const double n = double(profiles.front().n());
    const auto k_users = static_cast<Eigen::Index>(profiles.size());

    RVector traces(k_users);
    for (Eigen::Index k = 0; k < k_users; ++k)
        traces(k) = estimators[static_cast<std::size_t>(k)].r_tilde.trace().real() / n;

    AsymptoticState s;
    const CMatrix h_bar = los_matrix(local);
    fill_q(s, h_bar, traces, rho_d);

    for (Eigen::Index i = 0; i < k_users; ++i) {
        const CMatrix& e = estimators[static_cast<std::size_t>(i)].err_cov;
        CMatrix t = h_bar.adjoint() * e * h_bar;
        for (Eigen::Index l = 0; l < k_users; ++l)
            t(l, l) += trace_product(estimators[static_cast<std::size_t>(l)].r_tilde, e);
        s.t_matrices.push_back(std::move(t));
    }
    return s;
}

std::vector<double> estimation_error_term(const AsymptoticState& s) {
    const double n = double(s.n_antennas);
    const Eigen::Index k_users = s.q_matrix.rows();
    std::vector<double> out(static_cast<std::size_t>(k_users), 0.0);
    for (Eigen::Index k = 0; k < k_users; ++k) {
        const CVector q = s.q_matrix.col(k);
        double v = 0.0;
        for (const auto& t : s.t_matrices) v += q.dot(t * q).real();
        out[static_cast<std::size_t>(k)] = v / (n * n);
    }
    return out;
}

std::vector<double> se_conv_singlecell_de(const AsymptoticState& s, const SystemConfig& config) {
    const std::vector<double> err = estimation_error_term(s);
    const double prelog = config.prelog();
    std::vector<double> out;
    for (Eigen::Index k = 0; k < s.q_matrix.rows(); ++k) {
        const double num = std::norm(s.q_times_a(k, k));
        const double den = intra_interference(s, k) + err[static_cast<std::size_t>(k)] + noise_term(s, k);
        out.push_back(in_log_base(prelog * std::log1p(num / den), config.log_base));
    }
    return out;
}

std::vector<double> se_conv_singlecell_de_simplified(const AsymptoticState& s, const SystemConfig& config) {
    const RVector gamma = effective_sinr(s.gram, s.snr_data);
    const double prelog = config.prelog();
    std::vector<double> out;
    for (Eigen::Index k = 0; k < gamma.size(); ++k)
        out.push_back(in_log_base(prelog * std::log1p(gamma(k)), config.log_base));
    return out;
}

std::vector<double> se_conv_favorable(std::span<const UserLinkProfile> profiles,
                                      std::span<const EstimatorState> estimators, const SystemConfig& config) {
    if (profiles.size() != estimators.size()) throw std::invalid_argument("asymptotics: one estimator per profile required");
    const double prelog = config.prelog();
    std::vector<double> out;
    for (std::size_t k = 0; k < profiles.size(); ++k) {
        const double n = double(profiles[k].n());
        const double x = config.snr_data / n * (estimators[k].r_tilde.trace().real() + profiles[k].h_bar.squaredNorm());
        out.push_back(in_log_base(prelog * std::log1p(x), config.log_base));
    }
    return out;
}

StatisticalDE se_stat_singlecell_de(std::span<const UserLinkProfile> profiles, const SystemConfig& config) {
    std::vector<const UserLinkProfile*> local;
    for (const auto& p : profiles) local.push_back(&p);
    StatisticalDE out;
    out.simplified = se_stat_multicell_de(local, config);

    const int n = profiles.front().n();
    const double rho = config.snr_data;
    const CombinerSet comb = statistical_combiner_singlecell(profiles, rho);
    CMatrix scattered = CMatrix::Zero(n, n);
    for (const auto& p : profiles) scattered += p.r_cov / double(n);
    for (std::size_t k = 0; k < profiles.size(); ++k) {
        const CVector g = comb.vectors.col(static_cast<Eigen::Index>(k));
        double quotient = 0.0;
        if (g.squaredNorm() > 0.0) {
            CMatrix denom = scattered;
            denom.diagonal().array() += 1.0 / rho;
            for (std::size_t i = 0; i < profiles.size(); ++i)
                if (i != k) denom += profiles[i].h_bar * profiles[i].h_bar.adjoint() / double(n);
            quotient = (std::norm(g.dot(profiles[k].h_bar)) / double(n)) / g.dot(denom * g).real();
        }
        out.full.push_back(in_log_base(std::log1p(quotient), config.log_base));
    }
    return out;
}

AsymptoticState build_q_multicell(const LinkTable& links, const NetworkEstimators& estimators, int j, double rho_d) {
    const int L = links.n_cells();
    const int K = links.n_users();
    const double n = double(links.n_antennas());
    std::vector<const UserLinkProfile*> local;
    for (int k = 0; k < K; ++k) local.push_back(&links(j, j, k));

    RVector traces(K);
    for (int k = 0; k < K; ++k) traces(k) = estimators.at(j, k).r_tilde.trace().real() / n;

    AsymptoticState s;
    s.serving_cell = j;
    fill_q(s, los_matrix(local), traces, rho_d);
    s.cross_traces = Eigen::MatrixXcd::Zero(L, K);
    for (int l = 0; l < L; ++l) {
        if (l == j) continue;
        for (int i = 0; i < K; ++i)
            s.cross_traces(l, i) =
                trace_of_product(estimators.at(j, i).cross_gain[static_cast<std::size_t>(l)], links(j, j, i).r_cov) / n;
    }
    return s;
}

MulticellConvDE se_conv_multicell_de(const AsymptoticState& s, const SystemConfig& config) {
    const double rho = s.snr_data;
    const double prelog = config.prelog();
    const Eigen::Index K = s.q_matrix.rows();
    const Eigen::Index L = s.cross_traces.rows();
    const RVector gamma = effective_sinr(s.gram, rho);

    MulticellConvDE out;
    for (Eigen::Index k = 0; k < K; ++k) {
        double inter = 0.0;
        for (Eigen::Index l = 0; l < L; ++l) {
            if (l == s.serving_cell) continue;
            for (Eigen::Index i = 0; i < K; ++i) inter += std::norm(s.q_matrix(k, i) * s.cross_traces(l, i));
        }
        const double num = std::norm(s.q_times_a(k, k));
        const double den = intra_interference(s, k) + noise_term(s, k) + inter;
        out.se.push_back(in_log_base(prelog * std::log1p(num / den), config.log_base));

        const double qkk = s.q_matrix(k, k).real();
        double pilot = 0.0, uncorrelated = 0.0;
        for (Eigen::Index l = 0; l < L; ++l) {
            if (l == s.serving_cell) continue;
            pilot += std::norm(rho * s.cross_traces(l, k));
            for (Eigen::Index i = 0; i < K; ++i)
                if (i != k) uncorrelated += std::norm(rho * s.q_matrix(k, i) / qkk * s.cross_traces(l, i));
        }
        const double g = gamma(k);
        const double sinr = g * g / (g + pilot + uncorrelated);
        out.se_expanded.push_back(in_log_base(prelog * std::log1p(sinr), config.log_base));
        out.pilot_contamination.push_back(pilot);
        out.uncorrelated.push_back(uncorrelated);
    }
    return out;
}

std::vector<double> se_conv_multicell_favorable(const AsymptoticState& s, const SystemConfig& config) {
    const double rho = s.snr_data;
    const double prelog = config.prelog();
    const Eigen::Index L = s.cross_traces.rows();
    std::vector<double> out;
    for (Eigen::Index k = 0; k < s.gram.rows(); ++k) {
        // (rho/N) tr Rtilde_k + (rho/N) |hbar_k|^2 is rho times the diagonal of A.
        const double x = rho * s.gram(k, k).real();
        double pilot = 0.0;
        for (Eigen::Index l = 0; l < L; ++l)
            if (l != s.serving_cell) pilot += std::norm(rho * s.cross_traces(l, k));
        out.push_back(in_log_base(prelog * std::log1p(x * x / (x + pilot)), config.log_base));
    }
    return out;
}

double pilot_contamination_term(std::span<const UserLinkProfile* const> same_pilot, std::size_t serving, int tau,
                                double rho_tr) {
    if (same_pilot.size() < 2) return 0.0;
    const EstimatorState est = build_estimator_multicell(same_pilot, serving, tau, rho_tr);
    const double n = double(same_pilot[serving]->n());
    cd total = 0.0;
    for (std::size_t l = 0; l < same_pilot.size(); ++l)
        if (l != serving) total += trace_of_product(est.cross_gain[l], same_pilot[serving]->r_cov);
    return std::max(0.0, total.real() / n);
}

std::vector<double> se_stat_multicell_de(std::span<const UserLinkProfile* const> local, const SystemConfig& config) {
    if (local.empty()) throw std::invalid_argument("asymptotics: no users");
    const int n = local.front()->n();
    const double rho = config.snr_data;
    std::vector<double> out;
    for (std::size_t k = 0; k < local.size(); ++k) {
        const CVector& hk = local[k]->h_bar;
        double v = 0.0;
        if (hk.squaredNorm() > 0.0) {
            CMatrix m = CMatrix::Zero(n, n);
            m.diagonal().array() += double(n) / rho;
            for (std::size_t i = 0; i < local.size(); ++i)
                if (i != k) m += local[i]->h_bar * local[i]->h_bar.adjoint();
            symmetrize(m);
            v = hk.dot(hermitian_factor(m).solve(hk)).real();
        }
        out.push_back(in_log_base(std::log1p(v), config.log_base));
    }
    return out;
}

}  // namespace mmimo
