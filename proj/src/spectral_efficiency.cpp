// SPDX-License-Identifier: Apache-2.0
#include "mmimo/spectral_efficiency.hpp"

#include "mmimo/parallel.hpp"

#include <cmath>
#include <stdexcept>

namespace mmimo {

std::string_view scheme_name(Scheme scheme) {
    switch (scheme) {
        case Scheme::conv_single: return "conv_single";
        case Scheme::stat_single: return "stat_single";
        case Scheme::conv_multi: return "conv_multi";
        case Scheme::stat_multi: return "stat_multi";
    }
    return "unknown";
}

double SEReport::mean_se() const {
    if (per_user_se.empty()) return 0.0;
    return pairwise_sum(per_user_se) / double(per_user_se.size());
}

double conventional_sinr(const CVector& g, const CMatrix& estimates, Eigen::Index k, const CMatrix& cross_means,
                         const CMatrix& residual_cov, double noise_scale) {
    const Eigen::RowVectorXcd proj = g.adjoint() * estimates;
    double interference = 0.0;
    for (Eigen::Index i = 0; i < proj.size(); ++i)
        if (i != k) interference += std::norm(proj(i));
    if (cross_means.cols() > 0) interference += (g.adjoint() * cross_means).squaredNorm();
    interference += g.dot(residual_cov * g).real();
    interference += noise_scale * g.squaredNorm();
    return std::norm(proj(k)) / interference;
}

namespace {

void check_network(const LinkTable& links, const SystemConfig& config) {
    config.validate();
    if (links.n_cells() != config.n_cells || links.n_users() != config.n_users ||
        links.n_antennas() != config.n_antennas)
        throw std::invalid_argument("network dimensions disagree with the system configuration");
}

// Per base station data shared by every trial at one configuration.
struct StationPlan {
    CMatrix base;      // A_j + (N/rho_d) I
    CMatrix residual;  // sum_i E_jji + sum_{l != j, i} Cov[h_jli | y_ji]
};

class ConventionalEngine {
public:
    ConventionalEngine(const LinkTable& links, const SystemConfig& config)
        : links_(links), config_(config), L_(links.n_cells()), K_(links.n_users()), N_(links.n_antennas()) {
        estimators_ = build_network_estimators(links, config.training_len, config.snr_training);
        noise_scale_ = double(N_) / config.snr_data;
        plans_.resize(static_cast<std::size_t>(L_));
        for (int j = 0; j < L_; ++j) {
            StationPlan& p = plans_[static_cast<std::size_t>(j)];
            p.base = multicell_design_matrix(links, estimators_, j);
            p.base.diagonal().array() += noise_scale_;
            p.residual = CMatrix::Zero(N_, N_);
            for (int i = 0; i < K_; ++i) {
                const EstimatorState& est = estimators_.at(j, i);
                p.residual += est.err_cov;
                for (int l = 0; l < L_; ++l)
                    if (l != j) p.residual += est.cross_cov[static_cast<std::size_t>(l)];
            }
        }
    }

    // Writes log(1 + SINR) of every (j, k) for trials [first, first + count) into
    // out[(j K + k) * trials + t].
    void run_block(std::size_t first, std::size_t count, std::uint64_t seed, std::size_t trials,
                   std::vector<double>& out) const {
        const auto nb = static_cast<Eigen::Index>(count);
        const std::size_t n_links = static_cast<std::size_t>(L_ * L_ * K_);
        const std::size_t n_pilots = static_cast<std::size_t>(L_ * K_);

        std::vector<CMatrix> scatter(n_links, CMatrix(N_, nb));
        std::vector<CMatrix> noise(n_pilots, CMatrix(N_, nb));
        for (Eigen::Index t = 0; t < nb; ++t) {
            RngStream rng = RngStream::substream(seed, StreamTag::trial, first + static_cast<std::size_t>(t));
            for (auto& z : scatter) {
                auto col = z.col(t);
                rng.fill_complex_normal(col);
            }
            for (auto& z : noise) {
                auto col = z.col(t);
                rng.fill_complex_normal(col);
            }
        }

        // Channels h_jlk = h_bar + R^{1/2} z, then the centred observations y_jk - h_bar_jjk.
        const double pilot_scale = std::sqrt(estimators_.at(0, 0).pilot_noise);
        std::vector<CMatrix> centred(n_pilots);
        for (int j = 0; j < L_; ++j) {
            for (int k = 0; k < K_; ++k) {
                CMatrix y = pilot_scale * noise[static_cast<std::size_t>(j * K_ + k)];
                for (int l = 0; l < L_; ++l) {
                    const UserLinkProfile& p = links_(j, l, k);
                    const std::size_t idx = static_cast<std::size_t>((j * L_ + l) * K_ + k);
                    y.noalias() += p.r_sqrt * scatter[idx];
                    if (l != j) y.colwise() += p.h_bar;
                }
                centred[static_cast<std::size_t>(j * K_ + k)] = std::move(y);
            }
        }

        for (int j = 0; j < L_; ++j) {
            const StationPlan& plan = plans_[static_cast<std::size_t>(j)];
            // Estimates of local channels and conditional means of same-pilot inter-cell links.
            std::vector<CMatrix> est(static_cast<std::size_t>(K_));
            std::vector<CMatrix> cross(static_cast<std::size_t>(L_ * K_));
            for (int k = 0; k < K_; ++k) {
                const EstimatorState& e = estimators_.at(j, k);
                const CMatrix& u = centred[static_cast<std::size_t>(j * K_ + k)];
                CMatrix hat = e.gain * u;
                hat.colwise() += links_(j, j, k).h_bar;
                est[static_cast<std::size_t>(k)] = std::move(hat);
                for (int l = 0; l < L_; ++l)
                    if (l != j) cross[static_cast<std::size_t>(l * K_ + k)] = e.cross_gain[static_cast<std::size_t>(l)] * u;
            }

            CMatrix h_hat(N_, K_);
            CMatrix means(N_, (L_ - 1) * K_);
            for (Eigen::Index t = 0; t < nb; ++t) {
                for (int k = 0; k < K_; ++k) h_hat.col(k) = est[static_cast<std::size_t>(k)].col(t);
                Eigen::Index c = 0;
                for (int l = 0; l < L_; ++l) {
                    if (l == j) continue;
                    for (int k = 0; k < K_; ++k) means.col(c++) = cross[static_cast<std::size_t>(l * K_ + k)].col(t);
                }

                CMatrix gram = plan.base;
                gram.selfadjointView<Eigen::Lower>().rankUpdate(h_hat);
                Eigen::LLT<CMatrix> llt(gram);
                if (llt.info() != Eigen::Success) throw NumericalError("combiner factorization failed");
                const CMatrix g = llt.solve(h_hat);

                const CMatrix proj = g.adjoint() * h_hat;
                const CMatrix resid = plan.residual * g;
                CMatrix leak;
                if (means.cols() > 0) leak = g.adjoint() * means;
                for (int k = 0; k < K_; ++k) {
                    double interference = 0.0;
                    for (int i = 0; i < K_; ++i)
                        if (i != k) interference += std::norm(proj(k, i));
                    if (means.cols() > 0) interference += leak.row(k).squaredNorm();
                    interference += g.col(k).dot(resid.col(k)).real();
                    interference += noise_scale_ * g.col(k).squaredNorm();
                    const double sinr = std::norm(proj(k, k)) / interference;
                    out[static_cast<std::size_t>(j * K_ + k) * trials + first + static_cast<std::size_t>(t)] =
                        std::log1p(sinr);
                }
            }
        }
    }

private:
    const LinkTable& links_;
    SystemConfig config_;
    int L_, K_, N_;
    NetworkEstimators estimators_;
    double noise_scale_ = 0.0;
    std::vector<StationPlan> plans_;
};

std::vector<SEReport> run_conventional(const LinkTable& links, const SystemConfig& config,
                                       const MonteCarloOptions& options, Scheme scheme) {
    check_network(links, config);
    if (options.trials == 0) throw std::invalid_argument("Monte Carlo evaluation requires at least one trial");
    const int L = links.n_cells();
    const int K = links.n_users();
    const std::size_t trials = options.trials;

    const ConventionalEngine engine(links, config);
    std::vector<double> values(static_cast<std::size_t>(L * K) * trials);
    const std::size_t blocks = (trials + kTrialBlock - 1) / kTrialBlock;
    const unsigned workers = options.workers == 0 ? default_workers() : options.workers;
    parallel_for(blocks, workers, [&](std::size_t b) {
        const std::size_t first = b * kTrialBlock;
        engine.run_block(first, std::min(kTrialBlock, trials - first), options.seed, trials, values);
    });

    const double prelog = config.prelog();
    std::vector<SEReport> reports(static_cast<std::size_t>(L));
    for (int j = 0; j < L; ++j) {
        SEReport& r = reports[static_cast<std::size_t>(j)];
        r.scheme = scheme;
        r.trials = trials;
        r.seed = options.seed;
        r.prelog = prelog;
        r.snr_data = config.snr_data;
        r.log_base = config.log_base;
        for (int k = 0; k < K; ++k) {
            std::span<const double> v(values.data() + static_cast<std::size_t>(j * K + k) * trials, trials);
            const double mean = pairwise_sum(v) / double(trials);
            std::vector<double> dev(trials);
            for (std::size_t t = 0; t < trials; ++t) dev[t] = (v[t] - mean) * (v[t] - mean);
            const double var = trials > 1 ? pairwise_sum(dev) / double(trials - 1) : 0.0;
            r.per_user_se.push_back(in_log_base(prelog * mean, config.log_base));
            r.per_user_stderr.push_back(in_log_base(prelog * std::sqrt(var / double(trials)), config.log_base));
            if (options.keep_sinr_samples) {
                std::vector<double> s(trials);
                for (std::size_t t = 0; t < trials; ++t) s[t] = std::expm1(v[t]);
                r.sinr_samples.push_back(std::move(s));
            }
        }
    }
    return reports;
}

std::vector<SEReport> run_statistical(const LinkTable& links, const SystemConfig& config, Scheme scheme) {
    if (links.n_cells() < 1 || links.n_users() < 1) throw std::invalid_argument("empty network");
    if (!(config.snr_data > 0.0)) throw ConfigError("snr_data", "must be strictly positive");
    const int L = links.n_cells();
    const int K = links.n_users();
    const int N = links.n_antennas();
    const double noise_scale = double(N) / config.snr_data;

    std::vector<SEReport> reports(static_cast<std::size_t>(L));
    for (int j = 0; j < L; ++j) {
        std::vector<const UserLinkProfile*> local;
        for (int k = 0; k < K; ++k) local.push_back(&links(j, j, k));
        const CombinerSet comb = statistical_combiner_multicell(local, config.snr_data);

        // Second moment of all received signals at base station j.
        CMatrix total = CMatrix::Zero(N, N);
        total.diagonal().array() += noise_scale;
        for (int l = 0; l < L; ++l)
            for (int i = 0; i < K; ++i) {
                const UserLinkProfile& p = links(j, l, i);
                total += p.r_cov;
                if (l == j) total += p.h_bar * p.h_bar.adjoint();
            }
        symmetrize(total);

        SEReport& r = reports[static_cast<std::size_t>(j)];
        r.scheme = scheme;
        r.prelog = 1.0;
        r.snr_data = config.snr_data;
        r.log_base = config.log_base;
        for (int k = 0; k < K; ++k) {
            const CVector g = comb.vectors.col(k);
            const CVector& hk = links(j, j, k).h_bar;
            double sinr = 0.0;
            if (g.squaredNorm() > 0.0) {
                CMatrix denom = total - hk * hk.adjoint();
                const double q = g.dot(denom * g).real();
                sinr = std::norm(g.dot(hk)) / q;
            }
            r.per_user_se.push_back(in_log_base(std::log1p(sinr), config.log_base));
        }
    }
    return reports;
}

}  // namespace

SEReport se_conv_singlecell_mc(std::span<const UserLinkProfile> profiles, const SystemConfig& config,
                               const MonteCarloOptions& options) {
    if (config.n_cells != 1) throw ConfigError("l", "single-cell evaluation requires L = 1");
    const LinkTable links = LinkTable::single_cell(profiles);
    return run_conventional(links, config, options, Scheme::conv_single).front();
}

std::vector<SEReport> se_conv_multicell_mc(const LinkTable& links, const SystemConfig& config,
                                           const MonteCarloOptions& options) {
    return run_conventional(links, config, options, Scheme::conv_multi);
}

SEReport se_stat_singlecell(std::span<const UserLinkProfile> profiles, const SystemConfig& config) {
    const LinkTable links = LinkTable::single_cell(profiles);
    return run_statistical(links, config, Scheme::stat_single).front();
}

std::vector<SEReport> se_stat_multicell(const LinkTable& links, const SystemConfig& config) {
    return run_statistical(links, config, Scheme::stat_multi);
}

}  // namespace mmimo
