// SPDX-License-Identifier: Apache-2.0
#include "mmimo/combining.hpp"

#include <stdexcept>
#include <vector>

namespace mmimo {

CombinerSet conventional_combiner_multicell(const CMatrix& estimates, const CMatrix& design, double rho_d) {
    if (!(rho_d > 0.0)) throw std::invalid_argument("combiner: rho_d must be positive");
    const Eigen::Index n = estimates.rows();
    if (design.rows() != n || design.cols() != n) throw std::invalid_argument("combiner: design matrix size mismatch");
    CombinerSet out;
    out.kind = CombinerKind::conventional;
    out.regularizer = design;
    out.regularizer.diagonal().array() += double(n) / rho_d;
    out.regularizer.selfadjointView<Eigen::Lower>().rankUpdate(estimates);
    out.regularizer.triangularView<Eigen::StrictlyUpper>() = out.regularizer.adjoint();
    out.vectors = hermitian_factor(out.regularizer).solve(estimates);
    return out;
}

CombinerSet conventional_combiner_singlecell(const CMatrix& estimates, std::span<const CMatrix> error_covs,
                                             double rho_d) {
    const Eigen::Index n = estimates.rows();
    CMatrix design = CMatrix::Zero(n, n);
    for (const auto& e : error_covs) design += e;
    return conventional_combiner_multicell(estimates, design, rho_d);
}

CMatrix multicell_design_matrix(const LinkTable& links, const NetworkEstimators& estimators, int j) {
    const int n = links.n_antennas();
    CMatrix a = CMatrix::Zero(n, n);
    for (int i = 0; i < links.n_users(); ++i) a += estimators.at(j, i).err_cov;
    for (int l = 0; l < links.n_cells(); ++l) {
        if (l == j) continue;
        for (int i = 0; i < links.n_users(); ++i) a += links(j, l, i).r_cov;
    }
    return a;
}

CombinerSet statistical_combiner_multicell(std::span<const UserLinkProfile* const> local, double rho_d) {
    if (!(rho_d > 0.0)) throw std::invalid_argument("combiner: rho_d must be positive");
    if (local.empty()) throw std::invalid_argument("combiner: no users");
    const int n = local.front()->n();
    const auto k_users = static_cast<Eigen::Index>(local.size());

    CombinerSet out;
    out.kind = CombinerKind::statistical;
    out.regularizer = CMatrix::Zero(n, n);
    out.regularizer.diagonal().array() += double(n) / rho_d;
    for (const auto* p : local) out.regularizer += p->r_cov + p->h_bar * p->h_bar.adjoint();
    symmetrize(out.regularizer);

    out.vectors = CMatrix::Zero(n, k_users);
    for (Eigen::Index k = 0; k < k_users; ++k) {
        const CVector& hk = local[static_cast<std::size_t>(k)]->h_bar;
        if (hk.squaredNorm() == 0.0) continue;
        CMatrix m = CMatrix::Zero(n, n);
        m.diagonal().array() += double(n) / rho_d;
        for (Eigen::Index i = 0; i < k_users; ++i) {
            const auto* p = local[static_cast<std::size_t>(i)];
            m += p->r_cov;
            if (i != k) m += p->h_bar * p->h_bar.adjoint();
        }
        symmetrize(m);
        out.vectors.col(k) = hermitian_factor(m).solve(hk);
    }
    return out;
}

CombinerSet statistical_combiner_singlecell(std::span<const UserLinkProfile> profiles, double rho_d) {
    std::vector<const UserLinkProfile*> local;
    for (const auto& p : profiles) local.push_back(&p);
    return statistical_combiner_multicell(local, rho_d);
}

}  // namespace mmimo
