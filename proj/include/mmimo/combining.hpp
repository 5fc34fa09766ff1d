// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "mmimo/estimation.hpp"

#include <span>

namespace mmimo {

enum class CombinerKind { conventional, statistical };

struct CombinerSet {
    CMatrix vectors;  // column k is the receive vector of user k
    CombinerKind kind = CombinerKind::conventional;
    // Conventional: the matrix inverted for every user. Statistical: the matrix before the
    // rank-one removal of user k's own LoS term.
    CMatrix regularizer;
};

/// g_k = (H H^H + sum_i E_i + (N/rho_d) I)^{-1} h_k for the columns h_k of `estimates`,
/// with one Cholesky factorization shared by all users.
CombinerSet conventional_combiner_singlecell(const CMatrix& estimates, std::span<const CMatrix> error_covs,
                                             double rho_d);

/// g_k = (H H^H + A + (N/rho_d) I)^{-1} h_k for an arbitrary Hermitian PSD design matrix A.
CombinerSet conventional_combiner_multicell(const CMatrix& estimates, const CMatrix& design, double rho_d);

/// A_j = sum_i E_jji + sum_{l != j} sum_i R_jli.
CMatrix multicell_design_matrix(const LinkTable& links, const NetworkEstimators& estimators, int j);

/// g_k = (sum_i R_i + Hbar_k Hbar_k^H + (N/rho_d) I)^{-1} hbar_k, Hbar_k without column k.
CombinerSet statistical_combiner_singlecell(std::span<const UserLinkProfile> profiles, double rho_d);

/// Same construction from the local links of one base station only.
CombinerSet statistical_combiner_multicell(std::span<const UserLinkProfile* const> local, double rho_d);

}  // namespace mmimo
