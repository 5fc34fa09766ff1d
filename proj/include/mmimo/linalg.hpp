// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "mmimo/types.hpp"

#include <span>

namespace mmimo {

/// Eigendecomposition A = V diag(values) V^H of a Hermitian matrix, values ascending.
struct HermitianEigen {
    RVector values;
    CMatrix vectors;
};

/// Decomposes the Hermitian part of `a`. Throws NumericalError on solver failure.
HermitianEigen hermitian_eigen(const CMatrix& a);

/// V diag(d) V^H.
CMatrix from_spectrum(const CMatrix& v, const RVector& d);

/// Replaces `a` by (a + a^H)/2.
void symmetrize(CMatrix& a);

/// max |a - a^H| entrywise.
double hermitian_defect(const CMatrix& a);

/// Re tr(A B) without forming the product.
double trace_product(const CMatrix& a, const CMatrix& b);

/// Sum with pairwise (cascade) summation; result depends only on the input order.
double pairwise_sum(std::span<const double> values);

/// Cholesky factorization of a Hermitian positive definite matrix; throws on failure.
Eigen::LLT<CMatrix> hermitian_factor(const CMatrix& a);

}  // namespace mmimo
