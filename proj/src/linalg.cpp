// SPDX-License-Identifier: Apache-2.0
#include "mmimo/linalg.hpp"

#include <cmath>

namespace mmimo {

void SystemConfig::validate() const {
    if (n_antennas < 1) throw ConfigError("n", "antenna count must be positive");
    if (n_users < 1) throw ConfigError("k", "user count must be positive");
    if (n_cells < 1) throw ConfigError("l", "cell count must be positive");
    if (coherence_len < 1) throw ConfigError("t", "coherence length must be positive");
    if (training_len < n_users)
        throw ConfigError("tau", "K ≤ τ violated (tau=" + std::to_string(training_len) +
                                     ", K=" + std::to_string(n_users) + ")");
    if (training_len >= coherence_len)
        throw ConfigError("tau", "τ < T violated (tau=" + std::to_string(training_len) +
                                     ", T=" + std::to_string(coherence_len) + ")");
    if (!(snr_data > 0.0) || !std::isfinite(snr_data))
        throw ConfigError("snr_data", "must be strictly positive");
    if (!(snr_training > 0.0) || !std::isfinite(snr_training))
        throw ConfigError("snr_training", "must be strictly positive");
}

HermitianEigen hermitian_eigen(const CMatrix& a) {
    CMatrix h = a;
    symmetrize(h);
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(h);
    if (solver.info() != Eigen::Success) throw NumericalError("Hermitian eigensolver did not converge");
    return {solver.eigenvalues(), solver.eigenvectors()};
}

CMatrix from_spectrum(const CMatrix& v, const RVector& d) {
    CMatrix scaled = v * d.cast<cd>().asDiagonal();
    CMatrix out = scaled * v.adjoint();
    symmetrize(out);
    return out;
}

void symmetrize(CMatrix& a) {
    CMatrix t = 0.5 * (a + a.adjoint());
    a = std::move(t);
}

double hermitian_defect(const CMatrix& a) {
    if (a.size() == 0) return 0.0;
    return (a - a.adjoint()).cwiseAbs().maxCoeff();
}

double trace_product(const CMatrix& a, const CMatrix& b) {
    // tr(AB) = sum_ij A_ij B_ji
    return (a.array() * b.transpose().array()).sum().real();
}

double pairwise_sum(std::span<const double> values) {
    const std::size_t n = values.size();
    if (n == 0) return 0.0;
    if (n <= 8) {
        double s = 0.0;
        for (double v : values) s += v;
        return s;
    }
    const std::size_t half = n / 2;
    return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

Eigen::LLT<CMatrix> hermitian_factor(const CMatrix& a) {
    Eigen::LLT<CMatrix> llt(a);
    if (llt.info() != Eigen::Success) throw NumericalError("Cholesky factorization failed (matrix not positive definite)");
    return llt;
}

}  // namespace mmimo
