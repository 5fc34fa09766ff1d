// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

namespace mmimo {

using cd = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

enum class LogBase { natural, base2 };

/// Raised for invalid user-facing configuration. `field()` names the offending key.
class ConfigError : public std::invalid_argument {
public:
    ConfigError(std::string field, const std::string& message)
        : std::invalid_argument(field.empty() ? message : field + ": " + message),
          field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// Raised when an iterative or factorization step fails numerically.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Global scalars of one uplink evaluation point.
struct SystemConfig {
    int n_antennas = 0;     // N
    int n_users = 0;        // K, users per cell
    int n_cells = 1;        // L
    int coherence_len = 0;  // T
    int training_len = 0;   // tau
    double snr_data = 1.0;      // rho_d (linear)
    double snr_training = 1.0;  // rho_tr (linear)
    LogBase log_base = LogBase::natural;

    /// Throws ConfigError when K <= tau < T or positivity is violated.
    void validate() const;

    /// 1 - tau/T.
    double prelog() const { return 1.0 - double(training_len) / double(coherence_len); }

    /// 1/(tau * rho_tr), the effective pilot noise variance.
    double pilot_noise() const { return 1.0 / (double(training_len) * snr_training); }
};

/// Converts a value in nats to the requested base.
inline double in_log_base(double nats, LogBase base) {
    return base == LogBase::natural ? nats : nats / std::log(2.0);
}

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

}  // namespace mmimo
