#pragma once

#include <Eigen/Dense>

namespace spoutar {

/// Partial autocorrelations for p series at lags 1..q; every entry must lie
/// strictly inside (-1, 1). This is the free parametrization of the set of
/// causal AR(q) models with unit marginal variance.
struct PacfSet {
    Eigen::MatrixXd rho;  // p x q

    int p() const { return static_cast<int>(rho.rows()); }
    int q() const { return static_cast<int>(rho.cols()); }
};

/// AR coefficients, autocovariances (lags 1..q, marginal variance 1) and
/// innovation standard deviations for p series.
struct ArModelSet {
    Eigen::MatrixXd psi;    // p x q  coefficients
    Eigen::MatrixXd gamma;  // p x q  autocovariances
    Eigen::VectorXd sigma;  // p      innovation s.d., sigma^2 in (0, 1]
};

/// Unrestricted reparametrization of a PacfSet, rho = 2*logistic(v) - 1.
struct UnconstrainedPacf {
    Eigen::MatrixXd v;  // p x q
};

// Row-level maps. Each row of a PacfSet/coefficient matrix is independent.

/// Durbin-Levinson recursion: pacf -> AR coefficients.
Eigen::VectorXd pacf_to_ar_row(const Eigen::VectorXd& rho);

/// Yule-Walker solve: AR coefficients -> autocovariances at lags 1..q under
/// unit marginal variance. Rejects non-causal rows.
Eigen::VectorXd ar_to_acf_row(const Eigen::VectorXd& phi);

/// Inverse Durbin-Levinson: AR coefficients -> pacf. Rejects rows whose
/// recursion leaves (-1, 1), i.e. non-causal polynomials.
Eigen::VectorXd ar_to_pacf_row(const Eigen::VectorXd& phi);

/// Extend autocovariances past lag q with the recursion
/// gamma_k = sum_j phi_j gamma_{k-j}; gamma[0] is lag 1.
Eigen::VectorXd extend_acf_row(const Eigen::VectorXd& phi,
                               const Eigen::VectorXd& gamma, int lags);

ArModelSet pacf_to_ar(const PacfSet& rho);
Eigen::MatrixXd ar_to_acf(const Eigen::MatrixXd& psi);
PacfSet ar_to_pacf(const Eigen::MatrixXd& psi);

PacfSet unconstrained_to_pacf(const UnconstrainedPacf& v);
UnconstrainedPacf pacf_to_unconstrained(const PacfSet& rho);

double unconstrained_to_pacf_scalar(double v);
double pacf_to_unconstrained_scalar(double rho);

/// sigma^2 = 1 - sum_k gamma_k phi_k; valid in (0, 1] for causal rows.
double innovation_variance(const Eigen::VectorXd& phi,
                           const Eigen::VectorXd& gamma);

}  // namespace spoutar
