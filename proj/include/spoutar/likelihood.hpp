#pragma once

#include <Eigen/Dense>

#include "spoutar/arproc.hpp"
#include "spoutar/factorization.hpp"
#include "spoutar/priors.hpp"

namespace spoutar {

/// All sampled parameters of the model in their natural scale.
struct ModelParams {
    PrecisionFactors factors;
    PacfSet pacf;
    ArModelSet ar;  // derived from pacf, kept consistent by the sampler
    double lambda_l1 = 0.0, lambda_l2 = 0.0, lambda_a = 0.0;
    double sig2_l1 = 1.0, sig2_l2 = 1.0, sig2_a = 1.0;
    double xi = 0.0;
};

/// Static model/prior constants needed to evaluate the posterior.
struct ModelConfig {
    int q = 2;
    bool single_period = false;
    double lambda_lower = 0.0, lambda_upper = 100.0;
    double sigma_d = 10.0;
    double invgamma_l_shape = 0.01, invgamma_l_scale = 0.01;
    double invgamma_a_shape = 0.1, invgamma_a_scale = 0.1;
    double h0 = 1e-8;
};

/// One period's data together with the current AR parameters and factors
/// (U already materialized from A).
struct LikelihoodContext {
    const Eigen::MatrixXd& psi;
    const Eigen::VectorXd& sigma;
    int q;
    const Eigen::MatrixXd& y;
    const Eigen::VectorXd& d;
    const Eigen::MatrixXd& l;
    const Eigen::MatrixXd& u;
};

/// Residuals r_{i,t} = z_{i,t} - sum_k psi_{i,k} z_{i,t-k} for t = q..n-1
/// (0-based), as a p x (n-q) matrix.
Eigen::MatrixXd ar_residuals(const Eigen::MatrixXd& z,
                             const Eigen::MatrixXd& psi, int q);

/// Conditional Gaussian log-likelihood of the latent AR processes given the
/// first q observations of each series:
///   -(n-q) sum_i log sigma_i - sum_i ||r_i||^2 / (2 sigma_i^2),
/// evaluated at z = to_latent(y, d, l, u).
double loglik(const LikelihoodContext& ctx);

/// Per-series contribution of one latent row to loglik.
double loglik_row(const Eigen::Ref<const Eigen::RowVectorXd>& z_row,
                  const Eigen::Ref<const Eigen::RowVectorXd>& phi,
                  double sigma, int q);

/// Gradient of loglik with respect to Z: own-residual term for t past the
/// conditioning window plus feedback through every later residual that the
/// entry enters as a regressor.
Eigen::MatrixXd grad_z(const Eigen::MatrixXd& z, const Eigen::MatrixXd& psi,
                       const Eigen::VectorXd& sigma, int q);

/// Gradient with respect to the free entries of L:
///   -(D U grad_z) Y^T masked to the strict lower triangle.
Eigen::MatrixXd grad_l(const LikelihoodContext& ctx);

/// Gradient with respect to log D:
///   diag(U grad_z Y^T (I-L)^T) .* d.
Eigen::VectorXd grad_logd(const LikelihoodContext& ctx);

/// Joint log posterior of a parameter configuration. Sum of the per-period
/// conditional log-likelihoods, the latent-transform volume term
/// (n_k - q) sum_i log d_i per period, and all prior terms; -inf for any
/// constraint violation (so invalid proposals are rejectable, not fatal).
double log_posterior(const ModelParams& params, const PairedDataset& data,
                     const ModelConfig& cfg);

}  // namespace spoutar
