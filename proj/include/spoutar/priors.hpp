#pragma once

#include <Eigen/Dense>

#include "spoutar/rng.hpp"

namespace spoutar {

/// Threshold level, slab s.d. and the upper bound of the uniform prior on
/// the threshold, for one of the L1/L2/A entry priors.
struct ThresholdPriorParams {
    double lambda = 0.0;
    double slab_sd = 1.0;
    double lambda_upper = 100.0;
};

struct HyperParams {
    double xi = 0.0;        // log-mean of the InvGauss prior on D entries
    double sigma_d = 10.0;  // prior s.d. of xi
    double l_shape = 0.01, l_scale = 0.01;  // InvGamma on sigma_L^2
    double a_shape = 0.1, a_scale = 0.1;    // InvGamma on sigma_A^2
};

double normal_cdf(double x);
double normal_logpdf(double x);

/// H_lambda(x) = x 1{|x| > lambda}.
double hard_threshold(double x, double lambda);

/// S_lambda(x) = sign(x) max(|x| - lambda, 0).
double soft_threshold(double x, double lambda);

/// Differentiable surrogate for 1{|x| > lambda}:
///   {1 + (2/pi) atan((x^2 - lambda^2)/h0)} / 2.
double smooth_indicator(double x, double lambda, double h0);

/// d/dx log smooth_indicator(x, lambda, h0).
double smooth_indicator_dlog(double x, double lambda, double h0);

/// Point mass at zero of the thresholded-normal prior,
/// Phi(lambda/sd) - Phi(-lambda/sd).
double threshold_prior_spike_mass(double lambda, double slab_sd);

double log_inv_gauss(double x, double mu, double shape);

/// Sum of InvGauss(exp(xi), 1) log densities; -inf for any nonpositive entry.
double log_prior_d(const Eigen::VectorXd& d, double xi);

/// Exact mixed density of the thresholded-normal prior: spike mass for
/// exact zeros (when lambda > 0), translated-normal slab otherwise. The slab
/// integrates to 1 - spike mass, so the pair is a proper distribution.
double log_prior_thresholded_entry(double x, const ThresholdPriorParams& par);
double log_prior_thresholded(const Eigen::VectorXd& entries,
                             const ThresholdPriorParams& par);

/// Conjugate InvGamma(shape + m/2, scale + sum e^2 / 2) draw for a slab
/// variance, where m counts only the nonzero (slab) entries.
double sample_slab_variance(const Eigen::VectorXd& entries, double shape,
                            double scale, Rng& rng);

double log_inv_gamma(double x, double shape, double scale);

/// Logistic(0, 1) log density, the prior induced on unconstrained pacfs.
double log_logistic01(double v);

}  // namespace spoutar
