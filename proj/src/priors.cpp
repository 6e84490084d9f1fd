#include "spoutar/priors.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "spoutar/errors.hpp"

namespace spoutar {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kLogSqrt2Pi = 0.9189385332046727;  // log sqrt(2 pi)
}  // namespace

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_logpdf(double x) { return -0.5 * x * x - kLogSqrt2Pi; }

double hard_threshold(double x, double lambda) {
    return std::abs(x) > lambda ? x : 0.0;
}

double soft_threshold(double x, double lambda) {
    const double m = std::abs(x) - lambda;
    return m > 0.0 ? (x > 0.0 ? m : -m) : 0.0;
}

double smooth_indicator(double x, double lambda, double h0) {
    return 0.5 * (1.0 + (2.0 / std::numbers::pi) *
                            std::atan((x * x - lambda * lambda) / h0));
}

double smooth_indicator_dlog(double x, double lambda, double h0) {
    const double t = (x * x - lambda * lambda) / h0;
    const double s = 0.5 * (1.0 + (2.0 / std::numbers::pi) * std::atan(t));
    const double ds = (2.0 * x / h0) / (std::numbers::pi * (1.0 + t * t));
    return ds / s;
}

double threshold_prior_spike_mass(double lambda, double slab_sd) {
    if (lambda <= 0.0) return 0.0;
    return normal_cdf(lambda / slab_sd) - normal_cdf(-lambda / slab_sd);
}

double log_inv_gauss(double x, double mu, double shape) {
    if (x <= 0.0) return kNegInf;
    const double r = x - mu;
    return 0.5 * std::log(shape) - kLogSqrt2Pi - 1.5 * std::log(x) -
           shape * r * r / (2.0 * mu * mu * x);
}

double log_prior_d(const Eigen::VectorXd& d, double xi) {
    const double mu = std::exp(xi);
    double total = 0.0;
    for (int i = 0; i < d.size(); ++i) {
        if (d[i] <= 0.0) return kNegInf;
        total += log_inv_gauss(d[i], mu, 1.0);
    }
    return total;
}

double log_prior_thresholded_entry(double x, const ThresholdPriorParams& par) {
    if (x == 0.0 && par.lambda > 0.0) {
        return std::log(threshold_prior_spike_mass(par.lambda, par.slab_sd));
    }
    return normal_logpdf((std::abs(x) + par.lambda) / par.slab_sd) -
           std::log(par.slab_sd);
}

double log_prior_thresholded(const Eigen::VectorXd& entries,
                             const ThresholdPriorParams& par) {
    double total = 0.0;
    for (int i = 0; i < entries.size(); ++i)
        total += log_prior_thresholded_entry(entries[i], par);
    return total;
}

double sample_slab_variance(const Eigen::VectorXd& entries, double shape,
                            double scale, Rng& rng) {
    if (shape <= 0.0 || scale <= 0.0)
        throw ValidationError("slab variance prior requires positive shape/scale");
    int m = 0;
    double ssq = 0.0;
    for (int i = 0; i < entries.size(); ++i) {
        if (entries[i] != 0.0) {
            ++m;
            ssq += entries[i] * entries[i];
        }
    }
    return rng.inv_gamma(shape + 0.5 * m, scale + 0.5 * ssq);
}

double log_inv_gamma(double x, double shape, double scale) {
    if (x <= 0.0) return kNegInf;
    return shape * std::log(scale) - std::lgamma(shape) -
           (shape + 1.0) * std::log(x) - scale / x;
}

double log_logistic01(double v) {
    const double a = std::abs(v);
    return -a - 2.0 * std::log1p(std::exp(-a));
}

}  // namespace spoutar
