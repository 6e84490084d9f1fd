#include "spoutar/kernels.hpp"

#include <limits>
#include <utility>

namespace spoutar {

bool rw_mh_step(Eigen::VectorXd& x, double& logp,
                const std::function<double(const Eigen::VectorXd&)>& log_target,
                double scale, Rng& rng) {
    Eigen::VectorXd prop = x;
    for (int i = 0; i < prop.size(); ++i) prop[i] += scale * rng.normal();
    const double lp = log_target(prop);
    if (std::log(rng.uniform()) < lp - logp) {
        x = std::move(prop);
        logp = lp;
        return true;
    }
    return false;
}

double mala_log_q(const Eigen::VectorXd& to, const Eigen::VectorXd& from,
                  const Eigen::VectorXd& grad_from, double eps) {
    const Eigen::VectorXd mean = from + 0.5 * eps * eps * grad_from;
    return -(to - mean).squaredNorm() / (2.0 * eps * eps);
}

bool mala_step(Eigen::VectorXd& x, double& logp,
               const std::function<double(const Eigen::VectorXd&)>& log_target,
               const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& grad,
               double eps, Rng& rng) {
    const Eigen::VectorXd gx = grad(x);
    if (!gx.allFinite()) return false;
    Eigen::VectorXd prop = x + 0.5 * eps * eps * gx;
    for (int i = 0; i < prop.size(); ++i) prop[i] += eps * rng.normal();
    const double lp = log_target(prop);
    if (lp == -std::numeric_limits<double>::infinity()) return false;
    const Eigen::VectorXd gy = grad(prop);
    if (!gy.allFinite()) return false;
    const double log_alpha = lp - logp + mala_log_q(x, prop, gy, eps) -
                             mala_log_q(prop, x, gx, eps);
    if (std::log(rng.uniform()) < log_alpha) {
        x = std::move(prop);
        logp = lp;
        return true;
    }
    return false;
}

}  // namespace spoutar
