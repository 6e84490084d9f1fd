#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>

#include "spoutar/rng.hpp"

namespace spoutar {

/// Acceptance bookkeeping for one proposal block over one tuning window.
struct AcceptanceCounter {
    int proposed = 0;
    int accepted = 0;

    void add(bool ok) {
        ++proposed;
        if (ok) ++accepted;
    }
    double rate() const {
        return proposed > 0 ? static_cast<double>(accepted) / proposed : 0.0;
    }
    void reset() { proposed = accepted = 0; }
};

/// Multiplicative scale tuning: when a window's acceptance rate exits the
/// target band, move the scale by exp(+-step) in the direction that
/// re-enters it (larger scale lowers acceptance).
struct BandTuner {
    double lo = 0.15;
    double hi = 0.40;
    double step = 0.1;

    // Returns true if the scale changed.
    bool adjust(double rate, double& scale) const {
        if (rate < lo) {
            scale *= std::exp(-step);
            return true;
        }
        if (rate > hi) {
            scale *= std::exp(step);
            return true;
        }
        return false;
    }
};

/// Symmetric random-walk Metropolis step on a vector state. log_target must
/// return -inf for out-of-support proposals. Returns whether the proposal
/// was accepted; x and logp are updated in place on acceptance.
bool rw_mh_step(Eigen::VectorXd& x, double& logp,
                const std::function<double(const Eigen::VectorXd&)>& log_target,
                double scale, Rng& rng);

/// Metropolis-adjusted Langevin step with drift (eps^2/2) grad(x) and the
/// exact asymmetric-proposal correction. The drift may come from a surrogate
/// gradient; the acceptance ratio stays exact for log_target.
bool mala_step(Eigen::VectorXd& x, double& logp,
               const std::function<double(const Eigen::VectorXd&)>& log_target,
               const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& grad,
               double eps, Rng& rng);

/// log N(to; from + (eps^2/2) g(from), eps^2 I), the MALA proposal density.
double mala_log_q(const Eigen::VectorXd& to, const Eigen::VectorXd& from,
                  const Eigen::VectorXd& grad_from, double eps);

}  // namespace spoutar
