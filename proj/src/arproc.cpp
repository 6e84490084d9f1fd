#include "spoutar/arproc.hpp"

#include <cmath>

#include "spoutar/errors.hpp"

namespace spoutar {

namespace {

void check_pacf_row(const Eigen::VectorXd& rho) {
    for (int k = 0; k < rho.size(); ++k) {
        if (!std::isfinite(rho[k]) || std::abs(rho[k]) >= 1.0)
            throw ValidationError("pacf entry outside (-1,1) at lag " +
                                  std::to_string(k + 1));
    }
}

}  // namespace

Eigen::VectorXd pacf_to_ar_row(const Eigen::VectorXd& rho) {
    check_pacf_row(rho);
    const int q = static_cast<int>(rho.size());
    Eigen::VectorXd phi = Eigen::VectorXd::Zero(q);
    Eigen::VectorXd prev = Eigen::VectorXd::Zero(q);
    for (int k = 0; k < q; ++k) {
        phi[k] = rho[k];
        for (int j = 0; j < k; ++j) phi[j] = prev[j] - rho[k] * prev[k - 1 - j];
        prev.head(k + 1) = phi.head(k + 1);
    }
    return phi;
}

Eigen::VectorXd ar_to_pacf_row(const Eigen::VectorXd& phi) {
    const int q = static_cast<int>(phi.size());
    Eigen::VectorXd work = phi;
    Eigen::VectorXd rho(q);
    for (int k = q - 1; k >= 1; --k) {
        const double r = work[k];
        if (!std::isfinite(r) || std::abs(r) >= 1.0)
            throw ValidationError("non-causal AR row (reflection coefficient " +
                                  std::to_string(r) + " at lag " +
                                  std::to_string(k + 1) + ")");
        rho[k] = r;
        Eigen::VectorXd next(k);
        const double denom = 1.0 - r * r;
        for (int j = 0; j < k; ++j)
            next[j] = (work[j] + r * work[k - 1 - j]) / denom;
        work = next;
    }
    if (!std::isfinite(work[0]) || std::abs(work[0]) >= 1.0)
        throw ValidationError("non-causal AR row (lag-1 pacf out of range)");
    rho[0] = work[0];
    return rho;
}

Eigen::VectorXd ar_to_acf_row(const Eigen::VectorXd& phi) {
    // Causality check doubles as the singularity guard: the Yule-Walker
    // system is well-posed exactly on the causal region.
    ar_to_pacf_row(phi);

    const int q = static_cast<int>(phi.size());
    // gamma_k = sum_j phi_j gamma_{|k-j|}, gamma_0 = 1, k = 1..q.
    Eigen::MatrixXd m = Eigen::MatrixXd::Identity(q, q);
    Eigen::VectorXd b(q);
    for (int k = 1; k <= q; ++k) {
        b[k - 1] = phi[k - 1];
        for (int j = 1; j <= q; ++j) {
            if (j == k) continue;
            const int lag = std::abs(k - j);  // in 1..q-1
            m(k - 1, lag - 1) -= phi[j - 1];
        }
    }
    Eigen::VectorXd gamma = m.partialPivLu().solve(b);
    if (!gamma.allFinite())
        throw ValidationError("singular Yule-Walker system");
    return gamma;
}

Eigen::VectorXd extend_acf_row(const Eigen::VectorXd& phi,
                               const Eigen::VectorXd& gamma, int lags) {
    const int q = static_cast<int>(phi.size());
    Eigen::VectorXd out(lags);
    for (int k = 1; k <= lags; ++k) {
        if (k <= q) {
            out[k - 1] = gamma[k - 1];
            continue;
        }
        double v = 0.0;
        for (int j = 1; j <= q; ++j) v += phi[j - 1] * out[k - j - 1];
        out[k - 1] = v;
    }
    return out;
}

double innovation_variance(const Eigen::VectorXd& phi,
                           const Eigen::VectorXd& gamma) {
    const double s2 = 1.0 - gamma.dot(phi);
    if (!(s2 > 0.0) || s2 > 1.0 + 1e-12)
        throw ValidationError("innovation variance outside (0,1]: " +
                              std::to_string(s2));
    return s2;
}

ArModelSet pacf_to_ar(const PacfSet& rho) {
    const int p = rho.p(), q = rho.q();
    ArModelSet out;
    out.psi.resize(p, q);
    out.gamma.resize(p, q);
    out.sigma.resize(p);
    for (int i = 0; i < p; ++i) {
        const Eigen::VectorXd phi = pacf_to_ar_row(rho.rho.row(i));
        const Eigen::VectorXd g = ar_to_acf_row(phi);
        out.psi.row(i) = phi;
        out.gamma.row(i) = g;
        out.sigma[i] = std::sqrt(innovation_variance(phi, g));
    }
    return out;
}

Eigen::MatrixXd ar_to_acf(const Eigen::MatrixXd& psi) {
    Eigen::MatrixXd out(psi.rows(), psi.cols());
    for (int i = 0; i < psi.rows(); ++i)
        out.row(i) = ar_to_acf_row(psi.row(i));
    return out;
}

PacfSet ar_to_pacf(const Eigen::MatrixXd& psi) {
    PacfSet out;
    out.rho.resize(psi.rows(), psi.cols());
    for (int i = 0; i < psi.rows(); ++i)
        out.rho.row(i) = ar_to_pacf_row(psi.row(i));
    return out;
}

double unconstrained_to_pacf_scalar(double v) {
    if (!std::isfinite(v)) throw ValidationError("non-finite unconstrained pacf");
    return std::tanh(0.5 * v);  // == 2*logistic(v) - 1
}

double pacf_to_unconstrained_scalar(double rho) {
    if (!(std::abs(rho) < 1.0))
        throw ValidationError("pacf outside (-1,1)");
    return std::log1p(rho) - std::log1p(-rho);  // logit((rho+1)/2)
}

PacfSet unconstrained_to_pacf(const UnconstrainedPacf& v) {
    PacfSet out;
    out.rho = v.v.unaryExpr(&unconstrained_to_pacf_scalar);
    return out;
}

UnconstrainedPacf pacf_to_unconstrained(const PacfSet& rho) {
    UnconstrainedPacf out;
    out.v = rho.rho.unaryExpr(&pacf_to_unconstrained_scalar);
    return out;
}

}  // namespace spoutar
