#include "spoutar/likelihood.hpp"

#include <cmath>
#include <limits>

#include "spoutar/errors.hpp"

namespace spoutar {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

Eigen::MatrixXd ar_residuals(const Eigen::MatrixXd& z,
                             const Eigen::MatrixXd& psi, int q) {
    const int p = static_cast<int>(z.rows());
    const int n = static_cast<int>(z.cols());
    Eigen::MatrixXd r = z.rightCols(n - q);
    for (int k = 0; k < q; ++k)
        r -= psi.col(k).asDiagonal() * z.middleCols(q - 1 - k, n - q);
    (void)p;
    return r;
}

double loglik_row(const Eigen::Ref<const Eigen::RowVectorXd>& z_row,
                  const Eigen::Ref<const Eigen::RowVectorXd>& phi,
                  double sigma, int q) {
    const int n = static_cast<int>(z_row.size());
    double ssq = 0.0;
    for (int t = q; t < n; ++t) {
        double r = z_row[t];
        for (int k = 0; k < q; ++k) r -= phi[k] * z_row[t - 1 - k];
        ssq += r * r;
    }
    return -(n - q) * std::log(sigma) - 0.5 * ssq / (sigma * sigma);
}

double loglik(const LikelihoodContext& ctx) {
    const int n = static_cast<int>(ctx.y.cols());
    if (n <= ctx.q)
        throw ValidationError("loglik requires n > q");
    const Eigen::MatrixXd z = to_latent(ctx.y, ctx.d, ctx.l, ctx.u);
    const Eigen::MatrixXd r = ar_residuals(z, ctx.psi, ctx.q);
    double total = 0.0;
    for (int i = 0; i < z.rows(); ++i) {
        const double s2 = ctx.sigma[i] * ctx.sigma[i];
        total += -(n - ctx.q) * std::log(ctx.sigma[i]) -
                 0.5 * r.row(i).squaredNorm() / s2;
    }
    return total;
}

Eigen::MatrixXd grad_z(const Eigen::MatrixXd& z, const Eigen::MatrixXd& psi,
                       const Eigen::VectorXd& sigma, int q) {
    const int p = static_cast<int>(z.rows());
    const int n = static_cast<int>(z.cols());
    const Eigen::MatrixXd r = ar_residuals(z, psi, q);
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(p, n);
    for (int i = 0; i < p; ++i) {
        const double inv_s2 = 1.0 / (sigma[i] * sigma[i]);
        for (int t = 0; t < n; ++t) {
            double v = 0.0;
            if (t >= q) v -= r(i, t - q);
            // Feedback: z_{i,t} appears with coefficient -phi_{i,j} in the
            // residual at time t + j.
            const int jmax = std::min(q, n - 1 - t);
            for (int j = 1; j <= jmax; ++j) {
                if (t + j < q) continue;
                v += r(i, t + j - q) * psi(i, j - 1);
            }
            g(i, t) = v * inv_s2;
        }
    }
    return g;
}

Eigen::MatrixXd grad_l(const LikelihoodContext& ctx) {
    const Eigen::MatrixXd z = to_latent(ctx.y, ctx.d, ctx.l, ctx.u);
    const Eigen::MatrixXd gz = grad_z(z, ctx.psi, ctx.sigma, ctx.q);
    Eigen::MatrixXd full =
        -(ctx.d.asDiagonal() * (ctx.u * gz)) * ctx.y.transpose();
    return full.triangularView<Eigen::StrictlyLower>();
}

Eigen::VectorXd grad_logd(const LikelihoodContext& ctx) {
    const Eigen::MatrixXd z = to_latent(ctx.y, ctx.d, ctx.l, ctx.u);
    const Eigen::MatrixXd gz = grad_z(z, ctx.psi, ctx.sigma, ctx.q);
    const Eigen::MatrixXd t = ctx.u * gz;
    const Eigen::MatrixXd b = ctx.y - ctx.l * ctx.y;  // (I - L) Y
    return t.cwiseProduct(b).rowwise().sum().cwiseProduct(ctx.d);
}

double log_posterior(const ModelParams& params, const PairedDataset& data,
                     const ModelConfig& cfg) {
    const int p = data.p();
    const auto& f = params.factors;

    if ((f.d.array() <= 0.0).any()) return kNegInf;
    if ((params.pacf.rho.array().abs() >= 1.0).any()) return kNegInf;
    if (params.lambda_l1 < cfg.lambda_lower ||
        params.lambda_l1 > cfg.lambda_upper ||
        params.lambda_l2 < cfg.lambda_lower ||
        params.lambda_l2 > cfg.lambda_upper ||
        params.lambda_a < cfg.lambda_lower ||
        params.lambda_a > cfg.lambda_upper)
        return kNegInf;
    if (params.sig2_l1 <= 0.0 || params.sig2_l2 <= 0.0 || params.sig2_a <= 0.0)
        return kNegInf;
    // A entries in (0, lambda_A] are unreachable under the hard-thresholded
    // proposal; keep them out of the support so the chain stays coherent.
    for (int e = 0; e < f.a.size(); ++e)
        if (f.a[e] != 0.0 && std::abs(f.a[e]) <= params.lambda_a)
            return kNegInf;

    const Eigen::MatrixXd u = cayley(skew_from_packed(f.a, p));
    const double logd_sum = f.d.array().log().sum();

    double total = 0.0;
    // n == q means every observation is conditioned on: vacuous likelihood.
    if (data.n1() > cfg.q) {
        LikelihoodContext ctx{params.ar.psi, params.ar.sigma, cfg.q,
                              data.y1,       f.d,             f.l1, u};
        total += loglik(ctx);
        total += (data.n1() - cfg.q) * logd_sum;
    } else if (data.n1() < cfg.q) {
        throw ValidationError("period 1 has fewer than q observations");
    }
    if (!cfg.single_period && !data.single_period()) {
        if (data.n2() > cfg.q) {
            LikelihoodContext ctx{params.ar.psi, params.ar.sigma, cfg.q,
                                  data.y2,       f.d,             f.l2, u};
            total += loglik(ctx);
            total += (data.n2() - cfg.q) * logd_sum;
        } else if (data.n2() < cfg.q) {
            throw ValidationError("period 2 has fewer than q observations");
        }
    }

    total += log_prior_d(f.d, params.xi);
    total += log_prior_thresholded(
        packed_from_strict_lower(f.l1),
        {params.lambda_l1, std::sqrt(params.sig2_l1), cfg.lambda_upper});
    if (!cfg.single_period)
        total += log_prior_thresholded(
            packed_from_strict_lower(f.l2),
            {params.lambda_l2, std::sqrt(params.sig2_l2), cfg.lambda_upper});
    total += log_prior_thresholded(
        f.a, {params.lambda_a, std::sqrt(params.sig2_a), cfg.lambda_upper});

    // Flat pacf prior contributes only its support indicator (checked above).
    // Hyperpriors:
    total += normal_logpdf(params.xi / cfg.sigma_d) - std::log(cfg.sigma_d);
    total += log_inv_gamma(params.sig2_l1, cfg.invgamma_l_shape,
                           cfg.invgamma_l_scale);
    if (!cfg.single_period)
        total += log_inv_gamma(params.sig2_l2, cfg.invgamma_l_shape,
                               cfg.invgamma_l_scale);
    total += log_inv_gamma(params.sig2_a, cfg.invgamma_a_shape,
                           cfg.invgamma_a_scale);
    return std::isfinite(total) ? total : kNegInf;
}

}  // namespace spoutar
