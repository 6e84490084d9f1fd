#include "spoutar/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>

#include "spoutar/errors.hpp"

namespace spoutar {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

bool effective_single(const ChainConfig& cfg) { return cfg.single_period; }

int effective_order(const ChainConfig& cfg, int series) {
    return cfg.effective_orders.empty() ? cfg.q : cfg.effective_orders[series];
}

Eigen::VectorXd loglik_rows_for(const Eigen::MatrixXd& z,
                                const ArModelSet& ar, int q) {
    Eigen::VectorXd out(z.rows());
    for (int i = 0; i < z.rows(); ++i)
        out[i] = loglik_row(z.row(i), ar.psi.row(i), ar.sigma[i], q);
    return out;
}

// Likelihood gradient w.r.t. the packed strict-lower entries of L.
Eigen::VectorXd packed_grad_l(const Eigen::MatrixXd& z,
                              const Eigen::MatrixXd& y,
                              const ChainState& s, const ChainConfig& cfg) {
    const Eigen::MatrixXd gz =
        grad_z(z, s.params.ar.psi, s.params.ar.sigma, cfg.q);
    const Eigen::MatrixXd full = -(s.params.factors.d.asDiagonal() *
                                   (s.u * gz)) *
                                 y.transpose();
    return packed_from_strict_lower(full);
}

Eigen::VectorXd prior_drift_l(const Eigen::VectorXd& x, double lambda,
                              double sig2, double h0) {
    Eigen::VectorXd g(x.size());
    for (int e = 0; e < x.size(); ++e) {
        double v = -x[e] / sig2;
        if (lambda > 0.0) v += smooth_indicator_dlog(x[e], lambda, h0);
        g[e] = v;
    }
    return g;
}

// log P(|c + scale * N(0,1)| <= lambda), the point mass a thresholded
// proposal puts on zero.
double log_threshold_mass(double center, double lambda, double scale) {
    const double m = normal_cdf((lambda - center) / scale) -
                     normal_cdf((-lambda - center) / scale);
    return std::log(std::max(m, 1e-300));
}

bool a_support_ok(const Eigen::VectorXd& a, double lambda) {
    for (int e = 0; e < a.size(); ++e)
        if (a[e] != 0.0 && std::abs(a[e]) <= lambda) return false;
    return true;
}

ThresholdPriorParams a_prior(const ModelParams& p, const ChainConfig& c) {
    return {p.lambda_a, std::sqrt(p.sig2_a), c.lambda_upper};
}

}  // namespace

void ChainConfig::validate(int p) const {
    if (q < 1) throw ValidationError("AR order q must be >= 1");
    if (!(ar_only_until < thresholds_zero_until &&
          thresholds_zero_until <= burn_in && burn_in < total_iters))
        throw ValidationError(
            "schedule must satisfy ar_only_until < thresholds_zero_until <= "
            "burn_in < total_iters");
    auto band_ok = [](double lo, double hi) {
        return 0.0 < lo && lo < hi && hi < 1.0;
    };
    if (!band_ok(mh_band_lo, mh_band_hi) ||
        !band_ok(mala_band_lo, mala_band_hi))
        throw ValidationError("acceptance bands must lie inside (0,1)");
    if (tune_every < 1 || lambda_l_every < 1 || lambda_a_every < 1)
        throw ValidationError("update cadences must be positive");
    if (thinning < 1) throw ValidationError("thinning must be >= 1");
    if (lambda_lower < 0.0 || lambda_upper <= lambda_lower)
        throw ValidationError("threshold prior bounds invalid");
    if (!effective_orders.empty()) {
        if (static_cast<int>(effective_orders.size()) != p)
            throw ValidationError("effective_orders must have one entry per series");
        for (int e : effective_orders)
            if (e < 1 || e > q)
                throw ValidationError("effective order outside [1, q]");
    }
}

ModelConfig ChainConfig::model() const {
    ModelConfig m;
    m.q = q;
    m.single_period = single_period;
    m.lambda_lower = lambda_lower;
    m.lambda_upper = lambda_upper;
    m.sigma_d = sigma_d;
    m.invgamma_l_shape = invgamma_l_shape;
    m.invgamma_l_scale = invgamma_l_scale;
    m.invgamma_a_shape = invgamma_a_shape;
    m.invgamma_a_scale = invgamma_a_scale;
    m.h0 = h0;
    return m;
}

void PacfAdapt::push(const Eigen::VectorXd& v) {
    ++count;
    const Eigen::VectorXd delta = v - mean;
    mean += delta / static_cast<double>(count);
    m2 += delta * (v - mean).transpose();
}

Eigen::MatrixXd PacfAdapt::covariance() const {
    if (count < 2)
        return Eigen::MatrixXd::Identity(mean.size(), mean.size());
    return m2 / static_cast<double>(count - 1);
}

Eigen::MatrixXd shrunk_covariance(const Eigen::MatrixXd& y) {
    const int p = static_cast<int>(y.rows());
    const int n = static_cast<int>(y.cols());
    if (n < 2) throw ValidationError("need at least two time points per period");
    Eigen::MatrixXd x = y.colwise() - y.rowwise().mean();
    const Eigen::MatrixXd s = x * x.transpose() / n;
    const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(p, p);
    const double mu = s.trace() / p;
    const double d2 = (s - mu * eye).squaredNorm() / p;
    double bsum = 0.0;
    for (int t = 0; t < n; ++t) {
        const Eigen::VectorXd c = x.col(t);
        bsum += (c * c.transpose() - s).squaredNorm();
    }
    const double b2 = std::min(bsum / (static_cast<double>(n) * n) / p, d2);
    const double w = d2 > 0.0 ? b2 / d2 : 1.0;
    return (1.0 - w) * s + w * mu * eye;
}

ChainState hot_start(const PairedDataset& data, const ChainConfig& cfg,
                     Rng& rng) {
    const int p = data.p();
    const int q = cfg.q;
    const bool single = effective_single(cfg);
    if (data.n1() <= q || (!single && data.n2() <= q))
        throw ValidationError("each period needs more than q observations");
    if (!single && data.single_period())
        throw ValidationError("two-period fit requested but only one period of data given");
    if (!data.y1.allFinite() || (!single && !data.y2.allFinite()))
        throw ValidationError("non-finite observation");

    auto period_factors = [&](const Eigen::MatrixXd& y, const char* label) {
        for (int i = 0; i < p; ++i) {
            const double mean = y.row(i).mean();
            const double var =
                (y.row(i).array() - mean).square().sum() / y.cols();
            if (!(var > 1e-18 * (1.0 + mean * mean)))
                throw ValidationError(std::string("degenerate covariance in ") +
                                      label + ": variable " +
                                      std::to_string(i) + " is constant");
        }
        const Eigen::MatrixXd sigma = shrunk_covariance(y);
        Eigen::LLT<Eigen::MatrixXd> llt(sigma);
        if (llt.info() != Eigen::Success)
            throw ValidationError(std::string("degenerate covariance in ") +
                                  label + ": not positive definite");
        const Eigen::MatrixXd omega =
            llt.solve(Eigen::MatrixXd::Identity(p, p));
        return decompose_precision(omega);
    };

    ChainState s;
    auto [d1, l1] = period_factors(data.y1, "period 1");
    if (single) {
        s.params.factors.d = d1;
        s.params.factors.l1 = l1;
        s.params.factors.l2 = Eigen::MatrixXd::Zero(p, p);
    } else {
        auto [d2, l2] = period_factors(data.y2, "period 2");
        s.params.factors.d = 0.5 * (d1 + d2);
        s.params.factors.l1 = l1;
        s.params.factors.l2 = l2;
    }
    s.params.factors.a = Eigen::VectorXd::Zero(packed_size(p));
    s.u = Eigen::MatrixXd::Identity(p, p);

    const auto& f = s.params.factors;
    s.z1 = to_latent(data.y1, f.d, f.l1, s.u);
    if (!single) s.z2 = to_latent(data.y2, f.d, f.l2, s.u);

    // Yule-Walker AR fits on the latent rows, pooled across periods, then
    // converted to pacfs.
    s.params.pacf.rho = Eigen::MatrixXd::Zero(p, q);
    for (int i = 0; i < p; ++i) {
        const int eff = effective_order(cfg, i);
        Eigen::VectorXd acf = Eigen::VectorXd::Zero(eff + 1);
        Eigen::VectorXd counts = Eigen::VectorXd::Zero(eff + 1);
        auto accumulate = [&](const Eigen::MatrixXd& z) {
            const int n = static_cast<int>(z.cols());
            for (int m = 0; m <= eff && m < n; ++m) {
                for (int t = 0; t + m < n; ++t)
                    acf[m] += z(i, t) * z(i, t + m);
                counts[m] += n - m;
            }
        };
        accumulate(s.z1);
        if (!single) accumulate(s.z2);
        for (int m = 0; m <= eff; ++m)
            acf[m] = counts[m] > 0 ? acf[m] / counts[m] : 0.0;
        if (!(acf[0] > 0.0)) continue;  // leave pacf row at zero

        Eigen::MatrixXd r(eff, eff);
        for (int a = 0; a < eff; ++a)
            for (int b = 0; b < eff; ++b)
                r(a, b) = acf[std::abs(a - b)] / acf[0];
        r.diagonal().array() += 1e-8;
        Eigen::VectorXd rhs = acf.segment(1, eff) / acf[0];
        Eigen::VectorXd phi = r.partialPivLu().solve(rhs);

        for (int attempt = 0; attempt < 60; ++attempt) {
            try {
                Eigen::VectorXd rho = ar_to_pacf_row(phi);
                for (int k = 0; k < eff; ++k)
                    s.params.pacf.rho(i, k) =
                        std::clamp(rho[k], -0.995, 0.995);
                break;
            } catch (const ValidationError&) {
                phi *= 0.9;  // shrink toward white noise until causal
            }
        }
    }
    s.params.ar = pacf_to_ar(s.params.pacf);
    s.v = pacf_to_unconstrained(s.params.pacf).v;

    s.params.lambda_l1 = s.params.lambda_l2 = s.params.lambda_a = 0.0;
    s.params.xi = std::log(f.d.mean());
    s.params.sig2_l1 = sample_slab_variance(packed_from_strict_lower(f.l1),
                                            cfg.invgamma_l_shape,
                                            cfg.invgamma_l_scale, rng);
    s.params.sig2_l2 = single ? rng.inv_gamma(cfg.invgamma_l_shape,
                                              cfg.invgamma_l_scale)
                              : sample_slab_variance(
                                    packed_from_strict_lower(f.l2),
                                    cfg.invgamma_l_shape,
                                    cfg.invgamma_l_scale, rng);
    s.params.sig2_a = sample_slab_variance(f.a, cfg.invgamma_a_shape,
                                           cfg.invgamma_a_scale, rng);

    s.adapt.scale_a = cfg.init_scale_a;
    s.adapt.step_l1 = s.adapt.step_l2 = cfg.init_step_l;
    s.adapt.step_d = cfg.init_step_d;
    s.adapt.scale_lambda_l1 = s.adapt.scale_lambda_l2 =
        s.adapt.scale_lambda_a = cfg.init_scale_lambda;
    s.adapt.scale_xi = cfg.init_scale_xi;
    s.adapt.pacf_scale = Eigen::VectorXd::Constant(p, cfg.init_scale_pacf);
    s.adapt.pacf.resize(p);
    for (int i = 0; i < p; ++i) s.adapt.pacf[i].init(effective_order(cfg, i));
    s.adapt.pacf_empirical.assign(p, 0);
    s.adapt.pacf_counters.assign(p, AcceptanceCounter{});

    refresh_state(s, data, cfg);
    return s;
}

void refresh_state(ChainState& s, const PairedDataset& data,
                   const ChainConfig& cfg) {
    const int p = data.p();
    const auto& f = s.params.factors;
    s.u = cayley(skew_from_packed(f.a, p));
    s.z1 = to_latent(data.y1, f.d, f.l1, s.u);
    s.ll1_rows = loglik_rows_for(s.z1, s.params.ar, cfg.q);
    if (!effective_single(cfg)) {
        s.z2 = to_latent(data.y2, f.d, f.l2, s.u);
        s.ll2_rows = loglik_rows_for(s.z2, s.params.ar, cfg.q);
    } else {
        s.z2.resize(0, 0);
        s.ll2_rows = Eigen::VectorXd::Zero(p);
    }
    s.log_post = log_posterior(s.params, data, cfg.model());
}

bool mh_step_a(ChainState& s, const PairedDataset& data,
               const ChainConfig& cfg, Rng& rng) {
    auto& f = s.params.factors;
    const int p = f.dim();
    const int m = static_cast<int>(f.a.size());
    auto& counter = s.adapt.counters["A"];
    if (m == 0) return false;

    const double lam = s.params.lambda_a;
    const double sc = s.adapt.scale_a;
    const bool single = effective_single(cfg);

    Eigen::VectorXd prop(m);
    double log_q = 0.0;  // log q(x|y) - log q(y|x), nonzero only across the spike
    for (int e = 0; e < m; ++e) {
        const double x = f.a[e];
        const double raw = x + sc * rng.normal();
        const double y = hard_threshold(raw, lam);
        prop[e] = y;
        if (lam <= 0.0) continue;  // no spike: plain symmetric walk
        if (x != 0.0 && y == 0.0)
            log_q += normal_logpdf(x / sc) - std::log(sc) -
                     log_threshold_mass(x, lam, sc);
        else if (x == 0.0 && y != 0.0)
            log_q += log_threshold_mass(y, lam, sc) -
                     (normal_logpdf(y / sc) - std::log(sc));
    }

    Eigen::MatrixXd u_prop;
    try {
        u_prop = cayley(skew_from_packed(prop, p));
    } catch (const ValidationError&) {
        counter.add(false);
        return false;
    }
    const Eigen::MatrixXd z1 = to_latent(data.y1, f.d, f.l1, u_prop);
    const Eigen::VectorXd ll1 = loglik_rows_for(z1, s.params.ar, cfg.q);
    Eigen::MatrixXd z2;
    Eigen::VectorXd ll2 = Eigen::VectorXd::Zero(p);
    if (!single) {
        z2 = to_latent(data.y2, f.d, f.l2, u_prop);
        ll2 = loglik_rows_for(z2, s.params.ar, cfg.q);
    }

    const auto prior = a_prior(s.params, cfg);
    const double delta = ll1.sum() + ll2.sum() - s.ll1_rows.sum() -
                         s.ll2_rows.sum() +
                         log_prior_thresholded(prop, prior) -
                         log_prior_thresholded(f.a, prior);

    const bool ok = std::log(rng.uniform()) < delta + log_q;
    if (ok) {
        f.a = prop;
        s.u = u_prop;
        s.z1 = z1;
        s.ll1_rows = ll1;
        if (!single) {
            s.z2 = z2;
            s.ll2_rows = ll2;
        }
        s.log_post += delta;
    }
    counter.add(ok);
    return ok;
}

bool mala_step_l(ChainState& s, const PairedDataset& data,
                 const ChainConfig& cfg, int period, Rng& rng) {
    auto& f = s.params.factors;
    const int m = packed_size(f.dim());
    const char* name = period == 1 ? "L1" : "L2";
    auto& counter = s.adapt.counters[name];
    if (m == 0) return false;

    const Eigen::MatrixXd& y = period == 1 ? data.y1 : data.y2;
    Eigen::MatrixXd& lmat = period == 1 ? f.l1 : f.l2;
    Eigen::MatrixXd& zcur = period == 1 ? s.z1 : s.z2;
    Eigen::VectorXd& llcur = period == 1 ? s.ll1_rows : s.ll2_rows;
    const double lam = period == 1 ? s.params.lambda_l1 : s.params.lambda_l2;
    const double sig2 = period == 1 ? s.params.sig2_l1 : s.params.sig2_l2;
    const double eps = period == 1 ? s.adapt.step_l1 : s.adapt.step_l2;

    const Eigen::VectorXd x = packed_from_strict_lower(lmat);
    const Eigen::VectorXd gx = packed_grad_l(zcur, y, s, cfg) +
                               prior_drift_l(x, lam, sig2, cfg.h0);
    if (!gx.allFinite()) {
        s.adapt.shrink_flag[name] = true;
        counter.add(false);
        return false;
    }

    Eigen::VectorXd prop = x + 0.5 * eps * eps * gx;
    for (int e = 0; e < m; ++e) prop[e] += eps * rng.normal();

    const Eigen::MatrixXd l_prop = strict_lower_from_packed(prop, f.dim());
    const Eigen::MatrixXd z_prop = to_latent(y, f.d, l_prop, s.u);
    const Eigen::VectorXd ll_prop = loglik_rows_for(z_prop, s.params.ar, cfg.q);

    const ThresholdPriorParams prior{lam, std::sqrt(sig2), cfg.lambda_upper};
    const double delta = ll_prop.sum() - llcur.sum() +
                         log_prior_thresholded(prop, prior) -
                         log_prior_thresholded(x, prior);

    Eigen::VectorXd gy;
    {
        const Eigen::MatrixXd gz =
            grad_z(z_prop, s.params.ar.psi, s.params.ar.sigma, cfg.q);
        const Eigen::MatrixXd full =
            -(f.d.asDiagonal() * (s.u * gz)) * y.transpose();
        gy = packed_from_strict_lower(full) +
             prior_drift_l(prop, lam, sig2, cfg.h0);
    }
    if (!gy.allFinite()) {
        s.adapt.shrink_flag[name] = true;
        counter.add(false);
        return false;
    }

    const double log_alpha = delta + mala_log_q(x, prop, gy, eps) -
                             mala_log_q(prop, x, gx, eps);
    const bool ok = std::log(rng.uniform()) < log_alpha;
    if (ok) {
        lmat = l_prop;
        zcur = z_prop;
        llcur = ll_prop;
        s.log_post += delta;
    }
    counter.add(ok);
    return ok;
}

bool mala_step_logd(ChainState& s, const PairedDataset& data,
                    const ChainConfig& cfg, Rng& rng) {
    auto& f = s.params.factors;
    const int p = f.dim();
    auto& counter = s.adapt.counters["D"];
    const bool single = effective_single(cfg);
    const double eps = s.adapt.step_d;
    const int jac_n = (data.n1() - cfg.q) +
                      (single ? 0 : (data.n2() - cfg.q));
    const double mu = std::exp(s.params.xi);

    auto drift = [&](const Eigen::VectorXd& d, const Eigen::MatrixXd& z1,
                     const Eigen::MatrixXd& z2) {
        Eigen::VectorXd g = Eigen::VectorXd::Zero(p);
        {
            const Eigen::MatrixXd gz =
                grad_z(z1, s.params.ar.psi, s.params.ar.sigma, cfg.q);
            const Eigen::MatrixXd b = data.y1 - f.l1 * data.y1;
            g += (s.u * gz).cwiseProduct(b).rowwise().sum().cwiseProduct(d);
        }
        if (!single) {
            const Eigen::MatrixXd gz =
                grad_z(z2, s.params.ar.psi, s.params.ar.sigma, cfg.q);
            const Eigen::MatrixXd b = data.y2 - f.l2 * data.y2;
            g += (s.u * gz).cwiseProduct(b).rowwise().sum().cwiseProduct(d);
        }
        // data-volume term, InvGauss prior in log scale, and the
        // log-parametrization Jacobian
        for (int i = 0; i < p; ++i)
            g[i] += jac_n - 1.5 - d[i] / (2.0 * mu * mu) + 0.5 / d[i] + 1.0;
        return g;
    };

    const Eigen::VectorXd x = f.d.array().log();
    const Eigen::VectorXd gx = drift(f.d, s.z1, s.z2);
    if (!gx.allFinite()) {
        s.adapt.shrink_flag["D"] = true;
        counter.add(false);
        return false;
    }

    Eigen::VectorXd prop = x + 0.5 * eps * eps * gx;
    for (int e = 0; e < p; ++e) prop[e] += eps * rng.normal();
    const Eigen::VectorXd d_prop = prop.array().exp();
    if (!d_prop.allFinite() || (d_prop.array() <= 0.0).any()) {
        counter.add(false);
        return false;
    }

    const Eigen::MatrixXd z1 = to_latent(data.y1, d_prop, f.l1, s.u);
    const Eigen::VectorXd ll1 = loglik_rows_for(z1, s.params.ar, cfg.q);
    Eigen::MatrixXd z2;
    Eigen::VectorXd ll2 = Eigen::VectorXd::Zero(p);
    if (!single) {
        z2 = to_latent(data.y2, d_prop, f.l2, s.u);
        ll2 = loglik_rows_for(z2, s.params.ar, cfg.q);
    }

    const double delta = ll1.sum() + ll2.sum() - s.ll1_rows.sum() -
                         s.ll2_rows.sum() +
                         jac_n * (prop.sum() - x.sum()) +
                         log_prior_d(d_prop, s.params.xi) -
                         log_prior_d(f.d, s.params.xi);

    const Eigen::VectorXd gy = drift(d_prop, z1, z2);
    if (!gy.allFinite()) {
        s.adapt.shrink_flag["D"] = true;
        counter.add(false);
        return false;
    }

    // prop.sum() - x.sum() is the log-scale parametrization Jacobian.
    const double log_alpha = delta + (prop.sum() - x.sum()) +
                             mala_log_q(x, prop, gy, eps) -
                             mala_log_q(prop, x, gx, eps);
    const bool ok = std::log(rng.uniform()) < log_alpha;
    if (ok) {
        f.d = d_prop;
        s.z1 = z1;
        s.ll1_rows = ll1;
        if (!single) {
            s.z2 = z2;
            s.ll2_rows = ll2;
        }
        s.log_post += delta;
    }
    counter.add(ok);
    return ok;
}

bool mh_step_xi(ChainState& s, const ChainConfig& cfg, Rng& rng) {
    auto& counter = s.adapt.counters["xi"];
    const double xi = s.params.xi;
    const double prop = xi + s.adapt.scale_xi * rng.normal();
    const auto& d = s.params.factors.d;
    const double delta = log_prior_d(d, prop) - log_prior_d(d, xi) +
                         normal_logpdf(prop / cfg.sigma_d) -
                         normal_logpdf(xi / cfg.sigma_d);
    const bool ok = std::log(rng.uniform()) < delta;
    if (ok) {
        s.params.xi = prop;
        s.log_post += delta;
    }
    counter.add(ok);
    return ok;
}

int adaptive_mh_step_pacf(ChainState& s, const PairedDataset& data,
                          const ChainConfig& cfg, Rng& rng,
                          const DiagSink& sink) {
    (void)data;
    const int p = s.params.pacf.p();
    const int q = cfg.q;
    const bool single = effective_single(cfg);
    int n_accepted = 0;

    for (int i = 0; i < p; ++i) {
        const int eff = effective_order(cfg, i);
        auto& ad = s.adapt.pacf[i];
        const bool use_emp = ad.count >= cfg.adapt_min_history;
        if (use_emp && !s.adapt.pacf_empirical[i]) {
            s.adapt.pacf_empirical[i] = 1;
            s.adapt.pacf_scale[i] = 1.0;
        }
        const double mult = s.adapt.pacf_scale[i];

        Eigen::MatrixXd cov;
        if (use_emp) {
            const double sd = 2.38 * 2.38 / eff;
            cov = sd * mult * mult *
                  (ad.covariance() +
                   cfg.adapt_reg * Eigen::MatrixXd::Identity(eff, eff));
        } else {
            cov = mult * mult * Eigen::MatrixXd::Identity(eff, eff);
        }
        Eigen::LLT<Eigen::MatrixXd> llt(cov);
        Eigen::MatrixXd chol = llt.matrixL();

        Eigen::VectorXd noise(eff);
        for (int k = 0; k < eff; ++k) noise[k] = rng.normal();
        const Eigen::VectorXd vcur = s.v.row(i).head(eff);
        const Eigen::VectorXd vprop = vcur + chol * noise;

        // Map to pacf space; saturated tanh means a non-causal request.
        Eigen::VectorXd rho_row = Eigen::VectorXd::Zero(q);
        bool valid = true;
        for (int k = 0; k < eff; ++k) {
            rho_row[k] = std::tanh(0.5 * vprop[k]);
            if (std::abs(rho_row[k]) >= 1.0 - 1e-15) valid = false;
        }

        bool ok = false;
        if (valid) {
            const Eigen::VectorXd phi = pacf_to_ar_row(rho_row);
            const Eigen::VectorXd gamma = ar_to_acf_row(phi);
            const double sigma =
                std::sqrt(innovation_variance(phi, gamma));

            const double ll1 = loglik_row(s.z1.row(i), phi.transpose(),
                                          sigma, q);
            const double ll2 =
                single ? 0.0
                       : loglik_row(s.z2.row(i), phi.transpose(), sigma, q);

            double delta = ll1 + ll2 - s.ll1_rows[i] - s.ll2_rows[i];
            double jac = 0.0;
            for (int k = 0; k < eff; ++k)
                jac += log_logistic01(vprop[k]) - log_logistic01(vcur[k]);

            ok = std::log(rng.uniform()) < delta + jac;
            if (ok) {
                s.v.row(i).head(eff) = vprop;
                s.params.pacf.rho.row(i) = rho_row;
                s.params.ar.psi.row(i) = phi;
                s.params.ar.gamma.row(i) = gamma;
                s.params.ar.sigma[i] = sigma;
                s.ll1_rows[i] = ll1;
                if (!single) s.ll2_rows[i] = ll2;
                s.log_post += delta;
                ++n_accepted;
            }
        }
        s.adapt.pacf_counters[i].add(ok);
        if (!s.adapt.frozen) ad.push(s.v.row(i).head(eff));
        if (sink) sink({s.iter, "pacf", ok, s.log_post});
    }
    return n_accepted;
}

namespace {

// One log-scale random-walk MH update of a threshold level. `entries` are the
// values the prior applies to; `support_guard` enforces the reachable set for
// hard-thresholded blocks.
void lambda_mh(ChainState& s, const ChainConfig& cfg, Rng& rng,
               const Eigen::VectorXd& entries, double& lambda, double sig2,
               double scale, const char* name, bool guard_support,
               const DiagSink& sink) {
    auto& counter = s.adapt.counters[name];
    const double x = std::log(lambda);
    const double xp = x + scale * rng.normal();
    const double lam_prop = std::exp(xp);

    bool ok = false;
    if (lam_prop <= cfg.lambda_upper && lam_prop >= cfg.lambda_lower &&
        (!guard_support || a_support_ok(entries, lam_prop))) {
        const double sd = std::sqrt(sig2);
        const double delta =
            log_prior_thresholded(entries, {lam_prop, sd, cfg.lambda_upper}) -
            log_prior_thresholded(entries, {lambda, sd, cfg.lambda_upper});
        ok = std::log(rng.uniform()) < delta + (xp - x);
        if (ok) {
            lambda = lam_prop;
            s.log_post += delta;
        }
    }
    counter.add(ok);
    if (sink) sink({s.iter, name, ok, s.log_post});
}

}  // namespace

void update_thresholds(ChainState& s, const PairedDataset& data,
                       const ChainConfig& cfg, int iter, Rng& rng,
                       const DiagSink& sink) {
    (void)data;
    if (iter <= cfg.thresholds_zero_until) return;
    const bool single = effective_single(cfg);
    auto& pr = s.params;
    const auto& f = pr.factors;

    // Schedule action at the phase boundary: a log-scale walk cannot leave
    // zero, so thresholds are seeded with a small positive value once.
    auto seed = [&](double& lambda, const Eigen::VectorXd& entries,
                    double sig2, bool guard) {
        if (lambda != 0.0) return;
        // The slab-variance prior is heavy-tailed; keep the seed well inside
        // the uniform threshold support regardless of the drawn sig2.
        double val = std::min(1e-3 * std::sqrt(sig2),
                              1e-4 * cfg.lambda_upper);
        if (guard) {
            double min_nz = std::numeric_limits<double>::infinity();
            for (int e = 0; e < entries.size(); ++e)
                if (entries[e] != 0.0)
                    min_nz = std::min(min_nz, std::abs(entries[e]));
            if (std::isfinite(min_nz)) val = std::min(val, 0.5 * min_nz);
        }
        const double sd = std::sqrt(sig2);
        const double before =
            log_prior_thresholded(entries, {0.0, sd, cfg.lambda_upper});
        const double after =
            log_prior_thresholded(entries, {val, sd, cfg.lambda_upper});
        lambda = val;
        s.log_post += after - before;
    };
    seed(pr.lambda_l1, packed_from_strict_lower(f.l1), pr.sig2_l1, false);
    if (!single)
        seed(pr.lambda_l2, packed_from_strict_lower(f.l2), pr.sig2_l2, false);
    seed(pr.lambda_a, f.a, pr.sig2_a, true);

    if (iter % cfg.lambda_l_every == 0) {
        lambda_mh(s, cfg, rng, packed_from_strict_lower(f.l1), pr.lambda_l1,
                  pr.sig2_l1, s.adapt.scale_lambda_l1, "lambda_L1", false,
                  sink);
        if (!single)
            lambda_mh(s, cfg, rng, packed_from_strict_lower(f.l2),
                      pr.lambda_l2, pr.sig2_l2, s.adapt.scale_lambda_l2,
                      "lambda_L2", false, sink);
    }
    if (iter % cfg.lambda_a_every == 0)
        lambda_mh(s, cfg, rng, f.a, pr.lambda_a, pr.sig2_a,
                  s.adapt.scale_lambda_a, "lambda_A", true, sink);
}

void update_slab_variances(ChainState& s, const ChainConfig& cfg, Rng& rng) {
    auto& pr = s.params;
    const auto& f = pr.factors;
    const bool single = effective_single(cfg);

    auto gibbs = [&](double& sig2, const Eigen::VectorXd& entries,
                     double lambda, double shape, double scale) {
        const double prop =
            sample_slab_variance(entries, shape, scale, rng);
        const double before =
            log_prior_thresholded(entries,
                                  {lambda, std::sqrt(sig2), cfg.lambda_upper}) +
            log_inv_gamma(sig2, shape, scale);
        const double after =
            log_prior_thresholded(entries,
                                  {lambda, std::sqrt(prop), cfg.lambda_upper}) +
            log_inv_gamma(prop, shape, scale);
        sig2 = prop;
        s.log_post += after - before;
    };

    gibbs(pr.sig2_l1, packed_from_strict_lower(f.l1), pr.lambda_l1,
          cfg.invgamma_l_shape, cfg.invgamma_l_scale);
    if (!single)
        gibbs(pr.sig2_l2, packed_from_strict_lower(f.l2), pr.lambda_l2,
              cfg.invgamma_l_shape, cfg.invgamma_l_scale);
    gibbs(pr.sig2_a, f.a, pr.lambda_a, cfg.invgamma_a_shape,
          cfg.invgamma_a_scale);
}

namespace {

struct BlockScale {
    const char* name;
    double* scale;
    bool mala;
};

void process_window(ChainState& s, const ChainConfig& cfg, int iter,
                    Diagnostics& diag) {
    const bool tuning = iter <= cfg.burn_in;
    const BandTuner mh{cfg.mh_band_lo, cfg.mh_band_hi, 0.1};
    const BandTuner mala{cfg.mala_band_lo, cfg.mala_band_hi, 0.1};
    auto& ad = s.adapt;

    const BlockScale blocks[] = {
        {"A", &ad.scale_a, false},
        {"L1", &ad.step_l1, true},
        {"L2", &ad.step_l2, true},
        {"D", &ad.step_d, true},
        {"xi", &ad.scale_xi, false},
        {"lambda_L1", &ad.scale_lambda_l1, false},
        {"lambda_L2", &ad.scale_lambda_l2, false},
        {"lambda_A", &ad.scale_lambda_a, false},
    };
    for (const auto& b : blocks) {
        auto it = ad.counters.find(b.name);
        if (it == ad.counters.end() || it->second.proposed == 0) continue;
        const double rate = it->second.rate();
        diag.windows.push_back({iter, b.name, rate, it->second.proposed,
                                tuning});
        if (iter > cfg.burn_in) {
            auto& tot = diag.post_burn_totals[b.name];
            tot.first += it->second.accepted;
            tot.second += it->second.proposed;
        }
        if (tuning) {
            if (ad.shrink_flag[b.name]) {
                *b.scale *= std::exp(-0.1);
                ad.shrink_flag[b.name] = false;
            } else {
                (b.mala ? mala : mh).adjust(rate, *b.scale);
            }
        }
        it->second.reset();
    }

    long acc = 0, prop = 0;
    for (int i = 0; i < static_cast<int>(ad.pacf_counters.size()); ++i) {
        auto& c = ad.pacf_counters[i];
        if (c.proposed == 0) continue;
        acc += c.accepted;
        prop += c.proposed;
        if (tuning) mh.adjust(c.rate(), ad.pacf_scale[i]);
        c.reset();
    }
    if (prop > 0) {
        diag.windows.push_back({iter, "pacf",
                                static_cast<double>(acc) / prop,
                                static_cast<int>(prop), tuning});
        if (iter > cfg.burn_in) {
            auto& tot = diag.post_burn_totals["pacf"];
            tot.first += acc;
            tot.second += prop;
        }
    }
}

}  // namespace

RunResult run_chain(const PairedDataset& data, const ChainConfig& cfg,
                    const DiagSink& sink) {
    cfg.validate(data.p());
    Rng rng(cfg.seed);
    ChainState s = hot_start(data, cfg, rng);

    const int p = data.p();
    const bool single = effective_single(cfg);

    RunResult out;
    out.draws.p = p;
    out.draws.q = cfg.q;
    out.draws.single_period = single;
    out.draws.thinning = cfg.thinning;
    out.draws.names = data.names;

    Eigen::MatrixXd omega1_sum = Eigen::MatrixXd::Zero(p, p);
    Eigen::MatrixXd omega2_sum = Eigen::MatrixXd::Zero(p, p);
    int kept = 0;

    for (int iter = 1; iter <= cfg.total_iters; ++iter) {
        s.iter = iter;
        const bool full = iter > cfg.ar_only_until;
        if (full) {
            bool ok = mh_step_a(s, data, cfg, rng);
            if (sink) sink({iter, "A", ok, s.log_post});
            ok = mala_step_l(s, data, cfg, 1, rng);
            if (sink) sink({iter, "L1", ok, s.log_post});
            if (!single) {
                ok = mala_step_l(s, data, cfg, 2, rng);
                if (sink) sink({iter, "L2", ok, s.log_post});
            }
            ok = mala_step_logd(s, data, cfg, rng);
            if (sink) sink({iter, "D", ok, s.log_post});
            if (iter > cfg.thresholds_zero_until) {
                ok = mh_step_xi(s, cfg, rng);
                if (sink) sink({iter, "xi", ok, s.log_post});
            }
        }
        adaptive_mh_step_pacf(s, data, cfg, rng, sink);
        if (full) {
            update_thresholds(s, data, cfg, iter, rng, sink);
            update_slab_variances(s, cfg, rng);
        }

        if (iter % cfg.tune_every == 0)
            process_window(s, cfg, iter, out.diag);
        if (iter == cfg.burn_in) s.adapt.frozen = true;

        out.diag.logpost_trace.push_back(s.log_post);

        if (iter % 1000 == 0) {
            const double fresh = log_posterior(s.params, data, cfg.model());
            if (std::isfinite(fresh) && std::isfinite(s.log_post))
                out.diag.max_resync_error = std::max(
                    out.diag.max_resync_error, std::abs(fresh - s.log_post));
            s.log_post = fresh;
        }

        if (iter > cfg.burn_in &&
            (iter - cfg.burn_in) % cfg.thinning == 0) {
            const auto& f = s.params.factors;
            if (cfg.store_draws) {
                out.draws.d.push_back(f.d);
                out.draws.l1.push_back(packed_from_strict_lower(f.l1));
                out.draws.l2.push_back(packed_from_strict_lower(f.l2));
                out.draws.a.push_back(f.a);
                out.draws.rho.push_back(s.params.pacf.rho);
            }
            omega1_sum += assemble_precision(f.d, f.l1);
            if (!single) omega2_sum += assemble_precision(f.d, f.l2);
            ++kept;
        }
    }

    if (kept > 0) {
        out.draws.omega1_mean = omega1_sum / kept;
        if (!single) out.draws.omega2_mean = omega2_sum / kept;
    }
    out.diag.stored_draws = cfg.store_draws ? kept : 0;
    return out;
}

std::uint64_t state_hash(const ChainState& s) {
    std::uint64_t h = 1469598103934665603ULL;
    auto mix = [&h](const double* ptr, long n) {
        const unsigned char* bytes =
            reinterpret_cast<const unsigned char*>(ptr);
        for (long i = 0; i < n * static_cast<long>(sizeof(double)); ++i) {
            h ^= bytes[i];
            h *= 1099511628211ULL;
        }
    };
    const auto& pr = s.params;
    mix(pr.factors.d.data(), pr.factors.d.size());
    mix(pr.factors.l1.data(), pr.factors.l1.size());
    mix(pr.factors.l2.data(), pr.factors.l2.size());
    mix(pr.factors.a.data(), pr.factors.a.size());
    mix(pr.pacf.rho.data(), pr.pacf.rho.size());
    mix(s.v.data(), s.v.size());
    const double scalars[] = {pr.lambda_l1, pr.lambda_l2, pr.lambda_a,
                              pr.sig2_l1,   pr.sig2_l2,   pr.sig2_a,
                              pr.xi};
    mix(scalars, 7);
    return h;
}

}  // namespace spoutar
