#include <doctest.h>

#include <cmath>

#include "spoutar/errors.hpp"
#include "spoutar/likelihood.hpp"
#include "test_util.hpp"

using namespace spoutar;
using test::random_matrix;
using test::random_pacf;
using test::random_strict_lower;
using test::random_vector;

namespace {

// Direct z-space log-likelihood used by the finite-difference oracles.
double ll_of_z(const Eigen::MatrixXd& z, const ArModelSet& ar, int q) {
    double total = 0.0;
    for (int i = 0; i < z.rows(); ++i)
        total += loglik_row(z.row(i), ar.psi.row(i), ar.sigma[i], q);
    return total;
}

struct Instance {
    Eigen::MatrixXd y;
    Eigen::VectorXd d;
    Eigen::MatrixXd l;
    Eigen::MatrixXd u;
    ArModelSet ar;
    int q;

    LikelihoodContext ctx() const {
        return {ar.psi, ar.sigma, q, y, d, l, u};
    }
};

Instance random_instance(int p, int n, int q, Rng& rng) {
    Instance ins;
    ins.q = q;
    ins.y = random_matrix(p, n, rng);
    ins.d = random_vector(p, rng).array().abs() + 0.4;
    ins.l = random_strict_lower(p, rng, 0.4);
    ins.u = cayley(skew_from_packed(
        random_vector(packed_size(p), rng, 0.4), p));
    ins.ar = pacf_to_ar(random_pacf(p, q, rng, 0.8));
    return ins;
}

// Naive per-residual accumulation, an independent oracle for loglik.
double naive_loglik(const Instance& ins) {
    const Eigen::MatrixXd z = to_latent(ins.y, ins.d, ins.l, ins.u);
    const int n = static_cast<int>(z.cols());
    double total = 0.0;
    for (int i = 0; i < z.rows(); ++i) {
        for (int t = ins.q; t < n; ++t) {
            double r = z(i, t);
            for (int k = 1; k <= ins.q; ++k)
                r -= ins.ar.psi(i, k - 1) * z(i, t - k);
            total += -0.5 * r * r / (ins.ar.sigma[i] * ins.ar.sigma[i]);
        }
        total += -(n - ins.q) * std::log(ins.ar.sigma[i]);
    }
    return total;
}

}  // namespace

TEST_CASE("loglik: trivial cases") {
    const int p = 2, n = 8, q = 2;
    Instance ins;
    ins.q = q;
    ins.y = Eigen::MatrixXd::Zero(p, n);
    ins.d = Eigen::VectorXd::Ones(p);
    ins.l = Eigen::MatrixXd::Zero(p, p);
    ins.u = Eigen::MatrixXd::Identity(p, p);
    Rng ar_rng(1);
    ins.ar = pacf_to_ar(random_pacf(p, q, ar_rng, 0.5));
    // zero data: the quadratic term vanishes, only normalization remains
    double expected = 0.0;
    for (int i = 0; i < p; ++i)
        expected += -(n - q) * std::log(ins.ar.sigma[i]);
    CHECK(loglik(ins.ctx()) == doctest::Approx(expected).epsilon(1e-13));

    // phi = 0, sigma = 1, identity factors: white-noise likelihood
    Rng rng(2);
    ins.y = random_matrix(p, n, rng);
    ins.ar.psi.setZero();
    ins.ar.gamma.setZero();
    ins.ar.sigma.setOnes();
    const double white = -0.5 * ins.y.rightCols(n - q).squaredNorm();
    CHECK(loglik(ins.ctx()) == doctest::Approx(white).epsilon(1e-13));
}

TEST_CASE("loglik matches the naive accumulation oracle") {
    Rng rng(31);
    const Instance ins = random_instance(3, 12, 2, rng);
    CHECK(loglik(ins.ctx()) ==
          doctest::Approx(naive_loglik(ins)).epsilon(1e-12));
}

TEST_CASE("loglik rejects n <= q") {
    Rng rng(4);
    Instance ins = random_instance(2, 3, 3, rng);
    CHECK_THROWS_AS(loglik(ins.ctx()), ValidationError);
}

TEST_CASE("loglik is invariant under a row sign flip of Z") {
    Rng rng(5);
    const Instance ins = random_instance(3, 15, 2, rng);
    Eigen::MatrixXd z = to_latent(ins.y, ins.d, ins.l, ins.u);
    const double base = ll_of_z(z, ins.ar, ins.q);
    z.row(1) *= -1.0;
    CHECK(ll_of_z(z, ins.ar, ins.q) == doctest::Approx(base).epsilon(1e-13));
}

TEST_CASE("grad_z: trivial cases") {
    const int p = 2, n = 9, q = 2;
    Rng ar_rng(6);
    ArModelSet ar = pacf_to_ar(random_pacf(p, q, ar_rng, 0.5));
    CHECK(grad_z(Eigen::MatrixXd::Zero(p, n), ar.psi, ar.sigma, q).norm() ==
          0.0);

    // phi = 0: entry (i,t) = -z_{i,t}/sigma_i^2 past the window, 0 inside
    Rng rng(7);
    const Eigen::MatrixXd z = random_matrix(p, n, rng);
    ar.psi.setZero();
    const Eigen::MatrixXd g = grad_z(z, ar.psi, ar.sigma, q);
    for (int i = 0; i < p; ++i)
        for (int t = 0; t < n; ++t) {
            const double expect =
                t < q ? 0.0 : -z(i, t) / (ar.sigma[i] * ar.sigma[i]);
            CHECK(g(i, t) == doctest::Approx(expect).epsilon(1e-13));
        }
}

TEST_CASE("grad_z matches central finite differences") {
    Rng rng(8);
    for (int rep = 0; rep < 20; ++rep) {
        const int p = 2 + static_cast<int>(rng.integer(3));
        const int q = 1 + static_cast<int>(rng.integer(3));
        const int n = q + 6 + static_cast<int>(rng.integer(20));
        const ArModelSet ar = pacf_to_ar(random_pacf(p, q, rng, 0.8));
        const Eigen::MatrixXd z = random_matrix(p, n, rng);
        const Eigen::MatrixXd g = grad_z(z, ar.psi, ar.sigma, q);
        double max_rel = 0.0;
        for (int i = 0; i < p; ++i)
            for (int t = 0; t < n; ++t) {
                const double fd = test::central_diff(
                    [&](double v) {
                        Eigen::MatrixXd zz = z;
                        zz(i, t) = v;
                        return ll_of_z(zz, ar, q);
                    },
                    z(i, t));
                const double scale = std::max(1.0, std::abs(fd));
                max_rel = std::max(max_rel, std::abs(g(i, t) - fd) / scale);
            }
        CHECK(max_rel < 1e-5);
    }
}

TEST_CASE("grad_l: zero at a perfect fit") {
    // zero data gives zero residuals, hence a zero gradient
    const int p = 3, n = 10, q = 1;
    Instance ins;
    ins.q = q;
    ins.y = Eigen::MatrixXd::Zero(p, n);
    ins.d = Eigen::VectorXd::Ones(p);
    Rng l_rng(3);
    ins.l = random_strict_lower(p, l_rng, 0.3);
    ins.u = Eigen::MatrixXd::Identity(p, p);
    Rng ar_rng(9);
    ins.ar = pacf_to_ar(random_pacf(p, q, ar_rng, 0.5));
    CHECK(grad_l(ins.ctx()).norm() == 0.0);
}

TEST_CASE("grad_l: scalar finite difference at p = 2") {
    Rng rng(10);
    const Instance ins = random_instance(2, 12, 2, rng);
    const Eigen::MatrixXd g = grad_l(ins.ctx());
    const double fd = test::central_diff(
        [&](double v) {
            Instance tmp = ins;
            tmp.l(1, 0) = v;
            return loglik(tmp.ctx());
        },
        ins.l(1, 0));
    CHECK(g(1, 0) == doctest::Approx(fd).epsilon(1e-6));
}

TEST_CASE("grad_l matches the explicit Kronecker construction") {
    Rng rng(11);
    const int p = 4, n = 12, q = 2;
    const Instance ins = random_instance(p, n, q, rng);
    const Eigen::MatrixXd z = to_latent(ins.y, ins.d, ins.l, ins.u);
    const Eigen::MatrixXd gz = grad_z(z, ins.ar.psi, ins.ar.sigma, q);

    // (Y (x) DU) vec(gz), built elementwise
    const Eigen::MatrixXd du = ins.d.asDiagonal() * ins.u;
    Eigen::MatrixXd kron(p * p, p * n);
    for (int bi = 0; bi < p; ++bi)          // block row of Y entries
        for (int bj = 0; bj < n; ++bj)      // block col
            for (int ri = 0; ri < p; ++ri)
                for (int rj = 0; rj < p; ++rj)
                    kron(bi * p + ri, bj * p + rj) =
                        ins.y(bi, bj) * du(ri, rj);
    const Eigen::VectorXd vec_gz =
        Eigen::Map<const Eigen::VectorXd>(gz.data(), gz.size());
    const Eigen::VectorXd flat = kron * vec_gz;
    Eigen::MatrixXd oracle =
        -Eigen::Map<const Eigen::MatrixXd>(flat.data(), p, p);
    oracle = oracle.triangularView<Eigen::StrictlyLower>();
    CHECK((grad_l(ins.ctx()) - oracle).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("grad_l matches finite differences over all free entries") {
    Rng rng(12);
    for (int rep = 0; rep < 20; ++rep) {
        const int p = 2 + static_cast<int>(rng.integer(5));
        const int q = 1 + static_cast<int>(rng.integer(3));
        const int n = q + 8 + static_cast<int>(rng.integer(18));
        Instance ins = random_instance(p, n, q, rng);
        const Eigen::MatrixXd g = grad_l(ins.ctx());
        double max_rel = 0.0;
        for (int j = 0; j < p; ++j)
            for (int i = j + 1; i < p; ++i) {
                const double fd = test::central_diff(
                    [&](double v) {
                        Instance tmp = ins;
                        tmp.l(i, j) = v;
                        return loglik(tmp.ctx());
                    },
                    ins.l(i, j));
                const double scale = std::max(1.0, std::abs(fd));
                max_rel = std::max(max_rel, std::abs(g(i, j) - fd) / scale);
            }
        CHECK(max_rel < 1e-5);
    }
}

TEST_CASE("grad_logd: trivial and scalar cases") {
    // zero data
    const int p = 3, n = 10, q = 1;
    Instance ins;
    ins.q = q;
    ins.y = Eigen::MatrixXd::Zero(p, n);
    ins.d = Eigen::VectorXd::Ones(p);
    ins.l = Eigen::MatrixXd::Zero(p, p);
    ins.u = Eigen::MatrixXd::Identity(p, p);
    Rng ar_rng(13);
    ins.ar = pacf_to_ar(random_pacf(p, q, ar_rng, 0.5));
    CHECK(grad_logd(ins.ctx()).norm() == 0.0);

    // p = 1, phi = 0, sigma = 1: d/dlog d of -(d^2/2) sum y_t^2 is
    // -d^2 sum y_t^2 over the residual window
    Rng rng(14);
    Instance s;
    s.q = 1;
    s.y = random_matrix(1, 6, rng);
    s.d = Eigen::VectorXd::Constant(1, 1.7);
    s.l = Eigen::MatrixXd::Zero(1, 1);
    s.u = Eigen::MatrixXd::Identity(1, 1);
    s.ar.psi = Eigen::MatrixXd::Zero(1, 1);
    s.ar.gamma = Eigen::MatrixXd::Zero(1, 1);
    s.ar.sigma = Eigen::VectorXd::Ones(1);
    const double expect =
        -s.d[0] * s.d[0] * s.y.rightCols(5).squaredNorm();
    CHECK(grad_logd(s.ctx())[0] == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("grad_logd matches finite differences in log d") {
    Rng rng(15);
    for (int rep = 0; rep < 20; ++rep) {
        const int p = 2 + static_cast<int>(rng.integer(5));
        const int q = 1 + static_cast<int>(rng.integer(3));
        const int n = q + 8 + static_cast<int>(rng.integer(18));
        Instance ins = random_instance(p, n, q, rng);
        const Eigen::VectorXd g = grad_logd(ins.ctx());
        double max_rel = 0.0;
        for (int i = 0; i < p; ++i) {
            const double fd = test::central_diff(
                [&](double logd) {
                    Instance tmp = ins;
                    tmp.d[i] = std::exp(logd);
                    return loglik(tmp.ctx());
                },
                std::log(ins.d[i]));
            const double scale = std::max(1.0, std::abs(fd));
            max_rel = std::max(max_rel, std::abs(g[i] - fd) / scale);
        }
        CHECK(max_rel < 1e-5);
    }
}

namespace {

ModelParams params_for(const Instance& ins, int p) {
    ModelParams mp;
    mp.factors.d = ins.d;
    mp.factors.l1 = ins.l;
    Rng l2_rng(1000);
    mp.factors.l2 = random_strict_lower(p, l2_rng, 0.3);
    mp.factors.a = Eigen::VectorXd::Zero(packed_size(p));
    mp.pacf = ar_to_pacf(ins.ar.psi);
    mp.ar = ins.ar;
    mp.lambda_l1 = 0.2;
    mp.lambda_l2 = 0.1;
    mp.lambda_a = 0.3;
    mp.sig2_l1 = 0.8;
    mp.sig2_l2 = 1.1;
    mp.sig2_a = 0.9;
    mp.xi = 0.1;
    return mp;
}

}  // namespace

TEST_CASE("log_posterior: support violations give -inf, not failures") {
    Rng rng(16);
    const int p = 3, n = 12, q = 2;
    const Instance ins = random_instance(p, n, q, rng);
    PairedDataset data;
    data.y1 = ins.y;
    data.y2 = random_matrix(p, n, rng);
    ModelConfig cfg;
    cfg.q = q;

    ModelParams mp = params_for(ins, p);
    const double base = log_posterior(mp, data, cfg);
    CHECK(std::isfinite(base));

    ModelParams bad = mp;
    bad.pacf.rho(0, 0) = 1.0;
    CHECK(log_posterior(bad, data, cfg) ==
          -std::numeric_limits<double>::infinity());
    bad = mp;
    bad.factors.d[0] = -0.1;
    CHECK(log_posterior(bad, data, cfg) ==
          -std::numeric_limits<double>::infinity());
    bad = mp;
    bad.lambda_a = 200.0;
    CHECK(log_posterior(bad, data, cfg) ==
          -std::numeric_limits<double>::infinity());
    bad = mp;
    bad.factors.a[0] = 0.1;  // nonzero inside (0, lambda_a]
    CHECK(log_posterior(bad, data, cfg) ==
          -std::numeric_limits<double>::infinity());
}

TEST_CASE("log_posterior with n = q reduces to the prior terms") {
    Rng rng(17);
    const int p = 2, q = 2;
    const Instance ins = random_instance(p, q + 4, q, rng);
    ModelParams mp = params_for(ins, p);
    PairedDataset data;
    data.y1 = random_matrix(p, q, rng);  // n1 == q: vacuous likelihood
    ModelConfig cfg;
    cfg.q = q;
    cfg.single_period = true;

    double expected = 0.0;
    expected += log_prior_d(mp.factors.d, mp.xi);
    expected += log_prior_thresholded(
        packed_from_strict_lower(mp.factors.l1),
        {mp.lambda_l1, std::sqrt(mp.sig2_l1), cfg.lambda_upper});
    expected += log_prior_thresholded(
        mp.factors.a, {mp.lambda_a, std::sqrt(mp.sig2_a), cfg.lambda_upper});
    expected += normal_logpdf(mp.xi / cfg.sigma_d) - std::log(cfg.sigma_d);
    expected += log_inv_gamma(mp.sig2_l1, cfg.invgamma_l_shape,
                              cfg.invgamma_l_scale);
    expected += log_inv_gamma(mp.sig2_a, cfg.invgamma_a_shape,
                              cfg.invgamma_a_scale);
    CHECK(log_posterior(mp, data, cfg) ==
          doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("log_posterior differences decompose over terms") {
    Rng rng(18);
    const int p = 3, n = 14, q = 2;
    const Instance ins = random_instance(p, n, q, rng);
    PairedDataset data;
    data.y1 = ins.y;
    data.y2 = random_matrix(p, n + 3, rng);
    ModelConfig cfg;
    cfg.q = q;

    ModelParams a = params_for(ins, p);
    ModelParams b = a;
    b.factors.d[1] *= 1.3;
    b.factors.l1(2, 0) += 0.25;
    b.xi += 0.2;

    // independent per-term accumulation of the difference
    auto term_sum = [&](const ModelParams& mp) {
        const Eigen::MatrixXd u =
            cayley(skew_from_packed(mp.factors.a, p));
        double t = 0.0;
        t += loglik({mp.ar.psi, mp.ar.sigma, q, data.y1, mp.factors.d,
                     mp.factors.l1, u});
        t += loglik({mp.ar.psi, mp.ar.sigma, q, data.y2, mp.factors.d,
                     mp.factors.l2, u});
        t += (data.n1() - q + data.n2() - q) *
             mp.factors.d.array().log().sum();
        t += log_prior_d(mp.factors.d, mp.xi);
        t += log_prior_thresholded(
            packed_from_strict_lower(mp.factors.l1),
            {mp.lambda_l1, std::sqrt(mp.sig2_l1), cfg.lambda_upper});
        t += log_prior_thresholded(
            packed_from_strict_lower(mp.factors.l2),
            {mp.lambda_l2, std::sqrt(mp.sig2_l2), cfg.lambda_upper});
        t += log_prior_thresholded(
            mp.factors.a,
            {mp.lambda_a, std::sqrt(mp.sig2_a), cfg.lambda_upper});
        t += normal_logpdf(mp.xi / cfg.sigma_d) - std::log(cfg.sigma_d);
        t += log_inv_gamma(mp.sig2_l1, cfg.invgamma_l_shape,
                           cfg.invgamma_l_scale);
        t += log_inv_gamma(mp.sig2_l2, cfg.invgamma_l_shape,
                           cfg.invgamma_l_scale);
        t += log_inv_gamma(mp.sig2_a, cfg.invgamma_a_shape,
                           cfg.invgamma_a_scale);
        return t;
    };
    const double lhs = log_posterior(b, data, cfg) - log_posterior(a, data, cfg);
    const double rhs = term_sum(b) - term_sum(a);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
}

TEST_CASE("log_posterior decreases without bound along parameter rays") {
    Rng rng(19);
    const int p = 3, n = 14, q = 2;
    const Instance ins = random_instance(p, n, q, rng);
    PairedDataset data;
    data.y1 = ins.y;
    data.y2 = random_matrix(p, n, rng);
    ModelConfig cfg;
    cfg.q = q;
    const ModelParams base = params_for(ins, p);
    const double v0 = log_posterior(base, data, cfg);

    ModelParams big = base;
    big.factors.d *= 1000.0;
    CHECK(log_posterior(big, data, cfg) < v0 - 100.0);
    big = base;
    big.factors.d /= 1000.0;
    CHECK(log_posterior(big, data, cfg) < v0 - 100.0);
    big = base;
    big.factors.l1 *= 1000.0;
    CHECK(log_posterior(big, data, cfg) < v0 - 100.0);
    big = base;
    big.factors.a = Eigen::VectorXd::Constant(packed_size(p), 50.0);
    CHECK(log_posterior(big, data, cfg) < v0 - 100.0);
}
