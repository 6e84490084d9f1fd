#include <doctest.h>

#include <cmath>
#include <vector>

#include "spoutar/kernels.hpp"
#include "spoutar/priors.hpp"
#include "test_util.hpp"

using namespace spoutar;

TEST_CASE("band tuner moves scale toward the band") {
    BandTuner tuner{0.15, 0.40, 0.1};
    double scale = 1.0;
    CHECK(tuner.adjust(0.05, scale));  // too cold: shrink
    CHECK(scale < 1.0);
    scale = 1.0;
    CHECK(tuner.adjust(0.70, scale));  // too hot: grow
    CHECK(scale > 1.0);
    scale = 1.0;
    CHECK_FALSE(tuner.adjust(0.25, scale));
    CHECK(scale == 1.0);
}

TEST_CASE("random-walk MH reproduces a 2-D Gaussian (chi-square at 1%)") {
    // target: independent N(0,1) x N(0,1)
    auto log_target = [](const Eigen::VectorXd& x) {
        return -0.5 * x.squaredNorm();
    };
    Rng rng(314);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(2);
    double logp = log_target(x);
    const double scale = 2.38 / std::sqrt(2.0);

    const int steps = 100000, thin = 25;
    std::vector<Eigen::VectorXd> kept;
    int accepted = 0;
    for (int t = 0; t < steps; ++t) {
        if (rw_mh_step(x, logp, log_target, scale, rng)) ++accepted;
        if (t % thin == 0 && t > 5000) kept.push_back(x);
    }
    const double rate = static_cast<double>(accepted) / steps;
    CHECK(rate > 0.15);
    CHECK(rate < 0.55);

    // 4 x 4 grid with breaks at {-0.6745, 0, 0.6745} (quartiles)
    const double b[3] = {-0.6744897501960817, 0.0, 0.6744897501960817};
    auto cell = [&](double v) {
        if (v < b[0]) return 0;
        if (v < b[1]) return 1;
        if (v < b[2]) return 2;
        return 3;
    };
    Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(4, 4);
    for (const auto& s : kept) counts(cell(s[0]), cell(s[1])) += 1.0;
    const double expected = static_cast<double>(kept.size()) / 16.0;
    double chi2 = 0.0;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            const double d = counts(i, j) - expected;
            chi2 += d * d / expected;
        }
    // chi-square(15) 1% critical value
    CHECK(chi2 < 30.578);
}

TEST_CASE("MALA reproduces a standard Gaussian within 3 MC standard errors") {
    auto log_target = [](const Eigen::VectorXd& x) {
        return -0.5 * x.squaredNorm();
    };
    auto grad = [](const Eigen::VectorXd& x) {
        return Eigen::VectorXd(-x);
    };
    Rng rng(2718);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(1);
    double logp = log_target(x);
    const double eps = 1.5;

    std::vector<double> draws, squares;
    int accepted = 0;
    const int steps = 100000;
    for (int t = 0; t < steps; ++t) {
        if (mala_step(x, logp, log_target, grad, eps, rng)) ++accepted;
        if (t > 5000) {
            draws.push_back(x[0]);
            squares.push_back(x[0] * x[0]);
        }
    }
    const double rate = static_cast<double>(accepted) / steps;
    CHECK(rate > 0.45);
    CHECK(rate < 0.80);

    double mean = 0.0, mean_sq = 0.0;
    for (std::size_t i = 0; i < draws.size(); ++i) {
        mean += draws[i];
        mean_sq += squares[i];
    }
    mean /= draws.size();
    mean_sq /= squares.size();
    CHECK(std::abs(mean) < 3.0 * test::batch_means_se(draws));
    CHECK(std::abs(mean_sq - 1.0) < 3.0 * test::batch_means_se(squares));
}

TEST_CASE("MALA with a log-scale Jacobian matches a conjugate posterior") {
    // target on x = log(tau): InvGamma(alpha, beta) density in tau plus the
    // volume term, the same pattern the log-D block uses.
    const double alpha = 4.0, beta = 3.0;
    auto log_target = [&](const Eigen::VectorXd& x) {
        const double tau = std::exp(x[0]);
        return log_inv_gamma(tau, alpha, beta) + x[0];
    };
    auto grad = [&](const Eigen::VectorXd& x) {
        const double tau = std::exp(x[0]);
        Eigen::VectorXd g(1);
        g[0] = -(alpha + 1.0) + beta / tau + 1.0;
        return g;
    };
    Rng rng(11);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(1);
    double logp = log_target(x);

    std::vector<double> taus;
    for (int t = 0; t < 200000; ++t) {
        mala_step(x, logp, log_target, grad, 0.6, rng);
        if (t > 10000) taus.push_back(std::exp(x[0]));
    }
    double mean = 0.0;
    for (double v : taus) mean += v;
    mean /= taus.size();
    const double expected = beta / (alpha - 1.0);  // InvGamma mean
    CHECK(std::abs(mean - expected) < 3.0 * test::batch_means_se(taus));
}

TEST_CASE("MALA with zero gradient and tiny step accepts almost surely") {
    auto log_target = [](const Eigen::VectorXd& x) {
        return -0.5 * x.squaredNorm();
    };
    auto grad = [](const Eigen::VectorXd&) {
        return Eigen::VectorXd::Zero(3).eval();
    };
    Rng rng(5);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(3);
    double logp = log_target(x);
    int accepted = 0;
    for (int t = 0; t < 1000; ++t)
        if (mala_step(x, logp, log_target, grad, 1e-6, rng)) ++accepted;
    CHECK(accepted == 1000);
}
