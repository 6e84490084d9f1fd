#include <doctest.h>

#include <cmath>

#include "spoutar/errors.hpp"
#include "spoutar/factorization.hpp"
#include "test_util.hpp"

using namespace spoutar;
using test::random_matrix;
using test::random_spd;
using test::random_strict_lower;
using test::random_vector;

namespace {

// Hand-rolled Gaussian elimination, the independent linear-solve oracle.
Eigen::MatrixXd solve_ge(Eigen::MatrixXd a, Eigen::MatrixXd b) {
    const int n = static_cast<int>(a.rows());
    for (int k = 0; k < n; ++k) {
        int piv = k;
        for (int r = k + 1; r < n; ++r)
            if (std::abs(a(r, k)) > std::abs(a(piv, k))) piv = r;
        a.row(k).swap(a.row(piv));
        b.row(k).swap(b.row(piv));
        for (int r = k + 1; r < n; ++r) {
            const double f = a(r, k) / a(k, k);
            a.row(r) -= f * a.row(k);
            b.row(r) -= f * b.row(k);
        }
    }
    Eigen::MatrixXd x = b;
    for (int k = n - 1; k >= 0; --k) {
        for (int r = k + 1; r < n; ++r) x.row(k) -= a(k, r) * x.row(r);
        x.row(k) /= a(k, k);
    }
    return x;
}

Eigen::MatrixXd naive_multiply(const Eigen::MatrixXd& a,
                               const Eigen::MatrixXd& b) {
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(a.rows(), b.cols());
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < b.cols(); ++j)
            for (int k = 0; k < a.cols(); ++k) c(i, j) += a(i, k) * b(k, j);
    return c;
}

}  // namespace

TEST_CASE("packed sub-diagonal layout roundtrips") {
    Rng rng(3);
    const int p = 5;
    const Eigen::MatrixXd l = random_strict_lower(p, rng);
    const Eigen::VectorXd packed = packed_from_strict_lower(l);
    CHECK(packed.size() == packed_size(p));
    CHECK((strict_lower_from_packed(packed, p) - l).norm() == 0.0);
    int idx = 0;
    for (int j = 0; j < p; ++j)
        for (int i = j + 1; i < p; ++i) CHECK(packed_index(i, j, p) == idx++);
}

TEST_CASE("cayley: identity at A = 0") {
    const Eigen::MatrixXd u = cayley(Eigen::MatrixXd::Zero(4, 4));
    CHECK((u - Eigen::MatrixXd::Identity(4, 4)).norm() < 1e-14);
}

TEST_CASE("cayley: orthogonality and determinant are structural") {
    Rng rng(21);
    for (int rep = 0; rep < 30; ++rep) {
        const int p = 2 + static_cast<int>(rng.integer(29));
        Eigen::VectorXd a = random_vector(packed_size(p), rng, 0.7);
        const Eigen::MatrixXd u = cayley(skew_from_packed(a, p));
        CHECK((u.transpose() * u - Eigen::MatrixXd::Identity(p, p)).norm() <
              1e-10);
        CHECK(std::abs(u.determinant() - 1.0) < 1e-8);
    }
}

TEST_CASE("cayley: p = 2 against a dense-solve oracle") {
    Eigen::VectorXd a(1);
    a << 1.0;
    const Eigen::MatrixXd skew = skew_from_packed(a, 2);
    const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(2, 2);
    // (I+A)X = (I-A) solved for X gives (I+A)^{-1}(I-A), which commutes
    // with the other ordering.
    const Eigen::MatrixXd oracle = solve_ge(eye + skew, eye - skew);
    const Eigen::MatrixXd u = cayley(skew);
    CHECK((u - oracle).norm() < 1e-12);
    Eigen::MatrixXd expected(2, 2);
    expected << 0, 1, -1, 0;
    CHECK((u - expected).norm() < 1e-12);
}

TEST_CASE("assemble_precision: trivial cases") {
    const int p = 3;
    const Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(p, p);
    CHECK((assemble_precision(Eigen::VectorXd::Ones(p), zero) -
           Eigen::MatrixXd::Identity(p, p))
              .norm() < 1e-15);
    CHECK((assemble_precision(Eigen::VectorXd::Constant(p, 2.0), zero) -
           4.0 * Eigen::MatrixXd::Identity(p, p))
              .norm() < 1e-15);
    CHECK_THROWS_AS(
        assemble_precision(Eigen::VectorXd::Constant(p, -1.0), zero),
        ValidationError);
}

TEST_CASE("assemble_precision equals the naive triple product") {
    Rng rng(33);
    const int p = 4;
    const Eigen::VectorXd d = random_vector(p, rng).array().abs() + 0.2;
    const Eigen::MatrixXd l = random_strict_lower(p, rng);
    const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(p, p);
    const Eigen::MatrixXd c = naive_multiply(d.asDiagonal(), eye - l);
    const Eigen::MatrixXd oracle = naive_multiply(c.transpose(), c);
    CHECK((assemble_precision(d, l) - oracle).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("decompose_precision: trivial cases") {
    auto [d, l] = decompose_precision(Eigen::MatrixXd::Identity(4, 4));
    CHECK((d.array() - 1.0).abs().maxCoeff() < 1e-14);
    CHECK(l.norm() < 1e-14);

    Eigen::MatrixXd diag = Eigen::MatrixXd::Zero(2, 2);
    diag(0, 0) = 4.0;
    diag(1, 1) = 9.0;
    auto [d2, l2] = decompose_precision(diag);
    CHECK(d2[0] == doctest::Approx(2.0));
    CHECK(d2[1] == doctest::Approx(3.0));
    CHECK(l2.norm() < 1e-14);
}

TEST_CASE("decompose_precision rejects non-SPD input") {
    Eigen::MatrixXd m(2, 2);
    m << 1.0, 2.0, 2.0, 1.0;  // indefinite
    CHECK_THROWS_AS(decompose_precision(m), ValidationError);
    Eigen::MatrixXd asym(2, 2);
    asym << 1.0, 0.5, -0.5, 1.0;
    CHECK_THROWS_AS(decompose_precision(asym), ValidationError);
}

TEST_CASE("assemble/decompose roundtrip on random SPD matrices") {
    Rng rng(8);
    for (int rep = 0; rep < 100; ++rep) {
        const int p = 2 + static_cast<int>(rng.integer(19));
        const Eigen::MatrixXd omega = random_spd(p, rng);
        auto [d, l] = decompose_precision(omega);
        CHECK((d.array() > 0.0).all());
        CHECK((assemble_precision(d, l) - omega).norm() < 1e-10);
        // strict lower triangularity
        for (int j = 0; j < p; ++j)
            for (int i = 0; i <= j; ++i) CHECK(l(i, j) == 0.0);
    }
}

TEST_CASE("to_latent: trivial transforms") {
    Rng rng(12);
    const int p = 3, n = 5;
    const Eigen::MatrixXd y = random_matrix(p, n, rng);
    const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(p, p);
    const Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(p, p);
    CHECK((to_latent(y, Eigen::VectorXd::Ones(p), zero, eye) - y).norm() <
          1e-14);
    CHECK((to_latent(y, Eigen::VectorXd::Constant(p, 2.0), zero, eye) -
           2.0 * y)
              .norm() < 1e-14);
}

TEST_CASE("to_latent matches a naive sequential oracle") {
    Rng rng(14);
    const int p = 3, n = 4;
    const Eigen::MatrixXd y = random_matrix(p, n, rng);
    const Eigen::VectorXd d = random_vector(p, rng).array().abs() + 0.3;
    const Eigen::MatrixXd l = random_strict_lower(p, rng);
    const Eigen::MatrixXd u =
        cayley(skew_from_packed(random_vector(packed_size(p), rng), p));
    const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(p, p);
    const Eigen::MatrixXd oracle = naive_multiply(
        u.transpose(),
        naive_multiply(Eigen::MatrixXd(d.asDiagonal()),
                       naive_multiply(eye - l, y)));
    CHECK((to_latent(y, d, l, u) - oracle).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("from_latent inverts to_latent") {
    Rng rng(15);
    const int p = 4, n = 7;
    const Eigen::MatrixXd y = random_matrix(p, n, rng);
    const Eigen::VectorXd d = random_vector(p, rng).array().abs() + 0.3;
    const Eigen::MatrixXd l = random_strict_lower(p, rng);
    const Eigen::MatrixXd u =
        cayley(skew_from_packed(random_vector(packed_size(p), rng), p));
    const Eigen::MatrixXd z = to_latent(y, d, l, u);
    CHECK((from_latent(z, d, l, u) - y).norm() < 1e-10);

    const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(p, p);
    const Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(p, p);
    CHECK((from_latent(y, Eigen::VectorXd::Ones(p), zero, eye) - y).norm() <
          1e-14);
    CHECK((from_latent(y, Eigen::VectorXd::Constant(p, 2.0), zero, eye) -
           0.5 * y)
              .norm() < 1e-14);
}

TEST_CASE("latent rows are white under the exact factors") {
    Rng rng(881);
    const int p = 4, n = 20000;
    const Eigen::MatrixXd omega = random_spd(p, rng);
    const Eigen::MatrixXd sigma =
        omega.llt().solve(Eigen::MatrixXd::Identity(p, p));
    const Eigen::MatrixXd g = Eigen::LLT<Eigen::MatrixXd>(sigma).matrixL();
    const Eigen::MatrixXd y = g * random_matrix(p, n, rng);

    auto [d, l] = decompose_precision(omega);
    const Eigen::MatrixXd z =
        to_latent(y, d, l, Eigen::MatrixXd::Identity(p, p));
    const Eigen::MatrixXd cov = z * z.transpose() / n;
    const double se_var = std::sqrt(2.0 / n);
    const double se_cov = 1.0 / std::sqrt(n);
    for (int i = 0; i < p; ++i) {
        CHECK(std::abs(cov(i, i) - 1.0) < 5.0 * se_var);
        for (int j = i + 1; j < p; ++j)
            CHECK(std::abs(cov(i, j)) < 5.0 * se_cov);
    }
}

TEST_CASE("dimension mismatches are rejected") {
    const Eigen::MatrixXd y = Eigen::MatrixXd::Zero(3, 4);
    const Eigen::MatrixXd eye2 = Eigen::MatrixXd::Identity(2, 2);
    CHECK_THROWS_AS(
        to_latent(y, Eigen::VectorXd::Ones(2), Eigen::MatrixXd::Zero(2, 2),
                  eye2),
        ValidationError);
    CHECK_THROWS_AS(
        from_latent(y, Eigen::VectorXd::Ones(2), Eigen::MatrixXd::Zero(2, 2),
                    eye2),
        ValidationError);
}
