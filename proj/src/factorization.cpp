#include "spoutar/factorization.hpp"

#include <cmath>

#include "spoutar/errors.hpp"

namespace spoutar {

int packed_size(int p) { return p * (p - 1) / 2; }

int packed_index(int i, int j, int p) {
    // Column-major over the strict lower triangle: column j holds p-1-j rows.
    return j * (2 * p - j - 1) / 2 + (i - j - 1);
}

Eigen::MatrixXd skew_from_packed(const Eigen::VectorXd& a, int p) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(p, p);
    int idx = 0;
    for (int j = 0; j < p; ++j)
        for (int i = j + 1; i < p; ++i) {
            m(i, j) = a[idx];
            m(j, i) = -a[idx];
            ++idx;
        }
    return m;
}

Eigen::VectorXd packed_from_strict_lower(const Eigen::MatrixXd& m) {
    const int p = static_cast<int>(m.rows());
    Eigen::VectorXd v(packed_size(p));
    int idx = 0;
    for (int j = 0; j < p; ++j)
        for (int i = j + 1; i < p; ++i) v[idx++] = m(i, j);
    return v;
}

Eigen::MatrixXd strict_lower_from_packed(const Eigen::VectorXd& v, int p) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(p, p);
    int idx = 0;
    for (int j = 0; j < p; ++j)
        for (int i = j + 1; i < p; ++i) m(i, j) = v[idx++];
    return m;
}

Eigen::MatrixXd cayley(const Eigen::MatrixXd& a_skew) {
    const int p = static_cast<int>(a_skew.rows());
    const Eigen::MatrixXd i = Eigen::MatrixXd::Identity(p, p);
    Eigen::MatrixXd u = (i - a_skew) * (i + a_skew).partialPivLu().solve(i);
    if (!u.allFinite())
        throw ValidationError("Cayley transform overflowed (entries too large)");
    return u;
}

Eigen::MatrixXd assemble_precision(const Eigen::VectorXd& d,
                                   const Eigen::MatrixXd& l) {
    if ((d.array() <= 0.0).any())
        throw ValidationError("nonpositive diagonal entry in D");
    const int p = static_cast<int>(d.size());
    Eigen::MatrixXd c =
        d.asDiagonal() * (Eigen::MatrixXd::Identity(p, p) - l);
    return c.transpose() * c;
}

std::pair<Eigen::VectorXd, Eigen::MatrixXd> decompose_precision(
    const Eigen::MatrixXd& omega) {
    const int p = static_cast<int>(omega.rows());
    if (omega.rows() != omega.cols())
        throw ValidationError("precision matrix must be square");
    if ((omega - omega.transpose()).cwiseAbs().maxCoeff() >
        1e-8 * (1.0 + omega.cwiseAbs().maxCoeff()))
        throw ValidationError("precision matrix must be symmetric");

    // Omega = C^T C with C = D(I-L) lower triangular. Flip both axes to turn
    // this UL-style factorization into a standard Cholesky.
    Eigen::MatrixXd flipped = omega.reverse();
    Eigen::LLT<Eigen::MatrixXd> llt(flipped);
    if (llt.info() != Eigen::Success)
        throw ValidationError(
            "precision matrix is not positive definite (Cholesky failed)");
    Eigen::MatrixXd g = llt.matrixL();
    Eigen::MatrixXd c = g.transpose().reverse();  // lower, positive diagonal

    Eigen::VectorXd d = c.diagonal();
    Eigen::MatrixXd l = Eigen::MatrixXd::Zero(p, p);
    for (int j = 0; j < p; ++j)
        for (int i = j + 1; i < p; ++i) l(i, j) = -c(i, j) / d[i];
    return {d, l};
}

Eigen::MatrixXd to_latent(const Eigen::MatrixXd& y, const Eigen::VectorXd& d,
                          const Eigen::MatrixXd& l, const Eigen::MatrixXd& u) {
    if (y.rows() != d.size() || l.rows() != d.size() || u.rows() != d.size())
        throw ValidationError("to_latent: dimension mismatch");
    Eigen::MatrixXd t = y - l * y;  // (I - L) y
    t = d.asDiagonal() * t;
    return u.transpose() * t;
}

Eigen::MatrixXd from_latent(const Eigen::MatrixXd& z, const Eigen::VectorXd& d,
                            const Eigen::MatrixXd& l, const Eigen::MatrixXd& u) {
    if (z.rows() != d.size() || l.rows() != d.size() || u.rows() != d.size())
        throw ValidationError("from_latent: dimension mismatch");
    const int p = static_cast<int>(d.size());
    Eigen::MatrixXd w = u * z;
    w = d.cwiseInverse().asDiagonal() * w;
    Eigen::MatrixXd m = Eigen::MatrixXd::Identity(p, p) - l;
    return m.triangularView<Eigen::Lower>().solve(w);
}

}  // namespace spoutar
