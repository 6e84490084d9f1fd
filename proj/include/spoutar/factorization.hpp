#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

namespace spoutar {

/// Generative parameters of the two precision matrices:
///   Omega_k = (I - L_k)^T D^2 (I - L_k),  shared D, period-specific L_k,
/// plus the skew-symmetric generator A of the orthogonal rotation U.
/// A is stored as its p(p-1)/2 sub-diagonal entries in column-major order.
struct PrecisionFactors {
    Eigen::VectorXd d;       // p, strictly positive
    Eigen::MatrixXd l1, l2;  // p x p, strictly lower triangular
    Eigen::VectorXd a;       // p(p-1)/2 packed sub-diagonal entries

    int dim() const { return static_cast<int>(d.size()); }
};

/// Observations for the two periods; columns are time points.
struct PairedDataset {
    Eigen::MatrixXd y1, y2;  // p x n1, p x n2 (y2 may be empty in reduced mode)
    std::vector<std::string> names;

    int p() const { return static_cast<int>(y1.rows()); }
    int n1() const { return static_cast<int>(y1.cols()); }
    int n2() const { return static_cast<int>(y2.cols()); }
    bool single_period() const { return y2.size() == 0; }
};

struct LatentSeries {
    Eigen::MatrixXd z1, z2;
};

int packed_size(int p);
int packed_index(int i, int j, int p);  // i > j

Eigen::MatrixXd skew_from_packed(const Eigen::VectorXd& a, int p);
Eigen::VectorXd packed_from_strict_lower(const Eigen::MatrixXd& m);
Eigen::MatrixXd strict_lower_from_packed(const Eigen::VectorXd& v, int p);

/// Cayley transform U = (I - A)(I + A)^{-1} of a skew-symmetric matrix;
/// always special orthogonal. One dense LU solve, no explicit inverse.
Eigen::MatrixXd cayley(const Eigen::MatrixXd& a_skew);

/// Omega = (I - L)^T D^2 (I - L).
Eigen::MatrixXd assemble_precision(const Eigen::VectorXd& d,
                                   const Eigen::MatrixXd& l);

/// Modified Cholesky factorization of an SPD matrix into (d, l) such that
/// assemble_precision(d, l) reproduces it. Rejects non-SPD input.
std::pair<Eigen::VectorXd, Eigen::MatrixXd> decompose_precision(
    const Eigen::MatrixXd& omega);

/// z = U^T D (I - L) y.
Eigen::MatrixXd to_latent(const Eigen::MatrixXd& y, const Eigen::VectorXd& d,
                          const Eigen::MatrixXd& l, const Eigen::MatrixXd& u);

/// Exact inverse of to_latent: y = (I - L)^{-1} D^{-1} U z.
Eigen::MatrixXd from_latent(const Eigen::MatrixXd& z, const Eigen::VectorXd& d,
                            const Eigen::MatrixXd& l, const Eigen::MatrixXd& u);

}  // namespace spoutar
