#pragma once

#include <Eigen/Dense>
#include <vector>

#include "spoutar/rng.hpp"
#include "spoutar/sampler.hpp"

namespace spoutar {

enum class ShiftClass { none = 0, positive = 1, negative = -1 };

/// Posterior summary of one (Omega_2 - Omega_1) entry: mean, equal-tailed
/// credible interval and its shift classification. positive iff lo > 0,
/// negative iff hi < 0, none otherwise.
struct EdgeShift {
    int i, j;  // i < j
    double mean, lo, hi;
    ShiftClass cls;
};

struct EdgeShiftReport {
    double level = 0.95;
    int p = 0;
    std::vector<EdgeShift> edges;  // all pairs i < j, lexicographic

    /// Pairs whose interval excludes zero.
    std::vector<EdgeShift> flagged() const;
};

/// Per-draw Omega_2 - Omega_1; each output is symmetric by construction.
std::vector<Eigen::MatrixXd> omega_diff_draws(const PosteriorDraws& draws);

/// Equal-tailed credible intervals per entry at the given level.
EdgeShiftReport classify_edges(const std::vector<Eigen::MatrixXd>& diffs,
                               double level = 0.95);

/// The flagged edges ordered by descending |posterior mean|, ties broken by
/// (i, j) lexicographic order; at most k entries.
std::vector<EdgeShift> top_k_edges(const EdgeShiftReport& report, int k);

/// rho_{ij.rest} = -omega_ij / sqrt(omega_ii omega_jj); unit diagonal.
Eigen::MatrixXd partial_correlations(const Eigen::MatrixXd& omega);

struct ForecastResult {
    Eigen::MatrixXd point;                // p x horizon
    std::vector<Eigen::MatrixXd> paths;   // optional per-draw paths
};

/// h-step-ahead forecast: per retained draw, map the history into latent
/// space with that draw's post-period factors, roll the AR recursion forward
/// with Gaussian innovations (or none when suppressed), and map back. The
/// point forecast is the mean across draws.
ForecastResult predict(const PosteriorDraws& draws,
                       const Eigen::MatrixXd& history, int horizon, Rng& rng,
                       bool suppress_innovations = false,
                       bool keep_paths = false);

/// ||omega_bar - omega_true||_F / p.
double rmse(const Eigen::MatrixXd& omega_bar,
            const Eigen::MatrixXd& omega_true);

/// Empirical quantile with linear interpolation between order statistics.
double quantile(std::vector<double> values, double prob);

}  // namespace spoutar
