#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <utility>
#include <vector>

#include "spoutar/arproc.hpp"
#include "spoutar/factorization.hpp"
#include "spoutar/rng.hpp"
#include "spoutar/sampler.hpp"

namespace spoutar {

/// Watts-Strogatz small-world layout of the true conditional-dependence
/// graph: n_blocks disconnected communities, each a rewired ring lattice.
struct GraphSpec {
    int n_blocks = 3;
    int nodes_per_block = 20;
    int ring_degree = 4;     // must be even
    double rewire_prob = 0.1;
};

/// One simulation cell. Mixed-order scenarios assign m1/m2/m3 series to AR
/// orders 2/5/8; all-zero counts mean a uniform order q. With periods == 2
/// the second period reuses the AR parameters; perturb_count entries of
/// Omega_2 are shifted by +-perturb_magnitude relative to Omega_1.
struct ScenarioSpec {
    int p = 30;
    int n = 150;
    int q = 2;
    double sparsity = 0.90;
    int m1 = 0, m2 = 0, m3 = 0;
    std::uint64_t seed = 0;
    int periods = 1;
    int n2 = 0;  // defaults to n
    int perturb_count = 0;
    double perturb_magnitude = 0.5;
    int wishart_df = 10;  // recorded in metadata only; see generator notes
    GraphSpec graph;

    std::vector<int> orders() const;  // per-series AR orders
    int max_order() const;
    void validate() const;
};

/// Rewired ring lattice; symmetric 0/1 adjacency with zero diagonal and
/// exactly nodes * k / 2 edges.
Eigen::MatrixXi watts_strogatz(int nodes, int k, double beta, Rng& rng);

/// Block-diagonal union of independent small-world components.
Eigen::MatrixXi block_graph(const GraphSpec& spec, Rng& rng);

struct PrecisionDraw {
    Eigen::MatrixXd omega;
    double achieved_sparsity;  // off-diagonal zero fraction over pairs
};

/// Sparse SPD precision supported on (a pruned subset of) the adjacency:
/// off-diagonal magnitudes uniform on [0.3, 0.8] with random signs, support
/// pruned uniformly at random until the target off-diagonal zero fraction is
/// met, unit diagonal boosted so the minimum eigenvalue is at least 0.1.
PrecisionDraw precision_from_graph(const Eigen::MatrixXi& adjacency,
                                   double sparsity_target, Rng& rng);

struct ScenarioData {
    PairedDataset data;  // y2 empty for single-period scenarios
    Eigen::MatrixXd omega1, omega2;
    PacfSet pacf;
    std::vector<int> orders;
    std::vector<std::pair<int, int>> perturbed_edges;
    std::vector<int> perturb_signs;
    double achieved_sparsity = 0.0;
};

/// Full synthetic dataset: small-world precision, extreme pacfs drawn from
/// Unif((-1,-0.9) U (0.9,1)), latent AR rows with a stationarity burn-in,
/// and Y = chol(Omega^{-1}) Z.
ScenarioData simulate_scenario(const ScenarioSpec& spec, Rng& rng);

/// Simulate one AR path of length n (after discarding a 10*q burn-in).
Eigen::VectorXd simulate_ar_path(const Eigen::VectorXd& phi, double sigma,
                                 int n, Rng& rng);

struct BenchmarkCell {
    ScenarioSpec spec;
    std::vector<double> rmse_reps;
    double rmse_mean = 0.0;
    double identity_baseline = 0.0;  // mean rmse(I, Omega_0) across reps
    int failures = 0;
    std::vector<std::string> errors;
};

struct BenchmarkTable {
    std::vector<BenchmarkCell> cells;
    int replications = 0;
};

/// For each grid cell: simulate, fit in reduced single-precision-matrix mode
/// with the supplied chain settings, and average rmse(posterior mean, truth)
/// across replications. Cells run concurrently up to `workers`; seeds are
/// derived per (cell, replication) so results do not depend on scheduling.
BenchmarkTable run_benchmark(const std::vector<ScenarioSpec>& grid,
                             int replications, const ChainConfig& cfg,
                             int workers = 1);

}  // namespace spoutar
