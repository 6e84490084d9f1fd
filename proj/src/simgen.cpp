#include "spoutar/simgen.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <future>
#include <numeric>

#include "spoutar/errors.hpp"
#include "spoutar/posterior.hpp"

namespace spoutar {

std::vector<int> ScenarioSpec::orders() const {
    std::vector<int> out;
    if (m1 + m2 + m3 == 0) {
        out.assign(p, q);
        return out;
    }
    out.insert(out.end(), m1, 2);
    out.insert(out.end(), m2, 5);
    out.insert(out.end(), m3, 8);
    return out;
}

int ScenarioSpec::max_order() const {
    const auto ord = orders();
    return *std::max_element(ord.begin(), ord.end());
}

void ScenarioSpec::validate() const {
    if (p < 1 || n < 1) throw ValidationError("scenario requires p, n >= 1");
    if (!(sparsity > 0.0 && sparsity < 1.0))
        throw ValidationError("sparsity must lie in (0,1)");
    if (m1 + m2 + m3 != 0 && m1 + m2 + m3 != p)
        throw ValidationError("mixed-order counts must sum to p");
    if (m1 < 0 || m2 < 0 || m3 < 0)
        throw ValidationError("mixed-order counts must be nonnegative");
    if (q < 1) throw ValidationError("scenario order q must be >= 1");
    if (periods != 1 && periods != 2)
        throw ValidationError("periods must be 1 or 2");
    if (perturb_count < 0) throw ValidationError("perturb_count must be >= 0");
}

Eigen::MatrixXi watts_strogatz(int nodes, int k, double beta, Rng& rng) {
    if (k <= 0 || k % 2 != 0 || k >= nodes)
        throw ValidationError("ring degree must be even and less than nodes");
    if (beta < 0.0 || beta > 1.0)
        throw ValidationError("rewire probability must lie in [0,1]");

    Eigen::MatrixXi adj = Eigen::MatrixXi::Zero(nodes, nodes);
    auto connect = [&](int u, int v) {
        adj(u, v) = 1;
        adj(v, u) = 1;
    };
    for (int i = 0; i < nodes; ++i)
        for (int j = 1; j <= k / 2; ++j) connect(i, (i + j) % nodes);

    // Rewire the far endpoint of each lattice edge with probability beta,
    // avoiding self-loops and duplicates; edge count is preserved.
    for (int j = 1; j <= k / 2; ++j) {
        for (int i = 0; i < nodes; ++i) {
            const int v = (i + j) % nodes;
            if (rng.uniform() >= beta) continue;
            if (adj.row(i).sum() >= nodes - 1) continue;  // node saturated
            int w;
            do {
                w = static_cast<int>(rng.integer(nodes));
            } while (w == i || adj(i, w) == 1);
            adj(i, v) = adj(v, i) = 0;
            connect(i, w);
        }
    }
    return adj;
}

Eigen::MatrixXi block_graph(const GraphSpec& spec, Rng& rng) {
    const int p = spec.n_blocks * spec.nodes_per_block;
    Eigen::MatrixXi adj = Eigen::MatrixXi::Zero(p, p);
    for (int b = 0; b < spec.n_blocks; ++b) {
        const int off = b * spec.nodes_per_block;
        const Eigen::MatrixXi sub = watts_strogatz(
            spec.nodes_per_block, spec.ring_degree, spec.rewire_prob, rng);
        adj.block(off, off, spec.nodes_per_block, spec.nodes_per_block) = sub;
    }
    return adj;
}

PrecisionDraw precision_from_graph(const Eigen::MatrixXi& adjacency,
                                   double sparsity_target, Rng& rng) {
    const int p = static_cast<int>(adjacency.rows());
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i < p; ++i)
        for (int j = i + 1; j < p; ++j)
            if (adjacency(i, j) != 0) edges.emplace_back(i, j);

    const double total_pairs = p * (p - 1) / 2.0;
    const auto target_edges = static_cast<long>(
        std::floor((1.0 - sparsity_target) * total_pairs + 1e-9));

    if (static_cast<long>(edges.size()) > target_edges) {
        // Fisher-Yates prefix selection keeps a uniform subset.
        for (long t = 0; t < target_edges; ++t) {
            const long pick = t + static_cast<long>(
                                      rng.integer(edges.size() - t));
            std::swap(edges[t], edges[pick]);
        }
        edges.resize(target_edges);
    }

    Eigen::MatrixXd omega = Eigen::MatrixXd::Identity(p, p);
    for (const auto& [i, j] : edges) {
        const double mag = rng.uniform(0.3, 0.8);
        const double val = rng.uniform() < 0.5 ? mag : -mag;
        omega(i, j) = val;
        omega(j, i) = val;
    }

    const double min_eig =
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(omega)
            .eigenvalues()
            .minCoeff();
    if (min_eig < 0.1)
        omega.diagonal().array() += 0.1 - min_eig;

    PrecisionDraw out;
    out.omega = omega;
    out.achieved_sparsity = 1.0 - static_cast<double>(edges.size()) / total_pairs;
    return out;
}

Eigen::VectorXd simulate_ar_path(const Eigen::VectorXd& phi, double sigma,
                                 int n, Rng& rng) {
    const int q = static_cast<int>(phi.size());
    const int burn = 10 * q;
    Eigen::VectorXd full = Eigen::VectorXd::Zero(burn + n);
    for (int t = 0; t < burn + n; ++t) {
        double v = sigma * rng.normal();
        for (int k = 0; k < q && k < t; ++k) v += phi[k] * full[t - 1 - k];
        full[t] = v;
    }
    return full.tail(n);
}

namespace {

GraphSpec graph_for(const ScenarioSpec& spec) {
    GraphSpec g = spec.graph;
    if (g.n_blocks * g.nodes_per_block != spec.p) {
        // Derive a block layout matching p: keep the block count where
        // possible, but never let a block drop below 3 nodes.
        int blocks = std::max(1, std::min(g.n_blocks, spec.p / 3));
        while (blocks > 1 && spec.p % blocks != 0) --blocks;
        g.n_blocks = blocks;
        g.nodes_per_block = spec.p / blocks;
    }
    if (g.ring_degree >= g.nodes_per_block)
        g.ring_degree = std::max(2, (g.nodes_per_block - 1) / 2 * 2);
    return g;
}

Eigen::MatrixXd chol_lower_of_inverse(const Eigen::MatrixXd& omega) {
    const int p = static_cast<int>(omega.rows());
    const Eigen::MatrixXd sigma =
        omega.llt().solve(Eigen::MatrixXd::Identity(p, p));
    return Eigen::LLT<Eigen::MatrixXd>(sigma).matrixL();
}

}  // namespace

ScenarioData simulate_scenario(const ScenarioSpec& spec, Rng& rng) {
    spec.validate();
    const int p = spec.p;
    const std::vector<int> orders = spec.orders();
    const int qmax = spec.max_order();

    ScenarioData out;
    out.orders = orders;

    const Eigen::MatrixXi adj =
        p < 3 ? Eigen::MatrixXi::Zero(p, p).eval()
              : block_graph(graph_for(spec), rng);
    PrecisionDraw prec = precision_from_graph(adj, spec.sparsity, rng);
    out.omega1 = prec.omega;
    out.achieved_sparsity = prec.achieved_sparsity;

    if (spec.periods == 2) {
        out.omega2 = out.omega1;
        if (spec.perturb_count > 0) {
            std::vector<std::pair<int, int>> pairs;
            for (int i = 0; i < p; ++i)
                for (int j = i + 1; j < p; ++j) pairs.emplace_back(i, j);
            for (int t = 0; t < spec.perturb_count &&
                            t < static_cast<int>(pairs.size());
                 ++t) {
                const long pick =
                    t + static_cast<long>(rng.integer(pairs.size() - t));
                std::swap(pairs[t], pairs[pick]);
                const int sign = rng.uniform() < 0.5 ? 1 : -1;
                const auto [i, j] = pairs[t];
                out.omega2(i, j) += sign * spec.perturb_magnitude;
                out.omega2(j, i) += sign * spec.perturb_magnitude;
                out.perturbed_edges.emplace_back(i, j);
                out.perturb_signs.push_back(sign);
            }
            // Boost both diagonals equally so Omega_2 stays SPD while the
            // difference keeps the exact perturbation pattern.
            const double min_eig =
                Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(out.omega2)
                    .eigenvalues()
                    .minCoeff();
            if (min_eig < 0.05) {
                const double boost = 0.05 - min_eig;
                out.omega1.diagonal().array() += boost;
                out.omega2.diagonal().array() += boost;
            }
        }
    }

    // Extreme pacfs: |rho| uniform on (0.9, 1), random sign; entries past a
    // series' order stay zero.
    out.pacf.rho = Eigen::MatrixXd::Zero(p, qmax);
    for (int i = 0; i < p; ++i)
        for (int k = 0; k < orders[i]; ++k) {
            const double mag = rng.uniform(0.9, 1.0);
            out.pacf.rho(i, k) = rng.uniform() < 0.5 ? mag : -mag;
        }
    const ArModelSet ar = pacf_to_ar(out.pacf);

    auto simulate_period = [&](const Eigen::MatrixXd& omega, int n) {
        Eigen::MatrixXd z(p, n);
        for (int i = 0; i < p; ++i)
            z.row(i) = simulate_ar_path(
                ar.psi.row(i).head(orders[i]), ar.sigma[i], n, rng);
        return (chol_lower_of_inverse(omega) * z).eval();
    };

    out.data.y1 = simulate_period(out.omega1, spec.n);
    if (spec.periods == 2)
        out.data.y2 =
            simulate_period(out.omega2, spec.n2 > 0 ? spec.n2 : spec.n);
    out.data.names.resize(p);
    for (int i = 0; i < p; ++i) out.data.names[i] = "v" + std::to_string(i);
    return out;
}

BenchmarkTable run_benchmark(const std::vector<ScenarioSpec>& grid,
                             int replications, const ChainConfig& cfg,
                             int workers) {
    if (replications < 0)
        throw ValidationError("replications must be >= 0");
    BenchmarkTable table;
    table.replications = replications;
    table.cells.resize(grid.size());
    for (std::size_t c = 0; c < grid.size(); ++c)
        table.cells[c].spec = grid[c];
    if (replications == 0) return table;

    auto run_cell = [&](std::size_t c) {
        BenchmarkCell& cell = table.cells[c];
        const ScenarioSpec& spec = cell.spec;
        for (int rep = 0; rep < replications; ++rep) {
            try {
                Rng rng(Rng::derive(spec.seed, c * 1000003 + rep));
                ScenarioData sim = simulate_scenario(spec, rng);

                ChainConfig fit = cfg;
                fit.q = spec.q;
                fit.single_period = spec.periods == 1;
                fit.store_draws = false;
                fit.seed = Rng::derive(spec.seed, c * 1000003 + rep + 500000);

                RunResult res = run_chain(sim.data, fit);
                cell.rmse_reps.push_back(
                    rmse(res.draws.omega1_mean, sim.omega1));
                cell.identity_baseline +=
                    rmse(Eigen::MatrixXd::Identity(spec.p, spec.p),
                         sim.omega1);
            } catch (const std::exception& err) {
                ++cell.failures;
                cell.errors.emplace_back(err.what());
            }
        }
        if (!cell.rmse_reps.empty()) {
            cell.rmse_mean =
                std::accumulate(cell.rmse_reps.begin(), cell.rmse_reps.end(),
                                0.0) /
                static_cast<double>(cell.rmse_reps.size());
            cell.identity_baseline /=
                static_cast<double>(cell.rmse_reps.size());
        }
    };

    if (workers <= 1) {
        for (std::size_t c = 0; c < grid.size(); ++c) run_cell(c);
        return table;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::future<void>> pool;
    const int n_workers =
        std::min<std::size_t>(workers, grid.size());
    for (int w = 0; w < n_workers; ++w)
        pool.push_back(std::async(std::launch::async, [&]() {
            for (;;) {
                const std::size_t c = next.fetch_add(1);
                if (c >= grid.size()) return;
                run_cell(c);
            }
        }));
    for (auto& f : pool) f.get();
    return table;
}

}  // namespace spoutar
