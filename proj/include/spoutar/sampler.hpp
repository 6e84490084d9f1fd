#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "spoutar/kernels.hpp"
#include "spoutar/likelihood.hpp"
#include "spoutar/rng.hpp"

namespace spoutar {

/// Schedule, tuning bands and prior constants for one MCMC run. Defaults are
/// the reference settings: 10000 draws, 5000 burn-in, AR-only warmup for the
/// first 1500 iterations, thresholds pinned at zero until 2500, scale tuning
/// every 100 iterations toward 15-40% (MH) and 45-70% (MALA) acceptance.
struct ChainConfig {
    int total_iters = 10000;
    int burn_in = 5000;
    int ar_only_until = 1500;
    int thresholds_zero_until = 2500;
    int tune_every = 100;
    int lambda_l_every = 20;
    int lambda_a_every = 30;
    double mh_band_lo = 0.15, mh_band_hi = 0.40;
    double mala_band_lo = 0.45, mala_band_hi = 0.70;

    int q = 2;
    std::uint64_t seed = 0;
    int thinning = 1;
    bool single_period = false;
    bool store_draws = true;

    double lambda_lower = 0.0, lambda_upper = 100.0;
    double sigma_d = 10.0;
    double invgamma_l_shape = 0.01, invgamma_l_scale = 0.01;
    double invgamma_a_shape = 0.1, invgamma_a_scale = 0.1;
    double h0 = 1e-8;

    // Initial proposal scales; tuning moves them during burn-in.
    double init_scale_a = 0.02;
    double init_step_l = 0.02;
    double init_step_d = 0.02;
    double init_scale_pacf = 0.4;
    double init_scale_lambda = 0.4;
    double init_scale_xi = 0.2;

    double adapt_reg = 1e-6;     // ridge added to the empirical pacf covariance
    int adapt_min_history = 50;  // draws before the empirical covariance kicks in

    // Optional per-series AR orders (each in [1, q]); pacf entries past a
    // series' order stay pinned at zero. Empty means uniform order q.
    std::vector<int> effective_orders;

    void validate(int p) const;
    ModelConfig model() const;
};

/// Per-series Haario adaptation buffers: running mean and co-moment of the
/// unconstrained pacf draws.
struct PacfAdapt {
    long count = 0;
    Eigen::VectorXd mean;
    Eigen::MatrixXd m2;

    void init(int q) {
        count = 0;
        mean = Eigen::VectorXd::Zero(q);
        m2 = Eigen::MatrixXd::Zero(q, q);
    }
    void push(const Eigen::VectorXd& v);
    Eigen::MatrixXd covariance() const;
};

struct AdaptState {
    double scale_a = 0, step_l1 = 0, step_l2 = 0, step_d = 0;
    double scale_lambda_l1 = 0, scale_lambda_l2 = 0, scale_lambda_a = 0;
    double scale_xi = 0;
    Eigen::VectorXd pacf_scale;  // per-series multiplier
    std::vector<PacfAdapt> pacf;
    std::vector<char> pacf_empirical;  // switched to empirical covariance
    std::vector<AcceptanceCounter> pacf_counters;
    bool frozen = false;  // set at the end of burn-in

    std::map<std::string, AcceptanceCounter> counters;
    std::map<std::string, bool> shrink_flag;  // non-finite gradient seen
};

/// Full sampler state: parameters, derived caches (U, latents, per-series
/// likelihood pieces), the running log posterior and the adaptation state.
struct ChainState {
    ModelParams params;
    Eigen::MatrixXd v;  // unconstrained pacf, in sync with params.pacf

    Eigen::MatrixXd u;
    Eigen::MatrixXd z1, z2;
    Eigen::VectorXd ll1_rows, ll2_rows;
    double log_post = 0.0;

    AdaptState adapt;
    int iter = 0;
};

struct BlockEvent {
    int iter;
    const char* block;
    bool accepted;
    double log_post;
};
using DiagSink = std::function<void(const BlockEvent&)>;

struct WindowStat {
    int iter;
    std::string block;
    double rate;
    int proposed;
    bool tuning_active;
};

struct Diagnostics {
    std::vector<double> logpost_trace;
    std::vector<WindowStat> windows;
    std::map<std::string, std::pair<long, long>> post_burn_totals;
    double max_resync_error = 0.0;
    int stored_draws = 0;
};

/// Post-burn-in retained draws plus online posterior means of the two
/// precision matrices.
struct PosteriorDraws {
    int p = 0, q = 0;
    bool single_period = false;
    int thinning = 1;
    std::vector<std::string> names;

    std::vector<Eigen::VectorXd> d;
    std::vector<Eigen::VectorXd> l1, l2, a;  // packed strict-lower entries
    std::vector<Eigen::MatrixXd> rho;

    Eigen::MatrixXd omega1_mean, omega2_mean;

    int count() const { return static_cast<int>(d.size()); }
};

struct RunResult {
    PosteriorDraws draws;
    Diagnostics diag;
};

/// Moment-based initialization: shrunk sample precision per period, modified
/// Cholesky factors (D averaged across periods), A = 0 so U = I, Yule-Walker
/// AR fits on the implied latents converted to pacfs, thresholds at zero and
/// slab variances drawn from their conjugate posteriors.
ChainState hot_start(const PairedDataset& data, const ChainConfig& cfg,
                     Rng& rng);

/// Shrinkage covariance used by the hot start (closed-form shrinkage toward
/// a scaled identity). Exposed for testing.
Eigen::MatrixXd shrunk_covariance(const Eigen::MatrixXd& y);

// Individual Gibbs blocks. Each returns whether its proposal was accepted
// and leaves the state untouched on rejection.
bool mh_step_a(ChainState& s, const PairedDataset& data,
               const ChainConfig& cfg, Rng& rng);
bool mala_step_l(ChainState& s, const PairedDataset& data,
                 const ChainConfig& cfg, int period, Rng& rng);
bool mala_step_logd(ChainState& s, const PairedDataset& data,
                    const ChainConfig& cfg, Rng& rng);
bool mh_step_xi(ChainState& s, const ChainConfig& cfg, Rng& rng);
/// Updates every series' pacf block; per-series acceptance is recorded in
/// the adaptation counters. Returns the number of accepted series moves.
int adaptive_mh_step_pacf(ChainState& s, const PairedDataset& data,
                          const ChainConfig& cfg, Rng& rng,
                          const DiagSink& sink = nullptr);
void update_thresholds(ChainState& s, const PairedDataset& data,
                       const ChainConfig& cfg, int iter, Rng& rng,
                       const DiagSink& sink = nullptr);
void update_slab_variances(ChainState& s, const ChainConfig& cfg, Rng& rng);

/// Recompute every derived cache (U, latents, likelihood rows, log posterior)
/// from the parameters.
void refresh_state(ChainState& s, const PairedDataset& data,
                   const ChainConfig& cfg);

/// Full phased run: AR-only, thresholds-at-zero, then all blocks; burn-in
/// tuning; post-burn-in draw storage.
RunResult run_chain(const PairedDataset& data, const ChainConfig& cfg,
                    const DiagSink& sink = nullptr);

/// FNV-1a hash over the parameter vector; used to verify that rejected
/// proposals leave the state bitwise unchanged.
std::uint64_t state_hash(const ChainState& s);

}  // namespace spoutar
