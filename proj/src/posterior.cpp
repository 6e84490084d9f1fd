#include "spoutar/posterior.hpp"

#include <algorithm>
#include <cmath>

#include "spoutar/arproc.hpp"
#include "spoutar/errors.hpp"
#include "spoutar/factorization.hpp"

namespace spoutar {

std::vector<EdgeShift> EdgeShiftReport::flagged() const {
    std::vector<EdgeShift> out;
    for (const auto& e : edges)
        if (e.cls != ShiftClass::none) out.push_back(e);
    return out;
}

std::vector<Eigen::MatrixXd> omega_diff_draws(const PosteriorDraws& draws) {
    if (draws.count() == 0)
        throw ValidationError("no posterior draws available");
    std::vector<Eigen::MatrixXd> out;
    out.reserve(draws.count());
    for (int k = 0; k < draws.count(); ++k) {
        const Eigen::MatrixXd l1 =
            strict_lower_from_packed(draws.l1[k], draws.p);
        const Eigen::MatrixXd l2 =
            strict_lower_from_packed(draws.l2[k], draws.p);
        out.push_back(assemble_precision(draws.d[k], l2) -
                      assemble_precision(draws.d[k], l1));
    }
    return out;
}

double quantile(std::vector<double> values, double prob) {
    if (values.empty()) throw ValidationError("quantile of empty sample");
    std::sort(values.begin(), values.end());
    const double pos = prob * (values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = static_cast<std::size_t>(std::ceil(pos));
    const double w = pos - lo;
    return (1.0 - w) * values[lo] + w * values[hi];
}

EdgeShiftReport classify_edges(const std::vector<Eigen::MatrixXd>& diffs,
                               double level) {
    if (diffs.size() < 2)
        throw ValidationError("edge classification needs at least 2 draws");
    if (!(level > 0.0 && level < 1.0))
        throw ValidationError("credible level must lie in (0,1)");
    const int p = static_cast<int>(diffs.front().rows());
    const double alpha = 1.0 - level;

    EdgeShiftReport report;
    report.level = level;
    report.p = p;
    std::vector<double> vals(diffs.size());
    for (int i = 0; i < p; ++i) {
        for (int j = i + 1; j < p; ++j) {
            double mean = 0.0;
            for (std::size_t k = 0; k < diffs.size(); ++k) {
                vals[k] = diffs[k](i, j);
                mean += vals[k];
            }
            mean /= static_cast<double>(diffs.size());
            const double lo = quantile(vals, alpha / 2.0);
            const double hi = quantile(vals, 1.0 - alpha / 2.0);
            ShiftClass cls = ShiftClass::none;
            if (lo > 0.0)
                cls = ShiftClass::positive;
            else if (hi < 0.0)
                cls = ShiftClass::negative;
            report.edges.push_back({i, j, mean, lo, hi, cls});
        }
    }
    return report;
}

std::vector<EdgeShift> top_k_edges(const EdgeShiftReport& report, int k) {
    if (k < 1) throw ValidationError("top-k requires k >= 1");
    std::vector<EdgeShift> flagged = report.flagged();
    std::stable_sort(flagged.begin(), flagged.end(),
                     [](const EdgeShift& a, const EdgeShift& b) {
                         const double ma = std::abs(a.mean);
                         const double mb = std::abs(b.mean);
                         if (ma != mb) return ma > mb;
                         if (a.i != b.i) return a.i < b.i;
                         return a.j < b.j;
                     });
    if (static_cast<int>(flagged.size()) > k) flagged.resize(k);
    return flagged;
}

Eigen::MatrixXd partial_correlations(const Eigen::MatrixXd& omega) {
    const int p = static_cast<int>(omega.rows());
    Eigen::LLT<Eigen::MatrixXd> llt(omega);
    if (omega.rows() != omega.cols() || llt.info() != Eigen::Success)
        throw ValidationError("partial correlations require an SPD matrix");
    Eigen::MatrixXd out(p, p);
    for (int i = 0; i < p; ++i) {
        out(i, i) = 1.0;
        for (int j = i + 1; j < p; ++j) {
            const double r = -omega(i, j) / std::sqrt(omega(i, i) * omega(j, j));
            out(i, j) = r;
            out(j, i) = r;
        }
    }
    return out;
}

ForecastResult predict(const PosteriorDraws& draws,
                       const Eigen::MatrixXd& history, int horizon, Rng& rng,
                       bool suppress_innovations, bool keep_paths) {
    if (horizon < 1) throw ValidationError("forecast horizon must be >= 1");
    if (draws.count() == 0) throw ValidationError("no posterior draws available");
    const int p = draws.p;
    const int q = draws.q;
    if (history.rows() != p)
        throw ValidationError("history has wrong number of variables");
    if (history.cols() < q)
        throw ValidationError("history shorter than the AR order");

    ForecastResult result;
    result.point = Eigen::MatrixXd::Zero(p, horizon);

    for (int k = 0; k < draws.count(); ++k) {
        // Post-period factors; in reduced single-period fits the only
        // estimated matrix is L1.
        const Eigen::VectorXd& d = draws.d[k];
        const Eigen::MatrixXd l = strict_lower_from_packed(
            draws.single_period ? draws.l1[k] : draws.l2[k], p);
        const Eigen::MatrixXd u = cayley(skew_from_packed(draws.a[k], p));

        Eigen::MatrixXd psi(p, q);
        Eigen::VectorXd sigma(p);
        for (int i = 0; i < p; ++i) {
            const Eigen::VectorXd phi = pacf_to_ar_row(draws.rho[k].row(i));
            const Eigen::VectorXd gamma = ar_to_acf_row(phi);
            psi.row(i) = phi;
            sigma[i] = std::sqrt(innovation_variance(phi, gamma));
        }

        const Eigen::MatrixXd z_hist =
            to_latent(history.rightCols(q), d, l, u);
        Eigen::MatrixXd z(p, q + horizon);
        z.leftCols(q) = z_hist;
        for (int h = 0; h < horizon; ++h) {
            for (int i = 0; i < p; ++i) {
                double v = 0.0;
                for (int kk = 0; kk < q; ++kk)
                    v += psi(i, kk) * z(i, q + h - 1 - kk);
                if (!suppress_innovations) v += sigma[i] * rng.normal();
                z(i, q + h) = v;
            }
        }
        const Eigen::MatrixXd y_path =
            from_latent(z.rightCols(horizon), d, l, u);
        result.point += y_path;
        if (keep_paths) result.paths.push_back(y_path);
    }
    result.point /= static_cast<double>(draws.count());
    return result;
}

double rmse(const Eigen::MatrixXd& omega_bar,
            const Eigen::MatrixXd& omega_true) {
    if (omega_bar.rows() != omega_true.rows() ||
        omega_bar.cols() != omega_true.cols())
        throw ValidationError("rmse: dimension mismatch");
    return (omega_bar - omega_true).norm() /
           static_cast<double>(omega_bar.rows());
}

}  // namespace spoutar
