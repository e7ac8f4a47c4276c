#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "dai/common.hpp"
#include "dai/label_matrix.hpp"

namespace dai {

/// Nonnegative per-sample reweight vector r.
struct WeightVector {
    std::vector<double> values;

    std::size_t size() const { return values.size(); }
    double sum() const {
        double s = 0.0;
        for (double v : values) s += v;
        return s;
    }
};

/// Integer replication counts defining the sub-balance dataset.
struct ReplicationCounts {
    std::vector<std::int64_t> counts;

    std::int64_t total() const {
        std::int64_t s = 0;
        for (auto c : counts) s += c;
        return s;
    }
};

struct BalanceConfig {
    RatioVector p_ideal;           // per-label targets, each in (0,1)
    double lambda = 1e-5;          // regularization weight
    double learning_rate = 0.05;
    std::size_t iterations = 2000;
    double scale_constant = 10.0;
    std::uint64_t seed = 0;

    void validate(std::size_t n_labels) const {
        if (lambda <= 0.0) throw SolveError("lambda must be > 0");
        if (learning_rate <= 0.0) throw SolveError("learning rate must be > 0");
        if (iterations < 1) throw SolveError("iterations must be >= 1");
        if (scale_constant <= 0.0) throw SolveError("scale constant must be > 0");
        if (p_ideal.size() != n_labels)
            throw SolveError("p_ideal length does not match attribute count");
        for (double t : p_ideal.values)
            if (!(t > 0.0 && t < 1.0)) throw SolveError("p_ideal entries must lie in (0,1)");
    }
};

inline BalanceConfig default_balance_config(std::size_t n_labels, double p_ideal = 0.6) {
    BalanceConfig cfg;
    cfg.p_ideal.values.assign(n_labels, p_ideal);
    return cfg;
}

/// One-sided cubic hinge over labels: sum_j max(0, p_ideal_j - p_j)^3.
inline double hinge_term(const WeightVector& weights, const LabelMatrix& matrix,
                         const BalanceConfig& config) {
    RatioVector p = weighted_positive_ratio(matrix, weights.values);
    double h = 0.0;
    for (std::size_t j = 0; j < p.size(); ++j) {
        double d = config.p_ideal[j] - p[j];
        if (d > 0.0) h += d * d * d;
    }
    return h;
}

/// Full objective: hinge term minus lambda * sum(r).
inline double objective(const WeightVector& weights, const LabelMatrix& matrix,
                        const BalanceConfig& config) {
    return hinge_term(weights, matrix, config) - config.lambda * weights.sum();
}

/// Analytic gradient. With S = sum(r), d_j = p_ideal_j - p_j:
///   g_i = -(3/S) * sum_j max(0,d_j)^2 * (A_ij - p_j) - lambda
inline std::vector<double> gradient(const WeightVector& weights, const LabelMatrix& matrix,
                                    const BalanceConfig& config) {
    RatioVector p = weighted_positive_ratio(matrix, weights.values);
    double total = 0.0;
    for (double w : weights.values) total += w;
    std::size_t n = matrix.cols();
    std::vector<double> hinge_sq(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        double d = config.p_ideal[j] - p[j];
        if (d > 0.0) hinge_sq[j] = d * d;
    }
    std::vector<double> g(weights.size(), -config.lambda);
    double scale = 3.0 / total;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (hinge_sq[j] == 0.0) continue;
            acc += hinge_sq[j] * ((matrix.at(i, j) ? 1.0 : 0.0) - p[j]);
        }
        g[i] -= scale * acc;
    }
    return g;
}

/// Adam with nonnegativity projection after every step. Initialization r = 1,
/// fixed iteration budget (the objective is unbounded below, so there is no
/// convergence criterion to wait for). Deterministic.
inline WeightVector optimize(const LabelMatrix& matrix, const BalanceConfig& config) {
    config.validate(matrix.cols());
    const double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    std::size_t m = matrix.rows();
    WeightVector r;
    r.values.assign(m, 1.0);
    std::vector<double> mom(m, 0.0), vel(m, 0.0);
    for (std::size_t t = 1; t <= config.iterations; ++t) {
        if (r.sum() <= 0.0)
            throw SolveError("all weights collapsed to zero during descent (lambda=" +
                             std::to_string(config.lambda) + ", lr=" +
                             std::to_string(config.learning_rate) + ")");
        std::vector<double> g = gradient(r, matrix, config);
        double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t));
        double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t));
        for (std::size_t i = 0; i < m; ++i) {
            mom[i] = beta1 * mom[i] + (1.0 - beta1) * g[i];
            vel[i] = beta2 * vel[i] + (1.0 - beta2) * g[i] * g[i];
            double step = config.learning_rate * (mom[i] / bc1) / (std::sqrt(vel[i] / bc2) + eps);
            r.values[i] = std::max(r.values[i] - step, 0.0);
        }
    }
    if (r.sum() <= 0.0)
        throw SolveError("solver produced an all-zero weight vector (lambda=" +
                         std::to_string(config.lambda) + ", lr=" +
                         std::to_string(config.learning_rate) + ")");
    return r;
}

/// counts_i = round-half-up(c * r_i).
inline ReplicationCounts integerize(const WeightVector& weights, double scale_constant) {
    if (scale_constant <= 0.0) throw SolveError("scale constant must be > 0");
    ReplicationCounts out;
    out.counts.resize(weights.size());
    for (std::size_t i = 0; i < weights.size(); ++i)
        out.counts[i] = static_cast<std::int64_t>(std::floor(scale_constant * weights.values[i] + 0.5));
    if (out.total() == 0)
        throw SolveError("all replication counts are zero at scale " +
                         std::to_string(scale_constant) + "; choose a larger scale constant");
    return out;
}

struct ScaleSearchResult {
    double scale;
    double achieved_fraction;
    ReplicationCounts counts;
};

/// Smallest c on a logarithmic grid with sum(round(c * r_i)) >= target * m.
inline ScaleSearchResult find_scale_for_fraction(const WeightVector& weights,
                                                 double target_fraction, std::size_t m) {
    if (!(target_fraction > 0.0 && target_fraction <= 1.0))
        throw SolveError("target fraction must lie in (0,1]");
    if (weights.sum() <= 0.0) throw SolveError("weights are all zero");
    const double need = target_fraction * static_cast<double>(m);
    // 400 grid points per decade over [1e-4, 1e4]
    for (int k = -1600; k <= 1600; ++k) {
        double c = std::pow(10.0, k / 400.0);
        std::int64_t total = 0;
        for (double w : weights.values)
            total += static_cast<std::int64_t>(std::floor(c * w + 0.5));
        if (static_cast<double>(total) >= need && total > 0) {
            ScaleSearchResult res;
            res.scale = c;
            res.achieved_fraction = static_cast<double>(total) / static_cast<double>(m);
            res.counts = integerize(weights, c);
            return res;
        }
    }
    throw SolveError("target fraction unreachable on the scale sweep grid");
}

}  // namespace dai
