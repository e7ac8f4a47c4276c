#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "dai/common.hpp"
#include "dai/label_matrix.hpp"
#include "dai/metrics.hpp"
#include "dai/resampler.hpp"

namespace dai {

/// Dense m x d feature table paired with sample ids.
struct FeatureMatrix {
    std::size_t rows = 0;
    std::size_t dim = 0;
    std::vector<double> data;  // row-major
    std::vector<std::string> sample_ids;

    double at(std::size_t i, std::size_t k) const { return data[i * dim + k]; }
};

enum class Phase { Sub, Full };
enum class LossKind { PlainBce, WeightedBce, Focal };

struct TrainConfig {
    std::size_t epochs = 30;
    std::vector<Phase> schedule = {Phase::Full};
    double learning_rate = 0.1;
    LossKind loss = LossKind::PlainBce;
    double focal_gamma = 2.0;
    std::size_t batch_size = 64;
    std::uint64_t seed = 0;

    void validate() const {
        if (schedule.empty()) throw SolveError("training schedule must be nonempty");
        if (learning_rate <= 0.0) throw SolveError("learning rate must be > 0");
        if (batch_size < 1) throw SolveError("batch size must be >= 1");
        if (focal_gamma < 0.0) throw SolveError("focal gamma must be >= 0");
    }
};

/// Multi-label linear classifier with per-label sigmoid outputs.
struct LinearModel {
    std::size_t dim = 0;
    std::size_t n_labels = 0;
    std::vector<double> weights;  // dim x n_labels, row-major
    std::vector<double> bias;     // n_labels

    double logit(const FeatureMatrix& x, std::size_t i, std::size_t j) const {
        double z = bias[j];
        for (std::size_t k = 0; k < dim; ++k) z += x.at(i, k) * weights[k * n_labels + j];
        return z;
    }

    bool finite() const {
        for (double w : weights)
            if (!std::isfinite(w)) return false;
        for (double b : bias)
            if (!std::isfinite(b)) return false;
        return true;
    }
};

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

inline LinearModel init_model(std::size_t dim, std::size_t n_labels, std::uint64_t seed) {
    LinearModel model;
    model.dim = dim;
    model.n_labels = n_labels;
    model.weights.resize(dim * n_labels);
    model.bias.assign(n_labels, 0.0);
    std::mt19937_64 rng(derive_seed(seed, 0x111d));
    std::normal_distribution<double> gauss(0.0, 0.01);
    for (double& w : model.weights) w = gauss(rng);
    return model;
}

struct SynthTask {
    FeatureMatrix train_features;
    LabelMatrix train_labels;
    FeatureMatrix test_features;
    LabelMatrix test_labels;
};

/// Synthetic multi-label task: ground-truth linear scores plus Gaussian noise,
/// per-label thresholds picked so the training split hits the target ratios.
/// 80/20 train/test split, fully determined by the seed.
inline SynthTask synth_task(std::size_t m, std::size_t n, std::size_t d,
                            const RatioVector& target_ratios, std::uint64_t seed,
                            double noise_std = 0.5) {
    if (n != target_ratios.size()) throw ParseError("n must match target ratio count");
    for (double t : target_ratios.values)
        if (!(t > 0.0 && t < 1.0)) throw ParseError("target ratios must lie in (0,1)");
    std::mt19937_64 rng(derive_seed(seed, 0x7a5c));
    std::normal_distribution<double> gauss(0.0, 1.0);

    // ground-truth weights scaled so scores are roughly unit variance
    std::vector<double> truth(d * n);
    double scale = 1.0 / std::sqrt(static_cast<double>(d));
    for (double& w : truth) w = gauss(rng) * scale;

    std::vector<double> features(m * d);
    for (double& f : features) f = gauss(rng);

    std::vector<double> scores(m * n);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double z = 0.0;
            for (std::size_t k = 0; k < d; ++k) z += features[i * d + k] * truth[k * n + j];
            scores[i * n + j] = z + noise_std * gauss(rng);
        }

    std::vector<std::size_t> perm(m);
    std::iota(perm.begin(), perm.end(), 0);
    std::mt19937_64 split_rng(derive_seed(seed, 0x5011));
    std::shuffle(perm.begin(), perm.end(), split_rng);
    std::size_t m_train = (m * 4) / 5;
    if (m_train < 1 || m_train == m) throw ParseError("m too small for an 80/20 split");

    // per-label threshold = training-split quantile at (1 - target)
    std::vector<double> thresholds(n);
    for (std::size_t j = 0; j < n; ++j) {
        std::vector<double> col;
        col.reserve(m_train);
        for (std::size_t t = 0; t < m_train; ++t) col.push_back(scores[perm[t] * n + j]);
        std::sort(col.begin(), col.end());
        auto pos = static_cast<std::size_t>(
            std::llround((1.0 - target_ratios[j]) * static_cast<double>(m_train)));
        if (pos >= m_train) pos = m_train - 1;
        thresholds[j] = col[pos];
    }

    auto build = [&](std::size_t begin, std::size_t end, const std::string& prefix) {
        FeatureMatrix fx;
        fx.rows = end - begin;
        fx.dim = d;
        fx.data.reserve(fx.rows * d);
        std::vector<std::string> ids;
        std::vector<std::uint8_t> entries;
        for (std::size_t t = begin; t < end; ++t) {
            std::size_t i = perm[t];
            ids.push_back(prefix + std::to_string(t - begin));
            for (std::size_t k = 0; k < d; ++k) fx.data.push_back(features[i * d + k]);
            for (std::size_t j = 0; j < n; ++j)
                entries.push_back(scores[i * n + j] >= thresholds[j] ? 1 : 0);
        }
        fx.sample_ids = ids;
        std::vector<std::string> attrs(n);
        for (std::size_t j = 0; j < n; ++j) attrs[j] = "attr" + std::to_string(j);
        return std::pair{std::move(fx),
                         LabelMatrix(std::move(ids), std::move(attrs), std::move(entries))};
    };

    SynthTask task;
    auto [trf, trl] = build(0, m_train, "train");
    auto [tef, tel] = build(m_train, m, "test");
    task.train_features = std::move(trf);
    task.train_labels = std::move(trl);
    task.test_features = std::move(tef);
    task.test_labels = std::move(tel);
    return task;
}

struct LossGradient {
    double loss;
    std::vector<double> d_weights;  // dim x n_labels
    std::vector<double> d_bias;     // n_labels
};

/// Loss and parameter gradient on one batch (row indices into features).
/// pos_weight_j applies only to WeightedBce; scores use the logistic link.
inline LossGradient loss_value(const LinearModel& model, const FeatureMatrix& features,
                               const LabelMatrix& labels, const std::vector<std::size_t>& batch,
                               LossKind kind, double focal_gamma,
                               const std::vector<double>& pos_weight) {
    if (batch.empty()) throw SolveError("batch must be nonempty");
    const std::size_t n = model.n_labels;
    const std::size_t d = model.dim;
    LossGradient out;
    out.loss = 0.0;
    out.d_weights.assign(d * n, 0.0);
    out.d_bias.assign(n, 0.0);
    const double eps = 1e-12;
    const double denom = static_cast<double>(batch.size()) * static_cast<double>(n);
    for (std::size_t i : batch) {
        for (std::size_t j = 0; j < n; ++j) {
            double p = sigmoid(model.logit(features, i, j));
            double y = labels.at(i, j) ? 1.0 : 0.0;
            double l, dz;
            switch (kind) {
                case LossKind::PlainBce: {
                    l = -(y * std::log(p + eps) + (1.0 - y) * std::log(1.0 - p + eps));
                    dz = p - y;
                    break;
                }
                case LossKind::WeightedBce: {
                    double w = pos_weight[j];
                    l = -(w * y * std::log(p + eps) + (1.0 - y) * std::log(1.0 - p + eps));
                    dz = (1.0 - y) * p - w * y * (1.0 - p);
                    break;
                }
                case LossKind::Focal: {
                    double pt = y > 0.5 ? p : 1.0 - p;
                    double mod = std::pow(1.0 - pt, focal_gamma);
                    l = -mod * std::log(pt + eps);
                    // dL/dpt = gamma (1-pt)^{g-1} log(pt) - (1-pt)^g / pt
                    double dpt =
                        (focal_gamma > 0.0
                             ? focal_gamma * std::pow(1.0 - pt, focal_gamma - 1.0) * std::log(pt + eps)
                             : 0.0) -
                        mod / (pt + eps);
                    double dpt_dz = (y > 0.5 ? 1.0 : -1.0) * p * (1.0 - p);
                    dz = dpt * dpt_dz;
                    break;
                }
                default:
                    throw SolveError("unknown loss kind");
            }
            out.loss += l / denom;
            double g = dz / denom;
            out.d_bias[j] += g;
            for (std::size_t k = 0; k < d; ++k)
                out.d_weights[k * n + j] += g * features.at(i, k);
        }
    }
    return out;
}

inline std::vector<double> positive_class_weights(const LabelMatrix& labels) {
    RatioVector q = positive_ratio(labels);
    std::vector<double> w(q.size());
    for (std::size_t j = 0; j < q.size(); ++j) {
        double qj = std::clamp(q[j], 1e-6, 1.0 - 1e-6);
        w[j] = (1.0 - qj) / qj;
    }
    return w;
}

/// Mini-batch gradient descent over the alternating schedule. Per epoch the
/// schedule (cycled) names the dataset: Full = all training rows, Sub = rows
/// of the sub-balance expansion. Optimizer state carries across phases.
inline LinearModel train(const FeatureMatrix& features, const LabelMatrix& labels,
                         const SubBalanceIndex* sub_index, const TrainConfig& config) {
    config.validate();
    if (features.rows != labels.rows()) throw ConsistencyError("feature/label row mismatch");
    bool needs_sub = std::any_of(config.schedule.begin(), config.schedule.end(),
                                 [](Phase p) { return p == Phase::Sub; });
    if (needs_sub && sub_index == nullptr)
        throw SolveError("schedule contains SUB but no sub-balance index was given");
    if (sub_index != nullptr && sub_index->source_checksum != labels.sha256())
        throw ConsistencyError("sub-balance index checksum does not match training labels");

    std::vector<double> pos_weight = positive_class_weights(labels);
    LinearModel model = init_model(features.dim, labels.cols(), config.seed);

    std::vector<std::size_t> full_rows(features.rows);
    std::iota(full_rows.begin(), full_rows.end(), 0);
    std::vector<std::size_t> sub_rows;
    if (sub_index != nullptr)
        for (const auto& e : sub_index->entries) sub_rows.push_back(e.source_row);

    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        Phase phase = config.schedule[epoch % config.schedule.size()];
        std::vector<std::size_t> order = (phase == Phase::Sub) ? sub_rows : full_rows;
        std::mt19937_64 rng(derive_seed(config.seed, 0xe90c + epoch));
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            std::size_t stop = std::min(start + config.batch_size, order.size());
            std::vector<std::size_t> batch(order.begin() + start, order.begin() + stop);
            LossGradient lg =
                loss_value(model, features, labels, batch, config.loss, config.focal_gamma, pos_weight);
            if (!std::isfinite(lg.loss))
                throw SolveError("training diverged at epoch " + std::to_string(epoch));
            for (std::size_t t = 0; t < model.weights.size(); ++t)
                model.weights[t] -= config.learning_rate * lg.d_weights[t];
            for (std::size_t j = 0; j < model.bias.size(); ++j)
                model.bias[j] -= config.learning_rate * lg.d_bias[j];
        }
        if (!model.finite())
            throw SolveError("non-finite parameters after epoch " + std::to_string(epoch));
    }
    return model;
}

inline PredictionMatrix predict(const LinearModel& model, const FeatureMatrix& features,
                                double threshold = 0.5) {
    PredictionMatrix preds;
    preds.rows = features.rows;
    preds.cols = model.n_labels;
    preds.threshold = threshold;
    preds.scores.reserve(preds.rows * preds.cols);
    for (std::size_t i = 0; i < features.rows; ++i)
        for (std::size_t j = 0; j < model.n_labels; ++j)
            preds.scores.push_back(sigmoid(model.logit(features, i, j)));
    return preds;
}

inline MetricsReport evaluate(const LinearModel& model, const FeatureMatrix& features,
                              const LabelMatrix& labels) {
    return full_report(predict(model, features), labels);
}

/// Model CSV: `# d=<d> n=<n>`, then d weight rows of n reals, then a bias row.
inline void save_model_csv(const LinearModel& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot write " + path);
    out << "# d=" << model.dim << " n=" << model.n_labels << "\n";
    char buf[32];
    auto emit_row = [&](auto value_at) {
        for (std::size_t j = 0; j < model.n_labels; ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", value_at(j));
            out << (j ? "," : "") << buf;
        }
        out << "\n";
    };
    for (std::size_t k = 0; k < model.dim; ++k)
        emit_row([&](std::size_t j) { return model.weights[k * model.n_labels + j]; });
    emit_row([&](std::size_t j) { return model.bias[j]; });
}

inline LinearModel load_model_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw ParseError(path + ": empty file");
    line = detail::strip_cr(line);
    LinearModel model;
    if (std::sscanf(line.c_str(), "# d=%zu n=%zu", &model.dim, &model.n_labels) != 2)
        throw ParseError(path + ": bad model header");
    for (std::size_t k = 0; k <= model.dim; ++k) {
        if (!std::getline(in, line)) throw ParseError(path + ": truncated model file");
        auto fields = detail::split_csv_line(detail::strip_cr(line));
        if (fields.size() != model.n_labels) throw ParseError(path + ": bad model row");
        for (const auto& f : fields) {
            double v = std::stod(f);
            if (k < model.dim)
                model.weights.push_back(v);
            else
                model.bias.push_back(v);
        }
    }
    return model;
}

}  // namespace dai
