#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dai/label_matrix.hpp"
#include "dai/metrics.hpp"
#include "dai/optimizer.hpp"
#include "dai/report_io.hpp"
#include "dai/resampler.hpp"
#include "dai/trainer.hpp"

namespace dai {

// Standard desk-scale benchmark dimensions, shared by the demo command and
// the regression gates.
struct BenchmarkSpec {
    std::size_t m = 5000;
    std::size_t n = 20;
    std::size_t d = 40;
    double ratio_lo = 0.03;
    double ratio_hi = 0.9;
    double noise_std = 0.5;
    double target_fraction = 0.4;
    std::size_t epochs = 30;
    double learning_rate = 0.1;
    std::size_t batch_size = 64;
};

struct MethodResult {
    std::string method;
    MetricsReport report;
};

struct AblationResult {
    std::vector<MethodResult> rows;  // baseline, weighted-loss, focal, dai
    BalanceReport balance;
    double dai_scale;
    double dai_achieved_fraction;
    std::vector<std::string> attribute_names;
};

inline AblationResult run_ablation(std::uint64_t seed, const BenchmarkSpec& spec = {}) {
    SynthTask task = synth_task(spec.m, spec.n, spec.d,
                                spread_ratios(spec.n, spec.ratio_lo, spec.ratio_hi), seed,
                                spec.noise_std);

    // solve the reweighting problem on the training labels
    BalanceConfig bal = default_balance_config(spec.n);
    bal.seed = seed;
    WeightVector r = optimize(task.train_labels, bal);
    ScaleSearchResult scale =
        find_scale_for_fraction(r, spec.target_fraction, task.train_labels.rows());
    auto [sub_matrix, sub_index] = materialize(task.train_labels, scale.counts);

    AblationResult result;
    result.dai_scale = scale.scale;
    result.dai_achieved_fraction = scale.achieved_fraction;
    result.balance = balance_report(task.train_labels, sub_matrix);
    result.attribute_names = task.train_labels.attribute_names();

    auto run_method = [&](const std::string& name, LossKind loss, bool use_sub) {
        TrainConfig cfg;
        cfg.epochs = spec.epochs;
        cfg.learning_rate = spec.learning_rate;
        cfg.batch_size = spec.batch_size;
        cfg.loss = loss;
        cfg.seed = seed;
        cfg.schedule = use_sub ? std::vector<Phase>{Phase::Sub, Phase::Full}
                               : std::vector<Phase>{Phase::Full};
        LinearModel model = train(task.train_features, task.train_labels,
                                  use_sub ? &sub_index : nullptr, cfg);
        result.rows.push_back({name, evaluate(model, task.test_features, task.test_labels)});
    };

    run_method("baseline", LossKind::PlainBce, false);
    run_method("weighted-loss", LossKind::WeightedBce, false);
    run_method("focal", LossKind::Focal, false);
    run_method("dai", LossKind::PlainBce, true);
    return result;
}

inline std::string ablation_summary_json(const AblationResult& result) {
    std::string out = "{\n  \"methods\": [\n";
    for (std::size_t i = 0; i < result.rows.size(); ++i) {
        const auto& row = result.rows[i];
        out += "    {\"method\": \"" + row.method + "\", \"mA\": " +
               detail::fmt6(row.report.mean_accuracy) +
               ", \"F1\": " + detail::fmt6(row.report.example_f1) +
               ", \"Recall\": " + detail::fmt6(row.report.example_recall) +
               ", \"Prec\": " + detail::fmt6(row.report.example_precision) +
               ", \"Accu\": " + detail::fmt6(row.report.example_accuracy) + "}";
        out += (i + 1 < result.rows.size()) ? ",\n" : "\n";
    }
    out += "  ],\n";
    out += "  \"dai_scale\": " + detail::fmt6(result.dai_scale) + ",\n";
    out += "  \"dai_achieved_fraction\": " + detail::fmt6(result.dai_achieved_fraction) + "\n}\n";
    return out;
}

/// Per-label mA of every method, one row per attribute.
inline std::string per_label_ma_csv(const AblationResult& result) {
    std::string out = "attribute";
    for (const auto& row : result.rows) out += "," + row.method;
    out += "\n";
    for (std::size_t j = 0; j < result.attribute_names.size(); ++j) {
        out += result.attribute_names[j];
        for (const auto& row : result.rows) out += "," + detail::fmt6(row.report.per_label_mA[j]);
        out += "\n";
    }
    return out;
}

}  // namespace dai
