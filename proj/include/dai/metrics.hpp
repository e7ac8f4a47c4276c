#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "dai/common.hpp"
#include "dai/label_matrix.hpp"

namespace dai {

/// Real-valued scores in [0,1] paired with a binarization threshold.
/// Predicted positive iff score >= threshold.
struct PredictionMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> scores;  // row-major
    double threshold = 0.5;

    double at(std::size_t i, std::size_t j) const { return scores[i * cols + j]; }
    bool predicted(std::size_t i, std::size_t j) const { return at(i, j) >= threshold; }

    void validate() const {
        if (scores.size() != rows * cols) throw ParseError("prediction matrix shape mismatch");
        if (!(threshold > 0.0 && threshold < 1.0)) throw ParseError("threshold must lie in (0,1)");
        for (double s : scores)
            if (!(s >= 0.0 && s <= 1.0)) throw ParseError("scores must lie in [0,1]");
    }
};

struct MetricsReport {
    double mean_accuracy = 0.0;
    double example_accuracy = 0.0;
    double example_precision = 0.0;
    double example_recall = 0.0;
    double example_f1 = 0.0;
    std::vector<double> per_label_mA;
    std::vector<double> per_label_positive_ratio;
};

namespace detail {

inline void check_shapes(const PredictionMatrix& preds, const LabelMatrix& labels) {
    if (preds.rows != labels.rows() || preds.cols != labels.cols())
        throw ConsistencyError("prediction shape does not match label shape");
}

}  // namespace detail

/// Label-based mean accuracy: per label, the mean of TPR and TNR.
/// Degenerate labels (no positives, or no negatives) score the missing rate
/// as 1 when the predictions are also empty on that side, else 0.
inline std::pair<double, std::vector<double>> mean_accuracy(const PredictionMatrix& preds,
                                                            const LabelMatrix& labels) {
    detail::check_shapes(preds, labels);
    std::size_t n = labels.cols();
    std::vector<double> per_label(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
        for (std::size_t i = 0; i < labels.rows(); ++i) {
            bool y = labels.at(i, j) != 0;
            bool yhat = preds.predicted(i, j);
            if (y && yhat) ++tp;
            else if (y) ++fn;
            else if (yhat) ++fp;
            else ++tn;
        }
        double tpr = (tp + fn) > 0 ? static_cast<double>(tp) / (tp + fn)
                                   : (tp + fp == 0 ? 1.0 : 0.0);
        double tnr = (tn + fp) > 0 ? static_cast<double>(tn) / (tn + fp)
                                   : (tn + fn == 0 ? 1.0 : 0.0);
        per_label[j] = 0.5 * (tpr + tnr);
    }
    double total = 0.0;
    for (double v : per_label) total += v;
    return {total / static_cast<double>(n), per_label};
}

struct ExampleBasedMetrics {
    double accuracy;
    double precision;
    double recall;
    double f1;
};

/// Sample-based set-overlap metrics averaged over examples; F1 combines the
/// aggregate precision and recall. Empty-set conventions: empty truth and
/// empty prediction count as perfect agreement.
inline ExampleBasedMetrics example_based(const PredictionMatrix& preds, const LabelMatrix& labels) {
    detail::check_shapes(preds, labels);
    double acc = 0.0, prec = 0.0, rec = 0.0;
    std::size_t m = labels.rows();
    for (std::size_t i = 0; i < m; ++i) {
        std::size_t inter = 0, truth = 0, pred = 0;
        for (std::size_t j = 0; j < labels.cols(); ++j) {
            bool y = labels.at(i, j) != 0;
            bool yhat = preds.predicted(i, j);
            if (y) ++truth;
            if (yhat) ++pred;
            if (y && yhat) ++inter;
        }
        std::size_t uni = truth + pred - inter;
        acc += uni > 0 ? static_cast<double>(inter) / uni : 1.0;
        prec += pred > 0 ? static_cast<double>(inter) / pred : (truth == 0 ? 1.0 : 0.0);
        rec += truth > 0 ? static_cast<double>(inter) / truth : (pred == 0 ? 1.0 : 0.0);
    }
    ExampleBasedMetrics out;
    out.accuracy = acc / m;
    out.precision = prec / m;
    out.recall = rec / m;
    out.f1 = (out.precision + out.recall) > 0.0
                 ? 2.0 * out.precision * out.recall / (out.precision + out.recall)
                 : 0.0;
    return out;
}

inline MetricsReport full_report(const PredictionMatrix& preds, const LabelMatrix& labels) {
    MetricsReport rep;
    auto [ma, per_label] = mean_accuracy(preds, labels);
    rep.mean_accuracy = ma;
    rep.per_label_mA = std::move(per_label);
    auto ex = example_based(preds, labels);
    rep.example_accuracy = ex.accuracy;
    rep.example_precision = ex.precision;
    rep.example_recall = ex.recall;
    rep.example_f1 = ex.f1;
    rep.per_label_positive_ratio = positive_ratio(labels).values;
    return rep;
}

/// Per-label balance diagnostics before vs. after re-sampling.
struct BalanceReport {
    std::vector<std::string> attribute_names;
    std::vector<double> before_ratio;
    std::vector<double> after_ratio;
    double before_min, before_max, before_std;
    double after_min, after_max, after_std;
    std::size_t before_below_ideal, after_below_ideal;
    double p_ideal;
};

namespace detail {

inline void ratio_summary(const std::vector<double>& r, double p_ideal, double& mn, double& mx,
                          double& sd, std::size_t& below) {
    mn = 1.0;
    mx = 0.0;
    double mean = 0.0;
    below = 0;
    for (double v : r) {
        mn = std::min(mn, v);
        mx = std::max(mx, v);
        mean += v;
        if (v < p_ideal) ++below;
    }
    mean /= static_cast<double>(r.size());
    double var = 0.0;
    for (double v : r) var += (v - mean) * (v - mean);
    sd = std::sqrt(var / static_cast<double>(r.size()));
}

}  // namespace detail

inline BalanceReport balance_report(const LabelMatrix& before, const LabelMatrix& after,
                                    double p_ideal = 0.6) {
    if (before.attribute_names() != after.attribute_names())
        throw ConsistencyError("attribute names differ between before and after matrices");
    BalanceReport rep;
    rep.attribute_names = before.attribute_names();
    rep.before_ratio = positive_ratio(before).values;
    rep.after_ratio = positive_ratio(after).values;
    rep.p_ideal = p_ideal;
    detail::ratio_summary(rep.before_ratio, p_ideal, rep.before_min, rep.before_max,
                          rep.before_std, rep.before_below_ideal);
    detail::ratio_summary(rep.after_ratio, p_ideal, rep.after_min, rep.after_max, rep.after_std,
                          rep.after_below_ideal);
    return rep;
}

/// Per-label row: positive ratio plus label-based mA, precision, recall, F1
/// from that column's confusion counts. The data behind a metric-vs-ratio
/// scatter.
struct MetricVsRatioRow {
    std::string attribute;
    double positive_ratio;
    double mA;
    double precision;
    double recall;
    double f1;
};

inline std::vector<MetricVsRatioRow> metric_vs_ratio_table(const PredictionMatrix& preds,
                                                           const LabelMatrix& labels) {
    detail::check_shapes(preds, labels);
    auto [overall_ma, per_label_ma] = mean_accuracy(preds, labels);
    (void)overall_ma;
    std::vector<MetricVsRatioRow> rows;
    for (std::size_t j = 0; j < labels.cols(); ++j) {
        std::size_t tp = 0, fp = 0, fn = 0, pos = 0;
        for (std::size_t i = 0; i < labels.rows(); ++i) {
            bool y = labels.at(i, j) != 0;
            bool yhat = preds.predicted(i, j);
            if (y) ++pos;
            if (y && yhat) ++tp;
            else if (!y && yhat) ++fp;
            else if (y) ++fn;
        }
        MetricVsRatioRow row;
        row.attribute = labels.attribute_names()[j];
        row.positive_ratio = static_cast<double>(pos) / labels.rows();
        row.mA = per_label_ma[j];
        row.precision = (tp + fp) > 0 ? static_cast<double>(tp) / (tp + fp) : (pos == 0 ? 1.0 : 0.0);
        row.recall = pos > 0 ? static_cast<double>(tp) / pos : (tp + fp == 0 ? 1.0 : 0.0);
        row.f1 = (row.precision + row.recall) > 0.0
                     ? 2.0 * row.precision * row.recall / (row.precision + row.recall)
                     : 0.0;
        rows.push_back(std::move(row));
    }
    return rows;
}

/// Prediction CSV: header `sample_id,<attrs...>`, cells real scores in [0,1].
inline PredictionMatrix load_prediction_csv(const std::string& path, const LabelMatrix& labels,
                                            double threshold = 0.5) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw ParseError(path + ": empty file");
    auto header = detail::split_csv_line(detail::strip_cr(line));
    if (header.empty() || header[0] != "sample_id")
        throw ParseError(path + ": header must start with 'sample_id'");
    std::vector<std::string> attrs(header.begin() + 1, header.end());
    if (attrs != labels.attribute_names())
        throw ConsistencyError(path + ": attribute names do not match the label file");

    PredictionMatrix preds;
    preds.cols = attrs.size();
    preds.threshold = threshold;
    std::size_t row = 1;
    std::size_t next = 0;
    while (std::getline(in, line)) {
        ++row;
        line = detail::strip_cr(line);
        if (line.empty() && in.peek() == EOF) break;
        auto fields = detail::split_csv_line(line);
        if (fields.size() != attrs.size() + 1)
            throw ParseError(path + ": row " + std::to_string(row) + " has wrong field count");
        if (next >= labels.rows() || fields[0] != labels.sample_ids()[next])
            throw ConsistencyError(path + ": row " + std::to_string(row) +
                                   ": sample id '" + fields[0] + "' does not match the label file");
        ++next;
        for (std::size_t j = 1; j < fields.size(); ++j) {
            double v;
            try {
                v = std::stod(fields[j]);
            } catch (const std::exception&) {
                throw ParseError(path + ": row " + std::to_string(row) + " column " +
                                 std::to_string(j + 1) + ": not a number");
            }
            if (!(v >= 0.0 && v <= 1.0))
                throw ParseError(path + ": row " + std::to_string(row) + " column " +
                                 std::to_string(j + 1) + ": score outside [0,1]");
            preds.scores.push_back(v);
        }
        ++preds.rows;
    }
    if (preds.rows != labels.rows())
        throw ConsistencyError(path + ": row count does not match the label file");
    preds.validate();
    return preds;
}

}  // namespace dai
