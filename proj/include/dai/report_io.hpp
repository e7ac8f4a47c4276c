#pragma once

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "dai/metrics.hpp"

namespace dai {

// Report serialization is hand-rolled so key order and the 6-decimal real
// format are byte-stable across runs and platforms.

namespace detail {

inline std::string fmt6(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

inline std::string json_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '"' || c == '\\') out.push_back('\\');
        out.push_back(c);
    }
    return out;
}

}  // namespace detail

inline std::string metrics_report_json(const MetricsReport& rep,
                                       const std::vector<std::string>& attribute_names) {
    std::string out = "{\n";
    out += "  \"mA\": " + detail::fmt6(rep.mean_accuracy) + ",\n";
    out += "  \"accuracy\": " + detail::fmt6(rep.example_accuracy) + ",\n";
    out += "  \"precision\": " + detail::fmt6(rep.example_precision) + ",\n";
    out += "  \"recall\": " + detail::fmt6(rep.example_recall) + ",\n";
    out += "  \"f1\": " + detail::fmt6(rep.example_f1) + ",\n";
    out += "  \"per_label\": [\n";
    for (std::size_t j = 0; j < attribute_names.size(); ++j) {
        out += "    {\"attribute\": \"" + detail::json_escape(attribute_names[j]) +
               "\", \"mA\": " + detail::fmt6(rep.per_label_mA[j]) +
               ", \"positive_ratio\": " + detail::fmt6(rep.per_label_positive_ratio[j]) + "}";
        out += (j + 1 < attribute_names.size()) ? ",\n" : "\n";
    }
    out += "  ]\n}\n";
    return out;
}

inline std::string balance_report_json(const BalanceReport& rep) {
    std::string out = "{\n";
    out += "  \"p_ideal\": " + detail::fmt6(rep.p_ideal) + ",\n";
    out += "  \"before\": {\"min\": " + detail::fmt6(rep.before_min) +
           ", \"max\": " + detail::fmt6(rep.before_max) +
           ", \"std\": " + detail::fmt6(rep.before_std) +
           ", \"below_ideal\": " + std::to_string(rep.before_below_ideal) + "},\n";
    out += "  \"after\": {\"min\": " + detail::fmt6(rep.after_min) +
           ", \"max\": " + detail::fmt6(rep.after_max) +
           ", \"std\": " + detail::fmt6(rep.after_std) +
           ", \"below_ideal\": " + std::to_string(rep.after_below_ideal) + "},\n";
    out += "  \"per_label\": [\n";
    for (std::size_t j = 0; j < rep.attribute_names.size(); ++j) {
        out += "    {\"attribute\": \"" + detail::json_escape(rep.attribute_names[j]) +
               "\", \"before\": " + detail::fmt6(rep.before_ratio[j]) +
               ", \"after\": " + detail::fmt6(rep.after_ratio[j]) + "}";
        out += (j + 1 < rep.attribute_names.size()) ? ",\n" : "\n";
    }
    out += "  ]\n}\n";
    return out;
}

inline std::string balance_report_csv(const BalanceReport& rep) {
    std::string out = "attribute,before_ratio,after_ratio\n";
    for (std::size_t j = 0; j < rep.attribute_names.size(); ++j)
        out += rep.attribute_names[j] + "," + detail::fmt6(rep.before_ratio[j]) + "," +
               detail::fmt6(rep.after_ratio[j]) + "\n";
    return out;
}

inline std::string metric_vs_ratio_csv(const std::vector<MetricVsRatioRow>& rows) {
    std::string out = "attribute,positive_ratio,mA,precision,recall,f1\n";
    for (const auto& r : rows)
        out += r.attribute + "," + detail::fmt6(r.positive_ratio) + "," + detail::fmt6(r.mA) +
               "," + detail::fmt6(r.precision) + "," + detail::fmt6(r.recall) + "," +
               detail::fmt6(r.f1) + "\n";
    return out;
}

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot write " + path);
    out << content;
    if (!out) throw ParseError("write failed: " + path);
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace dai
