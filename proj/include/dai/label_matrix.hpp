#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include "dai/common.hpp"
#include "dai/sha256.hpp"

namespace dai {

/// Per-attribute positive proportions, each in [0,1].
struct RatioVector {
    std::vector<double> values;

    std::size_t size() const { return values.size(); }
    double operator[](std::size_t j) const { return values[j]; }
};

/// Binary m x n attribute table with row ids and column names.
/// Entries are stored as uint8 0/1; rows index samples, columns attributes.
class LabelMatrix {
public:
    LabelMatrix() = default;

    LabelMatrix(std::vector<std::string> sample_ids,
                std::vector<std::string> attribute_names,
                std::vector<std::uint8_t> entries)
        : sample_ids_(std::move(sample_ids)),
          attribute_names_(std::move(attribute_names)),
          entries_(std::move(entries)) {
        validate();
    }

    std::size_t rows() const { return sample_ids_.size(); }
    std::size_t cols() const { return attribute_names_.size(); }

    std::uint8_t at(std::size_t i, std::size_t j) const { return entries_[i * cols() + j]; }

    const std::vector<std::string>& sample_ids() const { return sample_ids_; }
    const std::vector<std::string>& attribute_names() const { return attribute_names_; }
    const std::vector<std::uint8_t>& entries() const { return entries_; }

    bool operator==(const LabelMatrix& o) const {
        return sample_ids_ == o.sample_ids_ && attribute_names_ == o.attribute_names_ &&
               entries_ == o.entries_;
    }

    /// Canonical CSV serialization (LF newlines). Also the checksum domain.
    std::string to_csv() const {
        std::string out = "sample_id";
        for (const auto& a : attribute_names_) {
            out += ',';
            out += a;
        }
        out += '\n';
        for (std::size_t i = 0; i < rows(); ++i) {
            out += sample_ids_[i];
            for (std::size_t j = 0; j < cols(); ++j) {
                out += ',';
                out += static_cast<char>('0' + at(i, j));
            }
            out += '\n';
        }
        return out;
    }

    std::string sha256() const { return Sha256::hex(to_csv()); }

private:
    void validate() const {
        if (sample_ids_.empty()) throw ParseError("label matrix must have at least one row");
        if (attribute_names_.empty()) throw ParseError("label matrix must have at least one attribute");
        if (entries_.size() != sample_ids_.size() * attribute_names_.size())
            throw ParseError("label matrix entry count does not match dimensions");
        for (std::uint8_t v : entries_)
            if (v > 1) throw ParseError("label matrix entries must be 0 or 1");
        std::unordered_set<std::string> seen;
        for (const auto& id : sample_ids_)
            if (!seen.insert(id).second) throw ParseError("duplicate sample id: " + id);
        seen.clear();
        for (const auto& a : attribute_names_)
            if (!seen.insert(a).second) throw ParseError("duplicate attribute name: " + a);
    }

    std::vector<std::string> sample_ids_;
    std::vector<std::string> attribute_names_;
    std::vector<std::uint8_t> entries_;
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            fields.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    fields.push_back(cur);
    return fields;
}

inline std::string strip_cr(std::string s) {
    if (!s.empty() && s.back() == '\r') s.pop_back();
    return s;
}

}  // namespace detail

/// Strict parser for the label CSV format: header `sample_id,<attrs...>`,
/// cells exactly `0` or `1`. Errors carry 1-based row and column positions.
inline LabelMatrix load_label_csv_stream(std::istream& in, const std::string& origin) {
    std::string line;
    if (!std::getline(in, line)) throw ParseError(origin + ": empty file");
    auto header = detail::split_csv_line(detail::strip_cr(line));
    if (header.empty() || header[0] != "sample_id")
        throw ParseError(origin + ": header must start with 'sample_id'");
    if (header.size() < 2) throw ParseError(origin + ": header names no attributes");
    std::vector<std::string> attrs(header.begin() + 1, header.end());

    std::vector<std::string> ids;
    std::vector<std::uint8_t> entries;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        line = detail::strip_cr(line);
        if (line.empty() && in.peek() == EOF) break;  // trailing newline
        auto fields = detail::split_csv_line(line);
        if (fields.size() != attrs.size() + 1)
            throw ParseError(origin + ": row " + std::to_string(row) + " has " +
                             std::to_string(fields.size()) + " fields, expected " +
                             std::to_string(attrs.size() + 1));
        ids.push_back(fields[0]);
        for (std::size_t j = 1; j < fields.size(); ++j) {
            if (fields[j] == "0")
                entries.push_back(0);
            else if (fields[j] == "1")
                entries.push_back(1);
            else
                throw ParseError(origin + ": row " + std::to_string(row) + " column " +
                                 std::to_string(j + 1) + ": cell '" + fields[j] +
                                 "' is not 0 or 1");
        }
    }
    if (ids.empty()) throw ParseError(origin + ": no data rows");
    return LabelMatrix(std::move(ids), std::move(attrs), std::move(entries));
}

inline LabelMatrix load_label_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open " + path);
    return load_label_csv_stream(in, path);
}

inline void save_label_csv(const LabelMatrix& matrix, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot write " + path);
    out << matrix.to_csv();
    if (!out) throw ParseError("write failed: " + path);
}

/// Eq-style weighted positive proportion: p_j = sum_i r_i A_ij / sum_i r_i.
inline RatioVector weighted_positive_ratio(const LabelMatrix& matrix,
                                           const std::vector<double>& weights) {
    if (weights.size() != matrix.rows())
        throw SolveError("weight length " + std::to_string(weights.size()) +
                         " does not match row count " + std::to_string(matrix.rows()));
    double total = 0.0;
    for (double w : weights) {
        if (w < 0.0) throw SolveError("weights must be nonnegative");
        total += w;
    }
    if (total <= 0.0) throw SolveError("weight sum must be positive");
    RatioVector p;
    p.values.assign(matrix.cols(), 0.0);
    for (std::size_t i = 0; i < matrix.rows(); ++i) {
        double w = weights[i];
        if (w == 0.0) continue;
        for (std::size_t j = 0; j < matrix.cols(); ++j)
            if (matrix.at(i, j)) p.values[j] += w;
    }
    for (double& v : p.values) v /= total;
    return p;
}

/// Unweighted per-column positive proportions (weights all one).
inline RatioVector positive_ratio(const LabelMatrix& matrix) {
    return weighted_positive_ratio(matrix, std::vector<double>(matrix.rows(), 1.0));
}

/// Exact rational form of the weighted ratio for integer weights, as
/// (numerator, denominator) pairs. Used where floating error is not tolerated.
struct ExactRatio {
    std::int64_t num;
    std::int64_t den;
    bool operator==(const ExactRatio& o) const {
        return static_cast<__int128>(num) * o.den == static_cast<__int128>(o.num) * den;
    }
};

inline std::vector<ExactRatio> exact_weighted_positive_ratio(const LabelMatrix& matrix,
                                                             const std::vector<std::int64_t>& weights) {
    if (weights.size() != matrix.rows()) throw SolveError("weight length mismatch");
    std::int64_t total = 0;
    for (auto w : weights) {
        if (w < 0) throw SolveError("weights must be nonnegative");
        total += w;
    }
    if (total <= 0) throw SolveError("weight sum must be positive");
    std::vector<ExactRatio> out(matrix.cols(), ExactRatio{0, total});
    for (std::size_t i = 0; i < matrix.rows(); ++i) {
        if (weights[i] == 0) continue;
        for (std::size_t j = 0; j < matrix.cols(); ++j)
            if (matrix.at(i, j)) out[j].num += weights[i];
    }
    return out;
}

/// Independent Bernoulli columns at the requested target ratios.
/// Deterministic for a fixed seed.
inline LabelMatrix synth_generate(std::size_t m, std::size_t n, const RatioVector& target_ratios,
                                  std::uint64_t seed) {
    if (m < 1) throw ParseError("m must be >= 1");
    if (n != target_ratios.size()) throw ParseError("n must equal the number of target ratios");
    for (double t : target_ratios.values)
        if (!(t > 0.0 && t < 1.0)) throw ParseError("target ratios must lie in (0,1)");
    std::mt19937_64 rng(derive_seed(seed, 0x5e17));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<std::string> ids(m);
    std::vector<std::uint8_t> entries(m * n);
    for (std::size_t i = 0; i < m; ++i) {
        ids[i] = "s" + std::to_string(i);
        for (std::size_t j = 0; j < n; ++j)
            entries[i * n + j] = unif(rng) < target_ratios[j] ? 1 : 0;
    }
    std::vector<std::string> attrs(n);
    for (std::size_t j = 0; j < n; ++j) attrs[j] = "attr" + std::to_string(j);
    return LabelMatrix(std::move(ids), std::move(attrs), std::move(entries));
}

/// Log-spaced ratios from lo to hi, mimicking the heavy skew of real
/// pedestrian-attribute label tables.
inline RatioVector spread_ratios(std::size_t n, double lo, double hi) {
    RatioVector r;
    r.values.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        double t = n == 1 ? 0.0 : static_cast<double>(j) / (n - 1);
        r.values[j] = lo * std::pow(hi / lo, t);
    }
    return r;
}

}  // namespace dai
