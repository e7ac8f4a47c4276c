#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "dai/common.hpp"
#include "dai/label_matrix.hpp"
#include "dai/optimizer.hpp"

namespace dai {

/// Compact record of a sub-balance expansion: which source row each expanded
/// row came from, plus a checksum binding the index to its source matrix.
struct SubBalanceIndex {
    struct Entry {
        std::size_t source_row;
        std::int64_t ordinal;
    };
    std::vector<Entry> entries;
    std::string source_checksum;
};

/// Expands row i counts_i times, in ascending source-row order, ordinals
/// 0..counts_i-1. Duplicated ids get a `#<ordinal>` suffix.
inline std::pair<LabelMatrix, SubBalanceIndex> materialize(const LabelMatrix& matrix,
                                                           const ReplicationCounts& counts) {
    if (counts.counts.size() != matrix.rows())
        throw ConsistencyError("replication counts length does not match row count");
    std::int64_t total = 0;
    for (auto c : counts.counts) {
        if (c < 0) throw ConsistencyError("replication counts must be nonnegative");
        total += c;
    }
    if (total == 0) throw SolveError("all replication counts are zero");

    SubBalanceIndex index;
    index.source_checksum = matrix.sha256();
    index.entries.reserve(static_cast<std::size_t>(total));
    std::vector<std::string> ids;
    std::vector<std::uint8_t> entries;
    ids.reserve(static_cast<std::size_t>(total));
    entries.reserve(static_cast<std::size_t>(total) * matrix.cols());
    for (std::size_t i = 0; i < matrix.rows(); ++i) {
        for (std::int64_t k = 0; k < counts.counts[i]; ++k) {
            index.entries.push_back({i, k});
            ids.push_back(matrix.sample_ids()[i] + "#" + std::to_string(k));
            for (std::size_t j = 0; j < matrix.cols(); ++j) entries.push_back(matrix.at(i, j));
        }
    }
    return {LabelMatrix(std::move(ids), matrix.attribute_names(), std::move(entries)),
            std::move(index)};
}

/// Rebuilds the expansion from the source matrix and an index; rejects an
/// index whose checksum does not match the matrix.
inline LabelMatrix reconstruct(const LabelMatrix& matrix, const SubBalanceIndex& index) {
    if (index.source_checksum != matrix.sha256())
        throw ConsistencyError("index checksum does not match source matrix");
    std::vector<std::string> ids;
    std::vector<std::uint8_t> entries;
    ids.reserve(index.entries.size());
    for (const auto& e : index.entries) {
        if (e.source_row >= matrix.rows()) throw ConsistencyError("index row out of range");
        ids.push_back(matrix.sample_ids()[e.source_row] + "#" + std::to_string(e.ordinal));
        for (std::size_t j = 0; j < matrix.cols(); ++j)
            entries.push_back(matrix.at(e.source_row, j));
    }
    return LabelMatrix(std::move(ids), matrix.attribute_names(), std::move(entries));
}

inline void save_index_csv(const SubBalanceIndex& index, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot write " + path);
    out << "# source_sha256=" << index.source_checksum << "\n";
    out << "source_row,ordinal\n";
    for (const auto& e : index.entries) out << e.source_row << "," << e.ordinal << "\n";
}

inline SubBalanceIndex load_index_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw ParseError(path + ": empty file");
    line = detail::strip_cr(line);
    const std::string prefix = "# source_sha256=";
    if (line.rfind(prefix, 0) != 0) throw ParseError(path + ": missing source_sha256 comment");
    SubBalanceIndex index;
    index.source_checksum = line.substr(prefix.size());
    if (!std::getline(in, line) || detail::strip_cr(line) != "source_row,ordinal")
        throw ParseError(path + ": bad header");
    while (std::getline(in, line)) {
        line = detail::strip_cr(line);
        if (line.empty()) continue;
        auto fields = detail::split_csv_line(line);
        if (fields.size() != 2) throw ParseError(path + ": bad index row: " + line);
        index.entries.push_back({static_cast<std::size_t>(std::stoull(fields[0])),
                                 static_cast<std::int64_t>(std::stoll(fields[1]))});
    }
    return index;
}

/// Single-label random over-sampling baseline: duplicates positives of one
/// column until its ratio reaches the target. Exists to show how balancing
/// one label can unbalance another.
inline ReplicationCounts random_oversample(const LabelMatrix& matrix, std::size_t label_index,
                                           double target_ratio, std::uint64_t seed) {
    if (label_index >= matrix.cols()) throw ConsistencyError("label index out of range");
    std::vector<std::size_t> positives;
    for (std::size_t i = 0; i < matrix.rows(); ++i)
        if (matrix.at(i, label_index)) positives.push_back(i);
    if (positives.empty()) throw SolveError("column has no positive samples");

    ReplicationCounts out;
    out.counts.assign(matrix.rows(), 1);
    double m = static_cast<double>(matrix.rows());
    double pos = static_cast<double>(positives.size());
    if (pos / m >= target_ratio) return out;

    // smallest k with (pos + k) / (m + k) >= target
    std::int64_t k = static_cast<std::int64_t>(
        std::ceil((target_ratio * m - pos) / (1.0 - target_ratio) - 1e-12));
    std::mt19937_64 rng(derive_seed(seed, 0x05e7));
    std::uniform_int_distribution<std::size_t> pick(0, positives.size() - 1);
    for (std::int64_t t = 0; t < k; ++t) out.counts[positives[pick(rng)]] += 1;
    return out;
}

/// Single-label random under-sampling baseline: drops negatives of one
/// column until its ratio reaches the target.
inline ReplicationCounts random_undersample(const LabelMatrix& matrix, std::size_t label_index,
                                            double target_ratio, std::uint64_t seed) {
    if (label_index >= matrix.cols()) throw ConsistencyError("label index out of range");
    std::vector<std::size_t> negatives;
    std::size_t pos = 0;
    for (std::size_t i = 0; i < matrix.rows(); ++i) {
        if (matrix.at(i, label_index))
            ++pos;
        else
            negatives.push_back(i);
    }
    if (negatives.empty()) throw SolveError("column has no negative samples");

    ReplicationCounts out;
    out.counts.assign(matrix.rows(), 1);
    double m = static_cast<double>(matrix.rows());
    if (static_cast<double>(pos) / m >= target_ratio) return out;
    if (pos == 0) throw SolveError("target unreachable: column has no positives");

    // smallest k with pos / (m - k) >= target
    std::int64_t k = static_cast<std::int64_t>(
        std::ceil(m - static_cast<double>(pos) / target_ratio - 1e-12));
    if (k > static_cast<std::int64_t>(negatives.size()))
        throw SolveError("target unreachable: not enough negatives to remove");
    std::mt19937_64 rng(derive_seed(seed, 0x4ade));
    std::shuffle(negatives.begin(), negatives.end(), rng);
    for (std::int64_t t = 0; t < k; ++t) out.counts[negatives[static_cast<std::size_t>(t)]] = 0;
    return out;
}

}  // namespace dai
