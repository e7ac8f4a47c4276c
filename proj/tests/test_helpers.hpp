#pragma once

#include <random>
#include <string>
#include <vector>

#include "dai/label_matrix.hpp"

namespace dai::test {

inline LabelMatrix make_matrix(const std::vector<std::vector<int>>& rows) {
    std::vector<std::string> ids, attrs;
    std::vector<std::uint8_t> entries;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        ids.push_back("s" + std::to_string(i + 1));
        for (int v : rows[i]) entries.push_back(static_cast<std::uint8_t>(v));
    }
    for (std::size_t j = 0; j < rows[0].size(); ++j) attrs.push_back(std::string(1, 'a' + char(j)));
    return LabelMatrix(std::move(ids), std::move(attrs), std::move(entries));
}

inline LabelMatrix random_matrix(std::size_t m, std::size_t n, std::mt19937_64& rng,
                                 double density = 0.5) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<std::string> ids, attrs;
    std::vector<std::uint8_t> entries;
    for (std::size_t i = 0; i < m; ++i) ids.push_back("r" + std::to_string(i));
    for (std::size_t j = 0; j < n; ++j) attrs.push_back("c" + std::to_string(j));
    for (std::size_t k = 0; k < m * n; ++k) entries.push_back(unif(rng) < density ? 1 : 0);
    return LabelMatrix(std::move(ids), std::move(attrs), std::move(entries));
}

}  // namespace dai::test
