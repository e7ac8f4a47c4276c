#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "dai/optimizer.hpp"
#include "test_helpers.hpp"

using namespace dai;

namespace {

// Straight-line reimplementation of the objective, independent of the
// library's weighted_positive_ratio path.
double objective_oracle(const std::vector<double>& r, const LabelMatrix& A, double p_ideal,
                        double lambda) {
    double S = 0;
    for (double v : r) S += v;
    double obj = 0;
    for (std::size_t j = 0; j < A.cols(); ++j) {
        double num = 0;
        for (std::size_t i = 0; i < A.rows(); ++i) num += r[i] * A.at(i, j);
        double d = p_ideal - num / S;
        if (d > 0) obj += d * d * d;
    }
    for (double v : r) obj -= lambda * v;
    return obj;
}

BalanceConfig config_for(const LabelMatrix& m, double p_ideal, double lambda) {
    auto cfg = default_balance_config(m.cols(), p_ideal);
    cfg.lambda = lambda;
    return cfg;
}

}  // namespace

TEST_CASE("objective: hinge vanishes when every label is at or above target") {
    auto A = test::make_matrix({{1, 1}, {1, 1}, {1, 0}});
    auto cfg = config_for(A, 0.6, 1e-9);
    WeightVector r{{1.0, 1.0, 1.0}};
    CHECK(hinge_term(r, A, cfg) == 0.0);
}

TEST_CASE("objective hand case: A=[[1],[0]], lambda=0.01") {
    auto A = test::make_matrix({{1}, {0}});
    auto cfg = config_for(A, 0.6, 0.01);
    WeightVector r{{1.0, 1.0}};
    CHECK(objective(r, A, cfg) == Catch::Approx(-0.019).epsilon(1e-12));
    CHECK(hinge_term(r, A, cfg) == Catch::Approx(0.001).epsilon(1e-12));
    CHECK(objective(r, A, cfg) ==
          Catch::Approx(objective_oracle(r.values, A, 0.6, 0.01)).epsilon(1e-14));
}

TEST_CASE("objective regularizer is linear in lambda") {
    std::mt19937_64 rng(17);
    auto A = test::random_matrix(20, 5, rng);
    WeightVector r;
    std::uniform_real_distribution<double> unif(0.1, 2.0);
    for (int i = 0; i < 20; ++i) r.values.push_back(unif(rng));
    double a = 0.003, b = 0.04;
    auto ca = config_for(A, 0.6, a);
    auto cb = config_for(A, 0.6, b);
    CHECK(objective(r, A, ca) - objective(r, A, cb) ==
          Catch::Approx((b - a) * r.sum()).epsilon(1e-12));
}

TEST_CASE("hinge term is scale invariant in the weights") {
    std::mt19937_64 rng(19);
    for (int trial = 0; trial < 10; ++trial) {
        auto A = test::random_matrix(15, 6, rng, 0.3);
        auto cfg = config_for(A, 0.6, 1e-4);
        WeightVector r;
        std::uniform_real_distribution<double> unif(0.05, 3.0);
        for (int i = 0; i < 15; ++i) r.values.push_back(unif(rng));
        WeightVector r3{r.values};
        for (auto& v : r3.values) v *= 3.0;
        CHECK(std::abs(hinge_term(r, A, cfg) - hinge_term(r3, A, cfg)) <= 1e-12);
    }
}

TEST_CASE("gradient: hinge part vanishes when all labels are above target") {
    auto A = test::make_matrix({{1, 1}, {1, 1}, {1, 1}});
    double eps_lambda = 1e-7;
    auto cfg = config_for(A, 0.6, eps_lambda);
    WeightVector r{{1.0, 1.0, 1.0}};
    auto g = gradient(r, A, cfg);
    for (double v : g) CHECK(v == Catch::Approx(-eps_lambda).epsilon(1e-12));
}

TEST_CASE("gradient hand case: A=[[1],[0]]") {
    auto A = test::make_matrix({{1}, {0}});
    double lambda = 0.01;
    auto cfg = config_for(A, 0.6, lambda);
    WeightVector r{{1.0, 1.0}};
    auto g = gradient(r, A, cfg);
    // dp/dr1 = (1 - 0.5)/2 = 0.25; hinge grad = -3*(0.1)^2*0.25 = -0.0075
    CHECK(g[0] == Catch::Approx(-0.0075 - lambda).epsilon(1e-12));
    CHECK(g[1] == Catch::Approx(0.0075 - lambda).epsilon(1e-12));
}

TEST_CASE("gradient matches central finite differences on random instances") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> wdist(0.1, 2.0);
    for (int trial = 0; trial < 5; ++trial) {
        auto A = test::random_matrix(50, 8, rng, 0.25);
        auto cfg = config_for(A, 0.6, 1e-4);
        WeightVector r;
        for (int i = 0; i < 50; ++i) r.values.push_back(wdist(rng));
        auto g = gradient(r, A, cfg);
        const double h = 1e-6;
        for (std::size_t i = 0; i < r.size(); ++i) {
            auto hi = r.values, lo = r.values;
            hi[i] += h;
            lo[i] -= h;
            double fd = (objective_oracle(hi, A, 0.6, cfg.lambda) -
                         objective_oracle(lo, A, 0.6, cfg.lambda)) /
                        (2 * h);
            double denom = std::max(std::abs(fd), 1e-8);
            CHECK(std::abs(g[i] - fd) / denom <= 1e-6);
        }
    }
}

TEST_CASE("optimize keeps an already-balanced matrix near uniform") {
    // every column ratio is 1 >= 0.6, so only the -lambda force acts
    auto A = test::make_matrix({{1, 1}, {1, 1}, {1, 1}, {1, 1}});
    auto cfg = config_for(A, 0.6, 1e-5);
    cfg.iterations = 50;
    auto r = optimize(A, cfg);
    for (double v : r.values) {
        CHECK(v > 0.0);
        CHECK(v == Catch::Approx(r.values[0]).epsilon(1e-12));
    }
}

TEST_CASE("optimize is deterministic") {
    auto A = synth_generate(200, 5, spread_ratios(5, 0.1, 0.8), 31);
    auto cfg = default_balance_config(5);
    cfg.iterations = 300;
    auto r1 = optimize(A, cfg);
    auto r2 = optimize(A, cfg);
    CHECK(r1.values == r2.values);
}

TEST_CASE("optimize output is nonnegative exactly") {
    auto A = synth_generate(300, 8, spread_ratios(8, 0.05, 0.85), 33);
    auto cfg = default_balance_config(8);
    cfg.iterations = 500;
    auto r = optimize(A, cfg);
    for (double v : r.values) CHECK(v >= 0.0);
}

TEST_CASE("optimize improves below-target labels on the standard matrix") {
    auto A = synth_generate(2000, 20, spread_ratios(20, 0.03, 0.9), 42);
    auto before = positive_ratio(A);
    auto r = optimize(A, default_balance_config(20));
    auto after = weighted_positive_ratio(A, r.values);
    double bmin = 1.0, amin = 1.0;
    for (std::size_t j = 0; j < 20; ++j) {
        if (before[j] < 0.6) CHECK(after[j] > before[j]);
        bmin = std::min(bmin, before[j]);
        amin = std::min(amin, after[j]);
    }
    CHECK(amin > bmin);

    auto sd = [](const RatioVector& p) {
        double mean = 0;
        for (double v : p.values) mean += v;
        mean /= p.size();
        double var = 0;
        for (double v : p.values) var += (v - mean) * (v - mean);
        return std::sqrt(var / p.size());
    };
    CHECK(sd(after) < sd(before));
}

TEST_CASE("integerize rounds half up") {
    WeightVector r{{0.24, 0.5, 1.3}};
    auto c = integerize(r, 10.0);
    CHECK(c.counts == std::vector<std::int64_t>{2, 5, 13});
}

TEST_CASE("integerize rejects an all-zero result") {
    WeightVector r{{0.04, 0.04}};
    CHECK_THROWS_AS(integerize(r, 10.0), SolveError);
    CHECK_THROWS_WITH(integerize(r, 10.0), Catch::Matchers::ContainsSubstring("larger scale"));
    CHECK_THROWS_AS(integerize(r, -1.0), SolveError);
}

TEST_CASE("find_scale_for_fraction uniform case") {
    WeightVector r;
    r.values.assign(100, 1.0);
    auto res = find_scale_for_fraction(r, 0.4, 100);
    CHECK(res.counts.total() >= 40);
    CHECK(res.achieved_fraction >= 0.4);
    // uniform weights: counts = round(c) each, so the smallest useful c gives 0 or 1 per row
    CHECK(res.scale <= 1.0);
}

TEST_CASE("find_scale_for_fraction is monotone in the target") {
    std::mt19937_64 rng(41);
    WeightVector r;
    std::uniform_real_distribution<double> unif(0.0, 2.0);
    for (int i = 0; i < 60; ++i) r.values.push_back(unif(rng));
    double prev = 0.0;
    for (double target : {0.1, 0.3, 0.5, 0.8, 1.0}) {
        auto res = find_scale_for_fraction(r, target, 60);
        CHECK(res.scale >= prev);
        prev = res.scale;
    }
}

TEST_CASE("find_scale_for_fraction reaches 0.4 on the standard matrix") {
    auto A = synth_generate(2000, 20, spread_ratios(20, 0.03, 0.9), 42);
    auto r = optimize(A, default_balance_config(20));
    auto res = find_scale_for_fraction(r, 0.4, 2000);
    CHECK(std::abs(res.achieved_fraction - 0.4) <= 0.05);
}

TEST_CASE("degenerate solver settings fail with a diagnostic") {
    WeightVector r;
    r.values.assign(3, 0.0);
    CHECK_THROWS_AS(find_scale_for_fraction(r, 0.4, 3), SolveError);
}
