#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <random>

#include "dai/trainer.hpp"
#include "test_helpers.hpp"

using namespace dai;

namespace {

FeatureMatrix random_features(std::size_t m, std::size_t d, std::mt19937_64& rng) {
    FeatureMatrix fx;
    fx.rows = m;
    fx.dim = d;
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (std::size_t k = 0; k < m * d; ++k) fx.data.push_back(gauss(rng));
    for (std::size_t i = 0; i < m; ++i) fx.sample_ids.push_back("f" + std::to_string(i));
    return fx;
}

double loss_only(const LinearModel& model, const FeatureMatrix& fx, const LabelMatrix& labels,
                 const std::vector<std::size_t>& batch, LossKind kind, double gamma,
                 const std::vector<double>& pw) {
    return loss_value(model, fx, labels, batch, kind, gamma, pw).loss;
}

}  // namespace

TEST_CASE("weighted bce with q=0.5 equals plain bce") {
    std::mt19937_64 rng(81);
    auto fx = random_features(8, 4, rng);
    auto labels = test::make_matrix(
        {{1, 0}, {0, 1}, {1, 1}, {0, 0}, {1, 0}, {0, 1}, {1, 1}, {0, 0}});  // both cols at 0.5
    auto model = init_model(4, 2, 1);
    std::vector<std::size_t> batch = {0, 1, 2, 3, 4, 5, 6, 7};
    auto pw = positive_class_weights(labels);
    CHECK(pw[0] == Catch::Approx(1.0));
    auto a = loss_value(model, fx, labels, batch, LossKind::PlainBce, 2.0, pw);
    auto b = loss_value(model, fx, labels, batch, LossKind::WeightedBce, 2.0, pw);
    CHECK(a.loss == Catch::Approx(b.loss).epsilon(1e-12));
    for (std::size_t k = 0; k < a.d_weights.size(); ++k)
        CHECK(a.d_weights[k] == Catch::Approx(b.d_weights[k]).epsilon(1e-12));
}

TEST_CASE("focal with gamma=0 equals plain bce") {
    std::mt19937_64 rng(83);
    auto fx = random_features(6, 3, rng);
    auto labels = test::random_matrix(6, 2, rng);
    auto model = init_model(3, 2, 2);
    std::vector<std::size_t> batch = {0, 1, 2, 3, 4, 5};
    auto pw = positive_class_weights(labels);
    auto a = loss_value(model, fx, labels, batch, LossKind::PlainBce, 0.0, pw);
    auto b = loss_value(model, fx, labels, batch, LossKind::Focal, 0.0, pw);
    CHECK(a.loss == Catch::Approx(b.loss).epsilon(1e-9));
    for (std::size_t k = 0; k < a.d_weights.size(); ++k)
        CHECK(a.d_weights[k] == Catch::Approx(b.d_weights[k]).epsilon(1e-9));
}

TEST_CASE("loss gradients match finite differences for all loss kinds") {
    std::mt19937_64 rng(87);
    auto fx = random_features(10, 5, rng);
    auto labels = test::random_matrix(10, 3, rng, 0.4);
    auto pw = positive_class_weights(labels);
    std::vector<std::size_t> batch = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
    const double h = 1e-6;
    for (LossKind kind : {LossKind::PlainBce, LossKind::WeightedBce, LossKind::Focal}) {
        auto model = init_model(5, 3, 7);
        // move params off the origin so gradients are not symmetric
        std::normal_distribution<double> gauss(0.0, 0.5);
        for (auto& w : model.weights) w += gauss(rng);
        for (auto& b : model.bias) b += gauss(rng);
        auto lg = loss_value(model, fx, labels, batch, kind, 2.0, pw);
        for (std::size_t t = 0; t < model.weights.size(); ++t) {
            auto hi = model, lo = model;
            hi.weights[t] += h;
            lo.weights[t] -= h;
            double fd = (loss_only(hi, fx, labels, batch, kind, 2.0, pw) -
                         loss_only(lo, fx, labels, batch, kind, 2.0, pw)) /
                        (2 * h);
            double denom = std::max(std::abs(fd), 1e-6);
            CHECK(std::abs(lg.d_weights[t] - fd) / denom <= 1e-5);
        }
        for (std::size_t j = 0; j < model.bias.size(); ++j) {
            auto hi = model, lo = model;
            hi.bias[j] += h;
            lo.bias[j] -= h;
            double fd = (loss_only(hi, fx, labels, batch, kind, 2.0, pw) -
                         loss_only(lo, fx, labels, batch, kind, 2.0, pw)) /
                        (2 * h);
            double denom = std::max(std::abs(fd), 1e-6);
            CHECK(std::abs(lg.d_bias[j] - fd) / denom <= 1e-5);
        }
    }
}

TEST_CASE("synth_task hits target ratios on the training split") {
    RatioVector targets = spread_ratios(8, 0.05, 0.8);
    auto task = synth_task(5000, 8, 16, targets, 3);
    auto p = positive_ratio(task.train_labels);
    for (std::size_t j = 0; j < 8; ++j) CHECK(std::abs(p[j] - targets[j]) <= 0.02);
    CHECK(task.train_labels.rows() == 4000);
    CHECK(task.test_labels.rows() == 1000);
    CHECK(task.train_features.rows == 4000);
}

TEST_CASE("synth_task is deterministic per seed") {
    RatioVector targets = spread_ratios(3, 0.2, 0.7);
    auto a = synth_task(200, 3, 6, targets, 9);
    auto b = synth_task(200, 3, 6, targets, 9);
    CHECK(a.train_labels == b.train_labels);
    CHECK(a.train_features.data == b.train_features.data);
    CHECK(a.test_labels == b.test_labels);
}

TEST_CASE("zero epochs returns the seeded initial model") {
    std::mt19937_64 rng(91);
    auto fx = random_features(20, 4, rng);
    auto labels = test::random_matrix(20, 2, rng);
    TrainConfig cfg;
    cfg.epochs = 0;
    cfg.seed = 123;
    auto model = train(fx, labels, nullptr, cfg);
    auto fresh = init_model(4, 2, 123);
    CHECK(model.weights == fresh.weights);
    CHECK(model.bias == fresh.bias);
}

TEST_CASE("training is deterministic") {
    std::mt19937_64 rng(93);
    auto fx = random_features(100, 6, rng);
    auto labels = test::random_matrix(100, 3, rng);
    TrainConfig cfg;
    cfg.epochs = 5;
    cfg.seed = 11;
    auto a = train(fx, labels, nullptr, cfg);
    auto b = train(fx, labels, nullptr, cfg);
    CHECK(a.weights == b.weights);
    CHECK(a.bias == b.bias);
}

TEST_CASE("schedule with SUB but no index is rejected") {
    std::mt19937_64 rng(95);
    auto fx = random_features(10, 3, rng);
    auto labels = test::random_matrix(10, 2, rng);
    TrainConfig cfg;
    cfg.schedule = {Phase::Sub, Phase::Full};
    CHECK_THROWS_AS(train(fx, labels, nullptr, cfg), SolveError);
}

TEST_CASE("index against the wrong labels is rejected") {
    std::mt19937_64 rng(97);
    auto fx = random_features(10, 3, rng);
    auto labels = test::random_matrix(10, 2, rng);
    auto other = test::random_matrix(10, 2, rng);
    ReplicationCounts counts;
    counts.counts.assign(10, 1);
    auto [exp, index] = materialize(other, counts);
    TrainConfig cfg;
    cfg.schedule = {Phase::Sub};
    CHECK_THROWS_AS(train(fx, labels, &index, cfg), ConsistencyError);
}

TEST_CASE("a separable toy task is memorized to near-perfect metrics") {
    // labels are a deterministic function of the sign of one feature
    std::mt19937_64 rng(101);
    auto fx = random_features(50, 4, rng);
    std::vector<std::string> ids = fx.sample_ids;
    std::vector<std::uint8_t> entries;
    for (std::size_t i = 0; i < 50; ++i) {
        entries.push_back(fx.at(i, 0) > 0 ? 1 : 0);
        entries.push_back(fx.at(i, 1) > 0 ? 1 : 0);
    }
    LabelMatrix labels(ids, {"a", "b"}, entries);
    TrainConfig cfg;
    cfg.epochs = 300;
    cfg.learning_rate = 0.5;
    cfg.batch_size = 50;
    cfg.seed = 2;
    auto model = train(fx, labels, nullptr, cfg);
    auto rep = evaluate(model, fx, labels);
    CHECK(rep.mean_accuracy > 0.95);
    CHECK(rep.example_f1 > 0.95);
}

TEST_CASE("all-zero model predicts 0.5 everywhere, thresholded positive") {
    std::mt19937_64 rng(103);
    auto fx = random_features(30, 4, rng);
    // every row needs at least one positive for the recall identity to hold
    auto base = test::random_matrix(30, 3, rng, 0.3);
    std::vector<std::uint8_t> entries(base.entries());
    for (std::size_t i = 0; i < 30; ++i) {
        bool any = false;
        for (std::size_t j = 0; j < 3; ++j) any = any || entries[i * 3 + j];
        if (!any) entries[i * 3] = 1;
    }
    LabelMatrix labels(base.sample_ids(), base.attribute_names(), entries);
    LinearModel zero;
    zero.dim = 4;
    zero.n_labels = 3;
    zero.weights.assign(12, 0.0);
    zero.bias.assign(3, 0.0);
    auto preds = predict(zero, fx);
    for (double s : preds.scores) CHECK(s == Catch::Approx(0.5));
    auto rep = evaluate(zero, fx, labels);
    CHECK(rep.example_recall == Catch::Approx(1.0));
    // precision per example = fraction of true labels among all n predicted
    double mean_pos = 0;
    for (std::size_t i = 0; i < 30; ++i) {
        double cnt = 0;
        for (std::size_t j = 0; j < 3; ++j) cnt += labels.at(i, j);
        mean_pos += cnt / 3.0;
    }
    mean_pos /= 30.0;
    CHECK(rep.example_precision == Catch::Approx(mean_pos).epsilon(1e-12));
}

TEST_CASE("evaluate matches direct metrics-module calls") {
    std::mt19937_64 rng(107);
    auto fx = random_features(25, 5, rng);
    auto labels = test::random_matrix(25, 4, rng);
    TrainConfig cfg;
    cfg.epochs = 3;
    cfg.seed = 4;
    auto model = train(fx, labels, nullptr, cfg);
    auto rep = evaluate(model, fx, labels);
    auto direct = full_report(predict(model, fx), labels);
    CHECK(rep.mean_accuracy == direct.mean_accuracy);
    CHECK(rep.example_f1 == direct.example_f1);
    CHECK(rep.per_label_mA == direct.per_label_mA);
}

TEST_CASE("model CSV round trips") {
    auto model = init_model(3, 2, 55);
    auto dir = std::filesystem::temp_directory_path() / "dai_tests";
    std::filesystem::create_directories(dir);
    auto path = (dir / "model.csv").string();
    save_model_csv(model, path);
    auto back = load_model_csv(path);
    CHECK(back.dim == 3);
    CHECK(back.n_labels == 2);
    CHECK(back.weights == model.weights);
    CHECK(back.bias == model.bias);
}
