// dai — multi-label dataset balancing tool.
//
// Subcommands: synth, balance, sample, eval, report, demo.
// Exit codes: 0 ok, 2 input/parse error, 3 solver/degenerate error,
// 4 id/checksum consistency error.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dai/common.hpp"
#include "dai/experiment.hpp"
#include "dai/label_matrix.hpp"
#include "dai/metrics.hpp"
#include "dai/optimizer.hpp"
#include "dai/report_io.hpp"
#include "dai/resampler.hpp"

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

constexpr const char* kToolVersion = "0.1.0";

struct CliOptions {
    double p_ideal = 0.6;
    double lambda = 1e-5;
    double lr = 0.05;
    std::size_t iters = 2000;
    double scale = 10.0;
    std::optional<double> target_fraction;
    double threshold = 0.5;
    std::uint64_t seed = 0;
    std::string config_path;
    std::string out_dir = ".";
};

// key = value lines, '#' comments; keys are the long flag names without the
// leading dashes. Flags given on the command line take precedence.
void apply_config_file(CliOptions& opt, const CLI::App& cmd) {
    if (opt.config_path.empty()) return;
    std::ifstream in(opt.config_path);
    if (!in) throw dai::ParseError("cannot open config file " + opt.config_path);
    auto overridden = [&](const std::string& flag) {
        auto* o = cmd.get_option_no_throw("--" + flag);
        return o != nullptr && o->count() > 0;
    };
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto eq = line.find('=');
        if (eq == std::string::npos) {
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            throw dai::ParseError(opt.config_path + ":" + std::to_string(lineno) +
                                  ": expected key = value");
        }
        auto trim = [](std::string s) {
            auto b = s.find_first_not_of(" \t\r");
            auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (overridden(key)) continue;
        try {
            if (key == "p-ideal") opt.p_ideal = std::stod(value);
            else if (key == "lambda") opt.lambda = std::stod(value);
            else if (key == "lr") opt.lr = std::stod(value);
            else if (key == "iters") opt.iters = std::stoul(value);
            else if (key == "scale") opt.scale = std::stod(value);
            else if (key == "target-fraction") opt.target_fraction = std::stod(value);
            else if (key == "threshold") opt.threshold = std::stod(value);
            else if (key == "seed") opt.seed = std::stoull(value);
            else throw dai::ParseError(opt.config_path + ":" + std::to_string(lineno) +
                                       ": unknown key '" + key + "'");
        } catch (const std::invalid_argument&) {
            throw dai::ParseError(opt.config_path + ":" + std::to_string(lineno) +
                                  ": bad value for '" + key + "'");
        }
    }
}

std::string sha256_file(const std::string& path) {
    return dai::Sha256::hex(dai::read_text_file(path));
}

ordered_json config_json(const CliOptions& opt) {
    ordered_json j;
    j["p_ideal"] = opt.p_ideal;
    j["lambda"] = opt.lambda;
    j["lr"] = opt.lr;
    j["iters"] = opt.iters;
    j["scale"] = opt.scale;
    if (opt.target_fraction) j["target_fraction"] = *opt.target_fraction;
    j["threshold"] = opt.threshold;
    j["seed"] = opt.seed;
    return j;
}

void write_manifest(const std::string& out_dir, const std::string& command,
                    const CliOptions& opt, const std::vector<std::string>& inputs,
                    const std::vector<std::string>& outputs) {
    ordered_json j;
    j["tool"] = "dai";
    j["version"] = kToolVersion;
    j["command"] = command;
    j["config"] = config_json(opt);
    ordered_json in = ordered_json::object();
    for (const auto& p : inputs) in[fs::path(p).filename().string()] = sha256_file(p);
    j["input_sha256"] = in;
    j["outputs"] = outputs;
    dai::write_text_file(out_dir + "/manifest.json", j.dump(2) + "\n");
}

void write_weights_csv(const dai::LabelMatrix& matrix, const dai::WeightVector& weights,
                       const dai::ReplicationCounts& counts, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw dai::ParseError("cannot write " + path);
    out << "sample_id,weight,count\n";
    char buf[40];
    for (std::size_t i = 0; i < matrix.rows(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g", weights.values[i]);
        out << matrix.sample_ids()[i] << "," << buf << "," << counts.counts[i] << "\n";
    }
}

dai::ReplicationCounts load_weights_csv(const std::string& path, const dai::LabelMatrix& labels) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw dai::ParseError("cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || dai::detail::strip_cr(line) != "sample_id,weight,count")
        throw dai::ParseError(path + ": expected header sample_id,weight,count");
    dai::ReplicationCounts counts;
    counts.counts.assign(labels.rows(), 0);
    std::size_t next = 0;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        line = dai::detail::strip_cr(line);
        if (line.empty()) continue;
        auto fields = dai::detail::split_csv_line(line);
        if (fields.size() != 3)
            throw dai::ParseError(path + ": row " + std::to_string(row) + " has wrong field count");
        if (next >= labels.rows() || fields[0] != labels.sample_ids()[next])
            throw dai::ConsistencyError(path + ": row " + std::to_string(row) + ": sample id '" +
                                        fields[0] + "' does not match the label file");
        counts.counts[next] = std::stoll(fields[2]);
        if (counts.counts[next] < 0)
            throw dai::ParseError(path + ": row " + std::to_string(row) + ": negative count");
        ++next;
    }
    if (next != labels.rows())
        throw dai::ConsistencyError(path + ": row count does not match the label file");
    return counts;
}

void print_ratio_summary(const dai::LabelMatrix& labels, const dai::ReplicationCounts& counts,
                         double p_ideal) {
    auto before = dai::positive_ratio(labels);
    std::vector<double> cw(counts.counts.begin(), counts.counts.end());
    auto after = dai::weighted_positive_ratio(labels, cw);
    std::cout << "attribute ratios (before -> after, target " << p_ideal << "):\n";
    for (std::size_t j = 0; j < labels.cols(); ++j)
        std::cout << "  " << labels.attribute_names()[j] << ": "
                  << dai::detail::fmt6(before[j]) << " -> " << dai::detail::fmt6(after[j]) << "\n";
    std::cout << "sub-balance size: " << counts.total() << " / " << labels.rows()
              << " (fraction " << dai::detail::fmt6(static_cast<double>(counts.total()) / labels.rows())
              << ")\n";
}

int run(int argc, char** argv) {
    CLI::App app{"DAI multi-label dataset balancing toolkit"};
    app.require_subcommand(1);
    CliOptions opt;

    // synth
    auto* synth = app.add_subcommand("synth", "Generate a synthetic imbalanced label CSV");
    std::size_t synth_m = 2000, synth_n = 20;
    double ratio_lo = 0.03, ratio_hi = 0.9;
    std::string synth_out = "labels.csv";
    synth->add_option("--m", synth_m, "number of samples");
    synth->add_option("--n", synth_n, "number of attributes");
    synth->add_option("--ratio-min", ratio_lo, "smallest target positive ratio");
    synth->add_option("--ratio-max", ratio_hi, "largest target positive ratio");
    synth->add_option("--seed", opt.seed, "random seed");
    synth->add_option("--out", synth_out, "output label CSV path");

    // balance
    auto* balance = app.add_subcommand("balance", "Solve the reweighting problem");
    std::string balance_labels;
    balance->add_option("labels", balance_labels, "label CSV")->required();
    balance->add_option("--p-ideal", opt.p_ideal, "per-label target positive ratio");
    balance->add_option("--lambda", opt.lambda, "regularization weight");
    balance->add_option("--lr", opt.lr, "learning rate");
    balance->add_option("--iters", opt.iters, "iteration budget");
    balance->add_option("--scale", opt.scale, "integerization scale constant");
    double tf_val = 0.0;
    auto* tf_opt = balance->add_option("--target-fraction", tf_val,
                                       "pick the scale so the subset is this fraction of the input");
    balance->add_option("--seed", opt.seed, "random seed");
    balance->add_option("--config", opt.config_path, "key = value config file");
    balance->add_option("--out", opt.out_dir, "output directory");

    // sample
    auto* sample = app.add_subcommand("sample", "Materialize the sub-balance dataset");
    std::string sample_labels, sample_weights;
    sample->add_option("labels", sample_labels, "label CSV")->required();
    sample->add_option("weights", sample_weights, "weights CSV from 'balance'")->required();
    sample->add_option("--out", opt.out_dir, "output directory");

    // eval
    auto* eval = app.add_subcommand("eval", "Evaluate predictions with the five metrics");
    std::string eval_labels, eval_preds;
    eval->add_option("labels", eval_labels, "label CSV")->required();
    eval->add_option("predictions", eval_preds, "prediction CSV (scores in [0,1])")->required();
    eval->add_option("--threshold", opt.threshold, "binarization threshold");
    eval->add_option("--out", opt.out_dir, "output directory");

    // report
    auto* report = app.add_subcommand("report", "Balance diagnostics for two label files");
    std::string report_before, report_after;
    report->add_option("before", report_before, "label CSV before re-sampling")->required();
    report->add_option("after", report_after, "label CSV after re-sampling")->required();
    report->add_option("--p-ideal", opt.p_ideal, "target positive ratio");
    report->add_option("--out", opt.out_dir, "output directory");

    // demo
    auto* demo = app.add_subcommand("demo", "End-to-end ablation on the synthetic benchmark");
    demo->add_option("--seed", opt.seed, "random seed");
    demo->add_option("--out", opt.out_dir, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : dai::kExitParse;
    }

    fs::create_directories(opt.out_dir);

    if (*synth) {
        auto matrix = dai::synth_generate(synth_m, synth_n,
                                          dai::spread_ratios(synth_n, ratio_lo, ratio_hi), opt.seed);
        dai::save_label_csv(matrix, synth_out);
        std::cout << "wrote " << synth_out << " (" << synth_m << "x" << synth_n << ")\n";
        return dai::kExitOk;
    }

    if (*balance) {
        apply_config_file(opt, *balance);
        if (tf_opt->count() > 0) opt.target_fraction = tf_val;
        auto labels = dai::load_label_csv(balance_labels);
        dai::BalanceConfig cfg = dai::default_balance_config(labels.cols(), opt.p_ideal);
        cfg.lambda = opt.lambda;
        cfg.learning_rate = opt.lr;
        cfg.iterations = opt.iters;
        cfg.scale_constant = opt.scale;
        cfg.seed = opt.seed;
        dai::WeightVector r = dai::optimize(labels, cfg);
        dai::ReplicationCounts counts;
        if (opt.target_fraction) {
            auto res = dai::find_scale_for_fraction(r, *opt.target_fraction, labels.rows());
            counts = res.counts;
            opt.scale = res.scale;
            std::cout << "picked scale " << res.scale << " achieving fraction "
                      << dai::detail::fmt6(res.achieved_fraction) << "\n";
        } else {
            counts = dai::integerize(r, opt.scale);
        }
        std::string weights_path = opt.out_dir + "/weights.csv";
        write_weights_csv(labels, r, counts, weights_path);
        print_ratio_summary(labels, counts, opt.p_ideal);
        write_manifest(opt.out_dir, "balance", opt, {balance_labels}, {"weights.csv"});
        return dai::kExitOk;
    }

    if (*sample) {
        auto labels = dai::load_label_csv(sample_labels);
        auto counts = load_weights_csv(sample_weights, labels);
        auto [expanded, index] = dai::materialize(labels, counts);
        dai::save_label_csv(expanded, opt.out_dir + "/sub_balance.csv");
        dai::save_index_csv(index, opt.out_dir + "/index.csv");
        std::cout << "wrote " << expanded.rows() << " rows to " << opt.out_dir
                  << "/sub_balance.csv\n";
        write_manifest(opt.out_dir, "sample", opt, {sample_labels, sample_weights},
                       {"sub_balance.csv", "index.csv"});
        return dai::kExitOk;
    }

    if (*eval) {
        auto labels = dai::load_label_csv(eval_labels);
        auto preds = dai::load_prediction_csv(eval_preds, labels, opt.threshold);
        auto rep = dai::full_report(preds, labels);
        dai::write_text_file(opt.out_dir + "/metrics.json",
                             dai::metrics_report_json(rep, labels.attribute_names()));
        dai::write_text_file(opt.out_dir + "/metric_vs_ratio.csv",
                             dai::metric_vs_ratio_csv(dai::metric_vs_ratio_table(preds, labels)));
        std::cout << "mA=" << dai::detail::fmt6(rep.mean_accuracy)
                  << " Accu=" << dai::detail::fmt6(rep.example_accuracy)
                  << " Prec=" << dai::detail::fmt6(rep.example_precision)
                  << " Recall=" << dai::detail::fmt6(rep.example_recall)
                  << " F1=" << dai::detail::fmt6(rep.example_f1) << "\n";
        write_manifest(opt.out_dir, "eval", opt, {eval_labels, eval_preds},
                       {"metrics.json", "metric_vs_ratio.csv"});
        return dai::kExitOk;
    }

    if (*report) {
        auto before = dai::load_label_csv(report_before);
        auto after = dai::load_label_csv(report_after);
        auto rep = dai::balance_report(before, after, opt.p_ideal);
        dai::write_text_file(opt.out_dir + "/balance.json", dai::balance_report_json(rep));
        dai::write_text_file(opt.out_dir + "/balance.csv", dai::balance_report_csv(rep));
        std::cout << "std " << dai::detail::fmt6(rep.before_std) << " -> "
                  << dai::detail::fmt6(rep.after_std) << ", labels below target "
                  << rep.before_below_ideal << " -> " << rep.after_below_ideal << "\n";
        write_manifest(opt.out_dir, "report", opt, {report_before, report_after},
                       {"balance.json", "balance.csv"});
        return dai::kExitOk;
    }

    if (*demo) {
        auto result = dai::run_ablation(opt.seed);
        dai::write_text_file(opt.out_dir + "/summary.json", dai::ablation_summary_json(result));
        dai::write_text_file(opt.out_dir + "/balance.json",
                             dai::balance_report_json(result.balance));
        dai::write_text_file(opt.out_dir + "/balance.csv", dai::balance_report_csv(result.balance));
        dai::write_text_file(opt.out_dir + "/per_label_ma.csv", dai::per_label_ma_csv(result));
        write_manifest(opt.out_dir, "demo", opt, {},
                       {"summary.json", "balance.json", "balance.csv", "per_label_ma.csv"});
        for (const auto& row : result.rows)
            std::cout << row.method << ": mA=" << dai::detail::fmt6(row.report.mean_accuracy)
                      << " F1=" << dai::detail::fmt6(row.report.example_f1) << "\n";
        return dai::kExitOk;
    }

    return dai::kExitParse;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const dai::ConsistencyError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return dai::kExitConsistency;
    } catch (const dai::SolveError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return dai::kExitSolve;
    } catch (const dai::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return dai::kExitParse;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return dai::kExitParse;
    }
}
