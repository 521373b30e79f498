#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "actrec/dataset.hpp"
#include "actrec/metrics.hpp"
#include "actrec/network.hpp"
#include "actrec/optim.hpp"
#include "actrec/preprocess.hpp"
#include "actrec/report.hpp"

namespace actrec {

// Everything a run needs, file-format and flag names included. Network
// sizing fields default to the full-size stack; tests and demos shrink them.
struct TrainConfig {
    std::size_t epochs = 50;
    std::size_t batch_size = 16;
    double learning_rate = 1e-3;
    double keep_prob = 0.5;
    std::size_t stride = 5;
    double sigma = 0.0;  // 0 disables augmentation noise (copies only)
    std::uint64_t seed = 0;
    std::string normalization = "repetition";
    bool standardize = true;
    double train_fraction = 0.8;
    bool stratified = true;
    std::size_t frames = kDefaultFrameCount;
    std::size_t conv1_kernels = 256;
    std::size_t conv2_kernels = 64;
    std::size_t fc1 = 1024;
    std::size_t fc2 = 256;
    std::string corpus;
    std::string out_dir;

    void validate() const;  // ConfigError on any out-of-range field
    NetConfig net_config(std::size_t class_count) const;
};

// key=value lines, one per field, loadable back through the CLI's --config.
std::string config_text(const TrainConfig& config);

struct EvalReport {
    TrainConfig config;
    std::vector<std::string> classes;
    std::vector<double> train_loss;  // one entry per epoch
    double train_accuracy = 0.0;
    double accuracy = 0.0;  // test partition
    double fm = 0.0;  // test partition
    ConfusionMatrix confusion;
    std::size_t test_count = 0;
    double duration_seconds = 0.0;
};

std::string report_json(const EvalReport& report);
EvalReport parse_report_json(const std::string& text);

// Everything needed to resume or evaluate: class list, preprocessing
// parameters, network weights, optimizer state. Identical configs produce
// byte-identical checkpoint files (paths and wall time stay out).
struct Checkpoint {
    std::uint64_t seed = 0;
    std::vector<std::string> classes;
    std::string normalization;
    bool standardize = true;
    Standardizer standardizer;
    Network network;
    Adam adam;
};

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& cp);
Checkpoint load_checkpoint(const std::filesystem::path& path);

// Full training run: load -> normalize -> assemble -> split -> standardize ->
// augment(train) -> mini-batch epochs -> test evaluation. Writes report.json,
// checkpoint.bin, resolved-config.txt, confusion.csv, confusion.svg into
// config.out_dir when it is non-empty.
EvalReport train(const TrainConfig& config);

struct SweepResult {
    std::vector<EvalReport> reports;  // successful points only
    std::vector<SweepPoint> points;  // every grid point, failures included
};

// axis is "stride" (2..7) or "sigma" (0.1..0.5). Every point trains with the
// base config's seed; a point whose configuration is infeasible is recorded
// in the summary and skipped. Writes summary.csv and <axis>-chart.svg under
// out_root plus one run directory per point.
SweepResult sweep(const TrainConfig& base, const std::string& axis,
                  const std::filesystem::path& out_root);

// Runs a saved model over a whole corpus (no splitting) and reports metrics.
EvalReport evaluate(const std::filesystem::path& checkpoint_path,
                    const std::string& corpus_path, const std::string& out_dir);

// Separable multi-class corpus: per-(class, joint, attribute) Gaussian mean
// plus small within-class jitter, variable sequence lengths. Drives demos
// and the learning-sanity checks without external data.
struct SyntheticSpec {
    std::size_t classes = 3;
    std::size_t per_class = 20;
    std::size_t min_frames = 40;
    std::size_t max_frames = 70;
    double separation = 1.0;
    double jitter = 0.05;
    std::uint64_t seed = 0;
};

Corpus make_synthetic_corpus(const SyntheticSpec& spec);

// Subcommands: ingest, train, evaluate, sweep, report. Returns the process
// exit status: 0 success, 1 runtime failure, 2 usage error.
int cli(int argc, const char* const* argv);

}  // namespace actrec
