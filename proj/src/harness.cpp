#include "actrec/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>
#include <json.hpp>

#include "actrec/common.hpp"

namespace actrec {

namespace {

using nlohmann::json;

// Independent RNG streams derived from the run seed, one per consumer, so
// changing one stage's draw count never perturbs another stage.
constexpr std::uint64_t kStreamSplit = 1;
constexpr std::uint64_t kStreamAugment = 2;
constexpr std::uint64_t kStreamInit = 3;
constexpr std::uint64_t kStreamShuffle = 4;
constexpr std::uint64_t kStreamDropout = 5;
constexpr std::uint64_t kStreamSynthMeans = 6;
constexpr std::uint64_t kStreamSynthSamples = 7;

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
    if (!out) throw IoError("write failed for " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

struct FeatureSet {
    std::vector<FeatureTensor> samples;
    std::vector<std::string> classes;
};

FeatureSet load_features(const TrainConfig& config) {
    if (config.corpus.empty()) throw ConfigError("no corpus path given");
    FeatureSet out;
    if (is_feature_cache(config.corpus)) {
        FeatureCache cache = load_cache(config.corpus);
        if (cache.frames != config.frames) {
            throw ConfigError("feature cache was built for " + std::to_string(cache.frames) +
                              " frames, run wants " + std::to_string(config.frames));
        }
        if (cache.normalization != config.normalization) {
            throw ConfigError("feature cache was built with normalization '" +
                              cache.normalization + "', run wants '" + config.normalization +
                              "'");
        }
        out.samples = std::move(cache.samples);
        out.classes = std::move(cache.classes);
        return out;
    }
    const Corpus corpus = load_corpus(config.corpus, LabelMap::standard());
    const NormalizationMethod method = NormalizationMethod::parse(config.normalization);
    out.classes = corpus.classes;
    for (const SkeletonSequence& seq : corpus.sequences) {
        out.samples.push_back(
            assemble(normalize_frames(seq, config.frames, method), corpus.classes, config.frames));
    }
    return out;
}

Tensor pack_batch(const std::vector<FeatureTensor>& samples,
                  const std::vector<std::size_t>& idx, std::size_t frames) {
    const std::size_t sample_size = kJointCount * frames * kAttrCount;
    Tensor out = Tensor::zeros({idx.size(), kJointCount, frames, kAttrCount});
    for (std::size_t i = 0; i < idx.size(); ++i) {
        std::memcpy(out.data() + i * sample_size, samples[idx[i]].data.data(),
                    sample_size * sizeof(double));
    }
    return out;
}

Tensor logits_row(const Tensor& logits, std::size_t row) {
    const std::size_t c = logits.shape()[1];
    Tensor out = Tensor::zeros({c});
    std::memcpy(out.data(), logits.data() + row * c, c * sizeof(double));
    return out;
}

void fisher_yates(std::vector<std::size_t>& order, Rng& rng) {
    for (std::size_t i = order.size(); i > 1; --i) {
        std::swap(order[i - 1], order[rng.next_u64() % i]);
    }
}

EvaluationSet predict_all(Network& net, const std::vector<FeatureTensor>& samples,
                          std::size_t batch_size, std::size_t frames) {
    EvaluationSet eval;
    const std::size_t c = net.config().classes;
    for (std::size_t start = 0; start < samples.size(); start += batch_size) {
        std::vector<std::size_t> idx;
        for (std::size_t i = start; i < std::min(start + batch_size, samples.size()); ++i) {
            idx.push_back(i);
        }
        const Tensor logits = net.forward(pack_batch(samples, idx, frames));
        for (std::size_t r = 0; r < idx.size(); ++r) {
            std::size_t best = 0;
            for (std::size_t k = 1; k < c; ++k) {
                if (logits.data()[r * c + k] > logits.data()[r * c + best]) best = k;
            }
            eval.predictions.push_back(best);
            eval.labels.push_back(samples[idx[r]].label_index);
        }
    }
    return eval;
}

Standardizer identity_standardizer() {
    Standardizer s;
    s.mean = Tensor::zeros({kJointCount, kAttrCount});
    s.stddev = Tensor::full({kJointCount, kAttrCount}, 1.0);
    return s;
}

struct RunArtifacts {
    EvalReport report;
    Checkpoint checkpoint;
};

RunArtifacts run_training(const TrainConfig& config, FeatureSet features) {
    config.validate();
    if (features.classes.size() < 2) {
        throw CorpusError("training needs at least 2 classes, corpus has " +
                          std::to_string(features.classes.size()));
    }
    const NetConfig nc = config.net_config(features.classes.size());
    shape_chain(nc);  // infeasible stride fails here, before any work
    const auto t0 = std::chrono::steady_clock::now();

    Rng root(config.seed);
    Split parts = split(std::move(features.samples),
                        SplitSpec{config.train_fraction, root.split(kStreamSplit).seed(),
                                  config.stratified});
    if (parts.train.empty()) throw CorpusError("training partition is empty");
    Standardizer standardizer = identity_standardizer();
    if (config.standardize) {
        standardizer = fit_standardizer(parts.train);
        for (FeatureTensor& t : parts.train) t = apply_standardizer(standardizer, t);
        for (FeatureTensor& t : parts.test) t = apply_standardizer(standardizer, t);
    }
    parts.train = augment(std::move(parts.train), config.sigma, root.split(kStreamAugment));

    Network net(nc, root.split(kStreamInit));
    Adam adam(AdamConfig{config.learning_rate, 0.9, 0.999, 1e-8});
    Rng dropout_rng = root.split(kStreamDropout);
    const Rng shuffle_root = root.split(kStreamShuffle);

    EvalReport report;
    report.config = config;
    report.classes = features.classes;
    const std::size_t n_train = parts.train.size();
    const std::size_t n_classes = features.classes.size();
    std::vector<std::size_t> order(n_train);
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        Rng shuffle_rng = shuffle_root.split(epoch);
        fisher_yates(order, shuffle_rng);
        net.set_mode(Mode::Train);
        double loss_sum = 0.0;
        for (std::size_t start = 0; start < n_train; start += config.batch_size) {
            const std::vector<std::size_t> idx(
                order.begin() + static_cast<std::ptrdiff_t>(start),
                order.begin() +
                    static_cast<std::ptrdiff_t>(std::min(start + config.batch_size, n_train)));
            const Tensor logits = net.forward(pack_batch(parts.train, idx, config.frames),
                                              &dropout_rng);
            Tensor grad = Tensor::zeros({idx.size(), n_classes});
            double batch_loss = 0.0;
            for (std::size_t r = 0; r < idx.size(); ++r) {
                auto [loss, g] =
                    softmax_cross_entropy(logits_row(logits, r), parts.train[idx[r]].label_index);
                batch_loss += loss;
                for (std::size_t k = 0; k < n_classes; ++k) {
                    // Mean-loss scaling baked into the upstream gradient.
                    grad(r, k) = g(k) / static_cast<double>(idx.size());
                }
            }
            loss_sum += batch_loss;
            if (!std::isfinite(batch_loss)) {
                throw OptimError("loss became non-finite at epoch " + std::to_string(epoch + 1) +
                                 ", batch starting at sample " + std::to_string(start));
            }
            net.zero_grads();
            net.backward(grad);
            adam.step(net.params(), net.grads());
        }
        report.train_loss.push_back(loss_sum / static_cast<double>(n_train));
    }

    net.set_mode(Mode::Infer);
    report.train_accuracy = accuracy(predict_all(net, parts.train, config.batch_size,
                                                 config.frames));
    report.test_count = parts.test.size();
    if (parts.test.empty()) {
        warn("test partition is empty; test metrics reported as zero");
        report.confusion = ConfusionMatrix{Tensor::zeros({n_classes, n_classes}), 0};
    } else {
        const EvaluationSet eval = predict_all(net, parts.test, config.batch_size, config.frames);
        report.accuracy = accuracy(eval);
        if (parts.test.size() >= 2) {
            report.fm = fowlkes_mallows(eval);
        } else {
            warn("test partition has a single sample; Fowlkes-Mallows reported as zero");
        }
        report.confusion = confusion(eval, n_classes);
    }
    report.duration_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    Checkpoint checkpoint{config.seed,           report.classes,
                          config.normalization,  config.standardize,
                          std::move(standardizer), std::move(net),
                          std::move(adam)};
    return RunArtifacts{std::move(report), std::move(checkpoint)};
}

void write_run_outputs(const std::string& out_dir, const RunArtifacts& run) {
    if (out_dir.empty()) return;
    const std::filesystem::path dir(out_dir);
    std::filesystem::create_directories(dir);
    write_text_file(dir / "report.json", report_json(run.report));
    write_text_file(dir / "resolved-config.txt", config_text(run.report.config));
    write_text_file(dir / "confusion.csv", confusion_csv(run.report.confusion,
                                                         run.report.classes));
    write_text_file(dir / "confusion.svg",
                    confusion_heatmap_svg(run.report.confusion, run.report.classes,
                                          "Confusion matrix (test partition)"));
    save_checkpoint(dir / "checkpoint.bin", run.checkpoint);
}

}  // namespace

void TrainConfig::validate() const {
    if (epochs < 1) throw ConfigError("epochs must be at least 1");
    if (batch_size < 1) throw ConfigError("batch size must be at least 1");
    if (learning_rate <= 0.0) throw ConfigError("learning rate must be positive");
    if (keep_prob <= 0.0 || keep_prob > 1.0) throw ConfigError("keep-prob must lie in (0, 1]");
    if (stride < 1 || stride > 7) throw ConfigError("stride must lie in [1, 7]");
    if (sigma < 0.0) throw ConfigError("sigma must be non-negative");
    if (train_fraction <= 0.0 || train_fraction >= 1.0) {
        throw ConfigError("train-fraction must lie strictly between 0 and 1");
    }
    if (frames < 10) throw ConfigError("frames must be at least 10 (conv1 kernel width)");
    if (conv1_kernels < 1 || conv2_kernels < 1 || fc1 < 1 || fc2 < 1) {
        throw ConfigError("layer widths must all be positive");
    }
}

NetConfig TrainConfig::net_config(std::size_t class_count) const {
    NetConfig nc;
    nc.frames = frames;
    nc.stride = stride;
    nc.classes = class_count;
    nc.conv1_kernels = conv1_kernels;
    nc.conv2_kernels = conv2_kernels;
    nc.fc1 = fc1;
    nc.fc2 = fc2;
    nc.keep_prob = keep_prob;
    return nc;
}

std::string config_text(const TrainConfig& c) {
    std::string out;
    out += "epochs=" + std::to_string(c.epochs) + "\n";
    out += "batch-size=" + std::to_string(c.batch_size) + "\n";
    out += "learning-rate=" + format_double(c.learning_rate) + "\n";
    out += "keep-prob=" + format_double(c.keep_prob) + "\n";
    out += "stride=" + std::to_string(c.stride) + "\n";
    out += "sigma=" + format_double(c.sigma) + "\n";
    out += "seed=" + std::to_string(c.seed) + "\n";
    out += "normalization=" + c.normalization + "\n";
    out += std::string("standardize=") + (c.standardize ? "true" : "false") + "\n";
    out += "train-fraction=" + format_double(c.train_fraction) + "\n";
    out += std::string("stratified=") + (c.stratified ? "true" : "false") + "\n";
    out += "frames=" + std::to_string(c.frames) + "\n";
    out += "conv1-kernels=" + std::to_string(c.conv1_kernels) + "\n";
    out += "conv2-kernels=" + std::to_string(c.conv2_kernels) + "\n";
    out += "fc1=" + std::to_string(c.fc1) + "\n";
    out += "fc2=" + std::to_string(c.fc2) + "\n";
    out += "corpus=" + c.corpus + "\n";
    out += "out-dir=" + c.out_dir + "\n";
    return out;
}

std::string report_json(const EvalReport& r) {
    json j;
    j["config"]["epochs"] = r.config.epochs;
    j["config"]["batch_size"] = r.config.batch_size;
    j["config"]["learning_rate"] = r.config.learning_rate;
    j["config"]["keep_prob"] = r.config.keep_prob;
    j["config"]["stride"] = r.config.stride;
    j["config"]["sigma"] = r.config.sigma;
    j["config"]["seed"] = r.config.seed;
    j["config"]["normalization"] = r.config.normalization;
    j["config"]["standardize"] = r.config.standardize;
    j["config"]["train_fraction"] = r.config.train_fraction;
    j["config"]["stratified"] = r.config.stratified;
    j["config"]["frames"] = r.config.frames;
    j["config"]["conv1_kernels"] = r.config.conv1_kernels;
    j["config"]["conv2_kernels"] = r.config.conv2_kernels;
    j["config"]["fc1"] = r.config.fc1;
    j["config"]["fc2"] = r.config.fc2;
    j["config"]["corpus"] = r.config.corpus;
    j["config"]["out_dir"] = r.config.out_dir;
    j["classes"] = r.classes;
    j["train_loss"] = r.train_loss;
    j["train_accuracy"] = r.train_accuracy;
    j["accuracy"] = r.accuracy;
    j["fm"] = r.fm;
    json confusion = json::array();
    const std::size_t c = r.classes.size();
    for (std::size_t i = 0; i < c; ++i) {
        json row = json::array();
        for (std::size_t k = 0; k < c; ++k) {
            row.push_back(static_cast<std::uint64_t>(r.confusion.counts(i, k)));
        }
        confusion.push_back(row);
    }
    j["confusion"] = confusion;
    j["test_count"] = r.test_count;
    j["duration_seconds"] = r.duration_seconds;
    return j.dump(2) + "\n";
}

EvalReport parse_report_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
        EvalReport r;
        const json& c = j.at("config");
        r.config.epochs = c.at("epochs").get<std::size_t>();
        r.config.batch_size = c.at("batch_size").get<std::size_t>();
        r.config.learning_rate = c.at("learning_rate").get<double>();
        r.config.keep_prob = c.at("keep_prob").get<double>();
        r.config.stride = c.at("stride").get<std::size_t>();
        r.config.sigma = c.at("sigma").get<double>();
        r.config.seed = c.at("seed").get<std::uint64_t>();
        r.config.normalization = c.at("normalization").get<std::string>();
        r.config.standardize = c.at("standardize").get<bool>();
        r.config.train_fraction = c.at("train_fraction").get<double>();
        r.config.stratified = c.at("stratified").get<bool>();
        r.config.frames = c.at("frames").get<std::size_t>();
        r.config.conv1_kernels = c.at("conv1_kernels").get<std::size_t>();
        r.config.conv2_kernels = c.at("conv2_kernels").get<std::size_t>();
        r.config.fc1 = c.at("fc1").get<std::size_t>();
        r.config.fc2 = c.at("fc2").get<std::size_t>();
        r.config.corpus = c.at("corpus").get<std::string>();
        r.config.out_dir = c.at("out_dir").get<std::string>();
        r.classes = j.at("classes").get<std::vector<std::string>>();
        r.train_loss = j.at("train_loss").get<std::vector<double>>();
        r.train_accuracy = j.at("train_accuracy").get<double>();
        r.accuracy = j.at("accuracy").get<double>();
        r.fm = j.at("fm").get<double>();
        const std::size_t n = r.classes.size();
        r.confusion.counts = Tensor::zeros({n, n});
        const json& rows = j.at("confusion");
        if (rows.size() != n) throw ParseError("confusion row count does not match classes");
        std::size_t total = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (rows[i].size() != n) {
                throw ParseError("confusion column count does not match classes");
            }
            for (std::size_t k = 0; k < n; ++k) {
                const auto v = rows[i][k].get<std::uint64_t>();
                r.confusion.counts(i, k) = static_cast<double>(v);
                total += v;
            }
        }
        r.confusion.total = total;
        r.test_count = j.at("test_count").get<std::size_t>();
        r.duration_seconds = j.at("duration_seconds").get<double>();
        return r;
    } catch (const json::exception& e) {
        throw ParseError(std::string("bad report JSON: ") + e.what());
    }
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& cp) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out.write("ACR1", 4);
    write_u64(out, cp.seed);
    write_u32(out, static_cast<std::uint32_t>(cp.classes.size()));
    for (const std::string& name : cp.classes) {
        write_u32(out, static_cast<std::uint32_t>(name.size()));
        out.write(name.data(), static_cast<std::streamsize>(name.size()));
    }
    write_u32(out, static_cast<std::uint32_t>(cp.normalization.size()));
    out.write(cp.normalization.data(), static_cast<std::streamsize>(cp.normalization.size()));
    out.put(cp.standardize ? 1 : 0);
    write_tensor(out, cp.standardizer.mean);
    write_tensor(out, cp.standardizer.stddev);
    cp.network.save(out);
    cp.adam.save(out);
    if (!out) throw IoError("write failed for " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "ACR1", 4) != 0) {
        throw ParseError(path.string() + " is not a checkpoint file");
    }
    const std::uint64_t seed = read_u64(in);
    const std::uint32_t class_count = read_u32(in);
    std::vector<std::string> classes;
    for (std::uint32_t i = 0; i < class_count; ++i) {
        const std::uint32_t len = read_u32(in);
        std::string name(len, '\0');
        in.read(name.data(), len);
        if (!in) throw ParseError("truncated checkpoint: " + path.string());
        classes.push_back(std::move(name));
    }
    const std::uint32_t norm_len = read_u32(in);
    std::string normalization(norm_len, '\0');
    in.read(normalization.data(), norm_len);
    const int flag = in.get();
    if (!in || (flag != 0 && flag != 1)) {
        throw ParseError("truncated checkpoint: " + path.string());
    }
    Standardizer standardizer;
    standardizer.mean = read_tensor(in);
    standardizer.stddev = read_tensor(in);
    Network network = Network::load(in);
    Adam adam;
    adam.load(in);
    if (network.config().classes != classes.size()) {
        throw ParseError("checkpoint class list does not match the network manifest");
    }
    return Checkpoint{seed,
                      std::move(classes),
                      std::move(normalization),
                      flag == 1,
                      std::move(standardizer),
                      std::move(network),
                      std::move(adam)};
}

EvalReport train(const TrainConfig& config) {
    config.validate();
    RunArtifacts run = run_training(config, load_features(config));
    write_run_outputs(config.out_dir, run);
    return std::move(run.report);
}

SweepResult sweep(const TrainConfig& base, const std::string& axis,
                  const std::filesystem::path& out_root) {
    base.validate();
    std::vector<double> values;
    if (axis == "stride") {
        values = {2, 3, 4, 5, 6, 7};
    } else if (axis == "sigma") {
        values = {0.1, 0.2, 0.3, 0.4, 0.5};
    } else {
        throw ParamError("unknown sweep axis '" + axis + "' (expected stride or sigma)");
    }
    // Parse and assemble once; every grid point re-splits the same features
    // with the same seed, so the test partition membership is shared.
    const FeatureSet features = load_features(base);
    SweepResult result;
    for (const double value : values) {
        TrainConfig point = base;
        std::string label;
        if (axis == "stride") {
            point.stride = static_cast<std::size_t>(value);
            label = std::to_string(point.stride);
        } else {
            point.sigma = value;
            label = format_double(value);
        }
        point.out_dir = (out_root / (axis + "-" + label)).string();
        SweepPoint p;
        p.axis_value = value;
        try {
            RunArtifacts run = run_training(point, features);
            write_run_outputs(point.out_dir, run);
            p.ok = true;
            p.accuracy = run.report.accuracy;
            p.fm = run.report.fm;
            result.reports.push_back(std::move(run.report));
        } catch (const Error& e) {
            p.ok = false;
            p.note = e.what();
            warn(axis + "=" + label + " failed: " + e.what());
        }
        result.points.push_back(std::move(p));
    }
    std::filesystem::create_directories(out_root);
    write_text_file(out_root / "summary.csv", summary_csv(axis, result.points));
    write_text_file(out_root / (axis + "-chart.svg"),
                    line_chart_svg(axis, result.points,
                                   "Accuracy and Fowlkes-Mallows vs " + axis));
    return result;
}

EvalReport evaluate(const std::filesystem::path& checkpoint_path, const std::string& corpus_path,
                    const std::string& out_dir) {
    Checkpoint cp = load_checkpoint(checkpoint_path);
    const NetConfig nc = cp.network.config();
    std::vector<FeatureTensor> samples;
    if (is_feature_cache(corpus_path)) {
        FeatureCache cache = load_cache(corpus_path);
        if (cache.frames != nc.frames) {
            throw ConfigError("feature cache frame count " + std::to_string(cache.frames) +
                              " does not match the checkpoint's " + std::to_string(nc.frames));
        }
        for (FeatureTensor& t : cache.samples) {
            // Cache label indices are re-anchored to the checkpoint's list.
            t.label_index = class_index(cp.classes, cache.classes[t.label_index]);
            samples.push_back(std::move(t));
        }
    } else {
        const Corpus corpus = load_corpus(corpus_path, LabelMap::standard());
        const NormalizationMethod method = NormalizationMethod::parse(cp.normalization);
        for (const SkeletonSequence& seq : corpus.sequences) {
            samples.push_back(
                assemble(normalize_frames(seq, nc.frames, method), cp.classes, nc.frames));
        }
    }
    if (cp.standardize) {
        for (FeatureTensor& t : samples) t = apply_standardizer(cp.standardizer, t);
    }
    const auto t0 = std::chrono::steady_clock::now();
    cp.network.set_mode(Mode::Infer);
    const EvaluationSet eval = predict_all(cp.network, samples, 16, nc.frames);
    EvalReport report;
    report.config.stride = nc.stride;
    report.config.keep_prob = nc.keep_prob;
    report.config.seed = cp.seed;
    report.config.normalization = cp.normalization;
    report.config.standardize = cp.standardize;
    report.config.frames = nc.frames;
    report.config.conv1_kernels = nc.conv1_kernels;
    report.config.conv2_kernels = nc.conv2_kernels;
    report.config.fc1 = nc.fc1;
    report.config.fc2 = nc.fc2;
    report.config.corpus = corpus_path;
    report.config.out_dir = out_dir;
    report.classes = cp.classes;
    report.accuracy = accuracy(eval);
    if (samples.size() >= 2) {
        report.fm = fowlkes_mallows(eval);
    } else {
        warn("single-sample evaluation; Fowlkes-Mallows reported as zero");
    }
    report.confusion = confusion(eval, cp.classes.size());
    report.test_count = samples.size();
    report.duration_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!out_dir.empty()) {
        const std::filesystem::path dir(out_dir);
        std::filesystem::create_directories(dir);
        write_text_file(dir / "report.json", report_json(report));
        write_text_file(dir / "resolved-config.txt", config_text(report.config));
        write_text_file(dir / "confusion.csv", confusion_csv(report.confusion, report.classes));
        write_text_file(dir / "confusion.svg",
                        confusion_heatmap_svg(report.confusion, report.classes,
                                              "Confusion matrix (evaluation)"));
    }
    return report;
}

Corpus make_synthetic_corpus(const SyntheticSpec& spec) {
    if (spec.classes < 2) throw ParamError("synthetic corpus needs at least 2 classes");
    if (spec.per_class < 1) throw ParamError("synthetic corpus needs at least 1 sample per class");
    if (spec.min_frames < 1 || spec.min_frames > spec.max_frames) {
        throw ParamError("synthetic frame range is empty");
    }
    if (spec.jitter < 0.0 || spec.separation <= 0.0) {
        throw ParamError("synthetic corpus needs separation > 0 and jitter >= 0");
    }
    const Rng root(spec.seed);
    Rng mean_rng = root.split(kStreamSynthMeans);
    // One Gaussian mean per (class, joint, attribute); jitter stays well
    // under the separation so classes are linearly separable.
    std::vector<double> means(spec.classes * kJointCount * kAttrCount);
    for (double& m : means) m = spec.separation * mean_rng.next_normal(0.0, 1.0);
    Corpus corpus;
    Rng sample_root = root.split(kStreamSynthSamples);
    for (std::size_t c = 0; c < spec.classes; ++c) {
        char name[32];
        std::snprintf(name, sizeof(name), "class-%02zu", c);
        corpus.classes.push_back(name);
        for (std::size_t s = 0; s < spec.per_class; ++s) {
            Rng rng = sample_root.split(c * spec.per_class + s);
            SkeletonSequence seq;
            seq.label = name;
            char sid[48];
            std::snprintf(sid, sizeof(sid), "%s/seq-%03zu", name, s);
            seq.source_id = sid;
            const std::size_t frames =
                spec.min_frames + rng.next_u64() % (spec.max_frames - spec.min_frames + 1);
            for (std::size_t t = 0; t < frames; ++t) {
                Frame frame;
                for (std::size_t j = 0; j < kJointCount; ++j) {
                    const double* mu = &means[(c * kJointCount + j) * kAttrCount];
                    frame.joints[j].x = mu[0] + spec.jitter * rng.next_normal(0.0, 1.0);
                    frame.joints[j].y = mu[1] + spec.jitter * rng.next_normal(0.0, 1.0);
                    frame.joints[j].z = mu[2] + spec.jitter * rng.next_normal(0.0, 1.0);
                    frame.joints[j].confidence =
                        mu[3] + spec.jitter * rng.next_normal(0.0, 1.0);
                }
                seq.frames.push_back(frame);
            }
            corpus.sequences.push_back(std::move(seq));
        }
    }
    return corpus;
}

namespace {

std::size_t parse_config_size(const std::string& value, const std::string& where) {
    try {
        std::size_t used = 0;
        const unsigned long long v = std::stoull(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
        throw ConfigError(where + ": expected an unsigned integer, got '" + value + "'");
    }
}

double parse_config_double(const std::string& value, const std::string& where) {
    try {
        std::size_t used = 0;
        const double v = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError(where + ": expected a number, got '" + value + "'");
    }
}

bool parse_config_bool(const std::string& value, const std::string& where) {
    if (value == "true") return true;
    if (value == "false") return false;
    throw ConfigError(where + ": expected true or false, got '" + value + "'");
}

// Flat key=value file holding exactly the fields config_text writes, so a
// run's resolved-config.txt reloads as-is. Values given on the command line
// win; the file only fills options the user left unset.
void apply_config_file(const CLI::App* cmd, TrainConfig& config, const std::string& path) {
    std::istringstream in(read_text_file(path));
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        const std::size_t eq = line.find('=');
        const std::string where = path + ":" + std::to_string(line_no);
        if (eq == std::string::npos) throw ConfigError(where + ": expected key=value");
        const std::string key = line.substr(0, eq);
        const std::string value = line.substr(eq + 1);
        if (cmd->count("--" + key) > 0) continue;
        if (key == "epochs") {
            config.epochs = parse_config_size(value, where);
        } else if (key == "batch-size") {
            config.batch_size = parse_config_size(value, where);
        } else if (key == "learning-rate") {
            config.learning_rate = parse_config_double(value, where);
        } else if (key == "keep-prob") {
            config.keep_prob = parse_config_double(value, where);
        } else if (key == "stride") {
            config.stride = parse_config_size(value, where);
        } else if (key == "sigma") {
            config.sigma = parse_config_double(value, where);
        } else if (key == "seed") {
            config.seed = parse_config_size(value, where);
        } else if (key == "normalization") {
            config.normalization = value;
        } else if (key == "standardize") {
            config.standardize = parse_config_bool(value, where);
        } else if (key == "train-fraction") {
            config.train_fraction = parse_config_double(value, where);
        } else if (key == "stratified") {
            config.stratified = parse_config_bool(value, where);
        } else if (key == "frames") {
            config.frames = parse_config_size(value, where);
        } else if (key == "conv1-kernels") {
            config.conv1_kernels = parse_config_size(value, where);
        } else if (key == "conv2-kernels") {
            config.conv2_kernels = parse_config_size(value, where);
        } else if (key == "fc1") {
            config.fc1 = parse_config_size(value, where);
        } else if (key == "fc2") {
            config.fc2 = parse_config_size(value, where);
        } else if (key == "corpus") {
            config.corpus = value;
        } else if (key == "out-dir") {
            config.out_dir = value;
        } else {
            throw ConfigError(where + ": unknown config key '" + key + "'");
        }
    }
}

void add_train_options(CLI::App* cmd, TrainConfig& config, std::string& config_path) {
    cmd->add_option("--corpus", config.corpus, "corpus directory (native, canonical, or feature cache)");
    cmd->add_option("--out-dir", config.out_dir, "output directory for run artifacts");
    cmd->add_option("--epochs", config.epochs, "training epochs");
    cmd->add_option("--batch-size", config.batch_size, "mini-batch size");
    cmd->add_option("--learning-rate", config.learning_rate, "Adam learning rate");
    cmd->add_option("--keep-prob", config.keep_prob, "dropout keep probability");
    cmd->add_option("--stride", config.stride, "conv1 time-axis stride");
    cmd->add_option("--sigma", config.sigma, "augmentation noise standard deviation");
    cmd->add_option("--seed", config.seed, "run seed");
    cmd->add_option("--normalization", config.normalization,
                    "repetition | truncation | pad-terminal | pad-special:<v>");
    cmd->add_flag("--standardize,!--no-standardize", config.standardize,
                  "standardize features per joint and attribute");
    cmd->add_option("--train-fraction", config.train_fraction, "training share of the corpus");
    cmd->add_flag("--stratified,!--no-stratified", config.stratified,
                  "stratify the split per class");
    cmd->add_option("--frames", config.frames, "frame count after normalization");
    cmd->add_option("--conv1-kernels", config.conv1_kernels, "conv1 kernel count");
    cmd->add_option("--conv2-kernels", config.conv2_kernels, "conv2 kernel count");
    cmd->add_option("--fc1", config.fc1, "first fully connected width");
    cmd->add_option("--fc2", config.fc2, "second fully connected width");
    cmd->add_option("--config", config_path, "key=value config file; flags override it");
}

}  // namespace

int cli(int argc, const char* const* argv) {
    CLI::App app{"activity recognition from 3D joint sequences"};
    app.require_subcommand(1);

    TrainConfig train_config;
    std::string train_config_path;
    CLI::App* train_cmd = app.add_subcommand("train", "train a model and write its artifacts");
    add_train_options(train_cmd, train_config, train_config_path);

    TrainConfig sweep_config;
    std::string sweep_config_path;
    std::string sweep_axis;
    CLI::App* sweep_cmd = app.add_subcommand("sweep", "train across a stride or sigma grid");
    add_train_options(sweep_cmd, sweep_config, sweep_config_path);
    sweep_cmd->add_option("--axis", sweep_axis, "stride | sigma")->required();

    std::string eval_checkpoint, eval_corpus, eval_out;
    CLI::App* eval_cmd = app.add_subcommand("evaluate", "run a checkpoint over a corpus");
    eval_cmd->add_option("--checkpoint", eval_checkpoint, "checkpoint file")->required();
    eval_cmd->add_option("--corpus", eval_corpus, "corpus directory")->required();
    eval_cmd->add_option("--out-dir", eval_out, "output directory");

    std::string ingest_input, ingest_output, ingest_labelmap;
    std::string ingest_format = "canonical";
    std::size_t ingest_frames = kDefaultFrameCount;
    std::string ingest_normalization = "repetition";
    CLI::App* ingest_cmd =
        app.add_subcommand("ingest", "convert a corpus to canonical text or a feature cache");
    ingest_cmd->add_option("--input", ingest_input, "source corpus directory")->required();
    ingest_cmd->add_option("--output", ingest_output, "destination directory")->required();
    ingest_cmd->add_option("--format", ingest_format, "canonical | features");
    ingest_cmd->add_option("--frames", ingest_frames, "frame count (features format)");
    ingest_cmd->add_option("--normalization", ingest_normalization,
                           "normalization method (features format)");
    ingest_cmd->add_option("--labelmap", ingest_labelmap,
                           "label consolidation file (default: built-in merges)");

    std::string report_kind, report_axis = "stride", report_out = ".";
    std::vector<std::string> report_inputs;
    CLI::App* report_cmd = app.add_subcommand("report", "re-render charts from saved reports");
    report_cmd->add_option("--kind", report_kind, "confusion-heatmap | axis-line-chart")
        ->required();
    report_cmd->add_option("--axis", report_axis, "stride | sigma (axis-line-chart)");
    report_cmd->add_option("--out-dir", report_out, "output directory");
    report_cmd->add_option("reports", report_inputs, "report.json files")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (train_cmd->parsed()) {
            if (!train_config_path.empty()) {
                apply_config_file(train_cmd, train_config, train_config_path);
            }
            const EvalReport report = train(train_config);
            std::printf("accuracy %.4f fm %.4f over %zu test samples\n", report.accuracy,
                        report.fm, report.test_count);
            return 0;
        }
        if (sweep_cmd->parsed()) {
            if (!sweep_config_path.empty()) {
                apply_config_file(sweep_cmd, sweep_config, sweep_config_path);
            }
            if (sweep_config.out_dir.empty()) {
                throw ConfigError("sweep needs --out-dir for its per-point run directories");
            }
            const SweepResult result = sweep(sweep_config, sweep_axis, sweep_config.out_dir);
            for (const SweepPoint& p : result.points) {
                if (p.ok) {
                    std::printf("%s=%s accuracy %.4f fm %.4f\n", sweep_axis.c_str(),
                                format_double(p.axis_value).c_str(), p.accuracy, p.fm);
                } else {
                    std::printf("%s=%s failed: %s\n", sweep_axis.c_str(),
                                format_double(p.axis_value).c_str(), p.note.c_str());
                }
            }
            return 0;
        }
        if (eval_cmd->parsed()) {
            const EvalReport report = evaluate(eval_checkpoint, eval_corpus, eval_out);
            std::printf("accuracy %.4f fm %.4f over %zu samples\n", report.accuracy, report.fm,
                        report.test_count);
            return 0;
        }
        if (ingest_cmd->parsed()) {
            const LabelMap map = ingest_labelmap.empty() ? LabelMap::standard()
                                                         : LabelMap::load(ingest_labelmap);
            const Corpus corpus = load_corpus(ingest_input, map);
            const std::filesystem::path out_root(ingest_output);
            if (ingest_format == "canonical") {
                for (const SkeletonSequence& seq : corpus.sequences) {
                    const std::filesystem::path src(seq.source_id);
                    const std::filesystem::path dir = out_root / seq.label;
                    std::filesystem::create_directories(dir);
                    const auto path = dir / (src.stem().string() + ".txt");
                    std::ofstream out(path, std::ios::binary);
                    if (!out) throw IoError("cannot write " + path.string());
                    write_canonical(out, seq);
                }
                std::printf("wrote %zu canonical sequences to %s\n", corpus.sequences.size(),
                            ingest_output.c_str());
            } else if (ingest_format == "features") {
                const NormalizationMethod method = NormalizationMethod::parse(ingest_normalization);
                FeatureCache cache;
                cache.classes = corpus.classes;
                cache.frames = ingest_frames;
                cache.normalization = ingest_normalization;
                for (const SkeletonSequence& seq : corpus.sequences) {
                    cache.samples.push_back(assemble(normalize_frames(seq, ingest_frames, method),
                                                     corpus.classes, ingest_frames));
                }
                save_cache(out_root, cache);
                std::printf("wrote %zu feature tensors to %s\n", cache.samples.size(),
                            ingest_output.c_str());
            } else {
                throw ConfigError("unknown ingest format '" + ingest_format + "'");
            }
            return 0;
        }
        if (report_cmd->parsed()) {
            if (report_kind != "confusion-heatmap" && report_kind != "axis-line-chart") {
                throw ConfigError("unknown report kind '" + report_kind + "'");
            }
            const std::filesystem::path out_root(report_out);
            std::filesystem::create_directories(out_root);
            std::vector<EvalReport> reports;
            for (const std::string& file : report_inputs) {
                reports.push_back(parse_report_json(read_text_file(file)));
            }
            if (report_kind == "confusion-heatmap") {
                for (std::size_t i = 0; i < reports.size(); ++i) {
                    const std::string stem = std::filesystem::path(report_inputs[i]).stem().string();
                    write_text_file(out_root / ("confusion-" + stem + ".csv"),
                                    confusion_csv(reports[i].confusion, reports[i].classes));
                    write_text_file(out_root / ("confusion-" + stem + ".svg"),
                                    confusion_heatmap_svg(reports[i].confusion,
                                                          reports[i].classes,
                                                          "Confusion matrix"));
                }
            } else {
                if (report_axis != "stride" && report_axis != "sigma") {
                    throw ConfigError("unknown axis '" + report_axis + "'");
                }
                std::vector<SweepPoint> points;
                for (const EvalReport& r : reports) {
                    SweepPoint p;
                    p.axis_value = report_axis == "stride"
                                       ? static_cast<double>(r.config.stride)
                                       : r.config.sigma;
                    p.ok = true;
                    p.accuracy = r.accuracy;
                    p.fm = r.fm;
                    points.push_back(p);
                }
                std::sort(points.begin(), points.end(),
                          [](const SweepPoint& a, const SweepPoint& b) {
                              return a.axis_value < b.axis_value;
                          });
                write_text_file(out_root / "summary.csv", summary_csv(report_axis, points));
                write_text_file(out_root / (report_axis + "-chart.svg"),
                                line_chart_svg(report_axis, points,
                                               "Accuracy and Fowlkes-Mallows vs " + report_axis));
            }
            return 0;
        }
        throw ConfigError("no subcommand selected");
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}

}  // namespace actrec
