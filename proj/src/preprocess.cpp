#include "actrec/preprocess.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>

#include <json.hpp>

#include "actrec/common.hpp"

namespace actrec {

namespace {

using nlohmann::json;

std::vector<Frame> repetition_frames(const std::vector<Frame>& frames, std::size_t target) {
    const std::size_t n = frames.size();
    // Frame i repeats ceil(T/n) times if i < T mod n, floor(T/n) otherwise.
    const std::size_t base = target / n;
    const std::size_t extra = target % n;
    std::vector<Frame> out;
    out.reserve(target);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t reps = base + (i < extra ? 1 : 0);
        for (std::size_t r = 0; r < reps; ++r) out.push_back(frames[i]);
    }
    return out;
}

}  // namespace

NormalizationMethod NormalizationMethod::parse(const std::string& text) {
    NormalizationMethod m;
    if (text == "repetition") {
        m.kind = NormalizationKind::Repetition;
    } else if (text == "truncation") {
        m.kind = NormalizationKind::Truncation;
    } else if (text == "pad-terminal") {
        m.kind = NormalizationKind::PadTerminal;
    } else if (text.rfind("pad-special:", 0) == 0) {
        m.kind = NormalizationKind::PadSpecial;
        const std::string value = text.substr(12);
        char* end = nullptr;
        m.pad_value = std::strtod(value.c_str(), &end);
        if (value.empty() || end != value.c_str() + value.size()) {
            throw ParamError("pad-special value is not a number: '" + value + "'");
        }
    } else {
        throw ParamError("unknown normalization method '" + text + "'");
    }
    return m;
}

std::string NormalizationMethod::to_string() const {
    switch (kind) {
        case NormalizationKind::Repetition: return "repetition";
        case NormalizationKind::Truncation: return "truncation";
        case NormalizationKind::PadTerminal: return "pad-terminal";
        case NormalizationKind::PadSpecial: return "pad-special:" + format_double(pad_value);
    }
    throw ParamError("invalid normalization kind");
}

SkeletonSequence normalize_frames(const SkeletonSequence& seq, std::size_t target,
                                  NormalizationMethod method) {
    if (target < 1) throw ParamError("target frame count must be at least 1");
    if (seq.frames.empty()) {
        throw ParamError("cannot normalize empty sequence '" + seq.source_id + "'");
    }
    SkeletonSequence out;
    out.label = seq.label;
    out.source_id = seq.source_id;
    const std::size_t n = seq.frames.size();
    switch (method.kind) {
        case NormalizationKind::Repetition:
            out.frames = repetition_frames(seq.frames, target);
            break;
        case NormalizationKind::Truncation:
            if (n < target) {
                warn("sequence '" + seq.source_id + "' has " + std::to_string(n) +
                     " frames, shorter than truncation target " + std::to_string(target) +
                     "; using repetition instead");
                out.frames = repetition_frames(seq.frames, target);
            } else {
                out.frames.assign(seq.frames.begin(),
                                  seq.frames.begin() + static_cast<std::ptrdiff_t>(target));
            }
            break;
        case NormalizationKind::PadTerminal: {
            out.frames.assign(seq.frames.begin(),
                              seq.frames.begin() +
                                  static_cast<std::ptrdiff_t>(std::min(n, target)));
            while (out.frames.size() < target) out.frames.push_back(seq.frames.back());
            break;
        }
        case NormalizationKind::PadSpecial: {
            out.frames.assign(seq.frames.begin(),
                              seq.frames.begin() +
                                  static_cast<std::ptrdiff_t>(std::min(n, target)));
            Frame pad;
            for (auto& joint : pad.joints) {
                joint.x = joint.y = joint.z = joint.confidence = method.pad_value;
            }
            while (out.frames.size() < target) out.frames.push_back(pad);
            break;
        }
    }
    return out;
}

FeatureTensor assemble(const SkeletonSequence& seq, const std::vector<std::string>& classes,
                       std::size_t target_frames) {
    if (seq.frames.size() != target_frames) {
        throw ShapeError("sequence '" + seq.source_id + "' has " +
                         std::to_string(seq.frames.size()) + " frames, expected " +
                         std::to_string(target_frames));
    }
    FeatureTensor out;
    out.label_index = class_index(classes, seq.label);
    out.source_id = seq.source_id;
    out.data = Tensor::zeros({kJointCount, target_frames, kAttrCount});
    for (std::size_t t = 0; t < target_frames; ++t) {
        for (std::size_t j = 0; j < kJointCount; ++j) {
            const Joint& joint = seq.frames[t].joints[j];
            out.data(j, t, 0) = joint.x;
            out.data(j, t, 1) = joint.y;
            out.data(j, t, 2) = joint.z;
            out.data(j, t, 3) = joint.confidence;
        }
    }
    return out;
}

Standardizer fit_standardizer(const std::vector<FeatureTensor>& train) {
    if (train.empty()) throw ParamError("cannot fit standardizer on empty training set");
    const std::size_t frames = train.front().data.shape()[1];
    Standardizer s;
    s.mean = Tensor::zeros({kJointCount, kAttrCount});
    s.stddev = Tensor::zeros({kJointCount, kAttrCount});
    const double count = static_cast<double>(train.size() * frames);
    for (const FeatureTensor& t : train) {
        if (t.data.shape() != train.front().data.shape()) {
            throw ShapeError("standardizer requires uniformly shaped samples");
        }
        for (std::size_t j = 0; j < kJointCount; ++j) {
            for (std::size_t f = 0; f < frames; ++f) {
                for (std::size_t a = 0; a < kAttrCount; ++a) {
                    s.mean(j, a) += t.data(j, f, a);
                }
            }
        }
    }
    for (std::size_t i = 0; i < s.mean.size(); ++i) s.mean.data()[i] /= count;
    for (const FeatureTensor& t : train) {
        for (std::size_t j = 0; j < kJointCount; ++j) {
            for (std::size_t f = 0; f < frames; ++f) {
                for (std::size_t a = 0; a < kAttrCount; ++a) {
                    const double d = t.data(j, f, a) - s.mean(j, a);
                    s.stddev(j, a) += d * d;
                }
            }
        }
    }
    for (std::size_t i = 0; i < s.stddev.size(); ++i) {
        // Population standard deviation; zero-variance channels pass through.
        const double sd = std::sqrt(s.stddev.data()[i] / count);
        s.stddev.data()[i] = sd > 0.0 ? sd : 1.0;
    }
    return s;
}

FeatureTensor apply_standardizer(const Standardizer& s, const FeatureTensor& t) {
    FeatureTensor out = t;
    const std::size_t frames = t.data.shape()[1];
    for (std::size_t j = 0; j < kJointCount; ++j) {
        for (std::size_t f = 0; f < frames; ++f) {
            for (std::size_t a = 0; a < kAttrCount; ++a) {
                out.data(j, f, a) = (t.data(j, f, a) - s.mean(j, a)) / s.stddev(j, a);
            }
        }
    }
    return out;
}

Split split(std::vector<FeatureTensor> corpus, const SplitSpec& spec) {
    if (spec.train_fraction <= 0.0 || spec.train_fraction >= 1.0) {
        throw ParamError("train fraction must lie strictly between 0 and 1");
    }
    Split out;
    if (!spec.stratified) {
        Rng rng(spec.seed);
        std::vector<std::size_t> order(corpus.size());
        std::iota(order.begin(), order.end(), 0);
        // Fisher-Yates driven by the split seed.
        for (std::size_t i = order.size(); i > 1; --i) {
            const std::size_t j = rng.next_u64() % i;
            std::swap(order[i - 1], order[j]);
        }
        const auto k = static_cast<std::size_t>(
            std::llround(spec.train_fraction * static_cast<double>(corpus.size())));
        for (std::size_t i = 0; i < order.size(); ++i) {
            (i < k ? out.train : out.test).push_back(std::move(corpus[order[i]]));
        }
        return out;
    }
    std::map<std::size_t, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < corpus.size(); ++i) by_class[corpus[i].label_index].push_back(i);
    for (auto& [label, indices] : by_class) {
        if (indices.size() < 2) {
            warn("class index " + std::to_string(label) +
                 " has a single sample; assigning it to the training partition");
            out.train.push_back(std::move(corpus[indices.front()]));
            continue;
        }
        // Each class shuffles under its own derived stream so adding a class
        // leaves the other classes' assignments unchanged.
        Rng rng = Rng(spec.seed).split(label);
        for (std::size_t i = indices.size(); i > 1; --i) {
            const std::size_t j = rng.next_u64() % i;
            std::swap(indices[i - 1], indices[j]);
        }
        // Literal rounding: a class can land entirely in train when the
        // rounded share equals its count.
        const auto k = static_cast<std::size_t>(
            std::llround(spec.train_fraction * static_cast<double>(indices.size())));
        for (std::size_t i = 0; i < indices.size(); ++i) {
            (i < k ? out.train : out.test).push_back(std::move(corpus[indices[i]]));
        }
    }
    return out;
}

std::vector<FeatureTensor> augment(std::vector<FeatureTensor> train, double sigma,
                                   const Rng& rng) {
    if (sigma < 0.0) throw ParamError("augmentation sigma must be non-negative");
    if (train.empty()) return train;
    std::map<std::size_t, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < train.size(); ++i) by_class[train[i].label_index].push_back(i);
    std::size_t largest = 0;
    for (const auto& [label, indices] : by_class) largest = std::max(largest, indices.size());
    std::uint64_t synth_id = 0;
    for (const auto& [label, indices] : by_class) {
        for (std::size_t need = largest - indices.size(), k = 0; k < need; ++k, ++synth_id) {
            const FeatureTensor& base = train[indices[k % indices.size()]];
            FeatureTensor synth;
            synth.label_index = base.label_index;
            synth.source_id = base.source_id + "#synth" + std::to_string(k);
            synth.synthetic = true;
            synth.data = base.data;
            if (sigma > 0.0) {
                // One derived stream per synthetic sample keeps the noise
                // independent of generation order across classes.
                Rng sample_rng = rng.split(synth_id);
                for (std::size_t i = 0; i < synth.data.size(); ++i) {
                    synth.data.data()[i] += sample_rng.next_normal(0.0, sigma);
                }
            }
            train.push_back(std::move(synth));
        }
    }
    return train;
}

void save_cache(const std::filesystem::path& dir, const FeatureCache& cache) {
    std::filesystem::create_directories(dir);
    json manifest;
    manifest["classes"] = cache.classes;
    manifest["frames"] = cache.frames;
    manifest["normalization"] = cache.normalization;
    json samples = json::array();
    for (std::size_t i = 0; i < cache.samples.size(); ++i) {
        const FeatureTensor& t = cache.samples[i];
        char name[32];
        std::snprintf(name, sizeof(name), "%06zu.tensor", i);
        json entry;
        entry["file"] = name;
        entry["label_index"] = t.label_index;
        entry["source_id"] = t.source_id;
        entry["synthetic"] = t.synthetic;
        samples.push_back(entry);
        std::ofstream f(dir / name, std::ios::binary);
        if (!f) throw IoError("cannot write " + (dir / name).string());
        write_tensor(f, t.data);
    }
    manifest["samples"] = samples;
    std::ofstream mf(dir / "manifest.json");
    if (!mf) throw IoError("cannot write " + (dir / "manifest.json").string());
    mf << manifest.dump(2) << "\n";
}

FeatureCache load_cache(const std::filesystem::path& dir) {
    std::ifstream mf(dir / "manifest.json");
    if (!mf) throw IoError("cannot read " + (dir / "manifest.json").string());
    json manifest;
    try {
        manifest = json::parse(mf);
    } catch (const json::exception& e) {
        throw ParseError("bad cache manifest in " + dir.string() + ": " + e.what());
    }
    FeatureCache cache;
    try {
        cache.classes = manifest.at("classes").get<std::vector<std::string>>();
        cache.frames = manifest.at("frames").get<std::size_t>();
        cache.normalization = manifest.at("normalization").get<std::string>();
        for (const json& entry : manifest.at("samples")) {
            FeatureTensor t;
            t.label_index = entry.at("label_index").get<std::size_t>();
            t.source_id = entry.at("source_id").get<std::string>();
            t.synthetic = entry.at("synthetic").get<bool>();
            const auto file = dir / entry.at("file").get<std::string>();
            std::ifstream f(file, std::ios::binary);
            if (!f) throw IoError("cannot read " + file.string());
            t.data = read_tensor(f);
            if (t.data.shape() != std::vector<std::size_t>{kJointCount, cache.frames, kAttrCount}) {
                throw ShapeError("cached tensor " + file.string() + " has unexpected shape");
            }
            if (t.label_index >= cache.classes.size()) {
                throw ParseError("cached sample " + file.string() + " has out-of-range label");
            }
            cache.samples.push_back(std::move(t));
        }
    } catch (const json::exception& e) {
        throw ParseError("bad cache manifest in " + dir.string() + ": " + e.what());
    }
    return cache;
}

bool is_feature_cache(const std::filesystem::path& dir) {
    return std::filesystem::exists(dir / "manifest.json");
}

}  // namespace actrec
