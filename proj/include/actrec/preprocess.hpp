#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "actrec/dataset.hpp"
#include "actrec/rng.hpp"
#include "actrec/tensor.hpp"

namespace actrec {

// The standard feature block is joints x frames x attributes = 15 x 1961 x 4
// (attributes ordered x, y, z, confidence). Shrunken frame counts are allowed
// for small-scale runs; 1961 is the default everywhere.
inline constexpr std::size_t kDefaultFrameCount = 1961;
inline constexpr std::size_t kAttrCount = 4;

// One sample ready for the network: data shape [15, T, 4] plus its class.
// source_id and synthetic track provenance through split and augmentation.
struct FeatureTensor {
    Tensor data;
    std::size_t label_index = 0;
    std::string source_id;
    bool synthetic = false;
};

enum class NormalizationKind { Repetition, Truncation, PadTerminal, PadSpecial };

struct NormalizationMethod {
    NormalizationKind kind = NormalizationKind::Repetition;
    double pad_value = 0.0;  // PadSpecial only

    // "repetition" | "truncation" | "pad-terminal" | "pad-special:<value>"
    static NormalizationMethod parse(const std::string& text);
    std::string to_string() const;
};

// Forces the sequence to exactly `target` frames.
//   Repetition   frame i appears ceil(T/n) times if i < T mod n, floor(T/n)
//                otherwise, in order; repeat counts differ by at most 1
//   Truncation   first min(n, T) frames (shorter inputs fall back to
//                Repetition with a warning)
//   PadTerminal  last frame repeated to length T
//   PadSpecial   constant-valued frames appended
SkeletonSequence normalize_frames(const SkeletonSequence& seq, std::size_t target,
                                  NormalizationMethod method);

// Lays a sequence of exactly `target_frames` frames out as [15, T, 4]:
// element (j, t, a) = attribute a of joint j at frame t.
FeatureTensor assemble(const SkeletonSequence& seq, const std::vector<std::string>& classes,
                       std::size_t target_frames);

// Per-(joint, attribute) mean and std, fitted on training data only.
// Channels with zero variance keep std 1 and pass through unscaled.
struct Standardizer {
    Tensor mean;  // [15, 4]
    Tensor stddev;  // [15, 4], all > 0
};

Standardizer fit_standardizer(const std::vector<FeatureTensor>& train);
FeatureTensor apply_standardizer(const Standardizer& s, const FeatureTensor& t);

struct SplitSpec {
    double train_fraction = 0.8;
    std::uint64_t seed = 0;
    bool stratified = true;
};

struct Split {
    std::vector<FeatureTensor> train;
    std::vector<FeatureTensor> test;
};

// Seeded disjoint partition. Stratified mode draws round(f * count) training
// samples per class; a single-sample class goes entirely to train with a
// warning.
Split split(std::vector<FeatureTensor> corpus, const SplitSpec& spec);

// Class balancing: every class is topped up to the largest class count with
// synthetic samples, each a round-robin source plus i.i.d. N(0, sigma) on
// every feature. sigma = 0 yields exact copies. Apply after standardization
// and only to the training partition.
std::vector<FeatureTensor> augment(std::vector<FeatureTensor> train, double sigma, const Rng& rng);

// On-disk feature cache: <dir>/manifest.json plus one .tensor file per
// sample, so sweeps can skip re-parsing. The manifest records the class
// list, frame count, normalization, and per-sample label/provenance; split
// seed, sigma, and standardizer parameters are recorded when supplied.
struct FeatureCache {
    std::vector<FeatureTensor> samples;
    std::vector<std::string> classes;
    std::size_t frames = kDefaultFrameCount;
    std::string normalization;
};

void save_cache(const std::filesystem::path& dir, const FeatureCache& cache);
FeatureCache load_cache(const std::filesystem::path& dir);
bool is_feature_cache(const std::filesystem::path& dir);

}  // namespace actrec
