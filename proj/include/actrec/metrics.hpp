#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "actrec/tensor.hpp"

namespace actrec {

// Predicted and true class indices for one evaluation pass, same length.
struct EvaluationSet {
    std::vector<std::size_t> predictions;
    std::vector<std::size_t> labels;
};

// Fraction of positions where prediction equals label. Empty set is an error.
double accuracy(const EvaluationSet& eval);

// counts(i, j) = number of samples predicted as class i whose true class is
// j, so row sums are prediction totals and column sums are label totals.
struct ConfusionMatrix {
    Tensor counts;  // [C, C]
    std::size_t total = 0;
};

ConfusionMatrix confusion(const EvaluationSet& eval, std::size_t num_classes);

// Pair counts over all unordered sample pairs: true positives are pairs
// grouped together by both predictions and labels.
struct PairCounts {
    std::uint64_t tp = 0;
    std::uint64_t tp_fp = 0;  // pairs grouped together by predictions
    std::uint64_t tp_fn = 0;  // pairs grouped together by labels
};

// Geometric mean of pairwise precision and recall, computed from a
// contingency table in O(M + C^2). Zero when no pair agrees; fewer than two
// samples is an error.
double fowlkes_mallows(const EvaluationSet& eval);

// Reference implementation that enumerates all M(M-1)/2 pairs directly.
// Slow on purpose; exists to cross-check fowlkes_mallows exactly.
double fowlkes_mallows_pairwise(const EvaluationSet& eval);

PairCounts pair_counts(const EvaluationSet& eval);
PairCounts pair_counts_pairwise(const EvaluationSet& eval);

}  // namespace actrec
