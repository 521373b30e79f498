#include "actrec/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "actrec/common.hpp"

namespace actrec {

namespace {

std::uint64_t pairs_of(std::uint64_t n) { return n * (n - 1) / 2; }

void check_lengths(const EvaluationSet& eval) {
    if (eval.predictions.size() != eval.labels.size()) {
        throw ParamError("prediction and label counts differ: " +
                         std::to_string(eval.predictions.size()) + " vs " +
                         std::to_string(eval.labels.size()));
    }
}

// Both pair-counting routes feed this one expression, so agreement between
// them is exact rather than within rounding.
double fm_from_counts(const PairCounts& c) {
    if (c.tp_fp == 0 || c.tp_fn == 0) {
        warn("degenerate pair counts (no co-grouped pairs); Fowlkes-Mallows reported as 0");
        return 0.0;
    }
    if (c.tp == 0) return 0.0;
    const double precision = static_cast<double>(c.tp) / static_cast<double>(c.tp_fp);
    const double recall = static_cast<double>(c.tp) / static_cast<double>(c.tp_fn);
    return std::sqrt(precision * recall);
}

}  // namespace

double accuracy(const EvaluationSet& eval) {
    check_lengths(eval);
    if (eval.predictions.empty()) throw ParamError("accuracy over an empty evaluation set");
    std::size_t correct = 0;
    for (std::size_t i = 0; i < eval.predictions.size(); ++i) {
        if (eval.predictions[i] == eval.labels[i]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(eval.predictions.size());
}

ConfusionMatrix confusion(const EvaluationSet& eval, std::size_t num_classes) {
    check_lengths(eval);
    if (num_classes == 0) throw ParamError("confusion matrix needs at least one class");
    ConfusionMatrix m;
    m.counts = Tensor::zeros({num_classes, num_classes});
    m.total = eval.predictions.size();
    for (std::size_t i = 0; i < eval.predictions.size(); ++i) {
        const std::size_t p = eval.predictions[i];
        const std::size_t l = eval.labels[i];
        if (p >= num_classes || l >= num_classes) {
            throw LabelError("class index out of range at position " + std::to_string(i));
        }
        m.counts(p, l) += 1.0;
    }
    return m;
}

PairCounts pair_counts(const EvaluationSet& eval) {
    check_lengths(eval);
    if (eval.predictions.size() < 2) {
        throw ParamError("pair counting needs at least two samples");
    }
    std::size_t num_classes = 0;
    for (std::size_t i = 0; i < eval.predictions.size(); ++i) {
        num_classes = std::max({num_classes, eval.predictions[i] + 1, eval.labels[i] + 1});
    }
    // Contingency table n[p][l], then each count contributes its own pairs.
    std::vector<std::uint64_t> table(num_classes * num_classes, 0);
    std::vector<std::uint64_t> pred_totals(num_classes, 0);
    std::vector<std::uint64_t> label_totals(num_classes, 0);
    for (std::size_t i = 0; i < eval.predictions.size(); ++i) {
        ++table[eval.predictions[i] * num_classes + eval.labels[i]];
        ++pred_totals[eval.predictions[i]];
        ++label_totals[eval.labels[i]];
    }
    PairCounts c;
    for (std::uint64_t n : table) c.tp += pairs_of(n);
    for (std::uint64_t n : pred_totals) c.tp_fp += pairs_of(n);
    for (std::uint64_t n : label_totals) c.tp_fn += pairs_of(n);
    return c;
}

PairCounts pair_counts_pairwise(const EvaluationSet& eval) {
    check_lengths(eval);
    if (eval.predictions.size() < 2) {
        throw ParamError("pair counting needs at least two samples");
    }
    PairCounts c;
    for (std::size_t i = 0; i < eval.predictions.size(); ++i) {
        for (std::size_t j = i + 1; j < eval.predictions.size(); ++j) {
            const bool same_pred = eval.predictions[i] == eval.predictions[j];
            const bool same_label = eval.labels[i] == eval.labels[j];
            if (same_pred) ++c.tp_fp;
            if (same_label) ++c.tp_fn;
            if (same_pred && same_label) ++c.tp;
        }
    }
    return c;
}

double fowlkes_mallows(const EvaluationSet& eval) { return fm_from_counts(pair_counts(eval)); }

double fowlkes_mallows_pairwise(const EvaluationSet& eval) {
    return fm_from_counts(pair_counts_pairwise(eval));
}

}  // namespace actrec
