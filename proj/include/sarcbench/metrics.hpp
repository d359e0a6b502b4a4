#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "sarcbench/corpus.hpp"
#include "sarcbench/predictions.hpp"

namespace sarc {

// Positive class is Sarcastic: tp = actual Sarcastic predicted Sarcastic.
struct ConfusionMatrix2x2 {
    std::size_t tp = 0;
    std::size_t fn = 0;
    std::size_t fp = 0;
    std::size_t tn = 0;

    std::size_t total() const { return tp + fn + fp + tn; }
    bool operator==(const ConfusionMatrix2x2&) const = default;
};

json to_json(const ConfusionMatrix2x2& cm);
ConfusionMatrix2x2 confusion_from_json(const json& obj);

// How Unparseable/Error predictions enter the metrics.
enum class InvalidPolicy { CountIncorrect, Exclude };

std::string_view to_string(InvalidPolicy policy);
InvalidPolicy parse_invalid_policy(std::string_view text);

// Id sets of preds and golds must be equal; mismatches raise DataError listing ids.
ConfusionMatrix2x2 confusion(const PredictionSet& preds, const DatasetSplit& golds,
                             InvalidPolicy policy = InvalidPolicy::CountIncorrect);

double accuracy(const ConfusionMatrix2x2& cm);

struct ClassScores {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

ClassScores sarcastic_scores(const ConfusionMatrix2x2& cm);
ClassScores non_sarcastic_scores(const ConfusionMatrix2x2& cm);

// Unweighted mean of the two per-class F1 scores; a 0/0 class F1 counts as 0.
double macro_f1(const ConfusionMatrix2x2& cm);

struct ScoredGold {
    double score = 0.0;
    bool positive = false;
};

struct PRPoint {
    double threshold = 0.0;
    double recall = 0.0;
    double precision = 0.0;
};

struct PRCurve {
    std::vector<PRPoint> points;  // ascending recall
    double auprc = 0.0;
};

// Thresholds are the distinct scores, swept from high to low (ties form one
// point). AUPRC = sum_i (R_i - R_{i-1}) * P_i with R_0 = 0.
PRCurve pr_curve(std::span<const ScoredGold> scores);

// Pairs score-carrying predictions with their gold labels (Sarcastic positive).
std::vector<ScoredGold> scored_golds(const PredictionSet& preds, const DatasetSplit& golds);

double mean_auprc(std::span<const PRCurve> curves);

struct BootstrapResult {
    std::size_t n_iterations = 0;
    std::size_t resample_size = 0;
    double observed_delta = 0.0;  // acc_A - acc_B on the full set
    double delta_mean = 0.0;      // mean over bootstrap replicates
    double ci_low = 0.0;
    double ci_high = 0.0;
    bool significant = false;     // 95% interval excludes 0

    bool operator==(const BootstrapResult&) const = default;
};

json to_json(const BootstrapResult& r);

// Each replicate draws resample_size indices with replacement (0 = N) and
// records acc_A - acc_B on the draw. The interval is the 2.5/97.5 empirical
// percentile (linear interpolation). Replicate i uses its own stream derived
// from (seed, i), so results are independent of thread count.
BootstrapResult paired_bootstrap(const PredictionSet& preds_a, const PredictionSet& preds_b,
                                 const DatasetSplit& golds, std::size_t n_iterations,
                                 std::uint64_t seed, std::size_t resample_size = 0);

// Per-item correctness difference (correct_A - correct_B) in gold order.
std::vector<std::int8_t> correctness_difference(const PredictionSet& preds_a,
                                                const PredictionSet& preds_b,
                                                const DatasetSplit& golds);

BootstrapResult summarize_bootstrap(std::span<const std::int8_t> diff, std::vector<double> deltas,
                                    std::size_t resample_size);

// Linear-interpolated percentile of sorted data, q in [0, 1].
double percentile_sorted(std::span<const double> sorted, double q);

namespace kernels {

// Replicate deltas, OpenMP over replicates.
std::vector<double> bootstrap_deltas(std::span<const std::int8_t> diff, std::size_t n_iterations,
                                     std::size_t resample_size, std::uint64_t seed);

namespace reference {
std::vector<double> bootstrap_deltas(std::span<const std::int8_t> diff, std::size_t n_iterations,
                                     std::size_t resample_size, std::uint64_t seed);
}  // namespace reference

}  // namespace kernels

}  // namespace sarc
