#include "sarcbench/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "sarcbench/errors.hpp"

namespace sarc {

json to_json(const ConfusionMatrix2x2& cm) {
    return json{{"tp", cm.tp}, {"fn", cm.fn}, {"fp", cm.fp}, {"tn", cm.tn}};
}

ConfusionMatrix2x2 confusion_from_json(const json& obj) {
    try {
        return {obj.at("tp").get<std::size_t>(), obj.at("fn").get<std::size_t>(),
                obj.at("fp").get<std::size_t>(), obj.at("tn").get<std::size_t>()};
    } catch (const json::exception& e) {
        throw DataError(std::string("malformed confusion matrix: ") + e.what());
    }
}

std::string_view to_string(InvalidPolicy policy) {
    return policy == InvalidPolicy::Exclude ? "exclude" : "incorrect";
}

InvalidPolicy parse_invalid_policy(std::string_view text) {
    if (text == "incorrect") {
        return InvalidPolicy::CountIncorrect;
    }
    if (text == "exclude") {
        return InvalidPolicy::Exclude;
    }
    throw UsageError("invalid_policy must be 'incorrect' or 'exclude', got '" + std::string(text) + "'");
}

namespace {

// Entries aligned to gold order; raises DataError on any id-set mismatch.
std::vector<const PredictionEntry*> align(const PredictionSet& preds, const DatasetSplit& golds) {
    std::unordered_map<std::string_view, const PredictionEntry*> by_id;
    for (const auto& e : preds.entries) {
        if (!by_id.emplace(e.sentence_id, &e).second) {
            throw DataError("prediction set '" + preds.model_id + "' repeats id '" + e.sentence_id + "'");
        }
    }
    std::vector<const PredictionEntry*> aligned;
    aligned.reserve(golds.records.size());
    std::vector<std::string> missing;
    for (const auto& r : golds.records) {
        const auto it = by_id.find(r.id);
        if (it == by_id.end()) {
            missing.push_back(r.id);
            continue;
        }
        aligned.push_back(it->second);
        by_id.erase(it);
    }
    if (!missing.empty() || !by_id.empty()) {
        std::string msg = "id mismatch between predictions '" + preds.model_id + "' and golds";
        if (!missing.empty()) {
            msg += "; missing from predictions:";
            for (std::size_t i = 0; i < std::min<std::size_t>(missing.size(), 20); ++i) {
                msg += " " + missing[i];
            }
            if (missing.size() > 20) {
                msg += " ...(" + std::to_string(missing.size()) + " total)";
            }
        }
        if (!by_id.empty()) {
            std::vector<std::string> extra;
            for (const auto& [id, e] : by_id) {
                extra.emplace_back(id);
            }
            std::sort(extra.begin(), extra.end());
            msg += "; not in golds:";
            for (std::size_t i = 0; i < std::min<std::size_t>(extra.size(), 20); ++i) {
                msg += " " + extra[i];
            }
        }
        throw DataError(msg);
    }
    return aligned;
}

bool is_correct(const PredictionEntry& e, TaskLabel gold) {
    return e.status == PredictionStatus::Ok && e.predicted && *e.predicted == gold;
}

double safe_div(double num, double den) { return den == 0.0 ? 0.0 : num / den; }

ClassScores class_scores(std::size_t hit, std::size_t false_pos, std::size_t false_neg) {
    ClassScores s;
    s.precision = safe_div(static_cast<double>(hit), static_cast<double>(hit + false_pos));
    s.recall = safe_div(static_cast<double>(hit), static_cast<double>(hit + false_neg));
    s.f1 = safe_div(2.0 * static_cast<double>(hit), static_cast<double>(2 * hit + false_pos + false_neg));
    return s;
}

}  // namespace

ConfusionMatrix2x2 confusion(const PredictionSet& preds, const DatasetSplit& golds, InvalidPolicy policy) {
    if (golds.task != Task::Sarcasm) {
        throw DataError("confusion matrices are defined for the sarcasm task only");
    }
    const auto aligned = align(preds, golds);
    ConfusionMatrix2x2 cm;
    for (std::size_t i = 0; i < aligned.size(); ++i) {
        const auto& e = *aligned[i];
        const bool actual_sarcastic = golds.records[i].label == TaskLabel::Sarcastic;
        if (e.status != PredictionStatus::Ok || !e.predicted) {
            if (policy == InvalidPolicy::Exclude) {
                continue;
            }
            // Invalid outputs land in the incorrect cell for their gold class.
            (actual_sarcastic ? cm.fn : cm.fp) += 1;
            continue;
        }
        const bool predicted_sarcastic = *e.predicted == TaskLabel::Sarcastic;
        if (actual_sarcastic) {
            (predicted_sarcastic ? cm.tp : cm.fn) += 1;
        } else {
            (predicted_sarcastic ? cm.fp : cm.tn) += 1;
        }
    }
    return cm;
}

double accuracy(const ConfusionMatrix2x2& cm) {
    if (cm.total() == 0) {
        throw DataError("accuracy of an empty confusion matrix");
    }
    return static_cast<double>(cm.tp + cm.tn) / static_cast<double>(cm.total());
}

ClassScores sarcastic_scores(const ConfusionMatrix2x2& cm) { return class_scores(cm.tp, cm.fp, cm.fn); }

ClassScores non_sarcastic_scores(const ConfusionMatrix2x2& cm) { return class_scores(cm.tn, cm.fn, cm.fp); }

double macro_f1(const ConfusionMatrix2x2& cm) {
    if (cm.total() == 0) {
        throw DataError("macro-F1 of an empty confusion matrix");
    }
    return (sarcastic_scores(cm).f1 + non_sarcastic_scores(cm).f1) / 2.0;
}

PRCurve pr_curve(std::span<const ScoredGold> scores) {
    std::size_t positives = 0;
    for (const auto& s : scores) {
        positives += s.positive ? 1 : 0;
    }
    if (positives == 0) {
        throw DataError("pr_curve needs at least one positive gold label");
    }
    std::vector<ScoredGold> sorted(scores.begin(), scores.end());
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const ScoredGold& a, const ScoredGold& b) { return a.score > b.score; });

    PRCurve curve;
    std::size_t tp = 0;
    std::size_t fp = 0;
    double prev_recall = 0.0;
    std::size_t i = 0;
    while (i < sorted.size()) {
        const double threshold = sorted[i].score;
        while (i < sorted.size() && sorted[i].score == threshold) {
            (sorted[i].positive ? tp : fp) += 1;
            ++i;
        }
        const double recall = static_cast<double>(tp) / static_cast<double>(positives);
        const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
        curve.auprc += (recall - prev_recall) * precision;
        prev_recall = recall;
        curve.points.push_back({threshold, recall, precision});
    }
    return curve;
}

std::vector<ScoredGold> scored_golds(const PredictionSet& preds, const DatasetSplit& golds) {
    if (golds.task != Task::Sarcasm) {
        throw DataError("PR curves are defined for the sarcasm task only");
    }
    const auto aligned = align(preds, golds);
    std::vector<ScoredGold> out;
    out.reserve(aligned.size());
    for (std::size_t i = 0; i < aligned.size(); ++i) {
        if (!aligned[i]->score) {
            throw DataError("prediction set '" + preds.model_id + "' carries no scores (label-only predictor)");
        }
        out.push_back({*aligned[i]->score, golds.records[i].label == TaskLabel::Sarcastic});
    }
    return out;
}

double mean_auprc(std::span<const PRCurve> curves) {
    if (curves.empty()) {
        throw DataError("mean_auprc of an empty list");
    }
    double sum = 0.0;
    for (const auto& c : curves) {
        sum += c.auprc;
    }
    return sum / static_cast<double>(curves.size());
}

json to_json(const BootstrapResult& r) {
    return json{{"n_iterations", r.n_iterations}, {"resample_size", r.resample_size},
                {"observed_delta", r.observed_delta}, {"delta_mean", r.delta_mean},
                {"ci_low", r.ci_low}, {"ci_high", r.ci_high}, {"significant", r.significant}};
}

std::vector<std::int8_t> correctness_difference(const PredictionSet& preds_a, const PredictionSet& preds_b,
                                                const DatasetSplit& golds) {
    const auto a = align(preds_a, golds);
    const auto b = align(preds_b, golds);
    std::vector<std::int8_t> diff(golds.records.size());
    for (std::size_t i = 0; i < diff.size(); ++i) {
        const TaskLabel gold = golds.records[i].label;
        diff[i] = static_cast<std::int8_t>(int(is_correct(*a[i], gold)) - int(is_correct(*b[i], gold)));
    }
    return diff;
}

double percentile_sorted(std::span<const double> sorted, double q) {
    if (sorted.empty()) {
        throw DataError("percentile of an empty sample");
    }
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    if (frac == 0.0) {
        return sorted[lo];
    }
    return sorted[lo] + (sorted[hi] - sorted[lo]) * frac;
}

BootstrapResult summarize_bootstrap(std::span<const std::int8_t> diff, std::vector<double> deltas,
                                    std::size_t resample_size) {
    BootstrapResult r;
    r.n_iterations = deltas.size();
    r.resample_size = resample_size;
    long long observed = 0;
    for (auto d : diff) {
        observed += d;
    }
    r.observed_delta = diff.empty() ? 0.0 : static_cast<double>(observed) / static_cast<double>(diff.size());
    double sum = 0.0;
    for (double d : deltas) {
        sum += d;
    }
    r.delta_mean = sum / static_cast<double>(deltas.size());
    std::sort(deltas.begin(), deltas.end());
    r.ci_low = percentile_sorted(deltas, 0.025);
    r.ci_high = percentile_sorted(deltas, 0.975);
    r.significant = r.ci_low > 0.0 || r.ci_high < 0.0;
    return r;
}

BootstrapResult paired_bootstrap(const PredictionSet& preds_a, const PredictionSet& preds_b,
                                 const DatasetSplit& golds, std::size_t n_iterations, std::uint64_t seed,
                                 std::size_t resample_size) {
    if (n_iterations == 0) {
        throw UsageError("paired_bootstrap needs n_iterations >= 1");
    }
    const auto diff = correctness_difference(preds_a, preds_b, golds);
    if (diff.empty()) {
        throw DataError("paired_bootstrap over an empty gold set");
    }
    const std::size_t m = resample_size == 0 ? diff.size() : resample_size;
    return summarize_bootstrap(diff, kernels::bootstrap_deltas(diff, n_iterations, m, seed), m);
}

}  // namespace sarc
