#include <algorithm>
#include <cmath>
#include <set>

#include <omp.h>

#include "doctest.h"
#include "sarcbench/errors.hpp"
#include "sarcbench/io.hpp"
#include "sarcbench/metrics.hpp"
#include "support.hpp"

using namespace sarc;

namespace {

struct Published {
    const char* name;
    ConfusionMatrix2x2 cm;
    double accuracy;
    double f1;
};

// Published confusion matrices with the accuracy / macro-F1 reported for them.
const Published kPublished[] = {
    {"Phi 4 zero-shot CM", {1103, 69, 860, 312}, 0.6036, 0.55},
    {"Llama 3.1 few-shot CM", {474, 698, 186, 986}, 0.6229, 0.60},
    {"FT_EN_SENT", {1054, 118, 963, 209}, 0.53882, 0.47},
    {"FT_CM_SENT", {775, 397, 567, 605}, 0.58873, 0.59},
    {"FT_CM_SARC", {909, 263, 115, 1057}, 0.83873, 0.84},
};

// Step-wise AUPRC by brute force: every candidate threshold is each distinct
// score, visited from high to low, with counts from a full scan.
double brute_force_auprc(const std::vector<ScoredGold>& s) {
    std::vector<double> thresholds;
    for (const auto& x : s) {
        thresholds.push_back(x.score);
    }
    std::sort(thresholds.begin(), thresholds.end(), std::greater<>());
    thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
    std::size_t positives = 0;
    for (const auto& x : s) {
        positives += x.positive;
    }
    double area = 0.0;
    double prev = 0.0;
    for (const double t : thresholds) {
        std::size_t tp = 0;
        std::size_t predicted = 0;
        for (const auto& x : s) {
            if (x.score >= t) {
                ++predicted;
                tp += x.positive;
            }
        }
        const double r = static_cast<double>(tp) / static_cast<double>(positives);
        const double p = static_cast<double>(tp) / static_cast<double>(predicted);
        area += (r - prev) * p;
        prev = r;
    }
    return area;
}

// Average precision as the mean, over positives, of precision at that item's score.
double average_precision(const std::vector<ScoredGold>& s) {
    double sum = 0.0;
    std::size_t positives = 0;
    for (const auto& x : s) {
        if (!x.positive) {
            continue;
        }
        ++positives;
        std::size_t tp = 0;
        std::size_t predicted = 0;
        for (const auto& y : s) {
            if (y.score >= x.score) {
                ++predicted;
                tp += y.positive;
            }
        }
        sum += static_cast<double>(tp) / static_cast<double>(predicted);
    }
    return sum / static_cast<double>(positives);
}

}  // namespace

TEST_CASE("published confusion matrices reproduce the printed accuracy and macro-F1") {
    for (const auto& p : kPublished) {
        CAPTURE(p.name);
        CHECK(p.cm.total() == 2344);
        CHECK(std::abs(accuracy(p.cm) - p.accuracy) <= 1e-4);
        CHECK(std::abs(macro_f1(p.cm) - p.f1) <= 5e-3);
    }
    // Per-class F1 for the Phi 4 matrix.
    const ConfusionMatrix2x2 phi{1103, 69, 860, 312};
    CHECK(sarcastic_scores(phi).f1 == doctest::Approx(0.7038).epsilon(1e-4));
    CHECK(non_sarcastic_scores(phi).f1 == doctest::Approx(0.4018).epsilon(1e-3));
    CHECK(std::abs(accuracy({909, 263, 115, 1057}) - 0.83873) <= 5e-5);
}

TEST_CASE("degenerate matrices") {
    CHECK(accuracy({0, 0, 0, 7}) == 1.0);
    CHECK(macro_f1({5, 0, 0, 5}) == 1.0);
    // All predictions Sarcastic: the Non-Sarcastic F1 is 0/0 and counts as 0.
    CHECK(macro_f1({4, 0, 4, 0}) == doctest::Approx((2.0 * 0.5 / 1.5) / 2.0));
    CHECK_THROWS_AS(accuracy({0, 0, 0, 0}), DataError);
}

TEST_CASE("confusion counts cells from predictions and gold labels") {
    for (const auto& p : kPublished) {
        const auto f = test::confusion_fixture(p.cm);
        CHECK(confusion(f.preds, f.golds) == p.cm);
    }
    const auto perfect = test::confusion_fixture({1172, 0, 0, 1172});
    CHECK(confusion(perfect.preds, perfect.golds) == ConfusionMatrix2x2{1172, 0, 0, 1172});
}

TEST_CASE("invalid predictions are incorrect by default or excluded on request") {
    auto f = test::confusion_fixture({2, 0, 0, 2});
    f.preds.entries[0].status = PredictionStatus::Unparseable;
    f.preds.entries[0].predicted.reset();
    f.preds.entries[1].status = PredictionStatus::Error;
    f.preds.entries[1].predicted.reset();
    const auto counted = confusion(f.preds, f.golds);
    CHECK(counted.total() == 4);
    CHECK(accuracy(counted) == 0.5);
    const auto excluded = confusion(f.preds, f.golds, InvalidPolicy::Exclude);
    CHECK(excluded.total() == 2);
    CHECK(accuracy(excluded) == 1.0);
}

TEST_CASE("id mismatches list the offending ids") {
    auto f = test::confusion_fixture({1, 1, 1, 1});
    f.preds.entries.pop_back();
    try {
        confusion(f.preds, f.golds);
        FAIL("expected DataError");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("c3") != std::string::npos);
    }
}

TEST_CASE("pr curve examples") {
    const std::vector<ScoredGold> separated{{0.9, true}, {0.8, true}, {0.2, false}, {0.1, false}};
    CHECK(pr_curve(separated).auprc == 1.0);
    const std::vector<ScoredGold> flat{{0.5, true}, {0.5, false}, {0.5, false}, {0.5, true}, {0.5, false}};
    const auto c = pr_curve(flat);
    CHECK(c.points.size() == 1);
    CHECK(c.auprc == doctest::Approx(2.0 / 5.0));
    CHECK_THROWS_AS(pr_curve(std::vector<ScoredGold>{{0.3, false}}), DataError);
    const std::vector<ScoredGold> six{{0.9, true}, {0.8, false}, {0.7, true}, {0.7, false}, {0.4, true}, {0.1, false}};
    CHECK(pr_curve(six).auprc == brute_force_auprc(six));
}

TEST_CASE("property: pr curve equals the exhaustive threshold oracle for n <= 8") {
    std::size_t configurations = 0;
    const auto check = [&](const std::vector<ScoredGold>& s) {
        const auto curve = pr_curve(s);
        REQUIRE(curve.auprc == brute_force_auprc(s));
        REQUIRE(std::abs(curve.auprc - average_precision(s)) < 1e-12);
        for (std::size_t i = 1; i < curve.points.size(); ++i) {
            REQUIRE(curve.points[i].recall >= curve.points[i - 1].recall);
            REQUIRE(curve.points[i].threshold < curve.points[i - 1].threshold);
        }
        for (const auto& p : curve.points) {
            REQUIRE(p.precision >= 0.0);
            REQUIRE(p.precision <= 1.0);
        }
        ++configurations;
    };
    // Scores over three tied levels: every assignment of levels and labels.
    for (std::size_t n = 1; n <= 8; ++n) {
        std::size_t level_combos = 1;
        for (std::size_t i = 0; i < n; ++i) {
            level_combos *= 3;
        }
        for (std::size_t labels = 1; labels < (std::size_t{1} << n); ++labels) {
            for (std::size_t code = 0; code < level_combos; ++code) {
                std::vector<ScoredGold> s(n);
                std::size_t c = code;
                for (std::size_t i = 0; i < n; ++i) {
                    s[i] = {0.25 * static_cast<double>(c % 3 + 1), ((labels >> i) & 1) != 0};
                    c /= 3;
                }
                check(s);
            }
        }
    }
    // Distinct scores: every permutation of ranks for n <= 6.
    for (std::size_t n = 1; n <= 6; ++n) {
        std::vector<int> ranks(n);
        for (std::size_t i = 0; i < n; ++i) {
            ranks[i] = static_cast<int>(i);
        }
        do {
            for (std::size_t labels = 1; labels < (std::size_t{1} << n); ++labels) {
                std::vector<ScoredGold> s(n);
                for (std::size_t i = 0; i < n; ++i) {
                    s[i] = {(ranks[i] + 1) / 8.0, ((labels >> i) & 1) != 0};
                }
                check(s);
            }
        } while (std::next_permutation(ranks.begin(), ranks.end()));
    }
    MESSAGE("AUPRC configurations checked: " << configurations);
}

TEST_CASE("mean auprc") {
    CHECK(mean_auprc(std::vector<PRCurve>{{{}, 0.8}, {{}, 1.0}}) == doctest::Approx(0.9));
    CHECK(mean_auprc(std::vector<PRCurve>{{{}, 0.7}}) == 0.7);
    CHECK_THROWS_AS(mean_auprc(std::vector<PRCurve>{}), DataError);
}

TEST_CASE("scored golds need scores") {
    auto f = test::confusion_fixture({1, 1, 1, 1});
    CHECK_THROWS_AS(scored_golds(f.preds, f.golds), DataError);
    for (auto& e : f.preds.entries) {
        e.score = *e.predicted == TaskLabel::Sarcastic ? 0.8 : 0.2;
    }
    const auto sg = scored_golds(f.preds, f.golds);
    CHECK(sg.size() == 4);
}

namespace {

// A correct on the first 60%, B on the last 50%: error sets are disjoint.
std::pair<PredictionSet, PredictionSet> sixty_vs_fifty(const DatasetSplit& golds) {
    PredictionSet a{"A", "test", {}};
    PredictionSet b{"B", "test", {}};
    const std::size_t n = golds.size();
    for (std::size_t i = 0; i < n; ++i) {
        const auto gold = golds.records[i].label;
        const auto wrong = gold == TaskLabel::Sarcastic ? TaskLabel::NonSarcastic : TaskLabel::Sarcastic;
        a.entries.push_back({golds.records[i].id, i < n * 6 / 10 ? gold : wrong, std::nullopt, PredictionStatus::Ok});
        b.entries.push_back({golds.records[i].id, i >= n / 2 ? gold : wrong, std::nullopt, PredictionStatus::Ok});
    }
    return {a, b};
}

}  // namespace

TEST_CASE("bootstrap: identity, determinism, symmetry and a clear effect") {
    const auto f = test::confusion_fixture({1172, 0, 0, 1172});
    const auto same = paired_bootstrap(f.preds, f.preds, f.golds, 500, 1);
    CHECK(same.delta_mean == 0.0);
    CHECK(same.ci_low == 0.0);
    CHECK(same.ci_high == 0.0);
    CHECK_FALSE(same.significant);

    const auto [a, b] = sixty_vs_fifty(f.golds);
    const auto r1 = paired_bootstrap(a, b, f.golds, 2344, 42);
    const auto r2 = paired_bootstrap(a, b, f.golds, 2344, 42);
    CHECK(r1 == r2);
    CHECK(r1.significant);
    CHECK(r1.observed_delta == doctest::Approx(0.1).epsilon(1e-3));
    CHECK(r1.ci_low <= r1.delta_mean);
    CHECK(r1.delta_mean <= r1.ci_high);
    CHECK(r1.n_iterations == 2344);
    CHECK(r1.resample_size == 2344);

    const auto swapped = paired_bootstrap(b, a, f.golds, 2344, 42);
    CHECK(swapped.delta_mean == doctest::Approx(-r1.delta_mean).epsilon(1e-12));
    CHECK(swapped.ci_low == doctest::Approx(-r1.ci_high).epsilon(1e-12));
    CHECK(swapped.ci_high == doctest::Approx(-r1.ci_low).epsilon(1e-12));

    CHECK(paired_bootstrap(a, b, f.golds, 2344, 43) != r1);
    const auto sized = paired_bootstrap(a, b, f.golds, 100, 42, 500);
    CHECK(sized.resample_size == 500);
    CHECK_THROWS_AS(paired_bootstrap(a, b, f.golds, 0, 42), UsageError);
}

TEST_CASE("property: bootstrap intervals stay ordered as iterations grow") {
    const auto f = test::confusion_fixture({60, 40, 30, 70});
    Rng rng(3);
    auto b = f.preds;
    for (auto& e : b.entries) {
        if (rng.below(3) == 0) {
            e.predicted = *e.predicted == TaskLabel::Sarcastic ? TaskLabel::NonSarcastic : TaskLabel::Sarcastic;
        }
    }
    for (const std::size_t iters : {1u, 2u, 10u, 100u, 1000u}) {
        const auto r = paired_bootstrap(f.preds, b, f.golds, iters, 9);
        CHECK(r.ci_low <= r.ci_high);
    }
}

TEST_CASE("bootstrap kernel: OpenMP result equals the serial reference at any thread count") {
    std::vector<std::int8_t> diff(997);
    Rng rng(1);
    for (auto& d : diff) {
        d = static_cast<std::int8_t>(static_cast<int>(rng.below(3)) - 1);
    }
    const auto ref = kernels::reference::bootstrap_deltas(diff, 300, diff.size(), 77);
    for (const int threads : {1, 2, 3, 8}) {
        omp_set_num_threads(threads);
        CHECK(kernels::bootstrap_deltas(diff, 300, diff.size(), 77) == ref);
    }
    omp_set_num_threads(1);
}

TEST_CASE("percentile uses linear interpolation") {
    const std::vector<double> v{1.0, 2.0, 3.0, 4.0, 5.0};
    CHECK(percentile_sorted(v, 0.0) == 1.0);
    CHECK(percentile_sorted(v, 1.0) == 5.0);
    CHECK(percentile_sorted(v, 0.5) == 3.0);
    CHECK(percentile_sorted(v, 0.025) == doctest::Approx(1.1));
}

TEST_CASE("metric JSON round-trips") {
    const ConfusionMatrix2x2 cm{909, 263, 115, 1057};
    CHECK(confusion_from_json(to_json(cm)) == cm);
    CHECK(parse_invalid_policy(to_string(InvalidPolicy::Exclude)) == InvalidPolicy::Exclude);
    CHECK_THROWS_AS(parse_invalid_policy("drop"), UsageError);
}

TEST_CASE("reference targets agree with their confusion matrices and the default plans") {
    const auto ref = json::parse(read_text_file(std::string(SARCBENCH_DATA_DIR) + "/reference_targets.json"));
    const auto target_of = [&](const std::string& key) {
        const auto slash = key.find('/');
        if (slash == std::string::npos) {
            return ref["table5"][key];
        }
        const auto mode_end = key.find('/', slash + 1);
        return ref["table4"][key.substr(0, slash)][key.substr(slash + 1, mode_end - slash - 1)][key.substr(mode_end + 1)];
    };
    CHECK(ref["confusion_matrices"].size() == 5);
    for (const auto& [key, cm_json] : ref["confusion_matrices"].items()) {
        CAPTURE(key);
        const auto cm = confusion_from_json(cm_json);
        CHECK(cm.total() == 2344);
        const auto t = target_of(key);
        CHECK(std::abs(accuracy(cm) - t["accuracy"].get<double>()) <= 1e-4);
        CHECK(std::abs(macro_f1(cm) - t["f1"].get<double>()) <= 0.005);
    }
    for (const auto& target : default_sarcasm_plan()) {
        const auto expected = ref["split_sizes"]["sarcasm_per_class"][std::string(to_string(target.name))].get<std::size_t>();
        for (const auto& [label, n] : target.per_class) {
            CHECK(n == expected);
        }
    }
    for (const auto& target : default_sentiment_plan()) {
        for (const auto& [label, n] : target.per_class) {
            CHECK(n == ref["split_sizes"]["sentiment_finetune"][std::string(to_string(label))].get<std::size_t>());
        }
    }
}
