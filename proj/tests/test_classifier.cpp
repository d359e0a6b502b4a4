#include <cmath>
#include <set>

#include <omp.h>

#include "doctest.h"
#include "sarcbench/classifier.hpp"
#include "sarcbench/errors.hpp"
#include "sarcbench/metrics.hpp"
#include "support.hpp"
#include "tiny_encoder.hpp"

using namespace sarc;

namespace {

struct Fixture {
    test::TempDir dir{"clf"};
    std::vector<LabeledSentence> en = test::toy_sarcasm_corpus(24, 1);
    std::vector<LabeledSentence> cm = test::toy_sarcasm_corpus(12, 2, Language::Hinglish, "c");
    std::vector<LabeledSentence> sent = test::toy_sentiment_corpus(8);
    DatasetSplit train_split = DatasetSplit::make(SplitName::Train, en);
    DatasetSplit cm_split = DatasetSplit::make(SplitName::FineTuneHinglish, cm);
    DatasetSplit sent_split = DatasetSplit::make(SplitName::FineTuneEnglish, sent);
    ClassifierConfig config;

    Fixture() {
        auto all = en;
        all.insert(all.end(), cm.begin(), cm.end());
        all.insert(all.end(), sent.begin(), sent.end());
        test::write_tiny_encoder(dir / "enc", all);
        config = test::tiny_classifier_config(dir / "enc");
    }
};

bool same_tensors(const nn::TensorMap& a, const nn::TensorMap& b) { return a == b; }

}  // namespace

TEST_CASE("classifier config validation and JSON") {
    ClassifierConfig c;
    c.validate();
    CHECK(c.epochs == 100);
    CHECK(c.learning_rate == 1e-3);
    CHECK(c.batch_size == 32);
    auto bad = c;
    bad.batch_size = 0;
    CHECK_THROWS_AS(bad.validate(), UsageError);
    bad = c;
    bad.epochs = 0;
    CHECK_THROWS_AS(bad.validate(), UsageError);
    bad = c;
    bad.learning_rate = 0.0;
    CHECK_THROWS_AS(bad.validate(), UsageError);
    CHECK_THROWS_AS(ClassifierConfig::from_json(json{{"epoch", 3}}), UsageError);
    const auto merged = ClassifierConfig::from_json(json{{"epochs", 3}}, c);
    CHECK(merged.epochs == 3);
    CHECK(merged.batch_size == 32);
    const auto round = ClassifierConfig::from_json(merged.to_json());
    CHECK(round.to_json() == merged.to_json());
}

TEST_CASE("unresolvable encoder artifacts are data errors") {
    CHECK_THROWS_AS(resolve_encoder("/nonexistent/encoder"), DataError);
    test::TempDir dir("enc");
    CHECK_THROWS_AS(resolve_encoder(dir.path().string()), DataError);
}

TEST_CASE("train: smoke run on a 4-record split") {
    Fixture f;
    auto cfg = f.config;
    cfg.epochs = 1;
    const std::vector<LabeledSentence> four(f.en.begin(), f.en.begin() + 4);
    const auto ckpt = train(cfg, DatasetSplit::make(SplitName::Train, four), "en-sarcasm");
    CHECK(ckpt.provenance == std::vector<std::string>{"train:en-sarcasm"});
    REQUIRE(ckpt.training_log.size() == 1);
    CHECK(std::isfinite(ckpt.training_log[0].mean_loss));
    CHECK(ckpt.num_labels() == 2);
}

TEST_CASE("train: label cardinality mismatch is rejected") {
    Fixture f;
    CHECK_THROWS_AS(train(f.config, f.sent_split), UsageError);
}

TEST_CASE("train: loss converges and the model separates the toy classes") {
    Fixture f;
    const auto ckpt = train(f.config, f.train_split);
    REQUIRE(ckpt.training_log.size() == f.config.epochs);
    CHECK(ckpt.training_log.back().mean_loss <= ckpt.training_log.front().mean_loss);
    const auto preds = predict(ckpt, f.train_split.records);
    CHECK(accuracy(confusion(preds, f.train_split)) >= 0.9);
    for (const auto& e : preds.entries) {
        REQUIRE(e.score.has_value());
        CHECK(*e.score >= 0.0);
        CHECK(*e.score <= 1.0);
        CHECK((*e.score >= 0.5) == (e.predicted == TaskLabel::Sarcastic));
    }
}

TEST_CASE("train: seeded runs give identical predictions at any thread count") {
    Fixture f;
    auto cfg = f.config;
    cfg.epochs = 4;
    omp_set_num_threads(1);
    const auto a = predict(train(cfg, f.train_split), f.cm_split.records);
    omp_set_num_threads(3);
    const auto b = predict(train(cfg, f.train_split), f.cm_split.records);
    omp_set_num_threads(1);
    CHECK(a == b);
    cfg.seed = 7;
    CHECK(predict(train(cfg, f.train_split), f.cm_split.records) != a);
}

TEST_CASE("predict: empty input, repeat determinism and cardinality checks") {
    Fixture f;
    auto cfg = f.config;
    cfg.epochs = 1;
    const auto ckpt = train(cfg, f.train_split);
    CHECK(predict(ckpt, std::vector<LabeledSentence>{}).entries.empty());
    CHECK(predict(ckpt, f.cm_split.records) == predict(ckpt, f.cm_split.records));
    CHECK_THROWS_AS(predict(ckpt, f.sent), UsageError);
}

TEST_CASE("head replacement: 2 -> 3 labels leaves the encoder bit-identical") {
    Fixture f;
    auto cfg = f.config;
    cfg.epochs = 2;
    const auto source = train(cfg, f.train_split);
    const auto encoder_before = source.encoder->encoder.tensors();
    const auto head_before = source.head.tensors();

    const auto next = begin_fine_tune(source, 3, cfg);
    CHECK(same_tensors(next.encoder->encoder.tensors(), encoder_before));
    CHECK(next.num_labels() == 3);
    const auto head_after = next.head.tensors();
    CHECK(head_after.at("pre_classifier.weight") == head_before.at("pre_classifier.weight"));
    CHECK(head_after.at("pre_classifier.bias") == head_before.at("pre_classifier.bias"));
    CHECK(head_after.at("classifier.weight").shape == std::vector<std::int64_t>{3, 16});
    CHECK(head_after.at("classifier.bias").shape == std::vector<std::int64_t>{3});

    const auto same = begin_fine_tune(source, 2, cfg);
    CHECK(same_tensors(same.head.tensors(), head_before));

    // Training the fine-tuned copy must not disturb the source checkpoint.
    const auto tuned = sequential_fine_tune(source, f.sent_split, cfg, "en-sentiment");
    CHECK(same_tensors(source.encoder->encoder.tensors(), encoder_before));
    CHECK(same_tensors(source.head.tensors(), head_before));
    CHECK_FALSE(same_tensors(tuned.encoder->encoder.tensors(), encoder_before));
    CHECK(tuned.task == Task::Sentiment);
}

TEST_CASE("sequential fine-tuning appends provenance and reattaches heads") {
    Fixture f;
    auto cfg = f.config;
    cfg.epochs = 2;
    const auto base = train(cfg, f.train_split, "en-sarcasm");
    const auto once = sequential_fine_tune(base, f.cm_split, cfg, "cm-sarcasm");
    CHECK(once.provenance == std::vector<std::string>{"train:en-sarcasm", "finetune:cm-sarcasm"});
    CHECK(once.num_labels() == 2);
    const auto twice = sequential_fine_tune(once, f.cm_split, cfg, "cm-sarcasm");
    CHECK(twice.provenance.size() == 3);
    CHECK_THROWS_AS(sequential_fine_tune(base, DatasetSplit::make(SplitName::FineTuneHinglish, Task::Sarcasm, {}), cfg),
                    DataError);

    const auto sent = sequential_fine_tune(base, f.sent_split, cfg, "en-sentiment");
    const auto back = reattach_classifier(sent, base);
    CHECK(back.num_labels() == 2);
    CHECK(back.task == Task::Sarcasm);
    CHECK(back.provenance.back() == "reattach:train:en-sarcasm");
    CHECK(back.head.tensors().at("classifier.weight") == base.head.tensors().at("classifier.weight"));
    CHECK(back.head.tensors().at("pre_classifier.weight") == sent.head.tensors().at("pre_classifier.weight"));
    CHECK(predict(back, f.cm_split.records).entries.size() == f.cm_split.size());
}

TEST_CASE("frozen encoder trains the head only") {
    Fixture f;
    auto cfg = f.config;
    cfg.freeze_encoder = true;
    cfg.epochs = 3;
    const auto encoder = resolve_encoder(cfg.base_encoder_id)->encoder.tensors();
    const auto ckpt = train(cfg, f.train_split);
    CHECK(same_tensors(ckpt.encoder->encoder.tensors(), encoder));
    CHECK(ckpt.training_log.back().mean_loss <= ckpt.training_log.front().mean_loss);
}

TEST_CASE("checkpoints round-trip and save byte-identically") {
    Fixture f;
    auto cfg = f.config;
    cfg.epochs = 2;
    const auto ckpt = sequential_fine_tune(train(cfg, f.train_split), f.sent_split, cfg);
    save_checkpoint(f.dir / "ck", ckpt);
    const auto loaded = load_checkpoint(f.dir / "ck");
    CHECK(loaded.provenance == ckpt.provenance);
    CHECK(loaded.num_labels() == 3);
    CHECK(loaded.task == Task::Sentiment);
    CHECK(loaded.config.to_json() == ckpt.config.to_json());
    CHECK(predict(loaded, f.sent) == predict(ckpt, f.sent));
    save_checkpoint(f.dir / "ck2", loaded);
    for (const auto* name : {"encoder.safetensors", "head.safetensors", "manifest.json", "vocab.txt"}) {
        CAPTURE(name);
        CHECK(read_text_file(f.dir / "ck" / name) == read_text_file(f.dir / "ck2" / name));
    }
    const auto manifest = json::parse(read_text_file(f.dir / "ck" / "manifest.json"));
    CHECK(manifest.at("head_spec").at("num_labels") == 3);
    CHECK(manifest.contains("label_map"));
    CHECK(read_text_file(f.dir / "ck" / "train_log.csv").starts_with("stage,epoch,mean_loss\n"));
    CHECK_THROWS_AS(load_checkpoint(f.dir / "missing"), DataError);
}

TEST_CASE("stratified folds partition the split and are seeded") {
    Fixture f;
    const auto folds = stratified_folds(f.train_split, 5, 3);
    REQUIRE(folds.size() == 5);
    std::set<std::size_t> seen;
    for (const auto& fold : folds) {
        std::size_t sarcastic = 0;
        for (const auto i : fold) {
            seen.insert(i);
            sarcastic += f.train_split.records[i].label == TaskLabel::Sarcastic;
        }
        CHECK(sarcastic * 2 >= fold.size() - 1);
        CHECK(sarcastic * 2 <= fold.size() + 1);
    }
    CHECK(seen.size() == f.train_split.size());
    CHECK(stratified_folds(f.train_split, 5, 3) == folds);
    CHECK_THROWS_AS(stratified_folds(f.train_split, 25, 3), UsageError);
    CHECK_THROWS_AS(stratified_folds(f.train_split, 1, 3), UsageError);
}

TEST_CASE("k-fold cross-validation on four toy records") {
    Fixture f;
    auto cfg = f.config;
    cfg.epochs = 2;
    const std::vector<LabeledSentence> four(f.en.begin(), f.en.begin() + 4);
    const auto cv = kfold_cross_validate(cfg, DatasetSplit::make(SplitName::Train, four), 2);
    REQUIRE(cv.folds.size() == 2);
    for (const auto& fold : cv.folds) {
        CHECK(fold.train_accuracy >= 0.0);
        CHECK(fold.train_accuracy <= 1.0);
        CHECK(fold.validation_ids.size() == 2);
    }
    CHECK(cv.to_json().at("k") == 2);
}
