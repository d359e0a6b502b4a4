#include <algorithm>
#include <set>

#include "doctest.h"
#include "sarcbench/corpus.hpp"
#include "sarcbench/errors.hpp"
#include "support.hpp"

using namespace sarc;

namespace {

std::string line(const std::string& id, const std::string& text, const std::string& label,
                 const std::string& lang = "en") {
    return json{{"id", id}, {"text", text}, {"label", label}, {"lang", lang}}.dump() + "\n";
}

std::vector<LabeledSentence> skewed(std::size_t sarcastic, std::size_t non) {
    std::vector<LabeledSentence> out;
    for (std::size_t i = 0; i < sarcastic + non; ++i) {
        out.push_back(test::sarcasm_record("r" + std::to_string(i), "text " + std::to_string(i), i < sarcastic));
    }
    return out;
}

void check_disjoint(const std::map<SplitName, DatasetSplit>& splits) {
    std::set<std::string> seen;
    std::size_t total = 0;
    for (const auto& [name, split] : splits) {
        for (const auto& r : split.records) {
            seen.insert(r.id);
            ++total;
        }
    }
    CHECK(seen.size() == total);
}

}  // namespace

TEST_CASE("sarcasm loader parses the dataset schema in order") {
    test::TempDir dir("corpus");
    write_text_file(dir / "h.jsonl", line("h1", "bernie sanders wins maine democratic caucus", "non-sarcastic") +
                                          line("h2", "area man loves mondays", "sarcastic"));
    const auto recs = load_sarcasm_headlines(dir / "h.jsonl");
    REQUIRE(recs.size() == 2);
    CHECK(recs[0].id == "h1");
    CHECK(recs[0].label == TaskLabel::NonSarcastic);
    CHECK(recs[0].lang == Language::English);
    CHECK(recs[0].task == Task::Sarcasm);
    CHECK(recs[1].label == TaskLabel::Sarcastic);

    write_text_file(dir / "empty.jsonl", "");
    CHECK(load_sarcasm_headlines(dir / "empty.jsonl").empty());
}

TEST_CASE("loader errors name the line, the label and both duplicate lines") {
    test::TempDir dir("corpus");
    std::string content;
    for (int i = 1; i <= 7; ++i) {
        content += line(i == 7 ? "x3" : "x" + std::to_string(i), "t", "sarcastic");
    }
    write_text_file(dir / "dup.jsonl", content);
    try {
        load_sarcasm_headlines(dir / "dup.jsonl");
        FAIL("expected DataError");
    } catch (const DataError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("3") != std::string::npos);
        CHECK(msg.find("7") != std::string::npos);
        CHECK(msg.find("duplicate") != std::string::npos);
    }
    write_text_file(dir / "happy.jsonl", line("t1", "yay", "happy"));
    try {
        load_sentiment_tweets(dir / "happy.jsonl");
        FAIL("expected DataError");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("happy") != std::string::npos);
    }
    write_text_file(dir / "bad.jsonl", line("a", "x", "sarcastic") + "not json\n");
    try {
        load_sarcasm_headlines(dir / "bad.jsonl");
        FAIL("expected DataError");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find(":2") != std::string::npos);
    }
    write_text_file(dir / "cross.jsonl", line("a", "x", "positive"));
    CHECK_THROWS_AS(load_sarcasm_headlines(dir / "cross.jsonl"), DataError);
}

TEST_CASE("sentiment loader keeps one record per class") {
    test::TempDir dir("corpus");
    write_text_file(dir / "s.jsonl", line("a", "good", "positive") + line("b", "bad", "negative") +
                                          line("c", "meh", "neutral"));
    const auto recs = load_sentiment_tweets(dir / "s.jsonl");
    REQUIRE(recs.size() == 3);
    const auto counts = count_labels(recs);
    CHECK(counts.at(TaskLabel::Positive) == 1);
    CHECK(counts.at(TaskLabel::Negative) == 1);
    CHECK(counts.at(TaskLabel::Neutral) == 1);
}

TEST_CASE("dataset save and load round-trip") {
    test::TempDir dir("corpus");
    auto recs = test::toy_sarcasm_corpus(10, 1, Language::Hinglish);
    save_dataset(dir / "r.jsonl", recs);
    CHECK(load_dataset(dir / "r.jsonl", Task::Sarcasm) == recs);
}

TEST_CASE("balanced undersampling keeps the minority count per class") {
    const auto recs = skewed(10, 4);
    const auto out = balanced_undersample(recs, 9);
    const auto counts = count_labels(out);
    CHECK(counts.at(TaskLabel::Sarcastic) == 4);
    CHECK(counts.at(TaskLabel::NonSarcastic) == 4);
    CHECK(out == balanced_undersample(recs, 9));
    // Relative order preserved.
    std::vector<std::size_t> positions;
    for (const auto& r : out) {
        positions.push_back(static_cast<std::size_t>(std::find(recs.begin(), recs.end(), r) - recs.begin()));
    }
    CHECK(std::is_sorted(positions.begin(), positions.end()));

    const auto balanced = skewed(5, 5);
    CHECK(balanced_undersample(balanced, 3) == balanced);
    CHECK_THROWS_AS(balanced_undersample(std::vector<LabeledSentence>{}, 1), DataError);
    CHECK_THROWS_AS(balanced_undersample(skewed(3, 0), 1), DataError);
}

TEST_CASE("default plans carry the published split sizes") {
    const auto sarcasm = default_sarcasm_plan();
    REQUIRE(sarcasm.size() == 3);
    CHECK(sarcasm[0].name == SplitName::Train);
    CHECK(sarcasm[0].per_class.at(TaskLabel::Sarcastic) == 9380);
    CHECK(sarcasm[1].per_class.at(TaskLabel::NonSarcastic) == 1171);
    CHECK(sarcasm[2].per_class.at(TaskLabel::Sarcastic) == 1172);
    const auto sentiment = default_sentiment_plan();
    REQUIRE(sentiment.size() == 1);
    CHECK(sentiment[0].per_class.at(TaskLabel::Positive) == 644);
    CHECK(sentiment[0].per_class.at(TaskLabel::Negative) == 646);
    CHECK(sentiment[0].per_class.at(TaskLabel::Neutral) == 645);
}

TEST_CASE("small explicit plan covers every record with disjoint splits") {
    const auto recs = skewed(3, 3);
    const SplitPlan plan{{SplitName::Train, {{TaskLabel::Sarcastic, 2}, {TaskLabel::NonSarcastic, 2}}},
                         {SplitName::Test, {{TaskLabel::Sarcastic, 1}, {TaskLabel::NonSarcastic, 1}}}};
    const auto splits = make_sarcasm_splits(recs, 4, plan);
    CHECK(splits.at(SplitName::Train).size() == 4);
    CHECK(splits.at(SplitName::Test).size() == 2);
    check_disjoint(splits);
    CHECK(splits.at(SplitName::Test).records == make_sarcasm_splits(recs, 4, plan).at(SplitName::Test).records);
}

TEST_CASE("split shortfall names the class and the missing count") {
    const auto recs = skewed(3, 3);
    const SplitPlan plan{{SplitName::Train, {{TaskLabel::Sarcastic, 4}, {TaskLabel::NonSarcastic, 2}}}};
    try {
        make_sarcasm_splits(recs, 1, plan);
        FAIL("expected DataError");
    } catch (const DataError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("sarcastic") != std::string::npos);
        CHECK(msg.find("1") != std::string::npos);
    }
}

TEST_CASE("property: random plans give exact, disjoint, balanced and deterministic splits") {
    Rng rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t per_class = 5 + rng.below(40);
        const auto recs = balanced_undersample(skewed(per_class + rng.below(5), per_class), trial);
        const std::size_t a = rng.below(per_class / 2 + 1);
        const std::size_t b = rng.below(per_class - a + 1);
        const std::size_t c = per_class - a - b;
        SplitPlan plan;
        for (const auto& [name, n] : {std::pair{SplitName::Train, a}, {SplitName::FineTuneEnglish, b},
                                      {SplitName::Test, c}}) {
            plan.push_back({name, {{TaskLabel::Sarcastic, n}, {TaskLabel::NonSarcastic, n}}});
        }
        const auto seed = rng.next();
        const auto splits = make_sarcasm_splits(recs, seed, plan);
        check_disjoint(splits);
        std::size_t total = 0;
        for (const auto& [name, split] : splits) {
            total += split.size();
            std::size_t lo = SIZE_MAX;
            std::size_t hi = 0;
            for (const auto& [label, n] : split.class_counts) {
                lo = std::min(lo, n);
                hi = std::max(hi, n);
            }
            if (!split.records.empty()) {
                CHECK(hi - lo <= 1);
            }
            CHECK(split.records == make_sarcasm_splits(recs, seed, plan).at(name).records);
        }
        CHECK(total == recs.size());
    }
}

TEST_CASE("parallel split follows the source ids and manifest lists them") {
    const auto en = test::toy_sarcasm_corpus(6, 1);
    const auto hi = test::toy_sarcasm_corpus(6, 1, Language::Hinglish);
    const SplitPlan plan{{SplitName::FineTuneEnglish, {{TaskLabel::Sarcastic, 3}, {TaskLabel::NonSarcastic, 3}}}};
    const auto splits = make_sarcasm_splits(en, 2, plan);
    const auto& ft = splits.at(SplitName::FineTuneEnglish);
    const auto cm = parallel_split(ft, SplitName::FineTuneHinglish, hi);
    REQUIRE(cm.size() == ft.size());
    for (std::size_t i = 0; i < cm.size(); ++i) {
        CHECK(cm.records[i].id == ft.records[i].id);
        CHECK(cm.records[i].label == ft.records[i].label);
        CHECK(cm.records[i].lang == Language::Hinglish);
    }
    const auto manifest = split_manifest(splits);
    const auto ids = manifest_ids(manifest);
    CHECK(ids.at(SplitName::FineTuneEnglish).size() == 6);
    CHECK(manifest.at("counts").at("FineTuneEnglish").at("sarcastic") == 3);
    CHECK_THROWS_AS(parallel_split(ft, SplitName::FineTuneHinglish, std::vector<LabeledSentence>{}), DataError);
}

TEST_CASE("script profile counts Latin, Devanagari and other tokens") {
    CHECK(script_profile("Weekend plans cancel हो गए") == ScriptProfile{3, 2, 0});
    CHECK(script_profile("") == ScriptProfile{0, 0, 0});
    CHECK(script_profile("123 !!") == ScriptProfile{0, 0, 2});
    CHECK(script_profile("  mixed\tहोa  ").total() == 2);
}
