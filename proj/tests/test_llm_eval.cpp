#include <set>

#include "doctest.h"
#include "label_variants.hpp"
#include "sarcbench/errors.hpp"
#include "sarcbench/llm_eval.hpp"
#include "sarcbench/metrics.hpp"
#include "support.hpp"

using namespace sarc;

namespace {

std::size_t count_of(const std::string& haystack, const std::string& needle) {
    std::size_t n = 0;
    for (auto pos = haystack.find(needle); pos != std::string::npos; pos = haystack.find(needle, pos + 1)) {
        ++n;
    }
    return n;
}

DatasetSplit small_split(std::size_t per_class, const std::string& prefix = "h") {
    return DatasetSplit::make(SplitName::Test, Task::Sarcasm, test::toy_sarcasm_corpus(per_class, 3,
                                                                                        Language::English, prefix));
}

// Extracts the quoted target sentence from a rendered default prompt.
std::string target_of(const std::string& prompt) {
    const std::string open = "Sentence: \"";
    const auto b = prompt.find(open) + open.size();
    return prompt.substr(b, prompt.find("\"\n", b) - b);
}

}  // namespace

TEST_CASE("zero-shot prompt substitutes the sentence once") {
    const auto t = PromptTemplate::zero_shot();
    const auto p = render_prompt(t, "abc");
    CHECK(p.find("Sentence: \"abc\"") != std::string::npos);
    CHECK(p.find("- Non-Sarcastic") != std::string::npos);
    CHECK(p.find("{sentence}") == std::string::npos);
    const auto literal = render_prompt(t, "{sentence}");
    CHECK(count_of(literal, "{sentence}") == 1);
    CHECK_THROWS_AS(PromptTemplate::zero_shot("no placeholder"), UsageError);
    CHECK_THROWS_AS(PromptTemplate::zero_shot("{sentence} {sentence}"), UsageError);
}

TEST_CASE("few-shot prompt places example lines before the sentence") {
    const std::vector<Exemplar> ex{{"s1", TaskLabel::Sarcastic},
                                   {"n1", TaskLabel::NonSarcastic},
                                   {"s2", TaskLabel::Sarcastic},
                                   {"n2", TaskLabel::NonSarcastic}};
    const auto t = PromptTemplate::few_shot(ex);
    const auto p = render_prompt(t, "target");
    CHECK(count_of(p, "Example: ") == 4);
    CHECK(p.find("Example: s1 → Sarcastic\n") != std::string::npos);
    CHECK(p.find("Example: n2 → Non-Sarcastic\n") < p.find("Sentence: \"target\""));
    CHECK(p.find("You are a sarcasm detection model") < p.find("Example: s1"));
    CHECK_THROWS_AS(PromptTemplate::few_shot({}), UsageError);
    CHECK_THROWS_AS(PromptTemplate::few_shot({ex[0], ex[1], ex[2]}), UsageError);
}

TEST_CASE("parse_label examples") {
    CHECK(parse_label("Sarcastic") == ParsedLabel::Sarcastic);
    CHECK(parse_label("  non-Sarcastic.") == ParsedLabel::NonSarcastic);
    CHECK(parse_label("It could be Sarcastic or Non-Sarcastic") == ParsedLabel::Unparseable);
    CHECK(parse_label("- Non Sarcastic") == ParsedLabel::NonSarcastic);
    CHECK(parse_label("NONSARCASTIC") == ParsedLabel::NonSarcastic);
    CHECK(parse_label("**Sarcastic**") == ParsedLabel::Sarcastic);
    CHECK(parse_label("") == ParsedLabel::Unparseable);
    CHECK(parse_label("sarcasm") == ParsedLabel::Unparseable);
    CHECK(parse_label("unsarcastically") == ParsedLabel::Unparseable);
    CHECK(parse_label("“Sarcastic”") == ParsedLabel::Sarcastic);
}

TEST_CASE("property: parse_label is total and substring safe") {
    Rng rng(2024);
    for (int i = 0; i < 20000; ++i) {
        const auto junk = test::random_unicode(rng, 40);
        const auto parsed = parse_label(junk);
        CHECK((parsed == ParsedLabel::Sarcastic || parsed == ParsedLabel::NonSarcastic ||
               parsed == ParsedLabel::Unparseable));
        const auto non = test::non_sarcastic_variant(rng);
        REQUIRE_MESSAGE(parse_label(non) == ParsedLabel::NonSarcastic, non);
        const auto sar = test::sarcastic_variant(rng);
        REQUIRE_MESSAGE(parse_label(sar) == ParsedLabel::Sarcastic, sar);
        CHECK(parse_label(non + " or " + sar) == ParsedLabel::Unparseable);
    }
}

TEST_CASE("classify_dataset: one entry per sentence, labels only") {
    const auto split = small_split(10);
    test::FakeClient always([](const std::string&, const std::string&) { return test::ok_text("Sarcastic"); });
    PredictionCache cache;
    const auto out = classify_dataset(always, "m", PromptTemplate::zero_shot(), split, cache);
    REQUIRE(out.predictions.entries.size() == split.size());
    for (std::size_t i = 0; i < split.size(); ++i) {
        CHECK(out.predictions.entries[i].sentence_id == split.records[i].id);
        CHECK(out.predictions.entries[i].predicted == TaskLabel::Sarcastic);
        CHECK_FALSE(out.predictions.entries[i].score.has_value());
    }
    CHECK(out.report.ok == split.size());
    CHECK(out.report.client_calls == split.size());
}

TEST_CASE("classify_dataset: warm cache issues no calls; template changes miss") {
    test::TempDir dir("pcache");
    const auto split = small_split(5);
    test::FakeClient client([](const std::string&, const std::string& p) {
        return test::ok_text(p.size() % 2 ? "Sarcastic" : "Non-Sarcastic");
    });
    ClassifyOutcome first;
    {
        PredictionCache cache(dir / "c.jsonl");
        first = classify_dataset(client, "m", PromptTemplate::zero_shot(), split, cache);
    }
    const auto calls = client.calls();
    PredictionCache warm(dir / "c.jsonl");
    const auto second = classify_dataset(client, "m", PromptTemplate::zero_shot(), split, warm);
    CHECK(client.calls() == calls);
    CHECK(second.predictions == first.predictions);
    CHECK(second.report.cache_hits == split.size());

    const auto other = PromptTemplate::zero_shot("Classify: {sentence}");
    classify_dataset(client, "m", other, split, warm);
    CHECK(client.calls() == calls + split.size());
    classify_dataset(client, "other-model", PromptTemplate::zero_shot(), split, warm);
    CHECK(client.calls() == calls + 2 * split.size());
}

TEST_CASE("classify_dataset: unparseable answers retry then settle") {
    const auto split = small_split(1);
    test::FakeClient rambling([](const std::string&, const std::string&) { return test::ok_text("Hmm, hard to say"); });
    PredictionCache cache;
    ClassifyOptions options;
    options.max_unparseable_retries = 2;
    const auto out = classify_dataset(rambling, "m", PromptTemplate::zero_shot(), split, cache, options);
    CHECK(out.report.unparseable == 2);
    CHECK(rambling.calls() == 2 * 3);
    CHECK(out.predictions.entries[0].status == PredictionStatus::Unparseable);

    int n = 0;
    test::FakeClient second_try([&](const std::string&, const std::string&) {
        return test::ok_text(n++ % 2 == 0 ? "???" : "Non-Sarcastic");
    });
    PredictionCache c2;
    const auto ok = classify_dataset(second_try, "m", PromptTemplate::zero_shot(), split, c2, options);
    CHECK(ok.report.ok == 2);
    CHECK(second_try.calls() == 4);
}

TEST_CASE("classify_dataset: transport failures become Error entries without aborting") {
    const auto split = small_split(3);
    test::FakeClient half([](const std::string&, const std::string& p) {
        return p.find("h1\"") != std::string::npos || target_of(p).find("budget") != std::string::npos
                   ? test::transport_error()
                   : test::ok_text("Sarcastic");
    });
    PredictionCache cache;
    ClassifyOptions options;
    options.max_transport_retries = 1;
    const auto out = classify_dataset(half, "m", PromptTemplate::zero_shot(), split, cache, options);
    CHECK(out.predictions.entries.size() == split.size());
    CHECK(out.report.ok + out.report.error == split.size());
    CHECK(out.report.error_ids.size() == out.report.error);
    for (const auto& e : out.predictions.entries) {
        CHECK((e.status == PredictionStatus::Error) == !e.predicted.has_value());
    }
    // Errors are not cached.
    CHECK(cache.size() == out.report.ok);
    CHECK(out.report.to_json().at("error") == out.report.error);
}

TEST_CASE("classify_dataset: mock reproducing a published matrix gives its accuracy") {
    const auto f = test::confusion_fixture({1103, 69, 860, 312});
    std::map<std::string, std::string> answer_for_text;
    for (std::size_t i = 0; i < f.golds.size(); ++i) {
        answer_for_text[f.golds.records[i].text] =
            *f.preds.entries[i].predicted == TaskLabel::Sarcastic ? "Sarcastic" : "Non-Sarcastic";
    }
    test::FakeClient replay([&](const std::string&, const std::string& p) {
        return test::ok_text(answer_for_text.at(target_of(p)));
    });
    PredictionCache cache;
    ClassifyOptions options;
    options.parallelism = 4;
    const auto out = classify_dataset(replay, "phi4", PromptTemplate::zero_shot(), f.golds, cache, options);
    const auto cm = confusion(out.predictions, f.golds);
    CHECK(cm == ConfusionMatrix2x2{1103, 69, 860, 312});
    CHECK(std::abs(accuracy(cm) - 0.6036) <= 1e-4);
}

TEST_CASE("few-shot exemplars are balanced, seeded and disjoint from the test set") {
    const auto pool = DatasetSplit::make(SplitName::FineTuneHinglish, Task::Sarcasm,
                                         test::toy_sarcasm_corpus(10, 4, Language::Hinglish, "p"));
    const auto test_split = small_split(5, "q");
    const auto ex = build_fewshot_exemplars(pool, 2, 42, test_split);
    REQUIRE(ex.size() == 4);
    CHECK(ex[0].label == TaskLabel::Sarcastic);
    CHECK(ex[1].label == TaskLabel::NonSarcastic);
    CHECK(ex[2].label == TaskLabel::Sarcastic);
    CHECK(ex == build_fewshot_exemplars(pool, 2, 42, test_split));
    CHECK_THROWS_AS(build_fewshot_exemplars(pool, 2, 42, pool), DataError);
    CHECK_THROWS_AS(build_fewshot_exemplars(pool, 11, 42, test_split), DataError);
}

TEST_CASE("endpoint parsing") {
    const auto [base, path] = split_endpoint("http://127.0.0.1:11434/api/generate");
    CHECK(base == "http://127.0.0.1:11434");
    CHECK(path == "/api/generate");
    CHECK_THROWS_AS(split_endpoint("not a url"), UsageError);
}
