#include <cmath>
#include <filesystem>

#include "doctest.h"
#include "sarcbench/io.hpp"
#include "sarcbench/nn/model.hpp"
#include "sarcbench/nn/tokenizer.hpp"

using namespace sarc;
using namespace sarc::nn;

namespace {

const std::filesystem::path kTiny = std::filesystem::path(SARCBENCH_FIXTURE_DIR) / "distilbert_tiny";

// Tolerances against the torch reference (float32 on both sides).
constexpr double kLogitTol = 2e-5;
constexpr double kGradAbsTol = 2e-5;
constexpr double kGradRelTol = 2e-3;
constexpr double kParamTol = 1e-6;

json oracle() { return json::parse(read_text_file(kTiny / "oracle.json")); }

TokenBatch oracle_batch(const json& o) {
    TokenBatch b;
    b.batch = o["ids"].size();
    b.seq = o["ids"][0].size();
    for (const auto& row : o["ids"]) {
        for (const auto& v : row) {
            b.ids.push_back(v.get<std::int32_t>());
        }
    }
    for (const auto& row : o["mask"]) {
        for (const auto& v : row) {
            b.mask.push_back(v.get<float>());
        }
    }
    return b;
}

}  // namespace

TEST_CASE("encoder and head reproduce the torch forward pass") {
    const auto o = oracle();
    const auto cfg = EncoderConfig::from_json(json::parse(read_text_file(kTiny / "config.json")));
    const auto tensors = load_safetensors(kTiny / "model.safetensors");
    const auto enc = Encoder::from_tensors(cfg, tensors);
    const auto head = ClassificationHead::from_tensors(tensors, cfg.seq_classif_dropout);
    const auto b = oracle_batch(o);
    const auto hidden = enc.forward(b, Mode::Eval, nullptr, nullptr);
    const auto logits = head.forward(cls_rows(hidden, b.batch, b.seq, cfg.dim), b.batch, Mode::Eval, nullptr, nullptr);
    const auto expected = o["eval_logits"].get<std::vector<double>>();
    REQUIRE(logits.size() == expected.size());
    for (std::size_t i = 0; i < logits.size(); ++i) {
        CHECK(std::abs(logits[i] - expected[i]) < kLogitTol);
    }
}

TEST_CASE("backward pass and AdamW step match torch") {
    const auto o = oracle();
    const auto cfg = EncoderConfig::from_json(json::parse(read_text_file(kTiny / "config.json")));
    const auto tensors = load_safetensors(kTiny / "model.safetensors");
    auto enc = Encoder::from_tensors(cfg, tensors);
    auto head = ClassificationHead::from_tensors(tensors, cfg.seq_classif_dropout);
    const auto b = oracle_batch(o);
    Rng rng(1);
    EncoderCache ec;
    HeadCache hc;
    const auto hidden = enc.forward(b, Mode::Train, &rng, &ec);
    const auto logits = head.forward(cls_rows(hidden, b.batch, b.seq, cfg.dim), b.batch, Mode::Train, &rng, &hc);
    const auto targets = o["labels"].get<std::vector<std::int32_t>>();
    std::vector<float> dlogits(logits.size());
    const double loss = cross_entropy(logits, targets, head.num_labels(), dlogits);
    CHECK(std::abs(loss - o["loss"].get<double>()) < kLogitTol);
    const auto dcls = head.backward(hc, dlogits);
    enc.backward(ec, scatter_cls(dcls, b.batch, b.seq, cfg.dim));

    std::vector<Parameter*> params;
    for (auto& p : enc.parameters()) {
        params.push_back(&p);
    }
    for (auto& p : head.parameters()) {
        params.push_back(&p);
    }
    std::size_t compared = 0;
    for (auto* p : params) {
        INFO(p->name);
        REQUIRE(o["grads"].contains(p->name));
        const auto g = o["grads"][p->name].get<std::vector<double>>();
        REQUIRE(g.size() == p->grad.size());
        for (std::size_t i = 0; i < g.size(); ++i) {
            CHECK(std::abs(p->grad[i] - g[i]) <= kGradAbsTol + kGradRelTol * std::abs(g[i]));
        }
        ++compared;
    }
    CHECK(compared == o["grads"].size());

    AdamW opt({.lr = 1e-3, .weight_decay = 0.01});
    opt.step(params);
    for (auto* p : params) {
        INFO(p->name);
        const auto after = o["after_adamw"][p->name].get<std::vector<double>>();
        const auto g = o["grads"][p->name].get<std::vector<double>>();
        for (std::size_t i = 0; i < after.size(); ++i) {
            // Adam's first step is about lr * sign(g); the sign of a noise-level
            // gradient (e.g. key biases, which softmax ignores) is arbitrary.
            if (std::abs(g[i]) < kGradAbsTol) {
                continue;
            }
            CHECK(std::abs(p->value[i] - after[i]) <= kParamTol);
        }
    }
}

TEST_CASE("tokenizer matches the BERT reference tokenizer") {
    const auto o = oracle();
    auto vocab = std::make_shared<const Vocab>(Vocab::load(kTiny / "vocab.txt"));
    const WordPieceTokenizer tok(vocab, true);
    for (const auto& c : o["tokenizer"]) {
        const auto text = c["text"].get<std::string>();
        INFO(text);
        CHECK(tok.tokenize(text) == c["tokens"].get<std::vector<std::string>>());
        CHECK(tok.encode(text, 8) == c["ids"].get<std::vector<std::int32_t>>());
    }
}
