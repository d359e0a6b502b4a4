#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sarcbench/io.hpp"
#include "sarcbench/nn/tensor.hpp"
#include "sarcbench/rng.hpp"

namespace sarc::nn {

// Field names follow the Hugging Face DistilBERT config.json.
struct EncoderConfig {
    std::size_t vocab_size = 30522;
    std::size_t dim = 768;
    std::size_t n_layers = 6;
    std::size_t n_heads = 12;
    std::size_t hidden_dim = 3072;
    std::size_t max_position_embeddings = 512;
    float dropout = 0.1f;
    float attention_dropout = 0.1f;
    float seq_classif_dropout = 0.2f;
    float initializer_range = 0.02f;
    std::int32_t pad_token_id = 0;

    void validate() const;
    json to_json() const;
    static EncoderConfig from_json(const json& j);
};

struct Parameter {
    std::string name;
    std::vector<std::int64_t> shape;
    std::vector<float> value;
    std::vector<float> grad;

    Parameter(std::string n, std::vector<std::int64_t> s);
};

enum class Mode { Train, Eval };

// Right-padded token ids with a 1/0 attention mask.
struct TokenBatch {
    std::size_t batch = 0;
    std::size_t seq = 0;
    std::vector<std::int32_t> ids;
    std::vector<float> mask;
};

TokenBatch pad_batch(std::span<const std::vector<std::int32_t>> sequences, std::int32_t pad_id);

struct LayerCache {
    std::vector<float> input, q, k, v, probs, attn_drop, ctx;
    std::vector<float> sa_sum, sa_out, sa_mean, sa_rstd;
    std::vector<float> f1, g, ffn_drop;
    std::vector<float> out_sum, out_mean, out_rstd;
};

struct EncoderCache {
    std::vector<std::int32_t> ids;
    std::size_t batch = 0;
    std::size_t seq = 0;
    std::vector<float> emb_sum, emb_mean, emb_rstd, emb_drop;
    std::vector<LayerCache> layers;
};

// DistilBERT-layout transformer encoder (post-LN blocks, GELU feed-forward,
// learned position embeddings). Parameters carry the Hugging Face tensor
// names under the "distilbert." prefix.
class Encoder {
public:
    explicit Encoder(EncoderConfig config);

    static Encoder random(const EncoderConfig& config, Rng& rng);
    // Accepts names with or without the "distilbert." prefix; extra tensors
    // (e.g. a masked-LM head) are ignored. Missing or misshapen tensors throw.
    static Encoder from_tensors(const EncoderConfig& config, const TensorMap& tensors);
    TensorMap tensors() const;

    const EncoderConfig& config() const { return config_; }
    std::vector<Parameter>& parameters() { return params_; }
    const std::vector<Parameter>& parameters() const { return params_; }

    // Hidden states [batch * seq, dim]. In Train mode dropout masks are drawn
    // from rng; cache (if given) receives what backward needs.
    std::vector<float> forward(const TokenBatch& batch, Mode mode, Rng* rng, EncoderCache* cache) const;
    // Accumulates parameter gradients from d(hidden states).
    void backward(const EncoderCache& cache, std::span<const float> dhidden);

private:
    enum Slot : std::size_t {
        QW, QB, KW, KB, VW, VB, OW, OB, SaW, SaB, L1W, L1B, L2W, L2B, OutW, OutB, kSlots
    };
    static constexpr std::size_t kWord = 0, kPos = 1, kEmbLnW = 2, kEmbLnB = 3, kFirstLayer = 4;

    Parameter& p(std::size_t layer, Slot s) { return params_[kFirstLayer + layer * kSlots + s]; }
    const Parameter& p(std::size_t layer, Slot s) const { return params_[kFirstLayer + layer * kSlots + s]; }

    EncoderConfig config_;
    std::vector<Parameter> params_;
};

struct HeadCache {
    std::size_t batch = 0;
    std::vector<float> x, z, drop, r;
};

// pre_classifier (dim -> dim) + ReLU + dropout + classifier (dim -> labels),
// applied to the first ([CLS]) position.
class ClassificationHead {
public:
    ClassificationHead(std::size_t dim, std::size_t num_labels, float dropout);

    static ClassificationHead random(std::size_t dim, std::size_t num_labels, float dropout, float init_std, Rng& rng);
    static ClassificationHead from_tensors(const TensorMap& tensors, float dropout);
    TensorMap tensors() const;

    // Re-creates only the final classifier layer at a new label count.
    void reset_classifier(std::size_t num_labels, float init_std, Rng& rng);

    std::size_t num_labels() const { return num_labels_; }
    std::size_t dim() const { return dim_; }
    std::vector<Parameter>& parameters() { return params_; }
    const std::vector<Parameter>& parameters() const { return params_; }

    std::vector<float> forward(std::span<const float> features, std::size_t batch, Mode mode, Rng* rng,
                               HeadCache* cache) const;
    // Accumulates gradients and returns d(features).
    std::vector<float> backward(const HeadCache& cache, std::span<const float> dlogits);

private:
    std::size_t dim_;
    std::size_t num_labels_;
    float dropout_;
    std::vector<Parameter> params_;  // pre_classifier.{weight,bias}, classifier.{weight,bias}
};

// First-position rows of [batch * seq, dim] hidden states.
std::vector<float> cls_rows(std::span<const float> hidden, std::size_t batch, std::size_t seq, std::size_t dim);
// Scatter d(cls rows) back into a zeroed [batch * seq, dim] buffer.
std::vector<float> scatter_cls(std::span<const float> dcls, std::size_t batch, std::size_t seq, std::size_t dim);

std::vector<float> softmax_rows(std::span<const float> logits, std::size_t rows, std::size_t cols);

// Mean cross-entropy over rows; writes d(loss)/d(logits) into dlogits.
double cross_entropy(std::span<const float> logits, std::span<const std::int32_t> targets, std::size_t cols,
                     std::span<float> dlogits);

// Decoupled weight decay Adam, matching torch.optim.AdamW.
class AdamW {
public:
    struct Options {
        double lr = 1e-3;
        double beta1 = 0.9;
        double beta2 = 0.999;
        double eps = 1e-8;
        double weight_decay = 0.01;
    };

    explicit AdamW(Options options) : options_(options) {}

    void step(std::span<Parameter* const> params);
    std::size_t steps() const { return t_; }

private:
    struct Moments {
        std::vector<float> m, v;
    };
    Options options_;
    std::size_t t_ = 0;
    std::vector<Moments> state_;
};

void zero_grad(std::span<Parameter* const> params);
// Scales gradients so their global L2 norm is at most max_norm; returns the norm before scaling.
double clip_grad_norm(std::span<Parameter* const> params, double max_norm);

}  // namespace sarc::nn
