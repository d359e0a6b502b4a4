#include "sarcbench/nn/model.hpp"

#include <algorithm>
#include <cmath>

#include "sarcbench/errors.hpp"
#include "sarcbench/nn/kernels.hpp"

namespace sarc::nn {

namespace {

constexpr float kLayerNormEps = 1e-12f;
constexpr std::string_view kPrefix = "distilbert.";

std::size_t count(const std::vector<std::int64_t>& shape) {
    std::size_t n = 1;
    for (auto d : shape) {
        n *= static_cast<std::size_t>(d);
    }
    return n;
}

void fill_normal(std::vector<float>& v, float std, Rng& rng) {
    for (auto& x : v) {
        x = static_cast<float>(rng.normal() * std);
    }
}

void draw_dropout(std::vector<float>& mask, std::size_t n, float p, Mode mode, Rng* rng) {
    mask.assign(n, 1.0f);
    if (mode != Mode::Train || p <= 0.0f) {
        return;
    }
    if (rng == nullptr) {
        throw UsageError("training forward pass needs a random generator");
    }
    const float keep = 1.0f / (1.0f - p);
    for (auto& m : mask) {
        m = rng->uniform() < p ? 0.0f : keep;
    }
}

void multiply(std::span<float> x, std::span<const float> mask) {
    for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] *= mask[i];
    }
}

const Tensor& require(const TensorMap& tensors, const std::string& name, const std::vector<std::int64_t>& shape) {
    auto it = tensors.find(name);
    if (it == tensors.end() && name.starts_with(kPrefix)) {
        it = tensors.find(name.substr(kPrefix.size()));
    }
    if (it == tensors.end()) {
        throw DataError("weights lack tensor " + name);
    }
    if (it->second.shape != shape) {
        throw DataError("tensor " + name + " has an unexpected shape");
    }
    return it->second;
}

}  // namespace

void EncoderConfig::validate() const {
    if (vocab_size == 0 || dim == 0 || n_layers == 0 || n_heads == 0 || hidden_dim == 0 ||
        max_position_embeddings < 2) {
        throw UsageError("encoder dimensions must be positive");
    }
    if (dim % n_heads != 0) {
        throw UsageError("encoder dim must be divisible by n_heads");
    }
    for (float p : {dropout, attention_dropout, seq_classif_dropout}) {
        if (p < 0.0f || p >= 1.0f) {
            throw UsageError("dropout probabilities must lie in [0, 1)");
        }
    }
    if (pad_token_id < 0 || static_cast<std::size_t>(pad_token_id) >= vocab_size) {
        throw UsageError("pad_token_id is outside the vocabulary");
    }
}

json EncoderConfig::to_json() const {
    return json{{"model_type", "distilbert"},
                {"activation", "gelu"},
                {"sinusoidal_pos_embds", false},
                {"vocab_size", vocab_size},
                {"dim", dim},
                {"n_layers", n_layers},
                {"n_heads", n_heads},
                {"hidden_dim", hidden_dim},
                {"max_position_embeddings", max_position_embeddings},
                {"dropout", dropout},
                {"attention_dropout", attention_dropout},
                {"seq_classif_dropout", seq_classif_dropout},
                {"initializer_range", initializer_range},
                {"pad_token_id", pad_token_id}};
}

EncoderConfig EncoderConfig::from_json(const json& j) {
    EncoderConfig c;
    try {
        if (j.contains("model_type") && j.at("model_type") != "distilbert") {
            throw DataError("unsupported encoder type " + j.at("model_type").dump());
        }
        if (j.value("sinusoidal_pos_embds", false)) {
            throw DataError("sinusoidal position embeddings are not supported");
        }
        if (j.value("activation", std::string("gelu")) != "gelu") {
            throw DataError("only the gelu activation is supported");
        }
        c.vocab_size = j.value("vocab_size", c.vocab_size);
        c.dim = j.value("dim", c.dim);
        c.n_layers = j.value("n_layers", c.n_layers);
        c.n_heads = j.value("n_heads", c.n_heads);
        c.hidden_dim = j.value("hidden_dim", c.hidden_dim);
        c.max_position_embeddings = j.value("max_position_embeddings", c.max_position_embeddings);
        c.dropout = j.value("dropout", c.dropout);
        c.attention_dropout = j.value("attention_dropout", c.attention_dropout);
        c.seq_classif_dropout = j.value("seq_classif_dropout", c.seq_classif_dropout);
        c.initializer_range = j.value("initializer_range", c.initializer_range);
        c.pad_token_id = j.value("pad_token_id", c.pad_token_id);
    } catch (const json::exception& e) {
        throw DataError(std::string("bad encoder config: ") + e.what());
    }
    c.validate();
    return c;
}

Parameter::Parameter(std::string n, std::vector<std::int64_t> s)
    : name(std::move(n)), shape(std::move(s)), value(count(shape), 0.0f), grad(value.size(), 0.0f) {}

TokenBatch pad_batch(std::span<const std::vector<std::int32_t>> sequences, std::int32_t pad_id) {
    TokenBatch b;
    b.batch = sequences.size();
    for (const auto& s : sequences) {
        b.seq = std::max(b.seq, s.size());
    }
    b.ids.assign(b.batch * b.seq, pad_id);
    b.mask.assign(b.batch * b.seq, 0.0f);
    for (std::size_t i = 0; i < b.batch; ++i) {
        std::copy(sequences[i].begin(), sequences[i].end(), b.ids.begin() + static_cast<std::ptrdiff_t>(i * b.seq));
        std::fill_n(b.mask.begin() + static_cast<std::ptrdiff_t>(i * b.seq), sequences[i].size(), 1.0f);
    }
    return b;
}

Encoder::Encoder(EncoderConfig config) : config_(std::move(config)) {
    config_.validate();
    const auto D = static_cast<std::int64_t>(config_.dim);
    const auto H = static_cast<std::int64_t>(config_.hidden_dim);
    const std::string emb = std::string(kPrefix) + "embeddings.";
    params_.emplace_back(emb + "word_embeddings.weight",
                         std::vector<std::int64_t>{static_cast<std::int64_t>(config_.vocab_size), D});
    params_.emplace_back(emb + "position_embeddings.weight",
                         std::vector<std::int64_t>{static_cast<std::int64_t>(config_.max_position_embeddings), D});
    params_.emplace_back(emb + "LayerNorm.weight", std::vector<std::int64_t>{D});
    params_.emplace_back(emb + "LayerNorm.bias", std::vector<std::int64_t>{D});
    for (std::size_t l = 0; l < config_.n_layers; ++l) {
        const std::string base = std::string(kPrefix) + "transformer.layer." + std::to_string(l) + ".";
        for (const char* lin : {"q_lin", "k_lin", "v_lin", "out_lin"}) {
            params_.emplace_back(base + "attention." + lin + ".weight", std::vector<std::int64_t>{D, D});
            params_.emplace_back(base + "attention." + lin + ".bias", std::vector<std::int64_t>{D});
        }
        params_.emplace_back(base + "sa_layer_norm.weight", std::vector<std::int64_t>{D});
        params_.emplace_back(base + "sa_layer_norm.bias", std::vector<std::int64_t>{D});
        params_.emplace_back(base + "ffn.lin1.weight", std::vector<std::int64_t>{H, D});
        params_.emplace_back(base + "ffn.lin1.bias", std::vector<std::int64_t>{H});
        params_.emplace_back(base + "ffn.lin2.weight", std::vector<std::int64_t>{D, H});
        params_.emplace_back(base + "ffn.lin2.bias", std::vector<std::int64_t>{D});
        params_.emplace_back(base + "output_layer_norm.weight", std::vector<std::int64_t>{D});
        params_.emplace_back(base + "output_layer_norm.bias", std::vector<std::int64_t>{D});
    }
    for (auto& prm : params_) {
        if (prm.name.ends_with("LayerNorm.weight") || prm.name.ends_with("layer_norm.weight")) {
            std::fill(prm.value.begin(), prm.value.end(), 1.0f);
        }
    }
}

Encoder Encoder::random(const EncoderConfig& config, Rng& rng) {
    Encoder e(config);
    for (auto& prm : e.params_) {
        const bool is_norm = prm.name.find("LayerNorm") != std::string::npos ||
                             prm.name.find("layer_norm") != std::string::npos;
        if (!is_norm && prm.shape.size() == 2) {
            fill_normal(prm.value, config.initializer_range, rng);
        }
    }
    auto& word = e.params_[kWord].value;
    std::fill_n(word.begin() + static_cast<std::ptrdiff_t>(config.pad_token_id * config.dim), config.dim, 0.0f);
    return e;
}

Encoder Encoder::from_tensors(const EncoderConfig& config, const TensorMap& tensors) {
    Encoder e(config);
    for (auto& prm : e.params_) {
        prm.value = require(tensors, prm.name, prm.shape).data;
    }
    return e;
}

TensorMap Encoder::tensors() const {
    TensorMap out;
    for (const auto& prm : params_) {
        out.emplace(prm.name, Tensor{prm.shape, prm.value});
    }
    return out;
}

std::vector<float> Encoder::forward(const TokenBatch& batch, Mode mode, Rng* rng, EncoderCache* cache) const {
    const std::size_t B = batch.batch, S = batch.seq, D = config_.dim, H = config_.hidden_dim;
    const std::size_t rows = B * S;
    if (S > config_.max_position_embeddings) {
        throw UsageError("sequence longer than max_position_embeddings");
    }
    const kernels::AttentionShape shape{B, S, config_.n_heads, D / config_.n_heads};
    const float qscale = 1.0f / std::sqrt(static_cast<float>(shape.head_dim));

    EncoderCache local;
    EncoderCache& c = cache != nullptr ? *cache : local;
    c.ids = batch.ids;
    c.batch = B;
    c.seq = S;
    c.layers.assign(config_.n_layers, {});

    c.emb_sum.assign(rows * D, 0.0f);
    const auto& word = params_[kWord].value;
    const auto& pos = params_[kPos].value;
    for (std::size_t r = 0; r < rows; ++r) {
        const auto id = static_cast<std::size_t>(batch.ids[r]);
        if (id >= config_.vocab_size) {
            throw DataError("token id outside the vocabulary");
        }
        const std::size_t t = r % S;
        for (std::size_t d = 0; d < D; ++d) {
            c.emb_sum[r * D + d] = word[id * D + d] + pos[t * D + d];
        }
    }
    std::vector<float> h(rows * D);
    c.emb_mean.resize(rows);
    c.emb_rstd.resize(rows);
    kernels::layer_norm(c.emb_sum, params_[kEmbLnW].value, params_[kEmbLnB].value, h, c.emb_mean, c.emb_rstd, rows,
                        D, kLayerNormEps);
    draw_dropout(c.emb_drop, rows * D, config_.dropout, mode, rng);
    multiply(h, c.emb_drop);

    for (std::size_t l = 0; l < config_.n_layers; ++l) {
        LayerCache& lc = c.layers[l];
        lc.input = std::move(h);
        lc.q.resize(rows * D);
        lc.k.resize(rows * D);
        lc.v.resize(rows * D);
        kernels::linear(lc.input, p(l, QW).value, p(l, QB).value, lc.q, rows, D, D);
        kernels::linear(lc.input, p(l, KW).value, p(l, KB).value, lc.k, rows, D, D);
        kernels::linear(lc.input, p(l, VW).value, p(l, VB).value, lc.v, rows, D, D);
        for (auto& x : lc.q) {
            x *= qscale;
        }
        lc.probs.resize(shape.prob_size());
        lc.ctx.resize(rows * D);
        if (mode == Mode::Train && config_.attention_dropout > 0.0f) {
            draw_dropout(lc.attn_drop, shape.prob_size(), config_.attention_dropout, mode, rng);
        } else {
            lc.attn_drop.clear();
        }
        kernels::attention(lc.q, lc.k, lc.v, batch.mask, lc.attn_drop, lc.probs, lc.ctx, shape);

        lc.sa_sum.resize(rows * D);
        kernels::linear(lc.ctx, p(l, OW).value, p(l, OB).value, lc.sa_sum, rows, D, D);
        for (std::size_t i = 0; i < rows * D; ++i) {
            lc.sa_sum[i] += lc.input[i];
        }
        lc.sa_out.resize(rows * D);
        lc.sa_mean.resize(rows);
        lc.sa_rstd.resize(rows);
        kernels::layer_norm(lc.sa_sum, p(l, SaW).value, p(l, SaB).value, lc.sa_out, lc.sa_mean, lc.sa_rstd, rows, D,
                            kLayerNormEps);

        lc.f1.resize(rows * H);
        lc.g.resize(rows * H);
        kernels::linear(lc.sa_out, p(l, L1W).value, p(l, L1B).value, lc.f1, rows, D, H);
        kernels::gelu(lc.f1, lc.g);
        lc.out_sum.resize(rows * D);
        kernels::linear(lc.g, p(l, L2W).value, p(l, L2B).value, lc.out_sum, rows, H, D);
        draw_dropout(lc.ffn_drop, rows * D, config_.dropout, mode, rng);
        for (std::size_t i = 0; i < rows * D; ++i) {
            lc.out_sum[i] = lc.out_sum[i] * lc.ffn_drop[i] + lc.sa_out[i];
        }
        h.resize(rows * D);
        lc.out_mean.resize(rows);
        lc.out_rstd.resize(rows);
        kernels::layer_norm(lc.out_sum, p(l, OutW).value, p(l, OutB).value, h, lc.out_mean, lc.out_rstd, rows, D,
                            kLayerNormEps);
    }
    return h;
}

void Encoder::backward(const EncoderCache& c, std::span<const float> dhidden) {
    const std::size_t B = c.batch, S = c.seq, D = config_.dim, H = config_.hidden_dim;
    const std::size_t rows = B * S;
    const kernels::AttentionShape shape{B, S, config_.n_heads, D / config_.n_heads};
    const float qscale = 1.0f / std::sqrt(static_cast<float>(shape.head_dim));

    std::vector<float> dh(dhidden.begin(), dhidden.end());
    std::vector<float> dt(rows * D), dg(rows * H), df1(rows * H), dsa(rows * D), ds(rows * D), dctx(rows * D);
    std::vector<float> dq(rows * D), dk(rows * D), dv(rows * D);
    for (std::size_t l = config_.n_layers; l-- > 0;) {
        const LayerCache& lc = c.layers[l];
        kernels::layer_norm_backward(dh, lc.out_sum, p(l, OutW).value, lc.out_mean, lc.out_rstd, dt, p(l, OutW).grad,
                                     p(l, OutB).grad, rows, D);
        dsa = dt;
        multiply(dt, lc.ffn_drop);
        kernels::linear_grad_params(dt, lc.g, p(l, L2W).grad, p(l, L2B).grad, rows, H, D);
        std::fill(dg.begin(), dg.end(), 0.0f);
        kernels::linear_grad_input(dt, p(l, L2W).value, dg, rows, H, D);
        kernels::gelu_backward(lc.f1, dg, df1);
        kernels::linear_grad_params(df1, lc.sa_out, p(l, L1W).grad, p(l, L1B).grad, rows, D, H);
        kernels::linear_grad_input(df1, p(l, L1W).value, dsa, rows, D, H);

        kernels::layer_norm_backward(dsa, lc.sa_sum, p(l, SaW).value, lc.sa_mean, lc.sa_rstd, ds, p(l, SaW).grad,
                                     p(l, SaB).grad, rows, D);
        dh = ds;
        kernels::linear_grad_params(ds, lc.ctx, p(l, OW).grad, p(l, OB).grad, rows, D, D);
        std::fill(dctx.begin(), dctx.end(), 0.0f);
        kernels::linear_grad_input(ds, p(l, OW).value, dctx, rows, D, D);
        kernels::attention_backward(dctx, lc.q, lc.k, lc.v, lc.probs, lc.attn_drop, dq, dk, dv, shape);
        for (auto& x : dq) {
            x *= qscale;
        }
        kernels::linear_grad_params(dq, lc.input, p(l, QW).grad, p(l, QB).grad, rows, D, D);
        kernels::linear_grad_params(dk, lc.input, p(l, KW).grad, p(l, KB).grad, rows, D, D);
        kernels::linear_grad_params(dv, lc.input, p(l, VW).grad, p(l, VB).grad, rows, D, D);
        kernels::linear_grad_input(dq, p(l, QW).value, dh, rows, D, D);
        kernels::linear_grad_input(dk, p(l, KW).value, dh, rows, D, D);
        kernels::linear_grad_input(dv, p(l, VW).value, dh, rows, D, D);
    }

    multiply(dh, c.emb_drop);
    std::vector<float> dx(rows * D);
    kernels::layer_norm_backward(dh, c.emb_sum, params_[kEmbLnW].value, c.emb_mean, c.emb_rstd, dx,
                                 params_[kEmbLnW].grad, params_[kEmbLnB].grad, rows, D);
    auto& dword = params_[kWord].grad;
    auto& dpos = params_[kPos].grad;
    for (std::size_t r = 0; r < rows; ++r) {
        const auto id = c.ids[r];
        const std::size_t t = r % S;
        for (std::size_t d = 0; d < D; ++d) {
            dpos[t * D + d] += dx[r * D + d];
        }
        if (id == config_.pad_token_id) {
            continue;
        }
        for (std::size_t d = 0; d < D; ++d) {
            dword[static_cast<std::size_t>(id) * D + d] += dx[r * D + d];
        }
    }
}

ClassificationHead::ClassificationHead(std::size_t dim, std::size_t num_labels, float dropout)
    : dim_(dim), num_labels_(num_labels), dropout_(dropout) {
    if (num_labels < 2) {
        throw UsageError("num_labels must be at least 2");
    }
    const auto D = static_cast<std::int64_t>(dim);
    const auto L = static_cast<std::int64_t>(num_labels);
    params_.emplace_back("pre_classifier.weight", std::vector<std::int64_t>{D, D});
    params_.emplace_back("pre_classifier.bias", std::vector<std::int64_t>{D});
    params_.emplace_back("classifier.weight", std::vector<std::int64_t>{L, D});
    params_.emplace_back("classifier.bias", std::vector<std::int64_t>{L});
}

ClassificationHead ClassificationHead::random(std::size_t dim, std::size_t num_labels, float dropout, float init_std,
                                              Rng& rng) {
    ClassificationHead h(dim, num_labels, dropout);
    fill_normal(h.params_[0].value, init_std, rng);
    fill_normal(h.params_[2].value, init_std, rng);
    return h;
}

ClassificationHead ClassificationHead::from_tensors(const TensorMap& tensors, float dropout) {
    const auto pre = tensors.find("pre_classifier.weight");
    const auto cls = tensors.find("classifier.weight");
    if (pre == tensors.end() || cls == tensors.end() || pre->second.shape.size() != 2 ||
        cls->second.shape.size() != 2) {
        throw DataError("head weights lack pre_classifier/classifier matrices");
    }
    ClassificationHead h(static_cast<std::size_t>(pre->second.shape[1]),
                         static_cast<std::size_t>(cls->second.shape[0]), dropout);
    for (auto& prm : h.params_) {
        prm.value = require(tensors, prm.name, prm.shape).data;
    }
    return h;
}

TensorMap ClassificationHead::tensors() const {
    TensorMap out;
    for (const auto& prm : params_) {
        out.emplace(prm.name, Tensor{prm.shape, prm.value});
    }
    return out;
}

void ClassificationHead::reset_classifier(std::size_t num_labels, float init_std, Rng& rng) {
    if (num_labels < 2) {
        throw UsageError("num_labels must be at least 2");
    }
    num_labels_ = num_labels;
    const auto D = static_cast<std::int64_t>(dim_);
    const auto L = static_cast<std::int64_t>(num_labels);
    params_[2] = Parameter("classifier.weight", {L, D});
    params_[3] = Parameter("classifier.bias", {L});
    fill_normal(params_[2].value, init_std, rng);
}

std::vector<float> ClassificationHead::forward(std::span<const float> features, std::size_t batch, Mode mode,
                                               Rng* rng, HeadCache* cache) const {
    HeadCache local;
    HeadCache& c = cache != nullptr ? *cache : local;
    c.batch = batch;
    c.x.assign(features.begin(), features.end());
    c.z.resize(batch * dim_);
    kernels::linear(c.x, params_[0].value, params_[1].value, c.z, batch, dim_, dim_);
    draw_dropout(c.drop, batch * dim_, dropout_, mode, rng);
    c.r.resize(batch * dim_);
    for (std::size_t i = 0; i < c.r.size(); ++i) {
        c.r[i] = std::max(c.z[i], 0.0f) * c.drop[i];
    }
    std::vector<float> logits(batch * num_labels_);
    kernels::linear(c.r, params_[2].value, params_[3].value, logits, batch, dim_, num_labels_);
    return logits;
}

std::vector<float> ClassificationHead::backward(const HeadCache& c, std::span<const float> dlogits) {
    kernels::linear_grad_params(dlogits, c.r, params_[2].grad, params_[3].grad, c.batch, dim_, num_labels_);
    std::vector<float> dz(c.batch * dim_, 0.0f);
    kernels::linear_grad_input(dlogits, params_[2].value, dz, c.batch, dim_, num_labels_);
    for (std::size_t i = 0; i < dz.size(); ++i) {
        dz[i] = c.z[i] > 0.0f ? dz[i] * c.drop[i] : 0.0f;
    }
    kernels::linear_grad_params(dz, c.x, params_[0].grad, params_[1].grad, c.batch, dim_, dim_);
    std::vector<float> dx(c.batch * dim_, 0.0f);
    kernels::linear_grad_input(dz, params_[0].value, dx, c.batch, dim_, dim_);
    return dx;
}

std::vector<float> cls_rows(std::span<const float> hidden, std::size_t batch, std::size_t seq, std::size_t dim) {
    std::vector<float> out(batch * dim);
    for (std::size_t b = 0; b < batch; ++b) {
        std::copy_n(hidden.begin() + static_cast<std::ptrdiff_t>(b * seq * dim), dim,
                    out.begin() + static_cast<std::ptrdiff_t>(b * dim));
    }
    return out;
}

std::vector<float> scatter_cls(std::span<const float> dcls, std::size_t batch, std::size_t seq, std::size_t dim) {
    std::vector<float> out(batch * seq * dim, 0.0f);
    for (std::size_t b = 0; b < batch; ++b) {
        std::copy_n(dcls.begin() + static_cast<std::ptrdiff_t>(b * dim), dim,
                    out.begin() + static_cast<std::ptrdiff_t>(b * seq * dim));
    }
    return out;
}

std::vector<float> softmax_rows(std::span<const float> logits, std::size_t rows, std::size_t cols) {
    std::vector<float> out(rows * cols);
    for (std::size_t r = 0; r < rows; ++r) {
        const auto row = logits.subspan(r * cols, cols);
        const float mx = *std::max_element(row.begin(), row.end());
        double sum = 0.0;
        for (std::size_t j = 0; j < cols; ++j) {
            sum += std::exp(static_cast<double>(row[j] - mx));
        }
        for (std::size_t j = 0; j < cols; ++j) {
            out[r * cols + j] = static_cast<float>(std::exp(static_cast<double>(row[j] - mx)) / sum);
        }
    }
    return out;
}

double cross_entropy(std::span<const float> logits, std::span<const std::int32_t> targets, std::size_t cols,
                     std::span<float> dlogits) {
    const std::size_t rows = targets.size();
    if (rows == 0) {
        return 0.0;
    }
    const auto probs = softmax_rows(logits, rows, cols);
    double loss = 0.0;
    const float inv = 1.0f / static_cast<float>(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        const auto t = static_cast<std::size_t>(targets[r]);
        if (t >= cols) {
            throw UsageError("target label outside the head's range");
        }
        loss -= std::log(std::max(static_cast<double>(probs[r * cols + t]), 1e-300));
        for (std::size_t j = 0; j < cols; ++j) {
            dlogits[r * cols + j] = (probs[r * cols + j] - (j == t ? 1.0f : 0.0f)) * inv;
        }
    }
    return loss / static_cast<double>(rows);
}

void AdamW::step(std::span<Parameter* const> params) {
    if (state_.empty()) {
        state_.resize(params.size());
        for (std::size_t i = 0; i < params.size(); ++i) {
            state_[i].m.assign(params[i]->value.size(), 0.0f);
            state_[i].v.assign(params[i]->value.size(), 0.0f);
        }
    }
    if (state_.size() != params.size()) {
        throw UsageError("optimizer parameter list changed between steps");
    }
    ++t_;
    const double bc1 = 1.0 - std::pow(options_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(options_.beta2, static_cast<double>(t_));
    const double step_size = options_.lr / bc1;
    const double sqrt_bc2 = std::sqrt(bc2);
    const auto b1 = static_cast<float>(options_.beta1);
    const auto b2 = static_cast<float>(options_.beta2);
    const auto decay = static_cast<float>(1.0 - options_.lr * options_.weight_decay);
    for (std::size_t i = 0; i < params.size(); ++i) {
        auto& prm = *params[i];
        auto& st = state_[i];
        for (std::size_t j = 0; j < prm.value.size(); ++j) {
            const float g = prm.grad[j];
            prm.value[j] *= decay;
            st.m[j] = b1 * st.m[j] + (1.0f - b1) * g;
            st.v[j] = b2 * st.v[j] + (1.0f - b2) * g * g;
            const double denom = std::sqrt(static_cast<double>(st.v[j])) / sqrt_bc2 + options_.eps;
            prm.value[j] -= static_cast<float>(step_size * st.m[j] / denom);
        }
    }
}

void zero_grad(std::span<Parameter* const> params) {
    for (auto* prm : params) {
        std::fill(prm->grad.begin(), prm->grad.end(), 0.0f);
    }
}

double clip_grad_norm(std::span<Parameter* const> params, double max_norm) {
    double sq = 0.0;
    for (const auto* prm : params) {
        for (float g : prm->grad) {
            sq += static_cast<double>(g) * g;
        }
    }
    const double norm = std::sqrt(sq);
    if (max_norm > 0.0 && norm > max_norm) {
        const auto scale = static_cast<float>(max_norm / (norm + 1e-6));
        for (auto* prm : params) {
            for (auto& g : prm->grad) {
                g *= scale;
            }
        }
    }
    return norm;
}

}  // namespace sarc::nn
