#pragma once

#include <cstddef>
#include <span>

// Dense kernels for the encoder. Row-major throughout; linear weights are
// stored [out, in] like torch.nn.Linear.
//
// The top-level functions are OpenMP-parallel. Each output element is owned by
// exactly one thread and reduced in a fixed order, so results do not depend on
// the thread count. The `reference` namespace holds straightforward serial
// versions (double accumulation) used as the test oracle and in the benchmark.

namespace sarc::nn::kernels {

struct AttentionShape {
    std::size_t batch = 0;
    std::size_t seq = 0;
    std::size_t heads = 0;
    std::size_t head_dim = 0;

    std::size_t dim() const { return heads * head_dim; }
    std::size_t rows() const { return batch * seq; }
    std::size_t prob_size() const { return batch * heads * seq * seq; }
};

// y[r, o] = b[o] + sum_i x[r, i] * w[o, i]; b may be empty.
void linear(std::span<const float> x, std::span<const float> w, std::span<const float> b, std::span<float> y,
            std::size_t rows, std::size_t in, std::size_t out);

// dx[r, i] += sum_o dy[r, o] * w[o, i]
void linear_grad_input(std::span<const float> dy, std::span<const float> w, std::span<float> dx, std::size_t rows,
                       std::size_t in, std::size_t out);

// dw[o, i] += sum_r dy[r, o] * x[r, i]; db[o] += sum_r dy[r, o] (db may be empty)
void linear_grad_params(std::span<const float> dy, std::span<const float> x, std::span<float> dw,
                        std::span<float> db, std::size_t rows, std::size_t in, std::size_t out);

// Per-row layer norm; stores mean and reciprocal std for the backward pass.
void layer_norm(std::span<const float> x, std::span<const float> gamma, std::span<const float> beta,
                std::span<float> y, std::span<float> mean, std::span<float> rstd, std::size_t rows, std::size_t dim,
                float eps);

// dx is overwritten; dgamma and dbeta accumulate.
void layer_norm_backward(std::span<const float> dy, std::span<const float> x, std::span<const float> gamma,
                         std::span<const float> mean, std::span<const float> rstd, std::span<float> dx,
                         std::span<float> dgamma, std::span<float> dbeta, std::size_t rows, std::size_t dim);

// Exact (erf) GELU.
void gelu(std::span<const float> x, std::span<float> y);
void gelu_backward(std::span<const float> x, std::span<const float> dy, std::span<float> dx);

// Scaled-dot-product attention over heads packed along the feature axis.
// q is pre-scaled by 1/sqrt(head_dim). key_mask[b * seq + t] is 1 for real
// tokens and 0 for padding. drop_scale (same size as probs, or empty) holds
// 0 or 1/(1-p) per attention weight. probs keeps the undropped softmax.
void attention(std::span<const float> q, std::span<const float> k, std::span<const float> v,
               std::span<const float> key_mask, std::span<const float> drop_scale, std::span<float> probs,
               std::span<float> ctx, const AttentionShape& shape);

// dq, dk, dv are overwritten.
void attention_backward(std::span<const float> dctx, std::span<const float> q, std::span<const float> k,
                        std::span<const float> v, std::span<const float> probs, std::span<const float> drop_scale,
                        std::span<float> dq, std::span<float> dk, std::span<float> dv, const AttentionShape& shape);

namespace reference {

void linear(std::span<const float> x, std::span<const float> w, std::span<const float> b, std::span<float> y,
            std::size_t rows, std::size_t in, std::size_t out);
void linear_grad_input(std::span<const float> dy, std::span<const float> w, std::span<float> dx, std::size_t rows,
                       std::size_t in, std::size_t out);
void linear_grad_params(std::span<const float> dy, std::span<const float> x, std::span<float> dw,
                        std::span<float> db, std::size_t rows, std::size_t in, std::size_t out);
void layer_norm(std::span<const float> x, std::span<const float> gamma, std::span<const float> beta,
                std::span<float> y, std::span<float> mean, std::span<float> rstd, std::size_t rows, std::size_t dim,
                float eps);
void layer_norm_backward(std::span<const float> dy, std::span<const float> x, std::span<const float> gamma,
                         std::span<const float> mean, std::span<const float> rstd, std::span<float> dx,
                         std::span<float> dgamma, std::span<float> dbeta, std::size_t rows, std::size_t dim);
void gelu(std::span<const float> x, std::span<float> y);
void gelu_backward(std::span<const float> x, std::span<const float> dy, std::span<float> dx);
void attention(std::span<const float> q, std::span<const float> k, std::span<const float> v,
               std::span<const float> key_mask, std::span<const float> drop_scale, std::span<float> probs,
               std::span<float> ctx, const AttentionShape& shape);
void attention_backward(std::span<const float> dctx, std::span<const float> q, std::span<const float> k,
                        std::span<const float> v, std::span<const float> probs, std::span<const float> drop_scale,
                        std::span<float> dq, std::span<float> dk, std::span<float> dv, const AttentionShape& shape);

}  // namespace reference

}  // namespace sarc::nn::kernels
