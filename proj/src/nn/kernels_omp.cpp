#include "sarcbench/nn/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <vector>

namespace sarc::nn::kernels {

namespace {

using idx_t = std::int64_t;

// Eight independent partial sums, combined pairwise in a fixed order.
inline float dot(const float* a, const float* b, std::size_t n) {
    float acc[8] = {0, 0, 0, 0, 0, 0, 0, 0};
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        for (int l = 0; l < 8; ++l) {
            acc[l] += a[i + l] * b[i + l];
        }
    }
    float tail = 0.0f;
    for (; i < n; ++i) {
        tail += a[i] * b[i];
    }
    return ((acc[0] + acc[4]) + (acc[1] + acc[5])) + ((acc[2] + acc[6]) + (acc[3] + acc[7])) + tail;
}

inline void axpy(float alpha, const float* x, float* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        y[i] += alpha * x[i];
    }
}

constexpr float kInvSqrt2 = 0.70710678118654752440f;
constexpr float kInvSqrt2Pi = 0.39894228040143267794f;

}  // namespace

void linear(std::span<const float> x, std::span<const float> w, std::span<const float> b, std::span<float> y,
            std::size_t rows, std::size_t in, std::size_t out) {
    const float* xp = x.data();
    const float* wp = w.data();
    float* yp = y.data();
    const bool has_bias = !b.empty();
    const auto total = static_cast<idx_t>(rows * out);
#pragma omp parallel for schedule(static)
    for (idx_t e = 0; e < total; ++e) {
        const auto r = static_cast<std::size_t>(e) / out;
        const auto o = static_cast<std::size_t>(e) % out;
        const float acc = dot(xp + r * in, wp + o * in, in);
        yp[r * out + o] = has_bias ? b[o] + acc : acc;
    }
}

void linear_grad_input(std::span<const float> dy, std::span<const float> w, std::span<float> dx, std::size_t rows,
                       std::size_t in, std::size_t out) {
    const float* dyp = dy.data();
    const float* wp = w.data();
    float* dxp = dx.data();
#pragma omp parallel for schedule(static)
    for (idx_t r = 0; r < static_cast<idx_t>(rows); ++r) {
        float* row = dxp + static_cast<std::size_t>(r) * in;
        const float* g = dyp + static_cast<std::size_t>(r) * out;
        for (std::size_t o = 0; o < out; ++o) {
            if (g[o] != 0.0f) {
                axpy(g[o], wp + o * in, row, in);
            }
        }
    }
}

void linear_grad_params(std::span<const float> dy, std::span<const float> x, std::span<float> dw,
                        std::span<float> db, std::size_t rows, std::size_t in, std::size_t out) {
    const float* dyp = dy.data();
    const float* xp = x.data();
    float* dwp = dw.data();
    const bool has_bias = !db.empty();
#pragma omp parallel for schedule(static)
    for (idx_t o = 0; o < static_cast<idx_t>(out); ++o) {
        const auto oo = static_cast<std::size_t>(o);
        float* grow = dwp + oo * in;
        float bias_acc = 0.0f;
        for (std::size_t r = 0; r < rows; ++r) {
            const float g = dyp[r * out + oo];
            bias_acc += g;
            if (g != 0.0f) {
                axpy(g, xp + r * in, grow, in);
            }
        }
        if (has_bias) {
            db[oo] += bias_acc;
        }
    }
}

void layer_norm(std::span<const float> x, std::span<const float> gamma, std::span<const float> beta,
                std::span<float> y, std::span<float> mean, std::span<float> rstd, std::size_t rows, std::size_t dim,
                float eps) {
#pragma omp parallel for schedule(static)
    for (idx_t r = 0; r < static_cast<idx_t>(rows); ++r) {
        const auto rr = static_cast<std::size_t>(r);
        const float* row = x.data() + rr * dim;
        double sum = 0.0;
        for (std::size_t j = 0; j < dim; ++j) {
            sum += row[j];
        }
        const double mu = sum / static_cast<double>(dim);
        double var = 0.0;
        for (std::size_t j = 0; j < dim; ++j) {
            const double d = row[j] - mu;
            var += d * d;
        }
        var /= static_cast<double>(dim);
        const auto inv = static_cast<float>(1.0 / std::sqrt(var + static_cast<double>(eps)));
        const auto m = static_cast<float>(mu);
        mean[rr] = m;
        rstd[rr] = inv;
        float* out = y.data() + rr * dim;
        for (std::size_t j = 0; j < dim; ++j) {
            out[j] = (row[j] - m) * inv * gamma[j] + beta[j];
        }
    }
}

void layer_norm_backward(std::span<const float> dy, std::span<const float> x, std::span<const float> gamma,
                         std::span<const float> mean, std::span<const float> rstd, std::span<float> dx,
                         std::span<float> dgamma, std::span<float> dbeta, std::size_t rows, std::size_t dim) {
#pragma omp parallel
    {
#pragma omp for schedule(static)
        for (idx_t r = 0; r < static_cast<idx_t>(rows); ++r) {
            const auto rr = static_cast<std::size_t>(r);
            const float* xr = x.data() + rr * dim;
            const float* g = dy.data() + rr * dim;
            float* out = dx.data() + rr * dim;
            const float m = mean[rr];
            const float inv = rstd[rr];
            double sum_dxhat = 0.0;
            double sum_dxhat_xhat = 0.0;
            for (std::size_t j = 0; j < dim; ++j) {
                const float xhat = (xr[j] - m) * inv;
                const float dxhat = g[j] * gamma[j];
                sum_dxhat += dxhat;
                sum_dxhat_xhat += static_cast<double>(dxhat) * xhat;
            }
            const auto mean_dxhat = static_cast<float>(sum_dxhat / static_cast<double>(dim));
            const auto mean_dxhat_xhat = static_cast<float>(sum_dxhat_xhat / static_cast<double>(dim));
            for (std::size_t j = 0; j < dim; ++j) {
                const float xhat = (xr[j] - m) * inv;
                const float dxhat = g[j] * gamma[j];
                out[j] = inv * (dxhat - mean_dxhat - xhat * mean_dxhat_xhat);
            }
        }
#pragma omp for schedule(static)
        for (idx_t j = 0; j < static_cast<idx_t>(dim); ++j) {
            const auto jj = static_cast<std::size_t>(j);
            float acc_gamma = 0.0f;
            float acc_beta = 0.0f;
            for (std::size_t r = 0; r < rows; ++r) {
                const float g = dy[r * dim + jj];
                acc_gamma += g * (x[r * dim + jj] - mean[r]) * rstd[r];
                acc_beta += g;
            }
            dgamma[jj] += acc_gamma;
            dbeta[jj] += acc_beta;
        }
    }
}

void gelu(std::span<const float> x, std::span<float> y) {
#pragma omp parallel for schedule(static)
    for (idx_t i = 0; i < static_cast<idx_t>(x.size()); ++i) {
        const float v = x[static_cast<std::size_t>(i)];
        y[static_cast<std::size_t>(i)] = 0.5f * v * (1.0f + std::erf(v * kInvSqrt2));
    }
}

void gelu_backward(std::span<const float> x, std::span<const float> dy, std::span<float> dx) {
#pragma omp parallel for schedule(static)
    for (idx_t i = 0; i < static_cast<idx_t>(x.size()); ++i) {
        const auto ii = static_cast<std::size_t>(i);
        const float v = x[ii];
        const float cdf = 0.5f * (1.0f + std::erf(v * kInvSqrt2));
        const float pdf = kInvSqrt2Pi * std::exp(-0.5f * v * v);
        dx[ii] = dy[ii] * (cdf + v * pdf);
    }
}

void attention(std::span<const float> q, std::span<const float> k, std::span<const float> v,
               std::span<const float> key_mask, std::span<const float> drop_scale, std::span<float> probs,
               std::span<float> ctx, const AttentionShape& s) {
    const std::size_t dim = s.dim();
    const bool dropout = !drop_scale.empty();
#pragma omp parallel for schedule(static)
    for (idx_t bh = 0; bh < static_cast<idx_t>(s.batch * s.heads); ++bh) {
        const std::size_t b = static_cast<std::size_t>(bh) / s.heads;
        const std::size_t h = static_cast<std::size_t>(bh) % s.heads;
        const std::size_t col = h * s.head_dim;
        float* p_base = probs.data() + static_cast<std::size_t>(bh) * s.seq * s.seq;
        for (std::size_t i = 0; i < s.seq; ++i) {
            const float* qi = q.data() + (b * s.seq + i) * dim + col;
            float* p = p_base + i * s.seq;
            float mx = -std::numeric_limits<float>::infinity();
            for (std::size_t j = 0; j < s.seq; ++j) {
                if (key_mask[b * s.seq + j] == 0.0f) {
                    p[j] = 0.0f;
                    continue;
                }
                p[j] = dot(qi, k.data() + (b * s.seq + j) * dim + col, s.head_dim);
                mx = std::max(mx, p[j]);
            }
            float denom = 0.0f;
            for (std::size_t j = 0; j < s.seq; ++j) {
                if (key_mask[b * s.seq + j] != 0.0f) {
                    p[j] = std::exp(p[j] - mx);
                    denom += p[j];
                }
            }
            const float inv = denom > 0.0f ? 1.0f / denom : 0.0f;
            float* out = ctx.data() + (b * s.seq + i) * dim + col;
            std::fill(out, out + s.head_dim, 0.0f);
            const float* ds = dropout ? drop_scale.data() + static_cast<std::size_t>(bh) * s.seq * s.seq + i * s.seq
                                      : nullptr;
            for (std::size_t j = 0; j < s.seq; ++j) {
                p[j] *= inv;
                const float weight = dropout ? p[j] * ds[j] : p[j];
                if (weight != 0.0f) {
                    axpy(weight, v.data() + (b * s.seq + j) * dim + col, out, s.head_dim);
                }
            }
        }
    }
}

void attention_backward(std::span<const float> dctx, std::span<const float> q, std::span<const float> k,
                        std::span<const float> v, std::span<const float> probs, std::span<const float> drop_scale,
                        std::span<float> dq, std::span<float> dk, std::span<float> dv, const AttentionShape& s) {
    const std::size_t dim = s.dim();
    const bool dropout = !drop_scale.empty();
#pragma omp parallel for schedule(static)
    for (idx_t bh = 0; bh < static_cast<idx_t>(s.batch * s.heads); ++bh) {
        const std::size_t b = static_cast<std::size_t>(bh) / s.heads;
        const std::size_t h = static_cast<std::size_t>(bh) % s.heads;
        const std::size_t col = h * s.head_dim;
        const float* p_base = probs.data() + static_cast<std::size_t>(bh) * s.seq * s.seq;
        const float* ds_base = dropout ? drop_scale.data() + static_cast<std::size_t>(bh) * s.seq * s.seq : nullptr;
        for (std::size_t t = 0; t < s.seq; ++t) {
            std::fill_n(dq.data() + (b * s.seq + t) * dim + col, s.head_dim, 0.0f);
            std::fill_n(dk.data() + (b * s.seq + t) * dim + col, s.head_dim, 0.0f);
            std::fill_n(dv.data() + (b * s.seq + t) * dim + col, s.head_dim, 0.0f);
        }
        std::vector<float> dscore(s.seq);
        for (std::size_t i = 0; i < s.seq; ++i) {
            const float* p = p_base + i * s.seq;
            const float* ds = dropout ? ds_base + i * s.seq : nullptr;
            const float* g = dctx.data() + (b * s.seq + i) * dim + col;
            float weighted = 0.0f;
            for (std::size_t j = 0; j < s.seq; ++j) {
                if (p[j] == 0.0f) {
                    dscore[j] = 0.0f;
                    continue;
                }
                const float scale = dropout ? ds[j] : 1.0f;
                // dv_j += (p_ij * scale) * dctx_i
                if (scale != 0.0f) {
                    axpy(p[j] * scale, g, dv.data() + (b * s.seq + j) * dim + col, s.head_dim);
                }
                const float dp = scale == 0.0f ? 0.0f : dot(g, v.data() + (b * s.seq + j) * dim + col, s.head_dim) * scale;
                dscore[j] = dp;
                weighted += p[j] * dp;
            }
            float* dqi = dq.data() + (b * s.seq + i) * dim + col;
            const float* qi = q.data() + (b * s.seq + i) * dim + col;
            for (std::size_t j = 0; j < s.seq; ++j) {
                if (p[j] == 0.0f) {
                    continue;
                }
                const float d = p[j] * (dscore[j] - weighted);
                if (d != 0.0f) {
                    axpy(d, k.data() + (b * s.seq + j) * dim + col, dqi, s.head_dim);
                    axpy(d, qi, dk.data() + (b * s.seq + j) * dim + col, s.head_dim);
                }
            }
        }
    }
}

}  // namespace sarc::nn::kernels
