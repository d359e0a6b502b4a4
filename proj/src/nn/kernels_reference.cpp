#include <cmath>
#include <vector>

#include "sarcbench/nn/kernels.hpp"

namespace sarc::nn::kernels::reference {

void linear(std::span<const float> x, std::span<const float> w, std::span<const float> b, std::span<float> y,
            std::size_t rows, std::size_t in, std::size_t out) {
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t o = 0; o < out; ++o) {
            double acc = b.empty() ? 0.0 : b[o];
            for (std::size_t i = 0; i < in; ++i) {
                acc += static_cast<double>(x[r * in + i]) * w[o * in + i];
            }
            y[r * out + o] = static_cast<float>(acc);
        }
    }
}

void linear_grad_input(std::span<const float> dy, std::span<const float> w, std::span<float> dx, std::size_t rows,
                       std::size_t in, std::size_t out) {
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t i = 0; i < in; ++i) {
            double acc = 0.0;
            for (std::size_t o = 0; o < out; ++o) {
                acc += static_cast<double>(dy[r * out + o]) * w[o * in + i];
            }
            dx[r * in + i] += static_cast<float>(acc);
        }
    }
}

void linear_grad_params(std::span<const float> dy, std::span<const float> x, std::span<float> dw,
                        std::span<float> db, std::size_t rows, std::size_t in, std::size_t out) {
    for (std::size_t o = 0; o < out; ++o) {
        for (std::size_t i = 0; i < in; ++i) {
            double acc = 0.0;
            for (std::size_t r = 0; r < rows; ++r) {
                acc += static_cast<double>(dy[r * out + o]) * x[r * in + i];
            }
            dw[o * in + i] += static_cast<float>(acc);
        }
        if (!db.empty()) {
            double acc = 0.0;
            for (std::size_t r = 0; r < rows; ++r) {
                acc += dy[r * out + o];
            }
            db[o] += static_cast<float>(acc);
        }
    }
}

void layer_norm(std::span<const float> x, std::span<const float> gamma, std::span<const float> beta,
                std::span<float> y, std::span<float> mean, std::span<float> rstd, std::size_t rows, std::size_t dim,
                float eps) {
    for (std::size_t r = 0; r < rows; ++r) {
        double mu = 0.0;
        for (std::size_t j = 0; j < dim; ++j) {
            mu += x[r * dim + j];
        }
        mu /= static_cast<double>(dim);
        double var = 0.0;
        for (std::size_t j = 0; j < dim; ++j) {
            var += (x[r * dim + j] - mu) * (x[r * dim + j] - mu);
        }
        var /= static_cast<double>(dim);
        const double inv = 1.0 / std::sqrt(var + eps);
        mean[r] = static_cast<float>(mu);
        rstd[r] = static_cast<float>(inv);
        for (std::size_t j = 0; j < dim; ++j) {
            y[r * dim + j] = static_cast<float>((x[r * dim + j] - mu) * inv * gamma[j] + beta[j]);
        }
    }
}

void layer_norm_backward(std::span<const float> dy, std::span<const float> x, std::span<const float> gamma,
                         std::span<const float> mean, std::span<const float> rstd, std::span<float> dx,
                         std::span<float> dgamma, std::span<float> dbeta, std::size_t rows, std::size_t dim) {
    for (std::size_t r = 0; r < rows; ++r) {
        std::vector<double> xhat(dim);
        std::vector<double> dxhat(dim);
        double s1 = 0.0;
        double s2 = 0.0;
        for (std::size_t j = 0; j < dim; ++j) {
            xhat[j] = (static_cast<double>(x[r * dim + j]) - mean[r]) * rstd[r];
            dxhat[j] = static_cast<double>(dy[r * dim + j]) * gamma[j];
            s1 += dxhat[j];
            s2 += dxhat[j] * xhat[j];
            dgamma[j] += static_cast<float>(dy[r * dim + j] * xhat[j]);
            dbeta[j] += dy[r * dim + j];
        }
        const double n = static_cast<double>(dim);
        for (std::size_t j = 0; j < dim; ++j) {
            dx[r * dim + j] = static_cast<float>(rstd[r] * (dxhat[j] - s1 / n - xhat[j] * s2 / n));
        }
    }
}

void gelu(std::span<const float> x, std::span<float> y) {
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double v = x[i];
        y[i] = static_cast<float>(0.5 * v * (1.0 + std::erf(v / std::sqrt(2.0))));
    }
}

void gelu_backward(std::span<const float> x, std::span<const float> dy, std::span<float> dx) {
    const double inv_sqrt_2pi = 1.0 / std::sqrt(2.0 * 3.14159265358979323846);
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double v = x[i];
        const double cdf = 0.5 * (1.0 + std::erf(v / std::sqrt(2.0)));
        dx[i] = static_cast<float>(dy[i] * (cdf + v * inv_sqrt_2pi * std::exp(-0.5 * v * v)));
    }
}

void attention(std::span<const float> q, std::span<const float> k, std::span<const float> v,
               std::span<const float> key_mask, std::span<const float> drop_scale, std::span<float> probs,
               std::span<float> ctx, const AttentionShape& s) {
    const std::size_t dim = s.dim();
    for (std::size_t b = 0; b < s.batch; ++b) {
        for (std::size_t h = 0; h < s.heads; ++h) {
            for (std::size_t i = 0; i < s.seq; ++i) {
                std::vector<double> score(s.seq, 0.0);
                double mx = -1e300;
                for (std::size_t j = 0; j < s.seq; ++j) {
                    if (key_mask[b * s.seq + j] == 0.0f) {
                        continue;
                    }
                    double acc = 0.0;
                    for (std::size_t d = 0; d < s.head_dim; ++d) {
                        acc += static_cast<double>(q[(b * s.seq + i) * dim + h * s.head_dim + d]) *
                               k[(b * s.seq + j) * dim + h * s.head_dim + d];
                    }
                    score[j] = acc;
                    mx = std::max(mx, acc);
                }
                double denom = 0.0;
                for (std::size_t j = 0; j < s.seq; ++j) {
                    if (key_mask[b * s.seq + j] != 0.0f) {
                        score[j] = std::exp(score[j] - mx);
                        denom += score[j];
                    }
                }
                const std::size_t pbase = ((b * s.heads + h) * s.seq + i) * s.seq;
                for (std::size_t j = 0; j < s.seq; ++j) {
                    probs[pbase + j] = key_mask[b * s.seq + j] == 0.0f ? 0.0f : static_cast<float>(score[j] / denom);
                }
                for (std::size_t d = 0; d < s.head_dim; ++d) {
                    double acc = 0.0;
                    for (std::size_t j = 0; j < s.seq; ++j) {
                        const double scale = drop_scale.empty() ? 1.0 : drop_scale[pbase + j];
                        acc += static_cast<double>(probs[pbase + j]) * scale *
                               v[(b * s.seq + j) * dim + h * s.head_dim + d];
                    }
                    ctx[(b * s.seq + i) * dim + h * s.head_dim + d] = static_cast<float>(acc);
                }
            }
        }
    }
}

void attention_backward(std::span<const float> dctx, std::span<const float> q, std::span<const float> k,
                        std::span<const float> v, std::span<const float> probs, std::span<const float> drop_scale,
                        std::span<float> dq, std::span<float> dk, std::span<float> dv, const AttentionShape& s) {
    const std::size_t dim = s.dim();
    std::vector<double> gq(dq.size(), 0.0);
    std::vector<double> gk(dk.size(), 0.0);
    std::vector<double> gv(dv.size(), 0.0);
    for (std::size_t b = 0; b < s.batch; ++b) {
        for (std::size_t h = 0; h < s.heads; ++h) {
            const auto at = [&](std::size_t t, std::size_t d) { return (b * s.seq + t) * dim + h * s.head_dim + d; };
            for (std::size_t i = 0; i < s.seq; ++i) {
                const std::size_t pbase = ((b * s.heads + h) * s.seq + i) * s.seq;
                std::vector<double> dp(s.seq, 0.0);
                double weighted = 0.0;
                for (std::size_t j = 0; j < s.seq; ++j) {
                    const double scale = drop_scale.empty() ? 1.0 : drop_scale[pbase + j];
                    double g = 0.0;
                    for (std::size_t d = 0; d < s.head_dim; ++d) {
                        g += static_cast<double>(dctx[at(i, d)]) * v[at(j, d)];
                        gv[at(j, d)] += probs[pbase + j] * scale * dctx[at(i, d)];
                    }
                    dp[j] = g * scale;
                    weighted += probs[pbase + j] * dp[j];
                }
                for (std::size_t j = 0; j < s.seq; ++j) {
                    const double ds = probs[pbase + j] * (dp[j] - weighted);
                    for (std::size_t d = 0; d < s.head_dim; ++d) {
                        gq[at(i, d)] += ds * k[at(j, d)];
                        gk[at(j, d)] += ds * q[at(i, d)];
                    }
                }
            }
        }
    }
    for (std::size_t i = 0; i < gq.size(); ++i) {
        dq[i] = static_cast<float>(gq[i]);
        dk[i] = static_cast<float>(gk[i]);
        dv[i] = static_cast<float>(gv[i]);
    }
}

}  // namespace sarc::nn::kernels::reference
