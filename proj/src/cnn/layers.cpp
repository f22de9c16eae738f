#include "har/cnn/layers.hpp"

#include <algorithm>
#include <cmath>

#include "har/cnn/kernels.hpp"

namespace har::cnn {

namespace {

void expect_rank(const Tensor& t, std::size_t rank, const char* where) {
    if (t.shape.size() != rank) throw ShapeMismatch(std::string(where) + ": bad rank");
}

}  // namespace

// ---------------------------------------------------------------- BatchNorm

BatchNorm::BatchNorm(std::size_t channels, double momentum, double eps)
    : channels_(channels),
      momentum_(momentum),
      eps_(eps),
      gamma_({channels}),
      beta_({channels}),
      grad_gamma_({channels}),
      grad_beta_({channels}),
      running_mean_({channels}),
      running_var_({channels}) {
    std::fill(gamma_.data.begin(), gamma_.data.end(), 1.0);
    std::fill(running_var_.data.begin(), running_var_.data.end(), 1.0);
}

Tensor BatchNorm::forward(const Tensor& in, Mode mode) {
    expect_rank(in, 3, "BatchNorm");
    if (in.shape[1] != channels_) throw ShapeMismatch("BatchNorm: channel count");
    const std::size_t B = in.shape[0], L = in.shape[2];
    Tensor out(in.shape);

    batch_mean_.assign(channels_, 0.0);
    batch_inv_std_.assign(channels_, 0.0);
    cached_b_ = B;
    cached_l_ = L;

    for (std::size_t c = 0; c < channels_; ++c) {
        double m, v;
        if (mode == Mode::Train) {
            double sum = 0, sq = 0;
            for (std::size_t n = 0; n < B; ++n) {
                const double* row = in.data.data() + (n * channels_ + c) * L;
                for (std::size_t l = 0; l < L; ++l) {
                    sum += row[l];
                    sq += row[l] * row[l];
                }
            }
            const double count = double(B * L);
            m = sum / count;
            v = std::max(0.0, sq / count - m * m);
            running_mean_[c] = (1 - momentum_) * running_mean_[c] + momentum_ * m;
            running_var_[c] = (1 - momentum_) * running_var_[c] + momentum_ * v;
        } else {
            m = running_mean_[c];
            v = running_var_[c];
        }
        batch_mean_[c] = m;
        batch_inv_std_[c] = 1.0 / std::sqrt(v + eps_);
    }

    xhat_ = Tensor(in.shape);
    for (std::size_t n = 0; n < B; ++n)
        for (std::size_t c = 0; c < channels_; ++c) {
            const double* row = in.data.data() + (n * channels_ + c) * L;
            double* xhat = xhat_.data.data() + (n * channels_ + c) * L;
            double* o = out.data.data() + (n * channels_ + c) * L;
            for (std::size_t l = 0; l < L; ++l) {
                xhat[l] = (row[l] - batch_mean_[c]) * batch_inv_std_[c];
                o[l] = gamma_[c] * xhat[l] + beta_[c];
            }
        }
    return out;
}

Tensor BatchNorm::backward(const Tensor& grad_out) {
    const std::size_t B = cached_b_, L = cached_l_;
    const double count = double(B * L);
    Tensor grad_in(grad_out.shape);

    for (std::size_t c = 0; c < channels_; ++c) {
        double sum_dy = 0, sum_dy_xhat = 0;
        for (std::size_t n = 0; n < B; ++n) {
            const double* dy = grad_out.data.data() + (n * channels_ + c) * L;
            const double* xh = xhat_.data.data() + (n * channels_ + c) * L;
            for (std::size_t l = 0; l < L; ++l) {
                sum_dy += dy[l];
                sum_dy_xhat += dy[l] * xh[l];
            }
        }
        grad_beta_[c] = sum_dy;
        grad_gamma_[c] = sum_dy_xhat;
        for (std::size_t n = 0; n < B; ++n) {
            const double* dy = grad_out.data.data() + (n * channels_ + c) * L;
            const double* xh = xhat_.data.data() + (n * channels_ + c) * L;
            double* dx = grad_in.data.data() + (n * channels_ + c) * L;
            for (std::size_t l = 0; l < L; ++l)
                dx[l] = gamma_[c] * batch_inv_std_[c] *
                        (dy[l] - sum_dy / count - xh[l] * sum_dy_xhat / count);
        }
    }
    return grad_in;
}

// ------------------------------------------------------------------- Conv1d

Conv1d::Conv1d(std::size_t in_channels, std::size_t out_channels, std::size_t kernel)
    : cin_(in_channels),
      cout_(out_channels),
      k_(kernel),
      w_({out_channels, in_channels, kernel}),
      b_({out_channels}),
      grad_w_({out_channels, in_channels, kernel}),
      grad_b_({out_channels}) {
    if (kernel % 2 == 0) throw std::invalid_argument("Conv1d: kernel must be odd");
}

void Conv1d::init_params(Rng& rng) {
    const double std = std::sqrt(2.0 / double(cin_ * k_));
    for (auto& v : w_.data) v = rng.normal(0, std);
    b_.zero();
}

Tensor Conv1d::forward(const Tensor& in, Mode) {
    expect_rank(in, 3, "Conv1d");
    if (in.shape[1] != cin_) throw ShapeMismatch("Conv1d: channel count");
    input_ = in;
    Tensor out({in.shape[0], cout_, in.shape[2]});
    kernels::conv1d_forward(out.data.data(), in.data.data(), w_.data.data(), b_.data.data(),
                            in.shape[0], cin_, cout_, in.shape[2], k_);
    return out;
}

Tensor Conv1d::backward(const Tensor& grad_out) {
    const std::size_t B = input_.shape[0], L = input_.shape[2];
    Tensor grad_in(input_.shape);
    kernels::conv1d_backward_input(grad_in.data.data(), grad_out.data.data(), w_.data.data(),
                                   B, cin_, cout_, L, k_);
    kernels::conv1d_backward_params(grad_w_.data.data(), grad_b_.data.data(),
                                    input_.data.data(), grad_out.data.data(), B, cin_, cout_,
                                    L, k_);
    return grad_in;
}

// --------------------------------------------------------------------- Relu

Tensor Relu::forward(const Tensor& in, Mode) {
    input_ = in;
    Tensor out(in.shape);
    for (std::size_t i = 0; i < in.size(); ++i) out[i] = in[i] > 0 ? in[i] : 0.0;
    return out;
}

Tensor Relu::backward(const Tensor& grad_out) {
    Tensor grad_in(grad_out.shape);
    for (std::size_t i = 0; i < grad_out.size(); ++i)
        grad_in[i] = input_[i] > 0 ? grad_out[i] : 0.0;
    return grad_in;
}

// ---------------------------------------------------------------- MaxPool1d

Tensor MaxPool1d::forward(const Tensor& in, Mode) {
    expect_rank(in, 3, "MaxPool1d");
    const std::size_t B = in.shape[0], C = in.shape[1], L = in.shape[2];
    const std::size_t Lo = L / width_;
    in_shape_ = in.shape;
    Tensor out({B, C, Lo});
    argmax_.assign(out.size(), 0);
    for (std::size_t n = 0; n < B; ++n)
        for (std::size_t c = 0; c < C; ++c) {
            const double* row = in.data.data() + (n * C + c) * L;
            double* o = out.data.data() + (n * C + c) * Lo;
            std::size_t* am = argmax_.data() + (n * C + c) * Lo;
            for (std::size_t l = 0; l < Lo; ++l) {
                std::size_t best = l * width_;
                for (std::size_t k = 1; k < width_; ++k)
                    if (row[l * width_ + k] > row[best]) best = l * width_ + k;
                o[l] = row[best];
                am[l] = best;
            }
        }
    return out;
}

Tensor MaxPool1d::backward(const Tensor& grad_out) {
    Tensor grad_in({in_shape_[0], in_shape_[1], in_shape_[2]});
    const std::size_t B = in_shape_[0], C = in_shape_[1], L = in_shape_[2];
    const std::size_t Lo = L / width_;
    for (std::size_t n = 0; n < B; ++n)
        for (std::size_t c = 0; c < C; ++c) {
            const double* dy = grad_out.data.data() + (n * C + c) * Lo;
            double* dx = grad_in.data.data() + (n * C + c) * L;
            const std::size_t* am = argmax_.data() + (n * C + c) * Lo;
            for (std::size_t l = 0; l < Lo; ++l) dx[am[l]] += dy[l];
        }
    return grad_in;
}

// -------------------------------------------------------------------- Dense

Dense::Dense(std::size_t in_features, std::size_t out_features)
    : n_(in_features),
      m_(out_features),
      w_({out_features, in_features}),
      b_({out_features}),
      grad_w_({out_features, in_features}),
      grad_b_({out_features}) {}

void Dense::init_params(Rng& rng) {
    const double std = std::sqrt(2.0 / double(n_));
    for (auto& v : w_.data) v = rng.normal(0, std);
    b_.zero();
}

Tensor Dense::forward(const Tensor& in, Mode) {
    expect_rank(in, 2, "Dense");
    if (in.shape[1] != n_) throw ShapeMismatch("Dense: feature count");
    input_ = in;
    Tensor out({in.shape[0], m_});
    kernels::dense_forward(out.data.data(), in.data.data(), w_.data.data(), b_.data.data(),
                           in.shape[0], n_, m_);
    return out;
}

Tensor Dense::backward(const Tensor& grad_out) {
    const std::size_t B = input_.shape[0];
    Tensor grad_in({B, n_});
    grad_w_.zero();
    grad_b_.zero();
    for (std::size_t n = 0; n < B; ++n) {
        const double* dy = grad_out.data.data() + n * m_;
        const double* xin = input_.data.data() + n * n_;
        double* dx = grad_in.data.data() + n * n_;
        for (std::size_t m = 0; m < m_; ++m) {
            grad_b_[m] += dy[m];
            const double* wm = w_.data.data() + m * n_;
            double* gwm = grad_w_.data.data() + m * n_;
            for (std::size_t i = 0; i < n_; ++i) {
                dx[i] += wm[i] * dy[m];
                gwm[i] += xin[i] * dy[m];
            }
        }
    }
    return grad_in;
}

// ------------------------------------------------------------------ Dropout

Tensor Dropout::forward(const Tensor& in, Mode mode, Rng& rng) {
    if (mode == Mode::Infer || p_ <= 0.0) {
        mask_.assign(in.size(), 1.0);
        return in;
    }
    const double keep = 1.0 - p_;
    mask_.resize(in.size());
    Tensor out(in.shape);
    for (std::size_t i = 0; i < in.size(); ++i) {
        mask_[i] = rng.uniform() < keep ? 1.0 / keep : 0.0;
        out[i] = in[i] * mask_[i];
    }
    return out;
}

Tensor Dropout::forward_with_last_mask(const Tensor& in, Mode mode) {
    if (mode == Mode::Infer || p_ <= 0.0) return in;
    Tensor out(in.shape);
    for (std::size_t i = 0; i < in.size(); ++i) out[i] = in[i] * mask_[i];
    return out;
}

Tensor Dropout::backward(const Tensor& grad_out) {
    Tensor grad_in(grad_out.shape);
    for (std::size_t i = 0; i < grad_out.size(); ++i) grad_in[i] = grad_out[i] * mask_[i];
    return grad_in;
}

// ----------------------------------------------------------- loss functions

Tensor softmax(const Tensor& logits) {
    const std::size_t B = logits.shape[0], C = logits.shape[1];
    Tensor out(logits.shape);
    for (std::size_t n = 0; n < B; ++n) {
        const double* row = logits.data.data() + n * C;
        double* o = out.data.data() + n * C;
        double mx = row[0];
        for (std::size_t c = 1; c < C; ++c) mx = std::max(mx, row[c]);
        double sum = 0;
        for (std::size_t c = 0; c < C; ++c) {
            o[c] = std::exp(row[c] - mx);
            sum += o[c];
        }
        for (std::size_t c = 0; c < C; ++c) o[c] /= sum;
    }
    return out;
}

double cross_entropy(const Tensor& probs, const std::vector<int>& labels) {
    const std::size_t B = probs.shape[0], C = probs.shape[1];
    if (labels.size() != B) throw ShapeMismatch("cross_entropy: label count");
    double loss = 0;
    for (std::size_t n = 0; n < B; ++n)
        loss -= std::log(std::max(probs.data[n * C + std::size_t(labels[n])], 1e-300));
    return loss / double(B);
}

Tensor softmax_ce_grad(const Tensor& probs, const std::vector<int>& labels) {
    const std::size_t B = probs.shape[0], C = probs.shape[1];
    Tensor grad(probs.shape);
    for (std::size_t n = 0; n < B; ++n) {
        for (std::size_t c = 0; c < C; ++c)
            grad.data[n * C + c] = probs.data[n * C + c] / double(B);
        grad.data[n * C + std::size_t(labels[n])] -= 1.0 / double(B);
    }
    return grad;
}

}  // namespace har::cnn
