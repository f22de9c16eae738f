#pragma once

#include <stdexcept>
#include <vector>

#include "har/cnn/tensor.hpp"

namespace har::cnn {

enum class Mode { Train, Infer };

struct ShapeMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Per-channel batch normalization over (B, C, L). Train mode uses batch
// statistics and updates running stats; infer mode uses running stats.
class BatchNorm {
  public:
    explicit BatchNorm(std::size_t channels, double momentum = 0.1, double eps = 1e-5);

    Tensor forward(const Tensor& in, Mode mode);
    Tensor backward(const Tensor& grad_out);

    std::vector<Tensor*> params() { return {&gamma_, &beta_}; }
    std::vector<Tensor*> grads() { return {&grad_gamma_, &grad_beta_}; }
    Tensor& running_mean() { return running_mean_; }
    Tensor& running_var() { return running_var_; }

  private:
    std::size_t channels_;
    double momentum_, eps_;
    Tensor gamma_, beta_, grad_gamma_, grad_beta_;
    Tensor running_mean_, running_var_;
    // forward cache
    Tensor xhat_;
    std::vector<double> batch_mean_, batch_inv_std_;
    std::size_t cached_b_ = 0, cached_l_ = 0;
};

// Same-padded 1D convolution (odd kernel).
class Conv1d {
  public:
    Conv1d(std::size_t in_channels, std::size_t out_channels, std::size_t kernel);

    void init_params(Rng& rng);  // He initialization
    Tensor forward(const Tensor& in, Mode mode);
    Tensor backward(const Tensor& grad_out);

    std::vector<Tensor*> params() { return {&w_, &b_}; }
    std::vector<Tensor*> grads() { return {&grad_w_, &grad_b_}; }

  private:
    std::size_t cin_, cout_, k_;
    Tensor w_, b_, grad_w_, grad_b_;
    Tensor input_;
};

class Relu {
  public:
    Tensor forward(const Tensor& in, Mode mode);
    Tensor backward(const Tensor& grad_out);

  private:
    Tensor input_;
};

// Max pooling with width == stride; trailing remainder samples dropped.
class MaxPool1d {
  public:
    explicit MaxPool1d(std::size_t width) : width_(width) {}

    Tensor forward(const Tensor& in, Mode mode);
    Tensor backward(const Tensor& grad_out);

  private:
    std::size_t width_;
    std::vector<std::size_t> argmax_;
    std::vector<std::size_t> in_shape_;
};

// Fully connected layer on (B, N).
class Dense {
  public:
    Dense(std::size_t in_features, std::size_t out_features);

    void init_params(Rng& rng);
    Tensor forward(const Tensor& in, Mode mode);
    Tensor backward(const Tensor& grad_out);

    std::vector<Tensor*> params() { return {&w_, &b_}; }
    std::vector<Tensor*> grads() { return {&grad_w_, &grad_b_}; }

  private:
    std::size_t n_, m_;
    Tensor w_, b_, grad_w_, grad_b_;
    Tensor input_;
};

// Inverted dropout; identity in infer mode. The mask stream comes from the
// RNG passed to forward, so a fixed seed fixes the masks.
class Dropout {
  public:
    explicit Dropout(double p) : p_(p) {}

    Tensor forward(const Tensor& in, Mode mode, Rng& rng);
    // Re-applies the mask captured by the last forward (for gradient checks).
    Tensor forward_with_last_mask(const Tensor& in, Mode mode);
    Tensor backward(const Tensor& grad_out);

  private:
    double p_;
    std::vector<double> mask_;
};

// Softmax over the last axis of (B, C).
Tensor softmax(const Tensor& logits);

// Mean categorical cross-entropy of softmax probabilities vs labels.
double cross_entropy(const Tensor& probs, const std::vector<int>& labels);

// Gradient of mean CE wrt logits: (probs - onehot) / B.
Tensor softmax_ce_grad(const Tensor& probs, const std::vector<int>& labels);

}  // namespace har::cnn
