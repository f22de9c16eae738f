#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "har/cnn/layers.hpp"
#include "har/preprocess.hpp"

namespace har::cnn {

struct CnnConfig {
    std::size_t input_length = 100;
    std::size_t input_channels = 3;
    std::array<std::size_t, 3> filters = {32, 64, 128};
    std::size_t kernel = 5;
    std::size_t pool = 2;
    std::size_t hidden = 128;
    std::size_t classes = 5;
    double dropout = 0.5;
    std::size_t epochs = 100;
    std::size_t batch_size = 64;
    double learning_rate = 0.01;
    double momentum = 0.9;
    std::uint64_t seed = 0;

    // Length after the three conv+pool blocks (100 -> 50 -> 25 -> 12).
    std::size_t conv_out_length() const;
    std::size_t flat_features() const { return filters[2] * conv_out_length(); }
};

// BatchNorm -> 3 x (Conv1d/ReLU/MaxPool) -> Dense/ReLU -> Dropout -> Dense.
class CnnModel {
  public:
    explicit CnnModel(const CnnConfig& cfg);

    const CnnConfig& config() const { return cfg_; }

    // Returns class probabilities (B, classes). dropout_rng drives the
    // train-mode dropout mask stream; unused in infer mode.
    Tensor forward(const Tensor& batch, Mode mode, Rng* dropout_rng = nullptr);

    // Forward reusing the previous dropout mask (finite-difference checks).
    Tensor forward_fixed_dropout(const Tensor& batch, Mode mode);

    // Backpropagates from labels through the whole stack; fills grads().
    // Returns the mean cross-entropy loss of the last forward.
    double backward(const Tensor& last_probs, const std::vector<int>& labels);

    std::vector<Tensor*> params();
    std::vector<Tensor*> grads();
    std::vector<Tensor*> running_stats();

    void init_params(std::uint64_t seed);

  private:
    CnnConfig cfg_;
    BatchNorm bn_;
    Conv1d conv1_, conv2_, conv3_;
    Relu relu1_, relu2_, relu3_, relu_fc_;
    MaxPool1d pool1_, pool2_, pool3_;
    Dense fc1_, fc2_;
    Dropout dropout_;
    std::vector<std::size_t> flat_in_shape_;

    Tensor forward_impl(const Tensor& batch, Mode mode, Rng* dropout_rng, bool reuse_mask);
};

Tensor batch_from_windows(const std::vector<const preprocess::Window*>& windows);

}  // namespace har::cnn
