#include "har/cnn/model.hpp"

namespace har::cnn {

std::size_t CnnConfig::conv_out_length() const {
    std::size_t len = input_length;
    for (int i = 0; i < 3; ++i) len /= pool;
    if (len < 1) throw std::invalid_argument("CnnConfig: conv stack collapses the input");
    return len;
}

CnnModel::CnnModel(const CnnConfig& cfg)
    : cfg_(cfg),
      bn_(cfg.input_channels),
      conv1_(cfg.input_channels, cfg.filters[0], cfg.kernel),
      conv2_(cfg.filters[0], cfg.filters[1], cfg.kernel),
      conv3_(cfg.filters[1], cfg.filters[2], cfg.kernel),
      pool1_(cfg.pool),
      pool2_(cfg.pool),
      pool3_(cfg.pool),
      fc1_(cfg.flat_features(), cfg.hidden),
      fc2_(cfg.hidden, cfg.classes),
      dropout_(cfg.dropout) {
    init_params(cfg.seed);
}

void CnnModel::init_params(std::uint64_t seed) {
    Rng rng(seed ^ 0xc0ffee);
    conv1_.init_params(rng);
    conv2_.init_params(rng);
    conv3_.init_params(rng);
    fc1_.init_params(rng);
    fc2_.init_params(rng);
}

Tensor CnnModel::forward_impl(const Tensor& batch, Mode mode, Rng* dropout_rng,
                              bool reuse_mask) {
    if (batch.shape.size() != 3 || batch.shape[1] != cfg_.input_channels ||
        batch.shape[2] != cfg_.input_length)
        throw ShapeMismatch("CnnModel: batch must be (B, channels, length)");

    Tensor t = bn_.forward(batch, mode);
    t = pool1_.forward(relu1_.forward(conv1_.forward(t, mode), mode), mode);
    t = pool2_.forward(relu2_.forward(conv2_.forward(t, mode), mode), mode);
    t = pool3_.forward(relu3_.forward(conv3_.forward(t, mode), mode), mode);

    flat_in_shape_ = t.shape;
    t.shape = {t.shape[0], t.shape[1] * t.shape[2]};

    t = relu_fc_.forward(fc1_.forward(t, mode), mode);
    if (reuse_mask) {
        t = dropout_.forward_with_last_mask(t, mode);
    } else if (mode == Mode::Train) {
        static Rng fallback(0);
        t = dropout_.forward(t, mode, dropout_rng ? *dropout_rng : fallback);
    }
    t = fc2_.forward(t, mode);
    return softmax(t);
}

Tensor CnnModel::forward(const Tensor& batch, Mode mode, Rng* dropout_rng) {
    return forward_impl(batch, mode, dropout_rng, false);
}

Tensor CnnModel::forward_fixed_dropout(const Tensor& batch, Mode mode) {
    return forward_impl(batch, mode, nullptr, true);
}

double CnnModel::backward(const Tensor& last_probs, const std::vector<int>& labels) {
    double loss = cross_entropy(last_probs, labels);
    Tensor g = softmax_ce_grad(last_probs, labels);
    g = fc2_.backward(g);
    g = dropout_.backward(g);
    g = relu_fc_.backward(g);
    g = fc1_.backward(g);
    g.shape = flat_in_shape_;
    g = conv3_.backward(relu3_.backward(pool3_.backward(g)));
    g = conv2_.backward(relu2_.backward(pool2_.backward(g)));
    g = conv1_.backward(relu1_.backward(pool1_.backward(g)));
    bn_.backward(g);
    return loss;
}

std::vector<Tensor*> CnnModel::params() {
    std::vector<Tensor*> out;
    auto append = [&](std::vector<Tensor*> v) { out.insert(out.end(), v.begin(), v.end()); };
    append(bn_.params());
    append(conv1_.params());
    append(conv2_.params());
    append(conv3_.params());
    append(fc1_.params());
    append(fc2_.params());
    return out;
}

std::vector<Tensor*> CnnModel::grads() {
    std::vector<Tensor*> out;
    auto append = [&](std::vector<Tensor*> v) { out.insert(out.end(), v.begin(), v.end()); };
    append(bn_.grads());
    append(conv1_.grads());
    append(conv2_.grads());
    append(conv3_.grads());
    append(fc1_.grads());
    append(fc2_.grads());
    return out;
}

std::vector<Tensor*> CnnModel::running_stats() {
    return {&bn_.running_mean(), &bn_.running_var()};
}

Tensor batch_from_windows(const std::vector<const preprocess::Window*>& windows) {
    if (windows.empty()) throw ShapeMismatch("batch_from_windows: empty batch");
    const std::size_t L = windows[0]->length();
    Tensor batch({windows.size(), 3, L});
    for (std::size_t n = 0; n < windows.size(); ++n) {
        if (windows[n]->length() != L)
            throw ShapeMismatch("batch_from_windows: inconsistent window length");
        std::copy(windows[n]->values.begin(), windows[n]->values.end(),
                  batch.data.begin() + std::ptrdiff_t(n * 3 * L));
    }
    return batch;
}

}  // namespace har::cnn
