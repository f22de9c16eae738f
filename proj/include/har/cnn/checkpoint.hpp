#pragma once

#include <memory>
#include <string>

#include "har/cnn/model.hpp"

namespace har::cnn {

struct CheckpointError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Versioned binary checkpoint: config plus all parameter tensors and
// batch-norm running statistics.
void save_checkpoint(CnnModel& model, const std::string& path);
std::unique_ptr<CnnModel> load_checkpoint(const std::string& path);

}  // namespace har::cnn
