#include "har/cnn/checkpoint.hpp"

#include <cstring>
#include <fstream>

namespace har::cnn {

namespace {

constexpr char kMagic[8] = {'H', 'A', 'R', 'C', 'K', 'P', 'T', '1'};

void put_u64(std::ofstream& out, std::uint64_t v) { out.write((const char*)&v, 8); }
void put_f64(std::ofstream& out, double v) { out.write((const char*)&v, 8); }

std::uint64_t get_u64(std::ifstream& in) {
    std::uint64_t v = 0;
    in.read((char*)&v, 8);
    return v;
}
double get_f64(std::ifstream& in) {
    double v = 0;
    in.read((char*)&v, 8);
    return v;
}

void put_tensor(std::ofstream& out, const Tensor& t) {
    put_u64(out, t.shape.size());
    for (auto d : t.shape) put_u64(out, d);
    out.write((const char*)t.data.data(), std::streamsize(t.data.size() * 8));
}

void get_tensor(std::ifstream& in, Tensor& t) {
    std::vector<std::size_t> shape(get_u64(in));
    for (auto& d : shape) d = get_u64(in);
    if (shape != t.shape) throw CheckpointError("checkpoint tensor shape mismatch");
    in.read((char*)t.data.data(), std::streamsize(t.data.size() * 8));
}

}  // namespace

void save_checkpoint(CnnModel& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw CheckpointError("cannot write " + path);
    out.write(kMagic, sizeof kMagic);

    const auto& c = model.config();
    put_u64(out, c.input_length);
    put_u64(out, c.input_channels);
    for (auto f : c.filters) put_u64(out, f);
    put_u64(out, c.kernel);
    put_u64(out, c.pool);
    put_u64(out, c.hidden);
    put_u64(out, c.classes);
    put_f64(out, c.dropout);
    put_u64(out, c.epochs);
    put_u64(out, c.batch_size);
    put_f64(out, c.learning_rate);
    put_f64(out, c.momentum);
    put_u64(out, c.seed);

    for (auto* t : model.params()) put_tensor(out, *t);
    for (auto* t : model.running_stats()) put_tensor(out, *t);
    if (!out) throw CheckpointError("write failed: " + path);
}

std::unique_ptr<CnnModel> load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CheckpointError("cannot open " + path);
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kMagic, 8) != 0)
        throw CheckpointError(path + ": not a checkpoint file");

    CnnConfig c;
    c.input_length = get_u64(in);
    c.input_channels = get_u64(in);
    for (auto& f : c.filters) f = get_u64(in);
    c.kernel = get_u64(in);
    c.pool = get_u64(in);
    c.hidden = get_u64(in);
    c.classes = get_u64(in);
    c.dropout = get_f64(in);
    c.epochs = get_u64(in);
    c.batch_size = get_u64(in);
    c.learning_rate = get_f64(in);
    c.momentum = get_f64(in);
    c.seed = get_u64(in);

    auto model = std::make_unique<CnnModel>(c);
    for (auto* t : model->params()) get_tensor(in, *t);
    for (auto* t : model->running_stats()) get_tensor(in, *t);
    if (!in) throw CheckpointError(path + ": truncated checkpoint");
    return model;
}

}  // namespace har::cnn
