#include "docre/tensor.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

namespace docre {

bool Tensor::all_finite() const {
    for (double v : data)
        if (!std::isfinite(v)) return false;
    return true;
}

Parameter& ParamStore::create(const std::string& name, std::size_t rows, std::size_t cols) {
    if (find(name)) throw ValidationError("parameter already exists: " + name);
    params_.push_back(std::make_unique<Parameter>(name, Tensor(rows, cols)));
    return *params_.back();
}

Parameter& ParamStore::create_glorot(const std::string& name, std::size_t rows,
                                     std::size_t cols, Rng& rng) {
    Parameter& p = create(name, rows, cols);
    const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
    for (auto& v : p.value.data) v = rng.uniform(-bound, bound);
    return p;
}

Parameter& ParamStore::create_normal(const std::string& name, std::size_t rows,
                                     std::size_t cols, Rng& rng, double stddev) {
    Parameter& p = create(name, rows, cols);
    for (auto& v : p.value.data) v = rng.normal(0.0, stddev);
    return p;
}

Parameter* ParamStore::find(const std::string& name) {
    for (auto& p : params_)
        if (p->name == name) return p.get();
    return nullptr;
}

Parameter& ParamStore::at(const std::string& name) {
    Parameter* p = find(name);
    if (!p) throw ValidationError("no such parameter: " + name);
    return *p;
}

std::vector<Parameter*> ParamStore::all() {
    std::vector<Parameter*> out;
    out.reserve(params_.size());
    for (auto& p : params_) out.push_back(p.get());
    return out;
}

std::size_t ParamStore::total_elements() const {
    std::size_t n = 0;
    for (const auto& p : params_) n += p->value.size();
    return n;
}

void ParamStore::zero_grads() {
    for (auto& p : params_) p->zero_grad();
}

namespace {

constexpr char kMagic[8] = {'D', 'O', 'C', 'R', 'E', 'C', 'K', '1'};

void write_u64(std::ostream& out, std::uint64_t v) {
    unsigned char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    out.write(reinterpret_cast<const char*>(buf), 8);
}

std::uint64_t read_u64(std::istream& in) {
    unsigned char buf[8];
    in.read(reinterpret_cast<char*>(buf), 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    return v;
}

void write_doubles(std::ostream& out, const std::vector<double>& v) {
    for (double d : v) {
        std::uint64_t bits;
        std::memcpy(&bits, &d, 8);
        write_u64(out, bits);
    }
}

void read_doubles(std::istream& in, std::vector<double>& v) {
    for (double& d : v) {
        const std::uint64_t bits = read_u64(in);
        std::memcpy(&d, &bits, 8);
    }
}

}  // namespace

void save_checkpoint(const std::string& path, const std::string& config_text,
                     ParamStore& params) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write checkpoint: " + path);
    out.write(kMagic, 8);
    write_u64(out, config_text.size());
    out.write(config_text.data(), static_cast<std::streamsize>(config_text.size()));
    write_u64(out, params.size());
    for (Parameter* p : params.all()) {
        write_u64(out, p->name.size());
        out.write(p->name.data(), static_cast<std::streamsize>(p->name.size()));
        write_u64(out, p->value.rows);
        write_u64(out, p->value.cols);
        write_doubles(out, p->value.data);
    }
    if (!out) throw IoError("write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open checkpoint: " + path);
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kMagic, 8) != 0)
        throw ValidationError("not a checkpoint file: " + path);

    Checkpoint ckpt;
    const std::uint64_t cfg_len = read_u64(in);
    ckpt.config_text.resize(cfg_len);
    in.read(ckpt.config_text.data(), static_cast<std::streamsize>(cfg_len));
    const std::uint64_t n = read_u64(in);
    for (std::uint64_t i = 0; i < n; ++i) {
        const std::uint64_t name_len = read_u64(in);
        std::string name(name_len, '\0');
        in.read(name.data(), static_cast<std::streamsize>(name_len));
        const std::uint64_t rows = read_u64(in);
        const std::uint64_t cols = read_u64(in);
        Tensor t(rows, cols);
        read_doubles(in, t.data);
        if (!in) throw ValidationError("truncated checkpoint: " + path);
        ckpt.tensors.emplace_back(std::move(name), std::move(t));
    }
    return ckpt;
}

void restore_params(const Checkpoint& ckpt, ParamStore& params) {
    if (ckpt.tensors.size() != params.size())
        throw ValidationError("checkpoint has " + std::to_string(ckpt.tensors.size()) +
                              " parameters, model expects " + std::to_string(params.size()));
    for (const auto& [name, tensor] : ckpt.tensors) {
        Parameter& p = params.at(name);
        if (!p.value.same_shape(tensor))
            throw ValidationError("checkpoint shape mismatch for " + name + ": " +
                                  tensor.shape_str() + " vs " + p.value.shape_str());
        p.value = tensor;
    }
}

}  // namespace docre
