// Model checkpoint: "GNNLCKPT", u32 version, u32 K, u64 dims[K+1],
// u8 activation, u8 loss, u8 has_alpha, f64 alpha, u8 linear_last (0/1/2=auto),
// f64 init_scale, u64 seed, then per layer W_k (row-major) and b_k as f64.
// Every multi-byte field is little-endian.
#include "gnnlab/gnn.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>

namespace gnnlab {

namespace {

constexpr std::array<char, 8> kMagic = {'G', 'N', 'N', 'L', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;

class Writer {
public:
    explicit Writer(const std::string& path) : out_(path, std::ios::binary) {
        if (!out_) throw std::runtime_error("cannot open '" + path + "' for writing");
    }
    void u8(std::uint8_t v) { out_.put(static_cast<char>(v)); }
    void u32(std::uint32_t v) { le(v, 4); }
    void u64(std::uint64_t v) { le(v, 8); }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
    void raw(const char* p, std::size_t n) { out_.write(p, static_cast<std::streamsize>(n)); }
    void finish() {
        out_.flush();
        if (!out_) throw std::runtime_error("checkpoint write failed");
    }

private:
    void le(std::uint64_t v, int bytes) {
        for (int i = 0; i < bytes; ++i) out_.put(static_cast<char>((v >> (8 * i)) & 0xFF));
    }
    std::ofstream out_;
};

class Reader {
public:
    explicit Reader(const std::string& path) : in_(path, std::ios::binary) {
        if (!in_) throw std::runtime_error("cannot open checkpoint '" + path + "'");
    }
    std::uint8_t u8() { return static_cast<std::uint8_t>(le(1)); }
    std::uint32_t u32() { return static_cast<std::uint32_t>(le(4)); }
    std::uint64_t u64() { return le(8); }
    double f64() { return std::bit_cast<double>(u64()); }
    void raw(char* p, std::size_t n) {
        in_.read(p, static_cast<std::streamsize>(n));
        if (!in_) throw std::runtime_error("checkpoint truncated");
    }

private:
    std::uint64_t le(int bytes) {
        std::uint64_t v = 0;
        for (int i = 0; i < bytes; ++i) {
            const int c = in_.get();
            if (c == std::char_traits<char>::eof()) throw std::runtime_error("checkpoint truncated");
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>(c)) << (8 * i);
        }
        return v;
    }
    std::ifstream in_;
};

} // namespace

void save_model(const GnnModel& model, const std::string& path) {
    model.check_shapes();
    const GnnConfig& c = model.config;
    Writer w(path);
    w.raw(kMagic.data(), kMagic.size());
    w.u32(kVersion);
    w.u32(static_cast<std::uint32_t>(model.depth()));
    for (std::size_t dim : c.layer_dims) w.u64(dim);
    w.u8(c.activation == Activation::ReLU ? 1 : 0);
    w.u8(c.loss == LossKind::MulticlassNLL ? 1 : 0);
    w.u8(c.residual_alpha ? 1 : 0);
    w.f64(c.residual_alpha.value_or(0.0));
    w.u8(c.linear_last_layer ? (*c.linear_last_layer ? 1 : 0) : 2);
    w.f64(c.init_scale);
    w.u64(c.seed);
    for (std::size_t k = 0; k < model.depth(); ++k) {
        const Matrix& wk = model.weights[k];
        for (Eigen::Index i = 0; i < wk.rows(); ++i)
            for (Eigen::Index j = 0; j < wk.cols(); ++j) w.f64(wk(i, j));
        for (Eigen::Index j = 0; j < model.biases[k].size(); ++j) w.f64(model.biases[k](j));
    }
    w.finish();
}

GnnModel load_model(const std::string& path) {
    Reader r(path);
    std::array<char, 8> magic{};
    r.raw(magic.data(), magic.size());
    if (magic != kMagic) throw std::runtime_error("'" + path + "' is not a model checkpoint");
    const std::uint32_t version = r.u32();
    if (version != kVersion)
        throw std::runtime_error("unsupported checkpoint version " + std::to_string(version) + " (expected " +
                                 std::to_string(kVersion) + ")");
    const std::uint32_t depth = r.u32();
    if (depth == 0 || depth > 1024) throw std::runtime_error("checkpoint has an implausible layer count");

    GnnModel model;
    GnnConfig& c = model.config;
    for (std::uint32_t k = 0; k <= depth; ++k) c.layer_dims.push_back(static_cast<std::size_t>(r.u64()));
    c.activation = r.u8() ? Activation::ReLU : Activation::Identity;
    c.loss = r.u8() ? LossKind::MulticlassNLL : LossKind::SquaredBinary;
    const bool has_alpha = r.u8() != 0;
    const double alpha = r.f64();
    if (has_alpha) c.residual_alpha = alpha;
    const std::uint8_t linear = r.u8();
    if (linear != 2) c.linear_last_layer = linear == 1;
    c.init_scale = r.f64();
    c.seed = r.u64();
    for (std::uint32_t k = 0; k < depth; ++k) {
        Matrix w(static_cast<Eigen::Index>(c.layer_dims[k]), static_cast<Eigen::Index>(c.layer_dims[k + 1]));
        for (Eigen::Index i = 0; i < w.rows(); ++i)
            for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = r.f64();
        Vector b(w.cols());
        for (Eigen::Index j = 0; j < b.size(); ++j) b(j) = r.f64();
        model.weights.push_back(std::move(w));
        model.biases.push_back(std::move(b));
    }
    c.validate();
    return model;
}

} // namespace gnnlab
