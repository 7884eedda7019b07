// SPDX-License-Identifier: Apache-2.0
#include "nnet/model_io.hpp"

#include "common/error.hpp"
#include "common/text_io.hpp"

#include <bit>
#include <cstring>

namespace floeberg::nnet {

static_assert(std::endian::native == std::endian::little,
              "model files are written in host order; big-endian hosts need "
              "byte swapping here");

namespace {

constexpr char kMagic[4] = {'F', 'L', 'O', 'E'};

class Writer {
public:
  void u32(std::uint32_t v) { raw(&v, sizeof v); }
  void f64(double v) { raw(&v, sizeof v); }
  void bytes(const void *p, std::size_t n) { raw(p, n); }
  std::vector<std::uint8_t> take() { return std::move(buf_); }

private:
  void raw(const void *p, std::size_t n) {
    const auto *b = static_cast<const std::uint8_t *>(p);
    buf_.insert(buf_.end(), b, b + n);
  }
  std::vector<std::uint8_t> buf_;
};

class Reader {
public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::uint32_t u32() {
    std::uint32_t v;
    raw(&v, sizeof v);
    return v;
  }
  double f64() {
    double v;
    raw(&v, sizeof v);
    return v;
  }
  void raw(void *out, std::size_t n) {
    require(pos_ + n <= bytes_.size(), ErrorKind::Parse,
            "model file is truncated");
    std::memcpy(out, bytes_.data() + pos_, n);
    pos_ += n;
  }
  bool at_end() const { return pos_ == bytes_.size(); }
  std::size_t remaining() const { return bytes_.size() - pos_; }

private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

} // namespace

std::vector<std::uint8_t> serialize_model(const Model &model) {
  Writer w;
  w.bytes(kMagic, sizeof kMagic);
  w.u32(kModelFormatVersion);
  w.u32(static_cast<std::uint32_t>(model.architecture()));
  w.u32(static_cast<std::uint32_t>(model.layers().size()));
  for (const auto &l : model.layers()) {
    w.u32(static_cast<std::uint32_t>(l.kind));
    w.u32(l.inputs);
    w.u32(l.units);
    w.u32(static_cast<std::uint32_t>(l.activation));
  }
  for (double v : model.standardizer.mean)
    w.f64(v);
  for (double v : model.standardizer.scale)
    w.f64(v);
  w.f64(model.loss.gamma);
  for (double a : model.loss.alpha)
    w.f64(a);
  w.f64(model.dropout);
  const auto &params = model.parameters();
  w.u32(static_cast<std::uint32_t>(params.size()));
  for (const auto &t : params) {
    w.u32(static_cast<std::uint32_t>(t.shape.size()));
    for (auto d : t.shape)
      w.u32(static_cast<std::uint32_t>(d));
    w.bytes(t.data.data(), t.data.size() * sizeof(double));
  }
  return w.take();
}

Model deserialize_model(std::span<const std::uint8_t> bytes,
                        std::optional<Architecture> expected) {
  Reader r(bytes);
  char magic[4];
  r.raw(magic, sizeof magic);
  require(std::memcmp(magic, kMagic, sizeof magic) == 0, ErrorKind::Parse,
          "not a model file (bad magic)");
  const auto version = r.u32();
  require(version == kModelFormatVersion, ErrorKind::Parse,
          "unsupported model format version " + std::to_string(version));
  const auto arch_id = r.u32();
  require(arch_id == static_cast<std::uint32_t>(Architecture::Mlp) ||
              arch_id == static_cast<std::uint32_t>(Architecture::Lstm),
          ErrorKind::Parse, "unknown architecture id " + std::to_string(arch_id));
  const auto arch = static_cast<Architecture>(arch_id);
  if (expected && *expected != arch)
    fail(ErrorKind::ArchitectureMismatch,
         std::string("model file holds an ") + to_string(arch) +
             " classifier, expected " + to_string(*expected));

  const auto n_layers = r.u32();
  require(n_layers <= 64, ErrorKind::Parse, "implausible layer count");
  std::vector<LayerSpec> layers;
  for (std::uint32_t i = 0; i < n_layers; ++i) {
    LayerSpec l;
    l.kind = static_cast<LayerKind>(r.u32());
    l.inputs = r.u32();
    l.units = r.u32();
    l.activation = static_cast<Activation>(r.u32());
    layers.push_back(l);
  }
  ingest::Standardizer st;
  for (auto &v : st.mean)
    v = r.f64();
  for (auto &v : st.scale)
    v = r.f64();
  FocalLossParams loss;
  loss.gamma = r.f64();
  for (auto &a : loss.alpha)
    a = r.f64();
  const double dropout = r.f64();

  const auto n_tensors = r.u32();
  require(n_tensors <= 256, ErrorKind::Parse, "implausible tensor count");
  TensorList params;
  for (std::uint32_t i = 0; i < n_tensors; ++i) {
    const auto rank = r.u32();
    require(rank >= 1 && rank <= 4, ErrorKind::Parse, "bad tensor rank");
    std::vector<std::size_t> dims(rank);
    std::size_t count = 1;
    for (auto &d : dims) {
      d = r.u32();
      count *= d;
    }
    require(count * sizeof(double) <= r.remaining(), ErrorKind::Parse,
            "model file is truncated");
    Tensor t(dims);
    r.raw(t.data.data(), count * sizeof(double));
    params.push_back(std::move(t));
  }
  require(r.at_end(), ErrorKind::Parse, "trailing bytes after model payload");

  Model m = model_from_parts(arch, std::move(layers), std::move(params));
  m.standardizer = st;
  m.loss = loss;
  m.dropout = dropout;
  return m;
}

void save_model(const Model &model, const std::filesystem::path &path) {
  io::write_binary_atomic(path, serialize_model(model));
}

Model load_model(const std::filesystem::path &path,
                 std::optional<Architecture> expected) {
  const std::string data = io::read_file(path);
  return deserialize_model(
      std::span(reinterpret_cast<const std::uint8_t *>(data.data()),
                data.size()),
      expected);
}

} // namespace floeberg::nnet
