#include "sfdm/model_io.hpp"

#include <cstring>
#include <vector>

#include "binary_io.hpp"

namespace sfdm {

namespace {

using detail::Reader;
using detail::Writer;

constexpr char kMagic[4] = {'S', 'F', 'D', 'M'};

template <typename T>
void write_values(Writer& w, const std::vector<T>& v) {
  // complex<double> is layout-compatible with double[2]
  w.f64s(reinterpret_cast<const double*>(v.data()),
         v.size() * sizeof(T) / sizeof(double));
}

template <typename T>
void read_values(Reader& r, std::vector<T>& v) {
  r.f64s(reinterpret_cast<double*>(v.data()),
         v.size() * sizeof(T) / sizeof(double));
}

template <typename T>
void save_typed(const SpectralModel<T>& m, const std::string& path) {
  validate_model(m, "save_model");
  Writer w(path);
  w.bytes(kMagic, 4);
  w.u32(kCheckpointVersion);
  w.u32(m.wiring == Wiring::SingleTransform ? 0u : 1u);
  w.u32(m.kind == TransformKind::Dct2 ? 0u : 1u);
  w.u32(static_cast<std::uint32_t>(m.shape.ndim()));
  if (m.shape.ndim() == 2) w.u64(static_cast<std::uint64_t>(m.shape.rows));
  w.u64(static_cast<std::uint64_t>(m.shape.cols));
  w.u64(static_cast<std::uint64_t>(m.selector.modes()));
  w.u32(static_cast<std::uint32_t>(m.depth()));
  w.u32(static_cast<std::uint32_t>(m.width));
  for (int idx : m.selector.indices) w.u64(static_cast<std::uint64_t>(idx));
  for (const auto& layer : m.layers) {
    w.u32(layer.weights.layout == WeightLayout::ModeDense ? 0u : 1u);
    w.u32(static_cast<std::uint32_t>(layer.c_in()));
    w.u32(static_cast<std::uint32_t>(layer.c_out()));
    w.u32(layer.activation == Activation::None ? 0u : 1u);
    w.u32(layer.bias.empty() ? 0u : 1u);
    w.u32(layer.residual.empty() ? 0u : 1u);
    write_values(w, layer.weights.values);
    if (!layer.bias.empty()) write_values(w, layer.bias);
    if (!layer.residual.empty())
      w.f64s(layer.residual.data(), layer.residual.size());
  }
  w.finish();
}

template <typename T>
SpectralModel<T> load_typed(Reader& r, std::uint32_t wiring,
                            GridShape shape, std::uint64_t modes,
                            std::uint32_t depth, std::uint32_t width) {
  SpectralModel<T> m;
  m.wiring = wiring == 0 ? Wiring::SingleTransform : Wiring::PerLayer;
  m.kind = std::is_same_v<T, double> ? TransformKind::Dct2 : TransformKind::Dft;
  m.shape = shape;
  m.width = static_cast<int>(width);
  m.selector.spectrum_shape = shape;
  m.selector.indices.resize(modes);
  for (auto& idx : m.selector.indices) {
    std::uint64_t v = r.u64();
    check_io(v < static_cast<std::uint64_t>(shape.size()),
             "checkpoint selector index out of range: " + r.path);
    idx = static_cast<int>(v);
  }
  for (std::uint32_t l = 0; l < depth; ++l) {
    std::uint32_t layout = r.u32();
    check_io(layout <= 1, "checkpoint has unknown weight layout: " + r.path);
    std::uint32_t c_in = r.u32();
    std::uint32_t c_out = r.u32();
    std::uint32_t act = r.u32();
    check_io(act <= 1, "checkpoint has unknown activation: " + r.path);
    std::uint32_t has_bias = r.u32();
    std::uint32_t has_residual = r.u32();
    check_io(c_in >= 1 && c_in <= (1u << 20) && c_out >= 1 && c_out <= (1u << 20),
             "checkpoint channel counts out of range: " + r.path);

    KSpaceLayer<T> layer;
    layer.weights.layout = layout == 0 ? WeightLayout::ModeDense : WeightLayout::PerMode;
    layer.weights.modes = static_cast<int>(modes);
    layer.weights.c_in = static_cast<int>(c_in);
    layer.weights.c_out = static_cast<int>(c_out);
    layer.activation = act == 0 ? Activation::None : Activation::Gelu;
    layer.weights.values.resize(layer.weights.expected_size());
    read_values(r, layer.weights.values);
    if (has_bias) {
      layer.bias.resize(static_cast<size_t>(c_out) * modes);
      read_values(r, layer.bias);
    }
    if (has_residual) {
      layer.residual.resize(c_out);
      r.f64s(layer.residual.data(), layer.residual.size());
    }
    m.layers.push_back(std::move(layer));
  }
  check_io(r.at_end(), "trailing bytes after checkpoint payload: " + r.path);
  validate_model(m, "load_model");
  return m;
}

}  // namespace

void save_model(const AnyModel& model, const std::string& path) {
  std::visit([&](const auto& m) { save_typed(m, path); }, model);
}

AnyModel load_model(const std::string& path) {
  Reader r(path);
  char magic[4];
  r.bytes(magic, 4);
  check_io(std::memcmp(magic, kMagic, 4) == 0,
           "not a model checkpoint (bad magic): " + path);
  std::uint32_t version = r.u32();
  check_io(version == kCheckpointVersion,
           "unsupported checkpoint version: " + path);
  std::uint32_t wiring = r.u32();
  check_io(wiring <= 1, "checkpoint has unknown wiring: " + path);
  std::uint32_t kind = r.u32();
  check_io(kind <= 1, "checkpoint has unknown transform kind: " + path);
  std::uint32_t ndim = r.u32();
  check_io(ndim == 1 || ndim == 2, "checkpoint has unsupported ndim: " + path);
  GridShape shape;
  if (ndim == 2) {
    std::uint64_t rows = r.u64();
    std::uint64_t cols = r.u64();
    check_io(rows >= 1 && cols >= 1 && rows <= (1u << 24) && cols <= (1u << 24),
             "checkpoint grid dims out of range: " + path);
    shape = GridShape::two_d(static_cast<int>(rows), static_cast<int>(cols));
  } else {
    std::uint64_t cols = r.u64();
    check_io(cols >= 1 && cols <= (1u << 24),
             "checkpoint grid dims out of range: " + path);
    shape = GridShape::one_d(static_cast<int>(cols));
  }
  std::uint64_t modes = r.u64();
  check_io(modes >= 1 && modes <= static_cast<std::uint64_t>(shape.size()),
           "checkpoint mode count out of range: " + path);
  std::uint32_t depth = r.u32();
  check_io(depth >= 1 && depth <= (1u << 20), "checkpoint depth out of range: " + path);
  std::uint32_t width = r.u32();

  if (kind == 0)
    return load_typed<double>(r, wiring, shape, modes, depth, width);
  return load_typed<cdouble>(r, wiring, shape, modes, depth, width);
}

}  // namespace sfdm
