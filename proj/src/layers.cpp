#include "sfdm/layers.hpp"

#include <algorithm>
#include <cmath>

#include "sfdm/activation.hpp"
#include "sfdm/rng.hpp"

namespace sfdm {

const char* wiring_name(Wiring w) {
  switch (w) {
    case Wiring::SingleTransform: return "single_transform";
    case Wiring::PerLayer: return "per_layer";
  }
  return "?";
}

const char* activation_name(Activation a) {
  switch (a) {
    case Activation::None: return "none";
    case Activation::Gelu: return "gelu";
  }
  return "?";
}

namespace {

void act_inplace(Activation a, double* z, size_t n) {
  if (a == Activation::None) return;
  for (size_t i = 0; i < n; ++i) z[i] = gelu(z[i]);
}

void act_inplace(Activation a, cdouble* z, size_t n) {
  if (a == Activation::None) return;
  for (size_t i = 0; i < n; ++i) z[i] = gelu(z[i]);
}

// z[c_out][m] = W h[c_in][m] + b
template <typename T>
void layer_affine(const KSpaceLayer<T>& layer, int modes, const T* h, T* z) {
  const auto& w = layer.weights;
  const size_t total = static_cast<size_t>(w.c_out) * modes;
  std::fill(z, z + total, T(0));
  if (w.layout == WeightLayout::ModeDense) {
    for (int k = 0; k < modes; ++k) {
      T acc(0);
      const T* row = w.values.data() + static_cast<size_t>(k) * modes;
      for (int j = 0; j < modes; ++j) acc += row[j] * h[j];
      z[k] = acc;
    }
  } else {
    for (int o = 0; o < w.c_out; ++o)
      for (int i = 0; i < w.c_in; ++i) {
        const T* wo = w.values.data() + (static_cast<size_t>(o) * w.c_in + i) * modes;
        const T* hi = h + static_cast<size_t>(i) * modes;
        T* zo = z + static_cast<size_t>(o) * modes;
        for (int k = 0; k < modes; ++k) zo[k] += wo[k] * hi[k];
      }
  }
  if (!layer.bias.empty())
    for (size_t i = 0; i < total; ++i) z[i] += layer.bias[i];
}

}  // namespace

template <typename T>
ReducedBlock<T> signal_to_reduced(const Signal& x, const ModeSelector& sel,
                                  const TransformOperator& op,
                                  TransformCounters* counters) {
  Spectrum X = op.forward(x);
  if (counters) counters->forward++;
  const size_t n = static_cast<size_t>(x.shape.size());
  ReducedBlock<T> out(x.channels, sel.modes());
  for (int c = 0; c < x.channels; ++c) {
    std::vector<T> full;
    if constexpr (std::is_same_v<T, double>)
      full.assign(X.dct.begin() + c * n, X.dct.begin() + (c + 1) * n);
    else
      full.assign(X.dft.begin() + c * n, X.dft.begin() + (c + 1) * n);
    auto red = truncate_modes(full, sel);
    std::copy(red.begin(), red.end(), out.chan(c));
  }
  return out;
}

namespace {

Spectrum embed_block(const ReducedBlock<double>& block, const ModeSelector& sel,
                     const GridShape& shape) {
  Spectrum X;
  X.kind = TransformKind::Dct2;
  X.shape = shape;
  X.channels = block.channels;
  X.dct.assign(static_cast<size_t>(block.channels) * shape.size(), 0.0);
  for (int c = 0; c < block.channels; ++c) {
    std::vector<double> red(block.chan(c), block.chan(c) + block.modes);
    auto full = embed_modes(red, sel);
    std::copy(full.begin(), full.end(),
              X.dct.data() + static_cast<size_t>(c) * shape.size());
  }
  return X;
}

Spectrum embed_block(const ReducedBlock<cdouble>& block, const ModeSelector& sel,
                     const GridShape& shape) {
  Spectrum X;
  X.kind = TransformKind::Dft;
  X.shape = shape;
  X.channels = block.channels;
  X.dft.assign(static_cast<size_t>(block.channels) * shape.size(), cdouble(0));
  for (int c = 0; c < block.channels; ++c) {
    std::vector<cdouble> red(block.chan(c), block.chan(c) + block.modes);
    auto full = embed_conjugate_symmetric(red, sel);
    std::copy(full.begin(), full.end(),
              X.dft.data() + static_cast<size_t>(c) * shape.size());
  }
  return X;
}

}  // namespace

template <typename T>
void validate_model(const SpectralModel<T>& m, const std::string& who) {
  constexpr bool is_complex = !std::is_same_v<T, double>;
  check_arg(m.kind == (is_complex ? TransformKind::Dft : TransformKind::Dct2),
            who + ": scalar type does not match transform kind");
  validate_selector(m.selector, who);
  check_arg(m.selector.spectrum_shape.rows == m.shape.rows &&
                m.selector.spectrum_shape.cols == m.shape.cols,
            who + ": selector shape does not match model shape");
  check_arg(!m.layers.empty(), who + ": model has no layers");
  const int modes = m.selector.modes();
  for (size_t l = 0; l < m.layers.size(); ++l) {
    const auto& layer = m.layers[l];
    check_arg(layer.weights.modes == modes, who + ": layer mode count mismatch");
    validate_weights(layer.weights, who);
    if (!layer.bias.empty())
      check_arg(layer.bias.size() ==
                    static_cast<size_t>(layer.c_out()) * modes,
                who + ": bias size mismatch");
    if (!layer.residual.empty()) {
      check_arg(m.wiring == Wiring::PerLayer,
                who + ": skip connections require the per-layer wiring");
      check_arg(layer.c_in() == layer.c_out(),
                who + ": skip connection requires c_in == c_out");
      check_arg(layer.residual.size() == static_cast<size_t>(layer.c_out()),
                who + ": skip scale count mismatch");
    }
    if (l + 1 < m.layers.size())
      check_arg(layer.c_out() == m.layers[l + 1].c_in(),
                who + ": channel chain mismatch between layers");
  }
}

template <typename T>
ReducedBlock<T> kspace_stack_forward(const std::vector<KSpaceLayer<T>>& layers,
                                     ReducedBlock<T> h, ForwardCache<T>* cache) {
  if (cache) cache->layers.assign(layers.size(), LayerCache<T>{});
  for (size_t l = 0; l < layers.size(); ++l) {
    const auto& layer = layers[l];
    check_arg(layer.c_in() == h.channels,
              "kspace_stack_forward: channel chain mismatch");
    ReducedBlock<T> z(layer.c_out(), h.modes);
    layer_affine(layer, h.modes, h.v.data(), z.v.data());
    if (cache) {
      (*cache).layers[l].input = h.v;
      (*cache).layers[l].pre_act = z.v;
    }
    act_inplace(layer.activation, z.v.data(), z.v.size());
    h = std::move(z);
  }
  return h;
}

template <typename T>
ReducedBlock<T> t1_forward(const SpectralModel<T>& model, const Signal& x,
                           const TransformOperator& op,
                           TransformCounters* counters, ForwardCache<T>* cache) {
  check_arg(model.wiring == Wiring::SingleTransform,
            "t1_forward: model uses the per-layer wiring");
  check_arg(x.channels == model.input_channels(),
            "t1_forward: input channel count mismatch");
  ReducedBlock<T> h = signal_to_reduced<T>(x, model.selector, op, counters);
  return kspace_stack_forward(model.layers, std::move(h), cache);
}

template <typename T>
Signal reduced_to_signal(const ReducedBlock<T>& block, const ModeSelector& sel,
                         const TransformOperator& op,
                         TransformCounters* counters) {
  Spectrum X = embed_block(block, sel, op.shape());
  if (counters) counters->inverse++;
  return op.inverse(X);
}

template <typename T>
Signal t1_predict_signal(const SpectralModel<T>& model, const Signal& x,
                         const TransformOperator& op,
                         TransformCounters* counters) {
  ReducedBlock<T> h =
      t1_forward(model, x, op, counters, static_cast<ForwardCache<T>*>(nullptr));
  return reduced_to_signal(h, model.selector, op, counters);
}

template <typename T>
Signal per_layer_forward(const SpectralModel<T>& model, const Signal& x,
                         const TransformOperator& op,
                         TransformCounters* counters, ForwardCache<T>* cache) {
  check_arg(model.wiring == Wiring::PerLayer,
            "per_layer_forward: model uses the single transform wiring");
  check_arg(x.channels == model.input_channels(),
            "per_layer_forward: input channel count mismatch");
  const int modes = model.selector.modes();
  if (cache) cache->layers.assign(model.layers.size(), LayerCache<T>{});
  Signal cur = x;
  for (size_t l = 0; l < model.layers.size(); ++l) {
    const auto& layer = model.layers[l];
    ReducedBlock<T> h = signal_to_reduced<T>(cur, model.selector, op, counters);
    ReducedBlock<T> z(layer.c_out(), modes);
    layer_affine(layer, modes, h.v.data(), z.v.data());
    Signal y = reduced_to_signal(z, model.selector, op, counters);
    if (!layer.residual.empty()) {
      const int n = cur.shape.size();
      for (int c = 0; c < layer.c_out(); ++c) {
        const double g = layer.residual[c];
        const double* src = cur.channel(c);
        double* dst = y.channel(c);
        for (int i = 0; i < n; ++i) dst[i] += g * src[i];
      }
    }
    if (cache) {
      auto& lc = cache->layers[l];
      lc.input = h.v;
      lc.pre_act = z.v;
      lc.nspace_input = cur;
      lc.nspace_pre_act = y;
    }
    if (layer.activation == Activation::Gelu)
      for (double& v : y.values) v = gelu(v);
    cur = std::move(y);
  }
  return cur;
}

template <typename T>
Signal fdm_layer_forward(const Signal& x, const KSpaceLayer<T>& layer,
                         const ModeSelector& sel, const TransformOperator& op,
                         TransformCounters* counters) {
  check_arg(x.channels == layer.c_in(),
            "fdm_layer_forward: input channel count mismatch");
  check_arg(layer.weights.modes == sel.modes(),
            "fdm_layer_forward: selector does not match layer weights");
  const int modes = sel.modes();
  ReducedBlock<T> h = signal_to_reduced<T>(x, sel, op, counters);
  ReducedBlock<T> z(layer.c_out(), modes);
  layer_affine(layer, modes, h.v.data(), z.v.data());
  act_inplace(layer.activation, z.v.data(), z.v.size());
  Signal y = reduced_to_signal(z, sel, op, counters);
  if (!layer.residual.empty()) {
    check_arg(layer.c_in() == layer.c_out(),
              "fdm_layer_forward: skip connection requires c_in == c_out");
    const int n = x.shape.size();
    for (int c = 0; c < layer.c_out(); ++c) {
      const double g = layer.residual[c];
      const double* src = x.channel(c);
      double* dst = y.channel(c);
      for (int i = 0; i < n; ++i) dst[i] += g * src[i];
    }
  }
  return y;
}

template <typename T>
Signal predict_signal(const SpectralModel<T>& model, const Signal& x,
                      const TransformOperator& op, TransformCounters* counters) {
  return model.wiring == Wiring::SingleTransform
             ? t1_predict_signal(model, x, op, counters)
             : per_layer_forward(model, x, op, counters,
                                 static_cast<ForwardCache<T>*>(nullptr));
}

ModeSelector lowpass_selector(int m, GridShape shape) {
  check_arg(m >= 1, "lowpass_selector: m must be positive");
  ModeSelector sel;
  sel.spectrum_shape = shape;
  if (shape.one_dimensional()) {
    check_arg(m <= shape.cols, "lowpass_selector: m exceeds grid size");
    sel.indices.resize(m);
    for (int k = 0; k < m; ++k) sel.indices[k] = k;
  } else {
    check_arg(m <= shape.rows && m <= shape.cols,
              "lowpass_selector: m exceeds a grid axis");
    sel.indices.reserve(static_cast<size_t>(m) * m);
    for (int r = 0; r < m; ++r)
      for (int c = 0; c < m; ++c) sel.indices.push_back(r * shape.cols + c);
  }
  return sel;
}

namespace {

// Channel chain [in -> w, w -> w ..., w -> out]; depth 1 is [in -> out].
std::vector<std::pair<int, int>> channel_chain(int depth, int width, int c_in,
                                               int c_out) {
  std::vector<std::pair<int, int>> chain;
  if (depth == 1) {
    chain.emplace_back(c_in, c_out);
  } else {
    chain.emplace_back(c_in, width);
    for (int l = 1; l < depth - 1; ++l) chain.emplace_back(width, width);
    chain.emplace_back(width, c_out);
  }
  return chain;
}

void fill_layer_values(std::vector<double>& v, double var, RandomStream& rs) {
  const double s = std::sqrt(var);
  for (double& x : v) x = s * rs.gaussian();
}

void fill_layer_values(std::vector<cdouble>& v, double component_var,
                       RandomStream& rs) {
  const double s = std::sqrt(component_var);
  for (cdouble& x : v) {
    const double re = s * rs.gaussian();
    const double im = s * rs.gaussian();
    x = cdouble(re, im);
  }
}

template <typename T>
SpectralModel<T> build_typed(const ModelConfig& cfg) {
  check_arg(cfg.depth >= 1, "build_model: depth must be positive");
  check_arg(cfg.width >= 1, "build_model: width must be positive");
  check_arg(cfg.in_channels >= 1 && cfg.out_channels >= 1,
            "build_model: channel counts must be positive");
  SpectralModel<T> m;
  m.wiring = cfg.wiring;
  m.kind = cfg.kind;
  m.shape = cfg.shape;
  m.selector = lowpass_selector(cfg.modes_per_axis, cfg.shape);
  m.width = cfg.width;
  const int modes = m.selector.modes();
  const int N = static_cast<int>(cfg.shape.size());
  const bool complex_parts = std::is_same_v<T, cdouble>;
  const auto chain = channel_chain(cfg.depth, cfg.width, cfg.in_channels,
                                   cfg.out_channels);

  RandomStream root(cfg.seed);
  for (size_t l = 0; l < chain.size(); ++l) {
    auto [ci, co] = chain[l];
    KSpaceLayer<T> layer;
    layer.weights.layout = WeightLayout::PerMode;
    layer.weights.modes = modes;
    layer.weights.c_in = ci;
    layer.weights.c_out = co;
    layer.weights.values.assign(
        static_cast<size_t>(co) * ci * modes, T(0));

    // Variance-preserving init belongs where the spectrum is truncated: the
    // first layer of a single-transform stack, every layer of a per-layer
    // stack. Other layers get resolution-independent 1/c_in.
    const bool truncating = (cfg.wiring == Wiring::PerLayer) || (l == 0);
    double var;
    if (cfg.init != InitFamily::Xavier && truncating) {
      var = vp_per_mode_component_variance(cfg.kind, N, modes, ci);
    } else {
      var = xavier_variance(ci);
      if (complex_parts) var *= 0.5;
    }
    RandomStream rs = root.substream(static_cast<std::uint64_t>(l));
    fill_layer_values(layer.weights.values, var, rs);

    if (cfg.bias)
      layer.bias.assign(static_cast<size_t>(co) * modes, T(0));
    if (cfg.wiring == Wiring::PerLayer && cfg.residual && ci == co)
      layer.residual.assign(co, 1.0);

    // Hidden activations sit between layers; the last layer stays linear so
    // predictions are unconstrained.
    if (l + 1 < chain.size()) layer.activation = cfg.hidden_activation;
    m.layers.push_back(std::move(layer));
  }
  validate_model(m, "build_model");
  return m;
}

}  // namespace

AnyModel build_model(const ModelConfig& cfg) {
  if (cfg.kind == TransformKind::Dct2) return build_typed<double>(cfg);
  return build_typed<cdouble>(cfg);
}

namespace {

inline void push_buffer(std::vector<std::pair<double*, size_t>>& out,
                        std::vector<double>& v) {
  if (!v.empty()) out.emplace_back(v.data(), v.size());
}

inline void push_buffer(std::vector<std::pair<double*, size_t>>& out,
                        std::vector<cdouble>& v) {
  if (!v.empty())
    out.emplace_back(reinterpret_cast<double*>(v.data()), 2 * v.size());
}

}  // namespace

template <typename T>
std::vector<std::pair<double*, size_t>> parameter_buffers(SpectralModel<T>& m) {
  std::vector<std::pair<double*, size_t>> out;
  for (auto& layer : m.layers) {
    push_buffer(out, layer.weights.values);
    push_buffer(out, layer.bias);
    if (!layer.residual.empty())
      out.emplace_back(layer.residual.data(), layer.residual.size());
  }
  return out;
}

template <typename T>
size_t parameter_count(const SpectralModel<T>& m) {
  size_t n = 0;
  auto buffers = parameter_buffers(const_cast<SpectralModel<T>&>(m));
  for (const auto& b : buffers) n += b.second;
  return n;
}

template <typename T>
std::pair<long long, long long> count_transforms(const SpectralModel<T>& model,
                                                 const Signal& x,
                                                 bool to_nspace) {
  TransformOperator op = model.make_operator();
  TransformCounters counters;
  if (to_nspace || model.wiring == Wiring::PerLayer)
    predict_signal(model, x, op, &counters);
  else
    t1_forward(model, x, op, &counters);
  return {counters.forward, counters.inverse};
}

#define SFDM_INSTANTIATE(T)                                                    \
  template void validate_model<T>(const SpectralModel<T>&, const std::string&); \
  template ReducedBlock<T> kspace_stack_forward<T>(                             \
      const std::vector<KSpaceLayer<T>>&, ReducedBlock<T>, ForwardCache<T>*);   \
  template ReducedBlock<T> signal_to_reduced<T>(const Signal&,                  \
                                                const ModeSelector&,            \
                                                const TransformOperator&,       \
                                                TransformCounters*);            \
  template ReducedBlock<T> t1_forward<T>(const SpectralModel<T>&, const Signal&, \
                                         const TransformOperator&,             \
                                         TransformCounters*, ForwardCache<T>*); \
  template Signal t1_predict_signal<T>(const SpectralModel<T>&, const Signal&, \
                                       const TransformOperator&,               \
                                       TransformCounters*);                    \
  template Signal reduced_to_signal<T>(const ReducedBlock<T>&,                 \
                                       const ModeSelector&,                    \
                                       const TransformOperator&,               \
                                       TransformCounters*);                    \
  template Signal per_layer_forward<T>(const SpectralModel<T>&, const Signal&, \
                                       const TransformOperator&,               \
                                       TransformCounters*, ForwardCache<T>*);  \
  template Signal fdm_layer_forward<T>(const Signal&, const KSpaceLayer<T>&,   \
                                       const ModeSelector&,                    \
                                       const TransformOperator&,               \
                                       TransformCounters*);                    \
  template Signal predict_signal<T>(const SpectralModel<T>&, const Signal&,    \
                                    const TransformOperator&,                  \
                                    TransformCounters*);                       \
  template std::vector<std::pair<double*, size_t>> parameter_buffers<T>(       \
      SpectralModel<T>&);                                                      \
  template size_t parameter_count<T>(const SpectralModel<T>&);                 \
  template std::pair<long long, long long> count_transforms<T>(                \
      const SpectralModel<T>&, const Signal&, bool);

SFDM_INSTANTIATE(double)
SFDM_INSTANTIATE(cdouble)

#undef SFDM_INSTANTIATE

}  // namespace sfdm
