#pragma once
// Spectral model stacks over reduced k-space coefficients.
//
// Two wirings share the same layer type:
//
//   SingleTransform  one forward transform up front; every layer acts on the
//                    reduced coefficients (activations applied there too, on
//                    real and imaginary parts componentwise for Dft); at most
//                    one inverse transform when an n-space field is needed.
//                    Transform cost: 1 forward, <= 1 inverse, per input.
//
//   PerLayer         each layer wraps its k-space map in its own forward and
//                    inverse transform, adds a per-channel scaled skip path,
//                    and applies its activation in n-space after the inverse.
//                    Transform cost: d forwards and d inverses at depth d.
//
// A layer computes z = W h + b on the reduced block; W is either a dense
// mode-mixing matrix (single channel) or a per-mode dense channel map.
// The scalar type is tied to the transform: double for Dct2, complex for
// Dft. Dft wirings scatter through the conjugate-symmetric embedding so
// n-space outputs are real up to roundoff when selectors keep per-axis
// frequencies <= axis/2.

#include <cstdint>
#include <utility>
#include <variant>
#include <vector>

#include "sfdm/common.hpp"
#include "sfdm/init.hpp"
#include "sfdm/kspace.hpp"
#include "sfdm/transforms.hpp"

namespace sfdm {

enum class Wiring { SingleTransform, PerLayer };
enum class Activation { None, Gelu };

const char* wiring_name(Wiring w);
const char* activation_name(Activation a);

template <typename T>
struct KSpaceLayer {
  KSpaceWeights<T> weights;
  std::vector<T> bias;            // empty, or [c_out][modes]
  std::vector<double> residual;   // per-channel skip scale; PerLayer wiring,
                                  // requires c_in == c_out; empty = no skip
  Activation activation = Activation::None;

  int c_in() const { return weights.c_in; }
  int c_out() const { return weights.c_out; }
};

template <typename T>
struct SpectralModel {
  Wiring wiring = Wiring::SingleTransform;
  TransformKind kind = TransformKind::Dct2;
  GridShape shape;
  ModeSelector selector;
  std::vector<KSpaceLayer<T>> layers;
  int width = 1;  // hidden channel count used by the builder; informational

  int input_channels() const { return layers.front().c_in(); }
  int output_channels() const { return layers.back().c_out(); }
  int depth() const { return static_cast<int>(layers.size()); }

  TransformOperator make_operator() const { return TransformOperator(kind, shape); }
};

using DctModel = SpectralModel<double>;
using DftModel = SpectralModel<cdouble>;
using AnyModel = std::variant<DctModel, DftModel>;

template <typename T>
void validate_model(const SpectralModel<T>& m, const std::string& who);

// Reduced coefficient block, channel-major: v[c * modes + k].
template <typename T>
struct ReducedBlock {
  int channels = 1;
  int modes = 0;
  std::vector<T> v;

  ReducedBlock() = default;
  ReducedBlock(int c, int m) : channels(c), modes(m), v(static_cast<size_t>(c) * m, T(0)) {}
  T* chan(int c) { return v.data() + static_cast<size_t>(c) * modes; }
  const T* chan(int c) const { return v.data() + static_cast<size_t>(c) * modes; }
};

struct TransformCounters {
  long long forward = 0;
  long long inverse = 0;
};

// Caches captured during forward passes so reverse-mode gradients can be
// assembled without re-running the transforms.
template <typename T>
struct LayerCache {
  std::vector<T> input;      // reduced input block [c_in][m]
  std::vector<T> pre_act;    // W h + b, [c_out][m]
  Signal nspace_input;       // PerLayer only: layer input field
  Signal nspace_pre_act;     // PerLayer only: after inverse + skip, before act
};

template <typename T>
struct ForwardCache {
  std::vector<LayerCache<T>> layers;
};

// --- forward passes ------------------------------------------------------

// Forward transform + gather: the reduced coefficients of each channel.
// Counts one forward transform execution.
template <typename T>
ReducedBlock<T> signal_to_reduced(const Signal& x, const ModeSelector& sel,
                                  const TransformOperator& op,
                                  TransformCounters* counters = nullptr);

// The transform-free core shared by both wirings: affine map and activation
// per layer, entirely on reduced blocks.
template <typename T>
ReducedBlock<T> kspace_stack_forward(const std::vector<KSpaceLayer<T>>& layers,
                                     ReducedBlock<T> h,
                                     ForwardCache<T>* cache = nullptr);

// One forward transform, k-space stack; returns the reduced prediction.
template <typename T>
ReducedBlock<T> t1_forward(const SpectralModel<T>& model, const Signal& x,
                           const TransformOperator& op,
                           TransformCounters* counters = nullptr,
                           ForwardCache<T>* cache = nullptr);

// t1_forward followed by the (single) inverse transform back to n-space.
template <typename T>
Signal t1_predict_signal(const SpectralModel<T>& model, const Signal& x,
                         const TransformOperator& op,
                         TransformCounters* counters = nullptr);

// Embed a reduced block and invert it; the n-space tail of the single
// transform wiring, exposed for evaluation code. Counts one inverse.
template <typename T>
Signal reduced_to_signal(const ReducedBlock<T>& block, const ModeSelector& sel,
                         const TransformOperator& op,
                         TransformCounters* counters = nullptr);

// Depth-d stack of transform-wrapped layers (2d transform executions).
template <typename T>
Signal per_layer_forward(const SpectralModel<T>& model, const Signal& x,
                         const TransformOperator& op,
                         TransformCounters* counters = nullptr,
                         ForwardCache<T>* cache = nullptr);

// Single transform-wrapped layer with the activation applied in k-space:
//   inverse(embed(act(W truncate(forward(x)) + b))) + residual .* x
template <typename T>
Signal fdm_layer_forward(const Signal& x, const KSpaceLayer<T>& layer,
                         const ModeSelector& sel, const TransformOperator& op,
                         TransformCounters* counters = nullptr);

// Wiring-dispatched n-space prediction.
template <typename T>
Signal predict_signal(const SpectralModel<T>& model, const Signal& x,
                      const TransformOperator& op,
                      TransformCounters* counters = nullptr);

// --- builders ------------------------------------------------------------

struct ModelConfig {
  Wiring wiring = Wiring::SingleTransform;
  TransformKind kind = TransformKind::Dct2;
  GridShape shape;
  int modes_per_axis = 0;  // low-pass selector extent per axis
  int depth = 1;
  int width = 1;
  int in_channels = 1;
  int out_channels = 1;
  bool bias = true;
  bool residual = true;                       // PerLayer wiring only
  Activation hidden_activation = Activation::Gelu;
  InitFamily init = InitFamily::VpDense;      // VpDiagonal => per-mode layers
  std::uint64_t seed = 0;
};

// Low-pass selector: first m modes (1-D) or the m x m corner block (2-D).
ModeSelector lowpass_selector(int m, GridShape shape);

AnyModel build_model(const ModelConfig& cfg);

// Flat views over every trainable scalar (complex counts as two doubles),
// in a fixed traversal order: per layer weights, then bias, then residual.
template <typename T>
std::vector<std::pair<double*, size_t>> parameter_buffers(SpectralModel<T>& m);

template <typename T>
size_t parameter_count(const SpectralModel<T>& m);

// Runs one forward pass and reports (forwards, inverses). `to_nspace` false
// stops a single-transform model at its reduced coefficients, the k-space
// objective path that needs no inversion; transform-per-layer models always
// end in n-space.
template <typename T>
std::pair<long long, long long> count_transforms(const SpectralModel<T>& model,
                                                 const Signal& x,
                                                 bool to_nspace = true);

}  // namespace sfdm
