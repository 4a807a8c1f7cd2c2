#pragma once
// Losses, reverse-mode gradients, AdamW and the training loop.
//
// The objective lives in each wiring's natural space:
//   single_transform  relative L2 on the reduced coefficients; inputs and
//                     targets are transformed and gathered once before the
//                     first epoch, so an entire run executes one forward
//                     transform per sample and none per epoch.
//   per_layer         relative L2 on the n-space prediction; every epoch
//                     pays the full 2d transforms per sample, plus their
//                     adjoints in the backward pass.
//
// Gradients are assembled by hand from the layer caches. The adjoint of an
// orthonormal transform is its inverse; for the real-output Dft path the
// adjoint of (real part after inverse transform) is the forward transform of
// the real cotangent, and the conjugate-symmetric embedding contributes
// conj-mirror terms. Complex parameters are treated as independent real and
// imaginary components (gradients are packed back into std::complex).
//
// Transform counters in TrainResult report primal forward-pass executions
// only; adjoint transforms inside backward are not counted.

#include <cmath>
#include <cstdint>
#include <vector>

#include "sfdm/layers.hpp"

namespace sfdm {

// --- losses ---------------------------------------------------------------

// mean over samples of ||p - t|| / ||t||
double relative_l2_loss(const std::vector<std::vector<double>>& preds,
                        const std::vector<std::vector<double>>& targets);
double relative_l2_loss(const std::vector<std::vector<cdouble>>& preds,
                        const std::vector<std::vector<cdouble>>& targets);

// mean over samples of ||p - t||^2 / ||t||^2
double normalized_mse(const std::vector<std::vector<double>>& preds,
                      const std::vector<std::vector<double>>& targets);

// --- gradients --------------------------------------------------------------

template <typename T>
struct ModelGrads {
  std::vector<std::vector<T>> weights;
  std::vector<std::vector<T>> bias;
  std::vector<std::vector<double>> residual;

  void init_like(const SpectralModel<T>& m);
  void zero();
  // Flat views aligned with parameter_buffers(model).
  std::vector<std::pair<double*, size_t>> buffers();
};

// Accumulates dL/dtheta for one sample given the cotangent of the model
// output (reduced block for the single-transform wiring, n-space signal for
// the per-layer wiring). The forward cache must come from the matching
// forward call on the same sample.
template <typename T>
void kspace_stack_backward(const std::vector<KSpaceLayer<T>>& layers,
                           const ForwardCache<T>& cache,
                           const std::vector<T>& out_cotangent,
                           ModelGrads<T>& grads,
                           std::vector<T>* input_cotangent = nullptr);

template <typename T>
void per_layer_backward(const SpectralModel<T>& model,
                        const TransformOperator& op,
                        const ForwardCache<T>& cache,
                        const Signal& out_cotangent, ModelGrads<T>& grads);

// Loss and gradients of one batch in the wiring's natural space. Signals in
// `xs`/`ys` are n-space; the single-transform path transforms them per call,
// so the training loop precomputes reduced blocks and calls the reduced
// overload instead.
template <typename T>
double batch_loss_and_grads(const SpectralModel<T>& model,
                            const TransformOperator& op,
                            const std::vector<const Signal*>& xs,
                            const std::vector<const Signal*>& ys,
                            ModelGrads<T>& grads);

template <typename T>
double reduced_batch_loss_and_grads(const SpectralModel<T>& model,
                                    const std::vector<const ReducedBlock<T>*>& xs,
                                    const std::vector<const ReducedBlock<T>*>& ys,
                                    ModelGrads<T>& grads);

// --- optimizer --------------------------------------------------------------

struct AdamWConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;  // decoupled
};

class AdamW {
 public:
  AdamW(AdamWConfig cfg, size_t param_count)
      : cfg_(cfg), m_(param_count, 0.0), v_(param_count, 0.0) {}

  // params/grads: aligned flat buffer lists covering param_count scalars.
  void step(const std::vector<std::pair<double*, size_t>>& params,
            const std::vector<std::pair<double*, size_t>>& grads, double lr);

  long long steps_taken() const { return t_; }

 private:
  AdamWConfig cfg_;
  std::vector<double> m_, v_;
  long long t_ = 0;
};

// Step decay: lr(epoch) = base * gamma^(epoch / step_every); step_every <= 0
// keeps the rate constant.
struct LrSchedule {
  double base_lr = 1e-3;
  int step_every = 0;
  double gamma = 1.0;

  double at(int epoch) const {
    if (step_every <= 0) return base_lr;
    return base_lr * std::pow(gamma, epoch / step_every);
  }
};

// --- training loop -----------------------------------------------------------

struct TrainConfig {
  int epochs = 100;
  int batch_size = 16;
  AdamWConfig opt;
  LrSchedule schedule;  // schedule.base_lr wins over opt.lr
  bool shuffle = true;
  std::uint64_t shuffle_seed = 0;
  double divergence_threshold = 1e6;
  // When set, evaluates n-space normalized MSE on the validation set each
  // epoch (costs transforms; evaluation only, never part of the objective).
  bool track_val_nmse = false;
};

struct EpochStats {
  int epoch = 0;
  double lr = 0.0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double val_nmse = 0.0;  // NaN unless track_val_nmse
};

struct TrainResult {
  std::vector<EpochStats> history;
  long long forward_transforms = 0;  // primal executions during training
  long long inverse_transforms = 0;
};

template <typename T>
TrainResult train_model(SpectralModel<T>& model,
                        const std::vector<Signal>& train_x,
                        const std::vector<Signal>& train_y,
                        const std::vector<Signal>& val_x,
                        const std::vector<Signal>& val_y,
                        const TrainConfig& cfg);

TrainResult train_any(AnyModel& model, const std::vector<Signal>& train_x,
                      const std::vector<Signal>& train_y,
                      const std::vector<Signal>& val_x,
                      const std::vector<Signal>& val_y, const TrainConfig& cfg);

// --- evaluation ---------------------------------------------------------------

// n-space normalized MSE of model predictions against targets.
template <typename T>
double evaluate_nspace(const SpectralModel<T>& model,
                       const std::vector<Signal>& xs,
                       const std::vector<Signal>& ys,
                       TransformCounters* counters = nullptr);

double evaluate_any(const AnyModel& model, const std::vector<Signal>& xs,
                    const std::vector<Signal>& ys);

// Autoregressive rollout of a single-channel one-step model.
template <typename T>
std::vector<Signal> rollout(const SpectralModel<T>& model, const Signal& ic,
                            int steps);

}  // namespace sfdm
