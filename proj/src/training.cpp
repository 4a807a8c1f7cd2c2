#include "sfdm/training.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sfdm/activation.hpp"
#include "sfdm/rng.hpp"

namespace sfdm {

namespace {

constexpr double kNormFloor = 1e-300;  // guards division by a zero target

inline double conj_of(double x) { return x; }
inline cdouble conj_of(const cdouble& z) { return std::conj(z); }

inline double act_backward(double g, double z) { return g * gelu_prime(z); }
inline cdouble act_backward(const cdouble& g, const cdouble& z) {
  return cdouble(g.real() * gelu_prime(z.real()), g.imag() * gelu_prime(z.imag()));
}

// Per-sample relative L2: returns ||p-t||/||t|| and writes the scaled
// cotangent scale*(p-t)/(||p-t|| ||t||) when `cot` is non-null.
template <typename T>
double sample_rel_l2(const T* p, const T* t, size_t n, double scale, T* cot) {
  double diff2 = 0.0, targ2 = 0.0;
  for (size_t i = 0; i < n; ++i) {
    diff2 += std::norm(cdouble(p[i] - t[i]));
    targ2 += std::norm(cdouble(t[i]));
  }
  const double nd = std::sqrt(diff2);
  const double nt = std::max(std::sqrt(targ2), kNormFloor);
  if (cot) {
    const double c = nd > 0.0 ? scale / (nd * nt) : 0.0;
    for (size_t i = 0; i < n; ++i) cot[i] = (p[i] - t[i]) * c;
  }
  return nd / nt;
}

}  // namespace

double relative_l2_loss(const std::vector<std::vector<double>>& preds,
                        const std::vector<std::vector<double>>& targets) {
  check_arg(preds.size() == targets.size() && !preds.empty(),
            "relative_l2_loss: batch size mismatch");
  double loss = 0.0;
  for (size_t i = 0; i < preds.size(); ++i) {
    check_arg(preds[i].size() == targets[i].size(),
              "relative_l2_loss: sample size mismatch");
    loss += sample_rel_l2<double>(preds[i].data(), targets[i].data(),
                                  preds[i].size(), 0.0, nullptr);
  }
  return loss / static_cast<double>(preds.size());
}

double relative_l2_loss(const std::vector<std::vector<cdouble>>& preds,
                        const std::vector<std::vector<cdouble>>& targets) {
  check_arg(preds.size() == targets.size() && !preds.empty(),
            "relative_l2_loss: batch size mismatch");
  double loss = 0.0;
  for (size_t i = 0; i < preds.size(); ++i) {
    check_arg(preds[i].size() == targets[i].size(),
              "relative_l2_loss: sample size mismatch");
    loss += sample_rel_l2<cdouble>(preds[i].data(), targets[i].data(),
                                   preds[i].size(), 0.0, nullptr);
  }
  return loss / static_cast<double>(preds.size());
}

double normalized_mse(const std::vector<std::vector<double>>& preds,
                      const std::vector<std::vector<double>>& targets) {
  check_arg(preds.size() == targets.size() && !preds.empty(),
            "normalized_mse: batch size mismatch");
  double loss = 0.0;
  for (size_t i = 0; i < preds.size(); ++i) {
    check_arg(preds[i].size() == targets[i].size(),
              "normalized_mse: sample size mismatch");
    double diff2 = 0.0, targ2 = 0.0;
    for (size_t j = 0; j < preds[i].size(); ++j) {
      const double d = preds[i][j] - targets[i][j];
      diff2 += d * d;
      targ2 += targets[i][j] * targets[i][j];
    }
    loss += diff2 / std::max(targ2, kNormFloor);
  }
  return loss / static_cast<double>(preds.size());
}

// --- gradients ---------------------------------------------------------------

template <typename T>
void ModelGrads<T>::init_like(const SpectralModel<T>& m) {
  weights.clear();
  bias.clear();
  residual.clear();
  for (const auto& layer : m.layers) {
    weights.emplace_back(layer.weights.values.size(), T(0));
    bias.emplace_back(layer.bias.size(), T(0));
    residual.emplace_back(layer.residual.size(), 0.0);
  }
}

template <typename T>
void ModelGrads<T>::zero() {
  for (auto& w : weights) std::fill(w.begin(), w.end(), T(0));
  for (auto& b : bias) std::fill(b.begin(), b.end(), T(0));
  for (auto& r : residual) std::fill(r.begin(), r.end(), 0.0);
}

namespace {

inline void push_grad_buffer(std::vector<std::pair<double*, size_t>>& out,
                             std::vector<double>& v) {
  if (!v.empty()) out.emplace_back(v.data(), v.size());
}

inline void push_grad_buffer(std::vector<std::pair<double*, size_t>>& out,
                             std::vector<cdouble>& v) {
  if (!v.empty())
    out.emplace_back(reinterpret_cast<double*>(v.data()), 2 * v.size());
}

}  // namespace

template <typename T>
std::vector<std::pair<double*, size_t>> ModelGrads<T>::buffers() {
  std::vector<std::pair<double*, size_t>> out;
  for (size_t l = 0; l < weights.size(); ++l) {
    push_grad_buffer(out, weights[l]);
    push_grad_buffer(out, bias[l]);
    push_grad_buffer(out, residual[l]);
  }
  return out;
}

namespace {

// Adjoint of one affine layer on reduced blocks: accumulates weight and bias
// gradients and produces the input cotangent.
template <typename T>
void layer_affine_backward(const KSpaceLayer<T>& layer, const std::vector<T>& h,
                           const std::vector<T>& g, std::vector<T>& wgrad,
                           std::vector<T>& bgrad, std::vector<T>& hbar) {
  const int m = layer.weights.modes;
  hbar.assign(h.size(), T(0));
  if (!layer.bias.empty())
    for (size_t i = 0; i < g.size(); ++i) bgrad[i] += g[i];
  if (layer.weights.layout == WeightLayout::ModeDense) {
    for (int k = 0; k < m; ++k) {
      const T gk = g[k];
      const T* row = layer.weights.values.data() + static_cast<size_t>(k) * m;
      T* wrow = wgrad.data() + static_cast<size_t>(k) * m;
      for (int j = 0; j < m; ++j) {
        wrow[j] += gk * conj_of(h[j]);
        hbar[j] += conj_of(row[j]) * gk;
      }
    }
  } else {
    const auto& w = layer.weights;
    for (int o = 0; o < w.c_out; ++o)
      for (int i = 0; i < w.c_in; ++i) {
        const size_t base = (static_cast<size_t>(o) * w.c_in + i) * m;
        const T* hi = h.data() + static_cast<size_t>(i) * m;
        const T* go = g.data() + static_cast<size_t>(o) * m;
        T* hb = hbar.data() + static_cast<size_t>(i) * m;
        for (int k = 0; k < m; ++k) {
          wgrad[base + k] += go[k] * conj_of(hi[k]);
          hb[k] += conj_of(w.values[base + k]) * go[k];
        }
      }
  }
}

// Adjoint of the conjugate-symmetric embed: fold mirror cotangents back onto
// the reduced slots.
std::vector<cdouble> embed_sym_adjoint(const std::vector<cdouble>& gfull,
                                       const ModeSelector& sel) {
  std::vector<cdouble> out(sel.indices.size());
  for (size_t i = 0; i < sel.indices.size(); ++i) {
    const int idx = sel.indices[i];
    const int mir = mirror_index(idx, sel.spectrum_shape);
    if (mir == idx) {
      out[i] = cdouble(gfull[idx].real(), 0.0);
    } else if (std::binary_search(sel.indices.begin(), sel.indices.end(), mir)) {
      out[i] = gfull[idx];
    } else {
      out[i] = gfull[idx] + std::conj(gfull[mir]);
    }
  }
  return out;
}

}  // namespace

template <typename T>
void kspace_stack_backward(const std::vector<KSpaceLayer<T>>& layers,
                           const ForwardCache<T>& cache,
                           const std::vector<T>& out_cotangent,
                           ModelGrads<T>& grads,
                           std::vector<T>* input_cotangent) {
  check_arg(cache.layers.size() == layers.size(),
            "kspace_stack_backward: cache depth mismatch");
  std::vector<T> g = out_cotangent;
  std::vector<T> hbar;
  for (int l = static_cast<int>(layers.size()) - 1; l >= 0; --l) {
    const auto& layer = layers[l];
    const auto& lc = cache.layers[l];
    if (layer.activation == Activation::Gelu)
      for (size_t i = 0; i < g.size(); ++i) g[i] = act_backward(g[i], lc.pre_act[i]);
    layer_affine_backward(layer, lc.input, g, grads.weights[l], grads.bias[l],
                          hbar);
    g = hbar;
  }
  if (input_cotangent) *input_cotangent = std::move(g);
}

template <typename T>
void per_layer_backward(const SpectralModel<T>& model,
                        const TransformOperator& op,
                        const ForwardCache<T>& cache,
                        const Signal& out_cotangent, ModelGrads<T>& grads) {
  check_arg(cache.layers.size() == model.layers.size(),
            "per_layer_backward: cache depth mismatch");
  constexpr bool is_dft = std::is_same_v<T, cdouble>;
  const int n = model.shape.size();
  const int modes = model.selector.modes();
  Signal r = out_cotangent;
  std::vector<T> hbar;
  for (int l = static_cast<int>(model.layers.size()) - 1; l >= 0; --l) {
    const auto& layer = model.layers[l];
    const auto& lc = cache.layers[l];
    if (layer.activation == Activation::Gelu)
      for (size_t i = 0; i < r.values.size(); ++i)
        r.values[i] *= gelu_prime(lc.nspace_pre_act.values[i]);

    Signal r_skip(model.shape, layer.c_in());
    if (!layer.residual.empty())
      for (int c = 0; c < layer.c_out(); ++c) {
        const double* x = lc.nspace_input.channel(c);
        const double* rc = r.channel(c);
        double* rs = r_skip.channel(c);
        double acc = 0.0;
        for (int i = 0; i < n; ++i) {
          acc += x[i] * rc[i];
          rs[i] = layer.residual[c] * rc[i];
        }
        grads.residual[l][c] += acc;
      }

    // adjoint of (real part of inverse . embed): forward-transform the real
    // cotangent, then fold the embedding
    Spectrum gfull = op.forward(r);
    std::vector<T> gred(static_cast<size_t>(layer.c_out()) * modes);
    for (int c = 0; c < layer.c_out(); ++c) {
      if constexpr (is_dft) {
        std::vector<cdouble> chan(gfull.dft.begin() + static_cast<size_t>(c) * n,
                                  gfull.dft.begin() + static_cast<size_t>(c + 1) * n);
        auto folded = embed_sym_adjoint(chan, model.selector);
        std::copy(folded.begin(), folded.end(),
                  gred.begin() + static_cast<size_t>(c) * modes);
      } else {
        for (int k = 0; k < modes; ++k)
          gred[static_cast<size_t>(c) * modes + k] =
              gfull.dct[static_cast<size_t>(c) * n + model.selector.indices[k]];
      }
    }

    layer_affine_backward(layer, lc.input, gred, grads.weights[l],
                          grads.bias[l], hbar);

    // adjoint of (gather . forward transform): scatter, then inverse
    Spectrum scat;
    scat.kind = model.kind;
    scat.shape = model.shape;
    scat.channels = layer.c_in();
    Signal r_prev(model.shape, layer.c_in());
    if constexpr (is_dft) {
      scat.dft.assign(static_cast<size_t>(layer.c_in()) * n, cdouble(0));
      for (int c = 0; c < layer.c_in(); ++c)
        for (int k = 0; k < modes; ++k)
          scat.dft[static_cast<size_t>(c) * n + model.selector.indices[k]] =
              hbar[static_cast<size_t>(c) * modes + k];
      auto field = op.inverse_complex(scat);
      for (size_t i = 0; i < field.size(); ++i) r_prev.values[i] = field[i].real();
    } else {
      scat.dct.assign(static_cast<size_t>(layer.c_in()) * n, 0.0);
      for (int c = 0; c < layer.c_in(); ++c)
        for (int k = 0; k < modes; ++k)
          scat.dct[static_cast<size_t>(c) * n + model.selector.indices[k]] =
              hbar[static_cast<size_t>(c) * modes + k];
      r_prev = op.inverse(scat);
    }

    for (size_t i = 0; i < r_prev.values.size(); ++i)
      r_prev.values[i] += r_skip.values[i];
    r = std::move(r_prev);
  }
}

template <typename T>
double reduced_batch_loss_and_grads(const SpectralModel<T>& model,
                                    const std::vector<const ReducedBlock<T>*>& xs,
                                    const std::vector<const ReducedBlock<T>*>& ys,
                                    ModelGrads<T>& grads) {
  check_arg(xs.size() == ys.size() && !xs.empty(),
            "reduced_batch_loss_and_grads: batch size mismatch");
  const double scale = 1.0 / static_cast<double>(xs.size());
  double loss = 0.0;
  ForwardCache<T> cache;
  std::vector<T> cot;
  for (size_t i = 0; i < xs.size(); ++i) {
    ReducedBlock<T> pred = kspace_stack_forward(model.layers, *xs[i], &cache);
    check_arg(pred.v.size() == ys[i]->v.size(),
              "reduced_batch_loss_and_grads: target size mismatch");
    cot.resize(pred.v.size());
    loss += sample_rel_l2(pred.v.data(), ys[i]->v.data(), pred.v.size(), scale,
                          cot.data());
    kspace_stack_backward(model.layers, cache, cot, grads,
                          static_cast<std::vector<T>*>(nullptr));
  }
  return loss * scale;
}

template <typename T>
double batch_loss_and_grads(const SpectralModel<T>& model,
                            const TransformOperator& op,
                            const std::vector<const Signal*>& xs,
                            const std::vector<const Signal*>& ys,
                            ModelGrads<T>& grads) {
  check_arg(xs.size() == ys.size() && !xs.empty(),
            "batch_loss_and_grads: batch size mismatch");
  const double scale = 1.0 / static_cast<double>(xs.size());
  if (model.wiring == Wiring::SingleTransform) {
    std::vector<ReducedBlock<T>> xr, yr;
    xr.reserve(xs.size());
    yr.reserve(xs.size());
    for (size_t i = 0; i < xs.size(); ++i) {
      xr.push_back(signal_to_reduced<T>(*xs[i], model.selector, op));
      yr.push_back(signal_to_reduced<T>(*ys[i], model.selector, op));
    }
    std::vector<const ReducedBlock<T>*> xp, yp;
    for (size_t i = 0; i < xs.size(); ++i) {
      xp.push_back(&xr[i]);
      yp.push_back(&yr[i]);
    }
    return reduced_batch_loss_and_grads(model, xp, yp, grads);
  }
  double loss = 0.0;
  ForwardCache<T> cache;
  for (size_t i = 0; i < xs.size(); ++i) {
    Signal pred = per_layer_forward(model, *xs[i], op, nullptr, &cache);
    check_arg(pred.values.size() == ys[i]->values.size(),
              "batch_loss_and_grads: target size mismatch");
    Signal cot(pred.shape, pred.channels);
    loss += sample_rel_l2(pred.values.data(), ys[i]->values.data(),
                          pred.values.size(), scale, cot.values.data());
    per_layer_backward(model, op, cache, cot, grads);
  }
  return loss * scale;
}

// --- optimizer ---------------------------------------------------------------

void AdamW::step(const std::vector<std::pair<double*, size_t>>& params,
                 const std::vector<std::pair<double*, size_t>>& grads,
                 double lr) {
  check_arg(params.size() == grads.size(), "AdamW::step: buffer list mismatch");
  ++t_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  size_t off = 0;
  for (size_t b = 0; b < params.size(); ++b) {
    check_arg(params[b].second == grads[b].second,
              "AdamW::step: buffer size mismatch");
    double* p = params[b].first;
    const double* g = grads[b].first;
    const size_t len = params[b].second;
    check_arg(off + len <= m_.size(), "AdamW::step: state size exceeded");
    for (size_t i = 0; i < len; ++i) {
      double& m = m_[off + i];
      double& v = v_[off + i];
      m = cfg_.beta1 * m + (1.0 - cfg_.beta1) * g[i];
      v = cfg_.beta2 * v + (1.0 - cfg_.beta2) * g[i] * g[i];
      const double mhat = m / bc1;
      const double vhat = v / bc2;
      p[i] -= lr * (mhat / (std::sqrt(vhat) + cfg_.eps) +
                    cfg_.weight_decay * p[i]);
    }
    off += len;
  }
  check_arg(off == m_.size(), "AdamW::step: buffers do not cover the state");
}

// --- training loop --------------------------------------------------------------

namespace {

template <typename T>
double reduced_batch_loss(const SpectralModel<T>& model,
                          const std::vector<ReducedBlock<T>>& xs,
                          const std::vector<ReducedBlock<T>>& ys) {
  double loss = 0.0;
  for (size_t i = 0; i < xs.size(); ++i) {
    ReducedBlock<T> pred =
        kspace_stack_forward(model.layers, xs[i],
                             static_cast<ForwardCache<T>*>(nullptr));
    loss += sample_rel_l2(pred.v.data(), ys[i].v.data(), pred.v.size(), 0.0,
                          static_cast<T*>(nullptr));
  }
  return loss / static_cast<double>(xs.size());
}

template <typename T>
double nspace_batch_loss(const SpectralModel<T>& model,
                         const TransformOperator& op,
                         const std::vector<Signal>& xs,
                         const std::vector<Signal>& ys,
                         TransformCounters* counters) {
  double loss = 0.0;
  for (size_t i = 0; i < xs.size(); ++i) {
    Signal pred = per_layer_forward(model, xs[i], op, counters,
                                    static_cast<ForwardCache<T>*>(nullptr));
    loss += sample_rel_l2(pred.values.data(), ys[i].values.data(),
                          pred.values.size(), 0.0,
                          static_cast<double*>(nullptr));
  }
  return loss / static_cast<double>(xs.size());
}

void check_training_health(double loss, double threshold, int epoch) {
  check_runtime(std::isfinite(loss),
                "training diverged: non-finite loss at epoch " +
                    std::to_string(epoch));
  check_runtime(loss <= threshold,
                "training diverged: loss " + std::to_string(loss) +
                    " above threshold at epoch " + std::to_string(epoch));
}

}  // namespace

template <typename T>
TrainResult train_model(SpectralModel<T>& model,
                        const std::vector<Signal>& train_x,
                        const std::vector<Signal>& train_y,
                        const std::vector<Signal>& val_x,
                        const std::vector<Signal>& val_y,
                        const TrainConfig& cfg) {
  validate_model(model, "train_model");
  check_arg(train_x.size() == train_y.size() && !train_x.empty(),
            "train_model: training set is empty or misaligned");
  check_arg(val_x.size() == val_y.size(), "train_model: validation misaligned");
  check_arg(cfg.epochs >= 1 && cfg.batch_size >= 1,
            "train_model: epochs and batch_size must be positive");

  const TransformOperator op = model.make_operator();
  TransformCounters counters;
  TrainResult result;

  const bool single = model.wiring == Wiring::SingleTransform;
  std::vector<ReducedBlock<T>> train_xr, train_yr, val_xr, val_yr;
  if (single) {
    // the whole point of this wiring: transform each sample exactly once
    auto reduce_all = [&](const std::vector<Signal>& sig,
                          std::vector<ReducedBlock<T>>& out) {
      out.reserve(sig.size());
      for (const Signal& s : sig)
        out.push_back(signal_to_reduced<T>(s, model.selector, op, &counters));
    };
    reduce_all(train_x, train_xr);
    reduce_all(train_y, train_yr);
    reduce_all(val_x, val_xr);
    reduce_all(val_y, val_yr);
  }

  const size_t n_train = train_x.size();
  AdamW optimizer(cfg.opt, parameter_count(model));
  auto params = parameter_buffers(model);
  ModelGrads<T> grads;
  grads.init_like(model);
  auto grad_buffers = grads.buffers();

  RandomStream shuffle_root(cfg.shuffle_seed);
  std::vector<size_t> order(n_train);
  for (size_t i = 0; i < n_train; ++i) order[i] = i;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr = cfg.schedule.at(epoch);
    if (cfg.shuffle) {
      RandomStream rs = shuffle_root.substream(static_cast<std::uint64_t>(epoch));
      deterministic_shuffle(order, rs);
    }

    double epoch_loss = 0.0;
    size_t seen = 0;
    for (size_t start = 0; start < n_train; start += cfg.batch_size) {
      const size_t stop = std::min(n_train, start + cfg.batch_size);
      grads.zero();
      double batch_loss;
      if (single) {
        std::vector<const ReducedBlock<T>*> xp, yp;
        for (size_t i = start; i < stop; ++i) {
          xp.push_back(&train_xr[order[i]]);
          yp.push_back(&train_yr[order[i]]);
        }
        batch_loss = reduced_batch_loss_and_grads(model, xp, yp, grads);
      } else {
        std::vector<const Signal*> xp, yp;
        for (size_t i = start; i < stop; ++i) {
          xp.push_back(&train_x[order[i]]);
          yp.push_back(&train_y[order[i]]);
        }
        // primal cost of this wiring: d transforms each way per sample
        counters.forward += model.depth() * static_cast<long long>(stop - start);
        counters.inverse += model.depth() * static_cast<long long>(stop - start);
        batch_loss = batch_loss_and_grads(model, op, xp, yp, grads);
      }
      check_training_health(batch_loss, cfg.divergence_threshold, epoch);
      optimizer.step(params, grad_buffers, lr);
      epoch_loss += batch_loss * static_cast<double>(stop - start);
      seen += stop - start;
    }
    epoch_loss /= static_cast<double>(seen);

    EpochStats stats;
    stats.epoch = epoch;
    stats.lr = lr;
    stats.train_loss = epoch_loss;
    stats.val_nmse = std::numeric_limits<double>::quiet_NaN();
    if (!val_x.empty()) {
      stats.val_loss = single ? reduced_batch_loss(model, val_xr, val_yr)
                              : nspace_batch_loss(model, op, val_x, val_y,
                                                  &counters);
      if (cfg.track_val_nmse) {
        if (single) {
          double acc = 0.0;
          for (size_t i = 0; i < val_xr.size(); ++i) {
            ReducedBlock<T> pred = kspace_stack_forward(
                model.layers, val_xr[i], static_cast<ForwardCache<T>*>(nullptr));
            Signal ps = reduced_to_signal(pred, model.selector, op, &counters);
            double diff2 = 0.0, targ2 = 0.0;
            for (size_t j = 0; j < ps.values.size(); ++j) {
              const double d = ps.values[j] - val_y[i].values[j];
              diff2 += d * d;
              targ2 += val_y[i].values[j] * val_y[i].values[j];
            }
            acc += diff2 / std::max(targ2, kNormFloor);
          }
          stats.val_nmse = acc / static_cast<double>(val_xr.size());
        } else {
          stats.val_nmse = evaluate_nspace(model, val_x, val_y, &counters);
        }
      }
      check_training_health(stats.val_loss, cfg.divergence_threshold, epoch);
    } else {
      stats.val_loss = std::numeric_limits<double>::quiet_NaN();
    }
    result.history.push_back(stats);
  }

  result.forward_transforms = counters.forward;
  result.inverse_transforms = counters.inverse;
  return result;
}

TrainResult train_any(AnyModel& model, const std::vector<Signal>& train_x,
                      const std::vector<Signal>& train_y,
                      const std::vector<Signal>& val_x,
                      const std::vector<Signal>& val_y, const TrainConfig& cfg) {
  return std::visit(
      [&](auto& m) {
        return train_model(m, train_x, train_y, val_x, val_y, cfg);
      },
      model);
}

// --- evaluation ----------------------------------------------------------------

template <typename T>
double evaluate_nspace(const SpectralModel<T>& model,
                       const std::vector<Signal>& xs,
                       const std::vector<Signal>& ys,
                       TransformCounters* counters) {
  check_arg(xs.size() == ys.size() && !xs.empty(),
            "evaluate_nspace: empty or misaligned evaluation set");
  const TransformOperator op = model.make_operator();
  double acc = 0.0;
  for (size_t i = 0; i < xs.size(); ++i) {
    Signal pred = predict_signal(model, xs[i], op, counters);
    check_arg(pred.values.size() == ys[i].values.size(),
              "evaluate_nspace: target size mismatch");
    double diff2 = 0.0, targ2 = 0.0;
    for (size_t j = 0; j < pred.values.size(); ++j) {
      const double d = pred.values[j] - ys[i].values[j];
      diff2 += d * d;
      targ2 += ys[i].values[j] * ys[i].values[j];
    }
    acc += diff2 / std::max(targ2, kNormFloor);
  }
  return acc / static_cast<double>(xs.size());
}

double evaluate_any(const AnyModel& model, const std::vector<Signal>& xs,
                    const std::vector<Signal>& ys) {
  return std::visit([&](const auto& m) { return evaluate_nspace(m, xs, ys); },
                    model);
}

template <typename T>
std::vector<Signal> rollout(const SpectralModel<T>& model, const Signal& ic,
                            int steps) {
  check_arg(steps >= 1, "rollout: steps must be positive");
  check_arg(model.input_channels() == 1 && model.output_channels() == 1,
            "rollout: requires a single-channel one-step model");
  const TransformOperator op = model.make_operator();
  std::vector<Signal> out;
  out.reserve(steps);
  Signal cur = ic;
  for (int s = 0; s < steps; ++s) {
    cur = predict_signal(model, cur, op);
    out.push_back(cur);
  }
  return out;
}

#define SFDM_INSTANTIATE(T)                                                      \
  template struct ModelGrads<T>;                                                 \
  template void kspace_stack_backward<T>(const std::vector<KSpaceLayer<T>>&,     \
                                         const ForwardCache<T>&,                 \
                                         const std::vector<T>&, ModelGrads<T>&,  \
                                         std::vector<T>*);                       \
  template void per_layer_backward<T>(const SpectralModel<T>&,                   \
                                      const TransformOperator&,                  \
                                      const ForwardCache<T>&, const Signal&,     \
                                      ModelGrads<T>&);                           \
  template double batch_loss_and_grads<T>(const SpectralModel<T>&,               \
                                          const TransformOperator&,              \
                                          const std::vector<const Signal*>&,     \
                                          const std::vector<const Signal*>&,     \
                                          ModelGrads<T>&);                       \
  template double reduced_batch_loss_and_grads<T>(                               \
      const SpectralModel<T>&, const std::vector<const ReducedBlock<T>*>&,       \
      const std::vector<const ReducedBlock<T>*>&, ModelGrads<T>&);               \
  template TrainResult train_model<T>(SpectralModel<T>&,                         \
                                      const std::vector<Signal>&,                \
                                      const std::vector<Signal>&,                \
                                      const std::vector<Signal>&,                \
                                      const std::vector<Signal>&,                \
                                      const TrainConfig&);                       \
  template double evaluate_nspace<T>(const SpectralModel<T>&,                    \
                                     const std::vector<Signal>&,                 \
                                     const std::vector<Signal>&,                 \
                                     TransformCounters*);                        \
  template std::vector<Signal> rollout<T>(const SpectralModel<T>&,               \
                                          const Signal&, int);

SFDM_INSTANTIATE(double)
SFDM_INSTANTIATE(cdouble)

#undef SFDM_INSTANTIATE

}  // namespace sfdm
