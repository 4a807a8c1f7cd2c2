// Command-line entry point: dataset generation, training, evaluation, mode
// analysis, initialization probes, wiring benchmarks, and the mathematical
// property suite.
//
// Every artifact-producing subcommand takes --out and writes a resolved
// config echo (config.json) beside its outputs, so a run directory is
// reproducible from its own contents. Deterministic subcommands (gen-data,
// train, verify) rewrite byte-identical artifacts when rerun with the same
// config and seed; no artifact contains timestamps or wall-clock values
// except bench.csv, whose entire purpose is timing.
//
// Exit codes: 0 success, 1 invalid arguments or config, 2 numerical failure,
// 3 I/O failure. Config violations are reported with the dotted path of the
// offending key. SFDM_THREADS caps internal parallelism; every pipeline here
// is single-threaded, so the effective cap is 1.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sfdm/bench.hpp"
#include "sfdm/data.hpp"
#include "sfdm/init.hpp"
#include "sfdm/layers.hpp"
#include "sfdm/mode_selection.hpp"
#include "sfdm/model_io.hpp"
#include "sfdm/training.hpp"
#include "sfdm/verify.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

using namespace sfdm;

// --- plumbing ---------------------------------------------------------------

int resolve_thread_cap() {
  const char* env = std::getenv("SFDM_THREADS");
  if (env == nullptr || *env == '\0') return 1;
  const std::string s(env);
  check_arg(s.size() <= 6, "SFDM_THREADS: out of range");
  for (char c : s)
    check_arg(c >= '0' && c <= '9', "SFDM_THREADS: must be a positive integer");
  const int v = std::atoi(s.c_str());
  check_arg(v >= 1, "SFDM_THREADS: must be a positive integer");
  return std::min(v, 1);  // every pipeline is single-threaded
}

std::string csv_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_text_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  check_io(out.good(), "cannot open for writing: " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.flush();
  check_io(out.good(), "write failed: " + path.string());
}

std::uint64_t file_checksum(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  check_io(in.good(), "cannot read back: " + path.string());
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[65536];
  while (in.read(buf, sizeof buf) || in.gcount() > 0)
    h = fnv1a64(buf, static_cast<size_t>(in.gcount()), h);
  return h;
}

json read_json_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  check_io(in.good(), "cannot read: " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw std::invalid_argument("config: " + path.string() + ": " + e.what());
  }
}

fs::path prepare_out_dir(const std::string& out) {
  check_arg(!out.empty(), "--out must not be empty");
  fs::path dir(out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  check_io(!ec, "cannot create output directory: " + out);
  return dir;
}

// Resolved-config echo: the provenance record every run directory carries.
void write_config_echo(const fs::path& dir, json echo) {
  echo["threads"] = 1;
  echo["format_versions"] = {{"checkpoint", kCheckpointVersion},
                             {"dataset", kDatasetVersion}};
  write_text_file(dir / "config.json", echo.dump(2) + "\n");
}

// Schema walker over a parsed config; violations name the dotted key path.
class JsonView {
 public:
  JsonView(const json& j, std::string path) : j_(&j), path_(std::move(path)) {}

  std::string where(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }
  bool has(const std::string& key) const { return j_->contains(key); }

  JsonView child(const std::string& key) const {
    require(has(key), where(key) + ": required section missing");
    require((*j_)[key].is_object(), where(key) + ": expected an object");
    return JsonView((*j_)[key], where(key));
  }
  void allow_keys(std::initializer_list<const char*> keys) const {
    for (auto it = j_->begin(); it != j_->end(); ++it) {
      bool ok = false;
      for (const char* k : keys) ok = ok || it.key() == k;
      require(ok, (path_.empty() ? it.key() : path_ + "." + it.key()) +
                      ": unknown key");
    }
  }

  double num_req(const std::string& key) const {
    require(has(key), where(key) + ": required value missing");
    const json& v = (*j_)[key];
    require(v.is_number(), where(key) + ": expected a number");
    return v.get<double>();
  }
  double num(const std::string& key, double dflt) const {
    return has(key) ? num_req(key) : dflt;
  }
  long long int_req(const std::string& key) const {
    require(has(key), where(key) + ": required value missing");
    const json& v = (*j_)[key];
    require(v.is_number_integer(), where(key) + ": expected an integer");
    return v.get<long long>();
  }
  long long integer(const std::string& key, long long dflt) const {
    return has(key) ? int_req(key) : dflt;
  }
  std::string str_req(const std::string& key) const {
    require(has(key), where(key) + ": required value missing");
    const json& v = (*j_)[key];
    require(v.is_string(), where(key) + ": expected a string");
    return v.get<std::string>();
  }
  std::string str(const std::string& key, const std::string& dflt) const {
    return has(key) ? str_req(key) : dflt;
  }
  bool boolean(const std::string& key, bool dflt) const {
    if (!has(key)) return dflt;
    const json& v = (*j_)[key];
    require(v.is_boolean(), where(key) + ": expected a boolean");
    return v.get<bool>();
  }

 private:
  static void require(bool ok, const std::string& msg) {
    if (!ok) throw std::invalid_argument("config: " + msg);
  }
  const json* j_;
  std::string path_;
};

TransformKind transform_from_name(const std::string& name, const std::string& where) {
  if (name == "dct2") return TransformKind::Dct2;
  if (name == "dft") return TransformKind::Dft;
  throw std::invalid_argument(where + ": expected dct2 or dft, got '" + name + "'");
}

InitFamily init_from_name(const std::string& name, const std::string& where) {
  if (name == "vp_dense") return InitFamily::VpDense;
  if (name == "vp_diagonal") return InitFamily::VpDiagonal;
  if (name == "xavier") return InitFamily::Xavier;
  throw std::invalid_argument(where + ": expected vp_dense, vp_diagonal or xavier, got '" +
                              name + "'");
}

Split split_from_name(const std::string& name) {
  if (name == "train") return Split::Train;
  if (name == "val") return Split::Val;
  if (name == "test") return Split::Test;
  throw std::invalid_argument("--split: expected train, val or test, got '" + name + "'");
}

GeneratorKind generator_kind_from_flag(std::string name) {
  if (name == "heat2d") name = "heat_2d";
  if (name == "burgers1d") name = "burgers_1d";
  return generator_kind_from_name(name);
}

json generator_config_json(const GeneratorConfig& cfg) {
  return json{{"kind", generator_kind_name(cfg.kind)},
              {"resolution", cfg.resolution},
              {"viscosity", cfg.viscosity},
              {"horizon", cfg.horizon},
              {"decay", cfg.decay},
              {"count", cfg.count},
              {"seed", cfg.seed},
              {"train_fraction", cfg.train_fraction},
              {"val_fraction", cfg.val_fraction},
              {"dt", cfg.dt}};
}

// --- gen-data ----------------------------------------------------------------

struct GenDataArgs {
  std::string kind = "heat2d";
  int resolution = 32;
  int count = 100;
  double viscosity = 1e-2;
  double horizon = 1.0;
  double decay = 2.5;
  double dt = 0.0;
  double train_fraction = 0.8;
  double val_fraction = 0.1;
  std::uint64_t seed = 0;
  std::string out;
};

int cmd_gen_data(const GenDataArgs& a) {
  GeneratorConfig cfg;
  cfg.kind = generator_kind_from_flag(a.kind);
  cfg.resolution = a.resolution;
  cfg.viscosity = a.viscosity;
  cfg.horizon = a.horizon;
  cfg.decay = a.decay;
  cfg.count = a.count;
  cfg.seed = a.seed;
  cfg.train_fraction = a.train_fraction;
  cfg.val_fraction = a.val_fraction;
  cfg.dt = a.dt;
  validate_generator_config(cfg);

  fs::path dir = prepare_out_dir(a.out);
  Dataset ds = generate_dataset(cfg);
  save_dataset(ds, (dir / "data").string());

  json echo;
  echo["subcommand"] = "gen-data";
  echo["generator"] = generator_config_json(cfg);
  echo["splits"] = {{"train", ds.n_train}, {"val", ds.n_val}, {"test", ds.n_test}};
  write_config_echo(dir, echo);

  std::cout << "wrote " << ds.pairs.size() << " pairs (" << ds.n_train << "/"
            << ds.n_val << "/" << ds.n_test << " train/val/test) to "
            << (dir / "data").string() << ".{sfds,json}\n";
  return 0;
}

// --- train ---------------------------------------------------------------------

struct TrainArgs {
  std::string config_path;
  std::string dataset_override;
  int epochs_override = 0;
  std::string out;
};

struct ResolvedTrainConfig {
  std::string dataset_stem;
  int ntrain = 0;  // 0 = whole split
  int nval = 0;
  ModelConfig model;
  std::string model_type;
  TrainConfig train;
  json echo;  // fully resolved mirror of the accepted schema
};

ResolvedTrainConfig parse_train_config(const json& root_json, const TrainArgs& a) {
  ResolvedTrainConfig r;
  JsonView root(root_json, "");
  root.allow_keys({"datamodule", "model", "train", "loss_fn"});

  JsonView dm = root.child("datamodule");
  dm.allow_keys({"dataset", "ntrain", "nval", "batch_size", "history_size"});
  r.dataset_stem = a.dataset_override.empty() ? dm.str_req("dataset")
                                              : a.dataset_override;
  r.ntrain = static_cast<int>(dm.integer("ntrain", 0));
  r.nval = static_cast<int>(dm.integer("nval", 0));
  check_arg(r.ntrain >= 0, "config: datamodule.ntrain: must be nonnegative");
  check_arg(r.nval >= 0, "config: datamodule.nval: must be nonnegative");
  const int batch_size = static_cast<int>(dm.integer("batch_size", 16));
  check_arg(batch_size >= 1, "config: datamodule.batch_size: must be positive");
  const long long history = dm.integer("history_size", 1);
  check_arg(history == 1, "config: datamodule.history_size: only 1 is supported");

  JsonView mv = root.child("model");
  mv.allow_keys({"type", "transform", "modes", "nlayers", "width", "activation",
                 "init", "bias", "residual", "seed"});
  r.model_type = mv.str("type", "t1");
  if (r.model_type == "t1")
    r.model.wiring = Wiring::SingleTransform;
  else if (r.model_type == "fno")
    r.model.wiring = Wiring::PerLayer;
  else
    throw std::invalid_argument("config: model.type: expected t1 or fno, got '" +
                                r.model_type + "'");
  r.model.kind = transform_from_name(mv.str("transform", "dct2"), "config: model.transform");
  r.model.modes_per_axis = static_cast<int>(mv.int_req("modes"));
  r.model.depth = static_cast<int>(mv.int_req("nlayers"));
  r.model.width = static_cast<int>(mv.int_req("width"));
  check_arg(r.model.modes_per_axis >= 1, "config: model.modes: must be positive");
  check_arg(r.model.depth >= 1, "config: model.nlayers: must be positive");
  check_arg(r.model.width >= 1, "config: model.width: must be positive");
  const std::string act = mv.str("activation", "gelu");
  if (act == "gelu")
    r.model.hidden_activation = Activation::Gelu;
  else if (act == "none")
    r.model.hidden_activation = Activation::None;
  else
    throw std::invalid_argument("config: model.activation: expected gelu or none, got '" +
                                act + "'");
  r.model.init = init_from_name(mv.str("init", "vp_dense"), "config: model.init");
  r.model.bias = mv.boolean("bias", true);
  r.model.residual = mv.boolean("residual", true);
  r.model.seed = static_cast<std::uint64_t>(mv.integer("seed", 0));

  JsonView tv = root.child("train");
  tv.allow_keys({"epochs", "optimizer", "scheduler", "shuffle", "shuffle_seed",
                 "track_val_nmse", "divergence_threshold"});
  r.train.epochs = static_cast<int>(tv.integer("epochs", 100));
  if (a.epochs_override > 0) r.train.epochs = a.epochs_override;
  check_arg(r.train.epochs >= 1, "config: train.epochs: must be positive");
  r.train.batch_size = batch_size;
  r.train.shuffle = tv.boolean("shuffle", true);
  r.train.shuffle_seed = static_cast<std::uint64_t>(tv.integer("shuffle_seed", 0));
  r.train.track_val_nmse = tv.boolean("track_val_nmse", true);
  r.train.divergence_threshold = tv.num("divergence_threshold", 1e6);

  double lr = 1e-3, weight_decay = 0.0;
  if (tv.has("optimizer")) {
    JsonView ov = tv.child("optimizer");
    ov.allow_keys({"type", "learning_rate", "weight_decay", "beta1", "beta2", "eps"});
    const std::string ot = ov.str("type", "AdamW");
    check_arg(ot == "AdamW", "config: train.optimizer.type: only AdamW is supported");
    lr = ov.num("learning_rate", 1e-3);
    weight_decay = ov.num("weight_decay", 0.0);
    r.train.opt.beta1 = ov.num("beta1", 0.9);
    r.train.opt.beta2 = ov.num("beta2", 0.999);
    r.train.opt.eps = ov.num("eps", 1e-8);
  }
  check_arg(lr > 0.0, "config: train.optimizer.learning_rate: must be positive");
  check_arg(weight_decay >= 0.0,
            "config: train.optimizer.weight_decay: must be nonnegative");
  r.train.opt.lr = lr;
  r.train.opt.weight_decay = weight_decay;
  r.train.schedule = {lr, 0, 1.0};
  if (tv.has("scheduler")) {
    JsonView sv = tv.child("scheduler");
    sv.allow_keys({"type", "step_size", "gamma", "scheduler_interval"});
    const std::string st = sv.str("type", "Step");
    check_arg(st == "Step", "config: train.scheduler.type: only Step is supported");
    r.train.schedule.step_every = static_cast<int>(sv.int_req("step_size"));
    r.train.schedule.gamma = sv.num("gamma", 0.5);
    check_arg(r.train.schedule.step_every >= 1,
              "config: train.scheduler.step_size: must be positive");
    check_arg(r.train.schedule.gamma > 0.0,
              "config: train.scheduler.gamma: must be positive");
    const std::string si = sv.str("scheduler_interval", "epoch");
    check_arg(si == "epoch",
              "config: train.scheduler.scheduler_interval: only epoch is supported");
  }

  const std::string loss = root.str("loss_fn", "RelativeL2Loss");
  check_arg(loss == "RelativeL2Loss",
            "config: loss_fn: only RelativeL2Loss is supported");

  r.echo["datamodule"] = {{"dataset", r.dataset_stem},
                          {"ntrain", r.ntrain},
                          {"nval", r.nval},
                          {"batch_size", batch_size},
                          {"history_size", 1}};
  r.echo["model"] = {{"type", r.model_type},
                     {"transform", transform_kind_name(r.model.kind)},
                     {"modes", r.model.modes_per_axis},
                     {"nlayers", r.model.depth},
                     {"width", r.model.width},
                     {"activation", activation_name(r.model.hidden_activation)},
                     {"init", init_family_name(r.model.init)},
                     {"bias", r.model.bias},
                     {"residual", r.model.residual},
                     {"seed", r.model.seed}};
  r.echo["train"] = {
      {"epochs", r.train.epochs},
      {"optimizer",
       {{"type", "AdamW"},
        {"learning_rate", lr},
        {"weight_decay", weight_decay},
        {"beta1", r.train.opt.beta1},
        {"beta2", r.train.opt.beta2},
        {"eps", r.train.opt.eps}}},
      {"scheduler",
       {{"type", "Step"},
        {"step_size", r.train.schedule.step_every},
        {"gamma", r.train.schedule.gamma},
        {"scheduler_interval", "epoch"}}},
      {"shuffle", r.train.shuffle},
      {"shuffle_seed", r.train.shuffle_seed},
      {"track_val_nmse", r.train.track_val_nmse},
      {"divergence_threshold", r.train.divergence_threshold}};
  r.echo["loss_fn"] = "RelativeL2Loss";
  return r;
}

void truncate_pairs(std::vector<Signal>& xs, std::vector<Signal>& ys, int cap,
                    const char* which) {
  if (cap == 0) return;
  check_arg(cap <= static_cast<int>(xs.size()),
            std::string("config: datamodule.") + which +
                ": exceeds the available split size " + std::to_string(xs.size()));
  xs.resize(cap);
  ys.resize(cap);
}

int cmd_train(const TrainArgs& a) {
  ResolvedTrainConfig cfg = parse_train_config(read_json_file(a.config_path), a);

  Dataset ds = load_dataset(cfg.dataset_stem);
  std::vector<Signal> tx = ds.inputs(Split::Train), ty = ds.targets(Split::Train);
  std::vector<Signal> vx = ds.inputs(Split::Val), vy = ds.targets(Split::Val);
  truncate_pairs(tx, ty, cfg.ntrain, "ntrain");
  truncate_pairs(vx, vy, cfg.nval, "nval");
  check_arg(!tx.empty(), "config: datamodule.dataset: train split is empty");

  cfg.model.shape = tx[0].shape;
  cfg.model.in_channels = tx[0].channels;
  cfg.model.out_channels = ty[0].channels;
  AnyModel model = build_model(cfg.model);

  const json data_manifest = read_json_file(cfg.dataset_stem + ".json");

  TrainResult res = train_any(model, tx, ty, vx, vy, cfg.train);

  fs::path dir = prepare_out_dir(a.out);
  save_model(model, (dir / "model.sfdm").string());

  std::string curve = "epoch,lr,train_loss,val_loss,val_nmse\n";
  for (const EpochStats& e : res.history)
    curve += std::to_string(e.epoch) + "," + csv_num(e.lr) + "," +
             csv_num(e.train_loss) + "," + csv_num(e.val_loss) + "," +
             csv_num(e.val_nmse) + "\n";
  write_text_file(dir / "curve.csv", curve);

  const EpochStats& last = res.history.back();
  const size_t params = std::visit(
      [](const auto& m) { return parameter_count(m); }, model);
  json summary;
  summary["epochs"] = res.history.size();
  summary["final"] = {{"train_loss", last.train_loss},
                      {"val_loss", last.val_loss},
                      {"val_nmse", last.val_nmse}};
  summary["parameter_count"] = params;
  summary["transforms"] = {{"forward", res.forward_transforms},
                           {"inverse", res.inverse_transforms}};
  summary["dataset_checksum"] = data_manifest.value("payload_checksum", "");
  summary["artifacts"] = {
      {"curve.csv", hex64(fnv1a64(curve.data(), curve.size()))},
      {"model.sfdm", hex64(file_checksum(dir / "model.sfdm"))}};
  write_text_file(dir / "summary.json", summary.dump(2) + "\n");

  json echo = cfg.echo;
  echo["subcommand"] = "train";
  write_config_echo(dir, echo);

  std::cout << "trained " << cfg.model_type << " for " << res.history.size()
            << " epochs: train_loss=" << csv_num(last.train_loss)
            << " val_loss=" << csv_num(last.val_loss)
            << " val_nmse=" << csv_num(last.val_nmse) << "\n"
            << "transforms: forward=" << res.forward_transforms
            << " inverse=" << res.inverse_transforms << "\n"
            << "artifacts in " << dir.string() << "\n";
  return 0;
}

// --- eval ---------------------------------------------------------------------

struct EvalArgs {
  std::string model_path;
  std::string data_stem;
  std::string split = "test";
  std::string out;
};

int cmd_eval(const EvalArgs& a) {
  const Split split = split_from_name(a.split);
  AnyModel model = load_model(a.model_path);
  Dataset ds = load_dataset(a.data_stem);
  std::vector<Signal> xs = ds.inputs(split), ys = ds.targets(split);
  check_arg(!xs.empty(), "--split: the requested split is empty");

  const double nmse = evaluate_any(model, xs, ys);

  json report;
  report["model"] = a.model_path;
  report["dataset"] = a.data_stem;
  report["split"] = a.split;
  report["count"] = xs.size();
  report["nspace_nmse"] = nmse;
  std::visit(
      [&](const auto& m) {
        if (m.wiring != Wiring::SingleTransform) return;
        LossDecomposition l2 = decompose_loss(m, xs, ys, ResidueNorm::L2);
        LossDecomposition l1 = decompose_loss(m, xs, ys, ResidueNorm::L1);
        report["kspace"] = {{"j_l2", l2.j},     {"r_o_l2", l2.r_o}, {"l_l2", l2.l},
                            {"j_l1", l1.j},     {"r_o_l1", l1.r_o}, {"l_l1", l1.l}};
      },
      model);

  fs::path dir = prepare_out_dir(a.out);
  write_text_file(dir / "eval.json", report.dump(2) + "\n");
  json echo;
  echo["subcommand"] = "eval";
  echo["model"] = a.model_path;
  echo["dataset"] = a.data_stem;
  echo["split"] = a.split;
  write_config_echo(dir, echo);

  std::cout << "nspace_nmse=" << csv_num(nmse) << " on " << xs.size() << " "
            << a.split << " pairs\n"
            << "artifacts in " << dir.string() << "\n";
  return 0;
}

// --- analyze-modes --------------------------------------------------------------

struct AnalyzeArgs {
  std::string data_stem;
  std::string transform = "dct2";
  std::string split = "train";
  std::vector<int> modes;
  std::string out;
};

int cmd_analyze_modes(const AnalyzeArgs& a) {
  const TransformKind kind = transform_from_name(a.transform, "--transform");
  const Split split = split_from_name(a.split);
  Dataset ds = load_dataset(a.data_stem);
  std::vector<Signal> stats_targets = ds.targets(Split::Train);
  std::vector<Signal> targets = ds.targets(split);
  check_arg(!stats_targets.empty(), "dataset train split is empty");
  check_arg(!targets.empty(), "--split: the requested split is empty");

  const GridShape shape = targets[0].shape;
  const int max_m = std::min(shape.rows == 1 ? shape.cols : shape.rows, shape.cols);
  std::vector<int> ms = a.modes;
  if (ms.empty()) {
    for (int m = 1; m <= max_m; m *= 2) ms.push_back(m);
    if (ms.back() != max_m) ms.push_back(max_m);
  }
  for (int m : ms)
    check_arg(m >= 1 && m <= max_m,
              "--modes: per-axis budget " + std::to_string(m) +
                  " outside [1, " + std::to_string(max_m) + "]");

  TransformOperator op(kind, shape);
  SpectrumStats stats = spectrum_stats(stats_targets, op);
  auto low_curve = reconstruction_curve(targets, op, SelectorFamily::Lowpass, ms);
  auto top_curve = reconstruction_curve(targets, op, SelectorFamily::TopK, ms, &stats);

  const int budget_power = shape.one_dimensional() ? 1 : 2;
  std::string csv = "m,selector_family,nspace_nmse,R_o_l1,R_o_l2\n";
  for (size_t i = 0; i < ms.size(); ++i) {
    const int m = ms[i];
    ModeSelector low = lowpass_selector(m, shape);
    int budget = m;
    for (int p = 1; p < budget_power; ++p) budget *= m;
    ModeSelector top = topk_selector(stats, budget);
    csv += std::to_string(m) + ",lowpass," + csv_num(low_curve[i].nmse) + "," +
           csv_num(irreducible_loss(targets, op, low, ResidueNorm::L1)) + "," +
           csv_num(irreducible_loss(targets, op, low, ResidueNorm::L2)) + "\n";
    csv += std::to_string(m) + ",topk," + csv_num(top_curve[i].nmse) + "," +
           csv_num(irreducible_loss(targets, op, top, ResidueNorm::L1)) + "," +
           csv_num(irreducible_loss(targets, op, top, ResidueNorm::L2)) + "\n";
  }

  fs::path dir = prepare_out_dir(a.out);
  write_text_file(dir / "modes.csv", csv);
  json echo;
  echo["subcommand"] = "analyze-modes";
  echo["dataset"] = a.data_stem;
  echo["transform"] = transform_kind_name(kind);
  echo["split"] = a.split;
  echo["modes"] = ms;
  write_config_echo(dir, echo);

  std::cout << "wrote " << 2 * ms.size() << " curve rows to "
            << (dir / "modes.csv").string() << "\n";
  return 0;
}

// --- check-init -------------------------------------------------------------------

struct CheckInitArgs {
  std::string transform = "dct2";
  std::vector<std::string> schemes = {"vp_dense", "vp_diagonal", "xavier"};
  std::vector<int> resolutions = {128, 256, 512, 1024};
  int modes = 24;
  int batch = 1000;
  int draws = 20;
  std::uint64_t seed = 0;
  std::string out;
};

int cmd_check_init(const CheckInitArgs& a) {
  const TransformKind kind = transform_from_name(a.transform, "--transform");
  check_arg(!a.schemes.empty(), "--schemes must not be empty");
  check_arg(!a.resolutions.empty(), "--resolutions must not be empty");

  std::string csv = "scheme,N,m,mean_ratio,std_ratio\n";
  for (const std::string& name : a.schemes) {
    const InitFamily family = init_from_name(name, "--schemes");
    for (int n : a.resolutions) {
      InitScheme scheme{family, kind, n, a.modes, a.seed};
      VarianceProbeReport rep = variance_probe(scheme, a.batch, a.draws);
      csv += std::string(init_family_name(family)) + "," + std::to_string(n) + "," +
             std::to_string(a.modes) + "," + csv_num(rep.mean_ratio) + "," +
             csv_num(rep.std_ratio) + "\n";
    }
  }

  fs::path dir = prepare_out_dir(a.out);
  write_text_file(dir / "init.csv", csv);
  json echo;
  echo["subcommand"] = "check-init";
  echo["transform"] = transform_kind_name(kind);
  echo["schemes"] = a.schemes;
  echo["resolutions"] = a.resolutions;
  echo["modes"] = a.modes;
  echo["batch"] = a.batch;
  echo["draws"] = a.draws;
  echo["seed"] = a.seed;
  write_config_echo(dir, echo);

  std::cout << csv;
  std::cout << "artifacts in " << dir.string() << "\n";
  return 0;
}

// --- bench -----------------------------------------------------------------------

struct BenchArgs {
  std::string transform = "dct2";
  std::vector<int> depths = {1, 2, 4};
  std::vector<int> widths = {4};
  std::vector<int> resolutions = {64};
  int modes = 16;
  int reps = 9;
  int warmup = 2;
  std::uint64_t seed = 0;
  std::string out;
};

int cmd_bench(const BenchArgs& a) {
  const TransformKind kind = transform_from_name(a.transform, "--transform");
  BenchGrid grid;
  grid.depths = a.depths;
  grid.widths = a.widths;
  grid.resolutions = a.resolutions;
  grid.modes_per_axis = a.modes;
  grid.repetitions = a.reps;
  grid.warmup = a.warmup;
  grid.seed = a.seed;

  BenchReport report = run_speedup_grid(grid, kind);
  std::ostringstream csv;
  write_bench_csv(report, csv);

  fs::path dir = prepare_out_dir(a.out);
  write_text_file(dir / "bench.csv", csv.str());
  json echo;
  echo["subcommand"] = "bench";
  echo["transform"] = transform_kind_name(kind);
  echo["depths"] = a.depths;
  echo["widths"] = a.widths;
  echo["resolutions"] = a.resolutions;
  echo["modes"] = a.modes;
  echo["repetitions"] = a.reps;
  echo["warmup"] = a.warmup;
  echo["seed"] = a.seed;
  write_config_echo(dir, echo);

  std::cout << csv.str();
  std::cout << "artifacts in " << dir.string() << "\n";
  return 0;
}

// --- verify ----------------------------------------------------------------------

struct VerifyArgs {
  std::uint64_t seed = 0;
  std::vector<std::string> modules;
  std::string out;
};

int cmd_verify(const VerifyArgs& a) {
  VerifyReport report = run_property_suite(a.seed, a.modules);
  print_verify_report(report, std::cout);
  if (!a.out.empty()) {
    fs::path dir = prepare_out_dir(a.out);
    std::ostringstream js;
    write_verify_json(report, js);
    write_text_file(dir / "verify.json", js.str());
    json echo;
    echo["subcommand"] = "verify";
    echo["seed"] = a.seed;
    echo["modules"] = a.modules.empty() ? verify_module_names() : a.modules;
    write_config_echo(dir, echo);
  }
  return report.all_pass() ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "sfdm: reduced-order spectral models. Orthonormal DCT-II/DFT transforms,"
      " k-space layer stacks in single-transform or transform-per-layer wiring,"
      " variance-preserving initialization, mode-retention analysis, synthetic"
      " PDE datasets, training, and wiring benchmarks.\n"
      "Exit codes: 0 ok, 1 invalid config, 2 numerical failure, 3 I/O failure."
      " SFDM_THREADS caps internal parallelism (all pipelines are single-threaded)."};
  app.require_subcommand(1);

  GenDataArgs gd;
  CLI::App* gen = app.add_subcommand("gen-data", "Generate a synthetic operator dataset");
  gen->add_option("--kind", gd.kind, "Generator: heat_2d or burgers_1d")
      ->capture_default_str();
  gen->add_option("--resolution", gd.resolution, "Grid points per axis")
      ->capture_default_str();
  gen->add_option("--count", gd.count, "Number of sample pairs")->capture_default_str();
  gen->add_option("--viscosity,--nu", gd.viscosity, "Diffusion coefficient")
      ->capture_default_str();
  gen->add_option("--horizon", gd.horizon, "Target time T")->capture_default_str();
  gen->add_option("--decay", gd.decay, "Initial-condition spectral decay exponent")
      ->capture_default_str();
  gen->add_option("--dt", gd.dt, "Burgers step; 0 picks from the stability bound")
      ->capture_default_str();
  gen->add_option("--train-fraction", gd.train_fraction, "Train split fraction")
      ->capture_default_str();
  gen->add_option("--val-fraction", gd.val_fraction, "Validation split fraction")
      ->capture_default_str();
  gen->add_option("--seed", gd.seed, "Root seed")->capture_default_str();
  gen->add_option("--out", gd.out, "Run directory")->required();

  TrainArgs tr;
  CLI::App* train = app.add_subcommand("train", "Train a spectral model from a JSON config");
  train->add_option("--config", tr.config_path, "JSON config (datamodule/model/train/loss_fn)")
      ->required();
  train->add_option("--dataset", tr.dataset_override,
                    "Override datamodule.dataset (path stem)");
  train->add_option("--epochs", tr.epochs_override, "Override train.epochs");
  train->add_option("--out", tr.out, "Run directory")->required();

  EvalArgs ev;
  CLI::App* eval = app.add_subcommand("eval", "Evaluate a checkpoint on a dataset split");
  eval->add_option("--model", ev.model_path, "Checkpoint path")->required();
  eval->add_option("--data", ev.data_stem, "Dataset path stem")->required();
  eval->add_option("--split", ev.split, "train, val or test")->capture_default_str();
  eval->add_option("--out", ev.out, "Run directory")->required();

  AnalyzeArgs an;
  CLI::App* analyze = app.add_subcommand(
      "analyze-modes", "Mode-retention curves: reconstruction error and residue per budget");
  analyze->add_option("--data", an.data_stem, "Dataset path stem")->required();
  analyze->add_option("--transform", an.transform, "dct2 or dft")->capture_default_str();
  analyze->add_option("--split", an.split, "Split whose targets are reconstructed")
      ->capture_default_str();
  analyze->add_option("--modes", an.modes,
                      "Per-axis retention budgets (comma-separated; default doubling)")
      ->delimiter(',');
  analyze->add_option("--out", an.out, "Run directory")->required();

  CheckInitArgs ci;
  CLI::App* check_init = app.add_subcommand(
      "check-init", "Monte Carlo variance ratios of initialization schemes");
  check_init->add_option("--transform", ci.transform, "dct2 or dft")->capture_default_str();
  check_init->add_option("--schemes", ci.schemes, "vp_dense, vp_diagonal, xavier")
      ->delimiter(',');
  check_init->add_option("--resolutions", ci.resolutions, "Full resolutions N to probe")
      ->delimiter(',');
  check_init->add_option("--modes", ci.modes, "Retained modes m")->capture_default_str();
  check_init->add_option("--batch", ci.batch, "Inputs per weight draw")
      ->capture_default_str();
  check_init->add_option("--draws", ci.draws, "Weight draws per scheme")
      ->capture_default_str();
  check_init->add_option("--seed", ci.seed, "Root seed")->capture_default_str();
  check_init->add_option("--out", ci.out, "Run directory")->required();

  BenchArgs be;
  CLI::App* bench = app.add_subcommand(
      "bench", "Forward-pass wall-clock comparison of the two wirings");
  bench->add_option("--transform", be.transform, "dct2 or dft")->capture_default_str();
  bench->add_option("--depths", be.depths, "Layer counts")->delimiter(',');
  bench->add_option("--widths", be.widths, "Channel widths")->delimiter(',');
  bench->add_option("--resolutions", be.resolutions, "Grid resolutions")->delimiter(',');
  bench->add_option("--modes", be.modes, "Retained modes per axis")->capture_default_str();
  bench->add_option("--reps", be.reps, "Timed repetitions per cell (>= 5)")
      ->capture_default_str();
  bench->add_option("--warmup", be.warmup, "Warmup passes per cell")->capture_default_str();
  bench->add_option("--seed", be.seed, "Weight seed")->capture_default_str();
  bench->add_option("--out", be.out, "Run directory")->required();

  VerifyArgs vf;
  CLI::App* verify = app.add_subcommand(
      "verify", "Run the mathematical property suite; exit 0 iff every property holds");
  verify->add_option("--seed", vf.seed, "Root seed for randomized checks")
      ->capture_default_str();
  verify->add_option("--module", vf.modules,
                     "Restrict to named modules (repeatable; default all)");
  verify->add_option("--out", vf.out, "Optional run directory for verify.json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    app.exit(e);
    return 1;
  }

  try {
    resolve_thread_cap();
    if (app.got_subcommand(gen)) return cmd_gen_data(gd);
    if (app.got_subcommand(train)) return cmd_train(tr);
    if (app.got_subcommand(eval)) return cmd_eval(ev);
    if (app.got_subcommand(analyze)) return cmd_analyze_modes(an);
    if (app.got_subcommand(check_init)) return cmd_check_init(ci);
    if (app.got_subcommand(bench)) return cmd_bench(be);
    if (app.got_subcommand(verify)) return cmd_verify(vf);
    throw std::invalid_argument("no subcommand given");
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << "\n";
    return 2;
  }
}
