#include "commands.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>
#include <set>

#include "foagen/ambisonics.hpp"
#include "foagen/checkpoint.hpp"
#include "foagen/dataset.hpp"
#include "foagen/doa.hpp"
#include "foagen/error.hpp"
#include "foagen/eval.hpp"
#include "foagen/flow.hpp"
#include "foagen/room.hpp"
#include "foagen/run_config.hpp"
#include "foagen/stft.hpp"
#include "foagen/synth.hpp"
#include "foagen/trainer.hpp"
#include "foagen/wav.hpp"

namespace foagen::cli {

namespace fs = std::filesystem;

namespace {

std::string num(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string gnum(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.8g", v);
  return buf;
}

// Options shared by several commands. Values stay empty unless given so the
// config file can supply them.
struct Overrides {
  std::string config;
  std::map<std::string, std::string> flags;
};

void add_override(CLI::App* app, Overrides& o, const std::string& flag, const std::string& key,
                  const std::string& help) {
  app->add_option_function<std::string>(
      flag, [&o, key](const std::string& v) { o.flags[key] = v; }, help + " [" + key + "]");
}

RunConfig resolve(const Overrides& o) {
  RunConfig rc;
  if (!o.config.empty()) rc.load_file(o.config);
  for (const auto& [k, v] : o.flags) rc.set(k, v, ValueSource::kFlag);
  return rc;
}

Direction degrees(double az, double el) {
  if (!std::isfinite(az) || !std::isfinite(el)) throw ConfigError("angles must be finite");
  if (el < -90.0 || el > 90.0) throw ConfigError("elevation must be within [-90, 90] degrees");
  return Direction::from_degrees(az, el);
}

void print_doa(std::ostream& out, const DoaEstimate& est, std::optional<Direction> ref) {
  out << "doa azimuth_deg " << num(rad_to_deg(est.direction.azimuth())) << " elevation_deg "
      << num(rad_to_deg(est.direction.elevation()));
  if (est.ambiguous) out << " (ambiguous)";
  out << '\n';
  if (ref) out << "doa_error_deg " << num(doa_error(est.direction, *ref)) << '\n';
}

// ---- synth ---------------------------------------------------------------

struct SynthArgs {
  int classes = 3;
  int per_class = 0;
  std::string render = "analytic";
  std::string out;
  std::string directions = "random";
  std::size_t fibonacci_points = 900;
  bool no_jitter = false;
  Overrides ov;
};

int cmd_synth(const SynthArgs& a, std::ostream& out) {
  const RunConfig rc = resolve(a.ov);
  DatasetConfig cfg;
  cfg.classes = default_classes(a.classes, !a.no_jitter);
  cfg.per_class = a.per_class;
  cfg.render = parse_render(a.render);
  cfg.room = rc.room();
  cfg.seed = rc.get_u64("seed");
  if (a.directions == "random") {
    cfg.directions.mode = DirectionMode::kRandom;
  } else if (a.directions == "fibonacci") {
    cfg.directions.mode = DirectionMode::kFibonacci;
    cfg.directions.fibonacci_points = a.fibonacci_points;
  } else {
    throw ConfigError("unknown direction mode '" + a.directions + "'");
  }
  plan_dataset(cfg);  // validation errors before touching the filesystem
  const DatasetManifest m = build_dataset(cfg, a.out);
  out << "manifest " << (fs::path(a.out) / kConditionsFile).string() << '\n';
  out << "clips " << m.clips.size() << " train " << m.train.size() << " test " << m.test.size()
      << '\n';
  std::map<int, int> per;
  for (const auto& c : m.clips) ++per[c.class_id];
  for (const auto& [cls, n] : per)
    out << "class " << cls << " " << generator_name(cfg.classes[cls].generator) << " " << n << '\n';
  return kOk;
}

// ---- train ---------------------------------------------------------------

struct TrainArgs {
  std::string data;
  std::string ckpt;
  std::optional<int> epochs;
  Overrides ov;
};

int cmd_train(const TrainArgs& a, std::ostream& out) {
  RunConfig rc = resolve(a.ov);
  if (a.epochs) rc.set("train.epochs", std::to_string(*a.epochs), ValueSource::kFlag);
  const StftConfig stft = rc.stft();
  const TrainConfig tcfg = rc.train();
  const ModelConfig mcfg = rc.model();

  const fs::path dir = a.data;
  if (!fs::is_directory(dir)) throw IoError("data directory not found: " + dir.string());
  if (!fs::exists(dir / kConditionsFile))
    throw IoError("no " + std::string(kConditionsFile) + " in " + dir.string());
  const DatasetManifest m = read_manifest(dir / kConditionsFile);
  if (m.clips.empty()) throw IoError("empty manifest in " + dir.string());
  std::set<std::string> use;
  if (fs::exists(dir / kTrainSplitFile))
    for (auto& n : read_name_list(dir / kTrainSplitFile)) use.insert(n);

  int num_classes = 0;
  for (const auto& c : m.clips) num_classes = std::max(num_classes, c.class_id + 1);
  std::vector<Tensor> planes;
  TrainingSet data;
  for (const auto& c : m.clips) {
    if (!use.empty() && !use.count(c.filename)) continue;
    const FoaWaveform w = read_foa_wav(dir / c.filename);
    planes.push_back(waveform_to_spec(w, stft).planes());
    data.conds.push_back({c.class_id, c.direction});
  }
  if (planes.empty()) throw IoError("no training clips in " + dir.string());

  const EncoderConfig ecfg = rc.encoder(num_classes);
  std::optional<Trainer> trainer;
  double sigma = 0.0;
  std::vector<std::string> vocab;
  for (int c = 0; c < num_classes; ++c) vocab.push_back("class_" + std::to_string(c));
  if (fs::exists(a.ckpt)) {
    const Checkpoint ck = load_checkpoint(a.ckpt);
    if (!(ck.stft == stft)) throw ConfigError("cannot resume: STFT config differs from checkpoint");
    trainer.emplace(ck, mcfg, ecfg, tcfg);
    sigma = ck.sigma_data;
    out << "resumed " << a.ckpt << " at step " << ck.step << '\n';
  } else {
    trainer.emplace(mcfg, ecfg, tcfg);
    sigma = compute_sigma_data(planes);
  }
  for (auto& p : planes)
    for (double& v : p.values()) v /= sigma;
  data.x = std::move(planes);

  out << "clips " << data.size() << " classes " << num_classes << " sigma_data " << gnum(sigma)
      << '\n';
  const std::uint64_t eval_seed = mix_seed(tcfg.seed, 0xE7A1ULL);
  out << "epoch 0 eval_loss " << gnum(trainer->evaluate(data, eval_seed)) << " step "
      << trainer->step() << '\n';
  for (int e = 1; e <= tcfg.epochs; ++e) {
    const EpochReport r = trainer->train_epoch(data);
    const double ev = trainer->evaluate(data, eval_seed);
    save_checkpoint(a.ckpt, trainer->to_checkpoint(sigma, stft, vocab));
    out << "epoch " << e << " train_loss " << gnum(r.mean_loss) << " eval_loss " << gnum(ev)
        << " step " << r.step << '\n';
  }
  if (tcfg.epochs == 0) save_checkpoint(a.ckpt, trainer->to_checkpoint(sigma, stft, vocab));
  out << "checkpoint " << a.ckpt << '\n';
  return kOk;
}

// ---- sample --------------------------------------------------------------

struct SampleArgs {
  std::string ckpt;
  int class_id = 0;
  double az = 0.0, el = 0.0;
  std::string out;
  double duration = 1.0;
  Overrides ov;
};

int cmd_sample(const SampleArgs& a, std::ostream& out) {
  const RunConfig rc = resolve(a.ov);
  const SamplerConfig scfg = rc.sampler();
  const Direction d = degrees(a.az, a.el);
  if (!(a.duration > 0.0)) throw ConfigError("duration must be > 0");
  const Checkpoint ck = load_checkpoint(a.ckpt);
  if (a.class_id < 0 || a.class_id >= ck.encoder.config.num_classes)
    throw ConfigError("class " + std::to_string(a.class_id) + " outside [0, " +
                      std::to_string(ck.encoder.config.num_classes) + ")");
  const VelocityModel model(ck.model_config, ck.model_params);
  const FoaSpectrogram spec =
      sample(model, ck.encoder, {a.class_id, d}, scfg, ck.sigma_data, ck.stft);
  const auto length = static_cast<std::size_t>(std::llround(a.duration * ck.stft.sample_rate));
  const FoaWaveform w = spec_to_waveform(spec, length);
  write_foa_wav(a.out, w);
  out << "wrote " << a.out << " (" << w.length() << " samples, steps " << scfg.steps << ", cfg "
      << gnum(scfg.cfg_scale) << ", seed " << scfg.seed << ")\n";
  try {
    print_doa(out, estimate_doa(w, fibonacci_grid(rc.grid_size()), rc.weighting()), d);
  } catch (const NoSignalError&) {
    out << "doa no signal\n";
  }
  return kOk;
}

// ---- simulate ------------------------------------------------------------

struct SimulateArgs {
  std::string mono;
  std::optional<int> class_id;
  bool impulse = false;
  std::optional<double> lowpass;
  double az = 0.0, el = 0.0;
  double distance = 1.0;
  std::string out;
  std::string rir_out;
  Overrides ov;
};

int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
  const RunConfig rc = resolve(a.ov);
  const RoomSpec room = rc.room();
  const Direction d = degrees(a.az, a.el);
  if (!(a.distance > 0.0)) throw ConfigError("distance must be > 0");
  const int sources = !a.mono.empty() + a.class_id.has_value() + a.impulse;
  if (sources != 1) throw ConfigError("give exactly one of --mono, --class or --impulse");

  const auto sr = room.sample_rate;
  std::vector<double> mono;
  if (!a.mono.empty()) {
    const WavData w = read_wav(a.mono);
    if (w.channels.size() != 1)
      throw ConfigError("--mono expects a 1-channel WAV, got " + std::to_string(w.channels.size()));
    if (w.sample_rate != sr)
      throw ConfigError("--mono sample rate " + gnum(w.sample_rate) + " differs from " + gnum(sr));
    mono = w.channels[0];
  } else if (a.class_id) {
    if (*a.class_id < 0) throw ConfigError("class must be >= 0");
    const auto classes = default_classes(*a.class_id + 1, true);
    mono = synth_mono(classes.back(), rc.get_u64("seed"), sr);
  } else {
    mono.assign(static_cast<std::size_t>(sr), 0.0);
    mono[0] = 1.0;
  }

  if (a.lowpass) mono = apply_fir(mono, lowpass_fir(*a.lowpass, sr));

  const ArraySpec array = ArraySpec::tetrahedral();
  const Eigen::Vector3d centre = room.center();
  const Eigen::Vector3d src = centre + a.distance * unit_vector(d);
  if (!room.contains(src)) throw ConfigError("source lies outside the room");
  const FoaWaveform foa = simulate_baseline(mono, d, room, array, a.distance);
  write_foa_wav(a.out, foa);
  if (!a.rir_out.empty()) {
    const RirSet rirs = simulate_rirs(room, array, centre, src);
    WavData w;
    w.sample_rate = rirs.sample_rate;
    for (const auto& r : rirs.responses) w.channels.push_back(r);
    const std::size_t len = std::max_element(w.channels.begin(), w.channels.end(),
                                             [](auto& x, auto& y) { return x.size() < y.size(); })
                                ->size();
    for (auto& c : w.channels) c.resize(len, 0.0);
    write_wav(a.rir_out, w);
    out << "rirs " << a.rir_out << '\n';
  }
  out << "wrote " << a.out << " (" << foa.length() << " samples)\n";
  out << "direct_path_delay_samples " << num(a.distance / room.speed_of_sound * sr) << '\n';
  try {
    print_doa(out, estimate_doa(foa, fibonacci_grid(rc.grid_size()), rc.weighting()), d);
  } catch (const NoSignalError&) {
    out << "doa no signal\n";
  }
  return kOk;
}

// ---- eval ----------------------------------------------------------------

struct EvalArgs {
  std::string gen, ref, out;
  Overrides ov;
};

int cmd_eval(const EvalArgs& a, std::ostream& out) {
  const RunConfig rc = resolve(a.ov);
  for (const auto& d : {a.gen, a.ref})
    if (!fs::exists(fs::path(d) / kConditionsFile))
      throw ConfigError("missing condition sidecar: " + (fs::path(d) / kConditionsFile).string());
  EvalOptions opts;
  opts.grid_size = rc.grid_size();
  opts.weighting = rc.weighting();
  const EvalReport r = eval_report(a.gen, a.ref, opts);
  write_report_csv(a.out, r);
  out << report_table(r);
  out << "report " << a.out << '\n';
  return kOk;
}

// ---- doa -----------------------------------------------------------------

struct DoaArgs {
  std::string in;
  std::optional<double> ref_az, ref_el;
  Overrides ov;
};

int cmd_doa(const DoaArgs& a, std::ostream& out) {
  const RunConfig rc = resolve(a.ov);
  if (a.ref_az.has_value() != a.ref_el.has_value())
    throw ConfigError("--ref-az and --ref-el go together");
  std::optional<Direction> ref;
  if (a.ref_az) ref = degrees(*a.ref_az, *a.ref_el);
  const FoaWaveform w = read_foa_wav(a.in);
  print_doa(out, estimate_doa(w, fibonacci_grid(rc.grid_size()), rc.weighting()), ref);
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"FOA generation with flow matching: data synthesis, training, sampling, evaluation"};
  app.name("foagen");
  app.require_subcommand(1);
  app.fallthrough(false);

  SynthArgs sy;
  auto* s = app.add_subcommand("synth", "Synthesize a labelled FOA dataset");
  s->add_option("--classes", sy.classes, "number of synthetic classes")->check(CLI::Range(1, 64));
  s->add_option("--per-class", sy.per_class, "clips per class")->required();
  s->add_option("--render", sy.render, "analytic or simulated");
  s->add_option("--out", sy.out, "output directory")->required();
  s->add_option("--directions", sy.directions, "random or fibonacci");
  s->add_option("--fibonacci-points", sy.fibonacci_points, "grid size for fibonacci directions");
  s->add_flag("--no-jitter", sy.no_jitter, "disable per-clip jitter");
  s->add_option("--config", sy.ov.config, "key=value config file");
  add_override(s, sy.ov, "--seed", "seed", "seed");

  TrainArgs tr;
  auto* t = app.add_subcommand("train", "Train the velocity model");
  t->add_option("--data", tr.data, "dataset directory")->required();
  t->add_option("--ckpt", tr.ckpt, "checkpoint path (resumed when it exists)")->required();
  t->add_option("--config", tr.ov.config, "key=value config file");
  t->add_option("--epochs", tr.epochs, "epochs to run");
  add_override(t, tr.ov, "--lr", "train.lr", "learning rate");
  add_override(t, tr.ov, "--batch-size", "train.batch_size", "batch size");
  add_override(t, tr.ov, "--p-drop", "train.p_drop", "condition drop probability");
  add_override(t, tr.ov, "--stft", "stft.preset", "STFT preset");
  add_override(t, tr.ov, "--seed", "seed", "seed");

  SampleArgs sa;
  auto* sm = app.add_subcommand("sample", "Generate one FOA clip from a checkpoint");
  sm->add_option("--ckpt", sa.ckpt, "checkpoint")->required();
  sm->add_option("--class", sa.class_id, "class id")->required();
  sm->add_option("--az", sa.az, "azimuth, degrees")->required();
  sm->add_option("--el", sa.el, "elevation, degrees")->required();
  sm->add_option("--out", sa.out, "output WAV")->required();
  sm->add_option("--duration", sa.duration, "seconds of audio to keep");
  sm->add_option("--config", sa.ov.config, "key=value config file");
  add_override(sm, sa.ov, "--steps", "sampler.steps", "ODE steps");
  add_override(sm, sa.ov, "--cfg", "sampler.cfg_scale", "guidance scale");
  add_override(sm, sa.ov, "--integrator", "sampler.integrator", "euler or heun");
  add_override(sm, sa.ov, "--seed", "seed", "noise seed");

  SimulateArgs si;
  auto* sim = app.add_subcommand("simulate", "Render a source through the shoebox room baseline");
  auto* mono_opt = sim->add_option("--mono", si.mono, "mono source WAV");
  auto* class_opt = sim->add_option("--class", si.class_id, "synthetic class as source");
  auto* imp_opt = sim->add_flag("--impulse", si.impulse, "unit impulse as source");
  mono_opt->excludes(class_opt)->excludes(imp_opt);
  class_opt->excludes(imp_opt);
  sim->add_option("--az", si.az, "azimuth, degrees")->required();
  sim->add_option("--el", si.el, "elevation, degrees")->required();
  sim->add_option("--lowpass", si.lowpass, "low-pass the source at this cutoff, Hz");
  sim->add_option("--distance", si.distance, "source distance from array, metres");
  sim->add_option("--out", si.out, "output FOA WAV")->required();
  sim->add_option("--rir-out", si.rir_out, "also write the 4 capsule RIRs");
  sim->add_option("--config", si.ov.config, "key=value config file");
  add_override(sim, si.ov, "--room", "room.dims", "room size LxWxH");
  add_override(sim, si.ov, "--absorption", "room.absorption", "wall absorption");
  add_override(sim, si.ov, "--order", "room.order", "maximum image order");
  add_override(sim, si.ov, "--seed", "seed", "seed for synthetic sources");

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "Compare generated and reference FOA sets");
  e->add_option("--gen", ev.gen, "generated set directory")->required();
  e->add_option("--ref", ev.ref, "reference set directory")->required();
  e->add_option("--out", ev.out, "CSV report path")->required();
  e->add_option("--config", ev.ov.config, "key=value config file");
  add_override(e, ev.ov, "--grid-size", "doa.grid_size", "DoA grid points");
  add_override(e, ev.ov, "--weighting", "doa.weighting", "basic or max-re");

  DoaArgs da;
  auto* d = app.add_subcommand("doa", "Estimate the direction of arrival of an FOA WAV");
  d->add_option("--in", da.in, "4-channel WAV")->required();
  d->add_option("--ref-az", da.ref_az, "reference azimuth, degrees");
  d->add_option("--ref-el", da.ref_el, "reference elevation, degrees");
  d->add_option("--config", da.ov.config, "key=value config file");
  add_override(d, da.ov, "--grid-size", "doa.grid_size", "DoA grid points");
  add_override(d, da.ov, "--weighting", "doa.weighting", "basic or max-re");

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::ParseError& ex) {
    const int code = app.exit(ex, out, err);
    if (code == 0) return kOk;
    return kUsageError;
  }

  try {
    if (s->parsed()) return cmd_synth(sy, out);
    if (t->parsed()) return cmd_train(tr, out);
    if (sm->parsed()) return cmd_sample(sa, out);
    if (sim->parsed()) return cmd_simulate(si, out);
    if (e->parsed()) return cmd_eval(ev, out);
    if (d->parsed()) return cmd_doa(da, out);
  } catch (const ConfigError& ex) {
    err << "error: " << ex.what() << '\n';
    return kUsageError;
  } catch (const NoSignalError& ex) {
    err << "error: " << ex.what() << '\n';
    return kRuntimeError;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << '\n';
    return kRuntimeError;
  }
  return kUsageError;
}

}  // namespace foagen::cli
