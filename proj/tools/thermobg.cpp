// thermobg command line: fit, run, eval, synth, bench.
//
// Exit codes: 0 success, 1 usage, 2 data error, 3 numerical failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "thermobg/thermobg.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace thermobg;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

int default_workers() {
  if (const char* env = std::getenv("THERMOBG_WORKERS")) {
    try {
      const int w = std::stoi(env);
      if (w >= 1) return w;
    } catch (const std::exception&) {
    }
    std::cerr << "warning: ignoring invalid THERMOBG_WORKERS='" << env << "'\n";
  }
  return 1;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Frame input: a directory of PGM files, or a headerless raw file described
// by --raw WxH and --depth.
struct InputOptions {
  std::string path;
  std::string raw_size;
  int depth = 8;
  bool big_endian = false;

  void add(CLI::App* app, const std::string& flag, const std::string& what) {
    app->add_option(flag, path, what)->required();
    app->add_option("--raw", raw_size, "treat input as a raw file of WxH frames");
    app->add_option("--depth", depth, "raw sample depth")->check(CLI::IsMember({8, 16}));
    app->add_flag("--big-endian", big_endian, "raw 16-bit samples are big-endian");
  }
};

std::pair<int, int> parse_size(const std::string& s) {
  int w = 0;
  int h = 0;
  char x = 0;
  std::istringstream in(s);
  if (!(in >> w >> x >> h) || (x != 'x' && x != 'X') || w <= 0 || h <= 0 || !in.eof()) {
    throw UsageError("expected a size like 320x240, got '" + s + "'");
  }
  return {w, h};
}

FrameSequence read_input(const std::string& path, const std::string& raw_size, int depth, bool big_endian,
                         std::size_t limit = 0) {
  if (raw_size.empty()) return read_pgm_directory(path, limit);
  const auto [w, h] = parse_size(raw_size);
  FrameSequence seq = read_raw_sequence(path, w, h, depth, big_endian ? Endianness::big : Endianness::little);
  if (limit > 0 && seq.frames.size() > limit) seq.frames.resize(limit);
  for (std::size_t i = 0; i < seq.frames.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "frame_%06zu", i);
    seq.names.emplace_back(name);
  }
  return seq;
}

FrameSequence read_input(const InputOptions& in, std::size_t limit = 0) {
  return read_input(in.path, in.raw_size, in.depth, in.big_endian, limit);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

void print_histogram(const std::vector<std::size_t>& hist, std::ostream& os) {
  os << "components  pixels\n";
  for (std::size_t k = 1; k < hist.size(); ++k) {
    if (hist[k] > 0) os << std::setw(10) << k << "  " << hist[k] << '\n';
  }
}

// ---------------------------------------------------------------------------
// fit

struct FitArgs {
  InputOptions input;
  std::size_t history = 100;
  std::size_t kmax = 50;
  std::uint64_t seed = 0;
  std::string out;
  int workers = 1;
  bool strict = false;
  bool quiet = false;
};

int cmd_fit(const FitArgs& a) {
  const FrameSequence seq = read_input(a.input);
  if (seq.size() < a.history) {
    throw std::runtime_error("input has " + std::to_string(seq.size()) + " frames, --history needs " +
                             std::to_string(a.history));
  }
  FrameSequence history;
  history.frames.assign(seq.frames.begin(), seq.frames.begin() + static_cast<std::ptrdiff_t>(a.history));
  EngineConfig cfg;
  cfg.fit.history_len = a.history;
  cfg.fit.k_max = a.kmax;
  cfg.fit.rng_seed = a.seed;

  const auto t0 = std::chrono::steady_clock::now();
  InitReport report;
  ProgressFn progress;
  if (!a.quiet) {
    progress = [](std::size_t done, std::size_t total) { std::cerr << "\rfitting " << done << "/" << total << std::flush; };
  }
  const PixelGrid grid = initialize_grid(history, cfg, a.workers, &report, progress);
  if (!a.quiet) std::cerr << "\n";
  save_grid(grid, a.out);

  std::cout << "fitted " << grid.width << "x" << grid.height << " pixels from " << a.history << " frames in "
            << seconds_since(t0) << " s\n";
  print_histogram(report.component_histogram, std::cout);
  if (report.unconverged > 0) {
    std::cout << "unconverged pixels: " << report.unconverged << '\n';
    if (a.strict) throw NumericError(std::to_string(report.unconverged) + " pixel fits did not converge");
  }
  return 0;
}

// ---------------------------------------------------------------------------
// run

struct RunArgs {
  std::string model;
  InputOptions input;
  std::string out;
  double pbg = 0.6;
  double threshold = 0.5;
  int min_blob = 15;
  int connectivity = 8;
  std::string mode = "approx";
  int workers = 1;
  bool save_posterior = false;
  bool freeze = false;
  std::string history_input;
  std::string save_model;
  std::size_t skip = 0;
};

int cmd_run(const RunArgs& a) {
  EngineConfig cfg;
  cfg.seg.p_bg = a.pbg;
  cfg.seg.decision_threshold = a.threshold;
  cfg.seg.min_blob_area = a.min_blob;
  cfg.seg.connectivity = a.connectivity;
  cfg.adapt.mode = a.mode == "exact" ? AdaptMode::exact_history : AdaptMode::memory_efficient;
  try {
    cfg.seg.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }

  PixelGrid grid = load_grid(a.model, cfg);
  if (!a.history_input.empty()) {
    if (cfg.adapt.mode != AdaptMode::exact_history) throw UsageError("--history-input only applies to --mode exact");
    const FrameSequence hist = read_input(a.history_input, a.input.raw_size, a.input.depth, a.input.big_endian,
                                          static_cast<std::size_t>(grid.history_len()));
    for (const auto& f : hist.frames) {
      if (f.width != grid.width || f.height != grid.height) throw std::runtime_error("history frames do not match the model geometry");
      for (std::size_t p = 0; p < f.size(); ++p) grid.pools[p].push(f.pixels[p]);
    }
  }

  const FrameSequence seq = read_input(a.input);
  fs::create_directories(a.out);
  if (a.save_posterior) fs::create_directories(fs::path(a.out) / "posterior");

  const auto t0 = std::chrono::steady_clock::now();
  std::size_t processed = 0;
  for (std::size_t i = a.skip; i < seq.size(); ++i) {
    const MaskFrame mask = process_frame(grid, seq.frames[i], a.workers, a.freeze);
    write_mask(mask, fs::path(a.out) / (seq.names[i] + ".pgm"));
    if (a.save_posterior) write_posterior(mask, fs::path(a.out) / "posterior" / (seq.names[i] + ".pgm"));
    ++processed;
  }
  const double elapsed = seconds_since(t0);
  if (!a.save_model.empty()) save_grid(grid, a.save_model);

  json manifest = {
      {"input", a.input.path},
      {"model", a.model},
      {"output_dir", a.out},
      {"config",
       {{"pbg", a.pbg},
        {"threshold", a.threshold},
        {"min_blob", a.min_blob},
        {"connectivity", a.connectivity},
        {"mode", a.mode},
        {"freeze", a.freeze},
        {"skip", a.skip},
        {"history_input", a.history_input},
        {"workers", a.workers}}},
      {"rng", Rng::kAlgorithm},
      {"frames", processed},
      {"timing", {{"seconds", elapsed}, {"fps", elapsed > 0.0 ? static_cast<double>(processed) / elapsed : 0.0}}},
  };
  if (!a.save_model.empty()) manifest["saved_model"] = a.save_model;
  write_text(fs::path(a.out) / "manifest.json", manifest.dump(2) + "\n");
  std::cout << "processed " << processed << " frames in " << elapsed << " s\n";
  return 0;
}

// ---------------------------------------------------------------------------
// eval

struct EvalArgs {
  std::string pred;
  std::string gt;
  std::size_t subsample = 0;
  std::uint64_t seed = 0;
  std::string out;
};

std::map<std::string, fs::path> pgm_files(const std::string& dir) {
  if (!fs::is_directory(dir)) throw std::runtime_error("not a directory: " + dir);
  std::map<std::string, fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".pgm") files[entry.path().filename().string()] = entry.path();
  }
  return files;
}

int cmd_eval(const EvalArgs& a) {
  const auto gt_files = pgm_files(a.gt);
  const auto pred_files = pgm_files(a.pred);
  std::vector<std::string> missing;
  std::vector<std::string> names;
  for (const auto& [name, path] : gt_files) {
    if (pred_files.count(name) == 0) missing.push_back(name);
    else names.push_back(name);
  }
  if (!missing.empty()) {
    std::string msg = "no prediction for " + std::to_string(missing.size()) + " ground-truth frame(s):";
    for (const auto& n : missing) msg += " " + n;
    throw std::runtime_error(msg);
  }
  if (names.empty()) throw std::runtime_error("no ground-truth masks in " + a.gt);

  // Uniform subsample without replacement, reported in filename order.
  if (a.subsample > 0 && a.subsample < names.size()) {
    Rng rng(a.seed);
    for (std::size_t i = 0; i < a.subsample; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng.below(names.size() - i));
      std::swap(names[i], names[j]);
    }
    names.resize(a.subsample);
    std::sort(names.begin(), names.end());
  }

  ConfusionCounts total;
  json frames = json::array();
  for (const auto& name : names) {
    const ConfusionCounts c = accumulate(read_mask(pred_files.at(name)), read_mask(gt_files.at(name)));
    total += c;
    json row = to_json(c, metrics(c));
    row["frame"] = name;
    frames.push_back(std::move(row));
  }
  json report = to_json(total, metrics(total));
  report["frames_evaluated"] = names.size();
  report["per_frame"] = std::move(frames);
  const std::string text = report.dump(2) + "\n";
  if (a.out.empty()) std::cout << text;
  else write_text(a.out, text);
  return 0;
}

// ---------------------------------------------------------------------------
// synth

struct SynthArgs {
  std::string scenario;
  std::uint64_t seed = 1;
  std::string out;
  std::size_t kmax = 10;
  std::size_t history = 100;
  std::string mode = "approx";
};

// Our choice of the three well-separated Gaussians (spacing 50 = 16 sigma).
const std::vector<GaussianSpec> kFitDemoMixture = {{30.0, 3.0, 100}, {80.0, 3.0, 100}, {130.0, 3.0, 100}};
const std::vector<GaussianSpec> kUpdateDemoMixture = {{16.0, 1.5, 50}, {50.0, 2.0, 50}};
const std::vector<GaussianSpec> kUpdateDemoStream = {{21.0, 1.0, 50}};

ScenarioFile load_scenario_or_default(const std::string& path) {
  if (path.empty()) return {};
  try {
    return load_scenario(path);
  } catch (const ScenarioError& e) {
    throw UsageError(e.what());
  }
}

void append_model_rows(std::ostream& csv, const std::string& stage, const MixtureModel& m, double lo, double hi) {
  const int steps = 400;
  for (int i = 0; i <= steps; ++i) {
    const double x = lo + (hi - lo) * i / steps;
    csv << stage << ",density,," << x << ',' << mixture_density(m, x) << ",,,\n";
  }
  for (std::size_t k = 0; k < m.size(); ++k) {
    const auto& c = m.components[k];
    csv << stage << ",component," << k << ",,," << c.weight << ',' << c.mean << ',' << c.variance << '\n';
  }
}

std::pair<double, double> plot_range(const std::vector<double>& a, const std::vector<double>& b = {}) {
  double lo = 1e300;
  double hi = -1e300;
  for (const auto* v : {&a, &b}) {
    for (double x : *v) {
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
  }
  const double pad = 0.1 * (hi - lo) + 1.0;
  return {lo - pad, hi + pad};
}

std::ostream& open_csv(const std::string& out, std::ofstream& file) {
  if (out.empty()) return std::cout;
  file.open(out, std::ios::binary);
  if (!file) throw std::runtime_error("cannot open " + out + " for writing");
  return file;
}

const char* kCsvHeader = "stage,row,component,x,density,weight,mean,variance\n";

int cmd_synth_fit(const SynthArgs& a) {
  const ScenarioFile sf = load_scenario_or_default(a.scenario);
  const auto& specs = sf.mixture.empty() ? kFitDemoMixture : sf.mixture;
  const std::vector<double> data = gen_mixture_samples(specs, a.seed);
  FitConfig fc;
  fc.history_len = data.size();
  fc.k_max = std::min(a.kmax, data.size());
  fc.rng_seed = a.seed;
  const FitResult r = fit(data, fc);

  std::ofstream file;
  std::ostream& csv = open_csv(a.out, file);
  csv.precision(10);
  csv << kCsvHeader;
  const auto [lo, hi] = plot_range(data);
  append_model_rows(csv, "fit", r.model, lo, hi);
  std::cerr << "recovered K=" << r.model.size() << " after " << r.iterations << " iterations\n";
  return 0;
}

int cmd_synth_update(const SynthArgs& a) {
  const ScenarioFile sf = load_scenario_or_default(a.scenario);
  const auto& specs = sf.mixture.empty() ? kUpdateDemoMixture : sf.mixture;
  const auto& stream_specs = sf.update.empty() ? kUpdateDemoStream : sf.update;
  const std::vector<double> data = gen_mixture_samples(specs, a.seed);
  const std::vector<double> stream = gen_mixture_samples(stream_specs, a.seed + 1);

  FitConfig fc;
  fc.history_len = data.size();
  fc.k_max = std::min(a.kmax, data.size());
  fc.rng_seed = a.seed;
  MixtureModel m = fit(data, fc).model;

  AdaptationConfig ac;
  ac.mode = a.mode == "exact" ? AdaptMode::exact_history : AdaptMode::memory_efficient;
  HistoryPool pool(data.size());
  for (double x : data) pool.push(x);

  std::ofstream file;
  std::ostream& csv = open_csv(a.out, file);
  csv.precision(10);
  csv << kCsvHeader;
  const auto [lo, hi] = plot_range(data, stream);
  append_model_rows(csv, "t0", m, lo, hi);
  for (std::size_t i = 0; i < stream.size(); ++i) {
    adapt(m, stream[i], ac, &pool);
    const std::size_t seen = i + 1;
    if (seen == 25 || seen == 50 || seen == stream.size()) append_model_rows(csv, "t" + std::to_string(seen), m, lo, hi);
  }
  std::cerr << "final K=" << m.size() << " after " << stream.size() << " streamed samples\n";
  return 0;
}

int cmd_synth_video(const SynthArgs& a) {
  const ScenarioFile sf = load_scenario_or_default(a.scenario);
  VideoScenario sc = sf.video;
  if (a.scenario.empty()) {
    // A bimodal patch and one hot object crossing the frame.
    sc.frames = 160;
    sc.regions.push_back({{0, 0, 16, 16}, {60.0, 2.0, 1}, {90.0, 2.0, 1}, 0.5});
    sc.events.push_back({{2, 20, 20, 20}, {200.0, 3.0, 1}, 110, 140, 1.0, 0.0});
  }
  if (a.seed != 1 || a.scenario.empty()) sc.seed = a.seed;
  if (a.out.empty()) throw UsageError("synth video needs --out <dir>");
  const SyntheticVideo v = gen_video(sc);
  const fs::path root(a.out);
  fs::create_directories(root / "frames");
  fs::create_directories(root / "gt");
  for (std::size_t t = 0; t < v.frames.size(); ++t) {
    write_pgm(v.frames.frames[t], root / "frames" / (v.frames.names[t] + ".pgm"));
    write_mask(v.ground_truth[t], root / "gt" / (v.frames.names[t] + ".pgm"));
  }
  json events = json::array();
  for (const auto& e : sc.events) {
    events.push_back({{"rect", {e.rect.x, e.rect.y, e.rect.w, e.rect.h}},
                      {"mean", e.intensity.mean},
                      {"stddev", e.intensity.stddev},
                      {"start", e.start},
                      {"end", e.end},
                      {"velocity", {e.vx, e.vy}}});
  }
  json regions = json::array();
  for (const auto& r : sc.regions) {
    regions.push_back({{"rect", {r.rect.x, r.rect.y, r.rect.w, r.rect.h}},
                       {"first", {r.first.mean, r.first.stddev}},
                       {"second", {r.second.mean, r.second.stddev}},
                       {"p_first", r.p_first}});
  }
  const json meta = {{"rng", Rng::kAlgorithm},
                     {"seed", sc.seed},
                     {"width", sc.width},
                     {"height", sc.height},
                     {"frames", sc.frames},
                     {"bit_depth", sc.bit_depth},
                     {"frame_rate", sc.frame_rate},
                     {"background", {sc.background.mean, sc.background.stddev}},
                     {"regions", regions},
                     {"events", events}};
  write_text(root / "scenario.json", meta.dump(2) + "\n");
  std::cout << "wrote " << sc.frames << " frames to " << root.string() << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// bench

struct BenchArgs {
  std::string size = "320x240";
  int frames = 100;
  std::size_t history = 100;
  std::size_t kmax = 50;
  int workers = 1;
  std::uint64_t seed = 1;
};

int cmd_bench(const BenchArgs& a) {
  const auto [w, h] = parse_size(a.size);
  if (a.frames < 1) throw UsageError("--frames must be positive");
  VideoScenario sc;
  sc.width = w;
  sc.height = h;
  sc.frames = static_cast<int>(a.history) + a.frames;
  sc.seed = a.seed;
  const SyntheticVideo v = gen_video(sc);

  EngineConfig cfg;
  cfg.fit.history_len = a.history;
  cfg.fit.k_max = std::min(a.kmax, a.history);
  cfg.fit.rng_seed = a.seed;
  FrameSequence hist;
  hist.frames.assign(v.frames.frames.begin(), v.frames.frames.begin() + static_cast<std::ptrdiff_t>(a.history));

  auto t0 = std::chrono::steady_clock::now();
  PixelGrid grid = initialize_grid(hist, cfg, a.workers);
  const double init_s = seconds_since(t0);

  t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < a.frames; ++i) process_frame(grid, v.frames.frames[a.history + static_cast<std::size_t>(i)], a.workers);
  const double run_s = seconds_since(t0);

  const double pixels = static_cast<double>(w) * h;
  const json report = {{"size", a.size},
                       {"frames", a.frames},
                       {"workers", a.workers},
                       {"init_seconds", init_s},
                       {"init_us_per_pixel", 1e6 * init_s / pixels},
                       {"run_seconds", run_s},
                       {"fps", a.frames / run_s},
                       {"us_per_pixel", 1e6 * run_s / (pixels * a.frames)}};
  std::cout << report.dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Thermal background subtraction with per-pixel variational mixtures"};
  app.require_subcommand(1);

  FitArgs fit_args;
  fit_args.workers = default_workers();
  auto* fit_cmd = app.add_subcommand("fit", "fit per-pixel models from the first N frames");
  fit_args.input.add(fit_cmd, "--input", "directory of PGM frames (or raw file with --raw)");
  fit_cmd->add_option("--history", fit_args.history, "history length N")->check(CLI::PositiveNumber);
  fit_cmd->add_option("--kmax", fit_args.kmax, "initial number of components")->check(CLI::PositiveNumber);
  fit_cmd->add_option("--seed", fit_args.seed, "k-means++ seed");
  fit_cmd->add_option("--out", fit_args.out, "model file to write")->required();
  fit_cmd->add_option("--workers", fit_args.workers, "worker threads")->check(CLI::PositiveNumber);
  fit_cmd->add_flag("--strict", fit_args.strict, "exit 3 if any pixel fit fails to converge");
  fit_cmd->add_flag("--quiet", fit_args.quiet, "no progress output");

  RunArgs run_args;
  run_args.workers = default_workers();
  auto* run_cmd = app.add_subcommand("run", "segment frames and adapt the model");
  run_cmd->add_option("--model", run_args.model, "model file from fit")->required();
  run_args.input.add(run_cmd, "--input", "directory of PGM frames (or raw file with --raw)");
  run_cmd->add_option("--out", run_args.out, "output directory for masks")->required();
  run_cmd->add_option("--pbg", run_args.pbg, "background prior p(bg)");
  run_cmd->add_option("--threshold", run_args.threshold, "posterior threshold for background");
  run_cmd->add_option("--min-blob", run_args.min_blob, "smallest foreground blob kept (pixels)");
  run_cmd->add_option("--connectivity", run_args.connectivity, "blob connectivity")->check(CLI::IsMember({4, 8}));
  run_cmd->add_option("--mode", run_args.mode, "eps* estimate")->check(CLI::IsMember({"exact", "approx"}));
  run_cmd->add_option("--workers", run_args.workers, "worker threads")->check(CLI::PositiveNumber);
  run_cmd->add_flag("--save-posterior", run_args.save_posterior, "also write 16-bit p(bg|x) images");
  run_cmd->add_flag("--freeze", run_args.freeze, "classify only, never update the model");
  run_cmd->add_option("--history-input", run_args.history_input, "frames that seed the exact-mode sample pools");
  run_cmd->add_option("--save-model", run_args.save_model, "write the adapted model here at the end");
  run_cmd->add_option("--skip", run_args.skip, "skip the first frames of the input (e.g. the fit history)");

  EvalArgs eval_args;
  auto* eval_cmd = app.add_subcommand("eval", "compare predicted masks with ground truth");
  eval_cmd->add_option("--pred", eval_args.pred, "predicted mask directory")->required();
  eval_cmd->add_option("--gt", eval_args.gt, "ground-truth mask directory")->required();
  eval_cmd->add_option("--subsample", eval_args.subsample, "evaluate this many uniformly drawn frames");
  eval_cmd->add_option("--seed", eval_args.seed, "subsampling seed");
  eval_cmd->add_option("--out", eval_args.out, "write JSON here instead of stdout");

  SynthArgs synth_args;
  auto* synth_cmd = app.add_subcommand("synth", "synthetic experiments and test videos");
  synth_cmd->require_subcommand(1);
  auto add_synth_common = [&synth_args](CLI::App* c) {
    c->add_option("--scenario", synth_args.scenario, "scenario file");
    c->add_option("--seed", synth_args.seed, "generator seed");
    c->add_option("--out", synth_args.out, "output (CSV file, or directory for video)");
  };
  auto* fit_demo = synth_cmd->add_subcommand("fit-demo", "fit three well-separated Gaussians, CSV out");
  add_synth_common(fit_demo);
  fit_demo->add_option("--kmax", synth_args.kmax, "initial number of components")->check(CLI::PositiveNumber);
  auto* update_demo = synth_cmd->add_subcommand("update-demo", "fit two modes, stream a third, CSV at t=0/25/50");
  add_synth_common(update_demo);
  update_demo->add_option("--kmax", synth_args.kmax, "initial number of components")->check(CLI::PositiveNumber);
  update_demo->add_option("--mode", synth_args.mode, "eps* estimate")->check(CLI::IsMember({"exact", "approx"}));
  auto* video = synth_cmd->add_subcommand("video", "render a scenario to PGM frames and masks");
  add_synth_common(video);

  BenchArgs bench_args;
  bench_args.workers = default_workers();
  auto* bench_cmd = app.add_subcommand("bench", "throughput on a synthetic video");
  bench_cmd->add_option("--size", bench_args.size, "frame size WxH");
  bench_cmd->add_option("--frames", bench_args.frames, "frames to process after initialization");
  bench_cmd->add_option("--history", bench_args.history, "history length N")->check(CLI::PositiveNumber);
  bench_cmd->add_option("--kmax", bench_args.kmax, "initial number of components")->check(CLI::PositiveNumber);
  bench_cmd->add_option("--workers", bench_args.workers, "worker threads")->check(CLI::PositiveNumber);
  bench_cmd->add_option("--seed", bench_args.seed, "seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    if (fit_cmd->parsed()) return cmd_fit(fit_args);
    if (run_cmd->parsed()) return cmd_run(run_args);
    if (eval_cmd->parsed()) return cmd_eval(eval_args);
    if (fit_demo->parsed()) return cmd_synth_fit(synth_args);
    if (update_demo->parsed()) return cmd_synth_update(synth_args);
    if (video->parsed()) return cmd_synth_video(synth_args);
    if (bench_cmd->parsed()) return cmd_bench(bench_args);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const NumericError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}
