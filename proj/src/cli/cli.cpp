#include "sinnet/cli.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "sinnet/empirical.hpp"
#include "sinnet/error.hpp"
#include "sinnet/kernels.hpp"
#include "sinnet/network.hpp"
#include "sinnet/random.hpp"
#include "sinnet/signal.hpp"
#include "sinnet/spectral.hpp"
#include "sinnet/stats.hpp"
#include "sinnet/trainer.hpp"

namespace sinnet::cli {

namespace {

using nlohmann::json;

// Raised by handlers when training diverges; maps to the numerical exit code
// after the partial report has been written.
struct Diverged {};

std::vector<double> parse_list(const std::string& text, const std::string& flag) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (tok.empty() || *end != '\0' || !std::isfinite(v)) {
      throw UsageError(flag + ": '" + tok + "' is not a number");
    }
    out.push_back(v);
  }
  if (out.empty()) throw UsageError(flag + ": expected a comma-separated list");
  return out;
}

std::vector<std::size_t> parse_grid(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, 'x')) {
    char* end = nullptr;
    const long long v = std::strtoll(tok.c_str(), &end, 10);
    if (tok.empty() || *end != '\0' || v <= 0) throw UsageError("--grid: '" + tok + "' is not a positive count");
    out.push_back(static_cast<std::size_t>(v));
  }
  if (out.empty()) throw UsageError("--grid: expected counts like 512x512");
  return out;
}

SignalFormat parse_format(const std::string& name) {
  if (name == "pgm") return SignalFormat::kPgm;
  if (name == "wav") return SignalFormat::kWav;
  return SignalFormat::kCsvGrid;
}

SignalFormat format_for(const std::string& path, const std::string& explicit_format) {
  if (!explicit_format.empty()) return parse_format(explicit_format);
  const auto ext = std::filesystem::path(path).extension().string();
  if (ext == ".pgm") return SignalFormat::kPgm;
  if (ext == ".wav") return SignalFormat::kWav;
  if (ext == ".csv" || ext == ".txt") return SignalFormat::kCsvGrid;
  throw UsageError("--format: cannot infer the format of '" + path + "'; pass pgm, wav or csv");
}

std::string timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

class Sink {
 public:
  explicit Sink(std::ostream& fallback) : fallback_(fallback) {}

  void write(const std::string& text, const std::string& path, const char* flag) const {
    if (path.empty()) {
      fallback_ << text;
      return;
    }
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw DataError(std::string(flag) + ": cannot open '" + path + "' for writing");
    f << text;
    if (!f) throw DataError(std::string(flag) + ": write to '" + path + "' failed");
  }

  void write_json(json j, const std::string& path) const {
    j["metadata"] = {{"timestamp", timestamp()}};
    write(j.dump(2) + "\n", path, "--out");
  }

 private:
  std::ostream& fallback_;
};

// --- shared flag groups ------------------------------------------------------

struct NetFlags {
  std::size_t width = 256;
  std::size_t depth = 3;
  double omega = 1.0;
  std::string init = "ssn";
  double c = std::sqrt(6.0);
  std::string scales;
  std::uint64_t seed = 0;

  void add(CLI::App* app, std::size_t default_width, std::size_t default_depth, double default_omega) {
    width = default_width;
    depth = default_depth;
    omega = default_omega;
    app->add_option("--width", width, "Hidden width")->check(CLI::PositiveNumber)->capture_default_str();
    app->add_option("--depth", depth, "Number of hidden (sine) layers")->check(CLI::PositiveNumber)->capture_default_str();
    app->add_option("--omega", omega, "First-layer frequency scale")->check(CLI::PositiveNumber)->capture_default_str();
    app->add_option("--init", init, "Initialization scheme")->check(CLI::IsMember({"ssn", "siren"}))->capture_default_str();
    app->add_option("--c", c, "SIREN uniform bound")->check(CLI::PositiveNumber);
    app->add_option("--scales", scales, "Per-axis omega multipliers, comma separated");
    app->add_option("--seed", seed, "Initialization seed")->capture_default_str();
  }

  NetworkConfig config(std::size_t input_dim, std::size_t output_dim = 1) const {
    NetworkConfig cfg;
    cfg.input_dim = input_dim;
    cfg.hidden_widths.assign(depth, width);
    cfg.output_dim = output_dim;
    cfg.omega = omega;
    cfg.init = init == "siren" ? InitScheme::kSirenUniform : InitScheme::kSsnNormal;
    cfg.siren_c = c;
    cfg.seed = seed;
    if (!scales.empty()) {
      cfg.per_axis_scale = parse_list(scales, "--scales");
      if (cfg.per_axis_scale.size() != input_dim) {
        throw UsageError("--scales: expected " + std::to_string(input_dim) + " values");
      }
    }
    return cfg;
  }
};

struct TrainFlags {
  std::size_t steps = 2000;
  double lr = 1e-3;
  std::optional<double> first_layer_lr;
  double final_lr_factor = 1.0;
  std::size_t lbfgs_steps = 0;
  std::optional<std::size_t> batch;
  std::size_t record_every = 100;
  std::uint64_t seed = 0;

  void add(CLI::App* app, std::size_t default_steps, double default_lr, std::size_t default_lbfgs = 0) {
    steps = default_steps;
    lr = default_lr;
    lbfgs_steps = default_lbfgs;
    app->add_option("--steps", steps, "Optimizer steps")->check(CLI::PositiveNumber)->capture_default_str();
    app->add_option("--lr", lr, "Adam learning rate")->check(CLI::PositiveNumber)->capture_default_str();
    app->add_option("--first-layer-lr", first_layer_lr, "Separate rate for the first layer")->check(CLI::PositiveNumber);
    app->add_option("--final-lr-factor", final_lr_factor, "Exponential decay of the rates to this fraction")
        ->check(CLI::Range(0.0, 1.0).description("in (0, 1]"))
        ->capture_default_str();
    app->add_option("--lbfgs-steps", lbfgs_steps, "Full-batch L-BFGS iterations after Adam")->capture_default_str();
    app->add_option("--batch", batch, "Minibatch size (full batch when absent)")->check(CLI::PositiveNumber);
    app->add_option("--record-every", record_every, "Logging interval in steps")->check(CLI::PositiveNumber)->capture_default_str();
    app->add_option("--train-seed", seed, "Minibatch shuffling seed")->capture_default_str();
  }

  TrainConfig config(Task task) const {
    TrainConfig c;
    c.task = task;
    c.steps = steps;
    c.learning_rate = lr;
    c.first_layer_lr = first_layer_lr;
    c.final_lr_factor = final_lr_factor;
    c.lbfgs_steps = lbfgs_steps;
    c.batch_size = batch;
    c.record_every = record_every;
    c.seed = seed;
    return c;
  }
};

struct SignalFlags {
  std::string input;
  std::string format;
  std::string kind = "two-frequency";
  std::size_t n = 512;
  double fx = 128.0;
  double fy = 32.0;
  std::size_t max_freq = 32;
  std::size_t terms = 8;
  std::uint64_t seed = 0;

  void add(CLI::App* app, bool with_input, std::size_t default_n) {
    n = default_n;
    if (with_input) {
      app->add_option("--input", input, "Signal file (PGM, WAV or CSV_GRID)");
      app->add_option("--format", format, "Input format")->check(CLI::IsMember({"pgm", "wav", "csv"}));
    }
    app->add_option("--signal", kind, "Synthetic signal when no input is given")
        ->check(CLI::IsMember({"two-frequency", "cosines", "bandlimited", "smooth"}))
        ->capture_default_str();
    app->add_option("--n", n, "Samples per axis for synthetic signals")->check(CLI::PositiveNumber)->capture_default_str();
    app->add_option("--fx", fx, "Axis-0 frequency for --signal cosines")->capture_default_str();
    app->add_option("--fy", fy, "Axis-1 frequency for --signal cosines")->capture_default_str();
    app->add_option("--max-freq", max_freq, "Band limit for --signal bandlimited")->check(CLI::PositiveNumber)->capture_default_str();
    app->add_option("--terms", terms, "Cosine terms for --signal bandlimited")->check(CLI::PositiveNumber)->capture_default_str();
    app->add_option("--signal-seed", seed, "Seed for random synthetic signals")->capture_default_str();
  }

  Signal load() const {
    if (!input.empty()) return load_signal(input, format_for(input, format));
    if (kind == "two-frequency") return synth_two_frequency(n);
    if (kind == "cosines") return synth_cosines(n, fx, fy);
    if (kind == "bandlimited") return synth_bandlimited(n, max_freq, terms, seed);
    return synth_smooth_image(n, seed);
  }

  json describe() const {
    if (!input.empty()) return {{"input", input}};
    json j{{"signal", kind}, {"n", n}};
    if (kind == "cosines") j.update({{"fx", fx}, {"fy", fy}});
    if (kind == "bandlimited") j.update({{"max_freq", max_freq}, {"terms", terms}, {"signal_seed", seed}});
    if (kind == "smooth") j["signal_seed"] = seed;
    return j;
  }
};

Matrix row(std::span<const double> v) {
  Matrix m(1, static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) m(0, static_cast<Eigen::Index>(i)) = v[i];
  return m;
}

Signal reconstruct(const SinusoidalNetwork& net, const Signal& like) {
  const Matrix pred = net.forward_batch(like.coordinates());
  std::vector<double> v(pred.data(), pred.data() + pred.size());
  return Signal(like.axis_sizes(), std::move(v));
}

Signal shifted_to_unit(const Signal& s) {
  const auto [lo, hi] = std::minmax_element(s.values().begin(), s.values().end());
  const double span = *hi - *lo;
  std::vector<double> v(s.values().begin(), s.values().end());
  for (double& e : v) e = span > 0.0 ? (e - *lo) / span : 0.5;
  return Signal(s.axis_sizes(), std::move(v));
}

void finish_training(const Sink& sink, json j, const TrainReport& report, const std::string& out_path) {
  j["report"] = to_json(report);
  sink.write_json(std::move(j), out_path);
  if (report.status != "ok") throw Diverged{};
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  return v;
}

// Central differences in normalized coordinates (one-sided at the edges).
void finite_difference_targets(const Signal& s, Matrix* grad, Matrix* lap) {
  if (s.ndim() != 2) throw UsageError("--input: Poisson targets need a 2D image");
  const std::size_t r = s.axis_sizes()[0];
  const std::size_t c = s.axis_sizes()[1];
  const double hr = 2.0 / static_cast<double>(r);
  const double hc = 2.0 / static_cast<double>(c);
  auto at = [&](std::size_t i, std::size_t j) { return s[i * c + j]; };
  auto deriv = [](double lo, double mid, double hi, bool has_lo, bool has_hi, double h) {
    if (has_lo && has_hi) return (hi - lo) / (2.0 * h);
    return has_hi ? (hi - mid) / h : (mid - lo) / h;
  };
  const auto n = static_cast<Eigen::Index>(s.size());
  if (grad) grad->resize(2, n);
  if (lap) lap->resize(1, n);
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < c; ++j) {
      const auto k = static_cast<Eigen::Index>(i * c + j);
      const std::size_t im = i > 0 ? i - 1 : i, ip = i + 1 < r ? i + 1 : i;
      const std::size_t jm = j > 0 ? j - 1 : j, jp = j + 1 < c ? j + 1 : j;
      if (grad) {
        (*grad)(0, k) = deriv(at(im, j), at(i, j), at(ip, j), i > 0, i + 1 < r, hr);
        (*grad)(1, k) = deriv(at(i, jm), at(i, j), at(i, jp), j > 0, j + 1 < c, hc);
      }
      if (lap) {
        (*lap)(0, k) = (at(ip, j) - 2.0 * at(i, j) + at(im, j)) / (hr * hr) +
                       (at(i, jp) - 2.0 * at(i, j) + at(i, jm)) / (hc * hc);
      }
    }
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sinusoidal networks: kernels, spectra and training", "sinnet"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");
  const Sink sink(out);
  std::function<void()> action;

  // init-stats ---------------------------------------------------------------
  {
    auto* cmd = app.add_subcommand("init-stats", "Per-layer activation statistics at initialization (CSV)");
    auto net = std::make_shared<NetFlags>();
    net->add(cmd, 2048, 6, 1.0);
    auto batch = std::make_shared<std::size_t>(256);
    auto input_dim = std::make_shared<std::size_t>(1);
    auto shift = std::make_shared<double>(0.0);
    auto input_seed = std::make_shared<std::uint64_t>(1);
    auto path = std::make_shared<std::string>();
    cmd->add_option("--batch", *batch, "Number of uniform inputs in [-1, 1]")->check(CLI::PositiveNumber)->capture_default_str();
    cmd->add_option("--input-dim", *input_dim, "Input dimension")->check(CLI::PositiveNumber)->capture_default_str();
    cmd->add_option("--shift", *shift, "Constant added to every input")->capture_default_str();
    cmd->add_option("--input-seed", *input_seed, "Seed for the input batch")->capture_default_str();
    cmd->add_option("--out", *path, "CSV output path (stdout when absent)");
    cmd->callback([=, &action, &sink] {
      action = [=, &sink] {
        const auto net_ = init_network(net->config(*input_dim));
        Rng rng(*input_seed);
        Matrix x(static_cast<Eigen::Index>(*input_dim), static_cast<Eigen::Index>(*batch));
        for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.uniform(-1.0, 1.0) + *shift;
        const auto stats = activation_stats(net_, x);
        std::vector<std::vector<double>> rows;
        for (std::size_t l = 0; l < stats.size(); ++l) {
          rows.push_back({static_cast<double>(l + 1), stats[l].pre_mean, stats[l].pre_var, stats[l].post_mean,
                          stats[l].post_var});
        }
        sink.write(format_csv({"layer", "pre_mean", "pre_var", "post_mean", "post_var"}, rows), *path, "--out");
      };
    });
  }

  // kernel / kernel-empirical ------------------------------------------------
  struct KernelFlags {
    std::string family = "ssn";
    std::size_t depth = 1;
    double omega = 1.0;
    double c = std::sqrt(6.0);
    std::string center = "0";
    double range = 1.0;
    std::size_t points = 201;
    std::string kind = "ntk";
    std::size_t axis = 0;
    std::string out;

    void add(CLI::App* cmd) {
      cmd->add_option("--family", family, "Network family")->check(CLI::IsMember({"ssn", "siren"}))->capture_default_str();
      cmd->add_option("--depth", depth, "Hidden layers L")->check(CLI::PositiveNumber)->capture_default_str();
      cmd->add_option("--omega", omega, "Frequency scale")->check(CLI::PositiveNumber)->capture_default_str();
      cmd->add_option("--c", c, "SIREN uniform bound")->check(CLI::PositiveNumber);
      cmd->add_option("--center", center, "Slice center x~, comma separated")->capture_default_str();
      cmd->add_option("--range", range, "Offsets span [-range, range]")->check(CLI::NonNegativeNumber)->capture_default_str();
      cmd->add_option("--points", points, "Number of offsets (1 gives only 0)")->check(CLI::PositiveNumber)->capture_default_str();
      cmd->add_option("--kind", kind, "Kernel")->check(CLI::IsMember({"ntk", "nngp"}))->capture_default_str();
      cmd->add_option("--axis", axis, "Axis the slice moves along")->capture_default_str();
      cmd->add_option("--out", out, "CSV output path (stdout when absent)");
    }

    KernelSpec spec() const {
      KernelSpec s;
      s.family = family == "siren" ? KernelFamily::kSiren : KernelFamily::kSsn;
      s.depth = depth;
      s.omega = omega;
      s.c = c;
      return s;
    }

    std::vector<double> centre() const {
      auto v = parse_list(center, "--center");
      if (axis >= v.size()) throw UsageError("--axis: out of range for a " + std::to_string(v.size()) + "-d center");
      return v;
    }

    std::vector<double> offsets() const { return points == 1 ? std::vector<double>{0.0} : linspace(-range, range, points); }
  };

  {
    auto* cmd = app.add_subcommand("kernel", "Analytic NNGP/NTK slice (CSV: offset,value,reference)");
    auto f = std::make_shared<KernelFlags>();
    f->add(cmd);
    cmd->callback([=, &action, &sink] {
      action = [=, &sink] {
        const KernelSpec spec = f->spec();
        const KernelKind kind = f->kind == "nngp" ? KernelKind::kNngp : KernelKind::kNtk;
        const auto center = f->centre();
        const auto slice = kernel_slice(kind, spec, center, f->offsets(), f->axis);
        const ReferenceKind ref = spec.family == KernelFamily::kSiren ? ReferenceKind::kSinc : ReferenceKind::kGaussian;
        std::vector<std::vector<double>> rows;
        for (std::size_t i = 0; i < slice.offsets.size(); ++i) {
          std::vector<double> dx(center.size(), 0.0);
          dx[f->axis] = slice.offsets[i];
          rows.push_back({slice.offsets[i], slice.values[i], reference_kernel(ref, spec.omega, spec.c, dx)});
        }
        sink.write(format_csv({"offset", "value", "reference"}, rows), f->out, "--out");
      };
    });
  }

  {
    auto* cmd = app.add_subcommand("kernel-empirical", "Finite-width kernel estimate vs analytic (CSV)");
    auto f = std::make_shared<KernelFlags>();
    f->add(cmd);
    f->points = 21;
    auto width = std::make_shared<std::size_t>(1024);
    auto draws = std::make_shared<std::size_t>(16);
    auto seed = std::make_shared<std::uint64_t>(0);
    cmd->add_option("--width", *width, "Hidden width of every layer")->check(CLI::PositiveNumber)->capture_default_str();
    cmd->add_option("--draws", *draws, "Independent initializations")->check(CLI::PositiveNumber)->capture_default_str();
    cmd->add_option("--seed", *seed, "Base seed (draw i uses seed + i)")->capture_default_str();
    cmd->callback([=, &action, &sink] {
      action = [=, &sink] {
        const KernelSpec spec = f->spec();
        const KernelKind kind = f->kind == "nngp" ? KernelKind::kNngp : KernelKind::kNtk;
        const auto center = f->centre();
        const auto offsets = f->offsets();
        const auto analytic = kernel_slice(kind, spec, center, offsets, f->axis);
        NetworkConfig cfg;
        cfg.input_dim = center.size();
        cfg.hidden_widths.assign(spec.depth, *width);
        cfg.output_dim = 1;
        cfg.omega = spec.omega;
        cfg.init = spec.family == KernelFamily::kSiren ? InitScheme::kSirenUniform : InitScheme::kSsnNormal;
        cfg.siren_c = spec.c;
        cfg.parametrization = Parametrization::kNtk;
        EstimatorConfig est{*width, *draws, *seed};
        Matrix pts(static_cast<Eigen::Index>(center.size()), static_cast<Eigen::Index>(offsets.size()));
        for (std::size_t i = 0; i < offsets.size(); ++i) {
          for (std::size_t a = 0; a < center.size(); ++a) pts(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(i)) = center[a];
          pts(static_cast<Eigen::Index>(f->axis), static_cast<Eigen::Index>(i)) += offsets[i];
        }
        const auto emp = kind == KernelKind::kNtk ? empirical_ntk_slice(cfg, est, center, pts)
                                                  : empirical_nngp_slice(cfg, est, center, pts);
        std::vector<std::vector<double>> rows;
        for (std::size_t i = 0; i < offsets.size(); ++i) {
          const double a = analytic.values[i];
          rows.push_back({offsets[i], a, emp[i].mean, emp[i].standard_error, std::abs(emp[i].mean - a) / std::abs(a)});
        }
        sink.write(format_csv({"offset", "analytic", "empirical_mean", "empirical_stderr", "relative_error"}, rows),
                   f->out, "--out");
      };
    });
  }

  // spectrum -----------------------------------------------------------------
  {
    auto* cmd = app.add_subcommand("spectrum", "Low-pass reconstruction loss per cutoff (CSV)");
    auto sig = std::make_shared<SignalFlags>();
    sig->add(cmd, true, 512);
    auto cutoffs = std::make_shared<std::string>("0,8,16,32,64,128,200,256");
    auto path = std::make_shared<std::string>();
    cmd->add_option("--cutoffs", *cutoffs, "Cutoff frequencies, comma separated")->capture_default_str();
    cmd->add_option("--out", *path, "CSV output path (stdout when absent)");
    cmd->callback([=, &action, &sink] {
      action = [=, &sink] {
        const auto cuts = parse_list(*cutoffs, "--cutoffs");
        for (double c : cuts) {
          if (c < 0.0) throw UsageError("--cutoffs: values must be non-negative");
        }
        const auto curve = lowpass_loss_curve(sig->load(), cuts);
        std::vector<std::vector<double>> rows;
        for (const auto& p : curve) rows.push_back({p.cutoff, p.mse});
        sink.write(format_csv({"cutoff", "mse"}, rows), *path, "--out");
      };
    });
  }

  // suggest-omega ------------------------------------------------------------
  {
    auto* cmd = app.add_subcommand("suggest-omega", "Nyquist-based omega heuristic (JSON)");
    auto grid = std::make_shared<std::string>();
    auto random_points = std::make_shared<std::size_t>(0);
    auto extents = std::make_shared<std::string>();
    auto input = std::make_shared<std::string>();
    auto format = std::make_shared<std::string>();
    auto threshold = std::make_shared<double>(0.999);
    auto divisor = std::make_shared<double>(kDefaultOmegaDivisor);
    auto path = std::make_shared<std::string>();
    auto* g = cmd->add_option("--grid", *grid, "Axis sample counts, e.g. 512x512");
    auto* r = cmd->add_option("--random-points", *random_points, "Number of scattered samples")->check(CLI::PositiveNumber);
    cmd->add_option("--extents", *extents, "Box extents for --random-points, comma separated");
    auto* i = cmd->add_option("--input", *input, "Measure the spectrum of a signal file");
    cmd->add_option("--format", *format, "Input format")->check(CLI::IsMember({"pgm", "wav", "csv"}));
    cmd->add_option("--threshold", *threshold, "Energy fraction for --input")->capture_default_str();
    cmd->add_option("--divisor", *divisor, "Heuristic divisor")->check(CLI::PositiveNumber)->capture_default_str();
    cmd->add_option("--out", *path, "JSON output path (stdout when absent)");
    g->excludes(r)->excludes(i);
    r->excludes(i);
    cmd->callback([=, &action, &sink] {
      action = [=, &sink] {
        OmegaSuggestion s;
        json cfg{{"divisor", *divisor}};
        if (!grid->empty()) {
          const auto counts = parse_grid(*grid);
          s = suggest_omega_grid(counts, *divisor);
          cfg["grid"] = counts;
        } else if (*random_points > 0) {
          if (extents->empty()) throw UsageError("--extents: required with --random-points");
          const auto ext = parse_list(*extents, "--extents");
          s = suggest_omega_random(*random_points, ext, *divisor);
          cfg["random_points"] = *random_points;
          cfg["extents"] = ext;
        } else if (!input->empty()) {
          if (!(*threshold > 0.0 && *threshold <= 1.0)) throw UsageError("--threshold: must lie in (0, 1]");
          const auto sig = load_signal(*input, format_for(*input, *format));
          s = suggest_omega_from_frequencies(spectrum_max_freq(sig, *threshold), *divisor);
          cfg["input"] = *input;
          cfg["threshold"] = *threshold;
        } else {
          throw UsageError("one of --grid, --random-points or --input is required");
        }
        json j{{"config", cfg}, {"omega", s.omega}, {"per_axis_scale", s.per_axis_scale},
               {"max_freq_per_axis", s.max_freq_per_axis}};
        sink.write_json(std::move(j), *path);
      };
    });
  }

  // fit / split-fit ----------------------------------------------------------
  for (const bool split : {false, true}) {
    auto* cmd = app.add_subcommand(split ? "split-fit" : "fit",
                                   split ? "Fit the even checkerboard cells, score the odd ones (JSON)"
                                         : "Fit a signal with a sine network (JSON)");
    auto net = std::make_shared<NetFlags>();
    auto tr = std::make_shared<TrainFlags>();
    auto sig = std::make_shared<SignalFlags>();
    net->add(cmd, 256, 3, 32.0);
    tr->add(cmd, 2000, 1e-3);
    sig->add(cmd, true, 512);
    auto path = std::make_shared<std::string>();
    auto recon = std::make_shared<std::string>();
    cmd->add_option("--out", *path, "JSON report path (stdout when absent)");
    cmd->add_option("--recon", *recon, "Write the reconstruction as PGM (2D signals, clamped to [0, 1])");
    cmd->callback([=, &action, &sink] {
      action = [=, &sink] {
        const Signal s = sig->load();
        auto model = init_network(net->config(s.ndim()));
        TrainData data;
        if (split) {
          const auto cb = checkerboard_split(s);
          data.points = cb.train.points;
          data.targets = cb.train.values.transpose();
          data.test = std::make_pair(cb.test.points, Matrix(cb.test.values.transpose()));
        } else {
          data.points = s.coordinates();
          data.targets = row(s.values());
        }
        const auto report = train(model, tr->config(Task::kFit), data);
        json j{{"config", {{"network", to_json(model.config())}, {"train", to_json(tr->config(Task::kFit))},
                           {"data", sig->describe()}, {"split", split ? "checkerboard" : "none"}}}};
        if (split) {
          const auto test = evaluate(model, data.test->first, data.test->second);
          j["test_metrics"] = {{"mse", json_number(test.mse)}, {"psnr", json_number(test.psnr)}};
        }
        if (!recon->empty()) {
          if (s.ndim() != 2) throw UsageError("--recon: PGM output needs a 2D signal");
          write_pgm(reconstruct(model, s), *recon);
        }
        finish_training(sink, std::move(j), report, *path);
      };
    });
  }

  // poisson ------------------------------------------------------------------
  {
    auto* cmd = app.add_subcommand("poisson", "Fit an image from its gradient or Laplacian (JSON)");
    auto net = std::make_shared<NetFlags>();
    auto tr = std::make_shared<TrainFlags>();
    net->add(cmd, 256, 3, 8.0);
    tr->add(cmd, 2000, 1e-3);
    auto mode = std::make_shared<std::string>("grad");
    auto input = std::make_shared<std::string>();
    auto n = std::make_shared<std::size_t>(64);
    auto image_seed = std::make_shared<std::uint64_t>(0);
    auto path = std::make_shared<std::string>();
    auto recon = std::make_shared<std::string>();
    cmd->add_option("--mode", *mode, "Supervision target")->check(CLI::IsMember({"grad", "lap"}))->capture_default_str();
    cmd->add_option("--input", *input, "PGM image (finite-difference targets); synthetic when absent");
    cmd->add_option("--n", *n, "Synthetic image size")->check(CLI::PositiveNumber)->capture_default_str();
    cmd->add_option("--image-seed", *image_seed, "Synthetic image seed")->capture_default_str();
    cmd->add_option("--out", *path, "JSON report path (stdout when absent)");
    cmd->add_option("--recon", *recon, "Write the offset-corrected reconstruction as PGM");
    cmd->callback([=, &action, &sink] {
      action = [=, &sink] {
        Signal image;
        Matrix grad;
        Matrix lap;
        if (!input->empty()) {
          image = load_signal(*input, format_for(*input, "pgm"));
          finite_difference_targets(image, &grad, &lap);
        } else {
          std::vector<Signal> g;
          Signal l;
          image = synth_smooth_image(*n, *image_seed, &g, &l);
          grad.resize(2, static_cast<Eigen::Index>(image.size()));
          grad.row(0) = row(g[0].values());
          grad.row(1) = row(g[1].values());
          lap = row(l.values());
        }
        const Task task = *mode == "lap" ? Task::kPoissonLap : Task::kPoissonGrad;
        auto model = init_network(net->config(2));
        TrainData data;
        data.points = image.coordinates();
        data.targets = task == Task::kPoissonLap ? lap : grad;
        data.eval = std::make_pair(data.points, row(image.values()));
        const auto report = train(model, tr->config(task), data);
        const Signal rec = reconstruct(model, image);
        const double r = pearson_correlation(rec.values(), image.values());
        json j{{"config", {{"network", to_json(model.config())}, {"train", to_json(tr->config(task))},
                           {"data", input->empty() ? json{{"signal", "smooth"}, {"n", *n}, {"image_seed", *image_seed}}
                                                   : json{{"input", *input}}}}},
               {"pearson", json_number(r)}};
        if (!recon->empty()) {
          double shift = 0.0;
          for (std::size_t k = 0; k < rec.size(); ++k) shift += image[k] - rec[k];
          shift /= static_cast<double>(rec.size());
          std::vector<double> v(rec.values().begin(), rec.values().end());
          for (double& e : v) e += shift;
          write_pgm(Signal(rec.axis_sizes(), std::move(v)), *recon);
        }
        finish_training(sink, std::move(j), report, *path);
      };
    });
  }

  // pinn-burgers -------------------------------------------------------------
  {
    auto* cmd = app.add_subcommand("pinn-burgers", "Identify Burgers parameters from exact-solution samples (JSON)");
    auto net = std::make_shared<NetFlags>();
    auto tr = std::make_shared<TrainFlags>();
    net->add(cmd, 20, 8, 10.0);
    tr->add(cmd, 15000, 1e-3, 12000);
    auto samples = std::make_shared<std::size_t>(2000);
    auto data_seed = std::make_shared<std::uint64_t>(0);
    auto nt = std::make_shared<std::size_t>(100);
    auto nx = std::make_shared<std::size_t>(256);
    auto path = std::make_shared<std::string>();
    cmd->add_option("--samples", *samples, "Training samples drawn from the solution grid")->check(CLI::PositiveNumber)->capture_default_str();
    cmd->add_option("--data-seed", *data_seed, "Sampling seed")->capture_default_str();
    cmd->add_option("--nt", *nt, "Time samples in [0, 0.99]")->check(CLI::PositiveNumber)->capture_default_str();
    cmd->add_option("--nx", *nx, "Space samples in [-1, 1]")->check(CLI::PositiveNumber)->capture_default_str();
    cmd->add_option("--out", *path, "JSON report path (stdout when absent)");
    cmd->callback([=, &action, &sink] {
      action = [=, &sink] {
        const auto grid = burgers_solution(kBurgersNu, linspace(0.0, 0.99, *nt), linspace(-1.0, 1.0, *nx));
        const auto ds = sample_dataset(grid, *samples, *data_seed);
        auto model = init_network(net->config(2));
        TrainData data = burgers_train_data(ds);
        PdeDataset full;
        for (std::size_t i = 0; i < grid.t.size(); ++i) {
          for (std::size_t k = 0; k < grid.x.size(); ++k) {
            full.t.push_back(grid.t[i]);
            full.x.push_back(grid.x[k]);
            full.u.push_back(grid.at(i, k));
          }
        }
        const TrainData all = burgers_train_data(full);
        data.eval = std::make_pair(all.points, all.targets);
        const auto cfg = tr->config(Task::kBurgersIdent);
        const auto report = train(model, cfg, data);
        json j{{"config", {{"network", to_json(model.config())}, {"train", to_json(cfg)},
                           {"data", {{"samples", *samples}, {"data_seed", *data_seed}, {"nt", *nt}, {"nx", *nx},
                                     {"nu", kBurgersNu}}}}}};
        if (report.identified_params) {
          const auto [l1, l2] = *report.identified_params;
          j["lambda1"] = json_number(l1);
          j["lambda2"] = json_number(l2);
          j["lambda1_rel_error"] = json_number(std::abs(l1 - 1.0));
          j["lambda2_rel_error"] = json_number(std::abs(l2 - kBurgersNu) / kBurgersNu);
        }
        j["solution_mse"] = json_number(report.final_metrics.mse);
        finish_training(sink, std::move(j), report, *path);
      };
    });
  }

  // gen-signal ---------------------------------------------------------------
  {
    auto* cmd = app.add_subcommand("gen-signal", "Write a synthetic signal as PGM or CSV_GRID");
    auto sig = std::make_shared<SignalFlags>();
    sig->add(cmd, false, 512);
    auto format = std::make_shared<std::string>("csv");
    auto path = std::make_shared<std::string>();
    cmd->add_option("--format", *format, "pgm (rescaled to [0, 1]) or csv (raw values)")
        ->check(CLI::IsMember({"pgm", "csv"}))
        ->capture_default_str();
    cmd->add_option("--out", *path, "Output path")->required();
    cmd->callback([=, &action] {
      action = [=] {
        const Signal s = sig->load();
        if (*format == "pgm") {
          write_pgm(shifted_to_unit(s), *path);
        } else {
          write_csv_grid(s, *path);
        }
      };
    });
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }

  try {
    if (action) action();
    return kOk;
  } catch (const Diverged&) {
    err << "error: training diverged (non-finite loss); partial report written\n";
    return kNumerical;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const DataError& e) {
    err << "error: " << e.what() << "\n";
    return kData;
  } catch (const NumericalError& e) {
    err << "error: " << e.what() << "\n";
    return kNumerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kData;
  }
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace sinnet::cli
