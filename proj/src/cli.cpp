#include "pnp/cli.hpp"

#include "pnp/harness.hpp"
#include "pnp/image.hpp"
#include "pnp/rng.hpp"
#include "pnp/spectral_analysis.hpp"
#include "pnp/theory_checks.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace pnp::cli {

namespace {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> items;
  std::string item;
  std::istringstream is(text);
  while (std::getline(is, item, ',')) {
    item = trim(item);
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

std::vector<double> parse_doubles(const std::string& text, const std::string& what) {
  std::vector<double> values;
  for (const std::string& item : split_list(text)) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc() || ptr != item.data() + item.size()) {
      throw ConfigError(what + ": cannot parse '" + item + "' as a number");
    }
    values.push_back(v);
  }
  return values;
}

struct Common {
  std::string task = "inpaint";
  std::string alg = "ista";
  std::string denoiser = "dsg_nlm";
  double sample = 0.3;
  int blur_size = 11;
  int sr_factor = 2;
  double noise_sigma = 0.0;
  std::uint64_t seed = 1;
  std::string out_prefix;
  std::string config;
  bool theorem_mode = false;
};

void add_common(CLI::App& app, Common& c, bool tasks_list) {
  app.add_option("--task", c.task,
                 tasks_list ? "inpaint|deblur|superres, a comma list, or all" : "inpaint|deblur|superres");
  app.add_option("--alg", c.alg, "ista|admm");
  app.add_option("--denoiser", c.denoiser, "nlm|dsg_nlm");
  app.add_option("--sample", c.sample, "inpainting sampling fraction");
  app.add_option("--blur-size", c.blur_size, "uniform blur width (odd)");
  app.add_option("--sr-factor", c.sr_factor, "superresolution factor");
  app.add_option("--noise-sigma", c.noise_sigma, "Gaussian noise level of b");
  app.add_option("--seed", c.seed, "RNG seed");
  app.add_option("--out-prefix", c.out_prefix, "prefix for output files");
  app.add_option("--config", c.config, "key=value defaults file");
  app.add_flag("--theorem-mode", c.theorem_mode, "reject parameters outside the theorem hypotheses");
}

void log_config(const CLI::App& sub, std::ostream& err) {
  std::istringstream lines(sub.config_to_str(true, false));
  std::string line;
  err << "# " << sub.get_name() << " resolved config\n";
  while (std::getline(lines, line)) {
    if (!line.empty()) err << "#   " << line << '\n';
  }
}

std::ofstream open_output(const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot open output file " + path);
  return os;
}

// restore ---------------------------------------------------------------------

struct RestoreOpts {
  Common common;
  double gamma = 1.0;
  double rho = 1.0;
  int iters = 100;
  double stop_tol = 1e-9;
  int search_radius = -1;
  std::string in;
};

int cmd_restore(const RestoreOpts& o, std::ostream& out) {
  ExperimentConfig cfg;
  cfg.task = parse_task(o.common.task);
  cfg.algorithm = parse_algorithm(o.common.alg);
  cfg.denoiser = parse_denoiser(o.common.denoiser);
  cfg.gamma = o.gamma;
  cfg.rho = o.rho;
  cfg.sample = o.common.sample;
  cfg.blur_size = o.common.blur_size;
  cfg.sr_factor = o.common.sr_factor;
  cfg.noise_sigma = o.common.noise_sigma;
  cfg.seed = o.common.seed;
  cfg.iterations = o.iters;
  cfg.stop_tol = o.stop_tol;
  cfg.theorem_mode = o.common.theorem_mode;
  if (o.search_radius >= 0) cfg.search_radius = o.search_radius;

  Image truth;
  try {
    truth = read_pgm(o.in);
  } catch (const std::runtime_error& e) {
    throw ConfigError(e.what());
  }
  validate(cfg, truth);
  const ExperimentResult result = run_experiment(cfg, truth);

  const std::string image_path = o.common.out_prefix + "out.pgm";
  const std::string trace_path = o.common.out_prefix + "trace.csv";
  write_pgm(image_path, result.reconstruction);
  std::ofstream trace = open_output(trace_path);
  write_trace_csv(trace, result);

  const auto& tr = result.trace;
  out << std::setprecision(10);
  out << "psnr_db=" << result.psnr_final << '\n'
      << "baseline_psnr_db=" << result.psnr_baseline << '\n'
      << "iterations=" << tr.iterations << '\n'
      << "final_step=" << (tr.step_norms.empty() ? 0.0 : tr.step_norms.back()) << '\n'
      << "converged=" << (tr.converged ? "true" : "false") << '\n'
      << "diverged=" << (tr.diverged ? "true" : "false") << '\n'
      << "fixed_point=" << result.fixed_point_hash << '\n'
      << "wrote " << image_path << ", " << trace_path << '\n';
  return kExitOk;
}

// contraction -------------------------------------------------------------------

struct ContractionOpts {
  Common common;
  std::string gammas = "0.25,0.5,0.75,1,1.25,1.5,1.75";
  std::string rhos = "0.1,1,10";
  int size = 32;
  std::string in;
};

int cmd_contraction(const ContractionOpts& o, std::ostream& out) {
  std::vector<Task> tasks;
  if (o.common.task == "all") {
    tasks = {Task::inpaint, Task::deblur, Task::superres};
  } else {
    for (const std::string& name : split_list(o.common.task)) tasks.push_back(parse_task(name));
  }
  if (tasks.empty()) throw ConfigError("contraction: no task given");
  const Algorithm alg = parse_algorithm(o.common.alg);
  const std::vector<double> params =
      alg == Algorithm::ista ? parse_doubles(o.gammas, "--gamma") : parse_doubles(o.rhos, "--rho");
  if (params.empty()) throw ConfigError("contraction: empty sweep list");
  for (double p : params) {
    if (!(p > 0.0)) throw ConfigError("contraction: sweep values must be positive");
    if (alg == Algorithm::ista && o.common.theorem_mode && !(p < 2.0)) {
      throw ConfigError("contraction: theorem mode needs gamma in (0, 2)");
    }
  }

  Image guide;
  if (!o.in.empty()) {
    try {
      guide = read_pgm(o.in);
    } catch (const std::runtime_error& e) {
      throw ConfigError(e.what());
    }
  } else {
    if (o.size < 2) throw ConfigError("contraction: --size must be at least 2");
    guide = synthetic_texture(o.size, o.size, mix_seed(o.common.seed, 0));
  }
  KernelParams params_k;
  if (guide.size() > dense_max()) params_k.search_radius = 5;
  const KernelDenoiser nlm = KernelDenoiser::build(guide, params_k);
  const DenoiserChoice choice = parse_denoiser(o.common.denoiser);
  const KernelDenoiser w = choice == DenoiserChoice::nlm ? nlm : nlm.symmetrized();

  const std::string path = o.common.out_prefix + "contraction.csv";
  std::ofstream csv = open_output(path);
  write_sweep_csv_header(csv);
  int rows = 0;
  for (Task task : tasks) {
    ExperimentConfig cfg;
    cfg.task = task;
    cfg.sample = o.common.sample;
    cfg.blur_size = o.common.blur_size;
    cfg.sr_factor = o.common.sr_factor;
    cfg.seed = o.common.seed;
    validate(cfg, guide);
    const ForwardModel fm = [&] {
      switch (task) {
        case Task::inpaint:
          return ForwardModel::inpaint(InpaintMask::random(guide.width, guide.height, cfg.sample,
                                                           mix_seed(cfg.seed, 1)));
        case Task::deblur:
          return ForwardModel::deblur(guide.width, guide.height, BlurKernel::uniform(cfg.blur_size));
        case Task::superres:
          return ForwardModel::superres(guide.width, guide.height, BlurKernel::uniform(cfg.blur_size),
                                        cfg.sr_factor);
      }
      throw std::logic_error("unreachable task");
    }();
    const auto sweep = contraction_sweep(alg, w, fm, params);
    write_sweep_csv_rows(csv, task, sweep);
    rows += static_cast<int>(sweep.size());
    for (const SweepRow& row : sweep) {
      out << to_string(task) << ' ' << param_name(alg) << '=' << row.param << ' '
          << to_string(row.estimate.norm_kind) << '=' << std::setprecision(10) << row.estimate.value
          << '\n';
    }
  }
  out << "wrote " << rows << " rows to " << path << '\n';
  return kExitOk;
}

// verify ------------------------------------------------------------------------

struct VerifyOpts {
  Common common;
  std::string only = "all";
  int n = 0;
  int trials = 0;
  bool corrupt = false;
};

int cmd_verify(const VerifyOpts& o, std::ostream& out) {
  static const std::vector<std::string> kAll{"lemma1", "prop3", "theorem1", "theorem2", "theorem3"};
  std::set<std::string> selected;
  for (const std::string& name : split_list(o.only)) {
    if (name == "all") {
      selected.insert(kAll.begin(), kAll.end());
    } else if (std::find(kAll.begin(), kAll.end(), name) != kAll.end()) {
      selected.insert(name);
    } else {
      throw ConfigError("verify: unknown campaign '" + name + "'");
    }
  }
  if (selected.empty()) throw ConfigError("verify: --only selects nothing");
  if (o.n != 0 && (o.n < 2 || o.n > 64)) throw ConfigError("verify: --n must lie in [2, 64]");
  if (o.trials < 0) throw ConfigError("verify: --trials must be >= 0");

  CampaignOptions options;
  options.seed = o.common.seed;
  options.matrix_n = o.n;
  if (o.trials > 0) {
    options.lemma1_trials = o.trials;
    options.prop3_matrices = o.trials;
  }
  options.corrupt_planted = o.corrupt;

  std::vector<TheoremVerdict> all;
  for (const std::string& name : kAll) {
    if (!selected.count(name)) continue;
    std::vector<TheoremVerdict> part;
    if (name == "lemma1") part = lemma1_campaign(options);
    if (name == "prop3") part = prop3_campaign(options);
    if (name == "theorem1") part = theorem1_campaign(options);
    if (name == "theorem2") part = theorem2_campaign(options);
    if (name == "theorem3") part = theorem3_campaign(options);
    const auto agreed = std::count_if(part.begin(), part.end(), [](const auto& v) { return v.agree; });
    out << name << ": " << agreed << '/' << part.size() << " agree\n";
    all.insert(all.end(), part.begin(), part.end());
  }

  const std::string path = o.common.out_prefix + "verdicts.csv";
  std::ofstream csv = open_output(path);
  write_verdict_csv(csv, all);

  int disagreements = 0;
  for (const TheoremVerdict& v : all) {
    if (v.agree) continue;
    ++disagreements;
    out << "DISAGREE " << v.theorem_id << ' ' << v.instance_id << " seed=" << v.seed
        << " norm=" << std::setprecision(12) << v.norm_value << " (" << v.note << ")\n";
  }
  out << "wrote " << all.size() << " verdicts to " << path << '\n';
  return disagreements == 0 ? kExitOk : kExitDisagree;
}

}  // namespace

std::vector<std::string> config_file_args(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::vector<std::string> args;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line.substr(0, line.find('#')));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key=value");
    }
    std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    while (!key.empty() && key.front() == '-') key.erase(key.begin());
    if (key.empty() || key == "config") {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": invalid key");
    }
    args.push_back("--" + key + "=" + value);
  }
  return args;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Plug-and-play ISTA/ADMM restoration and contraction checks", "pnp"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast)->always_capture_default();

  RestoreOpts ro;
  CLI::App* restore = app.add_subcommand("restore", "restore an image and write out.pgm, trace.csv");
  add_common(*restore, ro.common, false);
  restore->add_option("--gamma", ro.gamma, "ISTA step size");
  restore->add_option("--rho", ro.rho, "ADMM penalty");
  restore->add_option("--iters", ro.iters, "iteration budget");
  restore->add_option("--stop-tol", ro.stop_tol, "stop when |x_{k+1} - x_k| falls below");
  restore->add_option("--search-radius", ro.search_radius, "NLM search window radius (-1: FULL)");
  restore->add_option("--in", ro.in, "ground-truth PGM image")->required();

  ContractionOpts co;
  CLI::App* contraction = app.add_subcommand("contraction", "operator norms of P or R over a sweep");
  add_common(*contraction, co.common, true);
  contraction->add_option("--gamma", co.gammas, "comma-separated step sizes (ista)");
  contraction->add_option("--rho", co.rhos, "comma-separated penalties (admm)");
  contraction->add_option("--size", co.size, "side of the synthetic guide image");
  contraction->add_option("--in", co.in, "guide PGM image instead of the synthetic texture");

  VerifyOpts vo;
  CLI::App* verify = app.add_subcommand("verify", "run the seeded verification campaigns");
  add_common(*verify, vo.common, false);
  verify->add_option("--only", vo.only, "lemma1,prop3,theorem1,theorem2,theorem3 or all");
  verify->add_option("--n", vo.n, "matrix size for lemma1/prop3 (0 cycles 6..12)");
  verify->add_option("--trials", vo.trials, "instances for lemma1/prop3");
  verify->add_flag("--corrupt-fixture", vo.corrupt)->group("");

  try {
    // Config-file tokens go right after the subcommand so later flags win.
    std::vector<std::string> tokens = args;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      std::string path;
      if (tokens[i] == "--config" && i + 1 < tokens.size()) {
        path = tokens[i + 1];
      } else if (tokens[i].rfind("--config=", 0) == 0) {
        path = tokens[i].substr(9);
      } else {
        continue;
      }
      const std::vector<std::string> extra = config_file_args(path);
      const auto sub = std::find_if(tokens.begin(), tokens.end(), [](const std::string& t) {
        return t == "restore" || t == "contraction" || t == "verify";
      });
      if (sub == tokens.end()) throw ConfigError("--config must follow a subcommand");
      tokens.insert(sub + 1, extra.begin(), extra.end());
      break;
    }
    std::reverse(tokens.begin(), tokens.end());
    app.parse(tokens);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }

  CLI::App* chosen = app.get_subcommands().front();
  log_config(*chosen, err);
  try {
    if (chosen == restore) return cmd_restore(ro, out);
    if (chosen == contraction) return cmd_contraction(co, out);
    return cmd_verify(vo, out);
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << " (last residual " << e.last_residual() << ")\n";
    return kExitNumerical;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
}

}  // namespace pnp::cli
