// ppffm command-line tool: fit, simulate, diagnose, and forecast
// accelerating-rate renewal models on event-time catalogues.
//
// Every command accepts --config (JSON, '#' comment lines allowed) plus
// flags that override the file values key for key. The fully resolved
// configuration, the seed, and the tool version are echoed into every
// output, so any artifact can be re-produced bit-identically from its own
// header. Success prints a one-line JSON summary to stdout. Exit codes:
// 0 success, 2 validation, 3 data/format, 4 numeric or convergence failure
// (with a diagnostics file next to the requested output).

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "ppffm/catalogue.hpp"
#include "ppffm/errors.hpp"
#include "ppffm/forecast.hpp"
#include "ppffm/gof.hpp"
#include "ppffm/inference.hpp"
#include "ppffm/rate_models.hpp"
#include "ppffm/rng.hpp"
#include "ppffm/serialize.hpp"
#include "ppffm/simulator.hpp"
#include "ppffm/version.hpp"

namespace {

using nlohmann::json;
using namespace ppffm;
namespace fs = std::filesystem;

constexpr int kExitValidation = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

constexpr double kUnset = std::numeric_limits<double>::quiet_NaN();

bool is_set(double v) { return !std::isnan(v); }

// Context for the exit-4 diagnostics file, filled in by each command once
// its configuration has resolved.
struct RunContext {
  std::string command;
  json config_echo;
  fs::path diagnostics_path = "ppffm.diagnostics.json";
};
RunContext g_ctx;

void set_context(const std::string& command, const json& echo,
                 const fs::path& diagnostics_path) {
  g_ctx.command = command;
  g_ctx.config_echo = echo;
  g_ctx.diagnostics_path = diagnostics_path;
}

void write_diagnostics(const char* category, const std::exception& err) {
  json doc;
  doc["category"] = category;
  doc["error"] = err.what();
  doc["command"] = g_ctx.command;
  doc["config"] = g_ctx.config_echo;
  doc["version"] = kVersion;
  try {
    write_file_atomic(g_ctx.diagnostics_path, doc.dump(2) + "\n");
    std::fprintf(stderr, "diagnostics written to %s\n",
                 g_ctx.diagnostics_path.string().c_str());
  } catch (const std::exception& io) {
    std::fprintf(stderr, "could not write diagnostics: %s\n", io.what());
  }
}

// %g rendering for filenames (alpha_2.5_ig.csv, not seventeen digits).
std::string short_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// Config file plumbing.

json load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config '" + path + "'");
  // Blank out comment lines instead of removing them so JSON parse errors
  // keep their original line numbers.
  std::string text, line;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first != std::string::npos && line[first] == '#') line.clear();
    text += line;
    text += '\n';
  }
  json cfg;
  try {
    cfg = json::parse(text);
  } catch (const json::parse_error& err) {
    throw FormatError("config '" + path + "' is not valid JSON: " + err.what());
  }
  if (!cfg.is_object())
    throw FormatError("config '" + path + "' must hold a JSON object");
  return cfg;
}

// Binds config-file keys to their mirror flags. Unknown keys are rejected
// with the valid set; keys whose flag was given on the command line are
// skipped, so precedence is defaults < config file < flags.
class ConfigMap {
 public:
  void bind(const std::string& key, CLI::Option* opt,
            std::function<void(const json&)> apply) {
    entries_[key] = Entry{opt, std::move(apply)};
  }

  void apply(const json& cfg) const {
    for (const auto& [key, value] : cfg.items()) {
      auto it = entries_.find(key);
      if (it == entries_.end()) {
        throw ValidationError("unknown config key '" + key +
                              "'; valid keys: " + valid_keys());
      }
      if (it->second.opt != nullptr && it->second.opt->count() > 0) {
        std::fprintf(stderr, "note: config key '%s' overridden by %s\n",
                     key.c_str(), it->second.opt->get_name().c_str());
        continue;
      }
      try {
        it->second.apply(value);
      } catch (const json::exception& err) {
        throw ValidationError("config key '" + key + "': " + err.what());
      }
    }
  }

 private:
  struct Entry {
    CLI::Option* opt = nullptr;
    std::function<void(const json&)> apply;
  };

  std::string valid_keys() const {
    std::string out;
    for (const auto& [key, entry] : entries_) {
      if (!out.empty()) out += ", ";
      out += key;
    }
    return out;
  }

  std::map<std::string, Entry> entries_;
};

std::function<void(const json&)> to(std::string* dst) {
  return [dst](const json& v) { *dst = v.get<std::string>(); };
}
std::function<void(const json&)> to(double* dst) {
  return [dst](const json& v) { *dst = v.get<double>(); };
}
std::function<void(const json&)> to(bool* dst) {
  return [dst](const json& v) { *dst = v.get<bool>(); };
}
std::function<void(const json&)> to(unsigned* dst) {
  return [dst](const json& v) { *dst = v.get<unsigned>(); };
}
// std::size_t also covers std::uint64_t here (both unsigned long on LP64).
std::function<void(const json&)> to(std::size_t* dst) {
  return [dst](const json& v) { *dst = v.get<std::size_t>(); };
}
std::function<void(const json&)> to(std::vector<double>* dst) {
  return [dst](const json& v) { *dst = v.get<std::vector<double>>(); };
}

void require_present(bool present, const std::string& flag,
                     const std::string& key) {
  if (!present) {
    throw ValidationError("missing required option " + flag +
                          " (or config key '" + key + "')");
  }
}

void require_value(double v, const std::string& flag, const std::string& key) {
  require_present(is_set(v), flag, key);
}

void require_path(const std::string& v, const std::string& flag,
                  const std::string& key) {
  require_present(!v.empty(), flag, key);
}

void ensure_distinct(const std::string& input, const std::string& out) {
  if (input.empty() || out.empty()) return;
  if (fs::weakly_canonical(input) == fs::weakly_canonical(out)) {
    throw ValidationError("refusing to write over the input file '" + input +
                          "'");
  }
}

// ---------------------------------------------------------------------------
// Output plumbing.

Metadata make_meta(const std::string& command, const json& echo,
                   std::uint64_t seed) {
  return Metadata{{"command", command},
                  {"config", echo.dump()},
                  {"seed", std::to_string(seed)},
                  {"version", kVersion}};
}

void print_summary(const json& summary) {
  std::fputs((summary.dump() + "\n").c_str(), stdout);
  std::fflush(stdout);
}

void save_catalogue_atomic(const EventCatalogue& cat, const fs::path& path,
                           const Metadata& meta) {
  const fs::path parent = path.parent_path();
  if (!parent.empty()) fs::create_directories(parent);
  // Keep the extension on the temporary so format selection (the 'time'
  // header for .csv) matches the final name.
  const fs::path tmp =
      parent / (path.stem().string() + ".tmp" + path.extension().string());
  save_catalogue(cat, tmp, meta);
  fs::rename(tmp, path);
}

json series_counts(const ForecastSeries& series) {
  std::size_t usable = 0, skipped = 0, failed = 0;
  for (const auto& w : series.windows) {
    if (w.skipped)
      ++skipped;
    else if (w.failed)
      ++failed;
    else
      ++usable;
  }
  json counts;
  counts["windows"] = series.windows.size();
  counts["usable"] = usable;
  counts["skipped"] = skipped;
  counts["failed"] = failed;
  return counts;
}

// ---------------------------------------------------------------------------
// Prior configuration. The same subkey schema serves the 'prior' config
// object, the --prior-* flags, and sweep variant objects.

struct PriorValues {
  std::vector<double> k{1.0, 5000.0};
  std::vector<double> tf{1e-4, 2.0};
  bool tf_absolute = false;
  std::string p = "lognormal(0.1,0.25)";
  std::vector<double> shape{1e-2, 1e3};
  bool pinned_set = false;
  double pinned_tf = 0.0;
};

void parse_p_prior(const std::string& text, PriorSpec* prior) {
  double a = 0.0, b = 0.0;
  char tail = 0;
  if (std::sscanf(text.c_str(), " lognormal( %lf , %lf %c", &a, &b, &tail) == 3 &&
      tail == ')') {
    prior->p_kind = PPriorKind::LogNormal;
    prior->p_mu = a;
    prior->p_sigma = b;
    return;
  }
  if (std::sscanf(text.c_str(), " uniform( %lf , %lf %c", &a, &b, &tail) == 3 &&
      tail == ')') {
    prior->p_kind = PPriorKind::Uniform;
    prior->p_box = UniformPrior{a, b};
    return;
  }
  throw ValidationError(
      "p prior must be 'lognormal(mu,sigma)' or 'uniform(lo,hi)', got '" +
      text + "'");
}

std::string render_p_prior(const PriorSpec& prior) {
  if (prior.p_kind == PPriorKind::LogNormal) {
    return "lognormal(" + format_double(prior.p_mu) + "," +
           format_double(prior.p_sigma) + ")";
  }
  return "uniform(" + format_double(prior.p_box.lo) + "," +
         format_double(prior.p_box.hi) + ")";
}

PriorSpec build_prior(const PriorValues& v) {
  if (v.k.size() != 2 || v.tf.size() != 2 || v.shape.size() != 2) {
    throw ValidationError("prior bounds need exactly two values (lo hi)");
  }
  PriorSpec prior;
  prior.k = UniformPrior{v.k[0], v.k[1]};
  prior.tf = UniformPrior{v.tf[0], v.tf[1]};
  prior.tf_is_absolute = v.tf_absolute;
  parse_p_prior(v.p, &prior);
  prior.shape = UniformPrior{v.shape[0], v.shape[1]};
  if (v.pinned_set) prior.pinned_tf = v.pinned_tf;
  prior.validate();
  return prior;
}

json prior_echo(const PriorSpec& prior) {
  json obj;
  obj["k"] = {prior.k.lo, prior.k.hi};
  obj["tf"] = {prior.tf.lo, prior.tf.hi};
  obj["tf_absolute"] = prior.tf_is_absolute;
  obj["p"] = render_p_prior(prior);
  obj["shape"] = {prior.shape.lo, prior.shape.hi};
  if (prior.pinned_tf) obj["pinned_tf"] = *prior.pinned_tf;
  return obj;
}

// Applies a prior JSON object onto values; skip(key) true leaves the field
// to the command line. Unknown subkeys are rejected.
void apply_prior_json(const json& obj, PriorValues* v,
                      const std::function<bool(const std::string&)>& skip) {
  if (!obj.is_object()) {
    throw ValidationError("prior config must be a JSON object");
  }
  static const char* const kValid =
      "k, tf, tf_absolute, p, shape, pinned_tf";
  for (const auto& [key, value] : obj.items()) {
    if (key != "k" && key != "tf" && key != "tf_absolute" && key != "p" &&
        key != "shape" && key != "pinned_tf") {
      throw ValidationError("unknown config key 'prior." + key +
                            "'; valid keys: " + std::string(kValid));
    }
    if (skip(key)) {
      std::fprintf(stderr,
                   "note: config key 'prior.%s' overridden by a flag\n",
                   key.c_str());
      continue;
    }
    try {
      if (key == "k") {
        v->k = value.get<std::vector<double>>();
      } else if (key == "tf") {
        v->tf = value.get<std::vector<double>>();
      } else if (key == "tf_absolute") {
        v->tf_absolute = value.get<bool>();
      } else if (key == "p") {
        v->p = value.get<std::string>();
      } else if (key == "shape") {
        v->shape = value.get<std::vector<double>>();
      } else if (key == "pinned_tf") {
        if (value.is_null()) {
          v->pinned_set = false;
        } else {
          v->pinned_set = true;
          v->pinned_tf = value.get<double>();
        }
      }
    } catch (const json::exception& err) {
      throw ValidationError("config key 'prior." + key + "': " + err.what());
    }
  }
}

// ---------------------------------------------------------------------------
// Shared flag groups.

struct CommonFlags {
  std::string config_path;
  std::uint64_t seed = 1;
  unsigned threads = 0;
  bool threads_from_config = false;

  CLI::Option* seed_opt = nullptr;
  CLI::Option* threads_opt = nullptr;

  void add_flags(CLI::App* cmd) {
    cmd->add_option("--config", config_path,
                    "JSON config file; flags override its values");
    seed_opt = cmd->add_option(
        "--seed", seed, "Top-level RNG seed; all random streams derive from it");
    threads_opt = cmd->add_option(
        "--threads", threads,
        "Worker threads, 0 = hardware; PPFFM_THREADS is the fallback");
  }

  void bind(ConfigMap* map) {
    map->bind("seed", seed_opt, to(&seed));
    map->bind("threads", threads_opt, [this](const json& v) {
      threads = v.get<unsigned>();
      threads_from_config = true;
    });
  }

  json load_config() const {
    if (config_path.empty()) return json::object();
    return load_config_file(config_path);
  }

  unsigned resolve_threads() const {
    if (threads_opt->count() > 0 || threads_from_config) return threads;
    const char* env = std::getenv("PPFFM_THREADS");
    if (env == nullptr || *env == '\0') return 0;
    char* end = nullptr;
    const unsigned long parsed = std::strtoul(env, &end, 10);
    if (end == env || *end != '\0') {
      throw ValidationError(
          "PPFFM_THREADS must be a nonnegative integer, got '" +
          std::string(env) + "'");
    }
    return static_cast<unsigned>(parsed);
  }
};

struct ModelFlags {
  std::string family = "ip";
  double shape = 1.0;
  bool family_from_config = false;
  bool shape_from_config = false;

  CLI::Option* family_opt = nullptr;
  CLI::Option* shape_opt = nullptr;

  void add_flags(CLI::App* cmd) {
    family_opt =
        cmd->add_option("--model", family, "ISI family: ip, ig, iw, or iig");
    shape_opt = cmd->add_option(
        "--shape", shape, "Shape parameter (alpha/phi/psi); ignored for ip");
  }

  void bind(ConfigMap* map) {
    map->bind("model", family_opt, [this](const json& v) {
      family = v.get<std::string>();
      family_from_config = true;
    });
    map->bind("shape", shape_opt, [this](const json& v) {
      shape = v.get<double>();
      shape_from_config = true;
    });
  }

  bool any_given() const {
    return family_from_config || shape_from_config ||
           (family_opt && family_opt->count() > 0) ||
           (shape_opt && shape_opt->count() > 0);
  }

  ModelConfig build() const {
    ModelConfig model;
    model.family = family_from_name(family);
    model.shape = shape;
    model.validate();
    return model;
  }
};

struct SamplerFlags {
  std::size_t iters = 20000;
  std::size_t burn = 1000;
  std::size_t chains = 4;
  double target_acceptance = 0.3;

  CLI::Option* iters_opt = nullptr;
  CLI::Option* burn_opt = nullptr;
  CLI::Option* chains_opt = nullptr;
  CLI::Option* accept_opt = nullptr;

  void add_flags(CLI::App* cmd) {
    iters_opt = cmd->add_option("--iters", iters, "MCMC iterations per chain");
    burn_opt = cmd->add_option("--burn", burn,
                               "Burn-in iterations discarded per chain");
    chains_opt = cmd->add_option("--chains", chains, "Number of chains");
    accept_opt = cmd->add_option("--target-acceptance", target_acceptance,
                                 "Adaptive proposal acceptance target");
  }

  void bind(ConfigMap* map) {
    map->bind("iters", iters_opt, to(&iters));
    map->bind("burn", burn_opt, to(&burn));
    map->bind("chains", chains_opt, to(&chains));
    map->bind("target_acceptance", accept_opt, to(&target_acceptance));
  }

  SamplerConfig build(std::uint64_t seed) const {
    SamplerConfig cfg;
    cfg.iterations = iters;
    cfg.burn_in = burn;
    cfg.chains = chains;
    cfg.seed = seed;
    cfg.target_acceptance = target_acceptance;
    cfg.validate();
    return cfg;
  }

  void echo_into(json* echo, const SamplerConfig& cfg) const {
    (*echo)["iters"] = cfg.iterations;
    (*echo)["burn"] = cfg.burn_in;
    (*echo)["chains"] = cfg.chains;
    (*echo)["target_acceptance"] = cfg.target_acceptance;
  }
};

struct PriorFlags {
  PriorValues values;

  CLI::Option* k_opt = nullptr;
  CLI::Option* tf_opt = nullptr;
  CLI::Option* abs_opt = nullptr;
  CLI::Option* p_opt = nullptr;
  CLI::Option* shape_opt = nullptr;
  CLI::Option* pinned_opt = nullptr;

  void add_flags(CLI::App* cmd) {
    k_opt = cmd->add_option("--prior-k", values.k,
                            "Uniform prior bounds for k (lo hi)")
                ->expected(2)
                ->delimiter(',');
    tf_opt = cmd->add_option(
                    "--prior-tf", values.tf,
                    "Uniform prior bounds for t_f, as an offset past the "
                    "last event unless --prior-tf-absolute (lo hi)")
                 ->expected(2)
                 ->delimiter(',');
    abs_opt = cmd->add_flag("--prior-tf-absolute", values.tf_absolute,
                            "Treat the t_f prior bounds as absolute times");
    p_opt = cmd->add_option(
        "--prior-p", values.p,
        "Prior on p: lognormal(mu,sigma) or uniform(lo,hi)");
    shape_opt = cmd->add_option("--prior-shape", values.shape,
                                "Uniform prior bounds for the shape (lo hi)")
                    ->expected(2)
                    ->delimiter(',');
    pinned_opt = cmd->add_option("--pinned-tf", values.pinned_tf,
                                 "Pin t_f to this value instead of sampling");
  }

  void bind(ConfigMap* map) {
    map->bind("prior", nullptr, [this](const json& obj) {
      apply_prior_json(obj, &values, [this](const std::string& key) {
        if (key == "k") return k_opt->count() > 0;
        if (key == "tf") return tf_opt->count() > 0;
        if (key == "tf_absolute") return abs_opt->count() > 0;
        if (key == "p") return p_opt->count() > 0;
        if (key == "shape") return shape_opt->count() > 0;
        if (key == "pinned_tf") return pinned_opt->count() > 0;
        return false;
      });
    });
  }

  PriorValues resolved_values() const {
    PriorValues v = values;
    if (pinned_opt != nullptr && pinned_opt->count() > 0) v.pinned_set = true;
    return v;
  }

  PriorSpec build() const { return build_prior(resolved_values()); }
};

// ---------------------------------------------------------------------------
// fit

struct FitCommand {
  CommonFlags common;
  ModelFlags model;
  SamplerFlags sampler;
  PriorFlags prior;
  std::string input, out, draws_out;
  bool censor_tail = false;
  ConfigMap config;

  void add_to(CLI::App* app) {
    CLI::App* cmd = app->add_subcommand(
        "fit", "Sample the posterior of a rate model on an event catalogue");
    common.add_flags(cmd);
    model.add_flags(cmd);
    sampler.add_flags(cmd);
    prior.add_flags(cmd);
    CLI::Option* input_opt =
        cmd->add_option("--input", input, "Event catalogue file");
    CLI::Option* out_opt =
        cmd->add_option("--out", out, "Posterior summary JSON path");
    CLI::Option* draws_opt = cmd->add_option(
        "--draws-out", draws_out, "Optional CSV of post-burn-in draws");
    CLI::Option* censor_opt = cmd->add_flag(
        "--censor-tail", censor_tail,
        "Add the open tail interval's log survival to the likelihood");

    common.bind(&config);
    model.bind(&config);
    sampler.bind(&config);
    prior.bind(&config);
    config.bind("input", input_opt, to(&input));
    config.bind("out", out_opt, to(&out));
    config.bind("draws_out", draws_opt, to(&draws_out));
    config.bind("censor_tail", censor_opt, to(&censor_tail));

    cmd->callback([this] { run(); });
  }

  void run() {
    config.apply(common.load_config());
    require_path(input, "--input", "input");
    require_path(out, "--out", "out");
    ensure_distinct(input, out);
    ensure_distinct(input, draws_out);

    const ModelConfig mc = model.build();
    const PriorSpec prior_spec = prior.build();
    const SamplerConfig cfg = sampler.build(common.seed);
    const unsigned threads = common.resolve_threads();

    json echo;
    echo["model"] = family_name(mc.family);
    echo["shape"] = mc.shape;
    echo["input"] = input;
    echo["out"] = out;
    if (!draws_out.empty()) echo["draws_out"] = draws_out;
    echo["censor_tail"] = censor_tail;
    echo["seed"] = cfg.seed;
    sampler.echo_into(&echo, cfg);
    echo["prior"] = prior_echo(prior_spec);
    set_context("fit", echo, out + ".diagnostics.json");

    const EventCatalogue cat = load_catalogue(input);
    const PosteriorRun run = run_mcmc(mc, prior_spec, cat, cfg, threads,
                                      censor_tail);

    const Metadata meta = make_meta("fit", echo, cfg.seed);
    write_file_atomic(out, posterior_to_json(run, meta));
    if (!draws_out.empty()) {
      write_file_atomic(draws_out, draws_to_csv(run, meta));
    }

    json summary;
    summary["command"] = "fit";
    summary["out"] = out;
    summary["n_events"] = cat.size();
    summary["n_draws"] = run.total_draws();
    summary["rhat_max"] = run.rhat_max();
    summary["tf_mean"] = run.summary("t_f").mean;
    summary["tf_hpdi"] = {run.summary("t_f").hpdi_lo,
                          run.summary("t_f").hpdi_hi};
    print_summary(summary);
  }
};

// ---------------------------------------------------------------------------
// simulate

struct SimulateCommand {
  CommonFlags common;
  ModelFlags model;
  double k = kUnset, tf = kUnset, p = kUnset;
  double start = 0.0, end = kUnset;
  std::size_t max_events = 2000000;
  std::string out;
  ConfigMap config;

  void add_to(CLI::App* app) {
    CLI::App* cmd = app->add_subcommand(
        "simulate", "Draw an event catalogue from a rate model");
    common.add_flags(cmd);
    model.add_flags(cmd);
    CLI::Option* k_opt = cmd->add_option("--k", k, "Rate amplitude k");
    CLI::Option* tf_opt = cmd->add_option("--tf", tf, "Failure time t_f, days");
    CLI::Option* p_opt = cmd->add_option("--p", p, "Acceleration exponent p");
    CLI::Option* start_opt =
        cmd->add_option("--start", start, "Window start, days");
    CLI::Option* end_opt =
        cmd->add_option("--end", end, "Window end (horizon), days");
    CLI::Option* max_opt = cmd->add_option("--max-events", max_events,
                                           "Runaway guard on event count");
    CLI::Option* out_opt = cmd->add_option("--out", out, "Event file path");

    common.bind(&config);
    model.bind(&config);
    config.bind("k", k_opt, to(&k));
    config.bind("tf", tf_opt, to(&tf));
    config.bind("p", p_opt, to(&p));
    config.bind("start", start_opt, to(&start));
    config.bind("end", end_opt, to(&end));
    config.bind("max_events", max_opt, to(&max_events));
    config.bind("out", out_opt, to(&out));

    cmd->callback([this] { run(); });
  }

  void run() {
    config.apply(common.load_config());
    require_value(k, "--k", "k");
    require_value(tf, "--tf", "tf");
    require_value(p, "--p", "p");
    require_value(end, "--end", "end");
    require_path(out, "--out", "out");

    const ModelConfig mc = model.build();
    SimulationSpec spec;
    spec.model = mc;
    spec.rate = PowerLawRate{k, tf, p};
    spec.start = start;
    spec.end = end;
    spec.seed = common.seed;
    spec.max_events = max_events;
    spec.validate();

    json echo;
    echo["model"] = family_name(mc.family);
    echo["shape"] = mc.shape;
    echo["k"] = k;
    echo["tf"] = tf;
    echo["p"] = p;
    echo["start"] = start;
    echo["end"] = end;
    echo["max_events"] = max_events;
    echo["seed"] = common.seed;
    echo["out"] = out;
    set_context("simulate", echo, out + ".diagnostics.json");

    const SimulationResult result = simulate(spec);
    save_catalogue_atomic(result.catalogue, out,
                          make_meta("simulate", echo, common.seed));

    json summary;
    summary["command"] = "simulate";
    summary["out"] = out;
    summary["n_events"] = result.catalogue.size();
    summary["truncated"] = result.truncated;
    summary["window"] = {start, end};
    print_summary(summary);
  }
};

// ---------------------------------------------------------------------------
// gof

struct GofCommand {
  CommonFlags common;
  ModelFlags model;
  std::string input, out_dir, posterior_path, draws_path;
  double k = kUnset, tf = kUnset, p = kUnset;
  bool sqrt_qq = false;
  std::size_t max_lag = 100;
  std::size_t bins = 30;
  std::size_t envelope = 0;
  double thin_fraction = 0.0;
  ConfigMap config;

  void add_to(CLI::App* app) {
    CLI::App* cmd = app->add_subcommand(
        "gof",
        "Time-rescaling diagnostics of a fitted model on a catalogue");
    common.add_flags(cmd);
    model.add_flags(cmd);
    CLI::Option* input_opt =
        cmd->add_option("--input", input, "Event catalogue file");
    CLI::Option* dir_opt =
        cmd->add_option("--out-dir", out_dir, "Directory for the CSV tables");
    CLI::Option* post_opt = cmd->add_option(
        "--posterior", posterior_path,
        "Posterior JSON; its family and mean parameters are used");
    CLI::Option* draws_opt = cmd->add_option(
        "--draws", draws_path, "Posterior draws CSV, required for --envelope");
    CLI::Option* k_opt = cmd->add_option("--k", k, "Rate amplitude k");
    CLI::Option* tf_opt = cmd->add_option("--tf", tf, "Failure time t_f, days");
    CLI::Option* p_opt = cmd->add_option("--p", p, "Acceleration exponent p");
    CLI::Option* sqrt_opt = cmd->add_flag(
        "--sqrt", sqrt_qq, "Square-root transform both Q-Q axes");
    CLI::Option* lag_opt = cmd->add_option(
        "--max-lag", max_lag, "Highest autocorrelation lag (clamped to M-1)");
    CLI::Option* bins_opt =
        cmd->add_option("--bins", bins, "Histogram bin count for z");
    CLI::Option* env_opt = cmd->add_option(
        "--envelope", envelope,
        "Simulate this many posterior-sampled replicates (needs --draws)");
    CLI::Option* frac_opt = cmd->add_option(
        "--thin-fraction", thin_fraction,
        "Thin each envelope replicate by this fraction");

    common.bind(&config);
    model.bind(&config);
    config.bind("input", input_opt, to(&input));
    config.bind("out_dir", dir_opt, to(&out_dir));
    config.bind("posterior", post_opt, to(&posterior_path));
    config.bind("draws", draws_opt, to(&draws_path));
    config.bind("k", k_opt, to(&k));
    config.bind("tf", tf_opt, to(&tf));
    config.bind("p", p_opt, to(&p));
    config.bind("sqrt", sqrt_opt, to(&sqrt_qq));
    config.bind("max_lag", lag_opt, to(&max_lag));
    config.bind("bins", bins_opt, to(&bins));
    config.bind("envelope", env_opt, to(&envelope));
    config.bind("thin_fraction", frac_opt, to(&thin_fraction));

    cmd->callback([this] { run(); });
  }

  void run() {
    config.apply(common.load_config());
    require_path(input, "--input", "input");
    require_path(out_dir, "--out-dir", "out_dir");

    ModelConfig mc;
    PowerLawRate rate;
    if (!posterior_path.empty()) {
      if (model.any_given() || is_set(k) || is_set(tf) || is_set(p)) {
        throw ValidationError(
            "--posterior conflicts with --model/--shape/--k/--tf/--p; give "
            "one parameter source");
      }
      auto [file_model, params] = posterior_point_from_json(posterior_path);
      mc = file_model;
      rate = PowerLawRate{params.k, params.t_f, params.p};
    } else {
      require_value(k, "--k", "k");
      require_value(tf, "--tf", "tf");
      require_value(p, "--p", "p");
      mc = model.build();
      rate = PowerLawRate{k, tf, p};
    }

    json echo;
    echo["model"] = family_name(mc.family);
    echo["shape"] = mc.shape;
    echo["input"] = input;
    echo["out_dir"] = out_dir;
    if (!posterior_path.empty()) echo["posterior"] = posterior_path;
    echo["k"] = rate.k;
    echo["tf"] = rate.t_f;
    echo["p"] = rate.p;
    echo["sqrt"] = sqrt_qq;
    echo["max_lag"] = max_lag;
    echo["bins"] = bins;
    if (envelope > 0) {
      echo["draws"] = draws_path;
      echo["envelope"] = envelope;
      echo["thin_fraction"] = thin_fraction;
      echo["seed"] = common.seed;
    }
    set_context("gof", echo, fs::path(out_dir) / "diagnostics.json");

    const EventCatalogue cat = load_catalogue(input);
    const RescaledSeries series = rescale(mc, rate, cat);
    const QQData qq_data = qq(series, sqrt_qq);
    const KSData ks_data = ks(series);
    const std::vector<std::pair<double, double>> pairs =
        neighbour_pairs(series);
    std::size_t lag = max_lag;
    if (lag + 1 > series.size()) {
      lag = series.size() - 1;
      std::fprintf(stderr, "note: max_lag clamped to %zu (M-1)\n", lag);
    }
    const AcfData acf_data = autocorrelation(series, lag);
    const ZHistData zhist = z_histogram(series, mc, bins);

    const Metadata meta = make_meta("gof", echo, common.seed);
    const fs::path dir(out_dir);
    write_file_atomic(dir / "qq.csv", qq_to_csv(qq_data, meta));
    write_file_atomic(dir / "ks.csv", ks_to_csv(ks_data, meta));
    write_file_atomic(dir / "acf.csv", acf_to_csv(acf_data, meta));
    write_file_atomic(dir / "pairs.csv", pairs_to_csv(pairs, meta));
    write_file_atomic(dir / "zhist.csv", zhist_to_csv(zhist, meta));

    std::size_t envelope_failed = 0;
    if (envelope > 0) {
      require_path(draws_path, "--draws", "draws");
      const PosteriorRun posterior = draws_from_csv(draws_path, mc);
      std::optional<ThinningSpec> degrade;
      if (thin_fraction > 0.0) degrade = ThinningSpec{thin_fraction, 0};
      const std::vector<EnvelopeReplicate> reps = simulation_envelope(
          mc, posterior, cat, envelope, degrade, common.seed);
      for (const auto& rep : reps) envelope_failed += rep.failed ? 1 : 0;
      write_file_atomic(dir / "envelope_qq.csv", envelope_qq_to_csv(reps, meta));
      write_file_atomic(dir / "envelope_ks.csv", envelope_ks_to_csv(reps, meta));
    }

    json summary;
    summary["command"] = "gof";
    summary["out_dir"] = out_dir;
    summary["m"] = series.size();
    summary["ks_d"] = ks_data.d_stat;
    summary["ks_pass95"] = ks_data.pass95;
    summary["ks_pass99"] = ks_data.pass99;
    summary["underflow_intervals"] = series.underflow_intervals.size();
    if (envelope > 0) {
      summary["envelope_replicates"] = envelope;
      summary["envelope_failed"] = envelope_failed;
    }
    print_summary(summary);
  }
};

// ---------------------------------------------------------------------------
// forecast

struct ForecastCommand {
  CommonFlags common;
  ModelFlags model;
  SamplerFlags sampler;
  PriorFlags prior;
  std::string input, out_dir;
  std::size_t windows = 50;
  std::size_t min_events = 20;
  double thin_fraction = 0.0;
  ConfigMap config;

  void add_to(CLI::App* app) {
    CLI::App* cmd = app->add_subcommand(
        "forecast",
        "Pseudo-prospective windowed refits over a growing catalogue");
    common.add_flags(cmd);
    model.add_flags(cmd);
    sampler.add_flags(cmd);
    prior.add_flags(cmd);
    CLI::Option* input_opt =
        cmd->add_option("--input", input, "Event catalogue file");
    CLI::Option* dir_opt =
        cmd->add_option("--out-dir", out_dir, "Directory for the CSV tables");
    CLI::Option* win_opt = cmd->add_option(
        "--windows", windows, "Number of equal-duration fitting windows");
    CLI::Option* min_opt = cmd->add_option(
        "--min-events", min_events, "Smallest window worth fitting");
    CLI::Option* frac_opt = cmd->add_option(
        "--thin-fraction", thin_fraction,
        "Also forecast on a thinned copy and emit the paired differences");

    common.bind(&config);
    model.bind(&config);
    sampler.bind(&config);
    prior.bind(&config);
    config.bind("input", input_opt, to(&input));
    config.bind("out_dir", dir_opt, to(&out_dir));
    config.bind("windows", win_opt, to(&windows));
    config.bind("min_events", min_opt, to(&min_events));
    config.bind("thin_fraction", frac_opt, to(&thin_fraction));

    cmd->callback([this] { run(); });
  }

  void run() {
    config.apply(common.load_config());
    require_path(input, "--input", "input");
    require_path(out_dir, "--out-dir", "out_dir");

    const ModelConfig mc = model.build();
    const PriorSpec prior_spec = prior.build();
    const SamplerConfig cfg = sampler.build(common.seed);
    const unsigned threads = common.resolve_threads();

    json echo;
    echo["model"] = family_name(mc.family);
    echo["shape"] = mc.shape;
    echo["input"] = input;
    echo["out_dir"] = out_dir;
    echo["windows"] = windows;
    echo["min_events"] = min_events;
    echo["thin_fraction"] = thin_fraction;
    echo["seed"] = cfg.seed;
    sampler.echo_into(&echo, cfg);
    echo["prior"] = prior_echo(prior_spec);
    set_context("forecast", echo, fs::path(out_dir) / "diagnostics.json");

    const EventCatalogue cat = load_catalogue(input);
    const Metadata meta = make_meta("forecast", echo, cfg.seed);
    const fs::path dir(out_dir);

    json summary;
    summary["command"] = "forecast";
    summary["out_dir"] = out_dir;
    if (thin_fraction > 0.0) {
      const PairedForecast paired = incompleteness_experiment(
          mc, prior_spec, cat, cfg, ThinningSpec{thin_fraction, cfg.seed},
          windows, min_events, threads);
      write_file_atomic(dir / "forecast.csv",
                        forecast_to_csv(paired.original, meta));
      write_file_atomic(dir / "forecast_thinned.csv",
                        forecast_to_csv(paired.thinned, meta));
      write_file_atomic(dir / "paired.csv", paired_to_csv(paired, meta));
      write_file_atomic(dir / "periodicity.csv",
                        periodicity_to_csv(periodicity_track(paired.original),
                                           meta));
      summary["original"] = series_counts(paired.original);
      summary["thinned"] = series_counts(paired.thinned);
    } else {
      const ForecastSeries series = pseudo_prospective(
          mc, prior_spec, cat, cfg, windows, min_events, threads);
      write_file_atomic(dir / "forecast.csv", forecast_to_csv(series, meta));
      write_file_atomic(dir / "periodicity.csv",
                        periodicity_to_csv(periodicity_track(series), meta));
      const json counts = series_counts(series);
      for (const auto& [key, value] : counts.items()) summary[key] = value;
    }
    print_summary(summary);
  }
};

// ---------------------------------------------------------------------------
// thin

struct ThinCommand {
  CommonFlags common;
  std::string input, out;
  double fraction = kUnset;
  bool exact = false;
  ConfigMap config;

  void add_to(CLI::App* app) {
    CLI::App* cmd = app->add_subcommand(
        "thin", "Remove a fraction of events to mimic an incomplete catalogue");
    common.add_flags(cmd);
    CLI::Option* input_opt =
        cmd->add_option("--input", input, "Event catalogue file");
    CLI::Option* out_opt =
        cmd->add_option("--out", out, "Thinned event file path");
    CLI::Option* frac_opt = cmd->add_option(
        "--fraction", fraction, "Removal probability per event, in [0, 1]");
    CLI::Option* exact_opt = cmd->add_flag(
        "--exact", exact, "Remove exactly round(fraction*n) events instead");

    common.bind(&config);
    config.bind("input", input_opt, to(&input));
    config.bind("out", out_opt, to(&out));
    config.bind("fraction", frac_opt, to(&fraction));
    config.bind("exact", exact_opt, to(&exact));

    cmd->callback([this] { run(); });
  }

  void run() {
    config.apply(common.load_config());
    require_path(input, "--input", "input");
    require_path(out, "--out", "out");
    require_value(fraction, "--fraction", "fraction");
    ensure_distinct(input, out);

    json echo;
    echo["input"] = input;
    echo["out"] = out;
    echo["fraction"] = fraction;
    echo["exact"] = exact;
    echo["seed"] = common.seed;
    set_context("thin", echo, out + ".diagnostics.json");

    const EventCatalogue cat = load_catalogue(input);
    const EventCatalogue thinned =
        thin(cat, ThinningSpec{fraction, common.seed}, exact);
    save_catalogue_atomic(thinned, out, make_meta("thin", echo, common.seed));

    json summary;
    summary["command"] = "thin";
    summary["out"] = out;
    summary["n_before"] = cat.size();
    summary["n_after"] = thinned.size();
    print_summary(summary);
  }
};

// ---------------------------------------------------------------------------
// sweep

struct SweepCommand {
  CommonFlags common;
  ModelFlags model;
  SamplerFlags sampler;
  PriorFlags prior;
  std::string kind, input, out_dir;
  std::size_t windows = 50;
  std::size_t min_events = 20;
  std::size_t sim_reps = 100;
  std::vector<double> alphas, cutoffs_minutes;
  double k = kUnset, tf = kUnset, p = kUnset;
  double start = 0.0, end = kUnset;
  double fix_tf = kUnset;
  bool fit_ip = false;
  std::vector<std::string> variant_flags;
  json variants_cfg;
  CLI::Option* variant_opt = nullptr;
  ConfigMap config;

  void add_to(CLI::App* app) {
    CLI::App* cmd = app->add_subcommand(
        "sweep", "Sensitivity experiments: alpha, prior, or cutoff arms");
    common.add_flags(cmd);
    model.add_flags(cmd);
    sampler.add_flags(cmd);
    prior.add_flags(cmd);
    CLI::Option* kind_opt =
        cmd->add_option("--kind", kind, "Sweep kind: alpha, prior, or cutoff");
    CLI::Option* input_opt = cmd->add_option(
        "--input", input, "Event catalogue file (prior and cutoff sweeps)");
    CLI::Option* dir_opt =
        cmd->add_option("--out-dir", out_dir, "Directory for arm outputs");
    CLI::Option* win_opt =
        cmd->add_option("--windows", windows, "Fitting windows per arm");
    CLI::Option* min_opt = cmd->add_option(
        "--min-events", min_events, "Smallest window worth fitting");
    CLI::Option* alphas_opt =
        cmd->add_option("--alphas", alphas, "Alpha values to sweep")
            ->delimiter(',');
    CLI::Option* k_opt = cmd->add_option("--k", k, "True rate amplitude k");
    CLI::Option* tf_opt =
        cmd->add_option("--tf", tf, "True failure time t_f, days");
    CLI::Option* p_opt =
        cmd->add_option("--p", p, "True acceleration exponent p");
    CLI::Option* start_opt =
        cmd->add_option("--start", start, "Simulation window start, days");
    CLI::Option* end_opt =
        cmd->add_option("--end", end, "Simulation window end, days");
    CLI::Option* ip_opt = cmd->add_flag(
        "--fit-ip", fit_ip, "Also fit the ip family on each alpha arm");
    CLI::Option* cut_opt = cmd->add_option("--cutoffs-minutes", cutoffs_minutes,
                                           "Cutoffs before the eruption")
                               ->delimiter(',');
    CLI::Option* fix_opt = cmd->add_option(
        "--fix-tf", fix_tf, "Pin t_f to this value in the cutoff fits");
    CLI::Option* reps_opt = cmd->add_option(
        "--sim-reps", sim_reps, "Simulated catalogues per cutoff arm");
    variant_opt = cmd->add_option(
        "--prior-variant", variant_flags,
        "Prior variant as a JSON object (repeatable); the base prior "
        "flags define the reference variant");

    common.bind(&config);
    model.bind(&config);
    sampler.bind(&config);
    prior.bind(&config);
    config.bind("kind", kind_opt, to(&kind));
    config.bind("input", input_opt, to(&input));
    config.bind("out_dir", dir_opt, to(&out_dir));
    config.bind("windows", win_opt, to(&windows));
    config.bind("min_events", min_opt, to(&min_events));
    config.bind("alphas", alphas_opt, to(&alphas));
    config.bind("k", k_opt, to(&k));
    config.bind("tf", tf_opt, to(&tf));
    config.bind("p", p_opt, to(&p));
    config.bind("start", start_opt, to(&start));
    config.bind("end", end_opt, to(&end));
    config.bind("fit_ip", ip_opt, to(&fit_ip));
    config.bind("cutoffs_minutes", cut_opt, to(&cutoffs_minutes));
    config.bind("fix_tf", fix_opt, to(&fix_tf));
    config.bind("sim_reps", reps_opt, to(&sim_reps));
    config.bind("prior_variants", variant_opt,
                [this](const json& v) { variants_cfg = v; });

    cmd->callback([this] { run(); });
  }

  void run() {
    config.apply(common.load_config());
    require_path(out_dir, "--out-dir", "out_dir");
    if (kind == "alpha") {
      run_alpha();
    } else if (kind == "prior") {
      run_prior();
    } else if (kind == "cutoff") {
      run_cutoff();
    } else {
      throw ValidationError("--kind must be alpha, prior, or cutoff, got '" +
                            kind + "'");
    }
  }

  void run_alpha() {
    require_present(!alphas.empty(), "--alphas", "alphas");
    require_value(k, "--k", "k");
    require_value(tf, "--tf", "tf");
    require_value(p, "--p", "p");
    require_value(end, "--end", "end");

    const PriorSpec prior_spec = prior.build();
    const SamplerConfig cfg = sampler.build(common.seed);
    const unsigned threads = common.resolve_threads();

    json echo;
    echo["kind"] = "alpha";
    echo["out_dir"] = out_dir;
    echo["alphas"] = alphas;
    echo["k"] = k;
    echo["tf"] = tf;
    echo["p"] = p;
    echo["start"] = start;
    echo["end"] = end;
    echo["fit_ip"] = fit_ip;
    echo["windows"] = windows;
    echo["min_events"] = min_events;
    echo["seed"] = cfg.seed;
    sampler.echo_into(&echo, cfg);
    echo["prior"] = prior_echo(prior_spec);
    set_context("sweep", echo, fs::path(out_dir) / "diagnostics.json");

    const std::vector<AlphaSweepArm> arms =
        alpha_sensitivity(PowerLawRate{k, tf, p}, alphas, prior_spec, cfg,
                          start, end, windows, fit_ip, min_events, threads);

    const Metadata meta = make_meta("sweep", echo, cfg.seed);
    const fs::path dir(out_dir);
    json manifest;
    manifest["kind"] = "alpha";
    manifest["version"] = kVersion;
    manifest["seed"] = std::to_string(cfg.seed);
    manifest["config"] = echo;
    manifest["arms"] = json::array();

    std::string widths = "alpha,data_end_days,tf_hpdi_width\n";
    for (const AlphaSweepArm& arm : arms) {
      const std::string stem = "alpha_" + short_double(arm.alpha);
      json entry;
      entry["alpha"] = arm.alpha;
      entry["sim_seed"] = std::to_string(arm.sim_seed);
      entry["n_events"] = arm.n_events;
      entry["ig_csv"] = stem + "_ig.csv";
      write_file_atomic(dir / (stem + "_ig.csv"),
                        forecast_to_csv(arm.ig_fit, meta));
      if (arm.ip_fit) {
        entry["ip_csv"] = stem + "_ip.csv";
        write_file_atomic(dir / (stem + "_ip.csv"),
                          forecast_to_csv(*arm.ip_fit, meta));
      }
      manifest["arms"].push_back(entry);

      const std::vector<double> w = tf_hpdi_widths(arm.ig_fit);
      for (std::size_t i = 0; i < w.size(); ++i) {
        widths += format_double(arm.alpha);
        widths += ",";
        widths += format_double(arm.ig_fit.windows[i].data_end);
        widths += ",";
        widths += format_double(w[i]);
        widths += "\n";
      }
    }
    manifest["widths_csv"] = "alpha_widths.csv";
    std::string widths_csv;
    for (const auto& [key, value] : meta) {
      widths_csv += "# " + key + "=" + value + "\n";
    }
    widths_csv += widths;
    write_file_atomic(dir / "alpha_widths.csv", widths_csv);
    write_file_atomic(dir / "manifest.json", manifest.dump(2) + "\n");

    json summary;
    summary["command"] = "sweep";
    summary["kind"] = "alpha";
    summary["out_dir"] = out_dir;
    summary["arms"] = arms.size();
    summary["manifest"] = (dir / "manifest.json").string();
    print_summary(summary);
  }

  void run_prior() {
    require_path(input, "--input", "input");

    // The command's own prior flags define the reference variant; each
    // --prior-variant (or config prior_variants entry) adds one on top.
    const PriorValues base = prior.resolved_values();
    std::vector<json> variant_objs;
    if (variant_opt->count() > 0) {
      for (const std::string& text : variant_flags) {
        json obj;
        try {
          obj = json::parse(text);
        } catch (const json::parse_error& err) {
          throw ValidationError("--prior-variant is not valid JSON: " +
                                std::string(err.what()));
        }
        variant_objs.push_back(obj);
      }
    } else if (variants_cfg.is_array()) {
      for (const json& obj : variants_cfg) variant_objs.push_back(obj);
    }
    if (variant_objs.empty()) {
      throw ValidationError(
          "prior sweep needs at least one --prior-variant (or config key "
          "'prior_variants')");
    }
    std::vector<PriorSpec> variants;
    variants.push_back(build_prior(base));
    for (const json& obj : variant_objs) {
      PriorValues v = base;
      apply_prior_json(obj, &v, [](const std::string&) { return false; });
      variants.push_back(build_prior(v));
    }

    const ModelConfig mc = model.build();
    const SamplerConfig cfg = sampler.build(common.seed);
    const unsigned threads = common.resolve_threads();

    json echo;
    echo["kind"] = "prior";
    echo["model"] = family_name(mc.family);
    echo["shape"] = mc.shape;
    echo["input"] = input;
    echo["out_dir"] = out_dir;
    echo["windows"] = windows;
    echo["min_events"] = min_events;
    echo["seed"] = cfg.seed;
    sampler.echo_into(&echo, cfg);
    echo["prior_variants"] = json::array();
    for (const PriorSpec& v : variants) {
      echo["prior_variants"].push_back(prior_echo(v));
    }
    set_context("sweep", echo, fs::path(out_dir) / "diagnostics.json");

    const EventCatalogue cat = load_catalogue(input);
    const PriorSensitivity result = prior_sensitivity(
        mc, cat, cfg, variants, windows, min_events, threads);

    const Metadata meta = make_meta("sweep", echo, cfg.seed);
    const fs::path dir(out_dir);
    json manifest;
    manifest["kind"] = "prior";
    manifest["version"] = kVersion;
    manifest["seed"] = std::to_string(cfg.seed);
    manifest["config"] = echo;
    manifest["arms"] = json::array();
    for (std::size_t v = 0; v < result.series.size(); ++v) {
      const std::string name = "variant_" + std::to_string(v) + ".csv";
      write_file_atomic(dir / name, forecast_to_csv(result.series[v], meta));
      json entry;
      entry["variant"] = v;
      entry["prior"] = prior_echo(result.variants[v]);
      entry["csv"] = name;
      manifest["arms"].push_back(entry);
    }

    std::string diffs = "variant,data_end_days,tf_mean_diff\n";
    for (std::size_t v = 1; v < result.series.size(); ++v) {
      for (std::size_t w = 0; w < result.series[v].windows.size(); ++w) {
        diffs += std::to_string(v);
        diffs += ",";
        diffs += format_double(result.series[v].windows[w].data_end);
        diffs += ",";
        diffs += format_double(result.tf_mean_diff[v][w]);
        diffs += "\n";
      }
    }
    std::string diffs_csv;
    for (const auto& [key, value] : meta) {
      diffs_csv += "# " + key + "=" + value + "\n";
    }
    diffs_csv += diffs;
    manifest["diffs_csv"] = "prior_diffs.csv";
    write_file_atomic(dir / "prior_diffs.csv", diffs_csv);
    write_file_atomic(dir / "manifest.json", manifest.dump(2) + "\n");

    json summary;
    summary["command"] = "sweep";
    summary["kind"] = "prior";
    summary["out_dir"] = out_dir;
    summary["arms"] = result.series.size();
    summary["manifest"] = (dir / "manifest.json").string();
    print_summary(summary);
  }

  void run_cutoff() {
    require_path(input, "--input", "input");
    require_present(!cutoffs_minutes.empty(), "--cutoffs-minutes",
                    "cutoffs_minutes");

    const ModelConfig mc = model.build();
    const PriorSpec prior_spec = prior.build();
    const SamplerConfig cfg = sampler.build(common.seed);
    const unsigned threads = common.resolve_threads();
    std::optional<double> pinned;
    if (is_set(fix_tf)) pinned = fix_tf;
    std::vector<double> cutoffs_days;
    cutoffs_days.reserve(cutoffs_minutes.size());
    for (double m : cutoffs_minutes) cutoffs_days.push_back(m / 1440.0);

    json echo;
    echo["kind"] = "cutoff";
    echo["model"] = family_name(mc.family);
    echo["shape"] = mc.shape;
    echo["input"] = input;
    echo["out_dir"] = out_dir;
    echo["cutoffs_minutes"] = cutoffs_minutes;
    if (pinned) echo["fix_tf"] = *pinned;
    echo["sim_reps"] = sim_reps;
    echo["min_events"] = min_events;
    echo["seed"] = cfg.seed;
    sampler.echo_into(&echo, cfg);
    echo["prior"] = prior_echo(prior_spec);
    set_context("sweep", echo, fs::path(out_dir) / "diagnostics.json");

    const EventCatalogue cat = load_catalogue(input);
    const std::vector<CutoffResult> results =
        cutoff_experiment(mc, prior_spec, cat, cfg, cutoffs_days, pinned,
                          min_events, sim_reps, threads);

    const Metadata meta = make_meta("sweep", echo, cfg.seed);
    const fs::path dir(out_dir);

    ForecastSeries fits;
    fits.model = mc;
    fits.tf_true = cat.eruption_time();
    for (const CutoffResult& res : results) fits.windows.push_back(res.fit);
    write_file_atomic(dir / "cutoff_fits.csv", forecast_to_csv(fits, meta));
    write_file_atomic(dir / "cutoff_bins.csv",
                      cutoff_bins_to_csv(results, meta));

    json manifest;
    manifest["kind"] = "cutoff";
    manifest["version"] = kVersion;
    manifest["seed"] = std::to_string(cfg.seed);
    manifest["config"] = echo;
    manifest["fits_csv"] = "cutoff_fits.csv";
    manifest["bins_csv"] = "cutoff_bins.csv";
    manifest["arms"] = json::array();
    for (std::size_t i = 0; i < results.size(); ++i) {
      json entry;
      entry["cutoff_minutes"] = cutoffs_minutes[i];
      entry["cutoff_days"] = results[i].cutoff_days;
      entry["data_end"] = results[i].data_end;
      entry["n_events"] = results[i].fit.n_events;
      entry["skipped"] = results[i].fit.skipped;
      entry["failed"] = results[i].fit.failed;
      if (!results[i].fit.error.empty()) entry["error"] = results[i].fit.error;
      manifest["arms"].push_back(entry);
    }
    write_file_atomic(dir / "manifest.json", manifest.dump(2) + "\n");

    json summary;
    summary["command"] = "sweep";
    summary["kind"] = "cutoff";
    summary["out_dir"] = out_dir;
    summary["arms"] = results.size();
    summary["manifest"] = (dir / "manifest.json").string();
    print_summary(summary);
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Accelerating-rate renewal models on event catalogues: fitting, "
      "simulation, goodness of fit, and eruption-time forecasting"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  FitCommand fit_cmd;
  SimulateCommand simulate_cmd;
  GofCommand gof_cmd;
  ForecastCommand forecast_cmd;
  ThinCommand thin_cmd;
  SweepCommand sweep_cmd;
  fit_cmd.add_to(&app);
  simulate_cmd.add_to(&app);
  gof_cmd.add_to(&app);
  forecast_cmd.add_to(&app);
  thin_cmd.add_to(&app);
  sweep_cmd.add_to(&app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  } catch (const ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitValidation;
  } catch (const std::domain_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitValidation;
  } catch (const FormatError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitData;
  } catch (const DataError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitData;
  } catch (const std::filesystem::filesystem_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitData;
  } catch (const NumericError& e) {
    std::fprintf(stderr, "numeric error: %s\n", e.what());
    write_diagnostics("numeric", e);
    return kExitNumeric;
  } catch (const ConvergenceError& e) {
    std::fprintf(stderr, "convergence error: %s\n", e.what());
    write_diagnostics("convergence", e);
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    write_diagnostics("unexpected", e);
    return kExitNumeric;
  }
  return 0;
}
