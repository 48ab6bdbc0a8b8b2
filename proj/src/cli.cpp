#include "csmlab/cli.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "csmlab/selftest.hpp"
#include "csmlab/svg_plot.hpp"
#include "csmlab/theorem_monitors.hpp"

namespace csmlab {
namespace {

namespace fs = std::filesystem;

const std::set<std::string> kParamKeys{"nu", "cs", "delta", "s", "eddy_variant", "closure_sign"};

struct RunOptions {
  fs::path config;
  std::optional<fs::path> out;
  std::optional<std::uint64_t> seed;
};

struct VerifyOptions {
  int theorem = 0;
  std::optional<fs::path> config;
  std::optional<fs::path> series;
  std::optional<fs::path> out;
  double s = 2.0;
  std::optional<double> nu;
  std::optional<double> epsilon;
};

struct SweepOptions {
  fs::path config;
  std::string vary;
  std::optional<fs::path> out;
  int jobs = 0;
};

struct PlotOptionsCli {
  std::vector<fs::path> series;
  fs::path out;
  std::string columns = "t:l2_sq";
  bool log_y = false;
  std::string title;
};

std::string compact_timestamp() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y%m%dT%H%M%SZ", &tm);
  return buf;
}

Json read_config_document(const fs::path& path) {
  Json doc = read_json(path);
  if (!doc.is_object()) throw InvalidInput("config: expected a JSON object");
  return doc;
}

// Forces the model key to match the subcommand.
RunConfig run_config_for(Json doc, ModelKind kind) {
  if (auto it = doc.find("model"); it != doc.end() && *it != to_string(kind))
    throw InvalidInput("model: config declares " + it->dump() + " but the subcommand runs " + to_string(kind));
  doc["model"] = to_string(kind);
  return parse_run_config(doc);
}

PairConfig pair_config_for(Json doc) {
  if (auto it = doc.find("model"); it != doc.end() && *it != "Pair")
    throw InvalidInput("model: a paired run needs \"model\": \"Pair\", got " + it->dump());
  doc["model"] = "Pair";
  return parse_pair_config(doc);
}

RunManifest start_manifest(const std::string& digest, std::uint64_t seed) {
  RunManifest m;
  m.config_digest = digest;
  m.seed = seed;
  m.started = utc_timestamp();
  return m;
}

void finish_manifest(RunManifest& m, const std::optional<AbortInfo>& abort, const fs::path& dir) {
  m.finished = utc_timestamp();
  if (abort) {
    m.status = "aborted";
    m.abort_reason = abort->reason;
    m.abort_message = abort->message;
  }
  write_manifest(m, dir / "manifest.json");
}

void report_abort(const AbortInfo& abort) {
  std::cerr << "numerical abort (" << abort.reason << ") at t=" << abort.t << ": " << abort.message << '\n';
}

// Runs a single model and persists series, checkpoint and manifest.
RunResult execute_run(const RunConfig& config, const fs::path& dir) {
  const Json echo = to_json(config);
  const std::string digest = config_digest(echo);
  write_json(echo, dir / "config.json");
  RunManifest manifest = start_manifest(digest, config.initial_condition.seed);
  RunResult result = run(config);
  write_series(result.records, dir / "series.csv");
  checkpoint_save(dir / "checkpoint.bin", result.final_state, digest);
  manifest.output_paths = {"config.json", "series.csv", "checkpoint.bin"};
  finish_manifest(manifest, result.abort, dir);
  return result;
}

PairResult execute_pair(const PairConfig& config, const fs::path& dir) {
  const Json echo = to_json(config);
  const std::string digest = config_digest(echo);
  write_json(echo, dir / "config.json");
  RunManifest manifest = start_manifest(digest, config.perturbation_seed);
  PairResult result = run_pair(config.u, config.w, config.epsilon, config.perturbation_seed);
  write_series(result.u.records, dir / "series_u.csv");
  write_series(result.w.records, dir / "series_w.csv");
  write_pair_series(result.phi, dir / "pair.csv");
  checkpoint_save(dir / "checkpoint_u.bin", result.u.final_state, digest);
  checkpoint_save(dir / "checkpoint_w.bin", result.w.final_state, digest);
  manifest.output_paths = {"config.json", "series_u.csv", "series_w.csv", "pair.csv", "checkpoint_u.bin",
                           "checkpoint_w.bin"};
  finish_manifest(manifest, result.abort, dir);
  return result;
}

int cmd_run(ModelKind kind, const RunOptions& opts) {
  RunConfig config = run_config_for(read_config_document(opts.config), kind);
  if (opts.seed) config.initial_condition.seed = *opts.seed;
  const fs::path dir = make_run_dir(opts.out, kind == ModelKind::NSE ? "run-dns" : "run-csm");
  const RunResult result = execute_run(config, dir);
  std::cout << dir.string() << '\n';
  if (result.abort) {
    report_abort(*result.abort);
    return kExitNumerical;
  }
  return kExitOk;
}

int cmd_run_pair(const RunOptions& opts) {
  PairConfig config = pair_config_for(read_config_document(opts.config));
  if (opts.seed) config.perturbation_seed = *opts.seed;
  const fs::path dir = make_run_dir(opts.out, "run-pair");
  const PairResult result = execute_pair(config, dir);
  std::cout << dir.string() << '\n';
  if (result.abort) {
    report_abort(*result.abort);
    return kExitNumerical;
  }
  return kExitOk;
}

void print_report(const TheoremReport& report) {
  std::cout << report.theorem_id << ": " << (report.pass ? "PASS" : "FAIL") << " (" << report.reason << ")";
  for (const auto& [name, value] : report.constants) std::cout << ' ' << name << '=' << format_double(value);
  if (report.decay_rate) std::cout << " lambda=" << format_double(*report.decay_rate);
  std::cout << '\n';
}

int cmd_verify(const VerifyOptions& opts) {
  if (opts.config.has_value() == opts.series.has_value())
    throw InvalidInput("verify: pass exactly one of --config or --series");
  const fs::path dir = make_run_dir(opts.out, "verify-" + std::to_string(opts.theorem));
  TheoremReport report;
  std::optional<AbortInfo> abort;

  if (opts.theorem == 1) {
    std::vector<DiagnosticRecord> records;
    double s = opts.s;
    std::string digest;
    if (opts.config) {
      const Json doc = read_config_document(*opts.config);
      const AnyConfig any = parse_config(doc);
      if (!std::holds_alternative<RunConfig>(any)) throw InvalidInput("model: verify 1 needs an NSE or CSM config");
      const RunConfig& config = std::get<RunConfig>(any);
      s = config.params.s;
      digest = config_digest(to_json(config));
      RunResult result = execute_run(config, dir);
      records = std::move(result.records);
      abort = result.abort;
    } else {
      records = read_series(*opts.series);
    }
    report = monitor_theorem1(records, s);
    report.config_digest = digest;
  } else {
    std::vector<PairRecord> phi;
    double nu = 0.0, epsilon = 0.0;
    std::string digest;
    if (opts.config) {
      const PairConfig config = pair_config_for(read_config_document(*opts.config));
      nu = config.u.params.nu;
      epsilon = config.epsilon;
      digest = config_digest(to_json(config));
      PairResult result = execute_pair(config, dir);
      phi = std::move(result.phi);
      abort = result.abort;
    } else {
      if (!opts.nu) throw InvalidInput("nu: --nu is required with --series for verify 2 and 3");
      nu = *opts.nu;
      epsilon = opts.epsilon.value_or(0.0);
      if (opts.theorem == 3 && !opts.epsilon)
        throw InvalidInput("epsilon: --epsilon is required with --series for verify 3");
      phi = read_pair_series(*opts.series);
    }
    report = opts.theorem == 2 ? monitor_theorem2(phi, nu) : monitor_theorem3(phi, nu, epsilon);
    report.config_digest = digest;
  }

  write_report(report, dir / "report.json");
  write_margins(report, dir / "margins.csv");
  std::cout << dir.string() << '\n';
  print_report(report);
  if (abort) {
    report_abort(*abort);
    return kExitNumerical;
  }
  return report.pass ? kExitOk : kExitVerification;
}

Json parse_value(const std::string& text) {
  try {
    Json v = Json::parse(text);
    if (v.is_primitive()) return v;
  } catch (const Json::parse_error&) {
  }
  return Json(text);
}

std::string value_label(const Json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); }

struct SweepRow {
  std::string status = "not run";
  std::vector<double> values;
};

std::string csv_cell(double v) { return format_double(v); }

int cmd_sweep(const SweepOptions& opts) {
  const auto eq = opts.vary.find('=');
  if (eq == std::string::npos || eq == 0) throw InvalidInput("vary: expected KEY=v1,v2,...");
  const std::string key = opts.vary.substr(0, eq);
  std::vector<Json> values;
  {
    std::istringstream list(opts.vary.substr(eq + 1));
    std::string item;
    while (std::getline(list, item, ','))
      if (!item.empty()) values.push_back(parse_value(item));
  }
  if (values.empty()) throw InvalidInput("vary: empty value list for '" + key + "'");

  const Json base = read_config_document(opts.config);
  const bool paired = base.value("model", std::string("NSE")) == "Pair";
  std::vector<AnyConfig> configs;
  for (const Json& v : values) configs.push_back(parse_config(apply_override(base, key, v)));

  const fs::path dir = make_run_dir(opts.out, "sweep");
  std::vector<fs::path> subdirs;
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::string name = std::to_string(i) + "_" + key + "=" + value_label(values[i]);
    for (char& c : name)
      if (c == '/' || c == '\\' || c == ' ') c = '_';
    subdirs.push_back(dir / name);
    fs::create_directories(subdirs.back());
  }

  std::vector<SweepRow> rows(values.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < configs.size(); i = next++) {
      SweepRow& row = rows[i];
      try {
        if (paired) {
          const PairConfig& config = std::get<PairConfig>(configs[i]);
          const PairResult result = execute_pair(config, subdirs[i]);
          const TheoremReport t2 = monitor_theorem2(result.phi, config.u.params.nu);
          const TheoremReport t3 = monitor_theorem3(result.phi, config.u.params.nu, config.epsilon);
          write_report(t2, subdirs[i] / "report_t2.json");
          write_report(t3, subdirs[i] / "report_t3.json");
          row.status = result.abort ? "aborted:" + result.abort->reason : "completed";
          const double c2 = t3.constants.at("C2");
          row.values = {t2.constants.at("C"), t2.pass ? 1.0 : 0.0, t3.constants.at("C1"), c2,
                        c2 * config.u.params.nu, t3.decay_rate.value_or(std::nan("")), t3.pass ? 1.0 : 0.0};
        } else {
          const RunConfig& config = std::get<RunConfig>(configs[i]);
          const RunResult result = execute_run(config, subdirs[i]);
          const TheoremReport t1 = monitor_theorem1(result.records, config.params.s);
          write_report(t1, subdirs[i] / "report_t1.json");
          row.status = result.abort ? "aborted:" + result.abort->reason : "completed";
          const auto g = t1.diagnostics.find("groenwall_C");
          row.values = {t1.constants.at("C"), t1.pass ? 1.0 : 0.0,
                        g == t1.diagnostics.end() ? std::nan("") : g->second};
        }
      } catch (const std::exception& e) {
        row.status = std::string("error: ") + e.what();
      }
    }
  };
  const int jobs = opts.jobs > 0 ? opts.jobs : std::max(1u, std::thread::hardware_concurrency());
  {
    std::vector<std::jthread> pool;
    for (int j = 0; j < std::min<int>(jobs, static_cast<int>(configs.size())); ++j) pool.emplace_back(worker);
  }

  std::ofstream summary(dir / "summary.csv");
  summary << key << ",status,"
          << (paired ? "t2_C,t2_pass,t3_C1,t3_C2,t3_C2_nu,t3_decay_rate,t3_pass" : "t1_C,t1_pass,groenwall_C")
          << '\n';
  bool any_abort = false;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    summary << value_label(values[i]) << ',' << rows[i].status;
    for (double v : rows[i].values) summary << ',' << csv_cell(v);
    summary << '\n';
    any_abort = any_abort || rows[i].status != "completed";
  }
  summary.close();
  std::cout << dir.string() << '\n';
  for (std::size_t i = 0; i < rows.size(); ++i)
    std::cout << key << '=' << value_label(values[i]) << ": " << rows[i].status << '\n';
  return any_abort ? kExitNumerical : kExitOk;
}

int cmd_plot(const PlotOptionsCli& opts) {
  const auto colon = opts.columns.find(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == opts.columns.size())
    throw InvalidInput("columns: expected X:Y[,Y2...]");
  const std::string x_name = opts.columns.substr(0, colon);
  std::vector<std::string> y_names;
  {
    std::istringstream list(opts.columns.substr(colon + 1));
    std::string item;
    while (std::getline(list, item, ','))
      if (!item.empty()) y_names.push_back(item);
  }
  std::vector<PlotSeries> series;
  for (const auto& path : opts.series) {
    const CsvTable table = read_csv(path);
    const auto xi = table.column(x_name);
    if (!xi) throw InvalidInput("columns: column '" + x_name + "' not found in " + path.string());
    for (const auto& y_name : y_names) {
      const auto yi = table.column(y_name);
      if (!yi) throw InvalidInput("columns: column '" + y_name + "' not found in " + path.string());
      PlotSeries s;
      s.label = opts.series.size() > 1 ? path.filename().string() + ":" + y_name : y_name;
      for (const auto& row : table.rows) {
        s.x.push_back(row[*xi]);
        s.y.push_back(row[*yi]);
      }
      series.push_back(std::move(s));
    }
  }
  PlotOptions plot;
  plot.title = opts.title;
  plot.x_label = x_name;
  plot.y_label = y_names.size() == 1 ? y_names.front() : "value";
  plot.log_y = opts.log_y;
  const std::string svg = render_svg(series, plot);
  if (opts.out.has_parent_path()) fs::create_directories(opts.out.parent_path());
  std::ofstream out(opts.out, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + opts.out.string() + "' for writing");
  out << svg;
  if (!out) throw std::runtime_error("write failed for '" + opts.out.string() + "'");
  return kExitOk;
}

int cmd_selftest() {
  const auto results = run_selftest(std::cout);
  std::size_t failed = 0;
  for (const auto& r : results) failed += r.pass ? 0 : 1;
  std::cout << (failed == 0 ? "selftest passed" : "selftest failed: " + std::to_string(failed) + " check(s)") << '\n';
  return failed == 0 ? kExitOk : kExitVerification;
}

}  // namespace

Json apply_override(Json doc, const std::string& key, const Json& value) {
  std::vector<std::string> parts;
  {
    std::istringstream in(key);
    std::string part;
    while (std::getline(in, part, '.')) {
      if (part.empty()) throw InvalidInput("vary: malformed key '" + key + "'");
      parts.push_back(part);
    }
  }
  if (parts.empty()) throw InvalidInput("vary: empty key");
  if (parts.size() == 1 && kParamKeys.contains(parts[0])) parts.insert(parts.begin(), "params");
  Json* node = &doc;
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    Json& child = (*node)[parts[i]];
    if (child.is_string() && parts[i] == "initial_condition") child = Json{{"kind", child}};
    if (child.is_null()) child = Json::object();
    if (!child.is_object()) throw InvalidInput("vary: '" + parts[i] + "' is not an object in the config");
    node = &child;
  }
  (*node)[parts.back()] = value;
  return doc;
}

fs::path make_run_dir(const std::optional<fs::path>& root, const std::string& label) {
  fs::path base;
  if (root) base = *root;
  else if (const char* env = std::getenv("CSMLAB_OUT_DIR"); env && *env) base = env;
  else base = "csmlab-out";
  fs::create_directories(base);
  const std::string stem = label + "-" + compact_timestamp();
  for (int attempt = 0;; ++attempt) {
    const fs::path dir = base / (attempt == 0 ? stem : stem + "-" + std::to_string(attempt));
    if (fs::create_directory(dir)) return dir;
  }
}

int run_cli(int argc, char** argv) {
  CLI::App app{"Pseudo-spectral Navier-Stokes / corrected Smagorinsky experiment harness", "csmlab"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);

  RunOptions run_opts;
  ModelKind run_kind = ModelKind::NSE;
  auto add_run = [&](const std::string& name, const std::string& help) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", run_opts.config, "Config JSON")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", run_opts.out, "Output root (default $CSMLAB_OUT_DIR)");
    sub->add_option("--seed", run_opts.seed, "Override the random seed");
    return sub;
  };
  CLI::App* run_dns = add_run("run-dns", "Run the Navier-Stokes model");
  CLI::App* run_csm = add_run("run-csm", "Run the corrected Smagorinsky model");
  CLI::App* run_pair_cmd = add_run("run-pair", "Run NSE and CSM side by side and record their difference");

  VerifyOptions verify_opts;
  CLI::App* verify = app.add_subcommand("verify", "Fit constants of bound 1, 2 or 3 and report a verdict");
  verify->add_option("theorem", verify_opts.theorem, "1, 2 or 3")->required()->check(CLI::IsMember({1, 2, 3}));
  verify->add_option("--config", verify_opts.config, "Config to run first")->check(CLI::ExistingFile);
  verify->add_option("--series", verify_opts.series, "Existing series CSV")->check(CLI::ExistingFile);
  verify->add_option("--out", verify_opts.out, "Output root");
  verify->add_option("--s", verify_opts.s, "Sobolev order of a --series input");
  verify->add_option("--nu", verify_opts.nu, "Viscosity of a --series pair input");
  verify->add_option("--epsilon", verify_opts.epsilon, "Initial perturbation size of a --series pair input");

  SweepOptions sweep_opts;
  CLI::App* sweep = app.add_subcommand("sweep", "Repeat a run or pair over a list of parameter values");
  sweep->add_option("--config", sweep_opts.config, "Base config")->required()->check(CLI::ExistingFile);
  sweep->add_option("--vary", sweep_opts.vary, "KEY=v1,v2,... (dotted key path)")->required();
  sweep->add_option("--out", sweep_opts.out, "Output root");
  sweep->add_option("--jobs", sweep_opts.jobs, "Concurrent runs (default: logical cores)");

  PlotOptionsCli plot_opts;
  CLI::App* plot = app.add_subcommand("plot", "Render CSV series as an SVG line chart");
  plot->add_option("--series", plot_opts.series, "CSV files")->required()->check(CLI::ExistingFile);
  plot->add_option("--out", plot_opts.out, "Output SVG")->required();
  plot->add_option("--columns", plot_opts.columns, "X:Y[,Y2...]");
  plot->add_flag("--log-y", plot_opts.log_y, "Logarithmic y axis");
  plot->add_option("--title", plot_opts.title, "Chart title");

  CLI::App* selftest = app.add_subcommand("selftest", "Run the built-in oracle suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (run_dns->parsed()) run_kind = ModelKind::NSE;
    if (run_csm->parsed()) run_kind = ModelKind::CSM;
    if (run_dns->parsed() || run_csm->parsed()) return cmd_run(run_kind, run_opts);
    if (run_pair_cmd->parsed()) return cmd_run_pair(run_opts);
    if (verify->parsed()) return cmd_verify(verify_opts);
    if (sweep->parsed()) return cmd_sweep(sweep_opts);
    if (plot->parsed()) return cmd_plot(plot_opts);
    if (selftest->parsed()) return cmd_selftest();
  } catch (const InvalidInput& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const NumericalAbort& e) {
    std::cerr << "numerical abort (" << e.reason() << "): " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  return kExitValidation;
}

}  // namespace csmlab
