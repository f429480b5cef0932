#include "qdcav/cli.hpp"

#include "qdcav/error.hpp"
#include "qdcav/sweep.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <optional>
#include <ostream>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ostream.h>

namespace qdcav {
namespace {

struct Options {
  std::string config;
  int workers = 0;
  std::optional<int> n_max;
  std::optional<std::string> branch;
  std::string out;
  std::vector<std::string> sets;
  std::string dump_rho;
  std::string dump_pair;
};

void apply_overrides(SweepConfig& cfg, const Options& o) {
  if (o.n_max) cfg.n_max = *o.n_max;
  if (o.branch) cfg.branch = parse_branch(*o.branch);
  if (!o.out.empty()) cfg.output_path = o.out;
  cfg.validate();
}

std::string output_path(const SweepConfig& cfg) {
  if (cfg.output_path.empty()) throw ConfigError("no output path: set output.path in the config or pass --out");
  return cfg.output_path;
}

void write_metadata(const SweepConfig& cfg, const std::string& path, int points) {
  nlohmann::json meta = config_to_json(cfg);
  meta["grid_points"] = points;
  meta["basis_ordering_version"] = kBasisOrderingVersion;
  write_file_atomic(path + ".meta.json", meta.dump(2) + "\n");
}

int do_sweep(const Options& o, std::ostream& out) {
  SweepConfig cfg = load_config(o.config);
  apply_overrides(cfg, o);
  const std::string path = output_path(cfg);

  const auto t0 = std::chrono::steady_clock::now();
  const SweepResult result = run_sweep(cfg, o.workers);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  std::ostringstream csv;
  write_sweep_csv(csv, result);
  write_file_atomic(path, csv.str());
  if (cfg.write_metadata) write_metadata(cfg, path, cfg.point_count());

  int failed = 0, no_flux = 0, warned = 0;
  for (const PointRecord& r : result.records) {
    failed += r.status == PointStatus::numerical_error;
    no_flux += r.status == PointStatus::no_pair_flux;
    warned += r.shell_warning;
  }
  std::string grid;
  for (const Axis& a : cfg.axes) grid += fmt::format("{}{}", grid.empty() ? "" : "x", a.count);
  out << fmt::format("grid {} ({} points) in {:.1f} s -> {}\n", grid.empty() ? "1" : grid,
                     result.records.size(), seconds, path);
  const int best = result.argmax_eof();
  if (best >= 0) {
    const PointRecord& r = result.records[static_cast<std::size_t>(best)];
    std::string where;
    for (std::size_t k = 0; k < cfg.axes.size(); ++k) {
      where += fmt::format("{}{}={:.6g}", k ? ", " : "", cfg.axes[k].name, r.axis_values[k]);
    }
    out << fmt::format("max EoF {:.6f} at {}\n", r.eof, where.empty() ? "the single point" : where);
  } else {
    out << "max EoF: no point has two-photon flux\n";
  }
  if (failed + no_flux + warned > 0) {
    out << fmt::format("numerical failures {}, no pair flux {}, truncation warnings {}\n", failed, no_flux,
                       warned);
  }
  return kExitOk;
}

int do_scan(const Options& o, std::ostream& out) {
  SweepConfig cfg = load_config(o.config);
  if (!o.out.empty()) cfg.output_path = o.out;
  const std::string path = output_path(cfg);
  const std::vector<ScanRecord> records = dressed_scan(cfg);
  std::ostringstream csv;
  write_scan_csv(csv, records);
  write_file_atomic(path, csv.str());
  if (cfg.write_metadata) write_metadata(cfg, path, static_cast<int>(records.size()));
  out << fmt::format("dressed scan: {} values of delta_B at g={:.6g}, g_B={:.6g} -> {}\n", records.size(),
                     cfg.model.g, cfg.model.g_B, path);
  return kExitOk;
}

ModelParams point_params(const SweepConfig& cfg, const std::vector<std::string>& sets) {
  ModelParams p = cfg.model;
  for (const Axis& a : cfg.axes) set_param(p, a.name, a.start);
  for (const std::string& s : sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError(fmt::format("--set expects name=value, got '{}'", s));
    const std::string name = s.substr(0, eq);
    double value = 0.0;
    try {
      std::size_t used = 0;
      value = std::stod(s.substr(eq + 1), &used);
      if (used != s.size() - eq - 1) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      throw ConfigError(fmt::format("--set {}: value is not a number", name));
    }
    for (const DerivedRule& r : cfg.rules) {
      if (r.target == name) throw ConfigError(fmt::format("--set {}: parameter is set by a rule", name));
    }
    set_param(p, name, value);
  }
  for (const DerivedRule& r : cfg.rules) set_param(p, r.target, r.evaluate(p));
  return p;
}

int do_point(const Options& o, std::ostream& out) {
  SweepConfig cfg = load_config(o.config);
  apply_overrides(cfg, o);
  const ModelParams p = point_params(cfg, o.sets);
  const PointEvaluation ev = evaluate_point_full(p, make_context(cfg));

  if (!o.dump_rho.empty()) {
    std::ostringstream csv;
    write_operator_csv(csv, Operator(build_basis(cfg.n_max), ev.steady.rho));
    write_file_atomic(o.dump_rho, csv.str());
  }
  if (!o.dump_pair.empty() && ev.pair) {
    std::ostringstream csv;
    write_pair_csv(csv, *ev.pair);
    write_file_atomic(o.dump_pair, csv.str());
  }

  out << fmt::format("residual {:.3e}, min eigenvalue {:.3e}, shell population {:.3e}\n", ev.steady.residual,
                     ev.steady.min_eigenvalue, ev.shell_population);
  if (ev.pair) {
    out << fmt::format("concurrence {:.17g}\n", ev.concurrence);
    out << fmt::format("eof {:.17g}\n", ev.eof);
  } else {
    out << fmt::format("eof {} (no two-photon flux)\n", kNoEntanglementValue);
  }
  return kExitOk;
}

int do_validate(const Options& o, std::ostream& out) {
  const SweepConfig cfg = load_config(o.config);
  out << fmt::format("config ok: {} grid points, n_max {}, branch {}\n", cfg.point_count(), cfg.n_max,
                     to_string(cfg.branch));
  return kExitOk;
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Steady-state entangled photon pairs from a driven quantum dot in a microcavity", "qdcav"};
  app.require_subcommand(1);
  Options o;

  auto add_config = [&](CLI::App* sub) { sub->add_option("--config", o.config, "JSON config file")->required(); };
  auto add_model = [&](CLI::App* sub) {
    sub->add_option("--n-max", o.n_max, "photon cutoff per mode")->check(CLI::PositiveNumber);
    sub->add_option("--branch", o.branch, "cascade branch")->check(CLI::IsMember({"upper", "lower"}));
  };

  CLI::App* sweep = app.add_subcommand("sweep", "evaluate EoF over a parameter grid");
  add_config(sweep);
  add_model(sweep);
  sweep->add_option("--workers", o.workers, "worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
  sweep->add_option("--out", o.out, "CSV output path");

  CLI::App* scan = app.add_subcommand("dressed-scan", "dressed-state shifts and amplitudes versus delta_B");
  add_config(scan);
  scan->add_option("--out", o.out, "CSV output path");

  CLI::App* point = app.add_subcommand("point", "evaluate a single parameter point");
  add_config(point);
  add_model(point);
  point->add_option("--set", o.sets, "override a parameter, name=value");
  point->add_option("--dump-rho", o.dump_rho, "write the steady-state density matrix as CSV");
  point->add_option("--dump-pair", o.dump_pair, "write the 4x4 pair density matrix as CSV");

  CLI::App* validate = app.add_subcommand("validate-config", "check a config file and exit");
  add_config(validate);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << "run with --help for usage\n";
    return kExitConfig;
  }

  try {
    if (sweep->parsed()) return do_sweep(o, out);
    if (scan->parsed()) return do_scan(o, out);
    if (point->parsed()) return do_point(o, out);
    return do_validate(o, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace qdcav
