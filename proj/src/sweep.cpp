#include "qdcav/sweep.hpp"

#include "qdcav/error.hpp"

#include <omp.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>
#include <unistd.h>

#include <fmt/format.h>

namespace qdcav {

bool is_param_name(std::string_view name) {
  return std::find(kParamNames.begin(), kParamNames.end(), name) != kParamNames.end();
}

double get_param(const ModelParams& p, std::string_view name) {
  if (name == "eps0") return p.eps0.value_or(0.0);
  if (name == "g") return p.g;
  if (name == "g_B") return p.g_B;
  if (name == "delta_B") return p.delta_B;
  if (name == "gamma_X") return p.gamma_X;
  if (name == "gamma_B") return p.gamma_B;
  if (name == "Gamma") return p.Gamma;
  if (name == "E_R") return p.E_R;
  if (name == "E_L") return p.E_L;
  if (name == "omega_R_det") return p.omega_R_det;
  if (name == "omega_L_det") return p.omega_L_det;
  throw ConfigError(fmt::format("unknown parameter '{}'", name));
}

void set_param(ModelParams& p, std::string_view name, double value) {
  if (name == "eps0") p.eps0 = value;
  else if (name == "g") p.g = value;
  else if (name == "g_B") p.g_B = value;
  else if (name == "delta_B") p.delta_B = value;
  else if (name == "gamma_X") p.gamma_X = value;
  else if (name == "gamma_B") p.gamma_B = value;
  else if (name == "Gamma") p.Gamma = value;
  else if (name == "E_R") p.E_R = value;
  else if (name == "E_L") p.E_L = value;
  else if (name == "omega_R_det") p.omega_R_det = value;
  else if (name == "omega_L_det") p.omega_L_det = value;
  else throw ConfigError(fmt::format("unknown parameter '{}'", name));
}

double Axis::value(int i) const {
  if (count == 1) return start;
  return start + (stop - start) * static_cast<double>(i) / static_cast<double>(count - 1);
}

double DerivedRule::evaluate(const ModelParams& p) const {
  double v = constant;
  for (const auto& [coeff, name] : terms) v += coeff * get_param(p, name);
  return v;
}

namespace {

// Tokenizer/parser for sums of terms "[sign] [number *] name" or "[sign] number".
class RuleParser {
 public:
  explicit RuleParser(std::string_view text) : text_(text) {}

  DerivedRule parse(const std::string& target) {
    DerivedRule rule;
    rule.target = target;
    rule.expression = std::string(text_);
    skip_space();
    if (at_end()) fail("empty expression");
    bool first = true;
    while (!at_end()) {
      double sign = 1.0;
      if (peek() == '+' || peek() == '-') {
        sign = take() == '-' ? -1.0 : 1.0;
        skip_space();
      } else if (!first) {
        fail("expected '+' or '-'");
      }
      first = false;
      term(rule, sign);
      skip_space();
    }
    return rule;
  }

 private:
  void term(DerivedRule& rule, double sign) {
    if (std::isdigit(static_cast<unsigned char>(peek())) || peek() == '.') {
      const double number = read_number();
      skip_space();
      if (!at_end() && peek() == '*') {
        take();
        skip_space();
        rule.terms.emplace_back(sign * number, read_name());
      } else {
        rule.constant += sign * number;
      }
    } else {
      std::string name = read_name();
      skip_space();
      double coeff = 1.0;
      if (!at_end() && peek() == '*') {
        take();
        skip_space();
        coeff = read_number();
      }
      rule.terms.emplace_back(sign * coeff, std::move(name));
    }
  }

  double read_number() {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(std::string(text_.substr(pos_)), &used);
    } catch (const std::exception&) {
      fail("expected a number");
    }
    pos_ += used;
    return v;
  }

  std::string read_name() {
    const std::size_t begin = pos_;
    while (!at_end() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_')) ++pos_;
    std::string name(text_.substr(begin, pos_ - begin));
    if (name.empty()) fail("expected a parameter name");
    if (!is_param_name(name)) fail(fmt::format("unknown parameter '{}'", name));
    return name;
  }

  [[noreturn]] void fail(const std::string& why) const {
    throw ConfigError(fmt::format("rule '{}': {} at position {}", text_, why, pos_));
  }

  bool at_end() const { return pos_ >= text_.size(); }
  char peek() const { return text_[pos_]; }
  char take() { return text_[pos_++]; }
  void skip_space() {
    while (!at_end() && std::isspace(static_cast<unsigned char>(peek()))) ++pos_;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

DerivedRule parse_rule(const std::string& target, const std::string& expression) {
  if (!is_param_name(target)) throw ConfigError(fmt::format("rule target '{}' is not a parameter", target));
  return RuleParser(expression).parse(target);
}

void SweepConfig::validate() const {
  model.validate();
  if (axes.size() > 2) {
    throw ConfigError(fmt::format("at most two axes are supported, got {}", axes.size()));
  }
  for (const Axis& a : axes) {
    if (!is_param_name(a.name)) throw ConfigError(fmt::format("axis '{}' is not a parameter", a.name));
    if (a.count < 1) throw ConfigError(fmt::format("axis '{}': count must be >= 1", a.name));
    if (!(a.start <= a.stop)) throw ConfigError(fmt::format("axis '{}': start must be <= stop", a.name));
  }
  if (axes.size() == 2 && axes[0].name == axes[1].name) throw ConfigError("the two axes must differ");
  for (std::size_t i = 0; i < rules.size(); ++i) {
    const DerivedRule& r = rules[i];
    for (const Axis& a : axes) {
      if (r.target == a.name) {
        throw ConfigError(fmt::format("rule target '{}' is also a sweep axis", r.target));
      }
    }
    for (std::size_t k = 0; k < i; ++k) {
      if (rules[k].target == r.target) throw ConfigError(fmt::format("two rules set '{}'", r.target));
    }
  }
  if (n_max < 2) throw ConfigError(fmt::format("n_max must be >= 2 for pair extraction, got {}", n_max));
  if (!(filter_width >= 0.0)) throw ConfigError("filter_width must be >= 0");
}

int SweepConfig::point_count() const {
  int n = 1;
  for (const Axis& a : axes) n *= a.count;
  return n;
}

std::vector<int> SweepConfig::unflatten(int flat) const {
  std::vector<int> idx(axes.size());
  for (std::size_t k = axes.size(); k-- > 0;) {
    idx[k] = flat % axes[k].count;
    flat /= axes[k].count;
  }
  return idx;
}

ModelParams SweepConfig::params_at(std::span<const int> index) const {
  ModelParams p = model;
  for (std::size_t k = 0; k < axes.size(); ++k) set_param(p, axes[k].name, axes[k].value(index[k]));
  for (const DerivedRule& r : rules) set_param(p, r.target, r.evaluate(p));
  return p;
}

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& obj, std::span<const std::string_view> allowed, const char* where) {
  if (!obj.is_object()) throw ConfigError(fmt::format("'{}' must be an object", where));
  for (const auto& [key, value] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ConfigError(fmt::format("unknown key '{}' in '{}'", key, where));
    }
  }
}

double number_at(const json& obj, const std::string& key) {
  const json& v = obj.at(key);
  if (!v.is_number()) throw ConfigError(fmt::format("'{}' must be a number", key));
  return v.get<double>();
}

std::string solver_name(SteadySolver s) { return s == SteadySolver::dense_lu ? "dense_lu" : "sparse_lu"; }

}  // namespace

SweepConfig config_from_json(const json& j) {
  SweepConfig cfg;
  try {
    reject_unknown_keys(j, std::array<std::string_view, 5>{"model", "axes", "rules", "solver", "output"}, "config");
    if (!j.contains("model")) throw ConfigError("missing section 'model'");
    const json& m = j.at("model");
    reject_unknown_keys(m, kParamNames, "model");
    for (const auto& [key, value] : m.items()) {
      if (!value.is_number()) throw ConfigError(fmt::format("model.{} must be a number", key));
      set_param(cfg.model, key, value.get<double>());
    }

    const json& axes_json = j.contains("axes") ? j.at("axes") : json::array();
    if (!axes_json.is_array()) throw ConfigError("'axes' must be an array");
    for (const json& a : axes_json) {
      reject_unknown_keys(a, std::array<std::string_view, 4>{"name", "start", "stop", "count"}, "axes[]");
      Axis axis;
      axis.name = a.at("name").get<std::string>();
      axis.start = number_at(a, "start");
      axis.stop = a.contains("stop") ? number_at(a, "stop") : axis.start;
      axis.count = a.contains("count") ? a.at("count").get<int>() : 1;
      cfg.axes.push_back(axis);
    }

    if (j.contains("rules")) {
      const json& r = j.at("rules");
      if (!r.is_object()) throw ConfigError("'rules' must map parameter names to expressions");
      for (const auto& [target, expr] : r.items()) {
        if (!expr.is_string()) throw ConfigError(fmt::format("rule for '{}' must be a string", target));
        cfg.rules.push_back(parse_rule(target, expr.get<std::string>()));
      }
    }

    if (j.contains("solver")) {
      const json& s = j.at("solver");
      reject_unknown_keys(s, std::array<std::string_view, 4>{"n_max", "branch", "method", "filter_width"}, "solver");
      if (s.contains("n_max")) cfg.n_max = s.at("n_max").get<int>();
      if (s.contains("branch")) cfg.branch = parse_branch(s.at("branch").get<std::string>());
      if (s.contains("method")) {
        const auto method = s.at("method").get<std::string>();
        if (method == "dense_lu") cfg.solver = SteadySolver::dense_lu;
        else if (method == "sparse_lu") cfg.solver = SteadySolver::sparse_lu;
        else throw ConfigError(fmt::format("solver.method must be dense_lu or sparse_lu, got '{}'", method));
      }
      if (s.contains("filter_width")) cfg.filter_width = number_at(s, "filter_width");
    }

    if (j.contains("output")) {
      const json& o = j.at("output");
      reject_unknown_keys(o, std::array<std::string_view, 2>{"path", "metadata"}, "output");
      if (o.contains("path")) cfg.output_path = o.at("path").get<std::string>();
      if (o.contains("metadata")) cfg.write_metadata = o.at("metadata").get<bool>();
    }
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("malformed config: {}", e.what()));
  }
  cfg.validate();
  return cfg;
}

json config_to_json(const SweepConfig& cfg) {
  json model = json::object();
  for (std::string_view name : kParamNames) {
    if (name == "eps0" && !cfg.model.eps0) continue;
    model[std::string(name)] = get_param(cfg.model, name);
  }
  json axes = json::array();
  for (const Axis& a : cfg.axes) {
    axes.push_back({{"name", a.name}, {"start", a.start}, {"stop", a.stop}, {"count", a.count}});
  }
  json rules = json::object();
  for (const DerivedRule& r : cfg.rules) rules[r.target] = r.expression;
  return {
      {"model", model},
      {"axes", axes},
      {"rules", rules},
      {"solver",
       {{"n_max", cfg.n_max},
        {"branch", to_string(cfg.branch)},
        {"method", solver_name(cfg.solver)},
        {"filter_width", cfg.filter_width}}},
      {"output", {{"path", cfg.output_path}, {"metadata", cfg.write_metadata}}},
  };
}

SweepConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open config file '{}'", path.string()));
  json j;
  try {
    j = json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("'{}' is not valid JSON: {}", path.string(), e.what()));
  }
  return config_from_json(j);
}

std::string to_string(PointStatus s) {
  switch (s) {
    case PointStatus::ok: return "ok";
    case PointStatus::no_pair_flux: return "no_pair_flux";
    case PointStatus::numerical_error: return "numerical_error";
  }
  return "?";
}

PointContext make_context(const SweepConfig& cfg) {
  return PointContext{build_basis(cfg.n_max), cfg.branch, cfg.solver, cfg.filter_width};
}

PointEvaluation evaluate_point_full(const ModelParams& p, const PointContext& ctx) {
  p.validate();
  const ProductBasis& basis = ctx.basis;
  const Operator h_rot = rotating_frame_hamiltonian(basis, p);
  const Liouvillian L = build_liouvillian(h_rot, p, basis);

  PointEvaluation out;
  out.steady = steady_state(L, ctx.solver);
  out.shell_population = shell_population(out.steady.rho, basis);

  ModelParams bare = p;
  bare.eps0.reset();
  const DressedSpectrum dressed = diagonalize_manifolds(build_h0(basis, bare), basis);
  const TransitionTable table(dressed, basis);
  const auto [w1, w2] = pair_frequencies(p, ctx.branch);
  std::optional<FrequencyFilter> filter;
  if (ctx.filter_width > 0.0) filter = FrequencyFilter{ctx.filter_width, w2};
  const auto T = build_transition_operators(table, dressed, basis, ctx.branch, filter);

  out.pair = pair_density_matrix(out.steady.rho, T, w1, w2);
  if (out.pair) {
    out.concurrence = concurrence(*out.pair);
    out.eof = eof_from_concurrence(out.concurrence);
  }
  return out;
}

PointRecord evaluate_point(const ModelParams& p, const PointContext& ctx) {
  PointRecord rec;
  try {
    const PointEvaluation ev = evaluate_point_full(p, ctx);
    rec.residual = ev.steady.residual;
    rec.shell_population = ev.shell_population;
    rec.shell_warning = ev.shell_population > kShellWarning;
    if (ev.pair) {
      rec.eof = ev.eof;
      rec.concurrence = ev.concurrence;
      for (int k = 0; k < 4; ++k) rec.pair_diagonal[static_cast<std::size_t>(k)] = ev.pair->rho4(k, k).real();
    } else {
      rec.status = PointStatus::no_pair_flux;
      rec.message = "no two-photon flux";
    }
  } catch (const NumericalError& e) {
    rec.status = PointStatus::numerical_error;
    rec.message = e.what();
  }
  return rec;
}

int SweepResult::argmax_eof() const {
  int best = -1;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const PointRecord& r = records[i];
    if (r.status != PointStatus::ok) continue;
    if (best < 0 || r.eof > records[static_cast<std::size_t>(best)].eof) best = static_cast<int>(i);
  }
  return best;
}

namespace {

SweepResult prepare(const SweepConfig& cfg) {
  cfg.validate();
  SweepResult result;
  result.axes = cfg.axes;
  result.records.resize(static_cast<std::size_t>(cfg.point_count()));
  return result;
}

void fill(const SweepConfig& cfg, const PointContext& ctx, SweepResult& result, int flat) {
  const std::vector<int> idx = cfg.unflatten(flat);
  PointRecord rec = evaluate_point(cfg.params_at(idx), ctx);
  for (std::size_t k = 0; k < idx.size(); ++k) rec.axis_values.push_back(cfg.axes[k].value(idx[k]));
  result.records[static_cast<std::size_t>(flat)] = std::move(rec);
}

}  // namespace

SweepResult run_sweep(const SweepConfig& cfg, int workers) {
  SweepResult result = prepare(cfg);
  const PointContext ctx = make_context(cfg);
  const int n = cfg.point_count();
  const int threads = workers > 0 ? workers : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
  for (int flat = 0; flat < n; ++flat) {
    fill(cfg, ctx, result, flat);
  }
  return result;
}

SweepResult run_sweep_serial(const SweepConfig& cfg) {
  SweepResult result = prepare(cfg);
  const PointContext ctx = make_context(cfg);
  for (int flat = 0; flat < cfg.point_count(); ++flat) fill(cfg, ctx, result, flat);
  return result;
}

namespace {

std::string num(double v) { return fmt::format("{:.17g}", v); }

}  // namespace

void write_sweep_csv(std::ostream& os, const SweepResult& result) {
  for (const Axis& a : result.axes) os << a.name << ',';
  os << "eof,concurrence,p_LR,p_RL,p_LL,p_RR,residual,shell_population,shell_warning,status\n";
  for (const PointRecord& r : result.records) {
    for (double v : r.axis_values) os << num(v) << ',';
    os << num(r.eof) << ',' << num(r.concurrence);
    for (double v : r.pair_diagonal) os << ',' << num(v);
    os << ',' << num(r.residual) << ',' << num(r.shell_population) << ',' << (r.shell_warning ? 1 : 0)
       << ',' << to_string(r.status) << '\n';
  }
}

ScanRecord dressed_scan_point(double g, double g_B, double delta_B) {
  ScanRecord rec;
  rec.delta_B = delta_B;
  rec.a = cubic_shifts(g, g_B, delta_B);
  ModelParams p;
  p.g = g;
  p.g_B = g_B;
  p.delta_B = delta_B;
  const ProductBasis basis = build_basis(2);
  const DressedSpectrum dressed = diagonalize_manifolds(build_h0(basis, p), basis);
  const TransitionTable table(dressed, basis);
  const std::array<DressedLabel, 3> triplets = {DressedLabel::T1, DressedLabel::T2, DressedLabel::T3};
  for (std::size_t j = 0; j < 3; ++j) {
    rec.gamma_Lp[j] = std::abs(table(DressedLabel::Lp, triplets[j], Polarization::R));
    rec.gamma_Rp[j] = std::abs(table(DressedLabel::Rp, triplets[j], Polarization::L));
  }
  return rec;
}

std::vector<ScanRecord> dressed_scan(const SweepConfig& cfg) {
  cfg.model.validate();
  if (cfg.axes.size() != 1 || cfg.axes[0].name != "delta_B") {
    throw ConfigError("dressed-scan needs exactly one axis, named delta_B");
  }
  const Axis& axis = cfg.axes[0];
  if (axis.count < 1 || !(axis.start > 0.0) || !(axis.start <= axis.stop)) {
    throw ConfigError("dressed-scan axis must satisfy 0 < start <= stop and count >= 1");
  }
  std::vector<ScanRecord> out;
  out.reserve(static_cast<std::size_t>(axis.count));
  for (int i = 0; i < axis.count; ++i) out.push_back(dressed_scan_point(cfg.model.g, cfg.model.g_B, axis.value(i)));
  return out;
}

void write_scan_csv(std::ostream& os, const std::vector<ScanRecord>& records) {
  for (std::size_t k = 0; k < kScanColumns.size(); ++k) os << (k ? "," : "") << kScanColumns[k];
  os << '\n';
  for (const ScanRecord& r : records) {
    os << num(r.delta_B);
    for (double v : r.a) os << ',' << num(v);
    for (double v : r.gamma_Lp) os << ',' << num(v);
    for (double v : r.gamma_Rp) os << ',' << num(v);
    os << '\n';
  }
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  namespace fs = std::filesystem;
  const fs::path tmp = path.string() + fmt::format(".tmp.{}", ::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(fmt::format("cannot open '{}' for writing", tmp.string()));
    out << contents;
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw IoError(fmt::format("write to '{}' failed", tmp.string()));
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError(fmt::format("cannot move output into place at '{}'", path.string()));
  }
}

}  // namespace qdcav
