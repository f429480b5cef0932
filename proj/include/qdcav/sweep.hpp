#pragma once

// Parameter sweeps over the full basis -> model -> lindblad -> pairs pipeline,
// Delta_B scans of the dressed-state structure, and the JSON configuration
// that drives both.
//
// Grid order is row-major: the first axis is the outer (slow) index. Results
// do not depend on the worker count; every point is evaluated independently
// and written to its own slot.

#include "qdcav/dressed.hpp"
#include "qdcav/lindblad.hpp"
#include "qdcav/model.hpp"
#include "qdcav/pairs.hpp"

#include <json.hpp>

#include <array>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace qdcav {

// Names accepted for axes and rules, in ModelParams field order.
inline constexpr std::array<std::string_view, 11> kParamNames = {
    "eps0", "g", "g_B", "delta_B", "gamma_X", "gamma_B", "Gamma", "E_R", "E_L", "omega_R_det", "omega_L_det"};

bool is_param_name(std::string_view name);
double get_param(const ModelParams& p, std::string_view name);
void set_param(ModelParams& p, std::string_view name, double value);

struct Axis {
  std::string name;
  double start = 0.0;
  double stop = 0.0;
  int count = 1;

  double value(int i) const;
};

// target = constant + sum_k coeff_k * param_k, e.g. "omega_L_det = -g".
struct DerivedRule {
  std::string target;
  std::string expression;
  double constant = 0.0;
  std::vector<std::pair<double, std::string>> terms;

  double evaluate(const ModelParams& p) const;
};

// Parses a linear expression such as "-g", "0.5*g_B - 2", "-(g)" is not
// supported. Throws ConfigError on syntax errors or unknown names.
DerivedRule parse_rule(const std::string& target, const std::string& expression);

struct SweepConfig {
  ModelParams model;
  std::vector<Axis> axes;  // zero (single point), one or two
  std::vector<DerivedRule> rules;
  int n_max = 2;
  CascadeBranch branch = CascadeBranch::upper;
  SteadySolver solver = SteadySolver::dense_lu;
  double filter_width = 0.0;  // Lorentzian pair filter, 0 = off
  std::string output_path;
  bool write_metadata = true;

  // Throws ConfigError.
  void validate() const;
  int point_count() const;
  ModelParams params_at(std::span<const int> index) const;
  std::vector<int> unflatten(int flat) const;
};

SweepConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const SweepConfig& cfg);
// Throws ConfigError when the file is missing or malformed.
SweepConfig load_config(const std::filesystem::path& path);

enum class PointStatus { ok, no_pair_flux, numerical_error };
std::string to_string(PointStatus s);

// EoF / concurrence value reported when a point has no pair flux or failed.
inline constexpr double kNoEntanglementValue = -1.0;

struct PointRecord {
  std::vector<double> axis_values;
  PointStatus status = PointStatus::ok;
  std::string message;
  double eof = kNoEntanglementValue;
  double concurrence = kNoEntanglementValue;
  std::array<double, 4> pair_diagonal{};  // LR, RL, LL, RR
  double residual = 0.0;
  double shell_population = 0.0;
  bool shell_warning = false;
};

struct PointContext {
  ProductBasis basis;
  CascadeBranch branch = CascadeBranch::upper;
  SteadySolver solver = SteadySolver::dense_lu;
  double filter_width = 0.0;
};

PointContext make_context(const SweepConfig& cfg);

// Everything computed at one parameter point.
struct PointEvaluation {
  SteadyState steady;
  std::optional<PairDensityMatrix> pair;
  double concurrence = kNoEntanglementValue;
  double eof = kNoEntanglementValue;
  double shell_population = 0.0;
};

// Full pipeline; throws ConfigError / NumericalError.
PointEvaluation evaluate_point_full(const ModelParams& p, const PointContext& ctx);

// Pipeline wrapped for sweeps: numerical failures land in the record.
PointRecord evaluate_point(const ModelParams& p, const PointContext& ctx);

struct SweepResult {
  std::vector<Axis> axes;
  std::vector<PointRecord> records;

  // Index of the record with the largest EoF, or -1 when no point has flux.
  int argmax_eof() const;
};

// OpenMP map over grid points. workers <= 0 uses the OpenMP default.
SweepResult run_sweep(const SweepConfig& cfg, int workers = 0);

// Single-threaded reference implementation of run_sweep.
SweepResult run_sweep_serial(const SweepConfig& cfg);

void write_sweep_csv(std::ostream& os, const SweepResult& result);

struct ScanRecord {
  double delta_B = 0.0;
  std::array<double, 3> a{};
  std::array<double, 3> gamma_Lp{};  // |gamma_{L+;Tj}| for an R photon
  std::array<double, 3> gamma_Rp{};  // |gamma_{R+;Tj}| for an L photon
};

inline constexpr std::array<std::string_view, 10> kScanColumns = {
    "delta_B",         "a1",              "a2",              "a3",
    "abs_gamma_Lp_T1", "abs_gamma_Lp_T2", "abs_gamma_Lp_T3", "abs_gamma_Rp_T1",
    "abs_gamma_Rp_T2", "abs_gamma_Rp_T3"};

ScanRecord dressed_scan_point(double g, double g_B, double delta_B);

// The config must have a single axis named delta_B with start > 0.
std::vector<ScanRecord> dressed_scan(const SweepConfig& cfg);

void write_scan_csv(std::ostream& os, const std::vector<ScanRecord>& records);

// Writes to a temporary sibling and renames it over path. Throws IoError.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

}  // namespace qdcav
