#pragma once
#include <array>
#include <optional>
#include <string>
#include <vector>

#include "quadcable/config.hpp"
#include "quadcable/csv.hpp"

namespace quadcable {

// QUADCABLE_OUTPUT_ROOT, else "out"
std::string output_root();

struct ResolvedGains {
  GainSet gains;
  CertificateConstants constants;  // with B, C_q filled when auto_bounds
  CertificateReport certificate;
  bool searched = false;
};
// runs gain_search when the source is "search" (throws CertificationFailed),
// otherwise certifies the fixed set for the report
ResolvedGains resolve_gains(const ScenarioConfig& c);

// t = 0 slow state per the initial spec
SlowState initial_slow_state(const ScenarioConfig& c, const GainSet& g);

struct RunReport {
  std::string name;
  ModelKind model = ModelKind::reduced;
  std::array<double, 3> mse{};
  Vec3 final_ex = Vec3::Zero();
  double final_time = 0.0;
  long samples = 0;
  bool failed = false;
  std::string failure;
  double sup_ex_post = 0.0;  // sup |ex| over t >= settle_time
  double max_orth_err = 0.0, max_unit_err = 0.0;
  double V0 = 0.0, V_final = 0.0;
  long V_increases = 0;  // beyond 1e-8 relative
  double V_worst_rel_increase = 0.0;
  bool V_in_domain = true;
  ResolvedGains gains;
  std::string csv_path, config_path;
  RunLog log;  // kept when requested
  std::string to_text() const;
};

struct RunOptions {
  bool write_files = true;
  bool keep_log = false;
};

RunReport run_scenario(const ScenarioConfig& c, const RunOptions& opt = {});
RunReport run_scenario(const ScenarioConfig& c, const ResolvedGains& g, const RunOptions& opt);

struct SweepEntry {
  double eps = 0.0;
  double sup_dev = 0.0;       // load pose/twist and cable states, max abs component
  double sup_dev_quads = 0.0;  // quadrotor attitudes and rates, diagnostic only
  bool failed = false;
  std::string failure;
};
struct SweepReport {
  std::vector<SweepEntry> entries;
  bool strictly_decreasing = false;
  std::optional<double> slope;  // log-log least squares over finished runs
  std::string to_text() const;
};
SweepReport epsilon_sweep(const ScenarioConfig& c, const std::vector<double>& eps,
                          bool write_files = true);

struct GainLevel {
  double level = 0.0;
  GainSet gains;
  bool certified = false;
  double lambda_min_W = 0.0;
  RunReport run;
};
// kx = kv = level with companions from gain_search, one run per level;
// integrator.dt is for the first level, scaled by (level0/level)^2 for the rest
std::vector<GainLevel> gain_level_study(const ScenarioConfig& c, const std::vector<double>& levels);

}  // namespace quadcable
