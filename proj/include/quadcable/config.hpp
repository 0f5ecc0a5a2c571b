#pragma once
#include <iosfwd>
#include <string>
#include <vector>

#include "quadcable/controller.hpp"
#include "quadcable/disturbance.hpp"
#include "quadcable/integrator.hpp"
#include "quadcable/lyapunov.hpp"
#include "quadcable/params.hpp"
#include "quadcable/trajectory.hpp"

namespace quadcable {

enum class ModelKind { full, reduced, perturbed };
enum class GainSource { fixed, search };
// rest: l = L, ldot = 0; slow_manifold: lengths from the first control sample
enum class FullInit { rest, slow_manifold };
// down: q = -e3, w = 0; aligned: q = q~, w = w~ at t = 0
enum class CableInit { down, aligned };

struct InitialSpec {
  Vec3 xL{1.5, 2.5, 2.5};
  Vec3 vL = Vec3::Zero();
  Vec3 RL = Vec3::Zero();  // rotation vector
  Vec3 OmL = Vec3::Zero();
  CableInit cables = CableInit::down;
  // when set, xL and vL are replaced by x_d(0) + offset and v_d(0) + s*offset with
  // s the slow root of s^2 + kv s + kx
  bool slow_mode = false;
  Vec3 offset = Vec3::Zero();
};

struct TrajectorySpec {
  std::string name = "paper_fig";  // paper_fig | hover
  PaperFigureParams fig;
  Vec3 hover_point{0.0, 0.0, 5.0};
  std::shared_ptr<const Trajectory> make() const;
};

struct ScenarioConfig {
  std::string name = "paper_nominal";
  ModelKind model = ModelKind::reduced;
  PhysicalParams params;
  double eps = 0.1, kbar = 100.0, cbar = 10.0;
  FullInit full_init = FullInit::rest;
  GainSet gains;
  GainSource gain_source = GainSource::fixed;
  GainSearchOptions search;
  ControllerOptions controller;
  bool fd_dt_from_step = true;  // controller.fd_dt follows integrator.dt
  CertificateConstants certificate;
  bool auto_bounds = true;  // B, C_q sampled from the trajectory
  double eps_young = 1e-3;
  double settle_time = 10.0;
  TrajectorySpec trajectory;
  InitialSpec initial;
  DisturbanceSpec disturbance;
  IntegratorConfig integrator;
  std::vector<double> sweep_eps{0.1, 0.05, 0.025};
  std::string output_dir;  // relative to the output root; empty = scenario name
  bool write_csv = true;

  // throws ValidationError naming the dotted key
  void validate() const;
  // physical params with k, c from eps, kbar, cbar
  PhysicalParams full_params(double eps_value) const;
};

std::vector<std::string> builtin_scenarios();
// throws ValidationError("scenario.name") for unknown names
ScenarioConfig builtin_scenario(const std::string& name);

// INI text: [section] key = value. Starts from the built-in named by
// scenario.name (default paper_nominal), then applies the keys. Throws
// ConfigParseError or ValidationError.
ScenarioConfig parse_config(std::istream& in, const std::string& origin = "<input>");
ScenarioConfig load_config(const std::string& path);
// full effective configuration, loadable by parse_config
std::string config_to_ini(const ScenarioConfig& c);

struct ConfigParseError : std::runtime_error {
  std::string file;
  unsigned long line;
  ConfigParseError(const std::string& msg, std::string f, unsigned long l)
      : std::runtime_error(f + ":" + std::to_string(l) + ": " + msg), file(std::move(f)), line(l) {}
};

}  // namespace quadcable
