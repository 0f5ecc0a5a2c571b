#pragma once
#include <array>
#include <functional>
#include <memory>

#include "quadcable/state.hpp"
#include "quadcable/trajectory.hpp"

namespace quadcable {

struct GainSet {
  double kx = 600.0, kv = 600.0;   // load position
  double kR = 40.0, kOm = 20.0;    // load attitude
  double kq = 100.0, kw = 20.0;    // cables
  double kRj = 30.0, kOmj = 0.9;   // quadrotor attitude
  double eps_att = 1.0;
  void validate() const;
  GainSet scaled(double s) const;  // outer-loop gains times s
};

struct TrackingErrors {
  Vec3 ex = Vec3::Zero(), ev = Vec3::Zero(), eR = Vec3::Zero(), eOm = Vec3::Zero();
  std::array<Vec3, kCables> eq{}, ew{}, eRj{}, eOmj{};
  double psiR = 0.0;
  std::array<double, kCables> psiq{};
};

class AllocationGeometry {
 public:
  // throws AllocationInfeasible when rank(P) < 6
  explicit AllocationGeometry(const std::array<Vec3, kCables>& r);
  const Eigen::Matrix<double, 6, 12>& P() const { return P_; }
  const Eigen::Matrix<double, 6, 6>& PPt_inv() const { return PPt_inv_; }
  double lambda_min_PPt() const { return lmin_; }

 private:
  Eigen::Matrix<double, 6, 12> P_;
  Eigen::Matrix<double, 6, 6> PPt_inv_;
  double lmin_;
};

struct Wrench {
  Vec3 F, M;
};

struct LoadErrors {
  Vec3 ex, ev, eR, eOm;
  double psiR;
};
LoadErrors load_errors(const SlowState& s, const DesiredSample& d);

Wrench wrench_targets(const LoadErrors& e, const SlowState& s, const DesiredSample& d,
                      const GainSet& g, const PhysicalParams& p);

using CableVecs = std::array<Vec3, kCables>;

CableVecs mu_distribution(const Wrench& w, const Mat3& RL, const AllocationGeometry& geo);
// throws DegenerateAllocation when |mu_j| <= mu_min
CableVecs desired_cable_attitudes(const CableVecs& mu, double mu_min = 1e-6);

struct AccelEstimate {
  Vec3 vL_dot = Vec3::Zero();
  Vec3 OmL_dot = Vec3::Zero();
  // time derivatives of the above, when known
  bool has_jerk = false;
  Vec3 vL_ddot = Vec3::Zero();
  Vec3 OmL_ddot = Vec3::Zero();
};

struct CableControls {
  CableVecs mu, u_par, u_perp, u;
};
CableControls cable_controls(const SlowState& s, const TrackingErrors& e, const CableVecs& mu_tilde,
                             const CableVecs& w_tilde, const CableVecs& w_tilde_dot,
                             const GainSet& g, const PhysicalParams& p, const AccelEstimate& acc);

// b3 along u, b1 from yaw projected; throws DegenerateAttitude on zero thrust
Mat3 desired_quad_attitude(const Vec3& u, double yaw = 0.0);

Vec3 moment_control(const Mat3& R, const Vec3& Om, const Mat3& Rd, const Vec3& Omd,
                    const Vec3& Omd_dot, const GainSet& g, const PhysicalParams& p);

enum class ThrustMode { ideal, attitude };
// lagged: previous plant acceleration plus `refine` fixed-point passes;
// solved: the fixed point itself
enum class AccelMode { lagged, solved };
// load jerk for the q~ differences:
// flow: derivative of the closed-loop acceleration along the current state's
//   flow (needs ideal thrust, the acceleration then ignores u_perp);
// history: backward difference of successive plant accelerations
enum class RateMode { flow, history };

struct ControllerOptions {
  double mu_min = 1e-6;
  double fd_dt = 0.002;     // spacing of the q~ differences, also the history step
  double yaw = 0.0;
  ThrustMode thrust = ThrustMode::ideal;
  AccelMode accel = AccelMode::solved;
  RateMode rates = RateMode::flow;
  int refine = 1;  // fixed-point passes in lagged mode
  // norm caps on the differenced feedforward rates, 0 = off
  double cable_rate_limit = 10.0;
  double cable_accel_limit = 100.0;
  double att_rate_limit = 20.0;
  double att_accel_limit = 400.0;
};

struct ControlOutput {
  ControlInput input;  // what is applied to the plant
  TrackingErrors errors;
  Wrench wrench;
  CableVecs mu_tilde, q_tilde, w_tilde, w_tilde_dot, u_par, u_perp, u_cmd;
  std::array<Mat3, kCables> Rd;
  CableVecs Omd, Omd_dot;
  DesiredSample desired;
};

// Load tracking controller with quadrotor attitude inner loop. compute() is a
// pure function of its arguments and the cache; commit() advances the cache.
class GeometricController {
 public:
  GeometricController(PhysicalParams p, GainSet g, std::shared_ptr<const Trajectory> traj,
                      ControllerOptions opt = {});

  ControlOutput compute(double t, const SlowState& s, const AccelEstimate& acc) const;
  void commit(const ControlOutput& out, const AccelEstimate& acc);
  void reset();

  // one control sample, then commit. plant(t, s, u) is the load acceleration
  // the plant produces from state s under input u.
  using PlantFn = std::function<AccelEstimate(double, const SlowState&, const ControlInput&)>;
  ControlOutput step(double t, const SlowState& s, const PlantFn& plant);

  // fixed point a = plant(t, s, u_par(a)) with u_perp = 0
  AccelEstimate closed_loop_accel(double t, const SlowState& s, const PlantFn& plant,
                                  const AccelEstimate& guess = {}) const;
  void seed_acceleration(const AccelEstimate& a) { acc_last_ = a; }
  const ControllerOptions& options() const { return opt_; }

  const GainSet& gains() const { return g_; }
  const AllocationGeometry& geometry() const { return geo_; }
  const Trajectory& trajectory() const { return *traj_; }

  // desired cable directions for a load state (no cable feedback involved)
  CableVecs q_tilde_at(double t, const Vec3& x, const Vec3& v, const Mat3& R, const Vec3& Om) const;

 private:
  PhysicalParams p_;
  GainSet g_;
  std::shared_ptr<const Trajectory> traj_;
  ControllerOptions opt_;
  AllocationGeometry geo_;
  // cache
  bool have_prev_ = false, have_prev_rate_ = false;
  std::array<Mat3, kCables> Rd_prev_{};
  CableVecs Omd_prev_{};
  AccelEstimate acc_prev_{};
  AccelEstimate acc_last_{};
};

}  // namespace quadcable
