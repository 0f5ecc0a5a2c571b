#pragma once
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "quadcable/errors.hpp"
#include "quadcable/state.hpp"

namespace quadcable {

enum class Scheme { rk4, euler };
enum class Retraction { lie_exp, project };

struct IntegratorConfig {
  double dt = 0.002;
  Scheme scheme = Scheme::rk4;
  Retraction retraction = Retraction::lie_exp;
  double horizon = 40.0;
  void validate() const;
  long steps() const { return std::lround(horizon / dt); }
};

// Flattened product-manifold view used by the stepper. Rotations are
// body-trivialized (Rdot = R hat(w)), sphere points move with qdot = w x q.
struct ManifoldPoint {
  std::vector<Mat3> rot;
  std::vector<Vec3> sph;
  Eigen::VectorXd euc;
};
struct ManifoldTangent {
  std::vector<Vec3> rot;
  std::vector<Vec3> sph;
  Eigen::VectorXd euc;
};

ManifoldPoint to_point(const SlowState& s);
ManifoldPoint to_point(const FullState& s);
void from_point(const ManifoldPoint& m, SlowState& s);
void from_point(const ManifoldPoint& m, FullState& s);
ManifoldTangent to_tangent(const SlowDerivative& d);
ManifoldTangent to_tangent(const FullDerivative& d);

using TangentField = std::function<ManifoldTangent(double, const ManifoldPoint&)>;

// one step on the flattened representation; no invariant repair
ManifoldPoint step_point(const ManifoldPoint& x0, const TangentField& f, double t, double dt,
                         Scheme scheme, Retraction retraction);

// renormalize q, re-project w orthogonal to q (and quadrotor rates untouched)
void repair(SlowState& s);

template <class State>
struct DerivativeOf;
template <>
struct DerivativeOf<SlowState> {
  using type = SlowDerivative;
};
template <>
struct DerivativeOf<FullState> {
  using type = FullDerivative;
};

template <class State>
using DerivativeFn = std::function<typename DerivativeOf<State>::type(double, const State&)>;

// Fixed step with zero-order-hold inputs baked into f. Throws NumericalBlowup.
template <class State>
State step(const State& x, const DerivativeFn<State>& f, double t, double dt,
           const IntegratorConfig& cfg, long step_index = 0) {
  State scratch = x;
  TangentField tf = [&](double tt, const ManifoldPoint& m) {
    from_point(m, scratch);
    ManifoldTangent k = to_tangent(f(tt, scratch));
    if (!k.euc.allFinite()) throw NumericalBlowup("non-finite derivative", step_index, tt);
    for (const auto& v : k.rot)
      if (!v.allFinite()) throw NumericalBlowup("non-finite derivative", step_index, tt);
    for (const auto& v : k.sph)
      if (!v.allFinite()) throw NumericalBlowup("non-finite derivative", step_index, tt);
    return k;
  };
  const ManifoldPoint out = step_point(to_point(x), tf, t, dt, cfg.scheme, cfg.retraction);
  State next = x;
  from_point(out, next);
  repair(next);
  return next;
}

template <class State>
struct SimHooks {
  // evaluated once per step and held over the step
  std::function<ControlInput(long, double, const State&)> control;
  std::function<typename DerivativeOf<State>::type(double, const State&, const ControlInput&)>
      dynamics;
  std::function<void(long, double, const State&, const ControlInput&)> record;
};

struct SimResult {
  long samples = 0;
  double final_time = 0.0;
  bool failed = false;
  std::string failure;
};

// Controller runs at the integration rate. On failure the last valid time is
// kept in the result and the exception is rethrown when rethrow is set.
template <class State>
SimResult simulate(const State& x0, const SimHooks<State>& hooks, const IntegratorConfig& cfg,
                   bool rethrow = true) {
  cfg.validate();
  SimResult res;
  State x = x0;
  const long N = cfg.horizon > 0.0 ? cfg.steps() : 0;
  for (long k = 0; k <= N; ++k) {
    const double t = k * cfg.dt;
    ControlInput u;
    try {
      u = hooks.control(k, t, x);
      if (hooks.record) hooks.record(k, t, x, u);
      res.samples = k + 1;
      res.final_time = t;
      if (k == N) break;
      DerivativeFn<State> f = [&](double tt, const State& s) { return hooks.dynamics(tt, s, u); };
      x = step<State>(x, f, t, cfg.dt, cfg, k);
    } catch (const std::exception& e) {
      res.failed = true;
      res.failure = e.what();
      if (rethrow) throw;
      break;
    }
  }
  return res;
}

}  // namespace quadcable
