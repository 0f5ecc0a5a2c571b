#include <cmath>
#include <cstring>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "quadcable/integrator.hpp"

using namespace quadcable;

namespace {
const double kPi = 3.14159265358979323846;

// torque-free rigid body: R' = R hat(W), W' = J^-1 (J W x W)
const Mat3 kJ = Eigen::Vector3d(1.0, 2.0, 3.5).asDiagonal();

ManifoldTangent free_body(double, const ManifoldPoint& x) {
  ManifoldTangent k;
  const Vec3 W = x.euc.head<3>();
  k.rot = {W};
  k.euc = kJ.inverse() * (kJ * W).cross(W);
  return k;
}

ManifoldPoint body_start() {
  ManifoldPoint x;
  x.rot = {so3_exp(Vec3(0.2, -0.4, 0.1))};
  x.euc = Vec3(0.3, 1.5, -0.4);  // near the unstable middle axis, so the motion is not trivial
  return x;
}

ManifoldPoint run(ManifoldPoint x, const TangentField& f, double T, int n, Scheme s, Retraction r) {
  const double h = T / n;
  for (int k = 0; k < n; ++k) x = step_point(x, f, k * h, h, s, r);
  return x;
}

double dist(const ManifoldPoint& a, const ManifoldPoint& b) {
  double d = (a.euc - b.euc).norm();
  for (size_t i = 0; i < a.rot.size(); ++i) d = std::max(d, (a.rot[i] - b.rot[i]).norm());
  for (size_t i = 0; i < a.sph.size(); ++i) d = std::max(d, (a.sph[i] - b.sph[i]).norm());
  return d;
}

// a cable swinging under a time-varying rate; sphere slot carries qdot
ManifoldTangent swing(double t, const ManifoldPoint& x) {
  ManifoldTangent k;
  const Vec3 w(std::sin(2 * t), 1.0, 0.5 * t);
  k.sph = {w.cross(x.sph[0])};
  k.euc = Eigen::VectorXd(0);
  return k;
}

SimHooks<SlowState> still_hooks() {
  SimHooks<SlowState> h;
  h.control = [](long, double, const SlowState&) { return ControlInput{}; };
  h.dynamics = [](double, const SlowState& s, const ControlInput&) {
    SlowDerivative d;
    d.xL_dot = d.vL_dot = d.OmL_dot = d.RL_rate = Vec3::Zero();
    for (int j = 0; j < kCables; ++j) {
      d.q_dot[j] = d.w_dot[j] = d.R_rate[j] = d.Om_dot[j] = Vec3::Zero();
    }
    (void)s;
    return d;
  };
  return h;
}
}  // namespace

TEST_CASE("constant body rate reaches exp(pi e3)") {
  ManifoldPoint x;
  x.rot = {Mat3::Identity()};
  x.sph = {e1};
  x.euc = Eigen::VectorXd(0);
  const TangentField f = [](double, const ManifoldPoint& m) {
    ManifoldTangent k;
    k.rot = {e3};
    k.sph = {e3.cross(m.sph[0])};
    k.euc = Eigen::VectorXd(0);
    return k;
  };
  Mat3 want;
  want << -1, 0, 0, 0, -1, 0, 0, 0, 1;
  for (Scheme s : {Scheme::rk4, Scheme::euler}) {
    const ManifoldPoint y = run(x, f, kPi, 100, s, Retraction::lie_exp);
    CHECK((y.rot[0] - want).norm() < 1e-10);
    CHECK((y.sph[0] + e1).norm() < 1e-10);
  }
}

TEST_CASE("RK4 is fourth order on a free rigid body") {
  const ManifoldPoint x0 = body_start();
  const TangentField f = free_body;
  for (Retraction r : {Retraction::lie_exp, Retraction::project}) {
    const ManifoldPoint ref = run(x0, f, 2.0, 3200, Scheme::rk4, r);
    const double e1 = dist(run(x0, f, 2.0, 50, Scheme::rk4, r), ref);
    const double e2 = dist(run(x0, f, 2.0, 100, Scheme::rk4, r), ref);
    CHECK(e1 / e2 > 12.0);
    CHECK(e1 / e2 < 20.0);
  }
  // explicit Euler as a control
  const ManifoldPoint ref = run(x0, f, 2.0, 3200, Scheme::rk4, Retraction::lie_exp);
  const double e1 = dist(run(x0, f, 2.0, 400, Scheme::euler, Retraction::lie_exp), ref);
  const double e2 = dist(run(x0, f, 2.0, 800, Scheme::euler, Retraction::lie_exp), ref);
  CHECK(e1 / e2 > 1.7);
  CHECK(e1 / e2 < 2.3);
}

TEST_CASE("sphere component is fourth order with a time-varying rate") {
  ManifoldPoint x;
  x.sph = {Vec3(0.3, -0.2, -0.9).normalized()};
  x.euc = Eigen::VectorXd(0);
  const ManifoldPoint ref = run(x, swing, 1.5, 4000, Scheme::rk4, Retraction::lie_exp);
  const double e1 = dist(run(x, swing, 1.5, 20, Scheme::rk4, Retraction::lie_exp), ref);
  const double e2 = dist(run(x, swing, 1.5, 40, Scheme::rk4, Retraction::lie_exp), ref);
  CHECK(e1 / e2 > 12.0);
  CHECK(e1 / e2 < 20.0);
}

TEST_CASE("invariants hold along long runs") {
  const TangentField f = free_body;
  for (Retraction r : {Retraction::lie_exp, Retraction::project}) {
    ManifoldPoint x = body_start();
    const double E0 = 0.5 * x.euc.head<3>().dot(kJ * x.euc.head<3>());
    for (int k = 0; k < 5000; ++k) x = step_point(x, f, k * 0.01, 0.01, Scheme::rk4, r);
    const Mat3& R = x.rot[0];
    CHECK((R.transpose() * R - Mat3::Identity()).norm() < 1e-12);
    CHECK(std::abs(R.determinant() - 1.0) < 1e-12);
    const double E = 0.5 * x.euc.head<3>().dot(kJ * x.euc.head<3>());
    CHECK(std::abs(E - E0) / E0 < 1e-6);
  }
}

TEST_CASE("zero derivative leaves the state untouched") {
  SlowState s;
  s.xL = Vec3(1, 2, 3);
  s.RL = so3_exp(Vec3(0.1, 0.2, 0.3));
  const SimHooks<SlowState> h = still_hooks();
  const DerivativeFn<SlowState> f = [&](double t, const SlowState& x) {
    return h.dynamics(t, x, ControlInput{});
  };
  IntegratorConfig ic;
  SlowState y = s;
  for (long k = 0; k < 100; ++k) y = step<SlowState>(y, f, k * ic.dt, ic.dt, ic, k);
  CHECK(y.xL == s.xL);
  CHECK(y.RL == s.RL);
  for (int j = 0; j < kCables; ++j) CHECK(y.q[j] == s.q[j]);
}

TEST_CASE("sample counts") {
  const SimHooks<SlowState> base = still_hooks();
  long recorded = 0;
  double last = -1;
  SimHooks<SlowState> h = base;
  h.record = [&](long, double t, const SlowState&, const ControlInput&) {
    ++recorded;
    last = t;
  };
  IntegratorConfig ic;
  ic.horizon = 40.0;
  ic.dt = 0.002;
  SimResult r = simulate(SlowState{}, h, ic);
  CHECK(r.samples == 20001);
  CHECK(recorded == 20001);
  CHECK(last == doctest::Approx(40.0));
  CHECK_FALSE(r.failed);
  ic.horizon = 0.0;
  recorded = 0;
  r = simulate(SlowState{}, h, ic);
  CHECK(r.samples == 1);
  CHECK(recorded == 1);
  CHECK(r.final_time == 0.0);
}

TEST_CASE("simulation is deterministic") {
  std::mt19937 g(41);
  const SlowState s0 = oracle::rnd_slow(g);
  const PhysicalParams p;
  SimHooks<SlowState> h;
  h.control = [](long, double t, const SlowState&) {
    ControlInput in;
    for (int j = 0; j < kCables; ++j) in.u[j] = Vec3(0.1 * std::sin(t), 0.0, 12.0 + j);
    return in;
  };
  h.dynamics = [&](double, const SlowState& s, const ControlInput& u) {
    return reduced_derivative(s, u, p);
  };
  std::vector<double> a, b;
  auto rec = [](std::vector<double>& out) {
    return [&out](long, double, const SlowState& s, const ControlInput&) {
      out.insert(out.end(), s.xL.data(), s.xL.data() + 3);
      out.insert(out.end(), s.q[2].data(), s.q[2].data() + 3);
    };
  };
  IntegratorConfig ic;
  ic.horizon = 0.5;
  ic.dt = 1e-3;
  h.record = rec(a);
  simulate(s0, h, ic);
  h.record = rec(b);
  simulate(s0, h, ic);
  REQUIRE(a.size() == b.size());
  CHECK(std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0);
}

TEST_CASE("blow-up is reported with the last valid time") {
  SimHooks<SlowState> h = still_hooks();
  const auto zero = h.dynamics;
  h.dynamics = [zero](double t, const SlowState& s, const ControlInput& u) {
    SlowDerivative d = zero(t, s, u);
    if (t > 0.0105) d.vL_dot.x() = std::nan("");
    return d;
  };
  IntegratorConfig ic;
  ic.dt = 0.001;
  ic.horizon = 1.0;
  const SimResult r = simulate(SlowState{}, h, ic, false);
  CHECK(r.failed);
  CHECK(r.final_time == doctest::Approx(0.010));
  CHECK(r.failure.find("non-finite") != std::string::npos);
  try {
    simulate(SlowState{}, h, ic, true);
    FAIL("expected NumericalBlowup");
  } catch (const NumericalBlowup& e) {
    CHECK(e.step == 10);
  }
}

TEST_CASE("repair normalizes cables and removes the radial rate") {
  SlowState s;
  s.q[1] = Vec3(0.0, 0.0, -1.1);
  s.w[1] = Vec3(0.3, 0.0, 0.5);
  s.Om[1] = Vec3(1, 2, 3);
  repair(s);
  CHECK((s.q[1] + e3).norm() < 1e-15);
  CHECK((s.w[1] - Vec3(0.3, 0, 0)).norm() < 1e-15);
  CHECK(s.Om[1] == Vec3(1, 2, 3));
}

TEST_CASE("integrator config validation") {
  IntegratorConfig ic;
  CHECK_NOTHROW(ic.validate());
  ic.dt = 0.0;
  CHECK_THROWS_AS(ic.validate(), ValidationError);
  ic = IntegratorConfig{};
  ic.horizon = -1.0;
  CHECK_THROWS_AS(ic.validate(), ValidationError);
  ic = IntegratorConfig{};
  ic.horizon = 1e-4;
  CHECK_THROWS_AS(ic.validate(), ValidationError);
}
