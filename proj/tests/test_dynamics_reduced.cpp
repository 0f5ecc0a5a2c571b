#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "quadcable/errors.hpp"

using namespace quadcable;
using oracle::rnd_input;
using oracle::rnd_slow;

namespace {
ControlInput hover_input(const PhysicalParams& p) {
  ControlInput in;
  for (auto& u : in.u) u = (p.m_Q + p.m_L / 4.0) * p.g * e3;
  return in;
}

// tension from the quad's balance along its cable with l fixed
Tensions tension_oracle(const SlowState& s, const ControlInput& in, const PhysicalParams& p,
                        const ReducedDerivative& d) {
  Tensions T;
  for (int j = 0; j < kCables; ++j) {
    const Vec3& q = s.q[j];
    const Vec3 qd = s.w[j].cross(q);
    const Vec3 qdd = d.w_dot[j].cross(q) + s.w[j].cross(qd);
    const Vec3 att = s.RL * (d.OmL_dot.cross(p.r[j]) + s.OmL.cross(s.OmL.cross(p.r[j])));
    const Vec3 xQdd = d.vL_dot + att - p.L * qdd;
    T[j] = q.dot(p.m_Q * xQdd - in.u[j] + p.m_Q * p.g * e3);
  }
  return T;
}
}  // namespace

TEST_CASE("hover equilibrium") {
  const PhysicalParams p;
  SlowState s;
  s.xL = Vec3(1, 2, 3);
  const ReducedDerivative d = reduced_derivative(s, hover_input(p), p);
  CHECK(d.vL_dot.norm() < 1e-12);
  CHECK(d.OmL_dot.norm() < 1e-12);
  for (int j = 0; j < kCables; ++j) CHECK(d.w_dot[j].norm() < 1e-12);
}

TEST_CASE("reduced accelerations satisfy per-body balances") {
  std::mt19937 g(21);
  const PhysicalParams p;
  for (int i = 0; i < 300; ++i) {
    const SlowState s = rnd_slow(g);
    const ControlInput in = rnd_input(g);
    const ReducedDerivative d = reduced_derivative(s, in, p);
    const Tensions T = tension_oracle(s, in, p, d);
    CHECK(oracle::reduced_residuals(s, in, p, d, T).max() < 1e-9);
    const Tensions Tl = reduced_tensions(s, in, p, d);
    for (int j = 0; j < kCables; ++j) {
      CHECK(std::abs(Tl[j] - T[j]) < 1e-9 * (1.0 + std::abs(T[j])));
      CHECK(std::abs(s.q[j].dot(d.w_dot[j])) < 1e-10);
    }
  }
}

TEST_CASE("full model at constraint tension reproduces the reduced one") {
  std::mt19937 g(22);
  PhysicalParams p;
  p.k = 1e4;
  for (int i = 0; i < 100; ++i) {
    const SlowState s = rnd_slow(g);
    const ControlInput in = rnd_input(g);
    const ReducedDerivative d = reduced_derivative(s, in, p);
    const FullState f(s, p.L);
    const FullDerivative fd = full_accelerations_with_tension(f, in, p, reduced_tensions(s, in, p, d));
    CHECK((fd.vL_dot - d.vL_dot).norm() < 1e-8);
    CHECK((fd.OmL_dot - d.OmL_dot).norm() < 1e-8);
    for (int j = 0; j < kCables; ++j) {
      CHECK((fd.w_dot[j] - d.w_dot[j]).norm() < 1e-8);
      CHECK(std::abs(fd.l_ddot[j]) < 1e-8);
    }
  }
}

TEST_CASE("cable accelerations from load_accel_of") {
  std::mt19937 g(23);
  const PhysicalParams p;
  const SlowState s = rnd_slow(g);
  const ReducedDerivative d = reduced_derivative(s, rnd_input(g), p);
  const LoadAccel a = load_accel_of(s, d);
  // second derivative of q along the flow, by differences of qdot = w x q
  const double h = 1e-6;
  for (int j = 0; j < kCables; ++j) {
    auto qdot = [&](double t) {
      const Vec3 w = s.w[j] + t * d.w_dot[j];
      return Vec3(w.cross(so3_exp(t * s.w[j]) * s.q[j]));
    };
    CHECK(((qdot(h) - qdot(-h)) / (2 * h) - a.q_ddot[j]).norm() < 1e-6);
  }
}

TEST_CASE("slow manifold at hover is the static stretch") {
  const PhysicalParams p;
  SlowState s;
  const ControlInput in = hover_input(p);
  const double kbar = 100.0;
  const LoadAccel a = load_accel_of(s, reduced_derivative(s, in, p));
  const FastVars f = slow_manifold(s, in, a, p, kbar);
  // spring force kbar*y must carry a quarter of the load weight
  for (int j = 0; j < kCables; ++j) {
    CHECK(f.y[j] == doctest::Approx(p.m_L * p.g / 4.0 / kbar));
    CHECK(f.z[j] == 0.0);
  }
  CHECK(std::abs(slow_manifold(s, in, a, p, 1e12).y[0]) < 1e-10);
}

TEST_CASE("slow manifold stretch is linear in the supported weight") {
  const double kbar = 50.0;
  auto y_for = [&](double mL) {
    PhysicalParams p;
    p.m_L = mL;
    SlowState s;
    const ControlInput in = hover_input(p);
    return slow_manifold(s, in, load_accel_of(s, reduced_derivative(s, in, p)), p, kbar).y[0];
  };
  const double slope = (y_for(3.0) - y_for(1.0)) / 2.0;
  CHECK(slope == doctest::Approx(9.81 / 4.0 / kbar));
  CHECK(y_for(2.0) == doctest::Approx(y_for(1.0) + slope));
  CHECK_THROWS_AS(slow_manifold(SlowState{}, ControlInput{}, LoadAccel{}, PhysicalParams{}, 0.0),
                  InvalidArgument);
}

TEST_CASE("boundary layer") {
  const PhysicalParams p;
  BoundaryLayer zero{};
  for (auto& r : zero) r.setZero();
  for (const auto& r : boundary_layer_derivative(zero, p, 100, 10)) CHECK(r.norm() == 0.0);

  for (double kbar : {1.0, 100.0, 1e4})
    for (double cbar : {0.1, 10.0}) {
      const Eigen::EigenSolver<Eigen::Matrix2d> es(boundary_layer_matrix(p, kbar, cbar));
      CHECK(es.eigenvalues().real().maxCoeff() < 0.0);
    }

  // decay along a simulated stretched-time trajectory, exponential fit
  BoundaryLayer r;
  for (int j = 0; j < kCables; ++j) r[j] = Eigen::Vector2d(1.0 + j, -0.5);
  const double h = 1e-3;
  std::vector<double> logs, taus;
  for (int k = 0; k <= 4000; ++k) {
    if (k % 200 == 0 && k > 0) {
      double n = 0.0;
      for (const auto& v : r) n += v.squaredNorm();
      logs.push_back(0.5 * std::log(n));
      taus.push_back(k * h);
    }
    const BoundaryLayer k1 = boundary_layer_derivative(r, p, 100, 10);
    BoundaryLayer t2 = r, t3 = r, t4 = r;
    for (int j = 0; j < kCables; ++j) t2[j] += 0.5 * h * k1[j];
    const BoundaryLayer k2 = boundary_layer_derivative(t2, p, 100, 10);
    for (int j = 0; j < kCables; ++j) t3[j] += 0.5 * h * k2[j];
    const BoundaryLayer k3 = boundary_layer_derivative(t3, p, 100, 10);
    for (int j = 0; j < kCables; ++j) t4[j] += h * k3[j];
    const BoundaryLayer k4 = boundary_layer_derivative(t4, p, 100, 10);
    for (int j = 0; j < kCables; ++j) r[j] += h / 6 * (k1[j] + 2 * k2[j] + 2 * k3[j] + k4[j]);
  }
  // least-squares slope of log|r| against tau
  double mt = 0, ml = 0;
  for (size_t i = 0; i < taus.size(); ++i) mt += taus[i], ml += logs[i];
  mt /= taus.size();
  ml /= taus.size();
  double num = 0, den = 0;
  for (size_t i = 0; i < taus.size(); ++i) {
    num += (taus[i] - mt) * (logs[i] - ml);
    den += (taus[i] - mt) * (taus[i] - mt);
  }
  CHECK(-num / den > 0.5);
}

TEST_CASE("embed and extract") {
  std::mt19937 g(24);
  const SlowState s = rnd_slow(g);
  FastVars f;
  f.eps = 0.1;
  FullState x = embed_reduced_in_full(s, f, 1.0);
  for (int j = 0; j < kCables; ++j) {
    CHECK(x.l[j] == 1.0);
    CHECK(x.ldot[j] == 0.0);
  }
  f.y = {-2.0, 0.5, 1.0, 3.0};
  f.z = {0.1, -0.2, 0.3, 0.0};
  x = embed_reduced_in_full(s, f, 1.0);
  CHECK(x.l[0] == doctest::Approx(0.98));
  const FastVars back = extract_fast(x, 0.1, 1.0);
  for (int j = 0; j < kCables; ++j) {
    CHECK(back.y[j] == doctest::Approx(f.y[j]));
    CHECK(back.z[j] == doctest::Approx(f.z[j]));
  }
  const SlowState s2 = extract_slow(x);
  CHECK((s2.xL - s.xL).norm() == 0.0);
  CHECK((s2.q[3] - s.q[3]).norm() == 0.0);
  f.y[0] = -1000.0;
  CHECK_THROWS_AS(embed_reduced_in_full(s, f, 1.0), InvalidArgument);
}
