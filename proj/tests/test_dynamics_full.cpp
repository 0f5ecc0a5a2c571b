#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "quadcable/errors.hpp"
#include "quadcable/integrator.hpp"

using namespace quadcable;
using oracle::rnd_full;
using oracle::rnd_input;

namespace {
PhysicalParams elastic(double k, double c) {
  PhysicalParams p;
  p.k = k;
  p.c = c;
  return p;
}

FullState flow(const FullState& s, double h) {
  FullState o = s;
  o.xL += h * s.vL;
  o.RL = s.RL * so3_exp(h * s.OmL);
  for (int j = 0; j < kCables; ++j) {
    o.q[j] = so3_exp(h * s.w[j]) * s.q[j];
    o.l[j] += h * s.ldot[j];
  }
  return o;
}
}  // namespace

TEST_CASE("quad_positions examples") {
  PhysicalParams p;
  FullState s;
  s.q.fill(-e3);
  s.l.fill(1.0);
  CHECK((quad_positions(s, p)[0] - Vec3(0.5, 1.0, 1.1)).norm() < 1e-15);
  s.q.fill(e3);
  for (int j = 0; j < kCables; ++j)
    CHECK((quad_positions(s, p)[j] - (p.r[j] - e3)).norm() < 1e-15);
  s.q.fill(-e3);
  const auto a = quad_positions(s, p);
  s.RL = so3_exp(3.14159265358979323846 * e3);
  const auto b = quad_positions(s, p);
  for (int j = 0; j < kCables; ++j) {
    CHECK(b[j].x() == doctest::Approx(-a[j].x()));
    CHECK(b[j].y() == doctest::Approx(-a[j].y()));
    CHECK(b[j].z() == doctest::Approx(a[j].z()));
  }
}

TEST_CASE("quad velocity is the derivative of the constraint") {
  std::mt19937 g(11);
  const PhysicalParams p = elastic(500, 2);
  for (int i = 0; i < 50; ++i) {
    const FullState s = rnd_full(g, p.L);
    const double h = 1e-6;
    const auto xp = quad_positions(flow(s, h), p), xm = quad_positions(flow(s, -h), p);
    const auto v = quad_velocities(s, p);
    for (int j = 0; j < kCables; ++j) CHECK(((xp[j] - xm[j]) / (2 * h) - v[j]).norm() < 1e-7);
  }
}

TEST_CASE("static equilibrium gives zero accelerations") {
  const PhysicalParams p = elastic(2000, 5);
  // independent balance: each cable carries a quarter of the load weight
  const double T = p.m_L * p.g / 4.0;
  FullState s;
  s.xL = Vec3(0.3, -1.0, 2.0);
  s.q.fill(-e3);
  s.l.fill(p.L + T / p.k);
  ControlInput in;
  for (auto& u : in.u) u = (p.m_Q * p.g + T) * e3;
  const FullDerivative d = full_accelerations(s, in, p);
  CHECK(d.vL_dot.norm() < 1e-9);
  CHECK(d.OmL_dot.norm() < 1e-9);
  for (int j = 0; j < kCables; ++j) {
    CHECK(std::abs(d.l_ddot[j]) < 1e-9);
    CHECK(d.w_dot[j].norm() < 1e-9);
    CHECK(d.Om_dot[j].norm() < 1e-9);
  }
}

TEST_CASE("accelerations satisfy per-body Newton-Euler balances") {
  std::mt19937 g(12);
  const PhysicalParams p = elastic(800, 3);
  for (int i = 0; i < 200; ++i) {
    const FullState s = rnd_full(g, p.L);
    const ControlInput in = rnd_input(g);
    const FullDerivative d = full_accelerations(s, in, p);
    CHECK(oracle::full_residuals(s, in, p, d).max() < 1e-9);
    for (int j = 0; j < kCables; ++j) CHECK(std::abs(s.q[j].dot(d.w_dot[j])) < 1e-9);
  }
}

TEST_CASE("given-tension variant matches the spring law") {
  std::mt19937 g(13);
  const PhysicalParams p = elastic(800, 3);
  const FullState s = rnd_full(g, p.L);
  const ControlInput in = rnd_input(g);
  Tensions T;
  for (int j = 0; j < kCables; ++j) T[j] = p.k * (s.l[j] - p.L) + p.c * s.ldot[j];
  const FullDerivative a = full_accelerations(s, in, p);
  const FullDerivative b = full_accelerations_with_tension(s, in, p, T);
  CHECK((a.vL_dot - b.vL_dot).norm() < 1e-12);
  CHECK((a.OmL_dot - b.OmL_dot).norm() < 1e-12);
}

TEST_CASE("w stays orthogonal to q under the exact flow") {
  std::mt19937 g(14);
  const PhysicalParams p = elastic(800, 3);
  for (int i = 0; i < 50; ++i) {
    const FullState s = rnd_full(g, p.L);
    const FullDerivative d = full_accelerations(s, rnd_input(g), p);
    for (int j = 0; j < kCables; ++j) {
      // d/dt (q.w) = qdot.w + q.wdot
      CHECK(std::abs(d.q_dot[j].dot(s.w[j]) + s.q[j].dot(d.w_dot[j])) < 1e-9);
    }
  }
}

TEST_CASE("free quadrotor spinning about a principal axis keeps its rate") {
  std::mt19937 g(15);
  const PhysicalParams p = elastic(800, 3);
  FullState s = rnd_full(g, p.L);
  ControlInput in = rnd_input(g);
  for (int j = 0; j < kCables; ++j) {
    s.Om[j] = Vec3(0, 0, 3.0 + j);
    in.M[j].setZero();
  }
  const FullDerivative d = full_accelerations(s, in, p);
  for (int j = 0; j < kCables; ++j) CHECK(d.Om_dot[j].norm() < 1e-12);
}

TEST_CASE("energy bookkeeping") {
  PhysicalParams p = elastic(1000, 0);
  FullState s;
  s.q.fill(-e3);
  const double E0 = total_energy(s, p);
  // gravity only: load at 0, quads at r_z + L
  double U = 0.0;
  for (const auto& r : p.r) U += p.m_Q * p.g * (r.z() + p.L);
  CHECK(E0 == doctest::Approx(U));
  s.l[2] = p.L + 0.1;
  // stretching lifts the quad as well
  CHECK(total_energy(s, p) - E0 == doctest::Approx(0.5 * p.k * 0.01 + p.m_Q * p.g * 0.1));
}

TEST_CASE("undamped unforced model conserves energy (1 s, dt 1e-4)") {
  std::mt19937 g(16);
  const PhysicalParams p = elastic(1000, 0);
  FullState s = rnd_full(g, p.L);
  const ControlInput in;
  IntegratorConfig ic;
  ic.dt = 1e-4;
  const DerivativeFn<FullState> f = [&](double, const FullState& x) {
    return full_accelerations(x, in, p);
  };
  const double E0 = total_energy(s, p);
  double worst = 0.0;
  for (long k = 0; k < 10000; ++k) {
    s = step<FullState>(s, f, k * ic.dt, ic.dt, ic, k);
    if (k % 100 == 0) worst = std::max(worst, std::abs(total_energy(s, p) - E0) / std::abs(E0));
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("zero gravity keeps linear momentum (0.5 s)") {
  std::mt19937 g(17);
  PhysicalParams p = elastic(1000, 4);
  p.g = 0.0;
  FullState s = rnd_full(g, p.L);
  const ControlInput in;
  IntegratorConfig ic;
  ic.dt = 1e-4;
  const DerivativeFn<FullState> f = [&](double, const FullState& x) {
    return full_accelerations(x, in, p);
  };
  const Vec3 P0 = linear_momentum(s, p);
  for (long k = 0; k < 5000; ++k) s = step<FullState>(s, f, k * ic.dt, ic.dt, ic, k);
  CHECK((linear_momentum(s, p) - P0).norm() / P0.norm() < 1e-8);
}

TEST_CASE("bad lengths and singular systems are rejected") {
  const PhysicalParams p = elastic(1000, 0);
  FullState s;
  s.l[1] = 0.0;
  CHECK_THROWS_AS(full_accelerations(s, ControlInput{}, p), InvalidState);
  Eigen::Matrix<double, 6, 6> A = Eigen::Matrix<double, 6, 6>::Identity();
  A(5, 5) = 0.0;
  CHECK_THROWS_AS(detail::solve_checked(A, Eigen::Matrix<double, 6, 1>::Ones()),
                  SingularConfiguration);
}
