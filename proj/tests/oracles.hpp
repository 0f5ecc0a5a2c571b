#pragma once
// Shared test helpers: random states and Newton-Euler residuals written
// per body, independent of the elimination used in the library.
#include <algorithm>
#include <cmath>
#include <random>

#include "quadcable/dynamics_full.hpp"
#include "quadcable/dynamics_reduced.hpp"

namespace oracle {
using namespace quadcable;

inline Vec3 rnd_vec(std::mt19937& g, double s = 1.0) {
  std::uniform_real_distribution<double> u(-s, s);
  return Vec3(u(g), u(g), u(g));
}

inline Vec3 rnd_unit(std::mt19937& g) {
  std::normal_distribution<double> n;
  return Vec3(n(g), n(g), n(g)).normalized();
}

// cables within 60 deg of hanging straight down, so the 6x6 solve is well posed
inline SlowState rnd_slow(std::mt19937& g) {
  SlowState s;
  s.xL = rnd_vec(g, 3.0);
  s.vL = rnd_vec(g, 2.0);
  s.RL = so3_exp(rnd_vec(g, 1.0));
  s.OmL = rnd_vec(g, 1.0);
  for (int j = 0; j < kCables; ++j) {
    Vec3 q;
    do q = rnd_unit(g);
    while (q.z() > -0.5);
    s.q[j] = q;
    const Vec3 w = rnd_vec(g, 2.0);
    s.w[j] = w - w.dot(q) * q;
    s.R[j] = so3_exp(rnd_vec(g, 1.0));
    s.Om[j] = rnd_vec(g, 3.0);
  }
  return s;
}

inline FullState rnd_full(std::mt19937& g, double L) {
  FullState s(rnd_slow(g), L);
  std::uniform_real_distribution<double> u(-0.1, 0.1);
  for (int j = 0; j < kCables; ++j) {
    s.l[j] = L * (1.0 + u(g));
    s.ldot[j] = 5.0 * u(g);
  }
  return s;
}

inline ControlInput rnd_input(std::mt19937& g) {
  ControlInput in;
  for (int j = 0; j < kCables; ++j) {
    in.u[j] = rnd_vec(g, 5.0) + Vec3(0, 0, 12.0);
    in.M[j] = rnd_vec(g, 0.5);
  }
  return in;
}

struct Residuals {
  double load_force = 0.0, load_moment = 0.0, quad_force = 0.0, quad_moment = 0.0;
  double max() const { return std::max({load_force, load_moment, quad_force, quad_moment}); }
};

// Per-body balances. Tension T_j pulls quad j toward the load (+q_j) and the
// load toward quad j (-q_j). Quad accelerations from the constraint
// x_Q = x_L + R_L r - l q differentiated twice. Each residual is relative to
// the size of the largest term in its balance.
inline Residuals newton_euler(const FullState& s, const ControlInput& in, const PhysicalParams& p,
                              const std::array<double, kCables>& T, const Vec3& vdot,
                              const Vec3& Omdot, const std::array<Vec3, kCables>& wdot,
                              const std::array<double, kCables>& lddot,
                              const std::array<Vec3, kCables>& Omdot_q) {
  Residuals r;
  Vec3 F = -p.m_L * p.g * e3;
  Vec3 Mb = Vec3::Zero();
  double fscale = p.m_L * p.g, mscale = 1e-12;
  for (int j = 0; j < kCables; ++j) {
    const Vec3& q = s.q[j];
    const Vec3& w = s.w[j];
    const Vec3 qd = w.cross(q);
    const Vec3 qdd = wdot[j].cross(q) + w.cross(qd);
    const Vec3 att = s.RL * (Omdot.cross(p.r[j]) + s.OmL.cross(s.OmL.cross(p.r[j])));
    const Vec3 xQdd = vdot + att - lddot[j] * q - 2.0 * s.ldot[j] * qd - s.l[j] * qdd;
    const Vec3 quad = p.m_Q * xQdd - in.u[j] + p.m_Q * p.g * e3 - T[j] * q;
    const double qs = std::max({p.m_Q * xQdd.norm(), in.u[j].norm(), p.m_Q * p.g, std::abs(T[j])});
    r.quad_force = std::max(r.quad_force, quad.norm() / qs);
    F += -T[j] * q;
    fscale = std::max(fscale, std::abs(T[j]));
    const Vec3 mj = p.r[j].cross(s.RL.transpose() * (-T[j] * q));
    Mb += mj;
    mscale = std::max(mscale, mj.norm());
    const Vec3 JO = p.J_Q * s.Om[j];
    const Vec3 eul = p.J_Q * Omdot_q[j] + s.Om[j].cross(JO) - in.M[j];
    const double es = std::max({(p.J_Q * Omdot_q[j]).norm(), s.Om[j].cross(JO).norm(),
                                in.M[j].norm(), 1e-12});
    r.quad_moment = std::max(r.quad_moment, eul.norm() / es);
  }
  const Vec3 lin = p.m_L * vdot - F;
  r.load_force = lin.norm() / std::max(fscale, p.m_L * vdot.norm());
  const Vec3 JO = p.J_L * s.OmL;
  const Vec3 rot = p.J_L * Omdot + s.OmL.cross(JO) - Mb;
  mscale = std::max({mscale, (p.J_L * Omdot).norm(), s.OmL.cross(JO).norm()});
  r.load_moment = rot.norm() / mscale;
  return r;
}

inline Residuals full_residuals(const FullState& s, const ControlInput& in, const PhysicalParams& p,
                                const FullDerivative& d) {
  std::array<double, kCables> T, ldd;
  for (int j = 0; j < kCables; ++j) {
    T[j] = p.k * (s.l[j] - p.L) + p.c * s.ldot[j];
    ldd[j] = d.l_ddot[j];
  }
  return newton_euler(s, in, p, T, d.vL_dot, d.OmL_dot, d.w_dot, ldd, d.Om_dot);
}

// reduced model: l = L, ldot = 0, tension is whatever keeps l fixed
inline Residuals reduced_residuals(const SlowState& s, const ControlInput& in,
                                   const PhysicalParams& p, const ReducedDerivative& d,
                                   const Tensions& T) {
  const FullState f(s, p.L);
  std::array<double, kCables> ldd{};
  return newton_euler(f, in, p, T, d.vL_dot, d.OmL_dot, d.w_dot, ldd, d.Om_dot);
}

}  // namespace oracle
