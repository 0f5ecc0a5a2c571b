#include "quadcable/dynamics_full.hpp"

#include <cmath>
#include <functional>

#include "quadcable/errors.hpp"

namespace quadcable {

using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;

namespace detail {

Vec3 quad_angular_accel(const Vec3& Om, const Vec3& M, const PhysicalParams& p) {
  return p.J_Q.ldlt().solve((p.J_Q * Om).cross(Om) + M);
}

Vec3 attach_accel(const Mat3& RL, const Vec3& OmL, const Vec3& OmL_dot, const Vec3& r) {
  return RL * (OmL.cross(OmL.cross(r)) + OmL_dot.cross(r));
}

Vec6 solve_checked(const Mat6& A, const Vec6& b) {
  Eigen::JacobiSVD<Mat6> svd(A, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  if (!(sv(5) > 0.0) || sv(0) / sv(5) > 1e12)
    throw SingularConfiguration("load acceleration system is singular");
  return svd.solve(b);
}

}  // namespace detail

std::array<Vec3, kCables> quad_positions(const FullState& s, const PhysicalParams& p) {
  std::array<Vec3, kCables> x;
  for (int j = 0; j < kCables; ++j) x[j] = s.xL + s.RL * p.r[j] - s.l[j] * s.q[j];
  return x;
}

std::array<Vec3, kCables> quad_velocities(const FullState& s, const PhysicalParams& p) {
  std::array<Vec3, kCables> v;
  for (int j = 0; j < kCables; ++j)
    v[j] = s.vL + s.RL * s.OmL.cross(p.r[j]) - s.ldot[j] * s.q[j] -
           s.l[j] * s.w[j].cross(s.q[j]);
  return v;
}

namespace {

struct CableAccel {
  double l_ddot;
  Vec3 w_dot;
  Vec3 zeta_ddot;
};

// Cable length and direction dynamics for given load accelerations.
CableAccel cable_accel(const FullState& s, const ControlInput& in, const PhysicalParams& p,
                       const Tensions& T, int j, const Vec3& vdot, const Vec3& Omdot) {
  const Vec3& q = s.q[j];
  const Vec3& w = s.w[j];
  const double l = s.l[j], ld = s.ldot[j];
  const Vec3 A = vdot + detail::attach_accel(s.RL, s.OmL, Omdot, p.r[j]) + p.g * e3 -
                 in.u[j] / p.m_Q;
  CableAccel c;
  c.l_ddot = q.dot(A) + l * w.squaredNorm() - T[j] / p.m_Q;
  c.w_dot = (q.cross(A) - 2.0 * ld * w) / l;
  c.zeta_ddot = c.l_ddot * q + 2.0 * ld * w.cross(q) + l * (c.w_dot.cross(q) - w.squaredNorm() * q);
  return c;
}

FullDerivative assemble(const FullState& s, const ControlInput& in, const PhysicalParams& p,
                        const Tensions& T) {
  for (int j = 0; j < kCables; ++j)
    if (!(s.l[j] > 0.0)) throw InvalidState("cable length must be positive");

  const double meff = p.m_eff();
  const Mat3 Jeff = p.J_eff();
  // load force and moment balances, affine in (vdot, Omdot)
  auto residual = [&](const Vec3& vdot, const Vec3& Omdot) {
    Vec3 f = meff * (vdot + p.g * e3);
    Vec3 m = Jeff * Omdot + s.OmL.cross(Jeff * s.OmL);
    for (int j = 0; j < kCables; ++j) {
      const Vec3 zdd = cable_accel(s, in, p, T, j, vdot, Omdot).zeta_ddot;
      f -= in.u[j] + p.m_Q * zdd - p.m_Q * detail::attach_accel(s.RL, s.OmL, Omdot, p.r[j]);
      m -= p.m_Q * hat(p.r[j]) * s.RL.transpose() * (-p.g * e3 - vdot + zdd + in.u[j] / p.m_Q);
    }
    Vec6 out;
    out << f, m;
    return out;
  };

  const Vec6 r0 = residual(Vec3::Zero(), Vec3::Zero());
  Mat6 A;
  for (int i = 0; i < 6; ++i) {
    Vec6 x = Vec6::Zero();
    x(i) = 1.0;
    A.col(i) = residual(x.head<3>(), x.tail<3>()) - r0;
  }
  const Vec6 sol = detail::solve_checked(A, -r0);

  FullDerivative d;
  d.xL_dot = s.vL;
  d.vL_dot = sol.head<3>();
  d.RL_rate = s.OmL;
  d.OmL_dot = sol.tail<3>();
  for (int j = 0; j < kCables; ++j) {
    const CableAccel c = cable_accel(s, in, p, T, j, d.vL_dot, d.OmL_dot);
    d.q_dot[j] = s.w[j].cross(s.q[j]);
    d.w_dot[j] = c.w_dot;
    d.l_dot[j] = s.ldot[j];
    d.l_ddot[j] = c.l_ddot;
    d.R_rate[j] = s.Om[j];
    d.Om_dot[j] = detail::quad_angular_accel(s.Om[j], in.M[j], p);
  }
  return d;
}

}  // namespace

FullDerivative full_accelerations(const FullState& s, const ControlInput& in,
                                  const PhysicalParams& p) {
  Tensions T;
  for (int j = 0; j < kCables; ++j) T[j] = p.k * (s.l[j] - p.L) + p.c * s.ldot[j];
  return assemble(s, in, p, T);
}

FullDerivative full_accelerations_with_tension(const FullState& s, const ControlInput& in,
                                               const PhysicalParams& p, const Tensions& T) {
  return assemble(s, in, p, T);
}

double total_energy(const FullState& s, const PhysicalParams& p) {
  const auto xq = quad_positions(s, p);
  const auto vq = quad_velocities(s, p);
  double K = 0.5 * p.m_L * s.vL.squaredNorm() + 0.5 * s.OmL.dot(p.J_L * s.OmL);
  double U = p.m_L * p.g * s.xL.z();
  for (int j = 0; j < kCables; ++j) {
    K += 0.5 * p.m_Q * vq[j].squaredNorm() + 0.5 * s.Om[j].dot(p.J_Q * s.Om[j]);
    U += p.m_Q * p.g * xq[j].z() + 0.5 * p.k * (p.L - s.l[j]) * (p.L - s.l[j]);
  }
  return K + U;
}

Vec3 linear_momentum(const FullState& s, const PhysicalParams& p) {
  const auto vq = quad_velocities(s, p);
  Vec3 P = p.m_L * s.vL;
  for (const auto& v : vq) P += p.m_Q * v;
  return P;
}

}  // namespace quadcable
