#include "quadcable/dynamics_reduced.hpp"

#include "quadcable/errors.hpp"

namespace quadcable {

using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;

ReducedDerivative reduced_derivative(const ReducedState& s, const ControlInput& in,
                                     const PhysicalParams& p) {
  return reduced_derivative(s, in, p, LoadDisturbance{});
}

ReducedDerivative reduced_derivative(const ReducedState& s, const ControlInput& in,
                                     const PhysicalParams& p, const LoadDisturbance& dist) {
  std::array<Vec3, kCables> upar, dq_t;
  std::array<Mat3, kCables> Pq;
  for (int j = 0; j < kCables; ++j) {
    Pq[j] = s.q[j] * s.q[j].transpose();
    upar[j] = Pq[j] * in.u[j];
    dq_t[j] = dist.dq[j] - Pq[j] * dist.dq[j];
  }

  Mat3 ML = p.m_L * Mat3::Identity();
  for (int j = 0; j < kCables; ++j) ML += p.m_Q * Pq[j];

  // translational and rotational balances written with only the parallel
  // thrust components, affine in (vdot, Omdot)
  auto residual = [&](const Vec3& vdot, const Vec3& Omdot) {
    Vec3 f = ML * (vdot + p.g * e3) - dist.dx;
    Vec3 m = p.J_L * Omdot + s.OmL.cross(p.J_L * s.OmL) - dist.dR;
    for (int j = 0; j < kCables; ++j) {
      const Vec3 ar = detail::attach_accel(s.RL, s.OmL, Omdot, p.r[j]);
      const double w2 = s.w[j].squaredNorm();
      const Vec3 dqq = p.L * dq_t[j].cross(s.q[j]);
      f -= upar[j] - p.m_Q * Pq[j] * ar - p.m_Q * p.L * w2 * s.q[j] + p.m_Q * dqq;
      m -= p.m_Q * hat(p.r[j]) * s.RL.transpose() *
           (-Pq[j] * ar - Pq[j] * (vdot + p.g * e3) - p.L * w2 * s.q[j] + upar[j] / p.m_Q + dqq);
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

  ReducedDerivative d;
  d.xL_dot = s.vL;
  d.vL_dot = sol.head<3>();
  d.RL_rate = s.OmL;
  d.OmL_dot = sol.tail<3>();
  for (int j = 0; j < kCables; ++j) {
    const Vec3 A_j = d.vL_dot + detail::attach_accel(s.RL, s.OmL, d.OmL_dot, p.r[j]) + p.g * e3 -
                     in.u[j] / p.m_Q;
    d.q_dot[j] = s.w[j].cross(s.q[j]);
    d.w_dot[j] = s.q[j].cross(A_j) / p.L + dq_t[j];
    d.R_rate[j] = s.Om[j];
    d.Om_dot[j] = detail::quad_angular_accel(s.Om[j], in.M[j], p);
  }
  return d;
}

Tensions reduced_tensions(const ReducedState& s, const ControlInput& in, const PhysicalParams& p,
                          const ReducedDerivative& d) {
  Tensions T;
  for (int j = 0; j < kCables; ++j) {
    const Vec3 A_j = d.vL_dot + detail::attach_accel(s.RL, s.OmL, d.OmL_dot, p.r[j]) + p.g * e3 -
                     in.u[j] / p.m_Q;
    T[j] = p.m_Q * (s.q[j].dot(A_j) + p.L * s.w[j].squaredNorm());
  }
  return T;
}

LoadAccel load_accel_of(const ReducedState& s, const ReducedDerivative& d) {
  LoadAccel a;
  a.vL_dot = d.vL_dot;
  a.OmL_dot = d.OmL_dot;
  for (int j = 0; j < kCables; ++j)
    a.q_ddot[j] = d.w_dot[j].cross(s.q[j]) - s.w[j].squaredNorm() * s.q[j];
  return a;
}

FastVars slow_manifold(const ReducedState& s, const ControlInput& in, const LoadAccel& a,
                       const PhysicalParams& p, double kbar) {
  if (!(kbar > 0.0)) throw InvalidArgument("slow_manifold: kbar must be > 0");
  FastVars f;
  for (int j = 0; j < kCables; ++j) {
    const Vec3 ar = detail::attach_accel(s.RL, s.OmL, a.OmL_dot, p.r[j]);
    const Vec3 br = in.u[j] / p.m_Q + p.L * a.q_ddot[j] - a.vL_dot - ar - p.g * e3;
    f.y[j] = -(p.m_Q / kbar) * s.q[j].dot(br);
    f.z[j] = 0.0;
  }
  return f;
}

Eigen::Matrix2d boundary_layer_matrix(const PhysicalParams& p, double kbar, double cbar) {
  const double mL = p.m_Q * p.L;
  Eigen::Matrix2d A;
  A << 0.0, 1.0, -kbar / mL, -cbar / mL;
  return A;
}

BoundaryLayer boundary_layer_derivative(const BoundaryLayer& r, const PhysicalParams& p,
                                        double kbar, double cbar) {
  const Eigen::Matrix2d A = boundary_layer_matrix(p, kbar, cbar);
  BoundaryLayer out;
  for (int j = 0; j < kCables; ++j) out[j] = A * r[j];
  return out;
}

FullState embed_reduced_in_full(const ReducedState& s, const FastVars& f, double L) {
  if (!(f.eps > 0.0)) throw InvalidArgument("embed: eps must be > 0");
  FullState out(s, L);
  for (int j = 0; j < kCables; ++j) {
    out.l[j] = f.eps * f.eps * f.y[j] + L;
    out.ldot[j] = f.eps * f.z[j];
    if (!(out.l[j] > 0.0)) throw InvalidArgument("embed: cable length must stay positive");
  }
  return out;
}

FastVars extract_fast(const FullState& s, double eps, double L) {
  if (!(eps > 0.0)) throw InvalidArgument("extract: eps must be > 0");
  FastVars f;
  f.eps = eps;
  for (int j = 0; j < kCables; ++j) {
    f.y[j] = (s.l[j] - L) / (eps * eps);
    f.z[j] = s.ldot[j] / eps;
  }
  return f;
}

ReducedState extract_slow(const FullState& s) { return static_cast<const SlowState&>(s); }

}  // namespace quadcable
