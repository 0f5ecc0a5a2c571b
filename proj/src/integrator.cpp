#include "quadcable/integrator.hpp"

#include "quadcable/manifold.hpp"

namespace quadcable {

void IntegratorConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("integrator.dt", "must be > 0");
  if (!(horizon >= 0.0) || !std::isfinite(horizon))
    throw ValidationError("integrator.horizon", "must be >= 0");
  if (horizon > 0.0 && horizon < dt) throw ValidationError("integrator.horizon", "must be >= dt");
}

namespace {

constexpr int kSlowEuc = 9 + 3 * kCables + 3 * kCables;

void put_slow(const SlowState& s, Eigen::VectorXd& e) {
  e.segment<3>(0) = s.xL;
  e.segment<3>(3) = s.vL;
  e.segment<3>(6) = s.OmL;
  for (int j = 0; j < kCables; ++j) {
    e.segment<3>(9 + 3 * j) = s.w[j];
    e.segment<3>(9 + 3 * kCables + 3 * j) = s.Om[j];
  }
}

void get_slow(const Eigen::VectorXd& e, SlowState& s) {
  s.xL = e.segment<3>(0);
  s.vL = e.segment<3>(3);
  s.OmL = e.segment<3>(6);
  for (int j = 0; j < kCables; ++j) {
    s.w[j] = e.segment<3>(9 + 3 * j);
    s.Om[j] = e.segment<3>(9 + 3 * kCables + 3 * j);
  }
}

ManifoldPoint slow_point(const SlowState& s, int extra) {
  ManifoldPoint m;
  m.rot.reserve(1 + kCables);
  m.rot.push_back(s.RL);
  for (const auto& R : s.R) m.rot.push_back(R);
  m.sph.assign(s.q.begin(), s.q.end());
  m.euc.resize(kSlowEuc + extra);
  put_slow(s, m.euc);
  return m;
}

void slow_from(const ManifoldPoint& m, SlowState& s) {
  s.RL = m.rot[0];
  for (int j = 0; j < kCables; ++j) {
    s.R[j] = m.rot[1 + j];
    s.q[j] = m.sph[j];
  }
  get_slow(m.euc, s);
}

ManifoldTangent slow_tangent(const SlowDerivative& d, int extra) {
  ManifoldTangent k;
  k.rot.reserve(1 + kCables);
  k.rot.push_back(d.RL_rate);
  for (const auto& w : d.R_rate) k.rot.push_back(w);
  k.sph.assign(d.q_dot.begin(), d.q_dot.end());
  k.euc.resize(kSlowEuc + extra);
  k.euc.segment<3>(0) = d.xL_dot;
  k.euc.segment<3>(3) = d.vL_dot;
  k.euc.segment<3>(6) = d.OmL_dot;
  for (int j = 0; j < kCables; ++j) {
    k.euc.segment<3>(9 + 3 * j) = d.w_dot[j];
    k.euc.segment<3>(9 + 3 * kCables + 3 * j) = d.Om_dot[j];
  }
  return k;
}

// recover the spatial rate w from qdot = w x q, valid for the component
// orthogonal to q, which is all the flow sees
Vec3 sphere_rate(const Vec3& q, const Vec3& qdot) { return q.cross(qdot) / q.squaredNorm(); }

}  // namespace

ManifoldPoint to_point(const SlowState& s) { return slow_point(s, 0); }

ManifoldPoint to_point(const FullState& s) {
  ManifoldPoint m = slow_point(s, 2 * kCables);
  for (int j = 0; j < kCables; ++j) {
    m.euc(kSlowEuc + j) = s.l[j];
    m.euc(kSlowEuc + kCables + j) = s.ldot[j];
  }
  return m;
}

void from_point(const ManifoldPoint& m, SlowState& s) { slow_from(m, s); }

void from_point(const ManifoldPoint& m, FullState& s) {
  slow_from(m, s);
  for (int j = 0; j < kCables; ++j) {
    s.l[j] = m.euc(kSlowEuc + j);
    s.ldot[j] = m.euc(kSlowEuc + kCables + j);
  }
}

ManifoldTangent to_tangent(const SlowDerivative& d) {
  ManifoldTangent k = slow_tangent(d, 0);
  return k;
}

ManifoldTangent to_tangent(const FullDerivative& d) {
  ManifoldTangent k = slow_tangent(d, 2 * kCables);
  for (int j = 0; j < kCables; ++j) {
    k.euc(kSlowEuc + j) = d.l_dot[j];
    k.euc(kSlowEuc + kCables + j) = d.l_ddot[j];
  }
  return k;
}

namespace {

// The sphere slot of a tangent carries qdot until converted here; derivative
// structs only know qdot.
void sphere_rates_from_qdot(const ManifoldPoint& x, ManifoldTangent& k,
                            const std::vector<Vec3>& qdot) {
  for (size_t i = 0; i < x.sph.size(); ++i) k.sph[i] = sphere_rate(x.sph[i], qdot[i]);
}

}  // namespace

ManifoldPoint step_point(const ManifoldPoint& x0, const TangentField& f, double t, double dt,
                         Scheme scheme, Retraction retraction) {
  const size_t nr = x0.rot.size(), ns = x0.sph.size();

  if (retraction == Retraction::lie_exp) {
    // Munthe-Kaas RK on the rotations, sphere points moved by the left action.
    auto point_at = [&](const std::vector<Vec3>& th_r, const std::vector<Vec3>& th_s,
                        const Eigen::VectorXd& e) {
      ManifoldPoint x;
      x.rot.resize(nr);
      x.sph.resize(ns);
      for (size_t i = 0; i < nr; ++i) x.rot[i] = x0.rot[i] * so3_exp(th_r[i]);
      for (size_t i = 0; i < ns; ++i) x.sph[i] = so3_exp(th_s[i]) * x0.sph[i];
      x.euc = e;
      return x;
    };
    auto algebra_rate = [&](const ManifoldTangent& k, const std::vector<Vec3>& th_r,
                            const std::vector<Vec3>& th_s, std::vector<Vec3>& xr,
                            std::vector<Vec3>& xs) {
      xr.resize(nr);
      xs.resize(ns);
      for (size_t i = 0; i < nr; ++i) xr[i] = so3_right_jacobian_inv(th_r[i]) * k.rot[i];
      for (size_t i = 0; i < ns; ++i) xs[i] = so3_left_jacobian_inv(th_s[i]) * k.sph[i];
    };
    auto eval = [&](double tt, const ManifoldPoint& x) {
      ManifoldTangent k = f(tt, x);
      std::vector<Vec3> qdot = k.sph;
      sphere_rates_from_qdot(x, k, qdot);
      return k;
    };
    std::vector<Vec3> zr(nr, Vec3::Zero()), zs(ns, Vec3::Zero());

    if (scheme == Scheme::euler) {
      const ManifoldTangent k1 = eval(t, x0);
      std::vector<Vec3> tr(nr), ts(ns);
      for (size_t i = 0; i < nr; ++i) tr[i] = dt * k1.rot[i];
      for (size_t i = 0; i < ns; ++i) ts[i] = dt * k1.sph[i];
      return point_at(tr, ts, x0.euc + dt * k1.euc);
    }

    const double h = dt;
    std::vector<Vec3> xr1, xs1, xr2, xs2, xr3, xs3, xr4, xs4, tr(nr), ts(ns);
    const ManifoldTangent k1 = eval(t, x0);
    algebra_rate(k1, zr, zs, xr1, xs1);

    for (size_t i = 0; i < nr; ++i) tr[i] = 0.5 * h * xr1[i];
    for (size_t i = 0; i < ns; ++i) ts[i] = 0.5 * h * xs1[i];
    const ManifoldTangent k2 = eval(t + 0.5 * h, point_at(tr, ts, x0.euc + 0.5 * h * k1.euc));
    algebra_rate(k2, tr, ts, xr2, xs2);

    for (size_t i = 0; i < nr; ++i) tr[i] = 0.5 * h * xr2[i];
    for (size_t i = 0; i < ns; ++i) ts[i] = 0.5 * h * xs2[i];
    const ManifoldTangent k3 = eval(t + 0.5 * h, point_at(tr, ts, x0.euc + 0.5 * h * k2.euc));
    algebra_rate(k3, tr, ts, xr3, xs3);

    for (size_t i = 0; i < nr; ++i) tr[i] = h * xr3[i];
    for (size_t i = 0; i < ns; ++i) ts[i] = h * xs3[i];
    const ManifoldTangent k4 = eval(t + h, point_at(tr, ts, x0.euc + h * k3.euc));
    algebra_rate(k4, tr, ts, xr4, xs4);

    for (size_t i = 0; i < nr; ++i) tr[i] = h / 6.0 * (xr1[i] + 2.0 * xr2[i] + 2.0 * xr3[i] + xr4[i]);
    for (size_t i = 0; i < ns; ++i) ts[i] = h / 6.0 * (xs1[i] + 2.0 * xs2[i] + 2.0 * xs3[i] + xs4[i]);
    return point_at(tr, ts, x0.euc + h / 6.0 * (k1.euc + 2.0 * k2.euc + 2.0 * k3.euc + k4.euc));
  }

  // ambient stages, projection at the end of the step
  auto ambient = [&](const ManifoldPoint& x, double tt, std::vector<Mat3>& dR,
                     std::vector<Vec3>& dq) {
    ManifoldTangent k = f(tt, x);
    dR.resize(nr);
    dq.resize(ns);
    for (size_t i = 0; i < nr; ++i) dR[i] = x.rot[i] * hat(k.rot[i]);
    for (size_t i = 0; i < ns; ++i) dq[i] = k.sph[i];
    return k.euc;
  };
  auto advance = [&](const ManifoldPoint& base, double a, const std::vector<Mat3>& dR,
                     const std::vector<Vec3>& dq, const Eigen::VectorXd& de) {
    ManifoldPoint x = base;
    for (size_t i = 0; i < nr; ++i) x.rot[i] += a * dR[i];
    for (size_t i = 0; i < ns; ++i) x.sph[i] += a * dq[i];
    x.euc += a * de;
    return x;
  };
  auto finish = [&](ManifoldPoint x) {
    for (auto& R : x.rot) R = project_so3(R);
    for (auto& q : x.sph) q.normalize();
    return x;
  };

  std::vector<Mat3> R1, R2, R3, R4;
  std::vector<Vec3> q1, q2, q3, q4;
  const Eigen::VectorXd e1 = ambient(x0, t, R1, q1);
  if (scheme == Scheme::euler) return finish(advance(x0, dt, R1, q1, e1));
  const Eigen::VectorXd e2 = ambient(advance(x0, 0.5 * dt, R1, q1, e1), t + 0.5 * dt, R2, q2);
  const Eigen::VectorXd e3v = ambient(advance(x0, 0.5 * dt, R2, q2, e2), t + 0.5 * dt, R3, q3);
  const Eigen::VectorXd e4 = ambient(advance(x0, dt, R3, q3, e3v), t + dt, R4, q4);
  ManifoldPoint x = x0;
  for (size_t i = 0; i < nr; ++i) x.rot[i] += dt / 6.0 * (R1[i] + 2.0 * R2[i] + 2.0 * R3[i] + R4[i]);
  for (size_t i = 0; i < ns; ++i) x.sph[i] += dt / 6.0 * (q1[i] + 2.0 * q2[i] + 2.0 * q3[i] + q4[i]);
  x.euc += dt / 6.0 * (e1 + 2.0 * e2 + 2.0 * e3v + e4);
  return finish(x);
}

void repair(SlowState& s) {
  for (int j = 0; j < kCables; ++j) {
    s.q[j].normalize();
    s.w[j] -= s.q[j].dot(s.w[j]) * s.q[j];
  }
}

}  // namespace quadcable
