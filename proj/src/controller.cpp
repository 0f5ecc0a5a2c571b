#include "quadcable/controller.hpp"

#include <cmath>

#include "quadcable/errors.hpp"

namespace quadcable {

void GainSet::validate() const {
  const std::pair<const char*, double> all[] = {
      {"gains.kx", kx},   {"gains.kv", kv},     {"gains.kR", kR},
      {"gains.kOm", kOm}, {"gains.kq", kq},     {"gains.kw", kw},
      {"gains.kRj", kRj}, {"gains.kOmj", kOmj}, {"gains.eps_att", eps_att}};
  for (const auto& [name, v] : all)
    if (!(v > 0.0) || !std::isfinite(v)) throw ValidationError(name, "must be > 0");
}

GainSet GainSet::scaled(double s) const {
  GainSet g = *this;
  g.kx *= s;
  g.kv *= s;
  g.kR *= s;
  g.kOm *= s;
  g.kq *= s;
  g.kw *= s;
  return g;
}

AllocationGeometry::AllocationGeometry(const std::array<Vec3, kCables>& r) {
  for (int j = 0; j < kCables; ++j) {
    P_.block<3, 3>(0, 3 * j) = Mat3::Identity();
    P_.block<3, 3>(3, 3 * j) = hat(r[j]);
  }
  const Eigen::Matrix<double, 6, 6> PPt = P_ * P_.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 6, 6>> es(PPt);
  lmin_ = es.eigenvalues()(0);
  if (!(lmin_ > 1e-10 * es.eigenvalues()(5)))
    throw AllocationInfeasible("attachment geometry gives rank(P) < 6");
  PPt_inv_ = PPt.inverse();
}

LoadErrors load_errors(const SlowState& s, const DesiredSample& d) {
  LoadErrors e;
  e.ex = s.xL - d.x;
  e.ev = s.vL - d.v;
  e.eR = rotation_error(s.RL, d.R);
  e.eOm = s.OmL - s.RL.transpose() * d.R * d.Om;
  e.psiR = attitude_psi(s.RL, d.R);
  return e;
}

Wrench wrench_targets(const LoadErrors& e, const SlowState& s, const DesiredSample& d,
                      const GainSet& g, const PhysicalParams& p) {
  Wrench w;
  w.F = p.m_L * (-g.kx * e.ex - g.kv * e.ev + d.a + p.g * e3);
  const Vec3 Od = s.RL.transpose() * d.R * d.Om;
  w.M = -g.kR * e.eR - g.kOm * e.eOm + Od.cross(p.J_L * Od) +
        p.J_L * s.RL.transpose() * d.R * d.Om_dot;
  return w;
}

CableVecs mu_distribution(const Wrench& w, const Mat3& RL, const AllocationGeometry& geo) {
  Eigen::Matrix<double, 6, 1> b;
  b << RL.transpose() * w.F, w.M;
  const Eigen::Matrix<double, 12, 1> m = geo.P().transpose() * (geo.PPt_inv() * b);
  CableVecs mu;
  for (int j = 0; j < kCables; ++j) mu[j] = RL * m.segment<3>(3 * j);
  return mu;
}

CableVecs desired_cable_attitudes(const CableVecs& mu, double mu_min) {
  CableVecs q;
  for (int j = 0; j < kCables; ++j) {
    const double n = mu[j].norm();
    if (!(n > mu_min)) throw DegenerateAllocation("cable force below floor, direction undefined");
    q[j] = -mu[j] / n;
  }
  return q;
}

CableControls cable_controls(const SlowState& s, const TrackingErrors& e, const CableVecs& mu_tilde,
                             const CableVecs& w_tilde, const CableVecs& w_tilde_dot,
                             const GainSet& g, const PhysicalParams& p, const AccelEstimate& acc) {
  CableControls c;
  for (int j = 0; j < kCables; ++j) {
    const Vec3& q = s.q[j];
    const Mat3 Q = hat(q);
    const Mat3 Q2 = Q * Q;
    const Vec3 a = acc.vL_dot + p.g * e3 + s.RL * s.OmL.cross(s.OmL.cross(p.r[j])) -
                   s.RL * hat(p.r[j]) * acc.OmL_dot;
    const Vec3 qdot = s.w[j].cross(q);
    c.mu[j] = q * q.dot(mu_tilde[j]);
    c.u_par[j] = c.mu[j] + p.m_Q * p.L * s.w[j].squaredNorm() * q + p.m_Q * q * q.dot(a);
    c.u_perp[j] = p.m_Q * p.L * Q *
                      (-g.kq * e.eq[j] - g.kw * e.ew[j] - q.dot(w_tilde[j]) * qdot -
                       Q2 * w_tilde_dot[j]) -
                  p.m_Q * Q2 * a;
    c.u[j] = c.u_par[j] + c.u_perp[j];
  }
  return c;
}

Mat3 desired_quad_attitude(const Vec3& u, double yaw) {
  const double n = u.norm();
  if (!(n > 1e-12) || !std::isfinite(n)) throw DegenerateAttitude("zero thrust, attitude undefined");
  const Vec3 b3 = u / n;
  Vec3 b1 = Vec3(std::cos(yaw), std::sin(yaw), 0.0);
  b1 -= b3.dot(b1) * b3;
  if (b1.norm() < 1e-9) {
    // heading lies along thrust; fall back to the other horizontal axis
    b1 = Vec3(-std::sin(yaw), std::cos(yaw), 0.0);
    b1 -= b3.dot(b1) * b3;
  }
  b1.normalize();
  Mat3 R;
  R.col(0) = b1;
  R.col(1) = b3.cross(b1);
  R.col(2) = b3;
  return R;
}

Vec3 moment_control(const Mat3& R, const Vec3& Om, const Mat3& Rd, const Vec3& Omd,
                    const Vec3& Omd_dot, const GainSet& g, const PhysicalParams& p) {
  const Vec3 eR = rotation_error(R, Rd);
  const Mat3 RtRd = R.transpose() * Rd;
  const Vec3 eOm = Om - RtRd * Omd;
  const double ep = g.eps_att;
  return -(g.kRj / (ep * ep)) * eR - (g.kOmj / ep) * eOm + Om.cross(p.J_Q * Om) -
         p.J_Q * (hat(Om) * RtRd * Omd - RtRd * Omd_dot);
}

namespace {
// 0 disables the limit
void clamp_norm(Vec3& v, double lim) {
  const double n = v.norm();
  if (lim > 0.0 && n > lim) v *= lim / n;
}
}  // namespace

GeometricController::GeometricController(PhysicalParams p, GainSet g,
                                         std::shared_ptr<const Trajectory> traj,
                                         ControllerOptions opt)
    : p_(std::move(p)), g_(g), traj_(std::move(traj)), opt_(opt), geo_(p_.r) {
  g_.validate();
  if (!(opt_.fd_dt > 0.0)) throw ValidationError("controller.fd_dt", "must be > 0");
  if (opt_.refine < 0) throw ValidationError("controller.refine", "must be >= 0");
  const std::pair<const char*, double> lims[] = {{"controller.cable_rate_limit", opt_.cable_rate_limit},
                                                 {"controller.cable_accel_limit", opt_.cable_accel_limit},
                                                 {"controller.att_rate_limit", opt_.att_rate_limit},
                                                 {"controller.att_accel_limit", opt_.att_accel_limit}};
  for (const auto& [name, v] : lims)
    if (!(v >= 0.0)) throw ValidationError(name, "must be >= 0 (0 = off)");
  if (opt_.rates == RateMode::flow && opt_.thrust != ThrustMode::ideal)
    throw ValidationError("controller.rates", "flow needs controller.thrust = ideal");
}

namespace {
using V6 = Eigen::Matrix<double, 6, 1>;

V6 pack(const AccelEstimate& a) {
  V6 v;
  v << a.vL_dot, a.OmL_dot;
  return v;
}

AccelEstimate unpack(const V6& v) {
  AccelEstimate a;
  a.vL_dot = v.head<3>();
  a.OmL_dot = v.tail<3>();
  return a;
}

// resid is affine in a, so a Newton step from six unit probes solves it
template <class F>
AccelEstimate affine_fixed_point(const AccelEstimate& guess, F&& resid) {
  const V6 a0 = pack(guess);
  const V6 r0 = resid(a0);
  Eigen::Matrix<double, 6, 6> A;
  for (int i = 0; i < 6; ++i) {
    V6 ai = a0;
    ai(i) += 1.0;
    A.col(i) = resid(ai) - r0;
  }
  const Eigen::FullPivLU<Eigen::Matrix<double, 6, 6>> lu(A);
  const V6 a1 = a0 - lu.solve(r0);
  // one refinement pass against roundoff in the probed Jacobian
  return unpack(a1 - lu.solve(resid(a1)));
}

SlowState flowed(const SlowState& s, const AccelEstimate& a, double dl) {
  SlowState o = s;
  o.xL += dl * s.vL;
  o.vL += dl * a.vL_dot;
  o.RL = s.RL * so3_exp(dl * s.OmL);
  o.OmL += dl * a.OmL_dot;
  for (int j = 0; j < kCables; ++j) {
    o.q[j] = so3_exp(dl * s.w[j]) * s.q[j];
    o.w[j] -= o.w[j].dot(o.q[j]) * o.q[j];
    o.R[j] = s.R[j] * so3_exp(dl * s.Om[j]);
  }
  return o;
}
}  // namespace

AccelEstimate GeometricController::closed_loop_accel(double t, const SlowState& s,
                                                     const PlantFn& plant,
                                                     const AccelEstimate& guess) const {
  const DesiredSample d = traj_->at(t);
  const CableVecs mu = mu_distribution(wrench_targets(load_errors(s, d), s, d, g_, p_), s.RL, geo_);
  const CableVecs zero{};
  const TrackingErrors none;
  ControlInput in;
  for (auto& M : in.M) M.setZero();
  return affine_fixed_point(guess, [&](const V6& a) {
    const CableControls cc = cable_controls(s, none, mu, zero, zero, g_, p_, unpack(a));
    in.u = cc.u_par;
    return V6(pack(plant(t, s, in)) - a);
  });
}

ControlOutput GeometricController::step(double t, const SlowState& s, const PlantFn& plant) {
  auto accel_of = [&](const ControlInput& u) { return plant(t, s, u); };
  AccelEstimate acc = acc_last_;
  if (opt_.rates == RateMode::flow) {
    acc = closed_loop_accel(t, s, plant, acc_last_);
    // fixed step, well above roundoff in the solved accelerations
    const double dl = 1e-6;
    const AccelEstimate ap = closed_loop_accel(t + dl, flowed(s, acc, dl), plant, acc);
    const AccelEstimate am = closed_loop_accel(t - dl, flowed(s, acc, -dl), plant, acc);
    acc.has_jerk = true;
    acc.vL_ddot = (ap.vL_dot - am.vL_dot) / (2.0 * dl);
    acc.OmL_ddot = (ap.OmL_dot - am.OmL_dot) / (2.0 * dl);
  } else if (opt_.accel == AccelMode::solved) {
    acc = affine_fixed_point(acc, [&](const V6& a) {
      return V6(pack(accel_of(compute(t, s, unpack(a)).input)) - a);
    });
  }
  ControlOutput out = compute(t, s, acc);
  if (opt_.rates == RateMode::history && opt_.accel == AccelMode::lagged) {
    for (int i = 0; i < opt_.refine; ++i) {
      acc = accel_of(out.input);
      out = compute(t, s, acc);
    }
  }
  acc_last_ = accel_of(out.input);
  commit(out, acc_last_);
  return out;
}

void GeometricController::reset() {
  have_prev_ = have_prev_rate_ = false;
  acc_prev_ = {};
  acc_last_ = {};
}

CableVecs GeometricController::q_tilde_at(double t, const Vec3& x, const Vec3& v, const Mat3& R,
                                          const Vec3& Om) const {
  SlowState s;
  s.xL = x;
  s.vL = v;
  s.RL = R;
  s.OmL = Om;
  const DesiredSample d = traj_->at(t);
  const LoadErrors le = load_errors(s, d);
  return desired_cable_attitudes(mu_distribution(wrench_targets(le, s, d, g_, p_), R, geo_),
                                 opt_.mu_min);
}

ControlOutput GeometricController::compute(double t, const SlowState& s,
                                           const AccelEstimate& acc) const {
  ControlOutput out;
  out.desired = traj_->at(t);
  const LoadErrors le = load_errors(s, out.desired);
  out.wrench = wrench_targets(le, s, out.desired, g_, p_);
  out.mu_tilde = mu_distribution(out.wrench, s.RL, geo_);
  out.q_tilde = desired_cable_attitudes(out.mu_tilde, opt_.mu_min);

  // q~ rates from central differences on the load state extrapolated to t +- h
  const double h = opt_.fd_dt;
  const AccelEstimate& a = acc;
  Vec3 jerk = Vec3::Zero(), Omddot = Vec3::Zero();
  if (acc.has_jerk) {
    jerk = acc.vL_ddot;
    Omddot = acc.OmL_ddot;
  } else if (have_prev_) {
    jerk = (acc.vL_dot - acc_prev_.vL_dot) / h;
    Omddot = (acc.OmL_dot - acc_prev_.OmL_dot) / h;
  }
  auto shifted = [&](double sg) {
    const double hh = sg * h;
    const Vec3 x = s.xL + hh * s.vL + 0.5 * hh * hh * a.vL_dot + hh * hh * hh / 6.0 * jerk;
    const Vec3 v = s.vL + hh * a.vL_dot + 0.5 * hh * hh * jerk;
    const Vec3 Om = s.OmL + hh * a.OmL_dot + 0.5 * hh * hh * Omddot;
    const Mat3 R = s.RL * so3_exp(hh * s.OmL + 0.5 * hh * hh * a.OmL_dot);
    return q_tilde_at(t + hh, x, v, R, Om);
  };
  const CableVecs qp = shifted(1.0), qm = shifted(-1.0);

  TrackingErrors& e = out.errors;
  e.ex = le.ex;
  e.ev = le.ev;
  e.eR = le.eR;
  e.eOm = le.eOm;
  e.psiR = le.psiR;
  for (int j = 0; j < kCables; ++j) {
    const Vec3& qd = out.q_tilde[j];
    const Vec3 qd_dot = (qp[j] - qm[j]) / (2.0 * h);
    const Vec3 qd_ddot = (qp[j] - 2.0 * qd + qm[j]) / (h * h);
    out.w_tilde[j] = qd.cross(qd_dot);
    out.w_tilde_dot[j] = qd.cross(qd_ddot);
    clamp_norm(out.w_tilde[j], opt_.cable_rate_limit);
    clamp_norm(out.w_tilde_dot[j], opt_.cable_accel_limit);
    const SphereErrors se = sphere_errors(s.q[j], s.w[j], qd, out.w_tilde[j]);
    e.eq[j] = se.e_q;
    e.ew[j] = se.e_w;
    e.psiq[j] = sphere_psi(s.q[j], qd);
  }

  const CableControls cc =
      cable_controls(s, e, out.mu_tilde, out.w_tilde, out.w_tilde_dot, g_, p_, acc);
  out.u_par = cc.u_par;
  out.u_perp = cc.u_perp;
  out.u_cmd = cc.u;

  for (int j = 0; j < kCables; ++j) {
    out.Rd[j] = desired_quad_attitude(cc.u[j], opt_.yaw);
    if (have_prev_) {
      out.Omd[j] = so3_log(Rd_prev_[j].transpose() * out.Rd[j]) / h;
      out.Omd_dot[j] = have_prev_rate_ ? Vec3((out.Omd[j] - Omd_prev_[j]) / h) : Vec3::Zero();
    } else {
      out.Omd[j].setZero();
      out.Omd_dot[j].setZero();
    }
    clamp_norm(out.Omd[j], opt_.att_rate_limit);
    clamp_norm(out.Omd_dot[j], opt_.att_accel_limit);
    out.input.M[j] = moment_control(s.R[j], s.Om[j], out.Rd[j], out.Omd[j], out.Omd_dot[j], g_, p_);
    e.eRj[j] = rotation_error(s.R[j], out.Rd[j]);
    e.eOmj[j] = s.Om[j] - s.R[j].transpose() * out.Rd[j] * out.Omd[j];
    if (opt_.thrust == ThrustMode::attitude) {
      const Vec3 b3 = s.R[j].col(2);
      out.input.u[j] = cc.u[j].dot(b3) * b3;
    } else {
      out.input.u[j] = cc.u[j];
    }
  }
  return out;
}

void GeometricController::commit(const ControlOutput& out, const AccelEstimate& acc) {
  if (have_prev_) {
    Omd_prev_ = out.Omd;
    have_prev_rate_ = true;
  }
  Rd_prev_ = out.Rd;
  acc_prev_ = acc;
  have_prev_ = true;
}

}  // namespace quadcable
