#include "quadcable/trajectory.hpp"

#include <cmath>

namespace quadcable {

bool heading_frame(const Vec3& v, const Vec3& a, const Vec3& jerk, Mat3& R, Vec3& Om,
                   Vec3& Om_dot) {
  const double n2 = v.x() * v.x() + v.y() * v.y();
  if (n2 < 1e-12) return false;
  const double n = std::sqrt(n2);
  const Vec3 b1(v.x() / n, v.y() / n, 0.0);
  const Vec3 b2 = e3.cross(b1);
  R.col(0) = b1;
  R.col(1) = b2;
  R.col(2) = e3;
  const double cr = v.x() * a.y() - v.y() * a.x();
  const double psi_dot = cr / n2;
  const double dot_va = v.x() * a.x() + v.y() * a.y();
  const double cr_dot = v.x() * jerk.y() - v.y() * jerk.x();
  const double psi_ddot = cr_dot / n2 - cr * 2.0 * dot_va / (n2 * n2);
  Om = psi_dot * e3;
  Om_dot = psi_ddot * e3;
  return true;
}

void PaperFigure::kinematics(double t, DesiredSample& s) const {
  const double sx = std::sin(p_.wx * t), cx = std::cos(p_.wx * t);
  const double sy = std::sin(p_.wy * t), cy = std::cos(p_.wy * t);
  const double wx = p_.wx, wy = p_.wy;
  s.x = Vec3(p_.ax * sx, p_.ay * cy, p_.z0);
  s.v = Vec3(p_.ax * wx * cx, -p_.ay * wy * sy, 0.0);
  s.a = Vec3(-p_.ax * wx * wx * sx, -p_.ay * wy * wy * cy, 0.0);
  s.jerk = Vec3(-p_.ax * wx * wx * wx * cx, p_.ay * wy * wy * wy * sy, 0.0);
}

DesiredSample PaperFigure::at(double t) const {
  DesiredSample s;
  kinematics(t, s);
  if (heading_frame(s.v, s.a, s.jerk, s.R, s.Om, s.Om_dot)) return s;
  // undefined heading: hold the last valid frame
  for (int k = 1; k <= 1000; ++k) {
    DesiredSample b;
    kinematics(t - 1e-3 * k, b);
    if (heading_frame(b.v, b.a, b.jerk, s.R, s.Om, s.Om_dot)) {
      s.Om.setZero();
      s.Om_dot.setZero();
      return s;
    }
  }
  s.R.setIdentity();
  s.Om.setZero();
  s.Om_dot.setZero();
  return s;
}

DesiredSample Hover::at(double) const {
  DesiredSample s;
  s.x = x0_;
  return s;
}

}  // namespace quadcable
