#include "quadcable/manifold.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "quadcable/errors.hpp"

namespace quadcable {

Mat3 hat(const Vec3& v) {
  Mat3 S;
  S << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
       -v.y(), v.x(), 0.0;
  return S;
}

Vec3 vee(const Mat3& S, double tol) {
  if ((S + S.transpose()).cwiseAbs().maxCoeff() > tol)
    throw InvalidArgument("vee: matrix is not skew-symmetric");
  return Vec3(S(2, 1), S(0, 2), S(1, 0));
}

Mat3 so3_exp(const Vec3& v) {
  const double th2 = v.squaredNorm();
  const double th = std::sqrt(th2);
  double a, b;
  if (th < 1e-6) {
    a = 1.0 - th2 / 6.0;
    b = 0.5 - th2 / 24.0;
  } else {
    a = std::sin(th) / th;
    b = (1.0 - std::cos(th)) / th2;
  }
  const Mat3 K = hat(v);
  return Mat3::Identity() + a * K + b * K * K;
}

Vec3 so3_log(const Mat3& R) {
  const double c = std::clamp(0.5 * (R.trace() - 1.0), -1.0, 1.0);
  const double th = std::acos(c);
  const Vec3 w(R(2, 1) - R(1, 2), R(0, 2) - R(2, 0), R(1, 0) - R(0, 1));
  if (th < 1e-6) return 0.5 * (1.0 + th * th / 6.0) * w;
  if (std::numbers::pi - th > 1e-6) return th / (2.0 * std::sin(th)) * w;
  // near pi: axis from the symmetric part
  const Mat3 B = 0.5 * (R + Mat3::Identity());
  int k;
  B.diagonal().maxCoeff(&k);
  Vec3 axis = B.col(k) / std::sqrt(std::max(B(k, k), 1e-300));
  axis.normalize();
  if (axis.dot(w) < 0.0) axis = -axis;
  return th * axis;
}

static double dexp_coeff(double th) {
  // 1/th^2 - (1+cos th)/(2 th sin th)
  if (th < 1e-4) return 1.0 / 12.0 + th * th / 720.0;
  return 1.0 / (th * th) - (1.0 + std::cos(th)) / (2.0 * th * std::sin(th));
}

Mat3 so3_right_jacobian_inv(const Vec3& theta) {
  const Mat3 K = hat(theta);
  return Mat3::Identity() + 0.5 * K + dexp_coeff(theta.norm()) * K * K;
}

Mat3 so3_left_jacobian_inv(const Vec3& theta) {
  const Mat3 K = hat(theta);
  return Mat3::Identity() - 0.5 * K + dexp_coeff(theta.norm()) * K * K;
}

Mat3 project_so3(const Mat3& M) {
  const double d = M.determinant();
  if (!(d > 1e-12 * std::max(1.0, M.cwiseAbs().maxCoeff())))
    throw InvalidArgument("project_so3: singular or reflecting matrix");
  Eigen::JacobiSVD<Mat3> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 R = svd.matrixU() * svd.matrixV().transpose();
  // one Newton polish step keeps idempotence at roundoff level
  R = 0.5 * (R + R.inverse().transpose());
  return R;
}

bool is_rotation(const Mat3& R, double tol) {
  if (!R.allFinite()) return false;
  if ((R.transpose() * R - Mat3::Identity()).cwiseAbs().maxCoeff() > tol) return false;
  return std::abs(R.determinant() - 1.0) <= tol;
}

Vec3 unit_vector(const Vec3& v) {
  const double n = v.norm();
  if (!std::isfinite(n) || std::abs(n - 1.0) >= 1e-6)
    throw InvalidArgument("unit_vector: norm too far from 1");
  return v / n;
}

Rotation::Rotation(const Mat3& R) : m_(R) {
  if (!is_rotation(R, 1e-9)) throw InvalidArgument("Rotation: not in SO(3)");
}

Vec3 rotation_error(const Mat3& R, const Mat3& Rd) {
  const Mat3 E = Rd.transpose() * R - R.transpose() * Rd;
  return 0.5 * Vec3(E(2, 1), E(0, 2), E(1, 0));
}

double attitude_psi(const Mat3& R, const Mat3& Rd) {
  return 0.5 * (3.0 - (Rd.transpose() * R).trace());
}

double sphere_psi(const Vec3& q, const Vec3& qd) { return 1.0 - qd.dot(q); }

SphereErrors sphere_errors(const Vec3& q, const Vec3& w, const Vec3& qd, const Vec3& wd) {
  const Mat3 Q = hat(q);
  return {qd.cross(q), w + Q * Q * wd};
}

}  // namespace quadcable
