#pragma once
#include <Eigen/Dense>

namespace quadcable {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

inline const Vec3 e1{1.0, 0.0, 0.0};
inline const Vec3 e2{0.0, 1.0, 0.0};
inline const Vec3 e3{0.0, 0.0, 1.0};

Mat3 hat(const Vec3& v);
// throws InvalidArgument when S is not skew to 1e-12
Vec3 vee(const Mat3& S, double tol = 1e-12);

Mat3 so3_exp(const Vec3& v);
// principal log, |angle| <= pi
Vec3 so3_log(const Mat3& R);
// inverse of the right Jacobian of exp, body-trivialized rates
Mat3 so3_right_jacobian_inv(const Vec3& theta);
Mat3 so3_left_jacobian_inv(const Vec3& theta);

// nearest rotation (polar factor); rejects det <= 0
Mat3 project_so3(const Mat3& M);

bool is_rotation(const Mat3& R, double tol = 1e-9);
// normalizes small drift, rejects |norm-1| >= 1e-6
Vec3 unit_vector(const Vec3& v);

// Validated SO(3) element.
class Rotation {
 public:
  Rotation() : m_(Mat3::Identity()) {}
  explicit Rotation(const Mat3& R);
  const Mat3& matrix() const { return m_; }
  operator const Mat3&() const { return m_; }

 private:
  Mat3 m_;
};

Vec3 rotation_error(const Mat3& R, const Mat3& Rd);
double attitude_psi(const Mat3& R, const Mat3& Rd);
double sphere_psi(const Vec3& q, const Vec3& qd);

struct SphereErrors {
  Vec3 e_q;
  Vec3 e_w;
};
SphereErrors sphere_errors(const Vec3& q, const Vec3& w, const Vec3& qd, const Vec3& wd);

}  // namespace quadcable
