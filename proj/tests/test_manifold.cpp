#include <cmath>
#include <random>

#include "doctest.h"
#include "quadcable/errors.hpp"
#include "quadcable/manifold.hpp"

using namespace quadcable;

namespace {
const double kPi = 3.14159265358979323846;

Vec3 rnd_vec(std::mt19937& g, double s = 1.0) {
  std::uniform_real_distribution<double> u(-s, s);
  return Vec3(u(g), u(g), u(g));
}

Vec3 rnd_unit(std::mt19937& g) {
  std::normal_distribution<double> n;
  return Vec3(n(g), n(g), n(g)).normalized();
}

Vec3 rnd_tangent(std::mt19937& g, const Vec3& q, double s = 1.0) {
  Vec3 w = rnd_vec(g, s);
  return w - w.dot(q) * q;
}

// Rodrigues written out by hand, no shared code with the library
Mat3 rodrigues(const Vec3& axis, double th) {
  const Vec3 a = axis.normalized();
  Mat3 K;
  K << 0, -a.z(), a.y(), a.z(), 0, -a.x(), -a.y(), a.x(), 0;
  return Mat3::Identity() + std::sin(th) * K + (1 - std::cos(th)) * K * K;
}
}  // namespace

TEST_CASE("hat of 1,2,3 matches the skew matrix") {
  Mat3 want;
  want << 0, -3, 2, 3, 0, -1, -2, 1, 0;
  CHECK((hat(Vec3(1, 2, 3)) - want).norm() == 0.0);
  CHECK(hat(Vec3::Zero()).norm() == 0.0);
  const Vec3 v(0.3, -0.4, 0.5);
  CHECK((hat(v) * v).norm() < 1e-16);
}

TEST_CASE("vee inverts hat") {
  CHECK((vee(hat(Vec3(1, 2, 3))) - Vec3(1, 2, 3)).norm() == 0.0);
  CHECK(vee(Mat3::Zero()).norm() == 0.0);
  std::mt19937 g(1);
  for (int i = 0; i < 100; ++i) {
    const Vec3 v = rnd_vec(g, 10.0);
    CHECK((vee(hat(v)) - v).norm() < 1e-14);
  }
  Mat3 S = hat(Vec3(1, 2, 3));
  S(0, 0) = 1e-3;
  CHECK_THROWS_AS(vee(S), InvalidArgument);
}

TEST_CASE("so3_exp known values and group inverse") {
  CHECK((so3_exp(Vec3::Zero()) - Mat3::Identity()).norm() == 0.0);
  const Mat3 R = so3_exp(Vec3(0, 0, kPi / 2));
  CHECK((R * e1 - e2).norm() < 1e-15);
  std::mt19937 g(2);
  for (int i = 0; i < 100; ++i) {
    const Vec3 v = rnd_vec(g, 3.0);
    CHECK((so3_exp(v) * so3_exp(-v) - Mat3::Identity()).norm() < 1e-12);
    CHECK((so3_exp(v) - rodrigues(v, v.norm())).norm() < 1e-12);
  }
}

TEST_CASE("so3_exp small angles stay accurate") {
  const Vec3 v(3e-9, -1e-9, 2e-9);
  const Mat3 want = Mat3::Identity() + hat(v) + 0.5 * hat(v) * hat(v);
  CHECK((so3_exp(v) - want).norm() < 1e-20);
}

TEST_CASE("so3_exp output is a rotation up to 4 pi") {
  std::mt19937 g(3);
  for (int i = 0; i < 200; ++i) {
    const Vec3 v = rnd_unit(g) * (4 * kPi * (i + 1) / 200.0);
    const Mat3 R = so3_exp(v);
    CHECK((R.transpose() * R - Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-14);
    CHECK(std::abs(R.determinant() - 1.0) < 1e-14);
  }
}

TEST_CASE("so3_log inverts exp below pi") {
  std::mt19937 g(4);
  for (int i = 0; i < 100; ++i) {
    const Vec3 v = rnd_unit(g) * (3.1 * (i + 1) / 100.0);
    CHECK((so3_log(so3_exp(v)) - v).norm() < 1e-10);
  }
}

TEST_CASE("project_so3") {
  CHECK((project_so3(Mat3::Identity()) - Mat3::Identity()).norm() < 1e-15);
  std::mt19937 g(5);
  for (int i = 0; i < 20; ++i) {
    const Mat3 R = so3_exp(rnd_vec(g, 3.0));
    CHECK((project_so3(R) - R).norm() < 1e-14);
    CHECK((project_so3(1.01 * R) - R).norm() < 1e-14);
    // oracle: polar factor from the SVD
    const Mat3 M = R + 0.05 * Mat3::Random();
    Eigen::JacobiSVD<Mat3> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Mat3 P = svd.matrixU() * svd.matrixV().transpose();
    CHECK((project_so3(M) - P).norm() < 1e-12);
  }
  CHECK_THROWS(project_so3(-Mat3::Identity()));
}

TEST_CASE("rotation_error") {
  const Mat3 R = so3_exp(Vec3(0.2, -0.1, 0.4));
  CHECK(rotation_error(R, R).norm() < 1e-16);
  const Vec3 e = rotation_error(so3_exp(0.1 * e3), Mat3::Identity());
  CHECK((e - Vec3(0, 0, std::sin(0.1))).norm() < 1e-15);
  std::mt19937 g(6);
  for (int i = 0; i < 50; ++i) {
    const Mat3 A = so3_exp(rnd_vec(g, 2.0)), B = so3_exp(rnd_vec(g, 2.0));
    const Vec3 lhs = rotation_error(A, B);
    const Vec3 rhs = -(B.transpose() * A).transpose() * rotation_error(B, A);
    CHECK((lhs - rhs).norm() < 1e-14);
  }
}

TEST_CASE("attitude_psi and sphere_psi values") {
  const Mat3 R = so3_exp(Vec3(0.3, 0.2, 0.1));
  CHECK(std::abs(attitude_psi(R, R)) < 1e-15);
  CHECK(attitude_psi(so3_exp(kPi / 2 * e3), Mat3::Identity()) == doctest::Approx(1.0));
  CHECK(attitude_psi(so3_exp(kPi * e1), Mat3::Identity()) == doctest::Approx(2.0));
  CHECK(sphere_psi(e3, e3) == 0.0);
  CHECK(sphere_psi(e1, e2) == 1.0);
  CHECK(sphere_psi(e3, -e3) == 2.0);
}

TEST_CASE("psi and rotation error vanish together") {
  std::mt19937 g(7);
  for (int i = 0; i < 500; ++i) {
    const double scale = std::pow(10.0, -8.0 * (i % 9) / 8.0) * 3.0;
    const Mat3 Rd = so3_exp(rnd_vec(g, 2.0));
    const Mat3 R = Rd * so3_exp(rnd_unit(g) * scale);
    const double psi = attitude_psi(R, Rd);
    if (psi >= 2.0) continue;
    const double eR = rotation_error(R, Rd).norm();
    if (psi <= 1e-12) CHECK(eR <= 1e-6);
    if (eR <= 1e-6) CHECK(psi <= 1e-11);
  }
}

TEST_CASE("sphere_errors basic cases") {
  SphereErrors s = sphere_errors(e3, Vec3::Zero(), e3, Vec3::Zero());
  CHECK(s.e_q.norm() == 0.0);
  CHECK(s.e_w.norm() == 0.0);
  s = sphere_errors(e1, Vec3::Zero(), e3, Vec3::Zero());
  CHECK((s.e_q - e2).norm() == 0.0);
}

TEST_CASE("psi rate along cable motion equals e_w . e_q") {
  std::mt19937 g(8);
  for (int i = 0; i < 20; ++i) {
    const Vec3 q0 = rnd_unit(g), qd0 = rnd_unit(g);
    const Vec3 w = rnd_tangent(g, q0, 2.0), wd = rnd_tangent(g, qd0, 2.0);
    // both move by rigid rotation at constant rate, which keeps w and wd tangent
    auto q = [&](double t) { return Vec3(rodrigues(w, w.norm() * t) * q0); };
    auto qd = [&](double t) { return Vec3(rodrigues(wd, wd.norm() * t) * qd0); };
    const double t = 0.37, h = 1e-5;
    const double fd = (sphere_psi(q(t + h), qd(t + h)) - sphere_psi(q(t - h), qd(t - h))) / (2 * h);
    const Vec3 wt = rodrigues(w, w.norm() * t) * w, wdt = rodrigues(wd, wd.norm() * t) * wd;
    const SphereErrors se = sphere_errors(q(t), wt, qd(t), wdt);
    CHECK(fd == doctest::Approx(se.e_w.dot(se.e_q)).epsilon(1e-8));
  }
}

TEST_CASE("e_q rate bound with C_q = 2 sup |w~|") {
  std::mt19937 g(9);
  for (int i = 0; i < 1000; ++i) {
    const Vec3 q = rnd_unit(g), qd = rnd_unit(g);
    const Vec3 w = rnd_tangent(g, q, 3.0), wd = rnd_tangent(g, qd, 3.0);
    const SphereErrors se = sphere_errors(q, w, qd, wd);
    const Vec3 eq_dot = wd.cross(qd).cross(q) + qd.cross(w.cross(q));
    const double lhs = std::abs(eq_dot.dot(se.e_w));
    const double Cq = 2.0 * wd.norm();
    CHECK(lhs <= se.e_w.squaredNorm() + Cq * se.e_q.norm() * se.e_w.norm() + 1e-12);
  }
}

TEST_CASE("unit_vector and Rotation validation") {
  CHECK((unit_vector(Vec3(0, 0, 1 + 1e-8)) - e3).norm() < 1e-15);
  CHECK_THROWS_AS(unit_vector(Vec3(0, 0, 1.1)), InvalidArgument);
  CHECK_NOTHROW(Rotation(so3_exp(Vec3(0.1, 0.2, 0.3))));
  CHECK_THROWS_AS(Rotation(2.0 * Mat3::Identity()), InvalidArgument);
  CHECK(is_rotation(so3_exp(Vec3(1, 2, 3))));
  Mat3 refl = Mat3::Identity();
  refl(2, 2) = -1;
  CHECK_FALSE(is_rotation(refl));
}
