#pragma once
#include <array>

#include "quadcable/manifold.hpp"

namespace quadcable {

inline constexpr int kCables = 4;

struct PhysicalParams {
  double m_L = 2.0;
  Mat3 J_L = Eigen::Vector3d(1.04, 5.0, 4.04).asDiagonal();
  double m_Q = 0.755;
  Mat3 J_Q = Eigen::Vector3d(0.0082, 0.0082, 0.0149).asDiagonal();
  std::array<Vec3, kCables> r{Vec3(0.5, 1.0, 0.1), Vec3(0.5, -1.0, 0.1),
                              Vec3(-0.5, -1.0, 0.1), Vec3(-0.5, 1.0, 0.1)};
  double L = 1.0;
  double k = 0.0;  // cable stiffness, full model only
  double c = 0.0;  // cable damping, full model only
  double g = 9.81;

  double m_eff() const { return kCables * m_Q + m_L; }
  Mat3 J_eff() const;
  // throws ValidationError naming the offending field
  void validate() const;
};

}  // namespace quadcable
