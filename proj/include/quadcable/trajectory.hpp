#pragma once
#include <memory>
#include <string>

#include "quadcable/manifold.hpp"

namespace quadcable {

struct DesiredSample {
  Vec3 x = Vec3::Zero(), v = Vec3::Zero(), a = Vec3::Zero(), jerk = Vec3::Zero();
  Mat3 R = Mat3::Identity();
  Vec3 Om = Vec3::Zero(), Om_dot = Vec3::Zero();  // body frame of R
};

class Trajectory {
 public:
  virtual ~Trajectory() = default;
  virtual DesiredSample at(double t) const = 0;
  virtual std::string name() const = 0;
};

// x = [ax sin(wx t), ay cos(wy t), z0], attitude heading along the velocity
struct PaperFigureParams {
  double ax = 1.2, wx = 0.4 * 3.14159265358979323846;
  double ay = 4.2, wy = 0.2 * 3.14159265358979323846;
  double z0 = 5.0;
};

class PaperFigure final : public Trajectory {
 public:
  explicit PaperFigure(PaperFigureParams p = {}) : p_(p) {}
  DesiredSample at(double t) const override;
  std::string name() const override { return "paper_fig"; }

 private:
  void kinematics(double t, DesiredSample& s) const;
  PaperFigureParams p_;
};

class Hover final : public Trajectory {
 public:
  explicit Hover(Vec3 x0 = Vec3(0, 0, 5)) : x0_(std::move(x0)) {}
  DesiredSample at(double t) const override;
  std::string name() const override { return "hover"; }

 private:
  Vec3 x0_;
};

// Heading frame Rz(psi) with psi = atan2(vy, vx) and its first two
// derivatives. Returns false when the horizontal speed is below 1e-6.
bool heading_frame(const Vec3& v, const Vec3& a, const Vec3& jerk, Mat3& R, Vec3& Om, Vec3& Om_dot);

}  // namespace quadcable
