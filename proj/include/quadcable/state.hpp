#pragma once
#include <array>

#include "quadcable/params.hpp"

namespace quadcable {

// Load pose/twist, cables, quadrotor attitudes; shared by both models.
struct SlowState {
  Vec3 xL = Vec3::Zero();
  Vec3 vL = Vec3::Zero();
  Mat3 RL = Mat3::Identity();
  Vec3 OmL = Vec3::Zero();  // body frame
  std::array<Vec3, kCables> q;
  std::array<Vec3, kCables> w;  // inertial, w_j . q_j = 0
  std::array<Mat3, kCables> R;
  std::array<Vec3, kCables> Om;

  SlowState() {
    q.fill(-e3);
    w.fill(Vec3::Zero());
    R.fill(Mat3::Identity());
    Om.fill(Vec3::Zero());
  }
};

using ReducedState = SlowState;

struct FullState : SlowState {
  std::array<double, kCables> l{};
  std::array<double, kCables> ldot{};
  FullState() { l.fill(1.0); }
  explicit FullState(const SlowState& s, double L = 1.0) : SlowState(s) {
    l.fill(L);
    ldot.fill(0.0);
  }
};

struct ControlInput {
  std::array<Vec3, kCables> u;  // inertial thrust vectors
  std::array<Vec3, kCables> M;  // body moments
  ControlInput() {
    u.fill(Vec3::Zero());
    M.fill(Vec3::Zero());
  }
};

// Time derivative of a slow state. Rotations carry body rates (Rdot = R hat(OmL)),
// cable directions carry qdot = w x q.
struct SlowDerivative {
  Vec3 xL_dot, vL_dot, OmL_dot;
  Vec3 RL_rate;  // = OmL
  std::array<Vec3, kCables> q_dot, w_dot, R_rate, Om_dot;
};

struct FullDerivative : SlowDerivative {
  std::array<double, kCables> l_dot{}, l_ddot{};
};

using ReducedDerivative = SlowDerivative;

// checks |q|=1, q.w=0, rotations; throws InvalidState
void check_slow_state(const SlowState& s, double tol = 1e-9);
void check_full_state(const FullState& s, double tol = 1e-9);

}  // namespace quadcable
