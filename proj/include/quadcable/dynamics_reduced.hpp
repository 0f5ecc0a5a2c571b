#pragma once
#include <array>

#include "quadcable/dynamics_full.hpp"
#include "quadcable/state.hpp"

namespace quadcable {

// Generalized forces added to the inelastic model (zero by default).
struct LoadDisturbance {
  Vec3 dx = Vec3::Zero();                 // force balance
  Vec3 dR = Vec3::Zero();                 // moment balance, body frame
  std::array<Vec3, kCables> dq{};         // cable angular acceleration
  LoadDisturbance() { dq.fill(Vec3::Zero()); }
};

// Inelastic-cable model (l == L). Load accelerations come from the coupled
// 6x6 system, cable accelerations are explicit afterwards.
ReducedDerivative reduced_derivative(const ReducedState& s, const ControlInput& in,
                                     const PhysicalParams& p);
ReducedDerivative reduced_derivative(const ReducedState& s, const ControlInput& in,
                                     const PhysicalParams& p, const LoadDisturbance& dist);

// cable tensions implied by a reduced derivative
Tensions reduced_tensions(const ReducedState& s, const ControlInput& in, const PhysicalParams& p,
                          const ReducedDerivative& d);

struct FastVars {
  std::array<double, kCables> y{};  // l = eps^2 y + L
  std::array<double, kCables> z{};  // ldot = eps z
  double eps = 0.0;
};

struct LoadAccel {
  Vec3 vL_dot, OmL_dot;
  std::array<Vec3, kCables> q_ddot;
};
LoadAccel load_accel_of(const ReducedState& s, const ReducedDerivative& d);

FastVars slow_manifold(const ReducedState& s, const ControlInput& in, const LoadAccel& a,
                       const PhysicalParams& p, double kbar);

// Fast subsystem in stretched time, per cable (dy, dz).
using BoundaryLayer = std::array<Eigen::Vector2d, kCables>;
BoundaryLayer boundary_layer_derivative(const BoundaryLayer& r, const PhysicalParams& p,
                                        double kbar, double cbar);
Eigen::Matrix2d boundary_layer_matrix(const PhysicalParams& p, double kbar, double cbar);

FullState embed_reduced_in_full(const ReducedState& s, const FastVars& f, double L);
FastVars extract_fast(const FullState& s, double eps, double L);
ReducedState extract_slow(const FullState& s);

}  // namespace quadcable
