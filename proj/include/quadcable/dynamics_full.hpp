#pragma once
#include <array>
#include <optional>

#include "quadcable/state.hpp"

namespace quadcable {

using Tensions = std::array<double, kCables>;

std::array<Vec3, kCables> quad_positions(const FullState& s, const PhysicalParams& p);
std::array<Vec3, kCables> quad_velocities(const FullState& s, const PhysicalParams& p);

// Elastic-cable model. The load accelerations come from a 6x6 solve of the
// load force/moment balance after the cable equations are substituted in.
FullDerivative full_accelerations(const FullState& s, const ControlInput& in,
                                  const PhysicalParams& p);

// Same, but with the cable tensions given instead of k(l-L) + c*ldot. Used to
// compare against the inelastic model.
FullDerivative full_accelerations_with_tension(const FullState& s, const ControlInput& in,
                                               const PhysicalParams& p, const Tensions& T);

double total_energy(const FullState& s, const PhysicalParams& p);
Vec3 linear_momentum(const FullState& s, const PhysicalParams& p);

namespace detail {
// rigid-body part shared by all models
Vec3 quad_angular_accel(const Vec3& Om, const Vec3& M, const PhysicalParams& p);
// accel of the attachment point relative to the load center, R(Om^2 + dOm^)r
Vec3 attach_accel(const Mat3& RL, const Vec3& OmL, const Vec3& OmL_dot, const Vec3& r);
// throws SingularConfiguration above the condition limit
Eigen::Matrix<double, 6, 1> solve_checked(const Eigen::Matrix<double, 6, 6>& A,
                                          const Eigen::Matrix<double, 6, 1>& b);
}  // namespace detail

}  // namespace quadcable
