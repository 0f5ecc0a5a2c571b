#include "quadcable/params.hpp"

#include <cmath>
#include <string>

#include "quadcable/errors.hpp"
#include "quadcable/state.hpp"

namespace quadcable {

Mat3 PhysicalParams::J_eff() const {
  Mat3 J = J_L;
  for (const auto& rj : r) {
    const Mat3 H = hat(rj);
    J -= m_Q * H * H;
  }
  return J;
}

static void check_spd(const Mat3& J, const char* name) {
  if (!J.allFinite() || (J - J.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + J.norm()))
    throw ValidationError(name, "must be symmetric");
  Eigen::SelfAdjointEigenSolver<Mat3> es(J);
  if (es.eigenvalues().minCoeff() <= 0.0)
    throw ValidationError(name, "must be positive definite");
}

void PhysicalParams::validate() const {
  if (!(m_L > 0.0) || !std::isfinite(m_L)) throw ValidationError("m_L", "must be > 0");
  if (!(m_Q > 0.0) || !std::isfinite(m_Q)) throw ValidationError("m_Q", "must be > 0");
  if (!(L > 0.0) || !std::isfinite(L)) throw ValidationError("L", "must be > 0");
  if (!(k >= 0.0) || !std::isfinite(k)) throw ValidationError("k", "must be >= 0");
  if (!(c >= 0.0) || !std::isfinite(c)) throw ValidationError("c", "must be >= 0");
  if (!std::isfinite(g)) throw ValidationError("g", "must be finite");
  check_spd(J_L, "J_L");
  check_spd(J_Q, "J_Q");
  for (int j = 0; j < kCables; ++j)
    if (!r[j].allFinite()) throw ValidationError("r" + std::to_string(j + 1), "must be finite");
  if (std::abs(J_eff().determinant()) < 1e-12) throw ValidationError("J_L", "J_eff is singular");
}

void check_slow_state(const SlowState& s, double tol) {
  if (!s.xL.allFinite() || !s.vL.allFinite() || !s.OmL.allFinite())
    throw InvalidState("non-finite load state");
  if (!is_rotation(s.RL, tol)) throw InvalidState("R_L is not a rotation");
  for (int j = 0; j < kCables; ++j) {
    if (std::abs(s.q[j].norm() - 1.0) > tol) throw InvalidState("q_j is not a unit vector");
    if (!s.w[j].allFinite() || std::abs(s.q[j].dot(s.w[j])) > tol)
      throw InvalidState("w_j is not orthogonal to q_j");
    if (!is_rotation(s.R[j], tol)) throw InvalidState("R_j is not a rotation");
    if (!s.Om[j].allFinite()) throw InvalidState("non-finite quadrotor rate");
  }
}

void check_full_state(const FullState& s, double tol) {
  check_slow_state(s, tol);
  for (int j = 0; j < kCables; ++j) {
    if (!(s.l[j] > 0.0)) throw InvalidState("cable length must be positive");
    if (!std::isfinite(s.ldot[j])) throw InvalidState("non-finite cable rate");
  }
}

}  // namespace quadcable
