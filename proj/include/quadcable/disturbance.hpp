#pragma once
#include <array>
#include <string>
#include <vector>

#include "quadcable/dynamics_reduced.hpp"
#include "quadcable/lyapunov.hpp"

namespace quadcable {

// one additive term of a scalar signal
struct SignalTerm {
  enum Kind { constant, sine, cosine, exponential } kind = constant;
  double amp = 0.0;
  double rate = 0.0;   // angular frequency, or decay rate for exponential
  double phase = 0.0;
  double eval(double t) const;
  double sup() const;  // sup over t >= 0 of |term|
};

struct ScalarSignal {
  std::vector<SignalTerm> terms;
  double eval(double t) const;
  double sup() const;
  bool zero() const { return terms.empty(); }
};

struct VectorSignal {
  std::array<ScalarSignal, 3> c;
  Vec3 eval(double t) const;
  double norm_bound() const;  // from the componentwise sups
};

// term grammar: kind:amp[:rate[:phase]] joined with '+', kinds const|sin|cos|exp
// e.g. "sin:0.2:0.75 + exp:-1:1"; exp is amp*exp(-rate t)
ScalarSignal parse_signal(const std::string& text);
std::string format_signal(const ScalarSignal& s);

struct DisturbanceSpec {
  VectorSignal dx, dR;
  std::array<VectorSignal, kCables> dq;
  // bounds; negative means derive from the signals
  double x_bar = -1.0, R_bar = -1.0;
  std::array<double, kCables> q_bar{-1.0, -1.0, -1.0, -1.0};

  LoadDisturbance at(double t) const;
  double bound_x() const;
  double bound_R() const;
  double bound_q(int j) const;
  // throws ValidationError when a sampled value exceeds a given bound
  void validate(double horizon = 40.0, double dt = 0.01) const;
  bool zero() const;
};

DisturbanceSpec paper_disturbances();
DisturbanceSpec no_disturbance();

ReducedDerivative perturbed_derivative(const ReducedState& s, const ControlInput& in,
                                       const PhysicalParams& p, const DisturbanceSpec& d,
                                       double t);

// normalization constants of the E vector, defaults m_r = m_L, L_r = 1, L_c = L
struct EScales {
  double m_r = -1.0, L_r = 1.0, L_c = -1.0;  // negative: take from params
};

struct UltimateBoundReport {
  double eps_young = 0.0;
  Eigen::Matrix<double, 6, 1> E = Eigen::Matrix<double, 6, 1>::Zero();
  double E_norm = 0.0;
  double d1 = 0.0;
  double lambda_min_W = 0.0;       // min over cables, symmetric part
  double lambda_min_Wstar = 0.0;   // lambda_min_W - eps_young
  double lambda_max_P_hi = 0.0, lambda_min_P_lo = 0.0;
  double radius = 0.0;  // |z| bound on the d1 sublevel set
  double m_r = 0.0, L_r = 0.0, L_c = 0.0;
  std::string to_text() const;
};

// E uses the largest cable bound; throws InvalidGains when W* is not PD
UltimateBoundReport ultimate_bound(const GainSet& g, const CertificateConstants& c,
                                   const PhysicalParams& p, double x_bar, double R_bar,
                                   double q_bar, double eps_young, EScales sc = {});
UltimateBoundReport ultimate_bound(const GainSet& g, const CertificateConstants& c,
                                   const PhysicalParams& p, const DisturbanceSpec& d,
                                   double eps_young, EScales sc = {});

}  // namespace quadcable
