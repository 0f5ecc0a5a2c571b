#pragma once
#include <array>
#include <string>

#include "quadcable/controller.hpp"
#include "quadcable/params.hpp"
#include "quadcable/trajectory.hpp"

namespace quadcable {

using Mat2 = Eigen::Matrix2d;
using Mat6 = Eigen::Matrix<double, 6, 6>;

struct CertificateConstants {
  double c_x = 1.0, c_q = 0.5, c_R = 0.5;
  std::array<double, kCables> psi_q{0.005, 0.005, 0.005, 0.005};
  double psi_R = 0.005;
  double e_xmax = 10.0;
  double B = 0.0;
  std::array<double, kCables> C_q{};
  void validate() const;
};

// geometry and domain numbers that enter the W blocks
struct DerivedConstants {
  std::array<double, kCables> alpha{}, delta{}, sigma{}, nu{};
  double alpha_L = 0.0, gamma = 0.0, beta = 0.0, lambda_min_PPt = 0.0;
  double lmin_J = 0.0, lmax_J = 0.0;
};
DerivedConstants derive_constants(const CertificateConstants& c, const PhysicalParams& p);

struct PMatrices {
  Mat2 Px_lo, Px_hi, PR_lo, PR_hi;
  std::array<Mat2, kCables> Pq_lo, Pq_hi;
  // lower bounds usable as V >= z^T P z (the k entries of R and q halved)
  Mat2 PR_lo_eff;
  std::array<Mat2, kCables> Pq_lo_eff;
};
PMatrices build_P_matrices(const GainSet& g, const CertificateConstants& c, const Mat3& J_L);

// blocks as displayed; W_j assembled with z_j = [ex ev eR eOm eq ew]
struct WBlocks {
  Mat2 Wx, WR, Wq, WxR, Wxq, WqR;
};
WBlocks build_W_blocks(const GainSet& g, const CertificateConstants& c, const DerivedConstants& d,
                       int j);
Mat6 build_W(const GainSet& g, const CertificateConstants& c, const PhysicalParams& p, int j);
Mat6 build_W(const GainSet& g, const CertificateConstants& c, const DerivedConstants& d, int j);
Mat6 symmetric_part(const Mat6& W);

struct SchurResult {
  bool verdict = false;
  int failing_condition = 0;  // 1, 2, 3 or 0
  std::array<double, 3> cond_lambda{};  // min eigenvalue of each condition matrix
  double lambda_bound = 0.0;            // rigorous lower bound on lambda_min
  double lambda_exact = 0.0;            // direct eigenvalue, for comparison
};
// conditions from the nested Schur complements with block order (x, R, q)
SchurResult schur_positivity(const Mat6& Wsym, double margin = 1e-8);

struct CertificateReport {
  bool verdict = false;
  int failing_condition = 0;
  std::string failing_what;
  bool P_pd = false;
  double lambda_min_P_lo = 0.0, lambda_max_P_hi = 0.0;
  std::array<SchurResult, kCables> W{};
  double lambda_min_W = 0.0;  // min over j of exact lambda_min
  GainSet gains;
  CertificateConstants constants;
  DerivedConstants derived;
  int iterations = 0;
  std::string to_text() const;
};

// evaluates everything for a fixed gain set
CertificateReport certify(const GainSet& g, const CertificateConstants& c, const PhysicalParams& p,
                          double margin = 1e-8);

// B and C_q sampled along the desired trajectory
void estimate_trajectory_bounds(CertificateConstants& c, const PhysicalParams& p,
                                const Trajectory& traj, double horizon, double dt);

struct GainSearchOptions {
  double margin = 1e-3;
  int max_outer = 4;   // shrink steps per cross weight
  int max_level = 60;  // geometric growth steps of k_R and k_w
  double growth = 1.25;
  double kw0 = 1.0, kR0 = 1.0;
};
// keeps kx, kv from `base`; throws CertificationFailed
CertificateReport gain_search(const PhysicalParams& p, const CertificateConstants& c,
                              const GainSet& base, const GainSearchOptions& opt = {});

struct LyapunovValue {
  double V = 0.0;
  bool in_domain = true;
};
LyapunovValue lyapunov_value(const TrackingErrors& e, const GainSet& g,
                             const CertificateConstants& c, const Mat3& J_L);

// z = [|ex| |ev| |eR| |eOm| |eq1..4| |ew1..4|]
Eigen::Matrix<double, 12, 1> error_norms(const TrackingErrors& e);
// block-diagonal P over z in the order x, R, q1..q4 with z reshuffled to match
double quad_form_hi(const PMatrices& P, const TrackingErrors& e);
double quad_form_lo(const PMatrices& P, const TrackingErrors& e);

}  // namespace quadcable
