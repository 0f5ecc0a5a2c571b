#include "quadcable/lyapunov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "quadcable/errors.hpp"

namespace quadcable {

namespace {

double lmin2(const Mat2& M) { return Eigen::SelfAdjointEigenSolver<Mat2>(M).eigenvalues()(0); }
double lmax2(const Mat2& M) { return Eigen::SelfAdjointEigenSolver<Mat2>(M).eigenvalues()(1); }

Mat2 sym2(double a, double b, double d) {
  Mat2 M;
  M << a, b, b, d;
  return M;
}

}  // namespace

void CertificateConstants::validate() const {
  auto pos = [](const char* n, double v) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ValidationError(n, "must be > 0");
  };
  pos("certificate.c_x", c_x);
  pos("certificate.c_q", c_q);
  pos("certificate.c_R", c_R);
  pos("certificate.e_xmax", e_xmax);
  if (!(psi_R > 0.0 && psi_R < 1.0)) throw ValidationError("certificate.psi_R", "must be in (0,1)");
  for (double v : psi_q)
    if (!(v > 0.0 && v < 1.0)) throw ValidationError("certificate.psi_q", "must be in (0,1)");
  if (!(B >= 0.0)) throw ValidationError("certificate.B", "must be >= 0");
  for (double v : C_q)
    if (!(v >= 0.0)) throw ValidationError("certificate.C_q", "must be >= 0");
}

DerivedConstants derive_constants(const CertificateConstants& c, const PhysicalParams& p) {
  DerivedConstants d;
  const AllocationGeometry geo(p.r);
  d.lambda_min_PPt = geo.lambda_min_PPt();
  d.gamma = 1.0 / (p.m_L * d.lambda_min_PPt);
  d.beta = p.m_L * d.gamma;
  d.alpha_L = std::sqrt(c.psi_R * (2.0 - c.psi_R));
  for (int j = 0; j < kCables; ++j) {
    d.alpha[j] = std::sqrt(c.psi_q[j] * (2.0 - c.psi_q[j]));
    // spectral norm of hat(r) is |r|
    d.delta[j] = p.m_L * p.r[j].norm() / std::sqrt(d.lambda_min_PPt);
    d.sigma[j] = d.delta[j] / p.m_L;
    d.nu[j] = 1.0 - 4.0 * d.alpha[j] * d.sigma[j];
  }
  Eigen::SelfAdjointEigenSolver<Mat3> es(p.J_L);
  d.lmin_J = es.eigenvalues()(0);
  d.lmax_J = es.eigenvalues()(2);
  return d;
}

PMatrices build_P_matrices(const GainSet& g, const CertificateConstants& c, const Mat3& J_L) {
  Eigen::SelfAdjointEigenSolver<Mat3> es(J_L);
  const double lmin = es.eigenvalues()(0), lmax = es.eigenvalues()(2);
  PMatrices P;
  P.Px_lo = 0.5 * sym2(g.kx, -c.c_x, 1.0);
  P.Px_hi = 0.5 * sym2(g.kx, c.c_x, 1.0);
  P.PR_lo = 0.5 * sym2(2.0 * g.kR, -c.c_R * lmax, lmin);
  P.PR_hi = 0.5 * sym2(2.0 * g.kR / (2.0 - c.psi_R), c.c_R * lmax, lmax);
  P.PR_lo_eff = 0.5 * sym2(g.kR, -c.c_R * lmax, lmin);
  for (int j = 0; j < kCables; ++j) {
    P.Pq_lo[j] = 0.5 * sym2(2.0 * g.kq, -c.c_q, 1.0);
    P.Pq_hi[j] = 0.5 * sym2(2.0 * g.kq / (2.0 - c.psi_q[j]), c.c_q, 1.0);
    P.Pq_lo_eff[j] = 0.5 * sym2(g.kq, -c.c_q, 1.0);
  }
  return P;
}

WBlocks build_W_blocks(const GainSet& g, const CertificateConstants& c, const DerivedConstants& d,
                       int j) {
  const double a = d.alpha[j], be = d.beta, ga = d.gamma, de = d.delta[j], si = d.sigma[j];
  const double B = c.B;
  WBlocks w;
  w.Wx = 0.25 * sym2(c.c_x * g.kx * (1 - 4 * a * be), -0.5 * c.c_x * g.kv * (1 + 4 * a * be),
                     g.kv * (1 - 4 * a * be) - c.c_x);
  w.WR = 0.25 * sym2(c.c_R * g.kR * (1 - 4 * a * si), -0.5 * c.c_R * (g.kOm + B + 4 * a * si),
                     g.kOm * (1 - 4 * a * si) - 2 * c.c_R * d.lmax_J);
  w.Wq = sym2(c.c_q * g.kq, -0.5 * c.c_q * (g.kw + c.C_q[j]), g.kw - c.c_q);
  w.WxR << ga * c.c_x * g.kR + de * c.c_R * g.kx, ga * c.c_x * g.kOm + de * g.kx,
      ga * g.kR + de * c.c_R * g.kv, ga * g.kOm + de * g.kv;
  w.WxR *= a;
  w.Wxq << c.c_x * B, 0.0, be * g.kx * c.e_xmax + B, 0.0;
  w.WqR << c.c_R * B, 0.0, d.alpha_L * si * g.kR + B, 0.0;
  return w;
}

Mat6 build_W(const GainSet& g, const CertificateConstants& c, const PhysicalParams& p, int j) {
  return build_W(g, c, derive_constants(c, p), j);
}

Mat6 build_W(const GainSet& g, const CertificateConstants& c, const DerivedConstants& d, int j) {
  if (j < 0 || j >= kCables) throw InvalidArgument("cable index out of range");
  const WBlocks w = build_W_blocks(g, c, d, j);
  Mat6 W;
  W.block<2, 2>(0, 0) = w.Wx;
  W.block<2, 2>(0, 2) = -0.5 * w.WxR;
  W.block<2, 2>(0, 4) = -0.5 * w.Wxq;
  W.block<2, 2>(2, 0) = -0.5 * w.WxR.transpose();
  W.block<2, 2>(2, 2) = w.WR;
  W.block<2, 2>(2, 4) = -0.5 * w.WqR;
  W.block<2, 2>(4, 0) = -0.5 * w.Wxq.transpose();
  W.block<2, 2>(4, 2) = -0.5 * w.WqR.transpose();
  W.block<2, 2>(4, 4) = w.Wq;
  return W;
}

Mat6 symmetric_part(const Mat6& W) { return 0.5 * (W + W.transpose()); }

SchurResult schur_positivity(const Mat6& W, double margin) {
  if (!W.allFinite()) throw InvalidArgument("W has non-finite entries");
  if ((W - W.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, W.cwiseAbs().maxCoeff()))
    throw InvalidArgument("schur_positivity expects a symmetric matrix");
  SchurResult r;
  r.lambda_exact = Eigen::SelfAdjointEigenSolver<Mat6>(W).eigenvalues()(0);
  const double ninf = -std::numeric_limits<double>::infinity();
  r.cond_lambda = {ninf, ninf, ninf};

  const Mat2 A = W.block<2, 2>(0, 0), X = W.block<2, 2>(0, 2), Y = W.block<2, 2>(0, 4);
  const Mat2 Rb = W.block<2, 2>(2, 2), Z = W.block<2, 2>(2, 4), Q = W.block<2, 2>(4, 4);

  r.cond_lambda[0] = lmin2(Q);
  if (!(r.cond_lambda[0] > margin)) {
    r.failing_condition = 1;
    r.lambda_bound = std::min(r.cond_lambda[0], r.lambda_exact);
    return r;
  }
  const Mat2 Qi = Q.inverse();
  const Mat2 C2 = Rb - Z * Qi * Z.transpose();
  r.cond_lambda[1] = lmin2(0.5 * (C2 + C2.transpose()));
  if (!(r.cond_lambda[1] > margin)) {
    r.failing_condition = 2;
    r.lambda_bound = std::min(r.cond_lambda[1], r.lambda_exact);
    return r;
  }
  const Mat2 K = X - Y * Qi * Z.transpose();
  const Mat2 C2i = C2.inverse();
  const Mat2 C3 = A - Y * Qi * Y.transpose() - K * C2i * K.transpose();
  r.cond_lambda[2] = lmin2(0.5 * (C3 + C3.transpose()));
  if (!(r.cond_lambda[2] > margin)) r.failing_condition = 3;
  r.verdict = r.failing_condition == 0;

  // W (ordered q, R, x) = L D L^T with L unit lower block triangular, so
  // lambda_min(W) >= lambda_min(D) * sigma_min(L)^2.
  Mat6 L = Mat6::Identity();
  L.block<2, 2>(2, 0) = Z * Qi;
  L.block<2, 2>(4, 0) = Y * Qi;
  L.block<2, 2>(4, 2) = K * C2i;
  const auto sv = Eigen::JacobiSVD<Mat6>(L).singularValues();
  const double dmin = *std::min_element(r.cond_lambda.begin(), r.cond_lambda.end());
  const double s = dmin >= 0.0 ? sv(5) : sv(0);
  r.lambda_bound = dmin * s * s;
  return r;
}

CertificateReport certify(const GainSet& g, const CertificateConstants& c, const PhysicalParams& p,
                          double margin) {
  CertificateReport rep;
  rep.gains = g;
  rep.constants = c;
  rep.derived = derive_constants(c, p);
  const PMatrices P = build_P_matrices(g, c, p.J_L);
  double lo = std::min({lmin2(P.Px_lo), lmin2(P.PR_lo)});
  double hi = std::max({lmax2(P.Px_hi), lmax2(P.PR_hi)});
  double lo_hi = std::min(lmin2(P.Px_hi), lmin2(P.PR_hi));
  for (int j = 0; j < kCables; ++j) {
    lo = std::min(lo, lmin2(P.Pq_lo[j]));
    hi = std::max(hi, lmax2(P.Pq_hi[j]));
    lo_hi = std::min(lo_hi, lmin2(P.Pq_hi[j]));
  }
  rep.lambda_min_P_lo = lo;
  rep.lambda_max_P_hi = hi;
  rep.P_pd = lo > margin && lo_hi > margin;
  rep.lambda_min_W = std::numeric_limits<double>::infinity();
  rep.verdict = rep.P_pd;
  if (!rep.P_pd) rep.failing_what = "bounding matrix not positive definite";
  for (int j = 0; j < kCables; ++j) {
    rep.W[j] = schur_positivity(symmetric_part(build_W(g, c, rep.derived, j)), margin);
    rep.lambda_min_W = std::min(rep.lambda_min_W, rep.W[j].lambda_exact);
    if (!rep.W[j].verdict && rep.verdict) {
      rep.verdict = false;
      rep.failing_condition = rep.W[j].failing_condition;
      rep.failing_what = "W_" + std::to_string(j + 1) + " condition " +
                         std::to_string(rep.W[j].failing_condition);
    }
  }
  return rep;
}

std::string CertificateReport::to_text() const {
  std::ostringstream o;
  o.precision(10);
  o << "verdict: " << (verdict ? "certified" : "not certified") << "\n";
  if (!verdict) o << "failing: " << failing_what << " (condition " << failing_condition << ")\n";
  o << "gains.kx: " << gains.kx << "\ngains.kv: " << gains.kv << "\ngains.kR: " << gains.kR
    << "\ngains.kOm: " << gains.kOm << "\ngains.kq: " << gains.kq << "\ngains.kw: " << gains.kw
    << "\n";
  o << "c_x: " << constants.c_x << "\nc_q: " << constants.c_q << "\nc_R: " << constants.c_R
    << "\npsi_R: " << constants.psi_R << "\npsi_q: " << constants.psi_q[0]
    << "\ne_xmax: " << constants.e_xmax << "\nB: " << constants.B << "\n";
  for (int j = 0; j < kCables; ++j) o << "C_q" << j + 1 << ": " << constants.C_q[j] << "\n";
  o << "alpha_L: " << derived.alpha_L << "\ngamma: " << derived.gamma << "\nbeta: " << derived.beta
    << "\nlambda_min_PPt: " << derived.lambda_min_PPt << "\n";
  for (int j = 0; j < kCables; ++j)
    o << "alpha" << j + 1 << ": " << derived.alpha[j] << "\nsigma" << j + 1 << ": "
      << derived.sigma[j] << "\nnu" << j + 1 << ": " << derived.nu[j] << "\n";
  o << "P_pd: " << (P_pd ? "yes" : "no") << "\nlambda_min_P_lo: " << lambda_min_P_lo
    << "\nlambda_max_P_hi: " << lambda_max_P_hi << "\n";
  for (int j = 0; j < kCables; ++j) {
    const auto& w = W[j];
    o << "W" << j + 1 << ".verdict: " << (w.verdict ? "pd" : "not pd") << "\nW" << j + 1
      << ".cond: " << w.cond_lambda[0] << " " << w.cond_lambda[1] << " " << w.cond_lambda[2]
      << "\nW" << j + 1 << ".lambda_bound: " << w.lambda_bound << "\nW" << j + 1
      << ".lambda_exact: " << w.lambda_exact << "\n";
  }
  o << "lambda_min_W: " << lambda_min_W << "\niterations: " << iterations << "\n";
  return o.str();
}

void estimate_trajectory_bounds(CertificateConstants& c, const PhysicalParams& p,
                                const Trajectory& traj, double horizon, double dt) {
  if (!(dt > 0.0) || !(horizon >= 0.0)) throw InvalidArgument("bad sampling for bounds");
  const AllocationGeometry geo(p.r);
  GainSet g;  // gains drop out at zero error
  auto qd_at = [&](double t) {
    const DesiredSample d = traj.at(t);
    SlowState s;
    s.xL = d.x;
    s.vL = d.v;
    s.RL = d.R;
    s.OmL = d.Om;
    const LoadErrors le = load_errors(s, d);
    return desired_cable_attitudes(mu_distribution(wrench_targets(le, s, d, g, p), s.RL, geo));
  };
  double supF = 0.0, supM = 0.0;
  std::array<double, kCables> supw{};
  const long n = std::lround(horizon / dt);
  for (long k = 0; k <= n; ++k) {
    const double t = k * dt;
    const DesiredSample d = traj.at(t);
    supF = std::max(supF, (p.m_L * (d.a + p.g * e3)).norm());
    supM = std::max(supM, (d.Om.cross(p.J_L * d.Om) + p.J_L * d.Om_dot).norm());
    const CableVecs q0 = qd_at(t), qp = qd_at(t + dt), qm = qd_at(t - dt);
    for (int j = 0; j < kCables; ++j)
      supw[j] = std::max(supw[j], q0[j].cross((qp[j] - qm[j]) / (2.0 * dt)).norm());
  }
  c.B = supF + supM;
  for (int j = 0; j < kCables; ++j) c.C_q[j] = 2.0 * supw[j];
}

CertificateReport gain_search(const PhysicalParams& p, const CertificateConstants& c0,
                              const GainSet& base, const GainSearchOptions& opt) {
  c0.validate();
  const DerivedConstants d0 = derive_constants(c0, p);
  for (int j = 0; j < kCables; ++j) {
    if (!(d0.nu[j] > 0.0))
      throw CertificationFailed("nu_" + std::to_string(j + 1) + " = 1 - 4 alpha sigma <= 0", 2);
    if (!(1.0 - 4.0 * d0.alpha[j] * d0.beta > 0.0))
      throw CertificationFailed("1 - 4 alpha beta <= 0 for cable " + std::to_string(j + 1), 3);
  }
  const double nu_min = *std::min_element(d0.nu.begin(), d0.nu.end());

  CertificateReport best;
  best.lambda_min_W = -std::numeric_limits<double>::infinity();
  int iters = 0;
  auto gains_at = [&](const CertificateConstants& c, int nR, int nw) {
    GainSet g = base;
    g.kw = opt.kw0 * std::pow(opt.growth, nw);
    g.kq = g.kw / c.c_q;
    g.kR = opt.kR0 * std::pow(opt.growth, nR);
    g.kOm = c.c_R * g.kR + 2.0 * c.c_R * d0.lmax_J / nu_min;
    return g;
  };
  // shrink the cross weights first, then grow (k_R, k_w) over expanding squares
  for (int shrink_sum = 0; shrink_sum <= 3 * (opt.max_outer - 1); ++shrink_sum) {
    for (int ix = 0; ix < opt.max_outer; ++ix)
      for (int iR = 0; iR < opt.max_outer; ++iR) {
        const int iq = shrink_sum - ix - iR;
        if (iq < 0 || iq >= opt.max_outer) continue;
        CertificateConstants c = c0;
        c.c_x *= std::pow(0.5, ix);
        c.c_R *= std::pow(0.5, iR);
        c.c_q *= std::pow(0.25, iq);
        for (int lvl = 0; lvl < opt.max_level; ++lvl)
          for (int a = 0; a <= lvl; ++a)
            for (int side = 0; side < 2; ++side) {
              const int nR = side == 0 ? lvl : a, nw = side == 0 ? a : lvl;
              if (side == 1 && a == lvl) continue;
              ++iters;
              const GainSet g = gains_at(c, nR, nw);
              CertificateReport rep = certify(g, c, p, opt.margin);
              rep.iterations = iters;
              if (rep.verdict && rep.lambda_min_W >= opt.margin) return rep;
              if (rep.lambda_min_W > best.lambda_min_W) best = rep;
            }
      }
  }
  int cond = best.failing_condition;
  if (cond == 0) cond = 3;
  throw CertificationFailed("no certified gains within the search budget; tightest: " +
                                best.failing_what + ", lambda_min(W) = " +
                                std::to_string(best.lambda_min_W),
                            cond);
}

Eigen::Matrix<double, 12, 1> error_norms(const TrackingErrors& e) {
  Eigen::Matrix<double, 12, 1> z;
  z << e.ex.norm(), e.ev.norm(), e.eR.norm(), e.eOm.norm(), e.eq[0].norm(), e.eq[1].norm(),
      e.eq[2].norm(), e.eq[3].norm(), e.ew[0].norm(), e.ew[1].norm(), e.ew[2].norm(),
      e.ew[3].norm();
  return z;
}

namespace {
double qf(const Mat2& P, double a, double b) {
  const Eigen::Vector2d z(a, b);
  return z.dot(P * z);
}
}  // namespace

double quad_form_hi(const PMatrices& P, const TrackingErrors& e) {
  double v = qf(P.Px_hi, e.ex.norm(), e.ev.norm()) + qf(P.PR_hi, e.eR.norm(), e.eOm.norm());
  for (int j = 0; j < kCables; ++j) v += qf(P.Pq_hi[j], e.eq[j].norm(), e.ew[j].norm());
  return v;
}

double quad_form_lo(const PMatrices& P, const TrackingErrors& e) {
  double v = qf(P.Px_lo, e.ex.norm(), e.ev.norm()) + qf(P.PR_lo_eff, e.eR.norm(), e.eOm.norm());
  for (int j = 0; j < kCables; ++j) v += qf(P.Pq_lo_eff[j], e.eq[j].norm(), e.ew[j].norm());
  return v;
}

LyapunovValue lyapunov_value(const TrackingErrors& e, const GainSet& g,
                             const CertificateConstants& c, const Mat3& J_L) {
  LyapunovValue out;
  double V = 0.5 * e.ev.squaredNorm() + 0.5 * g.kx * e.ex.squaredNorm() + c.c_x * e.ex.dot(e.ev);
  for (int j = 0; j < kCables; ++j) {
    V += 0.5 * e.ew[j].squaredNorm() + g.kq * e.psiq[j] + c.c_q * e.eq[j].dot(e.ew[j]);
    if (!(e.psiq[j] < c.psi_q[j])) out.in_domain = false;
  }
  V += 0.5 * e.eOm.dot(J_L * e.eOm) + g.kR * e.psiR + c.c_R * e.eR.dot(J_L * e.eOm);
  if (!(e.psiR < c.psi_R)) out.in_domain = false;
  if (!(e.ex.norm() < c.e_xmax)) out.in_domain = false;
  out.V = V;
  return out;
}

}  // namespace quadcable
