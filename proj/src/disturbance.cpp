#include "quadcable/disturbance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "quadcable/errors.hpp"

namespace quadcable {

double SignalTerm::eval(double t) const {
  switch (kind) {
    case constant: return amp;
    case sine: return amp * std::sin(rate * t + phase);
    case cosine: return amp * std::cos(rate * t + phase);
    case exponential: return amp * std::exp(-rate * t);
  }
  return 0.0;
}

double SignalTerm::sup() const {
  if (kind == exponential && rate < 0.0) return std::numeric_limits<double>::infinity();
  return std::abs(amp);
}

double ScalarSignal::eval(double t) const {
  double s = 0.0;
  for (const auto& term : terms) s += term.eval(t);
  return s;
}

double ScalarSignal::sup() const {
  double s = 0.0;
  for (const auto& term : terms) s += term.sup();
  return s;
}

Vec3 VectorSignal::eval(double t) const { return Vec3(c[0].eval(t), c[1].eval(t), c[2].eval(t)); }

double VectorSignal::norm_bound() const {
  return std::sqrt(std::pow(c[0].sup(), 2) + std::pow(c[1].sup(), 2) + std::pow(c[2].sup(), 2));
}

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t");
  if (a == std::string::npos) return "";
  return s.substr(a, s.find_last_not_of(" \t") - a + 1);
}

double number(const std::string& s, const std::string& whole) {
  try {
    size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (trim(s.substr(pos)).empty() && std::isfinite(v)) return v;
  } catch (const std::exception&) {
  }
  throw InvalidArgument("bad number '" + s + "' in signal '" + whole + "'");
}

}  // namespace

ScalarSignal parse_signal(const std::string& text) {
  ScalarSignal out;
  const std::string body = trim(text);
  if (body.empty() || body == "0") return out;
  if (body.back() == '+') throw InvalidArgument("dangling '+' in '" + text + "'");
  std::stringstream ss(body);
  std::string item;
  while (std::getline(ss, item, '+')) {
    item = trim(item);
    std::vector<std::string> f;
    std::stringstream is(item);
    std::string part;
    while (std::getline(is, part, ':')) f.push_back(trim(part));
    if (f.size() < 2 || f.size() > 4) throw InvalidArgument("bad term '" + item + "' in '" + text + "'");
    SignalTerm t;
    if (f[0] == "const") t.kind = SignalTerm::constant;
    else if (f[0] == "sin") t.kind = SignalTerm::sine;
    else if (f[0] == "cos") t.kind = SignalTerm::cosine;
    else if (f[0] == "exp") t.kind = SignalTerm::exponential;
    else throw InvalidArgument("unknown term kind '" + f[0] + "' in '" + text + "'");
    t.amp = number(f[1], text);
    if (f.size() > 2) t.rate = number(f[2], text);
    if (f.size() > 3) t.phase = number(f[3], text);
    if (t.kind == SignalTerm::constant && f.size() > 2)
      throw InvalidArgument("const takes one value in '" + text + "'");
    out.terms.push_back(t);
  }
  return out;
}

std::string format_signal(const ScalarSignal& s) {
  if (s.terms.empty()) return "0";
  std::ostringstream o;
  o.precision(17);
  const char* names[] = {"const", "sin", "cos", "exp"};
  for (size_t i = 0; i < s.terms.size(); ++i) {
    const auto& t = s.terms[i];
    if (i) o << " + ";
    o << names[t.kind] << ":" << t.amp;
    if (t.kind != SignalTerm::constant) o << ":" << t.rate;
    if ((t.kind == SignalTerm::sine || t.kind == SignalTerm::cosine) && t.phase != 0.0)
      o << ":" << t.phase;
  }
  return o.str();
}

LoadDisturbance DisturbanceSpec::at(double t) const {
  LoadDisturbance d;
  d.dx = dx.eval(t);
  d.dR = dR.eval(t);
  for (int j = 0; j < kCables; ++j) d.dq[j] = dq[j].eval(t);
  return d;
}

double DisturbanceSpec::bound_x() const { return x_bar >= 0.0 ? x_bar : dx.norm_bound(); }
double DisturbanceSpec::bound_R() const { return R_bar >= 0.0 ? R_bar : dR.norm_bound(); }
double DisturbanceSpec::bound_q(int j) const {
  return q_bar[j] >= 0.0 ? q_bar[j] : dq[j].norm_bound();
}

bool DisturbanceSpec::zero() const {
  auto z = [](const VectorSignal& v) { return v.c[0].zero() && v.c[1].zero() && v.c[2].zero(); };
  bool all = z(dx) && z(dR);
  for (const auto& q : dq) all = all && z(q);
  return all;
}

void DisturbanceSpec::validate(double horizon, double dt) const {
  if (!std::isfinite(bound_x())) throw ValidationError("disturbance.dx", "unbounded signal");
  if (!std::isfinite(bound_R())) throw ValidationError("disturbance.dR", "unbounded signal");
  for (int j = 0; j < kCables; ++j)
    if (!std::isfinite(bound_q(j)))
      throw ValidationError("disturbance.dq" + std::to_string(j + 1), "unbounded signal");
  const long n = std::max(1L, std::lround(horizon / dt));
  const double slack = 1e-12;
  for (long k = 0; k <= n; ++k) {
    const double t = k * dt;
    const LoadDisturbance d = at(t);
    if (d.dx.norm() > bound_x() * (1 + slack))
      throw ValidationError("disturbance.x_bar", "signal exceeds bound at t=" + std::to_string(t));
    if (d.dR.norm() > bound_R() * (1 + slack))
      throw ValidationError("disturbance.R_bar", "signal exceeds bound at t=" + std::to_string(t));
    for (int j = 0; j < kCables; ++j)
      if (d.dq[j].norm() > bound_q(j) * (1 + slack))
        throw ValidationError("disturbance.q_bar" + std::to_string(j + 1),
                              "signal exceeds bound at t=" + std::to_string(t));
  }
}

DisturbanceSpec no_disturbance() { return DisturbanceSpec{}; }

DisturbanceSpec paper_disturbances() {
  DisturbanceSpec d;
  using T = SignalTerm;
  d.dx.c[0].terms = {T{T::sine, 0.5, 0.43, 0.0}};
  d.dx.c[1].terms = {T{T::cosine, 0.5, 0.21, 0.0}};
  d.dx.c[2].terms = {T{T::sine, 0.2, 0.75, 0.0}, T{T::exponential, -1.0, 1.0, 0.0}};
  d.dR.c[0].terms = {T{T::constant, 0.2}, T{T::sine, 0.45, 3.0, 0.0}};
  d.dR.c[1].terms = {T{T::constant, 0.3}, T{T::cosine, -0.65, 1.4, 0.0}};
  d.dR.c[2].terms = {T{T::sine, 0.05, 2.1, 0.0}};
  return d;
}

ReducedDerivative perturbed_derivative(const ReducedState& s, const ControlInput& in,
                                       const PhysicalParams& p, const DisturbanceSpec& d,
                                       double t) {
  return reduced_derivative(s, in, p, d.at(t));
}

UltimateBoundReport ultimate_bound(const GainSet& g, const CertificateConstants& c,
                                   const PhysicalParams& p, double x_bar, double R_bar,
                                   double q_bar, double eps_young, EScales sc) {
  if (!(eps_young > 0.0)) throw InvalidArgument("eps_young must be positive");
  if (!(x_bar >= 0.0 && R_bar >= 0.0 && q_bar >= 0.0))
    throw InvalidArgument("disturbance bounds must be nonnegative");
  UltimateBoundReport r;
  r.eps_young = eps_young;
  r.m_r = sc.m_r > 0.0 ? sc.m_r : p.m_L;
  r.L_r = sc.L_r > 0.0 ? sc.L_r : 1.0;
  r.L_c = sc.L_c > 0.0 ? sc.L_c : p.L;
  r.E << c.c_x * x_bar / r.m_r, x_bar / r.m_r, 3.0 * c.c_R * R_bar / (2.0 * r.m_r * r.L_r),
      3.0 * R_bar / (2.0 * r.m_r * r.L_r), c.c_q * q_bar / (p.m_Q * r.L_c),
      q_bar / (p.m_Q * r.L_c);
  r.E_norm = r.E.norm();

  const DerivedConstants dc = derive_constants(c, p);
  r.lambda_min_W = std::numeric_limits<double>::infinity();
  for (int j = 0; j < kCables; ++j) {
    Eigen::SelfAdjointEigenSolver<Mat6> es(symmetric_part(build_W(g, c, dc, j)));
    r.lambda_min_W = std::min(r.lambda_min_W, es.eigenvalues()(0));
  }
  r.lambda_min_Wstar = r.lambda_min_W - eps_young;
  if (!(r.lambda_min_Wstar > 0.0))
    throw InvalidGains("W - eps I is not positive definite (lambda_min " +
                       std::to_string(r.lambda_min_Wstar) + ")");

  const PMatrices P = build_P_matrices(g, c, p.J_L);
  auto lmin = [](const Mat2& m) { return Eigen::SelfAdjointEigenSolver<Mat2>(m).eigenvalues()(0); };
  auto lmax = [](const Mat2& m) { return Eigen::SelfAdjointEigenSolver<Mat2>(m).eigenvalues()(1); };
  r.lambda_max_P_hi = std::max(lmax(P.Px_hi), lmax(P.PR_hi));
  r.lambda_min_P_lo = std::min(lmin(P.Px_lo), lmin(P.PR_lo_eff));
  for (int j = 0; j < kCables; ++j) {
    r.lambda_max_P_hi = std::max(r.lambda_max_P_hi, lmax(P.Pq_hi[j]));
    r.lambda_min_P_lo = std::min(r.lambda_min_P_lo, lmin(P.Pq_lo_eff[j]));
  }
  r.d1 = r.lambda_max_P_hi / r.lambda_min_Wstar * r.E_norm * r.E_norm / (64.0 * eps_young);
  r.radius = r.lambda_min_P_lo > 0.0 ? std::sqrt(r.d1 / r.lambda_min_P_lo)
                                     : std::numeric_limits<double>::infinity();
  return r;
}

UltimateBoundReport ultimate_bound(const GainSet& g, const CertificateConstants& c,
                                   const PhysicalParams& p, const DisturbanceSpec& d,
                                   double eps_young, EScales sc) {
  double q = 0.0;
  for (int j = 0; j < kCables; ++j) q = std::max(q, d.bound_q(j));
  return ultimate_bound(g, c, p, d.bound_x(), d.bound_R(), q, eps_young, sc);
}

std::string UltimateBoundReport::to_text() const {
  std::ostringstream o;
  o.precision(10);
  o << "eps_young: " << eps_young << "\nE: [" << E.transpose() << "]\n|E|: " << E_norm
    << "\nm_r: " << m_r << " (interpretive)\nL_r: " << L_r << " (interpretive)\nL_c: " << L_c
    << " (interpretive)\nlambda_min_W: " << lambda_min_W
    << "\nlambda_min_Wstar: " << lambda_min_Wstar << "\nlambda_max_P_hi: " << lambda_max_P_hi
    << "\nlambda_min_P_lo: " << lambda_min_P_lo << "\nd1: " << d1 << "\nradius: " << radius
    << "\n";
  return o.str();
}

}  // namespace quadcable
