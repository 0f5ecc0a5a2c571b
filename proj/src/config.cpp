#include "quadcable/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "quadcable/errors.hpp"

namespace quadcable {

namespace pt = boost::property_tree;

std::shared_ptr<const Trajectory> TrajectorySpec::make() const {
  if (name == "paper_fig") return std::make_shared<PaperFigure>(fig);
  if (name == "hover") return std::make_shared<Hover>(hover_point);
  throw ValidationError("trajectory.name", "unknown trajectory '" + name + "'");
}

PhysicalParams ScenarioConfig::full_params(double e) const {
  PhysicalParams p = params;
  p.k = kbar / (e * e);
  p.c = cbar / e;
  return p;
}

void ScenarioConfig::validate() const {
  try {
    params.validate();
  } catch (const ValidationError& e) {
    throw ValidationError("params." + e.field, e.what());
  }
  gains.validate();
  integrator.validate();
  certificate.validate();
  auto pos = [](const char* key, double v) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ValidationError(key, "must be > 0");
  };
  if (model == ModelKind::full) {
    pos("full.eps", eps);
    pos("full.kbar", kbar);
    pos("full.cbar", cbar);
  }
  for (double e : sweep_eps) pos("sweep.eps", e);
  pos("certificate.eps_young", eps_young);
  if (!(settle_time >= 0.0)) throw ValidationError("scenario.settle_time", "must be >= 0");
  if (!(controller.fd_dt > 0.0)) throw ValidationError("controller.fd_dt", "must be > 0");
  if (controller.refine < 0) throw ValidationError("controller.refine", "must be >= 0");
  if (!(controller.mu_min > 0.0)) throw ValidationError("controller.mu_min", "must be > 0");
  const std::pair<const char*, double> lims[] = {
      {"controller.cable_rate_limit", controller.cable_rate_limit},
      {"controller.cable_accel_limit", controller.cable_accel_limit},
      {"controller.att_rate_limit", controller.att_rate_limit},
      {"controller.att_accel_limit", controller.att_accel_limit}};
  for (const auto& [k, v] : lims)
    if (!(v >= 0.0)) throw ValidationError(k, "must be >= 0 (0 = off)");
  if (trajectory.name != "paper_fig" && trajectory.name != "hover")
    throw ValidationError("trajectory.name", "unknown trajectory '" + trajectory.name + "'");
  if (!initial.xL.allFinite() || !initial.vL.allFinite() || !initial.RL.allFinite() ||
      !initial.OmL.allFinite() || !initial.offset.allFinite())
    throw ValidationError("initial", "non-finite initial value");
  if (model == ModelKind::perturbed) disturbance.validate(integrator.horizon, 0.01);
  if (!(search.growth > 1.0)) throw ValidationError("search.growth", "must be > 1");
  if (search.max_level < 1 || search.max_outer < 0)
    throw ValidationError("search.max_level", "must be >= 1");
  if (output_dir.find("..") != std::string::npos)
    throw ValidationError("output.dir", "must not contain '..'");
}

std::vector<std::string> builtin_scenarios() {
  return {"paper_nominal", "paper_disturbed", "epsilon_sweep", "hover", "certified"};
}

namespace {

GainSet sim_gains() {
  GainSet g;
  g.kx = g.kv = 600.0;
  g.kR = 40.0;
  g.kOm = 20.0;
  g.kq = 100.0;
  g.kw = 20.0;
  return g;
}

}  // namespace

namespace {

ScenarioConfig builtin_impl(const std::string& name) {
  ScenarioConfig c;
  c.name = name;
  c.gains = sim_gains();
  c.certificate.psi_q.fill(0.001);
  c.certificate.psi_R = 0.001;
  c.certificate.e_xmax = 0.5;
  if (name == "paper_nominal") {
    return c;
  }
  if (name == "paper_disturbed") {
    c.model = ModelKind::perturbed;
    c.disturbance = paper_disturbances();
    return c;
  }
  if (name == "epsilon_sweep") {
    c.model = ModelKind::full;
    c.gains.kx = c.gains.kv = 20.0;
    c.integrator.dt = 1e-4;
    c.integrator.horizon = 2.0;
    c.settle_time = 1.0;
    return c;
  }
  if (name == "hover") {
    c.trajectory.name = "hover";
    c.initial.xL = Vec3(0.3, -0.2, 4.8);
    c.gains.kx = c.gains.kv = 20.0;
    c.integrator.horizon = 10.0;
    c.settle_time = 5.0;
    return c;
  }
  if (name == "certified") {
    c.gain_source = GainSource::search;
    c.integrator.dt = 1e-4;
    c.integrator.horizon = 2.0;
    c.settle_time = 1.0;
    c.initial.slow_mode = true;
    c.initial.offset = Vec3(0.05, -0.05, 0.05);
    c.initial.cables = CableInit::aligned;
    return c;
  }
  throw ValidationError("scenario.name", "unknown scenario '" + name + "'");
}

}  // namespace

ScenarioConfig builtin_scenario(const std::string& name) {
  ScenarioConfig c = builtin_impl(name);
  c.controller.fd_dt = c.integrator.dt;
  return c;
}

namespace {

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s = {
      {"scenario", {"name", "model", "settle_time"}},
      {"params", {"m_L", "m_Q", "L", "g", "J_L", "J_Q", "r1", "r2", "r3", "r4"}},
      {"full", {"eps", "kbar", "cbar", "init"}},
      {"gains", {"source", "kx", "kv", "kR", "kOm", "kq", "kw", "kRj", "kOmj", "eps_att"}},
      {"search", {"margin", "max_outer", "max_level", "growth", "kw0", "kR0"}},
      {"controller",
       {"thrust", "accel", "rates", "refine", "fd_dt", "mu_min", "yaw", "cable_rate_limit",
        "cable_accel_limit", "att_rate_limit", "att_accel_limit"}},
      {"certificate",
       {"c_x", "c_q", "c_R", "psi_q", "psi_R", "e_xmax", "B", "C_q", "auto_bounds", "eps_young"}},
      {"trajectory", {"name", "ax", "wx", "ay", "wy", "z0", "hover_point"}},
      {"initial", {"xL", "vL", "RL", "OmL", "cables", "slow_mode", "offset"}},
      {"disturbance",
       {"dx_x", "dx_y", "dx_z", "dR_x", "dR_y", "dR_z", "dq1_x", "dq1_y", "dq1_z", "dq2_x",
        "dq2_y", "dq2_z", "dq3_x", "dq3_y", "dq3_z", "dq4_x", "dq4_y", "dq4_z", "x_bar",
        "R_bar", "q_bar"}},
      {"integrator", {"dt", "horizon", "scheme", "retraction"}},
      {"sweep", {"eps"}},
      {"output", {"dir", "csv"}},
  };
  return s;
}

std::vector<double> numbers(const std::string& key, const std::string& text) {
  std::vector<double> out;
  std::string s = text;
  for (char& ch : s)
    if (ch == ',') ch = ' ';
  std::istringstream is(s);
  std::string tok;
  while (is >> tok) {
    size_t pos = 0;
    double v = 0.0;
    try {
      v = std::stod(tok, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != tok.size() || !std::isfinite(v))
      throw ValidationError(key, "not a number: '" + tok + "'");
    out.push_back(v);
  }
  return out;
}

double number(const std::string& key, const std::string& text) {
  const auto v = numbers(key, text);
  if (v.size() != 1) throw ValidationError(key, "expected one number");
  return v[0];
}

int integer(const std::string& key, const std::string& text) {
  const double v = number(key, text);
  if (v != std::floor(v) || std::abs(v) > 1e9) throw ValidationError(key, "expected an integer");
  return static_cast<int>(v);
}

Vec3 vec3(const std::string& key, const std::string& text) {
  const auto v = numbers(key, text);
  if (v.size() != 3) throw ValidationError(key, "expected three numbers");
  return Vec3(v[0], v[1], v[2]);
}

Mat3 mat3(const std::string& key, const std::string& text) {
  const auto v = numbers(key, text);
  if (v.size() == 3) return Vec3(v[0], v[1], v[2]).asDiagonal();
  if (v.size() == 9) {
    Mat3 m;
    m << v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8];
    return m;
  }
  throw ValidationError(key, "expected 3 (diagonal) or 9 (row-major) numbers");
}

bool boolean(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  throw ValidationError(key, "expected true/false");
}

template <class E>
E choice(const std::string& key, const std::string& text,
         std::initializer_list<std::pair<const char*, E>> opts) {
  for (const auto& [n, v] : opts)
    if (text == n) return v;
  std::string all;
  for (const auto& o : opts) all += std::string(all.empty() ? "" : "|") + o.first;
  throw ValidationError(key, "expected one of " + all + ", got '" + text + "'");
}

void apply(ScenarioConfig& c, const std::string& sec, const std::string& k, const std::string& v) {
  const std::string key = sec + "." + k;
  if (sec == "scenario") {
    if (k == "model")
      c.model = choice<ModelKind>(key, v, {{"full", ModelKind::full},
                                           {"reduced", ModelKind::reduced},
                                           {"perturbed", ModelKind::perturbed}});
    else if (k == "settle_time") c.settle_time = number(key, v);
  } else if (sec == "params") {
    auto& p = c.params;
    if (k == "m_L") p.m_L = number(key, v);
    else if (k == "m_Q") p.m_Q = number(key, v);
    else if (k == "L") p.L = number(key, v);
    else if (k == "g") p.g = number(key, v);
    else if (k == "J_L") p.J_L = mat3(key, v);
    else if (k == "J_Q") p.J_Q = mat3(key, v);
    else p.r[k[1] - '1'] = vec3(key, v);
  } else if (sec == "full") {
    if (k == "eps") c.eps = number(key, v);
    else if (k == "kbar") c.kbar = number(key, v);
    else if (k == "cbar") c.cbar = number(key, v);
    else c.full_init = choice<FullInit>(key, v, {{"rest", FullInit::rest},
                                                 {"slow_manifold", FullInit::slow_manifold}});
  } else if (sec == "gains") {
    auto& g = c.gains;
    if (k == "source")
      c.gain_source = choice<GainSource>(key, v, {{"fixed", GainSource::fixed},
                                                  {"search", GainSource::search}});
    else if (k == "kx") g.kx = number(key, v);
    else if (k == "kv") g.kv = number(key, v);
    else if (k == "kR") g.kR = number(key, v);
    else if (k == "kOm") g.kOm = number(key, v);
    else if (k == "kq") g.kq = number(key, v);
    else if (k == "kw") g.kw = number(key, v);
    else if (k == "kRj") g.kRj = number(key, v);
    else if (k == "kOmj") g.kOmj = number(key, v);
    else g.eps_att = number(key, v);
  } else if (sec == "search") {
    auto& s = c.search;
    if (k == "margin") s.margin = number(key, v);
    else if (k == "max_outer") s.max_outer = integer(key, v);
    else if (k == "max_level") s.max_level = integer(key, v);
    else if (k == "growth") s.growth = number(key, v);
    else if (k == "kw0") s.kw0 = number(key, v);
    else s.kR0 = number(key, v);
  } else if (sec == "controller") {
    auto& o = c.controller;
    if (k == "thrust")
      o.thrust = choice<ThrustMode>(key, v, {{"ideal", ThrustMode::ideal},
                                             {"attitude", ThrustMode::attitude}});
    else if (k == "accel")
      o.accel = choice<AccelMode>(key, v, {{"solved", AccelMode::solved},
                                           {"lagged", AccelMode::lagged}});
    else if (k == "rates")
      o.rates = choice<RateMode>(key, v, {{"flow", RateMode::flow},
                                          {"history", RateMode::history}});
    else if (k == "refine") o.refine = integer(key, v);
    else if (k == "fd_dt") {
      o.fd_dt = number(key, v);
      c.fd_dt_from_step = false;
    } else if (k == "mu_min") o.mu_min = number(key, v);
    else if (k == "yaw") o.yaw = number(key, v);
    else if (k == "cable_rate_limit") o.cable_rate_limit = number(key, v);
    else if (k == "cable_accel_limit") o.cable_accel_limit = number(key, v);
    else if (k == "att_rate_limit") o.att_rate_limit = number(key, v);
    else o.att_accel_limit = number(key, v);
  } else if (sec == "certificate") {
    auto& q = c.certificate;
    if (k == "c_x") q.c_x = number(key, v);
    else if (k == "c_q") q.c_q = number(key, v);
    else if (k == "c_R") q.c_R = number(key, v);
    else if (k == "psi_R") q.psi_R = number(key, v);
    else if (k == "e_xmax") q.e_xmax = number(key, v);
    else if (k == "B") q.B = number(key, v);
    else if (k == "auto_bounds") c.auto_bounds = boolean(key, v);
    else if (k == "eps_young") c.eps_young = number(key, v);
    else {
      const auto xs = numbers(key, v);
      auto& dst = k == "psi_q" ? q.psi_q : q.C_q;
      if (xs.size() == 1) dst.fill(xs[0]);
      else if (xs.size() == kCables) std::copy(xs.begin(), xs.end(), dst.begin());
      else throw ValidationError(key, "expected 1 or 4 numbers");
    }
  } else if (sec == "trajectory") {
    auto& t = c.trajectory;
    if (k == "name") t.name = v;
    else if (k == "ax") t.fig.ax = number(key, v);
    else if (k == "wx") t.fig.wx = number(key, v);
    else if (k == "ay") t.fig.ay = number(key, v);
    else if (k == "wy") t.fig.wy = number(key, v);
    else if (k == "z0") t.fig.z0 = number(key, v);
    else t.hover_point = vec3(key, v);
  } else if (sec == "initial") {
    auto& i = c.initial;
    if (k == "xL") i.xL = vec3(key, v);
    else if (k == "vL") i.vL = vec3(key, v);
    else if (k == "RL") i.RL = vec3(key, v);
    else if (k == "OmL") i.OmL = vec3(key, v);
    else if (k == "offset") i.offset = vec3(key, v);
    else if (k == "slow_mode") i.slow_mode = boolean(key, v);
    else i.cables = choice<CableInit>(key, v, {{"down", CableInit::down},
                                               {"aligned", CableInit::aligned}});
  } else if (sec == "disturbance") {
    auto& d = c.disturbance;
    if (k == "x_bar") d.x_bar = number(key, v);
    else if (k == "R_bar") d.R_bar = number(key, v);
    else if (k == "q_bar") {
      const auto xs = numbers(key, v);
      if (xs.size() == 1) d.q_bar.fill(xs[0]);
      else if (xs.size() == kCables) std::copy(xs.begin(), xs.end(), d.q_bar.begin());
      else throw ValidationError(key, "expected 1 or 4 numbers");
    } else {
      VectorSignal* sig = nullptr;
      if (k.rfind("dx_", 0) == 0) sig = &d.dx;
      else if (k.rfind("dR_", 0) == 0) sig = &d.dR;
      else sig = &d.dq[k[2] - '1'];
      const int comp = k.back() - 'x';
      try {
        sig->c[comp] = parse_signal(v);
      } catch (const InvalidArgument& e) {
        throw ValidationError(key, e.what());
      }
    }
  } else if (sec == "integrator") {
    auto& in = c.integrator;
    if (k == "dt") in.dt = number(key, v);
    else if (k == "horizon") in.horizon = number(key, v);
    else if (k == "scheme")
      in.scheme = choice<Scheme>(key, v, {{"rk4", Scheme::rk4}, {"euler", Scheme::euler}});
    else in.retraction = choice<Retraction>(key, v, {{"lie_exp", Retraction::lie_exp},
                                                     {"project", Retraction::project}});
  } else if (sec == "sweep") {
    c.sweep_eps = numbers(key, v);
    if (c.sweep_eps.empty()) throw ValidationError(key, "empty list");
  } else if (sec == "output") {
    if (k == "dir") c.output_dir = v;
    else c.write_csv = boolean(key, v);
  }
}

}  // namespace

ScenarioConfig parse_config(std::istream& in, const std::string& origin) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigParseError(e.message(), origin, e.line());
  }
  // first pass: schema and base scenario
  std::string base = "paper_nominal";
  for (const auto& [sec, node] : tree) {
    const auto it = schema().find(sec);
    if (node.empty() && !node.data().empty())
      throw ValidationError(sec, "key outside a section");
    if (it == schema().end()) throw ValidationError(sec, "unknown section");
    for (const auto& [k, leaf] : node) {
      if (!it->second.count(k)) throw ValidationError(sec + "." + k, "unknown key");
      if (!leaf.empty()) throw ValidationError(sec + "." + k, "nested value");
    }
  }
  if (auto n = tree.get_optional<std::string>("scenario.name")) base = *n;
  ScenarioConfig c = builtin_scenario(base);
  // second pass in a fixed order so later sections see earlier ones
  for (const auto& [sec, keys] : schema()) {
    const auto node = tree.get_child_optional(sec);
    if (!node) continue;
    for (const auto& [k, leaf] : *node) {
      if (sec == "scenario" && k == "name") continue;
      apply(c, sec, k, leaf.data());
    }
  }
  if (c.fd_dt_from_step) c.controller.fd_dt = c.integrator.dt;
  c.validate();
  return c;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ValidationError("config", "cannot open '" + path + "'");
  return parse_config(f, path);
}

namespace {

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}
std::string vec(const Vec3& v) { return num(v.x()) + " " + num(v.y()) + " " + num(v.z()); }
std::string mat(const Mat3& m) {
  std::string s;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) s += (s.empty() ? "" : " ") + num(m(i, j));
  return s;
}
template <size_t N>
std::string list(const std::array<double, N>& a) {
  std::string s;
  for (double v : a) s += (s.empty() ? "" : " ") + num(v);
  return s;
}

}  // namespace

std::string config_to_ini(const ScenarioConfig& c) {
  std::ostringstream o;
  const char* models[] = {"full", "reduced", "perturbed"};
  o << "[scenario]\nname = " << c.name << "\nmodel = " << models[int(c.model)]
    << "\nsettle_time = " << num(c.settle_time) << "\n\n";
  const auto& p = c.params;
  o << "[params]\nm_L = " << num(p.m_L) << "\nm_Q = " << num(p.m_Q) << "\nL = " << num(p.L)
    << "\ng = " << num(p.g) << "\nJ_L = " << mat(p.J_L) << "\nJ_Q = " << mat(p.J_Q) << "\n";
  for (int j = 0; j < kCables; ++j) o << "r" << j + 1 << " = " << vec(p.r[j]) << "\n";
  o << "\n[full]\neps = " << num(c.eps) << "\nkbar = " << num(c.kbar) << "\ncbar = " << num(c.cbar)
    << "\ninit = " << (c.full_init == FullInit::rest ? "rest" : "slow_manifold") << "\n\n";
  const auto& g = c.gains;
  o << "[gains]\nsource = " << (c.gain_source == GainSource::fixed ? "fixed" : "search")
    << "\nkx = " << num(g.kx) << "\nkv = " << num(g.kv) << "\nkR = " << num(g.kR)
    << "\nkOm = " << num(g.kOm) << "\nkq = " << num(g.kq) << "\nkw = " << num(g.kw)
    << "\nkRj = " << num(g.kRj) << "\nkOmj = " << num(g.kOmj) << "\neps_att = " << num(g.eps_att)
    << "\n\n";
  const auto& s = c.search;
  o << "[search]\nmargin = " << num(s.margin) << "\nmax_outer = " << s.max_outer
    << "\nmax_level = " << s.max_level << "\ngrowth = " << num(s.growth) << "\nkw0 = " << num(s.kw0)
    << "\nkR0 = " << num(s.kR0) << "\n\n";
  const auto& k = c.controller;
  o << "[controller]\nthrust = " << (k.thrust == ThrustMode::ideal ? "ideal" : "attitude")
    << "\naccel = " << (k.accel == AccelMode::solved ? "solved" : "lagged")
    << "\nrates = " << (k.rates == RateMode::flow ? "flow" : "history")
    << "\nrefine = " << k.refine << "\nfd_dt = " << num(k.fd_dt) << "\nmu_min = " << num(k.mu_min)
    << "\nyaw = " << num(k.yaw) << "\ncable_rate_limit = " << num(k.cable_rate_limit)
    << "\ncable_accel_limit = " << num(k.cable_accel_limit)
    << "\natt_rate_limit = " << num(k.att_rate_limit)
    << "\natt_accel_limit = " << num(k.att_accel_limit) << "\n\n";
  const auto& q = c.certificate;
  o << "[certificate]\nc_x = " << num(q.c_x) << "\nc_q = " << num(q.c_q) << "\nc_R = " << num(q.c_R)
    << "\npsi_q = " << list(q.psi_q) << "\npsi_R = " << num(q.psi_R)
    << "\ne_xmax = " << num(q.e_xmax) << "\nB = " << num(q.B) << "\nC_q = " << list(q.C_q)
    << "\nauto_bounds = " << (c.auto_bounds ? "true" : "false")
    << "\neps_young = " << num(c.eps_young) << "\n\n";
  const auto& t = c.trajectory;
  o << "[trajectory]\nname = " << t.name << "\nax = " << num(t.fig.ax) << "\nwx = " << num(t.fig.wx)
    << "\nay = " << num(t.fig.ay) << "\nwy = " << num(t.fig.wy) << "\nz0 = " << num(t.fig.z0)
    << "\nhover_point = " << vec(t.hover_point) << "\n\n";
  const auto& i = c.initial;
  o << "[initial]\nxL = " << vec(i.xL) << "\nvL = " << vec(i.vL) << "\nRL = " << vec(i.RL)
    << "\nOmL = " << vec(i.OmL) << "\ncables = " << (i.cables == CableInit::down ? "down" : "aligned")
    << "\nslow_mode = " << (i.slow_mode ? "true" : "false") << "\noffset = " << vec(i.offset)
    << "\n\n";
  const auto& d = c.disturbance;
  o << "[disturbance]\n";
  const char* ax = "xyz";
  for (int a = 0; a < 3; ++a) o << "dx_" << ax[a] << " = " << format_signal(d.dx.c[a]) << "\n";
  for (int a = 0; a < 3; ++a) o << "dR_" << ax[a] << " = " << format_signal(d.dR.c[a]) << "\n";
  for (int j = 0; j < kCables; ++j)
    for (int a = 0; a < 3; ++a)
      o << "dq" << j + 1 << "_" << ax[a] << " = " << format_signal(d.dq[j].c[a]) << "\n";
  o << "x_bar = " << num(d.x_bar) << "\nR_bar = " << num(d.R_bar) << "\nq_bar = " << list(d.q_bar)
    << "\n\n";
  const auto& n = c.integrator;
  o << "[integrator]\ndt = " << num(n.dt) << "\nhorizon = " << num(n.horizon)
    << "\nscheme = " << (n.scheme == Scheme::rk4 ? "rk4" : "euler")
    << "\nretraction = " << (n.retraction == Retraction::lie_exp ? "lie_exp" : "project") << "\n\n";
  o << "[sweep]\neps =";
  for (double e : c.sweep_eps) o << " " << num(e);
  o << "\n\n[output]\ndir = " << c.output_dir << "\ncsv = " << (c.write_csv ? "true" : "false")
    << "\n";
  return o.str();
}

}  // namespace quadcable
