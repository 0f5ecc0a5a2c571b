#include "quadcable/scenario.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "quadcable/dynamics_full.hpp"
#include "quadcable/dynamics_reduced.hpp"
#include "quadcable/errors.hpp"

namespace quadcable {

namespace fs = std::filesystem;

std::string output_root() {
  const char* e = std::getenv("QUADCABLE_OUTPUT_ROOT");
  return e && *e ? std::string(e) : std::string("out");
}

ResolvedGains resolve_gains(const ScenarioConfig& c) {
  ResolvedGains r;
  r.constants = c.certificate;
  if (c.auto_bounds) {
    const auto traj = c.trajectory.make();
    // one period of the figure is enough; cover at least 20 s either way
    estimate_trajectory_bounds(r.constants, c.params, *traj, std::max(20.0, c.integrator.horizon),
                               0.01);
  }
  if (c.gain_source == GainSource::search) {
    r.certificate = gain_search(c.params, r.constants, c.gains, c.search);
    r.gains = r.certificate.gains;
    r.constants = r.certificate.constants;
    r.searched = true;
  } else {
    r.gains = c.gains;
    r.certificate = certify(r.gains, r.constants, c.params);
  }
  return r;
}

namespace {

AccelEstimate accel_from(const ReducedDerivative& d) {
  AccelEstimate a;
  a.vL_dot = d.vL_dot;
  a.OmL_dot = d.OmL_dot;
  return a;
}

GeometricController::PlantFn reduced_plant(const PhysicalParams& p) {
  return [&p](double, const SlowState& x, const ControlInput& u) {
    return accel_from(reduced_derivative(x, u, p));
  };
}

ControllerOptions controller_options(const ScenarioConfig& c) {
  ControllerOptions o = c.controller;
  if (c.fd_dt_from_step) o.fd_dt = c.integrator.dt;
  return o;
}

double orth_err(const Mat3& R) {
  return (R.transpose() * R - Mat3::Identity()).cwiseAbs().maxCoeff();
}

}  // namespace

SlowState initial_slow_state(const ScenarioConfig& c, const GainSet& g) {
  const auto traj = c.trajectory.make();
  SlowState s;
  const InitialSpec& in = c.initial;
  if (in.slow_mode) {
    const DesiredSample d = traj->at(0.0);
    const double disc = g.kv * g.kv - 4.0 * g.kx;
    if (disc < 0.0) throw ValidationError("initial.slow_mode", "needs kv^2 >= 4 kx");
    const double slow = 0.5 * (-g.kv + std::sqrt(disc));
    s.xL = d.x + in.offset;
    s.vL = d.v + slow * in.offset;
    s.RL = d.R * so3_exp(in.RL);
    s.OmL = d.Om + in.OmL;
  } else {
    s.xL = in.xL;
    s.vL = in.vL;
    s.RL = so3_exp(in.RL);
    s.OmL = in.OmL;
  }
  if (in.cables == CableInit::aligned) {
    const PhysicalParams& p = c.params;
    ControllerOptions o = controller_options(c);
    GeometricController ctl(p, g, traj, o);
    for (int j = 0; j < kCables; ++j) s.q[j] = ctl.compute(0.0, s, AccelEstimate{}).q_tilde[j];
    for (int it = 0; it < 3; ++it) {
      SlowState cur = s;
      const ControlOutput out =
          ctl.step(0.0, cur, [&](double t, const SlowState& x, const ControlInput& u) {
            return accel_from(c.model == ModelKind::perturbed
                                  ? perturbed_derivative(x, u, p, c.disturbance, t)
                                  : reduced_derivative(x, u, p));
          });
      ctl.reset();
      for (int j = 0; j < kCables; ++j) {
        s.q[j] = out.q_tilde[j];
        s.w[j] = out.w_tilde[j] - out.w_tilde[j].dot(s.q[j]) * s.q[j];
      }
    }
  }
  return s;
}

namespace {

struct Tracker {
  const ScenarioConfig& c;
  const ResolvedGains& g;
  RunLog log;
  bool keep;
  double sq[3] = {0, 0, 0};
  long n = 0;
  double Vprev = -1.0;
  RunReport& rep;

  void add(double t, const FullState& s, const ControlInput& u, const ControlOutput& out) {
    const TrackingErrors& e = out.errors;
    for (int i = 0; i < 3; ++i) sq[i] += e.ex(i) * e.ex(i);
    ++n;
    if (t >= c.settle_time - 1e-12) rep.sup_ex_post = std::max(rep.sup_ex_post, e.ex.norm());
    rep.max_orth_err = std::max(rep.max_orth_err, orth_err(s.RL));
    for (int j = 0; j < kCables; ++j) {
      rep.max_orth_err = std::max(rep.max_orth_err, orth_err(s.R[j]));
      rep.max_unit_err = std::max(rep.max_unit_err, std::abs(s.q[j].norm() - 1.0));
    }
    const LyapunovValue lv = lyapunov_value(e, g.gains, g.constants, c.params.J_L);
    if (Vprev < 0.0) rep.V0 = lv.V;
    if (Vprev >= 0.0 && lv.V > Vprev * (1.0 + 1e-8) + 1e-15) {
      ++rep.V_increases;
      rep.V_worst_rel_increase = std::max(rep.V_worst_rel_increase, (lv.V - Vprev) / Vprev);
    }
    rep.V_in_domain = rep.V_in_domain && lv.in_domain;
    Vprev = lv.V;
    rep.V_final = lv.V;
    rep.final_ex = e.ex;
    if (keep) {
      LogRow r;
      r.t = t;
      r.s = s;
      r.u = u;
      r.ex = e.ex;
      r.eR = e.eR;
      r.V = lv.V;
      log.rows.push_back(std::move(r));
    }
  }
};

fs::path run_dir(const ScenarioConfig& c) {
  return fs::path(output_root()) / (c.output_dir.empty() ? c.name : c.output_dir);
}

void write_echo(const ScenarioConfig& c, const ResolvedGains& g, const fs::path& dir,
                std::string& path) {
  ScenarioConfig eff = c;
  eff.gains = g.gains;
  if (c.auto_bounds) {
    eff.certificate.B = g.constants.B;
    eff.certificate.C_q = g.constants.C_q;
  }
  std::ofstream f(dir / "effective_config.ini");
  if (!f) throw std::runtime_error("cannot write " + (dir / "effective_config.ini").string());
  f << "; effective configuration\n";
  if (g.searched) f << "; gains below were found by gain_search\n";
  f << config_to_ini(eff);
  path = (dir / "effective_config.ini").string();
}

}  // namespace

RunReport run_scenario(const ScenarioConfig& c, const RunOptions& opt) {
  c.validate();
  return run_scenario(c, resolve_gains(c), opt);
}

RunReport run_scenario(const ScenarioConfig& c, const ResolvedGains& g, const RunOptions& opt) {
  c.validate();
  RunReport rep;
  rep.name = c.name;
  rep.model = c.model;
  rep.gains = g;
  const PhysicalParams& p = c.params;
  const auto traj = c.trajectory.make();
  const ControllerOptions co = controller_options(c);
  GeometricController ctl(p, g.gains, traj, co);
  const bool want_csv = opt.write_files && c.write_csv;
  Tracker tr{c, g, {}, want_csv || opt.keep_log, {}, 0, -1.0, rep};
  tr.log.full = c.model == ModelKind::full;

  fs::path dir;
  if (opt.write_files) {
    dir = run_dir(c);
    fs::create_directories(dir);
    write_echo(c, g, dir, rep.config_path);
  }

  const SlowState s0 = initial_slow_state(c, g.gains);
  IntegratorConfig ic = c.integrator;
  SimResult res;
  if (c.model == ModelKind::full) {
    const PhysicalParams pf = c.full_params(c.eps);
    FullState x0(s0, p.L);
    if (c.full_init == FullInit::slow_manifold) {
      GeometricController c0(p, g.gains, traj, co);
      const ControlOutput o = c0.step(0.0, s0, reduced_plant(p));
      FastVars f = slow_manifold(s0, o.input, load_accel_of(s0, reduced_derivative(s0, o.input, p)),
                                 p, c.kbar);
      f.eps = c.eps;
      x0 = embed_reduced_in_full(s0, f, p.L);
    }
    SimHooks<FullState> h;
    h.control = [&](long, double t, const FullState& s) {
      const SlowState ss = extract_slow(s);
      const ControlOutput out = ctl.step(t, ss, reduced_plant(p));
      tr.add(t, s, out.input, out);
      return out.input;
    };
    h.dynamics = [&](double, const FullState& s, const ControlInput& u) {
      return full_accelerations(s, u, pf);
    };
    res = simulate<FullState>(x0, h, ic, false);
  } else {
    const bool pert = c.model == ModelKind::perturbed;
    auto plant = [&](double t, const SlowState& s, const ControlInput& u) {
      return pert ? perturbed_derivative(s, u, p, c.disturbance, t) : reduced_derivative(s, u, p);
    };
    SimHooks<SlowState> h;
    h.control = [&](long, double t, const SlowState& s) {
      const ControlOutput out =
          ctl.step(t, s, [&](double tt, const SlowState& x, const ControlInput& u) {
            return accel_from(plant(tt, x, u));
          });
      tr.add(t, FullState(s, p.L), out.input, out);
      return out.input;
    };
    h.dynamics = plant;
    res = simulate<SlowState>(s0, h, ic, false);
  }
  rep.samples = res.samples;
  rep.final_time = res.final_time;
  rep.failed = res.failed;
  if (res.failed) rep.failure = res.failure + " (last valid t=" + std::to_string(res.final_time) + ")";
  for (int i = 0; i < 3; ++i) rep.mse[i] = tr.n ? tr.sq[i] / tr.n : 0.0;
  if (want_csv) {
    rep.csv_path = (dir / "log.csv").string();
    export_csv(tr.log, rep.csv_path);
  }
  if (opt.keep_log) rep.log = std::move(tr.log);
  return rep;
}

std::string RunReport::to_text() const {
  std::ostringstream o;
  o.precision(8);
  const char* models[] = {"full", "reduced", "perturbed"};
  o << "scenario: " << name << "\nmodel: " << models[int(model)] << "\nsamples: " << samples
    << "\nfinal_time: " << final_time << "\nstatus: " << (failed ? "FAILED " + failure : "ok")
    << "\nmse: " << mse[0] << " " << mse[1] << " " << mse[2] << "\nfinal_ex: "
    << final_ex.transpose() << " (norm " << final_ex.norm() << ")\nsup_ex_post_settle: "
    << sup_ex_post << "\nmax_rotation_orth_err: " << max_orth_err
    << "\nmax_unit_err: " << max_unit_err << "\nV: " << V0 << " -> " << V_final
    << " (increases " << V_increases << ", in_domain " << (V_in_domain ? "yes" : "no") << ")\n";
  const GainSet& g = gains.gains;
  o << "gains: kx " << g.kx << " kv " << g.kv << " kR " << g.kR << " kOm " << g.kOm << " kq "
    << g.kq << " kw " << g.kw << " kRj " << g.kRj << " kOmj " << g.kOmj
    << (gains.searched ? " (searched)" : " (fixed)") << "\ncertificate: "
    << (gains.certificate.verdict ? "valid" : "not valid: " + gains.certificate.failing_what)
    << ", lambda_min_W " << gains.certificate.lambda_min_W << "\n";
  if (!csv_path.empty()) o << "csv: " << csv_path << "\n";
  if (!config_path.empty()) o << "config: " << config_path << "\n";
  return o.str();
}

SweepReport epsilon_sweep(const ScenarioConfig& cfg, const std::vector<double>& eps,
                          bool write_files) {
  ScenarioConfig c = cfg;
  c.model = ModelKind::full;
  c.validate();
  if (eps.empty()) throw ValidationError("sweep.eps", "empty list");
  for (double e : eps)
    if (!(e > 0.0)) throw ValidationError("sweep.eps", "must be > 0");
  const ResolvedGains g = resolve_gains(c);
  const PhysicalParams& p = c.params;
  const auto traj = c.trajectory.make();
  const ControllerOptions co = controller_options(c);
  const SlowState s0 = initial_slow_state(c, g.gains);

  std::vector<SlowState> ref;
  {
    GeometricController ctl(p, g.gains, traj, co);
    SimHooks<SlowState> h;
    h.control = [&](long, double t, const SlowState& s) {
      return ctl.step(t, s, reduced_plant(p)).input;
    };
    h.dynamics = [&](double, const SlowState& s, const ControlInput& u) {
      return reduced_derivative(s, u, p);
    };
    h.record = [&](long, double, const SlowState& s, const ControlInput&) { ref.push_back(s); };
    const SimResult r = simulate<SlowState>(s0, h, c.integrator, false);
    if (r.failed) throw NumericalBlowup("reduced reference run failed: " + r.failure, r.samples, r.final_time);
  }

  SweepReport rep;
  for (double e : eps) {
    SweepEntry en;
    en.eps = e;
    const PhysicalParams pf = c.full_params(e);
    GeometricController ctl(p, g.gains, traj, co);
    FullState x0(s0, p.L);
    if (c.full_init == FullInit::slow_manifold) {
      GeometricController c0(p, g.gains, traj, co);
      const ControlOutput o = c0.step(0.0, s0, reduced_plant(p));
      FastVars f = slow_manifold(s0, o.input, load_accel_of(s0, reduced_derivative(s0, o.input, p)),
                                 p, c.kbar);
      f.eps = e;
      x0 = embed_reduced_in_full(s0, f, p.L);
    }
    SimHooks<FullState> h;
    h.control = [&](long, double t, const FullState& s) {
      const SlowState ss = extract_slow(s);
      return ctl.step(t, ss, reduced_plant(p)).input;
    };
    h.dynamics = [&](double, const FullState& s, const ControlInput& u) {
      return full_accelerations(s, u, pf);
    };
    h.record = [&](long k, double, const FullState& s, const ControlInput&) {
      const SlowState& r = ref[k];
      auto m = [](const auto& a, const auto& b) { return (a - b).cwiseAbs().maxCoeff(); };
      double d = std::max({m(s.xL, r.xL), m(s.vL, r.vL), m(s.RL, r.RL), m(s.OmL, r.OmL)});
      double dq = 0.0;
      for (int j = 0; j < kCables; ++j) {
        d = std::max({d, m(s.q[j], r.q[j]), m(s.w[j], r.w[j])});
        dq = std::max({dq, m(s.R[j], r.R[j]), m(s.Om[j], r.Om[j])});
      }
      en.sup_dev = std::max(en.sup_dev, d);
      en.sup_dev_quads = std::max(en.sup_dev_quads, dq);
    };
    const SimResult r = simulate<FullState>(x0, h, c.integrator, false);
    en.failed = r.failed;
    if (r.failed) en.failure = r.failure + " (t=" + std::to_string(r.final_time) + ")";
    rep.entries.push_back(en);
  }

  std::vector<double> lx, ly;
  rep.strictly_decreasing = true;
  const SweepEntry* prev = nullptr;
  for (const auto& en : rep.entries) {
    if (en.failed) {
      rep.strictly_decreasing = false;
      continue;
    }
    if (prev && prev->eps > en.eps && !(en.sup_dev < prev->sup_dev)) rep.strictly_decreasing = false;
    prev = &en;
    if (en.sup_dev > 0.0) {
      lx.push_back(std::log(en.eps));
      ly.push_back(std::log(en.sup_dev));
    }
  }
  if (lx.size() >= 2) {
    double mx = 0, my = 0;
    for (size_t i = 0; i < lx.size(); ++i) {
      mx += lx[i];
      my += ly[i];
    }
    mx /= lx.size();
    my /= ly.size();
    double sxy = 0, sxx = 0;
    for (size_t i = 0; i < lx.size(); ++i) {
      sxy += (lx[i] - mx) * (ly[i] - my);
      sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    if (sxx > 0.0) rep.slope = sxy / sxx;
  }
  if (rep.entries.size() < 2) rep.strictly_decreasing = false;

  if (write_files) {
    const fs::path dir = run_dir(c);
    fs::create_directories(dir);
    std::string cfg_path;
    write_echo(c, g, dir, cfg_path);
    std::ofstream f(dir / "sweep.csv");
    if (!f) throw std::runtime_error("cannot write " + (dir / "sweep.csv").string());
    f << "eps,sup_dev,sup_dev_quads,failed\n";
    char buf[128];
    for (const auto& en : rep.entries) {
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%d\n", en.eps, en.sup_dev,
                    en.sup_dev_quads, en.failed ? 1 : 0);
      f << buf;
    }
  }
  return rep;
}

std::string SweepReport::to_text() const {
  std::ostringstream o;
  o.precision(8);
  for (const auto& e : entries) {
    o << "eps " << e.eps << ": ";
    if (e.failed) o << "failed (" << e.failure << ")";
    else o << "sup deviation " << e.sup_dev << " (quadrotor states " << e.sup_dev_quads << ")";
    o << "\n";
  }
  o << "strictly decreasing: " << (strictly_decreasing ? "yes" : "no") << "\norder: ";
  if (slope) o << *slope;
  else o << "N/A";
  o << "\n";
  return o.str();
}

std::vector<GainLevel> gain_level_study(const ScenarioConfig& cfg,
                                        const std::vector<double>& levels) {
  std::vector<GainLevel> out;
  for (double lv : levels) {
    ScenarioConfig c = cfg;
    c.gains.kx = c.gains.kv = lv;
    c.gain_source = GainSource::search;
    // the searched companions grow faster than the level; the sampled loop
    // needs roughly (level0/level)^2 of the first step
    const double r = levels.front() / lv;
    c.integrator.dt = cfg.integrator.dt * r * r;
    GainLevel gl;
    gl.level = lv;
    const ResolvedGains g = resolve_gains(c);
    gl.gains = g.gains;
    gl.certified = g.certificate.verdict;
    gl.lambda_min_W = g.certificate.lambda_min_W;
    gl.run = run_scenario(c, g, RunOptions{false, false});
    out.push_back(std::move(gl));
  }
  return out;
}

}  // namespace quadcable
