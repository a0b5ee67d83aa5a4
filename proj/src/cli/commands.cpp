#include "thermolab/cli/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>

#include <fmt/format.h>

#include "thermolab/complex_transfer.hpp"
#include "thermolab/dolgopyat.hpp"
#include "thermolab/errors.hpp"
#include "thermolab/orbits_zeta.hpp"
#include "thermolab/potentials.hpp"
#include "thermolab/rpf.hpp"
#include "thermolab/suspension.hpp"

namespace thermolab::cli {

namespace {

using Metrics = std::vector<std::pair<std::string, std::string>>;

std::vector<double> linear_grid(double lo, double hi, int n) {
  std::vector<double> g(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) g[i] = n == 1 ? lo : lo + (hi - lo) * i / (n - 1);
  return g;
}

std::vector<double> step_grid(double lo, double hi, double step) {
  const auto n = static_cast<int>(std::floor((hi - lo) / step + 1e-9)) + 1;
  std::vector<double> g;
  for (int i = 0; i < n; ++i) g.push_back(lo + step * i);
  return g;
}

RealFunction roof_at_depth(const RunConfig& cfg) {
  const int t = cfg.tau.table_depth().value_or(cfg.depth);
  auto tau = truncate_to_depth(cfg.model, cfg.tau, t);
  validate_roof(tau);
  return tau;
}

CommandOutput cmd_pressure(const RunConfig& cfg) {
  const double P = pressure(cfg.model, cfg.f, cfg.depth);
  const double htop = pressure(cfg.model, PotentialSpec::constant(cfg.model, 0.0), 1);
  const double Pf = solve_P_f(cfg.model, cfg.f, cfg.tau, cfg.depth);
  CsvTable t({"quantity", "value"});
  t.row({"pressure", cell(P)}).row({"topological_entropy", cell(htop)}).row({"P_f", cell(Pf)});
  return {t, {{"pressure", cell(P)}, {"topological_entropy", cell(htop)}, {"P_f", cell(Pf)}, {"depth", cell(cfg.depth)}}};
}

CommandOutput cmd_gibbs(const RunConfig& cfg) {
  const auto rpf = leading_triple(build_transfer_matrix(cfg.model, cfg.f, cfg.depth));
  const int k = cfg.model.alphabet_size();
  CsvTable t({"length", "word", "measure", "ratio"});
  double lo = INFINITY, hi = 0.0;
  for (int m = 1; m <= cfg.gibbs_max_length; ++m) {
    auto space = WordSpace::make(cfg.model, m);
    for (std::size_t i = 0; i < space->size(); ++i) {
      const auto w = space->word(i);
      const double mu = cylinder_measure(rpf, w);
      const double r = gibbs_ratio(rpf, w);
      lo = std::min(lo, r);
      hi = std::max(hi, r);
      t.row({cell(m), Word(w).to_string(k), cell(mu), cell(r)});
    }
  }
  return {t,
          {{"pressure", cell(rpf.pressure())},
           {"ratio_min", cell(lo)},
           {"ratio_max", cell(hi)},
           {"ratio_spread", cell(hi / lo)}}};
}

CommandOutput cmd_normalize(const RunConfig& cfg) {
  CsvTable t({"a", "P_f", "lambda_a", "max_err_M1", "T"});
  double worst = 0.0;
  for (double a : cfg.normalize_a) {
    const auto np = normalize_potential(cfg.model, cfg.f, cfg.tau, a, cfg.depth, cfg.a_max);
    const auto one = RealFunction::constant(np.M.space_ptr(), 1.0);
    const auto M1 = np.M.apply(one);
    double err = 0.0;
    for (std::size_t i = 0; i < M1.size(); ++i) err = std::max(err, std::abs(M1[i] - 1.0));
    worst = std::max(worst, err);
    t.row({cell(a), cell(np.P_f), cell(np.lambda_a), cell(err), cell(np.bound_T())});
  }
  const auto np0 = normalize_potential(cfg.model, cfg.f, cfg.tau, 0.0, cfg.depth, cfg.a_max);
  return {t, {{"max_err_M1", cell(worst)}, {"mixing_rate", cell(mixing_rate(np0))}}};
}

CommandOutput cmd_scan_b(const RunConfig& cfg) {
  const auto np = normalize_potential(cfg.model, cfg.f, cfg.tau, cfg.a, cfg.depth, cfg.a_max);
  CsvTable t({"b", "rho_hat", "final_norm", "m_max", "depth"});
  double worst = 0.0;
  for (double b : linear_grid(cfg.scan_bmin, cfg.scan_bmax, cfg.scan_steps)) {
    const auto prof = contraction_profile(np, b, cfg.scan_m);
    worst = std::max(worst, prof.rho_hat);
    t.row({cell(b), cell(prof.rho_hat), cell(prof.points.back().norm), cell(cfg.scan_m), cell(prof.depth)});
  }
  return {t, {{"max_rho_hat", cell(worst)}, {"rows", cell(cfg.scan_steps)}}};
}

CommandOutput cmd_contraction(const RunConfig& cfg) {
  const auto np = normalize_potential(cfg.model, cfg.f, cfg.tau, cfg.a, cfg.depth, cfg.a_max);
  const auto prof = contraction_profile(np, cfg.b, cfg.contraction_m);
  CsvTable t({"m", "norm", "log_norm", "sup", "seminorm", "envelope"});
  for (const auto& p : prof.points)
    t.row({cell(p.m), cell(p.norm), cell(p.log_norm), cell(p.sup), cell(p.seminorm), cell(p.envelope)});
  return {t,
          {{"b", cell(cfg.b)},
           {"rho_hat", cell(prof.rho_hat)},
           {"rho_endpoints", cell(prof.rho_endpoints)},
           {"final_norm", cell(prof.points.back().norm)},
           {"depth", cell(prof.depth)}}};
}

DolgopyatSetup setup_for(const RunConfig& cfg) {
  return build_dolgopyat_setup(cfg.model, cfg.f, cfg.tau, cfg.a, cfg.b, cfg.dolgopyat, cfg.depth);
}

CommandOutput cmd_dolgopyat_check(const RunConfig& cfg) {
  const auto s = setup_for(cfg);
  const auto H = RealFunction::constant(s.work, 1.0);
  const auto h = to_complex(H);
  const auto rep = select_J(s, h, H);
  const auto l2 = l2_contraction_check(s, rep.omega, H);
  const auto cone = cone_membership(s.family, H, s.params.E);
  const int k = cfg.model.alphabet_size();

  CsvTable t({"m", "l_b", "delta_hat", "branch1", "branch2", "case"});
  std::size_t c1 = 0, c2 = 0;
  for (std::size_t m = 0; m < s.family.size(); ++m) {
    const auto it = std::find_if(rep.omega.J.begin(), rep.omega.J.end(), [m](const Triple& tr) { return tr.m == m; });
    const int l = it == rep.omega.J.end() ? 0 : it->l;
    const auto& pair = s.pairs.pairs[m][static_cast<std::size_t>(l)];
    c1 += rep.cases[m] == CaseLabel::Case1;
    c2 += rep.cases[m] == CaseLabel::Case2;
    t.row({cell(m), cell(s.family.length), cell(s.pairs.delta_hat[m]), pair.w1.to_string(k), pair.w2.to_string(k),
           to_string(rep.cases[m])});
  }
  return {t,
          {{"b", cell(cfg.b)},
           {"l_b", cell(s.family.length)},
           {"members", cell(s.family.size())},
           {"work_depth", cell(s.work_depth())},
           {"T", cell(s.T)},
           {"case1", cell(c1)},
           {"case2", cell(c2)},
           {"fail", cell(rep.failures())},
           {"domination_violations", cell(rep.violations)},
           {"cone_ok", cone.member ? "true" : "false"},
           {"rho3", cell(l2.rho3)},
           {"l2_ok", l2.ok ? "true" : "false"},
           {"analytic_mu0", cell(analytic_mu0(s))}}};
}

CommandOutput cmd_iterate(const RunConfig& cfg) {
  const auto s = setup_for(cfg);
  const auto res = dominated_iteration(s, cfg.iterate_steps);
  CsvTable t({"step", "l2_H", "sup_h", "sup_H", "domination", "case1", "case2", "fail"});
  for (const auto& st : res.steps)
    t.row({cell(st.m), cell(st.l2_H), cell(st.sup_h), cell(st.sup_H), st.domination_ok ? "ok" : "violated",
           cell(st.case1), cell(st.case2), cell(st.fails)});
  return {t,
          {{"b", cell(cfg.b)},
           {"steps", cell(res.steps.size())},
           {"aborted", res.aborted ? "true" : "false"},
           {"abort_step", cell(res.abort_step)},
           {"l2_nonincreasing", res.l2_nonincreasing() ? "true" : "false"}}};
}

std::vector<CorrelationPoint> run_correlation(const RunConfig& cfg, const SuspensionModel& model) {
  const auto A = cfg.obs_a.build(cfg.model);
  const auto B = cfg.obs_b.build(cfg.model);
  return correlation_series(model, A, B, step_grid(cfg.corr_tmin, cfg.corr_tmax, cfg.corr_dt), cfg.corr);
}

CommandOutput cmd_correlate(const RunConfig& cfg) {
  const auto model = build_suspension(cfg.model, cfg.f, cfg.tau, cfg.depth);
  const auto pts = run_correlation(cfg, model);
  CsvTable t({"t", "C", "estimator", "samples"});
  double max_se = 0.0;
  for (const auto& p : pts) {
    t.row({cell(p.t), cell(p.C), p.estimator, cell(p.samples)});
    max_se = std::max(max_se, p.std_error);
  }
  return {t, {{"points", cell(pts.size())}, {"mean_roof", cell(model.mean_roof)}, {"max_std_error", cell(max_se)}}};
}

CommandOutput cmd_decay(const RunConfig& cfg) {
  const auto model = build_suspension(cfg.model, cfg.f, cfg.tau, cfg.depth);
  const auto pts = run_correlation(cfg, model);
  std::vector<std::pair<double, double>> series;
  std::vector<double> floors;
  for (const auto& p : pts) {
    series.emplace_back(p.t, p.C);
    floors.push_back(cfg.decay_noise_sigmas * p.std_error);
  }
  const auto fit = decay_fit(series, cfg.decay_floor, floors);
  CsvTable t({"t", "C", "std_error", "floor", "used"});
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double fl = std::max(cfg.decay_floor, floors[i]);
    t.row({cell(pts[i].t), cell(pts[i].C), cell(pts[i].std_error), cell(fl), std::abs(pts[i].C) > fl ? "1" : "0"});
  }
  return {t,
          {{"c", cell(fit.c)},
           {"quality", cell(fit.quality)},
           {"intercept", cell(fit.intercept)},
           {"used", cell(fit.used)},
           {"estimator", pts.empty() ? "" : pts.back().estimator}}};
}

CommandOutput cmd_orbits(const RunConfig& cfg) {
  const auto table = build_orbit_table(roof_at_depth(cfg), cfg.orbits_n_max, cfg.orbit_ceiling);
  const int k = cfg.model.alphabet_size();
  CsvTable t({"length", "period", "word"});
  for (const auto& o : table.orbits) t.row({cell(o.length), cell(o.period), o.word(k).to_string(k)});
  return {t,
          {{"orbits", cell(table.orbits.size())},
           {"n_max", cell(table.n_max)},
           {"divisor_identity", divisor_identity_holds(table) ? "true" : "false"}}};
}

CommandOutput cmd_zeta(const RunConfig& cfg) {
  const auto tau = roof_at_depth(cfg);
  CsvTable t({"s_re", "s_im", "value_re", "value_im", "tail_bound", "mode"});
  std::size_t divergent = 0;
  for (const auto& mode_name : cfg.zeta_modes) {
    const auto mode = parse_zeta_mode(mode_name);
    for (const auto& s : cfg.zeta_s) {
      const int n = mode == ZetaMode::TraceLog ? cfg.zeta_n_max : cfg.zeta_orbit_n_max;
      const auto z = zeta_truncated(tau, s, n, mode, cfg.orbit_ceiling);
      divergent += z.divergent;
      t.row({cell(s.real()), cell(s.imag()), cell(z.value.real()), cell(z.value.imag()), cell(z.tail_bound),
             to_string(z.mode)});
    }
  }
  return {t,
          {{"n_max", cell(cfg.zeta_n_max)}, {"orbit_n_max", cell(cfg.zeta_orbit_n_max)}, {"divergent", cell(divergent)}}};
}

CommandOutput cmd_poc(const RunConfig& cfg) {
  const auto tau = roof_at_depth(cfg);
  const double h = entropy_hT(tau);
  int n_max = cfg.poc_n_max;
  if (n_max == 0) n_max = static_cast<int>(std::ceil(cfg.poc_lambda_max / min_value(tau) - 1e-12));
  const auto table = build_orbit_table(tau, n_max, cfg.orbit_ceiling);
  CsvTable t({"lambda", "pi", "li", "ratio"});
  for (double lam : step_grid(cfg.poc_lambda_min, cfg.poc_lambda_max, cfg.poc_lambda_step)) {
    const auto pi = count_pi(table, lam);
    const double l = li(std::exp(h * lam));
    t.row({cell(lam), cell(pi), cell(l), cell(l > 0.0 ? static_cast<double>(pi) / l : NAN)});
  }
  return {t, {{"h_T", cell(h)}, {"n_max", cell(n_max)}, {"orbits", cell(table.orbits.size())}}};
}

}  // namespace

const std::string* ResultRecord::metric(const std::string& key) const {
  for (const auto& [k, v] : metrics)
    if (k == key) return &v;
  return nullptr;
}

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"pressure", "gibbs",   "normalize", "scan-b", "contraction", "dolgopyat-check",
                                              "iterate",  "correlate", "decay",   "orbits", "zeta",        "poc"};
  return names;
}

bool is_command(const std::string& name) {
  const auto& n = command_names();
  return std::find(n.begin(), n.end(), name) != n.end();
}

CommandOutput execute(const RunConfig& cfg, const std::string& command) {
  if (command == "pressure") return cmd_pressure(cfg);
  if (command == "gibbs") return cmd_gibbs(cfg);
  if (command == "normalize") return cmd_normalize(cfg);
  if (command == "scan-b") return cmd_scan_b(cfg);
  if (command == "contraction") return cmd_contraction(cfg);
  if (command == "dolgopyat-check") return cmd_dolgopyat_check(cfg);
  if (command == "iterate") return cmd_iterate(cfg);
  if (command == "correlate") return cmd_correlate(cfg);
  if (command == "decay") return cmd_decay(cfg);
  if (command == "orbits") return cmd_orbits(cfg);
  if (command == "zeta") return cmd_zeta(cfg);
  if (command == "poc") return cmd_poc(cfg);
  throw ConfigError(fmt::format("unknown command '{}'", command));
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t tt = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  return fmt::format("{:04}-{:02}-{:02}T{:02}:{:02}:{:02}Z", tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday, tm.tm_hour,
                     tm.tm_min, tm.tm_sec);
}

std::string summary_text(const ResultRecord& record) {
  std::string out;
  out += "command=" + record.command + "\n";
  out += "config_hash=" + record.config_hash + "\n";
  out += "timestamp=" + record.timestamp + "\n";
  for (const auto& [k, v] : record.metrics) out += k + "=" + v + "\n";
  for (const auto& p : record.csv_paths) out += "csv=" + p + "\n";
  return out;
}

ResultRecord run_command(const RunConfig& cfg, const std::string& command, const std::string& out_dir) {
  if (!is_command(command)) throw ConfigError(fmt::format("unknown command '{}'", command));
  auto out = execute(cfg, command);
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw ConfigError(fmt::format("cannot create output directory '{}': {}", out_dir, ec.message()));

  ResultRecord rec;
  rec.command = command;
  rec.config_hash = cfg.hash;
  rec.timestamp = utc_timestamp();
  rec.metrics = std::move(out.metrics);
  const auto csv = (std::filesystem::path(out_dir) / (command + ".csv")).string();
  out.table.write(csv);
  rec.csv_paths.push_back(csv);
  rec.summary_path = (std::filesystem::path(out_dir) / (command + ".summary")).string();
  std::ofstream s(rec.summary_path, std::ios::binary | std::ios::trunc);
  if (!s) throw ConfigError(fmt::format("cannot write '{}'", rec.summary_path));
  s << summary_text(rec);
  return rec;
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const NumericalError*>(&e)) return kExitNumerical;
  return kExitUsage;
}

}  // namespace thermolab::cli
