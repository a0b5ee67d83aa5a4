#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "thermolab/cli/commands.hpp"
#include "thermolab/cli/config.hpp"
#include "thermolab/cli/csv.hpp"
#include "thermolab/complex_transfer.hpp"
#include "thermolab/dolgopyat.hpp"
#include "thermolab/orbits_zeta.hpp"
#include "thermolab/potentials.hpp"
#include "thermolab/rpf.hpp"
#include "thermolab/subshift.hpp"
#include "thermolab/suspension.hpp"

using namespace thermolab;
namespace fs = std::filesystem;

namespace {

const double kPhi = (1.0 + std::sqrt(5.0)) / 2.0;

struct Outcome {
  bool pass = false;
  std::string detail;
};

cli::RunConfig load(const std::string& name) {
  return cli::parse_config(std::string(THERMOLAB_CONFIG_DIR) + "/" + name);
}

std::vector<std::vector<std::string>> rows_of(const cli::CommandOutput& out) {
  auto rows = cli::parse_csv(out.table.str());
  rows.erase(rows.begin());
  return rows;
}

std::string metric(const cli::CommandOutput& out, const std::string& key) {
  for (const auto& [k, v] : out.metrics)
    if (k == key) return v;
  return "";
}

RealFunction depth1(const SubshiftModel& m, const PotentialSpec& p) { return truncate_to_depth(m, p, 1); }

PotentialSpec series_roof() { return PotentialSpec::series(1.0, {0.0, 2.0}, std::vector<double>{0.5, 0.3}); }

Outcome pressure_oracles() {
  const auto full = SubshiftModel::full_shift(2, 0.5);
  const auto gold = SubshiftModel::golden_mean(0.5);
  const double e1 = std::abs(pressure(full, PotentialSpec::constant(full, 0.0), 1) - std::log(2.0));
  const double e2 = std::abs(solve_P_f(full, PotentialSpec::constant(full, 0.0),
                                       PotentialSpec::per_symbol(full, {1.0, 2.0}), 1) - std::log(kPhi));
  const double e3 = std::abs(pressure(gold, PotentialSpec::constant(gold, 0.0), 1) - std::log(kPhi));
  const double worst = std::max({e1, e2, e3});
  return {worst < 1e-10, fmt::format("max error {:.2e}", worst)};
}

Outcome gibbs_oracles() {
  const auto full = SubshiftModel::full_shift(2, 0.5);
  const auto bern = leading_triple(build_transfer_matrix(full, PotentialSpec::constant(full, 0.0), 1));
  double bern_err = 0.0;
  for (int m = 1; m <= 12; ++m)
    for (const auto& w : enumerate_words(full, m))
      bern_err = std::max(bern_err, std::abs(cylinder_measure(bern, w.symbols()) - std::ldexp(1.0, -m)));

  const auto gold = SubshiftModel::golden_mean(0.5);
  const auto parry = leading_triple(build_transfer_matrix(gold, PotentialSpec::constant(gold, 0.0), 1));
  const double p0 = kPhi * kPhi / (1.0 + kPhi * kPhi);
  const double parry_err = std::max(std::abs(cylinder_measure(parry, Word{0}.symbols()) - p0),
                                    std::abs(cylinder_measure(parry, Word{1}.symbols()) - (1.0 - p0)));

  const auto g = PotentialSpec::series(0.2, {0.7, -0.4}, 0.5);
  const auto rpf = leading_triple(build_transfer_matrix(full, g, 8));
  double lo = INFINITY, hi = 0.0;
  for (int m = 1; m <= 12; ++m)
    for (const auto& w : enumerate_words(full, m)) {
      const double r = gibbs_ratio(rpf, w.symbols());
      lo = std::min(lo, r);
      hi = std::max(hi, r);
    }
  const bool ok = bern_err <= 1e-12 && parry_err <= 1e-10 && hi / lo < 10.0;
  return {ok, fmt::format("Bernoulli error {:.2e}, Parry error {:.2e}, ratio in [{:.4f}, {:.4f}], spread {:.4f}",
                          bern_err, parry_err, lo, hi, hi / lo)};
}

Outcome normalization() {
  const auto full = SubshiftModel::full_shift(2, 0.5);
  const auto gold = SubshiftModel::golden_mean(0.5);
  struct Case {
    SubshiftModel m;
    PotentialSpec f, tau;
    int t;
  };
  const std::vector<Case> cases{
      {full, PotentialSpec::constant(full, 0.0), PotentialSpec::per_symbol(full, {1.0, 2.0}), 1},
      {gold, PotentialSpec::per_symbol(gold, {0.3, -0.2}), PotentialSpec::per_symbol(gold, {1.0, kPhi}), 1},
      {full, PotentialSpec::constant(full, 0.0), series_roof(), 8},
  };
  double worst_m1 = 0.0, worst_l0 = 0.0;
  for (const auto& c : cases)
    for (double a : {-0.05, 0.0, 0.05}) {
      const auto np = normalize_potential(c.m, c.f, c.tau, a, c.t);
      const auto one = np.M.apply(RealFunction::constant(np.M.space_ptr(), 1.0));
      for (double v : one.values()) worst_m1 = std::max(worst_m1, std::abs(v - 1.0));
      if (a == 0.0) worst_l0 = std::max(worst_l0, std::abs(np.lambda_a - 1.0));
    }
  return {worst_m1 <= 1e-12 && worst_l0 <= 1e-12,
          fmt::format("max |M_a 1 - 1| = {:.2e}, max |lambda_0 - 1| = {:.2e}", worst_m1, worst_l0)};
}

double sup_abs(const ComplexFunction& h) {
  double s = 0.0;
  for (const auto& v : h.values()) s = std::max(s, std::abs(v));
  return s;
}

Outcome lattice_dichotomy() {
  const auto full = SubshiftModel::full_shift(2, 0.5);
  const auto lat = normalize_potential(full, PotentialSpec::constant(full, 0.0), PotentialSpec::constant(full, 1.0),
                                       0.0, 8);
  double lat_err = 0.0;
  for (double b : {1.0, M_PI, 10.0}) {
    const ComplexTransferOperator L(lat, b);
    auto h = ComplexFunction::constant(L.space_ptr(), 1.0);
    for (int m = 1; m <= 100; ++m) {
      h = L.apply(h);
      lat_err = std::max(lat_err, std::abs(sup_abs(h) - 1.0));
    }
  }
  const auto nl = normalize_potential(full, PotentialSpec::constant(full, 0.0), series_roof(), 0.0, 8);
  double worst = 0.0;
  std::string sups;
  for (double b : {10.0, 20.0, 50.0, 100.0}) {
    const auto prof = contraction_profile(nl, b, 60);
    const double s = prof.points.back().sup;
    worst = std::max(worst, s);
    sups += fmt::format("{}{:.3g}", sups.empty() ? "" : ", ", s);
  }
  return {lat_err <= 1e-12 && worst < 0.5,
          fmt::format("lattice max |sup - 1| = {:.2e}, non-lattice sup at m=60: {} (dim {})", lat_err, sups,
                      nl.M.dim())};
}

Outcome lasota_yorke() {
  const auto full = SubshiftModel::full_shift(2, 0.5);
  const auto np = normalize_potential(full, PotentialSpec::constant(full, 0.0), series_roof(), 0.0, 8);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::size_t violations = 0, preconditions = 0, pairs = 0;
  double worst = 0.0;
  const auto space = np.M.space_ptr();
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<cplx> hv(space->size());
    std::vector<double> Hv(space->size());
    const double smooth = std::pow(10.0, -3.0 * u(rng));
    const double base_re = u(rng) - 0.5, base_im = u(rng) - 0.5;
    for (std::size_t i = 0; i < hv.size(); ++i) {
      hv[i] = {base_re + smooth * (u(rng) - 0.5), base_im + smooth * (u(rng) - 0.5)};
      Hv[i] = 0.5 + 1.5 * u(rng);
    }
    const ComplexFunction h(space, std::move(hv));
    const RealFunction H(space, std::move(Hv));
    const double B = minimal_ly_constant(h, H, np.theta) * (1.0 + u(rng));
    const int m = 1 + static_cast<int>(u(rng) * 10.0);
    const double b = (u(rng) < 0.5 ? -1.0 : 1.0) * (1.0 + 49.0 * u(rng));
    const auto rep = lasota_yorke_check(np, b, std::min(m, 10), h, H, B);
    violations += rep.violations;
    preconditions += rep.precondition_failures.size();
    pairs += rep.pairs_checked;
    worst = std::max(worst, rep.worst_ratio);
  }
  return {violations == 0 && preconditions == 0 && pairs > 0,
          fmt::format("A0 = {:.4g}, {} pairs checked, {} violations, worst lhs/rhs {:.4f}",
                      lasota_yorke_constant(np.theta, np.bound_T()), pairs, violations, worst)};
}

DolgopyatSetup nonlattice_setup() {
  const auto cfg = load("nonlattice.yaml");
  return build_dolgopyat_setup(cfg.model, cfg.f, cfg.tau, cfg.a, cfg.b, cfg.dolgopyat, cfg.depth);
}

Outcome cone_preservation() {
  const auto s = nonlattice_setup();
  std::size_t tested = 0, violations = 0, bad_inputs = 0;
  for (std::uint64_t k = 0; k < 100; ++k) {
    const auto H = random_cone_member(s, 1000 + k);
    if (!cone_membership(s.family, H, s.params.E).member) ++bad_inputs;
    for (std::uint64_t j = 0; j < 4; ++j) {
      const auto om = make_damping(s, random_representative(s, 7000 + 4 * k + j));
      ++tested;
      if (!cone_membership(s.family, apply_contraction(s, om, H), s.params.E).member) ++violations;
    }
  }
  return {violations == 0 && bad_inputs == 0,
          fmt::format("{} members x 4 sets J = {} images, {} violations", 100, tested, violations)};
}

Outcome l2_contraction() {
  const auto s = nonlattice_setup();
  std::size_t violations = 0;
  double rho3 = 0.0, worst = 0.0;
  for (std::uint64_t k = 0; k < 100; ++k) {
    const auto H = random_cone_member(s, 2000 + k);
    const auto rep = l2_contraction_check(s, make_damping(s, random_representative(s, 3000 + k)), H);
    rho3 = std::max(rho3, rep.rho3);
    worst = std::max(worst, rep.lhs / rep.rhs);
    if (!rep.ok || !(rep.rho3 < 1.0)) ++violations;
  }
  return {violations == 0,
          fmt::format("rho3 = {:.12f}, worst lhs/rhs = {:.6f}, {} violations", rho3, worst, violations)};
}

Outcome dominated_iteration_check() {
  const auto s = nonlattice_setup();
  const auto run = dominated_iteration(s, 20);
  bool dom = !run.aborted && run.steps.size() == 21;
  for (const auto& st : run.steps) dom = dom && st.domination_ok;
  const bool mono = run.l2_nonincreasing();

  const auto cfg = load("lattice.yaml");
  const auto ls = build_dolgopyat_setup(cfg.model, cfg.f, cfg.tau, cfg.a, cfg.b, cfg.dolgopyat, cfg.depth);
  const auto lat = dominated_iteration(ls, 20);
  const bool control = lat.aborted || lat.steps.back().l2_H >= 0.5 * lat.steps.front().l2_H;
  return {dom && mono && control,
          fmt::format("non-lattice: domination {} over {} steps, final L2 {:.4g}, nonincreasing {}; lattice: {}",
                      dom ? "holds" : "fails", run.steps.size() - 1, run.steps.back().l2_H, mono ? "yes" : "no",
                      lat.aborted ? fmt::format("J-selection failed at step {}", lat.abort_step) : "no decay")};
}

Outcome zeta_check() {
  const auto full = SubshiftModel::full_shift(2, 0.5);
  const auto one = depth1(full, PotentialSpec::constant(full, 1.0));
  const auto table = build_orbit_table(one, 25);
  double tl = 0.0, op = 0.0;
  bool gap_ok = true;
  for (double s : {0.9, 1.0, 1.5}) {
    const double exact = 1.0 / (1.0 - 2.0 * std::exp(-s));
    const auto a = zeta_trace_log(one, s, 60);
    const auto b = zeta_orbit_product(table, s);
    tl = std::max(tl, std::abs(a.value - exact));
    op = std::max(op, std::abs(b.value - exact) / exact);
    gap_ok = gap_ok && std::abs(a.value - b.value) <= a.tail_bound + b.tail_bound;
  }
  return {tl <= 1e-10 && op <= 1e-3 && gap_ok,
          fmt::format("trace-log error {:.2e}, orbit-product relative error {:.2e}, gap within bounds {}", tl, op,
                      gap_ok ? "yes" : "no")};
}

Outcome prime_orbits() {
  const auto gold = rows_of(cli::execute(load("golden_roof.yaml"), "poc"));
  std::vector<double> lam, ratio;
  for (const auto& r : gold) {
    lam.push_back(std::stod(r[0]));
    ratio.push_back(std::stod(r[3]));
  }
  bool band = lam.size() >= 10;
  double lo = INFINITY, hi = 0.0;
  for (std::size_t k = 0; k < lam.size(); ++k)
    if (lam[k] >= 10.0) {
      lo = std::min(lo, ratio[k]);
      hi = std::max(hi, ratio[k]);
      band = band && ratio[k] >= 0.7 && ratio[k] <= 1.3;
    }
  double first = 0.0, last = 0.0;
  for (std::size_t k = 0; k < 5 && k < ratio.size(); ++k) {
    first += std::abs(ratio[k] - 1.0) / 5.0;
    last += std::abs(ratio[ratio.size() - 1 - k] - 1.0) / 5.0;
  }
  const bool trend = last < first;

  const auto lat = rows_of(cli::execute(load("lattice.yaml"), "poc"));
  bool control = true;
  std::string lat_ratios;
  for (double want : {16.0, 18.0, 20.0}) {
    bool found = false;
    for (const auto& r : lat)
      if (std::stod(r[0]) == want) {
        found = true;
        control = control && std::stod(r[3]) > 1.25;
        lat_ratios += fmt::format("{}{:.4f}", lat_ratios.empty() ? "" : ", ", std::stod(r[3]));
      }
    control = control && found;
  }
  return {band && trend && control,
          fmt::format("golden roof ratio in [{:.4f}, {:.4f}] for lambda >= 10, mean deviation first-5 {:.4f} "
                      "last-5 {:.4f}; lattice ratios at 16, 18, 20: {}",
                      lo, hi, first, last, lat_ratios)};
}

Outcome correlations() {
  const auto full = SubshiftModel::full_shift(2, 0.5);
  const auto bern = build_suspension(full, PotentialSpec::constant(full, 0.0), PotentialSpec::constant(full, 1.0), 1);
  const auto A = cylinder_indicator(full, Word{0});
  const auto B = cylinder_indicator(full, Word{1, 0});
  double indep = 0.0;
  for (int n = 1; n <= 5; ++n)
    indep = std::max({indep, std::abs(correlation(bern, A, A, n)), std::abs(correlation(bern, A, B, n))});

  const auto decay = cli::execute(load("nonlattice.yaml"), "decay");
  const double c = std::stod(metric(decay, "c"));
  const double quality = std::stod(metric(decay, "quality"));

  const auto lat = rows_of(cli::execute(load("lattice.yaml"), "correlate"));
  double sup = 0.0;
  for (const auto& r : lat) {
    const double t = std::stod(r[0]);
    if (t >= 5.0 && t <= 30.0) sup = std::max(sup, std::abs(std::stod(r[1])));
  }
  return {indep <= 1e-12 && c > 0.0 && quality > 0.9 && sup > 0.01,
          fmt::format("Bernoulli max |C(n)| = {:.2e}; non-lattice c = {:.4f} quality {:.4f} ({} points); lattice "
                      "sup |C| on [5,30] = {:.4f}",
                      indep, c, quality, metric(decay, "used"), sup)};
}

double simpson_li(double x, int nodes) {
  const double h = (x - 2.0) / nodes;
  double s = 1.0 / std::log(2.0) + 1.0 / std::log(x);
  for (int i = 1; i < nodes; ++i) s += (i % 2 ? 4.0 : 2.0) / std::log(2.0 + i * h);
  return s * h / 3.0;
}

Outcome li_sanity() {
  const double asym = li(1e6) * std::log(1e6) / 1e6;
  const double diff = std::abs(li(16.0) - simpson_li(16.0, 10000));
  return {std::abs(asym - 1.0) <= 0.05 && diff <= 1e-9,
          fmt::format("li(1e6) log(1e6)/1e6 = {:.4f}, |li(16) - Simpson| = {:.2e}", asym, diff)};
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(THERMOLAB_CLI_PATH) + " -q " + args;
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism() {
  const auto root = fs::temp_directory_path() / "thermolab_acceptance_determinism";
  fs::remove_all(root);
  const std::string cfgdir = THERMOLAB_CONFIG_DIR;
  struct Job {
    std::string config, command, extra;
  };
  const std::vector<Job> jobs{
      {"golden_mean.yaml", "pressure", ""},
      {"golden_mean.yaml", "gibbs", ""},
      {"nonlattice.yaml", "normalize", ""},
      {"nonlattice.yaml", "scan-b", "--set depth=6 --set scan.m=20"},
      {"nonlattice.yaml", "dolgopyat-check", ""},
      {"nonlattice.yaml", "iterate", "--set iterate.steps=5"},
      {"nonlattice.yaml", "correlate", "--set correlate.tmax=12 --set correlate.samples=40000"},
      {"golden_roof.yaml", "orbits", ""},
      {"golden_roof.yaml", "zeta", "--set zeta.orbit_n_max=16"},
      {"golden_roof.yaml", "poc", "--set poc.lambda_max=12"},
  };
  std::size_t same = 0;
  std::string differing;
  for (const auto& j : jobs) {
    int rc = 0;
    for (const char* run : {"a", "b"}) {
      const std::string threads = std::string(run) == "a" ? "-j 1" : "-j 3";
      rc |= run_cli(fmt::format("-c {}/{} -o {} {} {} {}", cfgdir, j.config, (root / run).string(), threads, j.extra,
                                j.command));
    }
    const auto a = slurp(root / "a" / (j.command + ".csv"));
    const auto b = slurp(root / "b" / (j.command + ".csv"));
    if (rc == 0 && !a.empty() && a == b)
      ++same;
    else
      differing += " " + j.command;
  }
  return {same == jobs.size(), fmt::format("{}/{} commands byte-identical across runs with 1 and 3 threads{}", same,
                                           jobs.size(), differing.empty() ? "" : ", differing:" + differing)};
}

}  // namespace

int main() {
  spdlog::set_level(spdlog::level::warn);
  struct Criterion {
    int id;
    std::string name;
    std::function<Outcome()> run;
    double limit_s;
  };
  const std::vector<Criterion> criteria{
      {1, "pressure oracles", pressure_oracles, 1.0},
      {2, "Gibbs oracles", gibbs_oracles, 0.0},
      {3, "normalization", normalization, 0.0},
      {4, "lattice dichotomy", lattice_dichotomy, 60.0},
      {5, "Lasota-Yorke inequality", lasota_yorke, 0.0},
      {6, "cone preservation", cone_preservation, 0.0},
      {7, "L2 contraction", l2_contraction, 0.0},
      {8, "dominated iteration", dominated_iteration_check, 0.0},
      {9, "zeta function", zeta_check, 0.0},
      {10, "prime orbit theorem", prime_orbits, 120.0},
      {11, "correlations", correlations, 300.0},
      {12, "logarithmic integral", li_sanity, 0.0},
      {13, "determinism", determinism, 0.0},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, fmt::format("exception: {}", e.what())};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    bool pass = o.pass;
    std::string timing = fmt::format("{:.2f}s", secs);
    if (c.limit_s > 0.0) {
      timing += fmt::format(" of {:.0f}s allowed", c.limit_s);
      pass = pass && secs < c.limit_s;
    }
    if (!pass) ++failed;
    fmt::print("[{}] criterion {}: {}: {} ({})\n", pass ? "PASS" : "FAIL", c.id, c.name, o.detail, timing);
    std::fflush(stdout);
  }
  fmt::print("{} of {} criteria passed\n", criteria.size() - static_cast<std::size_t>(failed), criteria.size());
  return failed == 0 ? 0 : 1;
}
