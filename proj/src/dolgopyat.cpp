#include "thermolab/dolgopyat.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "thermolab/errors.hpp"
#include "thermolab/parallel.hpp"
#include "thermolab/potentials.hpp"

namespace thermolab {

namespace {

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double birkhoff(const RealFunction& g, std::span<const Symbol> w, int n) {
  double s = 0.0;
  for (int k = 0; k < n; ++k) s += g(w.subspan(static_cast<std::size_t>(k)));
  return s;
}

std::vector<Symbol> join(const Word& w, std::span<const Symbol> x) {
  std::vector<Symbol> v(w.symbols().begin(), w.symbols().end());
  v.insert(v.end(), x.begin(), x.end());
  return v;
}

bool starts_with(std::span<const Symbol> x, std::span<const Symbol> p) {
  return x.size() >= p.size() && std::equal(p.begin(), p.end(), x.begin());
}

}  // namespace

CylinderFamily build_cylinder_family(const SubshiftModel& model, double b, double epsilon1, double theta, double b0,
                                     int q1) {
  if (!(theta > 0.0 && theta < 1.0)) throw ConfigError("theta must lie in (0,1)");
  if (!(epsilon1 > 0.0)) throw ConfigError("epsilon1 must be positive");
  if (q1 < 1) throw ConfigError("q1 must be at least 1");
  if (std::abs(b) < b0) throw InputError(fmt::format("|b| = {} is below b0 = {}", std::abs(b), b0));
  if (b == 0.0) throw InputError("cylinder family needs b != 0");
  const double target = epsilon1 / std::abs(b);
  const int l = static_cast<int>(std::ceil(std::log(target) / std::log(theta) - 1e-12));
  const double diam = std::pow(theta, l);
  if (l < 1 || diam > target * (1.0 + 1e-12) || diam < 0.5 * target * (1.0 - 1e-12))
    throw ConfigError(fmt::format("no cylinder length l with theta^l in [{}, {}] (theta = {})", 0.5 * target, target,
                                  theta));
  CylinderFamily fam;
  fam.b = b;
  fam.epsilon1 = epsilon1;
  fam.theta = theta;
  fam.length = l;
  fam.q1 = q1;
  fam.members = WordSpace::make(model, l);
  fam.subs = WordSpace::make(model, l + q1);
  return fam;
}

bool cone_eligible(const CylinderFamily& family, std::span<const Symbol> u, std::span<const Symbol> v) {
  return common_prefix_len(u, v) >= family.length;
}

double d_metric(const CylinderFamily& family, std::span<const Symbol> u, std::span<const Symbol> v) {
  if (u.size() == v.size() && std::equal(u.begin(), u.end(), v.begin())) return 0.0;
  const int c = common_prefix_len(u, v);
  if (c < family.length) return 1.0;
  return std::pow(family.theta, c - family.length);
}

double temporal_function(const RealFunction& tau, const Word& w1, const Word& w2, std::span<const Symbol> x) {
  if (w1.size() != w2.size()) throw InputError("branch words must have equal length");
  const int N = static_cast<int>(w1.size());
  const auto v1 = join(w1, x);
  const auto v2 = join(w2, x);
  if (static_cast<int>(x.size()) + 1 < tau.depth())
    throw InputError(fmt::format("x needs at least {} symbols to evaluate tau_N", tau.depth() - 1));
  if (!is_admissible(tau.model(), v1) || !is_admissible(tau.model(), v2))
    throw InputError("branch word cannot precede x");
  return birkhoff(tau, v1, N) - birkhoff(tau, v2, N);
}

double temporal_function(const RealFunction& tau, const CylinderFamily& family, const BranchPairSet& pairs,
                         std::size_t m, int l, std::span<const Symbol> x) {
  if (m >= pairs.pairs.size() || l < 0 || l >= static_cast<int>(pairs.pairs[m].size()))
    throw InputError("no such branch pair");
  if (!starts_with(x, family.members->word(m))) throw InputError("x does not lie in the family cylinder");
  const auto& p = pairs.pairs[m][static_cast<std::size_t>(l)];
  return temporal_function(tau, p.w1, p.w2, x);
}

BranchPairSet select_branch_pairs(const SubshiftModel& model, const RealFunction& tau, const CylinderFamily& family,
                                  int N, int l0, int samples) {
  if (N < 1) throw InputError("N must be at least 1");
  if (l0 < 1) throw InputError("l0 must be at least 1");
  if (samples < 2) throw InputError("need at least two samples per cylinder");
  BranchPairSet out;
  out.N = N;
  out.l0 = l0;
  out.sample_length = std::max(tau.depth() - 1, family.length + family.q1);
  const auto words = enumerate_words(model, N);
  const auto grid = WordSpace::make(model, out.sample_length);

  const std::size_t M = family.size();
  out.pairs.resize(M);
  out.delta_hat.assign(M, 0.0);
  out.candidates.assign(M, 0);
  parallel_for(M, [&](std::size_t m) {
    const auto Cm = family.members->word(m);
    std::vector<Word> cand;
    for (const auto& w : words)
      if (model.allowed(w[w.size() - 1], Cm[0])) cand.push_back(w);
    if (cand.size() < 2)
      throw ModelError(fmt::format("cylinder {} has fewer than two inverse branches of length {}",
                                   family.members->word_at(m).to_string(model.alphabet_size()), N));
    out.candidates[m] = cand.size();

    // sample groups, one per sub-cylinder
    auto [cb, ce] = family.children(m);
    std::vector<std::vector<std::size_t>> groups;
    const std::size_t nsub = ce - cb;
    const std::size_t per = std::max<std::size_t>(1, static_cast<std::size_t>(samples) / std::max<std::size_t>(1, nsub));
    for (std::size_t j = cb; j < ce; ++j) {
      auto [gb, ge] = grid->prefix_range(family.subs->word(j));
      const std::size_t n = ge - gb;
      std::vector<std::size_t> g;
      const std::size_t take = std::min(per, n);
      for (std::size_t k = 0; k < take; ++k) g.push_back(gb + (take == 1 ? 0 : k * (n - 1) / (take - 1)));
      groups.push_back(std::move(g));
    }
    if (groups.size() == 1) {
      auto& g = groups[0];
      if (g.size() < 2) {
        auto [gb, ge] = grid->prefix_range(Cm);
        g.clear();
        for (std::size_t k = gb; k < ge && g.size() < static_cast<std::size_t>(samples); ++k) g.push_back(k);
      }
      std::vector<std::size_t> second(g.begin() + static_cast<std::ptrdiff_t>(g.size() / 2), g.end());
      g.resize(g.size() / 2);
      groups.push_back(std::move(second));
    }

    std::vector<BranchPair> scored;
    for (std::size_t p = 0; p < cand.size(); ++p) {
      for (std::size_t q = p + 1; q < cand.size(); ++q) {
        std::vector<std::vector<double>> phi(groups.size());
        for (std::size_t g = 0; g < groups.size(); ++g)
          for (auto x : groups[g]) phi[g].push_back(temporal_function(tau, cand[p], cand[q], grid->word(x)));
        double best = 0.0;
        for (std::size_t g1 = 0; g1 < groups.size(); ++g1)
          for (std::size_t g2 = g1 + 1; g2 < groups.size(); ++g2) {
            if (phi[g1].empty() || phi[g2].empty()) continue;
            double mn = INFINITY;
            for (double a : phi[g1])
              for (double c : phi[g2]) mn = std::min(mn, std::abs(a - c));
            best = std::max(best, mn);
          }
        scored.push_back({cand[p], cand[q], best});
      }
    }
    std::stable_sort(scored.begin(), scored.end(),
                     [](const BranchPair& x, const BranchPair& y) { return x.separation > y.separation; });
    const auto keep = std::min(scored.size(), static_cast<std::size_t>(l0));
    out.pairs[m].assign(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(keep));
    out.delta_hat[m] = out.pairs[m].front().separation;
  });
  return out;
}

DolgopyatSetup build_dolgopyat_setup(const SubshiftModel& model, const PotentialSpec& f, const PotentialSpec& tau,
                                     double a, double b, const DolgopyatParams& params, int t) {
  if (!(params.mu0 >= 0.0 && params.mu0 <= 0.5)) throw ConfigError("mu0 must lie in [0, 1/2]");
  if (!(params.E > 1.0)) throw ConfigError("E must exceed 1");
  if (params.N < 1) throw ConfigError("N must be at least 1");
  DolgopyatSetup s{.params = params,
                   .a = a,
                   .b = b,
                   .np = normalize_potential(model, f, tau, a, t, params.a0),
                   .np0 = normalize_potential(model, f, tau, 0.0, t, params.a0),
                   .family = {},
                   .pairs = {},
                   .work = {},
                   .L = std::nullopt,
                   .Ma = {},
                   .M0 = {},
                   .nu = {},
                   .T = 0.0};
  s.family = build_cylinder_family(model, b, params.epsilon1, model.theta(), params.b0, params.q1);
  s.pairs = select_branch_pairs(model, s.np.tau, s.family, params.N, params.l0, params.samples);
  const int td = std::max({s.np.M.depth(), s.np0.M.depth(), params.N + s.family.length + params.q1});
  s.work = WordSpace::make(model, td);
  const auto fa = s.np.f_a.refined(s.work);
  s.Ma = TransferMatrix(fa, s.work);
  s.M0 = TransferMatrix(s.np0.f_a.refined(s.work), s.work);
  s.L.emplace(fa, s.np.tau.refined(s.work), b, a);
  s.nu = measure_on(s.np0.base, s.work);
  s.T = s.np.bound_T();
  spdlog::debug("dolgopyat setup: a={} b={} l_b={} family={} working depth={} T={}", a, b, s.family.length,
                s.family.size(), td, s.T);
  return s;
}

DampingFunction make_damping(const DolgopyatSetup& s, std::vector<Triple> J, std::optional<double> mu0) {
  const double mu = mu0.value_or(s.params.mu0);
  if (!(mu >= 0.0 && mu <= 0.5)) throw InputError("mu0 must lie in [0, 1/2]");
  const auto& fam = s.family;
  std::vector<int> per_member(fam.size(), 0);
  std::vector<int> per_sub(fam.subs->size(), 0);
  for (const auto& tr : J) {
    if (tr.m >= fam.size() || tr.j >= fam.subs->size()) throw InputError("triple index out of range");
    if (fam.parent(tr.j) != tr.m) throw InputError("sub-cylinder does not lie in its family cylinder");
    if (tr.i < 0 || tr.i > 1) throw InputError("branch index must be 0 or 1");
    if (tr.l < 0 || tr.l >= static_cast<int>(s.pairs.pairs[tr.m].size())) throw InputError("no such pair label");
    if (++per_sub[tr.j] > 1) throw InputError("at most one (i, l) per sub-cylinder");
    ++per_member[tr.m];
  }
  for (std::size_t m = 0; m < fam.size(); ++m)
    if (per_member[m] == 0) throw InputError(fmt::format("family cylinder {} has no triple", m));

  std::vector<double> w(s.work->size(), 1.0);
  for (const auto& tr : J) {
    const auto& p = s.pairs.pairs[tr.m][static_cast<std::size_t>(tr.l)];
    const Word& br = tr.i == 0 ? p.w1 : p.w2;
    const auto img = join(br, fam.subs->word(tr.j));
    auto [b, e] = s.work->prefix_range(img);
    for (std::size_t x = b; x < e; ++x) w[x] = 1.0 - mu;
  }
  return {std::move(J), mu, RealFunction(s.work, std::move(w))};
}

RealFunction apply_contraction(const DolgopyatSetup& s, const DampingFunction& omega, const RealFunction& h) {
  if (h.depth() > s.work_depth()) throw InputError("function deeper than the working depth");
  auto x = h.refined(s.work);
  x *= omega.omega;
  return s.Ma.apply_power(x, s.params.N);
}

ComplexFunction apply_contraction(const DolgopyatSetup& s, const DampingFunction& omega, const ComplexFunction& h) {
  if (h.depth() > s.work_depth()) throw InputError("function deeper than the working depth");
  auto x = h.refined(s.work);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] *= omega.omega[i];
  std::vector<double> re(x.size()), im(x.size());
  for (int k = 0; k < s.params.N; ++k) {
    for (std::size_t i = 0; i < x.size(); ++i) {
      re[i] = x[i].real();
      im[i] = x[i].imag();
    }
    std::vector<double> r2(x.size()), i2(x.size());
    s.Ma.apply(re, r2);
    s.Ma.apply(im, i2);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = cplx(r2[i], i2[i]);
  }
  return x;
}

ConeResult cone_membership(const CylinderFamily& family, const RealFunction& H, double E) {
  ConeResult r;
  const auto& space = H.space();
  std::size_t arg_min = 0;
  for (std::size_t i = 0; i < H.size(); ++i) {
    if (!(H[i] > 0.0)) {
      r.witness = std::make_pair(i, i);
      r.worst_ratio = INFINITY;
      return r;
    }
    if (H[i] < H[arg_min]) arg_min = i;
  }
  // pairs with common prefix exactly l have D = theta^{l - l_b} (l >= l_b) or 1 (l < l_b);
  // checking all pairs sharing a prefix of length l against the level-l bound is equivalent.
  auto check_group = [&](std::size_t b, std::size_t e, double bound) {
    std::size_t lo = b, hi = b;
    for (std::size_t i = b; i < e; ++i) {
      if (H[i] < H[lo]) lo = i;
      if (H[i] > H[hi]) hi = i;
    }
    const double ratio = (H[hi] - H[lo]) / (H[lo] * E * bound);
    if (ratio > r.worst_ratio) {
      r.worst_ratio = ratio;
      if (ratio > 1.0 + 1e-12) r.witness = std::make_pair(hi, lo);
    }
  };
  check_group(0, H.size(), 1.0);
  for (int l = std::max(1, family.length); l < space.depth(); ++l) {
    const double bound = std::pow(family.theta, l - family.length);
    std::size_t i = 0;
    while (i < H.size()) {
      auto [b, e] = space.prefix_range(space.word(i).first(static_cast<std::size_t>(l)));
      check_group(b, e, bound);
      i = e;
    }
  }
  r.member = !r.witness.has_value();
  return r;
}

std::string to_string(CaseLabel c) {
  switch (c) {
    case CaseLabel::Case1: return "1";
    case CaseLabel::Case2: return "2";
    case CaseLabel::Fail: return "fail";
  }
  return "?";
}

std::size_t SelectionReport::failures() const {
  return static_cast<std::size_t>(std::count(cases.begin(), cases.end(), CaseLabel::Fail));
}

namespace {

struct BranchTerm {
  std::size_t v;  // working-depth index of the branch image
  double weight;  // e^{f_N}
  double phase;   // -b tau_N
};

BranchTerm branch_term(const DolgopyatSetup& s, const Word& w, std::span<const Symbol> u) {
  const auto v = join(w, u);
  const int N = static_cast<int>(w.size());
  return {s.work->index_of(v), std::exp(birkhoff(s.np.f_a, v, N)), -s.b * birkhoff(s.np.tau, v, N)};
}

struct Candidate {
  Triple t;
  CaseLabel label = CaseLabel::Fail;
  double slack = -INFINITY;
  double gap = 0.0;
};

Candidate evaluate_triple(const DolgopyatSetup& s, const ComplexFunction& h, const RealFunction& H, Triple t) {
  Candidate c;
  c.t = t;
  const auto& p = s.pairs.pairs[t.m][static_cast<std::size_t>(t.l)];
  const double mu = s.params.mu0;
  auto [b, e] = s.work->prefix_range(s.family.subs->word(t.j));
  bool case1 = true;
  double slack = INFINITY, gap = INFINITY;
  for (std::size_t u = b; u < e; ++u) {
    const auto uw = s.work->word(u);
    const BranchTerm t1 = branch_term(s, p.w1, uw);
    const BranchTerm t2 = branch_term(s, p.w2, uw);
    const cplx z1 = t1.weight * std::polar(1.0, t1.phase) * h[t1.v];
    const cplx z2 = t2.weight * std::polar(1.0, t2.phase) * h[t2.v];
    const BranchTerm& damped = t.i == 0 ? t1 : t2;
    const BranchTerm& other = t.i == 0 ? t2 : t1;
    const double gamma = (1.0 - mu) * damped.weight * H[damped.v] + other.weight * H[other.v];
    if (std::abs(h[damped.v]) > 0.75 * H[damped.v]) case1 = false;
    slack = std::min(slack, gamma > 0.0 ? (gamma - std::abs(z1 + z2)) / gamma : 0.0);
    if (std::abs(z1) > 0.0 && std::abs(z2) > 0.0) gap = std::min(gap, std::abs(std::arg(z1 / z2)));
  }
  c.slack = slack;
  c.gap = std::isfinite(gap) ? gap : 0.0;
  if (case1 && mu <= 0.25)
    c.label = CaseLabel::Case1;
  else if (slack >= 0.0 && c.gap >= s.params.epsilon3)
    c.label = CaseLabel::Case2;
  else
    c.label = CaseLabel::Fail;
  return c;
}

bool better(const Candidate& x, const Candidate& y) {
  auto rank = [](CaseLabel l) { return l == CaseLabel::Case1 ? 2 : l == CaseLabel::Case2 ? 1 : 0; };
  if (rank(x.label) != rank(y.label)) return rank(x.label) > rank(y.label);
  return x.slack > y.slack;
}

}  // namespace

SelectionReport select_J(const DolgopyatSetup& s, const ComplexFunction& h, const RealFunction& H) {
  const auto hh = h.refined(s.work);
  const auto HH = H.refined(s.work);
  const auto& fam = s.family;
  const std::size_t M = fam.size();
  std::vector<std::vector<Candidate>> chosen(M);
  std::vector<CaseLabel> cases(M, CaseLabel::Fail);
  std::vector<double> gaps(M, 0.0), slacks(M, 0.0);

  parallel_for(M, [&](std::size_t m) {
    auto [cb, ce] = fam.children(m);
    Candidate best_fail;
    bool have_fail = false;
    for (std::size_t j = cb; j < ce; ++j) {
      Candidate best;
      bool have = false;
      for (int l = 0; l < static_cast<int>(s.pairs.pairs[m].size()); ++l)
        for (int i = 0; i < 2; ++i) {
          auto c = evaluate_triple(s, hh, HH, Triple{m, i, j, l});
          if (!have || better(c, best)) {
            best = c;
            have = true;
          }
        }
      if (!have) continue;
      if (best.label != CaseLabel::Fail)
        chosen[m].push_back(best);
      else if (!have_fail || better(best, best_fail)) {
        best_fail = best;
        have_fail = true;
      }
    }
    if (chosen[m].empty()) {
      chosen[m].push_back(best_fail);
      cases[m] = CaseLabel::Fail;
      gaps[m] = best_fail.gap;
      slacks[m] = best_fail.slack;
      return;
    }
    const auto& lead = *std::min_element(chosen[m].begin(), chosen[m].end(),
                                         [](const Candidate& x, const Candidate& y) { return better(x, y); });
    cases[m] = lead.label;
    gaps[m] = lead.gap;
    slacks[m] = lead.slack;
  });

  std::vector<Triple> J;
  for (const auto& cs : chosen)
    for (const auto& c : cs) J.push_back(c.t);

  SelectionReport rep;
  rep.omega = make_damping(s, std::move(J));
  rep.cases = std::move(cases);
  rep.phase_gap = std::move(gaps);
  rep.slack = std::move(slacks);

  const auto Lh = s.L->apply_power(hh, s.params.N);
  const auto NH = apply_contraction(s, rep.omega, HH);
  for (std::size_t x = 0; x < Lh.size(); ++x) {
    if (std::abs(Lh[x]) > NH[x] * (1.0 + 1e-12) + 1e-300) {
      if (rep.violations == 0) rep.witness = x;
      ++rep.violations;
    }
  }
  return rep;
}

bool IterationResult::l2_nonincreasing() const {
  for (std::size_t k = 1; k < steps.size(); ++k)
    if (steps[k].l2_H > steps[k - 1].l2_H * (1.0 + 1e-12)) return false;
  return true;
}

namespace {

double integral(const RealFunction& nu, const RealFunction& g) {
  double s = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) s += nu[i] * g[i];
  return s;
}

double integral_sq(const RealFunction& nu, const RealFunction& g) {
  double s = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) s += nu[i] * g[i] * g[i];
  return s;
}

}  // namespace

IterationResult dominated_iteration(const DolgopyatSetup& s, int steps, const std::optional<ComplexFunction>& h0) {
  if (steps < 0) throw InputError("steps must be nonnegative");
  auto h = h0 ? h0->refined(s.work) : ComplexFunction::constant(s.work, 1.0);
  const double norm = norm_theta_b(h, NormThetaB(std::max(1.0, std::abs(s.b)), s.family.theta));
  if (!(norm > 0.0)) throw InputError("initial function must be nonzero");
  h *= cplx(1.0 / norm);
  auto H = RealFunction::constant(s.work, 1.0);

  IterationResult res;
  auto record = [&](int m, const SelectionReport* rep) {
    IterationStep st;
    st.m = m;
    st.l2_H = integral_sq(s.nu, H);
    st.sup_h = sup_norm(h);
    st.sup_H = sup_norm(H);
    if (rep) {
      st.domination_ok = rep->domination_ok();
      for (auto c : rep->cases) {
        if (c == CaseLabel::Case1) ++st.case1;
        if (c == CaseLabel::Case2) ++st.case2;
        if (c == CaseLabel::Fail) ++st.fails;
      }
    }
    res.steps.push_back(st);
  };
  record(0, nullptr);
  for (int m = 1; m <= steps; ++m) {
    auto rep = select_J(s, h, H);
    h = s.L->apply_power(h, s.params.N);
    H = apply_contraction(s, rep.omega, H);
    record(m, &rep);
    if (!rep.domination_ok()) {
      res.aborted = true;
      res.abort_step = m;
      res.witness = rep.witness;
      spdlog::warn("dominated iteration: domination fails at step {} ({} points, {} failed cylinders)", m,
                   rep.violations, rep.failures());
      break;
    }
  }
  return res;
}

L2Report l2_contraction_check(const DolgopyatSetup& s, const DampingFunction& omega, const RealFunction& H) {
  const auto HH = H.refined(s.work);
  const auto& fam = s.family;
  L2Report r;
  const auto NH = apply_contraction(s, omega, HH);
  r.lhs = integral_sq(s.nu, NH);
  auto H2 = HH;
  for (auto& v : H2.data()) v *= v;
  r.rhs = integral(s.nu, s.M0.apply_power(H2, s.params.N));

  // W_J: union of the sub-cylinders D_j carrying a triple
  std::vector<char> inW(s.work->size(), 0);
  std::vector<double> cover(fam.size(), 0.0);
  for (const auto& tr : omega.J) {
    auto [b, e] = s.work->prefix_range(fam.subs->word(tr.j));
    double mj = 0.0;
    for (std::size_t x = b; x < e; ++x) {
      inW[x] = 1;
      mj += s.nu[x];
    }
    auto [mb, me] = s.work->prefix_range(fam.members->word(tr.m));
    double mm = 0.0;
    for (std::size_t x = mb; x < me; ++x) mm += s.nu[x];
    if (mm > 0.0) cover[tr.m] = std::max(cover[tr.m], mj / mm);
  }
  r.one_minus_omega0 = *std::min_element(cover.begin(), cover.end());
  const double E = s.params.E;
  r.C5 = r.one_minus_omega0 > 0.0 ? 4.0 * E * E / r.one_minus_omega0 : INFINITY;
  const double NT = s.params.N * s.T;
  r.rho3 = std::exp(s.params.a0 * NT) / (1.0 + omega.mu0 * std::exp(-NT) / r.C5);
  r.VH2 = integral_sq(s.nu, HH);
  for (std::size_t x = 0; x < HH.size(); ++x)
    if (inW[x]) r.WH2 += s.nu[x] * HH[x] * HH[x];
  r.part_a_ok = r.VH2 <= r.C5 * r.WH2 * (1.0 + 1e-12);
  r.ok = r.lhs <= r.rho3 * r.rhs * (1.0 + 1e-14);
  return r;
}

double analytic_mu0(const DolgopyatSetup& s) {
  const double theta = s.family.theta;
  const int N = s.params.N;
  const double T = s.T;
  const double eT = std::exp(T / (1.0 - theta));
  double dmin = INFINITY;
  for (double d : s.pairs.delta_hat) dmin = std::min(dmin, d);
  // d -> q1, the geometric phase separation -> |b| delta_hat, s0 + t0 -> l_b + q1
  const double m1 = std::pow(theta, 2 * N + 2 * s.params.q1) / (6.0 * eT);
  const double sn = std::sin(std::abs(s.b) * dmin / 8.0);
  const double m2 = sn * sn / (10.0 * std::exp(2.0 * T * N));
  const double m3 = std::pow(theta, s.family.length + s.params.q1) / (100.0 * eT);
  return std::min({m1, m2, m3});
}

RealFunction random_cone_member(const DolgopyatSetup& s, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const auto& fam = s.family;
  const auto& space = *s.work;
  const double E = s.params.E;
  const double theta = fam.theta;
  std::vector<double> level(fam.size());
  const double span = std::log1p(E) * 0.5 * uniform01(rng);
  for (auto& c : level) c = std::exp(span * uniform01(rng));
  // one random number per prefix of length k > l_b
  const int td = space.depth();
  std::vector<std::vector<double>> r(static_cast<std::size_t>(td + 1));
  std::vector<WordSpacePtr> spaces(static_cast<std::size_t>(td + 1));
  for (int k = fam.length + 1; k <= td; ++k) {
    spaces[static_cast<std::size_t>(k)] = k == td ? s.work : WordSpace::make(space.model(), k);
    r[static_cast<std::size_t>(k)].resize(spaces[static_cast<std::size_t>(k)]->size());
    for (auto& x : r[static_cast<std::size_t>(k)]) x = 2.0 * uniform01(rng) - 1.0;
  }
  double amp = 0.5 * (1.0 - theta) * std::log1p(E * uniform01(rng));
  for (int attempt = 0; attempt < 60; ++attempt) {
    std::vector<double> v(space.size());
    for (std::size_t i = 0; i < space.size(); ++i) {
      const auto w = space.word(i);
      double lg = 0.0;
      for (int k = fam.length + 1; k <= td; ++k) {
        const auto idx = spaces[static_cast<std::size_t>(k)]->index_of(w.first(static_cast<std::size_t>(k)));
        lg += amp * std::pow(theta, k - 1 - fam.length) * r[static_cast<std::size_t>(k)][idx];
      }
      v[i] = level[*fam.member_of(w)] * std::exp(lg);
    }
    RealFunction H(s.work, std::move(v));
    if (cone_membership(fam, H, E).member) return H;
    amp *= 0.5;
    for (auto& c : level) c = std::sqrt(c);
  }
  return RealFunction::constant(s.work, 1.0);
}

std::vector<Triple> random_representative(const DolgopyatSetup& s, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Triple> J;
  for (std::size_t m = 0; m < s.family.size(); ++m) {
    auto [cb, ce] = s.family.children(m);
    for (std::size_t j = cb; j < ce; ++j) {
      const bool take = j == cb || uniform01(rng) < 0.5;
      const int i = static_cast<int>(rng() % 2);
      const int l = static_cast<int>(rng() % s.pairs.pairs[m].size());
      if (take) J.push_back({m, i, j, l});
    }
  }
  return J;
}

}  // namespace thermolab
