#include "thermolab/suspension.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <boost/math/quadrature/gauss.hpp>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "thermolab/errors.hpp"
#include "thermolab/parallel.hpp"

namespace thermolab {

PiecewisePolynomial::PiecewisePolynomial(std::vector<double> coeffs)
    : PiecewisePolynomial(std::vector<double>{0.0}, std::vector<std::vector<double>>{std::move(coeffs)}) {}

PiecewisePolynomial::PiecewisePolynomial(std::vector<double> breaks, std::vector<std::vector<double>> coeffs)
    : breaks_(std::move(breaks)), coeffs_(std::move(coeffs)) {
  if (breaks_.empty() || breaks_.size() != coeffs_.size())
    throw InputError("piecewise polynomial: one coefficient list per break point");
  if (breaks_.front() != 0.0) throw InputError("piecewise polynomial must start at 0");
  for (std::size_t k = 1; k < breaks_.size(); ++k)
    if (!(breaks_[k] > breaks_[k - 1])) throw InputError("piecewise polynomial breaks must increase");
  for (auto& c : coeffs_) {
    if (c.empty()) c.push_back(0.0);
    if (c.size() > 10) throw InputError("piecewise polynomial degree is limited to 9");
    for (double v : c)
      if (!std::isfinite(v)) throw InputError("piecewise polynomial coefficients must be finite");
  }
}

std::size_t PiecewisePolynomial::piece(double s) const {
  auto it = std::upper_bound(breaks_.begin(), breaks_.end(), s);
  return it == breaks_.begin() ? 0 : static_cast<std::size_t>(it - breaks_.begin() - 1);
}

double PiecewisePolynomial::operator()(double s) const {
  const auto& c = coeffs_[piece(s)];
  double v = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) v = v * s + *it;
  return v;
}

double PiecewisePolynomial::integral(double a, double b) const {
  if (b < a) return -integral(b, a);
  auto prim = [](const std::vector<double>& c, double s) {
    double v = 0.0;
    for (std::size_t k = c.size(); k-- > 0;) v = v * s + c[k] / static_cast<double>(k + 1);
    return v * s;
  };
  double total = 0.0;
  double lo = a;
  while (lo < b) {
    const auto k = piece(lo);
    const double hi = k + 1 < breaks_.size() ? std::min(b, breaks_[k + 1]) : b;
    total += prim(coeffs_[k], hi) - prim(coeffs_[k], lo);
    lo = hi;
  }
  return total;
}

int PiecewisePolynomial::degree() const {
  int d = 0;
  for (const auto& c : coeffs_) d = std::max(d, static_cast<int>(c.size()) - 1);
  return d;
}

bool PiecewisePolynomial::is_constant() const {
  for (const auto& c : coeffs_) {
    if (c[0] != coeffs_[0][0]) return false;
    for (std::size_t k = 1; k < c.size(); ++k)
      if (c[k] != 0.0) return false;
  }
  return true;
}

double PiecewisePolynomial::sup_abs(double lo, double hi) const {
  double m = 0.0;
  const int n = 512;
  for (int i = 0; i <= n; ++i) m = std::max(m, std::abs((*this)(lo + (hi - lo) * i / n)));
  for (double b : breaks_)
    if (b >= lo && b <= hi) m = std::max(m, std::abs((*this)(b)));
  return m;
}

Observable base_observable(const RealFunction& base) { return {base, PiecewisePolynomial::constant(1.0)}; }

Observable height_observable(const SubshiftModel& model, PiecewisePolynomial profile) {
  return {RealFunction::constant(WordSpace::make(model, 1), 1.0), std::move(profile)};
}

Observable cylinder_indicator(const SubshiftModel& model, const Word& w) {
  if (w.empty()) throw InputError("cylinder indicator needs a nonempty word");
  if (!is_admissible(model, w)) throw InputError("cylinder word is not admissible");
  auto space = WordSpace::make(model, static_cast<int>(w.size()));
  auto f = RealFunction::zeros(space);
  f[space->index_of(w)] = 1.0;
  return base_observable(f);
}

SuspensionModel build_suspension(const SubshiftModel& model, const PotentialSpec& f, const PotentialSpec& tau, int t) {
  if (t < 1) throw InputError("working depth must be at least 1");
  SuspensionModel s{.base = model,
                    .tau = truncate_to_depth(model, tau, t),
                    .f = truncate_to_depth(model, f, t),
                    .P_f = 0.0,
                    .mu = {},
                    .mean_roof = 0.0,
                    .tau_min = 0.0,
                    .tau_max = 0.0};
  validate_roof(s.tau);
  s.P_f = solve_P_f(s.f, s.tau);
  auto g = s.f;
  g -= s.P_f * s.tau;
  s.mu = leading_triple(TransferMatrix(g, s.tau.space_ptr()));
  for (std::size_t i = 0; i < s.tau.size(); ++i) s.mean_roof += s.mu.nu[i] * s.tau[i];
  s.tau_min = min_value(s.tau);
  s.tau_max = max_value(s.tau);
  return s;
}

double invariant_integral(const SuspensionModel& model, const Observable& H) {
  const int d = std::max(model.depth(), H.base.depth());
  auto space = WordSpace::make(model.base, d);
  const auto nu = measure_on(model.mu, space);
  const auto tau = model.tau.refined(space);
  const auto base = H.base.refined(space);
  double s = 0.0;
  for (std::size_t i = 0; i < space->size(); ++i) s += nu[i] * base[i] * H.profile.integral(0.0, tau[i]);
  return s / model.mean_roof;
}

std::pair<int, double> flow(const SuspensionModel& model, std::span<const Symbol> x, double s, double t) {
  const int dt = model.tau.depth();
  double r = s + t;
  int n = 0;
  while (true) {
    if (n + dt > static_cast<int>(x.size())) throw InputError("word too short to follow the flow");
    const double tv = model.tau(x.subspan(static_cast<std::size_t>(n)));
    if (r < tv) return {n, r};
    r -= tv;
    ++n;
  }
}

int required_depth(const SuspensionModel& model, const Observable& A, const Observable& B, double t) {
  const int shifts = static_cast<int>(std::floor((model.tau_max + t) / model.tau_min));
  return shifts + std::max({model.tau.depth(), A.base.depth(), B.base.depth()});
}

namespace {

double gauss10(const auto& f, double a, double b) {
  return boost::math::quadrature::gauss<double, 10>::integrate(f, a, b);
}

// integral over s in [lo, hi) of pa(s) * pb(s + shift), split at the break points of both factors
double product_integral(const PiecewisePolynomial& pa, const PiecewisePolynomial& pb, double shift, double lo,
                        double hi) {
  if (!(hi > lo)) return 0.0;
  if (pa.is_constant()) return pa(lo) * pb.integral(lo + shift, hi + shift);
  if (pb.is_constant()) return pb(0.0) * pa.integral(lo, hi);
  std::vector<double> cuts{lo, hi};
  for (double b : pa.breaks())
    if (b > lo && b < hi) cuts.push_back(b);
  for (double b : pb.breaks())
    if (b - shift > lo && b - shift < hi) cuts.push_back(b - shift);
  std::sort(cuts.begin(), cuts.end());
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double a = cuts[k], b = cuts[k + 1];
    if (!(b > a)) continue;
    total += gauss10([&](double s) { return pa(s) * pb(s + shift); }, a, b);
  }
  return total;
}

}  // namespace

double flow_integral(const SuspensionModel& model, const Observable& A, const Observable& B, double t, int depth) {
  if (t < 0.0) throw InputError("correlation time must be nonnegative");
  const int need = required_depth(model, A, B, t);
  if (depth < need) throw InputError(fmt::format("quadrature depth {} too small, {} required", depth, need));
  auto space = WordSpace::make(model.base, depth);
  const auto nu = measure_on(model.mu, space);
  const auto& Ab = A.base;
  const auto& Bb = B.base;
  const int dt = model.tau.depth();
  std::vector<double> contrib(space->size(), 0.0);
  parallel_for(space->size(), [&](std::size_t i) {
    const auto u = space->word(i);
    const double a = Ab(u);
    if (a == 0.0 || nu[i] == 0.0) return;
    const double t0 = model.tau(u);
    double S = 0.0;
    double acc = 0.0;
    for (int n = 0;; ++n) {
      if (n + dt > depth) throw NumericalError("quadrature depth exhausted while following the flow", {});
      const double tn = model.tau(u.subspan(static_cast<std::size_t>(n)));
      // heights s with S <= s + t < S + tn land n shifts ahead
      const double lo = std::max(0.0, S - t);
      const double hi = std::min(t0, S + tn - t);
      if (hi > lo) {
        const double b = Bb(u.subspan(static_cast<std::size_t>(n)));
        if (b != 0.0) acc += b * product_integral(A.profile, B.profile, t - S, lo, hi);
      }
      S += tn;
      if (S - t >= t0) break;
    }
    contrib[i] = nu[i] * a * acc;
  });
  double s = 0.0;
  for (double c : contrib) s += c;
  return s / model.mean_roof;
}

namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

struct MarkovSampler {
  WordSpacePtr space;
  std::vector<double> init_cdf;
  std::vector<std::vector<std::pair<double, std::size_t>>> next;  // cumulative probability, next state
  std::vector<std::vector<Symbol>> next_symbol;

  explicit MarkovSampler(const SuspensionModel& m) {
    space = m.mu.nu.space_ptr();
    const auto& nu = m.mu.nu;
    double c = 0.0;
    for (std::size_t i = 0; i < nu.size(); ++i) init_cdf.push_back(c += nu[i]);
    next.resize(space->size());
    next_symbol.resize(space->size());
    std::vector<Symbol> buf;
    for (std::size_t i = 0; i < space->size(); ++i) {
      const auto w = space->word(i);
      buf.assign(w.begin(), w.end());
      buf.push_back(0);
      double tot = 0.0;
      std::vector<double> p;
      std::vector<Symbol> sy;
      std::vector<std::size_t> nx;
      for (Symbol j = 0; j < space->model().alphabet_size(); ++j) {
        auto succ = space->successor(i, j);
        if (!succ) continue;
        buf.back() = j;
        const double q = cylinder_measure(m.mu, buf);
        p.push_back(q);
        sy.push_back(j);
        nx.push_back(*succ);
        tot += q;
      }
      double acc = 0.0;
      for (std::size_t k = 0; k < p.size(); ++k) {
        acc += p[k] / tot;
        next[i].emplace_back(k + 1 == p.size() ? 1.0 : acc, nx[k]);
        next_symbol[i].push_back(sy[k]);
      }
    }
  }

  void draw(std::mt19937_64& rng, std::vector<Symbol>& out, std::size_t length) const {
    const double u = uniform01(rng) * init_cdf.back();
    std::size_t st = static_cast<std::size_t>(std::upper_bound(init_cdf.begin(), init_cdf.end(), u) - init_cdf.begin());
    st = std::min(st, init_cdf.size() - 1);
    const auto w = space->word(st);
    out.assign(w.begin(), w.end());
    while (out.size() < length) {
      const double v = uniform01(rng);
      const auto& row = next[st];
      std::size_t k = 0;
      while (k + 1 < row.size() && v >= row[k].first) ++k;
      out.push_back(next_symbol[st][k]);
      st = row[k].second;
    }
  }
};

}  // namespace

std::vector<CorrelationPoint> correlation_series(const SuspensionModel& model, const Observable& A,
                                                 const Observable& B, const std::vector<double>& ts,
                                                 const CorrelationOptions& opt) {
  for (double t : ts)
    if (!(t >= 0.0)) throw InputError("correlation time must be nonnegative");
  const double EA = invariant_integral(model, A);
  const double EB = invariant_integral(model, B);
  std::vector<CorrelationPoint> out(ts.size());
  std::vector<std::size_t> mc;
  for (std::size_t k = 0; k < ts.size(); ++k) {
    out[k].t = ts[k];
    const int need = required_depth(model, A, B, ts[k]);
    const bool fits = need <= opt.max_depth && count_words(model.base, need) <= opt.max_words;
    if (opt.force_monte_carlo || !fits) {
      if (!opt.force_monte_carlo)
        spdlog::info("correlation at t={} needs depth {}; switching to sampling", ts[k], need);
      mc.push_back(k);
      continue;
    }
    out[k].C = flow_integral(model, A, B, ts[k], need) - EA * EB;
    out[k].estimator = "quadrature";
    out[k].samples = count_words(model.base, need);
  }
  if (mc.empty()) return out;

  if (opt.samples < 2) throw InputError("sampling needs at least two samples");
  const int chunks = std::max(1, opt.chunks);
  double tmax = 0.0;
  for (auto k : mc) tmax = std::max(tmax, ts[k]);
  const std::size_t length = static_cast<std::size_t>(required_depth(model, A, B, tmax) + 1);
  const MarkovSampler sampler(model);
  const std::size_t nt = mc.size();
  std::vector<std::vector<double>> sum(static_cast<std::size_t>(chunks), std::vector<double>(nt, 0.0));
  std::vector<std::vector<double>> sum2 = sum;
  parallel_for(static_cast<std::size_t>(chunks), [&](std::size_t c) {
    std::mt19937_64 rng(splitmix(opt.seed ^ splitmix(c + 1)));
    const std::uint64_t n = opt.samples / static_cast<std::uint64_t>(chunks) +
                            (c < opt.samples % static_cast<std::uint64_t>(chunks) ? 1 : 0);
    std::vector<Symbol> x;
    for (std::uint64_t k = 0; k < n; ++k) {
      sampler.draw(rng, x, length);
      const double t0 = model.tau(x);
      const double s = uniform01(rng) * t0;
      const double a = A.base(x) * A.profile(s) * t0 / model.mean_roof;
      for (std::size_t q = 0; q < nt; ++q) {
        double X = 0.0;
        if (a != 0.0) {
          auto [shifts, r] = flow(model, x, s, ts[mc[q]]);
          X = a * B.base(std::span<const Symbol>(x).subspan(static_cast<std::size_t>(shifts))) * B.profile(r);
        }
        sum[c][q] += X;
        sum2[c][q] += X * X;
      }
    }
  });
  for (std::size_t q = 0; q < nt; ++q) {
    double s = 0.0, s2 = 0.0;
    for (int c = 0; c < chunks; ++c) {
      s += sum[static_cast<std::size_t>(c)][q];
      s2 += sum2[static_cast<std::size_t>(c)][q];
    }
    const double n = static_cast<double>(opt.samples);
    const double mean = s / n;
    const double var = std::max(0.0, s2 / n - mean * mean);
    auto& p = out[mc[q]];
    p.C = mean - EA * EB;
    p.estimator = "monte_carlo";
    p.samples = opt.samples;
    p.std_error = std::sqrt(var / n);
  }
  return out;
}

double correlation(const SuspensionModel& model, const Observable& A, const Observable& B, double t,
                   const CorrelationOptions& opt) {
  return correlation_series(model, A, B, {t}, opt).front().C;
}

DecayFit decay_fit(const std::vector<std::pair<double, double>>& series, double floor,
                   const std::vector<double>& floors) {
  if (series.size() < 8) throw InputError("decay fit needs at least 8 samples");
  if (!floors.empty() && floors.size() != series.size()) throw InputError("one noise floor per sample");
  if (std::all_of(series.begin(), series.end(), [](const auto& p) { return p.second == 0.0; }))
    throw InputError("decay fit needs a series that is not identically zero");
  std::vector<double> x, y;
  for (std::size_t i = 0; i < series.size(); ++i) {
    const double fl = floors.empty() ? floor : std::max(floor, floors[i]);
    if (std::abs(series[i].second) > fl) {
      x.push_back(series[i].first);
      y.push_back(std::log(std::abs(series[i].second)));
    }
  }
  DecayFit fit;
  fit.used = x.size();
  if (x.size() < 2) {
    fit.c = INFINITY;
    fit.quality = 1.0;
    return fit;
  }
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw InputError("decay fit needs distinct sample times");
  const double slope = sxy / sxx;
  fit.c = slope == 0.0 ? 0.0 : -slope;
  fit.intercept = my - slope * mx;
  if (syy <= 1e-300) {
    fit.quality = 1.0;
  } else {
    double ssr = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double r = y[i] - (fit.intercept + slope * x[i]);
      ssr += r * r;
    }
    fit.quality = 1.0 - ssr / syy;
  }
  return fit;
}

}  // namespace thermolab
