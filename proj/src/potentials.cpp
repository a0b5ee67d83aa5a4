#include "thermolab/potentials.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "thermolab/errors.hpp"

namespace thermolab {

double SeriesSpec::max_ratio() const { return *std::max_element(ratios.begin(), ratios.end()); }

PotentialSpec PotentialSpec::table(RealFunction f) {
  if (!f.valid()) throw InputError("empty potential table");
  PotentialSpec p;
  p.v_ = std::move(f);
  return p;
}

PotentialSpec PotentialSpec::series(double c, std::vector<double> weights, double rho) {
  return series(c, std::move(weights), std::vector<double>{rho});
}

PotentialSpec PotentialSpec::series(double c, std::vector<double> weights, std::vector<double> rhos) {
  if (rhos.empty()) throw InputError("series needs a ratio");
  for (double r : rhos)
    if (!(r > 0.0 && r < 1.0)) throw InputError("series ratio must lie in (0,1)");
  if (rhos.size() != 1 && rhos.size() != weights.size())
    throw InputError("series needs one ratio or one ratio per symbol");
  PotentialSpec p;
  p.v_ = SeriesSpec{c, std::move(weights), std::move(rhos)};
  return p;
}

PotentialSpec PotentialSpec::constant(const SubshiftModel& model, double c) {
  return table(RealFunction::constant(WordSpace::make(model, 1), c));
}

PotentialSpec PotentialSpec::per_symbol(const SubshiftModel& model, std::vector<double> values) {
  if (static_cast<int>(values.size()) != model.alphabet_size()) throw InputError("one value per symbol required");
  return table(RealFunction(WordSpace::make(model, 1), std::move(values)));
}

std::optional<int> PotentialSpec::table_depth() const {
  if (is_table()) return as_table().depth();
  return std::nullopt;
}

namespace {

double series_partial(const SeriesSpec& s, std::span<const Symbol> w, double* tail_factor = nullptr) {
  double v = s.c, factor = 1.0;
  for (Symbol x : w) {
    if (x < 0 || static_cast<std::size_t>(x) >= s.weights.size()) throw InputError("symbol outside series weights");
    v += factor * s.weights[static_cast<std::size_t>(x)];
    factor *= s.ratio(x);
  }
  if (tail_factor) *tail_factor = factor;
  return v;
}

}  // namespace

double evaluate(const PotentialSpec& p, std::span<const Symbol> w) {
  if (p.is_table()) {
    const auto& f = p.as_table();
    if (static_cast<int>(w.size()) < f.depth())
      throw InputError(fmt::format("word of length {} shorter than potential depth {}", w.size(), f.depth()));
    return f(w);
  }
  return series_partial(p.as_series(), w);
}

double birkhoff_sum(const PotentialSpec& p, std::span<const Symbol> w, int m) {
  if (m < 0) throw InputError("negative Birkhoff length");
  const std::size_t need = p.is_table() ? static_cast<std::size_t>(m + p.as_table().depth() - 1) : static_cast<std::size_t>(m);
  if (m > 0 && w.size() < need)
    throw InputError(fmt::format("Birkhoff sum of length {} needs a word of length {}, got {}", m, need, w.size()));
  double s = 0.0;
  for (int j = 0; j < m; ++j) s += evaluate(p, w.subspan(static_cast<std::size_t>(j)));
  return s;
}

std::pair<double, double> series_tail_range(const SubshiftModel& model, const SeriesSpec& s, Symbol last) {
  const int k = model.alphabet_size();
  if (static_cast<int>(s.weights.size()) != k) throw InputError("series weights must match alphabet size");
  // S(j) = w(j) + rho(j) * extremum over admissible successors
  std::vector<double> lo(k, 0.0), hi(k, 0.0);
  const double r = s.max_ratio();
  const int iters = std::max(8, static_cast<int>(std::ceil(std::log(1e-18) / std::log(r))) + 2);
  for (int it = 0; it < iters; ++it) {
    std::vector<double> nlo(k), nhi(k);
    for (int j = 0; j < k; ++j) {
      double mn = std::numeric_limits<double>::infinity(), mx = -mn;
      for (int i = 0; i < k; ++i)
        if (model.allowed(j, i)) {
          mn = std::min(mn, lo[i]);
          mx = std::max(mx, hi[i]);
        }
      nlo[j] = s.weights[j] + s.ratio(j) * mn;
      nhi[j] = s.weights[j] + s.ratio(j) * mx;
    }
    lo.swap(nlo);
    hi.swap(nhi);
  }
  double mn = std::numeric_limits<double>::infinity(), mx = -mn;
  for (int i = 0; i < k; ++i)
    if (last < 0 || model.allowed(last, i)) {
      mn = std::min(mn, lo[i]);
      mx = std::max(mx, hi[i]);
    }
  return {mn, mx};
}

RealFunction truncate_to_depth(const SubshiftModel& model, const PotentialSpec& p, int t) {
  if (t < 1) throw InputError("truncation depth must be at least 1");
  if (p.is_table()) {
    const auto& f = p.as_table();
    if (t < f.depth()) throw InputError(fmt::format("cannot truncate a depth-{} table to depth {}", f.depth(), t));
    if (!(f.model() == model)) throw InputError("potential table belongs to another model");
    return f.refined(t);
  }
  const auto& s = p.as_series();
  auto space = WordSpace::make(model, t);
  std::vector<std::pair<double, double>> ranges;
  for (Symbol j = 0; j < model.alphabet_size(); ++j) ranges.push_back(series_tail_range(model, s, j));
  std::vector<double> v(space->size());
  for (std::size_t i = 0; i < space->size(); ++i) {
    auto w = space->word(i);
    double factor = 1.0;
    const double partial = series_partial(s, w, &factor);
    const auto [lo, hi] = ranges[static_cast<std::size_t>(w[t - 1])];
    v[i] = partial + factor * 0.5 * (lo + hi);
  }
  return RealFunction(space, std::move(v));
}

double truncation_error_bound(const SubshiftModel& model, const PotentialSpec& p, int t) {
  if (p.is_table()) return 0.0;
  const auto& s = p.as_series();
  auto space = WordSpace::make(model, t);
  double worst = 0.0;
  for (std::size_t i = 0; i < space->size(); ++i) {
    auto w = space->word(i);
    double factor = 1.0;
    series_partial(s, w, &factor);
    const auto [lo, hi] = series_tail_range(model, s, w[t - 1]);
    worst = std::max(worst, factor * 0.5 * (hi - lo));
  }
  return worst;
}

namespace {

template <class T, class Diam>
double grouped_seminorm(const CylinderFunction<T>& h, double theta, Diam diam) {
  const auto& space = h.space();
  const int t = space.depth();
  if (t > 12) spdlog::warn("theta_seminorm at depth {} ({} words): exhaustive pair maximum is expensive", t, space.size());
  // pairs with common prefix >= l are compared against theta^l; the maximum over l is exact
  double best = 0.0;
  for (int l = 0; l < t; ++l) {
    const double scale = std::pow(theta, -l);
    std::size_t b = 0;
    while (b < space.size()) {
      std::size_t e = l == 0 ? space.size() : space.prefix_range(space.word(b).first(static_cast<std::size_t>(l))).second;
      best = std::max(best, diam(h, b, e) * scale);
      b = e;
    }
  }
  return best;
}

}  // namespace

double theta_seminorm(const RealFunction& h, double theta) {
  return grouped_seminorm(h, theta, [](const RealFunction& f, std::size_t b, std::size_t e) {
    auto [mn, mx] = std::minmax_element(f.values().begin() + static_cast<long>(b), f.values().begin() + static_cast<long>(e));
    return *mx - *mn;
  });
}

double theta_seminorm(const ComplexFunction& h, double theta) {
  return grouped_seminorm(h, theta, [](const ComplexFunction& f, std::size_t b, std::size_t e) {
    double d = 0.0;
    for (std::size_t i = b; i < e; ++i)
      for (std::size_t j = i + 1; j < e; ++j) d = std::max(d, std::abs(f[i] - f[j]));
    return d;
  });
}

RealFunction birkhoff_function(const RealFunction& f, int m) {
  if (m < 1) throw InputError("Birkhoff length must be at least 1");
  const int d = f.depth() + m - 1;
  auto space = WordSpace::make(f.model(), d);
  std::vector<double> v(space->size(), 0.0);
  for (std::size_t i = 0; i < space->size(); ++i) {
    auto w = space->word(i);
    for (int j = 0; j < m; ++j) v[i] += f(w.subspan(static_cast<std::size_t>(j)));
  }
  return RealFunction(space, std::move(v));
}

double min_value(const RealFunction& f) { return *std::min_element(f.values().begin(), f.values().end()); }
double max_value(const RealFunction& f) { return *std::max_element(f.values().begin(), f.values().end()); }

void validate_roof(const RealFunction& tau) {
  if (!(min_value(tau) > 0.0)) throw ConfigError("roof must be >= tau0 > 0");
}

}  // namespace thermolab
