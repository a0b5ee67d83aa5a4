#include "thermolab/orbits_zeta.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "thermolab/errors.hpp"
#include "thermolab/parallel.hpp"
#include "thermolab/potentials.hpp"
#include "thermolab/rpf.hpp"

namespace thermolab {

Word PeriodicOrbit::word(int alphabet_size) const {
  std::vector<Symbol> w(static_cast<std::size_t>(length));
  std::uint64_t c = code;
  const auto k = static_cast<std::uint64_t>(alphabet_size);
  for (int i = length - 1; i >= 0; --i) {
    w[static_cast<std::size_t>(i)] = static_cast<Symbol>(c % k);
    c /= k;
  }
  return Word(std::move(w));
}

std::uint64_t trace_power(const SubshiftModel& model, int n) {
  const auto k = static_cast<std::size_t>(model.alphabet_size());
  std::vector<std::vector<std::uint64_t>> P(k, std::vector<std::uint64_t>(k, 0));
  for (std::size_t i = 0; i < k; ++i) P[i][i] = 1;
  for (int step = 0; step < n; ++step) {
    std::vector<std::vector<std::uint64_t>> Q(k, std::vector<std::uint64_t>(k, 0));
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t l = 0; l < k; ++l)
        if (P[i][l])
          for (std::size_t j = 0; j < k; ++j)
            if (model.allowed(static_cast<Symbol>(l), static_cast<Symbol>(j))) Q[i][j] += P[i][l];
    P = std::move(Q);
  }
  std::uint64_t t = 0;
  for (std::size_t i = 0; i < k; ++i) t += P[i][i];
  return t;
}

OrbitTable enumerate_primitive_orbits(const SubshiftModel& model, int n_max, int ceiling) {
  if (n_max < 1) throw InputError("n_max must be at least 1");
  const int k = model.alphabet_size();
  if (n_max > ceiling) {
    double est = 0.0;
    for (int n = 1; n <= n_max; ++n) est += static_cast<double>(trace_power(model, n)) / n;
    throw ConfigError(fmt::format("n_max = {} exceeds the enumeration ceiling {} (about {:.3g} orbits, {:.3g} words "
                                  "to scan); raise the ceiling explicitly to proceed",
                                  n_max, ceiling, est, std::pow(static_cast<double>(k), n_max)));
  }
  if (n_max * std::log2(static_cast<double>(k)) >= 63.0)
    throw ConfigError("orbit words do not fit the 64-bit encoding at this length");

  OrbitTable table{.model = model,
                   .n_max = n_max,
                   .orbits = {},
                   .primitive_counts = std::vector<std::uint64_t>(static_cast<std::size_t>(n_max) + 1, 0),
                   .point_counts = std::vector<std::uint64_t>(static_cast<std::size_t>(n_max) + 1, 0),
                   .tau = {},
                   .tau_min = 0.0};
  for (int n = 1; n <= n_max; ++n) table.point_counts[static_cast<std::size_t>(n)] = trace_power(model, n);

  // Lyndon words with a given first symbol form a contiguous run of the Duval successor sequence.
  std::vector<std::vector<PeriodicOrbit>> parts(static_cast<std::size_t>(k));
  parallel_for(static_cast<std::size_t>(k), [&](std::size_t first) {
    auto& out = parts[first];
    std::vector<Symbol> w{static_cast<Symbol>(first) - 1};
    while (!w.empty()) {
      ++w.back();
      if (w[0] != static_cast<Symbol>(first)) break;
      const std::size_t m = w.size();
      bool ok = model.allowed(w.back(), w.front());
      for (std::size_t i = 0; ok && i + 1 < m; ++i) ok = model.allowed(w[i], w[i + 1]);
      if (ok) {
        std::uint64_t code = 0;
        for (Symbol s : w) code = code * static_cast<std::uint64_t>(k) + static_cast<std::uint64_t>(s);
        out.push_back({code, static_cast<int>(m), 0.0});
      }
      while (static_cast<int>(w.size()) < n_max) w.push_back(w[w.size() - m]);
      while (!w.empty() && w.back() == k - 1) w.pop_back();
    }
  });
  for (auto& p : parts) {
    for (const auto& o : p) ++table.primitive_counts[static_cast<std::size_t>(o.length)];
    table.orbits.insert(table.orbits.end(), p.begin(), p.end());
  }
  return table;
}

double orbit_period(const Word& cycle, const RealFunction& tau) {
  const std::size_t n = cycle.size();
  if (n == 0) throw InputError("empty cycle");
  const auto d = static_cast<std::size_t>(tau.depth());
  std::vector<Symbol> ext(n + d);
  for (std::size_t i = 0; i < ext.size(); ++i) ext[i] = cycle[i % n];
  double s = 0.0;
  for (std::size_t k = 0; k < n; ++k) s += tau(std::span<const Symbol>(ext).subspan(k));
  return s;
}

void attach_periods(OrbitTable& table, const RealFunction& tau) {
  if (!(tau.model() == table.model)) throw InputError("roof belongs to a different model");
  validate_roof(tau);
  const int k = table.model.alphabet_size();
  parallel_for(table.orbits.size(), [&](std::size_t i) {
    auto& o = table.orbits[i];
    o.period = orbit_period(o.word(k), tau);
  });
  std::sort(table.orbits.begin(), table.orbits.end(), [](const PeriodicOrbit& a, const PeriodicOrbit& b) {
    if (a.period != b.period) return a.period < b.period;
    if (a.length != b.length) return a.length < b.length;
    return a.code < b.code;
  });
  table.tau = tau;
  table.tau_min = min_value(tau);
}

OrbitTable build_orbit_table(const RealFunction& tau, int n_max, int ceiling) {
  auto t = enumerate_primitive_orbits(tau.model(), n_max, ceiling);
  attach_periods(t, tau);
  return t;
}

bool divisor_identity_holds(const OrbitTable& table) {
  for (int n = 1; n <= table.n_max; ++n) {
    std::uint64_t s = 0;
    for (int d = 1; d <= n; ++d)
      if (n % d == 0) s += static_cast<std::uint64_t>(d) * table.primitive_counts[static_cast<std::size_t>(d)];
    if (s != table.point_counts[static_cast<std::size_t>(n)]) return false;
  }
  return true;
}

double entropy_hT(const RealFunction& tau) { return solve_P_f(RealFunction::zeros(tau.space_ptr()), tau); }

double li(double x) {
  if (!(x > 1.0)) throw InputError("li(x) is only defined here for x > 1");
  if (x == 2.0) return 0.0;
  // substitute u = e^v: du / log u = e^v / v dv
  auto f = [](double v) { return std::exp(v) / v; };
  const double a = std::log(2.0), b = std::log(x);
  double err = 0.0;
  using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
  if (b > a) return GK::integrate(f, a, b, 20, 1e-15, &err);
  return -GK::integrate(f, b, a, 20, 1e-15, &err);
}

std::uint64_t count_pi(const OrbitTable& table, double lam) {
  if (!table.has_periods()) throw InputError("orbit table has no periods attached");
  if (static_cast<double>(table.n_max) * table.tau_min < lam)
    throw InputError(fmt::format("orbit table may be incomplete at lambda = {}: n_max * tau_min = {}; raise n_max "
                                 "to at least {}",
                                 lam, table.n_max * table.tau_min, static_cast<int>(std::ceil(lam / table.tau_min))));
  auto it = std::upper_bound(table.orbits.begin(), table.orbits.end(), lam,
                             [](double v, const PeriodicOrbit& o) { return v < o.period; });
  return static_cast<std::uint64_t>(it - table.orbits.begin());
}

std::string to_string(ZetaMode m) { return m == ZetaMode::OrbitProduct ? "orbit-product" : "trace-log"; }

ZetaMode parse_zeta_mode(const std::string& s) {
  if (s == "orbit-product") return ZetaMode::OrbitProduct;
  if (s == "trace-log") return ZetaMode::TraceLog;
  throw ConfigError(fmt::format("unknown zeta mode '{}' (expected orbit-product or trace-log)", s));
}

namespace {

using CMatrix = Eigen::MatrixXcd;

// Q[x][(j x)|D] = e^{-s tau(j x)}; trace(Q^n) is the period-n point sum of e^{-s tau_n}.
CMatrix weighted_matrix(const RealFunction& tau, std::complex<double> s) {
  const int D = std::max(1, tau.depth());
  auto space = WordSpace::make(tau.model(), D);
  const auto T = tau.refined(space);
  CMatrix Q = CMatrix::Zero(static_cast<Eigen::Index>(space->size()), static_cast<Eigen::Index>(space->size()));
  for (std::size_t x = 0; x < space->size(); ++x)
    for (const auto& p : space->preimages(x))
      Q(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(p.index)) += std::exp(-s * T[p.index]);
  return Q;
}

// sum over eigenvalues of sum_{n > N} lambda^n / n, in closed form
std::complex<double> eigen_tail(const CMatrix& Q, int N) {
  Eigen::ComplexEigenSolver<CMatrix> es(Q, false);
  std::complex<double> tail = 0.0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const auto lam = es.eigenvalues()(i);
    if (std::abs(lam) < 1e-300) continue;
    std::complex<double> head = 0.0, p = 1.0;
    for (int n = 1; n <= N; ++n) {
      p *= lam;
      head += p / static_cast<double>(n);
    }
    tail += -std::log(1.0 - lam) - head;
  }
  return tail;
}

// log(1 - y) without cancellation for small y
std::complex<double> log1m(std::complex<double> y) {
  const double re = 0.5 * std::log1p(std::norm(y) - 2.0 * y.real());
  return {re, std::atan2(-y.imag(), 1.0 - y.real())};
}

double spectral_radius(const CMatrix& Q) {
  Eigen::ComplexEigenSolver<CMatrix> es(Q, false);
  double r = 0.0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) r = std::max(r, std::abs(es.eigenvalues()(i)));
  return r;
}

// sum_{n > N} Z_n(Re s) / n, which bounds the log-error of truncating either expansion at N
double real_tail(const RealFunction& tau, double re_s, int N) {
  const auto Q = weighted_matrix(tau, re_s);
  if (spectral_radius(Q) >= 1.0) return INFINITY;
  return std::abs(eigen_tail(Q, N).real());
}

}  // namespace

ZetaValue zeta_trace_log(const RealFunction& tau, std::complex<double> s, int n_max) {
  if (n_max < 1) throw InputError("n_max must be at least 1");
  validate_roof(tau);
  const auto Q = weighted_matrix(tau, s);
  CMatrix P = CMatrix::Identity(Q.rows(), Q.cols());
  std::complex<double> logz = 0.0;
  for (int n = 1; n <= n_max; ++n) {
    P = P * Q;
    logz += P.trace() / static_cast<double>(n);
  }
  ZetaValue z;
  z.mode = ZetaMode::TraceLog;
  const double r = spectral_radius(weighted_matrix(tau, s.real()));
  if (r >= 1.0) {
    spdlog::warn("zeta at s = {}+{}i: Re(s) <= h_T, the expansion diverges; returning the partial value", s.real(),
                 s.imag());
    z.divergent = true;
    z.value = std::exp(logz);
    z.tail_bound = INFINITY;
    return z;
  }
  const auto tail = eigen_tail(Q, n_max);
  z.value = std::exp(logz + tail);
  // remaining uncertainty: roundoff of the closed-form tail relative to its size
  z.tail_bound = std::abs(z.value) * (std::abs(tail) * 1e-10 + 1e-13 * (1.0 + std::abs(logz)));
  return z;
}

ZetaValue zeta_orbit_product(const OrbitTable& table, std::complex<double> s) {
  if (!table.has_periods()) throw InputError("orbit table has no periods attached");
  ZetaValue z;
  z.mode = ZetaMode::OrbitProduct;
  // compensated summation; each factor carries an evaluation error of a few ulps times (1 + |s| period)
  constexpr double eps = std::numeric_limits<double>::epsilon();
  std::complex<double> logz = 0.0, comp = 0.0;
  double rounding = 0.0;
  for (const auto& o : table.orbits) {
    const auto term = -log1m(std::exp(-s * o.period));
    const auto y = term - comp;
    const auto t = logz + y;
    comp = (t - logz) - y;
    logz = t;
    rounding += 4.0 * eps * (1.0 + std::abs(s) * o.period) * std::abs(term);
  }
  rounding += 2.0 * eps * std::abs(logz);
  z.value = std::exp(logz);
  const double B = real_tail(table.tau, s.real(), table.n_max);
  if (!std::isfinite(B)) {
    spdlog::warn("zeta at s = {}+{}i: Re(s) <= h_T, the product diverges; returning the partial value", s.real(),
                 s.imag());
    z.divergent = true;
    z.tail_bound = INFINITY;
    return z;
  }
  z.tail_bound = std::abs(z.value) * std::expm1(B + rounding);
  return z;
}

ZetaValue zeta_truncated(const RealFunction& tau, std::complex<double> s, int n_max, ZetaMode mode, int ceiling) {
  if (mode == ZetaMode::TraceLog) return zeta_trace_log(tau, s, n_max);
  return zeta_orbit_product(build_orbit_table(tau, n_max, ceiling), s);
}

WeightedCount weighted_pi_F(const OrbitTable& table, const RealFunction& F, double T) {
  const auto n = count_pi(table, T);
  WeightedCount w;
  const int k = table.model.alphabet_size();
  for (std::uint64_t i = 0; i < n; ++i) w.value += std::exp(orbit_period(table.orbits[i].word(k), F));
  w.pressure = solve_P_f(F, table.tau);
  const double x = std::exp(w.pressure * T);
  w.li_reference = x > 1.0 ? li(x) : std::numeric_limits<double>::quiet_NaN();
  return w;
}

}  // namespace thermolab
