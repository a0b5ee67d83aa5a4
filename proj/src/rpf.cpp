#include "thermolab/rpf.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "thermolab/errors.hpp"

namespace thermolab {

TransferMatrix::TransferMatrix(RealFunction g, WordSpacePtr space) : space_(std::move(space)), g_(std::move(g)) {
  if (g_.depth() > space_->depth())
    throw InputError(fmt::format("potential depth {} exceeds matrix depth {}", g_.depth(), space_->depth()));
  const auto gref = g_.refined(space_);
  offset_.assign(space_->size() + 1, 0);
  for (std::size_t x = 0; x < space_->size(); ++x) {
    offset_[x] = weights_.size();
    for (const auto& p : space_->preimages(x)) weights_.push_back(std::exp(gref[p.index]));
  }
  offset_[space_->size()] = weights_.size();
}

void TransferMatrix::apply(std::span<const double> in, std::span<double> out) const {
  for (std::size_t x = 0; x < dim(); ++x) {
    auto pre = space_->preimages(x);
    double s = 0.0;
    for (std::size_t k = 0; k < pre.size(); ++k) s += weights_[offset_[x] + k] * in[pre[k].index];
    out[x] = s;
  }
}

void TransferMatrix::apply_transpose(std::span<const double> in, std::span<double> out) const {
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t x = 0; x < dim(); ++x) {
    auto pre = space_->preimages(x);
    for (std::size_t k = 0; k < pre.size(); ++k) out[pre[k].index] += weights_[offset_[x] + k] * in[x];
  }
}

RealFunction TransferMatrix::apply(const RealFunction& h) const {
  if (h.depth() > depth()) throw InputError("function deeper than operator depth");
  auto in = h.refined(space_);
  std::vector<double> out(dim());
  apply(in.values(), out);
  return RealFunction(space_, std::move(out));
}

RealFunction TransferMatrix::apply_power(const RealFunction& h, int m) const {
  auto cur = h.refined(space_);
  std::vector<double> tmp(dim());
  for (int i = 0; i < m; ++i) {
    apply(cur.values(), tmp);
    std::copy(tmp.begin(), tmp.end(), cur.data().begin());
  }
  return cur;
}

Eigen::MatrixXd TransferMatrix::dense() const {
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(static_cast<long>(dim()), static_cast<long>(dim()));
  for (std::size_t x = 0; x < dim(); ++x) {
    auto pre = space_->preimages(x);
    for (std::size_t k = 0; k < pre.size(); ++k) D(static_cast<long>(x), pre[k].index) += weights_[offset_[x] + k];
  }
  return D;
}

TransferMatrix build_transfer_matrix(const RealFunction& g, int t) {
  if (t < 1) throw InputError("matrix depth must be at least 1");
  if (g.depth() > t) throw InputError(fmt::format("potential depth {} exceeds matrix depth {}", g.depth(), t));
  return TransferMatrix(g, WordSpace::make(g.model(), t));
}

TransferMatrix build_transfer_matrix(const SubshiftModel& model, const PotentialSpec& g, int t) {
  if (auto d = g.table_depth(); d && *d > t)
    throw InputError(fmt::format("potential depth {} exceeds matrix depth {}", *d, t));
  return build_transfer_matrix(truncate_to_depth(model, g, t), t);
}

namespace {

// Normalized power iteration; returns false if not converged.
bool power_iterate(std::size_t n, const std::function<void(std::span<const double>, std::span<double>)>& op,
                   std::vector<double>& v, const EigenOptions& opt, int& iterations, std::vector<double>& trace) {
  std::vector<double> w(n);
  int stable = 0;
  for (int it = 0; it < opt.max_iterations; ++it) {
    op(v, w);
    const double s = std::accumulate(w.begin(), w.end(), 0.0);
    if (!(s > 0.0) || !std::isfinite(s)) return false;
    double change = 0.0, vmax = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      w[i] /= s;
      change = std::max(change, std::abs(w[i] - v[i]));
      vmax = std::max(vmax, std::abs(w[i]));
    }
    v.swap(w);
    const double rel = change / vmax;
    trace.push_back(rel);
    if (trace.size() > 20) trace.erase(trace.begin());
    stable = rel < opt.tol ? stable + 1 : 0;
    iterations = it + 1;
    if (stable >= opt.stable_iterations) return true;
  }
  return false;
}

void dense_triple(const TransferMatrix& M, std::vector<double>& h, std::vector<double>& nu) {
  const Eigen::MatrixXd D = M.dense();
  auto perron = [](const Eigen::MatrixXd& X) {
    Eigen::EigenSolver<Eigen::MatrixXd> es(X, true);
    if (es.info() != Eigen::Success) throw NumericalError("dense eigensolver failed");
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < es.eigenvalues().size(); ++i)
      if (es.eigenvalues()[i].real() > es.eigenvalues()[best].real()) best = i;
    Eigen::VectorXd v = es.eigenvectors().col(best).real();
    if (v.sum() < 0) v = -v;
    return std::vector<double>(v.data(), v.data() + v.size());
  };
  h = perron(D);
  nu = perron(D.transpose());
}

}  // namespace

RpfData leading_triple(const TransferMatrix& M, const EigenOptions& opt) {
  const std::size_t n = M.dim();
  std::vector<double> h(n, 1.0 / static_cast<double>(n)), nu(n, 1.0 / static_cast<double>(n));
  int it_h = 0, it_nu = 0;
  std::vector<double> trace_h, trace_nu;
  RpfData out;
  const bool ok_h = power_iterate(n, [&](auto in, auto o) { M.apply(in, o); }, h, opt, it_h, trace_h);
  const bool ok_nu = ok_h && power_iterate(n, [&](auto in, auto o) { M.apply_transpose(in, o); }, nu, opt, it_nu, trace_nu);
  if (!ok_h || !ok_nu) {
    if (n > opt.dense_limit)
      throw NumericalError(fmt::format("power iteration did not converge within {} iterations", opt.max_iterations),
                           ok_h ? trace_nu : trace_h);
    spdlog::debug("power iteration did not converge; dense fallback at dimension {}", n);
    dense_triple(M, h, nu);
    out.used_dense = true;
  }
  out.iterations = std::max(it_h, it_nu);

  std::vector<double> Mh(n);
  M.apply(h, Mh);
  const double num = std::inner_product(nu.begin(), nu.end(), Mh.begin(), 0.0);
  const double den = std::inner_product(nu.begin(), nu.end(), h.begin(), 0.0);
  const double lambda = num / den;
  if (!(lambda > 0.0)) throw NumericalError("leading eigenvalue is not positive");
  // one polishing step makes h exactly a function of the first t-1 symbols
  for (std::size_t i = 0; i < n; ++i) h[i] = Mh[i] / lambda;

  const double nsum = std::accumulate(nu.begin(), nu.end(), 0.0);
  for (auto& v : nu) v /= nsum;
  const double c = std::inner_product(nu.begin(), nu.end(), h.begin(), 0.0);
  for (auto& v : h) v /= c;
  for (std::size_t i = 0; i < n; ++i)
    if (!(h[i] > 0.0) || nu[i] < 0.0) throw NumericalError("Perron eigenvector is not positive");

  std::vector<double> meas(n);
  for (std::size_t i = 0; i < n; ++i) meas[i] = h[i] * nu[i];
  out.lambda = lambda;
  out.h = RealFunction(M.space_ptr(), std::move(h));
  out.nu_hat = RealFunction(M.space_ptr(), std::move(nu));
  out.nu = RealFunction(M.space_ptr(), std::move(meas));
  out.g = M.potential();
  return out;
}

double pressure(const SubshiftModel& model, const PotentialSpec& g, int t) {
  return leading_triple(build_transfer_matrix(model, g, t)).pressure();
}

double pressure(const RealFunction& g) { return leading_triple(build_transfer_matrix(g, g.depth())).pressure(); }

double solve_P_f(const RealFunction& f, const RealFunction& tau) {
  validate_roof(tau);
  const int t = std::max({f.depth(), tau.depth(), 1});
  auto space = WordSpace::make(f.model(), t);
  const auto F = f.refined(space);
  const auto Tau = tau.refined(space);
  auto p = [&](double s) {
    RealFunction g = F;
    for (std::size_t i = 0; i < g.size(); ++i) g[i] -= s * Tau[i];
    return leading_triple(TransferMatrix(g, space)).pressure();
  };
  double lo = 0.0, hi = 0.0;
  const double p0 = p(0.0);
  if (p0 == 0.0) return 0.0;
  double step = 1.0;
  int doublings = 0;
  if (p0 > 0.0) {
    hi = step;
    while (p(hi) > 0.0) {
      lo = hi;
      step *= 2.0;
      hi = step;
      if (++doublings > 200) throw NumericalError("pressure root bracket expansion failed");
    }
  } else {
    lo = -step;
    while (p(lo) < 0.0) {
      hi = lo;
      step *= 2.0;
      lo = -step;
      if (++doublings > 200) throw NumericalError("pressure root bracket expansion failed");
    }
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    const double pm = p(mid);
    if (std::abs(pm) < 1e-15) return mid;
    if (pm > 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

double solve_P_f(const SubshiftModel& model, const PotentialSpec& f, const PotentialSpec& tau, int t) {
  return solve_P_f(truncate_to_depth(model, f, t), truncate_to_depth(model, tau, t));
}

double cylinder_measure(const RpfData& rpf, std::span<const Symbol> w) {
  const auto& space = rpf.nu.space();
  const int t = space.depth();
  const int m = static_cast<int>(w.size());
  if (m == 0) return 1.0;
  if (!is_admissible(space.model(), w)) return 0.0;
  if (m < t) {
    auto [b, e] = space.prefix_range(w);
    double s = 0.0;
    for (std::size_t i = b; i < e; ++i) s += rpf.nu[i];
    return s;
  }
  // conformality: nu_hat([w]) = lambda^{-1} e^{g(w)} nu_hat([sigma w]) once |w| > t
  double log_weight = 0.0;
  for (int k = 0; k + t < m; ++k) log_weight += rpf.g(w.subspan(static_cast<std::size_t>(k))) - std::log(rpf.lambda);
  const double tail = rpf.nu_hat[space.index_of(w.subspan(static_cast<std::size_t>(m - t)))];
  return rpf.h[space.index_of(w)] * std::exp(log_weight) * tail;
}

double gibbs_cylinder_measure(const RpfData& rpf, const Cylinder& C) { return cylinder_measure(rpf, C.word.symbols()); }

double gibbs_ratio(const RpfData& rpf, std::span<const Symbol> w) {
  const SubshiftModel& model = rpf.g.model();
  const int m = static_cast<int>(w.size());
  if (m == 0) throw InputError("empty cylinder");
  if (!is_admissible(model, w)) throw InputError("cylinder word is not admissible");
  std::vector<Symbol> y(w.begin(), w.end());
  while (static_cast<int>(y.size()) < m + rpf.g.depth() - 1) {
    Symbol next = 0;
    while (!model.allowed(y.back(), next)) ++next;
    y.push_back(next);
  }
  const std::span<const Symbol> ys(y);
  double gm = 0.0;
  for (int k = 0; k < m; ++k) gm += rpf.g(ys.subspan(static_cast<std::size_t>(k))) - std::log(rpf.lambda);
  return cylinder_measure(rpf, w) / std::exp(gm);
}

RealFunction measure_on(const RpfData& rpf, const WordSpacePtr& space) {
  if (space->depth() == rpf.nu.depth()) return RealFunction(space, std::vector<double>(rpf.nu.values().begin(), rpf.nu.values().end()));
  std::vector<double> v(space->size());
  for (std::size_t i = 0; i < space->size(); ++i) v[i] = cylinder_measure(rpf, space->word(i));
  return RealFunction(space, std::move(v));
}

double NormalizedPotential::bound_T() const {
  return std::max({sup_norm(f_a), theta_seminorm(f_a, theta), theta_seminorm(tau, theta)});
}

NormalizedPotential normalize_potential(const SubshiftModel& model, const PotentialSpec& f, const PotentialSpec& tau,
                                        double a, int t, double a0) {
  if (std::abs(a) > a0) throw InputError(fmt::format("|a| = {} exceeds a0 = {}", std::abs(a), a0));
  const auto F = truncate_to_depth(model, f, t);
  const auto Tau = truncate_to_depth(model, tau, t);
  validate_roof(Tau);

  NormalizedPotential out;
  out.a = a;
  out.theta = model.theta();
  out.P_f = solve_P_f(F, Tau);
  RealFunction g = F;
  for (std::size_t i = 0; i < g.size(); ++i) g[i] -= (out.P_f + a) * Tau[i];
  out.base = leading_triple(TransferMatrix(g, F.space_ptr()));
  out.lambda_a = out.base.lambda;
  out.h_a = out.base.h;
  for (double v : out.h_a.values())
    if (!(v > 0.0)) throw NumericalError("eigenfunction h_a is not strictly positive");

  auto deeper = WordSpace::make(model, t + 1);
  std::vector<double> fa(deeper->size());
  const double log_lambda = std::log(out.lambda_a);
  for (std::size_t i = 0; i < deeper->size(); ++i) {
    auto w = deeper->word(i);
    fa[i] = g(w) + std::log(out.h_a(w)) - std::log(out.h_a(w.subspan(1))) - log_lambda;
  }
  RealFunction f_full(deeper, std::move(fa));
  out.f_a = f_full.reduced(1e-14 * (1.0 + sup_norm(f_full)));
  const auto tau_red = Tau.reduced(0.0);
  const int work = std::max(out.f_a.depth(), tau_red.depth());
  auto work_space = WordSpace::make(model, work);
  out.f_a = out.f_a.refined(work_space);
  out.tau = tau_red.refined(work_space);
  out.M = TransferMatrix(out.f_a, work_space);
  return out;
}

double mixing_rate(const TransferMatrix& M0) {
  const std::size_t n = M0.dim();
  if (n == 1) return 0.0;
  if (n <= 4096) {
    Eigen::EigenSolver<Eigen::MatrixXd> es(M0.dense(), false);
    if (es.info() != Eigen::Success) throw NumericalError("eigensolver failed in mixing_rate");
    std::vector<double> mods;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) mods.push_back(std::abs(es.eigenvalues()[i]));
    std::sort(mods.begin(), mods.end(), std::greater<>());
    return mods[1];
  }
  // deflated power iteration: remove the constant direction using the invariant measure
  auto rpf = leading_triple(M0);
  std::vector<double> v(n), w(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = std::sin(1.0 + static_cast<double>(i));
  double rate = 0.0;
  for (int it = 0; it < 2000; ++it) {
    const double mean = std::inner_product(v.begin(), v.end(), rpf.nu.values().begin(), 0.0);
    for (auto& x : v) x -= mean;
    M0.apply(v, w);
    double nv = 0.0, nw = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      nv = std::max(nv, std::abs(v[i]));
      nw = std::max(nw, std::abs(w[i]));
    }
    if (nw == 0.0) return 0.0;
    rate = nw / nv;
    for (std::size_t i = 0; i < n; ++i) v[i] = w[i] / nw;
  }
  return rate;
}

double mixing_rate(const NormalizedPotential& np) {
  if (np.a != 0.0) throw InputError("mixing_rate needs the a = 0 normalized operator");
  return mixing_rate(np.M);
}

}  // namespace thermolab
