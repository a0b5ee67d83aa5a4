#include "thermolab/complex_transfer.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "thermolab/errors.hpp"

namespace thermolab {

ComplexTransferOperator::ComplexTransferOperator(const RealFunction& f_a, const RealFunction& tau, double b, double a)
    : b_(b), a_(a) {
  const int t = std::max(f_a.depth(), tau.depth());
  auto space = WordSpace::make(f_a.model(), t);
  M_ = TransferMatrix(f_a.refined(space), space);
  build(tau);
}

ComplexTransferOperator::ComplexTransferOperator(const NormalizedPotential& np, double b)
    : M_(np.M), b_(b), a_(np.a) {
  build(np.tau);
}

void ComplexTransferOperator::build(const RealFunction& tau) {
  if (tau.depth() > M_.depth()) throw InputError("roof deeper than operator depth");
  tau_ = tau.refined(M_.space_ptr());
  offset_.assign(dim() + 1, 0);
  weights_.clear();
  for (std::size_t x = 0; x < dim(); ++x) {
    offset_[x] = weights_.size();
    auto pre = space().preimages(x);
    auto w = M_.row_weights(x);
    for (std::size_t k = 0; k < pre.size(); ++k)
      weights_.push_back(w[k] * std::exp(cplx(0.0, -b_ * tau_[pre[k].index])));
  }
  offset_[dim()] = weights_.size();
}

void ComplexTransferOperator::apply(std::span<const cplx> in, std::span<cplx> out) const {
  for (std::size_t x = 0; x < dim(); ++x) {
    auto pre = space().preimages(x);
    cplx s = 0.0;
    for (std::size_t k = 0; k < pre.size(); ++k) s += weights_[offset_[x] + k] * in[pre[k].index];
    out[x] = s;
  }
}

ComplexFunction ComplexTransferOperator::apply(const ComplexFunction& h) const {
  if (h.depth() > depth())
    throw InputError(fmt::format("function depth {} exceeds operator depth {}", h.depth(), depth()));
  auto in = h.refined(space_ptr());
  std::vector<cplx> out(dim());
  apply(in.values(), out);
  return ComplexFunction(space_ptr(), std::move(out));
}

ComplexFunction ComplexTransferOperator::apply_power(const ComplexFunction& h, int m) const {
  if (h.depth() > depth())
    throw InputError(fmt::format("function depth {} exceeds operator depth {}", h.depth(), depth()));
  auto cur = h.refined(space_ptr());
  std::vector<cplx> tmp(dim());
  for (int i = 0; i < m; ++i) {
    apply(cur.values(), tmp);
    std::copy(tmp.begin(), tmp.end(), cur.data().begin());
  }
  return cur;
}

NormThetaB::NormThetaB(double b_, double theta_) : b(b_), theta(theta_) {
  if (std::abs(b) < 1.0) throw InputError("the (theta,b) norm needs |b| >= 1");
}

double norm_theta_b(const ComplexFunction& h, const NormThetaB& n) {
  return sup_norm(h) + theta_seminorm(h, n.theta) / std::abs(n.b);
}

ContractionProfile contraction_profile(const NormalizedPotential& np, double b, int m_max,
                                       const std::optional<ComplexFunction>& h0) {
  if (m_max < 1) throw InputError("m_max must be at least 1");
  ComplexTransferOperator L(np, b);
  // the (theta,b) norm is only defined for |b| >= 1; below that the plain theta norm is used
  const double b_norm = std::max(1.0, std::abs(b));
  const NormThetaB nb(b_norm, np.theta);

  ContractionProfile out;
  out.b = b;
  out.depth = L.depth();
  auto cur = h0 ? h0->refined(L.space_ptr()) : ComplexFunction::constant(L.space_ptr(), 1.0);
  std::vector<cplx> tmp(L.dim());
  for (int m = 0; m <= m_max; ++m) {
    if (m > 0) {
      L.apply(cur.values(), tmp);
      std::copy(tmp.begin(), tmp.end(), cur.data().begin());
    }
    const double s = sup_norm(cur);
    if (s > 0.0 && (s > 1e100 || s < 1e-100)) {
      const double factor = 1.0 / s;
      for (auto& v : cur.data()) v *= factor;
      out.log_scale += std::log(s);
      ++out.rescales;
      spdlog::info("contraction profile b={} m={}: rescaled by {:.3e} (log scale {:.6f})", b, m, factor, out.log_scale);
    }
    ProfilePoint p;
    p.m = m;
    p.sup = sup_norm(cur);
    p.seminorm = theta_seminorm(cur, np.theta);
    const double raw = p.sup + p.seminorm / nb.b;
    p.log_norm = raw > 0.0 ? std::log(raw) + out.log_scale : -INFINITY;
    p.norm = std::exp(p.log_norm);
    p.sup *= std::exp(out.log_scale);
    p.seminorm *= std::exp(out.log_scale);
    out.points.push_back(p);
  }
  double env = 0.0;
  for (auto it = out.points.rbegin(); it != out.points.rend(); ++it) {
    env = std::max(env, it->norm);
    it->envelope = env;
  }
  const int half = m_max / 2;
  const auto& last = out.points.back();
  const auto& mid = out.points[static_cast<std::size_t>(half)];
  const auto& first = out.points.front();
  out.rho_hat = std::exp((last.log_norm - mid.log_norm) / static_cast<double>(m_max - half));
  out.rho_endpoints = std::exp((last.log_norm - first.log_norm) / static_cast<double>(m_max));
  return out;
}

ContractionProfile contraction_profile(const SubshiftModel& model, const PotentialSpec& f, const PotentialSpec& tau,
                                       double a, double b, int m_max, int t,
                                       const std::optional<ComplexFunction>& h0) {
  auto np = normalize_potential(model, f, tau, a, t, std::max(0.1, std::abs(a)));
  return contraction_profile(np, b, m_max, h0);
}

double lasota_yorke_constant(double theta, double T) {
  const double q = theta * T / (1.0 - theta);
  return std::exp(q) * std::max(1.0, 2.0 * q);
}

namespace {

template <class F>
void for_each_same_symbol_pair(const WordSpace& space, F f) {
  for (Symbol s = 0; s < space.model().alphabet_size(); ++s) {
    const Symbol p[1] = {s};
    auto [b, e] = space.prefix_range(std::span<const Symbol>(p, 1));
    for (std::size_t i = b; i < e; ++i)
      for (std::size_t j = b; j < e; ++j)
        if (i != j) f(i, j);
  }
}

}  // namespace

double minimal_ly_constant(const ComplexFunction& h, const RealFunction& H, double theta) {
  const int t = std::max(h.depth(), H.depth());
  auto space = WordSpace::make(h.model(), t);
  auto hh = h.refined(space);
  auto HH = H.refined(space);
  double B = 0.0;
  for_each_same_symbol_pair(*space, [&](std::size_t i, std::size_t j) {
    const double d = d_theta(theta, space->word(i), space->word(j));
    B = std::max(B, std::abs(hh[i] - hh[j]) / (HH[j] * d));
  });
  return B;
}

LasotaYorkeReport lasota_yorke_check(const NormalizedPotential& np, double b, int m, const ComplexFunction& h,
                                     const RealFunction& H, double B) {
  if (std::abs(b) < 1.0) throw InputError("Lasota-Yorke check needs |b| >= 1");
  if (m < 1) throw InputError("Lasota-Yorke check needs m >= 1");
  ComplexTransferOperator L(np, b);
  const auto& space = L.space();
  if (h.depth() > L.depth() || H.depth() > L.depth()) throw InputError("h, H deeper than the operator");
  const auto hh = h.refined(L.space_ptr());
  const auto HH = H.refined(L.space_ptr());
  const double theta = np.theta;

  LasotaYorkeReport rep;
  rep.T = np.bound_T();
  rep.A0 = lasota_yorke_constant(theta, rep.T);
  rep.m = m;
  rep.b = b;
  rep.B = B;
  for (double v : HH.values())
    if (!(v > 0.0)) throw InputError("Lasota-Yorke check needs H > 0");
  for_each_same_symbol_pair(space, [&](std::size_t i, std::size_t j) {
    const double d = d_theta(theta, space.word(i), space.word(j));
    if (std::abs(hh[i] - hh[j]) > B * HH[j] * d * (1.0 + 1e-12)) rep.precondition_failures.emplace_back(i, j);
  });

  const auto Lh = L.apply_power(hh, m);
  const auto MH = L.apply_modulus_power(HH, m);
  const auto Mabs = L.apply_modulus_power(modulus(hh), m);
  const double Bt = B * std::pow(theta, m);
  const double ab = std::abs(b);
  for_each_same_symbol_pair(space, [&](std::size_t i, std::size_t j) {
    const double d = d_theta(theta, space.word(i), space.word(j));
    const double lhs = std::abs(Lh[i] - Lh[j]);
    const double rhs = rep.A0 * (Bt * MH[j] + ab * Mabs[j]) * d;
    ++rep.pairs_checked;
    if (rhs > 0.0) rep.worst_ratio = std::max(rep.worst_ratio, lhs / rhs);
    if (lhs > rhs * (1.0 + 1e-12) + 1e-300) {
      ++rep.violations;
      if (rep.violating_pairs.size() < 16) rep.violating_pairs.emplace_back(i, j);
    }
  });
  return rep;
}

}  // namespace thermolab
