#pragma once

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "thermolab/cylinder_function.hpp"
#include "thermolab/rpf.hpp"

namespace thermolab {

// L_ab = L_{f_a - i b tau} on the working depth max(depth f_a, depth tau).
class ComplexTransferOperator {
 public:
  ComplexTransferOperator(const RealFunction& f_a, const RealFunction& tau, double b, double a = 0.0);
  ComplexTransferOperator(const NormalizedPotential& np, double b);

  int depth() const { return M_.depth(); }
  double a() const { return a_; }
  double b() const { return b_; }
  const WordSpacePtr& space_ptr() const { return M_.space_ptr(); }
  const WordSpace& space() const { return M_.space(); }
  std::size_t dim() const { return M_.dim(); }
  const TransferMatrix& modulus_matrix() const { return M_; }
  const RealFunction& tau() const { return tau_; }
  cplx weight(std::size_t x, std::size_t k) const { return weights_[offset_[x] + k]; }

  void apply(std::span<const cplx> in, std::span<cplx> out) const;
  ComplexFunction apply(const ComplexFunction& h) const;
  ComplexFunction apply_power(const ComplexFunction& h, int m) const;
  RealFunction apply_modulus(const RealFunction& h) const { return M_.apply(h); }
  RealFunction apply_modulus_power(const RealFunction& h, int m) const { return M_.apply_power(h, m); }

 private:
  void build(const RealFunction& tau);

  TransferMatrix M_;
  RealFunction tau_;
  double b_;
  double a_;
  std::vector<std::size_t> offset_;
  std::vector<cplx> weights_;
};

struct NormThetaB {
  double b;
  double theta;
  NormThetaB(double b_, double theta_);
};

double norm_theta_b(const ComplexFunction& h, const NormThetaB& n);

struct ProfilePoint {
  int m;
  double norm;      // ||L^m h0||_{theta,b}
  double log_norm;  // natural log of norm, exact even when norm underflows
  double sup;
  double seminorm;
  double envelope;  // max_{k >= m} norm_k
};

struct ContractionProfile {
  double b = 0.0;
  int depth = 0;
  std::vector<ProfilePoint> points;  // m = 0..m_max
  double rho_hat = 1.0;              // geometric mean ratio over the last half
  double rho_endpoints = 1.0;        // (last/first)^{1/m_max}
  double log_scale = 0.0;            // accumulated renormalization
  int rescales = 0;
};

ContractionProfile contraction_profile(const NormalizedPotential& np, double b, int m_max,
                                       const std::optional<ComplexFunction>& h0 = std::nullopt);
ContractionProfile contraction_profile(const SubshiftModel& model, const PotentialSpec& f, const PotentialSpec& tau,
                                       double a, double b, int m_max, int t,
                                       const std::optional<ComplexFunction>& h0 = std::nullopt);

double lasota_yorke_constant(double theta, double T);

struct LasotaYorkeReport {
  double A0 = 0.0;
  double T = 0.0;
  int m = 0;
  double b = 0.0;
  double B = 0.0;
  std::size_t pairs_checked = 0;
  std::size_t violations = 0;
  double worst_ratio = 0.0;  // max lhs/rhs over checked pairs
  std::vector<std::pair<std::size_t, std::size_t>> precondition_failures;
  std::vector<std::pair<std::size_t, std::size_t>> violating_pairs;
  bool ok() const { return violations == 0 && precondition_failures.empty(); }
};

// Smallest B with |h(v)-h(v')| <= B H(v') D_theta(v,v') on same-1-cylinder pairs.
double minimal_ly_constant(const ComplexFunction& h, const RealFunction& H, double theta);

LasotaYorkeReport lasota_yorke_check(const NormalizedPotential& np, double b, int m, const ComplexFunction& h,
                                     const RealFunction& H, double B);

}  // namespace thermolab
