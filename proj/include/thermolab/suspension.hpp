#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "thermolab/cylinder_function.hpp"
#include "thermolab/potentials.hpp"
#include "thermolab/rpf.hpp"
#include "thermolab/subshift.hpp"

namespace thermolab {

// Piecewise polynomial on [0, inf): piece k covers [breaks[k], breaks[k+1]), the last piece is unbounded.
// Coefficients are in increasing powers of s.
class PiecewisePolynomial {
 public:
  PiecewisePolynomial() : PiecewisePolynomial(std::vector<double>{1.0}) {}
  explicit PiecewisePolynomial(std::vector<double> coeffs);
  PiecewisePolynomial(std::vector<double> breaks, std::vector<std::vector<double>> coeffs);

  static PiecewisePolynomial constant(double c) { return PiecewisePolynomial(std::vector<double>{c}); }
  static PiecewisePolynomial identity() { return PiecewisePolynomial(std::vector<double>{0.0, 1.0}); }

  double operator()(double s) const;
  // exact integral over [a, b]
  double integral(double a, double b) const;
  int degree() const;
  double sup_abs(double lo, double hi) const;
  const std::vector<double>& breaks() const { return breaks_; }
  bool is_constant() const;

 private:
  std::size_t piece(double s) const;
  std::vector<double> breaks_;
  std::vector<std::vector<double>> coeffs_;
};

// A(x, s) = base(x) * profile(s)
struct Observable {
  RealFunction base;
  PiecewisePolynomial profile;
};

Observable base_observable(const RealFunction& base);
Observable height_observable(const SubshiftModel& model, PiecewisePolynomial profile);
// indicator of the base cylinder [w], constant in the height
Observable cylinder_indicator(const SubshiftModel& model, const Word& w);

struct SuspensionModel {
  SubshiftModel base;
  RealFunction tau;  // truncated roof at the working depth
  RealFunction f;    // truncated potential
  double P_f = 0.0;
  RpfData mu;        // equilibrium data of f - P_f tau
  double mean_roof = 0.0;
  double tau_min = 0.0;
  double tau_max = 0.0;

  int depth() const { return tau.depth(); }
};

SuspensionModel build_suspension(const SubshiftModel& model, const PotentialSpec& f, const PotentialSpec& tau, int t);

double invariant_integral(const SuspensionModel& model, const Observable& H);

// Position after flowing for time t from (x, s): number of shifts and the new height.
// x must be long enough to resolve the roof along the way.
std::pair<int, double> flow(const SuspensionModel& model, std::span<const Symbol> x, double s, double t);

struct CorrelationOptions {
  int max_depth = 16;                        // quadrature ceiling before switching to sampling
  std::uint64_t max_words = std::uint64_t{1} << 17;
  std::uint64_t samples = 400000;
  std::uint64_t seed = 20240917;
  int chunks = 64;
  bool force_monte_carlo = false;
};

struct CorrelationPoint {
  double t = 0.0;
  double C = 0.0;
  std::string estimator;  // "quadrature" or "monte_carlo"
  std::uint64_t samples = 0;
  double std_error = 0.0;
};

// Required quadrature depth for flowing A against B for time t.
int required_depth(const SuspensionModel& model, const Observable& A, const Observable& B, double t);

// Uncentered integral of A * (B o phi_t) against the invariant measure.
double flow_integral(const SuspensionModel& model, const Observable& A, const Observable& B, double t, int depth);

std::vector<CorrelationPoint> correlation_series(const SuspensionModel& model, const Observable& A,
                                                 const Observable& B, const std::vector<double>& ts,
                                                 const CorrelationOptions& opt = {});
double correlation(const SuspensionModel& model, const Observable& A, const Observable& B, double t,
                   const CorrelationOptions& opt = {});

struct DecayFit {
  double c = 0.0;        // fitted rate, +inf when the series is already at the floor
  double quality = 0.0;  // coefficient of determination
  double intercept = 0.0;
  std::size_t used = 0;
};

// floors: per-sample noise floors (may be empty); the effective floor is max(floor, floors[i]).
DecayFit decay_fit(const std::vector<std::pair<double, double>>& series, double floor = 1e-10,
                   const std::vector<double>& floors = {});

}  // namespace thermolab
