#pragma once

#include <optional>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include "thermolab/cylinder_function.hpp"
#include "thermolab/subshift.hpp"

namespace thermolab {

// f(x) = c + sum_k w(x_k) * prod_{i<k} rho(x_i).
// A single ratio gives the geometric series c + sum_k w(x_k) rho^k; one ratio per
// symbol gives a self-similar (IFS-coded) function.
struct SeriesSpec {
  double c = 0.0;
  std::vector<double> weights;
  std::vector<double> ratios;

  double ratio(Symbol j) const { return ratios.size() == 1 ? ratios[0] : ratios[static_cast<std::size_t>(j)]; }
  double max_ratio() const;
};

class PotentialSpec {
 public:
  PotentialSpec() = default;
  static PotentialSpec table(RealFunction f);
  static PotentialSpec series(double c, std::vector<double> weights, double rho);
  static PotentialSpec series(double c, std::vector<double> weights, std::vector<double> rhos);
  static PotentialSpec constant(const SubshiftModel& model, double c);
  // depth-1 table with one value per symbol
  static PotentialSpec per_symbol(const SubshiftModel& model, std::vector<double> values);

  bool is_table() const { return std::holds_alternative<RealFunction>(v_); }
  const RealFunction& as_table() const { return std::get<RealFunction>(v_); }
  const SeriesSpec& as_series() const { return std::get<SeriesSpec>(v_); }
  // Table depth, empty for a series.
  std::optional<int> table_depth() const;

 private:
  std::variant<RealFunction, SeriesSpec> v_;
};

double evaluate(const PotentialSpec& p, std::span<const Symbol> w);
inline double evaluate(const PotentialSpec& p, const Word& w) { return evaluate(p, w.symbols()); }

double birkhoff_sum(const PotentialSpec& p, std::span<const Symbol> w, int m);
inline double birkhoff_sum(const PotentialSpec& p, const Word& w, int m) { return birkhoff_sum(p, w.symbols(), m); }

// Attainable range of sum_k w(y_k) prod rho over admissible y that may follow `last`
// (all symbols when last < 0).
std::pair<double, double> series_tail_range(const SubshiftModel& model, const SeriesSpec& s, Symbol last);

RealFunction truncate_to_depth(const SubshiftModel& model, const PotentialSpec& p, int t);

// Half-width of the tail interval, i.e. the sup-error of truncate_to_depth at depth t.
double truncation_error_bound(const SubshiftModel& model, const PotentialSpec& p, int t);

double theta_seminorm(const RealFunction& h, double theta);
double theta_seminorm(const ComplexFunction& h, double theta);

// f_m as a cylinder function of depth depth(f) + m - 1.
RealFunction birkhoff_function(const RealFunction& f, int m);

double min_value(const RealFunction& f);
double max_value(const RealFunction& f);

// Throws ConfigError when the roof is not bounded below by a positive constant.
void validate_roof(const RealFunction& tau);

}  // namespace thermolab
