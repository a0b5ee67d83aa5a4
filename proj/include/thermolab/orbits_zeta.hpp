#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "thermolab/cylinder_function.hpp"
#include "thermolab/subshift.hpp"

namespace thermolab {

struct PeriodicOrbit {
  std::uint64_t code = 0;  // base-k digits of the Lyndon representative
  int length = 0;
  double period = 0.0;

  Word word(int alphabet_size) const;
};

struct OrbitTable {
  SubshiftModel model;
  int n_max = 0;
  std::vector<PeriodicOrbit> orbits;          // sorted by period once periods are attached
  std::vector<std::uint64_t> primitive_counts;  // index n = 1..n_max
  std::vector<std::uint64_t> point_counts;      // trace(A^n)
  RealFunction tau;                             // empty until periods are attached
  double tau_min = 0.0;

  bool has_periods() const { return tau.valid(); }
};

constexpr int kDefaultOrbitCeiling = 26;

std::uint64_t trace_power(const SubshiftModel& model, int n);

OrbitTable enumerate_primitive_orbits(const SubshiftModel& model, int n_max, int ceiling = kDefaultOrbitCeiling);

// Birkhoff sum of tau once around the cycle.
double orbit_period(const Word& cycle, const RealFunction& tau);

// Attach periods and sort by (period, length, code).
void attach_periods(OrbitTable& table, const RealFunction& tau);
OrbitTable build_orbit_table(const RealFunction& tau, int n_max, int ceiling = kDefaultOrbitCeiling);

// sum_{d | n} d L(d) == trace(A^n) for every n
bool divisor_identity_holds(const OrbitTable& table);

double entropy_hT(const RealFunction& tau);

// li(x) = integral from 2 to x of du / log u
double li(double x);

std::uint64_t count_pi(const OrbitTable& table, double lam);

enum class ZetaMode { OrbitProduct, TraceLog };
std::string to_string(ZetaMode m);
ZetaMode parse_zeta_mode(const std::string& s);

struct ZetaValue {
  std::complex<double> value;
  double tail_bound = 0.0;  // estimated |zeta - value|
  ZetaMode mode = ZetaMode::TraceLog;
  bool divergent = false;
};

ZetaValue zeta_trace_log(const RealFunction& tau, std::complex<double> s, int n_max);
ZetaValue zeta_orbit_product(const OrbitTable& table, std::complex<double> s);
ZetaValue zeta_truncated(const RealFunction& tau, std::complex<double> s, int n_max, ZetaMode mode,
                         int ceiling = kDefaultOrbitCeiling);

struct WeightedCount {
  double value = 0.0;     // sum of e^{F around gamma} over l(gamma) <= T
  double pressure = 0.0;  // Pr(F) for the flow, i.e. s with P(F - s tau) = 0
  double li_reference = 0.0;
};

WeightedCount weighted_pi_F(const OrbitTable& table, const RealFunction& F, double T);

}  // namespace thermolab
