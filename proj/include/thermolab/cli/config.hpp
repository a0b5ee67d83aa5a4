#pragma once

#include <complex>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "thermolab/dolgopyat.hpp"
#include "thermolab/orbits_zeta.hpp"
#include "thermolab/potentials.hpp"
#include "thermolab/subshift.hpp"
#include "thermolab/suspension.hpp"

namespace thermolab::cli {

struct ObservableConfig {
  std::vector<Symbol> cylinder;  // empty: constant base 1
  std::vector<double> breaks{0.0};
  std::vector<std::vector<double>> coeffs{{1.0}};

  Observable build(const SubshiftModel& model) const;
};

struct RunConfig {
  SubshiftModel model = SubshiftModel::full_shift(2, 0.5);
  PotentialSpec f;
  PotentialSpec tau;
  int depth = 8;
  double a = 0.0;
  double a_max = 0.1;  // admissible |a| for normalization
  double b = 20.0;
  DolgopyatParams dolgopyat;

  std::vector<double> normalize_a{-0.05, 0.0, 0.05};
  int gibbs_max_length = 8;

  double scan_bmin = 10.0;
  double scan_bmax = 100.0;
  int scan_steps = 10;
  int scan_m = 40;

  int contraction_m = 60;
  int iterate_steps = 20;

  double corr_tmin = 0.0;
  double corr_tmax = 30.0;
  double corr_dt = 0.5;
  CorrelationOptions corr;
  ObservableConfig obs_a;
  ObservableConfig obs_b;

  double decay_floor = 1e-10;
  double decay_noise_sigmas = 5.0;

  int orbits_n_max = 12;
  int orbit_ceiling = kDefaultOrbitCeiling;

  std::vector<std::complex<double>> zeta_s{{1.0, 0.0}};
  int zeta_n_max = 60;        // trace-log truncation
  int zeta_orbit_n_max = 25;  // orbit-product truncation
  std::vector<std::string> zeta_modes{"trace-log"};

  double poc_lambda_min = 1.0;
  double poc_lambda_max = 18.0;
  double poc_lambda_step = 1.0;
  int poc_n_max = 0;  // 0: derived from lambda_max and the minimal roof value

  std::string out_dir = "out";
  std::optional<unsigned> threads;

  std::string canonical;  // canonical text of the effective configuration
  std::string hash;       // SHA-256 of canonical
};

// key path (dot separated) -> scalar text, applied before validation
using Overrides = std::vector<std::pair<std::string, std::string>>;

RunConfig parse_config_text(const std::string& text, const Overrides& overrides = {});
RunConfig parse_config(const std::string& path, const Overrides& overrides = {});

std::string sha256_hex(const std::string& data);

}  // namespace thermolab::cli
