#include <doctest.h>

#include <cmath>
#include <map>
#include <numeric>

#include "models.hpp"
#include "thermolab/errors.hpp"
#include "thermolab/orbits_zeta.hpp"

using namespace thermolab;
using namespace testing;

namespace {

int mobius(int n) {
  int r = 1;
  for (int p = 2; p * p <= n; ++p)
    if (n % p == 0) {
      n /= p;
      if (n % p == 0) return 0;
      r = -r;
    }
  return n > 1 ? -r : r;
}

std::uint64_t necklaces(int n, std::uint64_t k) {
  std::int64_t s = 0;
  for (int d = 1; d <= n; ++d)
    if (n % d == 0) s += mobius(d) * static_cast<std::int64_t>(std::pow(static_cast<double>(k), n / d));
  return static_cast<std::uint64_t>(s / n);
}

double simpson_li(double x, int nodes) {
  const double h = (x - 2.0) / nodes;
  double s = 1.0 / std::log(2.0) + 1.0 / std::log(x);
  for (int i = 1; i < nodes; ++i) s += (i % 2 ? 4.0 : 2.0) / std::log(2.0 + i * h);
  return s * h / 3.0;
}

RealFunction depth1(const SubshiftModel& m, const PotentialSpec& p) { return truncate_to_depth(m, p, 1); }

bool is_primitive_lyndon(const Word& w) {
  const auto n = w.size();
  const std::vector<Symbol> v(w.symbols().begin(), w.symbols().end());
  for (std::size_t r = 1; r < n; ++r) {
    std::vector<Symbol> rot;
    for (std::size_t i = 0; i < n; ++i) rot.push_back(v[(i + r) % n]);
    if (!(v < rot)) return false;
  }
  return true;
}

}  // namespace

TEST_SUITE("orbits_zeta") {

TEST_CASE("necklace counts on the full shift") {
  const auto t = enumerate_primitive_orbits(full2(), 12);
  const std::vector<std::uint64_t> expected{2, 1, 2, 3, 6, 9};
  for (int n = 1; n <= 6; ++n) CHECK(t.primitive_counts[static_cast<std::size_t>(n)] == expected[n - 1]);
  for (int n = 1; n <= 12; ++n) CHECK(t.primitive_counts[static_cast<std::size_t>(n)] == necklaces(n, 2));
  const auto t3 = enumerate_primitive_orbits(SubshiftModel::full_shift(3, 0.5), 8);
  for (int n = 1; n <= 8; ++n) CHECK(t3.primitive_counts[static_cast<std::size_t>(n)] == necklaces(n, 3));
  CHECK(divisor_identity_holds(t));
  CHECK(divisor_identity_holds(t3));
}

TEST_CASE("golden mean orbits") {
  const auto t = enumerate_primitive_orbits(golden(), 16);
  CHECK(t.primitive_counts[1] == 1);
  CHECK(t.primitive_counts[2] == 1);
  CHECK(trace_power(golden(), 2) == 3);
  CHECK(divisor_identity_holds(t));
  for (const auto& o : t.orbits) {
    const auto w = o.word(2);
    CHECK(static_cast<int>(w.size()) == o.length);
    CHECK(is_primitive_lyndon(w));
    for (std::size_t i = 0; i < w.size(); ++i) CHECK_FALSE((w[i] == 1 && w[(i + 1) % w.size()] == 1));
  }
}

TEST_CASE("enumeration guards") {
  CHECK_THROWS_AS(enumerate_primitive_orbits(full2(), 0), InputError);
  CHECK_THROWS_AS(enumerate_primitive_orbits(full2(), 27), ConfigError);
  CHECK_NOTHROW(enumerate_primitive_orbits(full2(), 3, 30));
}

TEST_CASE("orbit periods") {
  const auto m = full2();
  const auto one = depth1(m, unit_roof(m));
  for (int n = 1; n <= 5; ++n) CHECK(orbit_period(Word(std::vector<Symbol>(static_cast<std::size_t>(n), 0)), one) == n);
  CHECK(orbit_period(Word{0, 1}, depth1(m, roof12(m))) == doctest::Approx(3.0));

  const auto tau3 = truncate_to_depth(m, series_roof(), 3);
  const Word cyc{0, 0, 1};
  const Word tripled = cyc.concat(cyc).concat(cyc);
  double oracle = 0.0;
  for (std::size_t k = 0; k < 3; ++k) oracle += tau3(tripled.shifted(k).prefix(3));
  CHECK(orbit_period(cyc, tau3) == doctest::Approx(oracle).epsilon(1e-14));
  CHECK_THROWS_AS(orbit_period(Word{}, tau3), InputError);
}

TEST_CASE("orbits are sorted and long enough") {
  const auto m = full2();
  const auto tau = truncate_to_depth(m, series_roof(), 4);
  const auto t = build_orbit_table(tau, 10);
  REQUIRE(t.has_periods());
  for (std::size_t i = 1; i < t.orbits.size(); ++i) CHECK(t.orbits[i - 1].period <= t.orbits[i].period);
  for (const auto& o : t.orbits) CHECK(o.period >= o.length * t.tau_min - 1e-12);
}

TEST_CASE("flow entropy") {
  CHECK(entropy_hT(depth1(full2(), unit_roof(full2()))) == doctest::Approx(std::log(2.0)).epsilon(1e-10));
  CHECK(entropy_hT(depth1(full2(), roof12(full2()))) == doctest::Approx(std::log(kPhi)).epsilon(1e-10));
  CHECK(entropy_hT(depth1(golden(), unit_roof(golden()))) == doctest::Approx(std::log(kPhi)).epsilon(1e-10));
}

TEST_CASE("logarithmic integral") {
  CHECK(li(2.0) == 0.0);
  CHECK(li(1e6) == doctest::Approx(78626.503995682064).epsilon(1e-12));
  const double L = std::log(1e6);
  CHECK(std::abs(li(1e6) * L / 1e6 - (1.0 + 1.0 / L + 2.0 / (L * L))) < 0.01);
  CHECK(std::abs(li(1e12) * std::log(1e12) / 1e12 - 1.0) < 0.05);
  CHECK(std::abs(li(16.0) - simpson_li(16.0, 10000)) < 1e-9);
  CHECK(li(1.5) < 0.0);
  CHECK_THROWS_AS(li(1.0), InputError);
  CHECK_THROWS_AS(li(0.5), InputError);
  double prev = li(2.5);
  for (double x = 3.0; x < 100.0; x += 1.0) {
    CHECK(li(x) > prev);
    prev = li(x);
  }
}

TEST_CASE("prime orbit counting") {
  const auto m = full2();
  const auto t1 = build_orbit_table(depth1(m, unit_roof(m)), 12);
  CHECK(count_pi(t1, 0.5) == 0);
  CHECK(count_pi(t1, 4.0) == 8);
  const auto t12 = build_orbit_table(depth1(m, roof12(m)), 10);
  CHECK(count_pi(t12, 3.0) == 3);
  CHECK_THROWS_AS(count_pi(t1, 13.0), InputError);
  std::uint64_t prev = 0;
  for (double lam = 0.0; lam <= 10.0; lam += 0.25) {
    const auto c = count_pi(t12, lam);
    CHECK(c >= prev);
    prev = c;
  }
  CHECK_THROWS_AS(count_pi(enumerate_primitive_orbits(m, 4), 2.0), InputError);
}

TEST_CASE("lattice ratio stays away from one") {
  const auto m = full2();
  const auto t = build_orbit_table(depth1(m, unit_roof(m)), 20);
  const double h = std::log(2.0);
  for (double lam : {16.0, 18.0, 20.0})
    CHECK(static_cast<double>(count_pi(t, lam)) / li(std::exp(h * lam)) > 1.25);
}

TEST_CASE("zeta closed form and limits") {
  const auto m = full2();
  const auto one = depth1(m, unit_roof(m));
  const auto z = zeta_trace_log(one, {1.0, 0.0}, 60);
  CHECK(z.value.real() == doctest::Approx(1.0 / (1.0 - 2.0 * std::exp(-1.0))).epsilon(1e-9));
  CHECK(z.value.real() == doctest::Approx(3.78443).epsilon(1e-5));
  CHECK(std::abs(z.value.imag()) < 1e-12);
  const std::complex<double> s{1.5, 0.7};
  const auto zc = zeta_trace_log(one, s, 80);
  CHECK(std::abs(zc.value - 1.0 / (1.0 - 2.0 * std::exp(-s))) < 1e-9);
  CHECK(std::abs(zeta_trace_log(one, {40.0, 0.0}, 10).value - 1.0) < 1e-15);
  CHECK(std::abs(zeta_orbit_product(build_orbit_table(one, 6), {40.0, 0.0}).value - 1.0) < 1e-15);
  CHECK(zeta_trace_log(one, {0.5, 0.0}, 20).divergent);
  CHECK(parse_zeta_mode("orbit-product") == ZetaMode::OrbitProduct);
  CHECK(to_string(ZetaMode::TraceLog) == "trace-log");
  CHECK_THROWS_AS(parse_zeta_mode("euler"), ConfigError);
}

TEST_CASE("zeta mode agreement") {
  const auto m = full2();
  for (const auto& tau : {depth1(m, roof12(m)), truncate_to_depth(m, series_roof(), 3)}) {
    for (std::complex<double> s : {std::complex<double>{1.2, 0.0}, {1.5, 2.0}, {2.0, -1.0}}) {
      const auto a = zeta_truncated(tau, s, 25, ZetaMode::OrbitProduct);
      const auto b = zeta_truncated(tau, s, 60, ZetaMode::TraceLog);
      CHECK(std::abs(a.value - b.value) <= a.tail_bound + b.tail_bound);
    }
  }
}

TEST_CASE("weighted counting") {
  const auto m = full2();
  const auto one = depth1(m, unit_roof(m));
  const auto t = build_orbit_table(one, 14);
  for (double T : {3.0, 7.5, 12.0})
    CHECK(weighted_pi_F(t, depth1(m, zero(m)), T).value == doctest::Approx(static_cast<double>(count_pi(t, T))));

  const double c = 0.3;
  const auto wc = weighted_pi_F(t, depth1(m, PotentialSpec::constant(m, c)), 10.0);
  double oracle = 0.0;
  for (int n = 1; n <= 10; ++n) oracle += static_cast<double>(necklaces(n, 2)) * std::exp(c * n);
  CHECK(wc.value == doctest::Approx(oracle).epsilon(1e-12));
  CHECK(wc.pressure == doctest::Approx(std::log(2.0) + c).epsilon(1e-9));
  CHECK(wc.li_reference == doctest::Approx(li(std::exp(wc.pressure * 10.0))).epsilon(1e-9));

  const auto tau = depth1(m, roof12(m));
  const auto t12 = build_orbit_table(tau, 12);
  double direct = 0.0;
  for (const auto& o : t12.orbits)
    if (o.period <= 8.0) direct += std::exp(o.period);
  CHECK(weighted_pi_F(t12, tau, 8.0).value == doctest::Approx(direct).epsilon(1e-12));
}

}
