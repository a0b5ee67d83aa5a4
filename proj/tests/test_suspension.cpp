#include <doctest.h>

#include <cmath>
#include <limits>

#include "models.hpp"
#include "thermolab/errors.hpp"
#include "thermolab/suspension.hpp"

using namespace thermolab;
using namespace testing;

namespace {

const SuspensionModel& bernoulli() {
  static const auto s = build_suspension(full2(), zero(full2()), unit_roof(full2()), 1);
  return s;
}

const SuspensionModel& nonlattice() {
  static const auto s = build_suspension(full2(), zero(full2()), series_roof(), 5);
  return s;
}

const SuspensionModel& weighted_golden() {
  static const auto s = [] {
    const auto m = golden();
    return build_suspension(m, PotentialSpec::per_symbol(m, {0.3, -0.2}), golden_roof(m), 1);
  }();
  return s;
}

double sup_abs(const Observable& H, double tau_max) {
  double m = 0.0;
  for (double v : H.base.values()) m = std::max(m, std::abs(v));
  return m * H.profile.sup_abs(0.0, tau_max);
}

}  // namespace

TEST_SUITE("suspension") {

TEST_CASE("piecewise polynomials") {
  const PiecewisePolynomial p({0.0, 1.0}, {{1.0}, {0.0, 2.0}});
  CHECK(p(0.5) == 1.0);
  CHECK(p(1.5) == 3.0);
  CHECK(p.integral(0.0, 2.0) == doctest::Approx(1.0 + 3.0));
  CHECK(p.integral(0.5, 1.5) == doctest::Approx(0.5 + (2.25 - 1.0)));
  CHECK(p.degree() == 1);
  CHECK(PiecewisePolynomial::constant(2.0).is_constant());
  CHECK_FALSE(PiecewisePolynomial::identity().is_constant());
  CHECK(PiecewisePolynomial::identity().integral(0.0, 3.0) == doctest::Approx(4.5));
}

TEST_CASE("invariant integral examples") {
  const auto& s = bernoulli();
  CHECK(invariant_integral(s, height_observable(s.base, PiecewisePolynomial::constant(1.0))) ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK(invariant_integral(s, height_observable(s.base, PiecewisePolynomial::identity())) ==
        doctest::Approx(0.5).epsilon(1e-12));
  for (int m = 1; m <= 6; ++m) {
    const Word w(std::vector<Symbol>(static_cast<std::size_t>(m), 1));
    CHECK(invariant_integral(s, cylinder_indicator(s.base, w)) == doctest::Approx(std::ldexp(1.0, -m)).epsilon(1e-12));
  }
  for (const auto* m : {&nonlattice(), &weighted_golden()})
    CHECK(invariant_integral(*m, height_observable(m->base, PiecewisePolynomial::constant(1.0))) ==
          doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("height observable on a two-valued roof") {
  const auto& s = weighted_golden();
  const auto nu = measure_on(s.mu, s.tau.space_ptr());
  double num = 0.0;
  for (std::size_t i = 0; i < nu.size(); ++i) num += nu[i] * s.tau[i] * s.tau[i] / 2;
  CHECK(invariant_integral(s, height_observable(s.base, PiecewisePolynomial::identity())) ==
        doctest::Approx(num / s.mean_roof).epsilon(1e-12));
}

TEST_CASE("flow follows the roof") {
  const auto m = full2();
  const auto s = build_suspension(m, zero(m), roof12(m), 1);
  const std::vector<Symbol> x{0, 1, 1, 0, 0};
  CHECK(flow(s, x, 0.0, 0.5) == std::pair<int, double>{0, 0.5});
  CHECK(flow(s, x, 0.5, 1.0) == std::pair<int, double>{1, 0.5});
  CHECK(flow(s, x, 0.0, 4.5) == std::pair<int, double>{2, 1.5});
  CHECK_THROWS_AS(flow(s, x, 0.0, 100.0), InputError);
}

TEST_CASE("Bernoulli independence") {
  const auto& s = bernoulli();
  const auto A = cylinder_indicator(s.base, Word{0});
  CHECK(std::abs(correlation(s, A, A, 3.0)) < 1e-14);
  CHECK(correlation(s, A, A, 0.0) == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("flow invariance of the measure") {
  for (const auto* m : {&nonlattice(), &weighted_golden()}) {
    const auto one = height_observable(m->base, PiecewisePolynomial::constant(1.0));
    const auto B = Observable{random_function(WordSpace::make(m->base, 2), 7, 0.0, 1.0),
                              PiecewisePolynomial({0.0, 0.7}, {{1.0, -0.5}, {0.2, 0.3}})};
    const double expected = invariant_integral(*m, B);
    for (double t : {0.1, 0.5, 1.3}) {
      const double got = flow_integral(*m, one, B, t, required_depth(*m, one, B, t));
      CHECK(got == doctest::Approx(expected).epsilon(1e-8));
    }
  }
}

TEST_CASE("symmetry and bound") {
  const auto& s = nonlattice();
  const auto A = cylinder_indicator(s.base, Word{0, 1});
  const auto B = Observable{random_function(WordSpace::make(s.base, 2), 3, -1.0, 1.0), PiecewisePolynomial::identity()};
  CHECK(correlation(s, A, B, 0.0) == doctest::Approx(correlation(s, B, A, 0.0)).epsilon(1e-12));
  const double EA = invariant_integral(s, A);
  double centered = 0.0;
  for (double v : A.base.values()) centered = std::max(centered, std::abs(v - EA));
  const double bound = centered * sup_abs(B, s.tau_max);
  std::vector<double> ts;
  for (double t = 0.0; t <= 4.0; t += 0.5) ts.push_back(t);
  for (const auto& p : correlation_series(s, A, B, ts)) {
    CHECK(p.estimator == "quadrature");
    CHECK(std::abs(p.C) <= bound + 1e-12);
  }
  CHECK(correlation(s, A, A, 0.0) >= 0.0);
  CHECK_THROWS_AS(correlation(s, A, B, -1.0), InputError);
}

TEST_CASE("quadrature and sampling agree") {
  const auto& s = nonlattice();
  const auto A = cylinder_indicator(s.base, Word{0});
  const auto B = height_observable(s.base, PiecewisePolynomial::identity());
  const std::vector<double> ts{0.0, 0.5, 1.0, 2.0};
  CorrelationOptions mc;
  mc.force_monte_carlo = true;
  mc.samples = 200000;
  const auto q = correlation_series(s, A, B, ts);
  const auto r = correlation_series(s, A, B, ts, mc);
  for (std::size_t k = 0; k < ts.size(); ++k) {
    CHECK(q[k].estimator == "quadrature");
    CHECK(r[k].estimator == "monte_carlo");
    CHECK(r[k].std_error > 0.0);
    CHECK(std::abs(q[k].C - r[k].C) <= 3.0 * r[k].std_error);
  }
  const auto again = correlation_series(s, A, B, ts, mc);
  for (std::size_t k = 0; k < ts.size(); ++k) CHECK(again[k].C == r[k].C);
}

TEST_CASE("sampling takes over past the depth ceiling") {
  const auto& s = nonlattice();
  const auto A = cylinder_indicator(s.base, Word{0});
  CorrelationOptions opt;
  opt.max_depth = 12;
  opt.samples = 20000;
  const auto pts = correlation_series(s, A, A, {0.5, 20.0}, opt);
  CHECK(pts[0].estimator == "quadrature");
  CHECK(pts[1].estimator == "monte_carlo");
  CHECK(pts[1].samples == 20000);
}

TEST_CASE("decay fit") {
  std::vector<std::pair<double, double>> e, c, tiny;
  for (double t = 0.0; t <= 30.0; t += 0.5) {
    e.emplace_back(t, std::exp(-0.3 * t));
    c.emplace_back(t, 0.2);
    tiny.emplace_back(t, 1e-13);
  }
  const auto fe = decay_fit(e);
  CHECK(fe.c == doctest::Approx(0.3).epsilon(1e-6));
  CHECK(fe.quality == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(fe.used == e.size());
  CHECK(std::abs(decay_fit(c).c) < 1e-12);
  const auto ft = decay_fit(tiny);
  CHECK(std::isinf(ft.c));
  CHECK(ft.quality == 1.0);

  std::vector<double> floors(e.size(), 0.0);
  for (std::size_t k = 20; k < floors.size(); ++k) floors[k] = 1.0;
  const auto fl = decay_fit(e, 1e-10, floors);
  CHECK(fl.used == 20);
  CHECK(fl.c == doctest::Approx(0.3).epsilon(1e-6));
}

TEST_CASE("decay on the non-lattice model") {
  const auto& s = nonlattice();
  const auto A = height_observable(s.base, PiecewisePolynomial::identity());
  std::vector<double> ts;
  for (double t = 0.0; t <= 6.0; t += 0.5) ts.push_back(t);
  std::vector<std::pair<double, double>> series;
  for (const auto& p : correlation_series(s, A, A, ts)) series.emplace_back(p.t, p.C);
  const auto fit = decay_fit(series);
  CHECK(fit.c > 0.0);
  CHECK(fit.quality > 0.0);
}

}
