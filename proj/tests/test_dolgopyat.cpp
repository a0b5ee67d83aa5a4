#include <doctest.h>

#include "models.hpp"
#include "thermolab/dolgopyat.hpp"
#include "thermolab/errors.hpp"

using namespace thermolab;
using namespace testing;

namespace {

DolgopyatParams tiny_a0() {
  DolgopyatParams p;
  p.a0 = 1e-12;
  return p;
}

const DolgopyatSetup& nonlattice_setup() {
  static const auto s = [] {
    const auto m = full2();
    return build_dolgopyat_setup(m, zero(m), series_roof(), 0.0, 20.0, tiny_a0(), 8);
  }();
  return s;
}

const DolgopyatSetup& lattice_setup() {
  static const auto s = [] {
    const auto m = full2();
    return build_dolgopyat_setup(m, zero(m), unit_roof(m), 0.0, 20.0, tiny_a0(), 8);
  }();
  return s;
}

}  // namespace

TEST_SUITE("dolgopyat") {

TEST_CASE("cylinder family length and size") {
  const auto f16 = build_cylinder_family(full2(), 16.0, 1.0, 0.5);
  CHECK(f16.length == 4);
  CHECK(f16.size() == 16);
  CHECK(build_cylinder_family(full2(), 1024.0, 1.0, 0.5).length == 10);
  CHECK(build_cylinder_family(golden(), 16.0, 1.0, 0.5).size() == 8);
  for (double b : {3.0, 16.0, 50.0, 333.0}) {
    const auto f = build_cylinder_family(full2(), b, 1.0, 0.5);
    const double d = std::pow(0.5, f.length);
    CHECK(d <= 1.0 / b + 1e-15);
    CHECK(d >= 0.5 / b - 1e-15);
  }
  CHECK_THROWS_AS(build_cylinder_family(full2(0.2), 6.0, 1.0, 0.2), ConfigError);
  CHECK_THROWS_AS(build_cylinder_family(full2(), 5.0, 1.0, 0.5, 10.0), InputError);
}

TEST_CASE("family metric") {
  const auto fam = build_cylinder_family(full2(), 16.0, 1.0, 0.5);
  const Word u{0, 1, 1, 0, 1, 1, 0, 0}, v{0, 1, 1, 0, 1, 1, 1, 0};
  CHECK(d_metric(fam, u, u) == 0.0);
  CHECK(d_metric(fam, u, v) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(d_metric(fam, u, Word{0, 1, 0, 0, 1, 1, 0, 0}) == 1.0);
  CHECK(d_metric(fam, u, Word{1, 1, 1, 0, 1, 1, 0, 0}) == 1.0);
}

TEST_CASE("metric contracts by theta^N under a common branch") {
  const auto fam = build_cylinder_family(full2(), 16.0, 1.0, 0.5);
  const auto words = enumerate_words(full2(), 7);
  const Word w{1, 0, 1};
  for (const auto& u : words)
    for (const auto& v : words)
      if (u != v && cone_eligible(fam, u.symbols(), v.symbols()))
        CHECK(d_metric(fam, w.concat(u), w.concat(v)) == doctest::Approx(0.125 * d_metric(fam, u, v)).epsilon(1e-14));
}

TEST_CASE("temporal functions") {
  const auto m = full2();
  const auto tau1 = truncate_to_depth(m, roof12(m), 1);
  const auto tau2 = truncate_to_depth(m, PotentialSpec::table(random_function(WordSpace::make(m, 2), 4, 1.0, 2.0)), 2);
  const Word w1{0, 1, 1}, w2{1, 0, 0};
  for (const auto& x : enumerate_words(m, 4)) {
    CHECK(temporal_function(tau1, w1, w2, x.symbols()) == doctest::Approx(1.0).epsilon(1e-14));
    const auto v1 = w1.concat(x), v2 = w2.concat(x);
    double oracle = 0.0;
    for (std::size_t k = 0; k < 3; ++k) oracle += tau2(v1.shifted(k).prefix(2)) - tau2(v2.shifted(k).prefix(2));
    CHECK(temporal_function(tau2, w1, w2, x.symbols()) == doctest::Approx(oracle).epsilon(1e-13));
    CHECK(temporal_function(tau2, w1, w2, x.symbols()) ==
          doctest::Approx(temporal_function(tau2, w1, w2, Word{x[0], 0, 0, 0}.symbols())));
  }
}

TEST_CASE("branch pair selection") {
  const auto m = full2();
  const auto fam = build_cylinder_family(m, 20.0, 1.0, 0.5);

  const auto lat = select_branch_pairs(m, truncate_to_depth(m, unit_roof(m), 1), fam, 2, 2);
  const auto cand = enumerate_words(m, 2);
  for (std::size_t c = 0; c < fam.size(); ++c) {
    CHECK(lat.candidates[c] == 4);
    CHECK(lat.delta_hat[c] == 0.0);
    CHECK(lat.pairs[c][0].w1 == cand[0]);
    CHECK(lat.pairs[c][0].w2 == cand[1]);
    CHECK(lat.pairs[c][1].w1 == cand[0]);
    CHECK(lat.pairs[c][1].w2 == cand[2]);
  }

  const auto nl = select_branch_pairs(m, truncate_to_depth(m, series_roof(), 8), fam, 4, 2);
  for (std::size_t c = 0; c < fam.size(); ++c) {
    CHECK(nl.delta_hat[c] > 0.0);
    CHECK(nl.pairs[c][0].w1 != nl.pairs[c][0].w2);
    CHECK(nl.pairs[c][0].separation >= nl.pairs[c][1].separation);
  }

  const auto gfam = build_cylinder_family(golden(), 20.0, 1.0, 0.5);
  CHECK_THROWS_AS(select_branch_pairs(golden(), truncate_to_depth(golden(), unit_roof(golden()), 1), gfam, 1, 1),
                  ModelError);
}

TEST_CASE("damping function and contraction operator") {
  const auto& s = nonlattice_setup();
  const auto J = random_representative(s, 3);
  const auto om = make_damping(s, J);
  for (double v : om.omega.values()) {
    CHECK(v >= 1.0 - s.params.mu0);
    CHECK(v <= 1.0);
  }
  const auto one = apply_contraction(s, om, RealFunction::constant(s.work, 1.0));
  for (double v : one.values()) {
    CHECK(v >= 1.0 - s.params.mu0 - 1e-12);
    CHECK(v <= 1.0 + 1e-12);
  }
  const auto h = random_function(s.work, 12, 0.1, 2.0);
  const auto plain = apply_contraction(s, make_damping(s, J, 0.0), h);
  const auto direct = s.Ma.apply_power(h, s.params.N);
  const auto damped = apply_contraction(s, om, h);
  auto x = h;
  x *= om.omega;
  for (int k = 0; k < s.params.N; ++k) x = s.Ma.apply(x);
  for (std::size_t i = 0; i < h.size(); ++i) {
    CHECK(plain[i] == doctest::Approx(direct[i]).epsilon(1e-13));
    CHECK(damped[i] == doctest::Approx(x[i]).epsilon(1e-13));
  }
  auto twice = J;
  twice.push_back(J.front());
  CHECK_THROWS_AS(make_damping(s, twice), InputError);
  CHECK_THROWS_AS(make_damping(s, std::vector<Triple>(J.begin() + 1, J.end())), InputError);
}

TEST_CASE("cone membership") {
  const auto& s = nonlattice_setup();
  const double E = s.params.E;
  CHECK(cone_membership(s.family, RealFunction::constant(s.work, 3.0), E).member);
  auto H = RealFunction::constant(s.work, 1.0);
  H[5] = 0.0;
  const auto z = cone_membership(s.family, H, E);
  CHECK_FALSE(z.member);

  const double min_d = std::pow(s.family.theta, s.work_depth() - 1 - s.family.length);
  auto small = RealFunction::constant(s.work, 1.0);
  small[0] = 1.0 + E * min_d / 2;
  CHECK(cone_membership(s.family, small, E).member);
  auto big = RealFunction::constant(s.work, 1.0);
  big[0] = 1.0 + 2 * E;
  const auto r = cone_membership(s.family, big, E);
  CHECK_FALSE(r.member);
  REQUIRE(r.witness.has_value());
  CHECK(cone_membership(s.family, 7.0 * small, E).member);
}

TEST_CASE("cone preservation on random members") {
  const auto& s = nonlattice_setup();
  for (std::uint64_t k = 0; k < 25; ++k) {
    const auto H = random_cone_member(s, 100 + k);
    REQUIRE(cone_membership(s.family, H, s.params.E).member);
    const auto om = make_damping(s, random_representative(s, 500 + k));
    CHECK(cone_membership(s.family, apply_contraction(s, om, H), s.params.E).member);
  }
}

TEST_CASE("J selection") {
  const auto& s = nonlattice_setup();
  const auto H = RealFunction::constant(s.work, 1.0);
  const auto zero_h = ComplexFunction::zeros(s.work);
  CHECK(select_J(s, zero_h, H).domination_ok());

  const auto half = select_J(s, to_complex(0.5 * H), H);
  CHECK(half.domination_ok());
  for (auto c : half.cases) CHECK(c == CaseLabel::Case1);

  const auto one = select_J(s, to_complex(H), H);
  CHECK(one.domination_ok());
  std::size_t case2 = 0;
  for (std::size_t m = 0; m < one.cases.size(); ++m)
    if (one.cases[m] == CaseLabel::Case2) {
      ++case2;
      CHECK(one.phase_gap[m] >= s.params.epsilon3);
    }
  CHECK(case2 > 0);

  const auto lat = select_J(lattice_setup(), to_complex(RealFunction::constant(lattice_setup().work, 1.0)),
                            RealFunction::constant(lattice_setup().work, 1.0));
  CHECK((lat.failures() > 0 || !lat.domination_ok()));
}

TEST_CASE("dominated iteration") {
  const auto it = dominated_iteration(nonlattice_setup(), 20);
  REQUIRE_FALSE(it.aborted);
  CHECK(it.steps.size() == 21);
  CHECK(it.steps[0].l2_H == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(it.l2_nonincreasing());
  for (std::size_t k = 1; k < it.steps.size(); ++k) {
    CHECK(it.steps[k].domination_ok);
    CHECK(it.steps[k].l2_H < it.steps[k - 1].l2_H);
  }

  const auto lat = dominated_iteration(lattice_setup(), 20);
  const bool decayed = !lat.aborted && lat.steps.back().l2_H < 0.5;
  CHECK_FALSE(decayed);
}

TEST_CASE("L2 contraction") {
  const auto& s = nonlattice_setup();
  const auto J = random_representative(s, 9);
  for (std::uint64_t k = 0; k < 10; ++k) {
    const auto H = random_cone_member(s, 900 + k);
    const auto r0 = l2_contraction_check(s, make_damping(s, J, 0.0), H);
    CHECK(r0.lhs <= r0.rhs * (1 + 1e-12));
    const auto r = l2_contraction_check(s, make_damping(s, J), H);
    CHECK(r.rho3 < 1.0);
    CHECK(r.ok);
  }
  const auto H1 = RealFunction::constant(s.work, 1.0);
  const auto om = make_damping(s, J);
  const auto r = l2_contraction_check(s, om, H1);
  double coverage = 0.0;
  for (std::size_t i = 0; i < s.work->size(); ++i)
    if (om.omega[i] < 1.0) coverage += s.nu[i];
  CHECK(r.lhs <= (1.0 - s.params.mu0 * coverage) * r.rhs * (1 + 1e-12));
  CHECK(analytic_mu0(s) > 0.0);
  CHECK(analytic_mu0(s) < s.params.mu0);
}

}
