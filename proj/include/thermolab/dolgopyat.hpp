#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "thermolab/complex_transfer.hpp"
#include "thermolab/cylinder_function.hpp"
#include "thermolab/rpf.hpp"

namespace thermolab {

struct DolgopyatParams {
  int N = 4;
  double epsilon1 = 1.0;
  double mu0 = 0.05;
  double E = 10.0;
  int l0 = 2;
  double a0 = 0.1;
  double b0 = 10.0;
  int q1 = 1;             // co-length of the sub-cylinders D_j inside C_m
  int samples = 32;       // sample points per C_m for branch-pair selection
  double epsilon3 = 0.0;  // minimal phase gap required for a Case 2 triple
};

// Uniform-length family: all admissible words of length l_b with theta^{l_b} in [eps1/(2|b|), eps1/|b|].
struct CylinderFamily {
  double b = 0.0;
  double epsilon1 = 1.0;
  double theta = 0.5;
  int length = 0;  // l_b
  int q1 = 1;
  WordSpacePtr members;  // depth l_b; member m is members->word(m)
  WordSpacePtr subs;     // depth l_b + q1; the sub-cylinders D_j

  std::size_t size() const { return members->size(); }
  Word member(std::size_t m) const { return members->word_at(m); }
  std::pair<std::size_t, std::size_t> children(std::size_t m) const { return subs->prefix_range(members->word(m)); }
  std::size_t parent(std::size_t j) const { return subs->project(j, *members); }
  // member index containing the word (by its first l_b symbols)
  std::optional<std::size_t> member_of(std::span<const Symbol> u) const { return members->find(u); }
};

CylinderFamily build_cylinder_family(const SubshiftModel& model, double b, double epsilon1, double theta,
                                     double b0 = 0.0, int q1 = 1);

// D(u,v) of the family: 0, D_theta(u,v)/diam(C_m) for the maximal admissible p, or 1.
double d_metric(const CylinderFamily& family, std::span<const Symbol> u, std::span<const Symbol> v);
inline double d_metric(const CylinderFamily& family, const Word& u, const Word& v) {
  return d_metric(family, u.symbols(), v.symbols());
}
// Whether the pair enters the cone condition (some p exists).
bool cone_eligible(const CylinderFamily& family, std::span<const Symbol> u, std::span<const Symbol> v);

struct BranchPair {
  Word w1;
  Word w2;
  double separation = 0.0;  // min sampled |phi(x) - phi(z)| across two sub-cylinders
};

struct BranchPairSet {
  int N = 0;
  int l0 = 0;
  int sample_length = 0;
  std::vector<std::vector<BranchPair>> pairs;  // [m][l]
  std::vector<double> delta_hat;               // best separation per member
  std::vector<std::size_t> candidates;         // admissible N-words per member
};

// tau_N(w1 x) - tau_N(w2 x)
double temporal_function(const RealFunction& tau, const Word& w1, const Word& w2, std::span<const Symbol> x);
double temporal_function(const RealFunction& tau, const CylinderFamily& family, const BranchPairSet& pairs,
                         std::size_t m, int l, std::span<const Symbol> x);

BranchPairSet select_branch_pairs(const SubshiftModel& model, const RealFunction& tau, const CylinderFamily& family,
                                  int N, int l0, int samples = 32);

// Everything the contraction machinery needs for one (a, b).
struct DolgopyatSetup {
  DolgopyatParams params;
  double a = 0.0;
  double b = 0.0;
  NormalizedPotential np;   // at a
  NormalizedPotential np0;  // at a = 0
  CylinderFamily family;
  BranchPairSet pairs;
  WordSpacePtr work;
  std::optional<ComplexTransferOperator> L;  // L_ab on the working depth
  TransferMatrix Ma;                          // M_a on the working depth
  TransferMatrix M0;                          // L_{f^(0)} on the working depth
  RealFunction nu;                            // Gibbs measure of basis cylinders
  double T = 0.0;

  int work_depth() const { return work->depth(); }
};

DolgopyatSetup build_dolgopyat_setup(const SubshiftModel& model, const PotentialSpec& f, const PotentialSpec& tau,
                                     double a, double b, const DolgopyatParams& params, int t);

struct Triple {
  std::size_t m = 0;  // family member
  int i = 0;          // branch 0 or 1
  std::size_t j = 0;  // sub-cylinder index (in family.subs)
  int l = 0;          // pair label
  bool operator==(const Triple&) const = default;
};

struct DampingFunction {
  std::vector<Triple> J;
  double mu0 = 0.0;
  RealFunction omega;  // on the working depth
};

// Validates the representative-set rules and builds omega_J.
DampingFunction make_damping(const DolgopyatSetup& s, std::vector<Triple> J, std::optional<double> mu0 = std::nullopt);

// M_a^N (omega * h)
RealFunction apply_contraction(const DolgopyatSetup& s, const DampingFunction& omega, const RealFunction& h);
ComplexFunction apply_contraction(const DolgopyatSetup& s, const DampingFunction& omega, const ComplexFunction& h);

struct ConeResult {
  bool member = false;
  std::optional<std::pair<std::size_t, std::size_t>> witness;  // (u, u') indices violating the bound
  double worst_ratio = 0.0;  // max over eligible pairs of |H(u)-H(u')| / (H(u') E D(u,u'))
};

ConeResult cone_membership(const CylinderFamily& family, const RealFunction& H, double E);

enum class CaseLabel { Case1, Case2, Fail };
std::string to_string(CaseLabel c);

struct SelectionReport {
  DampingFunction omega;
  std::vector<CaseLabel> cases;   // per member
  std::vector<double> phase_gap;  // per member, min angle between the two branch terms on the chosen D_j
  std::vector<double> slack;      // per member, min relative slack of |psi| <= gamma on the chosen D_j
  std::size_t violations = 0;     // points where |L^N h| > N_J H
  std::optional<std::size_t> witness;
  bool domination_ok() const { return violations == 0; }
  std::size_t failures() const;
};

SelectionReport select_J(const DolgopyatSetup& s, const ComplexFunction& h, const RealFunction& H);

struct IterationStep {
  int m = 0;
  double l2_H = 0.0;   // integral of H^2 d nu
  double sup_h = 0.0;  // ||h^(m)||_0
  double sup_H = 0.0;
  bool domination_ok = true;
  std::size_t case1 = 0, case2 = 0, fails = 0;
};

struct IterationResult {
  std::vector<IterationStep> steps;
  bool aborted = false;
  int abort_step = -1;
  std::optional<std::size_t> witness;
  bool l2_nonincreasing() const;
};

IterationResult dominated_iteration(const DolgopyatSetup& s, int steps,
                                    const std::optional<ComplexFunction>& h0 = std::nullopt);

struct L2Report {
  double lhs = 0.0;      // integral over V_b of (N_J H)^2
  double rhs = 0.0;      // integral over V_b of L^N_{f0}(H^2)
  double rho3 = 1.0;
  double C5 = 0.0;
  double one_minus_omega0 = 0.0;
  double VH2 = 0.0;      // integral over V_b of H^2
  double WH2 = 0.0;      // integral over W_J of H^2
  bool part_a_ok = true; // VH2 <= C5 * WH2
  bool ok = false;       // lhs <= rho3 * rhs
};

L2Report l2_contraction_check(const DolgopyatSetup& s, const DampingFunction& omega, const RealFunction& H);

// mu0 from the literal formula with symbolic surrogates, for reporting only
double analytic_mu0(const DolgopyatSetup& s);

// Random member of K_E: arbitrary positive values across family cylinders times
// geometrically decaying fluctuations inside them.
RealFunction random_cone_member(const DolgopyatSetup& s, std::uint64_t seed);

// Random representative set (one triple per member, random j, i, l).
std::vector<Triple> random_representative(const DolgopyatSetup& s, std::uint64_t seed);

}  // namespace thermolab
