#pragma once

#include <complex>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "thermolab/cylinder_function.hpp"
#include "thermolab/potentials.hpp"
#include "thermolab/subshift.hpp"

namespace thermolab {

// Exact matrix of L_g on depth-t cylinder functions:
//   (L h)(x) = sum_{j : A[j,x0]=1} e^{g(j x)} h((j x)|t).
// Stored by rows as (column, weight) lists following WordSpace::preimages.
class TransferMatrix {
 public:
  TransferMatrix() = default;
  TransferMatrix(RealFunction g, WordSpacePtr space);

  const WordSpacePtr& space_ptr() const { return space_; }
  const WordSpace& space() const { return *space_; }
  int depth() const { return space_->depth(); }
  std::size_t dim() const { return space_->size(); }
  const RealFunction& potential() const { return g_; }
  // weight of the k-th preimage entry of row x
  double weight(std::size_t x, std::size_t k) const { return weights_[offset_[x] + k]; }
  std::span<const double> row_weights(std::size_t x) const {
    return {weights_.data() + offset_[x], offset_[x + 1] - offset_[x]};
  }

  void apply(std::span<const double> in, std::span<double> out) const;
  void apply_transpose(std::span<const double> in, std::span<double> out) const;
  RealFunction apply(const RealFunction& h) const;
  RealFunction apply_power(const RealFunction& h, int m) const;

  Eigen::MatrixXd dense() const;

 private:
  WordSpacePtr space_;
  RealFunction g_;
  std::vector<std::size_t> offset_;
  std::vector<double> weights_;
};

TransferMatrix build_transfer_matrix(const SubshiftModel& model, const PotentialSpec& g, int t);
TransferMatrix build_transfer_matrix(const RealFunction& g, int t);

struct EigenOptions {
  double tol = 1e-13;
  int stable_iterations = 10;
  int max_iterations = 200000;
  std::size_t dense_limit = 4096;
};

struct RpfData {
  double lambda = 0.0;
  RealFunction h;       // L h = lambda h, normalized with sum h*nu_hat = 1
  RealFunction nu_hat;  // probability left eigenvector, nu_hat[w] = nu_hat([w])
  RealFunction nu;      // nu[w] = nu([w]) = h(w) nu_hat([w]) on basis cylinders
  RealFunction g;       // the potential the data belongs to
  int iterations = 0;
  bool used_dense = false;

  double pressure() const { return std::log(lambda); }
};

RpfData leading_triple(const TransferMatrix& M, const EigenOptions& opt = {});

double pressure(const SubshiftModel& model, const PotentialSpec& g, int t);
double pressure(const RealFunction& g);

// Unique s with pressure(f - s tau) = 0, by bracketed bisection.
double solve_P_f(const SubshiftModel& model, const PotentialSpec& f, const PotentialSpec& tau, int t);
double solve_P_f(const RealFunction& f, const RealFunction& tau);

// nu of the cylinder [w] for any admissible word length.
double cylinder_measure(const RpfData& rpf, std::span<const Symbol> w);
double gibbs_cylinder_measure(const RpfData& rpf, const Cylinder& C);
// nu([w]) / e^{g_m(y)} with g = potential - pressure and y the smallest admissible extension of w
double gibbs_ratio(const RpfData& rpf, std::span<const Symbol> w);

// nu of every basis cylinder of the given space (any depth).
RealFunction measure_on(const RpfData& rpf, const WordSpacePtr& space);

struct NormalizedPotential {
  double a = 0.0;
  double P_f = 0.0;
  double lambda_a = 0.0;
  RealFunction f_a;  // reduced to its effective depth
  RealFunction tau;  // roof on the same basis as f_a
  RealFunction h_a;
  RpfData base;      // eigendata of f - (P_f + a) tau
  TransferMatrix M;  // operator of f_a (M_a)
  double theta = 0.5;

  // T = max(||f_a||_0, |f_a|_theta, |tau|_theta)
  double bound_T() const;
};

NormalizedPotential normalize_potential(const SubshiftModel& model, const PotentialSpec& f, const PotentialSpec& tau,
                                        double a, int t, double a0 = 0.1);

// |second eigenvalue| of the normalized operator
double mixing_rate(const TransferMatrix& M0);
double mixing_rate(const NormalizedPotential& np);

}  // namespace thermolab
