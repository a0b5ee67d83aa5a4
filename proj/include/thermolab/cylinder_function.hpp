#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include "thermolab/errors.hpp"
#include "thermolab/subshift.hpp"

namespace thermolab {

using cplx = std::complex<double>;

inline double magnitude(double x) { return std::abs(x); }
inline double magnitude(const cplx& z) { return std::abs(z); }

// A function of the first `depth` coordinates, stored in the lexicographic basis.
template <class T>
class CylinderFunction {
 public:
  CylinderFunction() = default;
  CylinderFunction(WordSpacePtr space, std::vector<T> values) : space_(std::move(space)), values_(std::move(values)) {
    if (!space_) throw InputError("cylinder function without a word space");
    if (values_.size() != space_->size())
      throw InputError("cylinder function: one value per admissible word required");
  }
  static CylinderFunction constant(WordSpacePtr space, T c) {
    const auto n = space->size();
    return CylinderFunction(std::move(space), std::vector<T>(n, c));
  }
  static CylinderFunction zeros(WordSpacePtr space) { return constant(std::move(space), T{}); }

  bool valid() const { return static_cast<bool>(space_); }
  int depth() const { return space_->depth(); }
  std::size_t size() const { return values_.size(); }
  const WordSpace& space() const { return *space_; }
  const WordSpacePtr& space_ptr() const { return space_; }
  const SubshiftModel& model() const { return space_->model(); }

  const T& operator[](std::size_t i) const { return values_[i]; }
  T& operator[](std::size_t i) { return values_[i]; }
  std::span<const T> values() const { return values_; }
  std::vector<T>& data() { return values_; }

  // Evaluate at a word of length >= depth.
  T operator()(std::span<const Symbol> w) const { return values_[space_->index_of(w)]; }
  T operator()(const Word& w) const { return (*this)(w.symbols()); }

  // Same function re-indexed over a deeper basis.
  CylinderFunction refined(int new_depth) const {
    if (new_depth < depth()) throw InputError("refinement must not reduce depth");
    if (new_depth == depth()) return *this;
    auto deeper = WordSpace::make(model(), new_depth);
    return refined(deeper);
  }
  CylinderFunction refined(const WordSpacePtr& deeper) const {
    if (deeper->depth() < depth()) throw InputError("refinement must not reduce depth");
    if (deeper->depth() == depth()) return CylinderFunction(deeper, values_);
    std::vector<T> v(deeper->size());
    for (std::size_t i = 0; i < deeper->size(); ++i) v[i] = values_[deeper->project(i, *space_)];
    return CylinderFunction(deeper, std::move(v));
  }

  // Smallest depth d' at which the function is (to within tol) already determined.
  int effective_depth(double tol = 0.0) const {
    for (int d = 1; d < depth(); ++d) {
      bool ok = true;
      for (std::size_t i = 0; i < size() && ok; ++i) {
        auto [b, e] = space_->prefix_range(space_->word(i).first(static_cast<std::size_t>(d)));
        ok = magnitude(values_[i] - values_[b]) <= tol;
      }
      if (ok) return d;
    }
    return depth();
  }
  CylinderFunction reduced(double tol = 0.0) const {
    const int d = effective_depth(tol);
    if (d == depth()) return *this;
    auto shallow = WordSpace::make(model(), d);
    std::vector<T> v(shallow->size());
    for (std::size_t i = 0; i < shallow->size(); ++i) v[i] = values_[space_->prefix_range(shallow->word(i)).first];
    return CylinderFunction(shallow, std::move(v));
  }

  CylinderFunction& operator+=(const CylinderFunction& o) { return combine(o, [](T& a, const T& b) { a += b; }); }
  CylinderFunction& operator-=(const CylinderFunction& o) { return combine(o, [](T& a, const T& b) { a -= b; }); }
  CylinderFunction& operator*=(const CylinderFunction& o) { return combine(o, [](T& a, const T& b) { a *= b; }); }
  CylinderFunction& operator*=(T c) {
    for (auto& v : values_) v *= c;
    return *this;
  }
  friend CylinderFunction operator+(CylinderFunction a, const CylinderFunction& b) { return a += b; }
  friend CylinderFunction operator-(CylinderFunction a, const CylinderFunction& b) { return a -= b; }
  friend CylinderFunction operator*(CylinderFunction a, const CylinderFunction& b) { return a *= b; }
  friend CylinderFunction operator*(T c, CylinderFunction a) { return a *= c; }

 private:
  template <class F>
  CylinderFunction& combine(const CylinderFunction& o, F f) {
    if (o.depth() > depth()) *this = refined(o.space_ptr());
    if (o.depth() < depth()) return combine(o.refined(space_ptr()), f);
    for (std::size_t i = 0; i < values_.size(); ++i) f(values_[i], o.values_[i]);
    return *this;
  }

  WordSpacePtr space_;
  std::vector<T> values_;
};

using RealFunction = CylinderFunction<double>;
using ComplexFunction = CylinderFunction<cplx>;

template <class T>
double sup_norm(const CylinderFunction<T>& h) {
  double m = 0.0;
  for (const auto& v : h.values()) m = std::max(m, magnitude(v));
  return m;
}

inline ComplexFunction to_complex(const RealFunction& h) {
  std::vector<cplx> v(h.values().begin(), h.values().end());
  return ComplexFunction(h.space_ptr(), std::move(v));
}

inline RealFunction modulus(const ComplexFunction& h) {
  std::vector<double> v(h.size());
  for (std::size_t i = 0; i < h.size(); ++i) v[i] = std::abs(h[i]);
  return RealFunction(h.space_ptr(), std::move(v));
}

}  // namespace thermolab
