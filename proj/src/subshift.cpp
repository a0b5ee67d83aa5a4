#include "thermolab/subshift.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>

#include "thermolab/errors.hpp"

namespace thermolab {

Word Word::prefix(std::size_t n) const {
  if (n > symbols_.size()) throw InputError("prefix longer than word");
  return Word(std::vector<Symbol>(symbols_.begin(), symbols_.begin() + static_cast<long>(n)));
}

Word Word::shifted(std::size_t k) const {
  if (k > symbols_.size()) throw InputError("shift beyond word length");
  return Word(std::vector<Symbol>(symbols_.begin() + static_cast<long>(k), symbols_.end()));
}

Word Word::prepended(Symbol j) const {
  std::vector<Symbol> s;
  s.reserve(symbols_.size() + 1);
  s.push_back(j);
  s.insert(s.end(), symbols_.begin(), symbols_.end());
  return Word(std::move(s));
}

Word Word::appended(Symbol j) const {
  auto s = symbols_;
  s.push_back(j);
  return Word(std::move(s));
}

Word Word::concat(const Word& tail) const {
  auto s = symbols_;
  s.insert(s.end(), tail.symbols_.begin(), tail.symbols_.end());
  return Word(std::move(s));
}

std::string Word::to_string(int alphabet_size) const {
  std::string out;
  for (std::size_t i = 0; i < symbols_.size(); ++i) {
    if (alphabet_size > 10 && i > 0) out += '.';
    out += std::to_string(symbols_[i]);
  }
  return out;
}

namespace {

using IntMatrix = std::vector<std::vector<std::uint64_t>>;

IntMatrix boolean_product(const IntMatrix& X, const IntMatrix& Y) {
  const std::size_t n = X.size();
  IntMatrix Z(n, std::vector<std::uint64_t>(n, 0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k)
      if (X[i][k])
        for (std::size_t j = 0; j < n; ++j)
          if (Y[k][j]) Z[i][j] = 1;
  return Z;
}

std::optional<int> positivity_exponent_of(const std::vector<std::vector<int>>& A) {
  const std::size_t n = A.size();
  IntMatrix base(n, std::vector<std::uint64_t>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) base[i][j] = A[i][j] ? 1 : 0;
  IntMatrix P = base;
  const int limit = static_cast<int>(n * n);
  for (int m = 1; m <= limit; ++m) {
    bool positive = true;
    for (const auto& row : P)
      for (auto v : row) positive = positive && v != 0;
    if (positive) return m;
    P = boolean_product(P, base);
  }
  return std::nullopt;
}

}  // namespace

SubshiftModel::SubshiftModel(int k0, std::vector<std::vector<int>> A, double theta)
    : k0_(k0), A_(std::move(A)), theta_(theta) {
  if (k0_ < 2) throw InputError("alphabet size must be at least 2");
  if (static_cast<int>(A_.size()) != k0_) throw InputError("matrix not square");
  for (const auto& row : A_) {
    if (static_cast<int>(row.size()) != k0_) throw InputError("matrix not square");
    for (int v : row)
      if (v != 0 && v != 1) throw InputError("matrix entries must be 0 or 1");
  }
  if (!(theta_ > 0.0 && theta_ < 1.0)) throw InputError("theta must lie in (0,1)");
  for (int i = 0; i < k0_; ++i) {
    bool row_ok = false, col_ok = false;
    for (int j = 0; j < k0_; ++j) {
      row_ok = row_ok || A_[i][j];
      col_ok = col_ok || A_[j][i];
    }
    if (!row_ok || !col_ok) throw InputError(fmt::format("symbol {} is dead (empty row or column)", i));
  }
  M0_ = positivity_exponent_of(A_);
}

SubshiftModel SubshiftModel::full_shift(int k0, double theta) {
  return SubshiftModel(k0, std::vector<std::vector<int>>(k0, std::vector<int>(k0, 1)), theta);
}

SubshiftModel SubshiftModel::golden_mean(double theta) {
  return SubshiftModel(2, {{1, 1}, {1, 0}}, theta);
}

SubshiftModel SubshiftModel::with_theta(double theta) const { return SubshiftModel(k0_, A_, theta); }

bool is_admissible(const SubshiftModel& model, std::span<const Symbol> w) {
  const int k = model.alphabet_size();
  for (Symbol s : w)
    if (s < 0 || s >= k) throw InputError(fmt::format("symbol {} out of range [0,{})", s, k));
  for (std::size_t i = 0; i + 1 < w.size(); ++i)
    if (!model.allowed(w[i], w[i + 1])) return false;
  return true;
}

std::vector<Word> enumerate_words(const SubshiftModel& model, int n) {
  if (n < 1) throw InputError("word length must be at least 1");
  auto space = WordSpace::make(model, n);
  std::vector<Word> out;
  out.reserve(space->size());
  for (std::size_t i = 0; i < space->size(); ++i) out.push_back(space->word_at(i));
  return out;
}

std::uint64_t count_words(const SubshiftModel& model, int n) {
  if (n < 1) throw InputError("word length must be at least 1");
  const int k = model.alphabet_size();
  std::vector<std::uint64_t> ends(k, 1);
  for (int step = 1; step < n; ++step) {
    std::vector<std::uint64_t> next(k, 0);
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j)
        if (model.allowed(i, j)) next[j] += ends[i];
    ends = std::move(next);
  }
  std::uint64_t total = 0;
  for (auto c : ends) total += c;
  return total;
}

int check_aperiodic(const SubshiftModel& model) {
  auto m = model.positivity_exponent();
  if (!m) throw ModelError("not primitive: no power A^M with M <= k0^2 is strictly positive");
  return *m;
}

int common_prefix_len(std::span<const Symbol> u, std::span<const Symbol> v) {
  const std::size_t n = std::min(u.size(), v.size());
  std::size_t i = 0;
  while (i < n && u[i] == v[i]) ++i;
  return static_cast<int>(i);
}

double d_theta(double theta, std::span<const Symbol> u, std::span<const Symbol> v) {
  if (u.size() != v.size()) throw InputError("d_theta needs words of equal length");
  const int l = common_prefix_len(u, v);
  if (static_cast<std::size_t>(l) == u.size()) return 0.0;
  return std::pow(theta, l);
}

double d_theta(const SubshiftModel& model, const Word& u, const Word& v) {
  if (!is_admissible(model, u) || !is_admissible(model, v)) throw InputError("d_theta on inadmissible word");
  return d_theta(model.theta(), u.symbols(), v.symbols());
}

double Cylinder::diam_theta(double theta) const { return std::pow(theta, depth()); }

WordSpace::WordSpace(const SubshiftModel& model, int depth) : model_(model), depth_(depth) {
  const int k = model.alphabet_size();
  if (depth < 1) throw InputError("depth must be at least 1");
  if (std::log(static_cast<double>(k)) * depth > std::log(2.0) * 62)
    throw InputError(fmt::format("depth {} too large for word codes", depth));
  const std::uint64_t total = count_words(model, depth);
  if (total > (1ull << 31)) throw InputError(fmt::format("depth {} gives {} words, too many", depth, total));
  count_ = static_cast<std::size_t>(total);
  symbols_.reserve(count_ * depth);
  codes_.reserve(count_);

  // depth-first lexicographic enumeration
  std::vector<Symbol> cur(depth, 0);
  auto rec = [&](auto&& self, int pos) -> void {
    if (pos == depth) {
      symbols_.insert(symbols_.end(), cur.begin(), cur.end());
      codes_.push_back(encode(cur));
      return;
    }
    for (Symbol s = 0; s < k; ++s) {
      if (pos > 0 && !model_.allowed(cur[pos - 1], s)) continue;
      cur[pos] = s;
      self(self, pos + 1);
    }
  };
  rec(rec, 0);

  pre_offset_.assign(count_ + 1, 0);
  std::vector<Symbol> buf(depth);
  for (std::size_t x = 0; x < count_; ++x) {
    auto w = word(x);
    pre_offset_[x] = preimages_.size();
    for (Symbol j = 0; j < k; ++j) {
      if (!model_.allowed(j, w[0])) continue;
      buf[0] = j;
      std::copy(w.begin(), w.end() - 1, buf.begin() + 1);
      auto idx = find(buf);
      preimages_.push_back({j, static_cast<std::uint32_t>(*idx)});
    }
  }
  pre_offset_[count_] = preimages_.size();
}

std::shared_ptr<const WordSpace> WordSpace::make(const SubshiftModel& model, int depth) {
  return std::shared_ptr<const WordSpace>(new WordSpace(model, depth));
}

std::uint64_t WordSpace::encode(std::span<const Symbol> w) const {
  std::uint64_t c = 0;
  const auto k = static_cast<std::uint64_t>(model_.alphabet_size());
  for (int i = 0; i < depth_; ++i) c = c * k + static_cast<std::uint64_t>(w[i]);
  return c;
}

std::optional<std::size_t> WordSpace::find(std::span<const Symbol> w) const {
  if (static_cast<int>(w.size()) < depth_) return std::nullopt;
  for (int i = 0; i < depth_; ++i)
    if (w[i] < 0 || w[i] >= model_.alphabet_size()) return std::nullopt;
  const auto c = encode(w);
  auto it = std::lower_bound(codes_.begin(), codes_.end(), c);
  if (it == codes_.end() || *it != c) return std::nullopt;
  return static_cast<std::size_t>(it - codes_.begin());
}

std::size_t WordSpace::index_of(std::span<const Symbol> w) const {
  if (static_cast<int>(w.size()) < depth_)
    throw InputError(fmt::format("word of length {} shorter than depth {}", w.size(), depth_));
  auto idx = find(w);
  if (!idx) throw InputError("word not admissible");
  return *idx;
}

std::pair<std::size_t, std::size_t> WordSpace::prefix_range(std::span<const Symbol> prefix) const {
  const int p = static_cast<int>(prefix.size());
  if (p > depth_) throw InputError("prefix longer than depth");
  const auto k = static_cast<std::uint64_t>(model_.alphabet_size());
  std::uint64_t lo = 0;
  for (int i = 0; i < p; ++i) lo = lo * k + static_cast<std::uint64_t>(prefix[i]);
  std::uint64_t scale = 1;
  for (int i = p; i < depth_; ++i) scale *= k;
  lo *= scale;
  const std::uint64_t hi = lo + scale;
  auto b = std::lower_bound(codes_.begin(), codes_.end(), lo);
  auto e = std::lower_bound(b, codes_.end(), hi);
  return {static_cast<std::size_t>(b - codes_.begin()), static_cast<std::size_t>(e - codes_.begin())};
}

std::optional<std::size_t> WordSpace::successor(std::size_t i, Symbol j) const {
  auto w = word(i);
  if (!model_.allowed(w[depth_ - 1], j)) return std::nullopt;
  std::vector<Symbol> buf(w.begin() + 1, w.end());
  buf.push_back(j);
  return find(buf);
}

std::size_t WordSpace::project(std::size_t i, const WordSpace& shallower) const {
  if (shallower.depth() > depth_) throw InputError("projection target is deeper");
  return *shallower.find(word(i));
}

}  // namespace thermolab
