#pragma once

#include <compare>
#include <cstdint>
#include <initializer_list>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace thermolab {

using Symbol = int;

class Word {
 public:
  Word() = default;
  explicit Word(std::vector<Symbol> symbols) : symbols_(std::move(symbols)) {}
  Word(std::initializer_list<Symbol> symbols) : symbols_(symbols) {}
  explicit Word(std::span<const Symbol> symbols) : symbols_(symbols.begin(), symbols.end()) {}

  std::size_t size() const { return symbols_.size(); }
  bool empty() const { return symbols_.empty(); }
  Symbol operator[](std::size_t i) const { return symbols_[i]; }
  std::span<const Symbol> symbols() const { return symbols_; }
  const std::vector<Symbol>& vec() const { return symbols_; }

  Word prefix(std::size_t n) const;
  Word shifted(std::size_t k = 1) const;  // sigma^k
  Word prepended(Symbol j) const;
  Word appended(Symbol j) const;
  Word concat(const Word& tail) const;

  // Symbols concatenated; a '.' separator is used once the alphabet needs two digits.
  std::string to_string(int alphabet_size = 10) const;

  auto operator<=>(const Word&) const = default;
  bool operator==(const Word&) const = default;

 private:
  std::vector<Symbol> symbols_;
};

class SubshiftModel {
 public:
  SubshiftModel(int k0, std::vector<std::vector<int>> A, double theta);

  static SubshiftModel full_shift(int k0, double theta = 0.5);
  static SubshiftModel golden_mean(double theta = 0.5);

  int alphabet_size() const { return k0_; }
  double theta() const { return theta_; }
  const std::vector<std::vector<int>>& matrix() const { return A_; }
  bool allowed(Symbol i, Symbol j) const { return A_[i][j] != 0; }
  // smallest positivity exponent, empty when A is not primitive
  std::optional<int> positivity_exponent() const { return M0_; }

  SubshiftModel with_theta(double theta) const;

  bool operator==(const SubshiftModel& o) const {
    return k0_ == o.k0_ && A_ == o.A_ && theta_ == o.theta_;
  }

 private:
  int k0_;
  std::vector<std::vector<int>> A_;
  double theta_;
  std::optional<int> M0_;
};

bool is_admissible(const SubshiftModel& model, std::span<const Symbol> w);
inline bool is_admissible(const SubshiftModel& model, const Word& w) {
  return is_admissible(model, w.symbols());
}

std::vector<Word> enumerate_words(const SubshiftModel& model, int n);

// Exact count of admissible words of length n (sum of entries of A^{n-1}).
std::uint64_t count_words(const SubshiftModel& model, int n);

int check_aperiodic(const SubshiftModel& model);

int common_prefix_len(std::span<const Symbol> u, std::span<const Symbol> v);
inline int common_prefix_len(const Word& u, const Word& v) {
  return common_prefix_len(u.symbols(), v.symbols());
}

double d_theta(const SubshiftModel& model, const Word& u, const Word& v);
double d_theta(double theta, std::span<const Symbol> u, std::span<const Symbol> v);

struct Cylinder {
  Word word;
  int depth() const { return static_cast<int>(word.size()); }
  double diam_theta(double theta) const;
};

// Lexicographic basis of admissible depth-t words with index lookup and the
// sigma-preimage structure used by transfer operators.
class WordSpace {
 public:
  struct Preimage {
    Symbol symbol;
    std::uint32_t index;  // index of (j x) truncated to depth
  };

  static std::shared_ptr<const WordSpace> make(const SubshiftModel& model, int depth);

  const SubshiftModel& model() const { return model_; }
  int depth() const { return depth_; }
  std::size_t size() const { return count_; }

  std::span<const Symbol> word(std::size_t i) const {
    return {symbols_.data() + i * static_cast<std::size_t>(depth_), static_cast<std::size_t>(depth_)};
  }
  Word word_at(std::size_t i) const { return Word(word(i)); }

  // Index of the basis word equal to the first `depth` symbols of w (w may be longer).
  std::optional<std::size_t> find(std::span<const Symbol> w) const;
  std::size_t index_of(std::span<const Symbol> w) const;  // throws InputError
  std::size_t index_of(const Word& w) const { return index_of(w.symbols()); }

  // [begin, end) of basis words starting with the given prefix (length <= depth).
  std::pair<std::size_t, std::size_t> prefix_range(std::span<const Symbol> prefix) const;

  std::span<const Preimage> preimages(std::size_t x) const {
    return {preimages_.data() + pre_offset_[x], pre_offset_[x + 1] - pre_offset_[x]};
  }

  // index of sigma(word(i)) extended by symbol j, i.e. word(i)[1..] + j
  std::optional<std::size_t> successor(std::size_t i, Symbol j) const;

  // Index of word(i) truncated to a shallower space.
  std::size_t project(std::size_t i, const WordSpace& shallower) const;

 private:
  WordSpace(const SubshiftModel& model, int depth);
  std::uint64_t encode(std::span<const Symbol> w) const;

  SubshiftModel model_;
  int depth_;
  std::size_t count_ = 0;
  std::vector<Symbol> symbols_;
  std::vector<std::uint64_t> codes_;
  std::vector<std::size_t> pre_offset_;
  std::vector<Preimage> preimages_;
};

using WordSpacePtr = std::shared_ptr<const WordSpace>;

}  // namespace thermolab
