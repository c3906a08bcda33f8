#pragma once

// Exact combinatorics of the free group F_n.
//
// Identity patterns. Expanding (T*T)^m for T = Σ uᵢ ⊗ ūᵢ produces one term per
// index tuple (i₁, j₁, …, i_m, j_m) ∈ [n]^{2m}, carrying the word
//
//     g_{i₁}⁻¹ g_{j₁} g_{i₂}⁻¹ g_{j₂} … g_{i_m}⁻¹ g_{j_m}.
//
// We count the tuples whose word freely reduces to the identity.
//
// Reduction is a stack. Letter k (1-based) has sign − for odd k and + for
// even k, and each letter either pushes or pops, so after k letters the
// stack depth d has the parity of k. By induction the letter sitting at
// depth d was pushed at a step of the same parity as d, hence its sign is
// fixed by the parity of d alone: − at odd depth, + at even depth. The next
// letter always has the opposite sign to the top of the stack, so it
// cancels exactly when its index equals the top's index:
//
//   * depth 0 → 1: n choices (nothing to cancel),
//   * depth d → d+1, d ≥ 1: n − 1 choices,
//   * depth d → d−1: exactly 1 choice.
//
// The count is therefore the number of weighted nonnegative lattice walks
// 0 → 0 of length 2m with those weights, i.e. closed walks at the root of
// the n-regular tree. `WalkLattice` runs that DP in exact big-integer
// arithmetic; `brute_force_identity_patterns` enumerates tuples directly
// and exists to check the reduction.

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qform/linalg.hpp"

namespace qform {

using BigInt = boost::multiprecision::cpp_int;

/// Thrown when an exhaustive enumeration would exceed its size budget.
struct refused_instance : std::length_error {
  using std::length_error::length_error;
};

/// g_index^{sign}, index in 1..n, sign ±1.
struct Letter {
  int index = 1;
  int sign = 1;

  friend bool operator==(const Letter&, const Letter&) = default;
};

constexpr Letter inverse(Letter l) noexcept { return {l.index, -l.sign}; }

/// Freely reduced word: no adjacent x x⁻¹.
class ReducedWord {
 public:
  ReducedWord() = default;

  const std::vector<Letter>& letters() const noexcept { return letters_; }
  std::size_t size() const noexcept { return letters_.size(); }
  bool is_identity() const noexcept { return letters_.empty(); }

  friend bool operator==(const ReducedWord&, const ReducedWord&) = default;

 private:
  friend ReducedWord reduce_word(std::span<const Letter>);
  std::vector<Letter> letters_;
};

inline ReducedWord reduce_word(std::span<const Letter> letters) {
  ReducedWord out;
  auto& stack = out.letters_;
  for (const Letter& l : letters) {
    if (l.sign != 1 && l.sign != -1) throw std::invalid_argument("reduce_word: sign must be ±1");
    if (!stack.empty() && stack.back() == inverse(l)) {
      stack.pop_back();
    } else {
      stack.push_back(l);
    }
  }
  return out;
}

/// Weighted walks on {0, 1, 2, …}: root_branching ways up from depth 0,
/// deep_branching ways up from depth ≥ 1, one way down. Two rolling rows.
class WalkLattice {
 public:
  /// `horizon` is the total number of steps that will be taken; depths that
  /// cannot return to 0 within it are never stored.
  WalkLattice(std::uint64_t root_branching, std::uint64_t deep_branching, std::size_t horizon)
      : root_(root_branching), deep_(deep_branching), horizon_(horizon) {
    row_.assign(1, BigInt(1));
  }

  std::size_t step() const noexcept { return step_; }
  std::uint64_t root_branching() const noexcept { return root_; }
  std::uint64_t deep_branching() const noexcept { return deep_; }

  /// Count of weighted walks of length step() from 0 ending at `depth`.
  BigInt at(std::size_t depth) const {
    return depth < row_.size() ? row_[depth] : BigInt(0);
  }

  void advance() {
    if (step_ >= horizon_) throw std::out_of_range("WalkLattice: past horizon");
    const std::size_t next_step = step_ + 1;
    const std::size_t max_depth = std::min(next_step, horizon_ - next_step);
    std::vector<BigInt> next(max_depth + 1, BigInt(0));
    for (std::size_t d = 0; d <= max_depth; ++d) {
      if ((d & 1U) != (next_step & 1U)) continue;
      BigInt v = 0;
      if (d >= 1 && d - 1 < row_.size()) v += row_[d - 1] * (d == 1 ? root_ : deep_);
      if (d + 1 < row_.size()) v += row_[d + 1];
      next[d] = std::move(v);
    }
    row_ = std::move(next);
    step_ = next_step;
  }

 private:
  std::uint64_t root_;
  std::uint64_t deep_;
  std::size_t horizon_;
  std::size_t step_ = 0;
  std::vector<BigInt> row_;
};

/// Returns table[2k][0] for k = 0..max_half.
inline std::vector<BigInt> closed_walk_series(std::uint64_t root_branching,
                                              std::uint64_t deep_branching,
                                              std::size_t max_half) {
  WalkLattice lattice(root_branching, deep_branching, 2 * max_half);
  std::vector<BigInt> out;
  out.reserve(max_half + 1);
  out.push_back(lattice.at(0));
  for (std::size_t k = 1; k <= max_half; ++k) {
    lattice.advance();
    lattice.advance();
    out.push_back(lattice.at(0));
  }
  return out;
}

inline std::vector<BigInt> identity_pattern_series(std::uint64_t n, std::size_t max_m) {
  if (n < 1) throw std::invalid_argument("identity patterns: n must be ≥ 1");
  return closed_walk_series(n, n - 1, max_m);
}

/// Number of (i₁, j₁, …, i_m, j_m) ∈ [n]^{2m} whose word reduces to e.
inline BigInt count_identity_patterns(std::uint64_t n, std::size_t m) {
  return identity_pattern_series(n, m).back();
}

inline std::vector<BigInt> tree_return_series(std::uint64_t degree, std::size_t max_half) {
  if (degree < 2) throw std::invalid_argument("tree_return_count: degree must be ≥ 2");
  return closed_walk_series(degree, degree - 1, max_half);
}

/// Closed walks of length 2m at the root of the degree-regular tree.
inline BigInt tree_return_count(std::uint64_t degree, std::size_t half_length) {
  return tree_return_series(degree, half_length).back();
}

namespace detail {

/// Word g_{i₁}⁻¹ g_{j₁} … for a flat tuple (i₁, j₁, i₂, j₂, …), 0-based indices.
inline void pattern_word(std::span<const int> tuple, std::vector<Letter>& out) {
  out.clear();
  for (std::size_t k = 0; k < tuple.size(); ++k)
    out.push_back({tuple[k] + 1, (k % 2 == 0) ? -1 : 1});
}

/// Calls f(tuple) for every tuple in [n]^{len} in odometer order.
template <class F>
void for_each_tuple(int n, std::size_t len, F&& f) {
  std::vector<int> tuple(len, 0);
  while (true) {
    f(std::span<const int>(tuple));
    std::size_t k = len;
    while (k > 0) {
      --k;
      if (++tuple[k] < n) break;
      tuple[k] = 0;
      if (k == 0) return;
    }
    if (len == 0) return;
  }
}

inline void check_budget(std::uint64_t n, std::size_t m, double budget, const char* what) {
  if (std::pow(static_cast<double>(n), 2.0 * static_cast<double>(m)) > budget)
    throw refused_instance(std::string(what) + ": n^(2m) exceeds enumeration budget");
}

/// log₂ of a positive big integer.
inline double log2_big(const BigInt& x) {
  if (x <= 0) throw std::invalid_argument("log2_big: non-positive argument");
  const std::size_t msb = boost::multiprecision::msb(x);
  const std::size_t shift = msb > 60 ? msb - 60 : 0;
  const BigInt top = x >> shift;
  return std::log2(top.convert_to<double>()) + static_cast<double>(shift);
}

}  // namespace detail

/// Exhaustive oracle for count_identity_patterns. Refuses n^{2m} > 10⁷.
inline BigInt brute_force_identity_patterns(std::uint64_t n, std::size_t m) {
  if (n < 1) throw std::invalid_argument("brute_force_identity_patterns: n must be ≥ 1");
  detail::check_budget(n, m, 1e7, "brute_force_identity_patterns");
  std::uint64_t hits = 0;
  std::vector<Letter> word;
  detail::for_each_tuple(static_cast<int>(n), 2 * m, [&](std::span<const int> tuple) {
    detail::pattern_word(tuple, word);
    if (reduce_word(word).is_identity()) ++hits;
  });
  return BigInt(hits);
}

/// count_{M}/count_{M-1} for the last two entries; approximates the squared
/// norm, so √ of the result estimates the norm itself.
inline double growth_estimate(std::span<const BigInt> counts) {
  if (counts.size() < 2) throw std::invalid_argument("growth_estimate: need ≥ 2 counts");
  for (const auto& c : counts)
    if (c <= 0) throw std::invalid_argument("growth_estimate: counts must be positive");
  const BigInt& a = counts[counts.size() - 1];
  const BigInt& b = counts[counts.size() - 2];
  return std::exp2(detail::log2_big(a) - detail::log2_big(b));
}

/// count_M^{1/M} with M the index of the last entry (entry k is count at m = k).
inline double root_growth_estimate(std::span<const BigInt> counts) {
  if (counts.size() < 2) throw std::invalid_argument("root_growth_estimate: need ≥ 2 counts");
  const BigInt& last = counts.back();
  if (last <= 0) throw std::invalid_argument("root_growth_estimate: counts must be positive");
  return std::exp2(detail::log2_big(last) / static_cast<double>(counts.size() - 1));
}

struct AbsorptionReport {
  double moment = 0.0;     // Σ over cancelling tuples of Re tr(conj(u^α))/N
  BigInt count = 0;        // count_identity_patterns(n, m)
  std::uint64_t enumerated_hits = 0;
};

/// (τ ⊗ tr/N)[(X*X)^m] for X = Σ λ(gᵢ) ⊗ ūᵢ. τ keeps only tuples whose free
/// word is e; each contributes the normalized trace of the conjugated
/// unitary product u*_{i₁}u_{j₁}…, which is 1 up to rounding.
inline AbsorptionReport moment_absorption_check(const UnitaryFamily& u, std::size_t m) {
  const std::uint64_t n = u.size();
  detail::check_budget(n, m, 1e6, "moment_absorption_check");
  const Index dim = u.dim();
  std::vector<ComplexMatrix> adjoints;
  for (const auto& x : u.members()) adjoints.push_back(x.adjoint());

  AbsorptionReport report;
  std::vector<Letter> word;
  ComplexMatrix product(dim, dim);
  detail::for_each_tuple(static_cast<int>(n), 2 * m, [&](std::span<const int> tuple) {
    detail::pattern_word(tuple, word);
    if (!reduce_word(word).is_identity()) return;
    ++report.enumerated_hits;
    product.setIdentity();
    for (std::size_t k = 0; k < tuple.size(); ++k) {
      const auto i = static_cast<std::size_t>(tuple[k]);
      product = product * (k % 2 == 0 ? adjoints[i] : u[i]);
    }
    report.moment += std::conj(product.trace()).real() / static_cast<double>(dim);
  });
  report.count = count_identity_patterns(n, m);
  return report;
}

}  // namespace qform
