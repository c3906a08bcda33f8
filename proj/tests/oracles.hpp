#pragma once

// Test-only reference computations. Nothing here goes through the
// matrix-free solver or the walk DP.

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>

#include <cstdint>
#include <functional>
#include <vector>

#include "qform/free_combinatorics.hpp"
#include "qform/linalg.hpp"

namespace oracle {

using qform::ComplexMatrix;
using qform::Index;

/// Σ aᵢ ⊗ conj(bᵢ), rows indexed by (i, i') and columns by (j, j').
inline ComplexMatrix kronecker_sum(const std::vector<ComplexMatrix>& a,
                                   const std::vector<ComplexMatrix>& b) {
  const Index rows = a.front().rows() * b.front().rows();
  ComplexMatrix k = ComplexMatrix::Zero(rows, rows);
  for (std::size_t i = 0; i < a.size(); ++i) k += Eigen::kroneckerProduct(a[i], b[i].conjugate()).eval();
  return k;
}

inline double largest_singular_value(const ComplexMatrix& m) {
  Eigen::JacobiSVD<ComplexMatrix> svd(m);
  return svd.singularValues()(0);
}

/// Dense matrix of a linear map on rows×cols matrices in the row-major
/// vectorization vec(t)[i·cols + j] = t(i, j).
inline ComplexMatrix materialize(const std::function<ComplexMatrix(const ComplexMatrix&)>& map,
                                 Index rows, Index cols) {
  const Index n = rows * cols;
  ComplexMatrix dense(n, n);
  for (Index c = 0; c < n; ++c) {
    ComplexMatrix e = ComplexMatrix::Zero(rows, cols);
    e(c / cols, c % cols) = 1.0;
    const ComplexMatrix out = map(e);
    for (Index r = 0; r < n; ++r) dense(r, c) = out(r / cols, r % cols);
  }
  return dense;
}

inline Eigen::VectorXcd vec_rows(const ComplexMatrix& t) {
  Eigen::VectorXcd v(t.size());
  for (Index i = 0; i < t.rows(); ++i)
    for (Index j = 0; j < t.cols(); ++j) v(i * t.cols() + j) = t(i, j);
  return v;
}

/// Σ_{i,j} a(i,j) conj(b(i,j)).
inline std::complex<double> entrywise_inner(const ComplexMatrix& a, const ComplexMatrix& b) {
  std::complex<double> s = 0.0;
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j) s += a(i, j) * std::conj(b(i, j));
  return s;
}

inline std::uint64_t binomial(unsigned n, unsigned k) {
  std::uint64_t r = 1;
  for (unsigned i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

/// Closed walks of length `steps` at the root of a degree-regular tree,
/// by explicit recursion over paths (the stack holds child labels).
inline std::uint64_t tree_walks_by_recursion(int degree, int steps, std::vector<int>& stack) {
  if (steps == 0) return stack.empty() ? 1 : 0;
  if (static_cast<int>(stack.size()) > steps) return 0;
  std::uint64_t total = 0;
  if (!stack.empty()) {
    const int top = stack.back();
    stack.pop_back();
    total += tree_walks_by_recursion(degree, steps - 1, stack);
    stack.push_back(top);
  }
  const int children = stack.empty() ? degree : degree - 1;
  for (int c = 0; c < children; ++c) {
    stack.push_back(c);
    total += tree_walks_by_recursion(degree, steps - 1, stack);
    stack.pop_back();
  }
  return total;
}

inline std::uint64_t tree_walks(int degree, int half_length) {
  std::vector<int> stack;
  return tree_walks_by_recursion(degree, 2 * half_length, stack);
}

}  // namespace oracle
