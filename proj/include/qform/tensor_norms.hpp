#pragma once

// Minimal tensor norms ‖Σ aᵢ ⊗ b̄ᵢ‖ computed through the action
// t ↦ Σ aᵢ t bᵢ† on Hilbert-Schmidt space, plus the lower-bound machinery
// built on top of it.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "qform/free_combinatorics.hpp"
#include "qform/linalg.hpp"
#include "qform/rng.hpp"

namespace qform {

/// 2√(n−1): the free-group value of ‖Σ λ(gᵢ)‖.
inline double free_lower_bound(std::size_t n) {
  return n == 0 ? 0.0 : 2.0 * std::sqrt(static_cast<double>(n) - 1.0);
}

/// Σ aᵢ ⊗ b̄ᵢ with aᵢ ∈ M_{left_dim}, bᵢ ∈ M_{right_dim}. Acts on
/// left_dim × right_dim matrices.
class QuadraticForm {
 public:
  QuadraticForm(std::vector<ComplexMatrix> left, std::vector<ComplexMatrix> right)
      : left_(std::move(left)), right_(std::move(right)) {
    if (left_.empty()) throw std::invalid_argument("QuadraticForm: empty family");
    if (left_.size() != right_.size())
      throw std::invalid_argument("QuadraticForm: families differ in length");
    left_dim_ = left_.front().rows();
    right_dim_ = right_.front().rows();
    for (const auto& a : left_)
      if (a.rows() != left_dim_ || a.cols() != left_dim_ || !all_finite(a))
        throw std::invalid_argument("QuadraticForm: left members must share a square shape");
    for (const auto& b : right_)
      if (b.rows() != right_dim_ || b.cols() != right_dim_ || !all_finite(b))
        throw std::invalid_argument("QuadraticForm: right members must share a square shape");
    if (left_dim_ < 1 || right_dim_ < 1) throw std::invalid_argument("QuadraticForm: zero dimension");
  }

  /// Σ uᵢ ⊗ ūᵢ.
  static QuadraticForm diagonal(const UnitaryFamily& u) {
    return QuadraticForm(u.members(), u.members());
  }

  std::size_t size() const noexcept { return left_.size(); }
  Index left_dim() const noexcept { return left_dim_; }
  Index right_dim() const noexcept { return right_dim_; }
  Shape domain() const noexcept { return {left_dim_, right_dim_}; }
  const std::vector<ComplexMatrix>& left() const noexcept { return left_; }
  const std::vector<ComplexMatrix>& right() const noexcept { return right_; }

  ComplexMatrix apply(const ComplexMatrix& t) const {
    check_shape(t);
    ComplexMatrix out = ComplexMatrix::Zero(left_dim_, right_dim_);
    for (std::size_t i = 0; i < left_.size(); ++i) out.noalias() += left_[i] * t * right_[i].adjoint();
    return out;
  }

  ComplexMatrix adjoint_apply(const ComplexMatrix& s) const {
    check_shape(s);
    ComplexMatrix out = ComplexMatrix::Zero(left_dim_, right_dim_);
    for (std::size_t i = 0; i < left_.size(); ++i) out.noalias() += left_[i].adjoint() * s * right_[i];
    return out;
  }

 private:
  void check_shape(const ComplexMatrix& t) const {
    if (t.rows() != left_dim_ || t.cols() != right_dim_)
      throw std::invalid_argument("QuadraticForm: argument must be left_dim × right_dim");
  }

  std::vector<ComplexMatrix> left_;
  std::vector<ComplexMatrix> right_;
  Index left_dim_ = 0;
  Index right_dim_ = 0;
};

inline HSMatrix superop_apply(const QuadraticForm& form, const HSMatrix& t) {
  return HSMatrix(form.apply(t.mat()));
}

struct NormReport {
  double value = 0.0;
  bool converged = false;
  int iterations = 0;
  HSMatrix witness;
  double lower_bound_2sqrt = 0.0;  // 2√(n−1)
  double upper_bound_n = 0.0;      // n; a true bound only for unitary families
};

inline NormReport min_tensor_norm(const QuadraticForm& form, const SolverParams& params = {}) {
  auto apply = [&](const ComplexMatrix& t) { return form.apply(t); };
  auto adjoint = [&](const ComplexMatrix& s) { return form.adjoint_apply(s); };
  SingularEstimate est = top_singular_value(apply, adjoint, form.domain(), params);
  NormReport r;
  r.value = est.value;
  r.converged = est.converged;
  r.iterations = est.iterations;
  r.witness = std::move(est.witness);
  r.lower_bound_2sqrt = free_lower_bound(form.size());
  r.upper_bound_n = static_cast<double>(form.size());
  return r;
}

/// Default tolerance scale for unitarity checks on inputs to this module.
inline constexpr double kInputUnitarityTolerance = 1e-8;

struct GapReport {
  double gap = 0.0;  // ‖Σ uᵢ ⊗ ūᵢ‖ − 2√(n−1)
  NormReport norm;
};

inline GapReport theorem1_gap(const UnitaryFamily& u, const SolverParams& params = {}) {
  GapReport g;
  g.norm = min_tensor_norm(QuadraticForm::diagonal(u), params);
  g.gap = g.norm.value - g.norm.lower_bound_2sqrt;
  return g;
}

/// Validates unitarity at tolerance·√N before computing the gap.
inline GapReport theorem1_gap(std::vector<ComplexMatrix> members, const SolverParams& params = {},
                              double tolerance = kInputUnitarityTolerance) {
  return theorem1_gap(UnitaryFamily(std::move(members), tolerance), params);
}

struct HaagerupReport {
  double slack = 0.0;   // rhs − lhs
  double lhs = 0.0;     // ‖Σ aᵢ ⊗ b̄ᵢ‖
  double norm_aa = 0.0; // ‖Σ aᵢ ⊗ āᵢ‖
  double norm_bb = 0.0; // ‖Σ bᵢ ⊗ b̄ᵢ‖
  bool converged = false;
};

/// ‖Σ aᵢ⊗āᵢ‖^{1/2} ‖Σ bᵢ⊗b̄ᵢ‖^{1/2} − ‖Σ aᵢ⊗b̄ᵢ‖.
inline HaagerupReport haagerup_slack(const std::vector<ComplexMatrix>& a,
                                     const std::vector<ComplexMatrix>& b,
                                     const SolverParams& params = {}) {
  if (a.size() != b.size()) throw std::invalid_argument("haagerup_slack: families differ in length");
  const NormReport ab = min_tensor_norm(QuadraticForm(a, b), params);
  const NormReport aa = min_tensor_norm(QuadraticForm(a, a), params);
  const NormReport bb = min_tensor_norm(QuadraticForm(b, b), params);
  HaagerupReport h;
  h.lhs = ab.value;
  h.norm_aa = aa.value;
  h.norm_bb = bb.value;
  h.slack = std::sqrt(aa.value) * std::sqrt(bb.value) - ab.value;
  h.converged = ab.converged && aa.converged && bb.converged;
  return h;
}

// ---------------------------------------------------------------------------
// PSD trace form: ‖Σ uᵢ⊗ūᵢ‖ = sup tr(Σ uᵢ t uᵢ* s) over PSD t, s of unit HS norm
// ---------------------------------------------------------------------------

/// Positive part of the Hermitian part of x, renormalized in HS norm.
/// Returns false when the positive part vanishes.
inline bool psd_normalized_part(const ComplexMatrix& x, ComplexMatrix& out) {
  const ComplexMatrix h = 0.5 * (x + x.adjoint());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(h);
  Eigen::VectorXd lambda = es.eigenvalues().cwiseMax(0.0);
  const double norm = lambda.norm();
  if (!(norm > 0.0)) return false;
  out = es.eigenvectors() * (lambda / norm).cast<Complex>().asDiagonal() *
        es.eigenvectors().adjoint();
  return true;
}

struct PsdAscentParams {
  int max_rounds = 500;
  double rel_tol = 1e-10;
  int random_starts = 2;   // in addition to t = I/√N
  std::uint64_t seed = 0;
};

struct PsdAscentReport {
  double value = 0.0;
  bool converged = false;
  bool restricted = false;   // ascent ran on the diagonal t = s
  int rounds = 0;            // summed over starts
  ComplexMatrix t;
  ComplexMatrix s;
};

/// Alternating ascent on tr(Σ uᵢ t uᵢ* s). Every iterate value is a lower
/// bound for the norm. For adjoint-closed families the ascent is restricted
/// to t = s.
inline PsdAscentReport psd_sup_form(const UnitaryFamily& u, const PsdAscentParams& params = {}) {
  const QuadraticForm form = QuadraticForm::diagonal(u);
  const Index dim = u.dim();
  const bool restricted = u.closed_under_adjoints();
  Engine rng = make_stream(params.seed, 0);

  auto trace_form = [&](const ComplexMatrix& t, const ComplexMatrix& s) {
    return hs_inner(form.apply(t), s).real();
  };

  PsdAscentReport best;
  best.value = -1.0;
  best.restricted = restricted;
  best.converged = true;

  auto ascend = [&](ComplexMatrix t) {
    ComplexMatrix s = t;
    double value = trace_form(t, s);
    ComplexMatrix best_t = t, best_s = s;
    double best_value = value;
    bool converged = false;
    int round = 0;
    while (round < params.max_rounds) {
      ++round;
      ComplexMatrix next;
      if (restricted) {
        if (!psd_normalized_part(form.apply(t), next)) next = random_psd_unit(dim, rng);
        t = next;
        s = t;
      } else {
        if (!psd_normalized_part(form.apply(t), next)) next = random_psd_unit(dim, rng);
        s = next;
        if (!psd_normalized_part(form.adjoint_apply(s), next)) next = random_psd_unit(dim, rng);
        t = next;
      }
      const double v = trace_form(t, s);
      const bool small = std::abs(v - value) <= params.rel_tol * std::max(1.0, std::abs(v));
      value = v;
      if (v > best_value) {
        best_value = v;
        best_t = t;
        best_s = s;
      }
      if (small) {
        converged = true;
        break;
      }
    }
    best.rounds += round;
    best.converged = best.converged && converged;
    if (best_value > best.value) {
      best.value = best_value;
      best.t = std::move(best_t);
      best.s = std::move(best_s);
    }
  };

  ascend(identity_matrix(dim) / std::sqrt(static_cast<double>(dim)));
  for (int k = 0; k < params.random_starts; ++k) ascend(random_psd_unit(dim, rng));
  return best;
}

// ---------------------------------------------------------------------------
// Moment inequality ⟨(T*T)^m t, t⟩ ≥ #(formally cancelling index tuples)
// ---------------------------------------------------------------------------

struct SzarekReport {
  double lhs = 0.0;   // ⟨(T*T)^m t, t⟩
  BigInt count = 0;   // count_identity_patterns(n, m)
};

inline bool is_psd_unit(const ComplexMatrix& t, double tol = 1e-9) {
  if (t.rows() != t.cols()) return false;
  if ((t - t.adjoint()).norm() > tol * std::max(1.0, t.norm())) return false;
  if (std::abs(t.norm() - 1.0) > tol) return false;
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(0.5 * (t + t.adjoint()), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff() >= -tol;
}

inline SzarekReport szarek_moment(const UnitaryFamily& u, const HSMatrix& t, std::size_t m) {
  if (m < 1) throw std::invalid_argument("szarek_moment: m must be ≥ 1");
  if (t.rows() != u.dim() || t.cols() != u.dim())
    throw std::invalid_argument("szarek_moment: t has the wrong shape");
  if (!is_psd_unit(t.mat())) throw std::invalid_argument("szarek_moment: t must be PSD with ‖t‖₂ = 1");
  const QuadraticForm form = QuadraticForm::diagonal(u);
  ComplexMatrix x = t.mat();
  for (std::size_t k = 0; k < m; ++k) x = form.adjoint_apply(form.apply(x));
  SzarekReport r;
  r.lhs = hs_inner(x, t.mat()).real();
  r.count = count_identity_patterns(u.size(), m);
  return r;
}

}  // namespace qform
