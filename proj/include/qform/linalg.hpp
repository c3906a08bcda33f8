#pragma once

// Dense complex linear algebra substrate: Hilbert-Schmidt vectors, Haar
// unitaries, and a matrix-free top singular value solver.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qform/rng.hpp"

namespace qform {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using Index = Eigen::Index;

/// Raised when a caller-supplied object breaks a documented contract
/// (e.g. an "adjoint" map that is not the adjoint).
struct contract_violation : std::logic_error {
  using std::logic_error::logic_error;
};

inline bool all_finite(const ComplexMatrix& m) {
  return m.real().allFinite() && m.imag().allFinite();
}

inline ComplexMatrix identity_matrix(Index n) { return ComplexMatrix::Identity(n, n); }

/// ‖U U† − I‖_HS.
inline double unitarity_defect(const ComplexMatrix& u) {
  if (u.rows() != u.cols()) return std::numeric_limits<double>::infinity();
  return (u * u.adjoint() - identity_matrix(u.rows())).norm();
}

/// A matrix regarded as a vector of the Hilbert-Schmidt space S₂(K, H).
/// Rectangular shapes are allowed; the norm is cached at construction.
class HSMatrix {
 public:
  HSMatrix() = default;

  explicit HSMatrix(ComplexMatrix m) : mat_(std::move(m)) {
    if (mat_.size() == 0) throw std::invalid_argument("HSMatrix: empty matrix");
    if (!all_finite(mat_)) throw std::invalid_argument("HSMatrix: non-finite entry");
    hs_norm_ = mat_.norm();
  }

  const ComplexMatrix& mat() const noexcept { return mat_; }
  double hs_norm() const noexcept { return hs_norm_; }
  Index rows() const noexcept { return mat_.rows(); }
  Index cols() const noexcept { return mat_.cols(); }

  HSMatrix normalized() const {
    if (hs_norm_ == 0.0) throw std::invalid_argument("HSMatrix: cannot normalize zero");
    return HSMatrix(mat_ / hs_norm_);
  }

 private:
  ComplexMatrix mat_;
  double hs_norm_ = 0.0;
};

/// tr(b† a). Conjugate-linear in the second argument.
inline Complex hs_inner(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument("hs_inner: dimension mismatch");
  return (b.adjoint() * a).trace();
}

inline Complex hs_inner(const HSMatrix& a, const HSMatrix& b) {
  return hs_inner(a.mat(), b.mat());
}

/// Ordered n-tuple of N×N unitaries.
class UnitaryFamily {
 public:
  static constexpr double kDefaultTolerance = 1e-10;

  /// Rejects empty families, mixed dimensions, and members with
  /// ‖UU† − I‖_HS > tolerance·√N.
  explicit UnitaryFamily(std::vector<ComplexMatrix> members,
                         double tolerance = kDefaultTolerance)
      : members_(std::move(members)) {
    if (members_.empty()) throw std::invalid_argument("UnitaryFamily: empty family");
    dim_ = members_.front().rows();
    if (dim_ < 1) throw std::invalid_argument("UnitaryFamily: zero dimension");
    const double bound = tolerance * std::sqrt(static_cast<double>(dim_));
    for (std::size_t i = 0; i < members_.size(); ++i) {
      const auto& u = members_[i];
      if (u.rows() != dim_ || u.cols() != dim_)
        throw std::invalid_argument("UnitaryFamily: member " + std::to_string(i) +
                                    " has wrong shape");
      if (!all_finite(u) || !(unitarity_defect(u) <= bound))
        throw std::invalid_argument("UnitaryFamily: member " + std::to_string(i) +
                                    " is not unitary within tolerance");
    }
  }

  std::size_t size() const noexcept { return members_.size(); }
  Index dim() const noexcept { return dim_; }
  const std::vector<ComplexMatrix>& members() const noexcept { return members_; }
  const ComplexMatrix& operator[](std::size_t i) const { return members_[i]; }

  /// True when every member's adjoint also appears in the family.
  bool closed_under_adjoints(double tolerance = 1e-10) const {
    return std::all_of(members_.begin(), members_.end(), [&](const ComplexMatrix& u) {
      const ComplexMatrix ua = u.adjoint();
      return std::any_of(members_.begin(), members_.end(), [&](const ComplexMatrix& v) {
        return (v - ua).norm() <= tolerance * std::sqrt(static_cast<double>(dim_));
      });
    });
  }

 private:
  std::vector<ComplexMatrix> members_;
  Index dim_ = 0;
};

inline ComplexMatrix ginibre(Index rows, Index cols, Engine& rng) {
  ComplexMatrix g(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) g(i, j) = complex_normal(rng);
  return g;
}

/// Haar-distributed unitary: Ginibre → QR → rescale Q's columns by the
/// phases of diag(R), which removes the bias of the plain QR factor.
inline ComplexMatrix haar_unitary(Index dim, Engine& rng) {
  if (dim < 1) throw std::invalid_argument("haar_unitary: dim must be positive");
  const ComplexMatrix z = ginibre(dim, dim, rng);
  Eigen::HouseholderQR<ComplexMatrix> qr(z);
  ComplexMatrix q = qr.householderQ();
  const ComplexMatrix& r = qr.matrixQR();
  for (Index j = 0; j < dim; ++j) {
    const Complex d = r(j, j);
    const double a = std::abs(d);
    q.col(j) *= (a > 0.0 ? d / a : Complex(1.0));
  }
  return q;
}

inline ComplexMatrix haar_unitary(Index dim, std::uint64_t seed) {
  if (dim < 1) throw std::invalid_argument("haar_unitary: dim must be positive");
  Engine rng = make_stream(seed, 0);
  return haar_unitary(dim, rng);
}

inline UnitaryFamily haar_family(std::size_t n, Index dim, Engine& rng) {
  std::vector<ComplexMatrix> members;
  members.reserve(n);
  for (std::size_t i = 0; i < n; ++i) members.push_back(haar_unitary(dim, rng));
  return UnitaryFamily(std::move(members));
}

/// Random PSD matrix with unit Hilbert-Schmidt norm.
inline ComplexMatrix random_psd_unit(Index dim, Engine& rng) {
  const ComplexMatrix g = ginibre(dim, dim, rng);
  ComplexMatrix p = g * g.adjoint();
  return p / p.norm();
}

// ---------------------------------------------------------------------------
// Matrix-free top singular value
// ---------------------------------------------------------------------------

struct SolverParams {
  double tol = 1e-9;             // on successive squared estimates, relative to max(1, value²)
  int max_iter = 5000;           // per start
  int restarts = 3;              // random starts in addition to the identity start
  std::uint64_t seed = 0;
  int adjoint_probes = 3;        // random (x, y) pairs for the adjointness check
  double adjoint_tol = 1e-8;
};

struct Shape {
  Index rows = 0;
  Index cols = 0;
};

/// One power-iteration run on adjoint∘apply from a given start.
struct PowerRun {
  double value = 0.0;              // √(Rayleigh quotient) of the final iterate
  ComplexMatrix vector;            // unit-norm final iterate
  bool converged = false;
  int iterations = 0;
  std::vector<double> rayleigh;    // ‖apply(x_k)‖² per iterate; nondecreasing
};

struct SingularEstimate {
  double value = 0.0;
  HSMatrix witness;
  bool converged = false;
  int iterations = 0;              // summed over all starts
};

/// Power iteration on the PSD map x ↦ adjoint(apply(x)). The returned value
/// is ‖apply(x)‖ for a unit x, so it never exceeds the operator norm.
template <class Apply, class Adjoint>
PowerRun power_iterate(Apply&& apply, Adjoint&& adjoint, ComplexMatrix start,
                       double tol, int max_iter) {
  PowerRun run;
  const double n0 = start.norm();
  if (!(n0 > 0.0)) throw std::invalid_argument("power_iterate: zero start");
  if (max_iter < 1) throw std::invalid_argument("power_iterate: max_iter must be positive");
  ComplexMatrix x = start / n0;
  double previous = -1.0;
  for (int k = 0; k < max_iter; ++k) {
    const ComplexMatrix y = apply(x);
    const double r = y.squaredNorm();
    run.rayleigh.push_back(r);
    run.iterations = k + 1;
    run.vector = x;
    if (previous >= 0.0 && std::abs(r - previous) < tol * std::max(1.0, r)) {
      run.converged = true;
      break;
    }
    previous = r;
    ComplexMatrix z = adjoint(y);
    const double nz = z.norm();
    if (nz == 0.0) {  // start lies in the kernel; nothing to improve
      run.converged = true;
      break;
    }
    x = z / nz;
  }
  run.value = std::sqrt(run.rayleigh.back());
  return run;
}

/// Checks |⟨apply(x), y⟩ − ⟨x, adjoint(y)⟩| ≤ tol·‖x‖‖y‖ on random probes.
template <class Apply, class Adjoint>
void check_adjoint_pair(Apply&& apply, Adjoint&& adjoint, Shape shape, int probes,
                        double tol, Engine& rng) {
  for (int k = 0; k < probes; ++k) {
    const ComplexMatrix x = ginibre(shape.rows, shape.cols, rng);
    const ComplexMatrix y = ginibre(shape.rows, shape.cols, rng);
    const Complex lhs = hs_inner(apply(x), y);
    const Complex rhs = hs_inner(x, adjoint(y));
    if (std::abs(lhs - rhs) > tol * x.norm() * y.norm())
      throw contract_violation("top_singular_value: maps are not mutually adjoint");
  }
}

/// Largest singular value of a linear map on S₂ given only its action and
/// the action of its adjoint. Starts: the (rectangular) identity, then
/// `restarts` Ginibre starts. Returns the best estimate; `converged` is
/// set only when every start converged.
template <class Apply, class Adjoint>
SingularEstimate top_singular_value(Apply&& apply, Adjoint&& adjoint, Shape shape,
                                    const SolverParams& params = {}) {
  if (shape.rows < 1 || shape.cols < 1)
    throw std::invalid_argument("top_singular_value: empty shape");
  Engine rng = make_stream(params.seed, 0);
  check_adjoint_pair(apply, adjoint, shape, params.adjoint_probes, params.adjoint_tol, rng);

  SingularEstimate best;
  best.value = -1.0;
  best.converged = true;
  auto consider = [&](ComplexMatrix start) {
    PowerRun run = power_iterate(apply, adjoint, std::move(start), params.tol, params.max_iter);
    best.iterations += run.iterations;
    best.converged = best.converged && run.converged;
    if (run.value > best.value) {
      best.value = run.value;
      best.witness = HSMatrix(std::move(run.vector));
    }
  };
  consider(ComplexMatrix::Identity(shape.rows, shape.cols));
  for (int r = 0; r < params.restarts; ++r) consider(ginibre(shape.rows, shape.cols, rng));
  return best;
}

}  // namespace qform
