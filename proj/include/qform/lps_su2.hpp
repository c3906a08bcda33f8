#pragma once

// LPS generator families from norm-p integer quaternions, SU(2) irreducible
// representations on homogeneous polynomials, and the block / cross-tensor
// norms built from them.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qform/linalg.hpp"
#include "qform/rng.hpp"
#include "qform/tensor_norms.hpp"

namespace qform {

struct unsupported_parameter : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// q = a + b i + c j + d k.
struct IntegerQuaternion {
  std::int64_t a = 0, b = 0, c = 0, d = 0;

  std::int64_t norm() const noexcept { return a * a + b * b + c * c + d * d; }
  IntegerQuaternion conj() const noexcept { return {a, -b, -c, -d}; }

  friend bool operator==(const IntegerQuaternion&, const IntegerQuaternion&) = default;
};

inline bool is_prime(std::int64_t p) {
  if (p < 2) return false;
  for (std::int64_t q = 2; q * q <= p; ++q)
    if (p % q == 0) return false;
  return true;
}

/// All a² + b² + c² + d² = p with a > 0 odd and b, c, d even, for prime
/// p ≡ 1 (mod 4). There are exactly p + 1; each is immediately followed by
/// its conjugate.
inline std::vector<IntegerQuaternion> lps_quaternions(std::int64_t p) {
  if (!is_prime(p)) throw unsupported_parameter("lps: p = " + std::to_string(p) + " is not prime");
  if (p % 4 != 1)
    throw unsupported_parameter("lps: p = " + std::to_string(p) +
                                " is unsupported; the construction requires p ≡ 1 (mod 4)");
  auto isqrt = [](std::int64_t x) {
    std::int64_t y = 0;
    while ((y + 1) * (y + 1) <= x) ++y;
    return y;
  };
  const std::int64_t r = isqrt(p);
  const std::int64_t e = r - r % 2;  // largest even value ≤ √p
  std::vector<IntegerQuaternion> out;
  for (std::int64_t a = 1; a <= r; a += 2)
    for (std::int64_t b = -e; b <= e; b += 2)
      for (std::int64_t c = -e; c <= e; c += 2) {
        const std::int64_t rest = p - a * a - b * b - c * c;
        if (rest < 0) continue;
        const std::int64_t root = isqrt(rest);
        if (root * root != rest || root % 2 != 0) continue;
        for (const std::int64_t d : {root, -root}) {
          const IntegerQuaternion q{a, b, c, d};
          // keep one of {q, conj q}: first nonzero imaginary part positive
          const std::int64_t lead = b != 0 ? b : (c != 0 ? c : d);
          if (lead > 0) {
            out.push_back(q);
            out.push_back(q.conj());
          }
          if (root == 0) break;
        }
      }
  if (out.size() != static_cast<std::size_t>(p + 1))
    throw std::logic_error("lps: expected p + 1 quaternions");
  return out;
}

/// 2×2 special unitary matrix.
class SU2Element {
 public:
  static constexpr double kTolerance = 1e-10;

  explicit SU2Element(ComplexMatrix g) : g_(std::move(g)) {
    if (g_.rows() != 2 || g_.cols() != 2) throw std::invalid_argument("SU2Element: must be 2×2");
    if (!(unitarity_defect(g_) <= kTolerance) || !(std::abs(g_.determinant() - 1.0) <= kTolerance))
      throw std::invalid_argument("SU2Element: not in SU(2)");
  }

  static SU2Element identity() { return SU2Element(identity_matrix(2)); }

  const ComplexMatrix& matrix() const noexcept { return g_; }
  SU2Element inverse() const { return SU2Element(g_.adjoint()); }

  friend SU2Element operator*(const SU2Element& x, const SU2Element& y) {
    return SU2Element(x.g_ * y.g_);
  }

 private:
  ComplexMatrix g_;
};

/// ((a+bi, c+di), (−c+di, a−bi)) / √p.
inline SU2Element quaternion_to_su2(const IntegerQuaternion& q, std::int64_t p) {
  if (p <= 0 || q.norm() != p)
    throw std::invalid_argument("quaternion_to_su2: norm(q) must equal p");
  const double s = 1.0 / std::sqrt(static_cast<double>(p));
  ComplexMatrix g(2, 2);
  g << Complex(q.a, q.b), Complex(q.c, q.d), Complex(-q.c, q.d), Complex(q.a, -q.b);
  return SU2Element(g * s);
}

/// Adjoint double cover SU(2) → SO(3): R_jk = ½ tr(σ_j g σ_k g†).
inline Eigen::Matrix3d su2_to_so3(const SU2Element& g) {
  using namespace std::complex_literals;
  std::array<Eigen::Matrix2cd, 3> sigma;
  sigma[0] << 0.0, 1.0, 1.0, 0.0;
  sigma[1] << 0.0, -1i, 1i, 0.0;
  sigma[2] << 1.0, 0.0, 0.0, -1.0;
  const Eigen::Matrix2cd m = g.matrix();
  Eigen::Matrix3d r;
  for (int j = 0; j < 3; ++j)
    for (int k = 0; k < 3; ++k)
      r(j, k) = 0.5 * (sigma[j] * m * sigma[k] * m.adjoint()).trace().real();
  return r;
}

/// Haar-random SU(2): uniform unit quaternion.
inline SU2Element haar_su2(Engine& rng) {
  std::array<double, 4> x{};
  double n2 = 0.0;
  do {
    for (auto& v : x) v = standard_normal(rng);
    n2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2] + x[3] * x[3];
  } while (n2 == 0.0);
  const double s = 1.0 / std::sqrt(n2);
  ComplexMatrix g(2, 2);
  g << Complex(x[0], x[1]), Complex(x[2], x[3]), Complex(-x[2], x[3]), Complex(x[0], -x[1]);
  return SU2Element(g * s);
}

struct IrrepMatrix {
  int degree = 0;
  ComplexMatrix matrix;  // (degree + 1) × (degree + 1)
};

namespace detail {

/// Pascal row m as doubles (exact for m ≤ 56).
inline std::vector<double> binomial_row(int m) {
  std::vector<double> row(static_cast<std::size_t>(m) + 1, 1.0);
  for (int k = 1; k < m; ++k)
    for (int j = k; j > 0; --j) row[j] += row[j - 1];
  return row;
}

}  // namespace detail

/// π_m(g) on degree-m homogeneous polynomials in (z, w), (π_m(g) f)(v) =
/// f(gᵀ v), in the orthonormal basis e_k = z^{m−k} w^k / √((m−k)! k!).
/// With this basis π_1(g) = g.
inline IrrepMatrix irrep_matrix(const SU2Element& element, int m) {
  if (m < 0) throw std::invalid_argument("irrep_matrix: degree must be ≥ 0");
  const ComplexMatrix& g = element.matrix();
  const Complex a = g(0, 0), b = g(0, 1), c = g(1, 0), d = g(1, 1);
  const std::size_t dim = static_cast<std::size_t>(m) + 1;
  const std::vector<double> binom_m = detail::binomial_row(m);

  // powers of each entry, 0..m
  auto powers = [m](Complex x) {
    std::vector<Complex> p(static_cast<std::size_t>(m) + 1, Complex(1.0));
    for (int k = 1; k <= m; ++k) p[k] = p[k - 1] * x;
    return p;
  };
  const auto pa = powers(a), pb = powers(b), pc = powers(c), pd = powers(d);

  IrrepMatrix out;
  out.degree = m;
  out.matrix = ComplexMatrix::Zero(static_cast<Index>(dim), static_cast<Index>(dim));
  std::vector<Complex> poly(dim);
  for (int j = 0; j <= m; ++j) {
    // e_j ↦ (a z + c w)^{m−j} (b z + d w)^j; coefficient of z^{m−i} w^i
    const std::vector<double> c1 = detail::binomial_row(m - j);
    const std::vector<double> c2 = detail::binomial_row(j);
    std::fill(poly.begin(), poly.end(), Complex(0.0));
    for (int s = 0; s <= m - j; ++s) {
      const Complex left = c1[s] * pa[m - j - s] * pc[s];
      for (int r = 0; r <= j; ++r) poly[s + r] += left * (c2[r] * pb[j - r] * pd[r]);
    }
    for (int i = 0; i <= m; ++i)
      out.matrix(i, j) = poly[i] * std::sqrt(binom_m[j] / binom_m[i]);
  }
  return out;
}

/// χ_m(g) = tr π_m(g).
inline Complex irrep_character(const SU2Element& g, int m) { return irrep_matrix(g, m).matrix.trace(); }

/// max over Haar samples of |χ_m χ̄_{m'} − Σ_{k=|m−m'|, step 2}^{m+m'} χ_k|.
inline double clebsch_gordan_check(int m, int m_prime, int sample_count, std::uint64_t seed) {
  if (m < 0 || m_prime < 0) throw std::invalid_argument("clebsch_gordan_check: degrees must be ≥ 0");
  Engine rng = make_stream(seed, 0);
  double worst = 0.0;
  for (int s = 0; s < sample_count; ++s) {
    const SU2Element g = haar_su2(rng);
    const Complex lhs = irrep_character(g, m) * std::conj(irrep_character(g, m_prime));
    Complex rhs = 0.0;
    for (int k = std::abs(m - m_prime); k <= m + m_prime; k += 2) rhs += irrep_character(g, k);
    worst = std::max(worst, std::abs(lhs - rhs));
  }
  return worst;
}

/// Generators together with their irreps π_m, m = 0..cutoff.
struct RepresentationTower {
  std::int64_t prime = 0;                      // 0 when not LPS-built
  std::vector<IntegerQuaternion> quaternions;  // empty when not LPS-built
  std::vector<SU2Element> generators;
  std::map<int, std::vector<IrrepMatrix>> blocks;

  int cutoff() const { return blocks.empty() ? -1 : blocks.rbegin()->first; }

  const std::vector<IrrepMatrix>& block(int m) const {
    const auto it = blocks.find(m);
    if (it == blocks.end()) throw std::out_of_range("RepresentationTower: degree beyond cutoff");
    return it->second;
  }

  std::vector<ComplexMatrix> block_matrices(int m) const {
    std::vector<ComplexMatrix> out;
    for (const auto& b : block(m)) out.push_back(b.matrix);
    return out;
  }
};

inline RepresentationTower make_tower(std::vector<SU2Element> generators, int cutoff) {
  if (generators.empty()) throw std::invalid_argument("make_tower: no generators");
  if (cutoff < 0) throw std::invalid_argument("make_tower: cutoff must be ≥ 0");
  RepresentationTower tower;
  tower.generators = std::move(generators);
  for (int m = 0; m <= cutoff; ++m) {
    auto& row = tower.blocks[m];
    for (const auto& g : tower.generators) row.push_back(irrep_matrix(g, m));
  }
  return tower;
}

/// Default degree cutoff for LPS towers.
inline constexpr int kDefaultCutoff = 40;

inline RepresentationTower lps_tower(std::int64_t p, int cutoff = kDefaultCutoff) {
  std::vector<IntegerQuaternion> qs = lps_quaternions(p);
  std::vector<SU2Element> gens;
  for (const auto& q : qs) gens.push_back(quaternion_to_su2(q, p));
  RepresentationTower tower = make_tower(std::move(gens), cutoff);
  tower.prime = p;
  tower.quaternions = std::move(qs);
  return tower;
}

/// ‖Σᵢ π_m(ωᵢ)‖. With `strict`, m = 0 (the constants) is refused.
inline double rho_block_norm(const RepresentationTower& tower, int m, bool strict = true) {
  if (m < 0) throw std::invalid_argument("rho_block_norm: degree must be ≥ 0");
  if (m == 0 && strict)
    throw std::invalid_argument("rho_block_norm: m = 0 is the constants block, excluded in strict mode");
  const auto& blk = tower.block(m);
  ComplexMatrix sum = ComplexMatrix::Zero(m + 1, m + 1);
  for (const auto& b : blk) sum += b.matrix;
  const double scale = std::max(1.0, sum.norm());
  if ((sum - sum.adjoint()).norm() <= 1e-9 * scale) {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(0.5 * (sum + sum.adjoint()), Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
  }
  Eigen::JacobiSVD<ComplexMatrix> svd(sum);
  return svd.singularValues()(0);
}

/// ‖Σᵢ π_m(ωᵢ) ⊗ conj(π_{m'}(ωᵢ))‖ via the matrix-free solver.
inline NormReport cross_tensor_norm(const RepresentationTower& tower, int m, int m_prime,
                                    const SolverParams& params = {}) {
  return min_tensor_norm(QuadraticForm(tower.block_matrices(m), tower.block_matrices(m_prime)), params);
}

namespace detail {

inline std::string real17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace detail

/// Tower as JSON: exact integer quaternions, reals at 17 significant digits.
/// Blocks are included up to `max_degree` (all when negative).
inline std::string tower_to_json(const RepresentationTower& tower, int max_degree = -1) {
  std::string out = "{\n";
  out += "  \"prime\": " + std::to_string(tower.prime) + ",\n";
  out += "  \"generator_count\": " + std::to_string(tower.generators.size()) + ",\n";
  out += "  \"cutoff\": " + std::to_string(tower.cutoff()) + ",\n";
  out += "  \"quaternions\": [";
  for (std::size_t i = 0; i < tower.quaternions.size(); ++i) {
    const auto& q = tower.quaternions[i];
    out += (i ? ", " : "") + std::string("[") + std::to_string(q.a) + ", " + std::to_string(q.b) +
           ", " + std::to_string(q.c) + ", " + std::to_string(q.d) + "]";
  }
  out += "],\n";
  auto matrix_json = [](const ComplexMatrix& m) {
    std::string s = "[";
    for (Index i = 0; i < m.rows(); ++i) {
      s += i ? ", [" : "[";
      for (Index j = 0; j < m.cols(); ++j) {
        s += j ? ", " : "";
        s += "[" + detail::real17(m(i, j).real()) + ", " + detail::real17(m(i, j).imag()) + "]";
      }
      s += "]";
    }
    return s + "]";
  };
  out += "  \"generators\": [";
  for (std::size_t i = 0; i < tower.generators.size(); ++i)
    out += (i ? ", " : "") + matrix_json(tower.generators[i].matrix());
  out += "],\n";
  out += "  \"blocks\": [";
  bool first = true;
  for (const auto& [m, blk] : tower.blocks) {
    if (max_degree >= 0 && m > max_degree) break;
    out += first ? "\n" : ",\n";
    first = false;
    out += "    {\"degree\": " + std::to_string(m) + ", \"matrices\": [";
    for (std::size_t i = 0; i < blk.size(); ++i) out += (i ? ", " : "") + matrix_json(blk[i].matrix);
    out += "]}";
  }
  out += first ? "]\n" : "\n  ]\n";
  out += "}\n";
  return out;
}

}  // namespace qform
