#ifndef PHIGAMMA_LINALG_HPP
#define PHIGAMMA_LINALG_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "phigamma/padic.hpp"

namespace phigamma {

// Dense matrix over Z/p^e.  Entries are canonical residues in [0, p^e).
class ResidueMatrix {
 public:
  ResidueMatrix(std::int64_t p, int e, int rows, int cols);

  std::int64_t prime() const { return p_; }
  int exponent() const { return e_; }
  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::uint64_t modulus() const { return m_; }

  std::uint64_t& at(int i, int j) { return a_[static_cast<size_t>(i) * cols_ + j]; }
  std::uint64_t at(int i, int j) const { return a_[static_cast<size_t>(i) * cols_ + j]; }
  void set(int i, int j, std::int64_t value);

  static ResidueMatrix identity(std::int64_t p, int e, int n);
  ResidueMatrix multiply(const ResidueMatrix& rhs) const;
  std::vector<std::uint64_t> apply(const std::vector<std::uint64_t>& x) const;

 private:
  std::int64_t p_;
  int e_;
  int rows_, cols_;
  std::uint64_t m_;
  std::vector<std::uint64_t> a_;
};

// Smith normal form U*A*V = D over the local ring Z/p^e, diag(D) = p^{d_i}*unit.
// divisor_vals is sorted ascending and padded with e for zero diagonal slots
// (a valuation of e means "zero mod p^e").
struct SmithDecomposition {
  std::vector<int> divisor_vals;  // length min(rows, cols)
  ResidueMatrix left;             // U, rows x rows
  ResidueMatrix right;            // V, cols x cols
};

SmithDecomposition smith_normal_form(ResidueMatrix a);

// Number of elementary divisors with valuation < threshold.
int rank_at_threshold(const SmithDecomposition& s, int threshold);

// Columns of V whose divisor valuation is >= threshold (or beyond the
// diagonal) span the kernel at that precision.
std::vector<std::vector<std::uint64_t>> kernel_basis_at(const ResidueMatrix& a,
                                                        const SmithDecomposition& s,
                                                        int threshold);

// Solve A x = b over Z/p^e through the Smith form.  Returns nullopt when the
// system is inconsistent at precision `threshold` (a pivot with valuation >=
// threshold would have to be divided, or a zero row meets a unit entry).
std::optional<std::vector<std::uint64_t>> solve_linear(const ResidueMatrix& a,
                                                       const SmithDecomposition& s,
                                                       const std::vector<std::uint64_t>& b,
                                                       int threshold);

// Dense Gaussian elimination over capped Q_p with valuation pivoting.  Free
// coordinates are set to zero; nullopt when some equation is certifiably
// violated.  Matrix is row-major, rows x cols.
std::optional<std::vector<PadicNumber>> solve_padic(
    std::vector<std::vector<PadicNumber>> a, std::vector<PadicNumber> b);

}  // namespace phigamma

#endif
