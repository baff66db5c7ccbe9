#include "phigamma/linalg.hpp"

#include <algorithm>
#include <stdexcept>

namespace phigamma {

ResidueMatrix::ResidueMatrix(std::int64_t p, int e, int rows, int cols)
    : p_(p), e_(e), rows_(rows), cols_(cols),
      m_(pow_u64(static_cast<std::uint64_t>(p), static_cast<unsigned>(e))),
      a_(static_cast<size_t>(rows) * cols, 0) {}

void ResidueMatrix::set(int i, int j, std::int64_t value) {
  std::int64_t r = value % static_cast<std::int64_t>(m_);
  if (r < 0) r += static_cast<std::int64_t>(m_);
  at(i, j) = static_cast<std::uint64_t>(r);
}

ResidueMatrix ResidueMatrix::identity(std::int64_t p, int e, int n) {
  ResidueMatrix id(p, e, n, n);
  for (int i = 0; i < n; ++i) id.at(i, i) = 1;
  return id;
}

ResidueMatrix ResidueMatrix::multiply(const ResidueMatrix& rhs) const {
  if (cols_ != rhs.rows_) throw std::invalid_argument("ResidueMatrix::multiply: shape mismatch");
  ResidueMatrix out(p_, e_, rows_, rhs.cols_);
  for (int i = 0; i < rows_; ++i)
    for (int k = 0; k < cols_; ++k) {
      std::uint64_t aik = at(i, k);
      if (aik == 0) continue;
      for (int j = 0; j < rhs.cols_; ++j) {
        out.at(i, j) = (out.at(i, j) + mulmod_u64(aik, rhs.at(k, j), m_)) % m_;
      }
    }
  return out;
}

std::vector<std::uint64_t> ResidueMatrix::apply(const std::vector<std::uint64_t>& x) const {
  if (static_cast<int>(x.size()) != cols_)
    throw std::invalid_argument("ResidueMatrix::apply: size mismatch");
  std::vector<std::uint64_t> y(static_cast<size_t>(rows_), 0);
  for (int i = 0; i < rows_; ++i) {
    std::uint64_t acc = 0;
    for (int j = 0; j < cols_; ++j)
      if (at(i, j) && x[j]) acc = (acc + mulmod_u64(at(i, j), x[j], m_)) % m_;
    y[i] = acc;
  }
  return y;
}

namespace {

int val_of(std::uint64_t x, std::int64_t p, int e) {
  if (x == 0) return e;
  int v = 0;
  while (x % static_cast<std::uint64_t>(p) == 0) {
    x /= static_cast<std::uint64_t>(p);
    ++v;
  }
  return v;
}

}  // namespace

SmithDecomposition smith_normal_form(ResidueMatrix a) {
  const std::int64_t p = a.prime();
  const int e = a.exponent();
  const std::uint64_t m = a.modulus();
  const int rows = a.rows(), cols = a.cols();
  ResidueMatrix u = ResidueMatrix::identity(p, e, rows);
  ResidueMatrix v = ResidueMatrix::identity(p, e, cols);
  std::vector<int> divs;

  int k = 0;
  const int kmax = std::min(rows, cols);
  while (k < kmax) {
    // locate entry of minimal valuation in the trailing block
    int bi = -1, bj = -1, bv = e;
    for (int i = k; i < rows; ++i)
      for (int j = k; j < cols; ++j) {
        int w = val_of(a.at(i, j), p, e);
        if (w < bv) {
          bv = w;
          bi = i;
          bj = j;
          if (bv == 0) goto found;
        }
      }
  found:
    if (bi < 0) break;  // trailing block vanishes mod p^e
    // move pivot to (k, k)
    if (bi != k)
      for (int j = 0; j < cols; ++j) {
        std::swap(a.at(k, j), a.at(bi, j));
      }
    if (bi != k)
      for (int j = 0; j < rows; ++j) std::swap(u.at(k, j), u.at(bi, j));
    if (bj != k)
      for (int i = 0; i < rows; ++i) std::swap(a.at(i, k), a.at(i, bj));
    if (bj != k)
      for (int i = 0; i < cols; ++i) std::swap(v.at(i, k), v.at(i, bj));

    // normalize pivot to p^bv
    std::uint64_t piv = a.at(k, k);
    std::uint64_t unit = piv / pow_u64(static_cast<std::uint64_t>(p), static_cast<unsigned>(bv));
    std::uint64_t uinv = invmod_pp(unit, p, e);
    for (int j = 0; j < cols; ++j) a.at(k, j) = mulmod_u64(a.at(k, j), uinv, m);
    for (int j = 0; j < rows; ++j) u.at(k, j) = mulmod_u64(u.at(k, j), uinv, m);

    std::uint64_t pk = pow_u64(static_cast<std::uint64_t>(p), static_cast<unsigned>(bv));
    // clear column k
    for (int i = k + 1; i < rows; ++i) {
      std::uint64_t x = a.at(i, k);
      if (x == 0) continue;
      std::uint64_t q = x / pk;  // exact: val(x) >= bv by pivot minimality
      for (int j = 0; j < cols; ++j) {
        std::uint64_t t = mulmod_u64(q, a.at(k, j), m);
        a.at(i, j) = (a.at(i, j) + m - t) % m;
      }
      for (int j = 0; j < rows; ++j) {
        std::uint64_t t = mulmod_u64(q, u.at(k, j), m);
        u.at(i, j) = (u.at(i, j) + m - t) % m;
      }
    }
    // clear row k
    for (int j = k + 1; j < cols; ++j) {
      std::uint64_t x = a.at(k, j);
      if (x == 0) continue;
      std::uint64_t q = x / pk;
      for (int i = 0; i < rows; ++i) {
        std::uint64_t t = mulmod_u64(q, a.at(i, k), m);
        a.at(i, j) = (a.at(i, j) + m - t) % m;
      }
      for (int i = 0; i < cols; ++i) {
        std::uint64_t t = mulmod_u64(q, v.at(i, k), m);
        v.at(i, j) = (v.at(i, j) + m - t) % m;
      }
    }
    divs.push_back(bv);
    ++k;
  }
  while (static_cast<int>(divs.size()) < kmax) divs.push_back(e);
  return SmithDecomposition{std::move(divs), std::move(u), std::move(v)};
}

int rank_at_threshold(const SmithDecomposition& s, int threshold) {
  int r = 0;
  for (int d : s.divisor_vals)
    if (d < threshold) ++r;
  return r;
}

std::vector<std::vector<std::uint64_t>> kernel_basis_at(const ResidueMatrix& a,
                                                        const SmithDecomposition& s,
                                                        int threshold) {
  std::vector<std::vector<std::uint64_t>> basis;
  const int cols = a.cols();
  const int kmax = static_cast<int>(s.divisor_vals.size());
  for (int k = 0; k < cols; ++k) {
    bool in_kernel = k >= kmax || s.divisor_vals[k] >= threshold;
    if (!in_kernel) continue;
    std::vector<std::uint64_t> col(static_cast<size_t>(cols));
    for (int i = 0; i < cols; ++i) col[i] = s.right.at(i, k);
    basis.push_back(std::move(col));
  }
  return basis;
}

std::optional<std::vector<PadicNumber>> solve_padic(std::vector<std::vector<PadicNumber>> a,
                                                    std::vector<PadicNumber> b) {
  const int rows = static_cast<int>(a.size());
  const int cols = rows ? static_cast<int>(a[0].size()) : 0;
  std::vector<int> pivot_col;
  int r = 0;
  for (int c = 0; c < cols && r < rows; ++c) {
    int best = -1;
    std::int64_t bestv = kValInf;
    for (int i = r; i < rows; ++i) {
      if (a[i][c].is_zero_ish()) continue;
      if (a[i][c].valuation() < bestv) {
        bestv = a[i][c].valuation();
        best = i;
      }
    }
    if (best < 0) continue;
    std::swap(a[r], a[best]);
    std::swap(b[r], b[best]);
    PadicNumber inv = a[r][c].inv();
    for (int j = c; j < cols; ++j) a[r][j] = mul(a[r][j], inv);
    b[r] = mul(b[r], inv);
    for (int i = 0; i < rows; ++i) {
      if (i == r || a[i][c].is_zero_ish()) continue;
      PadicNumber f = a[i][c];
      for (int j = c; j < cols; ++j) a[i][j] = sub(a[i][j], mul(f, a[r][j]));
      b[i] = sub(b[i], mul(f, b[r]));
    }
    pivot_col.push_back(c);
    ++r;
  }
  for (int i = r; i < rows; ++i)
    if (!b[i].is_zero_ish()) return std::nullopt;
  std::vector<PadicNumber> x(static_cast<size_t>(cols));
  for (int i = 0; i < r; ++i) x[static_cast<size_t>(pivot_col[static_cast<size_t>(i)])] = b[i];
  return x;
}

std::optional<std::vector<std::uint64_t>> solve_linear(const ResidueMatrix& a,
                                                       const SmithDecomposition& s,
                                                       const std::vector<std::uint64_t>& b,
                                                       int threshold) {
  const std::int64_t p = a.prime();
  const int e = a.exponent();
  const std::uint64_t m = a.modulus();
  std::vector<std::uint64_t> c = s.left.apply(b);
  std::vector<std::uint64_t> y(static_cast<size_t>(a.cols()), 0);
  const int kmax = static_cast<int>(s.divisor_vals.size());
  for (int i = 0; i < a.rows(); ++i) {
    int dv = i < kmax ? s.divisor_vals[i] : e;
    if (dv >= threshold) {
      // treated as a zero row; the target must also vanish at precision
      if (val_of(c[i], p, e) < threshold) return std::nullopt;
      continue;
    }
    if (val_of(c[i], p, e) < dv) return std::nullopt;  // not divisible
    std::uint64_t q = c[i] / pow_u64(static_cast<std::uint64_t>(p), static_cast<unsigned>(dv));
    y[i] = q;
  }
  return s.right.apply(y);
}

}  // namespace phigamma
