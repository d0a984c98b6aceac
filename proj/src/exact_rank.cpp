// exact_rank.cpp
#include "rrdlab/exact_rank.hpp"

#include <algorithm>
#include <stdexcept>

#include "rrdlab/sampler.hpp"

namespace rrdlab {

// largest 20 primes below 2^31
const uint32_t kRankPrimes[20] = {
    2147483647u, 2147483629u, 2147483587u, 2147483579u, 2147483563u,
    2147483549u, 2147483543u, 2147483497u, 2147483489u, 2147483477u,
    2147483423u, 2147483399u, 2147483353u, 2147483323u, 2147483269u,
    2147483249u, 2147483237u, 2147483179u, 2147483171u, 2147483137u};

namespace {

uint64_t powmod(uint64_t b, uint64_t e, uint64_t p) {
  uint64_t r = 1;
  b %= p;
  while (e) {
    if (e & 1) r = r * b % p;
    b = b * b % p;
    e >>= 1;
  }
  return r;
}

}  // namespace

int rank_mod_p(const IntMat& a, uint32_t p) {
  int rows = (int)a.size();
  int cols = rows ? (int)a[0].size() : 0;
  std::vector<uint64_t> w((size_t)rows * cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) {
      long long v = (long long)a[i][j] % (long long)p;
      if (v < 0) v += p;
      w[(size_t)i * cols + j] = (uint64_t)v;
    }
  int r = 0;
  for (int col = 0; col < cols && r < rows; ++col) {
    int pr = -1;
    for (int i = r; i < rows; ++i)
      if (w[(size_t)i * cols + col]) {
        pr = i;
        break;
      }
    if (pr < 0) continue;
    if (pr != r)
      for (int j = col; j < cols; ++j)
        std::swap(w[(size_t)pr * cols + j], w[(size_t)r * cols + j]);
    uint64_t inv = powmod(w[(size_t)r * cols + col], p - 2, p);
    for (int i = r + 1; i < rows; ++i) {
      uint64_t f = w[(size_t)i * cols + col] * inv % p;
      if (!f) continue;
      uint64_t fc = p - f;  // row_i += fc * row_r
      for (int j = col; j < cols; ++j) {
        uint64_t* wi = &w[(size_t)i * cols + j];
        *wi = (*wi + fc * w[(size_t)r * cols + j]) % p;
      }
    }
    ++r;
  }
  return r;
}

RankResult corank_exact(const IntMat& a) {
  int rows = (int)a.size();
  int cols = rows ? (int)a[0].size() : 0;
  std::vector<std::vector<mpz_class>> w(rows, std::vector<mpz_class>(cols));
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) w[i][j] = a[i][j];
  // one-step fraction-free elimination: each update divides exactly by the
  // previous pivot, keeping entries as minors of the original matrix
  mpz_class prev = 1;
  std::vector<int> pivot_col;
  int r = 0;
  for (int col = 0; col < cols && r < rows; ++col) {
    int pr = -1;
    for (int i = r; i < rows; ++i)
      if (w[i][col] != 0) {
        pr = i;
        break;
      }
    if (pr < 0) continue;
    if (pr != r) std::swap(w[pr], w[r]);
    for (int i = r + 1; i < rows; ++i) {
      for (int j = col + 1; j < cols; ++j) {
        mpz_class t = w[i][j] * w[r][col] - w[i][col] * w[r][j];
        mpz_class q, rem;
        mpz_tdiv_qr(q.get_mpz_t(), rem.get_mpz_t(), t.get_mpz_t(), prev.get_mpz_t());
        if (rem != 0) throw std::logic_error("fraction-free division not exact");
        w[i][j] = q;
      }
      w[i][col] = 0;
    }
    prev = w[r][col];
    pivot_col.push_back(col);
    ++r;
  }
  RankResult res;
  res.rank = r;
  res.corank = cols - r;
  res.method = "fraction_free";
  // rational kernel: one vector per free column, pivots solved bottom-up
  std::vector<bool> is_pivot(cols, false);
  for (int c : pivot_col) is_pivot[c] = true;
  for (int f = 0; f < cols; ++f) {
    if (is_pivot[f]) continue;
    std::vector<mpq_class> v(cols, 0);
    v[f] = 1;
    for (int i = r - 1; i >= 0; --i) {
      int pc = pivot_col[i];
      mpq_class s = 0;
      for (int j = pc + 1; j < cols; ++j)
        if (v[j] != 0) s += mpq_class(w[i][j]) * v[j];
      v[pc] = -s / mpq_class(w[i][pc]);
    }
    // scale so the first nonzero coordinate is 1
    for (int j = 0; j < cols; ++j)
      if (v[j] != 0) {
        mpq_class lead = v[j];
        for (int t = j; t < cols; ++t) v[t] /= lead;
        break;
      }
    // verify by multiplying back
    for (int i = 0; i < rows; ++i) {
      mpq_class s = 0;
      for (int j = 0; j < cols; ++j)
        if (v[j] != 0) s += mpq_class(a[i][j]) * v[j];
      if (s != 0) throw std::logic_error("kernel verification failed");
    }
    res.kernel.push_back(std::move(v));
  }
  return res;
}

bool is_singular(const IntMat& a, SplitMix64& rng) {
  int n = (int)a.size();
  if (n == 0 || (int)a[0].size() != n)
    throw std::invalid_argument("is_singular: square matrix required");
  int i1 = (int)rng.below(20);
  int i2 = (int)((i1 + 1 + rng.below(19)) % 20);
  // full rank modulo any prime certifies nonsingularity over Q
  if (rank_mod_p(a, kRankPrimes[i1]) == n) return false;
  if (rank_mod_p(a, kRankPrimes[i2]) == n) return false;
  return corank_exact(a).corank > 0;
}

LevelSetProfile level_profile(const std::vector<mpq_class>& x) {
  LevelSetProfile p;
  int n = (int)x.size();
  if (n == 0) throw std::invalid_argument("level_profile: empty vector");
  for (const auto& v : x) ++p.levels[v];
  int best = 0;
  int nonzero = 0;
  for (const auto& [v, c] : p.levels) {
    if (c > best) {
      best = c;
      p.top_value = v;
    }
    if (v != 0) nonzero += c;
  }
  p.top_fraction = mpq_class(best, n);
  p.top_fraction.canonicalize();
  p.support_fraction = mpq_class(nonzero, n);
  p.support_fraction.canonicalize();
  return p;
}

namespace {

std::vector<mpq_class> mat_vec(const Matrix01& m, const std::vector<mpq_class>& x) {
  int n = m.n();
  if ((int)x.size() != n) throw std::invalid_argument("dimension mismatch");
  std::vector<mpq_class> y(n, 0);
  for (int i = 0; i < n; ++i)
    for (int j : m.neighborhood(i)) y[i] += x[j];
  return y;
}

int regular_degree(const Matrix01& m, const char* who) {
  RegularityWitness w = m.regularity();
  if (!w.regular) throw std::invalid_argument(std::string(who) + ": matrix not regular");
  return w.d;
}

}  // namespace

std::vector<mpq_class> kernel_witness_to_sparse(const Matrix01& m,
                                                const std::vector<mpq_class>& x,
                                                const mpq_class& lam) {
  int n = m.n();
  for (const auto& yi : mat_vec(m, x))
    if (yi != 0) throw std::invalid_argument("witness is not a kernel vector");
  if (lam == 0) {
    std::vector<mpq_class> y(n);
    for (int i = 0; i < n; ++i) y[i] = -x[i];
    return y;
  }
  int d = regular_degree(m, "kernel_witness_to_sparse");
  if (d == 0) throw std::invalid_argument("zero degree has no unit image");
  std::vector<mpq_class> y(n);
  mpq_class den = lam * d;
  for (int i = 0; i < n; ++i) y[i] = (lam - x[i]) / den;
  return y;
}

std::pair<std::vector<mpq_class>, mpq_class> sparse_to_kernel_witness(
    const std::vector<mpq_class>& y, const Matrix01& m) {
  std::vector<mpq_class> img = mat_vec(m, y);
  bool all0 = true, all1 = true;
  for (const auto& v : img) {
    if (v != 0) all0 = false;
    if (v != 1) all1 = false;
  }
  if (all0) return {y, mpq_class(0)};
  if (!all1) throw std::invalid_argument("image is neither 0 nor 1");
  int d = regular_degree(m, "sparse_to_kernel_witness");
  std::vector<mpq_class> x(y.size());
  mpq_class shift(1, d);
  for (size_t i = 0; i < y.size(); ++i) x[i] = y[i] - shift;
  mpq_class lam(-1, d);
  lam.canonicalize();
  return {x, lam};
}

bool structured_set_membership(const std::vector<mpq_class>& x, const Matrix01& m,
                               int i1, int i2, const mpq_class& eps1) {
  int d = regular_degree(m, "structured_set_membership");
  std::vector<int> n1 = m.neighborhood(i1), n2 = m.neighborhood(i2);
  std::map<mpq_class, std::vector<int>> levels;
  for (int j = 0; j < (int)x.size(); ++j) levels[x[j]].push_back(j);
  mpq_class thresh = eps1 * d;
  for (const auto& [lam, cols] : levels) {
    int c1 = 0, c2 = 0;
    for (int j : cols) {
      if (std::binary_search(n1.begin(), n1.end(), j)) ++c1;
      if (std::binary_search(n2.begin(), n2.end(), j)) ++c2;
    }
    if (mpq_class(std::min(c1, c2)) > thresh) return true;
  }
  return false;
}

bool h2_membership(const std::vector<mpq_class>& x, const Matrix01& m, int i1,
                   int i2, const mpq_class& eps2) {
  int n = m.n();
  int d = regular_degree(m, "h2_membership");
  CoExSets ce = m.co_ex_sets(i1, i2);
  std::vector<bool> in_ex(n, false);
  for (int j : ce.ex12) in_ex[j] = true;
  for (int j : ce.ex21) in_ex[j] = true;
  mpq_class thresh = eps2 * mpq_class((long)d * (n - d), n);
  thresh.canonicalize();
  std::map<mpq_class, int> count;
  for (int j = 0; j < n; ++j)
    if (in_ex[j]) ++count[x[j]];
  for (const auto& [lam, c] : count)
    if (mpq_class(c) > thresh) return true;
  return false;
}

CenteredSpectrum centered_kernel_check(const Matrix01& m) {
  int n = m.n();
  CenteredSpectrum out;
  IntMat xi0(n, std::vector<long>(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) xi0[i][j] = m.get(i, j) ? 1 : -1;
  out.ones_in_kernel = true;
  for (int i = 0; i < n; ++i) {
    long long s = 0;
    for (int j = 0; j < n; ++j) s += xi0[i][j];
    if (s != 0) out.ones_in_kernel = false;
  }
  out.corank = corank_exact(xi0).corank;
  out.matrix_corank = corank_exact(to_intmat(m)).corank;
  return out;
}

CenteredSpectrum centered_kernel_check(int n, SplitMix64& rng) {
  if (n % 2 != 0 || n < 2)
    throw std::invalid_argument("centered kernel check needs even n");
  return centered_kernel_check(sample_auto(n, n / 2, rng));
}

bool rows_in_span_of_rest(const Matrix01& m, const std::vector<int>& rows) {
  int n = m.n();
  std::vector<bool> listed(n, false);
  for (int i : rows) {
    if (i < 0 || i >= n) throw std::out_of_range("row index");
    listed[i] = true;
  }
  IntMat rest;
  for (int i = 0; i < n; ++i)
    if (!listed[i]) {
      std::vector<long> r(n);
      for (int j = 0; j < n; ++j) r[j] = m.get(i, j);
      rest.push_back(std::move(r));
    }
  if (rest.empty()) {  // span of nothing is {0}
    for (int i = 0; i < n; ++i)
      if (m.row_sum(i) != 0) return false;
    return true;
  }
  int rank_rest = corank_exact(rest).rank;
  int rank_full = corank_exact(to_intmat(m)).rank;
  return rank_rest == rank_full;
}

std::string rat_str(const mpq_class& q) { return q.get_str(); }

mpq_class parse_rat(const std::string& s) {
  mpq_class q;
  if (q.set_str(s, 10) != 0 || q.get_den() == 0)
    throw std::invalid_argument("bad rational: " + s);
  q.canonicalize();
  return q;
}

}  // namespace rrdlab
