// sampler.cpp
#include "rrdlab/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <unordered_map>

namespace rrdlab {

namespace {

// DP state: rows left to fill and the column-deficit histogram c[j] =
// #columns still needing j more ones, j = 0..d. Filling one row moves k_j
// chosen columns from class j to class j-1, sum_j k_j = d.
struct DeficitDP {
  int n, d;
  std::unordered_map<std::string, mpz_class> memo;

  DeficitDP(int n_, int d_) : n(n_), d(d_) {}

  static std::string enc(int rows_left, const std::vector<int>& c) {
    std::string s;
    s.reserve(c.size() + 1);
    s.push_back((char)rows_left);
    for (int x : c) s.push_back((char)x);
    return s;
  }

  // number of ways to finish given the histogram; prunes states where some
  // column needs more ones than there are rows left
  const mpz_class& ways(int rows_left, std::vector<int>& c) {
    static const mpz_class kZero = 0, kOne = 1;
    for (int j = rows_left + 1; j <= d; ++j)
      if (c[j] > 0) return kZero;
    if (rows_left == 0) return kOne;
    std::string key = enc(rows_left, c);
    auto it = memo.find(key);
    if (it != memo.end()) return it->second;
    mpz_class total = 0;
    std::vector<int> k(d + 1, 0);
    descend(rows_left, c, k, d, d, total);
    return memo.emplace(std::move(key), std::move(total)).first->second;
  }

  // choose k[j] <= c[j] for j = hi..1 with sum = need
  void descend(int rows_left, std::vector<int>& c, std::vector<int>& k, int hi,
               int need, mpz_class& total) {
    if (hi == 0) {
      if (need != 0) return;
      std::vector<int> c2(d + 1, 0);
      c2[0] = c[0] + k[1];
      for (int j = 1; j <= d; ++j) c2[j] = c[j] - k[j] + (j + 1 <= d ? k[j + 1] : 0);
      mpz_class mult = 1;
      for (int j = 1; j <= d; ++j)
        if (k[j] > 0) {
          mpz_class b;
          mpz_bin_uiui(b.get_mpz_t(), c[j], k[j]);
          mult *= b;
        }
      total += mult * ways(rows_left - 1, c2);
      return;
    }
    int cap = std::min(c[hi], need);
    for (int t = 0; t <= cap; ++t) {
      k[hi] = t;
      descend(rows_left, c, k, hi - 1, need - t, total);
    }
    k[hi] = 0;
  }
};

void check_nd(int n, int d) {
  if (n < 0 || d < 0 || d > n) throw std::invalid_argument("degree out of range");
}

}  // namespace

mpz_class uniform_mpz_below(const mpz_class& n, SplitMix64& rng) {
  if (n <= 0) throw std::invalid_argument("uniform_mpz_below: empty range");
  size_t bits = mpz_sizeinbase(n.get_mpz_t(), 2);
  size_t word_cnt = (bits + 63) / 64;
  for (;;) {
    mpz_class r = 0;
    for (size_t w = 0; w < word_cnt; ++w) {
      r <<= 64;
      r += (unsigned long)rng.next();
    }
    r >>= (word_cnt * 64 - bits);
    if (r < n) return r;
  }
}

bool count_in_budget(int n, int d) {
  if (n < 0 || d < 0 || d > n) return false;
  if (d <= 4) return n <= 14;
  return n <= 10;
}

mpz_class count_regular(int n, int d) {
  check_nd(n, d);
  if (!count_in_budget(n, d))
    throw std::invalid_argument("count_regular: out of budget");
  DeficitDP dp(n, d);
  std::vector<int> c(d + 1, 0);
  c[d] = n;
  return dp.ways(n, c);
}

std::vector<Matrix01> enumerate_all(int n, int d) {
  check_nd(n, d);
  if (n > 6) {
    if (!count_in_budget(n, d) || count_regular(n, d) >= 10000000)
      throw std::invalid_argument("enumerate_all: out of budget");
  }
  std::vector<Matrix01> out;
  std::vector<int> deficit(n, d);
  Matrix01 work(n);
  // candidate rows for one level, as column index lists, ordered so that the
  // emitted matrices are sorted by their row strings
  std::vector<int> pick;
  auto row_string_less = [n](const std::vector<int>& a, const std::vector<int>& b) {
    // compare characteristic 0/1 strings of length n lexicographically
    size_t ia = 0, ib = 0;
    for (int j = 0; j < n; ++j) {
      bool x = ia < a.size() && a[ia] == j;
      bool y = ib < b.size() && b[ib] == j;
      if (x != y) return y;  // '0' < '1': the one with 0 here is smaller
      if (x) ++ia;
      if (y) ++ib;
    }
    return false;
  };
  auto gen_rows = [&](auto&& self, int start, int left,
                      std::vector<std::vector<int>>& acc) -> void {
    if (left == 0) {
      acc.push_back(pick);
      return;
    }
    for (int j = start; j <= n - left; ++j)
      if (deficit[j] > 0) {
        pick.push_back(j);
        self(self, j + 1, left - 1, acc);
        pick.pop_back();
      }
  };
  auto rec = [&](auto&& self, int row) -> void {
    if (row == n) {
      out.push_back(work);
      return;
    }
    // the candidate list is per level: the recursive call builds its own
    std::vector<std::vector<int>> cand;
    gen_rows(gen_rows, 0, d, cand);
    std::sort(cand.begin(), cand.end(), row_string_less);
    int rows_left = n - row - 1;
    for (const auto& cols : cand) {
      bool ok = true;
      for (int j : cols)
        if (deficit[j] == 0) ok = false;
      if (!ok) continue;
      for (int j : cols) {
        work.set_entry(row, j, true);
        --deficit[j];
      }
      // feasibility: no column may need more than the rows remaining
      for (int j = 0; j < n && ok; ++j)
        if (deficit[j] > rows_left) ok = false;
      if (ok) self(self, row + 1);
      for (int j : cols) {
        work.set_entry(row, j, false);
        ++deficit[j];
      }
    }
  };
  rec(rec, 0);
  return out;
}

Matrix01 sample_exact(int n, int d, SplitMix64& rng) {
  check_nd(n, d);
  if (!count_in_budget(n, d))
    throw std::invalid_argument("sample_exact: out of budget");
  DeficitDP dp(n, d);
  Matrix01 m(n);
  std::vector<int> deficit(n, d);
  for (int row = 0; row < n; ++row) {
    int rows_left = n - row;
    std::vector<int> c(d + 1, 0);
    for (int j = 0; j < n; ++j) ++c[deficit[j]];
    const mpz_class& total = dp.ways(rows_left, c);
    if (total == 0) throw std::logic_error("sample_exact: stuck state");
    mpz_class target = uniform_mpz_below(total, rng);
    // find the composition k whose weight interval contains target
    std::vector<int> kpick;
    mpz_class acc = 0;
    std::vector<int> k(d + 1, 0);
    auto walk = [&](auto&& self, int hi, int need) -> bool {
      if (hi == 0) {
        if (need != 0) return false;
        std::vector<int> c2(d + 1, 0);
        c2[0] = c[0] + k[1];
        for (int j = 1; j <= d; ++j) c2[j] = c[j] - k[j] + (j + 1 <= d ? k[j + 1] : 0);
        mpz_class mult = 1;
        for (int j = 1; j <= d; ++j)
          if (k[j] > 0) {
            mpz_class b;
            mpz_bin_uiui(b.get_mpz_t(), c[j], k[j]);
            mult *= b;
          }
        mpz_class w = mult * dp.ways(rows_left - 1, c2);
        if (acc + w > target) {
          kpick = k;
          return true;
        }
        acc += w;
        return false;
      }
      int cap = std::min(c[hi], need);
      for (int t = 0; t <= cap; ++t) {
        k[hi] = t;
        if (self(self, hi - 1, need - t)) return true;
      }
      k[hi] = 0;
      return false;
    };
    if (!walk(walk, d, d)) throw std::logic_error("sample_exact: weight walk failed");
    // uniform k[j]-subset of each deficit class
    for (int j = 1; j <= d; ++j) {
      if (kpick[j] == 0) continue;
      std::vector<int> cls;
      for (int col = 0; col < n; ++col)
        if (deficit[col] == j) cls.push_back(col);
      for (int col : rng.subset(cls, kpick[j])) {
        m.set_entry(row, col, true);
        --deficit[col];
      }
    }
  }
  return m;
}

long long default_mcmc_steps(int n, int d) {
  if (n < 2) return 0;
  return 4LL * n * d * (long long)std::ceil(std::log((double)n));
}

Matrix01 sample_mcmc(int n, int d, long long steps, SplitMix64& rng) {
  check_nd(n, d);
  Matrix01 m = Matrix01::circulant(n, d);
  if (n < 2 || d == 0 || d == n) return m;
  for (long long t = 0; t < steps; ++t) {
    int i1 = (int)rng.below(n);
    int i2 = (int)rng.below(n - 1);
    if (i2 >= i1) ++i2;
    int j1 = (int)rng.below(n);
    int j2 = (int)rng.below(n - 1);
    if (j2 >= j1) ++j2;
    bool a = m.get(i1, j1), b = m.get(i1, j2), c = m.get(i2, j1), e = m.get(i2, j2);
    if (a == e && b == c && a != b) m.flip4(i1, i2, j1, j2);
  }
  return m;
}

Matrix01 sample_auto(int n, int d, SplitMix64& rng) {
  if (count_in_budget(n, d)) return sample_exact(n, d, rng);
  return sample_mcmc(n, d, default_mcmc_steps(n, d), rng);
}

std::vector<int8_t> sample_signs(int n, SplitMix64& rng) {
  std::vector<int8_t> s((size_t)n * n);
  for (auto& x : s) x = rng.coin() ? 1 : -1;
  return s;
}

SignedMatrix sample_signed_regular(int n, int d, SplitMix64& rng) {
  Matrix01 m = sample_auto(n, d, rng);
  return hadamard(m, sample_signs(n, rng));
}

std::vector<int> sample_permutation(int n, SplitMix64& rng) {
  std::vector<int> p(n);
  for (int i = 0; i < n; ++i) p[i] = i;
  rng.shuffle(p);
  return p;
}

std::vector<int> sample_derangement(int n, SplitMix64& rng) {
  if (n == 1) throw std::invalid_argument("no derangement of one point");
  for (;;) {
    std::vector<int> p = sample_permutation(n, rng);
    bool ok = true;
    for (int i = 0; i < n; ++i)
      if (p[i] == i) {
        ok = false;
        break;
      }
    if (ok) return p;
  }
}

CountResult evaluate_asymptotic_count(int n, int d) {
  check_nd(n, d);
  if (d == 0 || d == n)
    throw std::invalid_argument("asymptotic count needs 0 < d < n");
  CountResult r;
  const long double kPi = 3.141592653589793238462643383279502884L;
  long double nn = n, dd = d;
  long double p = dd / nn;
  long double core = 2.0L * kPi * dd * (nn - dd);  // 2 pi d (n-d)
  r.log_asymptotic = 0.5L * std::log(core) - nn * std::log(core / nn) -
                     dd * nn * std::log(p) - (nn - dd) * nn * std::log(1.0L - p);
  if (count_in_budget(n, d)) {
    r.exact = count_regular(n, d);
    // log of the exact count via mantissa + exponent
    signed long exp2;
    double mant = mpz_get_d_2exp(&exp2, r.exact->get_mpz_t());
    long double log_exact = std::log((long double)mant) + (long double)exp2 * std::log(2.0L);
    r.ratio = (double)std::exp(log_exact - r.log_asymptotic);
  }
  return r;
}

}  // namespace rrdlab
