// discrepancy.cpp
#include "rrdlab/discrepancy.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "rrdlab/sampler.hpp"

namespace rrdlab {

namespace {

using ordered_json = nlohmann::ordered_json;

int regular_degree(const Matrix01& m, const char* who) {
  RegularityWitness w = m.regularity();
  if (!w.regular) throw std::invalid_argument(std::string(who) + ": matrix not regular");
  return w.d;
}

void require_proper(int n, int d, const char* who) {
  if (d <= 0 || d >= n)
    throw std::invalid_argument(std::string(who) + ": needs 0 < d < n");
}

mpz_class binom(int n, int k) {
  if (k < 0 || k > n) return 0;
  mpz_class b;
  mpz_bin_uiui(b.get_mpz_t(), n, k);
  return b;
}

// visit every size-s subset of [0, n) in lexicographic order
template <class F>
void for_each_subset(int n, int s, F&& f) {
  if (s > n) return;
  std::vector<int> idx(s);
  for (int i = 0; i < s; ++i) idx[i] = i;
  for (;;) {
    f(idx);
    int i = s - 1;
    while (i >= 0 && idx[i] == n - s + i) --i;
    if (i < 0) return;
    ++idx[i];
    for (int j = i + 1; j < s; ++j) idx[j] = idx[j - 1] + 1;
  }
}

std::vector<int> random_subset(int n, int s, SplitMix64& rng) {
  std::vector<int> pool(n);
  for (int i = 0; i < n; ++i) pool[i] = i;
  return rng.subset(pool, s);
}

// size in [lo, n] drawn proportionally to C(n, size)
int weighted_size(int n, int lo, SplitMix64& rng) {
  mpz_class total = 0;
  for (int a = lo; a <= n; ++a) total += binom(n, a);
  mpz_class r = uniform_mpz_below(total, rng);
  for (int a = lo; a <= n; ++a) {
    mpz_class w = binom(n, a);
    if (r < w) return a;
    r -= w;
  }
  return n;
}

std::string dump_sets(const char* ka, const std::vector<int>& A, const char* kb,
                      const std::vector<int>& B) {
  ordered_json j;
  j[ka] = A;
  j[kb] = B;
  return j.dump();
}

double mpq_to_double(const mpq_class& q) { return q.get_d(); }

}  // namespace

std::string AuditReport::to_json() const {
  ordered_json j;
  j["name"] = name;
  j["pass"] = pass;
  j["family_empty"] = family_empty;
  j["mode"] = mode;
  j["checked"] = checked;
  j["margin"] = margin;
  j["margin_exact"] = margin_exact;
  if (!witness.empty())
    j["witness"] = ordered_json::parse(witness);
  else
    j["witness"] = nullptr;
  return j.dump();
}

std::string AuditReport::to_table_row() const {
  std::ostringstream os;
  os << name;
  for (size_t i = name.size(); i < 16; ++i) os << ' ';
  os << (pass ? "pass " : "FAIL ") << mode;
  for (size_t i = mode.size(); i < 9; ++i) os << ' ';
  os << "checked=" << checked << " margin=" << margin;
  if (family_empty) os << " (family empty)";
  return os.str();
}

AuditReport check_codegree(const Matrix01& m, const mpq_class& delta) {
  int n = m.n();
  int d = regular_degree(m, "check_codegree");
  require_proper(n, d, "check_codegree");
  AuditReport rep;
  rep.name = "codegree";
  rep.mode = "exact";
  mpq_class base((long)d * (n - d), n);  // p(1-p)n
  base.canonicalize();
  mpq_class worst = -1;
  std::string worst_witness;
  auto scan = [&](const Matrix01& mm, const char* orient) {
    int w = mm.words();
    for (int i1 = 0; i1 < n; ++i1)
      for (int i2 = i1 + 1; i2 < n; ++i2) {
        int co = 0;
        const uint64_t* a = mm.row_bits(i1);
        const uint64_t* b = mm.row_bits(i2);
        for (int t = 0; t < w; ++t) co += std::popcount(a[t] & b[t]);
        int ex = d - co;
        mpq_class dev = mpq_class(ex) / base - 1;
        if (dev < 0) dev = -dev;
        ++rep.checked;
        if (dev > worst) {
          worst = dev;
          ordered_json j;
          j["side"] = orient;
          j["pair"] = {i1 + 1, i2 + 1};  // reports are 1-based
          j["exclusive"] = ex;
          j["deviation"] = mpq_to_double(dev);
          worst_witness = j.dump();
        }
      }
  };
  scan(m, "rows");
  Matrix01 mt = m.transpose();
  scan(mt, "columns");
  mpq_class margin = delta - worst;
  rep.pass = margin >= 0;
  rep.margin = mpq_to_double(margin);
  rep.margin_exact = margin.get_str();
  rep.witness = worst_witness;
  return rep;
}

EdgeDeviation edge_deviation(const Matrix01& m, const std::vector<int>& A,
                             const std::vector<int>& B) {
  int n = m.n();
  int d = regular_degree(m, "edge_deviation");
  EdgeDeviation ed;
  ed.e = m.edge_count(A, B);
  long a = (long)A.size(), b = (long)B.size();
  ed.mu = mpq_class((long)d * a * b, n);
  ed.mu.canonicalize();
  long inner = a * b, outer = (n - a) * (n - b);
  ed.mu_hat = mpq_class((long)d * std::min(inner, outer), n);
  ed.mu_hat.canonicalize();
  mpq_class diff = mpq_class((long)ed.e) - ed.mu;
  if (diff < 0) diff = -diff;
  if (ed.mu_hat == 0) {
    ed.tau_infinite = diff != 0;
    ed.tau = 0;
  } else {
    ed.tau = diff / ed.mu_hat;
  }
  return ed;
}

AuditReport check_large_minors(const Matrix01& m, const mpq_class& eps,
                               const AuditConfig& cfg, SplitMix64& rng) {
  int n = m.n();
  int d = regular_degree(m, "check_large_minors");
  require_proper(n, d, "check_large_minors");
  AuditReport rep;
  rep.name = "large_minors";
  double p = (double)d / n;
  double thr = mpq_to_double(cfg.C0 / (eps * eps)) * std::log((double)n) / p;
  int m0 = (int)std::ceil(thr);
  if (m0 < 1) m0 = 1;
  if (m0 > n) {
    rep.pass = true;
    rep.family_empty = true;
    rep.mode = "exact";
    rep.margin = mpq_to_double(eps);
    rep.margin_exact = eps.get_str();
    return rep;
  }
  mpz_class side = 0;
  for (int a = m0; a <= n; ++a) side += binom(n, a);
  mpq_class worst = -1;
  std::string worst_witness;
  auto test_pair = [&](const std::vector<int>& A, const std::vector<int>& B) {
    EdgeDeviation ed = edge_deviation(m, A, B);
    mpq_class t = ed.tau_infinite ? mpq_class(1000000) : ed.tau;
    ++rep.checked;
    if (t > worst) {
      worst = t;
      worst_witness = dump_sets("A", A, "B", B);
    }
  };
  if (side * side <= cfg.budget) {
    rep.mode = "exact";
    for (int a = m0; a <= n; ++a)
      for_each_subset(n, a, [&](const std::vector<int>& A) {
        for (int b = m0; b <= n; ++b)
          for_each_subset(n, b, [&](const std::vector<int>& B) { test_pair(A, B); });
      });
  } else {
    rep.mode = "sampled";
    long long draws = 10000;
    for (long long t = 0; t < draws; ++t) {
      int a = weighted_size(n, m0, rng);
      int b = weighted_size(n, m0, rng);
      test_pair(random_subset(n, a, rng), random_subset(n, b, rng));
    }
  }
  mpq_class margin = eps - worst;
  rep.pass = margin >= 0;
  rep.margin = mpq_to_double(margin);
  rep.margin_exact = margin.get_str();
  rep.witness = worst_witness;
  return rep;
}

namespace {

// shared sweep over small row sets: exhaustive size classes while the
// cumulative family fits the budget, sampled afterwards
template <class Body>
void sweep_small_sets(int n, int s_max, const AuditConfig& cfg, SplitMix64& rng,
                      bool& exhaustive_all, Body&& body) {
  mpz_class used = 0;
  exhaustive_all = true;
  for (int s = 1; s <= s_max; ++s) {
    mpz_class cnt = binom(n, s);
    if (used + cnt <= cfg.budget) {
      used += cnt;
      for_each_subset(n, s, [&](const std::vector<int>& S) { body(S, true); });
    } else {
      exhaustive_all = false;
      for (int t = 0; t < cfg.sample_per_class; ++t) body(random_subset(n, s, rng), false);
    }
  }
}

AuditReport expansion_impl(const Matrix01& m, int d, const mpq_class& gamma,
                           const AuditConfig& cfg, SplitMix64& rng) {
  int n = m.n();
  require_proper(n, d, "check_expansion");
  if (gamma <= 0) throw std::invalid_argument("check_expansion: gamma must be positive");
  AuditReport rep;
  rep.name = "expansion";
  double logn = std::log((double)n);
  double g = mpq_to_double(gamma);
  int s0 = (int)std::floor(logn / (2 * g) * ((double)n / d));
  s0 = std::min(s0, n);
  if (s0 < 1) {
    rep.pass = true;
    rep.family_empty = true;
    rep.mode = "exact";
    return rep;
  }
  double rate = g / logn * d;  // |N(S)| >= rate * |S|
  double worst = 1e300;
  std::string worst_witness;
  bool exhaustive = true;
  sweep_small_sets(n, s0, cfg, rng, exhaustive, [&](const std::vector<int>& S, bool) {
    int ns = m.neighborhood_size(S);
    double slack = (double)ns - rate * (double)S.size();
    ++rep.checked;
    if (slack < worst) {
      worst = slack;
      ordered_json j;
      j["S"] = S;
      j["neighborhood"] = ns;
      worst_witness = j.dump();
    }
  });
  rep.mode = exhaustive ? "exact" : "sampled";
  rep.pass = worst >= 0;
  rep.margin = worst;
  rep.witness = worst_witness;
  return rep;
}

}  // namespace

AuditReport check_expansion(const Matrix01& m, const mpq_class& gamma,
                            const AuditConfig& cfg, SplitMix64& rng) {
  return expansion_impl(m, regular_degree(m, "check_expansion"), gamma, cfg, rng);
}

AuditReport check_thin_minors(const Matrix01& m, const mpq_class& eps0,
                              const mpq_class& gamma, const AuditConfig& cfg,
                              SplitMix64& rng) {
  int n = m.n();
  int d = regular_degree(m, "check_thin_minors");
  require_proper(n, d, "check_thin_minors");
  AuditReport rep;
  rep.name = "thin_minors";
  double logn = std::log((double)n);
  double g = mpq_to_double(gamma);
  int s0 = std::min((int)std::floor(logn / (2 * g) * ((double)n / d)), n);
  double bcoef = mpq_to_double(eps0) * g / logn * d;  // |B| <= bcoef * |S|
  Matrix01 mt = m.transpose();
  mpq_class worst_margin;
  bool have_any = false;
  std::string worst_witness;
  bool exhaustive = true;
  if (s0 >= 1) {
    std::vector<int> mass(n);
    sweep_small_sets(n, s0, cfg, rng, exhaustive, [&](const std::vector<int>& S, bool) {
      int s = (int)S.size();
      int bmax = (int)std::floor(bcoef * s);
      if (bmax < 1) return;  // no admissible B at this size
      // row mask of S
      std::vector<uint64_t> smask(m.words(), 0);
      for (int i : S) smask[i >> 6] |= 1ULL << (i & 63);
      // heaviest columns into S, then heaviest rows out of S read as columns
      long long best = 0;
      std::vector<int> wit_cols, wit_rows;
      for (int pass = 0; pass < 2; ++pass) {
        const Matrix01& side = pass == 0 ? mt : m;
        // mass[j] = |column j restricted to S| (pass 0) or |row j meets S| (pass 1)
        for (int j = 0; j < n; ++j) {
          const uint64_t* rb = side.row_bits(j);
          int c = 0;
          for (int t = 0; t < side.words(); ++t) c += std::popcount(rb[t] & smask[t]);
          mass[j] = c;
        }
        std::vector<int> order(n);
        for (int j = 0; j < n; ++j) order[j] = j;
        std::partial_sort(order.begin(), order.begin() + bmax, order.end(),
                          [&](int x, int y) { return mass[x] > mass[y]; });
        long long e = 0;
        std::vector<int> top(order.begin(), order.begin() + bmax);
        for (int j : top) e += mass[j];
        if (e >= best) {
          best = e;
          if (pass == 0)
            wit_cols = top;
          else
            wit_rows = top;
        }
      }
      mpq_class margin = eps0 * d * s - (long)best;  // > 0 iff the set is clean
      ++rep.checked;
      if (!have_any || margin < worst_margin) {
        have_any = true;
        worst_margin = margin;
        ordered_json j;
        j["S"] = S;
        j["edges"] = best;
        j["bmax"] = bmax;
        if (!wit_cols.empty()) j["columns"] = wit_cols;
        if (!wit_rows.empty()) j["rows"] = wit_rows;
        worst_witness = j.dump();
      }
    });
  }
  rep.mode = exhaustive ? "exact" : "sampled";
  if (!have_any) {
    rep.pass = true;
    rep.family_empty = true;
    return rep;
  }
  rep.pass = worst_margin > 0;  // reaching the threshold is a violation
  rep.margin = mpq_to_double(worst_margin);
  rep.margin_exact = worst_margin.get_str();
  rep.witness = worst_witness;
  return rep;
}

namespace {

AuditReport degree_bound_report(const Matrix01& m, int d, bool lower) {
  int n = m.n();
  AuditReport rep;
  rep.name = lower ? "degrees" : "degree_caps";
  rep.mode = "exact";
  int worst = lower ? n + 1 : -1;
  std::string side = "rows";
  int arg = -1;
  auto consider = [&](int v, const char* s, int idx) {
    ++rep.checked;
    bool worse = lower ? v < worst : v > worst;
    if (worse) {
      worst = v;
      side = s;
      arg = idx;
    }
  };
  for (int i = 0; i < n; ++i) consider(m.row_sum(i), "rows", i);
  for (int j = 0; j < n; ++j) consider(m.col_sum(j), "columns", j);
  int margin = lower ? worst - d : d - worst;
  rep.pass = margin >= 0;
  rep.margin = margin;
  rep.margin_exact = std::to_string(margin);
  ordered_json w;
  w["side"] = side;
  w["index"] = arg + 1;
  w["degree"] = worst;
  rep.witness = w.dump();
  return rep;
}

AuditReport dense_pairs_report(const Matrix01& m, int d, const AuditConfig& cfg,
                               SplitMix64& rng) {
  int n = m.n();
  AuditReport rep;
  rep.name = "dense_pairs";
  double t0 = mpq_to_double(cfg.C2) * ((double)n / d) * std::log((double)n);
  int m0 = (int)std::ceil(t0);
  if (m0 > n) {
    rep.pass = true;
    rep.family_empty = true;
    rep.mode = "exact";
    return rep;
  }
  if (m0 < 1) m0 = 1;
  mpz_class side = 0;
  for (int a = m0; a <= n; ++a) side += binom(n, a);
  mpq_class worst;
  bool have_any = false;
  std::string worst_witness;
  auto test_pair = [&](const std::vector<int>& A, const std::vector<int>& B) {
    long long e = m.edge_count(A, B);
    mpq_class floor_q = cfg.c2 * mpq_class((long)d * (long)A.size() * (long)B.size(), n);
    floor_q.canonicalize();
    mpq_class margin = mpq_class((long)e) - floor_q;
    ++rep.checked;
    if (!have_any || margin < worst) {
      have_any = true;
      worst = margin;
      worst_witness = dump_sets("A", A, "B", B);
    }
  };
  if (side * side <= cfg.budget) {
    rep.mode = "exact";
    for (int a = m0; a <= n; ++a)
      for_each_subset(n, a, [&](const std::vector<int>& A) {
        for (int b = m0; b <= n; ++b)
          for_each_subset(n, b, [&](const std::vector<int>& B) { test_pair(A, B); });
      });
  } else {
    rep.mode = "sampled";
    for (long long t = 0; t < 10000; ++t) {
      int a = weighted_size(n, m0, rng);
      int b = weighted_size(n, m0, rng);
      test_pair(random_subset(n, a, rng), random_subset(n, b, rng));
    }
  }
  rep.pass = !have_any || worst >= 0;
  if (have_any) {
    rep.margin = mpq_to_double(worst);
    rep.margin_exact = worst.get_str();
    rep.witness = worst_witness;
  } else {
    rep.family_empty = true;
  }
  return rep;
}

}  // namespace

std::string GoodnessReport::to_json() const {
  ordered_json j;
  j["pass"] = pass;
  j["degrees"] = ordered_json::parse(degrees.to_json());
  j["degree_caps"] = ordered_json::parse(degree_caps.to_json());
  j["expansion"] = ordered_json::parse(expansion.to_json());
  j["dense_pairs"] = ordered_json::parse(dense_pairs.to_json());
  return j.dump();
}

GoodnessReport check_good_d(const Matrix01& m, int d, const AuditConfig& cfg,
                            SplitMix64& rng) {
  require_proper(m.n(), d, "check_good_d");
  GoodnessReport g;
  g.degrees = degree_bound_report(m, d, true);
  g.degree_caps = degree_bound_report(m, d, false);
  mpq_class gamma_eff = std::min(cfg.gamma, cfg.c1);
  g.expansion = expansion_impl(m, d, gamma_eff, cfg, rng);
  g.dense_pairs = dense_pairs_report(m, d, cfg, rng);
  g.pass = g.degrees.pass && g.degree_caps.pass && g.expansion.pass && g.dense_pairs.pass;
  return g;
}

ConcentrationReport sym_group_concentration(int m, const std::vector<int>& A,
                                            const std::vector<int>& B,
                                            long long trials, SplitMix64& rng) {
  for (int x : A)
    if (x < 0 || x >= m) throw std::out_of_range("sym_group: A out of range");
  for (int x : B)
    if (x < 0 || x >= m) throw std::out_of_range("sym_group: B out of range");
  int a = (int)A.size(), b = (int)B.size();
  if (a == 0 || b == 0 || trials <= 0)
    throw std::invalid_argument("sym_group: empty set or no trials");
  ConcentrationReport rep;
  rep.trials = trials;
  std::vector<bool> in_b(m, false);
  for (int x : B) in_b[x] = true;
  int kmax = std::min(a, b);
  std::vector<long long> hist(kmax + 1, 0);
  std::vector<int> perm(m);
  double sum = 0;
  for (long long t = 0; t < trials; ++t) {
    for (int i = 0; i < m; ++i) perm[i] = i;
    rng.shuffle(perm);
    int e = 0;
    for (int x : A)
      if (in_b[perm[x]]) ++e;
    ++hist[e];
    sum += e;
  }
  rep.mean = sum / (double)trials;
  double mu = (double)a * b / m;
  rep.mean_expected = mu;
  // exact hypergeometric reference
  mpz_class denom = binom(m, a);
  mpq_class tv = 0;
  for (int k = 0; k <= kmax; ++k) {
    mpq_class pmf(binom(b, k) * binom(m - b, a - k), denom);
    pmf.canonicalize();
    mpq_class emp((long)hist[k], (long)trials);
    emp.canonicalize();
    mpq_class diff = emp - pmf;
    if (diff < 0) diff = -diff;
    tv += diff;
  }
  rep.tv_to_hypergeometric = tv / 2;
  double var = mu * ((double)(m - a) / m) * ((double)(m - b) / (m - 1));
  rep.mean_ok = std::abs(rep.mean - mu) <= 4.0 * std::sqrt(var / (double)trials) + 1e-12;
  rep.tails_ok = true;
  for (double tau = 0.25; tau <= 2.01; tau += 0.25) {
    long long cnt = 0;
    for (int k = 0; k <= kmax; ++k)
      if (std::abs((double)k - mu) > tau * mu) cnt += hist[k];
    double emp = (double)cnt / (double)trials;
    double bound = 2.0 * std::exp(-(tau * tau / (4.0 * (1.0 + tau))) * mu);
    double slack = 4.0 * std::sqrt(std::max(emp, 1e-12) * (1 - emp) / (double)trials) +
                   10.0 / (double)trials;
    if (emp > bound + slack) rep.tails_ok = false;
    rep.tails.push_back({tau, emp, bound});
  }
  rep.pass = rep.mean_ok && rep.tails_ok;
  return rep;
}

BadPairAudit bad_pair_audit(const Matrix01& m, const std::vector<int>& B,
                            const mpq_class& eps) {
  int n = m.n();
  int d = regular_degree(m, "bad_pair_audit");
  require_proper(n, d, "bad_pair_audit");
  long bsz = (long)B.size();
  if (bsz == 0 || bsz == n)
    throw std::invalid_argument("bad_pair_audit: B must be a proper nonempty column set");
  std::vector<uint64_t> bmask(m.words(), 0), cmask(m.words(), 0);
  for (int j : B) bmask[j >> 6] |= 1ULL << (j & 63);
  for (int j = 0; j < n; ++j)
    if (!(bmask[j >> 6] >> (j & 63) & 1)) cmask[j >> 6] |= 1ULL << (j & 63);
  mpq_class pb((long)d * bsz, n), pc((long)d * (n - bsz), n);  // p|B|, p|Bc|
  pb.canonicalize();
  pc.canonicalize();
  auto hits = [&](int i, const std::vector<uint64_t>& mask) {
    const uint64_t* r = m.row_bits(i);
    int c = 0;
    for (int t = 0; t < m.words(); ++t) c += std::popcount(r[t] & mask[t]);
    return c;
  };
  BadPairAudit out;
  for (int i = 0; i < n; ++i) {
    mpq_class db = mpq_class(hits(i, bmask)) / pb - 1;
    if (db < 0) db = -db;
    mpq_class dc = mpq_class(hits(i, cmask)) / pc - 1;
    if (dc < 0) dc = -dc;
    if (db <= eps && dc <= eps) out.a_eps.push_back(i);
  }
  out.a_eps_complement = n - (int)out.a_eps.size();
  mpq_class tb = eps * pb, tc = eps * pc;
  for (int i : out.a_eps) {
    int bad = 0;
    for (int ip : out.a_eps) {
      if (ip == i) continue;
      const uint64_t* ri = m.row_bits(i);
      const uint64_t* rp = m.row_bits(ip);
      int ex_b = 0, exr_c = 0;
      for (int t = 0; t < m.words(); ++t) {
        ex_b += std::popcount(ri[t] & ~rp[t] & bmask[t]);
        exr_c += std::popcount(rp[t] & ~ri[t] & cmask[t]);
      }
      if (mpq_class(ex_b) <= tb || mpq_class(exr_c) <= tc) ++bad;
    }
    out.s_eps_sizes.push_back(bad);
    out.max_s_eps = std::max(out.max_s_eps, bad);
  }
  return out;
}

}  // namespace rrdlab
