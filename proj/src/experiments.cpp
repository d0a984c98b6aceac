#include "rrdlab/experiments.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "json.hpp"
#include "rrdlab/coupling.hpp"
#include "rrdlab/exact_rank.hpp"
#include "rrdlab/sampler.hpp"

namespace rrdlab {

namespace {

constexpr double kZ95 = 1.9599639845400545;
constexpr double kZ99 = 2.3263478740408408;

double now_seconds() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

// contiguous [lo, hi) trial ranges, one per worker, empty ranges dropped
std::vector<std::pair<long long, long long>> split_ranges(long long trials,
                                                          int threads) {
  int t = std::max(1, threads);
  std::vector<std::pair<long long, long long>> out;
  long long base = trials / t, rem = trials % t, lo = 0;
  for (int i = 0; i < t; ++i) {
    long long len = base + (i < rem ? 1 : 0);
    if (len > 0) out.emplace_back(lo, lo + len);
    lo += len;
  }
  return out;
}

// runs body(t) for t in [0, trials) across workers; body must be a pure
// function of its own per-trial stream so the split cannot change results
template <class Body>
void for_each_trial(long long trials, int threads, const Body& body) {
  auto ranges = split_ranges(trials, threads);
  if (ranges.size() <= 1) {
    for (long long t = 0; t < trials; ++t) body(t);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(ranges.size());
  for (auto [lo, hi] : ranges)
    pool.emplace_back([lo = lo, hi = hi, &body] {
      for (long long t = lo; t < hi; ++t) body(t);
    });
  for (auto& th : pool) th.join();
}

mpz_class binom(long n, long k) {
  if (k < 0 || k > n) return 0;
  mpz_class r;
  mpz_bin_uiui(r.get_mpz_t(), (unsigned long)n, (unsigned long)k);
  return r;
}

mpz_class factorial(long n) {
  mpz_class r;
  mpz_fac_ui(r.get_mpz_t(), (unsigned long)n);
  return r;
}

// t[m] = sum over derangement-style cycle covers of [m] of w^(#cycles),
// cycles of length >= 2 (odd_only: length odd, so >= 3). Recursion removes
// the cycle through element 1: choose its L-1 companions and their order up
// to rotation/reflection-free directed count (L-1)!.
std::vector<mpq_class> cycle_parity_table(int n, const mpq_class& w,
                                          bool odd_only) {
  std::vector<mpq_class> t(n + 1, 0);
  t[0] = 1;
  for (int m = 1; m <= n; ++m) {
    mpq_class acc = 0;
    for (int L = 2; L <= m; ++L) {
      if (odd_only && L % 2 == 0) continue;
      acc += mpq_class(binom(m - 1, L - 1) * factorial(L - 1)) * w * t[m - L];
    }
    t[m] = acc;
  }
  return t;
}

void require_cell(int n, int d) {
  if (n < 1 || d < 0 || d > n) throw std::invalid_argument("bad cell (n, d)");
}

std::string csv_escape_free(const std::string& s) {
  if (s.find_first_of(",\"\n") != std::string::npos)
    throw std::invalid_argument("csv field needs quoting");
  return s;
}

}  // namespace

std::pair<double, double> wilson95(long long hits, long long trials) {
  if (trials <= 0) return {0.0, 1.0};
  if (hits < 0 || hits > trials) throw std::invalid_argument("hits out of range");
  double t = (double)trials, h = (double)hits;
  double p = h / t, z2 = kZ95 * kZ95;
  double denom = 1.0 + z2 / t;
  double center = (p + z2 / (2.0 * t)) / denom;
  double half = (kZ95 / denom) * std::sqrt(p * (1.0 - p) / t + z2 / (4.0 * t * t));
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

MCEstimate make_estimate(long long hits, long long trials, uint64_t seed,
                         double wall_time) {
  MCEstimate e;
  e.trials = trials;
  e.hits = hits;
  e.p_hat = trials > 0 ? (double)hits / (double)trials : 0.0;
  auto ci = wilson95(hits, trials);
  e.ci_low = ci.first;
  e.ci_high = ci.second;
  e.seed = seed;
  e.wall_time = wall_time;
  return e;
}

std::vector<CellResult> mc_singularity(const ExperimentSpec& spec) {
  if (spec.trials < 0) throw std::invalid_argument("negative trials");
  if (spec.sampler_mode != "auto" && spec.sampler_mode != "exact" &&
      spec.sampler_mode != "mcmc")
    throw std::invalid_argument("sampler_mode must be auto, exact, or mcmc");
  std::vector<CellResult> out;
  for (size_t ci = 0; ci < spec.grid.size(); ++ci) {
    const Cell cell = spec.grid[ci];
    require_cell(cell.n, cell.d);
    if (spec.sampler_mode == "exact" && !count_in_budget(cell.n, cell.d))
      throw std::invalid_argument("exact sampler out of budget for cell");
    long long steps = spec.mcmc_steps >= 0 ? spec.mcmc_steps
                                           : default_mcmc_steps(cell.n, cell.d);
    double t0 = now_seconds();
    std::vector<long long> plain_hits(std::max<long long>(1, spec.trials), 0);
    std::vector<long long> sign_hits(plain_hits.size(), 0);
    for_each_trial(spec.trials, spec.threads, [&](long long t) {
      SplitMix64 rng(derive_stream(spec.seed, (uint64_t)ci, (uint64_t)t));
      Matrix01 m = [&] {
        if (spec.sampler_mode == "exact") return sample_exact(cell.n, cell.d, rng);
        if (spec.sampler_mode == "mcmc")
          return sample_mcmc(cell.n, cell.d, steps, rng);
        return sample_auto(cell.n, cell.d, rng);
      }();
      if (is_singular(to_intmat(m), rng)) plain_hits[t] = 1;
      auto signs = sample_signs(cell.n, rng);
      if (is_singular(to_intmat(hadamard(m, signs)), rng)) sign_hits[t] = 1;
    });
    long long ph = std::accumulate(plain_hits.begin(), plain_hits.end(), 0LL);
    long long sh = std::accumulate(sign_hits.begin(), sign_hits.end(), 0LL);
    double dt = now_seconds() - t0;
    CellResult r;
    r.cell = cell;
    r.plain = make_estimate(ph, spec.trials, spec.seed, dt);
    r.sign_flipped = make_estimate(sh, spec.trials, spec.seed, dt);
    out.push_back(std::move(r));
  }
  return out;
}

mpq_class d2_parity_benchmark(int n) {
  if (n < 2) throw std::invalid_argument("need n >= 2");
  mpq_class w(1, 2);
  auto all = cycle_parity_table(n, w, false);
  auto odd = cycle_parity_table(n, w, true);
  if (all[n] == 0) throw std::logic_error("empty 2-regular class");
  mpq_class q = odd[n] / all[n];
  q.canonicalize();
  return q;
}

mpq_class derangement_parity_probability(int n) {
  if (n < 2) throw std::invalid_argument("need n >= 2");
  auto all = cycle_parity_table(n, mpq_class(1), false);
  auto odd = cycle_parity_table(n, mpq_class(1), true);
  if (all[n] == 0) throw std::logic_error("no derangements");
  mpq_class q = odd[n] / all[n];
  q.canonicalize();
  return q;
}

std::vector<ParityRow> d2_cycle_experiment(const std::vector<int>& ns,
                                           long long trials, uint64_t seed,
                                           int threads) {
  if (trials < 0) throw std::invalid_argument("negative trials");
  std::vector<ParityRow> out;
  for (size_t ci = 0; ci < ns.size(); ++ci) {
    int n = ns[ci];
    require_cell(n, 2);
    if (n < 2) throw std::invalid_argument("need n >= 2");
    long long steps = 2 * default_mcmc_steps(n, 2);
    double t0 = now_seconds();
    std::vector<long long> hits(std::max<long long>(1, trials), 0);
    for_each_trial(trials, threads, [&](long long t) {
      SplitMix64 rng(derive_stream(seed, (uint64_t)ci, (uint64_t)t));
      Matrix01 m = sample_mcmc(n, 2, steps, rng);
      if (is_singular(to_intmat(m), rng)) hits[t] = 1;
    });
    long long h = std::accumulate(hits.begin(), hits.end(), 0LL);
    ParityRow row;
    row.n = n;
    row.singular = make_estimate(h, trials, seed, now_seconds() - t0);
    row.parity_probability = d2_parity_benchmark(n);
    row.benchmark = mpq_class(1) - row.parity_probability;
    row.derangement_reference = derangement_parity_probability(n);
    double b = row.benchmark.get_d();
    row.within_ci = row.singular.ci_low <= b && b <= row.singular.ci_high;
    out.push_back(std::move(row));
  }
  return out;
}

std::vector<PermSumRow> perm_sum_experiment(const std::vector<int>& ns,
                                            long long trials, uint64_t seed,
                                            int threads) {
  if (trials < 0) throw std::invalid_argument("negative trials");
  std::vector<PermSumRow> out;
  for (size_t ci = 0; ci < ns.size(); ++ci) {
    int n = ns[ci];
    if (n < 1) throw std::invalid_argument("need n >= 1");
    double t0 = now_seconds();
    std::vector<long long> hits(std::max<long long>(1, trials), 0);
    for_each_trial(trials, threads, [&](long long t) {
      SplitMix64 rng(derive_stream(seed, (uint64_t)ci, (uint64_t)t));
      auto p1 = sample_permutation(n, rng);
      auto p2 = sample_permutation(n, rng);
      IntMat a(n, std::vector<long>(n, 0));
      for (int i = 0; i < n; ++i) {
        a[i][p1[i]] += 1;
        a[i][p2[i]] += 1;
      }
      if (is_singular(a, rng)) hits[t] = 1;
    });
    long long h = std::accumulate(hits.begin(), hits.end(), 0LL);
    PermSumRow row;
    row.n = n;
    row.singular = make_estimate(h, trials, seed, now_seconds() - t0);
    out.push_back(std::move(row));
  }
  return out;
}

AtomResult signed_sum_atom(const std::vector<mpq_class>& x) {
  int m = (int)x.size();
  if (m < 1 || m > 24) throw std::invalid_argument("need 1 <= m <= 24");
  mpz_class scale = 1;
  for (const auto& q : x) {
    if (q == 0) throw std::invalid_argument("full support required");
    mpz_class den = q.get_den();
    mpz_lcm(scale.get_mpz_t(), scale.get_mpz_t(), den.get_mpz_t());
  }
  std::vector<mpz_class> y(m);
  for (int i = 0; i < m; ++i) {
    mpq_class s = x[i] * mpq_class(scale);
    s.canonicalize();
    y[i] = s.get_num();
  }
  // sums of +-y over an index range, with multiplicities
  auto half_sums = [&](int lo, int hi) {
    std::map<mpz_class, long long> acc;
    int k = hi - lo;
    for (long long mask = 0; mask < (1LL << k); ++mask) {
      mpz_class s = 0;
      for (int i = 0; i < k; ++i)
        s += (mask >> i) & 1 ? y[lo + i] : -y[lo + i];
      acc[s] += 1;
    }
    return acc;
  };
  AtomResult res;
  res.m = m;
  res.method = m <= 20 ? "direct" : "meet-in-middle";
  mpz_class best_count = 0, best_value = 0;
  auto take_best = [&](const mpz_class& v, const mpz_class& c) {
    if (c > best_count || (c == best_count && v < best_value)) {
      best_count = c;
      best_value = v;
    }
  };
  if (m <= 20) {
    for (const auto& [v, c] : half_sums(0, m)) take_best(v, mpz_class((long)c));
  } else {
    auto left = half_sums(0, m / 2);
    auto right = half_sums(m / 2, m);
    std::map<mpz_class, mpz_class> acc;
    for (const auto& [a, ca] : left)
      for (const auto& [b, cb] : right)
        acc[a + b] += mpz_class((long)ca) * mpz_class((long)cb);
    for (const auto& [v, c] : acc) take_best(v, c);
  }
  mpz_class pw;
  mpz_ui_pow_ui(pw.get_mpz_t(), 2, (unsigned long)m);
  res.max_atom = mpq_class(best_count, pw);
  res.max_atom.canonicalize();
  res.atom_value = mpq_class(best_value, scale);
  res.atom_value.canonicalize();
  res.bound = mpq_class(binom(m, m / 2), pw);
  res.bound.canonicalize();
  res.attains_bound = res.max_atom == res.bound;
  return res;
}

namespace {

// exhaustive pushforward of the uniform law through every plan in the family;
// plan_mass(m) must return pairs (resulting key, exact probability mass given m)
PushforwardAudit exact_audit(int n, int d,
                             const std::function<bool(const Matrix01&)>& legal,
                             const std::function<void(
                                 const Matrix01&,
                                 std::map<std::string, mpq_class>&)>& push) {
  auto all = enumerate_all(n, d);
  std::vector<const Matrix01*> cls;
  for (const auto& m : all)
    if (legal(m)) cls.push_back(&m);
  if (cls.empty()) throw std::invalid_argument("empty legal class");
  long long N = (long long)cls.size();
  std::map<std::string, mpq_class> out;
  for (const Matrix01* m : cls) {
    std::map<std::string, mpq_class> local;
    push(*m, local);
    mpq_class total = 0;
    for (auto& [k, v] : local) {
      out[k] += v / mpq_class((long)N);
      total += v;
    }
    if (total != 1) throw std::logic_error("plan masses do not sum to 1");
  }
  mpq_class uniform(1, (unsigned long)N);
  uniform.canonicalize();
  mpq_class tv = 0;
  std::map<std::string, bool> seen;
  for (const Matrix01* m : cls) seen[m->key()] = false;
  for (const auto& [k, v] : out) {
    if (!seen.count(k)) throw std::logic_error("pushforward left the class");
    seen[k] = true;
    tv += abs(v - uniform);
  }
  for (const auto& [k, hit] : seen)
    if (!hit) tv += uniform;
  tv /= 2;
  PushforwardAudit audit;
  audit.mode = "exact";
  audit.tv = tv;
  audit.states = N;
  audit.pass = tv == 0;
  return audit;
}

// all bijections S1 -> S2 and all sign patterns, each applied to m at (i1, i2)
void push_all_plans(const Matrix01& m, int i1, int i2,
                    const std::vector<int>& S1, const std::vector<int>& S2,
                    const std::vector<int>& frozen, const mpq_class& branch_mass,
                    std::map<std::string, mpq_class>& out) {
  int s = (int)S1.size();
  if (s == 0) {
    ShufflePlan plan;
    plan.i1 = i1;
    plan.i2 = i2;
    plan.frozen = frozen;
    plan.s = 0;
    out[apply_plan(m, plan).key()] += branch_mass;
    return;
  }
  std::vector<int> image = S2;
  std::sort(image.begin(), image.end());
  mpz_class plan_count = factorial(s);
  plan_count <<= s;
  mpq_class per = branch_mass / mpq_class(plan_count);
  per.canonicalize();
  do {
    for (long long mask = 0; mask < (1LL << s); ++mask) {
      ShufflePlan plan;
      plan.i1 = i1;
      plan.i2 = i2;
      plan.frozen = frozen;
      plan.s = s;
      plan.S1 = S1;
      plan.S2 = S2;
      for (int a = 0; a < s; ++a) {
        plan.pi.emplace_back(S1[a], image[a]);
        plan.xi.emplace_back(S1[a], (mask >> a) & 1 ? 1 : -1);
      }
      out[apply_plan(m, plan).key()] += per;
    }
  } while (std::next_permutation(image.begin(), image.end()));
}

std::vector<int> minus_sorted(const std::vector<int>& a,
                              const std::vector<int>& b) {
  std::vector<int> out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(),
                      std::back_inserter(out));
  return out;
}

void subsets_rec(const std::vector<int>& pool, int k, int start,
                 std::vector<int>& cur,
                 const std::function<void(const std::vector<int>&)>& emit) {
  if ((int)cur.size() == k) {
    emit(cur);
    return;
  }
  for (int i = start; i <= (int)pool.size() - (k - (int)cur.size()); ++i) {
    cur.push_back(pool[i]);
    subsets_rec(pool, k, i + 1, cur, emit);
    cur.pop_back();
  }
}

}  // namespace

PushforwardAudit coupling_audit_exact(int n, int d, int i1, int i2) {
  require_cell(n, d);
  if (i1 == i2 || i1 < 0 || i2 < 0 || i1 >= n || i2 >= n)
    throw std::invalid_argument("need distinct rows in range");
  return exact_audit(
      n, d, [](const Matrix01&) { return true; },
      [&](const Matrix01& m, std::map<std::string, mpq_class>& out) {
        auto ce = m.co_ex_sets(i1, i2);
        push_all_plans(m, i1, i2, ce.ex12, ce.ex21, {}, mpq_class(1), out);
      });
}

PushforwardAudit coupling_audit_restricted(int n, int d, int i1, int i2,
                                           const std::vector<int>& frozen,
                                           int s) {
  require_cell(n, d);
  if (i1 == i2 || i1 < 0 || i2 < 0 || i1 >= n || i2 >= n)
    throw std::invalid_argument("need distinct rows in range");
  if (s < 0) throw std::invalid_argument("negative s");
  std::vector<int> fz = frozen;
  std::sort(fz.begin(), fz.end());
  fz.erase(std::unique(fz.begin(), fz.end()), fz.end());
  auto legal = [&](const Matrix01& m) {
    auto ce = m.co_ex_sets(i1, i2);
    return s <= (int)minus_sorted(ce.ex12, fz).size() &&
           s <= (int)minus_sorted(ce.ex21, fz).size();
  };
  return exact_audit(
      n, d, legal,
      [&](const Matrix01& m, std::map<std::string, mpq_class>& out) {
        auto ce = m.co_ex_sets(i1, i2);
        auto a = minus_sorted(ce.ex12, fz);
        auto b = minus_sorted(ce.ex21, fz);
        mpz_class branches = binom((long)a.size(), s) * binom((long)b.size(), s);
        mpq_class branch = mpq_class(1) / mpq_class(branches);
        branch.canonicalize();
        std::vector<int> s1cur, s2cur;
        subsets_rec(a, s, 0, s1cur, [&](const std::vector<int>& S1) {
          subsets_rec(b, s, 0, s2cur, [&](const std::vector<int>& S2) {
            push_all_plans(m, i1, i2, S1, S2, fz, branch, out);
          });
        });
      });
}

PushforwardAudit coupling_audit_chi2(int n, int d, int i1, int i2,
                                     long long trials, uint64_t seed) {
  require_cell(n, d);
  if (i1 == i2 || i1 < 0 || i2 < 0 || i1 >= n || i2 >= n)
    throw std::invalid_argument("need distinct rows in range");
  if (trials < 1) throw std::invalid_argument("need trials >= 1");
  auto all = enumerate_all(n, d);
  std::map<std::string, size_t> index;
  for (size_t i = 0; i < all.size(); ++i) index[all[i].key()] = i;
  std::vector<long long> hist(all.size(), 0);
  SplitMix64 rng(seed);
  for (long long t = 0; t < trials; ++t) {
    Matrix01 m = sample_exact(n, d, rng);
    ShufflePlan plan = make_shuffle_plan(m, i1, i2, rng);
    Matrix01 after = apply_plan(m, plan);
    auto it = index.find(after.key());
    if (it == index.end()) throw std::logic_error("shuffle left the class");
    hist[it->second] += 1;
  }
  double expd = (double)trials / (double)all.size();
  double chi2 = 0;
  for (long long h : hist) {
    double diff = (double)h - expd;
    chi2 += diff * diff / expd;
  }
  PushforwardAudit audit;
  audit.mode = "chi2";
  audit.trials = trials;
  audit.states = (long long)all.size();
  audit.dof = (long long)all.size() - 1;
  audit.chi2 = chi2;
  audit.chi2_crit = chi2_crit99(audit.dof);
  audit.pass = chi2 <= audit.chi2_crit;
  return audit;
}

double chi2_crit99(long long dof) {
  if (dof < 1) throw std::invalid_argument("need dof >= 1");
  double k = (double)dof;
  double a = 2.0 / (9.0 * k);
  double c = 1.0 - a + kZ99 * std::sqrt(a);
  return k * c * c * c;
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  if (res.ec != std::errc()) throw std::logic_error("to_chars failed");
  return std::string(buf, res.ptr);
}

void run_report(const ExperimentSpec& spec,
                const std::vector<CellResult>& rows) {
  if (spec.grid.empty()) throw std::invalid_argument("empty grid");
  if (spec.out_path.empty()) throw std::invalid_argument("empty out_path");
  if (rows.size() != spec.grid.size())
    throw std::invalid_argument("rows do not match grid");
  using json = nlohmann::ordered_json;
  json j;
  j["name"] = spec.name;
  j["seed"] = spec.seed;
  j["trials"] = spec.trials;
  j["sampler_mode"] = spec.sampler_mode;
  j["mcmc_steps"] = spec.mcmc_steps;
  j["threads"] = spec.threads;
  j["cells"] = json::array();
  auto est_json = [](const MCEstimate& e) {
    json o;
    o["trials"] = e.trials;
    o["hits"] = e.hits;
    o["p_hat"] = e.p_hat;
    o["ci_low"] = e.ci_low;
    o["ci_high"] = e.ci_high;
    return o;
  };
  for (const auto& r : rows) {
    json c;
    c["n"] = r.cell.n;
    c["d"] = r.cell.d;
    c["plain"] = est_json(r.plain);
    c["sign_flipped"] = est_json(r.sign_flipped);
    j["cells"].push_back(std::move(c));
  }
  std::string jtext = j.dump(2);
  jtext.push_back('\n');
  std::string csv = "n,d,trials,hits,p_hat,ci_low,ci_high,seed,model\n";
  auto csv_row = [&](const Cell& cell, const MCEstimate& e,
                     const std::string& model) {
    csv += std::to_string(cell.n) + "," + std::to_string(cell.d) + "," +
           std::to_string(e.trials) + "," + std::to_string(e.hits) + "," +
           format_double(e.p_hat) + "," + format_double(e.ci_low) + "," +
           format_double(e.ci_high) + "," + std::to_string(e.seed) + "," +
           csv_escape_free(model) + "\n";
  };
  for (const auto& r : rows) {
    csv_row(r.cell, r.plain, "plain");
    csv_row(r.cell, r.sign_flipped, "signs");
  }
  std::ofstream jf(spec.out_path + ".json", std::ios::binary);
  if (!jf) throw std::runtime_error("cannot open json output");
  jf << jtext;
  jf.close();
  std::ofstream cf(spec.out_path + ".csv", std::ios::binary);
  if (!cf) throw std::runtime_error("cannot open csv output");
  cf << csv;
  cf.close();
}

}  // namespace rrdlab
