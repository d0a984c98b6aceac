// coupling.cpp
#include "rrdlab/coupling.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

#include "json.hpp"

namespace rrdlab {

namespace {

using ordered_json = nlohmann::ordered_json;

std::vector<int> minus_sorted(const std::vector<int>& a, const std::vector<int>& b) {
  std::vector<int> out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

void validate_plan(const Matrix01& m, const ShufflePlan& p) {
  int n = m.n();
  if (p.i1 < 0 || p.i1 >= n || p.i2 < 0 || p.i2 >= n || p.i1 == p.i2)
    throw std::invalid_argument("plan: bad row pair");
  CoExSets ce = m.co_ex_sets(p.i1, p.i2);
  std::vector<int> a1 = minus_sorted(ce.ex12, p.frozen);
  std::vector<int> a2 = minus_sorted(ce.ex21, p.frozen);
  auto contains = [](const std::vector<int>& v, int x) {
    return std::binary_search(v.begin(), v.end(), x);
  };
  if ((int)p.S1.size() != p.s || (int)p.S2.size() != p.s ||
      (int)p.pi.size() != p.s || (int)p.xi.size() != p.s)
    throw std::invalid_argument("plan: size mismatch");
  for (int j : p.S1)
    if (!contains(a1, j)) throw std::invalid_argument("plan: S1 not in Ex12 \\ frozen");
  for (int j : p.S2)
    if (!contains(a2, j)) throw std::invalid_argument("plan: S2 not in Ex21 \\ frozen");
  std::set<int> seen;
  for (int k = 0; k < p.s; ++k) {
    if (p.pi[k].first != p.S1[k] || p.xi[k].first != p.S1[k])
      throw std::invalid_argument("plan: pairing keys must follow S1");
    if (!contains(p.S2, p.pi[k].second))
      throw std::invalid_argument("plan: pi image outside S2");
    if (!seen.insert(p.pi[k].second).second)
      throw std::invalid_argument("plan: pi not injective");
    if (p.xi[k].second != 1 && p.xi[k].second != -1)
      throw std::invalid_argument("plan: sign must be +-1");
  }
}

mpq_class sum_at(const std::vector<mpq_class>& u, const std::vector<int>& idx) {
  mpq_class s = 0;
  for (int j : idx) s += u[j];
  return s;
}

}  // namespace

std::string ShufflePlan::to_json() const {
  ordered_json j;
  j["i1"] = i1;
  j["i2"] = i2;
  j["frozen"] = frozen;
  j["s"] = s;
  j["S1"] = S1;
  j["S2"] = S2;
  ordered_json pj = ordered_json::array();
  for (auto& [a, b] : pi) pj.push_back({a, b});
  j["pi"] = pj;
  ordered_json xj = ordered_json::array();
  for (auto& [a, b] : xi) xj.push_back({a, b});
  j["xi"] = xj;
  return j.dump();
}

ShufflePlan ShufflePlan::from_json(const std::string& text) {
  ordered_json j = ordered_json::parse(text);
  ShufflePlan p;
  p.i1 = j.at("i1").get<int>();
  p.i2 = j.at("i2").get<int>();
  p.frozen = j.at("frozen").get<std::vector<int>>();
  p.s = j.at("s").get<int>();
  p.S1 = j.at("S1").get<std::vector<int>>();
  p.S2 = j.at("S2").get<std::vector<int>>();
  for (auto& e : j.at("pi")) p.pi.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
  for (auto& e : j.at("xi")) p.xi.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
  return p;
}

ShufflePlan make_restricted_plan(const Matrix01& m, int i1, int i2,
                                 const std::vector<int>& frozen, int s,
                                 SplitMix64& rng) {
  ShufflePlan p;
  p.i1 = i1;
  p.i2 = i2;
  p.frozen = frozen;
  std::sort(p.frozen.begin(), p.frozen.end());
  p.frozen.erase(std::unique(p.frozen.begin(), p.frozen.end()), p.frozen.end());
  CoExSets ce = m.co_ex_sets(i1, i2);
  std::vector<int> a1 = minus_sorted(ce.ex12, p.frozen);
  std::vector<int> a2 = minus_sorted(ce.ex21, p.frozen);
  if (s < 0 || s > (int)std::min(a1.size(), a2.size()))
    throw std::invalid_argument("restricted plan: s exceeds available columns");
  p.s = s;
  p.S1 = rng.subset(a1, s);
  p.S2 = rng.subset(a2, s);
  std::vector<int> image = p.S2;
  rng.shuffle(image);
  for (int k = 0; k < s; ++k) {
    p.pi.emplace_back(p.S1[k], image[k]);
    p.xi.emplace_back(p.S1[k], rng.coin() ? 1 : -1);
  }
  validate_plan(m, p);
  return p;
}

ShufflePlan make_shuffle_plan(const Matrix01& m, int i1, int i2, SplitMix64& rng) {
  CoExSets ce = m.co_ex_sets(i1, i2);
  if (ce.ex12.size() != ce.ex21.size())
    throw std::invalid_argument("full plan: exclusive sets differ in size");
  return make_restricted_plan(m, i1, i2, {}, (int)ce.ex12.size(), rng);
}

Matrix01 apply_plan(const Matrix01& m, const ShufflePlan& plan) {
  validate_plan(m, plan);
  Matrix01 out = m;
  for (int k = 0; k < plan.s; ++k) {
    if (plan.xi[k].second == 1) continue;  // keep the pair as is
    int j = plan.pi[k].first, pj = plan.pi[k].second;
    // trade: j leaves row i1 for i2, pi(j) leaves i2 for i1
    out.set_entry(plan.i1, j, false);
    out.set_entry(plan.i2, j, true);
    out.set_entry(plan.i2, pj, false);
    out.set_entry(plan.i1, pj, true);
  }
  return out;
}

WalkDecomposition walk_decomposition(const Matrix01& m, const ShufflePlan& plan,
                                     const std::vector<mpq_class>& u) {
  validate_plan(m, plan);
  if ((int)u.size() != m.n()) throw std::invalid_argument("walk: dimension mismatch");
  CoExSets ce = m.co_ex_sets(plan.i1, plan.i2);
  WalkDecomposition w;
  mpq_class r1 = sum_at(u, ce.co) + sum_at(u, ce.ex12);
  mpq_class r2 = sum_at(u, ce.co) + sum_at(u, ce.ex21);
  w.A = (r1 + r2) / 2;
  w.offset = (sum_at(u, minus_sorted(ce.ex12, plan.S1)) -
              sum_at(u, minus_sorted(ce.ex21, plan.S2))) /
             2;
  w.walk = 0;
  for (int k = 0; k < plan.s; ++k) {
    int j = plan.pi[k].first, pj = plan.pi[k].second;
    mpq_class inc = (u[j] - u[pj]) / 2;
    w.increments[j] = inc;
    if (inc != 0)
      w.steps.push_back(j);
    else
      w.flats.push_back(j);
    w.walk += plan.xi[k].second * inc;
  }
  return w;
}

DeterminantWalk determinant_walk(const Matrix01& m, const ShufflePlan& plan,
                                 const std::vector<mpq_class>& u1,
                                 const std::vector<mpq_class>& u2) {
  validate_plan(m, plan);
  int n = m.n();
  if ((int)u1.size() != n || (int)u2.size() != n)
    throw std::invalid_argument("determinant walk: dimension mismatch");
  auto row_dot = [&](int i, const std::vector<mpq_class>& u) {
    mpq_class s = 0;
    for (int j : m.neighborhood(i)) s += u[j];
    return s;
  };
  mpq_class c1 = row_dot(plan.i1, u1) + row_dot(plan.i2, u1);  // (R1+R2).u1
  mpq_class c2 = row_dot(plan.i1, u2) + row_dot(plan.i2, u2);  // (R1+R2).u2
  DeterminantWalk dw;
  dw.v.resize(n);
  for (int j = 0; j < n; ++j) dw.v[j] = c2 * u1[j] - c1 * u2[j];
  dw.d_before = row_dot(plan.i1, u1) * row_dot(plan.i2, u2) -
                row_dot(plan.i1, u2) * row_dot(plan.i2, u1);
  Matrix01 after = apply_plan(m, plan);
  auto row_dot_after = [&](int i, const std::vector<mpq_class>& u) {
    mpq_class s = 0;
    for (int j : after.neighborhood(i)) s += u[j];
    return s;
  };
  dw.d_after = row_dot_after(plan.i1, u1) * row_dot_after(plan.i2, u2) -
               row_dot_after(plan.i1, u2) * row_dot_after(plan.i2, u1);
  WalkDecomposition wv = walk_decomposition(m, plan, dw.v);
  dw.walk_value = wv.walk + wv.offset;
  mpq_class all_keep = 0;
  for (const auto& [j, inc] : wv.increments) all_keep += inc;
  dw.all_keep_value = all_keep + wv.offset;
  return dw;
}

std::vector<int> cross_set(const ShufflePlan& plan, int k) {
  std::vector<int> out;
  for (int t = 0; t < plan.s; ++t)
    if (plan.pi[t].first < k && plan.pi[t].second >= k) out.push_back(plan.pi[t].first);
  return out;
}

mpq_class cross_set_expected(const ShufflePlan& plan, int k) {
  if (plan.s == 0) return 0;
  long s1_in = 0, s2_out = 0;
  for (int j : plan.S1)
    if (j < k) ++s1_in;
  for (int j : plan.S2)
    if (j >= k) ++s2_out;
  mpq_class e(s1_in * s2_out, plan.s);
  e.canonicalize();
  return e;
}

PatchResult locate_patches(const Matrix01& m, const std::vector<int>& sigma,
                           double patch_frac, double trigger_frac) {
  int n = m.n();
  int k = (int)sigma.size();
  if (2 * k > n) throw std::invalid_argument("locate_patches: 2k must not exceed n");
  std::vector<bool> hit(n, false);
  for (int j = 0; j < k; ++j) {
    int t = sigma[j];
    if (t < n - k || t >= n || hit[t])
      throw std::invalid_argument("locate_patches: sigma must biject [0,k) onto [n-k,n)");
    hit[t] = true;
  }
  int d = m.regularity().d;
  if (d < 0) throw std::invalid_argument("locate_patches: matrix not regular");
  // selection needs the trigger, and a selected pair must also clear the
  // certified patch size; with the defaults the trigger dominates
  double trigger = std::max(trigger_frac, patch_frac) * d;
  // rows hitting column a but not column b
  auto col_exclusive = [&](int a, int b) {
    std::vector<int> rows;
    for (int i = 0; i < n; ++i)
      if (m.get(i, a) && !m.get(i, b)) rows.push_back(i);
    return rows;
  };
  PatchResult res;
  std::vector<bool> fixed(n, false);
  std::vector<int> fix0;
  for (int i = 0; i < k; ++i) {
    fixed[i] = true;
    fix0.push_back(i);
  }
  res.fix_seq.push_back(fix0);
  std::vector<bool> used(k, false);
  for (;;) {
    int pick = -1;
    std::vector<int> plus, minus;
    for (int j = 0; j < k; ++j) {
      if (used[j]) continue;
      std::vector<int> p, q;
      for (int i : col_exclusive(j, sigma[j]))
        if (!fixed[i]) p.push_back(i);
      if ((double)p.size() < trigger) continue;
      for (int i : col_exclusive(sigma[j], j))
        if (!fixed[i]) q.push_back(i);
      if ((double)q.size() < trigger) continue;
      pick = j;
      plus = std::move(p);
      minus = std::move(q);
      break;
    }
    if (pick < 0) break;
    used[pick] = true;
    res.j_seq.push_back(pick);
    for (int i : plus) fixed[i] = true;
    for (int i : minus) fixed[i] = true;
    std::vector<int> fix_now;
    for (int i = 0; i < n; ++i)
      if (fixed[i]) fix_now.push_back(i);
    res.fix_seq.push_back(fix_now);
    res.patches.emplace_back(std::move(plus), std::move(minus));
    ++res.m;
  }
  return res;
}

}  // namespace rrdlab
