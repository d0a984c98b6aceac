#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "rrdlab/coupling.hpp"
#include "rrdlab/matrix01.hpp"
#include "rrdlab/rng.hpp"
#include "rrdlab/sampler.hpp"

using namespace rrdlab;

static std::vector<mpq_class> random_rationals(int n, SplitMix64& rng) {
  std::vector<mpq_class> u(n);
  for (auto& v : u) {
    v = mpq_class((long)rng.range(-9, 9), (long)rng.range(1, 7));
    v.canonicalize();
  }
  return u;
}

static mpq_class row_dot(const Matrix01& m, int i, const std::vector<mpq_class>& u) {
  mpq_class s = 0;
  for (int j = 0; j < m.n(); ++j)
    if (m.get(i, j)) s += u[j];
  return s;
}

// random full or restricted plan over a sampled matrix; retries until the
// row pair has nonempty exclusive sets
static std::pair<Matrix01, ShufflePlan> random_instance(SplitMix64& rng,
                                                        int n_max = 12) {
  for (;;) {
    int n = rng.range(3, n_max);
    int d = rng.range(1, n - 1);
    Matrix01 m = sample_auto(n, d, rng);
    int i1 = rng.range(0, n - 2), i2 = rng.range(i1 + 1, n - 1);
    auto ce = m.co_ex_sets(i1, i2);
    if (ce.ex12.empty()) continue;
    if (rng.coin()) return {m, make_shuffle_plan(m, i1, i2, rng)};
    // restricted: random frozen subset and a legal s
    std::vector<int> frozen;
    for (int j = 0; j < n; ++j)
      if (rng.below(4) == 0) frozen.push_back(j);
    auto except = [&](const std::vector<int>& cols) {
      int c = 0;
      for (int j : cols)
        if (!std::binary_search(frozen.begin(), frozen.end(), j)) ++c;
      return c;
    };
    int cap = std::min(except(ce.ex12), except(ce.ex21));
    int s = (int)rng.below((uint64_t)cap + 1);
    return {m, make_restricted_plan(m, i1, i2, frozen, s, rng)};
  }
}

TEST_CASE("full plans select the whole exclusive sets") {
  SplitMix64 rng(83);
  for (int t = 0; t < 60; ++t) {
    int n = rng.range(3, 10);
    int d = rng.range(1, n - 1);
    Matrix01 m = sample_auto(n, d, rng);
    auto ce = m.co_ex_sets(0, 1);
    ShufflePlan p = make_shuffle_plan(m, 0, 1, rng);
    CHECK(p.S1 == ce.ex12);
    CHECK(p.S2 == ce.ex21);
    CHECK(p.s == (int)ce.ex12.size());
    CHECK(p.frozen.empty());
    std::set<int> targets;
    for (auto& [j, pj] : p.pi) {
      CHECK(std::binary_search(p.S1.begin(), p.S1.end(), j));
      CHECK(std::binary_search(p.S2.begin(), p.S2.end(), pj));
      targets.insert(pj);
    }
    CHECK(targets.size() == (size_t)p.s);
    for (auto& [j, sg] : p.xi) CHECK((sg == 1 || sg == -1));
  }
}

TEST_CASE("applying a plan trades exactly the negative pairs") {
  Matrix01 m = Matrix01::circulant(4, 2);
  // rows 0,1: co {1}, exclusive 0 vs 2
  ShufflePlan p;
  p.i1 = 0;
  p.i2 = 1;
  p.s = 1;
  p.S1 = {0};
  p.S2 = {2};
  p.pi = {{0, 2}};
  p.xi = {{0, -1}};
  Matrix01 after = apply_plan(m, p);
  CHECK(after.get(0, 1));
  CHECK(after.get(0, 2));
  CHECK(!after.get(0, 0));
  CHECK(after.get(1, 0));
  CHECK(after.get(1, 1));
  CHECK(!after.get(1, 2));
  for (int i = 2; i < 4; ++i)
    for (int j = 0; j < 4; ++j) CHECK(after.get(i, j) == m.get(i, j));
  p.xi = {{0, 1}};  // keep sign leaves the matrix alone
  CHECK(apply_plan(m, p) == m);
}

TEST_CASE("plans survive a JSON round trip bit-exactly") {
  SplitMix64 rng(89);
  for (int t = 0; t < 30; ++t) {
    auto [m, p] = random_instance(rng, 10);
    ShufflePlan q = ShufflePlan::from_json(p.to_json());
    CHECK(q.i1 == p.i1);
    CHECK(q.i2 == p.i2);
    CHECK(q.frozen == p.frozen);
    CHECK(q.s == p.s);
    CHECK(q.S1 == p.S1);
    CHECK(q.S2 == p.S2);
    CHECK(q.pi == p.pi);
    CHECK(q.xi == p.xi);
    CHECK(apply_plan(m, q) == apply_plan(m, p));
  }
}

TEST_CASE("plan replay preserves margins and the untouched rows") {
  SplitMix64 rng(97);
  for (int t = 0; t < 120; ++t) {
    auto [m, p] = random_instance(rng);
    Matrix01 after = apply_plan(m, p);
    int n = m.n();
    for (int j = 0; j < n; ++j) CHECK(after.col_sum(j) == m.col_sum(j));
    for (int i = 0; i < n; ++i) {
      CHECK(after.row_sum(i) == m.row_sum(i));
      if (i != p.i1 && i != p.i2)
        for (int j = 0; j < n; ++j) CHECK(after.get(i, j) == m.get(i, j));
    }
    // co columns never move
    for (int j : m.co_ex_sets(p.i1, p.i2).co) {
      CHECK(after.get(p.i1, j));
      CHECK(after.get(p.i2, j));
    }
  }
}

TEST_CASE("apply_plan rejects tampered plans") {
  SplitMix64 rng(101);
  Matrix01 m = Matrix01::circulant(6, 2);
  ShufflePlan p = make_shuffle_plan(m, 0, 2, rng);
  ShufflePlan bad = p;
  bad.S1 = {1};  // column 1 is shared, not exclusive
  bad.pi = {{1, bad.S2[0]}};
  bad.xi = {{1, 1}};
  CHECK_THROWS_AS(apply_plan(m, bad), std::invalid_argument);
  ShufflePlan bad2 = p;
  bad2.xi[0].second = 2;
  CHECK_THROWS_AS(apply_plan(m, bad2), std::invalid_argument);
}

TEST_CASE("restricted plans respect the frozen mask and size cap") {
  SplitMix64 rng(103);
  Matrix01 m = Matrix01::circulant(8, 3);
  auto ce = m.co_ex_sets(0, 4);
  REQUIRE(ce.ex12.size() == 3);
  std::vector<int> frozen = {ce.ex12[0], ce.ex21[0]};
  ShufflePlan p = make_restricted_plan(m, 0, 4, frozen, 2, rng);
  CHECK(p.s == 2);
  for (int j : p.S1) CHECK(j != frozen[0]);
  for (int j : p.S2) CHECK(j != frozen[1]);
  CHECK_THROWS_AS(make_restricted_plan(m, 0, 4, frozen, 3, rng),
                  std::invalid_argument);
  ShufflePlan empty = make_restricted_plan(m, 0, 4, frozen, 0, rng);
  CHECK(empty.s == 0);
  CHECK(apply_plan(m, empty) == m);
}

TEST_CASE("row sums decompose into anchor, offset, and walk") {
  SplitMix64 rng(107);
  for (int t = 0; t < 1000; ++t) {
    auto [m, p] = random_instance(rng);
    std::vector<mpq_class> u = random_rationals(m.n(), rng);
    WalkDecomposition w = walk_decomposition(m, p, u);
    Matrix01 after = apply_plan(m, p);
    CHECK(row_dot(after, p.i1, u) == w.A + w.offset + w.walk);
    CHECK(row_dot(after, p.i2, u) == w.A - w.offset - w.walk);
    CHECK(w.A * 2 == row_dot(m, p.i1, u) + row_dot(m, p.i2, u));
    // the anchor is invariant under the shuffle
    CHECK(row_dot(after, p.i1, u) + row_dot(after, p.i2, u) == w.A * 2);
    // walk = signed sum of increments; flats contribute nothing
    mpq_class acc = 0;
    for (auto& [j, sg] : p.xi) acc += sg * w.increments.at(j);
    CHECK(acc == w.walk);
    for (int j : w.flats) CHECK(w.increments.at(j) == 0);
    for (int j : w.steps) CHECK(w.increments.at(j) != 0);
    CHECK(w.steps.size() + w.flats.size() == (size_t)p.s);
  }
}

TEST_CASE("full plans have zero offset and all-keep plans recover the row") {
  SplitMix64 rng(109);
  for (int t = 0; t < 200; ++t) {
    int n = rng.range(3, 12);
    int d = rng.range(1, n - 1);
    Matrix01 m = sample_auto(n, d, rng);
    int i1 = rng.range(0, n - 2), i2 = rng.range(i1 + 1, n - 1);
    ShufflePlan p = make_shuffle_plan(m, i1, i2, rng);
    std::vector<mpq_class> u = random_rationals(n, rng);
    WalkDecomposition w = walk_decomposition(m, p, u);
    CHECK(w.offset == 0);
    // forcing every trade sign to keep replays the original row sum
    ShufflePlan keep = p;
    for (auto& [j, sg] : keep.xi) sg = 1;
    WalkDecomposition wk = walk_decomposition(m, keep, u);
    CHECK(w.A == wk.A);
    CHECK(w.increments == wk.increments);
    CHECK(row_dot(m, i1, u) == wk.A + wk.offset + wk.walk);
    CHECK(row_dot(m, i2, u) == wk.A - wk.offset - wk.walk);
  }
}

TEST_CASE("the 2x2 determinant walks along the same increments") {
  SplitMix64 rng(113);
  for (int t = 0; t < 1000; ++t) {
    auto [m, p] = random_instance(rng);
    std::vector<mpq_class> u1 = random_rationals(m.n(), rng);
    std::vector<mpq_class> u2 = random_rationals(m.n(), rng);
    DeterminantWalk dw = determinant_walk(m, p, u1, u2);
    Matrix01 after = apply_plan(m, p);
    mpq_class before = row_dot(m, p.i1, u1) * row_dot(m, p.i2, u2) -
                       row_dot(m, p.i1, u2) * row_dot(m, p.i2, u1);
    mpq_class target = row_dot(after, p.i1, u1) * row_dot(after, p.i2, u2) -
                       row_dot(after, p.i1, u2) * row_dot(after, p.i2, u1);
    CHECK(dw.d_before == before);
    CHECK(dw.d_after == target);
    CHECK(dw.walk_value == target);
    CHECK(dw.all_keep_value == before);
    // v folds both test vectors into one walk coordinate set
    mpq_class a1 = row_dot(m, p.i1, u1) + row_dot(m, p.i2, u1);
    mpq_class a2 = row_dot(m, p.i1, u2) + row_dot(m, p.i2, u2);
    for (int j = 0; j < m.n(); ++j) CHECK(dw.v[j] == a2 * u1[j] - a1 * u2[j]);
  }
}

TEST_CASE("boundary crossings average to the product formula") {
  // fix S1, S2 and average |cross| over every pairing: the expectation of
  // the hypergeometric overlap matches the closed form exactly
  ShufflePlan p;
  p.i1 = 0;
  p.i2 = 1;
  p.s = 3;
  p.S1 = {0, 1, 4};
  p.S2 = {2, 5, 6};
  int k = 3;
  std::vector<int> perm = {0, 1, 2};
  mpq_class avg = 0;
  int cnt = 0;
  do {
    p.pi.clear();
    p.xi.clear();
    for (int i = 0; i < 3; ++i) {
      p.pi.push_back({p.S1[i], p.S2[perm[i]]});
      p.xi.push_back({p.S1[i], 1});
    }
    avg += (long)cross_set(p, k).size();
    ++cnt;
  } while (std::next_permutation(perm.begin(), perm.end()));
  avg /= cnt;
  avg.canonicalize();
  CHECK(cnt == 6);
  CHECK(avg == cross_set_expected(p, k));
  CHECK(avg == mpq_class(4, 3));
  // inside-window source with outside partner is a crossing
  p.pi = {{0, 2}, {1, 5}, {4, 6}};
  p.xi = {{0, 1}, {1, 1}, {4, 1}};
  auto cs = cross_set(p, k);
  CHECK(cs == std::vector<int>{1});  // 0 -> 2 stays inside, 4 starts outside
}

TEST_CASE("cross expectation matches enumeration on random windows") {
  SplitMix64 rng(127);
  for (int t = 0; t < 25; ++t) {
    int s = rng.range(1, 4);
    std::vector<int> pool;
    for (int j = 0; j < 12; ++j) pool.push_back(j);
    ShufflePlan p;
    p.s = s;
    p.S1 = rng.subset(pool, s);
    std::vector<int> rest;
    for (int j : pool)
      if (!std::binary_search(p.S1.begin(), p.S1.end(), j)) rest.push_back(j);
    p.S2 = rng.subset(rest, s);
    int k = rng.range(0, 12);
    std::vector<int> perm(s);
    for (int i = 0; i < s; ++i) perm[i] = i;
    mpq_class avg = 0;
    int cnt = 0;
    do {
      p.pi.clear();
      p.xi.clear();
      for (int i = 0; i < s; ++i) {
        p.pi.push_back({p.S1[i], p.S2[perm[i]]});
        p.xi.push_back({p.S1[i], 1});
      }
      avg += (long)cross_set(p, k).size();
      ++cnt;
    } while (std::next_permutation(perm.begin(), perm.end()));
    avg /= cnt;
    avg.canonicalize();
    CHECK(avg == cross_set_expected(p, k));
  }
}

TEST_CASE("patch location walks the paired columns greedily") {
  // a flat matrix has no exclusive rows at all: the finder reports failure
  std::vector<int> sig4;
  for (int j = 0; j < 4; ++j) sig4.push_back(6 + j);
  auto p0 = locate_patches(Matrix01::ones(10), sig4);
  CHECK(p0.m == 0);
  CHECK(p0.patches.empty());
  REQUIRE(p0.fix_seq.size() == 1);
  CHECK(p0.fix_seq[0] == std::vector<int>{0, 1, 2, 3});

  SplitMix64 rng(131);
  Matrix01 m = sample_auto(30, 8, rng);
  std::vector<int> sig(4);
  for (int j = 0; j < 4; ++j) sig[j] = 26 + j;
  auto pr = locate_patches(m, sig);
  CHECK(pr.m >= 1);
  CHECK(pr.m <= 4);
  CHECK((int)pr.patches.size() == pr.m);
  CHECK((int)pr.j_seq.size() == pr.m);
  CHECK(pr.fix_seq.size() == (size_t)pr.m + 1);
  double threshold = 0.1 * 8;
  std::set<int> taken(pr.fix_seq[0].begin(), pr.fix_seq[0].end());
  for (int q = 0; q < pr.m; ++q) {
    const auto& [p1, p2] = pr.patches[q];
    CHECK((double)p1.size() >= threshold);
    CHECK((double)p2.size() >= threshold);
    std::set<int> merged(p1.begin(), p1.end());
    for (int i : p2) merged.insert(i);
    CHECK(merged.size() == p1.size() + p2.size());  // pair disjoint
    for (int i : merged) CHECK(taken.count(i) == 0);  // disjoint from fix
    for (int i : merged) taken.insert(i);
    // fixed set grows by exactly the new patch pair
    std::set<int> fx(pr.fix_seq[q + 1].begin(), pr.fix_seq[q + 1].end());
    CHECK(fx == taken);
  }
}

TEST_CASE("patch location validates the pairing") {
  Matrix01 m = Matrix01::circulant(10, 3);
  CHECK_THROWS_AS(locate_patches(m, {0, 0, 8, 9}), std::invalid_argument);
  CHECK_THROWS_AS(locate_patches(m, {4, 5, 6, 20}), std::invalid_argument);
}
