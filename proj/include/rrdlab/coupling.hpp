// coupling.hpp - the exclusive-column shuffle: plans, replay, the exact
// walk decomposition of shuffled row sums, the induced 2x2 determinant walk,
// boundary-crossing sets, and the greedy patch finder.
#pragma once

#include <gmpxx.h>

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "rrdlab/matrix01.hpp"
#include "rrdlab/rng.hpp"

namespace rrdlab {

// A plan is the full randomness of one shuffle at rows (i1, i2): the selected
// exclusive columns S1 (from Ex12 \ frozen) and S2 (from Ex21 \ frozen), the
// pairing pi: S1 -> S2, and the trade signs xi (+1 keep, -1 trade the pair).
// Serializes to JSON and replays bit-exactly.
struct ShufflePlan {
  int i1 = 0, i2 = 0;
  std::vector<int> frozen;  // sorted columns excluded from selection
  int s = 0;                // |S1| = |S2|
  std::vector<int> S1, S2;  // sorted
  std::vector<std::pair<int, int>> pi;    // (j, pi(j)), keyed by j in S1, sorted
  std::vector<std::pair<int, int>> xi;    // (j, +-1), keyed by j in S1, sorted

  std::string to_json() const;
  static ShufflePlan from_json(const std::string& text);
};

// full shuffle: frozen empty, S1 = Ex12, S2 = Ex21 whole
ShufflePlan make_shuffle_plan(const Matrix01& m, int i1, int i2, SplitMix64& rng);
// restricted: uniform s-subsets of Ex12 \ frozen and Ex21 \ frozen; requires
// s <= min of those sizes (s = 0 is the legal empty plan)
ShufflePlan make_restricted_plan(const Matrix01& m, int i1, int i2,
                                 const std::vector<int>& frozen, int s,
                                 SplitMix64& rng);

// validates the plan against m and returns the shuffled matrix; rows outside
// {i1, i2} and all column sums are untouched
Matrix01 apply_plan(const Matrix01& m, const ShufflePlan& plan);

// For a test vector u the shuffled row sums split exactly as
//   R~i1 . u = A + offset + walk,   R~i2 . u = A - offset - walk
// where A = (R_i1 + R_i2) . u / 2 is plan-invariant, offset collects the
// unselected exclusive columns (zero for full plans), and walk is the signed
// sum of half-differences over the selected pairs.
struct WalkDecomposition {
  mpq_class A;       // (R_i1 + R_i2) . u / 2
  mpq_class offset;  // (sum_{Ex12 \ S1} u - sum_{Ex21 \ S2} u) / 2
  mpq_class walk;    // sum_{j in S1} xi(j) * (u(j) - u(pi(j))) / 2
  std::map<int, mpq_class> increments;  // j -> (u(j) - u(pi(j))) / 2 over S1
  std::vector<int> steps;  // j in S1 with nonzero increment
  std::vector<int> flats;  // the rest of S1
};
WalkDecomposition walk_decomposition(const Matrix01& m, const ShufflePlan& plan,
                                     const std::vector<mpq_class>& u);

// 2x2 determinant D = det [[R_i1.u1, R_i1.u2], [R_i2.u1, R_i2.u2]] before and
// after the shuffle. With v = ((R_i1 + R_i2).u2) u1 - ((R_i1 + R_i2).u1) u2,
// D_after = walk(v) + offset(v) and D_before is the same expression with all
// trade signs +1.
struct DeterminantWalk {
  std::vector<mpq_class> v;
  mpq_class d_before;
  mpq_class d_after;
  mpq_class walk_value;      // walk(v) + offset(v) under the plan signs
  mpq_class all_keep_value;  // same with xi forced to +1 (equals d_before)
};
DeterminantWalk determinant_walk(const Matrix01& m, const ShufflePlan& plan,
                                 const std::vector<mpq_class>& u1,
                                 const std::vector<mpq_class>& u2);

// selected columns in the window [0, k) whose partner lands outside it
std::vector<int> cross_set(const ShufflePlan& plan, int k);
// exact expectation of |cross_set| over a uniform pairing of the same S1, S2
mpq_class cross_set_expected(const ShufflePlan& plan, int k);

// Greedy patch location for a column pairing sigma: [0,k) -> [n-k, n).
// Starting from the fixed row set [0,k), repeatedly take the smallest j whose
// transpose exclusive sets (rows hitting column j but not sigma(j), and vice
// versa) both exceed trigger*d outside the current fixed set; the two sets
// become a patch pair and join the fixed set. Patches are row sets.
struct PatchResult {
  int m = 0;  // number of patches found; 0 means failure
  std::vector<int> j_seq;
  std::vector<std::vector<int>> fix_seq;  // fix_seq[0] = [0,k), one entry per patch after
  std::vector<std::pair<std::vector<int>, std::vector<int>>> patches;
};
PatchResult locate_patches(const Matrix01& m, const std::vector<int>& sigma,
                           double patch_frac = 0.01, double trigger_frac = 0.1);

}  // namespace rrdlab
