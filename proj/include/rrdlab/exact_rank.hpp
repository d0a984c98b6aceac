// exact_rank.hpp - exact linear algebra over Z/Q for small integer matrices:
// mod-p rank, fraction-free corank with verified rational kernel, level-set
// profiles of vectors, and the kernel-witness normal forms.
#pragma once

#include <gmpxx.h>

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "rrdlab/matrix01.hpp"
#include "rrdlab/rng.hpp"

namespace rrdlab {

// 20 largest primes below 2^31; residue products fit in uint64
extern const uint32_t kRankPrimes[20];

int rank_mod_p(const IntMat& a, uint32_t p);

struct RankResult {
  int rank = 0;
  int corank = 0;
  // kernel basis, one vector per free column; each vector has its first
  // nonzero coordinate scaled to 1 and is re-verified by multiplication
  std::vector<std::vector<mpq_class>> kernel;
  std::string method;
};

// fraction-free (Bareiss) elimination over mpz, rational back-substitution
RankResult corank_exact(const IntMat& a);

// two random-prime screens; a full mod-p rank certifies nonsingularity, a
// doubly deficient screen is confirmed by exact elimination
bool is_singular(const IntMat& a, SplitMix64& rng);

struct LevelSetProfile {
  std::map<mpq_class, int> levels;  // value -> multiplicity, zero included
  mpq_class top_value;              // value of the largest level set
  mpq_class top_fraction;           // its multiplicity / n
  mpq_class support_fraction;       // nonzero coordinates / n
};
LevelSetProfile level_profile(const std::vector<mpq_class>& x);

// kernel vector (M x = 0) with distinguished level lam  ->  vector y vanishing
// on the lam-level set with M y = 0 (lam = 0, y = -x) or M y = 1 (lam != 0,
// y = (lam*1 - x) / (lam*d)). Throws if M x != 0 or lam*d = 0 misuse.
std::vector<mpq_class> kernel_witness_to_sparse(const Matrix01& m,
                                                const std::vector<mpq_class>& x,
                                                const mpq_class& lam);

// inverse direction: y with M y = 0 maps to (x = y, lam = 0); y with M y = 1
// maps to (x = y - (1/d) 1, lam = -1/d). Throws if M y is neither 0 nor 1.
std::pair<std::vector<mpq_class>, mpq_class> sparse_to_kernel_witness(
    const std::vector<mpq_class>& y, const Matrix01& m);

// membership of x in the two structured-kernel classes at a row pair:
// some level set puts more than eps1*d columns into both neighborhoods
bool structured_set_membership(const std::vector<mpq_class>& x, const Matrix01& m,
                               int i1, int i2, const mpq_class& eps1);
// some level set holds more than eps2 * p(1-p) n of the exclusive columns
bool h2_membership(const std::vector<mpq_class>& x, const Matrix01& m, int i1,
                   int i2, const mpq_class& eps2);

struct CenteredSpectrum {
  int corank = 0;               // corank of 2M - J
  bool ones_in_kernel = false;  // (2M - J) 1 == 0
  int matrix_corank = 0;        // corank of M itself
};
// build Xi0 = 2M - J for a sampled M with d = n/2 and factor its kernel
CenteredSpectrum centered_kernel_check(int n, SplitMix64& rng);
CenteredSpectrum centered_kernel_check(const Matrix01& m);

// every listed row lies in the exact rational span of the remaining rows
bool rows_in_span_of_rest(const Matrix01& m, const std::vector<int>& rows);

// rational IO helpers ("p/q" or "p")
std::string rat_str(const mpq_class& q);
mpq_class parse_rat(const std::string& s);

}  // namespace rrdlab
