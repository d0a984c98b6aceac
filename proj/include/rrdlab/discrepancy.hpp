// discrepancy.hpp - edge-distribution audits for d-regular 0/1 matrices:
// codegree balance, bilinear edge deviations, large-minor and thin-minor
// discrepancy, vertex expansion, the combined goodness check, hypergeometric
// concentration for random row images, and the bad-pair audit.
#pragma once

#include <gmpxx.h>

#include <optional>
#include <string>
#include <vector>

#include "rrdlab/matrix01.hpp"
#include "rrdlab/rng.hpp"

namespace rrdlab {

struct AuditConfig {
  mpq_class delta{1, 2};   // codegree tolerance
  mpq_class eps{1, 2};     // large-minor deviation cap
  mpq_class eps0{1, 2};    // thin-minor density cap
  mpq_class gamma{1, 10};  // expansion rate
  mpq_class c1{1, 10};     // expansion rate cap used by the combined check
  mpq_class c2{3, 10};     // dense-pair density floor
  mpq_class C2 = 8;        // dense-pair size threshold factor
  mpq_class C0 = 1;        // large-minor size threshold factor
  long budget = 1000000;  // max family size for exhaustive sweeps
  int sample_per_class = 200;  // sampled subsets per size class otherwise
};

struct AuditReport {
  std::string name;
  bool pass = false;
  bool family_empty = false;   // nothing to check at these parameters
  std::string mode;            // "exact" or "sampled"
  long long checked = 0;
  double margin = 0.0;         // smallest slack seen (negative iff fail)
  std::string margin_exact;    // rational slack when the comparison is rational
  std::string witness;         // extremal configuration, JSON fragment
  std::string to_json() const;
  std::string to_table_row() const;
};

// every row pair and column pair has exclusive size within delta of p(1-p)n
AuditReport check_codegree(const Matrix01& m, const mpq_class& delta);

struct EdgeDeviation {
  long long e = 0;       // edges A -> B
  mpq_class mu;          // p |A| |B|
  mpq_class mu_hat;      // p min(|A||B|, (n-|A|)(n-|B|))
  mpq_class tau;         // |e - mu| / mu_hat
  bool tau_infinite = false;  // mu_hat = 0 with e != mu
};
EdgeDeviation edge_deviation(const Matrix01& m, const std::vector<int>& A,
                             const std::vector<int>& B);

// all pairs with min(|A|,|B|) >= (C0/eps^2) log(n)/p have tau <= eps
AuditReport check_large_minors(const Matrix01& m, const mpq_class& eps,
                               const AuditConfig& cfg, SplitMix64& rng);

// no small row set S pushes eps0*d*|S| edges through at most
// (eps0*gamma/log n) d |S| columns (or rows, transposed direction); the worst
// B of each size is the top-mass one, so only that one is tested
AuditReport check_thin_minors(const Matrix01& m, const mpq_class& eps0,
                              const mpq_class& gamma, const AuditConfig& cfg,
                              SplitMix64& rng);

// |N(S)| >= (gamma/log n) d |S| for all S up to s0 = (log n / 2 gamma)(n/d)
AuditReport check_expansion(const Matrix01& m, const mpq_class& gamma,
                            const AuditConfig& cfg, SplitMix64& rng);

struct GoodnessReport {
  AuditReport degrees;       // min row/col degree >= d
  AuditReport degree_caps;   // max row/col degree <= d
  AuditReport expansion;
  AuditReport dense_pairs;   // e(A,B) >= c2 (d/n)|A||B| for large A, B
  bool pass = false;
  std::string to_json() const;
};
// combined structural goodness of a matrix dominating a d-regular one
GoodnessReport check_good_d(const Matrix01& m, int d, const AuditConfig& cfg,
                            SplitMix64& rng);

struct TailRow {
  double tau;
  double empirical;  // P(|e - mu| > tau * mu)
  double bound;      // 2 exp(-c tau^2/(1+tau) * |A||B|/m), c = 1/4
};
struct ConcentrationReport {
  long long trials = 0;
  double mean = 0.0, mean_expected = 0.0;
  mpq_class tv_to_hypergeometric;
  std::vector<TailRow> tails;
  bool mean_ok = false, tails_ok = false, pass = false;
};
// e = |sigma(A) cap B| for uniform permutations sigma of [0, m);
// compares against the exact hypergeometric law
ConcentrationReport sym_group_concentration(int m, const std::vector<int>& A,
                                            const std::vector<int>& B,
                                            long long trials, SplitMix64& rng);

struct BadPairAudit {
  std::vector<int> a_eps;          // rows with balanced image in B and Bc
  int a_eps_complement = 0;        // n - |A_eps|
  std::vector<int> s_eps_sizes;    // |S_eps(i)| for each i in a_eps
  int max_s_eps = 0;
};
// (i, i') is eps-bad when the exclusive set of i over i' barely meets B or the
// reverse exclusive set barely meets the complement of B
BadPairAudit bad_pair_audit(const Matrix01& m, const std::vector<int>& B,
                            const mpq_class& eps);

}  // namespace rrdlab
