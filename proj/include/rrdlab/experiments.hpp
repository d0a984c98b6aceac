// experiments.hpp - Monte Carlo laboratory: singularity rate estimation over
// (n, d) grids for plain and sign-flipped samples, the 2-regular cycle-parity
// experiment against its exact benchmark, permutation-sum singularity, the
// signed-sum atom oracle, pushforward audits for the shuffle, and
// deterministic JSON/CSV reporting.
#pragma once

#include <gmpxx.h>

#include <optional>
#include <string>
#include <vector>

#include "rrdlab/matrix01.hpp"
#include "rrdlab/rng.hpp"

namespace rrdlab {

struct MCEstimate {
  long long trials = 0;
  long long hits = 0;
  double p_hat = 0.0;
  double ci_low = 0.0, ci_high = 0.0;  // Wilson 95%
  uint64_t seed = 0;
  double wall_time = 0.0;  // seconds; kept out of report files for determinism
};
// Wilson score interval, z = 1.9599639845400545
std::pair<double, double> wilson95(long long hits, long long trials);
MCEstimate make_estimate(long long hits, long long trials, uint64_t seed,
                         double wall_time);

struct Cell {
  int n = 0, d = 0;
};

struct ExperimentSpec {
  std::string name;
  std::vector<Cell> grid;
  long long trials = 1000;
  std::string sampler_mode = "auto";  // auto | exact | mcmc
  long long mcmc_steps = -1;          // -1 = default formula
  uint64_t seed = 1;
  int threads = 1;
  std::string out_path;  // basename; writers add .json / .csv
};

struct CellResult {
  Cell cell;
  MCEstimate plain;        // singularity of M
  MCEstimate sign_flipped; // singularity of M with iid sign flips
};
// per trial: one matrix draw, tested plain and with fresh signs; trial streams
// derive from (seed, cell index, trial index) so any thread split agrees
std::vector<CellResult> mc_singularity(const ExperimentSpec& spec);

struct ParityRow {
  int n = 0;
  MCEstimate singular;           // empirical singular fraction
  mpq_class benchmark;           // exact 1 - q_n for the matrix model
  mpq_class parity_probability;  // q_n: all union cycles odd, cycle weight 1/2
  mpq_class derangement_reference;  // same probability under uniform derangements
  bool within_ci = false;
};
// 2-regular matrices are unions of two disjoint permutations; singularity is
// equivalent to an even cycle in the union graph. The matrix model weights a
// cycle type by 2^-(number of cycles), which is NOT the uniform derangement
// law; both exact values are reported. Runs the switch chain at twice the
// default step count (measured equilibration shortfall at d = 2).
std::vector<ParityRow> d2_cycle_experiment(const std::vector<int>& ns,
                                           long long trials, uint64_t seed,
                                           int threads);
mpq_class d2_parity_benchmark(int n);             // matrix-model q_n
mpq_class derangement_parity_probability(int n);  // uniform-derangement q_n

struct PermSumRow {
  int n = 0;
  MCEstimate singular;  // P(P1 + P2 singular), P1, P2 iid uniform permutations
};
std::vector<PermSumRow> perm_sum_experiment(const std::vector<int>& ns,
                                            long long trials, uint64_t seed,
                                            int threads);

struct AtomResult {
  int m = 0;
  mpq_class max_atom;   // max_c P(sum eps_i x_i = c), eps iid +-1
  mpq_class atom_value; // a c attaining it
  mpq_class bound;      // C(m, floor(m/2)) / 2^m, valid for full support
  bool attains_bound = false;
  std::string method;   // "direct" (m <= 20) or "meet-in-middle" (m <= 24)
};
// exact atom maximum of the signed sum of a full-support rational vector
AtomResult signed_sum_atom(const std::vector<mpq_class>& x);

struct PushforwardAudit {
  std::string mode;  // "exact" or "chi2"
  bool pass = false;
  mpq_class tv;          // exact mode: total variation to uniform
  double chi2 = 0.0;     // chi2 mode
  double chi2_crit = 0.0;
  long long dof = 0;
  long long trials = 0;
  long long states = 0;
};
// exact mode enumerates the class and every plan at rows (i1, i2), pushes the
// rational mass forward and demands TV = 0 to the uniform law; chi2 mode
// samples full shuffles of exact-uniform draws and applies a 99% screen
PushforwardAudit coupling_audit_exact(int n, int d, int i1, int i2);
PushforwardAudit coupling_audit_restricted(int n, int d, int i1, int i2,
                                           const std::vector<int>& frozen, int s);
PushforwardAudit coupling_audit_chi2(int n, int d, int i1, int i2,
                                     long long trials, uint64_t seed);

// chi-square upper critical value at level 0.99 (Wilson-Hilferty)
double chi2_crit99(long long dof);

// writes <out>.json and <out>.csv; both are byte-stable for a fixed seed
// (wall-time fields are omitted). An empty grid throws before any file is
// touched. CSV columns: n,d,trials,hits,p_hat,ci_low,ci_high,seed,model.
void run_report(const ExperimentSpec& spec, const std::vector<CellResult>& rows);

std::string format_double(double v);  // shortest round-trip decimal

}  // namespace rrdlab
