// rrdlab - command line laboratory for d-regular 0/1 matrix experiments.
// All indices on this surface are 1-based; the library is 0-based.
// Exit codes: 0 pass, 1 audit failure or internal inconsistency, 2 usage error.
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "rrdlab/coupling.hpp"
#include "rrdlab/discrepancy.hpp"
#include "rrdlab/exact_rank.hpp"
#include "rrdlab/experiments.hpp"
#include "rrdlab/matrix01.hpp"
#include "rrdlab/rng.hpp"
#include "rrdlab/sampler.hpp"

using nlohmann::ordered_json;
using namespace rrdlab;

namespace {

struct GlobalOpts {
  uint64_t seed = 1;
  int threads = 1;
  std::string out;
  std::string format = "text";
};

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(out_path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open output path: " + out_path);
  f << text;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else if (!std::isspace((unsigned char)c)) {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

int parse_int(const std::string& s) {
  size_t pos = 0;
  int v = 0;
  try {
    v = std::stoi(s, &pos);
  } catch (const std::exception&) {
    throw std::invalid_argument("not an integer: '" + s + "'");
  }
  if (pos != s.size()) throw std::invalid_argument("not an integer: '" + s + "'");
  return v;
}

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  for (const auto& tok : split(s, ','))
    if (!tok.empty()) out.push_back(parse_int(tok));
  if (out.empty()) throw std::invalid_argument("empty integer list");
  return out;
}

std::vector<Cell> parse_grid(const std::string& s) {
  std::vector<Cell> out;
  for (const auto& tok : split(s, ',')) {
    if (tok.empty()) continue;
    auto pos = tok.find(':');
    if (pos == std::string::npos)
      throw std::invalid_argument("grid cells are n:d, got '" + tok + "'");
    out.push_back(
        {parse_int(tok.substr(0, pos)), parse_int(tok.substr(pos + 1))});
  }
  if (out.empty()) throw std::invalid_argument("empty grid");
  return out;
}

std::vector<mpq_class> parse_rat_list(const std::string& s) {
  std::vector<mpq_class> out;
  for (const auto& tok : split(s, ','))
    if (!tok.empty()) out.push_back(parse_rat(tok));
  if (out.empty()) throw std::invalid_argument("empty rational list");
  return out;
}

std::string q_text(const mpq_class& q) {
  return rat_str(q) + " (" + format_double(q.get_d()) + ")";
}

Matrix01 read_matrix(const std::string& path) {
  std::ostringstream buf;
  if (path == "-") {
    buf << std::cin.rdbuf();
  } else {
    std::ifstream f(path);
    if (!f) throw std::invalid_argument("cannot read matrix file: " + path);
    buf << f.rdbuf();
  }
  return Matrix01::parse(buf.str());
}

std::string bool_text(bool b) { return b ? "yes" : "no"; }

ordered_json estimate_json(const MCEstimate& e) {
  ordered_json o;
  o["trials"] = e.trials;
  o["hits"] = e.hits;
  o["p_hat"] = e.p_hat;
  o["ci_low"] = e.ci_low;
  o["ci_high"] = e.ci_high;
  return o;
}

// ---- sample ----------------------------------------------------------------

struct SampleOpts {
  int n = 0, d = 0;
  std::string mode = "auto";
  long long steps = -1;
  int count = 1;
  bool signed_draw = false;
};

int run_sample(const GlobalOpts& g, const SampleOpts& o) {
  std::ostringstream out;
  if (o.mode == "enumerate") {
    if (o.signed_draw)
      throw std::invalid_argument("--signed does not combine with enumerate");
    for (const auto& m : enumerate_all(o.n, o.d)) out << m.to_text();
    emit(out.str(), g.out);
    return 0;
  }
  SplitMix64 rng(g.seed);
  long long steps = o.steps >= 0 ? o.steps : default_mcmc_steps(o.n, o.d);
  for (int k = 0; k < o.count; ++k) {
    Matrix01 m = [&] {
      if (o.mode == "exact") return sample_exact(o.n, o.d, rng);
      if (o.mode == "mcmc") return sample_mcmc(o.n, o.d, steps, rng);
      if (o.mode == "auto") return sample_auto(o.n, o.d, rng);
      throw std::invalid_argument("mode must be auto, exact, mcmc, or enumerate");
    }();
    if (o.signed_draw)
      out << hadamard(m, sample_signs(o.n, rng)).to_text();
    else
      out << m.to_text();
  }
  emit(out.str(), g.out);
  return 0;
}

// ---- count -----------------------------------------------------------------

int run_count(const GlobalOpts& g, int n, int d) {
  CountResult r = evaluate_asymptotic_count(n, d);
  std::string exact = r.exact ? r.exact->get_str() : "";
  std::ostringstream out;
  if (g.format == "json") {
    ordered_json j;
    j["n"] = n;
    j["d"] = d;
    if (r.exact)
      j["exact"] = exact;
    else
      j["exact"] = nullptr;
    j["log_asymptotic"] = (double)r.log_asymptotic;
    if (r.ratio)
      j["ratio"] = *r.ratio;
    else
      j["ratio"] = nullptr;
    out << j.dump(2) << "\n";
  } else if (g.format == "csv") {
    out << "n,d,exact,log_asymptotic,ratio\n";
    out << n << "," << d << "," << exact << ","
        << format_double((double)r.log_asymptotic) << ","
        << (r.ratio ? format_double(*r.ratio) : "") << "\n";
  } else {
    out << "n=" << n << " d=" << d << "\n";
    out << "exact=" << (r.exact ? exact : "(out of budget)") << "\n";
    out << "log_asymptotic=" << format_double((double)r.log_asymptotic) << "\n";
    if (r.ratio) out << "ratio=" << format_double(*r.ratio) << "\n";
  }
  emit(out.str(), g.out);
  return 0;
}

// ---- mc-singularity ---------------------------------------------------------

std::string cells_csv(const std::vector<CellResult>& rows) {
  std::string csv = "n,d,trials,hits,p_hat,ci_low,ci_high,seed,model\n";
  auto row = [&](const Cell& c, const MCEstimate& e, const char* model) {
    csv += std::to_string(c.n) + "," + std::to_string(c.d) + "," +
           std::to_string(e.trials) + "," + std::to_string(e.hits) + "," +
           format_double(e.p_hat) + "," + format_double(e.ci_low) + "," +
           format_double(e.ci_high) + "," + std::to_string(e.seed) + "," +
           model + "\n";
  };
  for (const auto& r : rows) {
    row(r.cell, r.plain, "plain");
    row(r.cell, r.sign_flipped, "signs");
  }
  return csv;
}

std::string cells_text(const std::vector<CellResult>& rows) {
  std::ostringstream out;
  out << "n    d    model  trials    hits  p_hat      ci95\n";
  auto line = [&](const Cell& c, const MCEstimate& e, const char* model) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%-4d %-4d %-6s %-9lld %-5lld %-10.6f [%.6f, %.6f]\n",
                  c.n, c.d, model, e.trials, e.hits, e.p_hat, e.ci_low,
                  e.ci_high);
    out << buf;
  };
  for (const auto& r : rows) {
    line(r.cell, r.plain, "plain");
    line(r.cell, r.sign_flipped, "signs");
  }
  return out.str();
}

int run_mc(const GlobalOpts& g, const std::string& grid, long long trials,
           const std::string& mode, long long steps) {
  ExperimentSpec spec;
  spec.name = "mc-singularity";
  spec.grid = parse_grid(grid);
  spec.trials = trials;
  spec.sampler_mode = mode;
  spec.mcmc_steps = steps;
  spec.seed = g.seed;
  spec.threads = g.threads;
  auto rows = mc_singularity(spec);
  if (!g.out.empty()) {
    spec.out_path = g.out;
    run_report(spec, rows);
  }
  if (g.format == "json") {
    ordered_json j;
    j["name"] = spec.name;
    j["seed"] = spec.seed;
    j["trials"] = spec.trials;
    j["cells"] = ordered_json::array();
    for (const auto& r : rows) {
      ordered_json c;
      c["n"] = r.cell.n;
      c["d"] = r.cell.d;
      c["plain"] = estimate_json(r.plain);
      c["sign_flipped"] = estimate_json(r.sign_flipped);
      j["cells"].push_back(std::move(c));
    }
    std::cout << j.dump(2) << "\n";
  } else if (g.format == "csv") {
    std::cout << cells_csv(rows);
  } else {
    std::cout << cells_text(rows);
    if (!g.out.empty())
      std::cout << "report written to " << g.out << ".json / " << g.out
                << ".csv\n";
  }
  return 0;
}

// ---- d2-cycles ----------------------------------------------------------------

int run_d2(const GlobalOpts& g, const std::string& ns_text, long long trials) {
  auto rows = d2_cycle_experiment(parse_int_list(ns_text), trials, g.seed,
                                  g.threads);
  std::ostringstream out;
  if (g.format == "json") {
    ordered_json j = ordered_json::array();
    for (const auto& r : rows) {
      ordered_json o;
      o["n"] = r.n;
      o["singular"] = estimate_json(r.singular);
      o["benchmark"] = rat_str(r.benchmark);
      o["parity_probability"] = rat_str(r.parity_probability);
      o["derangement_reference"] = rat_str(r.derangement_reference);
      o["within_ci"] = r.within_ci;
      j.push_back(std::move(o));
    }
    out << j.dump(2) << "\n";
  } else if (g.format == "csv") {
    out << "n,trials,hits,p_hat,ci_low,ci_high,benchmark_exact,benchmark,"
           "derangement_exact,derangement,within_ci\n";
    for (const auto& r : rows) {
      mpq_class dref = mpq_class(1) - r.derangement_reference;
      out << r.n << "," << r.singular.trials << "," << r.singular.hits << ","
          << format_double(r.singular.p_hat) << ","
          << format_double(r.singular.ci_low) << ","
          << format_double(r.singular.ci_high) << "," << rat_str(r.benchmark)
          << "," << format_double(r.benchmark.get_d()) << ","
          << rat_str(dref) << "," << format_double(dref.get_d()) << ","
          << (r.within_ci ? 1 : 0) << "\n";
    }
  } else {
    for (const auto& r : rows) {
      out << "n=" << r.n << " trials=" << r.singular.trials
          << " singular=" << format_double(r.singular.p_hat) << " ci=["
          << format_double(r.singular.ci_low) << ", "
          << format_double(r.singular.ci_high) << "]\n";
      out << "  benchmark (cycle weight 1/2): " << q_text(r.benchmark)
          << "  within_ci=" << bool_text(r.within_ci) << "\n";
      out << "  uniform-derangement reference: "
          << q_text(mpq_class(1) - r.derangement_reference) << "\n";
    }
  }
  emit(out.str(), g.out);
  return 0;
}

// ---- perm-sum ----------------------------------------------------------------

int run_perm_sum(const GlobalOpts& g, const std::string& ns_text,
                 long long trials) {
  auto rows =
      perm_sum_experiment(parse_int_list(ns_text), trials, g.seed, g.threads);
  std::ostringstream out;
  if (g.format == "json") {
    ordered_json j = ordered_json::array();
    for (const auto& r : rows) {
      ordered_json o;
      o["n"] = r.n;
      o["singular"] = estimate_json(r.singular);
      j.push_back(std::move(o));
    }
    out << j.dump(2) << "\n";
  } else if (g.format == "csv") {
    out << "n,trials,hits,p_hat,ci_low,ci_high\n";
    for (const auto& r : rows)
      out << r.n << "," << r.singular.trials << "," << r.singular.hits << ","
          << format_double(r.singular.p_hat) << ","
          << format_double(r.singular.ci_low) << ","
          << format_double(r.singular.ci_high) << "\n";
  } else {
    for (const auto& r : rows)
      out << "n=" << r.n << " trials=" << r.singular.trials
          << " singular=" << format_double(r.singular.p_hat) << " ci=["
          << format_double(r.singular.ci_low) << ", "
          << format_double(r.singular.ci_high) << "]\n";
  }
  emit(out.str(), g.out);
  return 0;
}

// ---- erdos -------------------------------------------------------------------

int run_erdos(const GlobalOpts& g, const std::string& x_text, int all_ones) {
  if (x_text.empty() == (all_ones == 0))
    throw std::invalid_argument("give exactly one of --x or --all-ones");
  std::vector<mpq_class> x;
  if (all_ones > 0)
    x.assign((size_t)all_ones, mpq_class(1));
  else
    x = parse_rat_list(x_text);
  AtomResult r = signed_sum_atom(x);
  // Erdos extremality: the atom never beats the central binomial mass, and
  // that mass is below 1/sqrt(m); all-equal coefficients attain it exactly.
  bool below_bound = r.max_atom <= r.bound;
  bool below_root = r.max_atom * r.max_atom * r.m <= 1;
  bool all_equal_attains = all_ones == 0 || r.attains_bound;
  bool pass = below_bound && below_root && all_equal_attains;
  std::ostringstream out;
  if (g.format == "json") {
    ordered_json j;
    j["m"] = r.m;
    j["method"] = r.method;
    j["max_atom"] = rat_str(r.max_atom);
    j["atom_value"] = rat_str(r.atom_value);
    j["bound"] = rat_str(r.bound);
    j["attains_bound"] = r.attains_bound;
    j["pass"] = pass;
    out << j.dump(2) << "\n";
  } else if (g.format == "csv") {
    out << "m,method,max_atom_exact,max_atom,atom_value,bound_exact,bound,"
           "attains_bound,pass\n";
    out << r.m << "," << r.method << "," << rat_str(r.max_atom) << ","
        << format_double(r.max_atom.get_d()) << "," << rat_str(r.atom_value)
        << "," << rat_str(r.bound) << "," << format_double(r.bound.get_d())
        << "," << (r.attains_bound ? 1 : 0) << "," << (pass ? 1 : 0) << "\n";
  } else {
    out << "m=" << r.m << " method=" << r.method << "\n";
    out << "max_atom=" << q_text(r.max_atom) << " at value "
        << rat_str(r.atom_value) << "\n";
    out << "central binomial bound=" << q_text(r.bound)
        << " attained=" << bool_text(r.attains_bound) << "\n";
    out << (pass ? "pass" : "FAIL") << "\n";
  }
  emit(out.str(), g.out);
  return pass ? 0 : 1;
}

// ---- coupling-audit ------------------------------------------------------------

int run_coupling(const GlobalOpts& g, int n, int d, int i1, int i2,
                 const std::string& mode, long long trials,
                 const std::string& frozen_text, int s) {
  if (i1 < 1 || i2 < 1 || i1 > n || i2 > n)
    throw std::invalid_argument("rows are 1-based and must lie in [1, n]");
  std::vector<int> frozen;
  if (!frozen_text.empty()) {
    for (int c : parse_int_list(frozen_text)) {
      if (c < 1 || c > n)
        throw std::invalid_argument("frozen columns are 1-based in [1, n]");
      frozen.push_back(c - 1);
    }
  }
  bool restricted = s >= 0 || !frozen.empty();
  PushforwardAudit a;
  if (mode == "exact") {
    if (restricted)
      a = coupling_audit_restricted(n, d, i1 - 1, i2 - 1, frozen,
                                    s < 0 ? 0 : s);
    else
      a = coupling_audit_exact(n, d, i1 - 1, i2 - 1);
  } else if (mode == "chi2") {
    if (restricted)
      throw std::invalid_argument("chi2 mode audits full shuffles only");
    a = coupling_audit_chi2(n, d, i1 - 1, i2 - 1, trials, g.seed);
  } else {
    throw std::invalid_argument("mode must be exact or chi2");
  }
  std::ostringstream out;
  if (g.format == "json") {
    ordered_json j;
    j["mode"] = a.mode;
    j["n"] = n;
    j["d"] = d;
    j["i1"] = i1;
    j["i2"] = i2;
    j["states"] = a.states;
    if (a.mode == "exact") {
      j["tv"] = rat_str(a.tv);
      j["restricted"] = restricted;
      if (restricted) j["s"] = s < 0 ? 0 : s;
    } else {
      j["trials"] = a.trials;
      j["dof"] = a.dof;
      j["chi2"] = a.chi2;
      j["chi2_crit"] = a.chi2_crit;
    }
    j["pass"] = a.pass;
    out << j.dump(2) << "\n";
  } else if (g.format == "csv") {
    out << "mode,n,d,i1,i2,states,trials,dof,tv,chi2,chi2_crit,pass\n";
    out << a.mode << "," << n << "," << d << "," << i1 << "," << i2 << ","
        << a.states << "," << a.trials << "," << a.dof << ","
        << (a.mode == "exact" ? rat_str(a.tv) : "") << ","
        << (a.mode == "chi2" ? format_double(a.chi2) : "") << ","
        << (a.mode == "chi2" ? format_double(a.chi2_crit) : "") << ","
        << (a.pass ? 1 : 0) << "\n";
  } else {
    out << "pushforward audit: mode=" << a.mode << " states=" << a.states;
    if (a.mode == "exact")
      out << " tv=" << rat_str(a.tv);
    else
      out << " trials=" << a.trials << " chi2=" << format_double(a.chi2)
          << " crit99=" << format_double(a.chi2_crit) << " dof=" << a.dof;
    out << "\n" << (a.pass ? "pass" : "FAIL") << "\n";
  }
  emit(out.str(), g.out);
  return a.pass ? 0 : 1;
}

// ---- discrepancy-audit ----------------------------------------------------------

struct DiscOpts {
  int n = 0, d = 0;
  std::string in_path;
  std::string delta = "1/2", eps = "1/2", eps0 = "1/2", gamma = "1/10";
  std::string c1 = "1/10", c2 = "3/10", C2 = "8", C0 = "1";
  long budget = 1000000;
  int sample_per_class = 200;
  bool certify = false;
};

int run_discrepancy(const GlobalOpts& g, const DiscOpts& o) {
  Matrix01 m;
  if (!o.in_path.empty()) {
    m = read_matrix(o.in_path);
  } else {
    if (o.n < 1) throw std::invalid_argument("give --in or --n/--d");
    SplitMix64 rng(g.seed);
    m = sample_auto(o.n, o.d, rng);
  }
  auto w = m.regularity();
  if (!w.regular)
    throw std::invalid_argument("discrepancy audits need a d-regular matrix");
  AuditConfig cfg;
  cfg.delta = parse_rat(o.delta);
  cfg.eps = parse_rat(o.eps);
  cfg.eps0 = parse_rat(o.eps0);
  cfg.gamma = parse_rat(o.gamma);
  cfg.c1 = parse_rat(o.c1);
  cfg.c2 = parse_rat(o.c2);
  cfg.C2 = parse_rat(o.C2);
  cfg.C0 = parse_rat(o.C0);
  cfg.budget = o.budget;
  cfg.sample_per_class = o.sample_per_class;
  SplitMix64 rng(derive_stream(g.seed, 0xd15c));
  std::vector<AuditReport> reports;
  reports.push_back(check_codegree(m, cfg.delta));
  reports.push_back(check_expansion(m, cfg.gamma, cfg, rng));
  reports.push_back(check_large_minors(m, cfg.eps, cfg, rng));
  reports.push_back(check_thin_minors(m, cfg.eps0, cfg.gamma, cfg, rng));
  GoodnessReport good = check_good_d(m, w.d, cfg, rng);
  if (o.certify) {
    std::vector<const AuditReport*> all;
    for (const auto& r : reports) all.push_back(&r);
    for (const auto* r :
         {&good.degrees, &good.degree_caps, &good.expansion, &good.dense_pairs})
      all.push_back(r);
    for (const auto* r : all)
      if (r->mode == "sampled") {
        std::cerr << "certify: '" << r->name
                  << "' exceeded the exhaustive budget; rerun with a larger "
                     "--budget\n";
        return 2;
      }
  }
  bool pass = good.pass;
  for (const auto& r : reports) pass = pass && r.pass;
  std::ostringstream out;
  if (g.format == "json") {
    ordered_json j;
    j["n"] = m.n();
    j["d"] = w.d;
    j["audits"] = ordered_json::array();
    for (const auto& r : reports)
      j["audits"].push_back(ordered_json::parse(r.to_json()));
    j["good_d"] = ordered_json::parse(good.to_json());
    j["pass"] = pass;
    out << j.dump(2) << "\n";
  } else if (g.format == "csv") {
    out << "name,pass,family_empty,mode,checked,margin,margin_exact\n";
    auto row = [&](const AuditReport& r) {
      out << r.name << "," << (r.pass ? 1 : 0) << ","
          << (r.family_empty ? 1 : 0) << "," << r.mode << "," << r.checked
          << "," << format_double(r.margin) << "," << r.margin_exact << "\n";
    };
    for (const auto& r : reports) row(r);
    row(good.degrees);
    row(good.degree_caps);
    row(good.expansion);
    row(good.dense_pairs);
  } else {
    out << "matrix: n=" << m.n() << " d=" << w.d << "\n";
    for (const auto& r : reports) out << r.to_table_row() << "\n";
    out << "good_d components:\n";
    out << "  " << good.degrees.to_table_row() << "\n";
    out << "  " << good.degree_caps.to_table_row() << "\n";
    out << "  " << good.expansion.to_table_row() << "\n";
    out << "  " << good.dense_pairs.to_table_row() << "\n";
    out << (pass ? "pass" : "FAIL") << "\n";
  }
  emit(out.str(), g.out);
  return pass ? 0 : 1;
}

// ---- rank ---------------------------------------------------------------------

int run_rank(const GlobalOpts& g, int n, int d, const std::string& in_path) {
  Matrix01 m;
  if (!in_path.empty()) {
    m = read_matrix(in_path);
  } else {
    if (n < 1) throw std::invalid_argument("give --in or --n/--d");
    SplitMix64 rng(g.seed);
    m = sample_auto(n, d, rng);
  }
  RankResult r = corank_exact(to_intmat(m));
  auto w = m.regularity();
  std::ostringstream out;
  if (g.format == "json") {
    ordered_json j;
    j["n"] = m.n();
    j["d"] = w.d;
    j["rank"] = r.rank;
    j["corank"] = r.corank;
    j["singular"] = r.corank > 0;
    j["kernel"] = ordered_json::array();
    for (const auto& v : r.kernel) {
      ordered_json vec = ordered_json::array();
      for (const auto& q : v) vec.push_back(rat_str(q));
      j["kernel"].push_back(std::move(vec));
    }
    out << j.dump(2) << "\n";
  } else if (g.format == "csv") {
    out << "n,d,rank,corank,singular\n";
    out << m.n() << "," << w.d << "," << r.rank << "," << r.corank << ","
        << (r.corank > 0 ? 1 : 0) << "\n";
  } else {
    out << "n=" << m.n() << " d=" << w.d << " rank=" << r.rank
        << " corank=" << r.corank
        << " singular=" << bool_text(r.corank > 0) << "\n";
    for (const auto& v : r.kernel) {
      auto prof = level_profile(v);
      out << "kernel:";
      for (const auto& q : v) out << " " << rat_str(q);
      out << "\n  top level " << rat_str(prof.top_value) << " fraction "
          << rat_str(prof.top_fraction) << ", support fraction "
          << rat_str(prof.support_fraction) << "\n";
    }
  }
  emit(out.str(), g.out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"laboratory for d-regular 0/1 matrices: sampling, counting, "
               "coupling and discrepancy audits, exact rank, experiments"};
  app.require_subcommand(1);
  GlobalOpts g;
  app.add_option("--seed", g.seed, "master seed")->capture_default_str();
  app.add_option("--threads", g.threads, "worker threads for trials")
      ->capture_default_str();
  app.add_option("--out", g.out,
                 "output path (mc-singularity: report basename for .json/.csv)");
  app.add_option("--format", g.format, "output format")
      ->check(CLI::IsMember({"json", "csv", "text"}))
      ->capture_default_str();

  auto* c_sample = app.add_subcommand("sample", "draw or enumerate matrices");
  SampleOpts so;
  c_sample->add_option("--n", so.n, "matrix size")->required();
  c_sample->add_option("--d", so.d, "row/column degree")->required();
  c_sample->add_option("--mode", so.mode, "auto|exact|mcmc|enumerate")
      ->capture_default_str();
  c_sample->add_option("--steps", so.steps, "mcmc steps (-1 = default)")
      ->capture_default_str();
  c_sample->add_option("--count", so.count, "number of draws")
      ->capture_default_str();
  c_sample->add_flag("--signed", so.signed_draw, "overlay iid signs");

  auto* c_count = app.add_subcommand("count", "exact and asymptotic counts");
  int cn = 0, cd = 0;
  c_count->add_option("--n", cn, "matrix size")->required();
  c_count->add_option("--d", cd, "row/column degree")->required();

  auto* c_mc = app.add_subcommand("mc-singularity",
                                  "singularity rates over an (n,d) grid");
  std::string grid;
  long long mc_trials = 1000, mc_steps = -1;
  std::string mc_mode = "auto";
  c_mc->add_option("--grid", grid, "cells as n:d,n:d,...")->required();
  c_mc->add_option("--trials", mc_trials, "trials per cell")
      ->capture_default_str();
  c_mc->add_option("--mode", mc_mode, "auto|exact|mcmc")->capture_default_str();
  c_mc->add_option("--steps", mc_steps, "mcmc steps (-1 = default)")
      ->capture_default_str();

  auto* c_d2 = app.add_subcommand(
      "d2-cycles", "2-regular singularity against the exact parity law");
  std::string d2_ns = "8,10,12";
  long long d2_trials = 10000;
  c_d2->add_option("--ns", d2_ns, "sizes, comma separated")
      ->capture_default_str();
  c_d2->add_option("--trials", d2_trials, "trials per size")
      ->capture_default_str();

  auto* c_ps =
      app.add_subcommand("perm-sum", "singularity of permutation-matrix sums");
  std::string ps_ns = "6,12";
  long long ps_trials = 10000;
  c_ps->add_option("--ns", ps_ns, "sizes, comma separated")
      ->capture_default_str();
  c_ps->add_option("--trials", ps_trials, "trials per size")
      ->capture_default_str();

  auto* c_erdos = app.add_subcommand(
      "erdos", "exact anti-concentration atom of a signed sum");
  std::string erdos_x;
  int erdos_all = 0;
  c_erdos->add_option("--x", erdos_x, "coefficients, e.g. 1,-2,3/4");
  c_erdos->add_option("--all-ones", erdos_all, "use the all-ones vector of this length");

  auto* c_ca = app.add_subcommand("coupling-audit",
                                  "pushforward uniformity of the shuffle");
  int ca_n = 0, ca_d = 0, ca_i1 = 1, ca_i2 = 2, ca_s = -1;
  std::string ca_mode = "exact", ca_frozen;
  long long ca_trials = 100000;
  c_ca->add_option("--n", ca_n, "matrix size")->required();
  c_ca->add_option("--d", ca_d, "row/column degree")->required();
  c_ca->add_option("--i1", ca_i1, "first row (1-based)")->capture_default_str();
  c_ca->add_option("--i2", ca_i2, "second row (1-based)")
      ->capture_default_str();
  c_ca->add_option("--mode", ca_mode, "exact|chi2")->capture_default_str();
  c_ca->add_option("--trials", ca_trials, "chi2 trials")->capture_default_str();
  c_ca->add_option("--frozen", ca_frozen,
                   "frozen columns (1-based, restricted shuffle)");
  c_ca->add_option("--s", ca_s, "selection size (restricted shuffle)");

  auto* c_da = app.add_subcommand("discrepancy-audit",
                                  "codegree, expansion, and minor audits");
  DiscOpts dopt;
  c_da->add_option("--n", dopt.n, "matrix size (sampled input)");
  c_da->add_option("--d", dopt.d, "row/column degree (sampled input)");
  c_da->add_option("--in", dopt.in_path, "matrix file ('-' = stdin)");
  c_da->add_option("--delta", dopt.delta, "codegree tolerance")
      ->capture_default_str();
  c_da->add_option("--eps", dopt.eps, "large-minor deviation cap")
      ->capture_default_str();
  c_da->add_option("--eps0", dopt.eps0, "thin-minor density cap")
      ->capture_default_str();
  c_da->add_option("--gamma", dopt.gamma, "expansion rate")
      ->capture_default_str();
  c_da->add_option("--c1", dopt.c1, "expansion cap in good-d")
      ->capture_default_str();
  c_da->add_option("--c2", dopt.c2, "dense-pair density floor")
      ->capture_default_str();
  c_da->add_option("--C2", dopt.C2, "dense-pair size factor")
      ->capture_default_str();
  c_da->add_option("--C0", dopt.C0, "large-minor size factor")
      ->capture_default_str();
  c_da->add_option("--budget", dopt.budget, "exhaustive family budget")
      ->capture_default_str();
  c_da->add_option("--sample-per-class", dopt.sample_per_class,
                   "sampled subsets per size class")
      ->capture_default_str();
  c_da->add_flag("--certify", dopt.certify,
                 "require exhaustive sweeps everywhere or abort");

  auto* c_rank =
      app.add_subcommand("rank", "exact rank, corank, and kernel basis");
  int rn = 0, rd = 0;
  std::string rin;
  c_rank->add_option("--n", rn, "matrix size (sampled input)");
  c_rank->add_option("--d", rd, "row/column degree (sampled input)");
  c_rank->add_option("--in", rin, "matrix file ('-' = stdin)");

  // global flags may follow the subcommand
  for (auto* sc : app.get_subcommands([](const CLI::App*) { return true; }))
    sc->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (app.got_subcommand(c_sample)) return run_sample(g, so);
    if (app.got_subcommand(c_count)) return run_count(g, cn, cd);
    if (app.got_subcommand(c_mc))
      return run_mc(g, grid, mc_trials, mc_mode, mc_steps);
    if (app.got_subcommand(c_d2)) return run_d2(g, d2_ns, d2_trials);
    if (app.got_subcommand(c_ps)) return run_perm_sum(g, ps_ns, ps_trials);
    if (app.got_subcommand(c_erdos)) return run_erdos(g, erdos_x, erdos_all);
    if (app.got_subcommand(c_ca))
      return run_coupling(g, ca_n, ca_d, ca_i1, ca_i2, ca_mode, ca_trials,
                          ca_frozen, ca_s);
    if (app.got_subcommand(c_da)) return run_discrepancy(g, dopt);
    if (app.got_subcommand(c_rank)) return run_rank(g, rn, rd, rin);
    std::cerr << "no subcommand\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
