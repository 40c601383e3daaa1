#pragma once
/// @file cli.hpp
/// @brief The `monorun` command line: runs, tuple, sieve, mk, digits, selftest.
///
/// Exit statuses: 0 success, 1 internal failure or failed selftest, 2 usage or
/// configuration error, 3 infeasible / not found / degenerate.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "config.hpp"
#include "core_arith.hpp"
#include "digit_construction.hpp"
#include "errors.hpp"
#include "maynard_sieve.hpp"
#include "mk_optimizer.hpp"
#include "run_finder.hpp"
#include "selftest.hpp"
#include "tuple_engineering.hpp"

namespace monorun::cli {

inline int exit_status(ErrorKind k) {
  switch (k) {
    case ErrorKind::usage:
    case ErrorKind::config:
    case ErrorKind::resource:
    case ErrorKind::not_applicable: return 2;
    case ErrorKind::infeasible:
    case ErrorKind::not_found:
    case ErrorKind::degenerate: return 3;
    case ErrorKind::internal: return 1;
  }
  return 1;
}

inline unsigned default_threads() { return std::max(1u, std::thread::hardware_concurrency()); }

struct Common {
  std::string out_path;
  std::string format;
  unsigned threads = default_threads();
};

inline void add_common(CLI::App* app, Common& c, const std::string& default_format) {
  c.format = default_format;
  app->add_option("--out", c.out_path, "Write the artifact here instead of stdout");
  app->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
  app->add_option("--threads", c.threads, "Worker threads")->check(CLI::PositiveNumber);
}

inline void emit(const Common& c, const std::string& text, std::ostream& out) {
  if (c.out_path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(c.out_path, std::ios::trunc);
  if (!f) fail(ErrorKind::usage, "cannot write " + c.out_path);
  f << text;
}

inline std::string csv_escape(const std::string& s) { return s.find(',') == std::string::npos ? s : "\"" + s + "\""; }

/// Runs the command line. Artifacts go to `out` (or --out); diagnostics to `err`.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Monotone runs of arithmetic functions at shifted primes: searches, sieve weights, M_k bounds and digit-sum constructions"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Help for every subcommand");

  // runs
  Common runs_c;
  std::string runs_function = "phi_shift", runs_mode = "increasing", runs_checkpoint;
  std::size_t runs_min_len = 2;
  u64 runs_bound = 1000, runs_cap = 1'000'000'000;
  bool runs_all = false, runs_first = false, runs_stats = false;
  auto* runs = app.add_subcommand("runs", "Find runs of consecutive primes on which f(p-1) or s_g(p) is monotone or constant");
  runs->add_option("--function", runs_function, "phi_shift, sigma_shift, omega_shift, tau_shift or digit_sum(g)");
  runs->add_option("--mode", runs_mode, "increasing, decreasing or constant");
  runs->add_option("--min-len", runs_min_len, "Minimum run length")->check(CLI::Range(std::size_t{2}, std::size_t{1'000'000}));
  runs->add_option("--bound", runs_bound, "Search primes below this bound");
  runs->add_flag("--all-windows", runs_all, "Also report every min-len window inside longer runs");
  runs->add_flag("--first", runs_first, "Report only the first run, searching up to --cap");
  runs->add_option("--cap", runs_cap, "Hard cap for --first");
  runs->add_option("--checkpoint", runs_checkpoint, "Checkpoint file for --first (resumed if present, updated per segment)");
  runs->add_flag("--stats", runs_stats, "Histogram of maximal run lengths instead of the runs");
  add_common(runs, runs_c, "csv");

  // tuple
  Common tuple_c;
  unsigned tuple_k = 2;
  int tuple_sign = 1;
  std::string tuple_entries, tuple_variant = "phi", tuple_intervals, tuple_sizes;
  u64 tuple_z1 = 3, tuple_z2 = 47, tuple_z3 = 101;
  double tuple_N = 0;
  auto* tuple = app.add_subcommand("tuple", "Admissible tuples and the three-range residue selection nu mod W");
  tuple->add_option("--k", tuple_k, "Tuple size for h_i = (i-1)(2k)!");
  tuple->add_option("--sign", tuple_sign, "+1 or -1 (negated tuple)")->check(CLI::IsMember({-1, 1}));
  tuple->add_option("--tuple", tuple_entries, "Explicit comma-separated entries (admissibility report only)");
  tuple->add_option("--variant", tuple_variant, "phi, sigma or omega_count");
  tuple->add_option("--z1", tuple_z1, "Range I upper cutoff");
  tuple->add_option("--z2", tuple_z2, "Range II upper cutoff");
  tuple->add_option("--z3", tuple_z3, "Range III upper cutoff");
  tuple->add_option("--N", tuple_N, "Use the asymptotic cutoffs for this N (clamped at 3, 5, 7) instead of --z1/--z2/--z3");
  tuple->add_option("--intervals", tuple_intervals, "Per-index Range II sum intervals lo:hi,... (offset excluded); empty means 4i log 2 <= offset + sum <= (4i+1) log 2, which needs z2 well beyond the default");
  tuple->add_option("--sizes", tuple_sizes, "Per-index set sizes for omega_count");
  add_common(tuple, tuple_c, "json");

  // sieve
  Common sieve_c;
  std::string sieve_config, sieve_theta, sieve_tuple, sieve_w, sieve_plan;
  u64 sieve_N = 10'000, sieve_R = 0, sieve_p_bad = 1;
  unsigned sieve_k = 1;
  bool sieve_identity = false;
  auto* sieve = app.add_subcommand("sieve", "Sieve weights, exact S1/S2 and the weighted probability space");
  sieve->add_option("--config", sieve_config, "key = value file (N, k, theta, R, tuple, w_primes, plan, z1..z3, intervals, sizes, p_bad, F_degree, F_coeffs)");
  auto* o_N = sieve->add_option("--N", sieve_N, "Omega = [N, 2N)");
  auto* o_k = sieve->add_option("--k", sieve_k, "Tuple size");
  auto* o_theta = sieve->add_option("--theta", sieve_theta, "Level theta as a/b (default 1/5)");
  auto* o_R = sieve->add_option("--R", sieve_R, "Explicit R replacing N^theta");
  auto* o_tuple = sieve->add_option("--tuple", sieve_tuple, "Comma-separated tuple (default 0,2,6,...)");
  auto* o_w = sieve->add_option("--w-primes", sieve_w, "Comma-separated primes whose product is W (default 2,3)");
  auto* o_plan = sieve->add_option("--plan", sieve_plan, "Range plan variant building W instead of --w-primes");
  auto* o_pbad = sieve->add_option("--p-bad", sieve_p_bad, "Excluded modulus (1 = none)");
  sieve->add_flag("--identity", sieve_identity, "Also check the rearranged S1 identity and report it");
  add_common(sieve, sieve_c, "json");

  // mk
  Common mk_c;
  unsigned mk_k = 1, mk_degree = 2, mk_kmax = 0, mk_dmax = 0;
  long long mk_K = 0;
  auto* mk = app.add_subcommand("mk", "Certified lower bounds for M_k over symmetric polynomial F");
  mk->add_option("--k", mk_k, "Dimension k")->check(CLI::Range(1u, 8u));
  mk->add_option("--degree", mk_degree, "Total degree of the symmetric basis")->check(CLI::Range(0u, 12u));
  mk->add_option("--kmax", mk_kmax, "Tabulate every k <= kmax (with --dmax)")->check(CLI::Range(0u, 8u));
  mk->add_option("--dmax", mk_dmax, "Tabulate every degree <= dmax")->check(CLI::Range(0u, 12u));
  mk->add_option("--choose-K", mk_K, "Also report the smallest tabulated k with ceil(M_k / 4) > K - 1");
  add_common(mk, mk_c, "csv");

  // digits
  auto* digits = app.add_subcommand("digits", "Digit sums of primes: local limit law and run constructions");
  digits->require_subcommand(1);
  Common plan_c, hist_c, search_c;
  u64 plan_g = 10, plan_K = 2, plan_k = 5, plan_x = 150;
  std::string plan_mode = "constant";
  auto* plan = digits->add_subcommand("plan", "Constant or monotone digit-sum prime tuple with A = g^N");
  plan->add_option("--g", plan_g, "Base")->check(CLI::Range(u64{2}, u64{1'000'000}));
  plan->add_option("--K", plan_K, "Requested run length")->check(CLI::Range(u64{1}, u64{1'000'000}));
  plan->add_option("--k", plan_k, "Tuple size actually used")->check(CLI::Range(u64{2}, u64{62}));
  plan->add_option("--x", plan_x, "Search bound (constant) or first window start (monotone)");
  plan->add_option("--mode", plan_mode, "constant, increasing or decreasing");
  add_common(plan, plan_c, "json");

  u64 hist_g = 10, hist_x = 1'000'000;
  auto* hist = digits->add_subcommand("histogram", "Observed vs predicted counts of primes p <= x with s_g(p) = l");
  hist->add_option("--g", hist_g, "Base")->check(CLI::Range(u64{2}, u64{1'000'000}));
  hist->add_option("--x", hist_x, "Upper bound x >= 100");
  add_common(hist, hist_c, "csv");

  u64 search_g = 10, search_lo = 2, search_hi = 100, search_ell = 10, search_count = 10;
  auto* search = digits->add_subcommand("search", "Primes in [lo, hi) with a given digit sum");
  search->add_option("--g", search_g, "Base")->check(CLI::Range(u64{2}, u64{1'000'000}));
  search->add_option("--lo", search_lo, "Range start");
  search->add_option("--hi", search_hi, "Range end (exclusive)");
  search->add_option("--l", search_ell, "Digit sum");
  search->add_option("--count", search_count, "Maximum number of primes");
  add_common(search, search_c, "csv");

  auto* self = app.add_subcommand("selftest", "Run the invariant suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return 0;
    }
    std::ostringstream msg;
    app.exit(e, msg, msg);
    err << msg.str();
    return 2;
  }

  try {
    if (*runs) {
      RunQuery q;
      q.function = RunFunction::parse(runs_function);
      q.mode = parse_run_mode(runs_mode);
      q.min_length = runs_min_len;
      q.search_bound = runs_bound;
      q.all_windows = runs_all;
      q.threads = runs_c.threads;
      if (runs_stats) {
        const auto hist_map = run_statistics(q.function, q.mode, q.search_bound, q.threads);
        if (runs_c.format == "json") {
          nlohmann::json j = nlohmann::json::array();
          for (const auto& [len, count] : hist_map) j.push_back({{"length", len}, {"count", count}});
          emit(runs_c, j.dump(2) + "\n", out);
        } else {
          std::string s = "length,count\n";
          for (const auto& [len, count] : hist_map) s += std::to_string(len) + "," + std::to_string(count) + "\n";
          emit(runs_c, s, out);
        }
        return 0;
      }
      std::vector<RunRecord> found;
      if (runs_first) {
        std::optional<Checkpoint> resume;
        if (!runs_checkpoint.empty() && std::ifstream(runs_checkpoint)) resume = Checkpoint::load(runs_checkpoint);
        auto on_cp = [&](const Checkpoint& cp) {
          err << "checkpoint: " << cp.serialize();
          if (!runs_checkpoint.empty()) cp.save(runs_checkpoint);
        };
        const auto r = first_run(q, runs_cap, resume, on_cp);
        if (!r.run) {
          err << "no run found below " << r.bound_searched << "\n";
          return 3;
        }
        found.push_back(*r.run);
      } else {
        found = find_runs(q);
      }
      emit(runs_c, runs_c.format == "json" ? runs_json(found, q).dump(2) + "\n" : runs_csv(found, q), out);
      return 0;
    }

    if (*tuple) {
      nlohmann::json j;
      if (!tuple_entries.empty()) {
        std::vector<i64> entries;
        for (const auto& s : KeyValueConfig::split(tuple_entries)) entries.push_back(std::stoll(s));
        const auto rep = is_admissible(entries);
        j["entries"] = entries;
        j["admissible"] = rep.admissible;
        if (rep.admissible) {
          nlohmann::json omitted = nlohmann::json::object();
          for (const auto& [p, r] : rep.omitted) omitted[std::to_string(p)] = r;
          j["omitted"] = omitted;
        } else {
          j["covering_prime"] = *rep.covering_prime;
        }
        emit(tuple_c, j.dump(2) + "\n", out);
        return 0;
      }
      const auto H = paper_tuple(tuple_k, tuple_sign);
      RangePlan rp = tuple_N > 0 ? default_range_plan(parse_range_variant(tuple_variant), tuple_N, tuple_k) : RangePlan{};
      rp.variant = parse_range_variant(tuple_variant);
      if (tuple_N <= 0) rp.z1 = tuple_z1, rp.z2 = tuple_z2, rp.z3 = tuple_z3;
      for (const auto& item : KeyValueConfig::split(tuple_intervals)) {
        const auto colon = item.find(':');
        if (colon == std::string::npos) fail(ErrorKind::usage, "--intervals entries are lo:hi");
        rp.intervals.emplace_back(std::stold(item.substr(0, colon)), std::stold(item.substr(colon + 1)));
      }
      if (!tuple_sizes.empty()) {
        rp.sizes.clear();
        for (const auto& s : KeyValueConfig::split(tuple_sizes)) rp.sizes.push_back(std::stoull(s));
      }
      const auto d = assemble_selection(rp, H);
      j["tuple"] = H.entries;
      j["z"] = {rp.z1, rp.z2, rp.z3};
      j["variant"] = to_string(rp.variant);
      j["selection"] = to_json(d.selection);
      j["sets"] = d.sets;
      std::vector<std::string> sums;
      for (long double s : d.set_sums) sums.push_back(std::to_string(static_cast<double>(s)));
      j["set_sums"] = sums;
      nlohmann::json blocks = nlohmann::json::array();
      for (auto [h, p] : d.blocks) blocks.push_back({{"h", h}, {"p", p}});
      j["blocks"] = blocks;
      if (tuple_c.format == "csv") {
        std::string s = "p,residue,provenance\n";
        for (const auto& a : d.selection.assignments)
          s += std::to_string(a.p) + "," + std::to_string(a.residue) + "," + a.provenance_name() + "\n";
        emit(tuple_c, s, out);
      } else {
        emit(tuple_c, j.dump(2) + "\n", out);
      }
      return 0;
    }

    if (*sieve) {
      KeyValueConfig kv = sieve_config.empty() ? KeyValueConfig{} : KeyValueConfig::load(sieve_config);
      if (o_N->count()) kv.set("N", std::to_string(sieve_N));
      if (o_k->count()) kv.set("k", std::to_string(sieve_k));
      if (o_theta->count()) kv.set("theta", sieve_theta);
      if (o_R->count()) kv.set("R", std::to_string(sieve_R));
      if (o_tuple->count()) kv.set("tuple", sieve_tuple);
      if (o_w->count()) kv.set("w_primes", sieve_w);
      if (o_plan->count()) kv.set("plan", sieve_plan);
      if (o_pbad->count()) kv.set("p_bad", std::to_string(sieve_p_bad));
      const SieveConfig cfg = sieve_config_from(kv);
      err << "sieve: N=" << cfg.N << " k=" << cfg.k << " R=" << cfg.R_floor() << " W=" << cfg.W() << "\n";
      const auto lt = lambda_table(cfg);
      const FactorTable t(detail::table_limit(cfg));
      const auto sp = weighted_space(cfg, lt, t, sieve_c.threads);
      const auto sums = compute_S1_S2(cfg, sp);
      const auto pred = predicted_S1_S2(cfg);
      auto j = sieve_results_json(cfg, sums, pred);
      j["lambda_entries"] = lt.size();
      if (sieve_identity) {
        const auto re = rearranged_S1(cfg, lt);
        j["identity"] = {{"rearranged_S1", re.value.get_str()},
                         {"equal", re.value == sums.S1},
                         {"nonempty_noncoprime_pairs", re.nonempty_noncoprime}};
      }
      if (sieve_c.format == "csv") {
        std::string s = "K,prob_at_least\n";
        for (std::size_t K = 0; K < sums.prob_table.size(); ++K) s += std::to_string(K) + "," + sums.prob_table[K].get_str() + "\n";
        emit(sieve_c, s, out);
      } else {
        emit(sieve_c, j.dump(2) + "\n", out);
      }
      return 0;
    }

    if (*mk) {
      std::vector<MkResult> rows;
      if (mk_kmax > 0) {
        rows = bounds_grid(mk_kmax, mk_dmax, mk_c.threads);
      } else {
        rows.push_back(mk_lower_bound(mk_k, mk_degree, mk_c.threads));
      }
      std::optional<unsigned> chosen;
      if (mk->count("--choose-K")) {
        std::map<unsigned, double> table;
        for (const auto& r : rows) table[r.k] = std::max(table[r.k], r.bound);
        chosen = choose_k(mk_K, table);
        err << "choose_k(K=" << mk_K << "): " << (chosen ? std::to_string(*chosen) : std::string("none in table")) << "\n";
      }
      if (mk_c.format == "json") {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& r : rows) {
          std::vector<std::string> coeffs;
          for (const auto& c : r.coefficients) coeffs.push_back(c.get_str());
          nlohmann::json basis = nlohmann::json::array();
          for (const auto& t : r.terms) basis.push_back({{"a", t.a}, {"b", t.b}});
          arr.push_back({{"k", r.k},
                         {"degree", r.degree},
                         {"bound", r.bound},
                         {"quotient", r.quotient.get_str()},
                         {"certified", r.certified},
                         {"basis", basis},
                         {"coefficients", coeffs}});
        }
        nlohmann::json j = {{"bounds", arr}};
        if (mk->count("--choose-K")) j["choose_k"] = chosen ? nlohmann::json(*chosen) : nlohmann::json(nullptr);
        emit(mk_c, j.dump(2) + "\n", out);
      } else {
        emit(mk_c, bounds_csv(rows), out);
      }
      return 0;
    }

    if (*digits) {
      if (*plan) {
        const DigitMode m = parse_digit_mode(plan_mode);
        const auto p = m == DigitMode::constant ? constant_run_plan(plan_g, plan_K, plan_k, plan_x)
                                                : monotone_run_plan(plan_g, plan_K, plan_k, plan_x, m);
        if (plan_c.format == "csv") {
          std::string s = "i,prime,sum\n";
          for (std::size_t i = 0; i < p.primes.size(); ++i)
            s += std::to_string(i + 1) + "," + std::to_string(p.primes[i]) + "," + std::to_string(p.target_sums[i]) + "\n";
          emit(plan_c, s, out);
        } else {
          emit(plan_c, to_json(p).dump(2) + "\n", out);
        }
        return 0;
      }
      if (*hist) {
        const auto h = digit_histogram(hist_g, hist_x);
        if (hist_c.format == "json") {
          nlohmann::json rows = nlohmann::json::array();
          for (const auto& r : h.rows) {
            nlohmann::json row = {{"l", r.ell}, {"observed", r.observed}};
            row["predicted"] = r.predicted ? nlohmann::json(static_cast<double>(*r.predicted)) : nlohmann::json(nullptr);
            row["ratio"] = r.ratio ? nlohmann::json(static_cast<double>(*r.ratio)) : nlohmann::json(nullptr);
            rows.push_back(row);
          }
          emit(hist_c, nlohmann::json{{"g", h.g}, {"x", h.x}, {"pi_x", h.pi_x}, {"rows", rows}}.dump(2) + "\n", out);
        } else {
          std::ostringstream s;
          s.precision(10);
          s << "l,observed,predicted,ratio\n";
          for (const auto& r : h.rows) {
            s << r.ell << ',' << r.observed << ',';
            if (r.predicted) s << static_cast<double>(*r.predicted);
            s << ',';
            if (r.ratio) s << static_cast<double>(*r.ratio);
            s << '\n';
          }
          emit(hist_c, s.str(), out);
        }
        return 0;
      }
      if (*search) {
        const auto r = primes_with_digit_sum(search_g, search_lo, search_hi, search_ell, search_count);
        if (r.exhausted) err << "range exhausted after " << r.primes.size() << " primes\n";
        if (search_c.format == "json") {
          emit(search_c, nlohmann::json{{"primes", r.primes}, {"exhausted", r.exhausted}}.dump(2) + "\n", out);
        } else {
          std::string s = "prime\n";
          for (u64 p : r.primes) s += std::to_string(p) + "\n";
          emit(search_c, s, out);
        }
        return 0;
      }
    }

    if (*self) {
      bool all = true;
      for (const auto& r : run_selftest()) {
        out << (r.passed ? "PASS " : "FAIL ") << r.name;
        if (!r.detail.empty()) out << " (" << r.detail << ")";
        out << "\n";
        all = all && r.passed;
      }
      return all ? 0 : 1;
    }
  } catch (const Error& e) {
    err << "error [" << kind_name(e.kind()) << "]: " << e.what() << "\n";
    return exit_status(e.kind());
  } catch (const std::invalid_argument& e) {
    err << "error [usage]: " << e.what() << "\n";
    return 2;
  } catch (const std::out_of_range& e) {
    err << "error [usage]: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

}  // namespace monorun::cli
