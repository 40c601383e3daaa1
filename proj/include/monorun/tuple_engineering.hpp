#pragma once
/// @file tuple_engineering.hpp
/// @brief Admissible tuples and the residue-class constructions that pre-sieve
///        n mod W: default selections, greedy interval sets, fixed-size sets,
///        block assignments for interior offsets, and CRT assembly of nu.

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "core_arith.hpp"

namespace monorun {

/// Least nonnegative residue of a signed value modulo p.
inline u64 mod_floor(i64 v, u64 p) {
  const i64 r = v % static_cast<i64>(p);
  return static_cast<u64>(r < 0 ? r + static_cast<i64>(p) : r);
}

inline u64 mod_floor(const Int& v, u64 p) { return mpz_fdiv_ui(v.get_mpz_t(), p); }

/// Sorted distinct integers h_1 < ... < h_k.
struct AdmissibleTuple {
  std::vector<i64> entries;

  std::size_t size() const { return entries.size(); }
  i64 front() const { return entries.front(); }
  i64 back() const { return entries.back(); }
  bool contains(i64 h) const { return std::binary_search(entries.begin(), entries.end(), h); }
  bool operator==(const AdmissibleTuple&) const = default;
};

struct AdmissibilityReport {
  bool admissible = true;
  std::vector<std::pair<u64, u64>> omitted;  // (p, an unoccupied residue) for each p <= k
  std::optional<u64> covering_prime;
};

/// Checks the residue-avoidance condition for every prime p <= k (for p > k it
/// holds automatically).
inline AdmissibilityReport is_admissible(std::span<const i64> entries) {
  std::vector<i64> sorted(entries.begin(), entries.end());
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    fail(ErrorKind::usage, "is_admissible: duplicate entries");
  AdmissibilityReport rep;
  for (u64 p : primes_up_to(sorted.size())) {
    std::vector<char> hit(p, 0);
    for (i64 h : sorted) hit[mod_floor(h, p)] = 1;
    auto it = std::find(hit.begin(), hit.end(), 0);
    if (it == hit.end()) {
      rep.admissible = false;
      rep.covering_prime = p;
      return rep;
    }
    rep.omitted.emplace_back(p, static_cast<u64>(it - hit.begin()));
  }
  return rep;
}

/// The tuple h_i = sign * (i-1)(2k)!, sorted ascending.
inline AdmissibleTuple paper_tuple(unsigned k, int sign) {
  if (k == 0) fail(ErrorKind::usage, "paper_tuple: k must be >= 1");
  if (sign != 1 && sign != -1) fail(ErrorKind::usage, "paper_tuple: sign must be +1 or -1");
  Int step = factorial(2 * k);
  Int last = step * (k - 1);
  if (mpz_sizeinbase(last.get_mpz_t(), 2) > 62) fail(ErrorKind::resource, "paper_tuple: entries exceed 64-bit range");
  const i64 s = static_cast<i64>(to_u64(step));
  AdmissibleTuple t;
  for (unsigned i = 0; i < k; ++i) t.entries.push_back(sign * static_cast<i64>(i) * s);
  std::sort(t.entries.begin(), t.entries.end());
  return t;
}

/// True when nu mod p keeps p off both n + h_j and n + h_j - 1 for every j.
inline bool is_default_residue(u64 r, u64 p, const AdmissibleTuple& H) {
  for (i64 h : H.entries) {
    if ((r + mod_floor(h, p)) % p == 0) return false;      // p | n + h
    if ((r + mod_floor(h - 1, p)) % p == 0) return false;  // p | n + h - 1
  }
  return true;
}

/// Smallest residue nu mod p with p not dividing (n + h_j)(n + h_j - 1) for all j.
inline u64 default_residue(u64 p, const AdmissibleTuple& H) {
  if (p < 3) fail(ErrorKind::usage, "default_residue: p must be an odd prime");
  for (u64 r = 0; r < p; ++r)
    if (is_default_residue(r, p, H)) return r;
  fail(ErrorKind::infeasible, "default_residue: no valid residue modulo " + std::to_string(p));
}

// ---------------------------------------------------------------------------
// Range II set selection
// ---------------------------------------------------------------------------

/// Target for one greedy set: offset + sum of weights must land in [lo, hi].
struct GreedyTarget {
  long double offset = 0;
  long double lo = 0;
  long double hi = 0;
};

struct GreedySets {
  std::vector<std::vector<u64>> sets;
  std::vector<long double> sums;  // offset + sum of weights, per set
};

/// Greedy filling in index order: candidates are consumed in ascending order,
/// a candidate is skipped only if it would overshoot hi (or is rejected by
/// `eligible`), and set i closes as soon as its sum reaches lo. Skipped
/// candidates stay available for later sets.
inline GreedySets greedy_interval_sets(std::span<const u64> candidates, const std::function<long double(u64)>& weight,
                                       std::span<const GreedyTarget> targets,
                                       const std::function<bool(std::size_t, u64)>& eligible = {}) {
  GreedySets out;
  std::vector<char> used(candidates.size(), 0);
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const auto& t = targets[i];
    long double sum = t.offset;
    std::vector<u64> set;
    for (std::size_t c = 0; c < candidates.size() && sum < t.lo; ++c) {
      if (used[c]) continue;
      if (eligible && !eligible(i, candidates[c])) continue;
      const long double w = weight(candidates[c]);
      if (sum + w > t.hi) continue;
      sum += w;
      used[c] = 1;
      set.push_back(candidates[c]);
    }
    if (sum < t.lo || sum > t.hi)
      fail(ErrorKind::infeasible, "greedy_interval_sets: set " + std::to_string(i + 1) + " cannot reach its target interval");
    out.sets.push_back(std::move(set));
    out.sums.push_back(sum);
  }
  return out;
}

/// Consecutive ascending blocks of the requested sizes, optionally skipping
/// candidates rejected by `eligible`.
inline std::vector<std::vector<u64>> fixed_size_sets(std::span<const u64> candidates, std::span<const std::size_t> sizes,
                                                     const std::function<bool(std::size_t, u64)>& eligible = {}) {
  std::vector<std::vector<u64>> out;
  std::vector<char> used(candidates.size(), 0);
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    std::vector<u64> set;
    for (std::size_t c = 0; c < candidates.size() && set.size() < sizes[i]; ++c) {
      if (used[c] || (eligible && !eligible(i, candidates[c]))) continue;
      used[c] = 1;
      set.push_back(candidates[c]);
    }
    if (set.size() < sizes[i])
      fail(ErrorKind::infeasible, "fixed_size_sets: insufficient candidates for set " + std::to_string(i + 1) +
                                      " (need " + std::to_string(sizes[i]) + ", found " + std::to_string(set.size()) + ")");
    out.push_back(std::move(set));
  }
  return out;
}

/// Even offsets h strictly between h_1 and h_k that are not in H.
inline std::vector<i64> interior_even_offsets(const AdmissibleTuple& H) {
  std::vector<i64> out;
  if (H.size() < 2) return out;
  i64 h = H.front() + 1;
  if (h % 2 != 0) ++h;
  for (; h < H.back(); h += 2)
    if (!H.contains(h)) out.push_back(h);
  return out;
}

/// Assigns a distinct prime p^(h) to every interior even offset h, ascending h
/// against ascending primes. A prime is skipped for h when nu = -h (mod p)
/// would put p | n + h_j for some j (possible only at small scale).
inline std::vector<std::pair<i64, u64>> block_assignment(const AdmissibleTuple& H, std::span<const u64> range3) {
  const auto offsets = interior_even_offsets(H);
  std::vector<std::pair<i64, u64>> out;
  std::vector<char> used(range3.size(), 0);
  for (i64 h : offsets) {
    bool placed = false;
    for (std::size_t c = 0; c < range3.size(); ++c) {
      if (used[c]) continue;
      const u64 p = range3[c];
      bool ok = true;
      for (i64 hj : H.entries) ok = ok && mod_floor(hj - h, p) != 0;
      if (!ok) continue;
      used[c] = 1;
      out.emplace_back(h, p);
      placed = true;
      break;
    }
    if (!placed) {
      const std::size_t shortfall = offsets.size() - out.size();
      fail(ErrorKind::infeasible, "block_assignment: need " + std::to_string(offsets.size()) + " primes, short by " +
                                      std::to_string(shortfall));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Residue selections
// ---------------------------------------------------------------------------

enum class Provenance { fixed, default_choice, greedy_set, block };

struct Assignment {
  u64 p = 2;
  u64 residue = 0;
  Provenance provenance = Provenance::fixed;
  i64 tag = 0;  // set index i (1-based) for greedy_set, offset h for block

  std::string provenance_name() const {
    switch (provenance) {
      case Provenance::fixed: return "Fixed";
      case Provenance::default_choice: return "Default";
      case Provenance::greedy_set: return "GreedySet(" + std::to_string(tag) + ")";
      case Provenance::block: return "Block(" + std::to_string(tag) + ")";
    }
    return "?";
  }
};

/// Per-prime residues nu_p, combined by CRT into nu mod W.
struct ResidueSelection {
  std::vector<Assignment> assignments;
  Int W = 1;
  Int nu = 0;

  std::vector<u64> primes() const {
    std::vector<u64> ps;
    for (const auto& a : assignments) ps.push_back(a.p);
    return ps;
  }
};

/// Exact CRT over the assignments (moduli are distinct primes).
inline void combine_crt(ResidueSelection& sel) {
  Int W = 1, nu = 0;
  for (const auto& a : sel.assignments) {
    // nu' = nu + W * t with nu + W t = residue (mod p)
    const Int p = to_int(a.p);
    Int inv;
    Int wmod = W % p;
    if (mpz_invert(inv.get_mpz_t(), wmod.get_mpz_t(), p.get_mpz_t()) == 0)
      fail(ErrorKind::internal, "combine_crt: repeated prime " + std::to_string(a.p));
    Int t = (to_int(a.residue) - nu) * inv;
    mpz_fdiv_r(t.get_mpz_t(), t.get_mpz_t(), p.get_mpz_t());
    nu += W * t;
    W *= p;
  }
  sel.W = W;
  sel.nu = nu;
}

/// gcd(nu + h_i, W) = 1 for every i, checked prime by prime.
inline bool satisfies_coprimality(const ResidueSelection& sel, const AdmissibleTuple& H) {
  for (const auto& a : sel.assignments)
    for (i64 h : H.entries)
      if ((a.residue + mod_floor(h, a.p)) % a.p == 0) return false;
  return true;
}

/// Smallest residue per prime keeping gcd(nu + h_i, p) = 1; the plain
/// pre-sieving selection used when only a W prime list is given.
inline ResidueSelection coprime_selection(const AdmissibleTuple& H, std::span<const u64> primes) {
  ResidueSelection sel;
  for (u64 p : primes) {
    std::optional<u64> pick;
    for (u64 r = 0; r < p && !pick; ++r) {
      bool ok = true;
      for (i64 h : H.entries) ok = ok && (r + mod_floor(h, p)) % p != 0;
      if (ok) pick = r;
    }
    if (!pick) fail(ErrorKind::infeasible, "coprime_selection: tuple covers every class mod " + std::to_string(p));
    sel.assignments.push_back({p, *pick, Provenance::fixed, 0});
  }
  combine_crt(sel);
  return sel;
}

enum class RangeVariant { phi, sigma, omega_count };

inline std::string to_string(RangeVariant v) {
  switch (v) {
    case RangeVariant::phi: return "phi";
    case RangeVariant::sigma: return "sigma";
    case RangeVariant::omega_count: return "omega_count";
  }
  return "?";
}

inline RangeVariant parse_range_variant(std::string_view s) {
  if (s == "phi") return RangeVariant::phi;
  if (s == "sigma") return RangeVariant::sigma;
  if (s == "omega_count" || s == "omega" || s == "tau") return RangeVariant::omega_count;
  fail(ErrorKind::usage, "unknown range variant '" + std::string(s) + "'");
}

/// Prime cutoffs for Range I = (2, z1], Range II = (z1, z2], Range III = (z2, z3]
/// together with the per-index Range II targets.
struct RangePlan {
  u64 z1 = 3, z2 = 5, z3 = 7;
  RangeVariant variant = RangeVariant::phi;
  /// phi / sigma: one [lo, hi] per index for the plain weight sum (offset
  /// excluded). Empty means the default targets 4i log 2 <= offset + sum <= (4i+1) log 2.
  std::vector<std::pair<long double, long double>> intervals;
  /// omega_count: cardinalities #P_i.
  std::vector<std::size_t> sizes;

  void validate() const {
    if (!(2 <= z1 && z1 < z2 && z2 < z3)) fail(ErrorKind::usage, "RangePlan: need 2 <= z1 < z2 < z3");
  }

  /// offset added to every set sum: log 2 (phi) or log(3/2) (sigma).
  long double offset() const { return variant == RangeVariant::sigma ? std::log(1.5L) : std::log(2.0L); }

  long double weight(u64 p) const {
    return variant == RangeVariant::sigma ? std::log(static_cast<long double>(p + 1) / p)
                                          : std::log(static_cast<long double>(p) / (p - 1));
  }

  std::vector<GreedyTarget> targets(std::size_t k) const {
    std::vector<GreedyTarget> out;
    const long double off = offset();
    const long double ln2 = std::numbers::ln2_v<long double>;
    for (std::size_t i = 1; i <= k; ++i) {
      if (!intervals.empty()) {
        if (intervals.size() != k) fail(ErrorKind::usage, "RangePlan: need one interval per tuple index");
        out.push_back({off, off + intervals[i - 1].first, off + intervals[i - 1].second});
      } else {
        out.push_back({off, 4 * i * ln2, (4 * i + 1) * ln2});
      }
    }
    return out;
  }
};

inline long double iterated_log(long double x, int times) {
  for (int i = 0; i < times; ++i) {
    if (x <= 0) return -INFINITY;
    x = std::log(x);
  }
  return x;
}

/// Asymptotic cutoffs as documented defaults, clamped below at 3, 5, 7:
/// phi/sigma use (log_4 N, log_3 N / 2, log_3 N); omega_count uses
/// (1/4, 1/2, 1) * log N / (log_2 N)^2 with sizes floor(i log_2 N log_3 N).
inline RangePlan default_range_plan(RangeVariant variant, long double N, std::size_t k) {
  RangePlan plan;
  plan.variant = variant;
  long double a = 0, b = 0, c = 0;
  if (variant == RangeVariant::omega_count) {
    const long double base = std::log(N) / std::pow(iterated_log(N, 2), 2);
    a = base / 4, b = base / 2, c = base;
    const long double l2 = iterated_log(N, 2), l3 = iterated_log(N, 3);
    for (std::size_t i = 1; i <= k; ++i)
      plan.sizes.push_back(static_cast<std::size_t>(std::max<long double>(0, std::floor(i * l2 * l3))));
  } else {
    a = iterated_log(N, 4), b = iterated_log(N, 3) / 2, c = iterated_log(N, 3);
  }
  plan.z1 = std::max<u64>(3, a > 3 ? static_cast<u64>(a) : 3);
  plan.z2 = std::max<u64>(std::max<u64>(5, plan.z1 + 1), b > 5 ? static_cast<u64>(b) : 5);
  plan.z3 = std::max<u64>(std::max<u64>(7, plan.z2 + 1), c > 7 ? static_cast<u64>(c) : 7);
  return plan;
}

/// Intermediate pieces of an assembled selection, kept for inspection.
struct SelectionDetail {
  ResidueSelection selection;
  std::vector<std::vector<u64>> sets;  // P_1..P_k
  std::vector<long double> set_sums;   // phi/sigma only
  std::vector<std::pair<i64, u64>> blocks;
};

/// Chooses nu mod p for every prime p <= z3: nu = 1 (mod 2); defaults in
/// Range I; P_i primes in Range II get nu = 1 - h_i; interior even offsets h
/// get nu = -h modulo their Range III block prime; every other prime gets the
/// default selection. The CRT combination is exact.
inline SelectionDetail assemble_selection(const RangePlan& plan, const AdmissibleTuple& H) {
  plan.validate();
  for (i64 h : H.entries)
    if (h % 2 != 0) fail(ErrorKind::usage, "assemble_selection: tuple entries must be even");
  const std::size_t k = H.size();
  SelectionDetail out;

  // A Range II prime may serve set i only if nu = 1 - h_i keeps p off every n + h_j.
  auto eligible = [&](std::size_t i, u64 p) {
    for (i64 hj : H.entries)
      if (mod_floor(1 + hj - H.entries[i], p) == 0) return false;
    return true;
  };

  const auto range2 = primes_in(plan.z1 + 1, plan.z2 + 1);
  const auto range3 = primes_in(plan.z2 + 1, plan.z3 + 1);

  if (plan.variant == RangeVariant::omega_count) {
    if (plan.sizes.size() != k) fail(ErrorKind::usage, "assemble_selection: need one size per tuple index");
    out.sets = fixed_size_sets(range2, plan.sizes, eligible);
  } else {
    const auto targets = plan.targets(k);
    auto g = greedy_interval_sets(range2, [&](u64 p) { return plan.weight(p); }, targets, eligible);
    out.sets = std::move(g.sets);
    out.set_sums = std::move(g.sums);
  }
  out.blocks = block_assignment(H, range3);

  std::map<u64, Assignment> by_prime;
  for (std::size_t i = 0; i < out.sets.size(); ++i)
    for (u64 p : out.sets[i])
      by_prime[p] = {p, mod_floor(1 - H.entries[i], p), Provenance::greedy_set, static_cast<i64>(i + 1)};
  for (auto [h, p] : out.blocks) by_prime[p] = {p, mod_floor(-h, p), Provenance::block, h};

  auto& sel = out.selection;
  sel.assignments.push_back({2, 1, Provenance::fixed, 0});
  for (u64 p : primes_in(3, plan.z3 + 1)) {
    if (auto it = by_prime.find(p); it != by_prime.end()) {
      sel.assignments.push_back(it->second);
    } else {
      sel.assignments.push_back({p, default_residue(p, H), Provenance::default_choice, 0});
    }
  }
  combine_crt(sel);
  if (!satisfies_coprimality(sel, H)) fail(ErrorKind::internal, "assemble_selection: gcd(nu + h_i, W) > 1");
  for (const auto& a : sel.assignments)
    if (mod_floor(sel.nu, a.p) != a.residue) fail(ErrorKind::internal, "assemble_selection: CRT mismatch");
  return out;
}

/// True iff every prime in [n + h_1, n + h_k] sits at an offset in H.
/// Offsets with a known factor from the selection are discarded without a
/// primality test.
inline bool window_check(const Int& n, const AdmissibleTuple& H, const ResidueSelection& sel) {
  const Int diff = n - sel.nu;
  if (!mpz_divisible_p(diff.get_mpz_t(), sel.W.get_mpz_t()))
    fail(ErrorKind::usage, "window_check: n is not congruent to nu modulo W");
  for (i64 h = H.front(); h <= H.back(); ++h) {
    if (H.contains(h)) continue;
    bool has_factor = false;
    for (const auto& a : sel.assignments) {
      if ((a.residue + mod_floor(h, a.p)) % a.p == 0) {
        Int v = n + to_int(h);
        has_factor = v != to_int(a.p);
        break;
      }
    }
    if (has_factor) continue;
    if (is_prime(Int(n + to_int(h)))) return false;
  }
  return true;
}

inline nlohmann::json to_json(const ResidueSelection& sel) {
  nlohmann::json j;
  j["W"] = to_string(sel.W);
  j["nu"] = to_string(sel.nu);
  j["assignments"] = nlohmann::json::array();
  for (const auto& a : sel.assignments)
    j["assignments"].push_back({{"p", a.p}, {"residue", a.residue}, {"provenance", a.provenance_name()}});
  return j;
}

inline ResidueSelection selection_from_json(const nlohmann::json& j) {
  ResidueSelection sel;
  for (const auto& a : j.at("assignments")) {
    Assignment as;
    as.p = a.at("p").get<u64>();
    as.residue = a.at("residue").get<u64>();
    const std::string prov = a.at("provenance").get<std::string>();
    if (prov == "Fixed") {
      as.provenance = Provenance::fixed;
    } else if (prov == "Default") {
      as.provenance = Provenance::default_choice;
    } else if (prov.starts_with("GreedySet(")) {
      as.provenance = Provenance::greedy_set;
      as.tag = std::stoll(prov.substr(10));
    } else if (prov.starts_with("Block(")) {
      as.provenance = Provenance::block;
      as.tag = std::stoll(prov.substr(6));
    } else {
      fail(ErrorKind::usage, "unknown provenance " + prov);
    }
    sel.assignments.push_back(as);
  }
  combine_crt(sel);
  if (j.contains("W") && Int(j.at("W").get<std::string>()) != sel.W) fail(ErrorKind::usage, "selection JSON: W mismatch");
  if (j.contains("nu") && Int(j.at("nu").get<std::string>()) != sel.nu) fail(ErrorKind::usage, "selection JSON: nu mismatch");
  return sel;
}

}  // namespace monorun
