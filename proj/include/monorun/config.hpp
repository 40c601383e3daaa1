#pragma once
/// @file config.hpp
/// @brief key = value configuration files and the sieve configuration built
///        from them.

#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "bigint.hpp"
#include "errors.hpp"
#include "maynard_sieve.hpp"
#include "mk_optimizer.hpp"
#include "tuple_engineering.hpp"

namespace monorun {

/// Lines of the form `key = value`; `#` starts a comment; blank lines ignored.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(const std::string& text) {
    KeyValueConfig c;
    std::istringstream in(text);
    std::string line;
    for (int lineno = 1; std::getline(in, line); ++lineno) {
      if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      line = trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) fail(ErrorKind::usage, "config line " + std::to_string(lineno) + ": expected key = value");
      const std::string key = trim(line.substr(0, eq));
      if (key.empty()) fail(ErrorKind::usage, "config line " + std::to_string(lineno) + ": empty key");
      if (c.values_.count(key)) fail(ErrorKind::usage, "config line " + std::to_string(lineno) + ": duplicate key " + key);
      c.values_[key] = trim(line.substr(eq + 1));
    }
    return c;
  }

  static KeyValueConfig load(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::usage, "cannot open config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  void set(const std::string& key, const std::string& value) { values_[key] = value; }

  const std::string& get(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) fail(ErrorKind::usage, "config: missing key " + key);
    return it->second;
  }

  u64 get_u64(const std::string& key) const { return parse_u64(get(key), key); }

  Rational get_rational(const std::string& key) const {
    try {
      Rational r(get(key));
      r.canonicalize();
      return r;
    } catch (const std::invalid_argument&) {
      fail(ErrorKind::usage, "config: " + key + " is not a rational number");
    }
  }

  std::vector<i64> get_i64_list(const std::string& key) const {
    std::vector<i64> out;
    for (const auto& item : split(get(key))) {
      try {
        std::size_t used = 0;
        out.push_back(std::stoll(item, &used));
        if (used != item.size()) throw std::invalid_argument(item);
      } catch (const std::exception&) {
        fail(ErrorKind::usage, "config: " + key + " has a non-integer entry '" + item + "'");
      }
    }
    return out;
  }

  std::vector<u64> get_u64_list(const std::string& key) const {
    std::vector<u64> out;
    for (const auto& item : split(get(key))) out.push_back(parse_u64(item, key));
    return out;
  }

  std::vector<Rational> get_rational_list(const std::string& key) const {
    std::vector<Rational> out;
    for (const auto& item : split(get(key))) {
      try {
        Rational r(item);
        r.canonicalize();
        out.push_back(r);
      } catch (const std::invalid_argument&) {
        fail(ErrorKind::usage, "config: " + key + " has a non-rational entry '" + item + "'");
      }
    }
    return out;
  }

  /// Fails on any key outside `allowed`.
  void require_known(const std::set<std::string>& allowed) const {
    for (const auto& [k, v] : values_)
      if (!allowed.count(k)) fail(ErrorKind::usage, "config: unknown key " + k);
  }

  static std::vector<std::string> split(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, ',')) {
      cur = trim(cur);
      if (!cur.empty()) out.push_back(cur);
    }
    return out;
  }

 private:
  static std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  }

  static u64 parse_u64(const std::string& s, const std::string& key) {
    try {
      std::size_t used = 0;
      if (!s.empty() && s[0] == '-') throw std::invalid_argument(s);
      const u64 v = std::stoull(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      fail(ErrorKind::usage, "config: " + key + " is not a nonnegative integer ('" + s + "')");
    }
  }

  std::map<std::string, std::string> values_;
};

inline const std::set<std::string>& sieve_config_keys() {
  static const std::set<std::string> keys{"N",  "k",  "theta", "theta_num", "theta_den", "R",        "tuple",
                                          "w_primes", "plan", "z1", "z2", "z3", "intervals", "sizes", "p_bad",
                                          "F_degree", "F_coeffs", "k_cap", "R_cap"};
  return keys;
}

/// Builds a sieve configuration. Defaults: N = 10^4, k = 1, theta = 1/5,
/// tuple = 0, 2, 6, ... (first k entries), W primes 2, 3, F = 1 - sum t_i.
inline SieveConfig sieve_config_from(const KeyValueConfig& kv) {
  kv.require_known(sieve_config_keys());
  SieveConfig cfg;
  if (kv.has("N")) cfg.N = kv.get_u64("N");
  if (kv.has("k")) cfg.k = static_cast<unsigned>(kv.get_u64("k"));
  if (kv.has("k_cap")) cfg.k_cap = static_cast<unsigned>(kv.get_u64("k_cap"));
  if (kv.has("R_cap")) cfg.R_cap = kv.get_u64("R_cap");
  if (cfg.k == 0) fail(ErrorKind::usage, "config: k must be positive");
  if (cfg.k > cfg.k_cap) fail(ErrorKind::resource, "config: k=" + std::to_string(cfg.k) + " exceeds the cap " + std::to_string(cfg.k_cap));
  if (kv.has("theta")) {
    cfg.theta = kv.get_rational("theta");
  } else if (kv.has("theta_num") || kv.has("theta_den")) {
    cfg.theta = Rational(to_int(kv.get_u64("theta_num")), to_int(kv.get_u64("theta_den")));
    cfg.theta.canonicalize();
  }
  if (kv.has("R")) cfg.R_explicit = kv.get_u64("R");
  if (kv.has("p_bad")) cfg.p_bad = kv.get_u64("p_bad");

  if (kv.has("tuple")) {
    auto entries = kv.get_i64_list("tuple");
    std::sort(entries.begin(), entries.end());
    const auto rep = is_admissible(entries);
    if (!rep.admissible) fail(ErrorKind::usage, "config: tuple is not admissible (covers every class mod " + std::to_string(*rep.covering_prime) + ")");
    cfg.tuple = AdmissibleTuple{entries};
  } else {
    static const i64 small[] = {0, 2, 6, 8, 12, 18, 20, 26};
    cfg.tuple = AdmissibleTuple{std::vector<i64>(small, small + std::min<unsigned>(cfg.k, 8))};
  }
  if (cfg.tuple.size() != cfg.k) fail(ErrorKind::usage, "config: tuple has " + std::to_string(cfg.tuple.size()) + " entries, k=" + std::to_string(cfg.k));

  if (kv.has("plan")) {
    RangePlan plan;
    plan.variant = parse_range_variant(kv.get("plan"));
    if (kv.has("z1")) plan.z1 = kv.get_u64("z1");
    if (kv.has("z2")) plan.z2 = kv.get_u64("z2");
    if (kv.has("z3")) plan.z3 = kv.get_u64("z3");
    if (kv.has("intervals")) {
      for (const auto& item : KeyValueConfig::split(kv.get("intervals"))) {
        const auto colon = item.find(':');
        if (colon == std::string::npos) fail(ErrorKind::usage, "config: intervals entries are lo:hi");
        plan.intervals.emplace_back(std::stold(item.substr(0, colon)), std::stold(item.substr(colon + 1)));
      }
    }
    if (kv.has("sizes"))
      for (u64 s : kv.get_u64_list("sizes")) plan.sizes.push_back(static_cast<std::size_t>(s));
    cfg.selection = assemble_selection(plan, cfg.tuple).selection;
  } else {
    const std::vector<u64> primes = kv.has("w_primes") ? kv.get_u64_list("w_primes") : std::vector<u64>{2, 3};
    cfg.selection = coprime_selection(cfg.tuple, primes);
  }

  if (kv.has("F_coeffs")) {
    const unsigned degree = kv.has("F_degree") ? static_cast<unsigned>(kv.get_u64("F_degree")) : 0;
    const auto basis = symmetric_basis(cfg.k, degree);
    const auto coeffs = kv.get_rational_list("F_coeffs");
    if (coeffs.size() != basis.size())
      fail(ErrorKind::usage, "config: F_coeffs needs " + std::to_string(basis.size()) + " entries for degree " + std::to_string(degree));
    cfg.F = SimplexPolynomial(cfg.k);
    for (std::size_t i = 0; i < basis.size(); ++i) cfg.F += basis[i] * coeffs[i];
  } else {
    cfg.F = SimplexPolynomial::one_minus_sum(cfg.k);
  }
  cfg.validate();
  return cfg;
}

}  // namespace monorun
