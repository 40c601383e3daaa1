#pragma once
/// @file run_finder.hpp
/// @brief Exhaustive search for runs of consecutive primes on which f(p-1)
///        (f in {phi, sigma, omega, tau}) or s_g(p) is strictly increasing,
///        strictly decreasing or constant.
///
/// "Consecutive" always refers to the full prime sequence. A run is reported
/// only once it is closed, i.e. the relation is known to fail against the next
/// prime, so results for a smaller bound are a prefix of those for a larger one.

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <json.hpp>

#include "core_arith.hpp"

namespace monorun {

using RunValue = u128;

enum class RunMode { increasing, decreasing, constant };

inline std::string to_string(RunMode m) {
  switch (m) {
    case RunMode::increasing: return "increasing";
    case RunMode::decreasing: return "decreasing";
    case RunMode::constant: return "constant";
  }
  return "?";
}

inline RunMode parse_run_mode(std::string_view s) {
  if (s == "increasing" || s == "inc") return RunMode::increasing;
  if (s == "decreasing" || s == "dec") return RunMode::decreasing;
  if (s == "constant" || s == "const") return RunMode::constant;
  fail(ErrorKind::usage, "unknown run mode '" + std::string(s) + "'");
}

inline bool relation_holds(RunMode m, RunValue a, RunValue b) {
  switch (m) {
    case RunMode::increasing: return a < b;
    case RunMode::decreasing: return a > b;
    case RunMode::constant: return a == b;
  }
  return false;
}

/// The function evaluated along the prime sequence: f(p-1) for the shift
/// functions, s_g(p) for digit sums.
struct RunFunction {
  enum class Kind { phi_shift, sigma_shift, omega_shift, tau_shift, digit_sum } kind = Kind::phi_shift;
  u64 base = 10;

  std::string name() const {
    switch (kind) {
      case Kind::phi_shift: return "phi_shift";
      case Kind::sigma_shift: return "sigma_shift";
      case Kind::omega_shift: return "omega_shift";
      case Kind::tau_shift: return "tau_shift";
      case Kind::digit_sum: return "digit_sum(" + std::to_string(base) + ")";
    }
    return "?";
  }

  /// Accepts phi_shift, sigma_shift, omega_shift, tau_shift, digit_sum(g) or
  /// digit_sum (base 10).
  static RunFunction parse(std::string_view s) {
    if (s == "phi_shift") return {Kind::phi_shift, 10};
    if (s == "sigma_shift") return {Kind::sigma_shift, 10};
    if (s == "omega_shift") return {Kind::omega_shift, 10};
    if (s == "tau_shift") return {Kind::tau_shift, 10};
    if (s == "digit_sum") return {Kind::digit_sum, 10};
    constexpr std::string_view prefix = "digit_sum(";
    if (s.starts_with(prefix) && s.ends_with(")")) {
      auto digits = s.substr(prefix.size(), s.size() - prefix.size() - 1);
      u64 g = 0;
      auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), g);
      if (ec == std::errc() && ptr == digits.data() + digits.size() && g >= 2) return {Kind::digit_sum, g};
    }
    fail(ErrorKind::usage, "unknown function id '" + std::string(s) + "'");
  }

  static RunFunction digit(u64 g) { return {Kind::digit_sum, g}; }
  static RunFunction phi() { return {Kind::phi_shift, 10}; }
  static RunFunction sigma() { return {Kind::sigma_shift, 10}; }
  static RunFunction omega() { return {Kind::omega_shift, 10}; }
  static RunFunction tau() { return {Kind::tau_shift, 10}; }
};

struct RunQuery {
  RunFunction function;
  RunMode mode = RunMode::increasing;
  std::size_t min_length = 2;
  u64 search_bound = 1000;
  /// Also emit every length-min_length window inside a longer maximal run.
  bool all_windows = false;
  unsigned threads = 1;
};

struct RunRecord {
  u64 start_index = 0;  // 0-based position in the full prime sequence (p_0 = 2)
  std::vector<u64> primes;
  std::vector<RunValue> values;
  bool maximal = true;

  std::size_t length() const { return primes.size(); }
  bool operator==(const RunRecord&) const = default;
};

// ---------------------------------------------------------------------------
// Prime/value stream
// ---------------------------------------------------------------------------

namespace detail {

struct Segment {
  std::vector<u64> primes;
  std::vector<RunValue> values;
};

inline Segment evaluate_segment(const SegmentedSieve& sieve, u64 lo, u64 hi, const RunFunction& fn) {
  Segment seg;
  sieve.primes(lo, hi, seg.primes);
  if (fn.kind == RunFunction::Kind::digit_sum) {
    seg.values.reserve(seg.primes.size());
    for (u64 p : seg.primes) seg.values.push_back(digit_sum(p, fn.base));
    return seg;
  }
  ArithFn af = ArithFn::phi;
  switch (fn.kind) {
    case RunFunction::Kind::phi_shift: af = ArithFn::phi; break;
    case RunFunction::Kind::sigma_shift: af = ArithFn::sigma; break;
    case RunFunction::Kind::omega_shift: af = ArithFn::omega; break;
    case RunFunction::Kind::tau_shift: af = ArithFn::tau; break;
    case RunFunction::Kind::digit_sum: break;
  }
  seg.values = shifted_values(seg.primes, lo, hi, sieve.base_primes(), af);
  return seg;
}

}  // namespace detail

/// Walks the primes in [lo, cap) in order, evaluating the run function in
/// blocks (optionally in parallel) and merging blocks in order. The callback
/// receives (index, prime, value) and returns false to stop.
class PrimeValueStream {
 public:
  static constexpr u64 kBlock = u64{1} << 18;

  PrimeValueStream(RunFunction fn, u64 cap, unsigned threads = 1)
      : fn_(fn), cap_(cap), threads_(std::max(1u, threads)), sieve_(cap + 1) {}

  /// Starts at prime `first_prime` whose 0-based index is `first_index`.
  template <class Callback>
  u64 run(u64 first_prime, u64 first_index, Callback&& cb) const {
    u64 index = first_index;
    u64 lo = first_prime;
    while (lo < cap_) {
      std::vector<detail::Segment> batch(threads_);
      std::vector<std::pair<u64, u64>> ranges;
      for (unsigned t = 0; t < threads_ && lo < cap_; ++t) {
        const u64 hi = std::min(cap_, lo + kBlock);
        ranges.emplace_back(lo, hi);
        lo = hi;
      }
      if (ranges.size() == 1) {
        batch[0] = detail::evaluate_segment(sieve_, ranges[0].first, ranges[0].second, fn_);
      } else {
        std::vector<std::thread> workers;
        for (std::size_t t = 0; t < ranges.size(); ++t)
          workers.emplace_back([&, t] { batch[t] = detail::evaluate_segment(sieve_, ranges[t].first, ranges[t].second, fn_); });
        for (auto& w : workers) w.join();
      }
      for (std::size_t t = 0; t < ranges.size(); ++t) {
        const auto& seg = batch[t];
        for (std::size_t j = 0; j < seg.primes.size(); ++j) {
          if (!cb(index, seg.primes[j], seg.values[j])) return seg.primes[j];
          ++index;
        }
      }
    }
    return cap_;
  }

 private:
  RunFunction fn_;
  u64 cap_;
  unsigned threads_;
  SegmentedSieve sieve_;
};

/// Upper bound on the first prime >= x (Bertrand), used to size streams.
inline u64 next_prime_reach(u64 x) { return 2 * std::max<u64>(x, 2) + 2; }

// ---------------------------------------------------------------------------
// Run tracking
// ---------------------------------------------------------------------------

/// Maximal-run state machine over the ordered prime/value stream.
class RunTracker {
 public:
  RunTracker(RunMode mode, std::size_t min_length) : mode_(mode), min_length_(min_length) {}

  /// Feeds the next element; returns the run closed by it, if it qualifies.
  std::optional<RunRecord> push(u64 index, u64 prime, RunValue value) {
    std::optional<RunRecord> closed;
    if (!current_.primes.empty() && relation_holds(mode_, current_.values.back(), value)) {
      current_.primes.push_back(prime);
      current_.values.push_back(value);
      return closed;
    }
    if (current_.primes.size() >= min_length_) closed = std::move(current_);
    current_ = RunRecord{index, {prime}, {value}, true};
    return closed;
  }

  /// Length of the open run (the one containing the latest element).
  std::size_t open_length() const { return current_.primes.size(); }

 private:
  RunMode mode_;
  std::size_t min_length_;
  RunRecord current_;
};

inline void check_query(const RunQuery& q) {
  if (q.min_length < 2) fail(ErrorKind::usage, "min_length must be >= 2");
}

inline void emit_run(const RunQuery& q, RunRecord run, std::vector<RunRecord>& out) {
  if (!q.all_windows || run.length() == q.min_length) {
    out.push_back(std::move(run));
    return;
  }
  for (std::size_t s = 0; s + q.min_length <= run.length(); ++s) {
    RunRecord w;
    w.start_index = run.start_index + s;
    w.primes.assign(run.primes.begin() + s, run.primes.begin() + s + q.min_length);
    w.values.assign(run.values.begin() + s, run.values.begin() + s + q.min_length);
    w.maximal = false;
    out.push_back(std::move(w));
  }
  out.push_back(std::move(run));
}

/// Every maximal run of length >= min_length whose primes are all below
/// search_bound, ordered by start index. With all_windows, the non-maximal
/// length-min_length windows of each longer run precede it.
inline std::vector<RunRecord> find_runs(const RunQuery& q) {
  check_query(q);
  if (q.search_bound < 3) fail(ErrorKind::usage, "search_bound must be >= 3");
  std::vector<RunRecord> out;
  RunTracker tracker(q.mode, q.min_length);
  PrimeValueStream stream(q.function, next_prime_reach(q.search_bound), q.threads);
  stream.run(2, 0, [&](u64 index, u64 prime, RunValue value) {
    auto closed = tracker.push(index, prime, value);
    if (closed) emit_run(q, std::move(*closed), out);
    return prime < q.search_bound;  // the first prime >= bound only closes runs
  });
  return out;
}

/// Exact histogram (length -> count) of maximal runs of length >= 2 below the bound.
inline std::map<std::size_t, u64> run_statistics(RunFunction fn, RunMode mode, u64 search_bound, unsigned threads = 1) {
  RunQuery q{fn, mode, 2, search_bound, false, threads};
  std::map<std::size_t, u64> hist;
  for (const auto& r : find_runs(q)) ++hist[r.length()];
  return hist;
}

// ---------------------------------------------------------------------------
// First-occurrence search with checkpoints
// ---------------------------------------------------------------------------

/// Resumable search state. The scan is always cut at a relation break, so
/// resuming from (bound_reached, last_index) starts a fresh run exactly there.
struct Checkpoint {
  std::string function;
  RunMode mode = RunMode::increasing;
  u64 bound_reached = 2;  // prime at which the scan resumes
  u64 last_index = 0;     // its 0-based index

  std::string serialize() const {
    return function + "," + to_string(mode) + "," + std::to_string(bound_reached) + "," + std::to_string(last_index) + "\n";
  }

  static Checkpoint parse(const std::string& line) {
    std::vector<std::string> parts;
    std::stringstream ss(line);
    std::string item;
    // function ids may contain ',' only inside parentheses; they never do here.
    while (std::getline(ss, item, ',')) parts.push_back(item);
    if (parts.size() != 4) fail(ErrorKind::usage, "malformed checkpoint: " + line);
    Checkpoint c;
    c.function = parts[0];
    c.mode = parse_run_mode(parts[1]);
    c.bound_reached = std::stoull(parts[2]);
    while (!parts[3].empty() && (parts[3].back() == '\n' || parts[3].back() == '\r')) parts[3].pop_back();
    c.last_index = std::stoull(parts[3]);
    return c;
  }

  static Checkpoint load(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::usage, "cannot read checkpoint " + path);
    std::string line;
    std::getline(in, line);
    return parse(line);
  }

  void save(const std::string& path) const {
    std::ofstream out(path, std::ios::trunc);
    if (!out) fail(ErrorKind::usage, "cannot write checkpoint " + path);
    out << serialize();
  }
};

struct FirstRunResult {
  std::optional<RunRecord> run;
  u64 bound_searched = 0;  // all primes below this were examined
};

inline constexpr u64 kFirstRunSegment = 1'000'000;

/// The run with minimal start index satisfying the query (search_bound is
/// ignored). The search proceeds through segments 10^6 * 2^j up to `cap`; at
/// each segment boundary a checkpoint is reported via `on_checkpoint`.
inline FirstRunResult first_run(const RunQuery& q, u64 cap, const std::optional<Checkpoint>& resume = std::nullopt,
                                const std::function<void(const Checkpoint&)>& on_checkpoint = {}) {
  check_query(q);
  if (cap < 3) fail(ErrorKind::usage, "first_run cap must be >= 3");
  u64 start_prime = 2, start_index = 0;
  if (resume) {
    if (resume->function != q.function.name() || resume->mode != q.mode)
      fail(ErrorKind::usage, "checkpoint does not match query");
    start_prime = resume->bound_reached;
    start_index = resume->last_index;
  }
  FirstRunResult result;
  RunTracker tracker(q.mode, q.min_length);
  u64 next_boundary = kFirstRunSegment;
  while (next_boundary <= start_prime) next_boundary *= 2;
  bool checkpoint_pending = false;
  PrimeValueStream stream(q.function, next_prime_reach(cap), q.threads);
  u64 last_prime = start_prime;
  stream.run(start_prime, start_index, [&](u64 index, u64 prime, RunValue value) {
    last_prime = prime;
    auto closed = tracker.push(index, prime, value);
    if (closed) {
      result.run = std::move(closed);
      return false;
    }
    if (prime >= next_boundary) {
      checkpoint_pending = true;
      while (next_boundary <= prime) next_boundary *= 2;
    }
    if (checkpoint_pending && tracker.open_length() == 1) {
      checkpoint_pending = false;
      if (on_checkpoint) on_checkpoint(Checkpoint{q.function.name(), q.mode, prime, index});
    }
    return prime < cap;  // the first prime >= cap only closes runs
  });
  result.bound_searched = result.run ? last_prime : cap;
  return result;
}

// ---------------------------------------------------------------------------
// Output
// ---------------------------------------------------------------------------

inline std::string join_values(const std::vector<u64>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

inline std::string join_values(const std::vector<RunValue>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + to_string(v[i]);
  return s;
}

inline std::string runs_csv(const std::vector<RunRecord>& runs, const RunQuery& q) {
  std::string out = "start_index,length,mode,function,primes,values\n";
  for (const auto& r : runs) {
    out += std::to_string(r.start_index) + "," + std::to_string(r.length()) + "," + to_string(q.mode) + "," +
           q.function.name() + ",\"" + join_values(r.primes) + "\",\"" + join_values(r.values) + "\"\n";
  }
  return out;
}

/// JSON records with the CSV fields; values are decimal strings.
inline nlohmann::json runs_json(const std::vector<RunRecord>& runs, const RunQuery& q) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : runs) {
    std::vector<std::string> values;
    for (RunValue v : r.values) values.push_back(to_string(v));
    arr.push_back({{"start_index", r.start_index},
                   {"length", r.length()},
                   {"mode", to_string(q.mode)},
                   {"function", q.function.name()},
                   {"primes", r.primes},
                   {"values", values},
                   {"maximal", r.maximal}});
  }
  return arr;
}

}  // namespace monorun
