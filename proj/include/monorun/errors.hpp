#pragma once

#include <stdexcept>
#include <string>

namespace monorun {

/// Failure categories. The CLI maps these onto exit statuses.
enum class ErrorKind {
  usage,        // bad arguments or preconditions
  config,       // invalid configuration (limits, budgets)
  infeasible,   // a construction cannot be completed with the given inputs
  not_found,    // a search exhausted its cap
  resource,     // request exceeds a configured computational cap
  degenerate,   // mathematically degenerate input (e.g. S1 = 0)
  not_applicable,  // a formula is restricted away from the input
  internal      // broken invariant; always a bug
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool cond, const std::string& what) {
  if (!cond) fail(ErrorKind::usage, what);
}

inline const char* kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::usage: return "usage";
    case ErrorKind::config: return "config";
    case ErrorKind::infeasible: return "infeasible";
    case ErrorKind::not_found: return "not-found";
    case ErrorKind::resource: return "resource";
    case ErrorKind::degenerate: return "degenerate";
    case ErrorKind::not_applicable: return "not-applicable";
    case ErrorKind::internal: return "internal";
  }
  return "unknown";
}

}  // namespace monorun
