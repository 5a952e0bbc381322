#pragma once

#include <stdexcept>
#include <string>

namespace lsoc {

enum class errc {
  // problem validation
  self_loop,
  duplicate_edge,
  index_out_of_range,
  non_finite_value,
  non_positive_horizon,
  size_mismatch,
  // document handling
  parse,
  io,
  // numerics
  non_finite,
  positivity_lost,
  no_convergence,
  precondition_violated,
  overflow,
  // solver queries
  out_of_range,
  grid_mismatch,
  not_strongly_connected,
  // simulation
  non_finite_intensity,
  // invariants that valid inputs cannot trip
  internal,
};

inline const char* errc_name(errc c) {
  switch (c) {
    case errc::self_loop: return "self_loop";
    case errc::duplicate_edge: return "duplicate_edge";
    case errc::index_out_of_range: return "index_out_of_range";
    case errc::non_finite_value: return "non_finite_value";
    case errc::non_positive_horizon: return "non_positive_horizon";
    case errc::size_mismatch: return "size_mismatch";
    case errc::parse: return "parse";
    case errc::io: return "io";
    case errc::non_finite: return "non_finite";
    case errc::positivity_lost: return "positivity_lost";
    case errc::no_convergence: return "no_convergence";
    case errc::precondition_violated: return "precondition_violated";
    case errc::overflow: return "overflow";
    case errc::out_of_range: return "out_of_range";
    case errc::grid_mismatch: return "grid_mismatch";
    case errc::not_strongly_connected: return "not_strongly_connected";
    case errc::non_finite_intensity: return "non_finite_intensity";
    case errc::internal: return "internal";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  errc code() const noexcept { return code_; }

 private:
  errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& what) { throw Error(code, what); }

}  // namespace lsoc
