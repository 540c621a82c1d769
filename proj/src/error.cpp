#include "regraph/error.hpp"

namespace regraph {

std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::invalid_parameter: return "invalid-parameter";
    case Errc::source_departure_forbidden: return "source-departure-forbidden";
    case Errc::unknown_peer: return "unknown-peer";
    case Errc::oracle_limit_exceeded: return "oracle-limit-exceeded";
    case Errc::analysis_limited_to_two_flows: return "analysis-limited-to-two-flows";
    case Errc::parameter_out_of_range: return "parameter-out-of-range";
    case Errc::insufficient_slots: return "insufficient-slots";
    case Errc::invariant_violation: return "invariant-violation";
  }
  return "unknown";
}

Error::Error(Errc code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

void fail(Errc code, const std::string& what) { throw Error(code, what); }

}  // namespace regraph
