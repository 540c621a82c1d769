#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace regraph {

enum class Errc {
  invalid_parameter,
  source_departure_forbidden,
  unknown_peer,
  oracle_limit_exceeded,
  analysis_limited_to_two_flows,
  parameter_out_of_range,
  insufficient_slots,
  invariant_violation,
};

std::string_view to_string(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what);

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] void fail(Errc code, const std::string& what);

}  // namespace regraph
