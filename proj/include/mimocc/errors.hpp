#pragma once

#include <stdexcept>
#include <string>

namespace mimocc {

// Error codes for every failure mode the library surfaces. Optimizers that
// can return a usable best iterate report `converged = false` in their result
// structs instead of throwing.
enum class Errc {
  integer_gain_violation,
  too_few_users,
  non_positive,
  unknown_user,
  bad_omega,
  search_exhausted,
  indivisible_slice,
  no_feasible_point,
  exhausted_subpackets,
  null_space_too_small,
  singular_effective_channel,
  region_too_large,
  solver_failed,
  diverged,
  insufficient_points,
  io_error,
  invalid_argument,
};

const char* errc_name(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what),
        code_(code) {}

  Errc code() const { return code_; }

 private:
  Errc code_;
};

}  // namespace mimocc
