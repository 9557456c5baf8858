#include "mimocc/errors.hpp"

namespace mimocc {

const char* errc_name(Errc code) {
  switch (code) {
    case Errc::integer_gain_violation: return "IntegerGainViolation";
    case Errc::too_few_users: return "TooFewUsers";
    case Errc::non_positive: return "NonPositive";
    case Errc::unknown_user: return "UnknownUser";
    case Errc::bad_omega: return "BadOmega";
    case Errc::search_exhausted: return "SearchExhausted";
    case Errc::indivisible_slice: return "IndivisibleSlice";
    case Errc::no_feasible_point: return "NoFeasiblePoint";
    case Errc::exhausted_subpackets: return "ExhaustedSubpackets";
    case Errc::null_space_too_small: return "NullSpaceTooSmall";
    case Errc::singular_effective_channel: return "SingularEffectiveChannel";
    case Errc::region_too_large: return "RegionTooLarge";
    case Errc::solver_failed: return "SolverFailed";
    case Errc::diverged: return "Diverged";
    case Errc::insufficient_points: return "InsufficientPoints";
    case Errc::io_error: return "IoError";
    case Errc::invalid_argument: return "InvalidArgument";
  }
  return "UnknownError";
}

}  // namespace mimocc
