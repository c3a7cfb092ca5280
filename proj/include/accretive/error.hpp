#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace accretive {

enum class ErrorKind {
    invalid_argument,
    invalid_exponent,
    space_mismatch,
    out_of_range,
    multivalued_at_point,
    kind_unsupported,
    solver_failure,
    step_too_large,
    fixedpoint_stall,
    unsupported_order,
    grid_too_coarse,
    negative_initial_data,
    q_out_of_window,
    config_parse,
    no_input,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

/// Raised when an iterative solve stops short of its tolerance.
/// `interval`/`substep` are -1 outside of a time evolution.
class SolverFailure : public Error {
public:
    SolverFailure(ErrorKind kind, const std::string& what, std::vector<double> history)
        : Error(kind, what), residual_history(std::move(history)) {}

    std::vector<double> residual_history;
    int interval = -1;
    int substep = -1;
};

}  // namespace accretive
