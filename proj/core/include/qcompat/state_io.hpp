#pragma once

// JSON file formats.
//
// States:       {"dim": D, "states": [{"label": s, "matrix_re": [[..]], "matrix_im": [[..]]}]}
// Constraints:  {"observables": [{"matrix_re": .., "matrix_im": ..}], "values": [..]}
//
// matrix_im may be omitted for real matrices.

#include <filesystem>
#include <string>
#include <vector>

#include "qcompat/compat.hpp"
#include "qcompat/maxent.hpp"

namespace qcompat {

/// Labels must be unique. Throws ParseError on malformed JSON or schema and
/// ValidationError naming the offending label on a failed state invariant.
StateSet parse_states(const std::string& json_text, double tol = kDensityTol);
StateSet parse_state_file(const std::filesystem::path& path, double tol = kDensityTol);

/// Doubles are written with round-trip precision.
std::string states_to_json(const StateSet& s);
void write_state_file(const std::filesystem::path& path, const StateSet& s);

struct ConstraintSet {
  Index dim = 0;
  std::vector<ExpectationConstraint> constraints;
};

ConstraintSet parse_constraints(const std::string& json_text);
ConstraintSet parse_constraints_file(const std::filesystem::path& path);

}  // namespace qcompat
