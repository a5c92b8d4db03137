#pragma once

#include <string>

#include "gsp2p/milp.hpp"

namespace gsp2p::milp {

// CPLEX LP text format (Minimize / Subject To / Bounds / Binaries / End),
// deterministic ordering so exports are byte-stable.
std::string write_lp(const Model& model);
void write_lp_file(const Model& model, const std::string& path);

// Reads the subset of the LP format that write_lp emits (used for round-trip
// verification and for re-importing edited models).
Model parse_lp(const std::string& text);
Model read_lp_file(const std::string& path);

}  // namespace gsp2p::milp
