#pragma once

#include <ostream>

#include "adhocgrid/dynamics.hpp"
#include "adhocgrid/network.hpp"

namespace adhocgrid {

// One row per sample, 9 significant digits, '.' radix, comma separated, units
// in the header. Aborted runs keep their partial rows and end with a comment
// line naming the abort reason.
void write_trajectory_csv(std::ostream& out, const NetworkGraph& g, const Trajectory& traj);

}  // namespace adhocgrid
