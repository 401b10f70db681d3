#pragma once

#include "quadcarve/tlayout.hpp"
#include "quadcarve/tracer.hpp"

namespace quadcarve {

// Layout whose edges are the traced separatrices and the boundary loops,
// split at singularities, corners, crossings and terminations.
TLayout layout_from_separatrices(const Surface& surface, const std::vector<Singularity>& singularities,
                                 const TraceResult& trace);

}  // namespace quadcarve
