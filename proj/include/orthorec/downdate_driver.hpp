#pragma once

#include <cstddef>

#include "orthorec/iep.hpp"
#include "orthorec/poly_downdate.hpp"
#include "orthorec/rational_downdate.hpp"

namespace orthorec {

enum class PolyMethod { explicit1, implicit1, implicit2, eigenvector };

struct DowndateStepResult {
    int dropped_row = 0;              // row of Q (node index) that was removed
    double deflation_residual = 0.0;
    DowndateDiagnostics diagnostics;  // polynomial methods
    PencilDowndateDiagnostics pencil_diagnostics;
};

// Remove the node at node_index from a tracked solution: run the requested
// downdating method, propagate Q, and drop the node/weight (and pole) entries.
DowndateStepResult downdate_solution(HiepSolution& sol, std::size_t node_index,
                                     PolyMethod method,
                                     const RefinementConfig& refinement = {},
                                     const ToleranceConfig& tol = {});

DowndateStepResult downdate_solution(HpiepSolution& sol, std::size_t node_index,
                                     std::size_t pole_index, PencilMethod method,
                                     const RefinementConfig& refinement = {},
                                     const ToleranceConfig& tol = {});

}  // namespace orthorec
