#pragma once

#include "blockadmm/block_model.hpp"
#include "blockadmm/objectives.hpp"

namespace blockadmm {

/// minimize sum_j f_j(x_j) subject to sum_j A_j x_j = b.
struct Problem {
  BlockMatrix a;
  VectorXd b;
  SeparableObjective objective;

  const BlockPartition& partition() const { return a.partition(); }
  Index num_blocks() const { return a.num_blocks(); }

  /// Throws ShapeError when b or the objective do not conform to A.
  void validate() const;
};

}  // namespace blockadmm
