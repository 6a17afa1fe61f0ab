#include "blockadmm/problem.hpp"

#include <string>

#include "blockadmm/errors.hpp"

namespace blockadmm {

void Problem::validate() const {
  if (b.size() != a.rows()) {
    throw ShapeError("b has length " + std::to_string(b.size()) + ", A has " +
                     std::to_string(a.rows()) + " rows");
  }
  if (objective.num_blocks() != a.num_blocks()) {
    throw ShapeError("objective has " + std::to_string(objective.num_blocks()) +
                     " terms, A has " + std::to_string(a.num_blocks()) + " blocks");
  }
}

}  // namespace blockadmm
