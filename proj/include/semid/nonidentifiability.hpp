#pragma once

#include <vector>

#include "semid/graph.hpp"

namespace semid {

// Per-vertex record of the edge-level infinite-to-one test for v -> w: every
// z other than w must be a sibling of w or fail to half-trek reach v. The
// empty half-trek counts, so z = v always needs v <-> w.
struct InfiniteToOneRecord {
  enum class Reason { sibling_of_head, not_half_trek_reachable, violated };
  struct Entry {
    int z = 0;
    Reason reason = Reason::violated;
  };

  Edge edge;
  bool holds = false;
  std::vector<Entry> entries;
};

// Throws std::invalid_argument when edge is not a directed edge of g.
InfiniteToOneRecord edge_infinite_to_one(const MixedGraph& g, Edge edge);

}  // namespace semid
