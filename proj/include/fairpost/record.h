#pragma once

#include <vector>

namespace fairpost {

// One individual: private features, binary sensitive attribute, community
// and outcome label. Communities and labels are zero-based dense indices;
// for multi-class tasks class 1 is the protected outcome.
struct Record {
  std::vector<double> features;
  int sensitive = 0;
  int community = 0;
  int label = 0;
};

}  // namespace fairpost
