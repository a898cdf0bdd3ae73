#pragma once

#include <gsr/core/types.hpp>

#include <string>
#include <vector>

namespace gsr {

// One "NAME COUNT <bbox>(...)</bbox>..." entry.
struct Grounding {
  std::string name;
  int count = 1;
  std::vector<Aabb> boxes;

  friend bool operator==(const Grounding&, const Grounding&) = default;
};

// Parsed grounded reasoning response:
//   <think>ANALYSIS \n\n GROUNDINGS \n\n REASONING</think>\n<answer>ANSWER</answer>
// Text fields are stored trimmed.
struct ResponseAst {
  std::string analysis;
  std::vector<Grounding> groundings;
  std::string reasoning;
  std::string answer;

  friend bool operator==(const ResponseAst&, const ResponseAst&) = default;
};

}  // namespace gsr
