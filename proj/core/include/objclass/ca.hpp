#pragma once

#include <cstddef>
#include <string_view>

#include "objclass/raster.hpp"
#include "objclass/svrf.hpp"

namespace objclass {

/// Posterior-gated majority rule over the 8-neighbourhood.
struct CaRule {
  int majority_threshold = 5;      // neighbours sharing a label needed to flip, in [1, 8]
  double confidence_ceiling = 0.9; // sites whose current-label posterior exceeds this never flip
  std::size_t steps = 10;

  void validate() const;
};

/// Parses "threshold,ceiling,steps", e.g. "5,0.9,10".
CaRule parse_ca_rule(std::string_view text);

struct CaStepResult {
  LabelMap labels;
  std::size_t flips = 0;
};

/// One synchronous update computed entirely from the input map. A site flips
/// when its current-label posterior is below the ceiling and some other
/// nonzero label is held by at least majority_threshold of its neighbours; it
/// takes the most frequent such label (ties to the smallest id).
///
/// `unary` supplies posteriors; pass nullptr when none exist (every site is
/// then treated as having posterior 0 and the gate is always open).
CaStepResult ca_step(const LabelMap& labels, const UnaryField* unary, const CaRule& rule);

/// Applies ca_step rule.steps times or until a step makes no flip.
LabelMap ca_run(const LabelMap& labels, const UnaryField* unary, const CaRule& rule);

}  // namespace objclass
