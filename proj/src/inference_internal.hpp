#pragma once

#include <optional>

#include "i2plive/inference.hpp"

namespace i2plive::detail {

// Cut-based view of a SessionInference: start[i] marks record i as the first
// record of a session.
struct Segmentation {
  std::vector<bool> start;
  std::vector<bool> exact_join;
  std::vector<bool> exact_leave;
  std::vector<bool> marks;

  static Segmentation from(const SessionInference& inf, std::size_t n);
  SessionInference build(const ObservedTrace& trace, std::vector<CaseDiagnostic> diagnostics) const;
  // Index one past the last record of the session containing record i.
  std::size_t session_end(std::size_t i) const;
};

// Re-anchors a session start at record r. Cuts between the preceding routine
// or leave mark and `mark` are dropped, except cuts that follow a leave mark
// or sit on an exact join.
void apply_anchor(Segmentation& seg, const std::vector<bool>& leave, std::size_t r,
                  std::optional<std::size_t> mark);

}  // namespace i2plive::detail
