#pragma once

// Internal mutation access to HpgModel. Not installed.

#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "hpg/model.hpp"

namespace hpg::detail {

class ModelEditor {
 public:
  explicit ModelEditor(HpgModel& model) : m_(model) {}

  /// Model holding only S and F.
  static HpgModel make(PageDictionary pages, double alpha, int order);

  StateIndex add_page_state(PageId page);
  /// Sets a link weight; zero removes the link.
  void set_link(StateIndex from, StateIndex to, double weight);
  void remove_out_links(StateIndex from);
  void refresh_visits(StateIndex s);
  void refresh_all_visits();

 private:
  HpgModel& m_;
};

/// Counts over abstract "histories" (pages for a first-order model, page
/// windows for an N-gram model), indexed by dictionary id.
struct TransitionCounts {
  std::vector<std::uint64_t> visits;
  std::vector<std::uint64_t> starts;
  std::vector<std::uint64_t> finals;
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint64_t> links;
  std::uint64_t sessions = 0;
};

HpgModel build_from_counts(PageDictionary histories, const TransitionCounts& counts, double alpha, int order);

}  // namespace hpg::detail
