#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "hpg/session_store.hpp"

namespace hpg {

namespace detail {
class ModelEditor;
}

enum class StateKind : std::uint8_t { Start, Final, Page };

/// Identity of a model state. Clones of a page share `page` and differ in
/// `clone_index`; the original state has clone_index 0.
struct StateId {
  StateKind kind = StateKind::Page;
  PageId page{};
  std::uint32_t clone_index = 0;

  friend bool operator==(const StateId&, const StateId&) = default;
};

/// Position of a state inside one model.
using StateIndex = std::uint32_t;

/// First-order hypertext probabilistic grammar: a weighted state graph with a
/// start state S and a final state F.
///
/// Link weights are traversal counts (real-valued only on S links when the
/// model mixes in page frequencies through alpha). Probabilities are derived
/// on demand as weight / visits of the source state, where the visits of a
/// page state are the sum of its out-link weights. Zero-weight links are never
/// stored. Every page state has at most one out-link per target page.
///
/// Models are values: operations that change the graph return a new model.
class HpgModel {
 public:
  static constexpr StateIndex kStart = 0;
  static constexpr StateIndex kFinal = 1;
  using LinkMap = std::map<StateIndex, double>;

  HpgModel();

  double alpha() const noexcept { return alpha_; }
  /// Markov order N of the page-history states (2 for a plain first-order model).
  int ngram_order() const noexcept { return order_; }
  const PageDictionary& pages() const noexcept { return pages_; }

  std::size_t state_count() const noexcept { return states_.size(); }
  std::size_t page_state_count() const noexcept { return states_.size() - 2; }
  std::size_t link_count() const noexcept;
  bool empty() const noexcept { return states_.size() <= 2; }

  const StateId& state(StateIndex s) const { return states_.at(s); }
  /// Page symbol of a state: the page, or the start/final symbol.
  PageId symbol(StateIndex s) const;
  std::string label(StateIndex s) const;

  const LinkMap& out_links(StateIndex s) const { return out_.at(s); }
  const std::set<StateIndex>& in_links(StateIndex s) const { return in_.at(s); }
  double weight(StateIndex from, StateIndex to) const;
  double visits(StateIndex s) const { return visits_.at(s); }
  double probability(StateIndex from, StateIndex to) const;

  /// States representing `page`, original first. Empty for unknown pages.
  std::span<const StateIndex> states_of(PageId page) const;
  std::optional<StateIndex> find_state(PageId page, std::uint32_t clone_index = 0) const;

  friend bool operator==(const HpgModel& a, const HpgModel& b);

 private:
  friend class detail::ModelEditor;

  double alpha_ = 0.0;
  int order_ = 2;
  PageDictionary pages_;
  std::vector<StateId> states_;
  std::vector<LinkMap> out_;
  std::vector<std::set<StateIndex>> in_;
  std::vector<double> visits_;
  std::vector<std::vector<StateIndex>> page_states_;
};

/// Builds the first-order model: one state per page, link weights from bigram
/// counts. S-link weights are the alpha mixture of page frequency and
/// first-page frequency, scaled so they sum to the number of sessions.
HpgModel build_first_order(const NGramTable& ngrams, const PageDictionary& pages, double alpha);

/// Conditional probability of moving via -> next after prev -> via, i.e.
/// tri(prev, via, next) / bi(prev, via). Throws UndefinedProbability when the
/// bigram (prev, via) was never observed.
double second_order_prob(const NGramTable& ngrams, PageId prev, PageId via, PageId next);

/// State-level form: clones resolve to their page's n-gram identity.
double second_order_prob(const HpgModel& model, const NGramTable& ngrams, StateIndex prev, StateIndex via,
                         StateIndex next);

/// Largest |p(i,x,o) - p(x,o)| over the in-link sources i of x that carry
/// bigram evidence and the out-targets o of x. Zero when no pair is defined.
double max_divergence(const HpgModel& model, const NGramTable& ngrams, StateIndex x);

/// True when every second-order probability of x lies strictly within gamma
/// of the matching first-order probability.
bool state_is_accurate(const HpgModel& model, const NGramTable& ngrams, StateIndex x, double gamma);
bool model_is_accurate(const HpgModel& model, const NGramTable& ngrams, double gamma);

/// Probability of the page sequence summed over every clone realisation:
/// p(S, s1) * prod p(s_t, s_t+1). The final-state factor is not included.
double trail_probability(const HpgModel& model, std::span<const PageId> pages);

struct Trail {
  std::vector<PageId> pages;
  double probability = 0.0;
};

/// Depth-first expansion from S keeping prefixes with probability >= cutpoint.
/// A trail is reported when none of its extensions stays above the cutpoint.
/// Results are sorted by descending probability, ties by page names.
/// Throws NonTermination when page states form a cycle of probability-1 links.
std::vector<Trail> enumerate_trails(const HpgModel& model, double cutpoint);

}  // namespace hpg
