#include "hpg/model.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "hpg/error.hpp"
#include "model_editor.hpp"

namespace hpg {

HpgModel::HpgModel() {
  states_.push_back({StateKind::Start, kStartSymbol, 0});
  states_.push_back({StateKind::Final, kFinalSymbol, 0});
  out_.resize(2);
  in_.resize(2);
  visits_.resize(2, 0.0);
}

std::size_t HpgModel::link_count() const noexcept {
  std::size_t n = 0;
  for (const auto& links : out_) n += links.size();
  return n;
}

PageId HpgModel::symbol(StateIndex s) const { return states_.at(s).page; }

std::string HpgModel::label(StateIndex s) const {
  const StateId& id = states_.at(s);
  std::string name = pages_.name(id.page);
  if (id.kind == StateKind::Page && id.clone_index > 0) name += "#" + std::to_string(id.clone_index);
  return name;
}

double HpgModel::weight(StateIndex from, StateIndex to) const {
  const auto& links = out_.at(from);
  auto it = links.find(to);
  return it == links.end() ? 0.0 : it->second;
}

double HpgModel::probability(StateIndex from, StateIndex to) const {
  const double w = weight(from, to);
  return w == 0.0 ? 0.0 : w / visits_[from];
}

std::span<const StateIndex> HpgModel::states_of(PageId page) const {
  if (is_virtual(page) || to_index(page) >= page_states_.size()) return {};
  return page_states_[to_index(page)];
}

std::optional<StateIndex> HpgModel::find_state(PageId page, std::uint32_t clone_index) const {
  for (StateIndex s : states_of(page))
    if (states_[s].clone_index == clone_index) return s;
  return std::nullopt;
}

bool operator==(const HpgModel& a, const HpgModel& b) {
  return a.alpha_ == b.alpha_ && a.order_ == b.order_ && a.pages_ == b.pages_ && a.states_ == b.states_ &&
         a.out_ == b.out_;
}

namespace detail {

HpgModel ModelEditor::make(PageDictionary pages, double alpha, int order) {
  HpgModel m;
  m.alpha_ = alpha;
  m.order_ = order;
  m.page_states_.resize(pages.size());
  m.pages_ = std::move(pages);
  return m;
}

StateIndex ModelEditor::add_page_state(PageId page) {
  if (is_virtual(page) || to_index(page) >= m_.pages_.size())
    throw InvariantViolation("state for a page outside the model dictionary");
  if (m_.page_states_.size() < m_.pages_.size()) m_.page_states_.resize(m_.pages_.size());
  auto& clones = m_.page_states_[to_index(page)];
  const auto index = static_cast<StateIndex>(m_.states_.size());
  m_.states_.push_back({StateKind::Page, page, static_cast<std::uint32_t>(clones.size())});
  m_.out_.emplace_back();
  m_.in_.emplace_back();
  m_.visits_.push_back(0.0);
  clones.push_back(index);
  return index;
}

void ModelEditor::set_link(StateIndex from, StateIndex to, double weight) {
  if (from == HpgModel::kFinal || to == HpgModel::kStart)
    throw InvariantViolation("links may not leave F or enter S");
  if (weight < 0.0 || !std::isfinite(weight)) throw InvariantViolation("link weight must be finite and nonnegative");
  if (weight == 0.0) {
    m_.out_.at(from).erase(to);
    m_.in_.at(to).erase(from);
  } else {
    m_.out_.at(from)[to] = weight;
    m_.in_.at(to).insert(from);
  }
}

void ModelEditor::remove_out_links(StateIndex from) {
  for (const auto& [to, w] : m_.out_.at(from)) m_.in_[to].erase(from);
  m_.out_[from].clear();
}

void ModelEditor::refresh_visits(StateIndex s) {
  double total = 0.0;
  if (s == HpgModel::kFinal) {
    for (StateIndex from : m_.in_[s]) total += m_.out_[from].at(s);
  } else {
    for (const auto& [to, w] : m_.out_.at(s)) total += w;
  }
  m_.visits_[s] = total;
}

void ModelEditor::refresh_all_visits() {
  for (StateIndex s = 0; s < m_.states_.size(); ++s) refresh_visits(s);
}

HpgModel build_from_counts(PageDictionary histories, const TransitionCounts& counts, double alpha, int order) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ParameterError("alpha must lie in [0, 1]");
  const std::size_t n = histories.size();
  HpgModel model = ModelEditor::make(std::move(histories), alpha, order);
  ModelEditor edit(model);

  std::vector<StateIndex> state_of(n, 0);
  double total_visits = 0.0;
  for (std::uint32_t h = 0; h < n; ++h) {
    if (h < counts.visits.size() && counts.visits[h] > 0) {
      state_of[h] = edit.add_page_state(PageId{h});
      total_visits += static_cast<double>(counts.visits[h]);
    }
  }
  if (total_visits == 0.0) return model;

  const double sessions = static_cast<double>(counts.sessions);
  for (std::uint32_t h = 0; h < n; ++h) {
    if (state_of[h] == 0) continue;
    const double by_visits = sessions * static_cast<double>(counts.visits[h]) / total_visits;
    const double by_starts = h < counts.starts.size() ? static_cast<double>(counts.starts[h]) : 0.0;
    edit.set_link(HpgModel::kStart, state_of[h], alpha * by_visits + (1.0 - alpha) * by_starts);
    if (h < counts.finals.size() && counts.finals[h] > 0)
      edit.set_link(state_of[h], HpgModel::kFinal, static_cast<double>(counts.finals[h]));
  }
  for (const auto& [key, w] : counts.links) {
    if (w == 0) continue;
    if (state_of.at(key.first) == 0 || state_of.at(key.second) == 0)
      throw InvariantViolation("link between unvisited histories");
    edit.set_link(state_of[key.first], state_of[key.second], static_cast<double>(w));
  }
  edit.refresh_all_visits();
  return model;
}

}  // namespace detail

HpgModel build_first_order(const NGramTable& ngrams, const PageDictionary& pages, double alpha) {
  detail::TransitionCounts counts;
  const std::size_t n = pages.size();
  counts.visits.assign(n, 0);
  counts.starts.assign(n, 0);
  counts.finals.assign(n, 0);
  counts.sessions = ngrams.sessions();
  for (const auto& [page, w] : ngrams.unigrams()) counts.visits.at(to_index(page)) = w;
  for (const auto& [key, w] : ngrams.bigrams()) {
    if (key.first == kStartSymbol) {
      counts.starts.at(to_index(key.second)) += w;
    } else if (key.second == kFinalSymbol) {
      counts.finals.at(to_index(key.first)) += w;
    } else {
      counts.links[{to_index(key.first), to_index(key.second)}] += w;
    }
  }
  return detail::build_from_counts(pages, counts, alpha, 2);
}

double second_order_prob(const NGramTable& ngrams, PageId prev, PageId via, PageId next) {
  const std::uint64_t context = ngrams.bi(prev, via);
  if (context == 0) throw UndefinedProbability("second-order probability undefined: bigram never observed");
  return static_cast<double>(ngrams.tri(prev, via, next)) / static_cast<double>(context);
}

double second_order_prob(const HpgModel& model, const NGramTable& ngrams, StateIndex prev, StateIndex via,
                         StateIndex next) {
  if (model.state(via).kind != StateKind::Page) throw ParameterError("middle state must be a page state");
  return second_order_prob(ngrams, model.symbol(prev), model.symbol(via), model.symbol(next));
}

namespace {

template <typename Visit>
void for_each_divergence(const HpgModel& model, const NGramTable& ngrams, StateIndex x, Visit&& visit) {
  if (model.state(x).kind != StateKind::Page) throw ParameterError("accuracy is defined for page states only");
  const PageId page = model.symbol(x);
  std::set<PageId> sources;
  for (StateIndex src : model.in_links(x)) sources.insert(model.symbol(src));
  for (PageId src : sources) {
    const std::uint64_t context = ngrams.bi(src, page);
    if (context == 0) continue;
    for (const auto& [to, w] : model.out_links(x)) {
      const double second = static_cast<double>(ngrams.tri(src, page, model.symbol(to))) / static_cast<double>(context);
      if (!visit(std::abs(second - w / model.visits(x)))) return;
    }
  }
}

}  // namespace

double max_divergence(const HpgModel& model, const NGramTable& ngrams, StateIndex x) {
  double worst = 0.0;
  for_each_divergence(model, ngrams, x, [&](double d) {
    worst = std::max(worst, d);
    return true;
  });
  return worst;
}

bool state_is_accurate(const HpgModel& model, const NGramTable& ngrams, StateIndex x, double gamma) {
  bool accurate = true;
  for_each_divergence(model, ngrams, x, [&](double d) {
    accurate = d < gamma;
    return accurate;
  });
  return accurate;
}

bool model_is_accurate(const HpgModel& model, const NGramTable& ngrams, double gamma) {
  for (StateIndex s = 2; s < model.state_count(); ++s)
    if (!state_is_accurate(model, ngrams, s, gamma)) return false;
  return true;
}

double trail_probability(const HpgModel& model, std::span<const PageId> pages) {
  if (pages.empty()) throw ParameterError("trail must contain at least one page");
  std::unordered_map<StateIndex, double> current;
  for (StateIndex s : model.states_of(pages.front())) {
    const double p = model.probability(HpgModel::kStart, s);
    if (p > 0.0) current[s] += p;
  }
  for (std::size_t t = 1; t < pages.size() && !current.empty(); ++t) {
    std::unordered_map<StateIndex, double> next;
    for (StateIndex s : model.states_of(pages[t])) {
      double p = 0.0;
      for (const auto& [from, mass] : current) p += mass * model.probability(from, s);
      if (p > 0.0) next[s] = p;
    }
    current = std::move(next);
  }
  double total = 0.0;
  for (const auto& [s, p] : current) total += p;
  return total;
}

namespace {

void check_certain_cycles(const HpgModel& model) {
  // A probability-1 link is the only out-link of its source, so these links
  // form a functional graph; walk it looking for a cycle.
  const std::size_t n = model.state_count();
  std::vector<StateIndex> next(n, HpgModel::kFinal);
  for (StateIndex s = 2; s < n; ++s) {
    const auto& links = model.out_links(s);
    if (links.size() == 1 && links.begin()->first >= 2) next[s] = links.begin()->first;
  }
  std::vector<std::uint8_t> color(n, 0);
  for (StateIndex s = 2; s < n; ++s) {
    std::vector<StateIndex> path;
    StateIndex cur = s;
    while (cur >= 2 && color[cur] == 0) {
      color[cur] = 1;
      path.push_back(cur);
      cur = next[cur];
    }
    if (cur >= 2 && color[cur] == 1)
      throw NonTermination("probability-1 cycle through state " + model.label(cur));
    for (StateIndex p : path) color[p] = 2;
  }
}

}  // namespace

std::vector<Trail> enumerate_trails(const HpgModel& model, double cutpoint) {
  if (!(cutpoint > 0.0 && cutpoint <= 1.0)) throw ParameterError("cutpoint must lie in (0, 1]");
  check_certain_cycles(model);

  struct Frame {
    std::vector<StateIndex> path;
    double probability;
  };
  std::map<std::vector<PageId>, double> found;
  std::vector<Frame> stack;
  for (const auto& [s, w] : model.out_links(HpgModel::kStart)) {
    const double p = model.probability(HpgModel::kStart, s);
    if (s >= 2 && p >= cutpoint) stack.push_back({{s}, p});
  }
  while (!stack.empty()) {
    Frame frame = std::move(stack.back());
    stack.pop_back();
    bool extended = false;
    const StateIndex last = frame.path.back();
    for (const auto& [to, w] : model.out_links(last)) {
      if (to < 2) continue;
      const double p = frame.probability * model.probability(last, to);
      if (p < cutpoint) continue;
      extended = true;
      Frame child{frame.path, p};
      child.path.push_back(to);
      stack.push_back(std::move(child));
    }
    if (!extended) {
      std::vector<PageId> pages;
      pages.reserve(frame.path.size());
      for (StateIndex s : frame.path) pages.push_back(model.symbol(s));
      found[std::move(pages)] += frame.probability;
    }
  }

  std::vector<Trail> trails;
  trails.reserve(found.size());
  for (auto& [pages, p] : found) trails.push_back({pages, p});
  const PageDictionary& dict = model.pages();
  std::sort(trails.begin(), trails.end(), [&](const Trail& a, const Trail& b) {
    if (a.probability != b.probability) return a.probability > b.probability;
    return std::lexicographical_compare(a.pages.begin(), a.pages.end(), b.pages.begin(), b.pages.end(),
                                        [&](PageId x, PageId y) { return dict.name(x) < dict.name(y); });
  });
  return trails;
}

}  // namespace hpg
