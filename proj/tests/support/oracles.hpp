#pragma once

// Reference computations shared by the unit and acceptance tests. Everything
// here works from raw sessions or plain graph walks and avoids the library's
// own counting and probability code paths.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "hpg/cloning.hpp"
#include "hpg/model.hpp"
#include "hpg/session_store.hpp"
#include "hpg/synth.hpp"

namespace hpg::testing {

using Gram = std::vector<std::string>;

/// n-gram counts of sessions padded with "S" and "F", counted by direct scan.
inline std::map<Gram, std::uint64_t> brute_ngrams(const SessionLog& log, std::size_t n) {
  std::map<Gram, std::uint64_t> counts;
  for (const auto& s : log.entries) {
    Gram padded{"S"};
    for (PageId p : s.pages) padded.push_back(log.pages.name(p));
    padded.push_back("F");
    for (std::size_t i = 0; i + n <= padded.size(); ++i)
      counts[Gram(padded.begin() + static_cast<std::ptrdiff_t>(i), padded.begin() + static_cast<std::ptrdiff_t>(i + n))] +=
          s.count;
  }
  return counts;
}

inline std::uint64_t lookup(const std::map<Gram, std::uint64_t>& counts, const Gram& g) {
  auto it = counts.find(g);
  return it == counts.end() ? 0 : it->second;
}

/// Name of a state's page symbol ("S", "F" or the page token).
inline std::string page_name(const HpgModel& m, StateIndex s) { return m.pages().name(m.symbol(s)); }

/// Pairs (in-link, out-target) of a cloned model whose probability differs
/// from the second-order probability recounted from the sessions. Also flags
/// trigrams seen in the sessions that the state cannot reproduce.
inline std::vector<std::string> exactness_violations(const HpgModel& m, const SessionLog& log, double tol = 1e-12) {
  const auto bi = brute_ngrams(log, 2);
  const auto tri = brute_ngrams(log, 3);
  std::vector<std::string> bad;
  std::set<std::string> page_names;
  for (const auto& name : log.pages.names()) page_names.insert(name);
  page_names.insert("F");
  for (StateIndex x = 2; x < m.state_count(); ++x) {
    const std::string xs = page_name(m, x);
    for (StateIndex src : m.in_links(x)) {
      const std::string is = page_name(m, src);
      const std::uint64_t context = lookup(bi, {is, xs});
      if (context == 0) continue;
      for (const auto& os : page_names) {
        const double want = static_cast<double>(lookup(tri, {is, xs, os})) / static_cast<double>(context);
        double got = 0.0;
        for (const auto& [to, w] : m.out_links(x))
          if (page_name(m, to) == os) got += m.probability(x, to);
        if (std::abs(got - want) > tol)
          bad.push_back(m.label(src) + "->" + m.label(x) + "->" + os + ": " + std::to_string(got) + " vs " +
                        std::to_string(want));
      }
    }
  }
  return bad;
}

/// Model invariants after cloning `fo` (built from `log`).
inline std::vector<std::string> invariant_violations(const HpgModel& m, const HpgModel& fo, const SessionLog& log,
                                                     double tol = 1e-9) {
  std::vector<std::string> bad;
  const auto uni = brute_ngrams(log, 1);
  const auto bi = brute_ngrams(log, 2);

  // Out-probabilities of every state sum to one.
  for (StateIndex s = 0; s < m.state_count(); ++s) {
    if (s == HpgModel::kFinal || m.out_links(s).empty()) continue;
    double total = 0.0;
    for (const auto& [to, w] : m.out_links(s)) total += m.probability(s, to);
    if (std::abs(total - 1.0) > tol) bad.push_back("out-probabilities of " + m.label(s) + " sum to " + std::to_string(total));
  }

  // Weight conservation: per page and per page pair the clones add up to the
  // session counts, and the final state receives one unit per session.
  std::map<std::string, double> page_visits;
  std::map<std::pair<std::string, std::string>, double> pair_weight;
  for (StateIndex s = 2; s < m.state_count(); ++s) {
    page_visits[page_name(m, s)] += m.visits(s);
    for (const auto& [to, w] : m.out_links(s)) pair_weight[{page_name(m, s), page_name(m, to)}] += w;
  }
  for (const auto& [gram, c] : uni) {
    if (gram[0] == "S" || gram[0] == "F") continue;
    if (std::abs(page_visits[gram[0]] - static_cast<double>(c)) > tol * std::max(1.0, static_cast<double>(c)))
      bad.push_back("visits of " + gram[0] + " not conserved");
  }
  for (const auto& [gram, c] : bi) {
    if (gram[0] == "S") continue;
    if (std::abs(pair_weight[{gram[0], gram[1]}] - static_cast<double>(c)) > tol * std::max(1.0, static_cast<double>(c)))
      bad.push_back("weight " + gram[0] + "->" + gram[1] + " not conserved");
  }
  if (std::abs(m.visits(HpgModel::kFinal) - static_cast<double>(log.total_sessions())) > tol * static_cast<double>(log.total_sessions()))
    bad.push_back("final state visits differ from the session count");

  // Weighted average over clones recovers the first-order probability.
  for (const auto& [key, w] : pair_weight) {
    const auto fs = fo.find_state(*fo.pages().find(key.first));
    double first = 0.0;
    for (const auto& [to, fw] : fo.out_links(*fs))
      if (page_name(fo, to) == key.second) first = fo.probability(*fs, to);
    if (std::abs(w / page_visits[key.first] - first) > tol)
      bad.push_back("weighted average " + key.first + "->" + key.second + " differs from first order");
  }

  // Initial probabilities sum to one and are unchanged per page.
  double start = 0.0;
  std::map<std::string, double> start_by_page;
  for (const auto& [to, w] : m.out_links(HpgModel::kStart)) {
    start += m.probability(HpgModel::kStart, to);
    start_by_page[page_name(m, to)] += m.probability(HpgModel::kStart, to);
  }
  if (std::abs(start - 1.0) > tol) bad.push_back("initial probabilities sum to " + std::to_string(start));
  for (const auto& [to, w] : fo.out_links(HpgModel::kStart))
    if (std::abs(start_by_page[page_name(fo, to)] - fo.probability(HpgModel::kStart, to)) > tol)
      bad.push_back("initial probability of " + page_name(fo, to) + " changed");

  // A page never has more states than its first-order state had in-links.
  for (StateIndex s = 2; s < fo.state_count(); ++s) {
    const auto count = m.states_of(fo.symbol(s)).size();
    if (count > std::max<std::size_t>(1, fo.in_links(s).size()))
      bad.push_back(page_name(fo, s) + " has " + std::to_string(count) + " states for " +
                    std::to_string(fo.in_links(s).size()) + " in-links");
  }

  // Each state has at most one out-link per target page.
  for (StateIndex s = 0; s < m.state_count(); ++s) {
    std::set<std::string> targets;
    for (const auto& [to, w] : m.out_links(s))
      if (!targets.insert(page_name(m, to)).second) bad.push_back(m.label(s) + " links twice to " + page_name(m, to));
  }
  return bad;
}

/// Order-independent description of a model: states are named by their page
/// and the set of pages their in-links come from.
inline std::multiset<std::string> canonical_edges(const HpgModel& m) {
  std::vector<std::string> name(m.state_count());
  for (StateIndex s = 0; s < m.state_count(); ++s) {
    std::set<std::string> sources;
    for (StateIndex src : m.in_links(s)) sources.insert(page_name(m, src));
    std::string label = page_name(m, s) + "{";
    for (const auto& src : sources) label += src + ",";
    name[s] = label + "}";
  }
  std::multiset<std::string> edges;
  for (StateIndex s = 0; s < m.state_count(); ++s)
    for (const auto& [to, w] : m.out_links(s)) {
      std::ostringstream e;
      e << name[s] << " -> " << name[to] << " : " << std::llround(w * 1e6);
      edges.insert(e.str());
    }
  return edges;
}

/// Random small instance drawn from the synthetic generator.
inline SessionLog small_instance(std::uint64_t seed, std::size_t max_pages = 20, std::uint64_t max_sessions = 200) {
  std::mt19937_64 rng(seed);
  const std::size_t pages = 2 + uniform_index(rng, max_pages - 1);
  const std::uint64_t sessions = 20 + uniform_index(rng, max_sessions - 19);
  return generate_dataset(pages, sessions, seed).log;
}

/// Probability of one page sequence by walking the unique state path.
inline double walk_probability(const HpgModel& m, const std::vector<PageId>& pages) {
  double p = 1.0;
  StateIndex cur = HpgModel::kStart;
  for (PageId page : pages) {
    bool moved = false;
    for (const auto& [to, w] : m.out_links(cur)) {
      if (to >= 2 && m.symbol(to) == page) {
        p *= m.probability(cur, to);
        cur = to;
        moved = true;
        break;
      }
    }
    if (!moved) return 0.0;
  }
  return p;
}

/// Maximal trails by breadth-first growth of page sequences.
inline std::map<std::vector<PageId>, double> brute_trails(const HpgModel& m, double cutpoint, std::size_t max_len = 64) {
  std::vector<PageId> all;
  for (std::uint32_t i = 0; i < m.pages().size(); ++i)
    if (!m.states_of(PageId{i}).empty()) all.push_back(PageId{i});
  std::vector<std::vector<PageId>> frontier;
  for (PageId p : all)
    if (walk_probability(m, {p}) >= cutpoint) frontier.push_back({p});
  std::map<std::vector<PageId>, double> out;
  while (!frontier.empty()) {
    std::vector<std::vector<PageId>> next;
    for (const auto& seq : frontier) {
      bool extended = false;
      if (seq.size() < max_len) {
        for (PageId p : all) {
          auto longer = seq;
          longer.push_back(p);
          if (walk_probability(m, longer) >= cutpoint) {
            next.push_back(longer);
            extended = true;
          }
        }
      }
      if (!extended) out[seq] = walk_probability(m, seq);
    }
    frontier = std::move(next);
  }
  return out;
}

}  // namespace hpg::testing
