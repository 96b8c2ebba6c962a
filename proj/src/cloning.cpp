#include "hpg/cloning.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "hpg/error.hpp"
#include "model_editor.hpp"

namespace hpg {

namespace {

// Indivisible groups of identical in-link vectors. Totals aggregate each
// distinct source page once, so they stay exact integer counts.
struct Units {
  std::vector<std::vector<std::size_t>> members;
  std::vector<std::vector<double>> totals;
  std::vector<double> context;
  std::vector<const std::vector<double>*> point;
};

Units build_units(std::span<const SecondOrderVector> vectors) {
  Units u;
  std::vector<std::unordered_set<PageId>> pages_seen;
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    const auto& v = vectors[i];
    std::size_t unit = u.members.size();
    for (std::size_t j = 0; j < u.members.size(); ++j) {
      if (vectors[u.members[j].front()].same_distribution(v)) {
        unit = j;
        break;
      }
    }
    if (unit == u.members.size()) {
      u.members.emplace_back();
      u.totals.emplace_back(v.counts.size(), 0.0);
      u.context.push_back(0.0);
      u.point.push_back(&v.probs);
      pages_seen.emplace_back();
    }
    u.members[unit].push_back(i);
    if (pages_seen[unit].insert(v.source_page).second) {
      for (std::size_t o = 0; o < v.counts.size(); ++o) u.totals[unit][o] += static_cast<double>(v.counts[o]);
      u.context[unit] += static_cast<double>(v.context);
    }
  }
  return u;
}

double squared_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d += (a[i] - b[i]) * (a[i] - b[i]);
  return d;
}

std::vector<std::vector<double>> centroids_of(const Units& units, const std::vector<int>& assign, int k) {
  const std::size_t dim = units.totals.empty() ? 0 : units.totals.front().size();
  std::vector<std::vector<double>> sums(k, std::vector<double>(dim, 0.0));
  std::vector<double> context(k, 0.0);
  for (std::size_t u = 0; u < assign.size(); ++u) {
    for (std::size_t o = 0; o < dim; ++o) sums[assign[u]][o] += units.totals[u][o];
    context[assign[u]] += units.context[u];
  }
  for (int c = 0; c < k; ++c)
    if (context[c] > 0.0)
      for (double& x : sums[c]) x /= context[c];
  return sums;
}

InLinkPartition to_partition(const Units& units, const std::vector<int>& assign, int k) {
  // Units are numbered by first appearance, so a cluster's smallest unit also
  // holds its smallest vector index.
  std::vector<int> first_unit(k, -1);
  for (std::size_t u = 0; u < assign.size(); ++u)
    if (first_unit[assign[u]] < 0) first_unit[assign[u]] = static_cast<int>(u);
  std::vector<int> live;
  for (int c = 0; c < k; ++c)
    if (first_unit[c] >= 0) live.push_back(c);
  std::sort(live.begin(), live.end(), [&](int a, int b) { return first_unit[a] < first_unit[b]; });
  std::vector<int> rank(k, -1);
  for (std::size_t r = 0; r < live.size(); ++r) rank[live[r]] = static_cast<int>(r);

  std::vector<int> compact(assign.size());
  InLinkPartition part;
  part.clusters.resize(live.size());
  for (std::size_t u = 0; u < assign.size(); ++u) {
    compact[u] = rank[assign[u]];
    auto& c = part.clusters[compact[u]];
    c.insert(c.end(), units.members[u].begin(), units.members[u].end());
  }
  for (auto& c : part.clusters) std::sort(c.begin(), c.end());
  part.centroids = centroids_of(units, compact, static_cast<int>(live.size()));
  return part;
}

// Makes every cluster nonempty with a centroid distinct from the others.
void repair(const Units& units, std::vector<int>& assign, int k) {
  for (int round = 0; round < 2 * k + 2; ++round) {
    auto cents = centroids_of(units, assign, k);
    std::vector<int> size(k, 0);
    for (int c : assign) ++size[c];

    int target = -1;
    for (int b = 0; b < k && target < 0; ++b) {
      if (size[b] == 0) {
        target = b;
        break;
      }
      for (int a = 0; a < b; ++a) {
        if (size[a] == 0) continue;
        double gap = 0.0;
        for (std::size_t o = 0; o < cents[a].size(); ++o) gap = std::max(gap, std::abs(cents[a][o] - cents[b][o]));
        if (gap <= 1e-12) {
          for (int& c : assign)
            if (c == b) c = a;
          target = b;
          break;
        }
      }
    }
    if (target < 0) return;

    cents = centroids_of(units, assign, k);
    std::fill(size.begin(), size.end(), 0);
    for (int c : assign) ++size[c];
    std::size_t worst = assign.size();
    double worst_d = -1.0;
    for (std::size_t u = 0; u < assign.size(); ++u) {
      if (size[assign[u]] < 2) continue;
      const double d = squared_distance(*units.point[u], cents[assign[u]]);
      if (d > worst_d) {
        worst_d = d;
        worst = u;
      }
    }
    if (worst == assign.size()) return;
    assign[worst] = target;
  }
}

InLinkPartition lloyd(const Units& units, std::vector<int> assign, int k, int max_iters) {
  for (int iter = 0; iter < max_iters; ++iter) {
    repair(units, assign, k);
    const auto cents = centroids_of(units, assign, k);
    bool moved = false;
    std::vector<int> next = assign;
    for (std::size_t u = 0; u < assign.size(); ++u) {
      int best = assign[u];
      double best_d = squared_distance(*units.point[u], cents[best]);
      for (int c = 0; c < k; ++c) {
        const double d = squared_distance(*units.point[u], cents[c]);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (best != assign[u]) {
        next[u] = best;
        moved = true;
      }
    }
    if (!moved) break;
    assign = std::move(next);
  }
  return to_partition(units, assign, k);
}

InLinkPartition exact_from_units(const Units& units) {
  std::vector<int> assign(units.members.size());
  std::iota(assign.begin(), assign.end(), 0);
  return to_partition(units, assign, static_cast<int>(units.members.size()));
}

void check_k(std::span<const SecondOrderVector> vectors, int k) {
  if (k < 1) throw ParameterError("K must be at least 1");
  if (static_cast<std::size_t>(k) > vectors.size())
    throw ParameterError("K = " + std::to_string(k) + " exceeds the number of in-links (" +
                         std::to_string(vectors.size()) + ")");
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

void clone_in_place(HpgModel& model, StateIndex x, std::span<const SecondOrderVector> vectors,
                    const InLinkPartition& part) {
  if (model.state(x).kind != StateKind::Page) throw InvariantViolation("only page states can be cloned");
  if (part.clusters.size() < 2) throw InvariantViolation("cloning needs at least two clusters");

  const auto targets = ordered_out_targets(model, x);
  std::vector<int> cluster_of(vectors.size(), -1);
  for (std::size_t c = 0; c < part.clusters.size(); ++c) {
    if (part.clusters[c].empty()) throw InvariantViolation("empty cluster in partition");
    for (std::size_t i : part.clusters[c]) {
      if (i >= vectors.size() || cluster_of[i] != -1)
        throw InvariantViolation("partition does not cover each in-link exactly once");
      cluster_of[i] = static_cast<int>(c);
    }
  }
  std::set<StateIndex> covered;
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    if (cluster_of[i] == -1) throw InvariantViolation("partition does not cover each in-link exactly once");
    if (!model.in_links(x).contains(vectors[i].source) || vectors[i].counts.size() != targets.size())
      throw InvariantViolation("vector does not belong to this state");
    covered.insert(vectors[i].source);
  }
  for (StateIndex src : model.in_links(x))
    if (src != HpgModel::kStart && !covered.contains(src))
      throw InvariantViolation("in-link from " + model.label(src) + " is not in the partition");

  const std::size_t k = part.clusters.size();
  const PageId page = model.symbol(x);
  std::vector<std::vector<double>> out_weight(k, std::vector<double>(targets.size(), 0.0));
  std::vector<std::unordered_set<PageId>> seen(k);
  int self_cluster = -1;
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    const int c = cluster_of[i];
    if (vectors[i].source_page == page) self_cluster = c;
    if (!seen[c].insert(vectors[i].source_page).second) continue;
    for (std::size_t o = 0; o < targets.size(); ++o) out_weight[c][o] += static_cast<double>(vectors[i].counts[o]);
  }

  // The cluster holding the last in-link stays on x; the others move to
  // fresh clones in cluster order.
  const auto keep = static_cast<std::size_t>(cluster_of.back());
  detail::ModelEditor edit(model);
  std::vector<StateIndex> state_of(k, x);
  for (std::size_t c = 0; c < k; ++c)
    if (c != keep) state_of[c] = edit.add_page_state(page);

  edit.remove_out_links(x);
  for (std::size_t c = 0; c < k; ++c) {
    for (std::size_t o = 0; o < targets.size(); ++o) {
      StateIndex to = targets[o];
      if (to == x) {
        if (self_cluster < 0) throw InvariantViolation("self-loop without a matching in-link");
        to = state_of[self_cluster];
      }
      if (out_weight[c][o] > 0.0) edit.set_link(state_of[c], to, out_weight[c][o]);
    }
  }
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    const auto c = static_cast<std::size_t>(cluster_of[i]);
    const StateIndex src = vectors[i].source;
    if (c == keep || src == x) continue;
    const double w = model.weight(src, x);
    edit.set_link(src, x, 0.0);
    edit.set_link(src, state_of[c], w);
  }
  for (StateIndex s : state_of) edit.refresh_visits(s);
  edit.refresh_visits(HpgModel::kFinal);
}

}  // namespace

bool SecondOrderVector::same_distribution(const SecondOrderVector& other) const {
  if (counts.size() != other.counts.size() || context == 0 || other.context == 0) return false;
  for (std::size_t o = 0; o < counts.size(); ++o) {
    const unsigned __int128 lhs = static_cast<unsigned __int128>(counts[o]) * other.context;
    const unsigned __int128 rhs = static_cast<unsigned __int128>(other.counts[o]) * context;
    if (lhs != rhs) return false;
  }
  return true;
}

std::vector<StateIndex> ordered_out_targets(const HpgModel& model, StateIndex x) {
  std::vector<StateIndex> targets;
  for (const auto& [to, w] : model.out_links(x)) targets.push_back(to);
  std::sort(targets.begin(), targets.end(), [&](StateIndex a, StateIndex b) {
    const bool fa = a == HpgModel::kFinal, fb = b == HpgModel::kFinal;
    if (fa != fb) return fb;
    if (model.symbol(a) != model.symbol(b)) return to_index(model.symbol(a)) < to_index(model.symbol(b));
    return a < b;
  });
  return targets;
}

std::vector<SecondOrderVector> in_link_vectors(const HpgModel& model, const NGramTable& ngrams, StateIndex x) {
  if (model.state(x).kind != StateKind::Page) throw ParameterError("in-link vectors are defined for page states");
  const PageId page = model.symbol(x);
  const auto targets = ordered_out_targets(model, x);
  std::vector<SecondOrderVector> vectors;
  for (StateIndex src : model.in_links(x)) {
    SecondOrderVector v;
    v.source = src;
    v.source_page = model.symbol(src);
    v.link_weight = model.weight(src, x);
    v.context = ngrams.bi(v.source_page, page);
    if (v.context == 0) continue;
    v.counts.reserve(targets.size());
    v.probs.reserve(targets.size());
    for (StateIndex to : targets) {
      const std::uint64_t c = ngrams.tri(v.source_page, page, model.symbol(to));
      v.counts.push_back(c);
      v.probs.push_back(static_cast<double>(c) / static_cast<double>(v.context));
    }
    vectors.push_back(std::move(v));
  }
  return vectors;
}

InLinkPartition exact_partition(std::span<const SecondOrderVector> vectors) {
  return exact_from_units(build_units(vectors));
}

InLinkPartition kmeans_from_assignment(std::span<const SecondOrderVector> vectors, int k,
                                       std::vector<int> unit_cluster, int max_iters) {
  check_k(vectors, k);
  const Units units = build_units(vectors);
  if (static_cast<std::size_t>(k) >= units.members.size()) return exact_from_units(units);
  if (unit_cluster.size() != units.members.size()) throw ParameterError("one initial cluster per distinct vector required");
  for (int c : unit_cluster)
    if (c < 0 || c >= k) throw ParameterError("initial cluster out of range");
  return lloyd(units, std::move(unit_cluster), k, std::max(1, max_iters));
}

InLinkPartition kmeans_partition(std::span<const SecondOrderVector> vectors, int k, std::mt19937_64& rng,
                                 int max_iters) {
  check_k(vectors, k);
  const Units units = build_units(vectors);
  if (static_cast<std::size_t>(k) >= units.members.size()) return exact_from_units(units);
  std::vector<int> assign(units.members.size());
  for (int& c : assign) c = static_cast<int>((rng() >> 11) * 0x1.0p-53 * k);
  return lloyd(units, std::move(assign), k, std::max(1, max_iters));
}

double partition_deviation(std::span<const SecondOrderVector> vectors, const InLinkPartition& part) {
  double worst = 0.0;
  for (std::size_t c = 0; c < part.clusters.size(); ++c)
    for (std::size_t i : part.clusters[c])
      for (std::size_t o = 0; o < vectors[i].probs.size(); ++o)
        worst = std::max(worst, std::abs(vectors[i].probs[o] - part.centroids[c][o]));
  return worst;
}

bool partition_is_accurate(std::span<const SecondOrderVector> vectors, const InLinkPartition& part, double gamma) {
  return partition_deviation(vectors, part) <= gamma;
}

bool cloning_eligible(const HpgModel& model, const NGramTable& ngrams, StateIndex x, const CloneConfig& cfg) {
  return model.out_links(x).size() > 1 && model.in_links(x).size() > 1 && model.visits(x) > cfg.support &&
         !state_is_accurate(model, ngrams, x, cfg.gamma);
}

HpgModel clone_state(const HpgModel& model, StateIndex x, std::span<const SecondOrderVector> vectors,
                     const InLinkPartition& part) {
  HpgModel result = model;
  clone_in_place(result, x, vectors, part);
  return result;
}

CloneResult apply_dynamic_clustering(const HpgModel& model, const NGramTable& ngrams, const CloneConfig& cfg,
                                     std::optional<std::span<const PageId>> order) {
  if (!(cfg.gamma >= 0.0 && cfg.gamma <= 1.0)) throw ParameterError("gamma must lie in [0, 1]");
  if (cfg.support < 0.0) throw ParameterError("support threshold must be nonnegative");
  const auto started = std::chrono::steady_clock::now();

  std::vector<PageId> pages;
  for (std::uint32_t p = 0; p < model.pages().size(); ++p) {
    const auto states = model.states_of(PageId{p});
    if (states.size() > 1) throw ParameterError("dynamic clustering expects a clone-free model");
    if (!states.empty()) pages.push_back(PageId{p});
  }
  if (order) {
    std::vector<PageId> given(order->begin(), order->end()), sorted_given = given;
    std::sort(sorted_given.begin(), sorted_given.end());
    if (sorted_given != pages) throw ParameterError("evaluation order must list every page of the model exactly once");
    pages = std::move(given);
  }

  CloneResult result{model, {}};
  HpgModel& work = result.model;
  CloneReport& report = result.report;

  for (PageId page : pages) {
    const StateIndex x = work.states_of(page).front();
    CloneRow row;
    row.page = page;
    row.in_links = work.in_links(x).size();
    row.out_links = work.out_links(x).size();
    row.visits = work.visits(x);
    row.accurate = state_is_accurate(work, ngrams, x, cfg.gamma);

    if (row.out_links <= 1) {
      row.skipped = "single out-link";
    } else if (row.in_links <= 1) {
      row.skipped = "single in-link";
    } else if (!(row.visits > cfg.support)) {
      row.skipped = "below support";
    } else if (row.accurate) {
      row.skipped = "accurate";
    } else {
      const auto vectors = in_link_vectors(work, ngrams, x);
      const std::size_t distinct = build_units(vectors).members.size();
      InLinkPartition part;
      if (cfg.gamma == 0.0 || distinct <= 2) {
        part = exact_partition(vectors);
        row.k_tried = static_cast<int>(distinct);
      } else {
        std::size_t k = 2;
        while (true) {
          if (k >= distinct) {
            part = exact_partition(vectors);
            row.k_tried = static_cast<int>(distinct);
            break;
          }
          std::mt19937_64 rng(splitmix64(cfg.rng_seed ^ splitmix64((std::uint64_t{to_index(page)} << 20) ^ k)));
          part = kmeans_partition(vectors, static_cast<int>(k), rng, cfg.max_kmeans_iters);
          row.k_tried = static_cast<int>(k);
          if (partition_is_accurate(vectors, part, cfg.gamma)) break;
          k = cfg.k_schedule == KSchedule::Square ? k * k : 2 * k;
        }
      }
      if (part.clusters.size() >= 2) {
        clone_in_place(work, x, vectors, part);
        row.clones = part.clusters.size() - 1;
      } else {
        row.skipped = "single cluster";
      }
    }
    report.rows.push_back(std::move(row));
  }

  std::sort(report.rows.begin(), report.rows.end(),
            [](const CloneRow& a, const CloneRow& b) { return to_index(a.page) < to_index(b.page); });
  double sum_sq = 0.0;
  for (const auto& row : report.rows) {
    report.clones_total += row.clones;
    report.clones_max = std::max(report.clones_max, row.clones);
    sum_sq += static_cast<double>(row.clones) * static_cast<double>(row.clones);
  }
  if (!report.rows.empty()) {
    const double n = static_cast<double>(report.rows.size());
    report.clones_avg = static_cast<double>(report.clones_total) / n;
    report.clones_stdev = std::sqrt(std::max(0.0, sum_sq / n - report.clones_avg * report.clones_avg));
  }
  report.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
  return result;
}

std::string clone_report_json(const CloneReport& report, const PageDictionary& pages) {
  nlohmann::json doc;
  doc["format_version"] = 1;
  doc["clones_total"] = report.clones_total;
  doc["clones_avg"] = report.clones_avg;
  doc["clones_stdev"] = report.clones_stdev;
  doc["clones_max"] = report.clones_max;
  doc["wall_ms"] = report.wall_ms;
  auto rows = nlohmann::json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"page", pages.name(r.page)},
                    {"in_links", r.in_links},
                    {"out_links", r.out_links},
                    {"w", r.visits},
                    {"clones", r.clones},
                    {"k_tried", r.k_tried},
                    {"accurate", r.accurate},
                    {"skipped", r.skipped}});
  }
  doc["states"] = std::move(rows);
  return doc.dump(1);
}

std::string clone_report_csv(const CloneReport& report, const PageDictionary& pages) {
  std::ostringstream out;
  out << "page,in_links,out_links,w,clones,k_tried,accurate\n";
  for (const auto& r : report.rows) {
    std::string name = pages.name(r.page);
    if (name.find_first_of(",\"\n") != std::string::npos) {
      std::string quoted = "\"";
      for (char c : name) quoted += c == '"' ? std::string("\"\"") : std::string(1, c);
      name = quoted + "\"";
    }
    out << name << ',' << r.in_links << ',' << r.out_links << ',' << r.visits << ',' << r.clones << ','
        << r.k_tried << ',' << (r.accurate ? "true" : "false") << '\n';
  }
  return out.str();
}

}  // namespace hpg
