#include "hpg/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include "hpg/error.hpp"

namespace hpg {

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
  return std::min(n - 1, static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n)));
}

PowerLawTable::PowerLawTable(double exponent, std::uint64_t min, std::uint64_t cap) : min_(min) {
  if (!(exponent > 1.0)) throw ParameterError("power-law exponent must exceed 1");
  if (min < 1) throw ParameterError("power-law minimum must be at least 1");
  if (cap < min) throw ParameterError("power-law cap must not be below the minimum");
  cdf_.resize(cap - min + 1);
  double total = 0.0;
  for (std::uint64_t k = min; k <= cap; ++k) {
    total += std::pow(static_cast<double>(k), -exponent);
    cdf_[k - min] = total;
  }
  for (double& c : cdf_) c /= total;
  cdf_.back() = 1.0;
}

std::uint64_t PowerLawTable::sample(std::mt19937_64& rng) const {
  const double u = uniform01(rng);
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  return min_ + static_cast<std::uint64_t>(std::min<std::ptrdiff_t>(it - cdf_.begin(), cdf_.size() - 1));
}

double PowerLawTable::probability(std::uint64_t k) const {
  if (k < min_ || k > cap()) return 0.0;
  const std::size_t i = k - min_;
  return i == 0 ? cdf_[0] : cdf_[i] - cdf_[i - 1];
}

double PowerLawTable::mean() const {
  double m = 0.0;
  for (std::uint64_t k = min_; k <= cap(); ++k) m += static_cast<double>(k) * probability(k);
  return m;
}

std::uint64_t sample_power_law(double exponent, std::uint64_t min, std::uint64_t cap, std::mt19937_64& rng) {
  return PowerLawTable(exponent, min, cap).sample(rng);
}

std::size_t WebTopology::link_count() const {
  std::size_t n = 0;
  for (const auto& o : out) n += o.size();
  return n;
}

std::vector<std::uint32_t> WebTopology::in_degrees() const {
  std::vector<std::uint32_t> deg(n_pages, 0);
  for (const auto& o : out)
    for (std::uint32_t t : o) ++deg[t];
  return deg;
}

double WebTopology::mean_out_degree() const {
  return n_pages == 0 ? 0.0 : static_cast<double>(link_count()) / static_cast<double>(n_pages);
}

double WebTopology::mean_in_degree() const {
  // Averaged over pages with at least one in-link.
  std::size_t linked = 0;
  for (std::uint32_t d : in_degrees()) linked += d > 0;
  return linked == 0 ? 0.0 : static_cast<double>(link_count()) / static_cast<double>(linked);
}

WebTopology generate_topology(const TopologyConfig& cfg, std::mt19937_64& rng) {
  if (cfg.n_pages < 1) throw ParameterError("topology needs at least one page");
  if (cfg.n_pages >= 0xFFFFFFF0u) throw ParameterError("too many pages");
  if (cfg.out_degree_min < 1 || cfg.in_degree_min < 1) throw ParameterError("degree minimum must be at least 1");
  if (cfg.match_retry_limit < 1) throw ParameterError("match retry limit must be positive");

  WebTopology topo;
  topo.n_pages = cfg.n_pages;
  topo.out.resize(cfg.n_pages);
  const std::uint64_t cap = cfg.degree_cap == 0 ? cfg.n_pages - 1 : std::min<std::uint64_t>(cfg.degree_cap, cfg.n_pages - 1);
  if (cap == 0) return topo;

  const PowerLawTable out_law(cfg.out_exponent, std::min(cfg.out_degree_min, cap), cap);
  const PowerLawTable in_law(cfg.in_exponent, std::min(cfg.in_degree_min, cap), cap);
  std::vector<std::uint32_t> out_pool, in_pool;
  for (std::uint32_t i = 0; i < cfg.n_pages; ++i) out_pool.insert(out_pool.end(), out_law.sample(rng), i);
  for (std::uint32_t i = 0; i < cfg.n_pages; ++i) in_pool.insert(in_pool.end(), in_law.sample(rng), i);
  topo.out_stubs = out_pool.size();
  topo.in_stubs = in_pool.size();

  std::unordered_set<std::uint64_t> edges;
  std::uint64_t failures = 0;
  while (!out_pool.empty() && !in_pool.empty() && failures < cfg.match_retry_limit) {
    const std::size_t i = uniform_index(rng, out_pool.size());
    const std::size_t j = uniform_index(rng, in_pool.size());
    const std::uint32_t s = out_pool[i], t = in_pool[j];
    if (s == t || !edges.insert((std::uint64_t{s} << 32) | t).second) {
      ++failures;
      continue;
    }
    failures = 0;
    topo.out[s].push_back(t);
    out_pool[i] = out_pool.back();
    out_pool.pop_back();
    in_pool[j] = in_pool.back();
    in_pool.pop_back();
  }
  topo.dropped_out_stubs = out_pool.size();
  topo.dropped_in_stubs = in_pool.size();
  for (auto& o : topo.out) std::sort(o.begin(), o.end());
  return topo;
}

std::vector<double> pagerank(const WebTopology& topology, double damping, double tol, int max_iters) {
  const std::size_t n = topology.n_pages;
  if (n == 0) throw ParameterError("PageRank needs a nonempty graph");
  if (!(damping > 0.0 && damping < 1.0)) throw ParameterError("damping must lie in (0, 1)");
  std::vector<double> rank(n, 1.0 / static_cast<double>(n)), next(n);
  for (int iter = 0; iter < max_iters; ++iter) {
    double dangling = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      if (topology.out[i].empty()) dangling += rank[i];
    const double base = (1.0 - damping) / static_cast<double>(n) + damping * dangling / static_cast<double>(n);
    std::fill(next.begin(), next.end(), base);
    for (std::size_t i = 0; i < n; ++i) {
      if (topology.out[i].empty()) continue;
      const double share = damping * rank[i] / static_cast<double>(topology.out[i].size());
      for (std::uint32_t t : topology.out[i]) next[t] += share;
    }
    const double sum = std::accumulate(next.begin(), next.end(), 0.0);
    double change = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      next[i] /= sum;
      change += std::abs(next[i] - rank[i]);
    }
    rank.swap(next);
    if (change < tol) break;
  }
  return rank;
}

std::string synthetic_page_name(std::uint32_t index) { return "p" + std::to_string(index); }

SessionLog generate_sessions(const WebTopology& topology, const std::vector<double>& scores,
                             const SessionGenConfig& cfg, std::mt19937_64& rng) {
  if (topology.n_pages == 0) throw ParameterError("topology has no pages");
  if (scores.size() != topology.n_pages) throw ParameterError("one score per page required");
  if (!(cfg.stop_prob >= 0.0 && cfg.stop_prob < 1.0)) throw ParameterError("stop probability must lie in [0, 1)");
  if (!(cfg.damping > 0.0 && cfg.damping < 1.0)) throw ParameterError("damping must lie in (0, 1)");

  std::vector<double> start_cdf(scores.size());
  double total = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!(scores[i] >= 0.0)) throw ParameterError("scores must be nonnegative");
    total += scores[i];
    start_cdf[i] = total;
  }
  if (!(total > 0.0)) throw ParameterError("scores sum to zero");
  for (double& c : start_cdf) c /= total;
  const PowerLawTable length_law(cfg.length_exponent, 1, std::max<std::uint64_t>(1, cfg.max_length));

  SessionLog log;
  std::vector<PageId> ids(topology.n_pages, kStartSymbol);
  auto id_of = [&](std::uint32_t page) {
    if (ids[page] == kStartSymbol) ids[page] = log.pages.intern(synthetic_page_name(page));
    return ids[page];
  };

  log.entries.reserve(cfg.n_sessions);
  for (std::uint64_t s = 0; s < cfg.n_sessions; ++s) {
    const double u = uniform01(rng);
    auto page = static_cast<std::uint32_t>(
        std::min<std::ptrdiff_t>(std::upper_bound(start_cdf.begin(), start_cdf.end(), u) - start_cdf.begin(),
                                 start_cdf.size() - 1));
    // L counts followed links, so a session that is not cut short has L + 1 pages.
    const std::uint64_t clicks = length_law.sample(rng);
    Session session;
    session.pages.push_back(id_of(page));
    while (session.pages.size() <= clicks) {
      if (uniform01(rng) < cfg.stop_prob) break;
      const auto& out = topology.out[page];
      if (out.empty()) break;
      page = out[uniform_index(rng, out.size())];
      session.pages.push_back(id_of(page));
    }
    log.entries.push_back(std::move(session));
  }
  return log;
}

SyntheticDataset generate_dataset(std::size_t n_pages, std::uint64_t n_sessions, std::uint64_t seed,
                                  TopologyConfig topology, SessionGenConfig sessions) {
  topology.n_pages = n_pages;
  sessions.n_sessions = n_sessions;
  std::mt19937_64 rng(seed);
  SyntheticDataset data;
  data.topology = generate_topology(topology, rng);
  data.pagerank = pagerank(data.topology, sessions.damping);
  data.log = generate_sessions(data.topology, data.pagerank, sessions, rng);
  return data;
}

std::string topology_csv(const WebTopology& topology) {
  std::ostringstream out;
  out << "source,target\n";
  for (std::uint32_t s = 0; s < topology.n_pages; ++s)
    for (std::uint32_t t : topology.out[s]) out << synthetic_page_name(s) << ',' << synthetic_page_name(t) << '\n';
  return out.str();
}

}  // namespace hpg
