#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

#include "hpg/session_store.hpp"

namespace hpg {

/// Uniform double in [0, 1) from the top 53 bits of one draw. Unlike
/// std::uniform_real_distribution the result is the same on every platform.
double uniform01(std::mt19937_64& rng);

/// Uniform index in [0, n).
std::size_t uniform_index(std::mt19937_64& rng, std::size_t n);

/// Discrete power law P(k) ∝ k^-exponent on [min, cap], sampled by inverse CDF.
class PowerLawTable {
 public:
  PowerLawTable(double exponent, std::uint64_t min, std::uint64_t cap);

  std::uint64_t sample(std::mt19937_64& rng) const;
  double probability(std::uint64_t k) const;
  double mean() const;
  std::uint64_t min() const noexcept { return min_; }
  std::uint64_t cap() const noexcept { return min_ + cdf_.size() - 1; }

 private:
  std::uint64_t min_;
  std::vector<double> cdf_;
};

/// One draw; build a PowerLawTable instead when sampling repeatedly.
std::uint64_t sample_power_law(double exponent, std::uint64_t min, std::uint64_t cap, std::mt19937_64& rng);

struct TopologyConfig {
  std::size_t n_pages = 1000;
  double out_exponent = 2.72;
  double in_exponent = 2.1;
  std::uint64_t out_degree_min = 2;
  std::uint64_t in_degree_min = 1;
  std::uint64_t degree_cap = 0;          ///< 0 means n_pages - 1
  std::uint64_t match_retry_limit = 1000;
};

/// Directed simple graph; out[i] is sorted and holds no i and no repeats.
struct WebTopology {
  std::size_t n_pages = 0;
  std::vector<std::vector<std::uint32_t>> out;
  std::uint64_t out_stubs = 0;           ///< stubs drawn before matching
  std::uint64_t in_stubs = 0;
  std::uint64_t dropped_out_stubs = 0;   ///< left unmatched
  std::uint64_t dropped_in_stubs = 0;

  std::size_t link_count() const;
  std::vector<std::uint32_t> in_degrees() const;
  double mean_out_degree() const;
  double mean_in_degree() const;
};

/// Configuration-model stub matching. A candidate pair that would form a loop
/// or a duplicate is rejected and its stubs stay in the pools; after
/// match_retry_limit consecutive rejections the remaining stubs are dropped.
WebTopology generate_topology(const TopologyConfig& cfg, std::mt19937_64& rng);

/// Power iteration with uniform teleport; dangling pages spread their score
/// uniformly. Stops when the L1 change drops below tol.
std::vector<double> pagerank(const WebTopology& topology, double damping = 0.85, double tol = 1e-10,
                             int max_iters = 10000);

struct SessionGenConfig {
  std::uint64_t n_sessions = 2000;
  double length_exponent = 1.5;
  double stop_prob = 0.15;
  double damping = 0.85;
  std::uint64_t max_length = 100000;     ///< cap of the click power law
};

/// Random-surfer sessions: start page drawn from the normalized scores, a
/// click budget L from the power law, then uniform out-link steps until L
/// links were followed, a stop_prob coin ends it, or a dead end is hit.
/// Pages are named "p<index>" and interned in order of first appearance.
SessionLog generate_sessions(const WebTopology& topology, const std::vector<double>& scores,
                             const SessionGenConfig& cfg, std::mt19937_64& rng);

struct SyntheticDataset {
  WebTopology topology;
  std::vector<double> pagerank;
  SessionLog log;
};

/// Topology, PageRank and sessions from one RNG stream seeded with seed.
SyntheticDataset generate_dataset(std::size_t n_pages, std::uint64_t n_sessions, std::uint64_t seed,
                                  TopologyConfig topology = {}, SessionGenConfig sessions = {});

/// Edge list with header "source,target".
std::string topology_csv(const WebTopology& topology);

std::string synthetic_page_name(std::uint32_t index);

}  // namespace hpg
