#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "hpg/model.hpp"
#include "hpg/session_store.hpp"

namespace hpg {

/// How the number of clusters grows after an inaccurate K-means solution.
enum class KSchedule {
  Square,  ///< K := K^2
  Double,  ///< K := 2K
};

struct CloneConfig {
  double gamma = 0.0;               ///< accuracy threshold in [0, 1]
  double support = 30.0;            ///< a state needs more than this many visits
  KSchedule k_schedule = KSchedule::Square;
  std::uint64_t rng_seed = 0;
  int max_kmeans_iters = 100;
};

/// Second-order out-probabilities seen through one in-link of a state.
///
/// The n-gram counts are those of the source *page*: in-links arriving from
/// several clones of the same page therefore carry identical vectors.
/// `counts` and `probs` follow the order of the state's out-targets (pages by
/// id, F last).
struct SecondOrderVector {
  StateIndex source = 0;
  PageId source_page{};
  double link_weight = 0.0;            ///< weight of the in-link in the model
  std::uint64_t context = 0;           ///< bigram count (source page, page)
  std::vector<std::uint64_t> counts;   ///< trigram counts per out-target
  std::vector<double> probs;

  /// Exact comparison of the count ratios.
  bool same_distribution(const SecondOrderVector& other) const;
};

/// Out-targets of x in the order used by SecondOrderVector.
std::vector<StateIndex> ordered_out_targets(const HpgModel& model, StateIndex x);

/// One vector per in-link of x that has bigram evidence. In-links without
/// evidence (an S link created only by alpha mixing) are omitted.
std::vector<SecondOrderVector> in_link_vectors(const HpgModel& model, const NGramTable& ngrams, StateIndex x);

/// Partition of in-link vectors; members index into the vector list.
/// Centroids aggregate trigram counts over the distinct source pages of a
/// cluster and divide by their summed bigram counts.
struct InLinkPartition {
  std::vector<std::vector<std::size_t>> clusters;
  std::vector<std::vector<double>> centroids;
};

/// Groups identical vectors; the exact solution used when gamma = 0.
InLinkPartition exact_partition(std::span<const SecondOrderVector> vectors);

/// K-means over the in-link vectors with Euclidean reassignment.
///
/// Identical vectors form indivisible units. Units start in uniformly random
/// clusters; empty clusters (and clusters whose centroid coincides with
/// another one) are re-seeded with the unit farthest from its centroid.
/// When K reaches the number of distinct vectors the exact grouping is
/// returned. Throws ParameterError when K < 1 or K exceeds the vector count.
InLinkPartition kmeans_partition(std::span<const SecondOrderVector> vectors, int k, std::mt19937_64& rng,
                                 int max_iters = 100);

/// Same as kmeans_partition but starting from a given unit assignment
/// (indexed by distinct vector in order of first appearance).
InLinkPartition kmeans_from_assignment(std::span<const SecondOrderVector> vectors, int k,
                                       std::vector<int> unit_cluster, int max_iters = 100);

/// Largest |vector - centroid| component over all members.
double partition_deviation(std::span<const SecondOrderVector> vectors, const InLinkPartition& part);

/// True when no member deviates from its centroid by more than gamma.
bool partition_is_accurate(std::span<const SecondOrderVector> vectors, const InLinkPartition& part, double gamma);

/// Eligibility for cloning: more than one out-link, more than one in-link,
/// more than `support` visits, and not accurate at gamma.
bool cloning_eligible(const HpgModel& model, const NGramTable& ngrams, StateIndex x, const CloneConfig& cfg);

/// Splits x along the partition. The cluster holding the last in-link stays
/// on x, every other cluster gets a fresh clone. A clone's out-link weight to o is the sum of
/// the trigram counts (i, x, o) over its members. In-links without evidence
/// stay on x. Throws InvariantViolation if the partition does not cover x's
/// evidence in-links exactly once or has fewer than two clusters.
HpgModel clone_state(const HpgModel& model, StateIndex x, std::span<const SecondOrderVector> vectors,
                     const InLinkPartition& part);

struct CloneRow {
  PageId page{};
  std::size_t in_links = 0;
  std::size_t out_links = 0;
  double visits = 0.0;
  std::size_t clones = 0;   ///< states added for this page
  int k_tried = 0;          ///< last K evaluated (0 when no clustering ran)
  bool accurate = false;    ///< accurate at gamma before cloning
  std::string skipped;      ///< reason the page was not cloned, empty otherwise
};

struct CloneReport {
  std::vector<CloneRow> rows;
  std::size_t clones_total = 0;
  double clones_avg = 0.0;
  double clones_stdev = 0.0;
  std::size_t clones_max = 0;
  double wall_ms = 0.0;
};

std::string clone_report_json(const CloneReport& report, const PageDictionary& pages);
/// Header: page,in_links,out_links,w,clones,k_tried,accurate
std::string clone_report_csv(const CloneReport& report, const PageDictionary& pages);

struct CloneResult {
  HpgModel model;
  CloneReport report;
};

/// Dynamic clustering-based cloning over every page of a clone-free
/// first-order model, one evaluation per page. Pages are visited in id order
/// unless `order` lists them explicitly.
CloneResult apply_dynamic_clustering(const HpgModel& model, const NGramTable& ngrams, const CloneConfig& cfg,
                                     std::optional<std::span<const PageId>> order = std::nullopt);

}  // namespace hpg
