#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hpg/cloning.hpp"
#include "hpg/model.hpp"
#include "hpg/session_store.hpp"
#include "hpg/synth.hpp"

namespace hpg {

inline constexpr int kReportFormatVersion = 1;

/// Size of a model. Link counts per page are over page states only.
struct ModelStats {
  std::size_t states = 0;         ///< including S and F
  std::size_t page_states = 0;
  std::size_t links = 0;
  double avg_out_links = 0.0;
  double stdev_out_links = 0.0;
  double avg_in_links = 0.0;
  double stdev_in_links = 0.0;
};

ModelStats model_stats(const HpgModel& model);

struct CloneSummary {
  std::size_t total = 0;
  double avg = 0.0;
  double stdev = 0.0;
  std::size_t max = 0;
};

struct NGramSummary {
  int order = 2;
  std::uint64_t dropped_sessions = 0;
  double dropped_fraction = 0.0;
  double theoretical_fraction = 0.0;
};

struct TopologySummary {
  std::size_t pages = 0;
  std::size_t links = 0;
  double mean_out_degree = 0.0;
  double mean_in_degree = 0.0;
  std::uint64_t dropped_out_stubs = 0;
  std::uint64_t dropped_in_stubs = 0;
};

/// Summary printed by the command-line tool. Absent parts are omitted from
/// the JSON form.
struct StatsReport {
  std::optional<DatasetStats> dataset;
  std::optional<ModelStats> model;
  std::optional<CloneSummary> clones;
  std::optional<NGramSummary> ngram;
  std::optional<TopologySummary> topology;
  std::optional<double> build_ms;
  std::optional<double> clone_ms;
};

CloneSummary clone_summary(const CloneReport& report);
TopologySummary topology_summary(const WebTopology& topology);
std::string to_json(const StatsReport& report);

/// One row of an experiment series.
struct SweepRow {
  std::string dataset;
  std::string method;   ///< "FO", "ngram-<N>" or "DC-<gamma>"
  std::size_t states = 0;
  double time_ms = 0.0;
  double clones_avg = 0.0;
  double clones_stdev = 0.0;
};

struct SweepConfig {
  std::vector<double> gammas;
  std::vector<int> orders;
  double alpha = 0.0;
  CloneConfig clone;      ///< gamma is overwritten per row
};

/// FO row, one row per N-gram order, one DC row per gamma. DC times exclude
/// the first-order build. Orders whose model would be empty are skipped.
std::vector<SweepRow> run_sweep(const std::string& dataset, const SessionLog& log, const SweepConfig& cfg);

/// Header: dataset,method,states,time_ms,clones_avg,clones_stdev
std::string sweep_csv(const std::vector<SweepRow>& rows);

/// Shortest decimal form that reads back to the same double.
std::string format_number(double value);

}  // namespace hpg
