#include "hpg/report.hpp"

#include <array>
#include <charconv>
#include <chrono>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "hpg/error.hpp"
#include "hpg/ngram.hpp"

namespace hpg {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

void mean_stdev(const std::vector<double>& xs, double& mean, double& stdev) {
  mean = stdev = 0.0;
  if (xs.empty()) return;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  for (double x : xs) stdev += (x - mean) * (x - mean);
  stdev = std::sqrt(stdev / static_cast<double>(xs.size()));
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string format_number(double value) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return ec == std::errc{} ? std::string(buf.data(), ptr) : std::to_string(value);
}

ModelStats model_stats(const HpgModel& model) {
  ModelStats st;
  st.states = model.state_count();
  st.page_states = model.page_state_count();
  st.links = model.link_count();
  std::vector<double> outs, ins;
  for (StateIndex s = 2; s < model.state_count(); ++s) {
    outs.push_back(static_cast<double>(model.out_links(s).size()));
    ins.push_back(static_cast<double>(model.in_links(s).size()));
  }
  mean_stdev(outs, st.avg_out_links, st.stdev_out_links);
  mean_stdev(ins, st.avg_in_links, st.stdev_in_links);
  return st;
}

CloneSummary clone_summary(const CloneReport& report) {
  return {report.clones_total, report.clones_avg, report.clones_stdev, report.clones_max};
}

TopologySummary topology_summary(const WebTopology& topology) {
  return {topology.n_pages,          topology.link_count(),        topology.mean_out_degree(),
          topology.mean_in_degree(), topology.dropped_out_stubs, topology.dropped_in_stubs};
}

std::string to_json(const StatsReport& report) {
  nlohmann::json doc;
  doc["format_version"] = kReportFormatVersion;
  if (report.dataset) {
    const auto& d = *report.dataset;
    doc["dataset"] = {{"sessions", d.sessions},
                      {"requests", d.requests},
                      {"avg_session_length", d.avg_length},
                      {"stdev_session_length", d.stdev_length},
                      {"max_session_length", d.max_length},
                      {"starting_pages", d.starting_pages},
                      {"terminating_pages", d.terminating_pages},
                      {"distinct_pages", d.distinct_pages}};
  }
  if (report.model) {
    const auto& m = *report.model;
    doc["model"] = {{"states", m.states},
                    {"page_states", m.page_states},
                    {"links", m.links},
                    {"avg_out_links", m.avg_out_links},
                    {"stdev_out_links", m.stdev_out_links},
                    {"avg_in_links", m.avg_in_links},
                    {"stdev_in_links", m.stdev_in_links}};
  }
  if (report.clones) {
    const auto& c = *report.clones;
    doc["clones"] = {{"total", c.total}, {"avg", c.avg}, {"stdev", c.stdev}, {"max", c.max}};
  }
  if (report.ngram) {
    const auto& n = *report.ngram;
    doc["ngram"] = {{"order", n.order},
                    {"dropped_sessions", n.dropped_sessions},
                    {"dropped_fraction", n.dropped_fraction},
                    {"theoretical_dropped_fraction", n.theoretical_fraction}};
  }
  if (report.topology) {
    const auto& t = *report.topology;
    doc["topology"] = {{"pages", t.pages},
                       {"links", t.links},
                       {"mean_out_degree", t.mean_out_degree},
                       {"mean_in_degree", t.mean_in_degree},
                       {"dropped_out_stubs", t.dropped_out_stubs},
                       {"dropped_in_stubs", t.dropped_in_stubs}};
  }
  if (report.build_ms || report.clone_ms) {
    auto& timing = doc["timing"];
    timing = nlohmann::json::object();
    if (report.build_ms) timing["build_ms"] = *report.build_ms;
    if (report.clone_ms) timing["clone_ms"] = *report.clone_ms;
  }
  return doc.dump(1);
}

std::vector<SweepRow> run_sweep(const std::string& dataset, const SessionLog& log, const SweepConfig& cfg) {
  if (cfg.gammas.empty()) throw ParameterError("at least one gamma is required");
  for (int n : cfg.orders)
    if (n < 2) throw ParameterError("N-gram order must be at least 2");

  std::vector<SweepRow> rows;
  auto start = Clock::now();
  const NGramTable ngrams = count_ngrams(log);
  const HpgModel fo = build_first_order(ngrams, log.pages, cfg.alpha);
  rows.push_back({dataset, "FO", fo.state_count(), ms_since(start), 0.0, 0.0});

  for (int n : cfg.orders) {
    start = Clock::now();
    try {
      const NGramModel ng = build_ngram(log, n, cfg.alpha);
      rows.push_back({dataset, "ngram-" + std::to_string(n), ng.model.state_count(), ms_since(start), 0.0, 0.0});
    } catch (const EmptyModelError&) {
    }
  }
  for (double gamma : cfg.gammas) {
    CloneConfig cc = cfg.clone;
    cc.gamma = gamma;
    start = Clock::now();
    const CloneResult res = apply_dynamic_clustering(fo, ngrams, cc);
    rows.push_back({dataset, "DC-" + format_number(gamma), res.model.state_count(), ms_since(start),
                    res.report.clones_avg, res.report.clones_stdev});
  }
  return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream out;
  out << "dataset,method,states,time_ms,clones_avg,clones_stdev\n";
  for (const auto& r : rows)
    out << csv_field(r.dataset) << ',' << r.method << ',' << r.states << ',' << format_number(r.time_ms) << ','
        << format_number(r.clones_avg) << ',' << format_number(r.clones_stdev) << '\n';
  return out.str();
}

}  // namespace hpg
