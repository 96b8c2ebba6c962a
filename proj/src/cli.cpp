#include "hpg/cli.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "hpg/cloning.hpp"
#include "hpg/error.hpp"
#include "hpg/model_io.hpp"
#include "hpg/ngram.hpp"
#include "hpg/report.hpp"
#include "hpg/synth.hpp"

namespace hpg {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::ios_base::failure("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::ios_base::failure("cannot write '" + path + "'");
  out << text;
  out.flush();
  if (!out) throw std::ios_base::failure("cannot write '" + path + "'");
}

bool looks_like_json(const std::string& text) {
  const auto pos = text.find_first_not_of(" \t\r\n\xEF\xBB\xBF");
  return pos != std::string::npos && text[pos] == '{';
}

template <class T>
std::vector<T> parse_list(const std::string& text, const char* what) {
  std::vector<T> values;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (item.empty()) continue;
    std::istringstream conv(item);
    T v{};
    if (!(conv >> v) || !conv.eof()) throw UsageError(std::string("invalid ") + what + " '" + item + "'");
    values.push_back(v);
  }
  return values;
}

void check_alpha(double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw UsageError("--alpha must lie in [0, 1]");
}

KSchedule parse_schedule(const std::string& s) {
  if (s == "square") return KSchedule::Square;
  if (s == "double") return KSchedule::Double;
  throw UsageError("--k-schedule must be 'square' or 'double'");
}

ExportFormat format_for(const std::string& path) {
  return path.size() >= 4 && path.compare(path.size() - 4, 4, ".dot") == 0 ? ExportFormat::Dot : ExportFormat::Json;
}

struct BuildOpts {
  std::string input;
  double alpha = 0.0;
  std::string out;
};

struct CloneOpts {
  std::string input;
  std::string sessions;
  double alpha = 0.0;
  double gamma = 0.0;
  double support = 30.0;
  std::string k_schedule = "square";
  std::uint64_t seed = 0;
  std::string out;
  std::string report_csv;
};

struct NGramOpts {
  std::string input;
  int order = 3;
  double alpha = 0.0;
  std::string out;
};

struct GenOpts {
  std::size_t pages = 1000;
  std::uint64_t sessions = 0;
  std::uint64_t seed = 0;
  std::string out;
  std::string topology;
};

struct SweepOpts {
  std::string input;
  std::string synthetic;
  std::optional<std::string> gammas;
  std::string orders;
  std::string csv;
  double alpha = 0.0;
  double support = 30.0;
  std::string k_schedule = "square";
  std::uint64_t seed = 0;
};

struct TrailOpts {
  std::string model;
  double cutpoint = 0.0;
};

int cmd_build(const BuildOpts& o, std::ostream& out) {
  check_alpha(o.alpha);
  const auto start = Clock::now();
  const SessionLog log = load_sessions(o.input);
  const HpgModel model = build_first_order(count_ngrams(log), log.pages, o.alpha);
  StatsReport report;
  report.build_ms = ms_since(start);
  report.dataset = dataset_stats(log);
  report.model = model_stats(model);
  if (!o.out.empty()) save_model(model, o.out, format_for(o.out));
  out << to_json(report) << '\n';
  return kExitOk;
}

int cmd_clone(const CloneOpts& o, std::ostream& out) {
  check_alpha(o.alpha);
  if (!(o.gamma >= 0.0 && o.gamma <= 1.0)) throw UsageError("--gamma must lie in [0, 1]");
  if (!(o.support >= 0.0)) throw UsageError("--support must be nonnegative");
  CloneConfig cfg;
  cfg.gamma = o.gamma;
  cfg.support = o.support;
  cfg.k_schedule = parse_schedule(o.k_schedule);
  cfg.rng_seed = o.seed;

  const auto start = Clock::now();
  const std::string text = read_file(o.input);
  SessionLog log;
  HpgModel model;
  NGramTable ngrams;
  if (looks_like_json(text)) {
    if (o.sessions.empty()) throw UsageError("a model input needs --sessions with the matching session file");
    model = import_model(text);
    log = load_sessions(o.sessions, model.pages());
    ngrams = count_ngrams(log);
    if (!(build_first_order(ngrams, log.pages, model.alpha()) == model))
      throw InvariantViolation("model '" + o.input + "' was not built from '" + o.sessions + "'");
  } else {
    log = parse_sessions(text);
    ngrams = count_ngrams(log);
    model = build_first_order(ngrams, log.pages, o.alpha);
  }
  StatsReport report;
  report.build_ms = ms_since(start);
  const CloneResult res = apply_dynamic_clustering(model, ngrams, cfg);
  report.clone_ms = res.report.wall_ms;
  report.dataset = dataset_stats(log);
  report.model = model_stats(res.model);
  report.clones = clone_summary(res.report);
  if (!o.out.empty()) save_model(res.model, o.out, format_for(o.out));
  if (!o.report_csv.empty()) write_file(o.report_csv, clone_report_csv(res.report, res.model.pages()));
  out << to_json(report) << '\n';
  return kExitOk;
}

int cmd_ngram(const NGramOpts& o, std::ostream& out) {
  check_alpha(o.alpha);
  if (o.order < 2) throw UsageError("--order must be at least 2");
  const auto start = Clock::now();
  const SessionLog log = load_sessions(o.input);
  const NGramModel ng = build_ngram(log, o.order, o.alpha);
  StatsReport report;
  report.build_ms = ms_since(start);
  report.dataset = dataset_stats(log);
  report.model = model_stats(ng.model);
  const DropStats drop = dropped_sessions(log, o.order);
  report.ngram = NGramSummary{o.order, drop.count, drop.fraction, theoretical_drop_fraction(o.order)};
  if (!o.out.empty()) save_model(ng.model, o.out, format_for(o.out));
  out << to_json(report) << '\n';
  return kExitOk;
}

int cmd_gen(const GenOpts& o, std::ostream& out) {
  if (o.pages < 1) throw UsageError("--pages must be positive");
  const std::uint64_t sessions = o.sessions == 0 ? 2 * o.pages : o.sessions;
  const auto start = Clock::now();
  const SyntheticDataset data = generate_dataset(o.pages, sessions, o.seed);
  StatsReport report;
  report.build_ms = ms_since(start);
  report.dataset = dataset_stats(data.log);
  report.topology = topology_summary(data.topology);
  if (!o.out.empty()) {
    write_file(o.out, write_sessions(data.log));
    write_file(o.topology.empty() ? o.out + ".topology.csv" : o.topology, topology_csv(data.topology));
  }
  out << to_json(report) << '\n';
  return kExitOk;
}

int cmd_sweep(const SweepOpts& o, std::ostream& out) {
  check_alpha(o.alpha);
  SweepConfig cfg;
  cfg.alpha = o.alpha;
  cfg.gammas = o.gammas ? parse_list<double>(*o.gammas, "gamma") : std::vector<double>{0, 0.2, 0.4, 0.6, 0.8, 1};
  if (cfg.gammas.empty()) throw UsageError("--gammas must list at least one value");
  for (double g : cfg.gammas)
    if (!(g >= 0.0 && g <= 1.0)) throw UsageError("gamma values must lie in [0, 1]");
  cfg.orders = parse_list<int>(o.orders, "order");
  for (int n : cfg.orders)
    if (n < 2) throw UsageError("orders must be at least 2");
  cfg.clone.support = o.support;
  cfg.clone.k_schedule = parse_schedule(o.k_schedule);
  cfg.clone.rng_seed = o.seed;
  const auto sizes = parse_list<std::size_t>(o.synthetic, "size");
  if (o.input.empty() == sizes.empty()) throw UsageError("give either a session file or --synthetic sizes");

  std::vector<SweepRow> rows;
  if (!o.input.empty()) {
    rows = run_sweep(o.input, load_sessions(o.input), cfg);
  } else {
    for (std::size_t n : sizes) {
      if (n < 1) throw UsageError("synthetic sizes must be positive");
      const SyntheticDataset data = generate_dataset(n, 2 * n, o.seed);
      auto part = run_sweep("synthetic-" + std::to_string(n), data.log, cfg);
      rows.insert(rows.end(), part.begin(), part.end());
    }
  }
  const std::string csv = sweep_csv(rows);
  if (o.csv.empty()) {
    out << csv;
  } else {
    write_file(o.csv, csv);
  }
  return kExitOk;
}

int cmd_trails(const TrailOpts& o, std::ostream& out) {
  if (!(o.cutpoint > 0.0 && o.cutpoint <= 1.0)) throw UsageError("--cutpoint must lie in (0, 1]");
  const HpgModel model = load_model(o.model);
  for (const Trail& t : enumerate_trails(model, o.cutpoint)) {
    out << format_number(t.probability);
    for (PageId p : t.pages) out << ' ' << model.pages().name(p);
    out << '\n';
  }
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Hypertext probabilistic grammars with dynamic clustering-based cloning", "hpg"};
  app.require_subcommand(1);

  BuildOpts build;
  auto* sc_build = app.add_subcommand("build", "Build a first-order model from a session file");
  sc_build->add_option("sessions", build.input, "Session file")->required();
  sc_build->add_option("--alpha", build.alpha, "Weight of page frequency in initial probabilities");
  sc_build->add_option("--out", build.out, "Model output (.json or .dot)");

  CloneOpts clone;
  auto* sc_clone = app.add_subcommand("clone", "Apply dynamic clustering-based cloning");
  sc_clone->add_option("input", clone.input, "Session file or first-order model JSON")->required();
  sc_clone->add_option("--sessions", clone.sessions, "Session file the model was built from");
  sc_clone->add_option("--alpha", clone.alpha, "Alpha when building from sessions");
  sc_clone->add_option("--gamma", clone.gamma, "Accuracy threshold");
  sc_clone->add_option("--support", clone.support, "Minimum visits before a state is considered");
  sc_clone->add_option("--k-schedule", clone.k_schedule, "square or double");
  sc_clone->add_option("--seed", clone.seed, "K-means seed");
  sc_clone->add_option("--out", clone.out, "Model output (.json or .dot)");
  sc_clone->add_option("--report-csv", clone.report_csv, "Per-state clone report");

  NGramOpts ngram;
  auto* sc_ngram = app.add_subcommand("ngram", "Build an N-gram model");
  sc_ngram->add_option("sessions", ngram.input, "Session file")->required();
  sc_ngram->add_option("--order", ngram.order, "N");
  sc_ngram->add_option("--alpha", ngram.alpha, "Alpha");
  sc_ngram->add_option("--out", ngram.out, "Model output (.json or .dot)");

  GenOpts gen;
  auto* sc_gen = app.add_subcommand("gen", "Generate a synthetic topology and session log");
  sc_gen->add_option("--pages", gen.pages, "Number of pages");
  sc_gen->add_option("--sessions", gen.sessions, "Number of sessions (default twice the pages)");
  sc_gen->add_option("--seed", gen.seed, "Random seed");
  sc_gen->add_option("--out", gen.out, "Session file output");
  sc_gen->add_option("--topology", gen.topology, "Topology CSV output (default <out>.topology.csv)");

  SweepOpts sweep;
  auto* sc_sweep = app.add_subcommand("sweep", "State counts and timings across methods");
  sc_sweep->add_option("sessions", sweep.input, "Session file");
  sc_sweep->add_option("--synthetic", sweep.synthetic, "Comma-separated synthetic sizes");
  sc_sweep->add_option("--gammas", sweep.gammas, "Comma-separated gamma values");
  sc_sweep->add_option("--orders", sweep.orders, "Comma-separated N-gram orders");
  sc_sweep->add_option("--csv", sweep.csv, "CSV output (default stdout)");
  sc_sweep->add_option("--alpha", sweep.alpha, "Alpha");
  sc_sweep->add_option("--support", sweep.support, "Minimum visits for cloning");
  sc_sweep->add_option("--k-schedule", sweep.k_schedule, "square or double");
  sc_sweep->add_option("--seed", sweep.seed, "Seed for generation and K-means");

  TrailOpts trails;
  auto* sc_trails = app.add_subcommand("trails", "List maximal trails above a cutpoint");
  sc_trails->add_option("model", trails.model, "Model JSON")->required();
  sc_trails->add_option("--cutpoint", trails.cutpoint, "Minimum trail probability")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(std::move(reversed));
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (sc_build->parsed()) return cmd_build(build, out);
    if (sc_clone->parsed()) return cmd_clone(clone, out);
    if (sc_ngram->parsed()) return cmd_ngram(ngram, out);
    if (sc_gen->parsed()) return cmd_gen(gen, out);
    if (sc_sweep->parsed()) return cmd_sweep(sweep, out);
    if (sc_trails->parsed()) return cmd_trails(trails, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ParameterError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::ios_base::failure& e) {
    std::string msg = e.what();
    if (auto cut = msg.find(": iostream error"); cut != std::string::npos) msg.erase(cut);
    err << "error: " << msg << '\n';
    return kExitIo;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace hpg
