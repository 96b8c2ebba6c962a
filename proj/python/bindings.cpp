#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>
#include <unordered_map>

#include "hpg/cli.hpp"
#include "hpg/cloning.hpp"
#include "hpg/error.hpp"
#include "hpg/model_io.hpp"
#include "hpg/ngram.hpp"
#include "hpg/report.hpp"
#include "hpg/synth.hpp"

namespace py = pybind11;
using namespace hpg;

namespace {

PageId page_of(const SessionLog& log, const std::string& name) {
  if (name == "S") return kStartSymbol;
  if (name == "F") return kFinalSymbol;
  auto id = log.pages.find(name);
  if (!id) throw py::key_error("unknown page '" + name + "'");
  return *id;
}

StateIndex state_of(const HpgModel& m, const std::string& label) {
  for (StateIndex s = 0; s < m.state_count(); ++s)
    if (m.label(s) == label) return s;
  throw py::key_error("unknown state '" + label + "'");
}

std::vector<PageId> pages_of(const HpgModel& m, const std::vector<std::string>& names) {
  std::vector<PageId> ids;
  for (const auto& n : names) {
    auto id = m.pages().find(n);
    if (!id) throw py::key_error("unknown page '" + n + "'");
    ids.push_back(*id);
  }
  return ids;
}

py::dict stats_dict(const DatasetStats& d) {
  py::dict out;
  out["sessions"] = d.sessions;
  out["requests"] = d.requests;
  out["avg_session_length"] = d.avg_length;
  out["stdev_session_length"] = d.stdev_length;
  out["max_session_length"] = d.max_length;
  out["starting_pages"] = d.starting_pages;
  out["terminating_pages"] = d.terminating_pages;
  out["distinct_pages"] = d.distinct_pages;
  return out;
}

py::dict clone_report_dict(const CloneReport& r, const PageDictionary& pages) {
  py::list rows;
  for (const auto& row : r.rows) {
    py::dict d;
    d["page"] = pages.name(row.page);
    d["in_links"] = row.in_links;
    d["out_links"] = row.out_links;
    d["w"] = row.visits;
    d["clones"] = row.clones;
    d["k_tried"] = row.k_tried;
    d["accurate"] = row.accurate;
    d["skipped"] = row.skipped;
    rows.append(d);
  }
  py::dict out;
  out["rows"] = rows;
  out["clones_total"] = r.clones_total;
  out["clones_avg"] = r.clones_avg;
  out["clones_stdev"] = r.clones_stdev;
  out["clones_max"] = r.clones_max;
  out["wall_ms"] = r.wall_ms;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Hypertext probabilistic grammars with dynamic clustering-based cloning";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ParseError>(m, "ParseError", base.ptr());
  py::register_exception<UndefinedProbability>(m, "UndefinedProbability", base.ptr());
  py::register_exception<ParameterError>(m, "ParameterError", base.ptr());
  py::register_exception<SchemaError>(m, "SchemaError", base.ptr());
  py::register_exception<InvariantViolation>(m, "InvariantViolation", base.ptr());
  py::register_exception<EmptyModelError>(m, "EmptyModelError", base.ptr());
  py::register_exception<NonTermination>(m, "NonTermination", base.ptr());

  py::class_<SessionLog>(m, "SessionLog")
      .def_property_readonly("pages", [](const SessionLog& l) { return l.pages.names(); })
      .def_property_readonly("sessions",
                             [](const SessionLog& l) {
                               py::list out;
                               for (const auto& s : l.entries) {
                                 std::vector<std::string> names;
                                 for (PageId p : s.pages) names.push_back(l.pages.name(p));
                                 out.append(py::make_tuple(names, s.count));
                               }
                               return out;
                             })
      .def_property_readonly("total_sessions", &SessionLog::total_sessions)
      .def_property_readonly("total_requests", &SessionLog::total_requests)
      .def("stats", [](const SessionLog& l) { return stats_dict(dataset_stats(l)); })
      .def("to_text", [](const SessionLog& l) { return write_sessions(l); })
      .def("ngram_counts",
           [](const SessionLog& l, const std::vector<std::string>& gram) {
             const NGramTable t = count_ngrams(l);
             std::vector<PageId> ids;
             for (const auto& g : gram) ids.push_back(page_of(l, g));
             if (ids.size() == 1) return t.uni(ids[0]);
             if (ids.size() == 2) return t.bi(ids[0], ids[1]);
             if (ids.size() == 3) return t.tri(ids[0], ids[1], ids[2]);
             throw py::value_error("give one to three pages");
           })
      .def("__len__", [](const SessionLog& l) { return l.entries.size(); });

  m.def("parse_sessions", [](const std::string& text) { return parse_sessions(text); }, py::arg("text"));
  m.def("load_sessions", [](const std::string& path) { return load_sessions(path); }, py::arg("path"));

  py::class_<HpgModel>(m, "Model")
      .def_property_readonly("alpha", &HpgModel::alpha)
      .def_property_readonly("order", &HpgModel::ngram_order)
      .def_property_readonly("state_count", &HpgModel::state_count)
      .def_property_readonly("page_state_count", &HpgModel::page_state_count)
      .def_property_readonly("link_count", &HpgModel::link_count)
      .def("states",
           [](const HpgModel& mdl) {
             std::vector<std::string> out;
             for (StateIndex s = 0; s < mdl.state_count(); ++s) out.push_back(mdl.label(s));
             return out;
           })
      .def("links",
           [](const HpgModel& mdl) {
             py::list out;
             for (StateIndex s = 0; s < mdl.state_count(); ++s)
               for (const auto& [to, w] : mdl.out_links(s)) out.append(py::make_tuple(mdl.label(s), mdl.label(to), w));
             return out;
           })
      .def("weight", [](const HpgModel& mdl, const std::string& a,
                        const std::string& b) { return mdl.weight(state_of(mdl, a), state_of(mdl, b)); })
      .def("probability", [](const HpgModel& mdl, const std::string& a,
                             const std::string& b) { return mdl.probability(state_of(mdl, a), state_of(mdl, b)); })
      .def("visits", [](const HpgModel& mdl, const std::string& a) { return mdl.visits(state_of(mdl, a)); })
      .def("trail_probability",
           [](const HpgModel& mdl, const std::vector<std::string>& pages) {
             const auto ids = pages_of(mdl, pages);
             return trail_probability(mdl, ids);
           })
      .def("trails",
           [](const HpgModel& mdl, double cutpoint) {
             py::list out;
             for (const Trail& t : enumerate_trails(mdl, cutpoint)) {
               std::vector<std::string> names;
               for (PageId p : t.pages) names.push_back(mdl.pages().name(p));
               out.append(py::make_tuple(t.probability, names));
             }
             return out;
           },
           py::arg("cutpoint"))
      .def("is_accurate",
           [](const HpgModel& mdl, const SessionLog& log, double gamma) {
             return model_is_accurate(mdl, count_ngrams(log), gamma);
           },
           py::arg("log"), py::arg("gamma"))
      .def("to_json", [](const HpgModel& mdl) { return export_model(mdl, ExportFormat::Json); })
      .def("to_dot", [](const HpgModel& mdl) { return export_model(mdl, ExportFormat::Dot); })
      .def_static("from_json", [](const std::string& text) { return import_model(text); })
      .def("__eq__", [](const HpgModel& a, const HpgModel& b) { return a == b; });

  m.def("build_first_order",
        [](const SessionLog& log, double alpha) { return build_first_order(count_ngrams(log), log.pages, alpha); },
        py::arg("log"), py::arg("alpha") = 0.0);

  m.def("build_ngram",
        [](const SessionLog& log, int order, double alpha) {
          NGramModel ng = build_ngram(log, order, alpha);
          return py::make_tuple(std::move(ng.model), ng.retained_sessions, ng.dropped_sessions);
        },
        py::arg("log"), py::arg("order"), py::arg("alpha") = 0.0);

  m.def("second_order_prob",
        [](const SessionLog& log, const std::string& a, const std::string& b, const std::string& c) {
          return second_order_prob(count_ngrams(log), page_of(log, a), page_of(log, b), page_of(log, c));
        });

  m.def("clone",
        [](const HpgModel& model, const SessionLog& log, double gamma, double support, const std::string& schedule,
           std::uint64_t seed) {
          CloneConfig cfg;
          cfg.gamma = gamma;
          cfg.support = support;
          if (schedule == "square") {
            cfg.k_schedule = KSchedule::Square;
          } else if (schedule == "double") {
            cfg.k_schedule = KSchedule::Double;
          } else {
            throw ParameterError("k_schedule must be 'square' or 'double'");
          }
          cfg.rng_seed = seed;
          CloneResult res = apply_dynamic_clustering(model, count_ngrams(log), cfg);
          py::dict report = clone_report_dict(res.report, res.model.pages());
          return py::make_tuple(std::move(res.model), report);
        },
        py::arg("model"), py::arg("log"), py::arg("gamma") = 0.0, py::arg("support") = 30.0,
        py::arg("k_schedule") = "square", py::arg("seed") = 0);

  m.def("generate",
        [](std::size_t pages, std::uint64_t sessions, std::uint64_t seed) {
          SyntheticDataset data = generate_dataset(pages, sessions, seed);
          std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
          for (std::uint32_t s = 0; s < data.topology.n_pages; ++s)
            for (std::uint32_t t : data.topology.out[s]) edges.emplace_back(s, t);
          return py::make_tuple(std::move(data.log), edges, data.pagerank);
        },
        py::arg("pages"), py::arg("sessions"), py::arg("seed") = 0);

  m.def("pagerank",
        [](std::size_t n, const std::vector<std::pair<std::uint32_t, std::uint32_t>>& edges, double damping) {
          WebTopology topo;
          topo.n_pages = n;
          topo.out.resize(n);
          for (auto [s, t] : edges) {
            if (s >= n || t >= n) throw ParameterError("edge endpoint out of range");
            topo.out[s].push_back(t);
          }
          return pagerank(topo, damping);
        },
        py::arg("n"), py::arg("edges"), py::arg("damping") = 0.85);

  m.def("zeta", &zeta, py::arg("s"));
  m.def("theoretical_drop_fraction", &theoretical_drop_fraction, py::arg("order"));
  m.def("dropped_fraction", [](const SessionLog& log, int order) { return dropped_sessions(log, order).fraction; },
        py::arg("log"), py::arg("order"));

  m.def("run_cli",
        [](const std::vector<std::string>& args) {
          std::ostringstream out, err;
          const int code = run_cli(args, out, err);
          return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"));
}
