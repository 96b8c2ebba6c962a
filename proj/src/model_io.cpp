#include "hpg/model_io.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "hpg/error.hpp"
#include "model_editor.hpp"

namespace hpg {

namespace {

using nlohmann::json;

std::string short_number(double value) {
  std::array<char, 32> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value, std::chars_format::general, 4);
  return ec == std::errc{} ? std::string(buf.data(), ptr) : std::to_string(value);
}

std::string dot_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

std::string to_json(const HpgModel& model) {
  json doc;
  doc["format_version"] = kModelFormatVersion;
  doc["alpha"] = model.alpha();
  doc["order"] = model.ngram_order();
  doc["pages"] = model.pages().names();
  json states = json::array();
  for (StateIndex s = 0; s < model.state_count(); ++s) {
    const StateId& id = model.state(s);
    json st;
    st["id"] = s;
    switch (id.kind) {
      case StateKind::Start: st["kind"] = "start"; st["page"] = nullptr; break;
      case StateKind::Final: st["kind"] = "final"; st["page"] = nullptr; break;
      case StateKind::Page: st["kind"] = "page"; st["page"] = model.pages().name(id.page); break;
    }
    st["clone_index"] = id.clone_index;
    states.push_back(std::move(st));
  }
  json links = json::array();
  for (StateIndex s = 0; s < model.state_count(); ++s)
    for (const auto& [to, w] : model.out_links(s)) links.push_back({{"from", s}, {"to", to}, {"weight", w}});
  doc["states"] = std::move(states);
  doc["links"] = std::move(links);
  return doc.dump(1);
}

std::string to_dot(const HpgModel& model) {
  std::ostringstream out;
  out << "digraph hpg {\n  rankdir=LR;\n";
  out << "  n0 [label=\"S\", shape=doublecircle, style=filled, fillcolor=lightgrey];\n";
  out << "  n1 [label=\"F\", shape=doublecircle, style=filled, fillcolor=lightgrey];\n";
  for (StateIndex s = 2; s < model.state_count(); ++s)
    out << "  n" << s << " [label=\"" << dot_escape(model.label(s)) << "\", shape=circle];\n";
  for (StateIndex s = 0; s < model.state_count(); ++s)
    for (const auto& [to, w] : model.out_links(s))
      out << "  n" << s << " -> n" << to << " [label=\"" << short_number(w) << " ("
          << short_number(model.probability(s, to)) << ")\"];\n";
  out << "}\n";
  return out.str();
}

const json& member(const json& obj, const char* key, const std::string& path) {
  if (!obj.is_object()) throw SchemaError(path + ": expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw SchemaError(path + "/" + key + ": missing");
  return *it;
}

std::uint64_t as_index(const json& v, const std::string& path) {
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
    throw SchemaError(path + ": expected a nonnegative integer");
  return v.get<std::uint64_t>();
}

}  // namespace

std::string export_model(const HpgModel& model, ExportFormat format) {
  if (model.empty()) throw ParameterError("cannot export a model without page states");
  return format == ExportFormat::Json ? to_json(model) : to_dot(model);
}

HpgModel import_model(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("/: ") + e.what());
  }
  const json& version = member(doc, "format_version", "");
  if (!version.is_number_integer() || version.get<int>() != kModelFormatVersion)
    throw SchemaError("/format_version: unsupported version");
  const json& alpha = member(doc, "alpha", "");
  if (!alpha.is_number() || alpha.get<double>() < 0.0 || alpha.get<double>() > 1.0)
    throw SchemaError("/alpha: expected a number in [0, 1]");
  int order = 2;
  if (auto it = doc.find("order"); it != doc.end()) {
    if (!it->is_number_integer() || it->get<int>() < 2) throw SchemaError("/order: expected an integer >= 2");
    order = it->get<int>();
  }

  const json& states = member(doc, "states", "");
  if (!states.is_array()) throw SchemaError("/states: expected an array");
  if (states.size() < 2) throw SchemaError("/states: S and F are required");

  // First pass collects page tokens in id order so the dictionary is rebuilt
  // with the original numbering of first appearance.
  struct Entry {
    StateKind kind;
    std::string page;
    std::uint32_t clone_index;
  };
  std::vector<Entry> entries(states.size());
  for (std::size_t i = 0; i < states.size(); ++i) {
    const std::string path = "/states/" + std::to_string(i);
    const json& st = states[i];
    if (as_index(member(st, "id", path), path + "/id") != i) throw SchemaError(path + "/id: ids must be 0..n-1 in order");
    std::string kind = "page";
    if (auto it = st.find("kind"); it != st.end()) {
      if (!it->is_string()) throw SchemaError(path + "/kind: expected a string");
      kind = it->get<std::string>();
    }
    const json& page = member(st, "page", path);
    Entry e{StateKind::Page, {}, static_cast<std::uint32_t>(as_index(member(st, "clone_index", path), path + "/clone_index"))};
    if (kind == "start" || kind == "final") {
      e.kind = kind == "start" ? StateKind::Start : StateKind::Final;
    } else if (kind == "page") {
      if (!page.is_string()) throw SchemaError(path + "/page: expected a string");
      e.page = page.get<std::string>();
    } else {
      throw SchemaError(path + "/kind: unknown state kind '" + kind + "'");
    }
    if ((i == 0 && e.kind != StateKind::Start) || (i == 1 && e.kind != StateKind::Final) ||
        (i >= 2 && e.kind != StateKind::Page))
      throw SchemaError(path + ": states 0 and 1 must be S and F, the rest pages");
    entries[i] = std::move(e);
  }

  PageDictionary dict;
  if (auto it = doc.find("pages"); it != doc.end()) {
    if (!it->is_array()) throw SchemaError("/pages: expected an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      if (!(*it)[i].is_string()) throw SchemaError("/pages/" + std::to_string(i) + ": expected a string");
      if (dict.find((*it)[i].get<std::string>())) throw SchemaError("/pages/" + std::to_string(i) + ": duplicate page");
      dict.intern((*it)[i].get<std::string>());
    }
  }
  const std::size_t declared = dict.size();
  for (std::size_t i = 2; i < entries.size(); ++i) {
    if (declared > 0 && !dict.find(entries[i].page))
      throw SchemaError("/states/" + std::to_string(i) + "/page: not listed in /pages");
    dict.intern(entries[i].page);
  }
  HpgModel model = detail::ModelEditor::make(std::move(dict), alpha.get<double>(), order);
  detail::ModelEditor edit(model);
  for (std::size_t i = 2; i < entries.size(); ++i) {
    const PageId page = *model.pages().find(entries[i].page);
    if (model.states_of(page).size() != entries[i].clone_index)
      throw SchemaError("/states/" + std::to_string(i) + "/clone_index: clones must be numbered consecutively");
    edit.add_page_state(page);
  }

  const json& links = member(doc, "links", "");
  if (!links.is_array()) throw SchemaError("/links: expected an array");
  for (std::size_t i = 0; i < links.size(); ++i) {
    const std::string path = "/links/" + std::to_string(i);
    const auto from = as_index(member(links[i], "from", path), path + "/from");
    const auto to = as_index(member(links[i], "to", path), path + "/to");
    const json& w = member(links[i], "weight", path);
    if (from >= entries.size() || to >= entries.size()) throw SchemaError(path + ": state id out of range");
    if (!w.is_number() || !(w.get<double>() > 0.0)) throw SchemaError(path + "/weight: expected a positive number");
    if (from == HpgModel::kFinal || to == HpgModel::kStart) throw SchemaError(path + ": links may not leave F or enter S");
    edit.set_link(static_cast<StateIndex>(from), static_cast<StateIndex>(to), w.get<double>());
  }
  edit.refresh_all_visits();
  return model;
}

HpgModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::ios_base::failure("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return import_model(buf.str());
}

void save_model(const HpgModel& model, const std::string& path, ExportFormat format) {
  const std::string text = export_model(model, format);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::ios_base::failure("cannot write '" + path + "'");
  out << text;
  if (!out) throw std::ios_base::failure("cannot write '" + path + "'");
}

}  // namespace hpg
