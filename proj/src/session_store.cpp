#include "hpg/session_store.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include "hpg/error.hpp"

namespace hpg {

namespace {

const std::string kStartName = "S";
const std::string kFinalName = "F";

bool is_separator(char c) { return c == ' ' || c == '\t' || c == ',' || c == '\r' || c == '\v' || c == '\f'; }

std::vector<std::string_view> split_tokens(std::string_view line) {
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && is_separator(line[i])) ++i;
    std::size_t start = i;
    while (i < line.size() && !is_separator(line[i])) ++i;
    if (i > start) tokens.push_back(line.substr(start, i - start));
  }
  return tokens;
}

std::uint64_t parse_count(std::string_view token, std::size_t line_no) {
  std::string_view digits = token.substr(1);
  if (digits.empty()) throw ParseError(line_no, "missing count after '*'");
  std::uint64_t value = 0;
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
  if (ec != std::errc{} || ptr != digits.data() + digits.size())
    throw ParseError(line_no, "malformed count suffix '" + std::string(token) + "'");
  if (value == 0) throw ParseError(line_no, "session count must be at least 1");
  return value;
}

}  // namespace

PageId PageDictionary::intern(std::string_view token) {
  if (auto it = index_.find(std::string(token)); it != index_.end()) return it->second;
  if (names_.size() >= to_index(kStartSymbol)) throw ParameterError("page dictionary is full");
  PageId id{static_cast<std::uint32_t>(names_.size())};
  names_.emplace_back(token);
  index_.emplace(names_.back(), id);
  return id;
}

std::optional<PageId> PageDictionary::find(std::string_view token) const {
  if (auto it = index_.find(std::string(token)); it != index_.end()) return it->second;
  return std::nullopt;
}

const std::string& PageDictionary::name(PageId id) const {
  if (id == kStartSymbol) return kStartName;
  if (id == kFinalSymbol) return kFinalName;
  return names_.at(to_index(id));
}

std::uint64_t SessionLog::total_sessions() const noexcept {
  std::uint64_t n = 0;
  for (const auto& s : entries) n += s.count;
  return n;
}

std::uint64_t SessionLog::total_requests() const noexcept {
  std::uint64_t n = 0;
  for (const auto& s : entries) n += s.count * s.pages.size();
  return n;
}

SessionLog parse_sessions(std::string_view text, PageDictionary dictionary) {
  SessionLog log;
  log.pages = std::move(dictionary);
  if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);

  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    std::size_t eol = text.find('\n');
    std::string_view line = text.substr(0, eol);
    text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);

    auto tokens = split_tokens(line);
    if (tokens.empty() || tokens.front().front() == '#') continue;

    Session session;
    for (std::size_t t = 0; t < tokens.size(); ++t) {
      std::string_view tok = tokens[t];
      if (tok.front() == '*') {
        if (t + 1 != tokens.size()) throw ParseError(line_no, "count suffix must be the last token");
        session.count = parse_count(tok, line_no);
      } else {
        session.pages.push_back(log.pages.intern(tok));
      }
    }
    if (session.pages.empty()) throw ParseError(line_no, "count suffix without any page");
    log.entries.push_back(std::move(session));
  }
  return log;
}

SessionLog load_sessions(const std::string& path, PageDictionary dictionary) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::ios_base::failure("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_sessions(buf.str(), std::move(dictionary));
}

void write_sessions(std::ostream& out, const SessionLog& log) {
  for (const auto& s : log.entries) {
    for (std::size_t i = 0; i < s.pages.size(); ++i) {
      const std::string& tok = log.pages.name(s.pages[i]);
      if (tok.empty() || tok.front() == '*' || tok.front() == '#' ||
          std::any_of(tok.begin(), tok.end(), [](char c) { return is_separator(c) || c == '\n'; }))
        throw ParameterError("page token '" + tok + "' cannot be written to a session file");
      if (i) out << ' ';
      out << tok;
    }
    if (s.count != 1) out << " *" << s.count;
    out << '\n';
  }
}

std::string write_sessions(const SessionLog& log) {
  std::ostringstream out;
  write_sessions(out, log);
  return out.str();
}

void NGramTable::add_session(std::span<const PageId> pages, std::uint64_t count) {
  if (pages.empty() || count == 0) return;
  sessions_ += count;
  std::vector<PageId> padded;
  padded.reserve(pages.size() + 2);
  padded.push_back(kStartSymbol);
  padded.insert(padded.end(), pages.begin(), pages.end());
  padded.push_back(kFinalSymbol);

  for (PageId p : pages) uni_[p] += count;
  for (std::size_t i = 0; i + 1 < padded.size(); ++i) bi_[{padded[i], padded[i + 1]}] += count;
  for (std::size_t i = 0; i + 2 < padded.size(); ++i) tri_[{padded[i], padded[i + 1], padded[i + 2]}] += count;
}

NGramTable& NGramTable::operator+=(const NGramTable& other) {
  for (const auto& [k, v] : other.uni_) uni_[k] += v;
  for (const auto& [k, v] : other.bi_) bi_[k] += v;
  for (const auto& [k, v] : other.tri_) tri_[k] += v;
  sessions_ += other.sessions_;
  return *this;
}

std::uint64_t NGramTable::uni(PageId page) const {
  auto it = uni_.find(page);
  return it == uni_.end() ? 0 : it->second;
}

std::uint64_t NGramTable::bi(PageId a, PageId b) const {
  auto it = bi_.find({a, b});
  return it == bi_.end() ? 0 : it->second;
}

std::uint64_t NGramTable::tri(PageId a, PageId b, PageId c) const {
  auto it = tri_.find({a, b, c});
  return it == tri_.end() ? 0 : it->second;
}

NGramTable count_ngrams(const SessionLog& log) {
  NGramTable table;
  for (const auto& s : log.entries) table.add_session(s.pages, s.count);
  return table;
}

DatasetStats dataset_stats(const SessionLog& log) {
  DatasetStats st;
  std::unordered_set<PageId> starts, ends, pages;
  double sum_sq = 0.0;
  for (const auto& s : log.entries) {
    if (s.pages.empty()) continue;
    const auto len = static_cast<std::uint64_t>(s.pages.size());
    st.sessions += s.count;
    st.requests += s.count * len;
    sum_sq += static_cast<double>(s.count) * static_cast<double>(len) * static_cast<double>(len);
    st.max_length = std::max(st.max_length, len);
    starts.insert(s.pages.front());
    ends.insert(s.pages.back());
    pages.insert(s.pages.begin(), s.pages.end());
  }
  if (st.sessions > 0) {
    const double n = static_cast<double>(st.sessions);
    st.avg_length = static_cast<double>(st.requests) / n;
    st.stdev_length = std::sqrt(std::max(0.0, sum_sq / n - st.avg_length * st.avg_length));
  }
  st.starting_pages = starts.size();
  st.terminating_pages = ends.size();
  st.distinct_pages = pages.size();
  return st;
}

}  // namespace hpg
