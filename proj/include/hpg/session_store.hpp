#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace hpg {

/// Dense identifier of an interned page token.
///
/// Interning hands out consecutive values starting at zero. The two values at
/// the top of the range are reserved for the virtual start and final symbols
/// and are never produced by a dictionary.
enum class PageId : std::uint32_t {};

inline constexpr PageId kStartSymbol{0xFFFFFFFEu};
inline constexpr PageId kFinalSymbol{0xFFFFFFFFu};

constexpr std::uint32_t to_index(PageId id) noexcept { return static_cast<std::uint32_t>(id); }
constexpr bool is_virtual(PageId id) noexcept { return id == kStartSymbol || id == kFinalSymbol; }

/// Bijection between page tokens and PageIds.
class PageDictionary {
 public:
  PageId intern(std::string_view token);
  std::optional<PageId> find(std::string_view token) const;
  /// Token of a page; "S" and "F" for the virtual symbols.
  const std::string& name(PageId id) const;
  std::size_t size() const noexcept { return names_.size(); }
  const std::vector<std::string>& names() const noexcept { return names_; }

  friend bool operator==(const PageDictionary& a, const PageDictionary& b) { return a.names_ == b.names_; }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, PageId> index_;
};

struct Session {
  std::vector<PageId> pages;
  std::uint64_t count = 1;  // number of occurrences (NOS)

  friend bool operator==(const Session&, const Session&) = default;
};

/// Weighted collection of navigation sessions, kept in input order.
struct SessionLog {
  PageDictionary pages;
  std::vector<Session> entries;

  std::uint64_t total_sessions() const noexcept;
  std::uint64_t total_requests() const noexcept;

  friend bool operator==(const SessionLog&, const SessionLog&) = default;
};

/// Parses the line-oriented session format.
///
/// Each nonblank line holds page tokens separated by whitespace or commas and
/// may end with a `*N` token giving the occurrence count (default 1). Lines
/// whose first non-space character is `#` are comments. CRLF line endings and
/// a leading UTF-8 byte order mark are accepted.
///
/// Pass `dictionary` to intern into an existing page numbering.
SessionLog parse_sessions(std::string_view text, PageDictionary dictionary = {});
SessionLog load_sessions(const std::string& path, PageDictionary dictionary = {});

/// Inverse of parse_sessions. Throws ParameterError for tokens that cannot be
/// written back unambiguously (whitespace, commas, a leading `*` or `#`).
std::string write_sessions(const SessionLog& log);
void write_sessions(std::ostream& out, const SessionLog& log);

struct BigramKey {
  PageId first;
  PageId second;
  friend bool operator==(const BigramKey&, const BigramKey&) = default;
};

struct TrigramKey {
  PageId first;
  PageId second;
  PageId third;
  friend bool operator==(const TrigramKey&, const TrigramKey&) = default;
};

struct BigramKeyHash {
  std::size_t operator()(const BigramKey& k) const noexcept {
    return std::hash<std::uint64_t>{}((std::uint64_t{to_index(k.first)} << 32) | to_index(k.second));
  }
};

struct TrigramKeyHash {
  std::size_t operator()(const TrigramKey& k) const noexcept {
    std::uint64_t h = (std::uint64_t{to_index(k.first)} << 32) | to_index(k.second);
    h ^= std::uint64_t{to_index(k.third)} * 0x9E3779B97F4A7C15ull + (h << 6) + (h >> 2);
    return std::hash<std::uint64_t>{}(h);
  }
};

/// Exact 1-, 2- and 3-gram counts over sessions padded with the start and
/// final symbols. Every session contributes (S, p1) and (pL, F); trigrams come
/// from sliding a width-3 window over S p1 .. pL F, so a single-page session
/// contributes the trigram (S, p1, F).
class NGramTable {
 public:
  using Unigrams = std::unordered_map<PageId, std::uint64_t>;
  using Bigrams = std::unordered_map<BigramKey, std::uint64_t, BigramKeyHash>;
  using Trigrams = std::unordered_map<TrigramKey, std::uint64_t, TrigramKeyHash>;

  void add_session(std::span<const PageId> pages, std::uint64_t count);
  NGramTable& operator+=(const NGramTable& other);

  std::uint64_t uni(PageId page) const;
  std::uint64_t bi(PageId a, PageId b) const;
  std::uint64_t tri(PageId a, PageId b, PageId c) const;

  /// Number of sessions counted (sum of occurrence counts).
  std::uint64_t sessions() const noexcept { return sessions_; }
  bool empty() const noexcept { return sessions_ == 0; }

  const Unigrams& unigrams() const noexcept { return uni_; }
  const Bigrams& bigrams() const noexcept { return bi_; }
  const Trigrams& trigrams() const noexcept { return tri_; }

  friend bool operator==(const NGramTable&, const NGramTable&) = default;

 private:
  Unigrams uni_;
  Bigrams bi_;
  Trigrams tri_;
  std::uint64_t sessions_ = 0;
};

NGramTable count_ngrams(const SessionLog& log);

/// Dataset summary in the shape of the experiment tables.
struct DatasetStats {
  std::uint64_t sessions = 0;
  std::uint64_t requests = 0;
  double avg_length = 0.0;
  double stdev_length = 0.0;
  std::uint64_t max_length = 0;
  std::uint64_t starting_pages = 0;
  std::uint64_t terminating_pages = 0;
  std::uint64_t distinct_pages = 0;
};

DatasetStats dataset_stats(const SessionLog& log);

}  // namespace hpg
