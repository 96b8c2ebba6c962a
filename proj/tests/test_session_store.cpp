#include <doctest.h>

#include <sstream>

#include "hpg/error.hpp"
#include "hpg/session_store.hpp"
#include "support/oracles.hpp"

using namespace hpg;

namespace {

SessionLog worked() { return load_sessions(HPG_TEST_DATA_DIR "/worked.txt"); }

}  // namespace

TEST_CASE("parse counts and tokens") {
  const auto log = parse_sessions("A1 A2 A3 *3\nA1,A2, A4\n\n  # comment\r\nA5 A2 A4 *3\r\n");
  REQUIRE(log.entries.size() == 3);
  CHECK(log.entries[0].count == 3);
  CHECK(log.entries[1].count == 1);
  CHECK(log.pages.names() == std::vector<std::string>{"A1", "A2", "A3", "A4", "A5"});
  CHECK(log.total_sessions() == 7);
  CHECK(log.total_requests() == 21);
}

TEST_CASE("byte order mark is skipped") {
  const auto log = parse_sessions("\xEF\xBB\xBFhome about\n");
  CHECK(log.pages.name(log.entries[0].pages[0]) == "home");
}

TEST_CASE("parse errors carry the line number") {
  auto line_of = [](const char* text) {
    try {
      parse_sessions(text);
    } catch (const ParseError& e) {
      return e.line();
    }
    return std::size_t{0};
  };
  CHECK(line_of("A B\nA *\n") == 2);
  CHECK(line_of("A B *x\n") == 1);
  CHECK(line_of("A\n\nA *0\n") == 3);
  CHECK(line_of("A *2 B\n") == 1);
  CHECK(line_of("*4\n") == 1);
}

TEST_CASE("missing file raises an IO failure") {
  CHECK_THROWS_AS(load_sessions("/nonexistent/sessions.txt"), std::ios_base::failure);
}

TEST_CASE("write then parse round-trips") {
  const auto log = worked();
  CHECK(parse_sessions(write_sessions(log)) == log);
  SessionLog bad;
  bad.entries.push_back({{bad.pages.intern("has space")}, 1});
  CHECK_THROWS_AS(write_sessions(bad), ParameterError);
}

TEST_CASE("worked example n-gram counts") {
  const auto log = worked();
  const auto t = count_ngrams(log);
  auto id = [&](const char* n) { return *log.pages.find(n); };
  CHECK(t.uni(id("A2")) == 8);
  CHECK(t.bi(id("A1"), id("A2")) == 4);
  CHECK(t.bi(id("A2"), id("A3")) == 3);
  CHECK(t.tri(id("A1"), id("A2"), id("A3")) == 3);
  CHECK(t.tri(id("A5"), id("A2"), id("A3")) == 0);
  CHECK(t.bi(kStartSymbol, id("A5")) == 4);
  CHECK(t.tri(id("A2"), id("A4"), kFinalSymbol) == 4);
  CHECK(t.sessions() == 8);
}

TEST_CASE("single-page session yields S p F") {
  const auto log = parse_sessions("A1\n");
  const auto t = count_ngrams(log);
  const PageId a = *log.pages.find("A1");
  CHECK(t.bi(kStartSymbol, a) == 1);
  CHECK(t.bi(a, kFinalSymbol) == 1);
  CHECK(t.tri(kStartSymbol, a, kFinalSymbol) == 1);
  CHECK(t.trigrams().size() == 1);
}

TEST_CASE("counts agree with a direct scan on generated logs") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto log = testing::small_instance(seed);
    const auto t = count_ngrams(log);
    auto id = [&](const std::string& n) {
      if (n == "S") return kStartSymbol;
      if (n == "F") return kFinalSymbol;
      return *log.pages.find(n);
    };
    const auto bi = testing::brute_ngrams(log, 2);
    const auto tri = testing::brute_ngrams(log, 3);
    CHECK(t.bigrams().size() == bi.size());
    CHECK(t.trigrams().size() == tri.size());
    for (const auto& [g, c] : bi) CHECK(t.bi(id(g[0]), id(g[1])) == c);
    for (const auto& [g, c] : tri) CHECK(t.tri(id(g[0]), id(g[1]), id(g[2])) == c);
  }
}

TEST_CASE("merging tables equals counting the union") {
  const auto a = parse_sessions("A B C *2\nB C\n");
  const auto both = parse_sessions("A B C *2\nB C\nC A B *3\n");
  const auto b = parse_sessions("C A B *3\n", a.pages);
  NGramTable merged = count_ngrams(a);
  merged += count_ngrams(b);
  CHECK(merged == count_ngrams(both));
}

TEST_CASE("dataset statistics") {
  const auto st = dataset_stats(parse_sessions("A B C *2\nB\nA B\n"));
  CHECK(st.sessions == 4);
  CHECK(st.requests == 9);
  CHECK(st.avg_length == doctest::Approx(2.25));
  // lengths 3,3,1,2: population variance 0.6875
  CHECK(st.stdev_length == doctest::Approx(std::sqrt(0.6875)));
  CHECK(st.max_length == 3);
  CHECK(st.starting_pages == 2);
  CHECK(st.terminating_pages == 2);
  CHECK(st.distinct_pages == 3);
}
