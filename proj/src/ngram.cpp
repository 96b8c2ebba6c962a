#include "hpg/ngram.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hpg/error.hpp"
#include "model_editor.hpp"

namespace hpg {

NGramModel build_ngram(const SessionLog& log, int order, double alpha) {
  if (order < 2) throw ParameterError("N-gram order must be at least 2");
  const auto width = static_cast<std::size_t>(order - 1);

  PageDictionary histories;
  detail::TransitionCounts counts;
  NGramModel result;
  result.order = order;

  std::size_t longest = 0;
  auto bump = [](std::vector<std::uint64_t>& v, std::uint32_t i, std::uint64_t by) {
    if (v.size() <= i) v.resize(i + 1, 0);
    v[i] += by;
  };

  for (const auto& s : log.entries) {
    longest = std::max(longest, s.pages.size());
    if (s.pages.size() < width) {
      result.dropped_sessions += s.count;
      continue;
    }
    result.retained_sessions += s.count;
    std::uint32_t prev = 0;
    for (std::size_t t = 0; t + width <= s.pages.size(); ++t) {
      std::string key;
      for (std::size_t k = 0; k < width; ++k) {
        if (k) key += kHistorySeparator;
        key += log.pages.name(s.pages[t + k]);
      }
      const std::uint32_t h = to_index(histories.intern(key));
      bump(counts.visits, h, s.count);
      if (t == 0) {
        bump(counts.starts, h, s.count);
      } else {
        counts.links[{prev, h}] += s.count;
      }
      prev = h;
    }
    bump(counts.finals, prev, s.count);
  }
  if (result.retained_sessions == 0)
    throw EmptyModelError("every session is shorter than " + std::to_string(width) + " pages (N = " +
                          std::to_string(order) + ", longest session has " + std::to_string(longest) + ")");

  counts.sessions = result.retained_sessions;
  const std::size_t n = histories.size();
  counts.visits.resize(n, 0);
  counts.starts.resize(n, 0);
  counts.finals.resize(n, 0);
  result.model = detail::build_from_counts(std::move(histories), counts, alpha, order);
  return result;
}

DropStats dropped_sessions(const SessionLog& log, int order) {
  if (order < 2) throw ParameterError("N-gram order must be at least 2");
  DropStats st;
  std::uint64_t total = 0;
  for (const auto& s : log.entries) {
    total += s.count;
    if (s.pages.size() < static_cast<std::size_t>(order - 1)) st.count += s.count;
  }
  st.fraction = total == 0 ? 0.0 : static_cast<double>(st.count) / static_cast<double>(total);
  return st;
}

double zeta(double s) {
  if (!(s > 1.0)) throw ParameterError("zeta(s) requires s > 1");
  // Sum the first M-1 terms exactly, then add the Euler-Maclaurin remainder
  // at M: M^(1-s)/(s-1) + M^-s/2 + s M^(-s-1)/12 - s(s+1)(s+2) M^(-s-3)/720.
  // With M = 1000 the next correction term is below 1e-20.
  constexpr int M = 1000;
  double sum = 0.0;
  for (int k = M - 1; k >= 1; --k) sum += std::pow(static_cast<double>(k), -s);
  const double m = M;
  sum += std::pow(m, 1.0 - s) / (s - 1.0) + 0.5 * std::pow(m, -s) + s * std::pow(m, -s - 1.0) / 12.0 -
         s * (s + 1.0) * (s + 2.0) * std::pow(m, -s - 3.0) / 720.0;
  return sum;
}

double theoretical_drop_fraction(int order) {
  if (order < 2) throw ParameterError("N-gram order must be at least 2");
  double mass = 0.0;
  for (int length = 1; length <= order - 2; ++length) mass += std::pow(static_cast<double>(length), -1.5);
  return mass / zeta(1.5);
}

}  // namespace hpg
