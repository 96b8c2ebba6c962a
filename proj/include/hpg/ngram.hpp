#pragma once

#include <cstdint>

#include "hpg/model.hpp"
#include "hpg/session_store.hpp"

namespace hpg {

/// Fixed-order N-gram model. Its states are windows of N-1 consecutive pages,
/// stored as an HpgModel whose page dictionary holds the joined histories
/// ("A1|A2"). For N = 2 the model coincides with build_first_order.
struct NGramModel {
  int order = 2;
  HpgModel model;
  std::uint64_t retained_sessions = 0;
  std::uint64_t dropped_sessions = 0;
};

/// Sessions shorter than N-1 pages are dropped. Throws ParameterError for
/// N < 2 and EmptyModelError when every session is dropped.
NGramModel build_ngram(const SessionLog& log, int order, double alpha);

struct DropStats {
  std::uint64_t count = 0;
  double fraction = 0.0;
};

/// Weighted number and share of sessions an N-gram model cannot use.
DropStats dropped_sessions(const SessionLog& log, int order);

/// Riemann zeta for s > 1 by direct summation with an Euler-Maclaurin tail.
double zeta(double s);

/// Share of sessions shorter than N-1 when lengths follow P(L) = L^-1.5 / zeta(1.5).
double theoretical_drop_fraction(int order);

/// Joined-history token used for N-gram states.
inline constexpr char kHistorySeparator = '|';

}  // namespace hpg
