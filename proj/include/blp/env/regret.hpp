#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "blp/env/batch.hpp"

namespace blp {

enum class RegretForm { automatic, oracle, empirical };
std::optional<RegretForm> parse_regret_form(std::string_view s);

// Per-point regret against the Bayes-optimal accept/reject action. The oracle
// form needs rho* on every point; automatic uses it when present.
std::vector<double> step_regret(const Batch& batch, std::span<const int> decisions, OracleAccess,
                                RegretForm form = RegretForm::automatic);

double point_regret_oracle(double rho, int decision);
double point_regret_empirical(double y, int decision);

struct RegretTrace {
  std::vector<double> increments;  // one per step
  std::vector<double> cumulative;

  void add(std::span<const double> point_increments);
  double total() const { return cumulative.empty() ? 0.0 : cumulative.back(); }
};

struct DecisionTraceRow {
  std::size_t step = 0;
  std::size_t point_index = 0;
  int decision = 0;
  std::optional<double> revealed_label;
  double regret_increment = 0.0;

  friend bool operator==(const DecisionTraceRow&, const DecisionTraceRow&) = default;
};

void write_decision_trace_header(std::ostream& out);
void write_decision_trace(std::ostream& out, std::span<const DecisionTraceRow> rows);
std::vector<DecisionTraceRow> read_decision_trace(std::istream& in);

}  // namespace blp
