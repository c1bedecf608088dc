#include "blp/env/regret.hpp"

#include <algorithm>
#include <istream>
#include <ostream>

#include "blp/csv.hpp"
#include "blp/errors.hpp"

namespace blp {

std::optional<RegretForm> parse_regret_form(std::string_view s) {
  if (s == "auto" || s == "automatic") return RegretForm::automatic;
  if (s == "oracle") return RegretForm::oracle;
  if (s == "empirical") return RegretForm::empirical;
  return std::nullopt;
}

double point_regret_oracle(double rho, int decision) {
  const double margin = 2.0 * rho - 1.0;
  return std::max(0.0, margin) - decision * margin;
}

double point_regret_empirical(double y, int decision) {
  return (y == 1.0) != (decision == 1) ? 1.0 : 0.0;
}

std::vector<double> step_regret(const Batch& batch, std::span<const int> decisions,
                                OracleAccess access, RegretForm form) {
  if (decisions.size() != batch.size()) throw ShapeError("step_regret: decisions length");
  std::vector<double> out(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const LabeledPoint& p = batch.points[i];
    const auto rho = p.oracle_prob(access);
    const bool use_oracle = form == RegretForm::oracle || (form == RegretForm::automatic && rho);
    if (use_oracle) {
      if (!rho) throw PreconditionError("oracle regret requested on a point without rho*");
      out[i] = point_regret_oracle(*rho, decisions[i]);
    } else {
      out[i] = point_regret_empirical(p.true_label(access), decisions[i]);
    }
  }
  return out;
}

void RegretTrace::add(std::span<const double> point_increments) {
  double step = 0.0;
  for (double v : point_increments) step += v;
  increments.push_back(step);
  cumulative.push_back((cumulative.empty() ? 0.0 : cumulative.back()) + step);
}

namespace {
const std::vector<std::string> kTraceHeader = {"step", "point_index", "decision", "revealed_label",
                                               "regret_increment"};
}

void write_decision_trace_header(std::ostream& out) { csv::write_row(out, kTraceHeader); }

void write_decision_trace(std::ostream& out, std::span<const DecisionTraceRow> rows) {
  for (const auto& r : rows)
    csv::write_row(out, {std::to_string(r.step), std::to_string(r.point_index),
                         std::to_string(r.decision),
                         r.revealed_label ? csv::format_double(*r.revealed_label) : "",
                         csv::format_double(r.regret_increment)});
}

std::vector<DecisionTraceRow> read_decision_trace(std::istream& in) {
  csv::Table t = csv::read_table(in);
  const std::size_t c_step = t.column("step"), c_point = t.column("point_index"),
                    c_dec = t.column("decision"), c_lab = t.column("revealed_label"),
                    c_reg = t.column("regret_increment");
  std::vector<DecisionTraceRow> rows;
  rows.reserve(t.rows.size());
  for (const auto& r : t.rows) {
    DecisionTraceRow row;
    row.step = std::stoul(r[c_step]);
    row.point_index = std::stoul(r[c_point]);
    row.decision = std::stoi(r[c_dec]);
    if (!r[c_lab].empty()) row.revealed_label = csv::parse_double(r[c_lab]);
    row.regret_increment = csv::parse_double(r[c_reg]);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace blp
