#include <fmt/format.h>

#include "riskcls/errors.hpp"
#include "riskcls/metrics.hpp"

namespace riskcls {

using nlohmann::json;

std::string format_prf(const ClassMetrics& m) {
  return fmt::format("{:.3f}/{:.3f}/{:.3f}", m.precision, m.recall, m.f1);
}

std::string format_prf(const MacroMetrics& m) {
  return fmt::format("{:.3f}/{:.3f}/{:.3f}", m.macro_precision, m.macro_recall, m.macro_f1);
}

json evaluation_report(const ConfusionMatrix& cm) {
  json report;
  report["kind"] = "evaluation";
  report["schema_version"] = kReportSchemaVersion;
  report["labels"] = {"a", "b", "c", "d"};
  json rows = json::array();
  for (const auto& row : cm.counts) rows.push_back(row);
  report["confusion_matrix"] = {{"rows", "gold"}, {"columns", "predicted"}, {"counts", rows}};

  const auto per_class = per_class_prf(cm);
  json classes = json::array();
  for (const auto& m : per_class) {
    classes.push_back({{"label", std::string(1, risk_level_letter(m.label))},
                       {"name", std::string(risk_level_name(m.label))},
                       {"precision", m.precision},
                       {"recall", m.recall},
                       {"f1", m.f1},
                       {"prf", format_prf(m)}});
  }
  report["per_class"] = std::move(classes);
  const auto macro = macro_from_class_metrics(per_class);
  report["macro"] = {{"precision", macro.macro_precision},
                     {"recall", macro.macro_recall},
                     {"f1", macro.macro_f1},
                     {"prf", format_prf(macro)}};
  report["total"] = cm.total();
  return report;
}

json assessment_report(const RiskDistribution& dist) {
  json report;
  report["kind"] = "assessment";
  report["schema_version"] = kReportSchemaVersion;
  report["total"] = dist.total;
  json classes = json::array();
  for (std::size_t c = 0; c < kNumRiskLevels; ++c) {
    const auto level = risk_level_at(c);
    classes.push_back({{"label", std::string(1, risk_level_letter(level))},
                       {"name", std::string(risk_level_name(level))},
                       {"count", dist.counts[c]},
                       {"fraction", dist.fractions[c]}});
  }
  report["distribution"] = std::move(classes);
  report["binary"] = {{"no_risk", dist.no_risk}, {"any_risk", dist.any_risk}};
  return report;
}

std::string render_report_text(const json& report) {
  const auto kind = report.value("kind", std::string{});
  std::string out;
  if (kind == "evaluation") {
    out += "Confusion matrix (rows = gold, columns = predicted)\n";
    out += fmt::format("{:>6}{:>7}{:>7}{:>7}{:>7}\n", "", "a", "b", "c", "d");
    const auto& counts = report.at("confusion_matrix").at("counts");
    for (std::size_t g = 0; g < kNumRiskLevels; ++g) {
      out += fmt::format("{:>6}", std::string(1, static_cast<char>('a' + g)));
      for (std::size_t p = 0; p < kNumRiskLevels; ++p) out += fmt::format("{:>7}", counts[g][p].get<std::uint64_t>());
      out += '\n';
    }
    out += "\nClass   P/R/F1\n";
    for (const auto& c : report.at("per_class")) {
      out += fmt::format("{:<7} {}\n", c.at("label").get<std::string>(), c.at("prf").get<std::string>());
    }
    out += fmt::format("{:<7} {}\n", "macro", report.at("macro").at("prf").get<std::string>());
  } else if (kind == "assessment") {
    out += fmt::format("Risk distribution over {} users\n", report.at("total").get<std::uint64_t>());
    for (const auto& c : report.at("distribution")) {
      out += fmt::format("{:<2} {:<12} {:>6} {:>8.2f}%\n", c.at("label").get<std::string>(),
                         c.at("name").get<std::string>(), c.at("count").get<std::uint64_t>(),
                         100.0 * c.at("fraction").get<double>());
    }
    out += fmt::format("no-risk  {:.2f}%\nany-risk {:.2f}%\n", 100.0 * report.at("binary").at("no_risk").get<double>(),
                       100.0 * report.at("binary").at("any_risk").get<double>());
  } else {
    throw ValidationError("unknown report kind '" + kind + "'");
  }
  return out;
}

}  // namespace riskcls
