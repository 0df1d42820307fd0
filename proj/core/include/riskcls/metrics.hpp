#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "riskcls/risk_level.hpp"

namespace riskcls {

// counts[gold][predicted]
struct ConfusionMatrix {
  std::array<std::array<std::uint64_t, kNumRiskLevels>, kNumRiskLevels> counts{};

  std::uint64_t total() const noexcept;
  std::uint64_t row_sum(std::size_t gold) const noexcept;
  std::uint64_t column_sum(std::size_t predicted) const noexcept;
  bool operator==(const ConfusionMatrix&) const = default;
};

struct ClassMetrics {
  RiskLevel label = RiskLevel::A_NoRisk;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct MacroMetrics {
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;
};

// Throws ValidationError on a length mismatch or empty input.
ConfusionMatrix confusion_matrix(std::span<const RiskLevel> preds, std::span<const RiskLevel> golds);

// Zero denominators give 0 for the affected metric; f1 = 2PR/(P+R), or 0
// when P + R = 0.
std::array<ClassMetrics, kNumRiskLevels> per_class_prf(const ConfusionMatrix& cm);

// Unweighted mean over all four classes, empty classes included.
MacroMetrics macro_prf(const ConfusionMatrix& cm);
MacroMetrics macro_from_class_metrics(std::span<const ClassMetrics> per_class);

struct RiskDistribution {
  std::array<std::uint64_t, kNumRiskLevels> counts{};
  std::array<double, kNumRiskLevels> fractions{};
  std::uint64_t total = 0;
  double no_risk = 0.0;   // fraction predicted a
  double any_risk = 0.0;  // fraction predicted b, c or d
};

// Throws ValidationError on empty input.
RiskDistribution risk_distribution(std::span<const RiskLevel> preds);

// ---------------------------------------------------------------------------
// Reports

inline constexpr int kReportSchemaVersion = 1;

// "0.742/0.719/0.730"
std::string format_prf(const ClassMetrics& m);
std::string format_prf(const MacroMetrics& m);

nlohmann::json evaluation_report(const ConfusionMatrix& cm);
nlohmann::json assessment_report(const RiskDistribution& dist);

// Plain-text rendering of either report kind for terminals.
std::string render_report_text(const nlohmann::json& report);

}  // namespace riskcls
