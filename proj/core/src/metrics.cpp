#include "riskcls/metrics.hpp"

#include "riskcls/errors.hpp"

namespace riskcls {

std::uint64_t ConfusionMatrix::total() const noexcept {
  std::uint64_t t = 0;
  for (const auto& row : counts) {
    for (auto v : row) t += v;
  }
  return t;
}

std::uint64_t ConfusionMatrix::row_sum(std::size_t gold) const noexcept {
  std::uint64_t t = 0;
  for (auto v : counts[gold]) t += v;
  return t;
}

std::uint64_t ConfusionMatrix::column_sum(std::size_t predicted) const noexcept {
  std::uint64_t t = 0;
  for (const auto& row : counts) t += row[predicted];
  return t;
}

ConfusionMatrix confusion_matrix(std::span<const RiskLevel> preds, std::span<const RiskLevel> golds) {
  if (preds.size() != golds.size()) {
    throw ValidationError("confusion_matrix: " + std::to_string(preds.size()) + " predictions vs " +
                          std::to_string(golds.size()) + " gold labels");
  }
  if (preds.empty()) throw ValidationError("confusion_matrix: no predictions");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < preds.size(); ++i) ++cm.counts[index_of(golds[i])][index_of(preds[i])];
  return cm;
}

std::array<ClassMetrics, kNumRiskLevels> per_class_prf(const ConfusionMatrix& cm) {
  std::array<ClassMetrics, kNumRiskLevels> out;
  for (std::size_t c = 0; c < kNumRiskLevels; ++c) {
    const auto tp = static_cast<double>(cm.counts[c][c]);
    const auto predicted = cm.column_sum(c);
    const auto gold = cm.row_sum(c);
    auto& m = out[c];
    m.label = risk_level_at(c);
    m.precision = predicted ? tp / static_cast<double>(predicted) : 0.0;
    m.recall = gold ? tp / static_cast<double>(gold) : 0.0;
    const double s = m.precision + m.recall;
    m.f1 = s > 0.0 ? 2.0 * m.precision * m.recall / s : 0.0;
  }
  return out;
}

MacroMetrics macro_from_class_metrics(std::span<const ClassMetrics> per_class) {
  MacroMetrics m;
  for (const auto& c : per_class) {
    m.macro_precision += c.precision;
    m.macro_recall += c.recall;
    m.macro_f1 += c.f1;
  }
  const double n = static_cast<double>(kNumRiskLevels);
  m.macro_precision /= n;
  m.macro_recall /= n;
  m.macro_f1 /= n;
  return m;
}

MacroMetrics macro_prf(const ConfusionMatrix& cm) {
  auto per_class = per_class_prf(cm);
  return macro_from_class_metrics(per_class);
}

RiskDistribution risk_distribution(std::span<const RiskLevel> preds) {
  if (preds.empty()) throw ValidationError("risk_distribution: no predictions");
  RiskDistribution d;
  for (auto p : preds) ++d.counts[index_of(p)];
  d.total = preds.size();
  for (std::size_t c = 0; c < kNumRiskLevels; ++c) {
    d.fractions[c] = static_cast<double>(d.counts[c]) / static_cast<double>(d.total);
  }
  d.no_risk = d.fractions[0];
  d.any_risk = static_cast<double>(d.total - d.counts[0]) / static_cast<double>(d.total);
  return d;
}

}  // namespace riskcls
