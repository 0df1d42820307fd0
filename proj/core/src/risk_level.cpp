#include "riskcls/risk_level.hpp"

#include <stdexcept>
#include <string>

#include "riskcls/errors.hpp"

namespace riskcls {

RiskLevel risk_level_at(std::size_t i) {
  if (i >= kNumRiskLevels) throw std::out_of_range("risk level index " + std::to_string(i));
  return kAllRiskLevels[i];
}

char risk_level_letter(RiskLevel level) noexcept {
  return static_cast<char>('a' + static_cast<int>(index_of(level)));
}

std::string_view risk_level_name(RiskLevel level) noexcept {
  switch (level) {
    case RiskLevel::A_NoRisk: return "no-risk";
    case RiskLevel::B_LowRisk: return "low-risk";
    case RiskLevel::C_MediumRisk: return "medium-risk";
    case RiskLevel::D_HighRisk: return "high-risk";
  }
  return "unknown";
}

RiskLevel parse_risk_level(std::string_view text) {
  if (text.size() == 1) {
    char c = text[0];
    if (c >= 'A' && c <= 'D') c = static_cast<char>(c - 'A' + 'a');
    if (c >= 'a' && c <= 'd') return kAllRiskLevels[static_cast<std::size_t>(c - 'a')];
  }
  throw ValidationError("invalid risk label '" + std::string(text) + "' (expected a, b, c or d)");
}

}  // namespace riskcls
