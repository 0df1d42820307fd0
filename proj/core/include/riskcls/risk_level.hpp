#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string_view>

namespace riskcls {

// The four ordered user-level risk categories a < b < c < d.
enum class RiskLevel : std::uint8_t {
  A_NoRisk = 0,
  B_LowRisk = 1,
  C_MediumRisk = 2,
  D_HighRisk = 3,
};

inline constexpr std::size_t kNumRiskLevels = 4;

inline constexpr std::array<RiskLevel, kNumRiskLevels> kAllRiskLevels = {
    RiskLevel::A_NoRisk, RiskLevel::B_LowRisk, RiskLevel::C_MediumRisk, RiskLevel::D_HighRisk};

constexpr std::size_t index_of(RiskLevel level) noexcept { return static_cast<std::size_t>(level); }

// Throws std::out_of_range for i >= 4.
RiskLevel risk_level_at(std::size_t i);

// "a".."d"
char risk_level_letter(RiskLevel level) noexcept;
std::string_view risk_level_name(RiskLevel level) noexcept;

// Accepts "a".."d" (case-insensitive). Throws ValidationError otherwise.
RiskLevel parse_risk_level(std::string_view text);

}  // namespace riskcls
