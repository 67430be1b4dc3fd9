#pragma once

#include <array>
#include <string_view>

namespace sgca {

// PHQ-8 items in reporting order.
inline constexpr std::array<std::string_view, 8> kSymptomNames = {
    "no_interest", "depressed",     "sleep",       "tired",
    "appetite",    "failure",       "concentration", "psychomotor"};

inline constexpr std::size_t kNumSymptoms = 8;
inline constexpr int kMaxSymptomScore = 3;
inline constexpr int kMaxTotalScore = 24;

}  // namespace sgca
