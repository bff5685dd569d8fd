#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace minutes::costing {

enum class PriceUnit { PerThousandTokens, PerThousandChars };

// chars/4 heuristic: one token per four characters, rounded up.
inline int64_t estimate_tokens_from_chars(int64_t char_count) {
  if (char_count < 0) throw std::invalid_argument("negative char count");
  return (char_count + 3) / 4;
}

struct PricingTable {
  std::string provider_name;
  PriceUnit unit = PriceUnit::PerThousandTokens;
  double input_price = 0.0;   // currency per 1K units
  double output_price = 0.0;

  // Per-1K-token equivalent prices (character pricing converts at 4 chars/token).
  double input_per_1k_tokens() const {
    return unit == PriceUnit::PerThousandChars ? input_price * 4.0 : input_price;
  }
  double output_per_1k_tokens() const {
    return unit == PriceUnit::PerThousandChars ? output_price * 4.0 : output_price;
  }
};

struct CostEstimate {
  double input_cost = 0.0;
  double output_cost = 0.0;
  double total = 0.0;
};

inline CostEstimate estimate_cost(const PricingTable& p, int64_t input_tokens,
                                  int64_t output_tokens) {
  if (input_tokens < 0 || output_tokens < 0)
    throw std::invalid_argument("negative token count");
  CostEstimate e;
  e.input_cost = input_tokens / 1000.0 * p.input_per_1k_tokens();
  e.output_cost = output_tokens / 1000.0 * p.output_per_1k_tokens();
  e.total = e.input_cost + e.output_cost;
  return e;
}

// Ratio of mean per-1K-token prices of a over b.
inline double cost_ratio(const PricingTable& a, const PricingTable& b) {
  double mean_a = (a.input_per_1k_tokens() + a.output_per_1k_tokens()) / 2.0;
  double mean_b = (b.input_per_1k_tokens() + b.output_per_1k_tokens()) / 2.0;
  if (mean_b <= 0.0) throw std::invalid_argument("zero-priced denominator table");
  return mean_a / mean_b;
}

}  // namespace minutes::costing
