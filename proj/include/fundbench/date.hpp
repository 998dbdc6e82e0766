#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace fundbench {

using Date = std::chrono::year_month_day;

/// Parses a strict ISO-8601 calendar date (YYYY-MM-DD). Returns nullopt for
/// malformed text or an invalid calendar day.
std::optional<Date> parse_iso_date(std::string_view text);

std::string format_iso_date(Date date);

}  // namespace fundbench
