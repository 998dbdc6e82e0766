#pragma once

// Minimal RFC 4180 style CSV helpers. Quoted fields may contain commas and
// doubled quotes; embedded newlines are not supported.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fundbench::csv {

/// Splits one line into fields. Returns nullopt on an unterminated quote or
/// stray characters after a closing quote.
std::optional<std::vector<std::string>> split_line(std::string_view line);

/// Quotes a field when it contains a comma, quote, or leading/trailing space.
std::string escape(std::string_view field);

std::string join(const std::vector<std::string>& fields);

/// Shortest decimal text that parses back to exactly `value`.
std::string format_number(double value);

/// Strict decimal parse: the whole of `text` must be consumed.
std::optional<double> parse_number(std::string_view text);

std::string_view trim(std::string_view text);

}  // namespace fundbench::csv
