#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace equiride {

using Timestamp = std::chrono::sys_seconds;

// Accepts "MM/DD/YYYY HH:MM:SS AM|PM" (trip portal export) and
// "YYYY-MM-DDTHH:MM:SS[.fff]" (API export).
std::optional<Timestamp> parse_timestamp(std::string_view s);

// "MM/DD/YYYY HH:MM:SS AM|PM".
std::string format_timestamp(Timestamp t);

// "YYYY-MM-DD", midnight.
std::optional<Timestamp> parse_date(std::string_view s);

int hour_of_day(Timestamp t);

}  // namespace equiride
