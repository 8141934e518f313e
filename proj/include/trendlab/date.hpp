#pragma once

#include <chrono>
#include <string>
#include <string_view>

namespace trendlab {

using Date = std::chrono::year_month_day;

// Parses an ISO-8601 calendar date (YYYY-MM-DD). Throws InputError.
Date parse_date(std::string_view text);
std::string format_date(const Date& date);

Date add_days(const Date& date, int days);
bool is_weekday(const Date& date);
// First weekday strictly after `date`.
Date next_business_day(const Date& date);

}  // namespace trendlab
