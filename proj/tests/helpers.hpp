#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "trendlab/date.hpp"
#include "trendlab/marketdata.hpp"

namespace testutil {

inline std::vector<trendlab::Date> business_days(std::size_t n, const char* start = "2014-01-02") {
  std::vector<trendlab::Date> out;
  trendlab::Date d = trendlab::parse_date(start);
  if (!trendlab::is_weekday(d)) d = trendlab::next_business_day(d);
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(d);
    d = trendlab::next_business_day(d);
  }
  return out;
}

inline trendlab::OhlcvSeries closes(std::vector<double> c, const char* start = "2014-01-02") {
  auto dates = business_days(c.size(), start);
  return trendlab::OhlcvSeries::from_closes(std::move(dates), std::move(c));
}

// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("trendlab_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace testutil
