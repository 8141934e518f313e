#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "trendlab/date.hpp"

namespace trendlab {

enum class PriceField { close, adj_close };

PriceField parse_price_field(std::string_view name);
std::string_view to_string(PriceField field);

// Daily OHLCV bars. Rows are strictly increasing in date and every row
// satisfies low <= min(open, close) <= max(open, close) <= high.
class OhlcvSeries {
 public:
  OhlcvSeries() = default;
  OhlcvSeries(std::vector<Date> dates, std::vector<double> open, std::vector<double> high,
              std::vector<double> low, std::vector<double> close, std::vector<double> adj_close,
              std::vector<double> volume);

  // Series carrying only closes; open/high/low/adj-close mirror the close and volume is 0.
  static OhlcvSeries from_closes(std::vector<Date> dates, std::vector<double> close);

  std::size_t size() const { return dates_.size(); }
  bool empty() const { return dates_.empty(); }

  const std::vector<Date>& dates() const { return dates_; }
  const std::vector<double>& open() const { return open_; }
  const std::vector<double>& high() const { return high_; }
  const std::vector<double>& low() const { return low_; }
  const std::vector<double>& close() const { return close_; }
  const std::vector<double>& adj_close() const { return adj_close_; }
  const std::vector<double>& volume() const { return volume_; }
  const std::vector<double>& prices(PriceField field) const;

  // Rows [begin, end).
  OhlcvSeries slice(std::size_t begin, std::size_t end) const;
  // Index of the last row dated <= `date`, or size() if none.
  std::size_t last_index_on_or_before(const Date& date) const;

  friend bool operator==(const OhlcvSeries&, const OhlcvSeries&) = default;

 private:
  std::vector<Date> dates_;
  std::vector<double> open_, high_, low_, close_, adj_close_, volume_;
};

// Date-aligned numeric columns; rows follow `dates`.
struct AlignedFeatures {
  std::vector<Date> dates;
  std::vector<std::string> names;
  Eigen::MatrixXd values;

  std::size_t rows() const { return dates.size(); }
  AlignedFeatures slice(std::size_t begin, std::size_t end) const;
};

struct WindowSample {
  Eigen::MatrixXd inputs;   // input_len x n_features
  Eigen::VectorXd targets;  // horizon future prices
  Date anchor_date;         // date of the last input row
  std::size_t anchor_index = 0;
};

struct WindowConfig {
  std::size_t input_len = 30;
  std::size_t horizon = 7;
  std::size_t stride = 1;
  PriceField target = PriceField::close;
};

// Reads the standard OHLCV export layout: header with Date, Open, High, Low,
// Close, Adj Close, Volume in any order (case-insensitive). Extra columns are
// ignored. Rows are sorted by date before validation.
OhlcvSeries parse_ohlcv_csv(std::istream& in);
OhlcvSeries read_ohlcv_csv(const std::filesystem::path& path);
void write_ohlcv_csv(std::ostream& out, const OhlcvSeries& series);
void write_ohlcv_csv(const std::filesystem::path& path, const OhlcvSeries& series);

// One sample per anchor; count = max(0, floor((n - input_len - horizon) / stride) + 1).
std::vector<WindowSample> sliding_windows(const OhlcvSeries& series, const AlignedFeatures& features,
                                          const WindowConfig& cfg = {});

// (rows dated <= cutoff, rows dated > cutoff).
std::pair<OhlcvSeries, OhlcvSeries> split_by_date(const OhlcvSeries& series, const Date& cutoff);

}  // namespace trendlab
