#include "trendlab/marketdata.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <optional>
#include <ostream>

#include "trendlab/error.hpp"
#include "trendlab/text.hpp"

namespace trendlab {

PriceField parse_price_field(std::string_view name) {
  if (name == "close") return PriceField::close;
  if (name == "adj_close") return PriceField::adj_close;
  throw InputError("unknown price field '" + std::string(name) + "'");
}

std::string_view to_string(PriceField field) {
  return field == PriceField::close ? "close" : "adj_close";
}

OhlcvSeries::OhlcvSeries(std::vector<Date> dates, std::vector<double> open, std::vector<double> high,
                         std::vector<double> low, std::vector<double> close,
                         std::vector<double> adj_close, std::vector<double> volume)
    : dates_(std::move(dates)),
      open_(std::move(open)),
      high_(std::move(high)),
      low_(std::move(low)),
      close_(std::move(close)),
      adj_close_(std::move(adj_close)),
      volume_(std::move(volume)) {
  const std::size_t n = dates_.size();
  if (open_.size() != n || high_.size() != n || low_.size() != n || close_.size() != n ||
      adj_close_.size() != n || volume_.size() != n) {
    throw IntegrityError("OHLCV columns have different lengths");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0 && !(dates_[i - 1] < dates_[i])) {
      throw IntegrityError("dates not strictly increasing at " + format_date(dates_[i]));
    }
    const double prices[] = {open_[i], high_[i], low_[i], close_[i], adj_close_[i]};
    for (double p : prices) {
      if (!std::isfinite(p) || p <= 0.0) {
        throw IntegrityError("non-positive or non-finite price on " + format_date(dates_[i]));
      }
    }
    if (!std::isfinite(volume_[i]) || volume_[i] < 0.0) {
      throw IntegrityError("negative volume on " + format_date(dates_[i]));
    }
    if (high_[i] < std::max(open_[i], close_[i]) || low_[i] > std::min(open_[i], close_[i])) {
      throw IntegrityError("high/low range violated on " + format_date(dates_[i]));
    }
  }
}

OhlcvSeries OhlcvSeries::from_closes(std::vector<Date> dates, std::vector<double> close) {
  std::vector<double> volume(close.size(), 0.0);
  return OhlcvSeries(std::move(dates), close, close, close, close, close, std::move(volume));
}

const std::vector<double>& OhlcvSeries::prices(PriceField field) const {
  return field == PriceField::close ? close_ : adj_close_;
}

OhlcvSeries OhlcvSeries::slice(std::size_t begin, std::size_t end) const {
  if (begin > end || end > size()) throw RangeError("slice out of range");
  const auto cut = [&](const auto& v) {
    return std::vector(v.begin() + static_cast<std::ptrdiff_t>(begin),
                       v.begin() + static_cast<std::ptrdiff_t>(end));
  };
  OhlcvSeries out;
  out.dates_ = cut(dates_);
  out.open_ = cut(open_);
  out.high_ = cut(high_);
  out.low_ = cut(low_);
  out.close_ = cut(close_);
  out.adj_close_ = cut(adj_close_);
  out.volume_ = cut(volume_);
  return out;
}

std::size_t OhlcvSeries::last_index_on_or_before(const Date& date) const {
  auto it = std::upper_bound(dates_.begin(), dates_.end(), date);
  if (it == dates_.begin()) return size();
  return static_cast<std::size_t>(it - dates_.begin()) - 1;
}

AlignedFeatures AlignedFeatures::slice(std::size_t begin, std::size_t end) const {
  if (begin > end || end > rows()) throw RangeError("feature slice out of range");
  AlignedFeatures out;
  out.dates.assign(dates.begin() + static_cast<std::ptrdiff_t>(begin),
                   dates.begin() + static_cast<std::ptrdiff_t>(end));
  out.names = names;
  out.values = values.middleRows(static_cast<Eigen::Index>(begin),
                                 static_cast<Eigen::Index>(end - begin));
  return out;
}

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

struct Row {
  Date date;
  std::array<double, 6> values;  // open high low close adj volume
  std::size_t line;
};

}  // namespace

OhlcvSeries parse_ohlcv_csv(std::istream& in) {
  static constexpr std::array<std::string_view, 7> kColumns = {
      "date", "open", "high", "low", "close", "adj close", "volume"};

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) break;
  }
  if (trim(line).empty()) throw SchemaError("missing header row");
  std::string_view header = line;
  if (header.starts_with("\xEF\xBB\xBF")) header.remove_prefix(3);

  std::array<std::optional<std::size_t>, 7> index;
  const auto names = split_csv_line(header);
  for (std::size_t c = 0; c < names.size(); ++c) {
    std::string name = lower(names[c]);
    if (name == "adj_close" || name == "adjclose") name = "adj close";
    for (std::size_t k = 0; k < kColumns.size(); ++k) {
      if (name == kColumns[k]) {
        if (index[k]) throw SchemaError("duplicate column '" + std::string(names[c]) + "'");
        index[k] = c;
      }
    }
  }
  for (std::size_t k = 0; k < kColumns.size(); ++k) {
    if (!index[k]) throw SchemaError("missing column '" + std::string(kColumns[k]) + "'");
  }

  std::vector<Row> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != names.size()) {
      throw RowError(line_no, "expected " + std::to_string(names.size()) + " fields, got " +
                                  std::to_string(fields.size()));
    }
    Row row{};
    row.line = line_no;
    try {
      row.date = parse_date(fields[*index[0]]);
    } catch (const InputError& e) {
      throw RowError(line_no, e.what());
    }
    for (std::size_t k = 1; k < kColumns.size(); ++k) {
      const auto field = fields[*index[k]];
      const auto value = parse_double(field);
      if (!value || !std::isfinite(*value)) {
        throw RowError(line_no, "unparsable " + std::string(kColumns[k]) + " '" +
                                    std::string(field) + "'");
      }
      row.values[k - 1] = *value;
    }
    rows.push_back(row);
  }

  std::stable_sort(rows.begin(), rows.end(),
                   [](const Row& a, const Row& b) { return a.date < b.date; });
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (!(rows[i - 1].date < rows[i].date)) {
      throw IntegrityError("duplicate date " + format_date(rows[i].date) + " (lines " +
                           std::to_string(rows[i - 1].line) + " and " +
                           std::to_string(rows[i].line) + ")");
    }
  }

  std::vector<Date> dates;
  std::array<std::vector<double>, 6> cols;
  for (const auto& r : rows) {
    dates.push_back(r.date);
    for (std::size_t k = 0; k < 6; ++k) cols[k].push_back(r.values[k]);
  }
  return OhlcvSeries(std::move(dates), std::move(cols[0]), std::move(cols[1]),
                     std::move(cols[2]), std::move(cols[3]), std::move(cols[4]),
                     std::move(cols[5]));
}

OhlcvSeries read_ohlcv_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  return parse_ohlcv_csv(in);
}

void write_ohlcv_csv(std::ostream& out, const OhlcvSeries& s) {
  out << "Date,Open,High,Low,Close,Adj Close,Volume\n";
  for (std::size_t i = 0; i < s.size(); ++i) {
    out << format_date(s.dates()[i]) << ',' << format_double(s.open()[i]) << ','
        << format_double(s.high()[i]) << ',' << format_double(s.low()[i]) << ','
        << format_double(s.close()[i]) << ',' << format_double(s.adj_close()[i]) << ','
        << format_double(s.volume()[i]) << '\n';
  }
}

void write_ohlcv_csv(const std::filesystem::path& path, const OhlcvSeries& series) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  write_ohlcv_csv(out, series);
}

std::vector<WindowSample> sliding_windows(const OhlcvSeries& series, const AlignedFeatures& features,
                                          const WindowConfig& cfg) {
  if (cfg.input_len < 1 || cfg.horizon < 1 || cfg.stride < 1) {
    throw InputError("window lengths and stride must be >= 1");
  }
  if (features.dates != series.dates() ||
      features.values.rows() != static_cast<Eigen::Index>(series.size())) {
    throw AlignmentError("features are not aligned to the series dates");
  }
  std::vector<WindowSample> out;
  const std::size_t n = series.size();
  if (n < cfg.input_len + cfg.horizon) return out;

  const auto& prices = series.prices(cfg.target);
  for (std::size_t start = 0; start + cfg.input_len + cfg.horizon <= n; start += cfg.stride) {
    WindowSample w;
    w.inputs = features.values.middleRows(static_cast<Eigen::Index>(start),
                                          static_cast<Eigen::Index>(cfg.input_len));
    if (!w.inputs.allFinite()) {
      throw InputError("window starting at " + format_date(series.dates()[start]) +
                       " contains missing feature values");
    }
    w.anchor_index = start + cfg.input_len - 1;
    w.anchor_date = series.dates()[w.anchor_index];
    w.targets.resize(static_cast<Eigen::Index>(cfg.horizon));
    for (std::size_t h = 0; h < cfg.horizon; ++h) {
      w.targets[static_cast<Eigen::Index>(h)] = prices[w.anchor_index + 1 + h];
    }
    out.push_back(std::move(w));
  }
  return out;
}

std::pair<OhlcvSeries, OhlcvSeries> split_by_date(const OhlcvSeries& series, const Date& cutoff) {
  if (series.empty() || cutoff < series.dates().front() || series.dates().back() < cutoff) {
    throw RangeError("cutoff " + format_date(cutoff) + " outside the series date range");
  }
  const std::size_t last = series.last_index_on_or_before(cutoff);
  return {series.slice(0, last + 1), series.slice(last + 1, series.size())};
}

}  // namespace trendlab
