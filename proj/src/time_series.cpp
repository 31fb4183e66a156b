#include "radf/time_series.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace radf {

void TimeSeries::validate() const {
  if (timestamps.size() != values.size())
    throw InvalidSeries("timestamp/value length mismatch");
  for (std::size_t i = 1; i < timestamps.size(); ++i)
    if (timestamps[i] <= timestamps[i - 1])
      throw InvalidSeries("timestamps not strictly increasing");
  for (double v : values)
    if (!std::isfinite(v)) throw InvalidSeries("non-finite value");
}

bool MetricKey::operator<(const MetricKey& other) const {
  if (metric != other.metric) return metric < other.metric;
  return dimensions < other.dimensions;
}

std::string MetricKey::to_string() const {
  if (dimensions.empty()) return metric;
  std::ostringstream out;
  out << metric << '[';
  for (std::size_t i = 0; i < dimensions.size(); ++i) {
    if (i) out << ',';
    out << dimensions[i].first << '=' << dimensions[i].second;
  }
  out << ']';
  return out.str();
}

MetricKey MetricKey::parse(const std::string& text) {
  MetricKey key;
  auto open = text.find('[');
  if (open == std::string::npos) {
    key.metric = text;
    return key;
  }
  if (text.back() != ']') throw ParseError("malformed metric key: " + text);
  key.metric = text.substr(0, open);
  std::string body = text.substr(open + 1, text.size() - open - 2);
  std::istringstream in(body);
  std::string item;
  while (std::getline(in, item, ',')) {
    auto eq = item.find('=');
    if (eq == std::string::npos) throw ParseError("malformed dimension: " + item);
    key.dimensions.emplace_back(item.substr(0, eq), item.substr(eq + 1));
  }
  if (key.metric.empty()) throw ParseError("empty metric name");
  return key;
}

const char* to_string(SeriesClass c) {
  switch (c) {
    case SeriesClass::Stable: return "Stable";
    case SeriesClass::Unstable: return "Unstable";
    case SeriesClass::Trend: return "Trend";
  }
  return "?";
}

std::pair<TimeSeries, TimeSeries> align(const TimeSeries& a, const TimeSeries& b) {
  TimeSeries ra, rb;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a.timestamps[i] < b.timestamps[j]) {
      ++i;
    } else if (a.timestamps[i] > b.timestamps[j]) {
      ++j;
    } else {
      ra.timestamps.push_back(a.timestamps[i]);
      ra.values.push_back(a.values[i]);
      rb.timestamps.push_back(b.timestamps[j]);
      rb.values.push_back(b.values[j]);
      ++i;
      ++j;
    }
  }
  if (ra.empty()) throw EmptyIntersection();
  return {std::move(ra), std::move(rb)};
}

TimeSeries slice_window(const TimeSeries& s, std::size_t start_index, std::size_t len) {
  if (start_index + len > s.size()) throw OutOfBounds();
  TimeSeries out;
  out.timestamps.assign(s.timestamps.begin() + start_index,
                        s.timestamps.begin() + start_index + len);
  out.values.assign(s.values.begin() + start_index, s.values.begin() + start_index + len);
  return out;
}

}  // namespace radf
