#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helpers.hpp"
#include "radf/detectors.hpp"
#include "radf/time_series.hpp"

using namespace radf;
using fixtures::ts_of;

TEST_CASE("TimeSeries::validate enforces the type invariants") {
  TimeSeries ok = ts_of({1.0, 2.0, 3.0});
  CHECK_NOTHROW(ok.validate());

  TimeSeries mismatched = ok;
  mismatched.values.pop_back();
  CHECK_THROWS_AS(mismatched.validate(), InvalidSeries);

  TimeSeries unsorted = ok;
  std::swap(unsorted.timestamps[0], unsorted.timestamps[1]);
  CHECK_THROWS_AS(unsorted.validate(), InvalidSeries);

  TimeSeries duplicated = ok;
  duplicated.timestamps[1] = duplicated.timestamps[0];
  CHECK_THROWS_AS(duplicated.validate(), InvalidSeries);

  TimeSeries nonfinite = ok;
  nonfinite.values[2] = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(nonfinite.validate(), InvalidSeries);

  CHECK_NOTHROW(TimeSeries{}.validate());
}

TEST_CASE("MetricKey round-trips through to_string/parse") {
  MetricKey plain{"cpu", {}};
  CHECK(plain.to_string() == "cpu");
  CHECK(MetricKey::parse("cpu") == plain);

  MetricKey keyed{"web_traffic", {{"country", "USA"}, {"tier", "gold"}}};
  CHECK(keyed.to_string() == "web_traffic[country=USA,tier=gold]");
  CHECK(MetricKey::parse(keyed.to_string()) == keyed);

  CHECK_THROWS_AS(MetricKey::parse("m[country]"), ParseError);
  CHECK_THROWS_AS(MetricKey::parse("[a=b]"), ParseError);
}

TEST_CASE("MetricKey ordering is total and consistent with equality") {
  MetricKey a{"a", {}};
  MetricKey b{"a", {{"k", "1"}}};
  MetricKey c{"a", {{"k", "2"}}};
  MetricKey d{"b", {}};
  CHECK(a < b);
  CHECK(b < c);
  CHECK(c < d);
  CHECK_FALSE(b < b);
}

TEST_CASE("align keeps exactly the shared timestamps, in order") {
  TimeSeries a, b;
  a.timestamps = {0, 10, 20, 30, 40};
  a.values = {1, 2, 3, 4, 5};
  b.timestamps = {10, 15, 30, 50};
  b.values = {20, 21, 23, 25};
  auto [ra, rb] = align(a, b);
  CHECK(ra.timestamps == std::vector<std::int64_t>{10, 30});
  CHECK(ra.values == std::vector<double>{2, 4});
  CHECK(rb.values == std::vector<double>{20, 23});

  TimeSeries disjoint;
  disjoint.timestamps = {100};
  disjoint.values = {0.0};
  CHECK_THROWS_AS(align(a, disjoint), EmptyIntersection);
}

TEST_CASE("slice_window bounds checking") {
  TimeSeries s = ts_of({1, 2, 3, 4});
  TimeSeries w = slice_window(s, 1, 2);
  CHECK(w.values == std::vector<double>{2, 3});
  CHECK(w.timestamps[0] == s.timestamps[1]);
  CHECK_THROWS_AS(slice_window(s, 3, 2), OutOfBounds);
  CHECK(slice_window(s, 4, 0).empty());
}

TEST_CASE("apply_threshold uses strict inequality (Eq. 1)") {
  ScoreSeries scores;
  scores.timestamps = {0, 1, 2, 3};
  scores.scores = {2.999999, 3.0, 3.000001, -3.0};
  VerdictSeries v = apply_threshold(scores, 3.0);
  CHECK(v.verdicts == std::vector<std::uint8_t>{0, 0, 1, 0});

  // score == tau must stay 0 even at tau = 0.
  scores.scores = {0.0, 0.0};
  scores.timestamps = {0, 1};
  CHECK(apply_threshold(scores, 0.0).verdicts == std::vector<std::uint8_t>{0, 0});
}

TEST_CASE("error hierarchy roots at radf::Error") {
  try {
    throw SeriesTooShort("n=3");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("n=3") != std::string::npos);
  }
}
