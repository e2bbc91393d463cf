// Engine congestion model: predicted service times, counter conservation,
// and health reporting.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <vector>

#include "doctest.h"
#include "firm/engine.hpp"
#include "firm/rng.hpp"

using namespace firm;

namespace {

EngineState make_engine(int capacity = 4, double base = 10.0,
                        EngineKind kind = EngineKind::simple, double factor = 1.0) {
  EngineParams params;
  params.capacity = capacity;
  params.base_service_time = base;
  params.kind = kind;
  params.job_size_factor = factor;
  return EngineState("svc", "dep", 0, params);
}

}  // namespace

TEST_CASE("parameters are validated at construction") {
  EngineParams params;
  params.capacity = 0;
  CHECK_THROWS_AS(EngineState("s", "d", 0, params), ValidationError);
  params.capacity = 1;
  params.base_service_time = 0;
  CHECK_THROWS_AS(EngineState("s", "d", 0, params), ValidationError);
  params.base_service_time = 1;
  params.failure_probability = 1.5;
  CHECK_THROWS_AS(EngineState("s", "d", 0, params), ValidationError);
}

TEST_CASE("admissions at or below capacity run at the base service time") {
  EngineState engine = make_engine(4, 10.0);
  for (int i = 0; i < 4; ++i) CHECK(engine.admit(100.0) == doctest::Approx(110.0));
  CHECK(engine.in_flight() == 4);
}

TEST_CASE("load beyond capacity stretches the predicted time linearly") {
  EngineState engine = make_engine(4, 10.0);
  for (int i = 0; i < 4; ++i) engine.admit(0.0);
  // Fifth concurrent request: 10 * (1 + 1/4).
  CHECK(engine.admit(0.0) == doctest::Approx(12.5));
  // Ninth: 10 * (1 + 5/4).
  for (int i = 0; i < 3; ++i) engine.admit(0.0);
  CHECK(engine.admit(0.0) == doctest::Approx(22.5));
}

TEST_CASE("predicted time never drops as the backlog grows") {
  EngineState engine = make_engine(3, 7.0);
  double last = 0.0;
  for (int i = 0; i < 50; ++i) {
    const double predicted = engine.admit(0.0);
    CHECK(predicted >= last);
    last = predicted;
  }
}

TEST_CASE("mapreduce engines stretch the base time by the job size factor") {
  EngineState engine = make_engine(4, 10.0, EngineKind::mapreduce, 3.0);
  CHECK(engine.effective_base() == doctest::Approx(30.0));
  CHECK(engine.admit(0.0) == doctest::Approx(30.0));
  // The simple kind ignores the factor.
  EngineState simple = make_engine(4, 10.0, EngineKind::simple, 3.0);
  CHECK(simple.effective_base() == doctest::Approx(10.0));
}

TEST_CASE("counters stay conserved through mixed outcomes") {
  EngineState engine = make_engine(2, 5.0);
  RandomStream rng(12);
  int admitted = 0;
  for (int step = 0; step < 300; ++step) {
    if (rng.coin() || engine.in_flight() == 0) {
      engine.admit(static_cast<double>(step));
      ++admitted;
    } else {
      engine.complete(static_cast<double>(step), 5.0,
                      rng.coin() ? Outcome::ok : Outcome::failed);
    }
    CHECK(engine.admissions() == engine.in_flight() + engine.completed() + engine.failed());
  }
  CHECK(engine.admissions() == admitted);
}

TEST_CASE("completing an idle engine is an invariant violation") {
  EngineState engine = make_engine();
  CHECK_THROWS_AS(engine.complete(1.0, 1.0, Outcome::ok), InvariantViolation);
  engine.admit(0.0);
  engine.complete(1.0, 1.0, Outcome::ok);
  CHECK_THROWS_AS(engine.complete(2.0, 1.0, Outcome::ok), InvariantViolation);
}

TEST_CASE("health reports summarize the completion window") {
  EngineState engine = make_engine(4, 10.0);

  SUBCASE("an unloaded engine is under threshold") {
    const EngineReport report = engine.health_report(100.0, 100.0, 0.0);
    CHECK(report.deployment == "dep");
    CHECK_FALSE(report.over_threshold);
    CHECK(report.in_flight == 0);
    // Empty window falls back to the configured base.
    CHECK(report.mean_service_time == doctest::Approx(10.0));
  }

  SUBCASE("an empty window reports the plain base even under backlog") {
    for (int i = 0; i < 6; ++i) engine.admit(0.0);
    const EngineReport report = engine.health_report(100.0, 1000.0, 0.0);
    CHECK(report.in_flight == 6);
    CHECK(report.over_threshold);  // backlog alone trips the verdict
    // The fallback is the configured base, not the congestion-stretched time.
    CHECK(report.mean_service_time == doctest::Approx(10.0));
  }

  SUBCASE("an empty window never trips the mean arm") {
    for (int i = 0; i < 3; ++i) engine.admit(0.0);  // within capacity
    // The fallback mean exceeds this threshold, yet with no completions the
    // verdict rests on backlog alone.
    const EngineReport report = engine.health_report(100.0, 1.0, 0.0);
    CHECK(report.mean_service_time == doctest::Approx(10.0));
    CHECK_FALSE(report.over_threshold);
  }

  SUBCASE("a backlog beyond capacity flags even with a fast mean") {
    for (int i = 0; i < 5; ++i) engine.admit(0.0);
    const EngineReport report = engine.health_report(100.0, 1000.0, 0.0);
    CHECK(report.in_flight == 5);
    CHECK(report.over_threshold);
  }

  SUBCASE("a slow mean flags despite an idle queue") {
    engine.admit(0.0);
    engine.complete(110.0, 110.0, Outcome::ok);
    const EngineReport report = engine.health_report(200.0, 100.0, 120.0);
    CHECK(report.mean_service_time == doctest::Approx(110.0));
    CHECK(report.over_threshold);
  }

  SUBCASE("completions outside the window are ignored") {
    engine.admit(0.0);
    engine.complete(10.0, 50.0, Outcome::ok);  // old and slow
    engine.admit(90.0);
    engine.complete(95.0, 8.0, Outcome::ok);  // recent and fast
    const EngineReport report = engine.health_report(20.0, 20.0, 100.0);
    CHECK(report.mean_service_time == doctest::Approx(8.0));
    CHECK_FALSE(report.over_threshold);
  }

  SUBCASE("failed completions do not pollute the mean") {
    engine.admit(0.0);
    engine.complete(5.0, 999.0, Outcome::failed);
    const EngineReport report = engine.health_report(100.0, 100.0, 6.0);
    CHECK(report.mean_service_time == doctest::Approx(10.0));  // empty window
  }
}
