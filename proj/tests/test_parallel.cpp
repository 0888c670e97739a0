#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <atomic>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "infoplan/parallel.hpp"

using namespace infoplan;

TEST_CASE("every index runs exactly once") {
  set_max_threads(4);
  const std::size_t n = 1000;
  std::vector<std::atomic<int>> hits(n);
  for (auto& h : hits) h.store(0);
  parallel_for(n, [&](std::size_t i) { hits[i].fetch_add(1); });
  for (std::size_t i = 0; i < n; ++i) {
    REQUIRE(hits[i].load() == 1);
  }
  set_max_threads(0);
}

TEST_CASE("empty ranges never invoke the body") {
  std::atomic<int> calls{0};
  parallel_for(0, [&](std::size_t) { calls.fetch_add(1); });
  CHECK(calls.load() == 0);
}

TEST_CASE("body exceptions propagate to the caller") {
  set_max_threads(4);
  CHECK_THROWS_AS(parallel_for(64,
                               [&](std::size_t i) {
                                 if (i == 37) throw std::runtime_error("worker failure");
                               }),
                  std::runtime_error);
  set_max_threads(0);
}

TEST_CASE("thread-count control clamps and resets") {
  set_max_threads(3);
  CHECK(max_threads() == 3);
  set_max_threads(1);
  CHECK(max_threads() == 1);
  set_max_threads(0);
  CHECK(max_threads() == hardware_threads());
  set_max_threads(-5);
  CHECK(max_threads() == hardware_threads());
  CHECK(hardware_threads() >= 1);
}

TEST_CASE("per-index results are identical for any thread count") {
  const std::size_t n = 512;
  const auto fill = [&](std::vector<double>& out) {
    parallel_for(n, [&](std::size_t i) {
      double acc = 0.0;
      for (int k = 1; k <= 50; ++k) {
        acc += std::sin(static_cast<double>(i) * 0.01 * k) / k;
      }
      out[i] = acc;
    });
  };
  std::vector<double> serial(n), threaded(n);
  set_max_threads(1);
  fill(serial);
  set_max_threads(4);
  fill(threaded);
  set_max_threads(0);
  for (std::size_t i = 0; i < n; ++i) {
    REQUIRE(serial[i] == threaded[i]);
  }
}
