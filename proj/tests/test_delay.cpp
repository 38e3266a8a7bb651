#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dftrl/delay.hpp"
#include "dftrl/errors.hpp"

using namespace dftrl;

namespace {

std::vector<int> v(std::initializer_list<int> xs) { return xs; }

// Runs the per-round epoch rule over a schedule; returns (epochs, final guess).
std::pair<int, long long> run_doubling(const DelaySchedule& sched) {
  const DelayState st(sched);
  DoublingController ctrl;
  for (int t = 2; t <= sched.horizon(); ++t) {
    std::vector<int> newly;
    for (int tau : st.arrivals_at(t - 1)) newly.push_back(sched.delay(tau));
    ctrl.begin_round(t, newly);
  }
  return {ctrl.epoch_count(), ctrl.guess()};
}

}  // namespace

TEST_CASE("zero delays") {
  const DelaySchedule s(ConstantDelay{0}, 10);
  const DelayState st(s);
  for (int t = 1; t <= 10; ++t) CHECK(st.arrivals_at(t) == v({t}));
  CHECK(st.total_missing() == 0);
  CHECK(s.d_max() == 1);
  CHECK(st.missing_set(1).empty());
}

TEST_CASE("constant delay of two") {
  const DelayState st(DelaySchedule(ConstantDelay{2}, 10));
  CHECK(st.observed_set(5) == v({1, 2}));
  CHECK(st.missing_set(5) == v({3, 4}));
  for (int t = 4; t <= 10; ++t) CHECK(st.missing_count(t) == 2);
}

TEST_CASE("explicit delays") {
  const DelayState st(DelaySchedule(ExplicitDelays{{3, 0, 0}}, 3));
  CHECK(st.arrivals_at(1).empty());
  CHECK(st.arrivals_at(2) == v({2}));
  CHECK(st.arrivals_at(3) == v({3}));
  CHECK(st.dropped() == v({1}));  // 1 + 3 = 4 > T
  CHECK(st.observed_set(3) == v({2}));
  const DelayState st4(DelaySchedule(ExplicitDelays{{3, 0, 0, 0}}, 4));
  CHECK(st4.arrivals_at(4) == v({1, 4}));
  CHECK(st4.observed_set(4) == v({2, 3}));
}

TEST_CASE("arrivals partition the rounds and missing counts add up") {
  const DelaySchedule s(SeededRandomDelay{DelayDistribution::Uniform, 0, 12, 0.5, 77}, 200);
  const DelayState st(s);
  std::vector<int> seen;
  for (int t = 1; t <= 200; ++t)
    for (int tau : st.arrivals_at(t)) seen.push_back(tau);
  for (int tau : st.dropped()) seen.push_back(tau);
  std::sort(seen.begin(), seen.end());
  std::vector<int> all(200);
  std::iota(all.begin(), all.end(), 1);
  CHECK(seen == all);

  long long d = 0;
  for (int t = 1; t <= 200; ++t) {
    d += st.missing_count(t);
    std::vector<int> o = st.observed_set(t), m = st.missing_set(t);
    CHECK(o.size() + m.size() == static_cast<std::size_t>(t - 1));
  }
  CHECK(d == st.total_missing());
  long long by_round = 0;
  for (int tau = 1; tau <= 200; ++tau) by_round += std::min(s.delay(tau), 200 - tau);
  CHECK(by_round == st.total_missing());
  CHECK(st.total_missing() <= st.sum_delays());
}

TEST_CASE("seeded schedules are reproducible") {
  const SeededRandomDelay spec{DelayDistribution::Geometric, 0, 40, 0.2, 5};
  const DelaySchedule a(spec, 500), b(spec, 500);
  CHECK(a.delays() == b.delays());
  CHECK(*std::max_element(a.delays().begin(), a.delays().end()) <= 40);
  const DelaySchedule u(SeededRandomDelay{DelayDistribution::Uniform, 2, 4, 0.5, 1}, 300);
  for (int d : u.delays()) CHECK((d >= 2 && d <= 4));
  CHECK_THROWS_AS(DelaySchedule(ConstantDelay{-1}, 5), RejectedInput);
}

TEST_CASE("doubling epochs") {
  SUBCASE("delays at most two keep one epoch") {
    const auto [epochs, guess] = run_doubling(DelaySchedule(SeededRandomDelay{DelayDistribution::Uniform, 0, 2, 0.5, 3}, 100));
    CHECK(epochs == 1);
    CHECK(guess == 2);
  }
  SUBCASE("a single delay of nine climbs through 4, 8, 16") {
    std::vector<int> d(40, 1);
    d[9] = 9;  // round 10, observed from round 20
    DelaySchedule sched(ExplicitDelays{d}, 40);
    const DelayState st(sched);
    DoublingController ctrl;
    std::vector<long long> guesses{ctrl.guess()};
    for (int t = 2; t <= 40; ++t) {
      std::vector<int> newly;
      for (int tau : st.arrivals_at(t - 1)) newly.push_back(sched.delay(tau));
      if (ctrl.begin_round(t, newly)) guesses.push_back(ctrl.guess());
    }
    CHECK(guesses == std::vector<long long>{2, 4, 8, 16});
  }
  SUBCASE("epoch count is logarithmic in the largest delay") {
    for (int dmax : {3, 17, 100}) {
      std::vector<int> d(400, 1);
      d[50] = dmax;
      const auto [epochs, guess] = run_doubling(DelaySchedule(ExplicitDelays{d}, 400));
      CHECK(epochs <= static_cast<int>(std::ceil(std::log2(dmax))) + 1);
      CHECK(guess >= dmax);
    }
  }
}
