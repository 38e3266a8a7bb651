#include "dftrl/delay.hpp"

#include <algorithm>
#include <cmath>

#include "dftrl/counter_rng.hpp"
#include "dftrl/detail/overloaded.hpp"
#include "dftrl/errors.hpp"

namespace dftrl {

using detail::Overloaded;

namespace {

int draw_delay(const SeededRandomDelay& r, int t) {
  const double u = counter_uniform({r.seed, static_cast<std::uint64_t>(t)});
  if (r.distribution == DelayDistribution::Uniform) {
    const int span = r.high - r.low + 1;
    return r.low + std::min(span - 1, static_cast<int>(u * span));
  }
  if (r.p >= 1.0) return 0;
  const double k = std::floor(std::log1p(-u) / std::log1p(-r.p));
  return static_cast<int>(std::min<double>(k, r.high));
}

}  // namespace

DelaySchedule::DelaySchedule(Variant v, int horizon) : variant_(std::move(v)), horizon_(horizon) {
  if (horizon < 1) throw RejectedInput("delay schedule: horizon must be >= 1");
  delays_.resize(horizon);
  std::visit(Overloaded{[&](const ConstantDelay& c) {
                          if (c.d < 0) throw RejectedInput("delay schedule: negative constant delay");
                          std::fill(delays_.begin(), delays_.end(), c.d);
                        },
                        [&](const ExplicitDelays& e) {
                          if (static_cast<int>(e.d.size()) != horizon)
                            throw RejectedInput("delay schedule: explicit delay list length differs from T");
                          if (std::any_of(e.d.begin(), e.d.end(), [](int d) { return d < 0; }))
                            throw RejectedInput("delay schedule: negative explicit delay");
                          delays_ = e.d;
                        },
                        [&](const SeededRandomDelay& r) {
                          if (r.low < 0 || r.high < r.low)
                            throw RejectedInput("delay schedule: random delay needs 0 <= low <= high");
                          if (r.distribution == DelayDistribution::Geometric && !(r.p > 0.0 && r.p <= 1.0))
                            throw RejectedInput("delay schedule: geometric p must lie in (0, 1]");
                          for (int t = 1; t <= horizon; ++t) delays_[t - 1] = draw_delay(r, t);
                        }},
             variant_);
  d_max_ = std::max(1, *std::max_element(delays_.begin(), delays_.end()));
}

int DelaySchedule::delay(int t) const {
  if (t < 1 || t > horizon_) throw RejectedInput("delay schedule: round out of range");
  return delays_[t - 1];
}

long long DelaySchedule::sum_delays() const {
  long long s = 0;
  for (int d : delays_) s += d;
  return s;
}

long long DelaySchedule::total_missing() const {
  long long s = 0;
  for (int tau = 1; tau <= horizon_; ++tau) s += std::min<long long>(delays_[tau - 1], horizon_ - tau);
  return s;
}

DelayState::DelayState(const DelaySchedule& schedule)
    : horizon_(schedule.horizon()), delays_(schedule.delays()), buckets_(schedule.horizon() + 1),
      observed_before_(schedule.horizon() + 2, 0) {
  for (int tau = 1; tau <= horizon_; ++tau) {
    const long long arrive = static_cast<long long>(tau) + delays_[tau - 1];
    if (arrive <= horizon_) {
      buckets_[arrive].push_back(tau);
    } else {
      dropped_.push_back(tau);
    }
    sum_delays_ += delays_[tau - 1];
  }
  for (int t = 2; t <= horizon_ + 1; ++t)
    observed_before_[t] = observed_before_[t - 1] + static_cast<int>(buckets_[t - 1].size());
  for (int t = 1; t <= horizon_; ++t) total_missing_ += missing_count(t);
}

void DelayState::check_round(int t) const {
  if (t < 1 || t > horizon_ + 1) throw RejectedInput("delay state: round out of range");
}

const std::vector<int>& DelayState::arrivals_at(int t) const {
  if (t < 1 || t > horizon_) throw RejectedInput("delay state: round out of range");
  return buckets_[t];
}

std::vector<int> DelayState::observed_set(int t) const {
  check_round(t);
  std::vector<int> out;
  out.reserve(observed_before_[t]);
  for (int s = 1; s < t; ++s) out.insert(out.end(), buckets_[s].begin(), buckets_[s].end());
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<int> DelayState::missing_set(int t) const {
  check_round(t);
  std::vector<int> out;
  for (int tau = 1; tau < t; ++tau)
    if (static_cast<long long>(tau) + delays_[tau - 1] >= t) out.push_back(tau);
  return out;
}

int DelayState::missing_count(int t) const {
  check_round(t);
  return (t - 1) - observed_before_[t];
}

bool DoublingController::begin_round(int t, const std::vector<int>& newly_observed_delays) {
  for (int d : newly_observed_delays) max_observed_ = std::max(max_observed_, d);
  if (max_observed_ > guess()) {
    ++epoch_;
    start_ = t;
    return true;
  }
  return false;
}

}  // namespace dftrl
