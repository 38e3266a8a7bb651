#pragma once

#include <cstdint>
#include <variant>
#include <vector>

namespace dftrl {

// Rounds are 1-based throughout: t = 1..T. Feedback of round tau arrives at the
// end of round tau + d_tau and is usable from round tau + d_tau + 1 onward.

struct ConstantDelay {
  int d = 0;
};

struct ExplicitDelays {
  std::vector<int> d;  // d[t - 1]
};

enum class DelayDistribution { Uniform, Geometric };

/// Uniform: integer in [low, high]. Geometric: P(d = k) = (1 - p)^k p,
/// truncated at `high`.
struct SeededRandomDelay {
  DelayDistribution distribution = DelayDistribution::Uniform;
  int low = 0;
  int high = 1;
  double p = 0.5;
  std::uint64_t seed = 0;
};

class DelaySchedule {
 public:
  using Variant = std::variant<ConstantDelay, ExplicitDelays, SeededRandomDelay>;

  DelaySchedule(Variant v, int horizon);

  const Variant& variant() const { return variant_; }
  int horizon() const { return horizon_; }
  int delay(int t) const;
  const std::vector<int>& delays() const { return delays_; }

  /// max_t d_t, clamped to at least 1.
  int d_max() const { return d_max_; }
  /// sum_t d_t
  long long sum_delays() const;
  /// sum_t |m_t|; each tau contributes min(d_tau, T - tau).
  long long total_missing() const;

 private:
  Variant variant_;
  int horizon_;
  std::vector<int> delays_;
  int d_max_ = 1;
};

/// Arrival buckets and the observed/missing index sets of a schedule.
class DelayState {
 public:
  explicit DelayState(const DelaySchedule& schedule);

  int horizon() const { return horizon_; }

  /// {tau : tau + d_tau = t}, ascending.
  const std::vector<int>& arrivals_at(int t) const;
  /// o_t = {tau : tau + d_tau < t}, ascending.
  std::vector<int> observed_set(int t) const;
  /// m_t = [t - 1] \ o_t, ascending.
  std::vector<int> missing_set(int t) const;
  int missing_count(int t) const;
  /// Rounds whose feedback would arrive after T.
  const std::vector<int>& dropped() const { return dropped_; }

  long long total_missing() const { return total_missing_; }
  long long sum_delays() const { return sum_delays_; }

 private:
  void check_round(int t) const;

  int horizon_;
  std::vector<int> delays_;
  std::vector<std::vector<int>> buckets_;  // buckets_[t] for t = 1..T
  std::vector<int> observed_before_;       // observed_before_[t] = |o_t|, t = 1..T+1
  std::vector<int> dropped_;
  long long total_missing_ = 0;
  long long sum_delays_ = 0;
};

/// Epoch bookkeeping for unknown d_max: epoch e runs with guess 2^e and a new
/// epoch starts at any round where an observed delay exceeds the guess.
class DoublingController {
 public:
  DoublingController() = default;

  int epoch() const { return epoch_; }
  long long guess() const { return 1LL << epoch_; }
  int epoch_start() const { return start_; }
  int epoch_count() const { return epoch_; }

  /// Feeds the delays of the rounds that became observed at the start of round
  /// t. Returns true when a new epoch starts at t.
  bool begin_round(int t, const std::vector<int>& newly_observed_delays);

 private:
  int epoch_ = 1;
  int start_ = 1;
  int max_observed_ = 0;
};

}  // namespace dftrl
