#pragma once

#include <cstdint>
#include <memory>
#include <variant>
#include <vector>

#include <Eigen/Core>

namespace dftrl {

class LossGenerator;

/// Deterministic losses: base(i) - gap on the best coordinates, base(i) elsewhere.
struct FixedGap {
  Eigen::VectorXd base;
  double gap = 0.0;
  std::vector<int> best;
};

/// Round t replays round ceil(t / block) of the inner generator.
struct BlockRepetition {
  std::shared_ptr<const LossGenerator> inner;
  int block = 1;
};

struct Phase {
  int start = 1;  // first round of the phase
  Eigen::VectorXd loss;
};

/// Piecewise-constant losses; phases sorted by start, the first starting at 1.
struct ShiftingPhases {
  std::vector<Phase> phases;
};

struct CoordinateLaw {
  enum class Kind { Bernoulli, Uniform };
  Kind kind = Kind::Bernoulli;
  double mean = 0.5;  // Bernoulli: P(loss = 1)
  double low = 0.0;   // Uniform
  double high = 1.0;
};

/// Independent per-coordinate draws keyed by (seed, t, i).
struct SeededIID {
  std::vector<CoordinateLaw> laws;
  std::uint64_t seed = 0;
};

/// Losses over (h, s, a) in [0, 1]: a fixed tensor drawn once from the seed,
/// or a fresh uniform tensor every round when `iid` is set.
struct MdpRandomLosses {
  int horizon = 1;
  int states = 1;
  int actions = 1;
  std::uint64_t seed = 0;
  bool iid = false;
};

/// l_t = (1 - noise) theta + noise z_t with z_t uniform on the unit sphere;
/// |l_t|_2 <= 1 whenever |theta|_2 <= 1.
struct LinearDrift {
  Eigen::VectorXd theta;
  double noise = 0.0;
  std::uint64_t seed = 0;
};

enum class LossRange { Signed, Unit, Ball };  // [-1,1]^K, [0,1]^K, |l|_2 <= 1

class LossGenerator {
 public:
  using Variant = std::variant<FixedGap, BlockRepetition, ShiftingPhases, SeededIID, MdpRandomLosses, LinearDrift>;

  LossGenerator(Variant v);

  const Variant& variant() const { return variant_; }
  int dim() const { return dim_; }
  /// Depends only on (generator, t). Throws RejectedInput for t < 1.
  Eigen::VectorXd losses_for_round(int t) const;

 private:
  Variant variant_;
  int dim_ = 0;
  Eigen::VectorXd fixed_;  // MdpRandomLosses with iid = false
};

/// Blocks of d rounds replaying a seeded B-set instance: every coordinate is
/// Bernoulli(1/2) except a hidden B-set with mean 1/2 - gap.
LossGenerator make_lower_bound_env(int d, int budget, int dim, int horizon, std::uint64_t seed, double gap = 0.1);

bool in_range(const Eigen::VectorXd& loss, LossRange range, double tol = 1e-12);
/// Throws InvariantViolation when a generated loss leaves its range.
void require_range(const Eigen::VectorXd& loss, LossRange range);

}  // namespace dftrl
