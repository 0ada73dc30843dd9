#ifndef ABRSIM_SRC_RANDOM_H_
#define ABRSIM_SRC_RANDOM_H_

#include <cstdint>
#include <random>

namespace abrsim::internal {

// The standard distributions are implementation defined, so generated traces
// and videos would differ between standard libraries. These helpers only rely
// on the fully specified mt19937_64 output sequence.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform in [0, 1).
  double Uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }
  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }

  // Uniform integer in [lo, hi].
  int UniformInt(int lo, int hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<int>(engine_() % span);
  }

  bool Bernoulli(double p) { return Uniform() < p; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace abrsim::internal

#endif  // ABRSIM_SRC_RANDOM_H_
