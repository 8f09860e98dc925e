#pragma once

#include <cstdint>
#include <string_view>

// All randomness in the project flows from one root seed through named
// substreams (stage name, patch index), so concurrent patch workers draw
// from independent streams and results do not depend on scheduling. The
// generator and the distributions are pinned here rather than delegated to
// <random>, which leaves distribution algorithms unspecified.

namespace mpgan {

class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  // Derived streams depend only on the root seed and the label, never on
  // how much the parent stream has been consumed.
  Rng substream(std::string_view name) const;
  Rng substream(std::uint64_t index) const;

  // The seed this stream was constructed with; lets a substream's identity
  // be handed to a component that seeds itself.
  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64();
  // [0, 1)
  double uniform01();
  // uniform in [lo, hi)
  double uniform(double lo, double hi);
  // [0, n)
  std::uint64_t uniform_index(std::uint64_t n);
  // standard normal, Box-Muller
  double normal();

 private:
  std::uint64_t seed_;
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

std::uint64_t fnv1a64(std::string_view s);
std::uint64_t mix64(std::uint64_t x);

}  // namespace mpgan
