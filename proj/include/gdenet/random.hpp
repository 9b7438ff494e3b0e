#pragma once

#include <cstdint>
#include <vector>

namespace gdenet {

// Counter-based generator used for every random draw in the toolkit.
//
// Draw number c on stream s of seed k is
//     splitmix64(key + (c + 1) * 0x9E3779B97F4A7C15)
// where key = splitmix64(k ^ splitmix64(s)). Uniform reals take the top 53 bits
// of a draw scaled by 2^-53. Any implementation of these three lines
// reproduces graphs, splits and weight initialisations bit for bit.

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

constexpr std::uint64_t splitmix64(std::uint64_t z) noexcept {
  z += kGolden;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
  return splitmix64(seed ^ splitmix64(stream));
}

class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0) noexcept
      : key_(derive_seed(seed, stream)) {}

  std::uint64_t at(std::uint64_t counter) const noexcept {
    return splitmix64(key_ + (counter + 1) * kGolden);
  }
  std::uint64_t next() noexcept { return at(counter_++); }

  double uniform_at(std::uint64_t counter) const noexcept {
    return static_cast<double>(at(counter) >> 11) * 0x1.0p-53;
  }
  double uniform() noexcept { return uniform_at(counter_++); }
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

  // Integer in [0, bound).
  std::uint64_t below(std::uint64_t bound) noexcept {
    auto r = static_cast<std::uint64_t>(uniform() * static_cast<double>(bound));
    return r < bound ? r : bound - 1;
  }

  std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

// Fisher-Yates with CounterRng; deterministic across platforms.
template <class T>
void shuffle(std::vector<T>& items, CounterRng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    auto j = static_cast<std::size_t>(rng.below(i));
    std::swap(items[i - 1], items[j]);
  }
}

std::vector<int> random_permutation(int n, std::uint64_t seed, std::uint64_t stream = 0);

}  // namespace gdenet
