#include "qsearch/rng.hpp"

namespace qsearch {

Xoshiro256::Xoshiro256(std::uint64_t seed) noexcept {
  std::uint64_t state = seed;
  for (auto& word : s_) word = splitmix64_next(state);
}

}  // namespace qsearch
