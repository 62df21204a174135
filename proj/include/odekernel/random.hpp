#ifndef ODEKERNEL_RANDOM_HPP
#define ODEKERNEL_RANDOM_HPP

#include <cstdint>

namespace odekernel {

/// Child seed for stream `index` of a root seed: splitmix64 applied to
/// root + (index + 1) * golden-ratio increment.
inline std::uint64_t split_seed(std::uint64_t root, std::uint64_t index) {
  std::uint64_t z = root + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace odekernel

#endif  // ODEKERNEL_RANDOM_HPP
