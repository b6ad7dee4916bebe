#include "swtex/rng.hpp"

namespace swtex {

std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Rng make_rng(std::uint64_t master_seed, Stream stream, std::uint64_t index) {
  const std::uint64_t a = mix_seed(master_seed);
  const std::uint64_t b = mix_seed(a ^ static_cast<std::uint64_t>(stream));
  const std::uint64_t c = mix_seed(b ^ (index * 0x2545f4914f6cdd1dULL));
  std::seed_seq seq{static_cast<std::uint32_t>(c), static_cast<std::uint32_t>(c >> 32),
                    static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
  return Rng(seq);
}

}  // namespace swtex
