#include "pbftrel/random.hpp"

#include <cmath>

namespace pbftrel {

namespace {

std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    0x9e3779b9u};
  return std::mt19937_64(seq);
}

}  // namespace

RandomStream::RandomStream(std::uint64_t seed, std::uint64_t stream)
    : engine_(make_engine(seed, stream)) {}

double RandomStream::exponential(double rate) { return -std::log1p(-uniform()) / rate; }

}  // namespace pbftrel
