#pragma once

#include <cstdint>
#include <random>

#include "aqua/special.hpp"

namespace aqua {

// Counter-addressed random substreams.
//
// Every stochastic routine in the library draws from PathRng(seed, stream,
// index): `stream` identifies the purpose (salmon factors, soy factors, lice
// events, ...) and `index` is the global path number.  A path's draws are
// therefore independent of batching, thread count and evaluation order, which
// makes block-streamed runs bit-identical to one-shot runs with the same seed.
//
// Uniforms take the top 53 bits of mt19937_64 output and normals go through
// the inverse CDF, so sequences do not depend on libstdc++'s distribution
// implementations.
class PathRng {
  public:
    PathRng(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
        std::seed_seq seq{seed & 0xffffffffu,       seed >> 32,
                          stream & 0xffffffffu,     stream >> 32,
                          index & 0xffffffffu,      index >> 32};
        gen_.seed(seq);
    }

    std::uint64_t raw() { return gen_(); }

    // Strictly inside (0,1): offset by half an ulp of the 53-bit grid.
    double uniform01() {
        return (static_cast<double>(raw() >> 11) + 0.5) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    double normal() { return normal_quantile(uniform01()); }

  private:
    std::mt19937_64 gen_;
};

// Stream tags.  Worlds that must be independent (training vs evaluation vs
// calibration) get distinct purpose blocks; factors within a world get
// distinct offsets inside the block.
namespace rng_stream {
inline constexpr std::uint64_t salmon = 1;
inline constexpr std::uint64_t soy = 2;
inline constexpr std::uint64_t lice = 3;

inline constexpr std::uint64_t training_block = 0x100;
inline constexpr std::uint64_t evaluation_block = 0x200;
inline constexpr std::uint64_t curves_block = 0x300;
inline constexpr std::uint64_t calibration_block = 0x400;
inline constexpr std::uint64_t synthetic_block = 0x500;
}  // namespace rng_stream

// Seed plus stream tag; hands out one generator per path index.
struct RngStream {
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;

    PathRng path(std::uint64_t index) const { return PathRng(seed, stream, index); }
};

}  // namespace aqua
