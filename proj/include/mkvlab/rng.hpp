#pragma once

#include <array>
#include <cstddef>
#include <cstdint>

namespace mkvlab {

/// Philox4x32-10 counter-based block cipher (Salmon et al.).
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key);

/// Independent sub-streams sharing one (seed, particle, step) key space.
enum class NoiseStream : std::uint32_t { brownian = 0, initial = 1 };

/// Uniform in (0,1) from a 32-bit word; never returns 0 or 1.
inline double unit_uniform(std::uint32_t w) { return (static_cast<double>(w) + 0.5) * 0x1p-32; }

/// `count` standard normals for (seed, particle, step, stream) via Box-Muller on Philox blocks.
/// Component j always comes from block j/4, so prefixes agree across counts.
void counter_normals(std::uint64_t seed, std::uint32_t particle, std::uint32_t step, NoiseStream stream,
                     std::size_t count, double* out);

/// `count` uniforms in (0,1) keyed like counter_normals.
void counter_uniforms(std::uint64_t seed, std::uint32_t particle, std::uint32_t step, NoiseStream stream,
                      std::size_t count, double* out);

}  // namespace mkvlab
