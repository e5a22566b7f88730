#include "mkvlab/rng.hpp"

#include <cmath>
#include <numbers>

namespace mkvlab {

std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key) {
    constexpr std::uint64_t M0 = 0xD2511F53u, M1 = 0xCD9E8D57u;
    constexpr std::uint32_t W0 = 0x9E3779B9u, W1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
        if (round > 0) {
            key[0] += W0;
            key[1] += W1;
        }
        const std::uint64_t p0 = M0 * ctr[0];
        const std::uint64_t p1 = M1 * ctr[2];
        const auto hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
        const auto hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
}

namespace {

std::array<std::uint32_t, 4> block(std::uint64_t seed, std::uint32_t particle, std::uint32_t step, NoiseStream stream,
                                   std::uint32_t index) {
    return philox4x32_10({step, particle, index, static_cast<std::uint32_t>(stream)},
                         {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)});
}

}  // namespace

void counter_normals(std::uint64_t seed, std::uint32_t particle, std::uint32_t step, NoiseStream stream,
                     std::size_t count, double* out) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    for (std::size_t j = 0; j < count; j += 4) {
        const auto w = block(seed, particle, step, stream, static_cast<std::uint32_t>(j / 4));
        for (std::size_t pair = 0; pair < 2; ++pair) {
            if (j + 2 * pair >= count) break;
            const double r = std::sqrt(-2.0 * std::log(unit_uniform(w[2 * pair])));
            const double theta = two_pi * unit_uniform(w[2 * pair + 1]);
            const std::size_t k = j + 2 * pair;
            if (k < count) out[k] = r * std::cos(theta);
            if (k + 1 < count) out[k + 1] = r * std::sin(theta);
        }
    }
}

void counter_uniforms(std::uint64_t seed, std::uint32_t particle, std::uint32_t step, NoiseStream stream,
                      std::size_t count, double* out) {
    for (std::size_t j = 0; j < count; j += 4) {
        const auto w = block(seed, particle, step, stream, static_cast<std::uint32_t>(j / 4));
        for (std::size_t k = 0; k < 4 && j + k < count; ++k) out[j + k] = unit_uniform(w[k]);
    }
}

}  // namespace mkvlab
