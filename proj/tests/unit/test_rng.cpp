#include "doctest.h"

#include "mkvlab/rng.hpp"

#include <cmath>
#include <vector>

using namespace mkvlab;

TEST_CASE("Philox4x32-10 known answers") {
    using W = std::array<std::uint32_t, 4>;
    CHECK(philox4x32_10({0, 0, 0, 0}, {0, 0}) == W{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
    CHECK(philox4x32_10({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
          W{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
    CHECK(philox4x32_10({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
          W{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("unit uniforms stay inside the open interval") {
    CHECK(unit_uniform(0) > 0.0);
    CHECK(unit_uniform(0xffffffffu) < 1.0);
    std::vector<double> u(4096);
    counter_uniforms(9, 3, 11, NoiseStream::initial, u.size(), u.data());
    for (double x : u) {
        CHECK(x > 0.0);
        CHECK(x < 1.0);
    }
}

TEST_CASE("normals have standard moments") {
    const std::size_t n = 200000;
    double s1 = 0.0, s2 = 0.0, s4 = 0.0;
    std::vector<double> z(8);
    for (std::uint32_t p = 0; p < n / 8; ++p) {
        counter_normals(2024, p, 0, NoiseStream::brownian, z.size(), z.data());
        for (double x : z) {
            s1 += x;
            s2 += x * x;
            s4 += x * x * x * x;
        }
    }
    const double nn = static_cast<double>(n);
    CHECK(std::abs(s1 / nn) < 4.0 / std::sqrt(nn));
    CHECK(std::abs(s2 / nn - 1.0) < 4.0 * std::sqrt(2.0 / nn));
    CHECK(std::abs(s4 / nn - 3.0) < 4.0 * std::sqrt(96.0 / nn));
}

TEST_CASE("draws depend only on their key") {
    std::vector<double> a(7), b(3), c(7), d(7);
    counter_normals(5, 1, 2, NoiseStream::brownian, a.size(), a.data());
    counter_normals(5, 1, 2, NoiseStream::brownian, b.size(), b.data());
    for (std::size_t k = 0; k < b.size(); ++k) CHECK(a[k] == b[k]);
    counter_normals(5, 1, 2, NoiseStream::brownian, c.size(), c.data());
    CHECK(a == c);
    counter_normals(5, 1, 2, NoiseStream::initial, d.size(), d.data());
    CHECK(a != d);
    counter_normals(5, 2, 2, NoiseStream::brownian, d.size(), d.data());
    CHECK(a != d);
    counter_normals(5, 1, 3, NoiseStream::brownian, d.size(), d.data());
    CHECK(a != d);
    counter_normals(6, 1, 2, NoiseStream::brownian, d.size(), d.data());
    CHECK(a != d);
    // Seeds above 32 bits still change the key.
    counter_normals(5 + (std::uint64_t{1} << 40), 1, 2, NoiseStream::brownian, d.size(), d.data());
    CHECK(a != d);
}
