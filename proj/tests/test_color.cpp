#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "aqua/color.hpp"
#include "aqua/errors.hpp"
#include "aqua/rng.hpp"
#include "support/fixtures.hpp"

using namespace aqua;

TEST_CASE("srgb transfer endpoints and mid-gray") {
    CHECK(srgb_decode(0.0) == 0.0);
    CHECK(srgb_decode(1.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(srgb_encode(0.0) == 0.0);
    CHECK(srgb_encode(1.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(srgb_decode(0.5) == doctest::Approx(0.2140411404822324424).epsilon(1e-12));
}

TEST_CASE("srgb transfer is monotonic and mutually inverse") {
    double prev = -1.0;
    for (int i = 0; i <= 1000; ++i) {
        const double c = i / 1000.0;
        const double l = srgb_decode(c);
        CHECK(l > prev);
        prev = l;
        CHECK(srgb_encode(l) == doctest::Approx(c).epsilon(1e-12));
    }
}

TEST_CASE("every 8-bit and 16-bit code survives decode/encode exactly") {
    for (int bit_depth : {8, 16}) {
        const int max_code = (1 << bit_depth) - 1;
        EncodedImage ramp;
        ramp.width = max_code + 1;
        ramp.height = 1;
        ramp.bit_depth = bit_depth;
        ramp.data.resize(static_cast<std::size_t>(ramp.width) * 3);
        for (int i = 0; i <= max_code; ++i) {
            ramp.data[3 * i] = ramp.data[3 * i + 1] = ramp.data[3 * i + 2] =
                static_cast<std::uint16_t>(i);
        }
        const LinearImage linear = srgb_to_linear(ramp);
        const EncodedImage back = linear_to_srgb(linear, bit_depth);
        REQUIRE(back.data.size() == ramp.data.size());
        for (std::size_t i = 0; i < ramp.data.size(); ++i) CHECK(back.data[i] == ramp.data[i]);
    }
}

TEST_CASE("random linear colors quantize to within one code") {
    Rng rng(41);
    for (int trial = 0; trial < 10000; ++trial) {
        const double l = rng.uniform();
        const int bit_depth = (trial % 2 == 0) ? 8 : 16;
        const double max_code = (bit_depth == 8) ? 255.0 : 65535.0;
        LinearImage img(1, 1);
        img.set_pixel(0, 0, {l, l, l});
        const EncodedImage enc = linear_to_srgb(img, bit_depth);
        const double exact = srgb_encode(l) * max_code;
        CHECK(std::abs(enc.data[0] - exact) <= 0.5 + 1e-9);
    }
}

TEST_CASE("encoding clamps out-of-range radiance instead of wrapping") {
    LinearImage img(2, 1);
    img.set_pixel(0, 0, {-0.5, -1e-9, 0.0});
    img.set_pixel(1, 0, {1.5, 1.0 + 1e-9, 2.0});
    const EncodedImage enc = linear_to_srgb(img, 16);
    CHECK(enc.data[0] == 0);
    CHECK(enc.data[1] == 0);
    CHECK(enc.data[3] == 65535);
    CHECK(enc.data[4] == 65535);
    CHECK(enc.data[5] == 65535);
}

TEST_CASE("gray axis maps to the Lab neutral line") {
    const double v = srgb_decode(0.5);
    const Vec3 lab = linear_rgb_to_lab({v, v, v});
    CHECK(lab[0] == doctest::Approx(53.388967054079720406).epsilon(1e-9));
    CHECK(std::abs(lab[1]) < 1e-3);
    CHECK(std::abs(lab[2]) < 1e-3);
    const Vec3 black = linear_rgb_to_lab({0.0, 0.0, 0.0});
    CHECK(std::abs(black[0]) < 1e-9);
}

TEST_CASE("Lab round-trips random colors") {
    // The forward and inverse primaries are the published 7-digit constants,
    // whose product deviates from the identity near 1e-7; round trips are
    // therefore accurate to ~1e-6, well inside the 1e-3 contract.
    Rng rng(42);
    for (int trial = 0; trial < 2000; ++trial) {
        const Vec3 rgb = {rng.uniform(), rng.uniform(), rng.uniform()};
        const Vec3 back = lab_to_linear_rgb(linear_rgb_to_lab(rgb));
        for (int c = 0; c < 3; ++c) CHECK(std::abs(back[c] - rgb[c]) < 1e-5);
        const Vec3 lab = linear_rgb_to_lab(rgb);
        const Vec3 lab_again = linear_rgb_to_lab(lab_to_linear_rgb(lab));
        for (int c = 0; c < 3; ++c) CHECK(std::abs(lab_again[c] - lab[c]) < 1e-3);
    }
}

TEST_CASE("Rec.709 luminance weights sum over the white point") {
    const double y = luminance709({1.0, 1.0, 1.0});
    CHECK(y == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(luminance709({0.0, 0.0, 0.0}) == 0.0);
    CHECK(luminance709({1.0, 0.0, 0.0}) < luminance709({0.0, 1.0, 0.0}));
}

TEST_CASE("decoded images reject invalid dimensions") {
    EncodedImage bad;
    bad.width = 0;
    bad.height = 4;
    bad.bit_depth = 8;
    CHECK_THROWS_AS((void)srgb_to_linear(bad), ValidationError);
}
