#include "aqua/color.hpp"

#include <algorithm>
#include <cmath>

#include "aqua/errors.hpp"

namespace aqua {

namespace {

// sRGB D65 primaries, 7-digit coefficients.
constexpr double kRgbToXyz[3][3] = {
    {0.4124564, 0.3575761, 0.1804375},
    {0.2126729, 0.7151522, 0.0721750},
    {0.0193339, 0.1191920, 0.9503041},
};
constexpr double kXyzToRgb[3][3] = {
    {3.2404542, -1.5371385, -0.4985314},
    {-0.9692660, 1.8760108, 0.0415560},
    {0.0556434, -0.2040259, 1.0572252},
};
constexpr double kWhite[3] = {0.95047, 1.0, 1.08883};

constexpr double kLabEps = 216.0 / 24389.0;
constexpr double kLabKappa = 24389.0 / 27.0;

double lab_f(double t) {
    if (t > kLabEps) return std::cbrt(t);
    return (kLabKappa * t + 16.0) / 116.0;
}

double lab_f_inv(double f) {
    const double f3 = f * f * f;
    if (f3 > kLabEps) return f3;
    return (116.0 * f - 16.0) / kLabKappa;
}

} // namespace

double srgb_decode(double code) {
    if (code <= 0.04045) return code / 12.92;
    return std::pow((code + 0.055) / 1.055, 2.4);
}

double srgb_encode(double linear) {
    if (linear <= 0.0031308) return linear * 12.92;
    return 1.055 * std::pow(linear, 1.0 / 2.4) - 0.055;
}

LinearImage srgb_to_linear(const EncodedImage& encoded) {
    const double max_code = static_cast<double>(encoded.max_code());
    LinearImage out(encoded.width, encoded.height);
    double* dst = out.data();
    const std::size_t n = encoded.data.size();
    for (std::size_t i = 0; i < n; ++i) {
        dst[i] = srgb_decode(static_cast<double>(encoded.data[i]) / max_code);
    }
    return out;
}

EncodedImage linear_to_srgb(const LinearImage& image, int bit_depth) {
    if (bit_depth != 8 && bit_depth != 16) {
        throw ValidationError("bit depth must be 8 or 16");
    }
    EncodedImage out;
    out.width = image.width();
    out.height = image.height();
    out.bit_depth = bit_depth;
    out.data.resize(image.value_count());
    const double max_code = static_cast<double>(out.max_code());
    const double* src = image.data();
    for (std::size_t i = 0; i < out.data.size(); ++i) {
        // Out-of-gamut values are clamped here and nowhere else.
        const double clamped = std::clamp(src[i], 0.0, 1.0);
        const double code = srgb_encode(clamped) * max_code;
        out.data[i] = static_cast<std::uint16_t>(std::lround(code));
    }
    return out;
}

Vec3 linear_rgb_to_lab(const Vec3& rgb) {
    double xyz[3];
    for (int row = 0; row < 3; ++row) {
        xyz[row] = kRgbToXyz[row][0] * rgb[0] + kRgbToXyz[row][1] * rgb[1] +
                   kRgbToXyz[row][2] * rgb[2];
    }
    const double fx = lab_f(xyz[0] / kWhite[0]);
    const double fy = lab_f(xyz[1] / kWhite[1]);
    const double fz = lab_f(xyz[2] / kWhite[2]);
    return {116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)};
}

Vec3 lab_to_linear_rgb(const Vec3& lab) {
    const double fy = (lab[0] + 16.0) / 116.0;
    const double fx = fy + lab[1] / 500.0;
    const double fz = fy - lab[2] / 200.0;
    const double xyz[3] = {lab_f_inv(fx) * kWhite[0],
                           lab[0] > kLabKappa * kLabEps
                               ? std::pow((lab[0] + 16.0) / 116.0, 3.0)
                               : lab[0] / kLabKappa,
                           lab_f_inv(fz) * kWhite[2]};
    Vec3 rgb;
    for (int row = 0; row < 3; ++row) {
        rgb[row] = kXyzToRgb[row][0] * xyz[0] + kXyzToRgb[row][1] * xyz[1] +
                   kXyzToRgb[row][2] * xyz[2];
    }
    return rgb;
}

LabImage linear_to_lab(const LinearImage& image) {
    LabImage out;
    out.width = image.width();
    out.height = image.height();
    const std::size_t n = image.pixel_count();
    out.l.resize(n);
    out.a.resize(n);
    out.b.resize(n);
    const double* src = image.data();
    for (std::size_t i = 0; i < n; ++i) {
        const Vec3 lab = linear_rgb_to_lab({src[i * 3], src[i * 3 + 1], src[i * 3 + 2]});
        out.l[i] = lab[0];
        out.a[i] = lab[1];
        out.b[i] = lab[2];
    }
    return out;
}

LinearImage lab_to_linear(const LabImage& lab) {
    LinearImage out(lab.width, lab.height);
    double* dst = out.data();
    const std::size_t n = out.pixel_count();
    for (std::size_t i = 0; i < n; ++i) {
        const Vec3 rgb = lab_to_linear_rgb({lab.l[i], lab.a[i], lab.b[i]});
        dst[i * 3] = rgb[0];
        dst[i * 3 + 1] = rgb[1];
        dst[i * 3 + 2] = rgb[2];
    }
    return out;
}

} // namespace aqua
