#pragma once

#include "aqua/image.hpp"

namespace aqua {

// IEC 61966-2-1 sRGB transfer function, scalar form on normalized values.
double srgb_decode(double srgb);
double srgb_encode(double linear);

/// Decode an sRGB-encoded integer image to linear light.
LinearImage srgb_to_linear(const EncodedImage& img);

/// Encode linear light to sRGB integer codes. Values are clamped to [0,1]
/// here and nowhere else; intermediates stay unclamped for metric fidelity.
EncodedImage linear_to_srgb(const LinearImage& img, int bit_depth = 8);

// CIE L*a*b* under D65, sRGB primaries. The gray axis maps to a = b = 0.
Vec3 linear_rgb_to_lab(const Vec3& rgb);
Vec3 lab_to_linear_rgb(const Vec3& lab);

LabImage linear_to_lab(const LinearImage& img);
LinearImage lab_to_linear(const LabImage& img);

/// Rec. 709 luminance of a linear RGB pixel.
inline double luminance709(const Vec3& rgb) {
    return 0.2126 * rgb[0] + 0.7152 * rgb[1] + 0.0722 * rgb[2];
}

} // namespace aqua
