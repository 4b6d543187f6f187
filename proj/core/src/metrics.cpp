#include "aqua/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "aqua/color.hpp"
#include "aqua/errors.hpp"

namespace aqua {

namespace {

void require_same_shape(const LinearImage& a, const LinearImage& b) {
    if (!a.same_shape(b)) throw PairingError("image dimensions differ");
}

} // namespace

double psnr(const LinearImage& a, const LinearImage& b, double peak) {
    require_same_shape(a, b);
    if (!(peak > 0.0)) throw ValidationError("peak must be positive");

    const double* pa = a.data();
    const double* pb = b.data();
    const std::size_t n = a.value_count();
    double sq_sum = 0.0;
    bool identical = true;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = pa[i] - pb[i];
        if (pa[i] != pb[i]) identical = false;
        sq_sum += d * d;
    }
    if (identical) return std::numeric_limits<double>::infinity();
    const double mse = sq_sum / static_cast<double>(n);
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(peak * peak / mse);
}

double ssim(const LinearImage& a, const LinearImage& b, const SsimParams& params) {
    require_same_shape(a, b);
    const int win = params.window;
    if (win < 1 || win % 2 == 0) throw ValidationError("ssim window must be odd and >= 1");
    if (a.width() < win || a.height() < win) {
        throw ValidationError("image smaller than ssim window");
    }

    const std::size_t n = a.pixel_count();
    std::vector<double> ya(n), yb(n);
    const double* pa = a.data();
    const double* pb = b.data();
    for (std::size_t i = 0; i < n; ++i) {
        ya[i] = luminance709({pa[i * 3], pa[i * 3 + 1], pa[i * 3 + 2]});
        yb[i] = luminance709({pb[i * 3], pb[i * 3 + 1], pb[i * 3 + 2]});
    }

    // Normalized Gaussian window.
    std::vector<double> kernel(static_cast<std::size_t>(win) * win);
    const int half = win / 2;
    double kernel_sum = 0.0;
    for (int dy = 0; dy < win; ++dy) {
        for (int dx = 0; dx < win; ++dx) {
            const double r2 = static_cast<double>((dx - half) * (dx - half) +
                                                  (dy - half) * (dy - half));
            const double w = std::exp(-r2 / (2.0 * params.sigma * params.sigma));
            kernel[static_cast<std::size_t>(dy) * win + dx] = w;
            kernel_sum += w;
        }
    }
    for (double& w : kernel) w /= kernel_sum;

    const double c1 = params.k1 * params.peak * params.k1 * params.peak;
    const double c2 = params.k2 * params.peak * params.k2 * params.peak;

    const int width = a.width();
    const int height = a.height();
    double total = 0.0;
    std::size_t positions = 0;
    for (int y0 = 0; y0 + win <= height; ++y0) {
        for (int x0 = 0; x0 + win <= width; ++x0) {
            double mx = 0.0, my = 0.0, mxx = 0.0, myy = 0.0, mxy = 0.0;
            for (int dy = 0; dy < win; ++dy) {
                const std::size_t row = static_cast<std::size_t>(y0 + dy) * width + x0;
                const double* kr = kernel.data() + static_cast<std::size_t>(dy) * win;
                for (int dx = 0; dx < win; ++dx) {
                    const double w = kr[dx];
                    const double va = ya[row + static_cast<std::size_t>(dx)];
                    const double vb = yb[row + static_cast<std::size_t>(dx)];
                    mx += w * va;
                    my += w * vb;
                    mxx += w * va * va;
                    myy += w * vb * vb;
                    mxy += w * va * vb;
                }
            }
            const double vx = mxx - mx * mx;
            const double vy = myy - my * my;
            const double cxy = mxy - mx * my;
            const double num = (2.0 * mx * my + c1) * (2.0 * cxy + c2);
            const double den = (mx * mx + my * my + c1) * (vx + vy + c2);
            total += num / den;
            ++positions;
        }
    }
    return total / static_cast<double>(positions);
}

double mae(const LinearImage& a, const LinearImage& b) {
    require_same_shape(a, b);
    const double* pa = a.data();
    const double* pb = b.data();
    const std::size_t n = a.value_count();
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += std::abs(pa[i] - pb[i]);
    return sum / static_cast<double>(n);
}

namespace {

// Mean after dropping floor(0.1 N) samples from each end of the sorted list.
double alpha_trimmed_mean(std::vector<double> values) {
    const std::size_t n = values.size();
    const std::size_t drop = static_cast<std::size_t>(std::floor(0.1 * static_cast<double>(n)));
    std::sort(values.begin(), values.end());
    const std::size_t keep = n - 2 * drop;
    double sum = 0.0;
    for (std::size_t i = drop; i < n - drop; ++i) sum += values[i];
    return sum / static_cast<double>(keep);
}

// Population variance about the (trimmed) mean, over all samples.
double variance_about(const std::vector<double>& values, double mu) {
    double sum = 0.0;
    for (double v : values) sum += (v - mu) * (v - mu);
    return sum / static_cast<double>(values.size());
}

double uicm_component(const std::vector<double>& r, const std::vector<double>& g,
                      const std::vector<double>& b) {
    const std::size_t n = r.size();
    std::vector<double> rg(n), yb(n);
    for (std::size_t i = 0; i < n; ++i) {
        rg[i] = r[i] - g[i];
        yb[i] = 0.5 * (r[i] + g[i]) - b[i];
    }
    const double mu_rg = alpha_trimmed_mean(rg);
    const double mu_yb = alpha_trimmed_mean(yb);
    const double var_rg = variance_about(rg, mu_rg);
    const double var_yb = variance_about(yb, mu_yb);
    return -0.0268 * std::sqrt(mu_rg * mu_rg + mu_yb * mu_yb) +
           0.1586 * std::sqrt(var_rg + var_yb);
}

// Symmetric (edge-mirroring) index clamp; for the 1-pixel reach of a 3x3
// kernel this equals edge replication.
int mirror(int i, int n) {
    if (i < 0) return -i - 1;
    if (i >= n) return 2 * n - 1 - i;
    return i;
}

std::vector<double> sobel_magnitude(const std::vector<double>& chan, int width, int height) {
    std::vector<double> out(chan.size());
    auto at = [&](int x, int y) {
        return chan[static_cast<std::size_t>(mirror(y, height)) * width + mirror(x, width)];
    };
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const double gx = -at(x - 1, y - 1) + at(x + 1, y - 1) - 2.0 * at(x - 1, y) +
                              2.0 * at(x + 1, y) - at(x - 1, y + 1) + at(x + 1, y + 1);
            const double gy = -at(x - 1, y - 1) - 2.0 * at(x, y - 1) - at(x + 1, y - 1) +
                              at(x - 1, y + 1) + 2.0 * at(x, y + 1) + at(x + 1, y + 1);
            out[static_cast<std::size_t>(y) * width + x] = std::sqrt(gx * gx + gy * gy);
        }
    }
    return out;
}

// EME over full 8x8 blocks: (2 / block_count) * sum ln(max/min).
double eme_8x8(const std::vector<double>& values, int width, int height) {
    const int bx = width / 8;
    const int by = height / 8;
    if (bx == 0 || by == 0) throw ValidationError("image smaller than the 8x8 metric tile");
    double sum = 0.0;
    for (int tile_y = 0; tile_y < by; ++tile_y) {
        for (int tile_x = 0; tile_x < bx; ++tile_x) {
            double lo = std::numeric_limits<double>::infinity();
            double hi = -std::numeric_limits<double>::infinity();
            for (int dy = 0; dy < 8; ++dy) {
                const std::size_t row =
                    static_cast<std::size_t>(tile_y * 8 + dy) * width + tile_x * 8;
                for (int dx = 0; dx < 8; ++dx) {
                    lo = std::min(lo, values[row + static_cast<std::size_t>(dx)]);
                    hi = std::max(hi, values[row + static_cast<std::size_t>(dx)]);
                }
            }
            if (lo <= 0.0 || hi == lo) continue;
            sum += std::log(hi / lo);
        }
    }
    return 2.0 * sum / static_cast<double>(bx * by);
}

double uism_component(const std::vector<double>& r, const std::vector<double>& g,
                      const std::vector<double>& b, int width, int height) {
    std::vector<double> edge_r = sobel_magnitude(r, width, height);
    std::vector<double> edge_g = sobel_magnitude(g, width, height);
    std::vector<double> edge_b = sobel_magnitude(b, width, height);
    for (std::size_t i = 0; i < edge_r.size(); ++i) {
        edge_r[i] *= r[i];
        edge_g[i] *= g[i];
        edge_b[i] *= b[i];
    }
    return 0.299 * eme_8x8(edge_r, width, height) + 0.587 * eme_8x8(edge_g, width, height) +
           0.114 * eme_8x8(edge_b, width, height);
}

double uiconm_component(const std::vector<double>& r, const std::vector<double>& g,
                        const std::vector<double>& b, int width, int height) {
    std::vector<double> luma(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) {
        luma[i] = 0.299 * r[i] + 0.587 * g[i] + 0.114 * b[i];
    }
    const int bx = width / 8;
    const int by = height / 8;
    if (bx == 0 || by == 0) throw ValidationError("image smaller than the 8x8 metric tile");
    double sum = 0.0;
    for (int tile_y = 0; tile_y < by; ++tile_y) {
        for (int tile_x = 0; tile_x < bx; ++tile_x) {
            double lo = std::numeric_limits<double>::infinity();
            double hi = -std::numeric_limits<double>::infinity();
            for (int dy = 0; dy < 8; ++dy) {
                const std::size_t row =
                    static_cast<std::size_t>(tile_y * 8 + dy) * width + tile_x * 8;
                for (int dx = 0; dx < 8; ++dx) {
                    lo = std::min(lo, luma[row + static_cast<std::size_t>(dx)]);
                    hi = std::max(hi, luma[row + static_cast<std::size_t>(dx)]);
                }
            }
            const double top = hi - lo;
            const double bot = hi + lo;
            if (top <= 0.0 || bot <= 0.0) continue;
            sum += (top / bot) * std::log(top / bot);
        }
    }
    return -sum / static_cast<double>(bx * by);
}

} // namespace

UiqmBreakdown uiqm(const LinearImage& img, const UiqmWeights& weights) {
    // The measure is display-referred: evaluate the 8-bit sRGB rendering.
    const EncodedImage encoded = linear_to_srgb(img, 8);
    const std::size_t n = static_cast<std::size_t>(encoded.width) * encoded.height;
    std::vector<double> r(n), g(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
        r[i] = static_cast<double>(encoded.data[i * 3]);
        g[i] = static_cast<double>(encoded.data[i * 3 + 1]);
        b[i] = static_cast<double>(encoded.data[i * 3 + 2]);
    }

    UiqmBreakdown out;
    out.uicm = uicm_component(r, g, b);
    out.uism = uism_component(r, g, b, encoded.width, encoded.height);
    out.uiconm = uiconm_component(r, g, b, encoded.width, encoded.height);
    out.uiqm = weights.c1 * out.uicm + weights.c2 * out.uism + weights.c3 * out.uiconm;
    return out;
}

namespace {

double image_loss(const LinearImage& a, const LinearImage& b) {
    return mae(a, b) + (1.0 - ssim(a, b));
}

} // namespace

ScoreReport composite_loss(const LinearImage& pred_j, const MediumMaps& pred_maps,
                           const LinearImage& gt_j, const MediumMaps& gt_maps,
                           const LinearImage& input_i, const LossWeights& weights) {
    ScoreReport report;
    report.loss_j = image_loss(pred_j, gt_j);
    report.loss_t = image_loss(pred_maps.t, gt_maps.t);
    report.loss_b = image_loss(pred_maps.b, gt_maps.b);
    report.loss_rec = image_loss(compose(pred_j, pred_maps), input_i);
    report.composite = weights.lambda_j * *report.loss_j + weights.lambda_t * *report.loss_t +
                       weights.lambda_b * *report.loss_b + weights.lambda_l * *report.loss_rec;
    return report;
}

MediumScores evaluate_medium(const MediumMaps& pred, const MediumMaps& gt) {
    MediumScores scores;
    scores.psnr_t = psnr(pred.t, gt.t);
    scores.mae_t = mae(pred.t, gt.t);
    scores.psnr_b = psnr(pred.b, gt.b);
    scores.mae_b = mae(pred.b, gt.b);
    return scores;
}

} // namespace aqua
