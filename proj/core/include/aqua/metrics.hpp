#pragma once

#include <optional>
#include <string>

#include "aqua/formation.hpp"
#include "aqua/image.hpp"

namespace aqua {

/// 10 log10(peak^2 / MSE) in dB. Returns +infinity for bitwise-identical
/// inputs; finite otherwise.
double psnr(const LinearImage& a, const LinearImage& b, double peak = 1.0);

struct SsimParams {
    int window = 11;
    double sigma = 1.5;
    double k1 = 0.01;
    double k2 = 0.03;
    double peak = 1.0;
};

/// Mean local SSIM with Gaussian-weighted windows, computed on the Rec. 709
/// luminance of the linear images. Windows are fully interior (valid-mode),
/// so both dimensions must be >= the window size.
double ssim(const LinearImage& a, const LinearImage& b, const SsimParams& params = {});

/// Mean absolute error over all pixels and channels. Also the L1 loss.
double mae(const LinearImage& a, const LinearImage& b);

struct UiqmWeights {
    // Component weights from the published metric's linear model.
    double c1 = 0.0282;  // colorfulness
    double c2 = 0.2953;  // sharpness
    double c3 = 3.5753;  // contrast
};

struct UiqmBreakdown {
    double uicm = 0.0;
    double uism = 0.0;
    double uiconm = 0.0;
    double uiqm = 0.0;
};

/// Reference-free underwater quality measure: c1*UICM + c2*UISM + c3*UIConM.
/// Computed on the 8-bit sRGB rendering of the image, per the metric's
/// display-referred convention: UICM from asymmetric alpha-trimmed statistics
/// of the RG/YB opponent channels, UISM from Sobel-edge EME over 8x8 blocks,
/// UIConM from logAMEE over 8x8 blocks. Degenerate blocks (max = min or a
/// zero bound) contribute 0.
UiqmBreakdown uiqm(const LinearImage& img, const UiqmWeights& weights = {});

struct LossWeights {
    double lambda_j = 1.0;
    double lambda_t = 0.5;
    double lambda_b = 0.5;
    double lambda_l = 0.4;
};

/// One evaluated image pair. Fields are filled by whichever scoring ran;
/// absent fields stay unset. A PSNR of +infinity is serialized as null with
/// the bitwise_equal flag set.
struct ScoreReport {
    std::string id;
    std::optional<double> psnr;
    std::optional<double> ssim;
    std::optional<double> l1;
    std::optional<double> psnr_t;
    std::optional<double> mae_t;
    std::optional<double> psnr_b;
    std::optional<double> mae_b;
    std::optional<double> uiqm;
    // Weighted-loss breakdown (image loss per term is L1 + (1 - SSIM)).
    std::optional<double> loss_j;
    std::optional<double> loss_t;
    std::optional<double> loss_b;
    std::optional<double> loss_rec;
    std::optional<double> composite;
};

/// Weighted total loss over a predicted decomposition:
///   composite = lj*L(pred_j, gt_j) + lt*L(T) + lb*L(B) + ll*L_rec
/// where each L is L1 + (1 - SSIM) and L_rec compares the recomposition
/// compose(pred_j, pred_maps) against the original input image.
ScoreReport composite_loss(const LinearImage& pred_j, const MediumMaps& pred_maps,
                           const LinearImage& gt_j, const MediumMaps& gt_maps,
                           const LinearImage& input_i, const LossWeights& weights = {});

struct MediumScores {
    double psnr_t = 0.0;
    double mae_t = 0.0;
    double psnr_b = 0.0;
    double mae_b = 0.0;
};

/// PSNR and MAE of predicted transmission and backscatter against ground truth.
MediumScores evaluate_medium(const MediumMaps& pred, const MediumMaps& gt);

} // namespace aqua
