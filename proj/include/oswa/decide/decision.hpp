#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "oswa/nn/train.hpp"

namespace oswa::decide {

using nn::Arch;
using nn::ScoreVector;

// Decision threshold(s) with the fitting statistics that produced them.
// disc: a single gamma in (0, 0.5], reject when z > gamma.
// ova: per-class accept thresholds in [0.5, 1], class i claims the frame
// when z_i > gamma[i]; outlier when no class claims it.
struct ThresholdSpec {
  Arch arch = Arch::kDisc;
  std::vector<double> gamma;
  std::vector<double> sigma;  // fitted standard deviation(s)
};

enum class Hypothesis { kH0Authorized, kH1Outlier };

struct Decision {
  Hypothesis hypothesis = Hypothesis::kH0Authorized;
  std::optional<int> predicted_class;  // present iff H0 and arch != disc
};

struct RocPoint {
  double p_fa = 0.0;
  double p_d = 0.0;
  double gamma = 0.0;
};

struct RocCurve {
  std::vector<RocPoint> points;  // sorted by gamma ascending
  double auc = 0.0;
};

// Gaussian fit of authorized training scores mirrored around 0:
// sigma = sqrt(mean(s^2)), gamma = min(0.5, 3*sigma).
ThresholdSpec fit_threshold_disc(const std::vector<double>& authorized_scores);

// Per-class Gaussian fit of positive training scores mirrored around their
// ideal value 1: sigma_i = sqrt(mean((1-s)^2)), accept threshold
// gamma_i = max(0.5, 1 - 3*sigma_i). per_class[i] holds the z_i scores of
// training frames from authorized transmitter i.
ThresholdSpec fit_threshold_ova(
    const std::map<int, std::vector<double>>& per_class_scores,
    int n_authorized);

// disc: H1 iff z > gamma. dclass: H1 iff argmax is the outlier class, no
// threshold. ova: H1 iff z_i <= gamma_i for all i, else H0 with the argmax
// class. Argmax ties break toward the lowest index.
Decision decide(const ScoreVector& z, const ThresholdSpec& t);
Decision decide_dclass(const ScoreVector& z);

// Argmax over the authorized outputs only (the dclass outlier output is
// excluded). Errors for disc.
int classify_authorized(const ScoreVector& z);

// Threshold scan over a uniform grid of n_points in [0,1]. outlier_score
// convention: higher means more outlier-like. p_fa = fraction of authorized
// with score > gamma; p_d = fraction of outliers with score > gamma; AUC by
// trapezoidal integration of p_d over p_fa.
RocCurve roc_curve(const std::vector<std::pair<double, bool>>& scored,
                   int n_points = 1001);

// Class-mean accuracy: 1/2 P(H0 | authorized) + 1/2 P(H1 | outlier).
double balanced_accuracy(const std::vector<Decision>& decisions,
                         const std::vector<bool>& is_outlier);

// Scalar outlier score for ROC scans: disc -> z, ova -> 1 - max_i z_i,
// dclass -> outlier-class probability (reported as an extension; dclass has
// no threshold of its own).
double outlier_score(const ScoreVector& z);

}  // namespace oswa::decide
