#include "oswa/decide/decision.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace oswa::decide {

ThresholdSpec fit_threshold_disc(const std::vector<double>& authorized_scores) {
  if (authorized_scores.empty())
    throw std::invalid_argument("no authorized scores to fit");
  double ss = 0.0;
  for (double s : authorized_scores) ss += s * s;
  // zero-mean Gaussian MLE on the scores mirrored around 0
  const double sigma = std::sqrt(ss / static_cast<double>(authorized_scores.size()));
  ThresholdSpec t;
  t.arch = Arch::kDisc;
  t.sigma = {sigma};
  t.gamma = {std::min(0.5, 3.0 * sigma)};
  return t;
}

ThresholdSpec fit_threshold_ova(
    const std::map<int, std::vector<double>>& per_class_scores,
    int n_authorized) {
  ThresholdSpec t;
  t.arch = Arch::kOvA;
  t.gamma.resize(n_authorized);
  t.sigma.resize(n_authorized);
  for (int i = 0; i < n_authorized; ++i) {
    auto it = per_class_scores.find(i);
    if (it == per_class_scores.end() || it->second.empty())
      throw std::invalid_argument("authorized class " + std::to_string(i) +
                                  " has no training scores");
    double ss = 0.0;
    for (double s : it->second) {
      const double d = 1.0 - s;
      ss += d * d;
    }
    const double sigma = std::sqrt(ss / static_cast<double>(it->second.size()));
    t.sigma[i] = sigma;
    t.gamma[i] = std::max(0.5, 1.0 - 3.0 * sigma);
  }
  return t;
}

namespace {
int argmax(const std::vector<double>& v, int count) {
  int best = 0;
  for (int i = 1; i < count; ++i)
    if (v[i] > v[best]) best = i;
  return best;
}
}  // namespace

Decision decide_dclass(const ScoreVector& z) {
  if (z.arch != Arch::kDClass)
    throw std::invalid_argument("decide_dclass requires a dclass score");
  const int n = static_cast<int>(z.values.size());
  const int am = argmax(z.values, n);
  Decision d;
  if (am == n - 1) {
    d.hypothesis = Hypothesis::kH1Outlier;
  } else {
    d.hypothesis = Hypothesis::kH0Authorized;
    d.predicted_class = am;
  }
  return d;
}

Decision decide(const ScoreVector& z, const ThresholdSpec& t) {
  if (z.arch == Arch::kDClass) return decide_dclass(z);
  if (z.arch != t.arch)
    throw std::invalid_argument("score/threshold architecture mismatch");
  Decision d;
  if (z.arch == Arch::kDisc) {
    if (z.values.size() != 1 || t.gamma.size() != 1)
      throw std::invalid_argument("disc expects scalar score and threshold");
    d.hypothesis = z.values[0] > t.gamma[0] ? Hypothesis::kH1Outlier
                                            : Hypothesis::kH0Authorized;
    return d;
  }
  // ova
  if (z.values.size() != t.gamma.size())
    throw std::invalid_argument("ova score/threshold length mismatch");
  bool any_claim = false;
  for (std::size_t i = 0; i < z.values.size(); ++i)
    any_claim = any_claim || z.values[i] > t.gamma[i];
  if (any_claim) {
    d.hypothesis = Hypothesis::kH0Authorized;
    d.predicted_class = argmax(z.values, static_cast<int>(z.values.size()));
  } else {
    d.hypothesis = Hypothesis::kH1Outlier;
  }
  return d;
}

int classify_authorized(const ScoreVector& z) {
  switch (z.arch) {
    case Arch::kDisc:
      throw std::invalid_argument("disc cannot classify within the authorized set");
    case Arch::kDClass:
      return argmax(z.values, static_cast<int>(z.values.size()) - 1);
    case Arch::kOvA:
      return argmax(z.values, static_cast<int>(z.values.size()));
  }
  throw std::logic_error("unreachable");
}

RocCurve roc_curve(const std::vector<std::pair<double, bool>>& scored,
                   int n_points) {
  if (n_points < 2) throw std::invalid_argument("n_points must be >= 2");
  std::int64_t n_auth = 0, n_out = 0;
  for (const auto& [score, is_outlier] : scored)
    (is_outlier ? n_out : n_auth)++;
  if (n_auth == 0 || n_out == 0)
    throw std::invalid_argument("roc_curve needs both classes present");

  // Sort scores once; counts above each gamma come from binary search.
  std::vector<double> auth, outl;
  auth.reserve(n_auth);
  outl.reserve(n_out);
  for (const auto& [score, is_outlier] : scored)
    (is_outlier ? outl : auth).push_back(score);
  std::sort(auth.begin(), auth.end());
  std::sort(outl.begin(), outl.end());
  auto frac_above = [](const std::vector<double>& v, double g) {
    const auto it = std::upper_bound(v.begin(), v.end(), g);
    return static_cast<double>(v.end() - it) / static_cast<double>(v.size());
  };

  RocCurve roc;
  roc.points.resize(n_points);
  for (int i = 0; i < n_points; ++i) {
    const double g = static_cast<double>(i) / (n_points - 1);
    roc.points[i] = {frac_above(auth, g), frac_above(outl, g), g};
  }
  double auc = 0.0;
  for (int i = 1; i < n_points; ++i) {
    const auto& a = roc.points[i - 1];
    const auto& b = roc.points[i];
    auc += (a.p_fa - b.p_fa) * 0.5 * (a.p_d + b.p_d);
  }
  roc.auc = auc;
  return roc;
}

double balanced_accuracy(const std::vector<Decision>& decisions,
                         const std::vector<bool>& is_outlier) {
  if (decisions.size() != is_outlier.size())
    throw std::invalid_argument("decision/label length mismatch");
  std::int64_t n_auth = 0, n_out = 0, ok_auth = 0, ok_out = 0;
  for (std::size_t i = 0; i < decisions.size(); ++i) {
    if (is_outlier[i]) {
      ++n_out;
      if (decisions[i].hypothesis == Hypothesis::kH1Outlier) ++ok_out;
    } else {
      ++n_auth;
      if (decisions[i].hypothesis == Hypothesis::kH0Authorized) ++ok_auth;
    }
  }
  if (n_auth == 0 || n_out == 0)
    throw std::invalid_argument("balanced accuracy needs both classes present");
  return 0.5 * static_cast<double>(ok_auth) / static_cast<double>(n_auth) +
         0.5 * static_cast<double>(ok_out) / static_cast<double>(n_out);
}

double outlier_score(const ScoreVector& z) {
  switch (z.arch) {
    case Arch::kDisc:
      return z.values[0];
    case Arch::kOvA:
      return 1.0 - *std::max_element(z.values.begin(), z.values.end());
    case Arch::kDClass:
      return z.values.back();
  }
  throw std::logic_error("unreachable");
}

}  // namespace oswa::decide
