#pragma once

#include "semantic_mesh/MapExport.hpp"
#include "semantic_mesh/Pipeline.hpp"
#include "semantic_mesh/Properties.hpp"

#include <cstddef>
#include <filesystem>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace semantic_mesh {

// Friction split between the two evaluated categories: low is mu <= 0.5.
inline constexpr double kLowFrictionThreshold = 0.5;

inline constexpr double kKlLower = -0.5;
inline constexpr double kKlUpper = 1.5;
inline constexpr std::size_t kKlNodes = 4096;
inline constexpr double kDensityFloor = 1e-300;
inline constexpr double kKlInfinite = std::numeric_limits<double>::infinity();

//! KL(N(mu1, s1^2) || N(mu2, s2^2)).
double gaussianKl(double mu1, double sigma1, double mu2, double sigma2);

//! Uniform quadrature grid with trapezoid weights.
struct KlGrid
{
  std::vector<double> nodes;
  std::vector<double> weights;

  static const KlGrid& standard();
};

/*!
 * KL(p || q) by trapezoid quadrature on the standard grid. Densities are
 * floored at 1e-300. Returns +inf when q is below the floor everywhere p is
 * above it. The unclamped variant exposes the raw quadrature sum.
 */
double klMixture(const PropertyMixture& p, const PropertyMixture& q);
double klMixtureUnclamped(const PropertyMixture& p, const PropertyMixture& q);
double klFromDensities(std::span<const double> p, std::span<const double> q);

//! Per-class Gaussian densities tabulated on the standard grid.
class DensityTable
{
 public:
  explicit DensityTable(std::span<const PropertyModel> models);

  std::size_t numClasses() const { return table_.size(); }
  std::span<const double> classDensity(std::size_t c) const { return table_.at(c); }
  std::vector<double> mixtureDensity(const PropertyMixture& mixture) const;

 private:
  std::vector<PropertyModel> models_;
  std::vector<std::vector<double>> table_;
};

struct PrPoint
{
  double threshold = 0.0;
  double recall = 0.0;
  double precision = 0.0;
};

struct PrCurve
{
  std::vector<PrPoint> points;  // recall non-decreasing; first point at recall 0
  double averagePrecision = 0.0;
  std::size_t positives = 0;
  std::size_t total = 0;
};

/*!
 * Precision-recall curve for detector scores; nullopt marks an unknown face,
 * which is never predicted positive. Thresholds sweep the distinct known
 * scores from high to low. AP integrates precision over recall with the
 * trapezoid rule. Throws EvaluationError on an empty set; AP is NaN without
 * positives.
 */
PrCurve prCurve(std::span<const std::optional<double>> scores, std::span<const bool> positive);

//! Detector score for the low-friction class: the belief's mass at or below 0.5.
double lowFrictionScore(const PropertyMixture& mixture);

/*!
 * Fraction of faces whose low/high call (low iff cdf(0.5) >= 0.5) matches the
 * truth. Unknown faces are wrong.
 */
double lowHighAccuracy(std::span<const std::optional<PropertyMixture>> estimates, std::span<const bool> trueLow);

struct EstimatorScore
{
  std::string label;
  EstimatorKind estimator = EstimatorKind::Recursive;
  std::size_t faces = 0;    // evaluated faces
  std::size_t unknown = 0;  // evaluated faces without an estimate
  double klMean = 0.0;
  double klMedian = 0.0;
  double klPooled = 0.0;
  std::size_t klInfinite = 0;
  PrCurve lowPr;
  PrCurve highPr;
  double accuracy = 0.0;
};

struct EvalReport
{
  std::string scenario;
  std::vector<EstimatorScore> scores;
  //! Recursive vs. baselines, when those estimators are present.
  std::optional<bool> klOrderingHolds;
  std::optional<bool> lowApOrderingHolds;
};

struct EvalInput
{
  std::string label;
  MapData map;
};

/*!
 * Scores each map against per-face truth classes. The evaluated faces are those
 * observed in any of the maps. Throws EvaluationError when the maps disagree on
 * mesh layout, classes or scenario, or when no face was observed.
 */
EvalReport evaluateMaps(std::span<const EvalInput> maps, std::span<const std::size_t> faceTrueClass,
                        std::span<const PropertyModel> models, const std::string& scenario);

/*
 * Written files:
 *   eval_summary.csv  estimator,label,faces,unknown,kl_mean,kl_median,kl_pooled,kl_infinite,ap_low,ap_high,accuracy
 *   pr_curve.csv      estimator,label,category,threshold,recall,precision
 *   eval_summary.json the same numbers plus the ordering checks
 */
void writeEvalReport(const EvalReport& report, const std::filesystem::path& outDir);
std::string formatEvalTable(const EvalReport& report);

//! Shortest round-trip decimal text; "inf", "-inf", "nan" for special values.
std::string formatNumber(double value);

}  // namespace semantic_mesh
