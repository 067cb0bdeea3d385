#pragma once

#include "semantic_mesh/Semantics.hpp"

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace semantic_mesh {

//! Class-conditional Gaussian over a terrain property (here the friction coefficient).
struct PropertyModel
{
  std::string className;
  double mu = 0.0;
  double sigma = 1.0;

  bool operator==(const PropertyModel&) const = default;
};

//! Per-face property belief: sum_i w_i N(mu_i, sigma_i^2).
struct PropertyMixture
{
  std::vector<double> weights;
  std::vector<PropertyModel> components;

  double mean() const;
  double variance() const;
  double cdf(double x) const;
  double pdf(double x) const;
};

struct MixtureStats
{
  double mean = 0.0;
  double variance = 0.0;
};

MixtureStats mixtureStats(const PropertyMixture& mixture);

/*!
 * Property belief of a face whose Dirichlet parameters are alpha (weights are
 * the class predictive). Returns nullopt when alpha is all zero. Throws
 * ConfigError when the number of models differs from alpha's length.
 */
std::optional<PropertyMixture> propertyMixture(std::span<const double> alpha, std::span<const PropertyModel> models);

//! Single-component belief on one class.
PropertyMixture singleClassMixture(std::size_t classIndex, std::span<const PropertyModel> models);

struct PropertyModelSet
{
  std::string property = "friction";
  ClassCatalog catalog;
  std::vector<PropertyModel> models;
};

/*!
 * Reads a property-model file:
 *
 *     TERRAIN_PROPERTY_MODELS 1
 *     property friction
 *     concrete,0.543,0.065
 *     ...
 *
 * Lines starting with '#' and blank lines are ignored; one record per class
 * (name, mean, standard deviation) in class-index order. Throws ConfigError on
 * malformed files, duplicate classes or sigma <= 0.
 */
PropertyModelSet loadModels(const std::filesystem::path& path);
PropertyModelSet parseModels(const std::string& text);
std::string formatModels(const PropertyModelSet& set);
void saveModels(const PropertyModelSet& set, const std::filesystem::path& path);

//! Path of the shipped friction model file.
std::filesystem::path defaultModelsPath();

//! Pull-force recording of the friction sled.
struct ForceLog
{
  std::vector<double> timeSeconds;
  std::vector<double> forceNewtons;
  double massKg = 0.0;
  double gravity = 9.81;
};

/*!
 * Reads a force log CSV with header `t_seconds,force_newtons`. The sled mass is
 * taken from a `# mass_kg=<value>` line before the header unless massOverride
 * is given.
 */
ForceLog readForceLog(const std::filesystem::path& path, std::optional<double> massOverride = std::nullopt);

/*!
 * First-order exponential smoothing y_i = y_{i-1} + a_i (x_i - y_{i-1}) with
 * a_i = dt_i / (RC + dt_i), RC = 1 / (2 pi cutoffHz), y_0 = x_0. A non-finite
 * or non-positive cutoff disables filtering.
 */
std::vector<double> lowPassFilter(std::span<const double> time, std::span<const double> values, double cutoffHz);

//! Friction samples mu = F_filtered / (m g). Throws InputError on non-positive mass.
std::vector<double> frictionFromForce(const ForceLog& log, double cutoffHz);

}  // namespace semantic_mesh
