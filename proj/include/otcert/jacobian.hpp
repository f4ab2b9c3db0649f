#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "otcert/measures.hpp"

namespace otcert {

/// Barycentric reduction of one source atom: Tx is the mass-weighted average
/// of its matched targets. split_flag marks atoms whose matched targets
/// spread wider than the grid scale, where the graph hypothesis fails.
struct MapSample {
  Vec x;
  Vec tx;
  double mass = 0.0;
  bool split_flag = false;
  double target_span = 0.0;  // diameter of the matched target set
  int matched_targets = 0;
};

/// grid_scale <= 0 picks an automatic scale (2x the median nearest-neighbor
/// distance among target points); pass the known discretization h-scale when
/// you have one.
std::vector<MapSample> estimate_map(const TransportPlan& plan,
                                    double grid_scale = 0.0);

/// Local derivative estimate at sample `index`: moving least-squares affine
/// fit over the k nearest unflagged samples. Exact on affine maps. Returns
/// nothing (skip signal) when fewer than dim+1 unflagged neighbors exist or
/// the neighborhood is rank deficient.
std::optional<Mat> local_jacobian(const std::vector<MapSample>& samples,
                                  int index, int k_neighbors);

inline int default_jacobian_neighbors(int dim) { return 2 * dim + 2; }

using Density = std::function<double(const Vec&)>;

struct SampleResidual {
  int index = 0;
  double det_estimate = 0.0;
  double residual = 0.0;  // |f+(x) - |det DT| f-(Tx)|
};

struct JacobianReport {
  std::vector<SampleResidual> residuals;  // used samples only
  double weighted_mean_residual = 0.0;    // mass weighted over used samples
  double max_residual = 0.0;
  int used = 0;
  int skipped = 0;  // unflagged but no well-posed fit
  int flagged = 0;  // split-mass samples, excluded but reported
  double grid_scale = 0.0;
  int k_neighbors = 0;
};

/// Change-of-variables residuals f+(x) = |det DT(x)| f-(T(x)) over the map
/// samples. Densities must be nonnegative wherever evaluated.
JacobianReport jacobian_residual(const std::vector<MapSample>& samples,
                                 const Density& f_plus, const Density& f_minus,
                                 int k_neighbors);

/// Uniform cell partition for push-forward comparison.
struct GridPartition {
  WorkBox box;
  std::vector<int> cells_per_dim;

  static GridPartition uniform(const WorkBox& box, int cells_per_dim);
  std::int64_t cell_count() const;
  std::int64_t cell_of(const Vec& p) const;  // clamped to edge cells
};

/// Max over cells of |mass of the T-pushforward - target mass|.
double pushforward_check(const std::vector<MapSample>& samples,
                         const DiscreteMeasure& source,
                         const DiscreteMeasure& target,
                         const GridPartition& cells);

/// Built-in densities and the CLI density-spec parser:
///   "uniform:lo1,..,lon:hi1,..,hin"  constant on a box
///   "gaussian:m1,..,mn:sigma"        isotropic normal
///   path ending in .csv             nearest-point piecewise-constant values
///                                    (header x1,..,xn,value)
Density uniform_density(const WorkBox& box);
Density gaussian_density(const Vec& mean, double sigma);
Density parse_density_spec(const std::string& spec, int dim);

}  // namespace otcert
