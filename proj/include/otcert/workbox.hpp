#pragma once

#include <Eigen/Dense>

#include "otcert/errors.hpp"

namespace otcert {

/// Axis-aligned box bounding the region where cost evaluation and sampling
/// are permitted. One box serves both marginal spaces.
struct WorkBox {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  WorkBox() = default;
  WorkBox(Eigen::VectorXd lo, Eigen::VectorXd hi)
      : lower(std::move(lo)), upper(std::move(hi)) {
    if (lower.size() != upper.size())
      throw input_error("WorkBox: lower/upper dimension mismatch");
    for (int i = 0; i < lower.size(); ++i)
      if (!(lower[i] < upper[i]))
        throw input_error("WorkBox: lower must be componentwise below upper");
  }

  static WorkBox cube(int dim, double lo, double hi) {
    return WorkBox(Eigen::VectorXd::Constant(dim, lo),
                   Eigen::VectorXd::Constant(dim, hi));
  }

  int dim() const { return int(lower.size()); }

  /// Containment with a 1e-12-relative slack per axis, so points produced by
  /// round-tripping through coordinate changes do not fall off the boundary.
  bool contains(const Eigen::VectorXd& p, double margin = 0.0) const {
    if (p.size() != lower.size()) return false;
    for (int i = 0; i < p.size(); ++i) {
      double slack = 1e-12 * (upper[i] - lower[i]);
      if (p[i] < lower[i] + margin - slack || p[i] > upper[i] - margin + slack)
        return false;
    }
    return true;
  }

  double diameter() const { return (upper - lower).norm(); }

  Eigen::VectorXd center() const { return 0.5 * (lower + upper); }

  Eigen::VectorXd clamp(Eigen::VectorXd p) const {
    for (int i = 0; i < p.size(); ++i)
      p[i] = std::min(std::max(p[i], lower[i]), upper[i]);
    return p;
  }
};

}  // namespace otcert
