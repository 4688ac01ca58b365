#include "wcp/optics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace wcp {

namespace {

constexpr double kSumSlack = 1e-12;

void require_fraction(double v, const char* what) {
  if (!(v >= 0.0 && v <= 1.0)) {
    throw std::invalid_argument(std::string(what) + " must lie in [0, 1]");
  }
}

}  // namespace

void BeamSplitter::validate() const {
  require_fraction(t2, "splitter transmittance");
  require_fraction(r2, "splitter reflectance");
  if (t2 + r2 > 1.0 + kSumSlack) {
    throw std::invalid_argument("splitter T^2 + R^2 exceeds 1");
  }
}

void DetectionTree::validate() const {
  root.validate();
  transmitted.validate();
  reflected.validate();
  std::array<bool, kDetectors> seen{};
  for (int d : leaf_to_detector) {
    if (d < 0 || d >= kDetectors || seen[d]) {
      throw std::invalid_argument("leaf to detector mapping must be a bijection onto 0..3");
    }
    seen[d] = true;
  }
}

DetectionTree DetectionTree::measured() {
  DetectionTree tree;
  tree.root = {0.494, 0.453};
  tree.transmitted = {0.474, 0.446};
  tree.reflected = {0.461, 0.456};
  return tree;
}

DetectionTree DetectionTree::ideal() { return DetectionTree{}; }

DetectorArray branching_efficiencies(const DetectionTree& tree) {
  tree.validate();
  const std::array<double, kDetectors> leaves{
      tree.root.t2 * tree.transmitted.t2,
      tree.root.t2 * tree.transmitted.r2,
      tree.root.r2 * tree.reflected.t2,
      tree.root.r2 * tree.reflected.r2,
  };
  DetectorArray out{};
  for (int leaf = 0; leaf < kDetectors; ++leaf) out[tree.leaf_to_detector[leaf]] = leaves[leaf];
  return out;
}

double mean_efficiency(const DetectorArray& eta) {
  double s = 0.0;
  for (double e : eta) s += e;
  return s / kDetectors;
}

void validate_efficiencies(const DetectorArray& eta) {
  double sum = 0.0;
  for (double e : eta) {
    require_fraction(e, "detector efficiency");
    sum += e;
  }
  if (sum > 1.0 + kSumSlack) {
    throw std::invalid_argument("sum of detector efficiencies exceeds 1");
  }
}

EfficiencySet overall_efficiencies(const DetectorArray& branching, const DetectorArray& coupling,
                                   double detector) {
  require_fraction(detector, "detector quantum efficiency");
  EfficiencySet set;
  set.branching = branching;
  set.coupling = coupling;
  set.detector = detector;
  for (int i = 0; i < kDetectors; ++i) {
    require_fraction(branching[i], "branching efficiency");
    require_fraction(coupling[i], "coupling efficiency");
    set.overall[i] = branching[i] * coupling[i] * detector;
  }
  set.average = mean_efficiency(set.overall);
  validate_efficiencies(set.overall);
  return set;
}

EfficiencySet overall_efficiencies(const DetectorArray& branching, double coupling,
                                   double detector) {
  return overall_efficiencies(branching, DetectorArray{coupling, coupling, coupling, coupling},
                              detector);
}

void EfficiencySet::validate() const {
  for (int i = 0; i < kDetectors; ++i) {
    const double expected = branching[i] * coupling[i] * detector;
    if (std::abs(overall[i] - expected) > 1e-12) {
      throw std::invalid_argument("overall efficiency does not match branching x coupling x detector");
    }
  }
  if (std::abs(average - mean_efficiency(overall)) > 1e-12) {
    throw std::invalid_argument("average efficiency does not match the per-detector values");
  }
  validate_efficiencies(overall);
}

}  // namespace wcp
