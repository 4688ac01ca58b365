// Beam-splitter detection tree feeding four threshold detectors.
#pragma once

#include <array>

namespace wcp {

inline constexpr int kDetectors = 4;

/// Per-detector values, index 0 is detector 1.
using DetectorArray = std::array<double, kDetectors>;

/// Intensity fractions of a lossy splitter; 1 - t2 - r2 is lost.
struct BeamSplitter {
  double t2 = 0.5;
  double r2 = 0.5;

  void validate() const;
};

/// BS3 splits the input; BS4 sits on its transmitted arm and BS5 on its
/// reflected arm. Leaves in order {T3 T4, T3 R4, R3 T5, R3 R5}.
struct DetectionTree {
  BeamSplitter root;         // BS3
  BeamSplitter transmitted;  // BS4
  BeamSplitter reflected;    // BS5
  /// leaf_to_detector[leaf] is the 0-based detector fed by that leaf.
  std::array<int, kDetectors> leaf_to_detector{0, 1, 2, 3};

  void validate() const;

  /// Characterised splitters of the reference setup.
  static DetectionTree measured();
  static DetectionTree ideal();
};

/// eta_i = eta_b,i * eta_c,i * eta_d with the average over the four arms.
struct EfficiencySet {
  DetectorArray branching{};
  DetectorArray coupling{1.0, 1.0, 1.0, 1.0};
  double detector = 1.0;
  DetectorArray overall{};
  double average = 0.0;

  /// Checks the product rule, the average and sum(eta) <= 1.
  void validate() const;
};

/// Probability that a photon entering the tree reaches each detector.
DetectorArray branching_efficiencies(const DetectionTree& tree);

EfficiencySet overall_efficiencies(const DetectorArray& branching, double coupling,
                                   double detector);
EfficiencySet overall_efficiencies(const DetectorArray& branching,
                                   const DetectorArray& coupling, double detector);

/// Common precondition for the coincidence model: each eta_i in [0,1] and
/// the sum at most 1.
void validate_efficiencies(const DetectorArray& eta);

double mean_efficiency(const DetectorArray& eta);

inline constexpr double kReferenceDetectorEfficiency = 0.65;

}  // namespace wcp
