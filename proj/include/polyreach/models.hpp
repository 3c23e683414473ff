#pragma once

// The honeybee nest-site choice model and the cardiac-cell hybrid automaton.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "polyreach/reach.hpp"

namespace polyreach {

// State order X, Y1, Y2, Z1, Z2; one parameter beta2.
namespace bees {
inline constexpr std::size_t kX = 0;
inline constexpr std::size_t kY1 = 1;
inline constexpr std::size_t kY2 = 2;
inline constexpr std::size_t kZ1 = 3;
inline constexpr std::size_t kZ2 = 4;
inline const std::vector<std::string> kVariables = {"X", "Y1", "Y2", "Z1", "Z2"};
}  // namespace bees

enum class Z2Form {
  /// gamma Y2 - delta beta2 Y2 Z2 - alpha beta1 Y1 Z2; keeps the population
  /// constant.
  Conserving,
  /// gamma Y2 - delta beta1 Y2 Z2 - alpha beta2 Y1 Z2.
  AsPrinted,
};

struct BeesConfig {
  double alpha = 0.7;
  /// beta1 * N when per_capita_rates is set, beta1 otherwise.
  double beta1 = 1.0;
  double beta2_lo = 1.0;
  double beta2_hi = 1.2;
  double gamma = 0.3;
  double delta = 0.5;
  double h = 0.01;
  double N = 1000.0;
  bool per_capita_rates = true;
  std::size_t steps = 6000;
  std::size_t discovery_step = 300;
  double discovery_seed = 1.0;
  double initial_half_width = 1.0;
  /// Replaces the box centred at (N, 0, 0, 0, 0) when set.
  std::optional<Box> initial;
  Z2Form z2_form = Z2Form::Conserving;
  /// Positivity and the population sum as a state invariant.
  bool conservation_invariant = true;

  void validate() const;
  Box initial_box() const;
};

struct BeesModel {
  DiscreteSystem system;
  Box initial;
};

BeesModel build_bees(const BeesConfig& cfg);

enum class ConsensusKind { Site1, Site2, None };

std::string_view to_string(ConsensusKind kind);

struct ConsensusVerdict {
  ConsensusKind kind = ConsensusKind::None;
  double final_gap = 0.0;
  double gap_trend = 0.0;
  /// Signed gap per step.
  std::vector<double> gaps;
};

struct ConsensusOptions {
  double N = 1000.0;
  double threshold = 0.3;
  std::size_t window = 500;
};

/// Interval of (Y_i + Z_i) / N for site i in {1, 2}.
Interval site_share(const ReachSet& set, int site, double N);

/// gap(k) is the signed distance between the site intervals, positive when
/// site 1 lies above. Consensus for the leading site iff |gap| at the last
/// step is at least the threshold and |gap| grew on average over the window.
ConsensusVerdict consensus_metric(const ReachTrace& trace, const ConsensusOptions& opts = {});

// State order u, v, g1, g2, t.
namespace cardiac {
inline constexpr std::size_t kU = 0;
inline constexpr std::size_t kV = 1;
inline constexpr std::size_t kG1 = 2;
inline constexpr std::size_t kG2 = 3;
inline constexpr std::size_t kT = 4;
inline const std::vector<std::string> kVariables = {"u", "v", "g1", "g2", "t"};
inline const std::string kLoc1Stim = "loc1_stim";
inline const std::string kLoc1Rest = "loc1_rest";
inline const std::string kLoc2Stim = "loc2_stim";
inline const std::string kLoc2Rest = "loc2_rest";
inline const std::string kLoc3 = "loc3";
}  // namespace cardiac

struct CardiacConfig {
  double e_amp = 0.66;
  double stim_cutoff = 0.25;
  double g1_lo = 1.0;
  double g1_hi = 180.0;
  double g2_lo = 1.0;
  double g2_hi = 10.0;
  double guard12 = 0.06;
  double guard23 = 0.13;
  double h = 0.001;
  double u0 = 0.0;
  double v0 = 0.0;

  void validate() const;
  /// Steps after which no trajectory can newly reach the unsafe guard.
  std::size_t horizon() const;
};

HybridAutomaton build_cardiac(const CardiacConfig& cfg);

}  // namespace polyreach
