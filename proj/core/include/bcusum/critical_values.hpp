#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <string>

#include "bcusum/detectors.hpp"

namespace bcusum {

// Testing period: retrospective (within the historical sample), fixed
// endpoint monitoring up to m*T, or infinite-horizon monitoring.
struct Horizon {
  enum class Kind { retrospective, fixed, infinite };
  Kind kind = Kind::retrospective;
  double m = 1.0;  // only meaningful for fixed endpoint

  static Horizon retro() { return {Kind::retrospective, 1.0}; }
  static Horizon fixed(double m);
  static Horizon infinite() {
    return {Kind::infinite, std::numeric_limits<double>::infinity()};
  }
  bool is_retro() const { return kind == Kind::retrospective; }
  std::string label() const;
};

// Reference critical values for the linear boundary, simulated on a grid
// of 10,000 equidistant points with 100,000 replications (regenerate with
// `bcusum critval --paper-scale`).
//
// Retrospective entries cover forward/backward and stacked detectors for
// nu = 1..8 at alpha in {20%, 10%, 5%, 2.5%, 1%}. Monitoring entries
// cover the stacked detector for m in {1.2,...,10, inf} at alpha in
// {10%, 5%, 1%}, plus the forward infinite-horizon 5% values for
// nu = 1, 2. Returns nullopt for any other key.
std::optional<double> lookup_critical_value(DetectorKind kind, std::size_t nu,
                                            double alpha,
                                            const Horizon& horizon);

}  // namespace bcusum
