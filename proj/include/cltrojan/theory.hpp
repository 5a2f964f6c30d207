#pragma once

#include <cstdint>
#include <vector>

#include "cltrojan/nn.hpp"
#include "cltrojan/rng.hpp"

namespace clt {

// Synthetic feature-space model: clean and trigger features live on the unit
// sphere S^{d-1}; a triggered input's feature mixes them with weight alpha,
// and positive pairs agree up to slack epsilon.
struct MixingModel {
  int d = 128;
  double alpha = 0.5;
  double epsilon = 0.0;  // in [0,1)
};

Vec uniformSphere(int d, Rng& rng);
// Unit vector at the given angle (cosAngle) from base, random direction in
// the orthogonal complement.
Vec sampleAtAngleFrom(const Vec& base, double cosAngle, Rng& rng);

struct AlignmentReport {
  double epsilonHat = 0;  // 1 - min inner product over pairs
  double minInner = 0;
  double meanInner = 0;
  std::size_t pairs = 0;
};

// Positive-pair alignment slack over paired feature columns.
AlignmentReport checkAlignment(const Mat& a, const Mat& b);

struct UniformityReport {
  std::size_t pairCount = 0;
  double meanAngle = 0;
  double minAngle = 0;
  double maxAngle = 0;
  double ks = 0;          // one-sample Kolmogorov-Smirnov distance
  double ksCritical = 0;  // 1% level
  bool pass = false;
  std::vector<double> histogram;  // fraction per bin over [0, pi]
};

// Tests pairwise angles of disjoint feature pairs against the density of
// angles between independent uniform directions on S^{d-1},
// h(theta) = (1/sqrt(pi)) * (Gamma(d/2)/Gamma((d-1)/2)) * sin(theta)^(d-2).
UniformityReport checkUniformity(const Mat& features, int d, int histogramBins = 36);

struct DecompositionTerms {
  double clean = 0;    // (1-a)^2 fx'fx+
  double trigger = 0;  // a^2 fr'fr+
  double cross = 0;    // a(1-a)(fx'fr+ + fr'fx+)
  double direct = 0;   // mixed inner product computed in one shot
};

// Splits the inner product of two mixed features into its clean, trigger and
// cross terms; the three sum to `direct` by algebra.
DecompositionTerms decomposeAlignment(const Vec& fx, const Vec& fxp, const Vec& fr, const Vec& frp,
                                      double alpha);

// Right-hand side of the lower bound: alpha - epsilon / (2(1-alpha)).
double theoremRhs(double alpha, double epsilon);
// Intermediate proof inequality floor: 1 - epsilon / (2 alpha (1-alpha)).
double intermediateRhs(double alpha, double epsilon);

struct BoundReport {
  double alpha = 0, epsilon = 0;
  int d = 0, trials = 0;
  double meanInner = 0;
  double meanInnerRenormalized = 0;  // same statistic with the mixed vector re-unitized
  double stdError = 0;
  double bound = 0;
  double margin = 0;  // 3 standard errors
  double intermediateMin = 0;
  double intermediateBound = 0;
  bool vacuous = false;  // bound below -1 can never fail
  bool pass = false;
};

// Monte-Carlo check of the lower bound on E[f(x~*)' f(x)]: per trial draw a
// reference feature, a trigger feature within the proof's angular slack of
// it, and an independent uniform feature for the other input; mix and
// average. Deterministic per-trial seeding; trials run in parallel.
BoundReport verifyTheoremBound(const MixingModel& m, int trials, std::uint64_t seed, int threads = 1);

}  // namespace clt
