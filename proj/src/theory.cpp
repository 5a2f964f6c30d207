#include "cltrojan/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "cltrojan/parallel.hpp"

namespace clt {

namespace {

constexpr double kPi = 3.14159265358979323846;

void requireUnit(const Vec& v, const char* who) {
  if (std::abs(v.norm() - 1.0) > 1e-9)
    throw std::invalid_argument(std::string(who) + ": inputs must be unit vectors");
}

// cumulative distribution of the pairwise angle for uniform directions on
// S^{d-1}: integrate sin^(d-2) by Simpson's rule and normalize, which also
// cancels the Gamma prefactor
std::vector<double> angleCdfGrid(int d, int gridIntervals) {
  std::vector<double> cdf((std::size_t)gridIntervals + 1, 0.0);
  const double h = kPi / gridIntervals;
  auto f = [&](double x) { return std::pow(std::sin(x), (double)(d - 2)); };
  double acc = 0;
  for (int i = 0; i < gridIntervals; i++) {
    const double a = i * h;
    acc += (f(a) + 4.0 * f(a + 0.5 * h) + f(a + h)) * h / 6.0;
    cdf[(std::size_t)i + 1] = acc;
  }
  for (auto& v : cdf) v /= acc;
  return cdf;
}

double interpCdf(const std::vector<double>& cdf, double theta) {
  const int n = (int)cdf.size() - 1;
  const double t = std::clamp(theta, 0.0, kPi) / kPi * n;
  const int i = std::min((int)t, n - 1);
  const double frac = t - i;
  return cdf[(std::size_t)i] * (1 - frac) + cdf[(std::size_t)i + 1] * frac;
}

}  // namespace

Vec uniformSphere(int d, Rng& rng) {
  if (d < 1) throw std::invalid_argument("uniformSphere: dimension must be positive");
  Vec v(d);
  while (true) {
    for (int i = 0; i < d; i++) v(i) = rng.normal();
    const double n = v.norm();
    if (n > 1e-12) return v / n;
  }
}

Vec sampleAtAngleFrom(const Vec& base, double cosAngle, Rng& rng) {
  requireUnit(base, "sampleAtAngleFrom");
  if (cosAngle < -1.0 || cosAngle > 1.0)
    throw std::invalid_argument("sampleAtAngleFrom: cosine out of range");
  if (base.size() < 2) throw std::invalid_argument("sampleAtAngleFrom: need dimension >= 2");
  Vec u;
  while (true) {
    Vec g = uniformSphere((int)base.size(), rng);
    u = g - base * base.dot(g);
    const double n = u.norm();
    if (n > 1e-9) {
      u /= n;
      break;
    }
  }
  const double s = std::sqrt(std::max(0.0, 1.0 - cosAngle * cosAngle));
  return cosAngle * base + s * u;
}

AlignmentReport checkAlignment(const Mat& a, const Mat& b) {
  if (a.cols() == 0) throw std::invalid_argument("checkAlignment: empty input");
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument("checkAlignment: pair shapes differ");
  AlignmentReport rep;
  rep.pairs = (std::size_t)a.cols();
  rep.minInner = std::numeric_limits<double>::infinity();
  double sum = 0;
  for (Eigen::Index i = 0; i < a.cols(); i++) {
    const double inner = a.col(i).dot(b.col(i));
    rep.minInner = std::min(rep.minInner, inner);
    sum += inner;
  }
  rep.meanInner = sum / (double)a.cols();
  rep.epsilonHat = 1.0 - rep.minInner;
  return rep;
}

UniformityReport checkUniformity(const Mat& features, int d, int histogramBins) {
  if (d < 2) throw std::invalid_argument("checkUniformity: dimension must be at least 2");
  if (features.rows() != d) throw std::invalid_argument("checkUniformity: feature rows disagree with d");
  if (features.cols() < 2) throw std::invalid_argument("checkUniformity: need at least two features");
  if (histogramBins < 1) throw std::invalid_argument("checkUniformity: need at least one bin");

  const std::size_t pairs = (std::size_t)features.cols() / 2;
  std::vector<double> angles(pairs);
  for (std::size_t p = 0; p < pairs; p++) {  // disjoint pairs keep the sample i.i.d.
    const Vec a = features.col((Eigen::Index)(2 * p)).normalized();
    const Vec b = features.col((Eigen::Index)(2 * p + 1)).normalized();
    angles[p] = std::acos(std::clamp(a.dot(b), -1.0, 1.0));
  }

  UniformityReport rep;
  rep.pairCount = pairs;
  rep.meanAngle = std::accumulate(angles.begin(), angles.end(), 0.0) / (double)pairs;
  rep.minAngle = *std::min_element(angles.begin(), angles.end());
  rep.maxAngle = *std::max_element(angles.begin(), angles.end());

  rep.histogram.assign((std::size_t)histogramBins, 0.0);
  for (double t : angles) {
    int bin = (int)(t / kPi * histogramBins);
    bin = std::clamp(bin, 0, histogramBins - 1);
    rep.histogram[(std::size_t)bin] += 1.0 / (double)pairs;
  }

  const auto cdf = angleCdfGrid(d, 8192);
  std::vector<double> sorted = angles;
  std::sort(sorted.begin(), sorted.end());
  double ks = 0;
  for (std::size_t i = 0; i < pairs; i++) {
    const double h = interpCdf(cdf, sorted[i]);
    ks = std::max(ks, std::abs((double)(i + 1) / (double)pairs - h));
    ks = std::max(ks, std::abs(h - (double)i / (double)pairs));
  }
  rep.ks = ks;
  rep.ksCritical = 1.628 / std::sqrt((double)pairs);  // 1% level, asymptotic
  rep.pass = rep.ks <= rep.ksCritical;
  return rep;
}

DecompositionTerms decomposeAlignment(const Vec& fx, const Vec& fxp, const Vec& fr, const Vec& frp,
                                      double alpha) {
  requireUnit(fx, "decomposeAlignment");
  requireUnit(fxp, "decomposeAlignment");
  requireUnit(fr, "decomposeAlignment");
  requireUnit(frp, "decomposeAlignment");
  if (alpha < 0.0 || alpha > 1.0) throw std::invalid_argument("decomposeAlignment: alpha outside [0,1]");
  DecompositionTerms t;
  t.clean = (1 - alpha) * (1 - alpha) * fx.dot(fxp);
  t.trigger = alpha * alpha * fr.dot(frp);
  t.cross = alpha * (1 - alpha) * (fx.dot(frp) + fr.dot(fxp));
  const Vec mixed = (1 - alpha) * fx + alpha * fr;
  const Vec mixedP = (1 - alpha) * fxp + alpha * frp;
  t.direct = mixed.dot(mixedP);
  return t;
}

double theoremRhs(double alpha, double epsilon) { return alpha - epsilon / (2.0 * (1.0 - alpha)); }

double intermediateRhs(double alpha, double epsilon) {
  return 1.0 - epsilon / (2.0 * alpha * (1.0 - alpha));
}

BoundReport verifyTheoremBound(const MixingModel& m, int trials, std::uint64_t seed, int threads) {
  if (m.alpha <= 0.0 || m.alpha >= 1.0)
    throw std::invalid_argument("verifyTheoremBound: alpha must lie in (0,1)");
  if (m.epsilon < 0.0 || m.epsilon >= 1.0)
    throw std::invalid_argument("verifyTheoremBound: epsilon must lie in [0,1)");
  if (m.d < 2) throw std::invalid_argument("verifyTheoremBound: dimension must be at least 2");
  if (trials < 2) throw std::invalid_argument("verifyTheoremBound: need at least two trials");

  BoundReport rep;
  rep.alpha = m.alpha;
  rep.epsilon = m.epsilon;
  rep.d = m.d;
  rep.trials = trials;
  rep.bound = theoremRhs(m.alpha, m.epsilon);
  rep.intermediateBound = intermediateRhs(m.alpha, m.epsilon);

  std::vector<double> inner((std::size_t)trials), innerRenorm((std::size_t)trials),
      triggerInner((std::size_t)trials);
  parallelFor(threads, (std::size_t)trials, [&](std::size_t t) {
    Rng rng(mixSeed(seed, 0x7B0, (std::uint64_t)t));
    const Vec fx = uniformSphere(m.d, rng);
    // trigger feature within the proof's angular slack of the reference
    const double cosFloor = std::max(-1.0, rep.intermediateBound);
    const double cosPhi = (m.epsilon == 0.0) ? 1.0 : rng.uniform(cosFloor, 1.0);
    const Vec fr = (m.epsilon == 0.0) ? fx : sampleAtAngleFrom(fx, cosPhi, rng);
    const Vec fother = uniformSphere(m.d, rng);  // the unrelated input's feature
    const Vec mixed = (1.0 - m.alpha) * fother + m.alpha * fr;
    inner[t] = mixed.dot(fx);
    innerRenorm[t] = inner[t] / mixed.norm();
    triggerInner[t] = fr.dot(fx);
  });

  const double mean = std::accumulate(inner.begin(), inner.end(), 0.0) / trials;
  double var = 0;
  for (double v : inner) var += (v - mean) * (v - mean);
  var /= (double)(trials - 1);
  rep.meanInner = mean;
  rep.meanInnerRenormalized =
      std::accumulate(innerRenorm.begin(), innerRenorm.end(), 0.0) / trials;
  rep.stdError = std::sqrt(var / trials);
  rep.margin = 3.0 * rep.stdError;
  rep.intermediateMin = *std::min_element(triggerInner.begin(), triggerInner.end());
  rep.vacuous = rep.bound < -1.0;
  const bool intermediateOk = rep.intermediateMin >= rep.intermediateBound - 1e-12;
  rep.pass = rep.vacuous || (rep.meanInner >= rep.bound - rep.margin && intermediateOk);
  return rep;
}

}  // namespace clt
