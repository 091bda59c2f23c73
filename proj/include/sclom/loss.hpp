// Margin losses shared by the pivot predictors and the final classifier.
// Each type exposes loss(z) and dloss(z) on the margin z = y * score.
#pragma once

namespace sclom {

struct Hinge {
  static double loss(double z) { return z < 1.0 ? 1.0 - z : 0.0; }
  static double dloss(double z) { return z < 1.0 ? -1.0 : 0.0; }
};

// Hinge with the kink replaced by a quadratic of width gamma; differentiable
// everywhere, which makes finite-difference gradient checks meaningful.
struct SmoothedHinge {
  double gamma = 0.1;
  double loss(double z) const {
    if (z >= 1.0) return 0.0;
    if (z >= 1.0 - gamma) {
      double t = 1.0 - z;
      return t * t / (2.0 * gamma);
    }
    return 1.0 - z - gamma / 2.0;
  }
  double dloss(double z) const {
    if (z >= 1.0) return 0.0;
    if (z >= 1.0 - gamma) return (z - 1.0) / gamma;
    return -1.0;
  }
};

struct ModifiedHuber {
  static double loss(double z) {
    if (z >= 1.0) return 0.0;
    if (z >= -1.0) {
      double t = 1.0 - z;
      return t * t;
    }
    return -4.0 * z;
  }
  static double dloss(double z) {
    if (z >= 1.0) return 0.0;
    if (z >= -1.0) return -2.0 * (1.0 - z);
    return -4.0;
  }
};

}  // namespace sclom
