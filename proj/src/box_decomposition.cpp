#include <cmath>

#include "gpo/errors.hpp"
#include "gpo/relaxation.hpp"

namespace gpo {

BoxQuadraticSplit decompose_box_quadratic(double a, double b, double c, double d) {
  if (!(a <= c && c < d && d <= b) || !std::isfinite(a) || !std::isfinite(b)) {
    throw InvalidInput("decompose_box_quadratic requires a <= c < d <= b");
  }
  // Shift so the outer interval starts at 0.
  const double bs = b - a;
  const double cs = c - a;
  const double ds = d - a;
  const double p2 = cs;
  const double q2 = d - c;
  const double r2 = bs - ds;
  BoxQuadraticSplit out;
  if (p2 == 0.0 && r2 == 0.0) {
    out.alpha = 1.0;
    out.beta = 0.0;
    out.gamma = -a;
  } else if (p2 == 0.0) {
    out.alpha = bs / ds;
    out.beta = r2 / ds;
    out.gamma = -a;
  } else if (r2 == 0.0) {
    // Mirror u = b - x of the previous case.
    out.alpha = bs / (bs - cs);
    out.beta = p2 / (bs - cs);
    out.gamma = -b;
  } else if (r2 == p2) {
    out.gamma = -(c + d) / 2.0;
    out.beta = 4.0 * p2 * (p2 + q2) / (q2 * q2);
    out.alpha = out.beta + 1.0;
  } else {
    // With P = c d and Q = (b - c)(b - d) in shifted coordinates, every
    // quantity below is a sum of nonnegative terms, so nothing cancels.
    const double sp = std::sqrt(p2 * (p2 + q2));
    const double sq = std::sqrt((q2 + r2) * r2);
    const double s = sp + sq;
    const double cross = p2 * r2 + (p2 + q2) * (q2 + r2) + 2.0 * sp * sq;
    // The square is centred at c + t with 0 < t < d - c.
    const double t = p2 * q2 * (q2 + r2) * bs / (s * (sp * (q2 + r2) + p2 * sq));
    out.gamma = -(c + t);
    out.beta = (s * s) * cross / (bs * bs * q2 * q2);
    out.alpha = out.beta + 1.0;
  }
  return out;
}

}  // namespace gpo
