#include "seqmeas/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace seqmeas {

double simpson(const std::function<double(double)>& f, double a, double b,
               int panels) {
  if (panels < 1) throw std::invalid_argument("simpson: panels must be >= 1");
  const double h = (b - a) / panels;
  double sum = 0.0;
  for (int i = 0; i < panels; ++i) {
    const double x0 = a + i * h;
    const double x1 = x0 + 0.5 * h;
    const double x2 = a + (i + 1) * h;
    sum += (h / 6.0) * (f(x0) + 4.0 * f(x1) + f(x2));
  }
  return sum;
}

namespace {

double adaptive_step(const std::function<double(double)>& f, double a,
                     double b, double fa, double fm, double fb, double whole,
                     double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double refined = left + right;
  if (depth <= 0 || std::abs(refined - whole) <= 15.0 * tol) {
    return refined + (refined - whole) / 15.0;
  }
  return adaptive_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double rel_tol, int max_depth) {
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  const double scale = std::max(std::abs(whole), 1e-30);
  return adaptive_step(f, a, b, fa, fm, fb, whole, rel_tol * scale, max_depth);
}

}  // namespace seqmeas
