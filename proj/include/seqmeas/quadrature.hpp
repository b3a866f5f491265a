#pragma once

#include <functional>

namespace seqmeas {

/// Composite Simpson rule with a fixed panel count.
double simpson(const std::function<double(double)>& f, double a, double b,
               int panels);

/// Adaptive Simpson with relative tolerance (falls back to absolute near 0).
double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double rel_tol = 1e-10, int max_depth = 40);

}  // namespace seqmeas
