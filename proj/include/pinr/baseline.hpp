#pragma once

#include <cstddef>
#include <vector>

#include "pinr/image.hpp"
#include "pinr/trainer.hpp"

namespace pinr {

struct PoissonOptions {
  double tol = 1e-10;
  std::size_t max_iter = 20000;
};

struct PoissonResult {
  ImageGrid image;
  // Per channel: relative residual norm before the first and after every CG step.
  std::vector<std::vector<double>> residuals;
  std::size_t iterations = 0;  // largest over channels
};

// Forward differences (u(i, j+1) - u(i, j)) / hx and (u(i+1, j) - u(i, j)) / hy,
// wrapping at the far edge when `wrap` and zero there otherwise.
GuidanceField forward_gradient(const ImageGrid& img, bool wrap);

// Torus Poisson problem per channel: L u = div U with the periodic 5-point
// Laplacian L and div the backward-difference adjoint of forward_gradient.
// The right-hand side is projected to zero mean and the solution mean is set
// to mean[c]. Grid spacing comes from `domain`. Throws ConvergenceError when
// the relative residual stays above tol after max_iter steps.
PoissonResult solve_torus(const GuidanceField& u, const std::vector<double>& mean,
                          const PoissonOptions& opts = {}, const Domain& domain = {});

// Border-averaging baseline: opposite edge pixels are replaced by their
// average (the four corners by the corner average) and held fixed, and the
// interior solves L u = L img with the non-wrapping 5-point Laplacian.
PoissonResult solve_average_border(const ImageGrid& img, const PoissonOptions& opts = {});

}  // namespace pinr
