#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "usaug/image.hpp"

namespace usaug {

/// Bijection between region pixels and unknown indices, row-major over Omega.
struct RegionIndex {
  int width = 0;
  int height = 0;
  int count = 0;
  std::vector<int32_t> unknown_of_pixel;  // -1 outside Omega
  std::vector<int32_t> pixel_of_unknown;  // linear pixel index per unknown
};

/// Divergence of the guidance field: one value per Omega pixel, in the same
/// row-major order as RegionIndex. div(p) = 4 g(p) - sum of g over the four
/// axis neighbors of p.
struct GuidanceField {
  int width = 0;
  int height = 0;
  std::vector<double> div;
};

/// 5-point Laplacian system over Omega in CSR form. Diagonal entries are 4,
/// off-diagonals -1 for each 4-neighbor inside Omega; Dirichlet boundary data
/// and the guidance divergence are folded into the right-hand side. Symmetric
/// positive definite because Omega never touches the image border.
struct PoissonSystem {
  RegionIndex index;
  std::vector<int32_t> row_ptr;  // size n+1
  std::vector<int32_t> col;      // ascending within each row
  std::vector<double> val;
  std::vector<double> rhs;

  int n() const { return index.count; }
};

struct SolveReport {
  int iterations = 0;
  double residual = 0.0;  // relative: ||b - A x|| / ||b||
  bool converged = false;
};

struct SolverOptions {
  double tol = 1e-6;  // relative residual target
  int max_iter = 0;   // 0 = 10 * unknowns, capped at 100000
};

int default_max_iter(int unknowns);

RegionIndex index_region(const RegionMask& mask);

GuidanceField compute_divergence(const ScalarField& g, const RegionMask& mask);

PoissonSystem assemble_system(const GrayImage& target, const RegionMask& mask,
                              const GuidanceField& guidance);

/// Preconditioned conjugate gradient (Jacobi). Never throws on slow
/// convergence: the best iterate comes back with report.converged == false.
std::pair<std::vector<double>, SolveReport> solve(const PoissonSystem& system,
                                                  const SolverOptions& options = {});

/// Membrane interpolation over Omega (zero guidance): the smoothest fill
/// consistent with the surrounding pixels. Output equals the target outside
/// Omega exactly; inside, values are clamped to [0,1].
std::pair<GrayImage, SolveReport> harmonic_fill(const GrayImage& target,
                                                const RegionMask& mask,
                                                const SolverOptions& options = {});

/// The patch mask shifted into target coordinates. Throws PlacementOutOfBounds
/// if any member pixel leaves the strict interior of the target.
RegionMask paste_region(const RoiPatch& patch, int dx, int dy, int target_width,
                        int target_height);

/// Gradient-domain paste: interpolates the patch content into the target so
/// the result matches the target on the region boundary and follows the patch
/// gradients inside. (dx, dy) places the patch crop's top-left in target
/// coordinates. Pixels outside the region are copied from the target exactly.
std::pair<GrayImage, SolveReport> seamless_clone(const GrayImage& target,
                                                 const RoiPatch& patch, int dx, int dy,
                                                 const SolverOptions& options = {});

}  // namespace usaug
