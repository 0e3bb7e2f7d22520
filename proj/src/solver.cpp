#include "usaug/solver.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "usaug/error.hpp"

namespace usaug {

namespace {

constexpr int kMaxIterCap = 100000;

// 4-neighborhood in ascending linear-index order: up, left, right, down.
constexpr int kDx[4] = {0, -1, 1, 0};
constexpr int kDy[4] = {-1, 0, 0, 1};

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

void spmv(const PoissonSystem& sys, const std::vector<double>& x,
          std::vector<double>& y) {
  const int n = sys.n();
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int32_t k = sys.row_ptr[i]; k < sys.row_ptr[i + 1]; ++k)
      acc += sys.val[k] * x[sys.col[k]];
    y[i] = acc;
  }
}

// b - A x
std::vector<double> residual_vec(const PoissonSystem& sys,
                                 const std::vector<double>& x) {
  std::vector<double> r(sys.n());
  spmv(sys, x, r);
  for (int i = 0; i < sys.n(); ++i) r[i] = sys.rhs[i] - r[i];
  return r;
}

}  // namespace

int default_max_iter(int unknowns) {
  long n = 10L * unknowns;
  return static_cast<int>(std::min<long>(n, kMaxIterCap));
}

RegionIndex index_region(const RegionMask& mask) {
  RegionIndex idx;
  idx.width = mask.width;
  idx.height = mask.height;
  idx.unknown_of_pixel.assign(static_cast<size_t>(mask.width) * mask.height, -1);
  for (int y = 0; y < mask.height; ++y) {
    for (int x = 0; x < mask.width; ++x) {
      if (!mask.is_member(x, y)) continue;
      if (x == 0 || x == mask.width - 1 || y == 0 || y == mask.height - 1)
        fail(ErrorCode::BorderViolation,
             "region pixel (" + std::to_string(x) + "," + std::to_string(y) +
                 ") touches the image border");
      idx.unknown_of_pixel[static_cast<size_t>(y) * mask.width + x] = idx.count;
      idx.pixel_of_unknown.push_back(y * mask.width + x);
      ++idx.count;
    }
  }
  if (idx.count == 0) fail(ErrorCode::EmptyRegion, "region has no member pixels");
  return idx;
}

GuidanceField compute_divergence(const ScalarField& g, const RegionMask& mask) {
  if (g.width != mask.width || g.height != mask.height)
    fail(ErrorCode::DimensionMismatch, "guidance samples do not match the mask size");
  GuidanceField field;
  field.width = mask.width;
  field.height = mask.height;
  for (int y = 0; y < mask.height; ++y) {
    for (int x = 0; x < mask.width; ++x) {
      if (!mask.is_member(x, y)) continue;
      if (!g.has(x, y))
        fail(ErrorCode::MissingNeighborValue,
             "g undefined at region pixel (" + std::to_string(x) + "," +
                 std::to_string(y) + ")");
      double d = 4.0 * g.at(x, y);
      for (int k = 0; k < 4; ++k) {
        int qx = x + kDx[k], qy = y + kDy[k];
        if (!g.has(qx, qy))
          fail(ErrorCode::MissingNeighborValue,
               "g undefined at neighbor (" + std::to_string(qx) + "," +
                   std::to_string(qy) + ")");
        d -= g.at(qx, qy);
      }
      field.div.push_back(d);
    }
  }
  return field;
}

PoissonSystem assemble_system(const GrayImage& target, const RegionMask& mask,
                              const GuidanceField& guidance) {
  if (target.width != mask.width || target.height != mask.height)
    fail(ErrorCode::DimensionMismatch, "target and mask sizes differ");
  if (guidance.width != mask.width || guidance.height != mask.height)
    fail(ErrorCode::DimensionMismatch, "guidance and mask sizes differ");

  PoissonSystem sys;
  sys.index = index_region(mask);
  const int n = sys.index.count;
  if (static_cast<int>(guidance.div.size()) != n)
    fail(ErrorCode::DimensionMismatch,
         "guidance has " + std::to_string(guidance.div.size()) + " values for " +
             std::to_string(n) + " region pixels");

  sys.row_ptr.reserve(n + 1);
  sys.rhs.resize(n);
  sys.row_ptr.push_back(0);
  for (int i = 0; i < n; ++i) {
    const int pixel = sys.index.pixel_of_unknown[i];
    const int x = pixel % mask.width;
    const int y = pixel / mask.width;
    double rhs = guidance.div[i];
    // Neighbors in ascending column order: up, left, (diag), right, down.
    for (int k = 0; k < 2; ++k) {
      int qx = x + kDx[k], qy = y + kDy[k];
      if (mask.is_member(qx, qy)) {
        sys.col.push_back(sys.index.unknown_of_pixel[static_cast<size_t>(qy) * mask.width + qx]);
        sys.val.push_back(-1.0);
      } else {
        rhs += target.at(qx, qy);
      }
    }
    sys.col.push_back(i);
    sys.val.push_back(4.0);
    for (int k = 2; k < 4; ++k) {
      int qx = x + kDx[k], qy = y + kDy[k];
      if (mask.is_member(qx, qy)) {
        sys.col.push_back(sys.index.unknown_of_pixel[static_cast<size_t>(qy) * mask.width + qx]);
        sys.val.push_back(-1.0);
      } else {
        rhs += target.at(qx, qy);
      }
    }
    sys.rhs[i] = rhs;
    sys.row_ptr.push_back(static_cast<int32_t>(sys.col.size()));
  }
  return sys;
}

std::pair<std::vector<double>, SolveReport> solve(const PoissonSystem& sys,
                                                  const SolverOptions& options) {
  if (options.tol <= 0.0) throw std::invalid_argument("solver tol must be positive");
  const int n = sys.n();
  std::vector<double> x(n, 0.0);
  SolveReport report;

  const double bnorm = norm2(sys.rhs);
  if (bnorm == 0.0) {
    // The zero vector is the exact solution.
    report.converged = true;
    return {std::move(x), report};
  }
  const int max_iter = options.max_iter > 0 ? options.max_iter : default_max_iter(n);

  std::vector<double> diag(n);
  for (int i = 0; i < n; ++i)
    for (int32_t k = sys.row_ptr[i]; k < sys.row_ptr[i + 1]; ++k)
      if (sys.col[k] == i) diag[i] = sys.val[k];

  auto precondition = [&](const std::vector<double>& r, std::vector<double>& z) {
    for (int i = 0; i < n; ++i) z[i] = r[i] / diag[i];
  };

  std::vector<double> r = sys.rhs;  // x = 0
  std::vector<double> z(n), p(n), ap(n);
  precondition(r, z);
  p = z;
  double rz = dot(r, z);

  int iter = 0;
  bool converged = false;
  while (iter < max_iter) {
    spmv(sys, p, ap);
    const double pap = dot(p, ap);
    if (pap <= 0.0) break;  // breakdown; report best iterate
    const double alpha = rz / pap;
    for (int i = 0; i < n; ++i) x[i] += alpha * p[i];
    for (int i = 0; i < n; ++i) r[i] -= alpha * ap[i];
    ++iter;
    if (norm2(r) / bnorm <= options.tol) {
      // Confirm with the true residual; restart if the recurrence drifted.
      std::vector<double> rt = residual_vec(sys, x);
      if (norm2(rt) / bnorm <= options.tol) {
        converged = true;
        break;
      }
      r = std::move(rt);
      precondition(r, z);
      p = z;
      rz = dot(r, z);
      continue;
    }
    precondition(r, z);
    const double rz_next = dot(r, z);
    const double beta = rz_next / rz;
    for (int i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    rz = rz_next;
  }

  report.iterations = iter;
  report.residual = norm2(residual_vec(sys, x)) / bnorm;
  report.converged = converged && report.residual <= options.tol;
  return {std::move(x), report};
}

std::pair<GrayImage, SolveReport> harmonic_fill(const GrayImage& target,
                                                const RegionMask& mask,
                                                const SolverOptions& options) {
  GuidanceField zero;
  zero.width = mask.width;
  zero.height = mask.height;
  zero.div.assign(mask.count(), 0.0);
  PoissonSystem sys = assemble_system(target, mask, zero);
  auto [x, report] = solve(sys, options);
  GrayImage out = target;
  for (int i = 0; i < sys.n(); ++i)
    out.data[sys.index.pixel_of_unknown[i]] = clamp01(x[i]);
  return {std::move(out), report};
}

RegionMask paste_region(const RoiPatch& patch, int dx, int dy, int target_width,
                        int target_height) {
  RegionMask region(target_width, target_height);
  for (int y = 0; y < patch.mask.height; ++y) {
    for (int x = 0; x < patch.mask.width; ++x) {
      if (!patch.mask.is_member(x, y)) continue;
      const int tx = x + dx, ty = y + dy;
      if (tx < 1 || tx > target_width - 2 || ty < 1 || ty > target_height - 2)
        fail(ErrorCode::PlacementOutOfBounds,
             "pasted pixel (" + std::to_string(tx) + "," + std::to_string(ty) +
                 ") is not strictly interior to the " +
                 std::to_string(target_width) + "x" + std::to_string(target_height) +
                 " target");
      region.set(tx, ty, true);
    }
  }
  return region;
}

std::pair<GrayImage, SolveReport> seamless_clone(const GrayImage& target,
                                                 const RoiPatch& patch, int dx, int dy,
                                                 const SolverOptions& options) {
  if (patch.mask.count() == 0) fail(ErrorCode::EmptyRegion, "patch mask is empty");
  RegionMask region = paste_region(patch, dx, dy, target.width, target.height);

  // Guidance samples: patch intensities laid down at their target positions.
  // The crop's 1-pixel dilation guarantees every region pixel and all of its
  // neighbors are covered.
  ScalarField g(target.width, target.height);
  for (int y = 0; y < patch.values.height; ++y) {
    for (int x = 0; x < patch.values.width; ++x) {
      const int tx = x + dx, ty = y + dy;
      if (tx >= 0 && tx < target.width && ty >= 0 && ty < target.height)
        g.set(tx, ty, patch.values.at(x, y));
    }
  }

  GuidanceField guidance = compute_divergence(g, region);
  PoissonSystem sys = assemble_system(target, region, guidance);
  auto [x, report] = solve(sys, options);
  GrayImage out = target;
  for (int i = 0; i < sys.n(); ++i)
    out.data[sys.index.pixel_of_unknown[i]] = clamp01(x[i]);
  return {std::move(out), report};
}

}  // namespace usaug
