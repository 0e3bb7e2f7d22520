#include "usaug/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "usaug/error.hpp"

namespace usaug {

namespace {

// Bilinear with edge replication.
double sample_clamped(const GrayImage& img, double sx, double sy) {
  sx = std::clamp(sx, 0.0, static_cast<double>(img.width - 1));
  sy = std::clamp(sy, 0.0, static_cast<double>(img.height - 1));
  int x0 = std::min(static_cast<int>(std::floor(sx)), img.width - 2);
  int y0 = std::min(static_cast<int>(std::floor(sy)), img.height - 2);
  x0 = std::max(x0, 0);
  y0 = std::max(y0, 0);
  const int x1 = std::min(x0 + 1, img.width - 1);
  const int y1 = std::min(y0 + 1, img.height - 1);
  const double tx = sx - x0, ty = sy - y0;
  return (1.0 - tx) * (1.0 - ty) * img.at(x0, y0) + tx * (1.0 - ty) * img.at(x1, y0) +
         (1.0 - tx) * ty * img.at(x0, y1) + tx * ty * img.at(x1, y1);
}

// Bilinear on the 0/1 membership indicator; outside the crop counts as 0.
double sample_mask(const RegionMask& mask, double sx, double sy) {
  const int x0 = static_cast<int>(std::floor(sx));
  const int y0 = static_cast<int>(std::floor(sy));
  auto ind = [&](int x, int y) -> double {
    return (mask.in_bounds(x, y) && mask.is_member(x, y)) ? 1.0 : 0.0;
  };
  const double tx = sx - x0, ty = sy - y0;
  return (1.0 - tx) * (1.0 - ty) * ind(x0, y0) + tx * (1.0 - ty) * ind(x0 + 1, y0) +
         (1.0 - tx) * ty * ind(x0, y0 + 1) + tx * ty * ind(x0 + 1, y0 + 1);
}

bool masks_overlap(const RegionMask& a, const RegionMask& b) {
  for (size_t i = 0; i < a.member.size(); ++i)
    if (a.member[i] && b.member[i]) return true;
  return false;
}

}  // namespace

const char* to_string(BlendMode mode) {
  return mode == BlendMode::Seamless ? "seamless" : "direct";
}

const char* to_string(OverlapPolicy policy) {
  return policy == OverlapPolicy::Reject ? "reject" : "occlude";
}

BlendMode blend_mode_from_string(const std::string& s) {
  if (s == "seamless") return BlendMode::Seamless;
  if (s == "direct") return BlendMode::Direct;
  throw std::invalid_argument("unknown blend mode: " + s);
}

OverlapPolicy overlap_policy_from_string(const std::string& s) {
  if (s == "reject") return OverlapPolicy::Reject;
  if (s == "occlude") return OverlapPolicy::Occlude;
  throw std::invalid_argument("unknown overlap policy: " + s);
}

void AugmentConfig::validate() const {
  if (!(scale_lo > 0.0) || !(scale_lo <= scale_hi))
    throw std::invalid_argument("scale range must satisfy 0 < lo <= hi");
  if (rotation_max_deg < 0.0)
    throw std::invalid_argument("rotation range must be non-negative");
  if (flip_prob < 0.0 || flip_prob > 1.0)
    throw std::invalid_argument("flip probability must be in [0,1]");
  if (max_retries < 1) throw std::invalid_argument("retries must be >= 1");
  if (count < 0) throw std::invalid_argument("count must be >= 0");
  if (solver.tol <= 0.0) throw std::invalid_argument("solver tol must be positive");
}

RoiPatch extract_roi(const GrayImage& source, const RegionMask& instance_mask) {
  if (source.width != instance_mask.width || source.height != instance_mask.height)
    fail(ErrorCode::DimensionMismatch, "instance mask does not match the source size");
  auto bb = instance_mask.bounding_box();
  if (!bb) fail(ErrorCode::EmptyMask, "instance mask has no member pixels");

  RoiPatch patch;
  patch.origin_x = bb->x0 - 1;
  patch.origin_y = bb->y0 - 1;
  const int w = bb->width() + 2;
  const int h = bb->height() + 2;
  patch.values = GrayImage(w, h);
  patch.mask = RegionMask(w, h);
  for (int y = 0; y < h; ++y) {
    const int sy = std::clamp(patch.origin_y + y, 0, source.height - 1);
    for (int x = 0; x < w; ++x) {
      const int sx = std::clamp(patch.origin_x + x, 0, source.width - 1);
      patch.values.at(x, y) = source.at(sx, sy);
    }
  }
  for (int y = bb->y0; y <= bb->y1; ++y)
    for (int x = bb->x0; x <= bb->x1; ++x)
      if (instance_mask.is_member(x, y))
        patch.mask.set(x - patch.origin_x, y - patch.origin_y, true);
  return patch;
}

RoiPatch transform_roi(const RoiPatch& patch, const TransformParams& params) {
  if (params.scale <= 0.0) throw std::invalid_argument("scale must be positive");
  if (patch.mask.count() == 0) fail(ErrorCode::EmptyMask, "patch mask has no member pixels");

  const int w = patch.values.width;
  const int h = patch.values.height;
  const double rad = params.rotation_deg * std::numbers::pi / 180.0;
  const double c = std::cos(rad), s = std::sin(rad);
  const double fx = params.flip_horizontal ? -1.0 : 1.0;
  const double sc = params.scale;
  // Forward map about the crop center: dst = R(theta) * (sc I) * diag(fx, 1) * (src - center).
  const double m00 = c * sc * fx, m01 = -s * sc;
  const double m10 = s * sc * fx, m11 = c * sc;
  const double cx = (w - 1) / 2.0, cy = (h - 1) / 2.0;

  double mnx = std::numeric_limits<double>::infinity(), mny = mnx;
  double mxx = -mnx, mxy = -mnx;
  const double corners[4][2] = {{0, 0},
                                {static_cast<double>(w - 1), 0},
                                {0, static_cast<double>(h - 1)},
                                {static_cast<double>(w - 1), static_cast<double>(h - 1)}};
  for (const auto& p : corners) {
    const double px = p[0] - cx, py = p[1] - cy;
    const double qx = m00 * px + m01 * py;
    const double qy = m10 * px + m11 * py;
    mnx = std::min(mnx, qx);
    mxx = std::max(mxx, qx);
    mny = std::min(mny, qy);
    mxy = std::max(mxy, qy);
  }
  const int ow = static_cast<int>(std::ceil(mxx - mnx - 1e-9)) + 1;
  const int oh = static_cast<int>(std::ceil(mxy - mny - 1e-9)) + 1;

  const double det = m00 * m11 - m01 * m10;
  const double i00 = m11 / det, i01 = -m01 / det;
  const double i10 = -m10 / det, i11 = m00 / det;

  GrayImage vals(ow, oh);
  RegionMask msk(ow, oh);
  for (int j = 0; j < oh; ++j) {
    for (int i = 0; i < ow; ++i) {
      const double qx = mnx + i, qy = mny + j;
      const double sx = i00 * qx + i01 * qy + cx;
      const double sy = i10 * qx + i11 * qy + cy;
      vals.at(i, j) = sample_clamped(patch.values, sx, sy);
      msk.set(i, j, sample_mask(patch.mask, sx, sy) >= 0.5);
    }
  }

  auto bb = msk.bounding_box();
  if (!bb)
    fail(ErrorCode::DegenerateTransform,
         "transform left no mask pixels (scale " + std::to_string(params.scale) + ")");

  // Re-crop to the new mask's 1-pixel-dilated bounding box; rows/columns that
  // fall outside the resampled raster replicate the raster's edge values.
  const Box crop{bb->x0 - 1, bb->y0 - 1, bb->x1 + 1, bb->y1 + 1};
  RoiPatch out;
  out.values = GrayImage(crop.width(), crop.height());
  out.mask = RegionMask(crop.width(), crop.height());
  for (int y = 0; y < crop.height(); ++y) {
    for (int x = 0; x < crop.width(); ++x) {
      const int rx = crop.x0 + x, ry = crop.y0 + y;
      out.values.at(x, y) =
          vals.at(std::clamp(rx, 0, ow - 1), std::clamp(ry, 0, oh - 1));
      out.mask.set(x, y, msk.in_bounds(rx, ry) && msk.is_member(rx, ry));
    }
  }
  out.origin_x = patch.origin_x;
  out.origin_y = patch.origin_y;
  return out;
}

Placement sample_placement(RandomStream& rng, const GrayImage& target,
                           const RoiPatch& patch,
                           const std::vector<RegionMask>& existing_masks,
                           OverlapPolicy policy, int max_retries) {
  if (max_retries < 1) throw std::invalid_argument("retries must be >= 1");
  auto bb = patch.mask.bounding_box();
  if (!bb) fail(ErrorCode::EmptyMask, "patch mask has no member pixels");

  // Offsets for which every shifted member stays strictly interior.
  const int dx_min = 1 - bb->x0;
  const int dx_max = (target.width - 2) - bb->x1;
  const int dy_min = 1 - bb->y0;
  const int dy_max = (target.height - 2) - bb->y1;
  if (dx_min > dx_max || dy_min > dy_max)
    fail(ErrorCode::PatchTooLarge,
         "patch does not fit inside the " + std::to_string(target.width) + "x" +
             std::to_string(target.height) + " target with a 1-pixel margin");

  for (int attempt = 0; attempt < max_retries; ++attempt) {
    Placement p{rng.uniform_int(dx_min, dx_max), rng.uniform_int(dy_min, dy_max)};
    if (policy == OverlapPolicy::Occlude) return p;
    RegionMask shifted = paste_region(patch, p.dx, p.dy, target.width, target.height);
    bool collides = false;
    for (const auto& m : existing_masks)
      if (masks_overlap(shifted, m)) {
        collides = true;
        break;
      }
    if (!collides) return p;
  }
  fail(ErrorCode::NoValidPlacement,
       "no overlap-free placement found in " + std::to_string(max_retries) + " tries");
}

AugmentedSample paste(const GrayImage& target,
                      const std::vector<RegionMask>& target_masks,
                      const RoiPatch& patch, const Placement& placement,
                      BlendMode mode, OverlapPolicy policy,
                      const SolverOptions& solver) {
  for (const auto& m : target_masks)
    if (m.width != target.width || m.height != target.height)
      fail(ErrorCode::DimensionMismatch, "instance mask does not match the target size");

  RegionMask region = paste_region(patch, placement.dx, placement.dy, target.width,
                                   target.height);

  AugmentedSample sample;
  for (const auto& m : target_masks) {
    if (masks_overlap(region, m)) {
      if (policy == OverlapPolicy::Reject)
        fail(ErrorCode::OverlapViolation,
             "pasted region overlaps an existing instance under the reject policy");
      RegionMask occluded = m;
      for (size_t i = 0; i < occluded.member.size(); ++i)
        if (region.member[i]) occluded.member[i] = 0;
      sample.masks.push_back(std::move(occluded));
    } else {
      sample.masks.push_back(m);
    }
  }

  if (mode == BlendMode::Direct) {
    sample.image = target;
    for (int y = 0; y < patch.mask.height; ++y)
      for (int x = 0; x < patch.mask.width; ++x)
        if (patch.mask.is_member(x, y))
          sample.image.at(x + placement.dx, y + placement.dy) = patch.values.at(x, y);
    sample.report = SolveReport{0, 0.0, true};
  } else {
    auto [img, report] = seamless_clone(target, patch, placement.dx, placement.dy, solver);
    sample.image = std::move(img);
    sample.report = report;
  }

  sample.masks.push_back(std::move(region));
  sample.provenance.placement = placement;
  sample.provenance.mode = mode;
  sample.provenance.converged = sample.report.converged;
  return sample;
}

AugmentSummary augment_dataset(const Dataset& dataset, const AugmentConfig& config,
                               SampleSink& sink) {
  config.validate();
  std::vector<std::pair<int, int>> donors;  // (image index, mask index)
  for (int i = 0; i < static_cast<int>(dataset.size()); ++i)
    for (int k = 0; k < static_cast<int>(dataset[i].instance_masks.size()); ++k)
      donors.emplace_back(i, k);
  if (donors.empty())
    fail(ErrorCode::NoDonorInstances, "dataset has no instance masks to copy from");

  AugmentSummary summary;
  summary.requested = config.count;
  double seam_sum = 0.0;

  for (int index = 0; index < config.count; ++index) {
    // Frozen draw order per sample: donor, recipient, scale, rotation, flip,
    // then placement retries.
    const uint64_t seed = RandomStream::derive_seed(config.master_seed, index);
    RandomStream rng(seed);
    const auto [di, dk] = donors[rng.bounded(donors.size())];
    int ri = di;
    if (dataset.size() >= 2) {
      const int r = static_cast<int>(rng.bounded(dataset.size() - 1));
      ri = r >= di ? r + 1 : r;
    }
    TransformParams tp;
    tp.scale = rng.uniform_double(config.scale_lo, config.scale_hi);
    tp.rotation_deg =
        rng.uniform_double(-config.rotation_max_deg, config.rotation_max_deg);
    tp.flip_horizontal = rng.bernoulli(config.flip_prob);

    try {
      RoiPatch patch = extract_roi(dataset[di].image, dataset[di].instance_masks[dk]);
      patch = transform_roi(patch, tp);
      const Placement placement =
          sample_placement(rng, dataset[ri].image, patch, dataset[ri].instance_masks,
                           config.overlap, config.max_retries);
      AugmentedSample sample =
          paste(dataset[ri].image, dataset[ri].instance_masks, patch, placement,
                config.mode, config.overlap, config.solver);
      sample.provenance.donor_id = dataset[di].id;
      sample.provenance.recipient_id = dataset[ri].id;
      sample.provenance.transform = tp;
      sample.provenance.stream_seed = seed;
      seam_sum += seam_score(sample.image, sample.masks.back());
      sink.write(sample, index);
      ++summary.written;
    } catch (const Error& e) {
      switch (e.code()) {
        case ErrorCode::EmptyMask:
          ++summary.skipped["empty_mask"];
          break;
        case ErrorCode::DegenerateTransform:
          ++summary.skipped["degenerate_transform"];
          break;
        case ErrorCode::PatchTooLarge:
          ++summary.skipped["patch_too_large"];
          break;
        case ErrorCode::NoValidPlacement:
          ++summary.skipped["no_valid_placement"];
          break;
        default:
          throw;
      }
    }
  }

  summary.mean_seam_score = summary.written > 0 ? seam_sum / summary.written : 0.0;
  return summary;
}

double seam_score(const GrayImage& image, const RegionMask& mask) {
  if (image.width != mask.width || image.height != mask.height)
    fail(ErrorCode::DimensionMismatch, "mask does not match the image size");
  constexpr int dx[4] = {0, -1, 1, 0};
  constexpr int dy[4] = {-1, 0, 0, 1};
  long pairs = 0;
  double sum = 0.0;
  bool any_member = false;
  for (int y = 0; y < mask.height; ++y) {
    for (int x = 0; x < mask.width; ++x) {
      if (!mask.is_member(x, y)) continue;
      any_member = true;
      for (int k = 0; k < 4; ++k) {
        const int qx = x + dx[k], qy = y + dy[k];
        if (!mask.in_bounds(qx, qy))
          fail(ErrorCode::BorderViolation,
               "region pixel (" + std::to_string(x) + "," + std::to_string(y) +
                   ") touches the image border");
        if (!mask.is_member(qx, qy)) {
          sum += std::abs(image.at(x, y) - image.at(qx, qy));
          ++pairs;
        }
      }
    }
  }
  if (!any_member) fail(ErrorCode::EmptyRegion, "mask has no member pixels");
  return pairs > 0 ? sum / pairs : 0.0;
}

}  // namespace usaug
