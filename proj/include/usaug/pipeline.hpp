#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "usaug/image.hpp"
#include "usaug/random.hpp"
#include "usaug/solver.hpp"

namespace usaug {

struct TransformParams {
  double scale = 1.0;
  double rotation_deg = 0.0;
  bool flip_horizontal = false;
};

/// Target-image coordinates for the patch crop's top-left.
struct Placement {
  int dx = 0;
  int dy = 0;
};

enum class BlendMode { Seamless, Direct };
enum class OverlapPolicy { Reject, Occlude };

const char* to_string(BlendMode mode);
const char* to_string(OverlapPolicy policy);
BlendMode blend_mode_from_string(const std::string& s);
OverlapPolicy overlap_policy_from_string(const std::string& s);

struct AugmentConfig {
  double scale_lo = 0.8;
  double scale_hi = 1.25;
  double rotation_max_deg = 25.0;  // rotation drawn from [-max, +max]
  double flip_prob = 0.5;
  BlendMode mode = BlendMode::Seamless;
  OverlapPolicy overlap = OverlapPolicy::Reject;
  int max_retries = 64;
  SolverOptions solver;
  uint64_t master_seed = 0;
  int count = 1;  // requested output samples

  void validate() const;  // throws std::invalid_argument
};

/// Everything needed to regenerate one sample.
struct Provenance {
  std::string donor_id;
  std::string recipient_id;
  TransformParams transform;
  Placement placement;
  BlendMode mode = BlendMode::Seamless;
  uint64_t stream_seed = 0;
  bool converged = true;
};

/// Output image plus the full per-instance mask set. The pasted region is
/// always the last mask.
struct AugmentedSample {
  GrayImage image;
  std::vector<RegionMask> masks;
  Provenance provenance;
  SolveReport report;
};

struct DatasetImage {
  std::string id;
  GrayImage image;
  std::vector<RegionMask> instance_masks;
};
using Dataset = std::vector<DatasetImage>;

class SampleSink {
 public:
  virtual ~SampleSink() = default;
  virtual void write(const AugmentedSample& sample, int sample_index) = 0;
};

struct AugmentSummary {
  int requested = 0;
  int written = 0;
  std::map<std::string, int> skipped;  // reason -> count
  double mean_seam_score = 0.0;        // over written samples

  int total_skipped() const {
    int n = 0;
    for (const auto& [_, c] : skipped) n += c;
    return n;
  }
};

/// Crop the instance out of the source: mask bounding box dilated by one
/// pixel. Where the dilation leaves the image, missing rows/columns are
/// filled by edge replication.
RoiPatch extract_roi(const GrayImage& source, const RegionMask& instance_mask);

/// Scale / rotate / flip the patch about its center. Intensities are
/// resampled bilinearly; the mask is resampled then re-thresholded at 0.5 and
/// the result re-cropped to the new mask's 1-pixel-dilated bounding box.
/// Identity parameters and pure horizontal flips are exact.
RoiPatch transform_roi(const RoiPatch& patch, const TransformParams& params);

/// Uniform random placement keeping the shifted mask strictly interior. Under
/// the reject policy a draw that overlaps an existing instance is retried, up
/// to max_retries times.
Placement sample_placement(RandomStream& rng, const GrayImage& target,
                           const RoiPatch& patch,
                           const std::vector<RegionMask>& existing_masks,
                           OverlapPolicy policy, int max_retries);

/// Paste the patch into the target and maintain the instance masks: the
/// shifted patch mask is appended, and under the occlude policy it is
/// subtracted from any original it covers.
AugmentedSample paste(const GrayImage& target,
                      const std::vector<RegionMask>& target_masks,
                      const RoiPatch& patch, const Placement& placement,
                      BlendMode mode, OverlapPolicy policy,
                      const SolverOptions& solver);

/// Dataset-level loop: for each requested sample pick a random donor instance
/// and a random (distinct when possible) recipient image, then run
/// extract -> transform -> place -> paste. Failed placements are skipped and
/// counted. Output is a pure function of (dataset, config).
AugmentSummary augment_dataset(const Dataset& dataset, const AugmentConfig& config,
                               SampleSink& sink);

/// Mean absolute intensity difference over all 4-neighbor pairs that cross
/// the region boundary. Zero means the paste is invisible at the seam.
double seam_score(const GrayImage& image, const RegionMask& mask);

}  // namespace usaug
