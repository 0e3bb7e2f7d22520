#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "usaug/image.hpp"
#include "usaug/pipeline.hpp"

namespace usaug {

struct ManifestEntry {
  std::string id;
  std::string image;               // path relative to the manifest file
  std::vector<std::string> masks;  // one file per instance
};

struct DatasetManifest {
  int version = 1;
  std::vector<ManifestEntry> entries;
  std::filesystem::path base_dir;  // directory of the manifest file

  std::filesystem::path resolve(const std::string& rel) const {
    return base_dir / rel;
  }
};

struct OutputRecord {
  std::string id;
  std::string image;
  std::vector<std::string> masks;
  Provenance provenance;
};

/// round(v * 255), half away from zero, after clamping to [0,1].
uint8_t quantize8(double v);

/// 8-bit grayscale PNG or PGM, mapped to [0,1] by value / 255.
GrayImage load_image(const std::filesystem::path& path);

/// 8-bit grayscale file; format chosen by extension (.pgm writes PGM,
/// anything else PNG).
void save_image(const GrayImage& image, const std::filesystem::path& path);

/// Binary mask from an 8-bit grayscale file: pixel > 127 means member.
RegionMask load_mask(const std::filesystem::path& path, int expected_width,
                     int expected_height);

/// (width, height) from the file header, without decoding pixel data.
std::pair<int, int> probe_image_size(const std::filesystem::path& path);

/// Parses and eagerly validates: unique ids, every referenced file exists,
/// every mask has its image's dimensions. Any violation aborts the load.
DatasetManifest load_manifest(const std::filesystem::path& path);

/// Decode every image and instance mask named by the manifest.
Dataset load_dataset(const DatasetManifest& manifest);

void write_output_manifest(const std::vector<OutputRecord>& records,
                           const AugmentConfig& config,
                           const std::filesystem::path& path);

/// Writes sample images and masks under a directory and collects one
/// OutputRecord per sample for the output manifest.
class DirectorySink : public SampleSink {
 public:
  explicit DirectorySink(std::filesystem::path out_dir);
  void write(const AugmentedSample& sample, int sample_index) override;
  const std::vector<OutputRecord>& records() const { return records_; }

 private:
  std::filesystem::path out_dir_;
  std::vector<OutputRecord> records_;
};

}  // namespace usaug
