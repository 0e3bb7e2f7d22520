#pragma once

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "usaug/error.hpp"
#include "usaug/pipeline.hpp"
#include "usaug/random.hpp"
#include "usaug/solver.hpp"

namespace testutil {

namespace fs = std::filesystem;

inline fs::path env_path(const char* name) {
  const char* v = std::getenv(name);
  if (!v || !*v)
    throw std::runtime_error(std::string(name) + " is not set; run the tests through ctest");
  return fs::path(v);
}

inline fs::path fixtures_dir() { return env_path("USAUG_FIXTURES"); }
inline fs::path cli_path() { return env_path("USAUG_CLI"); }

class TempDir {
 public:
  TempDir() {
    const fs::path base = fs::temp_directory_path();
    std::random_device rd;
    for (int i = 0; i < 64; ++i) {
      fs::path candidate = base / ("usaug_test_" + std::to_string(rd()));
      std::error_code ec;
      if (fs::create_directory(candidate, ec)) {
        path_ = std::move(candidate);
        return;
      }
    }
    throw std::runtime_error("could not create a temp directory");
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

template <typename Fn>
usaug::ErrorCode error_code_of(Fn&& fn) {
  try {
    fn();
  } catch (const usaug::Error& e) {
    return e.code();
  }
  throw std::runtime_error("expected usaug::Error was not thrown");
}

inline std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

struct CliResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

inline CliResult run_cli(const std::string& args) {
  TempDir capture;
  const fs::path out_file = capture.path() / "stdout.txt";
  const fs::path err_file = capture.path() / "stderr.txt";
  const std::string cmd = cli_path().string() + " " + args + " >" + out_file.string() +
                          " 2>" + err_file.string();
  const int rc = std::system(cmd.c_str());
  CliResult result;
  if (rc == -1)
    result.exit_code = -1;
  else if (WIFEXITED(rc))
    result.exit_code = WEXITSTATUS(rc);
  else
    result.exit_code = -2;
  result.out = read_text(out_file);
  result.err = read_text(err_file);
  return result;
}

// ---- randomized inputs -----------------------------------------------------

inline usaug::GrayImage random_image(usaug::RandomStream& rng, int w, int h) {
  usaug::GrayImage img(w, h);
  for (double& v : img.data) v = rng.uniform_double(0.0, 1.0);
  return img;
}

// Arbitrary interior pixels; connectivity is deliberately not guaranteed.
inline usaug::RegionMask random_interior_region(usaug::RandomStream& rng, int w, int h,
                                                int max_pixels) {
  const int interior = (w - 2) * (h - 2);
  const int want =
      1 + static_cast<int>(rng.bounded(std::min(max_pixels, interior)));
  std::vector<int> pixels;
  pixels.reserve(interior);
  for (int y = 1; y < h - 1; ++y)
    for (int x = 1; x < w - 1; ++x) pixels.push_back(y * w + x);
  usaug::RegionMask mask(w, h);
  for (int i = 0; i < want; ++i) {
    const int j = i + static_cast<int>(rng.bounded(pixels.size() - i));
    std::swap(pixels[i], pixels[j]);
    mask.member[pixels[i]] = 1;
  }
  return mask;
}

// Connected blob grown by random frontier expansion, constrained to the given
// inclusive window (which must be interior to the image).
inline usaug::RegionMask random_connected_region(usaug::RandomStream& rng, int w, int h,
                                                 int target_pixels,
                                                 const usaug::Box& window) {
  usaug::RegionMask mask(w, h);
  const int sx = window.x0 + static_cast<int>(rng.bounded(window.width()));
  const int sy = window.y0 + static_cast<int>(rng.bounded(window.height()));
  mask.set(sx, sy, true);
  std::vector<std::pair<int, int>> frontier{{sx, sy}};
  int size = 1;
  constexpr int dx[4] = {0, -1, 1, 0};
  constexpr int dy[4] = {-1, 0, 0, 1};
  while (size < target_pixels && !frontier.empty()) {
    const size_t pick = rng.bounded(frontier.size());
    const auto [cx, cy] = frontier[pick];
    std::vector<std::pair<int, int>> options;
    for (int k = 0; k < 4; ++k) {
      const int nx = cx + dx[k], ny = cy + dy[k];
      if (nx >= window.x0 && nx <= window.x1 && ny >= window.y0 && ny <= window.y1 &&
          !mask.is_member(nx, ny))
        options.emplace_back(nx, ny);
    }
    if (options.empty()) {
      frontier[pick] = frontier.back();
      frontier.pop_back();
      continue;
    }
    const auto [nx, ny] = options[rng.bounded(options.size())];
    mask.set(nx, ny, true);
    frontier.emplace_back(nx, ny);
    ++size;
  }
  return mask;
}

inline usaug::GuidanceField random_guidance(usaug::RandomStream& rng,
                                            const usaug::RegionMask& mask, double lo,
                                            double hi) {
  usaug::GuidanceField g;
  g.width = mask.width;
  g.height = mask.height;
  g.div.resize(mask.count());
  for (double& v : g.div) v = rng.uniform_double(lo, hi);
  return g;
}

// ---- shared benchmark ------------------------------------------------------

// Bright disk (g = 0.9, radius 10) pasted into a dark 64x64 field (f* = 0.1),
// placed back at the disk's own crop position so it stays centered.
struct DiskBenchmark {
  usaug::GrayImage target;
  usaug::RoiPatch patch;
  usaug::Placement placement;
};

inline DiskBenchmark make_disk_benchmark() {
  DiskBenchmark b;
  usaug::GrayImage source(64, 64, 0.9);
  usaug::RegionMask mask(64, 64);
  for (int y = 0; y < 64; ++y)
    for (int x = 0; x < 64; ++x)
      if ((x - 32) * (x - 32) + (y - 32) * (y - 32) <= 100) mask.set(x, y, true);
  b.patch = usaug::extract_roi(source, mask);
  b.target = usaug::GrayImage(64, 64, 0.1);
  b.placement = usaug::Placement{b.patch.origin_x, b.patch.origin_y};
  return b;
}

// ---- output-tree comparison ------------------------------------------------

inline std::vector<fs::path> sorted_relative_files(const fs::path& root) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(root))
    if (entry.is_regular_file()) files.push_back(fs::relative(entry.path(), root));
  std::sort(files.begin(), files.end());
  return files;
}

inline bool trees_identical(const fs::path& a, const fs::path& b) {
  const auto fa = sorted_relative_files(a);
  const auto fb = sorted_relative_files(b);
  if (fa != fb) return false;
  for (const auto& rel : fa)
    if (read_text(a / rel) != read_text(b / rel)) return false;
  return true;
}

// ---- in-memory sink --------------------------------------------------------

class CollectSink : public usaug::SampleSink {
 public:
  void write(const usaug::AugmentedSample& sample, int sample_index) override {
    indices.push_back(sample_index);
    samples.push_back(sample);
  }
  std::vector<int> indices;
  std::vector<usaug::AugmentedSample> samples;
};

}  // namespace testutil
