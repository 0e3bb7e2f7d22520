// usaug: copy-paste augmentation for grayscale images with gradient-domain
// (Poisson) blending. Subcommands: blend, fill, augment, seam.
//
// Exit codes: 0 success, 1 I/O or file-format failure, 2 invalid input,
// 3 solver did not converge (output still written), 4 augmentation run wrote
// zero samples. Standard output carries exactly one JSON line per command;
// diagnostics go to standard error.

#include <filesystem>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "usaug/dataset_io.hpp"
#include "usaug/error.hpp"
#include "usaug/pipeline.hpp"
#include "usaug/solver.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitIo = 1;
constexpr int kExitValidation = 2;
constexpr int kExitNotConverged = 3;
constexpr int kExitEmptyRun = 4;

int exit_code_for(const usaug::Error& e) {
  switch (e.code()) {
    case usaug::ErrorCode::Io:
    case usaug::ErrorCode::DecodeError:
    case usaug::ErrorCode::UnsupportedFormat:
      return kExitIo;
    default:
      return kExitValidation;
  }
}

std::pair<int, int> parse_int_pair(const std::string& s, const std::string& flag) {
  const size_t comma = s.find(',');
  try {
    if (comma != std::string::npos) {
      size_t ua = 0, ub = 0;
      const std::string a = s.substr(0, comma), b = s.substr(comma + 1);
      const int va = std::stoi(a, &ua), vb = std::stoi(b, &ub);
      if (ua == a.size() && ub == b.size()) return {va, vb};
    }
  } catch (const std::exception&) {
  }
  throw CLI::ValidationError(flag, "expected two comma-separated integers, e.g. 10,12");
}

std::pair<double, double> parse_double_pair(const std::string& s, const std::string& flag) {
  const size_t comma = s.find(',');
  try {
    if (comma != std::string::npos) {
      size_t ua = 0, ub = 0;
      const std::string a = s.substr(0, comma), b = s.substr(comma + 1);
      const double va = std::stod(a, &ua), vb = std::stod(b, &ub);
      if (ua == a.size() && ub == b.size()) return {va, vb};
    }
  } catch (const std::exception&) {
  }
  throw CLI::ValidationError(flag, "expected two comma-separated numbers, e.g. 0.8,1.25");
}

void print_json_line(const json& j) { std::cout << j.dump() << "\n" << std::flush; }

struct BlendOpts {
  std::string source, source_mask, target, offset, out;
  std::string mode = "seamless";
  double tol = 1e-6;
  int max_iter = 0;
};

int run_blend(const BlendOpts& o) {
  const auto [dx, dy] = parse_int_pair(o.offset, "--offset");
  const usaug::BlendMode mode = usaug::blend_mode_from_string(o.mode);
  const usaug::GrayImage source = usaug::load_image(o.source);
  const usaug::RegionMask source_mask =
      usaug::load_mask(o.source_mask, source.width, source.height);
  const usaug::GrayImage target = usaug::load_image(o.target);

  const usaug::RoiPatch patch = usaug::extract_roi(source, source_mask);
  const usaug::SolverOptions solver{o.tol, o.max_iter};
  const usaug::AugmentedSample sample =
      usaug::paste(target, {}, patch, usaug::Placement{dx, dy}, mode,
                   usaug::OverlapPolicy::Occlude, solver);
  const double seam = usaug::seam_score(sample.image, sample.masks.back());
  usaug::save_image(sample.image, o.out);

  print_json_line(json{{"command", "blend"},
                       {"mode", usaug::to_string(mode)},
                       {"iterations", sample.report.iterations},
                       {"residual", sample.report.residual},
                       {"converged", sample.report.converged},
                       {"seam_score", seam},
                       {"out", o.out}});
  if (!sample.report.converged) {
    std::cerr << "warning: solver did not converge within the iteration budget; "
                 "wrote the best iterate\n";
    return kExitNotConverged;
  }
  return kExitOk;
}

struct FillOpts {
  std::string target, mask, out;
  double tol = 1e-6;
  int max_iter = 0;
};

int run_fill(const FillOpts& o) {
  const usaug::GrayImage target = usaug::load_image(o.target);
  const usaug::RegionMask mask = usaug::load_mask(o.mask, target.width, target.height);
  const usaug::SolverOptions solver{o.tol, o.max_iter};
  const auto [result, report] = usaug::harmonic_fill(target, mask, solver);
  const double seam = usaug::seam_score(result, mask);
  usaug::save_image(result, o.out);

  print_json_line(json{{"command", "fill"},
                       {"iterations", report.iterations},
                       {"residual", report.residual},
                       {"converged", report.converged},
                       {"seam_score", seam},
                       {"out", o.out}});
  if (!report.converged) {
    std::cerr << "warning: solver did not converge within the iteration budget; "
                 "wrote the best iterate\n";
    return kExitNotConverged;
  }
  return kExitOk;
}

struct SeamOpts {
  std::string image, mask;
};

int run_seam(const SeamOpts& o) {
  const usaug::GrayImage image = usaug::load_image(o.image);
  const usaug::RegionMask mask = usaug::load_mask(o.mask, image.width, image.height);
  print_json_line(json{{"command", "seam"}, {"seam_score", usaug::seam_score(image, mask)}});
  return kExitOk;
}

struct AugmentOpts {
  std::string manifest, out_dir;
  int count = 1;
  uint64_t seed = 0;
  std::string scale = "0.8,1.25";
  double rotate = 25.0;
  double flip_prob = 0.5;
  std::string mode = "seamless";
  std::string overlap = "reject";
  int retries = 64;
  double tol = 1e-6;
  int max_iter = 0;
};

int run_augment(const AugmentOpts& o) {
  usaug::AugmentConfig config;
  std::tie(config.scale_lo, config.scale_hi) = parse_double_pair(o.scale, "--scale");
  config.rotation_max_deg = o.rotate;
  config.flip_prob = o.flip_prob;
  config.mode = usaug::blend_mode_from_string(o.mode);
  config.overlap = usaug::overlap_policy_from_string(o.overlap);
  config.max_retries = o.retries;
  config.solver = usaug::SolverOptions{o.tol, o.max_iter};
  config.master_seed = o.seed;
  config.count = o.count;
  config.validate();

  const usaug::DatasetManifest manifest = usaug::load_manifest(o.manifest);
  const usaug::Dataset dataset = usaug::load_dataset(manifest);

  usaug::DirectorySink sink(o.out_dir);
  const usaug::AugmentSummary summary = usaug::augment_dataset(dataset, config, sink);
  const fs::path manifest_path = fs::path(o.out_dir) / "manifest.json";
  usaug::write_output_manifest(sink.records(), config, manifest_path);

  json skipped = json::object();
  for (const auto& [reason, n] : summary.skipped) skipped[reason] = n;
  print_json_line(json{{"command", "augment"},
                       {"requested", summary.requested},
                       {"written", summary.written},
                       {"skipped", skipped},
                       {"mean_seam_score", summary.mean_seam_score},
                       {"out_dir", o.out_dir},
                       {"manifest", manifest_path.string()}});
  return summary.written == 0 ? kExitEmptyRun : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Copy-paste augmentation for grayscale images with gradient-domain blending"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  app.set_version_flag("--version", "usaug 0.1.0");

  BlendOpts blend_opts;
  CLI::App* blend = app.add_subcommand(
      "blend", "Paste a masked region from a source image into a target image");
  blend->add_option("--source", blend_opts.source, "Source image (8-bit grayscale PNG/PGM)")
      ->required();
  blend->add_option("--source-mask", blend_opts.source_mask,
                    "Binary mask selecting the source region")
      ->required();
  blend->add_option("--target", blend_opts.target, "Target (background) image")->required();
  blend->add_option("--offset", blend_opts.offset,
                    "dx,dy target position of the patch crop's top-left")
      ->required();
  blend->add_option("--mode", blend_opts.mode, "Blend mode")
      ->check(CLI::IsMember({"seamless", "direct"}));
  blend->add_option("--tol", blend_opts.tol, "Solver relative-residual tolerance");
  blend->add_option("--max-iter", blend_opts.max_iter,
                    "Solver iteration cap (0 = 10x unknowns, capped at 100000)");
  blend->add_option("--out", blend_opts.out, "Output image path")->required();

  FillOpts fill_opts;
  CLI::App* fill = app.add_subcommand(
      "fill", "Replace a masked region with the smoothest fill matching its surround");
  fill->add_option("--target", fill_opts.target, "Target image")->required();
  fill->add_option("--mask", fill_opts.mask, "Binary mask of the region to fill")->required();
  fill->add_option("--tol", fill_opts.tol, "Solver relative-residual tolerance");
  fill->add_option("--max-iter", fill_opts.max_iter,
                   "Solver iteration cap (0 = 10x unknowns, capped at 100000)");
  fill->add_option("--out", fill_opts.out, "Output image path")->required();

  AugmentOpts augment_opts;
  CLI::App* augment = app.add_subcommand(
      "augment", "Generate augmented samples from a dataset manifest");
  augment->add_option("--manifest", augment_opts.manifest, "Input dataset manifest (JSON)")
      ->required();
  augment->add_option("--out-dir", augment_opts.out_dir,
                      "Output directory for images, masks and manifest.json")
      ->required();
  augment->add_option("--count", augment_opts.count, "Number of samples to generate");
  augment->add_option("--seed", augment_opts.seed, "Master seed for deterministic output");
  augment->add_option("--scale", augment_opts.scale, "lo,hi uniform scale range");
  augment->add_option("--rotate", augment_opts.rotate,
                      "Max rotation in degrees; drawn from [-r, +r]");
  augment->add_option("--flip-prob", augment_opts.flip_prob,
                      "Probability of a horizontal flip");
  augment->add_option("--mode", augment_opts.mode, "Blend mode")
      ->check(CLI::IsMember({"seamless", "direct"}));
  augment->add_option("--overlap", augment_opts.overlap,
                      "Policy when a placement overlaps an existing instance")
      ->check(CLI::IsMember({"reject", "occlude"}));
  augment->add_option("--retries", augment_opts.retries,
                      "Placement attempts before skipping a sample");
  augment->add_option("--tol", augment_opts.tol, "Solver relative-residual tolerance");
  augment->add_option("--max-iter", augment_opts.max_iter,
                      "Solver iteration cap (0 = 10x unknowns, capped at 100000)");

  SeamOpts seam_opts;
  CLI::App* seam = app.add_subcommand(
      "seam", "Measure the mean intensity jump across a region boundary");
  seam->add_option("--image", seam_opts.image, "Image to measure")->required();
  seam->add_option("--mask", seam_opts.mask, "Binary mask of the region")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  try {
    if (blend->parsed()) return run_blend(blend_opts);
    if (fill->parsed()) return run_fill(fill_opts);
    if (augment->parsed()) return run_augment(augment_opts);
    if (seam->parsed()) return run_seam(seam_opts);
  } catch (const usaug::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitIo;
  }
  return kExitValidation;
}
