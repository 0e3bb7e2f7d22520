#include "usaug/dataset_io.hpp"

#include <png.h>

#include <cctype>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <set>
#include <sstream>

#include "json.hpp"
#include "usaug/error.hpp"

namespace usaug {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr size_t kPngSigLen = 8;

std::string read_file_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) fail(ErrorCode::Io, "read failed for " + path.string());
  return std::move(buf).str();
}

bool has_png_signature(const std::string& bytes) {
  return bytes.size() >= kPngSigLen &&
         png_sig_cmp(reinterpret_cast<const png_byte*>(bytes.data()), 0, kPngSigLen) == 0;
}

struct MemReader {
  const unsigned char* data;
  size_t size;
  size_t pos;
};

extern "C" void mem_read_fn(png_structp png, png_bytep out, png_size_t n) {
  auto* r = static_cast<MemReader*>(png_get_io_ptr(png));
  if (r->pos + n > r->size) png_error(png, "unexpected end of data");
  std::memcpy(out, r->data + r->pos, n);
  r->pos += n;
}

GrayImage load_png(const std::string& bytes, const fs::path& path) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) fail(ErrorCode::Io, "libpng allocation failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    fail(ErrorCode::Io, "libpng allocation failed");
  }

  MemReader reader{reinterpret_cast<const unsigned char*>(bytes.data()), bytes.size(), 0};
  GrayImage img;
  std::vector<png_byte> pixels;
  std::vector<png_bytep> row_ptrs;

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail(ErrorCode::DecodeError, "corrupt PNG data in " + path.string());
  }

  png_set_read_fn(png, &reader, mem_read_fn);
  png_read_info(png, info);
  const png_uint_32 w = png_get_image_width(png, info);
  const png_uint_32 h = png_get_image_height(png, info);
  const int color_type = png_get_color_type(png, info);
  const int bit_depth = png_get_bit_depth(png, info);
  if (color_type != PNG_COLOR_TYPE_GRAY || bit_depth != 8) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail(ErrorCode::UnsupportedFormat,
         path.string() + " is not an 8-bit grayscale PNG (color type " +
             std::to_string(color_type) + ", bit depth " + std::to_string(bit_depth) + ")");
  }

  // png_read_image handles Adam7 interlacing transparently.
  png_set_interlace_handling(png);
  png_read_update_info(png, info);
  img = GrayImage(static_cast<int>(w), static_cast<int>(h));
  pixels.resize(static_cast<size_t>(w) * h);
  row_ptrs.resize(h);
  for (png_uint_32 y = 0; y < h; ++y) row_ptrs[y] = pixels.data() + static_cast<size_t>(y) * w;
  png_read_image(png, row_ptrs.data());
  for (size_t i = 0; i < pixels.size(); ++i) img.data[i] = pixels[i] / 255.0;
  png_destroy_read_struct(&png, &info, nullptr);
  return img;
}

void save_png(const GrayImage& image, const fs::path& path) {
  FILE* f = std::fopen(path.string().c_str(), "wb");
  if (!f) fail(ErrorCode::Io, "cannot open " + path.string() + " for writing");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
    std::fclose(f);
    fail(ErrorCode::Io, "libpng allocation failed");
  }

  std::vector<png_byte> row(image.width);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    std::fclose(f);
    fail(ErrorCode::Io, "PNG write failed for " + path.string());
  }

  png_init_io(png, f);
  png_set_IHDR(png, info, image.width, image.height, 8, PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) row[x] = quantize8(image.at(x, y));
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  if (std::fclose(f) != 0) fail(ErrorCode::Io, "close failed for " + path.string());
}

// PGM header parsing: tokens separated by whitespace, '#' starts a comment
// that runs to end of line.
class PgmHeader {
 public:
  PgmHeader(const std::string& bytes, const fs::path& path) : bytes_(bytes), path_(path) {}

  std::string magic() { return next_token(); }

  int next_int() {
    const std::string tok = next_token();
    try {
      size_t used = 0;
      const int v = std::stoi(tok, &used);
      if (used != tok.size()) throw std::invalid_argument(tok);
      return v;
    } catch (const std::exception&) {
      fail(ErrorCode::DecodeError, "bad PGM header token '" + tok + "' in " + path_.string());
    }
  }

  size_t pos() const { return pos_; }
  void skip_single_whitespace() { ++pos_; }  // the byte after maxval

 private:
  std::string next_token() {
    while (pos_ < bytes_.size()) {
      const char c = bytes_[pos_];
      if (c == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else {
        break;
      }
    }
    const size_t start = pos_;
    while (pos_ < bytes_.size() &&
           !std::isspace(static_cast<unsigned char>(bytes_[pos_])) && bytes_[pos_] != '#')
      ++pos_;
    if (start == pos_)
      fail(ErrorCode::DecodeError, "truncated PGM header in " + path_.string());
    return bytes_.substr(start, pos_ - start);
  }

  const std::string& bytes_;
  fs::path path_;
  size_t pos_ = 0;
};

GrayImage load_pgm(const std::string& bytes, const fs::path& path) {
  PgmHeader header(bytes, path);
  const std::string magic = header.magic();
  if (magic == "P3" || magic == "P6")
    fail(ErrorCode::UnsupportedFormat, path.string() + " is a color PPM, not grayscale");
  if (magic != "P2" && magic != "P5")
    fail(ErrorCode::DecodeError, path.string() + " is not a PGM file");
  const int w = header.next_int();
  const int h = header.next_int();
  const int maxval = header.next_int();
  if (w <= 0 || h <= 0)
    fail(ErrorCode::DecodeError, "bad PGM dimensions in " + path.string());
  if (maxval > 255 || maxval <= 0)
    fail(ErrorCode::UnsupportedFormat,
         path.string() + " has maxval " + std::to_string(maxval) + ", expected <= 255 (8-bit)");

  GrayImage img(w, h);
  const size_t n = static_cast<size_t>(w) * h;
  if (magic == "P5") {
    header.skip_single_whitespace();
    if (header.pos() + n > bytes.size())
      fail(ErrorCode::DecodeError, "truncated PGM pixel data in " + path.string());
    const unsigned char* px = reinterpret_cast<const unsigned char*>(bytes.data()) + header.pos();
    for (size_t i = 0; i < n; ++i) img.data[i] = px[i] / 255.0;
  } else {
    for (size_t i = 0; i < n; ++i) {
      const int v = header.next_int();
      if (v < 0 || v > maxval)
        fail(ErrorCode::DecodeError, "PGM sample out of range in " + path.string());
      img.data[i] = v / 255.0;
    }
  }
  return img;
}

void save_pgm(const GrayImage& image, const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Io, "cannot open " + path.string() + " for writing");
  out << "P5\n" << image.width << " " << image.height << "\n255\n";
  std::vector<char> row(image.width);
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x)
      row[x] = static_cast<char>(quantize8(image.at(x, y)));
    out.write(row.data(), row.size());
  }
  out.flush();
  if (!out.good()) fail(ErrorCode::Io, "write failed for " + path.string());
}

uint32_t read_be32(const unsigned char* p) {
  return (uint32_t(p[0]) << 24) | (uint32_t(p[1]) << 16) | (uint32_t(p[2]) << 8) | uint32_t(p[3]);
}

const json& require_field(const json& obj, const char* name, const std::string& context) {
  if (!obj.contains(name))
    fail(ErrorCode::SchemaViolation, context + ": missing field '" + name + "'");
  return obj.at(name);
}

std::string require_string(const json& obj, const char* name, const std::string& context) {
  const json& v = require_field(obj, name, context);
  if (!v.is_string())
    fail(ErrorCode::SchemaViolation, context + ": field '" + name + "' must be a string");
  return v.get<std::string>();
}

}  // namespace

uint8_t quantize8(double v) {
  return static_cast<uint8_t>(std::lround(clamp01(v) * 255.0));
}

GrayImage load_image(const fs::path& path) {
  const std::string bytes = read_file_bytes(path);
  if (has_png_signature(bytes)) return load_png(bytes, path);
  if (bytes.size() >= 2 && bytes[0] == 'P') return load_pgm(bytes, path);
  fail(ErrorCode::DecodeError, path.string() + " is neither PNG nor PGM");
}

void save_image(const GrayImage& image, const fs::path& path) {
  if (image.width <= 0 || image.height <= 0)
    fail(ErrorCode::DimensionMismatch, "cannot save an empty image");
  if (path.extension() == ".pgm")
    save_pgm(image, path);
  else
    save_png(image, path);
}

RegionMask load_mask(const fs::path& path, int expected_width, int expected_height) {
  const GrayImage img = load_image(path);
  if (img.width != expected_width || img.height != expected_height)
    fail(ErrorCode::DimensionMismatch,
         path.string() + " is " + std::to_string(img.width) + "x" +
             std::to_string(img.height) + ", expected " + std::to_string(expected_width) +
             "x" + std::to_string(expected_height));
  RegionMask mask(img.width, img.height);
  constexpr double threshold = 127.0 / 255.0;  // pixel > 127 means member
  for (size_t i = 0; i < img.data.size(); ++i) mask.member[i] = img.data[i] > threshold;
  return mask;
}

std::pair<int, int> probe_image_size(const fs::path& path) {
  const std::string bytes = read_file_bytes(path);
  if (has_png_signature(bytes)) {
    // IHDR is required to be the first chunk: length(4) "IHDR"(4) w(4) h(4).
    if (bytes.size() < 24 || std::memcmp(bytes.data() + 12, "IHDR", 4) != 0)
      fail(ErrorCode::DecodeError, path.string() + " has no PNG IHDR chunk");
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
    return {static_cast<int>(read_be32(p + 16)), static_cast<int>(read_be32(p + 20))};
  }
  if (bytes.size() >= 2 && bytes[0] == 'P') {
    PgmHeader header(bytes, path);
    const std::string magic = header.magic();
    if (magic != "P2" && magic != "P5" && magic != "P3" && magic != "P6")
      fail(ErrorCode::DecodeError, path.string() + " is not a PGM file");
    const int w = header.next_int();
    const int h = header.next_int();
    return {w, h};
  }
  fail(ErrorCode::DecodeError, path.string() + " is neither PNG nor PGM");
}

DatasetManifest load_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open manifest " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::SchemaViolation, "manifest is not valid JSON: " + std::string(e.what()));
  }
  if (!doc.is_object()) fail(ErrorCode::SchemaViolation, "manifest root must be an object");
  const json& version = require_field(doc, "version", "manifest");
  if (!version.is_number_integer() || version.get<int>() != 1)
    fail(ErrorCode::SchemaViolation, "manifest: unsupported version, expected 1");
  const json& entries = require_field(doc, "entries", "manifest");
  if (!entries.is_array())
    fail(ErrorCode::SchemaViolation, "manifest: field 'entries' must be an array");

  DatasetManifest manifest;
  manifest.version = 1;
  manifest.base_dir = fs::absolute(path).parent_path();

  std::set<std::string> seen_ids;
  int index = 0;
  for (const json& e : entries) {
    const std::string context = "entry " + std::to_string(index);
    if (!e.is_object()) fail(ErrorCode::SchemaViolation, context + " must be an object");

    ManifestEntry entry;
    entry.id = require_string(e, "id", context);
    entry.image = require_string(e, "image", context);
    const json& masks = require_field(e, "masks", context);
    if (!masks.is_array())
      fail(ErrorCode::SchemaViolation, context + ": field 'masks' must be an array");
    for (const json& m : masks) {
      if (!m.is_string())
        fail(ErrorCode::SchemaViolation, context + ": mask paths must be strings");
      entry.masks.push_back(m.get<std::string>());
    }

    if (!seen_ids.insert(entry.id).second)
      fail(ErrorCode::SchemaViolation, context + ": duplicate id '" + entry.id + "'");

    const fs::path image_path = manifest.base_dir / entry.image;
    if (!fs::exists(image_path))
      fail(ErrorCode::SchemaViolation, context + ": image file not found: " + image_path.string());
    const auto [iw, ih] = probe_image_size(image_path);
    for (const std::string& m : entry.masks) {
      const fs::path mask_path = manifest.base_dir / m;
      if (!fs::exists(mask_path))
        fail(ErrorCode::SchemaViolation, context + ": mask file not found: " + mask_path.string());
      const auto [mw, mh] = probe_image_size(mask_path);
      if (mw != iw || mh != ih)
        fail(ErrorCode::SchemaViolation,
             context + ": mask " + mask_path.string() + " is " + std::to_string(mw) + "x" +
                 std::to_string(mh) + " but image is " + std::to_string(iw) + "x" +
                 std::to_string(ih));
    }

    manifest.entries.push_back(std::move(entry));
    ++index;
  }
  return manifest;
}

Dataset load_dataset(const DatasetManifest& manifest) {
  Dataset dataset;
  dataset.reserve(manifest.entries.size());
  for (const ManifestEntry& entry : manifest.entries) {
    DatasetImage item;
    item.id = entry.id;
    item.image = load_image(manifest.resolve(entry.image));
    for (const std::string& m : entry.masks)
      item.instance_masks.push_back(
          load_mask(manifest.resolve(m), item.image.width, item.image.height));
    dataset.push_back(std::move(item));
  }
  return dataset;
}

void write_output_manifest(const std::vector<OutputRecord>& records,
                           const AugmentConfig& config, const fs::path& path) {
  ordered_json doc;
  doc["version"] = 1;
  doc["config"] = ordered_json{{"scale", {config.scale_lo, config.scale_hi}},
                               {"rotation_deg", config.rotation_max_deg},
                               {"flip_prob", config.flip_prob},
                               {"mode", to_string(config.mode)},
                               {"overlap", to_string(config.overlap)},
                               {"retries", config.max_retries},
                               {"tol", config.solver.tol},
                               {"max_iter", config.solver.max_iter},
                               {"seed", config.master_seed},
                               {"count", config.count}};
  ordered_json entries = ordered_json::array();
  for (const OutputRecord& r : records) {
    ordered_json prov{{"donor", r.provenance.donor_id},
                      {"recipient", r.provenance.recipient_id},
                      {"scale", r.provenance.transform.scale},
                      {"rotation_deg", r.provenance.transform.rotation_deg},
                      {"flip_horizontal", r.provenance.transform.flip_horizontal},
                      {"dx", r.provenance.placement.dx},
                      {"dy", r.provenance.placement.dy},
                      {"mode", to_string(r.provenance.mode)},
                      {"stream_seed", r.provenance.stream_seed},
                      {"converged", r.provenance.converged}};
    entries.push_back(ordered_json{
        {"id", r.id}, {"image", r.image}, {"masks", r.masks}, {"provenance", prov}});
  }
  doc["entries"] = std::move(entries);

  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Io, "cannot open " + path.string() + " for writing");
  out << doc.dump(2) << "\n";
  out.flush();
  if (!out.good()) fail(ErrorCode::Io, "write failed for " + path.string());
}

DirectorySink::DirectorySink(fs::path out_dir) : out_dir_(std::move(out_dir)) {
  std::error_code ec;
  fs::create_directories(out_dir_, ec);
  if (ec) fail(ErrorCode::Io, "cannot create output directory " + out_dir_.string());
}

void DirectorySink::write(const AugmentedSample& sample, int sample_index) {
  char id[32];
  std::snprintf(id, sizeof(id), "sample_%04d", sample_index);

  OutputRecord rec;
  rec.id = id;
  rec.image = std::string(id) + ".png";
  save_image(sample.image, out_dir_ / rec.image);
  for (size_t k = 0; k < sample.masks.size(); ++k) {
    char name[48];
    std::snprintf(name, sizeof(name), "%s_mask_%02zu.png", id, k);
    const RegionMask& m = sample.masks[k];
    GrayImage img(m.width, m.height);
    for (size_t i = 0; i < m.member.size(); ++i) img.data[i] = m.member[i] ? 1.0 : 0.0;
    save_image(img, out_dir_ / name);
    rec.masks.emplace_back(name);
  }
  rec.provenance = sample.provenance;
  records_.push_back(std::move(rec));
}

}  // namespace usaug
