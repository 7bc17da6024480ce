#include "gridseg/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include <boost/random/normal_distribution.hpp>
#include <png.h>

namespace gridseg::image {

namespace {

void require_shape(const RgbImage& img) {
  if (img.width <= 0 || img.height <= 0 ||
      img.rgb.size() != static_cast<std::size_t>(img.width) * static_cast<std::size_t>(img.height) * 3) {
    throw std::invalid_argument("image buffer does not match its dimensions");
  }
}

// Next header token, skipping whitespace and '#' comments.
std::string ppm_token(std::istream& in) {
  std::string tok;
  int c = 0;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {
      }
      continue;
    }
    if (std::isspace(c)) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(static_cast<char>(c));
  }
  if (tok.empty()) throw std::invalid_argument("truncated PPM header");
  return tok;
}

int ppm_int(std::istream& in) {
  const std::string tok = ppm_token(in);
  std::size_t used = 0;
  int v = 0;
  try {
    v = std::stoi(tok, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != tok.size()) throw std::invalid_argument("bad PPM value '" + tok + "'");
  return v;
}

RgbImage read_png_file(const std::string& path) {
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&png, path.c_str())) {
    throw std::invalid_argument("cannot decode PNG " + path + ": " + png.message);
  }
  png.format = PNG_FORMAT_RGB;
  RgbImage img;
  img.width = static_cast<int>(png.width);
  img.height = static_cast<int>(png.height);
  img.rgb.resize(PNG_IMAGE_SIZE(png));
  if (!png_image_finish_read(&png, nullptr, img.rgb.data(), 0, nullptr)) {
    const std::string msg = png.message;
    png_image_free(&png);
    throw std::invalid_argument("cannot decode PNG " + path + ": " + msg);
  }
  return img;
}

void write_png_file(const std::string& path, const RgbImage& img) {
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  png.width = static_cast<png_uint_32>(img.width);
  png.height = static_cast<png_uint_32>(img.height);
  png.format = PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&png, path.c_str(), 0, img.rgb.data(), 0, nullptr)) {
    throw std::runtime_error("cannot write PNG " + path + ": " + png.message);
  }
}

bool ends_with(const std::string& s, const std::string& suffix) {
  if (s.size() < suffix.size()) return false;
  return std::equal(suffix.rbegin(), suffix.rend(), s.rbegin(),
                    [](char a, char b) { return std::tolower(static_cast<unsigned char>(a)) == b; });
}

}  // namespace

RgbImage read_ppm(std::istream& in) {
  const std::string magic = ppm_token(in);
  if (magic != "P6" && magic != "P3") throw std::invalid_argument("unsupported image format (expected P6 or P3 PPM)");
  RgbImage img;
  img.width = ppm_int(in);
  img.height = ppm_int(in);
  const int maxval = ppm_int(in);
  if (img.width <= 0 || img.height <= 0) throw std::invalid_argument("PPM dimensions must be positive");
  if (maxval < 1 || maxval > 65535) throw std::invalid_argument("PPM maxval must be in 1..65535");
  const std::size_t n = static_cast<std::size_t>(img.width) * static_cast<std::size_t>(img.height) * 3;
  img.rgb.resize(n);
  const auto rescale = [maxval](int v) {
    if (v < 0 || v > maxval) throw std::invalid_argument("PPM sample out of range");
    return static_cast<std::uint8_t>(maxval == 255 ? v : (v * 255 + maxval / 2) / maxval);
  };
  if (magic == "P3") {
    for (auto& px : img.rgb) px = rescale(ppm_int(in));
    return img;
  }
  if (maxval > 255) {
    for (auto& px : img.rgb) {
      const int hi = in.get(), lo = in.get();
      if (lo == EOF) throw std::invalid_argument("truncated PPM data");
      px = rescale(hi * 256 + lo);
    }
    return img;
  }
  in.read(reinterpret_cast<char*>(img.rgb.data()), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in.gcount()) != n) throw std::invalid_argument("truncated PPM data");
  for (auto& px : img.rgb) px = rescale(px);
  return img;
}

void write_ppm(std::ostream& out, const RgbImage& img) {
  require_shape(img);
  out << "P6\n" << img.width << ' ' << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.rgb.data()), static_cast<std::streamsize>(img.rgb.size()));
}

RgbImage read_image(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open " + path);
  unsigned char sig[8] = {};
  in.read(reinterpret_cast<char*>(sig), 8);
  if (in.gcount() == 8 && png_sig_cmp(sig, 0, 8) == 0) return read_png_file(path);
  in.clear();
  in.seekg(0);
  return read_ppm(in);
}

void write_image(const std::string& path, const RgbImage& img) {
  require_shape(img);
  if (ends_with(path, ".png")) {
    write_png_file(path, img);
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  write_ppm(out, img);
}

Grid to_grid(const RgbImage& img) {
  require_shape(img);
  Grid g(img.width, img.height, 3);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      auto cell = g.at(x + 1, img.height - y);
      const std::size_t o = (static_cast<std::size_t>(y) * static_cast<std::size_t>(img.width) + static_cast<std::size_t>(x)) * 3;
      for (int c = 0; c < 3; ++c) cell[c] = img.rgb[o + static_cast<std::size_t>(c)] / 255.0;
    }
  }
  return g;
}

RgbImage from_grid(const Grid& grid) {
  if (grid.p() != 3) throw std::invalid_argument("image output needs p = 3");
  RgbImage img;
  img.width = grid.tw();
  img.height = grid.th();
  img.rgb.resize(grid.cells() * 3);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      const auto cell = grid.at(x + 1, img.height - y);
      const std::size_t o = (static_cast<std::size_t>(y) * static_cast<std::size_t>(img.width) + static_cast<std::size_t>(x)) * 3;
      for (int c = 0; c < 3; ++c) {
        img.rgb[o + static_cast<std::size_t>(c)] = static_cast<std::uint8_t>(std::lround(std::clamp(cell[c], 0.0, 1.0) * 255.0));
      }
    }
  }
  return img;
}

Grid add_gaussian_noise(const Grid& grid, double variance, std::uint64_t seed) {
  if (!(variance >= 0.0) || !std::isfinite(variance)) throw std::invalid_argument("noise variance must be >= 0");
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  std::mt19937_64 eng(seq);
  boost::random::normal_distribution<double> noise(0.0, std::sqrt(variance));
  std::vector<double> v = grid.values();
  if (variance > 0.0) {
    for (double& x : v) x += noise(eng);
  }
  return Grid(grid.tw(), grid.th(), grid.p(), std::move(v));
}

}  // namespace gridseg::image
