#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "gdms/backward.hpp"
#include "gdms/error.hpp"
#include "gdms/holes.hpp"
#include "gdms/thermo.hpp"

namespace gdms {

/// Shortest decimal text that reads back to the same double.
inline std::string format_double(double x) {
  char buf[32];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, x);
    if (std::strtod(buf, nullptr) == x) break;
  }
  return buf;
}

// ---------------------------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------------------------

/// One "re,im" line per point, no header.
inline void write_cloud_csv(std::ostream& out, const std::vector<cplx>& points) {
  for (const auto& p : points) out << format_double(p.real()) << ',' << format_double(p.imag()) << '\n';
}

inline std::vector<cplx> read_cloud_csv(std::istream& in) {
  std::vector<cplx> pts;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ParseError("cloud CSV: expected \"re,im\"", lineno, 1);
    try {
      pts.emplace_back(std::stod(line.substr(0, comma)), std::stod(line.substr(comma + 1)));
    } catch (const std::exception&) {
      throw ParseError("cloud CSV: expected \"re,im\"", lineno, 1);
    }
  }
  return pts;
}

inline void write_partition_csv(std::ostream& out, const std::vector<GeomPartitionRow>& rows) {
  out << "n,u,log_Z,pressure_hat\n";
  for (const auto& r : rows)
    out << r.n << ',' << format_double(r.u) << ',' << format_double(r.log_Z) << ',' << format_double(r.pressure_hat())
        << '\n';
}

inline void write_atoms_csv(std::ostream& out, const std::vector<HolePreimageAtom>& atoms) {
  out << "word,center_re,center_im,r_inner,r_outer,weight\n";
  for (const auto& a : atoms)
    out << a.word.to_string() << ',' << format_double(a.center.real()) << ',' << format_double(a.center.imag()) << ','
        << format_double(a.r_inner) << ',' << format_double(a.r_outer) << ',' << format_double(a.weight) << '\n';
}

// ---------------------------------------------------------------------------------------------
// Images
// ---------------------------------------------------------------------------------------------

/// Affine map from the plane to pixel coordinates (x right, y down); equal scale on both axes.
struct Viewport {
  double re_min = 0.0;
  double im_max = 0.0;
  double units_per_pixel = 1.0;
  int width = 0;
  int height = 0;

  double px(cplx z) const { return (z.real() - re_min) / units_per_pixel; }
  double py(cplx z) const { return (im_max - z.imag()) / units_per_pixel; }
  cplx at_pixel(double x, double y) const { return {re_min + x * units_per_pixel, im_max - y * units_per_pixel}; }
};

/// Smallest centered viewport containing all points with a relative margin.
inline Viewport fit_viewport(const std::vector<cplx>& pts, int width, int height, double margin = 0.05) {
  if (width <= 0 || height <= 0) throw ComputationError("image size must be positive");
  double lo_re = -1, hi_re = 1, lo_im = -1, hi_im = 1;
  if (!pts.empty()) {
    lo_re = hi_re = pts[0].real();
    lo_im = hi_im = pts[0].imag();
    for (const auto& p : pts) {
      lo_re = std::min(lo_re, p.real());
      hi_re = std::max(hi_re, p.real());
      lo_im = std::min(lo_im, p.imag());
      hi_im = std::max(hi_im, p.imag());
    }
  }
  const double span = std::max({hi_re - lo_re, hi_im - lo_im, 1e-12}) * (1.0 + 2.0 * margin);
  const double upp = span / std::min(width, height);
  const double c_re = 0.5 * (lo_re + hi_re), c_im = 0.5 * (lo_im + hi_im);
  return {c_re - 0.5 * width * upp, c_im + 0.5 * height * upp, upp, width, height};
}

struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  ///< row-major, 255 = white

  std::uint8_t at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
};

struct Disk {
  cplx center;
  double radius = 0.0;
};

inline constexpr std::uint8_t kCloudShade = 0;
inline constexpr std::uint8_t kDiskShade = 128;

/// Disks filled at mid-gray first, cloud points as dark pixels on top.
inline GrayImage render_image(const std::vector<cplx>& points, const std::vector<Disk>& disks, const Viewport& vp) {
  GrayImage img{vp.width, vp.height, std::vector<std::uint8_t>(static_cast<std::size_t>(vp.width) * vp.height, 255)};
  for (const auto& d : disks) {
    const double cx = vp.px(d.center), cy = vp.py(d.center), r = d.radius / vp.units_per_pixel;
    const int x0 = std::max(0, static_cast<int>(std::floor(cx - r))), x1 = std::min(vp.width - 1, static_cast<int>(std::ceil(cx + r)));
    const int y0 = std::max(0, static_cast<int>(std::floor(cy - r))), y1 = std::min(vp.height - 1, static_cast<int>(std::ceil(cy + r)));
    for (int y = y0; y <= y1; ++y)
      for (int x = x0; x <= x1; ++x) {
        const double dx = x + 0.5 - cx, dy = y + 0.5 - cy;
        if (dx * dx + dy * dy <= std::max(r * r, 0.25)) img.pixels[static_cast<std::size_t>(y) * vp.width + x] = kDiskShade;
      }
  }
  for (const auto& p : points) {
    const int x = static_cast<int>(std::floor(vp.px(p))), y = static_cast<int>(std::floor(vp.py(p)));
    if (x >= 0 && x < vp.width && y >= 0 && y < vp.height) img.pixels[static_cast<std::size_t>(y) * vp.width + x] = kCloudShade;
  }
  return img;
}

/// Binary PPM (P6) with equal RGB channels.
inline void write_ppm(std::ostream& out, const GrayImage& img) {
  out << "P6\n" << img.width << ' ' << img.height << "\n255\n";
  for (const auto v : img.pixels) {
    const char c = static_cast<char>(v);
    out.put(c).put(c).put(c);
  }
}

inline GrayImage read_ppm(std::istream& in) {
  std::string magic;
  int w = 0, h = 0, maxv = 0;
  in >> magic >> w >> h >> maxv;
  if (magic != "P6" || w <= 0 || h <= 0 || maxv != 255) throw ParseError("not a binary 8-bit PPM image");
  in.get();
  GrayImage img{w, h, std::vector<std::uint8_t>(static_cast<std::size_t>(w) * h)};
  for (auto& v : img.pixels) {
    char rgb[3];
    if (!in.read(rgb, 3)) throw ParseError("truncated PPM image");
    v = static_cast<std::uint8_t>(rgb[0]);
  }
  return img;
}

}  // namespace gdms
