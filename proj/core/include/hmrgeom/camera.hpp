#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

namespace hmrgeom {

struct ImageSize {
  int width = 1;
  int height = 1;
};

/// Pinhole intrinsics in pixels. The principal point need not be the image
/// center.
struct Intrinsics {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;

  Eigen::Matrix3d matrix() const;
};

/// An image together with its intrinsics; this is what camera files describe.
struct PinholeCamera {
  Intrinsics K;
  ImageSize size;
};

struct Pixel {
  double u = 0.0;
  double v = 0.0;
};

/// Camera ray through a pixel. Either unit length (`normalized`) or in the
/// homogeneous form with z == 1.
struct Ray {
  Eigen::Vector3d direction = Eigen::Vector3d::UnitZ();
  bool normalized = false;
};

/// Square crop window. `scale` is source-crop side over output-crop side, so
/// the crop image is side / scale pixels wide.
struct BBox {
  double u0 = 0.0;
  double v0 = 0.0;
  double side = 1.0;
  double scale = 1.0;

  double center_u() const { return u0 + 0.5 * side; }
  double center_v() const { return v0 + 0.5 * side; }
  double output_resolution() const { return side / scale; }
};

/// Dense per-pixel ray directions, row-major, three doubles per pixel.
struct RayMap {
  int width = 0;
  int height = 0;
  bool normalized = false;
  std::vector<double> data;

  Eigen::Vector3d at(int row, int col) const {
    const auto k = 3 * (static_cast<std::size_t>(row) * static_cast<std::size_t>(width) +
                        static_cast<std::size_t>(col));
    return {data[k], data[k + 1], data[k + 2]};
  }
};

inline constexpr double kCliffFocal = 5000.0;
inline constexpr double kTraceFocal = 443.4;

/// CLIFF bounding-box conditioning vector [cx'/f, cy'/f, b/f] with f = 5000.
struct CliffEncoding {
  Eigen::Vector3d values = Eigen::Vector3d::Zero();
  double focal = kCliffFocal;
};

/// Focal-length conventions used by existing human mesh recovery methods.
enum class FocalConvention {
  kFixed5000,  ///< constant crop focal of 5000 px
  kDiagFull,   ///< sqrt(W^2 + H^2)
  kMeanWH,     ///< (W + H) / 2
  kTraceConst  ///< constant 443.4 px
};

void validate(const ImageSize& size);
void validate(const Intrinsics& K);
void validate(const BBox& box);

double focal_from_convention(FocalConvention convention, const ImageSize& size);

/// Perspective projection of a camera-frame point. Throws NonPositiveDepth
/// when z <= 0.
Pixel project(const Eigen::Vector3d& point, const Intrinsics& K);

/// Weak-perspective (scaled orthographic) projection; ignores depth entirely.
Pixel project_weak(const Eigen::Vector3d& point, double scale, const Eigen::Vector2d& trans);

/// d = K^-1 [u, v, 1]^T, optionally scaled to unit length.
Ray unproject_ray(const Pixel& p, const Intrinsics& K, bool normalize);

/// Intrinsics of the crop described by `box`: crop pixel (u', v') sees the same
/// ray as full-image pixel (u0 + s u', v0 + s v').
Intrinsics crop_intrinsics(const Intrinsics& K, const BBox& box);

/// Full-image pixel corresponding to a crop pixel of `box`.
Pixel crop_to_full(const Pixel& crop_pixel, const BBox& box);

/// Ray map sampled at pixel centers (col + 0.5, row + 0.5).
RayMap ray_map(const Intrinsics& K, int width, int height, bool normalize);

CliffEncoding cliff_encoding(const BBox& box, const ImageSize& size);

/// Smallest square (with `margin` fractional padding) around a set of pixels,
/// center preserved. The resulting crop is resampled to `output_resolution`.
BBox squarify(double umin, double vmin, double umax, double vmax, double margin,
              double output_resolution);

}  // namespace hmrgeom
