#include "hmrgeom/camera.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hmrgeom/errors.hpp"

namespace hmrgeom {

Eigen::Matrix3d Intrinsics::matrix() const {
  Eigen::Matrix3d k;
  k << fx, 0.0, cx, 0.0, fy, cy, 0.0, 0.0, 1.0;
  return k;
}

void validate(const ImageSize& size) {
  if (size.width < 1 || size.height < 1) {
    throw InvalidArgument("image size must be at least 1x1, got " + std::to_string(size.width) +
                          "x" + std::to_string(size.height));
  }
}

void validate(const Intrinsics& K) {
  if (!(K.fx > 0.0) || !(K.fy > 0.0) || !std::isfinite(K.fx) || !std::isfinite(K.fy)) {
    throw InvalidArgument("focal lengths must be positive and finite");
  }
  if (!std::isfinite(K.cx) || !std::isfinite(K.cy)) {
    throw InvalidArgument("principal point must be finite");
  }
}

void validate(const BBox& box) {
  if (!(box.side > 0.0) || !(box.scale > 0.0) || !std::isfinite(box.side) ||
      !std::isfinite(box.scale) || !std::isfinite(box.u0) || !std::isfinite(box.v0)) {
    throw InvalidArgument("bbox needs finite corner and positive side and scale");
  }
}

double focal_from_convention(FocalConvention convention, const ImageSize& size) {
  validate(size);
  const double w = size.width;
  const double h = size.height;
  switch (convention) {
    case FocalConvention::kFixed5000:
      return kCliffFocal;
    case FocalConvention::kDiagFull:
      return std::hypot(w, h);
    case FocalConvention::kMeanWH:
      return 0.5 * (w + h);
    case FocalConvention::kTraceConst:
      return kTraceFocal;
  }
  return kCliffFocal;
}

Pixel project(const Eigen::Vector3d& point, const Intrinsics& K) {
  if (!(point.z() > 0.0)) {
    throw NonPositiveDepth("cannot project point with depth " + std::to_string(point.z()));
  }
  return {K.fx * point.x() / point.z() + K.cx, K.fy * point.y() / point.z() + K.cy};
}

Pixel project_weak(const Eigen::Vector3d& point, double scale, const Eigen::Vector2d& trans) {
  return {scale * point.x() + trans.x(), scale * point.y() + trans.y()};
}

Ray unproject_ray(const Pixel& p, const Intrinsics& K, bool normalize) {
  Ray ray;
  ray.direction = {(p.u - K.cx) / K.fx, (p.v - K.cy) / K.fy, 1.0};
  if (normalize) {
    ray.direction.normalize();
    ray.normalized = true;
  }
  return ray;
}

Intrinsics crop_intrinsics(const Intrinsics& K, const BBox& box) {
  validate(K);
  validate(box);
  return {K.fx / box.scale, K.fy / box.scale, (K.cx - box.u0) / box.scale,
          (K.cy - box.v0) / box.scale};
}

Pixel crop_to_full(const Pixel& crop_pixel, const BBox& box) {
  return {box.u0 + box.scale * crop_pixel.u, box.v0 + box.scale * crop_pixel.v};
}

RayMap ray_map(const Intrinsics& K, int width, int height, bool normalize) {
  validate(K);
  validate(ImageSize{width, height});
  RayMap map;
  map.width = width;
  map.height = height;
  map.normalized = normalize;
  map.data.resize(3 * static_cast<std::size_t>(width) * static_cast<std::size_t>(height));
  std::size_t k = 0;
  for (int row = 0; row < height; ++row) {
    for (int col = 0; col < width; ++col) {
      const Ray ray = unproject_ray({col + 0.5, row + 0.5}, K, normalize);
      map.data[k++] = ray.direction.x();
      map.data[k++] = ray.direction.y();
      map.data[k++] = ray.direction.z();
    }
  }
  return map;
}

CliffEncoding cliff_encoding(const BBox& box, const ImageSize& size) {
  validate(box);
  validate(size);
  const double cx = box.center_u() - 0.5 * size.width;
  const double cy = box.center_v() - 0.5 * size.height;
  CliffEncoding enc;
  enc.values = {cx / kCliffFocal, cy / kCliffFocal, box.side / kCliffFocal};
  return enc;
}

BBox squarify(double umin, double vmin, double umax, double vmax, double margin,
              double output_resolution) {
  const double side = std::max({umax - umin, vmax - vmin, 1e-9}) * (1.0 + margin);
  const double cu = 0.5 * (umin + umax);
  const double cv = 0.5 * (vmin + vmax);
  BBox box;
  box.side = side;
  box.u0 = cu - 0.5 * side;
  box.v0 = cv - 0.5 * side;
  box.scale = side / output_resolution;
  return box;
}

}  // namespace hmrgeom
