#include "petbench/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace petbench {

double Box2D::diagonal() const { return std::hypot(w, h); }

double iou(const Box2D& a, const Box2D& b) {
  const double ix = std::max(0.0, std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x));
  const double iy = std::max(0.0, std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y));
  const double inter = ix * iy;
  const double uni = a.area() + b.area() - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

bool overlaps(const Box3D& a, const Box3D& b) {
  const Vec3 amin = a.min_corner(), amax = a.max_corner();
  const Vec3 bmin = b.min_corner(), bmax = b.max_corner();
  for (int i = 0; i < 3; ++i) {
    if (amax[i] < bmin[i] || bmax[i] < amin[i]) return false;
  }
  return true;
}

std::optional<double> ray_box_entry(const Vec3& origin, const Vec3& direction, const Box3D& b) {
  const Vec3 lo = b.min_corner(), hi = b.max_corner();
  double t_near = 0.0;
  double t_far = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 3; ++i) {
    if (direction[i] == 0.0) {
      if (origin[i] < lo[i] || origin[i] > hi[i]) return std::nullopt;
      continue;
    }
    double t0 = (lo[i] - origin[i]) / direction[i];
    double t1 = (hi[i] - origin[i]) / direction[i];
    if (t0 > t1) std::swap(t0, t1);
    t_near = std::max(t_near, t0);
    t_far = std::min(t_far, t1);
    if (t_near > t_far) return std::nullopt;
  }
  return t_near;
}

Box2D project(const Box3D& b, Size2 image) {
  const double W = image.width, H = image.height;
  const double z = b.center.z();
  const double cx = W / 2 + b.center.x() / z * W;
  const double cy = H / 2 + b.center.y() / z * W;
  const double w = b.extents.x() / z * W;
  const double h = b.extents.y() / z * W;
  return {cx - w / 2, cy - h / 2, w, h};
}

Box3D unproject(const Box2D& r, double depth, double depth_extent, Size2 image) {
  const double W = image.width, H = image.height;
  Box3D b;
  b.center = Vec3((r.cx() - W / 2) / W * depth, (r.cy() - H / 2) / W * depth, depth);
  b.extents = Vec3(r.w / W * depth, r.h / W * depth, depth_extent);
  return b;
}

Box2D clamp_to(const Box2D& r, Size2 bounds) {
  const double x0 = std::clamp(r.x, 0.0, double(bounds.width));
  const double y0 = std::clamp(r.y, 0.0, double(bounds.height));
  const double x1 = std::clamp(r.x + r.w, 0.0, double(bounds.width));
  const double y1 = std::clamp(r.y + r.h, 0.0, double(bounds.height));
  return {x0, y0, x1 - x0, y1 - y0};
}

double angular_distance_deg(const Quat& a, const Quat& b) {
  return a.normalized().angularDistance(b.normalized()) * 180.0 / M_PI;
}

}  // namespace petbench
