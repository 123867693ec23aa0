#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <array>
#include <optional>

namespace petbench {

using Vec3 = Eigen::Vector3d;
using Quat = Eigen::Quaterniond;

struct Pose {
  Vec3 position = Vec3::Zero();
  Quat orientation = Quat::Identity();

  Vec3 forward() const { return orientation.normalized() * Vec3::UnitZ(); }
};

/// Axis-aligned 3D volume in the camera frame (+z away from the camera).
struct Box3D {
  Vec3 center = Vec3::Zero();
  Vec3 extents = Vec3::Ones();

  Vec3 min_corner() const { return center - 0.5 * extents; }
  Vec3 max_corner() const { return center + 0.5 * extents; }
};

/// Pixel rectangle, (x, y) is the top-left corner.
struct Box2D {
  double x = 0, y = 0, w = 0, h = 0;

  double cx() const { return x + 0.5 * w; }
  double cy() const { return y + 0.5 * h; }
  double area() const { return w * h; }
  double diagonal() const;
};

struct Size2 {
  int width = 0;
  int height = 0;
};

struct Point2 {
  double x = 0, y = 0;
};

double iou(const Box2D& a, const Box2D& b);

/// Closed-interval intersection test; touching faces count as overlap.
bool overlaps(const Box3D& a, const Box3D& b);

/// Slab test of the ray origin + s * direction, s >= 0. Boundary hits count.
/// Returns the entry distance when the ray hits.
std::optional<double> ray_box_entry(const Vec3& origin, const Vec3& direction, const Box3D& b);

/// Pinhole projection with focal length equal to the image width in pixels:
/// px = W/2 + (x/z) * W, py = H/2 + (y/z) * W.
Box2D project(const Box3D& b, Size2 image);

/// Inverse of project() for the box center at known depth; extents from the
/// 2D size at that depth (z extent is kept from `depth_extent`).
Box3D unproject(const Box2D& r, double depth, double depth_extent, Size2 image);

Box2D clamp_to(const Box2D& r, Size2 bounds);

/// Angle between two orientations in degrees.
double angular_distance_deg(const Quat& a, const Quat& b);

}  // namespace petbench
