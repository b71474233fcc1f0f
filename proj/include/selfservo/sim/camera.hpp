#pragma once

#include <Eigen/Dense>
#include <Eigen/Geometry>

namespace selfservo::sim {

/// Pinhole RGBD camera mapping world (cm) to (x px, y px, depth cm).
struct CameraModel {
  double focal_px = 500.0;
  double cx = 320.0;
  double cy = 240.0;
  int width = 640;
  int height = 480;
  Eigen::Isometry3d world_to_camera = Eigen::Isometry3d::Identity();
  double pixel_noise_std = 0.0;  // px, sensor noise per observation
  double depth_noise_std = 0.0;  // cm
  double shake_amplitude = 0.0;  // px, bound of the random-walk image offset
  double shake_step_std = 0.5;   // px, per-frame walk increment
  double near_clip_cm = 2.0;

  Eigen::Vector3d project(const Eigen::Vector3d& world) const;
  bool in_frame(const Eigen::Vector3d& obs) const;
  Eigen::Vector3d backproject(const Eigen::Vector3d& obs) const;
  double px_per_cm(double depth_cm) const { return focal_px / depth_cm; }
};

/// Camera at `position` looking at `target`, z forward, x right in image.
CameraModel make_look_at_camera(const Eigen::Vector3d& position,
                                const Eigen::Vector3d& target,
                                const Eigen::Vector3d& up = Eigen::Vector3d::UnitZ());

}  // namespace selfservo::sim
