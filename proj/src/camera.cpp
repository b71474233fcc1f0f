#include "selfservo/sim/camera.hpp"

#include <stdexcept>

namespace selfservo::sim {

Eigen::Vector3d CameraModel::project(const Eigen::Vector3d& world) const {
  const Eigen::Vector3d pc = world_to_camera * world;
  const double z = pc.z();
  return {focal_px * pc.x() / z + cx, focal_px * pc.y() / z + cy, z};
}

bool CameraModel::in_frame(const Eigen::Vector3d& obs) const {
  return obs.z() > near_clip_cm && obs.x() >= 0 && obs.x() < width && obs.y() >= 0 &&
         obs.y() < height && obs.allFinite();
}

Eigen::Vector3d CameraModel::backproject(const Eigen::Vector3d& obs) const {
  const double z = obs.z();
  const Eigen::Vector3d pc((obs.x() - cx) * z / focal_px, (obs.y() - cy) * z / focal_px, z);
  return world_to_camera.inverse() * pc;
}

CameraModel make_look_at_camera(const Eigen::Vector3d& position, const Eigen::Vector3d& target,
                                const Eigen::Vector3d& up) {
  const Eigen::Vector3d forward = (target - position).normalized();
  if (forward.norm() < 1e-12) throw std::invalid_argument("make_look_at_camera: degenerate view");
  Eigen::Vector3d right = forward.cross(up).normalized();
  if (!right.allFinite() || right.norm() < 1e-6) {
    right = forward.cross(Eigen::Vector3d::UnitX()).normalized();
  }
  const Eigen::Vector3d down = forward.cross(right);  // +y in image points down

  Eigen::Matrix3d r_cw;  // camera axes expressed in world
  r_cw.col(0) = right;
  r_cw.col(1) = down;
  r_cw.col(2) = forward;

  CameraModel cam;
  cam.world_to_camera = Eigen::Isometry3d::Identity();
  cam.world_to_camera.linear() = r_cw.transpose();
  cam.world_to_camera.translation() = -(r_cw.transpose() * position);
  return cam;
}

}  // namespace selfservo::sim
