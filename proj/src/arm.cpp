#include "selfservo/sim/arm.hpp"

#include <stdexcept>

namespace selfservo::sim {

void ArmModel::validate() const {
  if (joints.empty()) throw std::invalid_argument("ArmModel: needs at least one joint");
  if (link_lengths_cm.size() != joints.size()) {
    throw std::invalid_argument("ArmModel: one link per joint required");
  }
  for (double l : link_lengths_cm) {
    if (!(l > 0)) throw std::invalid_argument("ArmModel: link lengths must be positive");
  }
  for (const auto& j : joints) {
    if (!(j.min_rad < j.max_rad)) {
      throw std::invalid_argument("ArmModel: joint limits must satisfy min < max");
    }
    if (j.axis.norm() < 1e-12) throw std::invalid_argument("ArmModel: zero joint axis");
  }
  if (initial_pose.size() != dof()) {
    throw std::invalid_argument("ArmModel: initial pose size mismatch");
  }
  if (broken_joint >= dof()) throw std::invalid_argument("ArmModel: broken joint out of range");
}

std::vector<Eigen::Isometry3d> ArmModel::link_frames(const Eigen::VectorXd& q) const {
  if (q.size() != dof()) throw std::invalid_argument("link_frames: joint vector size mismatch");
  std::vector<Eigen::Isometry3d> frames;
  frames.reserve(joints.size());
  Eigen::Isometry3d t = base_pose;
  for (std::size_t i = 0; i < joints.size(); ++i) {
    t = t * Eigen::AngleAxisd(q[static_cast<Eigen::Index>(i)], joints[i].axis.normalized());
    frames.push_back(t);
    t = t * Eigen::Translation3d(link_lengths_cm[i], 0, 0);
  }
  return frames;
}

Eigen::Vector3d ArmModel::link_point(const Eigen::VectorXd& q, int link,
                                     const Eigen::Vector3d& local) const {
  if (link < 0 || link >= dof()) throw std::invalid_argument("link_point: link out of range");
  return link_frames(q)[static_cast<std::size_t>(link)] * local;
}

Eigen::Vector3d ArmModel::tip(const Eigen::VectorXd& q) const {
  const int last = dof() - 1;
  return link_point(q, last, Eigen::Vector3d(link_extent_cm(last), 0, 0));
}

double ArmModel::link_extent_cm(int link) const {
  double l = link_lengths_cm[static_cast<std::size_t>(link)];
  if (link == dof() - 1) l += tool.length_cm;
  return l;
}

Eigen::VectorXd ArmModel::clamp(Eigen::VectorXd q) const {
  for (int i = 0; i < dof(); ++i) {
    const auto& j = joints[static_cast<std::size_t>(i)];
    q[i] = std::min(std::max(q[i], j.min_rad), j.max_rad);
  }
  return q;
}

ArmModel make_default_arm() {
  ArmModel arm;
  arm.link_lengths_cm = {10.0, 10.0, 8.0, 4.0};
  arm.joints.resize(4);
  arm.joints[0] = {Eigen::Vector3d::UnitZ(), -3.141592653589793, 3.141592653589793};
  for (int i = 1; i < 4; ++i) {
    arm.joints[static_cast<std::size_t>(i)] = {Eigen::Vector3d::UnitY(), -2.2, 2.2};
  }
  arm.initial_pose = Eigen::Vector4d(0.2, -0.5, 0.6, 0.4);
  return arm;
}

}  // namespace selfservo::sim
