#pragma once

#include <Eigen/Dense>
#include <Eigen/Geometry>
#include <vector>

namespace selfservo::sim {

struct JointSpec {
  Eigen::Vector3d axis = Eigen::Vector3d::UnitZ();  // in the parent frame
  double min_rad = -3.141592653589793;
  double max_rad = 3.141592653589793;
};

struct ToolSpec {
  double length_cm = 0.0;  // rigid extension beyond the last link
  bool loose = false;      // loosely coupled attachment (rope-like)
  double loose_noise_std_cm = 0.15;
};

/// Serial revolute chain. Link i spans local x in [0, L_i] in the frame
/// reached after joint i's rotation; a tool, when present, rigidly extends
/// the last link beyond L_{d-1}, so points with along-offset > L_{d-1}
/// belong to the tool.
struct ArmModel {
  std::vector<double> link_lengths_cm;
  std::vector<JointSpec> joints;
  Eigen::Isometry3d base_pose = Eigen::Isometry3d::Identity();
  Eigen::VectorXd initial_pose;      // rad, one entry per joint
  double actuation_noise_std = 0.0;  // rad added per commanded step
  int broken_joint = -1;             // this joint ignores commands and drifts
  double broken_noise_std = 0.05;    // rad per step for a broken joint
  ToolSpec tool;

  int dof() const { return static_cast<int>(joints.size()); }
  void validate() const;

  /// Frame of each link: origin at the link's proximal joint, x axis along
  /// the link, after the joint rotation has been applied.
  std::vector<Eigen::Isometry3d> link_frames(const Eigen::VectorXd& q) const;
  Eigen::Vector3d link_point(const Eigen::VectorXd& q, int link,
                             const Eigen::Vector3d& local) const;
  /// Functional tip: end of the tool when present, else end of the last link.
  Eigen::Vector3d tip(const Eigen::VectorXd& q) const;
  /// Along-axis extent of a link, including the tool on the last link.
  double link_extent_cm(int link) const;
  Eigen::VectorXd clamp(Eigen::VectorXd q) const;
};

/// The default desk-scale rig: base yaw plus three pitch joints, link
/// lengths (10, 10, 8, 4) cm, bent starting pose away from singularities.
ArmModel make_default_arm();

}  // namespace selfservo::sim
