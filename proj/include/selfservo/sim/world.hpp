#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "selfservo/sim/arm.hpp"
#include "selfservo/sim/camera.hpp"

namespace selfservo::sim {

struct TrackerModel {
  double jitter_std = 0.0;          // px, per-frame measurement noise
  double drop_prob_per_step = 0.0;  // permanent track loss per frame
  void validate() const;
};

/// Where a tracked particle lives: rigidly on a link (local offset in the
/// link frame, x along the link) or at a fixed background point.
struct ParticleBinding {
  int id = 0;
  bool background = false;
  int arm = 0;   // 0 = controlled, 1.. = decoys
  int link = 0;
  Eigen::Vector3d local = Eigen::Vector3d::Zero();  // cm
  Eigen::Vector3d world = Eigen::Vector3d::Zero();  // cm, background only

  static ParticleBinding on_link(int id, int arm, int link, const Eigen::Vector3d& local);
  static ParticleBinding at_world(int id, const Eigen::Vector3d& world);
};

struct ParticleTrack {
  Eigen::Matrix3Xd positions;       // 3 x frames; NaN where unobserved
  std::vector<std::uint8_t> alive;  // per frame

  int frames() const { return static_cast<int>(positions.cols()); }
  bool full_duration() const;
  Eigen::Vector3d final_position() const;  // last observed position
  ParticleTrack prefix(int n_frames) const;
};

struct FrameState {
  std::vector<Eigen::VectorXd> joints;  // per arm, controlled first
  Eigen::Vector2d shake = Eigen::Vector2d::Zero();
};

struct WorldConfig {
  ArmModel arm;
  std::vector<ArmModel> decoys;
  CameraModel camera;
  TrackerModel tracker;
  int n_link_particles = 40;  // per arm
  int n_background_particles = 40;
  double particle_lateral_std_cm = 0.25;
  double backdrop_depth_cm = 95.0;
  double decoy_action_scale = 0.1;
  void validate() const;
};

/// Everything recorded over one exploration run. Tracks and actions are
/// time-aligned: track position t+1 reflects the state after actions[t].
struct ExplorationLog {
  WorldConfig config;
  std::uint64_t seed = 0;
  Eigen::MatrixXd actions;                     // d x n, controlled arm
  std::vector<Eigen::MatrixXd> decoy_actions;  // one per decoy
  std::vector<ParticleBinding> bindings;
  std::vector<ParticleTrack> tracks;           // one per binding, n+1 frames
  std::vector<std::uint8_t> body_mask;         // binding on the controlled arm
  Eigen::Matrix3Xd gt_ee_image;                // 3 x (n+1); shake yes, noise no
  Eigen::Matrix3Xd gt_ee_world;                // 3 x (n+1), cm
  std::vector<FrameState> states;              // n+1

  int n_steps() const { return static_cast<int>(actions.cols()); }
  /// Identical world, truncated to the first n_actions steps.
  ExplorationLog prefix(int n_actions) const;
};

/// Deterministic, seedable stand-in for arm + RGBD camera + point tracker.
/// All noise is a pure function of (seed, stream, frame, particle), so the
/// same (config, seed) pair always reproduces the same history and a short
/// run is an exact prefix of a longer one.
class SimWorld {
 public:
  SimWorld(WorldConfig config, std::uint64_t seed);

  int action_dim() const { return cfg_.arm.dof(); }
  int particle_count() const { return static_cast<int>(particles_.size()); }

  /// Advances the controlled arm by `action` (plus actuation noise) and the
  /// decoys by their own independently seeded actions; clamps joint limits.
  void step(const Eigen::VectorXd& action);

  /// Captures one camera frame: advances the shake walk, samples permanent
  /// dropout, and returns per-particle noisy observations (nullopt = lost).
  std::vector<std::optional<Eigen::Vector3d>> observe();

  /// Samples i.i.d. uniform actions in [-scale, scale]^d, alternating step
  /// and observe, and returns the complete log with ground truth.
  ExplorationLog run_exploration(int n_actions, double action_scale);

  /// Track the given binding would have produced over the logged trajectory,
  /// with fresh measurement noise (keyed by binding id) and no dropout.
  ParticleTrack replay_point(const ExplorationLog& log, const ParticleBinding& binding) const;

  /// Inverse-maps grid pixels around `center_px` at the given logged frame:
  /// pixels within threshold of a projected link become link bindings, the
  /// rest become fixed background points at the backdrop depth.
  std::vector<ParticleBinding> bind_grid(const ExplorationLog& log,
                                         const Eigen::Vector2d& center_px,
                                         int grid_size, double spacing_px,
                                         int frame = 0, double threshold_px = 5.0,
                                         int id_base = 100000) const;

  /// Registers an extra particle to track from now on; returns its index.
  int add_particle(const ParticleBinding& binding);

  Eigen::Vector3d gt_tip_world() const;
  const WorldConfig& config() const { return cfg_; }
  std::uint64_t seed() const { return seed_; }
  const Eigen::VectorXd& joint_state(int arm = 0) const { return joints_[static_cast<std::size_t>(arm)]; }
  void set_joint_state(int arm, const Eigen::VectorXd& q);
  const std::vector<ParticleBinding>& particles() const { return particles_; }
  const std::vector<std::uint8_t>& alive() const { return alive_; }

 private:
  Eigen::VectorXd exploration_action(int t, double scale) const;
  Eigen::VectorXd decoy_action(int decoy, int t) const;
  const ArmModel& arm_model(int arm) const;
  Eigen::Vector3d particle_world(const ParticleBinding& b,
                                 const std::vector<Eigen::VectorXd>& joints,
                                 int frame) const;
  void seed_particles();

  WorldConfig cfg_;
  std::uint64_t seed_ = 0;
  std::vector<Eigen::VectorXd> joints_;
  std::vector<ParticleBinding> particles_;
  std::vector<std::uint8_t> alive_;
  Eigen::Vector2d shake_ = Eigen::Vector2d::Zero();
  int frame_ = 0;  // frames captured so far
  int step_ = 0;   // actions executed so far
  int next_id_ = 0;
};

/// Desk-scale default: one 4-joint arm, ~40 link + ~40 background particles,
/// angled camera 70 cm away. Noise fields default to zero; callers opt in.
WorldConfig make_default_world_config();
/// Default config with the standard sensing-noise levels switched on.
WorldConfig make_noisy_world_config();
void add_tool(WorldConfig& config, double length_cm, bool loose = false);
void add_decoy(WorldConfig& config, const Eigen::Vector3d& base_offset, double yaw_rad,
               double action_scale);

}  // namespace selfservo::sim
