#include "selfservo/sim/world.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "selfservo/random.hpp"

namespace selfservo::sim {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Reflects a random-walk coordinate back into [-bound, bound].
double reflect(double v, double bound) {
  if (bound <= 0) return 0.0;
  while (v > bound || v < -bound) {
    if (v > bound) v = 2 * bound - v;
    if (v < -bound) v = -2 * bound - v;
  }
  return v;
}
}  // namespace

void TrackerModel::validate() const {
  if (drop_prob_per_step < 0 || drop_prob_per_step >= 1) {
    throw std::invalid_argument("TrackerModel: drop probability must be in [0, 1)");
  }
  if (jitter_std < 0) throw std::invalid_argument("TrackerModel: negative jitter");
}

void WorldConfig::validate() const {
  arm.validate();
  for (const auto& d : decoys) d.validate();
  tracker.validate();
  if (n_link_particles < 0 || n_background_particles < 0) {
    throw std::invalid_argument("WorldConfig: negative particle counts");
  }
}

ParticleBinding ParticleBinding::on_link(int id, int arm, int link,
                                         const Eigen::Vector3d& local) {
  ParticleBinding b;
  b.id = id;
  b.arm = arm;
  b.link = link;
  b.local = local;
  return b;
}

ParticleBinding ParticleBinding::at_world(int id, const Eigen::Vector3d& world) {
  ParticleBinding b;
  b.id = id;
  b.background = true;
  b.world = world;
  return b;
}

bool ParticleTrack::full_duration() const {
  for (auto a : alive) {
    if (!a) return false;
  }
  return !alive.empty();
}

Eigen::Vector3d ParticleTrack::final_position() const {
  for (int f = frames() - 1; f >= 0; --f) {
    if (alive[static_cast<std::size_t>(f)]) return positions.col(f);
  }
  throw std::runtime_error("ParticleTrack: never observed");
}

ParticleTrack ParticleTrack::prefix(int n_frames) const {
  ParticleTrack out;
  out.positions = positions.leftCols(n_frames);
  out.alive.assign(alive.begin(), alive.begin() + n_frames);
  return out;
}

ExplorationLog ExplorationLog::prefix(int n_actions) const {
  if (n_actions < 0 || n_actions > n_steps()) {
    throw std::invalid_argument("ExplorationLog::prefix: length out of range");
  }
  ExplorationLog out;
  out.config = config;
  out.seed = seed;
  out.actions = actions.leftCols(n_actions);
  for (const auto& da : decoy_actions) out.decoy_actions.push_back(da.leftCols(n_actions));
  out.bindings = bindings;
  out.body_mask = body_mask;
  for (const auto& t : tracks) out.tracks.push_back(t.prefix(n_actions + 1));
  out.gt_ee_image = gt_ee_image.leftCols(n_actions + 1);
  out.gt_ee_world = gt_ee_world.leftCols(n_actions + 1);
  out.states.assign(states.begin(), states.begin() + n_actions + 1);
  return out;
}

SimWorld::SimWorld(WorldConfig config, std::uint64_t seed)
    : cfg_(std::move(config)), seed_(seed) {
  cfg_.validate();
  joints_.push_back(cfg_.arm.initial_pose);
  for (const auto& d : cfg_.decoys) joints_.push_back(d.initial_pose);
  seed_particles();
}

const ArmModel& SimWorld::arm_model(int arm) const {
  if (arm == 0) return cfg_.arm;
  return cfg_.decoys[static_cast<std::size_t>(arm - 1)];
}

void SimWorld::seed_particles() {
  using rng::mix;
  using rng::stream::kParticleSeed;
  const int n_arms = 1 + static_cast<int>(cfg_.decoys.size());
  for (int a = 0; a < n_arms; ++a) {
    const ArmModel& model = arm_model(a);
    double total = 0;
    for (int l = 0; l < model.dof(); ++l) total += model.link_extent_cm(l);
    for (int i = 0; i < cfg_.n_link_particles; ++i) {
      const std::uint64_t h = mix(seed_, kParticleSeed, static_cast<std::uint64_t>(a),
                                  static_cast<std::uint64_t>(i));
      // link chosen proportional to its extent, offset uniform along it
      double pos = rng::u01(mix(h, 0)) * total;
      int link = 0;
      while (link + 1 < model.dof() && pos > model.link_extent_cm(link)) {
        pos -= model.link_extent_cm(link);
        ++link;
      }
      pos = std::min(pos, model.link_extent_cm(link));
      Eigen::Vector3d local(pos, cfg_.particle_lateral_std_cm * rng::normal(mix(h, 1)),
                            cfg_.particle_lateral_std_cm * rng::normal(mix(h, 2)));
      particles_.push_back(ParticleBinding::on_link(next_id_++, a, link, local));
    }
  }
  for (int i = 0; i < cfg_.n_background_particles; ++i) {
    const std::uint64_t h = mix(seed_, kParticleSeed, 0xB6ULL, static_cast<std::uint64_t>(i));
    const double u = rng::uniform(mix(h, 0), 30.0, cfg_.camera.width - 30.0);
    const double v = rng::uniform(mix(h, 1), 30.0, cfg_.camera.height - 30.0);
    const double depth = cfg_.backdrop_depth_cm + rng::uniform(mix(h, 2), -8.0, 8.0);
    particles_.push_back(
        ParticleBinding::at_world(next_id_++, cfg_.camera.backproject({u, v, depth})));
  }
  alive_.assign(particles_.size(), 1);
}

Eigen::VectorXd SimWorld::exploration_action(int t, double scale) const {
  Eigen::VectorXd a(action_dim());
  for (int j = 0; j < action_dim(); ++j) {
    const std::uint64_t h = rng::mix(seed_, rng::stream::kActions,
                                     static_cast<std::uint64_t>(t), static_cast<std::uint64_t>(j));
    a[j] = rng::uniform(h, -scale, scale);
  }
  return a;
}

Eigen::VectorXd SimWorld::decoy_action(int decoy, int t) const {
  const ArmModel& model = arm_model(decoy + 1);
  Eigen::VectorXd a(model.dof());
  for (int j = 0; j < model.dof(); ++j) {
    const std::uint64_t h =
        rng::mix(seed_, rng::stream::kDecoyActions, static_cast<std::uint64_t>(decoy),
                 static_cast<std::uint64_t>(t), static_cast<std::uint64_t>(j));
    a[j] = rng::uniform(h, -cfg_.decoy_action_scale, cfg_.decoy_action_scale);
  }
  return a;
}

void SimWorld::step(const Eigen::VectorXd& action) {
  using rng::mix;
  if (action.size() != action_dim()) {
    throw std::invalid_argument("SimWorld::step: action dimension mismatch");
  }
  const int n_arms = 1 + static_cast<int>(cfg_.decoys.size());
  for (int a = 0; a < n_arms; ++a) {
    const ArmModel& model = arm_model(a);
    const Eigen::VectorXd cmd = (a == 0) ? action : decoy_action(a - 1, step_);
    Eigen::VectorXd q = joints_[static_cast<std::size_t>(a)] + cmd;
    if (model.actuation_noise_std > 0) {
      for (int j = 0; j < model.dof(); ++j) {
        const std::uint64_t h =
            mix(seed_, rng::stream::kActuation, static_cast<std::uint64_t>(a),
                static_cast<std::uint64_t>(step_), static_cast<std::uint64_t>(j));
        q[j] += model.actuation_noise_std * rng::normal(h);
      }
    }
    if (model.broken_joint >= 0) {
      // a broken joint drifts on its own instead of following the command
      const std::uint64_t h = mix(seed_, rng::stream::kBrokenJoint,
                                  static_cast<std::uint64_t>(a), static_cast<std::uint64_t>(step_));
      q[model.broken_joint] = joints_[static_cast<std::size_t>(a)][model.broken_joint] +
                              model.broken_noise_std * rng::normal(h);
    }
    joints_[static_cast<std::size_t>(a)] = model.clamp(q);
  }
  ++step_;
}

Eigen::Vector3d SimWorld::particle_world(const ParticleBinding& b,
                                         const std::vector<Eigen::VectorXd>& joints,
                                         int frame) const {
  if (b.background) return b.world;
  const ArmModel& model = arm_model(b.arm);
  Eigen::Vector3d p = model.link_point(joints[static_cast<std::size_t>(b.arm)], b.link, b.local);
  const bool on_tool = b.link == model.dof() - 1 &&
                       b.local.x() > model.link_lengths_cm[static_cast<std::size_t>(b.link)];
  if (on_tool && model.tool.loose) {
    const std::uint64_t h = rng::mix(seed_, rng::stream::kLooseTool,
                                     static_cast<std::uint64_t>(frame),
                                     static_cast<std::uint64_t>(b.id));
    p += model.tool.loose_noise_std_cm *
         Eigen::Vector3d(rng::normal(rng::mix(h, 0)), rng::normal(rng::mix(h, 1)),
                         rng::normal(rng::mix(h, 2)));
  }
  return p;
}

std::vector<std::optional<Eigen::Vector3d>> SimWorld::observe() {
  using rng::mix;
  const CameraModel& cam = cfg_.camera;
  if (cam.shake_amplitude > 0) {
    const std::uint64_t h = mix(seed_, rng::stream::kShake, static_cast<std::uint64_t>(frame_));
    shake_.x() = reflect(shake_.x() + cam.shake_step_std * rng::normal(mix(h, 0)),
                         cam.shake_amplitude);
    shake_.y() = reflect(shake_.y() + cam.shake_step_std * rng::normal(mix(h, 1)),
                         cam.shake_amplitude);
  }
  std::vector<std::optional<Eigen::Vector3d>> out(particles_.size());
  for (std::size_t p = 0; p < particles_.size(); ++p) {
    if (!alive_[p]) continue;
    const ParticleBinding& b = particles_[p];
    if (cfg_.tracker.drop_prob_per_step > 0) {
      const std::uint64_t h = mix(seed_, rng::stream::kDropout,
                                  static_cast<std::uint64_t>(frame_),
                                  static_cast<std::uint64_t>(b.id));
      if (rng::u01(h) < cfg_.tracker.drop_prob_per_step) {
        alive_[p] = 0;
        continue;
      }
    }
    Eigen::Vector3d obs = cam.project(particle_world(b, joints_, frame_));
    if (!cam.in_frame(obs)) {
      alive_[p] = 0;
      continue;
    }
    obs.x() += shake_.x();
    obs.y() += shake_.y();
    if (cam.pixel_noise_std > 0 || cam.depth_noise_std > 0) {
      const std::uint64_t h = mix(seed_, rng::stream::kPixelNoise,
                                  static_cast<std::uint64_t>(frame_),
                                  static_cast<std::uint64_t>(b.id));
      obs.x() += cam.pixel_noise_std * rng::normal(mix(h, 0));
      obs.y() += cam.pixel_noise_std * rng::normal(mix(h, 1));
      obs.z() += cam.depth_noise_std * rng::normal(mix(h, 2));
    }
    if (cfg_.tracker.jitter_std > 0) {
      const std::uint64_t h = mix(seed_, rng::stream::kJitter,
                                  static_cast<std::uint64_t>(frame_),
                                  static_cast<std::uint64_t>(b.id));
      obs.x() += cfg_.tracker.jitter_std * rng::normal(mix(h, 0));
      obs.y() += cfg_.tracker.jitter_std * rng::normal(mix(h, 1));
    }
    out[p] = obs;
  }
  ++frame_;
  return out;
}

ExplorationLog SimWorld::run_exploration(int n_actions, double action_scale) {
  if (n_actions < 1) throw std::invalid_argument("run_exploration: need at least one action");
  ExplorationLog log;
  log.config = cfg_;
  log.seed = seed_;
  log.actions.resize(action_dim(), n_actions);
  for (std::size_t d = 0; d < cfg_.decoys.size(); ++d) {
    log.decoy_actions.emplace_back(cfg_.decoys[d].dof(), n_actions);
  }
  log.bindings = particles_;
  log.body_mask.clear();
  for (const auto& b : particles_) log.body_mask.push_back(!b.background && b.arm == 0);
  const int n_particles = particle_count();
  log.tracks.assign(static_cast<std::size_t>(n_particles), {});
  for (auto& t : log.tracks) {
    t.positions = Eigen::Matrix3Xd::Constant(3, n_actions + 1, kNaN);
    t.alive.assign(static_cast<std::size_t>(n_actions + 1), 0);
  }
  log.gt_ee_image.resize(3, n_actions + 1);
  log.gt_ee_world.resize(3, n_actions + 1);

  const auto record = [&](int f) {
    auto obs = observe();
    for (int p = 0; p < n_particles; ++p) {
      if (obs[static_cast<std::size_t>(p)]) {
        log.tracks[static_cast<std::size_t>(p)].positions.col(f) =
            *obs[static_cast<std::size_t>(p)];
        log.tracks[static_cast<std::size_t>(p)].alive[static_cast<std::size_t>(f)] = 1;
      }
    }
    log.states.push_back({joints_, shake_});
    const Eigen::Vector3d tip = gt_tip_world();
    log.gt_ee_world.col(f) = tip;
    Eigen::Vector3d tip_img = cfg_.camera.project(tip);
    tip_img.x() += shake_.x();
    tip_img.y() += shake_.y();
    log.gt_ee_image.col(f) = tip_img;
  };

  record(0);
  for (int t = 0; t < n_actions; ++t) {
    const Eigen::VectorXd a = exploration_action(step_, action_scale);
    log.actions.col(t) = a;
    for (std::size_t d = 0; d < cfg_.decoys.size(); ++d) {
      log.decoy_actions[d].col(t) = decoy_action(static_cast<int>(d), step_);
    }
    step(a);
    record(t + 1);
  }
  return log;
}

ParticleTrack SimWorld::replay_point(const ExplorationLog& log,
                                     const ParticleBinding& binding) const {
  using rng::mix;
  if (!binding.background) {
    const int n_arms = 1 + static_cast<int>(cfg_.decoys.size());
    if (binding.arm < 0 || binding.arm >= n_arms) {
      throw std::invalid_argument("replay_point: binding references unknown arm");
    }
    if (binding.link < 0 || binding.link >= arm_model(binding.arm).dof()) {
      throw std::invalid_argument("replay_point: binding references unknown link");
    }
  }
  const int frames = static_cast<int>(log.states.size());
  const CameraModel& cam = cfg_.camera;
  ParticleTrack track;
  track.positions = Eigen::Matrix3Xd::Constant(3, frames, kNaN);
  track.alive.assign(static_cast<std::size_t>(frames), 0);
  bool lost = false;
  for (int f = 0; f < frames && !lost; ++f) {
    const FrameState& st = log.states[static_cast<std::size_t>(f)];
    Eigen::Vector3d obs = cam.project(particle_world(binding, st.joints, f));
    if (!cam.in_frame(obs)) {
      lost = true;
      break;
    }
    obs.x() += st.shake.x();
    obs.y() += st.shake.y();
    const double jitter = cfg_.tracker.jitter_std;
    if (cam.pixel_noise_std > 0 || cam.depth_noise_std > 0 || jitter > 0) {
      const std::uint64_t h = mix(seed_, rng::stream::kReplayNoise,
                                  static_cast<std::uint64_t>(f),
                                  static_cast<std::uint64_t>(binding.id));
      const double pstd = std::sqrt(cam.pixel_noise_std * cam.pixel_noise_std + jitter * jitter);
      obs.x() += pstd * rng::normal(mix(h, 0));
      obs.y() += pstd * rng::normal(mix(h, 1));
      obs.z() += cam.depth_noise_std * rng::normal(mix(h, 2));
    }
    track.positions.col(f) = obs;
    track.alive[static_cast<std::size_t>(f)] = 1;
  }
  return track;
}

std::vector<ParticleBinding> SimWorld::bind_grid(const ExplorationLog& log,
                                                 const Eigen::Vector2d& center_px,
                                                 int grid_size, double spacing_px, int frame,
                                                 double threshold_px, int id_base) const {
  const CameraModel& cam = cfg_.camera;
  if (frame < 0 || frame >= static_cast<int>(log.states.size())) {
    throw std::invalid_argument("bind_grid: frame out of range");
  }
  if (center_px.x() < 0 || center_px.x() >= cam.width || center_px.y() < 0 ||
      center_px.y() >= cam.height) {
    throw std::invalid_argument("bind_grid: center outside image bounds");
  }
  const FrameState& st = log.states[static_cast<std::size_t>(frame)];

  // Projected samples along every link of every arm at the chosen frame.
  struct LinkSample {
    Eigen::Vector2d px;
    int arm, link;
    double t;
  };
  std::vector<LinkSample> samples;
  const int n_arms = 1 + static_cast<int>(cfg_.decoys.size());
  constexpr double kStepCm = 0.05;
  for (int a = 0; a < n_arms; ++a) {
    const ArmModel& model = arm_model(a);
    const auto frames = model.link_frames(st.joints[static_cast<std::size_t>(a)]);
    for (int l = 0; l < model.dof(); ++l) {
      const double extent = model.link_extent_cm(l);
      const int n = static_cast<int>(extent / kStepCm) + 1;
      for (int i = 0; i <= n; ++i) {
        const double t = std::min(extent, i * kStepCm);
        const Eigen::Vector3d w = frames[static_cast<std::size_t>(l)] * Eigen::Vector3d(t, 0, 0);
        const Eigen::Vector3d proj = cam.project(w);
        if (proj.z() <= cam.near_clip_cm) continue;
        samples.push_back({{proj.x() + st.shake.x(), proj.y() + st.shake.y()}, a, l, t});
      }
    }
  }

  std::vector<ParticleBinding> out;
  const double half = (grid_size - 1) / 2.0;
  int id = id_base;
  for (int row = 0; row < grid_size; ++row) {
    for (int col = 0; col < grid_size; ++col) {
      const Eigen::Vector2d g = center_px + spacing_px * Eigen::Vector2d(col - half, row - half);
      if (g.x() < 0 || g.x() >= cam.width || g.y() < 0 || g.y() >= cam.height) continue;
      double best = std::numeric_limits<double>::infinity();
      const LinkSample* hit = nullptr;
      for (const auto& s : samples) {
        const double d = (s.px - g).norm();
        if (d < best) {
          best = d;
          hit = &s;
        }
      }
      if (hit != nullptr && best <= threshold_px) {
        out.push_back(ParticleBinding::on_link(id++, hit->arm, hit->link,
                                               Eigen::Vector3d(hit->t, 0, 0)));
      } else {
        const Eigen::Vector3d ray(g.x() - st.shake.x(), g.y() - st.shake.y(),
                                  cfg_.backdrop_depth_cm);
        out.push_back(ParticleBinding::at_world(id++, cam.backproject(ray)));
      }
    }
  }
  return out;
}

int SimWorld::add_particle(const ParticleBinding& binding) {
  particles_.push_back(binding);
  particles_.back().id = binding.id > 0 ? binding.id : next_id_;
  next_id_ = std::max(next_id_ + 1, particles_.back().id + 1);
  alive_.push_back(1);
  return particle_count() - 1;
}

Eigen::Vector3d SimWorld::gt_tip_world() const { return cfg_.arm.tip(joints_[0]); }

void SimWorld::set_joint_state(int arm, const Eigen::VectorXd& q) {
  joints_[static_cast<std::size_t>(arm)] = arm_model(arm).clamp(q);
}

WorldConfig make_default_world_config() {
  WorldConfig cfg;
  cfg.arm = make_default_arm();
  cfg.camera = make_look_at_camera({0.0, -70.0, 25.0}, {10.0, 0.0, 8.0});
  return cfg;
}

WorldConfig make_noisy_world_config() {
  WorldConfig cfg = make_default_world_config();
  cfg.arm.actuation_noise_std = 0.004;
  cfg.camera.pixel_noise_std = 0.5;
  cfg.camera.depth_noise_std = 0.3;
  cfg.tracker.jitter_std = 0.5;
  cfg.tracker.drop_prob_per_step = 0.003;
  return cfg;
}

void add_tool(WorldConfig& config, double length_cm, bool loose) {
  config.arm.tool.length_cm = length_cm;
  config.arm.tool.loose = loose;
}

void add_decoy(WorldConfig& config, const Eigen::Vector3d& base_offset, double yaw_rad,
               double action_scale) {
  ArmModel decoy = config.arm;
  decoy.base_pose = Eigen::Isometry3d(Eigen::Translation3d(base_offset) *
                                      Eigen::AngleAxisd(yaw_rad, Eigen::Vector3d::UnitZ()));
  config.decoys.push_back(decoy);
  config.decoy_action_scale = action_scale;
}

}  // namespace selfservo::sim
