#include "core/select.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "core/errors.hpp"
#include "core/parallel.hpp"
#include "core/rng.hpp"
#include "core/trials.hpp"

namespace grasplab::select {

namespace {

// Per-scene state for repeated closures: the cylinder fit driving proposals
// and the T_a captures, taken once before the first attempt.
struct SceneView {
  oracle::CylinderEstimate cyl;
  trials::TrialFrames frames;
};

SceneView open_scene(const world::Scene& scene, const SelectionConfig& cfg) {
  SceneView v;
  auto depth_a = sensors::render_depth(scene, nullptr, cfg.sensors, sensors::SnapTag::Ta);
  v.cyl = oracle::fit_cylinder(depth_a, cfg.sensors.topdown);
  v.frames.rgb_a = sensors::render_camera(scene, nullptr, cfg.sensors, sensors::SnapTag::Ta);
  v.frames.tac_left_a = sensors::unloaded_gel(cfg.sensors.gel_left, sensors::SnapTag::Ta);
  v.frames.tac_right_a = sensors::unloaded_gel(cfg.sensors.gel_right, sensors::SnapTag::Ta);
  return v;
}

// Simulate one closure, refresh the T_b captures, and ask the model. The
// frames pass through the same quantization as stored datasets so the model
// sees selection inputs with collection-time precision.
double probe_closure(const world::Scene& scene, const learn::Model& model,
                     const SelectionConfig& cfg, SceneView& view, const world::GraspParams& g,
                     const oracle::ContactSet& contacts) {
  view.frames.rgb_b = sensors::render_camera(scene, &g, cfg.sensors, sensors::SnapTag::Tb);
  view.frames.depth_b = sensors::render_depth(scene, &g, cfg.sensors, sensors::SnapTag::Tb);
  view.frames.tac_left_b = sensors::render_tactile(scene, g, contacts, oracle::Jaw::left,
                                                   cfg.sensors.gel_left, sensors::SnapTag::Tb);
  view.frames.tac_right_b = sensors::render_tactile(scene, g, contacts, oracle::Jaw::right,
                                                    cfg.sensors.gel_right, sensors::SnapTag::Tb);
  trials::quantize_frames(view.frames);
  auto ex = learn::make_example(view.frames, g, false);
  return learn::predict(model, ex);
}

world::GraspParams propose(const oracle::CylinderEstimate& cyl, uint64_t seed,
                           const SelectionConfig& cfg) {
  world::GraspParams g = oracle::collection_policy(cyl, seed, cfg.force_lo, cfg.force_hi);
  if (cfg.blind) {
    RngStream rng(seed, "blind", 0);
    g.ee_x = cyl.center.x + rng.uniform(-2.5, 2.5) * cyl.radius;
    g.ee_y = cyl.center.y + rng.uniform(-2.5, 2.5) * cyl.radius;
  }
  return g;
}

void validate(const SelectionConfig& cfg) {
  if (!(cfg.threshold > 0.0 && cfg.threshold < 1.0))
    throw ConfigError("selection threshold must lie strictly between 0 and 1");
  if (cfg.max_attempts < 1) throw ConfigError("max_attempts must be at least 1");
  if (!(cfg.force_lo > 0.0) || !(cfg.force_hi >= cfg.force_lo))
    throw ConfigError("selection force range is invalid");
}

}  // namespace

SelectionConfig make_selection_config(uint64_t sensor_seed, bool noise) {
  SelectionConfig cfg;
  cfg.sensors = sensors::make_sensor_config(sensor_seed);
  if (!noise) cfg.sensors.physics.noise_sigma = 0.0;
  return cfg;
}

SelectionResult select_grasp(const world::Scene& scene, const learn::Model& model,
                             const SelectionConfig& config, uint64_t seed) {
  validate(config);
  SceneView view = open_scene(scene, config);

  SelectionResult result;
  for (int attempt = 1; attempt <= config.max_attempts; ++attempt) {
    const world::GraspParams g = propose(view.cyl, hash_u64(seed, uint64_t(attempt)), config);
    const auto contacts = oracle::compute_contacts(scene, g, config.sensors.physics);
    const double p = probe_closure(scene, model, config, view, g, contacts);
    result.attempt_log.push_back({g, p});
    result.attempts = attempt;
    if (p >= config.threshold) {
      result.accepted = true;
      result.chosen_params = g;
      const auto out = oracle::lift_outcome(scene, g, contacts,
                                            hash_u64(seed, 0x11f7u + uint64_t(attempt)),
                                            config.sensors.physics);
      result.lift_success = out.success;
      break;
    }
  }
  return result;
}

int count_empty_closure_acceptances(const world::Scene& scene, const learn::Model& model,
                                    const SelectionConfig& config, int n, uint64_t seed) {
  validate(config);
  if (n < 0) throw ConfigError("empty-closure probe count must be non-negative");
  SceneView view = open_scene(scene, config);
  // A vertex can sit up to a full diameter from the fitted centre, and the
  // closure band spans half a jaw width on either side of the wrist.
  const double reach = std::max(view.cyl.radius, scene.object.footprint_diameter());
  const double offset = reach + config.sensors.physics.jaw_width / 2.0 + 6.0;

  int accepted = 0;
  int collected = 0;
  for (uint64_t i = 0; collected < n; ++i) {
    if (i >= uint64_t(n) * 8 + 64)
      throw ConfigError("could not construct enough contact-free closures");
    world::GraspParams g =
        oracle::collection_policy(view.cyl, hash_u64(seed, i), config.force_lo, config.force_hi);
    // Slide the gripper out along the grasp axis so the jaws close on air
    // beside the object.
    g.ee_x = view.cyl.center.x + std::cos(g.phi) * offset;
    g.ee_y = view.cyl.center.y + std::sin(g.phi) * offset;
    const auto contacts = oracle::compute_contacts(scene, g, config.sensors.physics);
    if (contacts.left || contacts.right) continue;  // grazed after all; redraw
    ++collected;
    if (probe_closure(scene, model, config, view, g, contacts) >= config.threshold) ++accepted;
  }
  return accepted;
}

const BenchmarkRow* BenchmarkTable::find(const std::string& model,
                                         const std::string& object_id) const {
  for (const auto& row : rows) {
    if (row.model == model && row.object_id == object_id) return &row;
  }
  return nullptr;
}

BenchmarkTable grasp_benchmark(const std::vector<world::ObjectModel>& objects,
                               const std::vector<std::pair<std::string, const learn::Model*>>& models,
                               int trials_per_object, const SelectionConfig& config,
                               uint64_t seed) {
  validate(config);
  if (trials_per_object < 0) throw ConfigError("trials_per_object must be non-negative");

  BenchmarkTable table;
  table.model_names.push_back("baseline");
  for (const auto& [name, model] : models) {
    if (model == nullptr) throw ConfigError("benchmark model '" + name + "' is null");
    table.model_names.push_back(name);
  }
  for (const auto& o : objects) table.object_ids.push_back(o.object_id);

  // Every (model, object, trial) triple is seeded independently, so the trials
  // can run in any order; results land in a flat array and the reduction below
  // walks it in one fixed order.
  const uint64_t stride = uint64_t(std::max(trials_per_object, 1));
  const size_t n_models = table.model_names.size();
  const int64_t n_trials = int64_t(n_models) * int64_t(objects.size()) * trials_per_object;
  struct TrialResult {
    bool success = false;
    double attempts = 0.0;
  };
  std::vector<TrialResult> results(size_t(std::max<int64_t>(n_trials, 0)));
  parallel_for(n_trials, [&](int64_t idx) {
    const int ti = int(idx % std::max(trials_per_object, 1));
    const size_t oi = size_t(idx / std::max(trials_per_object, 1)) % objects.size();
    const size_t mi = size_t(idx / std::max(trials_per_object, 1)) / objects.size();
    const uint64_t tseed =
        hash_u64(seed, (uint64_t(mi) * objects.size() + oi) * stride + uint64_t(ti));
    world::Scene scene = world::place_object(objects[oi], hash_u64(tseed, 11), config.table);
    TrialResult& res = results[size_t(idx)];
    if (mi == 0) {
      // Unfiltered collection-policy baseline: one blind closure and lift.
      auto depth_a = sensors::render_depth(scene, nullptr, config.sensors, sensors::SnapTag::Ta);
      auto cyl = oracle::fit_cylinder(depth_a, config.sensors.topdown);
      auto g =
          oracle::collection_policy(cyl, hash_u64(tseed, 13), config.force_lo, config.force_hi);
      auto contacts = oracle::compute_contacts(scene, g, config.sensors.physics);
      auto out =
          oracle::lift_outcome(scene, g, contacts, hash_u64(tseed, 17), config.sensors.physics);
      res.success = out.success;
      res.attempts = 1.0;
    } else {
      auto r = select_grasp(scene, *models[mi - 1].second, config, hash_u64(tseed, 19));
      res.success = r.accepted && r.lift_success.value_or(false);
      res.attempts = double(r.attempts);
    }
  });

  for (size_t mi = 0; mi < n_models; ++mi) {
    const std::string& name = table.model_names[mi];
    int total_successes = 0, total_trials = 0;
    double total_attempts = 0.0;
    for (size_t oi = 0; oi < objects.size(); ++oi) {
      BenchmarkRow row;
      row.model = name;
      row.object_id = objects[oi].object_id;
      double attempt_sum = 0.0;
      for (int ti = 0; ti < trials_per_object; ++ti) {
        const auto& res =
            results[(mi * objects.size() + oi) * size_t(trials_per_object) + size_t(ti)];
        if (res.success) ++row.successes;
        attempt_sum += res.attempts;
        ++row.trials;
      }
      row.mean_attempts = row.trials ? attempt_sum / row.trials : 0.0;
      total_successes += row.successes;
      total_trials += row.trials;
      total_attempts += attempt_sum;
      table.rows.push_back(std::move(row));
    }
    BenchmarkRow total;
    total.model = name;
    total.object_id = "TOTAL";
    total.trials = total_trials;
    total.successes = total_successes;
    total.mean_attempts = total_trials ? total_attempts / total_trials : 0.0;
    table.rows.push_back(std::move(total));
  }
  return table;
}

std::string benchmark_csv(const BenchmarkTable& table) {
  std::string out = "model,object_id,trials,successes,success_rate,mean_attempts\n";
  char buf[160];
  for (const auto& row : table.rows) {
    std::snprintf(buf, sizeof(buf), "%s,%s,%d,%d,%.4f,%.2f\n", row.model.c_str(),
                  row.object_id.c_str(), row.trials, row.successes, row.success_rate(),
                  row.mean_attempts);
    out += buf;
  }
  return out;
}

std::string benchmark_markdown(const BenchmarkTable& table) {
  std::string out = "| object |";
  for (const auto& name : table.model_names) out += " " + name + " |";
  out += "\n|---|";
  for (size_t i = 0; i < table.model_names.size(); ++i) out += "---|";
  out += "\n";
  char buf[64];
  auto emit = [&](const std::string& object_id, const char* shown, const char* fmt) {
    out += std::string("| ") + shown + " |";
    for (const auto& name : table.model_names) {
      const BenchmarkRow* row = table.find(name, object_id);
      if (row == nullptr || row->trials == 0) {
        out += " - |";
      } else {
        std::snprintf(buf, sizeof(buf), fmt, 100.0 * row->success_rate());
        out += std::string(" ") + buf + " |";
      }
    }
    out += "\n";
  };
  for (const auto& id : table.object_ids) emit(id, id.c_str(), "%.0f%%");
  emit("TOTAL", "TOT", "%.1f%%");
  return out;
}

}  // namespace grasplab::select
