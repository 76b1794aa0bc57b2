#include "core/pipeline.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "core/errors.hpp"
#include "core/parallel.hpp"
#include "core/rng.hpp"

namespace fs = std::filesystem;

namespace grasplab::pipeline {

namespace {

constexpr geom::Rect kTable{-100.0, -100.0, 100.0, 100.0};

std::string join(const std::string& a, const std::string& b) {
  return (fs::path(a) / b).string();
}

void write_text(const std::string& path, const std::string& content) {
  fs::create_directories(fs::path(path).parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open file for writing: " + path);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw IoError("failed writing file: " + path);
}

std::string read_text_if_present(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return {};
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Procedural object set, families cycled, ids kept unique and outside `avoid`.
std::vector<world::ObjectModel> make_objects(int count, uint64_t base,
                                             const std::set<std::string>& avoid) {
  std::vector<world::ObjectModel> objects;
  std::set<std::string> ids(avoid);
  for (int i = 0; static_cast<int>(objects.size()) < count; ++i) {
    if (i > count * 8 + 64) throw ConfigError("could not generate enough distinct objects");
    auto obj = world::generate_object(hash_u64(base, static_cast<uint64_t>(i)),
                                      static_cast<world::ObjectFamily>(i % 4));
    if (ids.insert(obj.object_id).second) objects.push_back(std::move(obj));
  }
  return objects;
}

learn::Model load_checkpoint(const std::string& ckpt_dir, learn::Modality modality,
                             int split_index) {
  const std::string path = checkpoint_path(ckpt_dir, modality, split_index);
  if (!fs::exists(path))
    throw ConfigError(std::string("missing checkpoint for ") + learn::modality_name(modality) +
                      " (split " + std::to_string(split_index) + "): " + path);
  learn::Model m = learn::load_model(path);
  if (m.modality != modality)
    throw FormatError(std::string("checkpoint at ") + path + " holds modality " +
                      learn::modality_name(m.modality) + ", expected " +
                      learn::modality_name(modality));
  return m;
}

std::string pct(double fraction, double err) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.1f \xc2\xb1 %.1f", 100.0 * fraction, 100.0 * err);
  return buf;
}

}  // namespace

const std::array<learn::Modality, 7> kComparedModalities = {
    learn::Modality::fusion,       learn::Modality::tactile_both,
    learn::Modality::tactile_left, learn::Modality::tactile_right,
    learn::Modality::depth,        learn::Modality::vision,
    learn::Modality::vision_pose};

std::string dataset_dir(const config::RunConfig& cfg) { return join(cfg.out_dir, "dataset"); }
std::string checkpoint_dir(const config::RunConfig& cfg) {
  return join(cfg.out_dir, "checkpoints");
}
std::string reports_dir(const config::RunConfig& cfg) { return join(cfg.out_dir, "reports"); }

std::string checkpoint_path(const std::string& ckpt_dir, learn::Modality modality,
                            int split_index) {
  return join(ckpt_dir, std::string(learn::modality_name(modality)) + "_split" +
                            std::to_string(split_index) + ".gnet");
}

sensors::SensorConfig sensors_for(const config::RunConfig& cfg) {
  sensors::SensorConfig sc = sensors::make_sensor_config(cfg.seed);
  sc.camera.width = cfg.camera_px;
  sc.camera.height = cfg.camera_px;
  sc.topdown.px = cfg.camera_px;
  sc.gel_left.width = cfg.gel_width;
  sc.gel_left.height = cfg.gel_height;
  sc.gel_right.width = cfg.gel_width;
  sc.gel_right.height = cfg.gel_height;
  if (!cfg.noise) sc.physics.noise_sigma = 0.0;
  return sc;
}

trials::TrialContext context_for(const config::RunConfig& cfg) {
  trials::TrialContext ctx;
  ctx.sensors = sensors_for(cfg);
  ctx.force_lo = cfg.force_lo;
  ctx.force_hi = cfg.force_hi;
  ctx.labeler =
      trials::calibrate_labeler(ctx.sensors, hash_u64(cfg.seed, 0xca1), cfg.force_lo, cfg.force_hi);
  return ctx;
}

std::string CollectSummary::text() const {
  std::ostringstream ss;
  ss << "dataset: " << dir << "\n";
  ss << "trials: " << trials << "  objects: " << objects << "\n";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3f", positive_rate);
  ss << "positive rate: " << buf << " (" << positives << "/" << trials << ")\n";
  ss << "failure modes:";
  for (const char* name : {"none", "empty_grasp", "vertical_slip", "rotational_slip"}) {
    auto it = failure_modes.find(name);
    ss << " " << name << "=" << (it == failure_modes.end() ? 0 : it->second);
  }
  ss << "\n";
  return ss.str();
}

CollectSummary cmd_collect(const config::RunConfig& cfg) {
  config::validate(cfg);
  fs::create_directories(cfg.out_dir);
  write_text(join(cfg.out_dir, "config.json"), config::config_json(cfg));

  const trials::TrialContext ctx = context_for(cfg);
  const auto objects = make_objects(cfg.object_count, hash_u64(cfg.seed, 11), {});

  std::vector<trials::TrialRecord> records(static_cast<size_t>(cfg.trial_count));
  const uint64_t place_base = hash_u64(cfg.seed, 13);
  const uint64_t trial_base = hash_u64(cfg.seed, 17);
  parallel_for(cfg.trial_count, [&](int64_t i) {
    const auto& obj = objects[static_cast<size_t>(i) % objects.size()];
    world::Scene scene = world::place_object(obj, hash_u64(place_base, static_cast<uint64_t>(i)),
                                             kTable);
    records[static_cast<size_t>(i)] =
        trials::run_trial(scene, i, hash_u64(trial_base, static_cast<uint64_t>(i)), ctx);
  });

  trials::DatasetSetup setup;
  setup.sensor_seed = cfg.seed;
  setup.force_lo = cfg.force_lo;
  setup.force_hi = cfg.force_hi;
  setup.noise = cfg.noise;
  setup.label_threshold = ctx.labeler.threshold;

  const std::string dir = dataset_dir(cfg);
  if (fs::exists(join(dir, "manifest.jsonl"))) fs::remove_all(dir);  // regeneration
  trials::write_dataset(records, objects, setup, dir);

  CollectSummary s;
  s.dir = dir;
  s.trials = cfg.trial_count;
  s.objects = static_cast<int>(objects.size());
  for (const auto& r : records) {
    if (r.label) ++s.positives;
    ++s.failure_modes[oracle::failure_mode_name(r.oracle_outcome.failure_mode)];
  }
  s.positive_rate = s.trials ? static_cast<double>(s.positives) / s.trials : 0.0;
  return s;
}

std::string TrainOutcome::text() const {
  std::ostringstream ss;
  char buf[128];
  std::snprintf(buf, sizeof(buf), "loss %.4f -> %.4f  test accuracy %.3f", first_epoch_loss,
                last_epoch_loss, test_accuracy);
  ss << "checkpoint: " << checkpoint_path << "\n";
  ss << "train/test: " << train_count << "/" << test_count << "  " << buf << "\n";
  return ss.str();
}

TrainOutcome cmd_train(const config::RunConfig& cfg, const std::string& dataset,
                       learn::Modality modality, int split_index) {
  config::validate(cfg);
  if (split_index < 0 || split_index >= 3)
    throw ConfigError("split index must be 0, 1, or 2");

  const trials::DatasetManifest manifest = trials::read_dataset(dataset);
  const trials::SplitSpec split =
      trials::split_by_object(manifest, cfg.split_seeds[static_cast<size_t>(split_index)],
                              cfg.test_fraction);
  const learn::ModalityUses uses = learn::modality_uses(modality);
  const auto train_ex = learn::load_examples(manifest, split.train_object_ids, uses);
  const auto test_ex = learn::load_examples(manifest, split.test_object_ids, uses);

  learn::TrainConfig tc;
  tc.epochs = cfg.epochs;
  tc.lr = cfg.lr;
  tc.lr_late = cfg.lr_late;
  tc.batch = cfg.batch;
  tc.cam_px = cfg.camera_px;
  tc.tac_w = cfg.gel_width;
  tc.tac_h = cfg.gel_height;
  tc.seed = hash_u64(hash_u64(cfg.seed, 1009),
                     static_cast<uint64_t>(modality) * 8 + static_cast<uint64_t>(split_index));

  learn::TrainStats stats;
  const learn::Model model = learn::train(train_ex, modality, tc, &stats);
  const learn::Metrics metrics = learn::evaluate_model(model, test_ex);

  TrainOutcome out;
  out.checkpoint_path = checkpoint_path(checkpoint_dir(cfg), modality, split_index);
  out.metrics_path = out.checkpoint_path.substr(0, out.checkpoint_path.size() - 5) + ".json";
  out.train_count = static_cast<int>(train_ex.size());
  out.test_count = static_cast<int>(test_ex.size());
  out.first_epoch_loss = stats.first_epoch_loss;
  out.last_epoch_loss = stats.last_epoch_loss;
  out.test_accuracy = metrics.accuracy;

  fs::create_directories(checkpoint_dir(cfg));
  learn::save_model(model, out.checkpoint_path);

  nlohmann::ordered_json j;
  j["modality"] = learn::modality_name(modality);
  j["split"] = split_index;
  j["split_seed"] = cfg.split_seeds[static_cast<size_t>(split_index)];
  j["train_count"] = out.train_count;
  j["test_count"] = out.test_count;
  j["first_epoch_loss"] = out.first_epoch_loss;
  j["last_epoch_loss"] = out.last_epoch_loss;
  j["test_accuracy"] = out.test_accuracy;
  j["train_config"] = {{"epochs", tc.epochs}, {"lr", tc.lr},         {"lr_late", tc.lr_late},
                       {"batch", tc.batch},   {"seed", tc.seed},     {"cam_px", tc.cam_px},
                       {"tac_w", tc.tac_w},   {"tac_h", tc.tac_h}};
  write_text(out.metrics_path, j.dump(2) + "\n");
  return out;
}

const EvalRow* EvalReport::find(const std::string& name) const {
  for (const auto& row : rows)
    if (row.name == name) return &row;
  return nullptr;
}

EvalReport cmd_eval(const config::RunConfig& cfg, const std::string& dataset,
                    const std::string& checkpoints) {
  config::validate(cfg);
  const trials::DatasetManifest manifest = trials::read_dataset(dataset);

  // Row order mirrors the modality-comparison table.
  std::vector<std::string> row_names;
  for (auto m : kComparedModalities) {
    row_names.push_back(learn::modality_name(m));
    if (m == learn::Modality::depth) row_names.push_back("indentation");
  }
  row_names.push_back("chance");

  std::map<std::string, std::array<double, 3>> acc;
  learn::ModalityUses union_uses;
  union_uses.rgb = union_uses.tactile_l = union_uses.tactile_r = true;
  union_uses.depth = union_uses.pose = true;
  learn::ModalityUses tac_uses;
  tac_uses.tactile_l = tac_uses.tactile_r = true;

  for (int k = 0; k < 3; ++k) {
    const trials::SplitSpec split =
        trials::split_by_object(manifest, cfg.split_seeds[static_cast<size_t>(k)],
                                cfg.test_fraction);
    const auto test_ex = learn::load_examples(manifest, split.test_object_ids, union_uses);
    const auto train_tac = learn::load_examples(manifest, split.train_object_ids, tac_uses);

    for (auto m : kComparedModalities) {
      const learn::Model model = load_checkpoint(checkpoints, m, k);
      acc[learn::modality_name(m)][static_cast<size_t>(k)] =
          learn::evaluate_model(model, test_ex).accuracy;
    }

    std::vector<std::vector<double>> feats;
    std::vector<bool> labels;
    for (const auto& ex : train_tac) {
      feats.push_back({ex.indentation[0], ex.indentation[1]});
      labels.push_back(ex.label);
    }
    const learn::SvmModel svm = learn::train_linear_svm(feats, labels);
    int hit = 0;
    for (const auto& ex : test_ex)
      if (learn::predict_svm(svm, {ex.indentation[0], ex.indentation[1]}) == ex.label) ++hit;
    acc["indentation"][static_cast<size_t>(k)] =
        static_cast<double>(hit) / static_cast<double>(test_ex.size());

    acc["chance"][static_cast<size_t>(k)] = learn::chance_accuracy(train_tac, test_ex);
  }

  EvalReport report;
  for (const auto& name : row_names) {
    EvalRow row;
    row.name = name;
    row.per_split = acc.at(name);
    row.mean = (row.per_split[0] + row.per_split[1] + row.per_split[2]) / 3.0;
    double ss = 0.0;
    for (double a : row.per_split) ss += (a - row.mean) * (a - row.mean);
    row.std_err = std::sqrt(ss / 2.0) / std::sqrt(3.0);
    report.rows.push_back(row);
  }

  std::string csv = "model,mean_accuracy,std_err,split0,split1,split2\n";
  char buf[160];
  for (const auto& row : report.rows) {
    std::snprintf(buf, sizeof(buf), "%s,%.6f,%.6f,%.6f,%.6f,%.6f\n", row.name.c_str(), row.mean,
                  row.std_err, row.per_split[0], row.per_split[1], row.per_split[2]);
    csv += buf;
  }
  std::string md = "| model | accuracy (%) |\n|---|---|\n";
  for (const auto& row : report.rows)
    md += "| " + row.name + " | " + pct(row.mean, row.std_err) + " |\n";

  report.csv = csv;
  report.markdown = md;
  report.csv_path = join(reports_dir(cfg), "table1.csv");
  report.md_path = join(reports_dir(cfg), "table1.md");
  write_text(report.csv_path, csv);
  write_text(report.md_path, md);
  return report;
}

GraspReport cmd_grasp(const config::RunConfig& cfg, const std::string& dataset,
                      const std::string& checkpoints) {
  config::validate(cfg);
  const trials::DatasetManifest manifest = trials::read_dataset(dataset);
  std::set<std::string> known;
  for (const auto& o : manifest.objects) known.insert(o.object_id);
  const auto objects = make_objects(cfg.bench_objects, hash_u64(cfg.seed, 29), known);

  const learn::Model vision = load_checkpoint(checkpoints, learn::Modality::vision, 0);
  const learn::Model fusion = load_checkpoint(checkpoints, learn::Modality::fusion, 0);

  select::SelectionConfig sc;
  sc.threshold = cfg.threshold;
  sc.max_attempts = cfg.max_attempts;
  sc.force_lo = cfg.force_lo;
  sc.force_hi = cfg.force_hi;
  sc.table = kTable;
  sc.sensors = sensors_for(cfg);

  GraspReport report;
  report.table = select::grasp_benchmark(objects, {{"vision", &vision}, {"fusion", &fusion}},
                                         cfg.bench_trials, sc, hash_u64(cfg.seed, 31));
  report.csv = select::benchmark_csv(report.table);
  report.markdown = select::benchmark_markdown(report.table);
  report.csv_path = join(reports_dir(cfg), "table2.csv");
  report.md_path = join(reports_dir(cfg), "table2.md");
  write_text(report.csv_path, report.csv);
  write_text(report.md_path, report.markdown);
  return report;
}

std::string cmd_report(const config::RunConfig& cfg, const std::string& dataset) {
  config::validate(cfg);
  const trials::DatasetManifest manifest = trials::read_dataset(dataset);

  CollectSummary s;
  s.dir = dataset;
  s.trials = static_cast<int>(manifest.records.size());
  s.objects = static_cast<int>(manifest.objects.size());
  for (const auto& r : manifest.records) {
    if (r.label) ++s.positives;
    ++s.failure_modes[r.failure_mode];
  }
  s.positive_rate = s.trials ? static_cast<double>(s.positives) / s.trials : 0.0;

  std::ostringstream md;
  md << "# grasp outcome study\n\n## dataset\n\n```\n" << s.text() << "```\n";
  char buf[96];
  std::snprintf(buf, sizeof(buf), "force range [%.2f, %.2f] N, noise %s, label threshold %.6f\n",
                manifest.setup.force_lo, manifest.setup.force_hi,
                manifest.setup.noise ? "on" : "off", manifest.setup.label_threshold);
  md << "\n" << buf;

  const std::string t1 = read_text_if_present(join(reports_dir(cfg), "table1.md"));
  md << "\n## modality comparison\n\n"
     << (t1.empty() ? "not generated yet — run the eval command\n" : t1);
  const std::string t2 = read_text_if_present(join(reports_dir(cfg), "table2.md"));
  md << "\n## grasp benchmark\n\n"
     << (t2.empty() ? "not generated yet — run the grasp command\n" : t2);

  const std::string out = md.str();
  write_text(join(reports_dir(cfg), "report.md"), out);
  return out;
}

}  // namespace grasplab::pipeline
