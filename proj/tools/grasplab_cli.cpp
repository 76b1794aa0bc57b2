#include <cstdio>
#include <string>

#include "CLI11.hpp"
#include "grasplab.h"

namespace {

struct ConfigHandle {
  gl_config* ptr = nullptr;
  ~ConfigHandle() { gl_config_free(ptr); }
};

struct OutString {
  char* ptr = nullptr;
  ~OutString() { gl_string_free(ptr); }
};

int report_error(gl_status status) {
  std::fprintf(stderr, "error: %s\n", gl_last_error());
  return static_cast<int>(status);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"simulated visuo-tactile grasping study"};
  app.require_subcommand(1);

  std::string config_path, out_dir, modality;
  unsigned long long seed = 0;
  int split = 0;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON run configuration file");
    cmd->add_option("--out", out_dir, "override the output directory");
    cmd->add_option("--seed", seed, "override the master seed");
  };

  CLI::App* collect = app.add_subcommand("collect", "run grasp trials and write the dataset");
  add_common(collect);
  CLI::App* train = app.add_subcommand("train", "train one modality on one split");
  add_common(train);
  train->add_option("--modality", modality, "input set to train")->required();
  train->add_option("--split", split, "object-disjoint split index (0-2)");
  CLI::App* eval = app.add_subcommand("eval", "score all modalities across the splits");
  add_common(eval);
  CLI::App* grasp = app.add_subcommand("grasp", "benchmark grasp selection on fresh objects");
  add_common(grasp);
  CLI::App* report = app.add_subcommand("report", "assemble the summary page");
  add_common(report);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  ConfigHandle cfg;
  gl_status status = config_path.empty() ? gl_config_default(&cfg.ptr)
                                         : gl_config_load(config_path.c_str(), &cfg.ptr);
  if (status) return report_error(status);

  CLI::App* sub = app.get_subcommands().front();
  if (sub->count("--seed") && (status = gl_config_set_seed(cfg.ptr, seed)))
    return report_error(status);
  if (sub->count("--out") && (status = gl_config_set_out_dir(cfg.ptr, out_dir.c_str())))
    return report_error(status);

  OutString dataset, checkpoints;
  if ((status = gl_dataset_dir(cfg.ptr, &dataset.ptr))) return report_error(status);
  if ((status = gl_checkpoint_dir(cfg.ptr, &checkpoints.ptr))) return report_error(status);

  OutString text;
  const std::string& name = sub->get_name();
  if (name == "collect")
    status = gl_collect(cfg.ptr, &text.ptr);
  else if (name == "train")
    status = gl_train(cfg.ptr, dataset.ptr, modality.c_str(), split, &text.ptr);
  else if (name == "eval")
    status = gl_eval(cfg.ptr, dataset.ptr, checkpoints.ptr, &text.ptr);
  else if (name == "grasp")
    status = gl_grasp(cfg.ptr, dataset.ptr, checkpoints.ptr, &text.ptr);
  else
    status = gl_report(cfg.ptr, dataset.ptr, &text.ptr);
  if (status) return report_error(status);

  std::fputs(text.ptr, stdout);
  return 0;
}
