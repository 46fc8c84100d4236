#include <cstdlib>
#include <ostream>

#include "CLI11.hpp"
#include "msmr/error.hpp"
#include "msmr/hierarchy/hierarchy.hpp"
#include "msmr/pipeline/commands.hpp"
#include "msmr/pipeline/fs.hpp"

namespace msmr::pipeline {

namespace {

ExperimentConfig assemble_experiment(const std::string& config_path, const std::string& hierarchy_flag) {
  nlohmann::json file = nlohmann::json::object();
  if (!config_path.empty()) {
    try {
      file = nlohmann::json::parse(read_text(config_path));
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(config_path + ": " + e.what());
    }
  }
  fs::path h = hierarchy_flag;
  if (h.empty() && file.contains("hierarchy")) h = file["hierarchy"].get<std::string>();
  if (h.empty()) throw ConfigError("train-toy needs --hierarchy or a config with \"hierarchy\"");
  const std::size_t levels = hierarchy::load_hierarchy(h).level_count();
  ExperimentConfig c = experiment_config_from_json(file, ExperimentConfig::toy(levels));
  c.hierarchy = h;
  return c;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multi-resolution hand mesh reconstruction: hierarchy, synthetic scenes, training and evaluation", "msmr"};
  app.require_subcommand(1);
  std::string asset_root;
  app.add_option("--asset-root", asset_root, "Directory holding hand_left/hand_right/object assets");

  BuildHierarchyOptions bh;
  std::string bh_out;
  auto* c_bh = app.add_subcommand("build-hierarchy", "Decimate a template into a mesh hierarchy");
  c_bh->add_option("--out", bh_out, "Output directory")->required();
  c_bh->add_option("--asset", bh.asset, "Asset file stem")->capture_default_str();
  c_bh->add_option("--levels", bh.levels, "Number of levels")->capture_default_str()->check(CLI::PositiveNumber);
  c_bh->add_option("--finest", bh.finest, "Vertices of level 0 (0 keeps the template)")->capture_default_str();
  c_bh->add_option("--spiral-lengths", bh.spiral_lengths, "Spiral length per level, finest first");
  c_bh->add_flag("--overwrite", bh.overwrite, "Replace an existing output directory");

  GenScenesOptions gs;
  std::string gs_out, gs_mode = "hand-hand";
  auto* c_gs = app.add_subcommand("gen-scenes", "Generate interacting-hand scenes with masks");
  c_gs->add_option("--out", gs_out, "Output directory")->required();
  c_gs->add_option("--count", gs.count, "Number of scenes")->capture_default_str();
  c_gs->add_option("--seed", gs.seed, "Run seed")->capture_default_str();
  c_gs->add_option("--mode", gs_mode, "hand-hand or hand-object")->capture_default_str();
  c_gs->add_option("--threads", gs.threads, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
  c_gs->add_option("--image-size", gs.image_size, "Rendered image side in pixels")->capture_default_str();
  c_gs->add_flag("--overwrite", gs.overwrite, "Replace an existing output directory");

  TrainOptions tr;
  std::string tr_manifest, tr_out, tr_config, tr_hierarchy;
  std::optional<int> epochs;
  std::optional<double> lr, train_fraction;
  std::optional<std::size_t> batch, image_size;
  std::optional<std::uint64_t> seed;
  bool single_path = false, no_attention = false, no_augment = false;
  auto* c_tr = app.add_subcommand("train-toy", "Train the multi-resolution decoder on generated scenes");
  c_tr->add_option("--manifest", tr_manifest, "Scene manifest (manifest.jsonl)")->required();
  c_tr->add_option("--out", tr_out, "Checkpoint directory")->required();
  c_tr->add_option("--hierarchy", tr_hierarchy, "Hierarchy directory");
  c_tr->add_option("--config", tr_config, "Experiment config JSON");
  c_tr->add_option("--epochs", epochs, "Training epochs");
  c_tr->add_option("--lr", lr, "Initial learning rate");
  c_tr->add_option("--batch-size", batch, "Batch size");
  c_tr->add_option("--image-size", image_size, "Network input side in pixels");
  c_tr->add_option("--train-fraction", train_fraction, "Fraction of records used for training");
  c_tr->add_option("--seed", seed, "Run seed");
  c_tr->add_flag("--single-path", single_path, "Keep one resolution per decoder stage");
  c_tr->add_flag("--no-attention", no_attention, "Drop the transformer block");
  c_tr->add_flag("--no-augment", no_augment, "Disable crop/rotation augmentation");
  c_tr->add_flag("--ablation", tr.ablation, "Train single-path, multi-path and multi-path+attention variants");
  c_tr->add_flag("--quiet", tr.quiet, "Only print the summary");
  c_tr->add_flag("--overwrite", tr.overwrite, "Replace an existing output directory");

  PredictOptions pr;
  std::string pr_ckpt, pr_manifest, pr_out;
  auto* c_pr = app.add_subcommand("predict", "Predict hand meshes for manifest scenes");
  c_pr->add_option("--checkpoint", pr_ckpt, "Directory written by train-toy")->required();
  c_pr->add_option("--manifest", pr_manifest, "Scene manifest")->required();
  c_pr->add_option("--out", pr_out, "Prediction directory")->required();
  c_pr->add_option("--split", pr.split, "all, train or test")->capture_default_str();
  c_pr->add_flag("--overwrite", pr.overwrite, "Replace an existing output directory");

  EvalOptions ev;
  std::string ev_pred, ev_gt, ev_out, ev_manifest;
  auto* c_ev = app.add_subcommand("eval", "PA-MPJPE, PA-MPVPE, F-scores and PCK/AUC");
  c_ev->add_option("--pred", ev_pred, "Prediction directory")->required();
  c_ev->add_option("--gt", ev_gt, "Ground-truth directory")->required();
  c_ev->add_option("--out", ev_out, "Report JSON")->required();
  c_ev->add_option("--manifest", ev_manifest, "Manifest for visibility ratios");
  c_ev->add_option("--threads", ev.threads, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);

  VrReportOptions vr;
  std::string vr_manifest, vr_pred, vr_out;
  auto* c_vr = app.add_subcommand("vr-report", "Metrics bucketed by visibility ratio");
  c_vr->add_option("--manifest", vr_manifest, "Scene manifest")->required();
  c_vr->add_option("--pred", vr_pred, "Prediction directory")->required();
  c_vr->add_option("--out", vr_out, "CSV output")->required();

  std::vector<std::string> argv_store = {"msmr"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (std::string& a : argv_store) argv.push_back(a.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (!asset_root.empty()) ::setenv("MSMR_ASSET_ROOT", asset_root.c_str(), 1);
    if (c_bh->parsed()) {
      bh.out = bh_out;
      build_hierarchy_command(bh, out);
    } else if (c_gs->parsed()) {
      gs.out = gs_out;
      gs.mode = scene::parse_mode(gs_mode);
      gen_scenes(gs, out);
    } else if (c_tr->parsed()) {
      tr.manifest = tr_manifest;
      tr.out = tr_out;
      tr.config = assemble_experiment(tr_config, tr_hierarchy);
      if (epochs) tr.config.train.epochs = *epochs;
      if (lr) tr.config.train.lr = *lr;
      if (batch) tr.config.train.batch_size = *batch;
      if (image_size) tr.config.model.image_size = *image_size;
      if (seed) tr.config.seed = *seed;
      if (train_fraction) {
        tr.config.train_fraction = *train_fraction;
        tr.config.test_fraction = 1.0 - *train_fraction;
      }
      if (single_path) tr.config.model.single_path = true;
      if (no_attention) tr.config.model.use_attention = false;
      if (no_augment) tr.config.train.augment = false;
      if (tr.ablation) run_ablation(tr, out);
      else train_toy(tr, out);
    } else if (c_pr->parsed()) {
      pr.checkpoint = pr_ckpt;
      pr.manifest = pr_manifest;
      pr.out = pr_out;
      predict_command(pr, out);
    } else if (c_ev->parsed()) {
      ev.pred = ev_pred;
      ev.gt = ev_gt;
      ev.out = ev_out;
      if (!ev_manifest.empty()) ev.manifest = fs::path(ev_manifest);
      eval_command(ev, out);
    } else if (c_vr->parsed()) {
      vr.manifest = vr_manifest;
      vr.pred = vr_pred;
      vr.out = vr_out;
      vr_report(vr, out);
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace msmr::pipeline
