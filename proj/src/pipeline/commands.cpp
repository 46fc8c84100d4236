#include "msmr/pipeline/commands.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <map>
#include <mutex>
#include <ostream>
#include <set>
#include <thread>

#include "msmr/error.hpp"
#include "msmr/hierarchy/hierarchy.hpp"
#include "msmr/numeric/checkpoint.hpp"
#include "msmr/numeric/rng.hpp"
#include "msmr/pipeline/dataset.hpp"
#include "msmr/pipeline/fs.hpp"
#include "msmr/scene/io.hpp"
#include "msmr/scene/render.hpp"

namespace msmr::pipeline {

using nlohmann::json;

namespace {

std::string fmt(const char* f, double v) {
  char b[64];
  std::snprintf(b, sizeof b, f, v);
  return b;
}

/// Runs body(i) for i in [0, n) on up to `threads` workers; rethrows the
/// failure with the lowest index.
template <class F>
void parallel_for(std::size_t n, std::size_t threads, F body) {
  threads = std::max<std::size_t>(1, std::min(threads, n));
  std::vector<std::exception_ptr> errors(n);
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) {
      try {
        body(i);
      } catch (...) {
        errors[i] = std::current_exception();
        break;
      }
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t)
      pool.emplace_back([&] {
        for (std::size_t i; !failed && (i = next++) < n;) {
          try {
            body(i);
          } catch (...) {
            errors[i] = std::current_exception();
            failed = true;
          }
        }
      });
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

scene::Camera camera_for(std::size_t size) {
  scene::Camera c;
  c.width = c.height = size;
  c.cx = c.cy = static_cast<double>(size) / 2.0;
  c.focal = 500.0 * static_cast<double>(size) / 224.0;
  return c;
}

std::string record_name(std::size_t i) {
  char b[32];
  std::snprintf(b, sizeof b, "scene_%05zu", i);
  return b;
}

}  // namespace

void build_hierarchy_command(const BuildHierarchyOptions& o, std::ostream& log) {
  const mesh::ArticulatedAsset asset = mesh::load_asset(mesh::asset_root(), o.asset);
  const auto lengths = o.spiral_lengths.empty() ? hierarchy::default_spiral_lengths(o.levels) : o.spiral_lengths;
  const hierarchy::MeshHierarchy h = hierarchy::build_hierarchy(asset.mesh, o.levels, lengths, o.finest);
  StagedDir dir(o.out, o.overwrite);
  hierarchy::save_hierarchy(h, dir.path());
  dir.commit();
  log << "hierarchy from " << o.asset << ":";
  for (std::size_t l = 0; l < h.level_count(); ++l) log << ' ' << h.size(l);
  log << " vertices -> " << o.out.string() << '\n';
}

GenScenesResult gen_scenes(const GenScenesOptions& o, std::ostream& log) {
  if (o.count == 0) throw ConfigError("--count must be positive");
  if (o.image_size < 8) throw ConfigError("--image-size must be at least 8");
  const scene::SceneAssets assets = scene::load_scene_assets(mesh::asset_root());
  scene::GenerationConfig cfg;
  cfg.mode = o.mode;
  cfg.camera = camera_for(o.image_size);

  StagedDir dir(o.out, o.overwrite);
  fs::create_directory(dir.path() / "scenes");
  fs::create_directory(dir.path() / "gt");
  const numeric::Rng root = numeric::Rng(o.seed).derive("generation");
  constexpr int kAttempts = 10;
  std::vector<ManifestRecord> records(o.count);
  std::vector<std::vector<std::string>> notes(o.count);
  std::atomic<std::size_t> retries{0};

  parallel_for(o.count, o.threads, [&](std::size_t i) {
    scene::Scene s;
    for (int attempt = 0;; ++attempt) {
      const std::uint64_t seed = root.derive(i).derive(static_cast<std::uint64_t>(attempt)).derive("seed").seed();
      try {
        s = scene::generate_interaction(seed, cfg, assets);
        break;
      } catch (const GenerationFailure& e) {
        ++retries;
        if (attempt + 1 == kAttempts) throw;
        notes[i].push_back(e.what());
      }
    }
    const scene::Render r = scene::rasterize(s);
    for (const std::string& w : r.warnings) notes[i].push_back(w);
    ManifestRecord rec;
    rec.name = record_name(i);
    rec.scene = "scenes/" + rec.name;
    rec.seed = s.seed;
    rec.mode = scene::to_string(s.mode);
    rec.camera = scene::to_json(s.camera);
    rec.target = o.mode == scene::Mode::HandHand ? 1 : 2;
    rec.gt = "gt/" + rec.name + ".json";
    const fs::path sdir = dir.path() / rec.scene;
    fs::create_directory(sdir);
    scene::write_scene_files(sdir, s, r);
    for (std::size_t k = 0; k < s.objects.size(); ++k) {
      const int id = s.objects[k].id;
      rec.object_ids.push_back(id);
      rec.gt_meshes[id] = rec.scene + "/object_" + std::to_string(id) + ".obj";
      const auto view = [](const scene::MaskImage& m) { return metrics::MaskView{m.width, m.height, m.labels.data()}; };
      if (r.only[k].count(static_cast<std::uint8_t>(id)) > 0)
        rec.vr[id] = metrics::visibility_ratio(view(r.scene), view(r.only[k]), static_cast<std::uint8_t>(id));
      if (id == rec.target) write_points(dir.path() / rec.gt, target_points(s, s.objects[k]));
    }
    records[i] = std::move(rec);
  });

  std::set<std::uint64_t> seeds;
  for (const ManifestRecord& r : records)
    if (!seeds.insert(r.seed).second) throw GenerationFailure(r.seed, "derived scene seed repeated");
  atomic_write_text(dir.path() / "manifest.jsonl", manifest_text(records));
  atomic_write_text(dir.path() / "generation.json",
                    json{{"seed", o.seed},
                         {"count", o.count},
                         {"mode", scene::to_string(o.mode)},
                         {"shift_step_m", cfg.shift_step},
                         {"angle_step_deg", cfg.angle_step_deg},
                         {"angle_limit_deg", cfg.angle_limit_deg},
                         {"camera", scene::to_json(cfg.camera)},
                         {"camera_distance_m", {cfg.camera_distance_min, cfg.camera_distance_max}}}
                            .dump(2) + "\n");
  dir.commit();
  for (std::size_t i = 0; i < o.count; ++i)
    for (const std::string& n : notes[i]) log << "warning: " << record_name(i) << ": " << n << '\n';
  log << "generated " << o.count << " scenes -> " << o.out.string() << '\n';
  return {o.count, retries.load()};
}

ExperimentConfig ExperimentConfig::toy(std::size_t levels) {
  ExperimentConfig c;
  c.model.image_size = 32;
  c.model.encoder_channels = {8, 16, 16};
  c.model.channels.assign(levels, 16);
  c.model.blocks_per_stage = 1;
  c.model.use_attention = true;
  c.model.attention_heads = 4;
  c.train.epochs = 30;
  c.train.lr = 1e-3;
  c.train.decay_every = 20;
  c.train.decay_factor = 0.5;
  c.train.batch_size = 8;
  c.train.augment = true;
  return c;
}

void ExperimentConfig::validate() const {
  if (hierarchy.empty()) throw ConfigError("experiment needs a hierarchy directory");
  if (!fs::exists(hierarchy / "hierarchy.json")) throw ConfigError("no hierarchy at " + hierarchy.string());
  if (train_fraction < 0.0 || test_fraction < 0.0 || std::abs(train_fraction + test_fraction - 1.0) > 1e-9)
    throw ConfigError("split fractions must be non-negative and sum to 1");
  if (model.image_size == 0) throw ConfigError("image_size must be positive");
}

json to_json(const ExperimentConfig& c) {
  return {{"hierarchy", c.hierarchy.string()},
          {"asset", c.asset},
          {"model", net::to_json(c.model)},
          {"train", net::to_json(c.train)},
          {"split", {{"train", c.train_fraction}, {"test", c.test_fraction}}},
          {"seed", c.seed}};
}

ExperimentConfig experiment_config_from_json(const json& j, ExperimentConfig c) {
  if (!j.is_object()) throw ConfigError("experiment config must be a JSON object");
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "hierarchy") c.hierarchy = value.get<std::string>();
      else if (key == "asset") c.asset = value.get<std::string>();
      else if (key == "model") {
        json merged = net::to_json(c.model);
        merged.update(value);
        c.model = net::model_config_from_json(merged);
      } else if (key == "train") {
        json merged = net::to_json(c.train);
        merged.update(value);
        c.train = net::train_config_from_json(merged);
      } else if (key == "split") {
        c.train_fraction = value.at("train").get<double>();
        c.test_fraction = value.at("test").get<double>();
      } else if (key == "seed") c.seed = value.get<std::uint64_t>();
      else throw ConfigError("unknown experiment config key '" + key + "'");
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed experiment config: ") + e.what());
  }
  return c;
}

namespace {

struct TrainingData {
  Manifest manifest;
  std::shared_ptr<const hierarchy::MeshHierarchy> hierarchy;
  std::unique_ptr<TemplateMapping> map;
  std::vector<std::size_t> records;
  std::vector<net::Sample> samples;
};

TrainingData load_training(const TrainOptions& o, std::ostream& log) {
  o.config.validate();
  TrainingData d;
  d.manifest = load_manifest(o.manifest);
  for (const std::string& w : d.manifest.warnings) log << "warning: " << w << '\n';
  d.hierarchy = std::make_shared<const hierarchy::MeshHierarchy>(hierarchy::load_hierarchy(o.config.hierarchy));
  d.map = std::make_unique<TemplateMapping>(d.hierarchy, mesh::load_asset(mesh::asset_root(), o.config.asset));
  d.records = split_indices(d.manifest.records.size(), o.config.train_fraction, o.config.seed, Split::Train);
  if (d.records.empty()) throw ConfigError("no training records in " + o.manifest.string());
  d.samples = load_samples(d.manifest, d.records, *d.map, o.config.model.image_size);
  return d;
}

TrainResult train_into(const TrainOptions& o, const ExperimentConfig& cfg, const TrainingData& d,
                       const fs::path& dir, std::ostream& log) {
  net::ModelConfig mc = cfg.model;
  net::TrainConfig tc = cfg.train;
  const numeric::Rng run(cfg.seed);
  mc.seed = run.derive("init").seed();
  tc.seed = run.derive("augmentation").seed();
  net::Model model(mc, d.hierarchy);

  TrainResult res;
  res.parameter_count = model.parameters().scalar_count();
  res.initial_loss = net::evaluate_loss(model, d.samples);
  std::string csv = "epoch,lr,loss\n";
  res.log = net::train(model, d.samples, tc, [&](const net::EpochLog& e) {
    if (!o.quiet) log << "epoch " << e.epoch << " lr " << e.lr << " loss " << fmt("%.6g", e.loss) << '\n';
  });
  for (const net::EpochLog& e : res.log)
    csv += std::to_string(e.epoch) + "," + fmt("%.17g", e.lr) + "," + fmt("%.17g", e.loss) + "\n";
  res.final_loss = net::evaluate_loss(model, d.samples);

  numeric::write_checkpoint(dir / "model.ckpt", numeric::snapshot(model.parameters()));
  atomic_write_text(dir / "log.csv", csv);
  json sidecar = {{"format_version", 1},
                  {"checkpoint", "model.ckpt"},
                  {"experiment", to_json(cfg)},
                  {"hierarchy", fs::absolute(cfg.hierarchy).string()},
                  {"asset_root", fs::absolute(mesh::asset_root()).string()},
                  {"effective_model", net::to_json(mc)},
                  {"effective_train", net::to_json(tc)},
                  {"manifest", fs::absolute(o.manifest).string()},
                  {"training_records", d.records.size()},
                  {"parameter_count", res.parameter_count},
                  {"initial_loss", res.initial_loss},
                  {"final_loss", res.final_loss}};
  atomic_write_text(dir / "ckpt.json", sidecar.dump(2) + "\n");
  return res;
}

}  // namespace

TrainResult train_toy(const TrainOptions& o, std::ostream& log) {
  const TrainingData d = load_training(o, log);
  StagedDir dir(o.out, o.overwrite);
  const TrainResult r = train_into(o, o.config, d, dir.path(), log);
  dir.commit();
  log << "trained " << r.parameter_count << " parameters on " << d.samples.size() << " samples: loss "
      << fmt("%.6g", r.initial_loss) << " -> " << fmt("%.6g", r.final_loss) << '\n';
  return r;
}

std::vector<AblationRow> run_ablation(const TrainOptions& o, std::ostream& log) {
  const TrainingData d = load_training(o, log);
  StagedDir dir(o.out, o.overwrite);
  struct Variant {
    const char* name;
    bool single_path, attention;
  };
  const Variant variants[] = {{"single-path", true, false}, {"multi-path", false, false}, {"multi-path+attention", false, true}};
  std::vector<AblationRow> rows;
  std::string csv = "variant,parameters,initial_loss,final_loss,first_epoch_loss,last_epoch_loss\n";
  json js = json::array();
  for (const Variant& v : variants) {
    ExperimentConfig cfg = o.config;
    cfg.model.single_path = v.single_path;
    cfg.model.use_attention = v.attention;
    fs::create_directory(dir.path() / v.name);
    log << "variant " << v.name << '\n';
    const TrainResult r = train_into(o, cfg, d, dir.path() / v.name, log);
    AblationRow row{v.name, r.parameter_count, r.initial_loss, r.final_loss, r.log.front().loss, r.log.back().loss};
    csv += row.variant + "," + std::to_string(row.parameter_count) + "," + fmt("%.17g", row.initial_loss) + "," +
           fmt("%.17g", row.final_loss) + "," + fmt("%.17g", row.first_epoch_loss) + "," +
           fmt("%.17g", row.last_epoch_loss) + "\n";
    js.push_back({{"variant", row.variant}, {"parameters", row.parameter_count}, {"initial_loss", row.initial_loss},
                  {"final_loss", row.final_loss}, {"first_epoch_loss", row.first_epoch_loss},
                  {"last_epoch_loss", row.last_epoch_loss}});
    rows.push_back(row);
  }
  atomic_write_text(dir.path() / "ablation.csv", csv);
  atomic_write_text(dir.path() / "ablation.json", js.dump(2) + "\n");
  dir.commit();
  log << "variant               | parameters | loss before | loss after\n";
  for (const AblationRow& r : rows) {
    char line[160];
    std::snprintf(line, sizeof line, "%-21s | %10zu | %11.6f | %10.6f\n", r.variant.c_str(), r.parameter_count,
                  r.initial_loss, r.final_loss);
    log << line;
  }
  return rows;
}

std::size_t predict_command(const PredictOptions& o, std::ostream& log) {
  json sidecar;
  try {
    sidecar = json::parse(read_text(o.checkpoint / "ckpt.json"));
  } catch (const json::exception& e) {
    throw IoError((o.checkpoint / "ckpt.json").string() + ": " + e.what());
  }
  const ExperimentConfig cfg = experiment_config_from_json(sidecar.at("experiment"), ExperimentConfig{});
  const net::ModelConfig mc = net::model_config_from_json(sidecar.at("effective_model"));
  auto h = std::make_shared<const hierarchy::MeshHierarchy>(hierarchy::load_hierarchy(sidecar.at("hierarchy").get<std::string>()));
  const TemplateMapping map(h, mesh::load_asset(mesh::asset_root(), cfg.asset));
  net::Model model(mc, h);
  numeric::restore(model.parameters(), numeric::read_checkpoint(o.checkpoint / sidecar.at("checkpoint").get<std::string>()));

  const Manifest m = load_manifest(o.manifest);
  for (const std::string& w : m.warnings) log << "warning: " << w << '\n';
  const auto idx = split_indices(m.records.size(), cfg.train_fraction, cfg.seed, parse_split(o.split));
  StagedDir dir(o.out, o.overwrite);
  for (std::size_t i : idx) {
    const ManifestRecord& r = m.records[i];
    const auto level0 = net::predict(model, load_image(m, r, mc.image_size));
    write_points(dir.path() / (r.name + ".json"), map.from_level0(level0));
  }
  dir.commit();
  log << "wrote " << idx.size() << " predictions -> " << o.out.string() << '\n';
  return idx.size();
}

namespace {

std::map<std::string, fs::path> json_files(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir.string());
  std::map<std::string, fs::path> out;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".json") out[e.path().stem().string()] = e.path();
  return out;
}

struct Pair {
  std::string name;
  fs::path pred, gt;
  std::optional<double> vr;
};

std::vector<metrics::EvalReport> evaluate_pairs(const std::vector<Pair>& pairs, std::size_t threads) {
  std::vector<metrics::EvalReport> reports(pairs.size());
  parallel_for(pairs.size(), threads, [&](std::size_t i) {
    const HandPoints p = read_points(pairs[i].pred), g = read_points(pairs[i].gt);
    if (p.vertices.size() != g.vertices.size() || p.joints.size() != g.joints.size())
      throw MetricError(pairs[i].name + ": " + std::to_string(p.vertices.size()) + "/" + std::to_string(p.joints.size()) +
                        " predicted vertices/joints vs " + std::to_string(g.vertices.size()) + "/" +
                        std::to_string(g.joints.size()) + " ground truth");
    reports[i] = metrics::evaluate(p.vertices, g.vertices, p.joints, g.joints);
    reports[i].vr = pairs[i].vr;
  });
  return reports;
}

std::optional<double> target_vr(const ManifestRecord& r) {
  const auto it = r.vr.find(r.target);
  return it == r.vr.end() ? std::nullopt : std::optional<double>(it->second);
}

}  // namespace

json eval_command(const EvalOptions& o, std::ostream& log) {
  const auto preds = json_files(o.pred), gts = json_files(o.gt);
  if (preds.size() != gts.size())
    throw MetricError("count mismatch: " + std::to_string(preds.size()) + " predictions in " + o.pred.string() + " vs " +
                      std::to_string(gts.size()) + " ground-truth files in " + o.gt.string());
  std::map<std::string, std::optional<double>> vr;
  if (o.manifest) {
    const Manifest m = load_manifest(*o.manifest);
    for (const ManifestRecord& r : m.records) vr[r.name] = target_vr(r);
  }
  std::vector<Pair> pairs;
  for (const auto& [name, path] : gts) {
    const auto it = preds.find(name);
    if (it == preds.end()) throw MetricError("no prediction for ground truth '" + name + "'");
    pairs.push_back({name, it->second, path, vr.count(name) ? vr[name] : std::nullopt});
  }
  if (pairs.empty()) throw MetricError("nothing to evaluate in " + o.gt.string());
  const auto reports = evaluate_pairs(pairs, o.threads);

  json samples = json::array();
  double mpjpe = 0, mpvpe = 0, auc = 0;
  std::map<double, double> f;
  for (std::size_t i = 0; i < reports.size(); ++i) {
    json s = metrics::to_json(reports[i]);
    s["name"] = pairs[i].name;
    samples.push_back(s);
    mpjpe += reports[i].pa_mpjpe;
    mpvpe += reports[i].pa_mpvpe;
    auc += reports[i].pck.auc;
    for (auto [t, v] : reports[i].f_scores) f[t] += v;
  }
  const double n = static_cast<double>(reports.size());
  json mean = {{"pa_mpjpe_mm", mpjpe / n}, {"pa_mpvpe_mm", mpvpe / n}, {"auc", auc / n}};
  for (auto [t, v] : f) mean["F@" + fmt("%g", t) + "mm"] = v / n;
  json report = {{"format_version", 1}, {"count", reports.size()}, {"mean", mean}, {"samples", samples}};
  if (o.manifest) {
    const metrics::BucketReport b = metrics::bucket_report(reports);
    report["vr_buckets"] = metrics::to_json(b);
    log << metrics::format_bucket_table(b);
  }
  atomic_write_text(o.out, report.dump(2) + "\n");
  log << "evaluated " << reports.size() << " samples: PA-MPJPE " << fmt("%.3f", mpjpe / n) << " mm, PA-MPVPE "
      << fmt("%.3f", mpvpe / n) << " mm, AUC " << fmt("%.3f", auc / n) << " -> " << o.out.string() << '\n';
  return report;
}

metrics::BucketReport vr_report(const VrReportOptions& o, std::ostream& log) {
  const Manifest m = load_manifest(o.manifest);
  for (const std::string& w : m.warnings) log << "warning: " << w << '\n';
  const auto preds = json_files(o.pred);
  std::vector<Pair> pairs;
  for (const ManifestRecord& r : m.records) {
    const auto it = preds.find(r.name);
    if (it == preds.end()) continue;
    pairs.push_back({r.name, it->second, m.root / r.gt, target_vr(r)});
  }
  if (pairs.size() != preds.size())
    throw MetricError("count mismatch: " + std::to_string(preds.size()) + " predictions but only " +
                      std::to_string(pairs.size()) + " match manifest records");
  if (pairs.empty()) throw MetricError("no predictions match the manifest");
  const metrics::BucketReport b = metrics::bucket_report(evaluate_pairs(pairs, 1));
  atomic_write_text(o.out, metrics::bucket_csv(b));
  log << metrics::format_bucket_table(b);
  return b;
}

}  // namespace msmr::pipeline
