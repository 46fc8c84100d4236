#include "msmr/metrics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include <Eigen/SVD>

#include "msmr/error.hpp"

namespace msmr::metrics {

namespace {

void check_pair(const Points& pred, const Points& gt, const char* what) {
  if (pred.size() != gt.size())
    throw ShapeError(std::string(what) + ": " + std::to_string(pred.size()) + " predicted vs " +
                     std::to_string(gt.size()) + " ground-truth points");
  if (pred.empty()) throw MetricError(std::string(what) + ": empty point set");
}

double mean(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()); }

}  // namespace

Points Alignment::apply(const Points& p) const {
  Points out;
  out.reserve(p.size());
  for (const Vec3& v : p) out.push_back(apply(v));
  return out;
}

Alignment procrustes_align(const Points& pred, const Points& gt) {
  check_pair(pred, gt, "procrustes");
  if (pred.size() < 3) throw MetricError("procrustes needs at least 3 points");
  const double n = static_cast<double>(pred.size());
  Vec3 mp = Vec3::Zero(), mg = Vec3::Zero();
  for (std::size_t i = 0; i < pred.size(); ++i) {
    mp += pred[i];
    mg += gt[i];
  }
  mp /= n;
  mg /= n;
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  double var_p = 0.0, var_g = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const Vec3 p = pred[i] - mp, g = gt[i] - mg;
    cov += g * p.transpose();
    var_p += p.squaredNorm();
    var_g += g.squaredNorm();
  }
  if (var_g <= 0.0) throw MetricError("procrustes: ground-truth points all coincide");

  Alignment a;
  if (var_p <= 0.0) {
    a.scale = 0.0;
    a.translation = mg;
    return a;
  }
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Vector3d s = svd.singularValues();
  Eigen::Vector3d d(1, 1, (svd.matrixU() * svd.matrixV().transpose()).determinant() < 0 ? -1 : 1);
  a.rotation = svd.matrixU() * d.asDiagonal() * svd.matrixV().transpose();
  a.scale = s.dot(d) / var_p;
  a.translation = mg - a.scale * a.rotation * mp;
  return a;
}

std::vector<double> point_errors_mm(const Points& pred, const Points& gt) {
  check_pair(pred, gt, "point errors");
  std::vector<double> e(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i) e[i] = 1000.0 * (pred[i] - gt[i]).norm();
  return e;
}

double mean_error_mm(const Points& pred, const Points& gt) { return mean(point_errors_mm(pred, gt)); }

double pa_mpjpe(const Points& pred_joints, const Points& gt_joints) {
  return mean_error_mm(procrustes_align(pred_joints, gt_joints).apply(pred_joints), gt_joints);
}

double pa_mpvpe(const Points& pred_vertices, const Points& gt_vertices) { return pa_mpjpe(pred_vertices, gt_vertices); }

FScore f_score(const Points& pred, const Points& gt, double threshold_mm) {
  if (threshold_mm <= 0.0) throw MetricError("f-score threshold must be positive");
  if (pred.empty() || gt.empty()) throw MetricError("f-score of an empty point set");
  const double t = threshold_mm / 1000.0;
  auto within = [t](const Points& from, const Points& to) {
    std::size_t hit = 0;
    for (const Vec3& p : from) {
      double best = INFINITY;
      for (const Vec3& q : to) best = std::min(best, (p - q).squaredNorm());
      if (std::sqrt(best) < t) ++hit;
    }
    return static_cast<double>(hit) / static_cast<double>(from.size());
  };
  FScore f;
  f.precision = within(pred, gt);
  f.recall = within(gt, pred);
  f.f = f.precision + f.recall > 0.0 ? 2.0 * f.precision * f.recall / (f.precision + f.recall) : 0.0;
  return f;
}

PckCurve pck_from_errors(const std::vector<double>& errors_mm, double t_max_mm, int n) {
  if (errors_mm.empty()) throw MetricError("pck of an empty joint set");
  if (n <= 0 || t_max_mm <= 0.0) throw MetricError("pck needs a positive threshold count and range");
  PckCurve c;
  for (int k = 1; k <= n; ++k) {
    const double t = t_max_mm * k / n;
    const auto hit = std::count_if(errors_mm.begin(), errors_mm.end(), [t](double e) { return e <= t + 1e-9; });
    c.thresholds_mm.push_back(t);
    c.pck.push_back(static_cast<double>(hit) / static_cast<double>(errors_mm.size()));
  }
  c.auc = mean(c.pck);
  return c;
}

PckCurve pck_auc(const Points& pred_joints, const Points& gt_joints, double t_max_mm, int n) {
  return pck_from_errors(point_errors_mm(pred_joints, gt_joints), t_max_mm, n);
}

double visibility_ratio(const MaskView& scene, const MaskView& only, std::uint8_t object_id) {
  if (scene.width != only.width || scene.height != only.height)
    throw ShapeError("visibility ratio: mask sizes differ");
  const std::size_t n = scene.width * scene.height;
  const auto visible = std::count(scene.labels, scene.labels + n, object_id);
  const auto total = std::count(only.labels, only.labels + n, object_id);
  if (total == 0) throw MetricError("visibility ratio undefined: object " + std::to_string(object_id) + " absent from its own mask");
  return static_cast<double>(visible) / static_cast<double>(total);
}

EvalReport evaluate(const Points& pred_vertices, const Points& gt_vertices, const Points& pred_joints,
                    const Points& gt_joints, const std::vector<double>& f_thresholds_mm) {
  EvalReport r;
  const Points jv = procrustes_align(pred_joints, gt_joints).apply(pred_joints);
  const Points vv = procrustes_align(pred_vertices, gt_vertices).apply(pred_vertices);
  const std::vector<double> je = point_errors_mm(jv, gt_joints);
  r.pa_mpjpe = mean(je);
  r.pa_mpvpe = mean_error_mm(vv, gt_vertices);
  for (double t : f_thresholds_mm) r.f_scores[t] = f_score(vv, gt_vertices, t).f;
  r.pck = pck_from_errors(je);
  return r;
}

nlohmann::json to_json(const EvalReport& r) {
  nlohmann::json f = nlohmann::json::object();
  for (auto [t, v] : r.f_scores) {
    char key[32];
    std::snprintf(key, sizeof key, "F@%gmm", t);
    f[key] = v;
  }
  nlohmann::json j = {{"pa_mpjpe_mm", r.pa_mpjpe}, {"pa_mpvpe_mm", r.pa_mpvpe}, {"f_scores", f},
                      {"pck_thresholds_mm", r.pck.thresholds_mm}, {"pck", r.pck.pck}, {"auc", r.pck.auc}};
  j["vr"] = r.vr ? nlohmann::json(*r.vr) : nlohmann::json();
  return j;
}

std::vector<std::pair<double, double>> default_vr_buckets() {
  return {{0.40, 0.60}, {0.60, 0.80}, {0.80, 0.95}, {0.95, 1.00}};
}

BucketReport bucket_report(const std::vector<EvalReport>& samples, const std::vector<std::pair<double, double>>& edges) {
  std::vector<Bucket> all;
  for (auto [lo, hi] : edges) all.push_back({lo, hi});
  BucketReport out;
  for (const EvalReport& s : samples) {
    std::size_t b = all.size();
    if (s.vr)
      for (std::size_t i = 0; i < all.size(); ++i) {
        const bool last = i + 1 == all.size();
        if (*s.vr >= all[i].lo && (*s.vr < all[i].hi || (last && *s.vr <= all[i].hi))) {
          b = i;
          break;
        }
      }
    if (b == all.size()) {
      ++out.unbucketed;
      continue;
    }
    ++all[b].count;
    all[b].mean_auc += s.pck.auc;
    all[b].mean_pose_error_mm += s.pa_mpjpe;
  }
  for (Bucket& b : all)
    if (b.count) {
      b.mean_auc /= static_cast<double>(b.count);
      b.mean_pose_error_mm /= static_cast<double>(b.count);
      out.buckets.push_back(b);
    }
  return out;
}

std::string format_bucket_table(const BucketReport& r) {
  std::string s = "VR value range | samples | AUC   | PA-MPJPE (mm)\n";
  char line[128];
  for (const Bucket& b : r.buckets) {
    std::snprintf(line, sizeof line, "[%.2f, %.2f]   | %7zu | %.3f | %.2f\n", b.lo, b.hi, b.count, b.mean_auc,
                  b.mean_pose_error_mm);
    s += line;
  }
  if (r.unbucketed) s += "outside buckets: " + std::to_string(r.unbucketed) + "\n";
  return s;
}

std::string bucket_csv(const BucketReport& r) {
  std::string s = "vr_lo,vr_hi,count,mean_auc,mean_pa_mpjpe_mm\n";
  char line[160];
  for (const Bucket& b : r.buckets) {
    std::snprintf(line, sizeof line, "%.2f,%.2f,%zu,%.17g,%.17g\n", b.lo, b.hi, b.count, b.mean_auc, b.mean_pose_error_mm);
    s += line;
  }
  return s;
}

nlohmann::json to_json(const BucketReport& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const Bucket& b : r.buckets)
    rows.push_back({{"vr_lo", b.lo}, {"vr_hi", b.hi}, {"count", b.count}, {"mean_auc", b.mean_auc},
                    {"mean_pa_mpjpe_mm", b.mean_pose_error_mm}});
  return {{"buckets", rows}, {"unbucketed", r.unbucketed}};
}

}  // namespace msmr::metrics
