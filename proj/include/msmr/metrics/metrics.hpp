#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "json.hpp"
#include "msmr/mesh/mesh.hpp"

namespace msmr::metrics {

using mesh::Vec3;
using Points = std::vector<Vec3>;

// Geometry is in meters; every reported error and threshold is millimeters.

struct Alignment {
  double scale = 1.0;
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Vec3 translation = Vec3::Zero();

  Vec3 apply(const Vec3& p) const { return scale * (rotation * p) + translation; }
  Points apply(const Points& p) const;
};

/// Similarity minimizing sum |s R pred_i + t - gt_i|^2 with det R = +1.
Alignment procrustes_align(const Points& pred, const Points& gt);

/// Mean point distance in mm, no alignment.
double mean_error_mm(const Points& pred, const Points& gt);
std::vector<double> point_errors_mm(const Points& pred, const Points& gt);
double pa_mpjpe(const Points& pred_joints, const Points& gt_joints);
double pa_mpvpe(const Points& pred_vertices, const Points& gt_vertices);

struct FScore {
  double precision = 0.0, recall = 0.0, f = 0.0;
};
/// On the points as given; callers align first.
FScore f_score(const Points& pred, const Points& gt, double threshold_mm);

struct PckCurve {
  std::vector<double> thresholds_mm;
  std::vector<double> pck;
  double auc = 0.0;  // mean of pck
};
/// Thresholds t_max k / n for k = 1..n; a joint counts when its error is at
/// most t (1e-9 mm slack absorbs unit-conversion rounding).
PckCurve pck_from_errors(const std::vector<double>& errors_mm, double t_max_mm = 20.0, int n = 20);
PckCurve pck_auc(const Points& pred_joints, const Points& gt_joints, double t_max_mm = 20.0, int n = 20);

struct MaskView {
  std::size_t width = 0, height = 0;
  const std::uint8_t* labels = nullptr;
};
/// Object pixels in the full scene over object pixels rendered alone.
double visibility_ratio(const MaskView& scene, const MaskView& only, std::uint8_t object_id);

struct EvalReport {
  double pa_mpjpe = 0.0;
  double pa_mpvpe = 0.0;
  std::map<double, double> f_scores;  // threshold mm -> F
  PckCurve pck;
  std::optional<double> vr;
};

/// Procrustes per point set, then every metric on the aligned points.
EvalReport evaluate(const Points& pred_vertices, const Points& gt_vertices, const Points& pred_joints,
                    const Points& gt_joints, const std::vector<double>& f_thresholds_mm = {5.0, 15.0});

nlohmann::json to_json(const EvalReport& r);

struct Bucket {
  double lo, hi;  // [lo, hi), the last one closed
  std::size_t count = 0;
  double mean_auc = 0.0;
  double mean_pose_error_mm = 0.0;  // PA-MPJPE
};

struct BucketReport {
  std::vector<Bucket> buckets;  // populated only
  std::size_t unbucketed = 0;   // VR below the first bucket or missing
};

std::vector<std::pair<double, double>> default_vr_buckets();
BucketReport bucket_report(const std::vector<EvalReport>& samples,
                           const std::vector<std::pair<double, double>>& edges = default_vr_buckets());
std::string format_bucket_table(const BucketReport& r);
std::string bucket_csv(const BucketReport& r);
nlohmann::json to_json(const BucketReport& r);

}  // namespace msmr::metrics
