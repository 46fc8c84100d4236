#include <cmath>
#include <random>

#include <Eigen/Geometry>

#include "doctest.h"
#include "msmr/error.hpp"
#include "msmr/metrics/metrics.hpp"

using namespace msmr::metrics;

namespace {

Eigen::Matrix3d random_rotation(std::mt19937_64& gen) {
  std::normal_distribution<double> n;
  return Eigen::Quaterniond(n(gen), n(gen), n(gen), n(gen)).normalized().toRotationMatrix();
}

Points random_points(std::size_t count, std::mt19937_64& gen, double scale = 0.1) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Points p;
  for (std::size_t i = 0; i < count; ++i) p.emplace_back(u(gen), u(gen), u(gen));
  return p;
}

Points similarity(const Points& p, double s, const Eigen::Matrix3d& r, const Vec3& t) {
  Points out;
  for (const Vec3& v : p) out.push_back(s * (r * v) + t);
  return out;
}

double residual(const Alignment& a, const Points& pred, const Points& gt) {
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) sum += (a.apply(pred[i]) - gt[i]).squaredNorm();
  return sum;
}

Points cube() {
  Points c;
  for (int i = 0; i < 8; ++i) c.emplace_back(i & 1, (i >> 1) & 1, (i >> 2) & 1);
  return c;
}

MaskView view(std::size_t w, std::size_t h, const std::vector<std::uint8_t>& labels) { return {w, h, labels.data()}; }

EvalReport sample(double vr, double auc, double err) {
  EvalReport r;
  r.vr = vr;
  r.pck.auc = auc;
  r.pa_mpjpe = err;
  return r;
}

}  // namespace

TEST_CASE("procrustes alignment") {
  std::mt19937_64 gen(1);
  const Points gt = random_points(21, gen);
  const Alignment id = procrustes_align(gt, gt);
  CHECK(id.scale == doctest::Approx(1.0).epsilon(1e-12));
  CHECK((id.rotation - Eigen::Matrix3d::Identity()).norm() < 1e-9);
  CHECK(id.translation.norm() < 1e-9);

  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Matrix3d r0 = random_rotation(gen);
    const Vec3 t0(0.3, -0.2, 0.5);
    const Points pred = similarity(gt, 2.0, r0, t0);
    const Alignment a = procrustes_align(pred, gt);
    CHECK(a.scale == doctest::Approx(0.5).epsilon(1e-12));
    CHECK((a.rotation - r0.transpose()).norm() < 1e-9);
    CHECK(residual(a, pred, gt) < 1e-18);
    CHECK((a.rotation.transpose() * a.rotation - Eigen::Matrix3d::Identity()).norm() < 1e-9);
    CHECK(a.rotation.determinant() == doctest::Approx(1.0).epsilon(1e-9));
  }

  // mirrored input: a proper rotation is still returned
  Points mirrored = gt;
  for (Vec3& v : mirrored) v.x() = -v.x();
  const Alignment m = procrustes_align(mirrored, gt);
  CHECK(m.rotation.determinant() == doctest::Approx(1.0).epsilon(1e-9));

  // planar (rank-deficient) input stays deterministic and proper
  Points flat = gt;
  for (Vec3& v : flat) v.z() = 0.0;
  const Alignment f1 = procrustes_align(flat, flat), f2 = procrustes_align(flat, flat);
  CHECK(f1.rotation == f2.rotation);
  CHECK(f1.rotation.determinant() == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(residual(f1, flat, flat) < 1e-18);

  CHECK_THROWS_AS(procrustes_align(Points(2, Vec3::Zero()), Points(2, Vec3::Zero())), msmr::MetricError);
  CHECK_THROWS_AS(procrustes_align(gt, Points(21, Vec3::Ones())), msmr::MetricError);
  CHECK_THROWS_AS(procrustes_align(gt, Points(3, Vec3::Ones())), msmr::ShapeError);
}

TEST_CASE("procrustes beats random similarity search") {
  std::mt19937_64 gen(2);
  const Points gt = random_points(21, gen);
  Points pred = similarity(gt, 1.3, random_rotation(gen), Vec3(0.1, 0.2, 0.3));
  std::normal_distribution<double> noise(0.0, 0.01);
  for (Vec3& v : pred) v += Vec3(noise(gen), noise(gen), noise(gen));
  const Alignment best = procrustes_align(pred, gt);
  const double r_best = residual(best, pred, gt);
  std::uniform_real_distribution<double> sc(0.2, 2.0), tr(-1.0, 1.0);
  std::normal_distribution<double> small(0.0, 1e-3);
  int beaten = 0;
  for (int i = 0; i < 100000; ++i) {
    Alignment a;
    if (i % 2 == 0) {
      a.scale = sc(gen);
      a.rotation = random_rotation(gen);
      a.translation = Vec3(tr(gen), tr(gen), tr(gen));
    } else {
      a.scale = best.scale * (1.0 + small(gen));
      a.rotation = Eigen::AngleAxisd(std::abs(small(gen)), Vec3(small(gen), small(gen), small(gen)).normalized())
                       .toRotationMatrix() * best.rotation;
      a.translation = best.translation + Vec3(small(gen), small(gen), small(gen));
    }
    if (residual(a, pred, gt) < r_best) ++beaten;
  }
  CHECK(beaten == 0);
}

TEST_CASE("pose errors") {
  std::mt19937_64 gen(3);
  const Points gt = random_points(21, gen);
  CHECK(pa_mpjpe(gt, gt) < 1e-9);
  CHECK(mean_error_mm(gt, gt) == 0.0);

  const Points c = cube();
  Points moved = c;
  moved[5].y() -= 0.008;  // outward
  const Eigen::Matrix3d r = random_rotation(gen);
  const Points rigid = similarity(moved, 1.0, r, Vec3(1, 2, 3));
  CHECK(mean_error_mm(moved, c) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(pa_mpjpe(rigid, c) == doctest::Approx(1.8337084439560158).epsilon(1e-9));

  Points noisy = gt;
  std::normal_distribution<double> n(0.0, 0.005);
  for (Vec3& v : noisy) v += Vec3(n(gen), n(gen), n(gen));
  const double base = pa_mpjpe(noisy, gt);
  for (int i = 0; i < 1000; ++i) {
    std::uniform_real_distribution<double> s(0.1, 10.0), t(-2.0, 2.0);
    const Points p = similarity(noisy, s(gen), random_rotation(gen), Vec3(t(gen), t(gen), t(gen)));
    CHECK(std::abs(pa_mpjpe(p, gt) - base) < 1e-9);
  }
  CHECK(pa_mpvpe(noisy, gt) == doctest::Approx(base));
}

TEST_CASE("f-score") {
  std::mt19937_64 gen(4);
  const Points gt = random_points(10, gen);
  for (double d : {0.1, 5.0, 15.0}) {
    const FScore f = f_score(gt, gt, d);
    CHECK(f.f == 1.0);
  }
  Points far = gt;
  for (Vec3& v : far) v += Vec3(10, 0, 0);
  CHECK(f_score(far, gt, 15.0).f == 0.0);

  Points outlier = gt;
  outlier.emplace_back(5, 5, 5);
  const FScore f = f_score(outlier, gt, 5.0);
  CHECK(f.precision == doctest::Approx(10.0 / 11.0));
  CHECK(f.recall == 1.0);
  CHECK(f.f == doctest::Approx(20.0 / 21.0));
  const FScore swapped = f_score(gt, outlier, 5.0);
  CHECK(swapped.precision == f.recall);
  CHECK(swapped.recall == f.precision);
  CHECK(swapped.f == f.f);

  CHECK_THROWS_AS(f_score({}, gt, 5.0), msmr::MetricError);
  CHECK_THROWS_AS(f_score(gt, gt, 0.0), msmr::MetricError);
}

TEST_CASE("pck and auc") {
  std::mt19937_64 gen(5);
  const Points gt = random_points(21, gen);
  const PckCurve zero = pck_auc(gt, gt);
  CHECK(zero.auc == 1.0);
  REQUIRE(zero.thresholds_mm.size() == 20);
  CHECK(zero.thresholds_mm.front() == 1.0);
  CHECK(zero.thresholds_mm.back() == 20.0);

  Points far = gt;
  for (Vec3& v : far) v.x() += 0.021;
  CHECK(pck_auc(far, gt).auc == 0.0);

  // every joint exactly 10 mm off, in different directions
  Points ten = gt;
  for (std::size_t i = 0; i < ten.size(); ++i) {
    std::normal_distribution<double> n;
    Vec3 d(n(gen), n(gen), n(gen));
    ten[i] += 0.010 * d.normalized();
  }
  const PckCurve c = pck_auc(ten, gt);
  for (std::size_t k = 0; k < 20; ++k) CHECK(c.pck[k] == (k + 1 >= 10 ? 1.0 : 0.0));
  CHECK(c.auc == doctest::Approx(0.55).epsilon(1e-12));

  std::uniform_real_distribution<double> e(0.0, 30.0);
  std::vector<double> errs;
  for (int i = 0; i < 100; ++i) errs.push_back(e(gen));
  const PckCurve m = pck_from_errors(errs);
  for (std::size_t k = 1; k < m.pck.size(); ++k) CHECK(m.pck[k] >= m.pck[k - 1]);
  CHECK(m.auc >= 0.0);
  CHECK(m.auc <= 1.0);
}

TEST_CASE("visibility ratio") {
  std::vector<std::uint8_t> alone(400, 0), scene(400, 0);
  for (std::size_t i = 0; i < 200; ++i) alone[i] = 2;
  CHECK(visibility_ratio(view(20, 20, alone), view(20, 20, alone), 2) == 1.0);
  for (std::size_t i = 0; i < 120; ++i) scene[i] = 2;
  for (std::size_t i = 120; i < 200; ++i) scene[i] = 1;
  CHECK(visibility_ratio(view(20, 20, scene), view(20, 20, alone), 2) == doctest::Approx(0.6));
  CHECK_THROWS_AS(visibility_ratio(view(20, 20, scene), view(20, 20, alone), 3), msmr::MetricError);
  CHECK_THROWS_AS(visibility_ratio(view(10, 40, scene), view(20, 20, alone), 2), msmr::ShapeError);
}

TEST_CASE("evaluation report") {
  std::mt19937_64 gen(6);
  const Points gv = random_points(50, gen), gj = random_points(21, gen);
  const EvalReport r = evaluate(similarity(gv, 2.0, random_rotation(gen), Vec3(1, 1, 1)), gv,
                                similarity(gj, 0.5, random_rotation(gen), Vec3(0, 1, 0)), gj);
  CHECK(r.pa_mpjpe < 1e-9);
  CHECK(r.pa_mpvpe < 1e-9);
  CHECK(r.f_scores.at(5.0) == 1.0);
  CHECK(r.f_scores.at(15.0) == 1.0);
  CHECK(r.pck.auc == 1.0);
  const auto j = to_json(r);
  CHECK(j.at("f_scores").contains("F@5mm"));
  CHECK(j.at("vr").is_null());
}

TEST_CASE("vr bucket report") {
  CHECK(bucket_report({sample(1.0, 0.9, 3.0), sample(0.97, 0.7, 5.0)}).buckets.size() == 1);
  const BucketReport one = bucket_report({sample(1.0, 0.9, 3.0)});
  REQUIRE(one.buckets.size() == 1);
  CHECK(one.buckets[0].lo == 0.95);

  const BucketReport two = bucket_report({sample(0.5, 0.4, 8.0), sample(0.7, 0.6, 6.0)});
  REQUIRE(two.buckets.size() == 2);
  CHECK(two.buckets[0].count == 1);
  CHECK(two.buckets[1].count == 1);

  // six samples: boundaries are half-open except 1.00
  const BucketReport six = bucket_report({sample(0.40, 0.20, 10.0), sample(0.59, 0.40, 8.0), sample(0.60, 0.50, 7.0),
                                          sample(0.95, 0.80, 4.0), sample(1.00, 0.90, 2.0), sample(0.30, 0.0, 50.0)});
  REQUIRE(six.buckets.size() == 3);
  CHECK(six.buckets[0].count == 2);
  CHECK(six.buckets[0].mean_auc == doctest::Approx(0.30));
  CHECK(six.buckets[0].mean_pose_error_mm == doctest::Approx(9.0));
  CHECK(six.buckets[1].lo == 0.60);
  CHECK(six.buckets[1].mean_auc == doctest::Approx(0.50));
  CHECK(six.buckets[2].lo == 0.95);
  CHECK(six.buckets[2].count == 2);
  CHECK(six.buckets[2].mean_auc == doctest::Approx(0.85));
  CHECK(six.buckets[2].mean_pose_error_mm == doctest::Approx(3.0));
  CHECK(six.unbucketed == 1);
  const std::string table = format_bucket_table(six);
  CHECK(table.find("[0.60, 0.80]") != std::string::npos);
  CHECK(table.find("[0.80, 0.95]") == std::string::npos);
  CHECK(bucket_csv(six).find("0.95,1.00,2,") != std::string::npos);
}
