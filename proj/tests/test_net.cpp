#include <cmath>
#include <memory>

#include "doctest.h"
#include "msmr/error.hpp"
#include "msmr/mesh/asset.hpp"
#include "msmr/net/loss.hpp"
#include "msmr/net/model.hpp"
#include "msmr/net/train.hpp"
#include "msmr/numeric/adam.hpp"
#include "support/gradcheck.hpp"
#include "support/meshes.hpp"
#include "support/spiral_oracle.hpp"

using namespace msmr;
using namespace msmr::net;
using msmr::testing::gradcheck;
using msmr::testing::gradcheck_parameters;
using msmr::testing::random_tensor;

namespace {

std::shared_ptr<const hierarchy::MeshHierarchy> toy_hierarchy() {
  static auto h = std::make_shared<const hierarchy::MeshHierarchy>(hierarchy::build_hierarchy(
      mesh::make_hand_template().mesh, 3, hierarchy::default_spiral_lengths(3), 20));
  return h;
}

ModelConfig tiny_config() {
  ModelConfig c;
  c.image_size = 8;
  c.encoder_channels = {4, 8};
  c.channels = {8, 8, 4};
  c.seed = 3;
  return c;
}

}  // namespace

TEST_CASE("spiral convolution") {
  Rng rng(1);
  SUBCASE("length one identity kernel") {
    const mesh::Mesh m = testmesh::grid(4, 3);
    const auto t = hierarchy::enumerate_spirals(m, 1);
    Tape tape;
    const Tensor x = random_tensor({12, 3}, rng);
    Tensor eye({3, 3});
    for (std::size_t i = 0; i < 3; ++i) eye(i, i) = 1.0;
    const Tensor y = spiral_conv(tape.constant(x), t, tape.constant(eye), tape.constant(Tensor({3}))).value();
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(y[i] == x[i]);
  }
  SUBCASE("padding contributes zero") {
    hierarchy::SpiralTable t;
    t.length = 4;
    t.indices = {0, -1, -1, -1};
    Tape tape;
    const Tensor x = random_tensor({1, 2}, rng);
    const Tensor k = random_tensor({8, 3}, rng);
    const Tensor y = spiral_conv(tape.constant(x), t, tape.constant(k), tape.constant(Tensor({3}))).value();
    for (std::size_t o = 0; o < 3; ++o) CHECK(y(0, o) == x(0, 0) * k(0, o) + x(0, 1) * k(1, o));
  }
  SUBCASE("dense oracle") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const mesh::Mesh m = testmesh::shuffled(testmesh::grid(8, 5), seed);
      const auto t = hierarchy::enumerate_spirals(m, 9);
      const Tensor x = random_tensor({40, 5}, rng), k = random_tensor({45, 6}, rng), b = random_tensor({6}, rng);
      Tape tape;
      const Tensor y = spiral_conv(tape.constant(x), t, tape.constant(k), tape.constant(b)).value();
      const Tensor ref = oracle::dense_spiral_conv(x, t, k, b);
      double worst = 0;
      for (std::size_t i = 0; i < y.size(); ++i) worst = std::max(worst, std::abs(y[i] - ref[i]));
      CHECK(worst < 1e-12);
    }
  }
  SUBCASE("gradient") {
    const auto t = hierarchy::enumerate_spirals(testmesh::icosphere(0), 5);
    const double err = gradcheck({random_tensor({12, 3}, rng), random_tensor({15, 4}, rng), random_tensor({4}, rng)},
                                 [&](Tape&, std::span<const Var> v) { return spiral_conv(v[0], t, v[1], v[2]); });
    CHECK(err < 1e-6);
  }
  SUBCASE("mismatched table") {
    hierarchy::SpiralTable t;
    t.length = 2;
    t.indices = {0, 5, 1, 0};
    Tape tape;
    CHECK_THROWS_AS(spiral_conv(tape.constant(Tensor({2, 1})), t, tape.constant(Tensor({2, 1})), tape.constant(Tensor({1}))),
                    ShapeError);
    CHECK_THROWS_AS(spiral_conv(tape.constant(Tensor({3, 1})), t, tape.constant(Tensor({2, 1})), tape.constant(Tensor({1}))),
                    ShapeError);
  }
}

TEST_CASE("graph residual block") {
  Rng rng(2);
  const auto t = hierarchy::enumerate_spirals(testmesh::icosphere(1), 7);
  ParameterStore store;
  GraphResBlock block = GraphResBlock::create(store, "b", 7, 6, rng);
  SUBCASE("zero weights pass the input through") {
    for (auto& p : store.all())
      if (p.name.find("kernel") != std::string::npos) std::fill(p.tensor.values().begin(), p.tensor.values().end(), 0.0);
    Tape tape;
    const Tensor x = random_tensor({42, 6}, rng);
    const Tensor y = block(tape, tape.constant(x), t).value();
    CHECK(y.shape() == x.shape());
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(y[i] == x[i]);
  }
  SUBCASE("gradient") {
    Parameter& x = store.add("x", random_tensor({42, 6}, rng));
    for (auto& p : store.all())
      if (p.name.find("norm") != std::string::npos)
        for (double& v : p.tensor.values()) v += rng.uniform(-0.3, 0.3);
    const Tensor w = random_tensor({42, 6}, rng);
    const double err = gradcheck_parameters(store, [&](Tape& tape) {
      return numeric::dot_constant(block(tape, tape.parameter(x), t), w.values());
    });
    CHECK(err < 1e-4);
  }
  SUBCASE("channel mismatch") {
    Tape tape;
    CHECK_THROWS_AS(block(tape, tape.constant(Tensor({42, 5})), t), ShapeError);
  }
}

TEST_CASE("fusion") {
  Rng rng(4);
  const auto h = toy_hierarchy();
  const std::vector<std::size_t> ch{3, 3, 3};
  SUBCASE("single level is a channel map") {
    ParameterStore store;
    const FusionLayer f = FusionLayer::create(store, "f", {1}, {1}, ch, rng);
    Tape tape;
    const Tensor x = random_tensor({10, 3}, rng);
    const auto out = f(tape, {{1, tape.constant(x)}}, *h);
    const Tensor ref = numeric::matmul(tape.constant(x), tape.constant(store.all()[0].tensor)).value();
    for (std::size_t i = 0; i < ref.size(); ++i) CHECK(out[0].features.value()[i] == ref[i]);
  }
  SUBCASE("coarse to fine reproduces upsampled positions") {
    ParameterStore store;
    const FusionLayer f = FusionLayer::create(store, "f", {0, 1}, {0}, ch, rng);
    for (auto& p : store.all()) std::fill(p.tensor.values().begin(), p.tensor.values().end(), 0.0);
    Parameter& up_map = store.get("f.l1_to_l0");
    for (std::size_t i = 0; i < 3; ++i) up_map.tensor(i, i) = 1.0;
    Tape tape;
    const Tensor coarse = vertices_tensor(h->levels[1].vertices);
    const auto out = f(tape, {{0, tape.constant(random_tensor({20, 3}, rng))}, {1, tape.constant(coarse)}}, *h);
    const Tensor& y = out[0].features.value();
    for (std::size_t r = 0; r < 20; ++r) {
      mesh::Vec3 expect = mesh::Vec3::Zero();
      const auto cols = h->up[0].row_cols(r);
      const auto vals = h->up[0].row_values(r);
      for (std::size_t k = 0; k < cols.size(); ++k) expect += vals[k] * h->levels[1].vertices[cols[k]];
      for (int c = 0; c < 3; ++c) CHECK(std::abs(y(r, c) - expect[c]) < 1e-15);
    }
  }
  SUBCASE("gradient through two levels") {
    ParameterStore store;
    const FusionLayer f = FusionLayer::create(store, "f", {0, 1}, {0, 1}, ch, rng);
    Parameter& a = store.add("a", random_tensor({20, 3}, rng));
    Parameter& b = store.add("b", random_tensor({10, 3}, rng));
    const Tensor w0 = random_tensor({20, 3}, rng), w1 = random_tensor({10, 3}, rng);
    const double err = gradcheck_parameters(store, [&](Tape& tape) {
      const auto out = f(tape, {{0, tape.parameter(a)}, {1, tape.parameter(b)}}, *h);
      return numeric::add(numeric::dot_constant(out[0].features, w0.values()),
                          numeric::dot_constant(out[1].features, w1.values()));
    });
    CHECK(err < 1e-4);
  }
  SUBCASE("missing level") {
    ParameterStore store;
    const FusionLayer f = FusionLayer::create(store, "f", {0, 1}, {0}, ch, rng);
    Tape tape;
    CHECK_THROWS_AS(f(tape, {{0, tape.constant(Tensor({20, 3}))}}, *h), ConfigError);
  }
}

TEST_CASE("model") {
  const auto h = toy_hierarchy();
  Rng rng(5);
  const Tensor image = random_tensor({8, 8, 3}, rng, -0.5, 0.5);
  SUBCASE("shape, determinism and stage layout") {
    const Model model(tiny_config(), h);
    Tape t1, t2;
    const Tensor a = model.forward(t1, image).value();
    const Tensor b = model.forward(t2, image).value();
    CHECK(a.shape() == numeric::Shape{20, 3});
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
    CHECK(model.stage_count() == 3);
    CHECK(model.active_levels(0) == std::vector<std::size_t>{2});
    CHECK(model.active_levels(2) == std::vector<std::size_t>{2, 1, 0});
    Tape t3;
    CHECK_THROWS_AS(model.forward(t3, Tensor({9, 8, 3})), ShapeError);
  }
  SUBCASE("single path has fewer parameters") {
    ModelConfig c = tiny_config();
    const Model multi(c, h);
    c.single_path = true;
    const Model single(c, h);
    CHECK(single.parameters().scalar_count() < multi.parameters().scalar_count());
    CHECK(single.active_levels(2) == std::vector<std::size_t>{0});
    Tape tape;
    CHECK(single.forward(tape, image).shape() == numeric::Shape{20, 3});
    c.single_path = false;
    c.use_attention = false;
    const Model plain(c, h);
    CHECK(plain.parameters().scalar_count() < multi.parameters().scalar_count());
  }
  SUBCASE("config errors") {
    ModelConfig c = tiny_config();
    c.channels = {8, 4};
    CHECK_THROWS_AS(Model(c, h), ConfigError);
    c = tiny_config();
    c.channels = {6, 8, 4};
    CHECK_THROWS_AS(Model(c, h), ConfigError);  // 4 heads do not divide 6
    CHECK_THROWS_AS(model_config_from_json(nlohmann::json{{"chanels", {1}}}), ConfigError);
    const ModelConfig back = model_config_from_json(to_json(tiny_config()));
    CHECK(back.channels == tiny_config().channels);
    CHECK(back.encoder_channels == tiny_config().encoder_channels);
  }
  SUBCASE("end-to-end gradient") {
    for (bool single : {false, true}) {
      ModelConfig c = tiny_config();
      c.single_path = single;
      Model model(c, h);
      // move layer norms off their identity init so every path is exercised
      Rng prng(8);
      for (auto& p : model.parameters().all())
        if (p.name.find("norm") != std::string::npos || p.name.find("ln") != std::string::npos ||
            p.name.find("bias") != std::string::npos)
          for (double& v : p.tensor.values()) v += prng.uniform(-0.2, 0.2);
      const Tensor w = random_tensor({20, 3}, rng);
      const double err = gradcheck_parameters(model.parameters(), [&](Tape& tape) {
        return numeric::dot_constant(model.forward(tape, image), w.values());
      }, 4);
      CHECK(err < 1e-3);
    }
  }
}

TEST_CASE("l1 vertex loss") {
  Rng rng(6);
  Tape tape;
  const Tensor gt = random_tensor({5, 3}, rng);
  CHECK(l1_vertex_loss(tape.constant(gt), gt).value()[0] == 0.0);
  CHECK(l1_vertex_loss(tape.constant(Tensor::filled({7, 3}, 1.0)), Tensor({7, 3})).value()[0] == 3.0);
  CHECK_THROWS_AS(l1_vertex_loss(tape.constant(Tensor({4, 3})), gt), ShapeError);
  // residuals bounded away from zero, so no kink lies within the step
  Tensor pred = random_tensor({5, 3}, rng);
  for (std::size_t i = 0; i < pred.size(); ++i) pred[i] = gt[i] + (i % 2 ? 1.0 : -1.0) * (0.1 + std::abs(pred[i]));
  const double err = gradcheck({pred}, [&](Tape&, std::span<const Var> v) { return l1_vertex_loss(v[0], gt); });
  CHECK(err < 1e-4);
}

TEST_CASE("augmentation keeps image and ground truth consistent") {
  // pinhole camera at the image center: rotating points about the optical
  // axis must move their projections with the image content
  const double f = 40.0, size = 64.0;
  auto project = [&](const mesh::Vec3& p) { return Eigen::Vector2d(f * p.x() / p.z() + size / 2, f * p.y() / p.z() + size / 2); };
  Augmentation a;
  a.angle = 0.4;
  const std::vector<mesh::Vec3> pts{mesh::Vec3(0.1, -0.05, 0.6), mesh::Vec3(-0.08, 0.12, 0.7)};
  const auto rotated = augment_points(pts, a);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    Tensor img({64, 64, 3});
    const Eigen::Vector2d q = project(pts[i]);
    img[(static_cast<std::size_t>(q.y()) * 64 + static_cast<std::size_t>(q.x())) * 3] = 1.0;
    const Tensor out = augment_image(img, a, 64);
    std::size_t best = 0;
    for (std::size_t k = 0; k < 64 * 64; ++k)
      if (out[k * 3] > out[best * 3]) best = k;
    const Eigen::Vector2d expect = project(rotated[i]);
    CHECK(std::abs(static_cast<double>(best % 64) + 0.5 - expect.x()) <= 1.5);
    CHECK(std::abs(static_cast<double>(best / 64) + 0.5 - expect.y()) <= 1.5);
  }
}

TEST_CASE("training loop") {
  const auto h = toy_hierarchy();
  Rng rng(7);
  std::vector<Sample> data;
  for (int i = 0; i < 6; ++i) {
    Sample s{random_tensor({12, 12, 3}, rng, 0.0, 1.0), {}};
    for (std::size_t v = 0; v < 20; ++v) s.vertices.emplace_back(rng.uniform(-0.05, 0.05), rng.uniform(-0.05, 0.05), 0.0);
    data.push_back(std::move(s));
  }
  TrainConfig tc;
  tc.epochs = 3;
  tc.batch_size = 4;
  tc.lr = 1e-3;
  SUBCASE("schedule") {
    CHECK(numeric::step_decay_lr(1e-4, 0) == 1e-4);
    CHECK(numeric::step_decay_lr(1e-4, 50) == 5e-5);
    CHECK(numeric::step_decay_lr(1e-4, 100) == 2.5e-5);
    TrainConfig c = tc;
    c.decay_every = 1;
    Model model(tiny_config(), h);
    const auto log = train(model, data, c);
    CHECK(log[0].lr == 1e-3);
    CHECK(log[1].lr == 5e-4);
    CHECK(log[2].lr == 2.5e-4);
  }
  SUBCASE("zero learning rate changes nothing") {
    TrainConfig c = tc;
    c.lr = 0.0;
    c.augment = false;
    Model model(tiny_config(), h);
    std::vector<double> before;
    for (const auto& p : model.parameters().all()) before.insert(before.end(), p.tensor.values().begin(), p.tensor.values().end());
    const auto log = train(model, data, c);
    std::vector<double> after;
    for (const auto& p : model.parameters().all()) after.insert(after.end(), p.tensor.values().begin(), p.tensor.values().end());
    CHECK(before == after);
    CHECK(log[0].loss == log[1].loss);
    CHECK(log[1].loss == log[2].loss);
  }
  SUBCASE("deterministic under a seed") {
    Model a(tiny_config(), h), b(tiny_config(), h);
    const auto la = train(a, data, tc), lb = train(b, data, tc);
    for (std::size_t e = 0; e < la.size(); ++e) CHECK(la[e].loss == lb[e].loss);
    CHECK(la.back().loss < la.front().loss);
  }
  SUBCASE("errors") {
    Model model(tiny_config(), h);
    CHECK_THROWS_AS(train(model, {}, tc), ConfigError);
    auto bad = data;
    bad[0].vertices.pop_back();
    CHECK_THROWS_AS(train(model, bad, tc), ShapeError);
    CHECK_THROWS_AS(train_config_from_json(nlohmann::json{{"batch_size", 0}}), ConfigError);
  }
}
