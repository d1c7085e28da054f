#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "arena/errors.hpp"
#include "arena/model/gradient_checks.hpp"
#include "arena/nn/attention.hpp"
#include "arena/nn/checkpoint.hpp"
#include "arena/nn/gradcheck.hpp"
#include "arena/nn/layers.hpp"
#include "arena/nn/losses.hpp"
#include "arena/nn/optimizer.hpp"
#include "doctest.h"

using namespace arena;
using namespace arena::nn;

namespace {

Tensor2 random_tensor(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  Tensor2 t(rows, cols);
  for (Eigen::Index i = 0; i < t.size(); ++i) t.data()[i] = rng.uniform(-1.0, 1.0);
  return t;
}

Tensor2 row(std::initializer_list<double> v) {
  Tensor2 t(1, static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) t(0, i++) = x;
  return t;
}

}  // namespace

TEST_SUITE("nn") {

TEST_CASE("dense identity and scalar arithmetic") {
  Rng rng(1);
  const Tensor2 x = random_tensor(3, 4, rng);
  CHECK(dense_forward(Tensor2::Identity(4, 4), Tensor2::Zero(1, 4), x) == x);

  const Tensor2 w = row({2.0});
  const Tensor2 b = row({1.0});
  const Tensor2 in = row({3.0});
  CHECK(dense_forward(w, b, in)(0, 0) == 7.0);
  const DenseGrads g = dense_backward(w, in, row({1.0}));
  CHECK(g.input(0, 0) == 2.0);
  CHECK(g.weight(0, 0) == 3.0);
  CHECK(g.bias(0, 0) == 1.0);
}

TEST_CASE("dense rejects mismatched shapes") {
  CHECK_THROWS_AS(dense_forward(Tensor2::Zero(3, 2), Tensor2::Zero(1, 2), Tensor2::Zero(1, 4)),
                  std::invalid_argument);
  CHECK_THROWS_AS(dense_forward(Tensor2::Zero(3, 2), Tensor2::Zero(1, 3), Tensor2::Zero(1, 3)),
                  std::invalid_argument);
}

TEST_CASE("dense initialization is bounded by sqrt(6 / fan_in)") {
  Rng rng(3);
  Dense d("d", 24, 10, rng);
  const double bound = std::sqrt(6.0 / 24.0);
  CHECK(d.weight.value.cwiseAbs().maxCoeff() <= bound);
  CHECK(d.bias.value.isZero());
  CHECK(d.weight.grad.isZero());
}

TEST_CASE("leaky relu values and gradients") {
  CHECK(leaky_relu(row({5.0}))(0, 0) == 5.0);
  CHECK(leaky_relu(row({-1.0}), 0.01)(0, 0) == doctest::Approx(-0.01));
  CHECK(leaky_relu_backward(row({-2.0}), row({1.0}))(0, 0) == doctest::Approx(0.01));
  const double eps = 1e-5;
  const double fd = (leaky_relu(row({-2.0 + eps}))(0, 0) - leaky_relu(row({-2.0 - eps}))(0, 0)) /
                    (2.0 * eps);
  CHECK(fd == doctest::Approx(0.01).epsilon(1e-8));
}

TEST_CASE("layer norm cases") {
  LayerNorm ln("ln", 3);
  CHECK(ln.forward(row({2.0, 2.0, 2.0})).isZero());

  LayerNorm two("two", 2, 0.0);
  const Tensor2 y = two.forward(row({1.0, 3.0}));
  CHECK(y(0, 0) == doctest::Approx(-1.0));
  CHECK(y(0, 1) == doctest::Approx(1.0));

  Rng rng(4);
  const Tensor2 z = ln.forward(random_tensor(5, 3, rng) * 10.0);
  for (Eigen::Index r = 0; r < z.rows(); ++r) {
    CHECK(z.row(r).mean() == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(z.row(r).squaredNorm() / 3.0 == doctest::Approx(1.0).epsilon(1e-4));
  }
}

TEST_CASE("softmax rows are non-negative and normalized") {
  Rng rng(5);
  const Tensor2 p = softmax_rows(random_tensor(20, 18, rng) * 30.0);
  for (Eigen::Index r = 0; r < p.rows(); ++r) {
    CHECK(p.row(r).minCoeff() >= 0.0);
    CHECK(std::abs(p.row(r).sum() - 1.0) <= 1e-9);
  }
  const Tensor2 big = softmax_rows(row({1000.0, 0.0}));
  CHECK(big(0, 0) == doctest::Approx(1.0));
}

TEST_CASE("cross entropy cases") {
  std::vector<double> uniform(18, 0.3);
  const LossAndGrad u = softmax_cross_entropy(uniform, 4);
  CHECK(u.loss == doctest::Approx(std::log(18.0)).epsilon(1e-12));
  CHECK(u.loss == doctest::Approx(2.8904).epsilon(1e-4));
  std::vector<double> extreme = {1000.0, 0.0};
  const LossAndGrad e = softmax_cross_entropy(extreme, 0);
  CHECK(std::isfinite(e.loss));
  CHECK(e.loss == doctest::Approx(0.0));
  CHECK_THROWS_AS(softmax_cross_entropy(extreme, 2), std::invalid_argument);
  CHECK_THROWS_AS(softmax_cross_entropy(extreme, -1), std::invalid_argument);

  // Finite-difference oracle on the gradient.
  Rng rng(6);
  std::vector<double> z(7);
  for (double& v : z) v = rng.uniform(-3.0, 3.0);
  const LossAndGrad lg = softmax_cross_entropy(z, 2);
  for (std::size_t i = 0; i < z.size(); ++i) {
    auto zp = z, zm = z;
    zp[i] += 1e-5;
    zm[i] -= 1e-5;
    const double fd =
        (softmax_cross_entropy(zp, 2).loss - softmax_cross_entropy(zm, 2).loss) / 2e-5;
    CHECK(std::abs(fd - lg.grad[i]) <= 1e-4 * std::max(1.0, std::abs(fd)));
  }
}

TEST_CASE("batched cross entropy averages rows") {
  Rng rng(7);
  const Tensor2 z = random_tensor(3, 5, rng);
  const std::vector<int> t = {0, 4, 2};
  const BatchLoss b = softmax_cross_entropy(z, t);
  double mean = 0.0;
  for (int r = 0; r < 3; ++r) {
    mean += softmax_cross_entropy(std::span<const double>(z.row(r).data(), 5), t[r]).loss / 3.0;
  }
  CHECK(b.loss == doctest::Approx(mean));
  CHECK(b.grad.rowwise().sum().cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("huber cases") {
  CHECK(huber(2.0, 2.0).loss == 0.0);
  CHECK(huber(2.5, 2.0).loss == doctest::Approx(0.125));
  const ScalarLoss far = huber(3.0, 0.0, 1.0);
  CHECK(far.loss == doctest::Approx(2.5));
  CHECK(far.grad == 1.0);
  CHECK(huber(-3.0, 0.0, 1.0).grad == -1.0);
  // Gradient is continuous at the seam.
  CHECK(huber(1.0 - 1e-9, 0.0).grad == doctest::Approx(huber(1.0 + 1e-9, 0.0).grad));
  CHECK_THROWS_AS(huber(0.0, 0.0, 0.0), std::invalid_argument);
}

TEST_CASE("attention single key gives the projected value") {
  Rng rng(8);
  MultiHeadAttention mha("a", 4, 2, rng);
  const Tensor2 q = random_tensor(1, 4, rng);
  const Tensor2 k = random_tensor(1, 4, rng);
  const Tensor2 v = random_tensor(1, 4, rng);
  const std::uint8_t mask[1] = {1};
  const Tensor2 out = mha.forward_masked(q, k, v, mask);
  const Tensor2 expected = mha.output_proj.forward(mha.value_proj.forward(v));
  CHECK((out - expected).cwiseAbs().maxCoeff() < 1e-12);

  // Two identical rows give the same context as one.
  Tensor2 k2(2, 4), v2(2, 4);
  k2 << k, k;
  v2 << v, v;
  const std::uint8_t mask2[2] = {1, 1};
  CHECK((mha.forward_masked(q, k2, v2, mask2) - out).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("attention all-masked input returns zeros") {
  Rng rng(9);
  MultiHeadAttention mha("a", 4, 2, rng);
  const std::uint8_t mask[3] = {0, 0, 0};
  const Tensor2 out =
      mha.forward_masked(random_tensor(1, 4, rng), random_tensor(3, 4, rng),
                         random_tensor(3, 4, rng), mask);
  CHECK(out.isZero());
}

TEST_CASE("attention masked rows do not matter") {
  Rng rng(10);
  MultiHeadAttention mha("a", 8, 4, rng);
  const Tensor2 q = random_tensor(1, 8, rng);
  Tensor2 k = random_tensor(4, 8, rng);
  Tensor2 v = random_tensor(4, 8, rng);
  const std::uint8_t mask[4] = {1, 0, 1, 0};
  const Tensor2 a = mha.forward_masked(q, k, v, mask);
  k.row(1) *= 100.0;
  v.row(3).setConstant(1e6);
  CHECK((mha.forward_masked(q, k, v, mask) - a).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("attention is invariant under joint row permutation") {
  Rng rng(11);
  MultiHeadAttention mha("a", 8, 2, rng);
  const Tensor2 q = random_tensor(1, 8, rng);
  const Tensor2 k = random_tensor(5, 8, rng);
  const Tensor2 v = random_tensor(5, 8, rng);
  const std::uint8_t mask[5] = {1, 1, 0, 1, 1};
  const Tensor2 base = mha.forward_masked(q, k, v, mask);
  std::vector<int> perm = {0, 1, 2, 3, 4};
  for (int trial = 0; trial < 20; ++trial) {
    for (int i = 4; i > 0; --i) std::swap(perm[i], perm[rng.uniform_int(i + 1)]);
    Tensor2 kp(5, 8), vp(5, 8);
    std::uint8_t mp[5];
    for (int i = 0; i < 5; ++i) {
      kp.row(i) = k.row(perm[i]);
      vp.row(i) = v.row(perm[i]);
      mp[i] = mask[perm[i]];
    }
    CHECK((mha.forward_masked(q, kp, vp, mp) - base).cwiseAbs().maxCoeff() <= 1e-6);
  }
}

TEST_CASE("attention requires dim divisible by heads") {
  Rng rng(12);
  CHECK_THROWS_AS(MultiHeadAttention("a", 6, 4, rng), ConfigError);
}

TEST_CASE("attention offsets must partition the keys") {
  Rng rng(13);
  MultiHeadAttention mha("a", 4, 1, rng);
  const Tensor2 q = random_tensor(2, 4, rng);
  const Tensor2 k = random_tensor(3, 4, rng);
  const std::vector<int> bad = {0, 1, 2};
  CHECK_THROWS_AS(mha.forward(q, k, k, bad), std::invalid_argument);
}

TEST_CASE("every block passes the finite-difference check") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    for (const BlockCheck& c : run_gradient_checks(seed)) {
      INFO(c.block << " worst " << c.result.worst_parameter << " err " << c.result.max_error);
      CHECK(c.result.checked > 0);
      CHECK(c.result.passed(1e-4));
    }
  }
}

TEST_CASE("grad check catches a corrupted backward") {
  Rng rng(14);
  Dense d("d", 4, 3, rng);
  const Tensor2 x = random_tensor(5, 4, rng);
  const Tensor2 r = random_tensor(5, 3, rng);
  auto loss = [&] { return (d.forward(x).array() * r.array()).sum(); };
  auto bad_grads = [&] {
    d.weight.zero_grad();
    d.bias.zero_grad();
    d.backward(x, r);
    d.weight.grad *= 2.0;
  };
  const GradCheckResult res = grad_check(loss, bad_grads, d.parameters());
  CHECK(res.max_error == doctest::Approx(1.0).epsilon(1e-4));
  CHECK_FALSE(res.passed());
}

TEST_CASE("optimizer arithmetic and decay") {
  Parameter w("w", row({1.0}));
  OptimizerConfig sgd;
  sgd.kind = OptimizerKind::Sgd;
  Optimizer opt(sgd, {&w});
  w.grad(0, 0) = 2.0;
  opt.step();
  CHECK(w.value(0, 0) == doctest::Approx(0.998).epsilon(1e-15));

  OptimizerConfig decay;
  decay.decay_factor = 0.5;
  decay.decay_every = 100;
  CHECK(effective_learning_rate(decay, 250) == doctest::Approx(0.00025).epsilon(1e-15));
  CHECK(effective_learning_rate(decay, 99) == 0.001);
  CHECK(effective_learning_rate(decay, 100) == 0.0005);
}

TEST_CASE("zero gradients leave parameters unchanged") {
  for (OptimizerKind kind : {OptimizerKind::Sgd, OptimizerKind::Adam}) {
    Rng rng(15);
    Parameter p("p", random_tensor(3, 3, rng));
    const Tensor2 before = p.value;
    OptimizerConfig c;
    c.kind = kind;
    Optimizer opt(c, {&p});
    for (int i = 0; i < 5; ++i) {
      opt.zero_grad();
      opt.step();
    }
    CHECK(p.value == before);
  }
}

TEST_CASE("non-finite gradients abort the step with a named error") {
  Parameter a("layer.weight", row({1.0, 2.0}));
  Parameter b("other", row({3.0}));
  Optimizer opt(OptimizerConfig{}, {&b, &a});
  a.grad(0, 1) = std::nan("");
  b.grad(0, 0) = 1.0;
  try {
    opt.step();
    FAIL("expected TrainingError");
  } catch (const TrainingError& e) {
    CHECK(std::string(e.what()).find("layer.weight") != std::string::npos);
  }
  CHECK(b.value(0, 0) == 3.0);
  CHECK(opt.steps() == 0);
}

TEST_CASE("optimizer config validation") {
  OptimizerConfig c;
  c.learning_rate = 0.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = OptimizerConfig{};
  c.decay_factor = 1.5;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.decay_factor = 1.0;
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("adam reduces a quadratic") {
  Parameter p("p", row({3.0, -2.0}));
  OptimizerConfig c;
  c.learning_rate = 0.05;
  Optimizer opt(c, {&p});
  for (int i = 0; i < 500; ++i) {
    opt.zero_grad();
    p.grad = 2.0 * p.value;
    opt.step();
  }
  CHECK(p.value.norm() < 0.05);
}

TEST_CASE("checkpoint text round-trip is exact") {
  Rng rng(16);
  Checkpoint ck;
  ck.fingerprint = "0123456789abcdef";
  ck.meta["note"] = "hello world";
  ck.tensors.push_back({"a.weight", random_tensor(3, 4, rng) * 1e-7});
  ck.tensors.push_back({"b", row({0.1, -0.0, 1e300, 5e-324})});
  const Checkpoint back = from_text(to_text(ck));
  CHECK(back.fingerprint == ck.fingerprint);
  CHECK(back.meta == ck.meta);
  REQUIRE(back.tensors.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(back.tensors[i].name == ck.tensors[i].name);
    CHECK(back.tensors[i].value == ck.tensors[i].value);
  }
  CHECK(back.find("b") != nullptr);
  CHECK(back.find("missing") == nullptr);
}

TEST_CASE("checkpoint files are atomic and errors name the line") {
  const auto dir = std::filesystem::temp_directory_path() / "arena_nn_ckpt_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "model.ckpt";
  Checkpoint ck;
  ck.fingerprint = "ff";
  ck.tensors.push_back({"w", row({1.0, 2.0})});
  write_checkpoint(path, ck);
  CHECK(read_checkpoint(path).tensors[0].value == ck.tensors[0].value);

  std::string text = to_text(ck);
  const auto truncated = text.substr(0, text.size() - 8);
  CHECK_THROWS_AS(from_text(truncated), IoError);
  std::string wrong_version = text;
  wrong_version.replace(wrong_version.find(" 1"), 2, " 9");
  CHECK_THROWS_AS(from_text(wrong_version), IoError);
  try {
    from_text("arena-checkpoint 1\nfingerprint ff\nmeta x\n", "f.ckpt");
    FAIL("expected IoError");
  } catch (const IoError& e) {
    CHECK(std::string(e.what()).find("f.ckpt:3") != std::string::npos);
  }
  CHECK_THROWS_AS(read_checkpoint(dir / "absent.ckpt"), IoError);
  std::filesystem::remove_all(dir);
}

}  // TEST_SUITE
