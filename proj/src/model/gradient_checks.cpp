#include "arena/model/gradient_checks.hpp"

#include <map>

#include "arena/agents/scripted.hpp"
#include "arena/model/policy_model.hpp"
#include "arena/nn/attention.hpp"
#include "arena/nn/layers.hpp"
#include "arena/nn/losses.hpp"

namespace arena {

namespace {

nn::Tensor2 random_tensor(Eigen::Index rows, Eigen::Index cols, Rng& rng, double lo = -1.0,
                          double hi = 1.0) {
  nn::Tensor2 t(rows, cols);
  for (Eigen::Index i = 0; i < t.size(); ++i) t.data()[i] = rng.uniform(lo, hi);
  return t;
}

// Values bounded away from zero so no element sits on the LeakyReLU kink.
nn::Tensor2 off_kink_tensor(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  nn::Tensor2 t(rows, cols);
  for (Eigen::Index i = 0; i < t.size(); ++i) {
    const double mag = rng.uniform(0.1, 2.0);
    t.data()[i] = rng.bernoulli(0.5) ? mag : -mag;
  }
  return t;
}

double projection(const nn::Tensor2& out, const nn::Tensor2& weights) {
  return (out.array() * weights.array()).sum();
}

BlockCheck check_dense(Rng& rng, double eps) {
  nn::Dense dense("dense", 4, 3, rng);
  dense.bias.value = random_tensor(1, 3, rng);
  nn::Parameter x("input", random_tensor(5, 4, rng));
  const nn::Tensor2 r = random_tensor(5, 3, rng);
  nn::ParameterList params = dense.parameters();
  params.push_back(&x);
  auto loss = [&] { return projection(dense.forward(x.value), r); };
  auto grads = [&] {
    for (auto* p : params) p->zero_grad();
    x.grad = dense.backward(x.value, r);
  };
  return {"dense", nn::grad_check(loss, grads, params, eps)};
}

BlockCheck check_layer_norm(Rng& rng, double eps) {
  nn::LayerNorm norm("layer_norm", 6);
  norm.gain.value = random_tensor(1, 6, rng, 0.5, 1.5);
  norm.shift.value = random_tensor(1, 6, rng);
  nn::Parameter x("input", random_tensor(4, 6, rng, -2.0, 2.0));
  const nn::Tensor2 r = random_tensor(4, 6, rng);
  nn::ParameterList params = norm.parameters();
  params.push_back(&x);
  auto loss = [&] { return projection(norm.forward(x.value), r); };
  auto grads = [&] {
    for (auto* p : params) p->zero_grad();
    nn::LayerNormCache cache;
    norm.forward(x.value, &cache);
    x.grad = norm.backward(cache, r);
  };
  return {"layer_norm", nn::grad_check(loss, grads, params, eps)};
}

BlockCheck check_leaky_relu(Rng& rng, double eps) {
  nn::Parameter x("input", off_kink_tensor(5, 6, rng));
  const nn::Tensor2 r = random_tensor(5, 6, rng);
  auto loss = [&] { return projection(nn::leaky_relu(x.value), r); };
  auto grads = [&] { x.grad = nn::leaky_relu_backward(x.value, r); };
  return {"leaky_relu", nn::grad_check(loss, grads, {&x}, eps)};
}

BlockCheck check_attention(Rng& rng, double eps) {
  nn::MultiHeadAttention attention("attention", 8, 2, rng);
  for (nn::Parameter* p : attention.parameters()) {
    if (p->name.ends_with(".bias")) p->value = random_tensor(1, 8, rng, -0.2, 0.2);
  }
  nn::Parameter q("queries", random_tensor(3, 8, rng));
  nn::Parameter k("keys", random_tensor(7, 8, rng));
  nn::Parameter v("values", random_tensor(7, 8, rng));
  const std::vector<int> offsets = {0, 2, 2, 7};  // the middle query attends to nothing
  const nn::Tensor2 r = random_tensor(3, 8, rng);
  nn::ParameterList params = attention.parameters();
  params.insert(params.end(), {&q, &k, &v});
  auto loss = [&] { return projection(attention.forward(q.value, k.value, v.value, offsets), r); };
  auto grads = [&] {
    for (auto* p : params) p->zero_grad();
    nn::AttentionCache cache;
    attention.forward(q.value, k.value, v.value, offsets, &cache);
    const nn::AttentionGrads g = attention.backward(cache, r);
    q.grad = g.queries;
    k.grad = g.keys;
    v.grad = g.values;
  };
  return {"attention", nn::grad_check(loss, grads, params, eps)};
}

struct HeadFixture {
  std::vector<EntityFeatureSet> sets;
  std::vector<const EntityFeatureSet*> batch;
  std::vector<int> actions;
  std::vector<double> targets;
};

HeadFixture head_fixture(const EncoderLimits& limits, Rng& rng) {
  HeadFixture f;
  f.sets = sample_feature_sets(4, limits, rng.next_u64());
  for (const auto& s : f.sets) {
    f.batch.push_back(&s);
    f.actions.push_back(static_cast<int>(rng.uniform_int(kNumActions)));
    f.targets.push_back(rng.uniform(-3.0, 3.0));
  }
  return f;
}

// Mean Huber loss of Q(s, a_taken) against fixed targets and its gradient.
double q_loss(const nn::Tensor2& q, const HeadFixture& f, nn::Tensor2* grad) {
  double total = 0.0;
  const double inv_n = 1.0 / static_cast<double>(q.rows());
  if (grad != nullptr) *grad = nn::Tensor2::Zero(q.rows(), q.cols());
  for (Eigen::Index i = 0; i < q.rows(); ++i) {
    const nn::ScalarLoss l = nn::huber(q(i, f.actions[i]), f.targets[i]);
    total += l.loss * inv_n;
    if (grad != nullptr) (*grad)(i, f.actions[i]) = l.grad * inv_n;
  }
  return total;
}

ModelConfig tiny_model() {
  ModelConfig c;
  c.embed_dim = 8;
  c.trunk = {12, 10};
  c.heads = 2;
  return c;
}

BlockCheck check_head(Rng& rng, double eps, PolicyHead head) {
  const EncoderLimits limits{2, 3, 3};
  PolicyModel model(tiny_model(), limits, rng.next_u64());
  HeadFixture f = head_fixture(limits, rng);
  nn::Parameter features("features", model.features(f.batch));
  nn::Dense& dense = head == PolicyHead::Q ? model.q_head : model.imitation_head;
  nn::ParameterList params = dense.parameters();
  params.push_back(&features);
  auto loss = [&] {
    const nn::Tensor2 out = dense.forward(features.value);
    return head == PolicyHead::Q ? q_loss(out, f, nullptr)
                                 : nn::softmax_cross_entropy(out, f.actions).loss;
  };
  auto grads = [&] {
    for (auto* p : params) p->zero_grad();
    const nn::Tensor2 out = dense.forward(features.value);
    nn::Tensor2 g;
    if (head == PolicyHead::Q) {
      q_loss(out, f, &g);
    } else {
      g = nn::softmax_cross_entropy(out, f.actions).grad;
    }
    features.grad = dense.backward(features.value, g);
  };
  return {head == PolicyHead::Q ? "q_head" : "imitation_head",
          nn::grad_check(loss, grads, params, eps)};
}

BlockCheck check_model(Rng& rng, double eps) {
  const EncoderLimits limits{2, 3, 3};
  PolicyModel model(tiny_model(), limits, rng.next_u64());
  HeadFixture f = head_fixture(limits, rng);
  const nn::ParameterList params = model.all_parameters();
  auto loss = [&] {
    const nn::Tensor2 h = model.features(f.batch);
    return q_loss(model.q_head.forward(h), f, nullptr) +
           nn::softmax_cross_entropy(model.imitation_head.forward(h), f.actions).loss;
  };
  auto grads = [&] {
    model.zero_grad();
    ModelCache cache;
    const nn::Tensor2 h = model.features(f.batch, &cache);
    nn::Tensor2 gq;
    q_loss(model.q_head.forward(h), f, &gq);
    const nn::Tensor2 gi =
        nn::softmax_cross_entropy(model.imitation_head.forward(h), f.actions).grad;
    nn::Tensor2 dh = model.q_head.backward(h, gq);
    dh += model.imitation_head.backward(h, gi);
    model.backward_features(cache, dh);
  };
  return {"model", nn::grad_check(loss, grads, params, eps)};
}

}  // namespace

std::vector<BlockCheck> run_gradient_checks(std::uint64_t seed, double eps) {
  Rng rng(seed);
  std::vector<BlockCheck> out;
  out.push_back(check_dense(rng, eps));
  out.push_back(check_layer_norm(rng, eps));
  out.push_back(check_leaky_relu(rng, eps));
  out.push_back(check_attention(rng, eps));
  out.push_back(check_head(rng, eps, PolicyHead::Q));
  out.push_back(check_head(rng, eps, PolicyHead::Imitation));
  out.push_back(check_model(rng, eps));
  return out;
}

std::vector<EntityFeatureSet> sample_feature_sets(int count, const EncoderLimits& limits,
                                                  std::uint64_t seed) {
  Rng rng(seed);
  std::vector<EntityFeatureSet> out;
  while (static_cast<int>(out.size()) < count) {
    GameConfig config;
    config.n_enemies = 1 + static_cast<int>(rng.uniform_int(3));
    config.n_walls = static_cast<int>(rng.uniform_int(7));
    GameState state = build_arena(config, rng.next_u64());
    const int ticks = 5 + static_cast<int>(rng.uniform_int(40));
    for (int t = 0; t < ticks && outcome(state) == Outcome::Ongoing; ++t) {
      std::map<EntityId, int> actions;
      for (const auto& e : state.entities) {
        actions[e.id] = act_random(observe(state, e.id), rng);
      }
      state = step(state, actions).state;
    }
    if (state.player() == nullptr) continue;
    out.push_back(encode_observation(observe(state, kPlayerId), limits));
  }
  return out;
}

}  // namespace arena
