#include "arena/model/policy_model.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "arena/errors.hpp"
#include "arena/format.hpp"
#include "arena/hash.hpp"

namespace arena {

namespace {

constexpr double kHeadInitScale = 0.1;
constexpr std::array<const char*, 3> kTypeNames = {"enemy", "bullet", "wall"};
constexpr std::array<int, 3> kTypeWidths = {kEnemyFeatures, kBulletFeatures, kWallFeatures};

const nn::Tensor2& typed_rows(const EntityFeatureSet& f, int type) {
  return type == 0 ? f.enemies : type == 1 ? f.bullets : f.walls;
}

const Mask& typed_mask(const EntityFeatureSet& f, int type) {
  return type == 0 ? f.enemy_mask : type == 1 ? f.bullet_mask : f.wall_mask;
}

}  // namespace

ModelPreset parse_model_preset(const std::string& text) {
  if (text == "small" || text == "Small") return ModelPreset::Small;
  if (text == "large" || text == "Large") return ModelPreset::Large;
  throw std::invalid_argument("unknown model preset '" + text + "' (expected small or large)");
}

std::string to_string(ModelPreset preset) {
  return preset == ModelPreset::Small ? "small" : "large";
}

ModelConfig ModelConfig::preset(ModelPreset preset) {
  ModelConfig c;
  if (preset == ModelPreset::Large) {
    c.embed_dim = 64;
    c.trunk = {256, 128};
    c.heads = 4;
  }
  return c;
}

void ModelConfig::validate() const {
  if (embed_dim <= 0) throw ConfigError("model: embed_dim must be positive");
  if (heads <= 0 || embed_dim % heads != 0) {
    throw ConfigError("model: embed_dim " + std::to_string(embed_dim) +
                      " is not divisible by heads " + std::to_string(heads));
  }
  if (trunk.empty()) throw ConfigError("model: trunk needs at least one layer");
  for (int w : trunk) {
    if (w <= 0) throw ConfigError("model: trunk widths must be positive");
  }
  if (!(leaky_slope >= 0.0 && leaky_slope < 1.0)) {
    throw ConfigError("model: leaky_slope must be in [0, 1)");
  }
}

DenseBlock::DenseBlock(const std::string& name, int in, int out, double slope_, Rng& rng)
    : dense(name + ".dense", in, out, rng), norm(name + ".norm", out), slope(slope_) {}

nn::Tensor2 DenseBlock::forward(const nn::Tensor2& input, DenseBlockCache* cache) const {
  nn::LayerNormCache local;
  nn::Tensor2 normed = norm.forward(dense.forward(input), cache ? &cache->norm : &local);
  nn::Tensor2 out = nn::leaky_relu(normed, slope);
  if (cache != nullptr) {
    cache->input = input;
    cache->normalized_out = std::move(normed);
  }
  return out;
}

nn::Tensor2 DenseBlock::backward(const DenseBlockCache& cache, const nn::Tensor2& grad_out) {
  const nn::Tensor2 g = nn::leaky_relu_backward(cache.normalized_out, grad_out, slope);
  return dense.backward(cache.input, norm.backward(cache.norm, g));
}

nn::ParameterList DenseBlock::parameters() {
  return {&dense.weight, &dense.bias, &norm.gain, &norm.shift};
}

PolicyModel::PolicyModel(ModelConfig config, EncoderLimits limits, std::uint64_t seed)
    : config_(std::move(config)), limits_(limits) {
  config_.validate();
  limits_.validate();
  Rng rng(seed);
  const int e = config_.embed_dim;
  const double slope = config_.leaky_slope;
  player_block_ = DenseBlock("embed.player", kPlayerFeatures, e, slope, rng);
  for (int t = 0; t < 3; ++t) {
    typed_blocks_[t] =
        DenseBlock(std::string("embed.") + kTypeNames[t], kTypeWidths[t], e, slope, rng);
    nn::Tensor2 tag(1, e);
    for (Eigen::Index i = 0; i < tag.size(); ++i) tag.data()[i] = rng.uniform(-0.1, 0.1);
    type_tags_[t] = nn::Parameter(std::string("tag.") + kTypeNames[t], std::move(tag));
  }
  attention_ = nn::MultiHeadAttention("attention", e, config_.heads, rng);
  int width = 2 * e;
  for (std::size_t i = 0; i < config_.trunk.size(); ++i) {
    trunk_.emplace_back("trunk." + std::to_string(i), width, config_.trunk[i], slope, rng);
    width = config_.trunk[i];
  }
  // Small output weights: near-uniform imitation probabilities and Q-values
  // near zero at initialization.
  q_head = nn::Dense("head.q", width, kNumActions, rng, kHeadInitScale);
  imitation_head = nn::Dense("head.imitation", width, kNumActions, rng, kHeadInitScale);
}

nn::Tensor2 PolicyModel::features(FeatureBatch batch, ModelCache* cache) const {
  const int n = static_cast<int>(batch.size());
  const int e = config_.embed_dim;
  nn::Tensor2 player(n, kPlayerFeatures);
  std::array<std::vector<std::pair<int, int>>, 3> present;  // (sample, row)
  for (int i = 0; i < n; ++i) {
    const EntityFeatureSet& f = *batch[i];
    for (int c = 0; c < kPlayerFeatures; ++c) player(i, c) = f.player[c];
    for (int t = 0; t < 3; ++t) {
      const Mask& m = typed_mask(f, t);
      if (static_cast<Eigen::Index>(m.size()) != typed_rows(f, t).rows() ||
          typed_rows(f, t).cols() != kTypeWidths[t]) {
        throw std::invalid_argument(std::string("model: malformed ") + kTypeNames[t] +
                                    " features");
      }
      for (std::size_t r = 0; r < m.size(); ++r) {
        if (m[r]) present[t].emplace_back(i, static_cast<int>(r));
      }
    }
  }

  ModelCache local;
  ModelCache& c = cache ? *cache : local;
  c.batch = n;
  const nn::Tensor2 p = player_block_.forward(player, &c.player);

  std::array<nn::Tensor2, 3> embedded;
  std::array<int, 3> cursor{};
  std::vector<int> offsets(n + 1, 0);
  for (int t = 0; t < 3; ++t) {
    const int rows = static_cast<int>(present[t].size());
    c.typed_rows[t] = rows;
    if (rows == 0) continue;
    nn::Tensor2 x(rows, kTypeWidths[t]);
    for (int r = 0; r < rows; ++r) {
      const auto [sample, row] = present[t][r];
      x.row(r) = typed_rows(*batch[sample], t).row(row);
      ++offsets[sample + 1];
    }
    embedded[t] = typed_blocks_[t].forward(x, &c.typed[t]);
    embedded[t].rowwise() += type_tags_[t].value.row(0);
  }
  for (int i = 0; i < n; ++i) offsets[i + 1] += offsets[i];

  const int m = offsets[n];
  nn::Tensor2 keys(m, e);
  c.key_source.assign(m, {0, 0});
  int k = 0;
  for (int i = 0; i < n; ++i) {
    for (int t = 0; t < 3; ++t) {
      while (cursor[t] < c.typed_rows[t] && present[t][cursor[t]].first == i) {
        keys.row(k) = embedded[t].row(cursor[t]);
        c.key_source[k] = {t, cursor[t]};
        ++cursor[t];
        ++k;
      }
    }
  }

  const nn::Tensor2 context = attention_.forward(p, keys, keys, offsets, &c.attention);
  nn::Tensor2 h(n, 2 * e);
  h << p, context;
  c.trunk.resize(trunk_.size());
  for (std::size_t l = 0; l < trunk_.size(); ++l) h = trunk_[l].forward(h, &c.trunk[l]);
  return h;
}

void PolicyModel::backward_features(const ModelCache& c, const nn::Tensor2& grad) {
  const int e = config_.embed_dim;
  nn::require_shape(grad, c.batch, feature_width(), "model feature gradient");
  nn::Tensor2 g = grad;
  for (std::size_t l = trunk_.size(); l-- > 0;) g = trunk_[l].backward(c.trunk[l], g);
  nn::Tensor2 dp = g.leftCols(e);
  const nn::Tensor2 dcontext = g.rightCols(e);
  const nn::AttentionGrads ag = attention_.backward(c.attention, dcontext);
  dp += ag.queries;

  std::array<nn::Tensor2, 3> dtyped;
  for (int t = 0; t < 3; ++t) dtyped[t] = nn::Tensor2::Zero(c.typed_rows[t], e);
  for (std::size_t k = 0; k < c.key_source.size(); ++k) {
    const auto [t, row] = c.key_source[k];
    const auto kk = static_cast<Eigen::Index>(k);
    dtyped[t].row(row) += ag.keys.row(kk) + ag.values.row(kk);
  }
  for (int t = 0; t < 3; ++t) {
    if (c.typed_rows[t] == 0) continue;
    type_tags_[t].grad += dtyped[t].colwise().sum();
    typed_blocks_[t].backward(c.typed[t], dtyped[t]);
  }
  player_block_.backward(c.player, dp);
}

nn::Tensor2 PolicyModel::q_values(FeatureBatch batch) const {
  nn::Tensor2 q = q_head.forward(features(batch));
  require_finite_output(q, "Q");
  return q;
}

nn::Tensor2 PolicyModel::imitation_logits(FeatureBatch batch) const {
  nn::Tensor2 logits = imitation_head.forward(features(batch));
  require_finite_output(logits, "imitation");
  return logits;
}

void PolicyModel::require_finite_output(const nn::Tensor2& out, const char* head) const {
  if (nn::all_finite(out)) return;
  std::ostringstream msg;
  msg << "model produced non-finite " << head << " output; non-finite parameters:";
  int bad = 0;
  for (const nn::Parameter* p : const_cast<PolicyModel*>(this)->all_parameters()) {
    if (!nn::all_finite(p->value)) {
      msg << ' ' << p->name;
      ++bad;
    }
  }
  if (bad == 0) msg << " none (input features are non-finite)";
  throw ModelError(msg.str());
}

std::array<double, kNumActions> PolicyModel::q_values(const EntityFeatureSet& f) const {
  const EntityFeatureSet* one[1] = {&f};
  const nn::Tensor2 q = q_values(FeatureBatch(one));
  std::array<double, kNumActions> out{};
  for (int a = 0; a < kNumActions; ++a) out[a] = q(0, a);
  return out;
}

std::array<double, kNumActions> PolicyModel::imitation_probabilities(
    const EntityFeatureSet& f) const {
  const EntityFeatureSet* one[1] = {&f};
  const nn::Tensor2 probs = nn::softmax_rows(imitation_logits(FeatureBatch(one)));
  std::array<double, kNumActions> out{};
  for (int a = 0; a < kNumActions; ++a) out[a] = probs(0, a);
  return out;
}

nn::ParameterList PolicyModel::shared_parameters() {
  nn::ParameterList out = player_block_.parameters();
  for (int t = 0; t < 3; ++t) {
    for (nn::Parameter* p : typed_blocks_[t].parameters()) out.push_back(p);
    out.push_back(&type_tags_[t]);
  }
  for (nn::Parameter* p : attention_.parameters()) out.push_back(p);
  for (DenseBlock& b : trunk_) {
    for (nn::Parameter* p : b.parameters()) out.push_back(p);
  }
  return out;
}

nn::ParameterList PolicyModel::all_parameters() {
  nn::ParameterList out = shared_parameters();
  for (nn::Parameter* p : q_head.parameters()) out.push_back(p);
  for (nn::Parameter* p : imitation_head.parameters()) out.push_back(p);
  return out;
}

void PolicyModel::zero_grad() {
  for (nn::Parameter* p : all_parameters()) p->zero_grad();
}

std::uint64_t PolicyModel::checksum() const {
  Fnv1a h;
  for (const nn::Parameter* p : const_cast<PolicyModel*>(this)->all_parameters()) {
    h.str(p->name);
    for (Eigen::Index i = 0; i < p->value.size(); ++i) h.f64(p->value.data()[i]);
  }
  return h.digest();
}

int select_greedy(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("select_greedy: no values");
  int best = 0;
  for (std::size_t a = 0; a < values.size(); ++a) {
    if (!std::isfinite(values[a])) {
      throw std::invalid_argument("select_greedy: non-finite value at index " +
                                  std::to_string(a));
    }
    if (values[a] > values[best]) best = static_cast<int>(a);
  }
  return best;
}

int select_epsilon(std::span<const double> values, double epsilon, Rng& rng) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) {
    throw std::invalid_argument("select_epsilon: epsilon must be in [0, 1]");
  }
  if (epsilon > 0.0 && rng.bernoulli(epsilon)) {
    return static_cast<int>(rng.uniform_int(values.size()));
  }
  return select_greedy(values);
}

ModelPolicy::ModelPolicy(const PolicyModel& model, PolicyHead head, double epsilon,
                         std::string name)
    : model_(&model), head_(head), epsilon_(epsilon), name_(std::move(name)) {}

int ModelPolicy::act(const Observation& obs, Rng& rng) {
  const EntityFeatureSet f = encode_observation(obs, model_->limits());
  const auto values =
      head_ == PolicyHead::Q ? model_->q_values(f) : model_->imitation_probabilities(f);
  return select_epsilon(values, epsilon_, rng);
}

nn::Checkpoint to_checkpoint(const PolicyModel& model, const std::string& fingerprint) {
  nn::Checkpoint ck;
  ck.fingerprint = fingerprint;
  const ModelConfig& c = model.config();
  ck.meta["model.embed_dim"] = std::to_string(c.embed_dim);
  ck.meta["model.heads"] = std::to_string(c.heads);
  ck.meta["model.leaky_slope"] = format_double(c.leaky_slope);
  std::string trunk;
  for (std::size_t i = 0; i < c.trunk.size(); ++i) {
    trunk += (i ? "," : "") + std::to_string(c.trunk[i]);
  }
  ck.meta["model.trunk"] = trunk;
  ck.meta["encoder.max_enemies"] = std::to_string(model.limits().max_enemies);
  ck.meta["encoder.max_bullets"] = std::to_string(model.limits().max_bullets);
  ck.meta["encoder.max_walls"] = std::to_string(model.limits().max_walls);
  for (const nn::Parameter* p : const_cast<PolicyModel&>(model).all_parameters()) {
    ck.tensors.push_back({p->name, p->value});
  }
  return ck;
}

namespace {

const std::string& require_meta(const nn::Checkpoint& ck, const std::string& key) {
  auto it = ck.meta.find(key);
  if (it == ck.meta.end()) throw ModelError("checkpoint is missing meta key '" + key + "'");
  return it->second;
}

int meta_int(const nn::Checkpoint& ck, const std::string& key) {
  try {
    return static_cast<int>(parse_int(require_meta(ck, key)));
  } catch (const std::invalid_argument&) {
    throw ModelError("checkpoint meta '" + key + "' is not an integer");
  }
}

}  // namespace

PolicyModel model_from_checkpoint(const nn::Checkpoint& ck) {
  ModelConfig c;
  EncoderLimits limits;
  c.embed_dim = meta_int(ck, "model.embed_dim");
  c.heads = meta_int(ck, "model.heads");
  try {
    c.leaky_slope = parse_double(require_meta(ck, "model.leaky_slope"));
    c.trunk.clear();
    std::stringstream ss(require_meta(ck, "model.trunk"));
    for (std::string part; std::getline(ss, part, ',');) {
      c.trunk.push_back(static_cast<int>(parse_int(part)));
    }
  } catch (const std::invalid_argument& e) {
    throw ModelError(std::string("checkpoint model meta is malformed: ") + e.what());
  }
  limits.max_enemies = meta_int(ck, "encoder.max_enemies");
  limits.max_bullets = meta_int(ck, "encoder.max_bullets");
  limits.max_walls = meta_int(ck, "encoder.max_walls");

  PolicyModel model = [&] {
    try {
      return PolicyModel(c, limits, 0);
    } catch (const ConfigError& e) {
      throw ModelError(std::string("checkpoint describes an invalid model: ") + e.what());
    }
  }();
  const nn::ParameterList params = model.all_parameters();
  if (params.size() != ck.tensors.size()) {
    throw ModelError("checkpoint has " + std::to_string(ck.tensors.size()) +
                     " tensors, model expects " + std::to_string(params.size()));
  }
  for (nn::Parameter* p : params) {
    const nn::Tensor2* t = ck.find(p->name);
    if (t == nullptr) throw ModelError("checkpoint is missing tensor '" + p->name + "'");
    if (t->rows() != p->value.rows() || t->cols() != p->value.cols()) {
      throw ModelError("checkpoint tensor '" + p->name + "' has shape " +
                       std::to_string(t->rows()) + "x" + std::to_string(t->cols()) +
                       ", expected " + std::to_string(p->value.rows()) + "x" +
                       std::to_string(p->value.cols()));
    }
    p->value = *t;
    p->zero_grad();
  }
  return model;
}

void save_model(const std::filesystem::path& path, const PolicyModel& model,
                const std::string& fingerprint) {
  nn::write_checkpoint(path, to_checkpoint(model, fingerprint));
}

PolicyModel load_model(const std::filesystem::path& path, const std::string& expected_fingerprint) {
  const nn::Checkpoint ck = nn::read_checkpoint(path);
  if (!expected_fingerprint.empty() && ck.fingerprint != expected_fingerprint) {
    throw ModelError("checkpoint " + path.string() + " was trained for config fingerprint " +
                     ck.fingerprint + ", current config is " + expected_fingerprint);
  }
  return model_from_checkpoint(ck);
}

}  // namespace arena
