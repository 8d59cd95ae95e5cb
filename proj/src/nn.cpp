#include "u2usim/nn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "json.hpp"

namespace u2usim {

Mlp Mlp::make(const std::vector<int>& sizes, RandomStream& init_rng) {
  if (sizes.size() < 2) {
    throw std::invalid_argument("Mlp::make: need at least input and output");
  }
  Mlp net;
  net.sizes = sizes;
  for (size_t l = 0; l + 1 < sizes.size(); ++l) {
    const int fan_in = sizes[l];
    const int fan_out = sizes[l + 1];
    Matrix w(fan_out, fan_in);
    const double bound = std::sqrt(6.0 / fan_in);
    for (double& v : w.a) v = init_rng.uniform(-bound, bound);
    net.weights.push_back(std::move(w));
    net.biases.emplace_back(fan_out, 0.0);
  }
  return net;
}

size_t Mlp::parameter_count() const {
  size_t n = 0;
  for (const auto& w : weights) n += w.a.size();
  for (const auto& b : biases) n += b.size();
  return n;
}

bool Mlp::finite() const {
  for (const auto& w : weights) {
    for (double v : w.a) {
      if (!std::isfinite(v)) return false;
    }
  }
  for (const auto& b : biases) {
    for (double v : b) {
      if (!std::isfinite(v)) return false;
    }
  }
  return true;
}

std::vector<double> forward(const Mlp& net, std::span<const double> x,
                            ForwardCache* cache) {
  if (static_cast<int>(x.size()) != net.input_size()) {
    throw std::invalid_argument("forward: input size mismatch");
  }
  std::vector<double> act(x.begin(), x.end());
  if (cache != nullptr) {
    cache->inputs.clear();
    cache->pre.clear();
  }
  const int layers = net.layer_count();
  for (int l = 0; l < layers; ++l) {
    const Matrix& w = net.weights[l];
    const auto& b = net.biases[l];
    if (cache != nullptr) cache->inputs.push_back(act);
    std::vector<double> out(w.rows);
    for (int r = 0; r < w.rows; ++r) {
      double sum = b[r];
      const double* row = &w.a[static_cast<size_t>(r) * w.cols];
      for (int c = 0; c < w.cols; ++c) sum += row[c] * act[c];
      out[r] = sum;
    }
    if (cache != nullptr) cache->pre.push_back(out);
    if (l + 1 < layers) {
      for (double& v : out) v = std::max(0.0, v);  // rectifier
    }
    act = std::move(out);
  }
  return act;
}

Gradients Gradients::zeros_like(const Mlp& net) {
  Gradients g;
  for (const auto& w : net.weights) g.dw.emplace_back(w.rows, w.cols);
  for (const auto& b : net.biases) g.db.emplace_back(b.size(), 0.0);
  return g;
}

void Gradients::add(const Gradients& other) {
  for (size_t l = 0; l < dw.size(); ++l) {
    for (size_t i = 0; i < dw[l].a.size(); ++i) dw[l].a[i] += other.dw[l].a[i];
    for (size_t i = 0; i < db[l].size(); ++i) db[l][i] += other.db[l][i];
  }
}

void Gradients::scale(double s) {
  for (auto& w : dw) {
    for (double& v : w.a) v *= s;
  }
  for (auto& b : db) {
    for (double& v : b) v *= s;
  }
}

double Gradients::global_norm() const {
  double sum = 0.0;
  for (const auto& w : dw) {
    for (double v : w.a) sum += v * v;
  }
  for (const auto& b : db) {
    for (double v : b) sum += v * v;
  }
  return std::sqrt(sum);
}

Gradients backward(const Mlp& net, const ForwardCache& cache,
                   std::span<const double> upstream) {
  const int layers = net.layer_count();
  if (static_cast<int>(cache.inputs.size()) != layers) {
    throw std::logic_error("backward: missing forward cache");
  }
  if (static_cast<int>(upstream.size()) != net.output_size()) {
    throw std::invalid_argument("backward: upstream size mismatch");
  }
  Gradients g = Gradients::zeros_like(net);
  std::vector<double> delta(upstream.begin(), upstream.end());
  for (int l = layers - 1; l >= 0; --l) {
    const Matrix& w = net.weights[l];
    const auto& in = cache.inputs[l];
    // delta currently holds dL/d(post-activation output of layer l);
    // fold in the rectifier derivative for hidden layers.
    if (l + 1 < layers) {
      for (int r = 0; r < w.rows; ++r) {
        if (cache.pre[l][r] <= 0.0) delta[r] = 0.0;
      }
    }
    for (int r = 0; r < w.rows; ++r) {
      g.db[l][r] = delta[r];
      double* grow = &g.dw[l].a[static_cast<size_t>(r) * w.cols];
      for (int c = 0; c < w.cols; ++c) grow[c] = delta[r] * in[c];
    }
    if (l > 0) {
      std::vector<double> prev(w.cols, 0.0);
      for (int r = 0; r < w.rows; ++r) {
        const double* row = &w.a[static_cast<size_t>(r) * w.cols];
        for (int c = 0; c < w.cols; ++c) prev[c] += row[c] * delta[r];
      }
      delta = std::move(prev);
    }
  }
  return g;
}

double clip_global_norm(Gradients& g, double max_norm) {
  const double norm = g.global_norm();
  if (norm > max_norm && norm > 0.0) g.scale(max_norm / norm);
  return norm;
}

void apply_update(Mlp& net, const Gradients& g, double scale) {
  for (int l = 0; l < net.layer_count(); ++l) {
    for (size_t i = 0; i < net.weights[l].a.size(); ++i) {
      net.weights[l].a[i] += scale * g.dw[l].a[i];
    }
    for (size_t i = 0; i < net.biases[l].size(); ++i) {
      net.biases[l][i] += scale * g.db[l][i];
    }
  }
}

AdamState AdamState::make(const Mlp& net, double lr) {
  AdamState s;
  s.lr = lr;
  s.m = Gradients::zeros_like(net);
  s.v = Gradients::zeros_like(net);
  return s;
}

namespace {

void adam_apply(double lr, double b1, double b2, double eps, double bc1,
                double bc2, double g, double& m, double& v, double& param) {
  m = b1 * m + (1.0 - b1) * g;
  v = b2 * v + (1.0 - b2) * g * g;
  const double mhat = m / bc1;
  const double vhat = v / bc2;
  param -= lr * mhat / (std::sqrt(vhat) + eps);
}

}  // namespace

void adam_step(Mlp& net, AdamState& state, const Gradients& g) {
  for (const auto& w : g.dw) {
    for (double v : w.a) {
      if (!std::isfinite(v)) {
        throw TrainingDivergence("adam_step: non-finite gradient");
      }
    }
  }
  for (const auto& b : g.db) {
    for (double v : b) {
      if (!std::isfinite(v)) {
        throw TrainingDivergence("adam_step: non-finite gradient");
      }
    }
  }
  state.t += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
  for (int l = 0; l < net.layer_count(); ++l) {
    for (size_t i = 0; i < net.weights[l].a.size(); ++i) {
      adam_apply(state.lr, state.beta1, state.beta2, state.eps, bc1, bc2,
                 g.dw[l].a[i], state.m.dw[l].a[i], state.v.dw[l].a[i],
                 net.weights[l].a[i]);
    }
    for (size_t i = 0; i < net.biases[l].size(); ++i) {
      adam_apply(state.lr, state.beta1, state.beta2, state.eps, bc1, bc2,
                 g.db[l][i], state.m.db[l][i], state.v.db[l][i],
                 net.biases[l][i]);
    }
  }
  if (!net.finite()) {
    throw TrainingDivergence("adam_step: parameters diverged");
  }
}

std::vector<double> softmax(std::span<const double> logits) {
  double maxv = -std::numeric_limits<double>::infinity();
  for (double v : logits) maxv = std::max(maxv, v);
  std::vector<double> p(logits.size());
  double sum = 0.0;
  for (size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - maxv);
    sum += p[i];
  }
  for (double& v : p) v /= sum;
  return p;
}

std::vector<double> log_softmax_grad(std::span<const double> logits,
                                     int chosen) {
  std::vector<double> g = softmax(logits);
  for (double& v : g) v = -v;
  g.at(chosen) += 1.0;
  return g;
}

void ReplayBuffer::push(Transition t) {
  if (capacity_ == 0) return;
  if (data_.size() < capacity_) {
    data_.push_back(std::move(t));
  } else {
    data_[head_] = std::move(t);
    head_ = (head_ + 1) % capacity_;
  }
}

std::vector<size_t> ReplayBuffer::sample_indices(size_t n,
                                                 RandomStream& rng) const {
  if (n > data_.size()) return {};
  std::vector<size_t> idx(data_.size());
  for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  // partial Fisher-Yates: first n slots become the sample
  for (size_t i = 0; i < n; ++i) {
    const size_t j = i + static_cast<size_t>(rng.bounded(idx.size() - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(n);
  return idx;
}

std::string mlp_to_json(const Mlp& net) {
  nlohmann::json j;
  j["format"] = "u2usim-mlp";
  j["version"] = 1;
  j["sizes"] = net.sizes;
  nlohmann::json weights = nlohmann::json::array();
  for (const auto& w : net.weights) weights.push_back(w.a);
  j["weights"] = weights;  // row-major, layer order
  j["biases"] = net.biases;
  return j.dump();
}

Mlp mlp_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  if (j.at("format") != "u2usim-mlp" || j.at("version") != 1) {
    throw std::runtime_error("mlp_from_json: unknown checkpoint format");
  }
  Mlp net;
  net.sizes = j.at("sizes").get<std::vector<int>>();
  const auto& weights = j.at("weights");
  const auto& biases = j.at("biases");
  for (size_t l = 0; l + 1 < net.sizes.size(); ++l) {
    Matrix w(net.sizes[l + 1], net.sizes[l]);
    w.a = weights.at(l).get<std::vector<double>>();
    if (w.a.size() != static_cast<size_t>(w.rows) * w.cols) {
      throw std::runtime_error("mlp_from_json: weight shape mismatch");
    }
    net.weights.push_back(std::move(w));
    net.biases.push_back(biases.at(l).get<std::vector<double>>());
    if (net.biases.back().size() != static_cast<size_t>(net.sizes[l + 1])) {
      throw std::runtime_error("mlp_from_json: bias shape mismatch");
    }
  }
  return net;
}

}  // namespace u2usim
