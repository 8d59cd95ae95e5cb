#ifndef U2USIM_NN_HPP
#define U2USIM_NN_HPP

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "u2usim/rng.hpp"

// Small feedforward network core with manual reverse-mode gradients,
// Adam, a transition replay buffer and softmax helpers. Shared by the
// DQN and actor-critic agents.

namespace u2usim {

struct TrainingDivergence : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Row-major dense matrix.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> a;

  Matrix() = default;
  Matrix(int r, int c) : rows(r), cols(c), a(static_cast<size_t>(r) * c, 0.0) {}
  double& at(int r, int c) { return a[static_cast<size_t>(r) * cols + c]; }
  double at(int r, int c) const { return a[static_cast<size_t>(r) * cols + c]; }
};

// Rectifier hidden layers, identity output.
struct Mlp {
  std::vector<int> sizes;            // {in, hidden..., out}
  std::vector<Matrix> weights;       // weights[l]: sizes[l+1] x sizes[l]
  std::vector<std::vector<double>> biases;

  static Mlp make(const std::vector<int>& sizes, RandomStream& init_rng);

  int input_size() const { return sizes.front(); }
  int output_size() const { return sizes.back(); }
  int layer_count() const { return static_cast<int>(weights.size()); }
  size_t parameter_count() const;
  bool finite() const;
};

// Activations retained by forward() for the matching backward().
struct ForwardCache {
  std::vector<std::vector<double>> inputs;  // per layer, post-activation input
  std::vector<std::vector<double>> pre;     // per layer, pre-activation output
};

std::vector<double> forward(const Mlp& net, std::span<const double> x,
                            ForwardCache* cache = nullptr);

struct Gradients {
  std::vector<Matrix> dw;
  std::vector<std::vector<double>> db;

  static Gradients zeros_like(const Mlp& net);
  void add(const Gradients& other);
  void scale(double s);
  double global_norm() const;
};

// Exact reverse-mode gradients for all parameters given dL/dy. The cache
// must come from a forward() on the same network and input.
Gradients backward(const Mlp& net, const ForwardCache& cache,
                   std::span<const double> upstream);

// Scales gradients so the global L2 norm is at most max_norm. Returns the
// pre-clip norm.
double clip_global_norm(Gradients& g, double max_norm);

// params += scale * grads. Plain additive update for the actor-critic
// rules.
void apply_update(Mlp& net, const Gradients& g, double scale);

struct AdamState {
  double lr = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::int64_t t = 0;
  Gradients m;
  Gradients v;

  static AdamState make(const Mlp& net, double lr);
};

// Bias-corrected Adam descent step. Throws TrainingDivergence on
// non-finite gradients or parameters.
void adam_step(Mlp& net, AdamState& state, const Gradients& g);

std::vector<double> softmax(std::span<const double> logits);

// d ln softmax(logits)[chosen] / d logits = onehot(chosen) - softmax.
std::vector<double> log_softmax_grad(std::span<const double> logits, int chosen);

// One environment transition. Actions are the full fixed-layout
// sub-action tuple; heads that were inactive at the time hold -1.
struct Transition {
  std::vector<double> state;
  std::vector<int> action;
  double reward = 0.0;
  std::vector<double> next_state;
};

class ReplayBuffer {
 public:
  explicit ReplayBuffer(size_t capacity) : capacity_(capacity) {}

  void push(Transition t);
  size_t size() const { return data_.size(); }
  size_t capacity() const { return capacity_; }
  const Transition& at(size_t i) const { return data_[i]; }

  // n uniform draws without replacement; returns empty when size < n
  // (learning is skipped, not an error).
  std::vector<size_t> sample_indices(size_t n, RandomStream& rng) const;

 private:
  size_t capacity_;
  size_t head_ = 0;  // FIFO eviction point once full
  std::vector<Transition> data_;
};

// Checkpoint serialisation: versioned JSON of shapes plus row-major
// parameters.
std::string mlp_to_json(const Mlp& net);
Mlp mlp_from_json(const std::string& text);

}  // namespace u2usim

#endif  // U2USIM_NN_HPP
