#ifndef ORGMOL_TENSOR_ADAM_HPP
#define ORGMOL_TENSOR_ADAM_HPP

#include <cmath>
#include <map>
#include <string>

#include "orgmol/tensor/tensor.hpp"

namespace orgmol {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 1e-4;  // decoupled, applied to the parameter directly
  double lr_decay = 0.999;     // multiplicative, once per epoch
  double ema_decay = 0.999;
};

// One optimizer slot per named parameter: first and second moments plus an
// exponential moving average shadow used for evaluation checkpoints.
class Adam {
 public:
  explicit Adam(AdamConfig cfg = {}) : cfg_(cfg), lr_(cfg.lr) {}

  const AdamConfig& config() const { return cfg_; }
  double current_lr() const { return lr_; }
  void end_epoch() { lr_ *= cfg_.lr_decay; }

  void step(const std::string& name, Tensor& param, const Tensor& grad) {
    if (!param.same_shape(grad)) throw ShapeMismatch("adam gradient");
    Slot& s = slots_[name];
    if (s.m.size() == 0) {
      s.m = Tensor(param.shape);
      s.v = Tensor(param.shape);
      s.ema = Tensor(param.shape);
    }
    s.t += 1;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, s.t);
    const double bc2 = 1.0 - std::pow(cfg_.beta2, s.t);
    for (size_t i = 0; i < param.size(); ++i) {
      const double g = grad.data[i];
      s.m.data[i] = cfg_.beta1 * s.m.data[i] + (1.0 - cfg_.beta1) * g;
      s.v.data[i] = cfg_.beta2 * s.v.data[i] + (1.0 - cfg_.beta2) * g * g;
      const double mhat = s.m.data[i] / bc1;
      const double vhat = s.v.data[i] / bc2;
      param.data[i] -= lr_ * cfg_.weight_decay * param.data[i];
      param.data[i] -= lr_ * mhat / (std::sqrt(vhat) + cfg_.eps);
      s.ema.data[i] = cfg_.ema_decay * s.ema.data[i] +
                      (1.0 - cfg_.ema_decay) * param.data[i];
    }
  }

  bool has(const std::string& name) const { return slots_.count(name) > 0; }

  // Bias-corrected, same scheme as the moment estimates; without the
  // correction the shadow is dominated by the initialization until
  // 1/(1-decay) updates have happened.
  Tensor ema(const std::string& name) const {
    const Slot& s = slots_.at(name);
    Tensor out = s.ema;
    const double bc = 1.0 - std::pow(cfg_.ema_decay, s.t);
    if (bc > 0.0)
      for (double& x : out.data) x /= bc;
    return out;
  }

 private:
  struct Slot {
    Tensor m, v, ema;
    long t = 0;
  };

  AdamConfig cfg_;
  double lr_;
  std::map<std::string, Slot> slots_;
};

}  // namespace orgmol

#endif  // ORGMOL_TENSOR_ADAM_HPP
