// Named trainable tensors, Adam optimizer state, and tensor checkpoints.

#ifndef SRL_NN_PARAM_STORE_H_
#define SRL_NN_PARAM_STORE_H_

#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "srl/nn/tensor.h"

namespace srl::nn {

enum class Init {
  kZero,
  kXavier,     // U(-a, a), a = sqrt(6 / (rows + cols))
  kEmbedding,  // U(-a, a), a = sqrt(3 / cols)
};

template <typename Real>
struct Parameter {
  std::string name;
  Tensor<Real> value;
  Tensor<Real> grad;
  Tensor<Real> adam_m;
  Tensor<Real> adam_v;
  bool trainable = true;
};

struct AdamConfig {
  double learning_rate = 1e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

template <typename Real>
class ParamStore {
 public:
  // Throws ContractViolation on a duplicate name.
  int Add(const std::string& name, int rows, int cols, Init init,
          std::mt19937_64& rng, bool trainable = true);

  int size() const { return static_cast<int>(params_.size()); }
  Parameter<Real>& at(int i) { return params_[i]; }
  const Parameter<Real>& at(int i) const { return params_[i]; }
  // -1 when absent.
  int Find(const std::string& name) const;
  std::vector<int> TrainableIndices() const;
  long NumValues() const;

  void ZeroGrad();
  double GradNorm() const;
  // Rescales gradients so that their global norm is at most max_norm.
  // Returns the norm before clipping.
  double ClipGradNorm(double max_norm);
  double SquaredNorm(bool trainable_only = true) const;

  // One Adam update over all trainable parameters using the stored
  // gradients. Throws Error naming the parameter on a non-finite gradient.
  void AdamStep(const AdamConfig& config);
  long adam_steps() const { return adam_steps_; }

  // Writes one little-endian blob per tensor under dir/tensors and returns
  // the manifest entries (name, shape, dtype, file, trainable).
  nlohmann::json SaveTensors(const std::string& dir) const;
  // Loads values for every parameter listed in the manifest entries;
  // names and shapes must match this store exactly.
  void LoadTensors(const std::string& dir, const nlohmann::json& entries);

  static const char* DType();

 private:
  std::vector<Parameter<Real>> params_;
  std::unordered_map<std::string, int> index_;
  long adam_steps_ = 0;
};

extern template class ParamStore<float>;
extern template class ParamStore<double>;

}  // namespace srl::nn

#endif  // SRL_NN_PARAM_STORE_H_
