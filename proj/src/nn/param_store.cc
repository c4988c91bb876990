#include "srl/nn/param_store.h"

#include <bit>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "srl/data_model.h"

namespace srl::nn {

template <typename Real>
int ParamStore<Real>::Add(const std::string& name, int rows, int cols,
                          Init init, std::mt19937_64& rng, bool trainable) {
  if (index_.count(name)) {
    throw ContractViolation("duplicate parameter name '" + name + "'");
  }
  Parameter<Real> p;
  p.name = name;
  p.value = Tensor<Real>(rows, cols);
  p.grad = Tensor<Real>(rows, cols);
  p.trainable = trainable;
  double bound = 0;
  switch (init) {
    case Init::kZero:
      break;
    case Init::kXavier:
      bound = std::sqrt(6.0 / (rows + cols));
      break;
    case Init::kEmbedding:
      bound = std::sqrt(3.0 / cols);
      break;
  }
  if (bound > 0) {
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (Real& v : p.value.data) v = static_cast<Real>(dist(rng));
  }
  const int id = size();
  params_.push_back(std::move(p));
  index_.emplace(name, id);
  return id;
}

template <typename Real>
int ParamStore<Real>::Find(const std::string& name) const {
  auto it = index_.find(name);
  return it == index_.end() ? -1 : it->second;
}

template <typename Real>
std::vector<int> ParamStore<Real>::TrainableIndices() const {
  std::vector<int> out;
  for (int i = 0; i < size(); ++i) {
    if (params_[i].trainable) out.push_back(i);
  }
  return out;
}

template <typename Real>
long ParamStore<Real>::NumValues() const {
  long n = 0;
  for (const auto& p : params_) n += static_cast<long>(p.value.size());
  return n;
}

template <typename Real>
void ParamStore<Real>::ZeroGrad() {
  for (auto& p : params_) std::fill(p.grad.data.begin(), p.grad.data.end(), Real(0));
}

template <typename Real>
double ParamStore<Real>::GradNorm() const {
  double sq = 0;
  for (const auto& p : params_) {
    if (!p.trainable) continue;
    for (Real g : p.grad.data) sq += static_cast<double>(g) * g;
  }
  return std::sqrt(sq);
}

template <typename Real>
double ParamStore<Real>::ClipGradNorm(double max_norm) {
  const double norm = GradNorm();
  if (norm > max_norm && norm > 0) {
    const Real scale = static_cast<Real>(max_norm / norm);
    for (auto& p : params_) {
      if (!p.trainable) continue;
      for (Real& g : p.grad.data) g *= scale;
    }
  }
  return norm;
}

template <typename Real>
double ParamStore<Real>::SquaredNorm(bool trainable_only) const {
  double sq = 0;
  for (const auto& p : params_) {
    if (trainable_only && !p.trainable) continue;
    for (Real v : p.value.data) sq += static_cast<double>(v) * v;
  }
  return sq;
}

template <typename Real>
void ParamStore<Real>::AdamStep(const AdamConfig& config) {
  for (const auto& p : params_) {
    if (!p.trainable) continue;
    for (Real g : p.grad.data) {
      if (!std::isfinite(g)) {
        throw Error("non-finite gradient in parameter '" + p.name + "'");
      }
    }
  }
  ++adam_steps_;
  const double b1 = config.beta1;
  const double b2 = config.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(adam_steps_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(adam_steps_));
  for (auto& p : params_) {
    if (!p.trainable) continue;
    if (p.adam_m.size() != p.value.size()) {
      p.adam_m = Tensor<Real>(p.value.rows, p.value.cols);
      p.adam_v = Tensor<Real>(p.value.rows, p.value.cols);
    }
    const size_t n = p.value.size();
    for (size_t i = 0; i < n; ++i) {
      const double g = p.grad.data[i];
      const double m = b1 * p.adam_m.data[i] + (1.0 - b1) * g;
      const double v = b2 * p.adam_v.data[i] + (1.0 - b2) * g * g;
      p.adam_m.data[i] = static_cast<Real>(m);
      p.adam_v.data[i] = static_cast<Real>(v);
      const double mhat = m / c1;
      const double vhat = v / c2;
      p.value.data[i] -= static_cast<Real>(
          config.learning_rate * mhat / (std::sqrt(vhat) + config.epsilon));
    }
  }
}

template <typename Real>
const char* ParamStore<Real>::DType() {
  return sizeof(Real) == 4 ? "float32" : "float64";
}

namespace {

template <typename Real>
void WriteLittleEndian(std::ofstream& out, const std::vector<Real>& values) {
  if constexpr (std::endian::native == std::endian::little) {
    out.write(reinterpret_cast<const char*>(values.data()),
              static_cast<std::streamsize>(values.size() * sizeof(Real)));
  } else {
    for (Real v : values) {
      char bytes[sizeof(Real)];
      std::memcpy(bytes, &v, sizeof(Real));
      std::reverse(bytes, bytes + sizeof(Real));
      out.write(bytes, sizeof(Real));
    }
  }
}

template <typename Real>
void ReadLittleEndian(std::ifstream& in, std::vector<Real>* values) {
  in.read(reinterpret_cast<char*>(values->data()),
          static_cast<std::streamsize>(values->size() * sizeof(Real)));
  if constexpr (std::endian::native != std::endian::little) {
    for (Real& v : *values) {
      char bytes[sizeof(Real)];
      std::memcpy(bytes, &v, sizeof(Real));
      std::reverse(bytes, bytes + sizeof(Real));
      std::memcpy(&v, bytes, sizeof(Real));
    }
  }
}

}  // namespace

template <typename Real>
nlohmann::json ParamStore<Real>::SaveTensors(const std::string& dir) const {
  namespace fs = std::filesystem;
  fs::create_directories(fs::path(dir) / "tensors");
  nlohmann::json entries = nlohmann::json::array();
  for (int i = 0; i < size(); ++i) {
    const auto& p = params_[i];
    char file[32];
    std::snprintf(file, sizeof(file), "tensors/%04d.bin", i);
    std::ofstream out(fs::path(dir) / file, std::ios::binary);
    if (!out) throw InputError("cannot write tensor file in '" + dir + "'");
    WriteLittleEndian(out, p.value.data);
    if (!out) throw InputError("write failed for tensor '" + p.name + "'");
    entries.push_back({{"name", p.name},
                       {"shape", {p.value.rows, p.value.cols}},
                       {"dtype", DType()},
                       {"file", file},
                       {"trainable", p.trainable}});
  }
  return entries;
}

template <typename Real>
void ParamStore<Real>::LoadTensors(const std::string& dir,
                                   const nlohmann::json& entries) {
  namespace fs = std::filesystem;
  if (static_cast<int>(entries.size()) != size()) {
    throw InputError("checkpoint lists " + std::to_string(entries.size()) +
                     " tensors, model expects " + std::to_string(size()));
  }
  for (const auto& e : entries) {
    const std::string name = e.at("name").get<std::string>();
    const int id = Find(name);
    if (id < 0) throw InputError("checkpoint tensor '" + name + "' is unknown");
    auto& p = params_[id];
    const auto shape = e.at("shape").get<std::vector<int>>();
    if (shape.size() != 2 || shape[0] != p.value.rows ||
        shape[1] != p.value.cols) {
      throw InputError("checkpoint tensor '" + name + "' has shape " +
                       e.at("shape").dump() + ", expected " +
                       ShapeString(p.value.rows, p.value.cols));
    }
    if (e.at("dtype").get<std::string>() != DType()) {
      throw InputError("checkpoint tensor '" + name + "' has dtype " +
                       e.at("dtype").get<std::string>());
    }
    const fs::path file = fs::path(dir) / e.at("file").get<std::string>();
    std::ifstream in(file, std::ios::binary);
    if (!in) throw InputError("cannot open '" + file.string() + "'");
    ReadLittleEndian(in, &p.value.data);
    if (!in || in.peek() != std::char_traits<char>::eof()) {
      throw InputError("tensor file '" + file.string() + "' has wrong size");
    }
  }
}

template class ParamStore<float>;
template class ParamStore<double>;

}  // namespace srl::nn
