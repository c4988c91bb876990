#ifndef SRL_NN_TENSOR_H_
#define SRL_NN_TENSOR_H_

#include <string>
#include <vector>

namespace srl::nn {

// Dense row-major matrix; column vectors have cols == 1.
template <typename Real>
struct Tensor {
  int rows = 0;
  int cols = 0;
  std::vector<Real> data;

  Tensor() = default;
  Tensor(int r, int c, Real fill = Real(0))
      : rows(r), cols(c), data(static_cast<size_t>(r) * c, fill) {}

  static Tensor Column(std::vector<Real> values) {
    Tensor t;
    t.rows = static_cast<int>(values.size());
    t.cols = 1;
    t.data = std::move(values);
    return t;
  }

  std::vector<int> shape() const { return {rows, cols}; }
  size_t size() const { return data.size(); }
  Real& at(int r, int c) { return data[static_cast<size_t>(r) * cols + c]; }
  Real at(int r, int c) const {
    return data[static_cast<size_t>(r) * cols + c];
  }
};

inline std::string ShapeString(int rows, int cols) {
  return "(" + std::to_string(rows) + "x" + std::to_string(cols) + ")";
}

}  // namespace srl::nn

#endif  // SRL_NN_TENSOR_H_
