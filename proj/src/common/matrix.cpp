#include "stressfuse/common/matrix.hpp"

namespace stressfuse {

std::vector<double> Matrix::column(std::size_t c) const {
  std::vector<double> out(rows);
  for (std::size_t r = 0; r < rows; ++r) out[r] = data[r * cols + c];
  return out;
}

Matrix Matrix::select_rows(std::span<const std::size_t> idx) const {
  Matrix out(idx.size(), cols);
  for (std::size_t i = 0; i < idx.size(); ++i) {
    const auto src = row(idx[i]);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

Matrix Matrix::select_cols(std::span<const std::size_t> idx) const {
  Matrix out(rows, idx.size());
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t j = 0; j < idx.size(); ++j) out(r, j) = (*this)(r, idx[j]);
  }
  return out;
}

}  // namespace stressfuse
