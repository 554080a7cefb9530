#pragma once

// Internal helper shared by the Gaussian backends: canonicalize a real
// antisymmetric matrix M into 2x2 blocks [[0, b], [-b, 0]] with b >= 0 via a
// real Schur decomposition, M = U (blocks) U^T with U orthogonal. Zero
// eigenvalues surface as 1x1 Schur blocks and are paired up in order.

#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace qhbm {

struct AntisymmetricBlocks {
  Eigen::VectorXd b;   // one value per 2x2 block, all >= 0
  Eigen::MatrixXd u;   // orthogonal; columns (2k, 2k+1) carry block k
};

inline AntisymmetricBlocks antisymmetric_canonical_blocks(
    const Eigen::MatrixXd& m) {
  const Eigen::Index dim = m.rows();
  if (dim % 2 != 0 || m.cols() != dim) {
    throw std::invalid_argument(
        "antisymmetric canonical form needs an even-dimensional square matrix");
  }
  Eigen::RealSchur<Eigen::MatrixXd> schur(m);
  Eigen::MatrixXd t = schur.matrixT();
  Eigen::MatrixXd u = schur.matrixU();

  // Collect 2x2 blocks (nonzero subdiagonal) and stray 1x1 zero blocks.
  std::vector<std::pair<double, Eigen::Index>> blocks;  // (b, first column)
  std::vector<Eigen::Index> zeros;
  Eigen::Index i = 0;
  while (i < dim) {
    if (i + 1 < dim && t(i + 1, i) != 0.0) {
      double b = 0.5 * (t(i, i + 1) - t(i + 1, i));
      if (b < 0.0) {
        u.col(i).swap(u.col(i + 1));
        b = -b;
      }
      blocks.emplace_back(b, i);
      i += 2;
    } else {
      zeros.push_back(i);
      i += 1;
    }
  }
  for (std::size_t k = 0; k + 1 < zeros.size(); k += 2) {
    blocks.emplace_back(0.0, -1);  // columns filled below
  }
  if (zeros.size() % 2 != 0) {
    throw std::runtime_error(
        "antisymmetric canonical form: unpaired zero eigenvalue");
  }

  AntisymmetricBlocks result;
  result.b.resize(dim / 2);
  result.u.resize(dim, dim);
  Eigen::Index out = 0;
  std::size_t zero_cursor = 0;
  for (const auto& [b, col] : blocks) {
    result.b[out / 2] = b;
    if (col >= 0) {
      result.u.col(out) = u.col(col);
      result.u.col(out + 1) = u.col(col + 1);
    } else {
      result.u.col(out) = u.col(zeros[zero_cursor]);
      result.u.col(out + 1) = u.col(zeros[zero_cursor + 1]);
      zero_cursor += 2;
    }
    out += 2;
  }
  return result;
}

}  // namespace qhbm
