// Copyright 2026 The singsmooth Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <iosfwd>
#include <vector>

#include "singsmooth/errors.hpp"
#include "singsmooth/model.hpp"

namespace singsmooth {

/// The equality-constraint operator A of the stacked problem.
///
/// Row block k holds the process rows (n of them) followed by the
/// measurement rows (m_k) of step k; column block k holds (u_k, t_k, x_k).
///
///   D_k     = [ C_k  0    I   ]      B_k = [ 0  0  -G_{k+1} ]
///             [ 0    S_k  H_k ]            [ 0  0   0       ]
///
/// diag[k] = D_k sits on the block diagonal, sub[k] = B_k couples row block
/// k+1 to column block k.
struct BlockBidiagonal {
  std::vector<Mat> diag;
  std::vector<Mat> sub;
  std::vector<Index> row_offset;
  std::vector<Index> col_offset;
  Index rows = 0;
  Index cols = 0;

  Index num_blocks() const { return static_cast<Index>(diag.size()); }
  Index block_rows(Index k) const { return diag[k].rows(); }
  Index block_cols(Index k) const { return diag[k].cols(); }

  Mat dense() const;
};

/// Symmetric block tridiagonal matrix; offdiag[k] is the block in row
/// block k+1, column block k.
struct BlockTridiagonal {
  std::vector<Mat> diag;
  std::vector<Mat> offdiag;

  Index num_blocks() const { return static_cast<Index>(diag.size()); }
  Mat dense() const;
};

/// Block Cholesky factor L with L L^T = T. lower_diag[k] is lower
/// triangular; lower_sub[k] sits in row block k+1, column block k.
struct BlockCholeskyFactor {
  std::vector<Mat> lower_diag;
  std::vector<Mat> lower_sub;

  Index num_blocks() const { return static_cast<Index>(lower_diag.size()); }
  Mat dense() const;
};

struct Assembly {
  BlockBidiagonal A;
  Vec w_hat;
};

// A and w_hat = (x0, y_1, 0, y_2, ..., 0, y_N) in row-block order.
Assembly assemble(const Problem& p);

BlockTridiagonal gram(const BlockBidiagonal& A);

// Throws RankDeficiencyError naming the first block whose pivot falls below
// pivot_tol times the largest diagonal entry of T.
BlockCholeskyFactor factor(const BlockTridiagonal& T, double pivot_tol = 1e-10);

// Solves (L L^T) x = b in place.
void solve_in_place(const BlockCholeskyFactor& L, Vec& b);

Vec matvec(const BlockBidiagonal& A, const Vec& v);
Vec matvec_transpose(const BlockBidiagonal& A, const Vec& v);

/// Euclidean projection onto {z : A z = w_hat}.
///
/// Solves A A^T nu = A eta - w_hat with the block factor, then returns
/// eta - A^T nu. Linear in the number of blocks.
class AffineProjector {
 public:
  AffineProjector(BlockBidiagonal A, Vec w_hat, double pivot_tol = 1e-10);

  const BlockBidiagonal& A() const { return A_; }
  const Vec& w_hat() const { return w_hat_; }
  const BlockCholeskyFactor& factor() const { return L_; }

  // out = argmin_{A z = w_hat} |eta - z|^2 / 2. `nu` is caller-owned scratch
  // of length A.rows.
  void project(const Vec& eta, Vec& out, Vec& nu) const;
  Vec project(const Vec& eta) const;

  // Component of v orthogonal to range(A^T), i.e. the projection onto null(A).
  Vec null_space_component(const Vec& v) const;

  // max |A z - w_hat|
  double feasibility_residual(const Vec& z) const;

 private:
  BlockBidiagonal A_;
  Vec w_hat_;
  BlockCholeskyFactor L_;
};

Vec solve_affine_projection(const BlockBidiagonal& A,
                            const BlockCholeskyFactor& L, const Vec& w_hat,
                            const Vec& eta);

// Matrix Market coordinate text (real general), nonzeros only.
void write_matrix_market(std::ostream& os, const Mat& m);
void write_matrix_market(std::ostream& os, const BlockBidiagonal& A);

}  // namespace singsmooth
