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

#include "singsmooth/block_linalg.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <string>

namespace singsmooth {

Mat BlockBidiagonal::dense() const {
  Mat out = Mat::Zero(rows, cols);
  for (Index k = 0; k < num_blocks(); ++k) {
    out.block(row_offset[k], col_offset[k], diag[k].rows(), diag[k].cols()) = diag[k];
    if (k + 1 < num_blocks()) {
      out.block(row_offset[k + 1], col_offset[k], sub[k].rows(), sub[k].cols()) = sub[k];
    }
  }
  return out;
}

namespace {

std::vector<Index> offsets_of(const std::vector<Mat>& diag, bool by_rows) {
  std::vector<Index> off(diag.size() + 1, 0);
  for (std::size_t k = 0; k < diag.size(); ++k) {
    off[k + 1] = off[k] + (by_rows ? diag[k].rows() : diag[k].cols());
  }
  return off;
}

}  // namespace

Mat BlockTridiagonal::dense() const {
  const auto off = offsets_of(diag, true);
  Mat out = Mat::Zero(off.back(), off.back());
  for (Index k = 0; k < num_blocks(); ++k) {
    out.block(off[k], off[k], diag[k].rows(), diag[k].cols()) = diag[k];
    if (k + 1 < num_blocks()) {
      out.block(off[k + 1], off[k], offdiag[k].rows(), offdiag[k].cols()) = offdiag[k];
      out.block(off[k], off[k + 1], offdiag[k].cols(), offdiag[k].rows()) =
          offdiag[k].transpose();
    }
  }
  return out;
}

Mat BlockCholeskyFactor::dense() const {
  const auto off = offsets_of(lower_diag, true);
  Mat out = Mat::Zero(off.back(), off.back());
  for (Index k = 0; k < num_blocks(); ++k) {
    out.block(off[k], off[k], lower_diag[k].rows(), lower_diag[k].cols()) = lower_diag[k];
    if (k + 1 < num_blocks()) {
      out.block(off[k + 1], off[k], lower_sub[k].rows(), lower_sub[k].cols()) = lower_sub[k];
    }
  }
  return out;
}

Assembly assemble(const Problem& p) {
  const Index n = p.state_dim();
  const Index N = p.num_steps();
  if (N == 0) throw ModelError("problem has no time steps");

  Assembly out;
  BlockBidiagonal& A = out.A;
  A.diag.reserve(N);
  A.sub.reserve(N > 0 ? N - 1 : 0);
  std::vector<Vec> rhs;
  rhs.reserve(N);

  for (Index k = 0; k < N; ++k) {
    const TimeStep& s = p.steps[k];
    const Index r = s.process_dim(), sd = s.residual_dim(), m = s.meas_dim();
    if (s.C.rows() != n || s.H.cols() != n || s.S.rows() != m || s.y.size() != m) {
      throw ModelError("inconsistent block dimensions at step " + std::to_string(k));
    }
    Mat D = Mat::Zero(n + m, r + sd + n);
    D.topLeftCorner(n, r) = s.C;
    D.block(0, r + sd, n, n).setIdentity();
    D.block(n, r, m, sd) = s.S;
    D.block(n, r + sd, m, n) = s.H;
    A.diag.push_back(std::move(D));

    Vec w = Vec::Zero(n + m);
    if (k == 0) w.head(n) = p.x0;
    w.tail(m) = s.y;
    rhs.push_back(std::move(w));
  }
  for (Index k = 0; k + 1 < N; ++k) {
    const TimeStep& next = p.steps[k + 1];
    if (next.G.rows() != n || next.G.cols() != n) {
      throw ModelError("G must be n x n at step " + std::to_string(k + 1));
    }
    Mat B = Mat::Zero(A.diag[k + 1].rows(), A.diag[k].cols());
    B.topRightCorner(n, n) = -next.G;
    A.sub.push_back(std::move(B));
  }

  A.row_offset = offsets_of(A.diag, true);
  A.col_offset = offsets_of(A.diag, false);
  A.rows = A.row_offset.back();
  A.cols = A.col_offset.back();
  A.row_offset.pop_back();
  A.col_offset.pop_back();

  out.w_hat.resize(A.rows);
  for (Index k = 0; k < N; ++k) out.w_hat.segment(A.row_offset[k], rhs[k].size()) = rhs[k];
  return out;
}

BlockTridiagonal gram(const BlockBidiagonal& A) {
  BlockTridiagonal T;
  const Index N = A.num_blocks();
  T.diag.resize(N);
  T.offdiag.resize(N > 0 ? N - 1 : 0);
  for (Index k = 0; k < N; ++k) {
    T.diag[k].noalias() = A.diag[k] * A.diag[k].transpose();
    if (k > 0) T.diag[k].noalias() += A.sub[k - 1] * A.sub[k - 1].transpose();
    if (k + 1 < N) T.offdiag[k].noalias() = A.sub[k] * A.diag[k].transpose();
  }
  return T;
}

BlockCholeskyFactor factor(const BlockTridiagonal& T, double pivot_tol) {
  const Index N = T.num_blocks();
  double max_diag = 0.0;
  for (const auto& d : T.diag) {
    if (d.size()) max_diag = std::max(max_diag, d.diagonal().maxCoeff());
  }
  const double floor = pivot_tol * std::max(max_diag, 0.0);

  BlockCholeskyFactor L;
  L.lower_diag.resize(N);
  L.lower_sub.resize(N > 0 ? N - 1 : 0);
  Mat work;
  for (Index k = 0; k < N; ++k) {
    work = T.diag[k];
    if (k > 0) work.noalias() -= L.lower_sub[k - 1] * L.lower_sub[k - 1].transpose();
    const Index m = work.rows();
    // Unblocked Cholesky so every pivot can be checked against the floor.
    Mat& Lk = L.lower_diag[k];
    Lk = Mat::Zero(m, m);
    for (Index j = 0; j < m; ++j) {
      double d = work(j, j) - Lk.row(j).head(j).squaredNorm();
      if (!(d > floor) || max_diag <= 0.0) {
        throw RankDeficiencyError(
            static_cast<std::size_t>(k),
            "constraint Gram matrix is not positive definite at step " +
                std::to_string(k) + " (the constraint rows are linearly dependent)");
      }
      d = std::sqrt(d);
      Lk(j, j) = d;
      for (Index i = j + 1; i < m; ++i) {
        Lk(i, j) = (work(i, j) - Lk.row(i).head(j).dot(Lk.row(j).head(j))) / d;
      }
    }
    if (k + 1 < N) {
      // M_k = T_{k+1,k} L_k^{-T}
      Mat Mk = T.offdiag[k];
      Lk.transpose().triangularView<Eigen::Upper>().solveInPlace<Eigen::OnTheRight>(Mk);
      L.lower_sub[k] = std::move(Mk);
    }
  }
  return L;
}

void solve_in_place(const BlockCholeskyFactor& L, Vec& b) {
  const Index N = L.num_blocks();
  std::vector<Index> off(N + 1, 0);
  for (Index k = 0; k < N; ++k) off[k + 1] = off[k] + L.lower_diag[k].rows();
  if (b.size() != off[N]) throw DimensionError("right-hand side length mismatch");

  for (Index k = 0; k < N; ++k) {
    auto seg = b.segment(off[k], off[k + 1] - off[k]);
    if (k > 0) seg.noalias() -= L.lower_sub[k - 1] * b.segment(off[k - 1], off[k] - off[k - 1]);
    L.lower_diag[k].triangularView<Eigen::Lower>().solveInPlace(seg);
  }
  for (Index k = N - 1; k >= 0; --k) {
    auto seg = b.segment(off[k], off[k + 1] - off[k]);
    if (k + 1 < N) {
      seg.noalias() -= L.lower_sub[k].transpose() * b.segment(off[k + 1], off[k + 2] - off[k + 1]);
    }
    L.lower_diag[k].transpose().triangularView<Eigen::Upper>().solveInPlace(seg);
  }
}

Vec matvec(const BlockBidiagonal& A, const Vec& v) {
  if (v.size() != A.cols) throw DimensionError("matvec: vector length mismatch");
  Vec out(A.rows);
  for (Index k = 0; k < A.num_blocks(); ++k) {
    auto seg = out.segment(A.row_offset[k], A.block_rows(k));
    seg.noalias() = A.diag[k] * v.segment(A.col_offset[k], A.block_cols(k));
    if (k > 0) {
      seg.noalias() += A.sub[k - 1] * v.segment(A.col_offset[k - 1], A.block_cols(k - 1));
    }
  }
  return out;
}

Vec matvec_transpose(const BlockBidiagonal& A, const Vec& v) {
  if (v.size() != A.rows) throw DimensionError("matvec_transpose: vector length mismatch");
  Vec out(A.cols);
  const Index N = A.num_blocks();
  for (Index k = 0; k < N; ++k) {
    auto seg = out.segment(A.col_offset[k], A.block_cols(k));
    seg.noalias() = A.diag[k].transpose() * v.segment(A.row_offset[k], A.block_rows(k));
    if (k + 1 < N) {
      seg.noalias() += A.sub[k].transpose() * v.segment(A.row_offset[k + 1], A.block_rows(k + 1));
    }
  }
  return out;
}

AffineProjector::AffineProjector(BlockBidiagonal A, Vec w_hat, double pivot_tol)
    : A_(std::move(A)), w_hat_(std::move(w_hat)), L_(singsmooth::factor(gram(A_), pivot_tol)) {
  if (w_hat_.size() != A_.rows) throw DimensionError("w_hat length mismatch");
}

void AffineProjector::project(const Vec& eta, Vec& out, Vec& nu) const {
  if (eta.size() != A_.cols) throw DimensionError("projection: vector length mismatch");
  const Index N = A_.num_blocks();
  nu.resize(A_.rows);
  // nu = A eta - w_hat
  for (Index k = 0; k < N; ++k) {
    auto seg = nu.segment(A_.row_offset[k], A_.block_rows(k));
    seg.noalias() = A_.diag[k] * eta.segment(A_.col_offset[k], A_.block_cols(k));
    if (k > 0) {
      seg.noalias() += A_.sub[k - 1] * eta.segment(A_.col_offset[k - 1], A_.block_cols(k - 1));
    }
    seg -= w_hat_.segment(A_.row_offset[k], A_.block_rows(k));
  }
  solve_in_place(L_, nu);
  // out = eta - A^T nu
  out.resize(A_.cols);
  for (Index k = 0; k < N; ++k) {
    auto seg = out.segment(A_.col_offset[k], A_.block_cols(k));
    seg = eta.segment(A_.col_offset[k], A_.block_cols(k));
    seg.noalias() -= A_.diag[k].transpose() * nu.segment(A_.row_offset[k], A_.block_rows(k));
    if (k + 1 < N) {
      seg.noalias() -= A_.sub[k].transpose() * nu.segment(A_.row_offset[k + 1], A_.block_rows(k + 1));
    }
  }
}

Vec AffineProjector::project(const Vec& eta) const {
  Vec out, nu;
  project(eta, out, nu);
  return out;
}

Vec AffineProjector::null_space_component(const Vec& v) const {
  Vec nu = matvec(A_, v);
  solve_in_place(L_, nu);
  return v - matvec_transpose(A_, nu);
}

double AffineProjector::feasibility_residual(const Vec& z) const {
  if (A_.rows == 0) return 0.0;
  return (matvec(A_, z) - w_hat_).lpNorm<Eigen::Infinity>();
}

Vec solve_affine_projection(const BlockBidiagonal& A, const BlockCholeskyFactor& L,
                            const Vec& w_hat, const Vec& eta) {
  if (eta.size() != A.cols || w_hat.size() != A.rows) {
    throw DimensionError("solve_affine_projection: length mismatch");
  }
  Vec nu = matvec(A, eta) - w_hat;
  solve_in_place(L, nu);
  return eta - matvec_transpose(A, nu);
}

void write_matrix_market(std::ostream& os, const Mat& m) {
  Index nnz = 0;
  for (Index j = 0; j < m.cols(); ++j)
    for (Index i = 0; i < m.rows(); ++i)
      if (m(i, j) != 0.0) ++nnz;
  os << "%%MatrixMarket matrix coordinate real general\n";
  os << m.rows() << ' ' << m.cols() << ' ' << nnz << '\n';
  os << std::setprecision(17);
  for (Index j = 0; j < m.cols(); ++j)
    for (Index i = 0; i < m.rows(); ++i)
      if (m(i, j) != 0.0) os << i + 1 << ' ' << j + 1 << ' ' << m(i, j) << '\n';
}

void write_matrix_market(std::ostream& os, const BlockBidiagonal& A) {
  auto each = [&](auto&& f) {
    for (Index k = 0; k < A.num_blocks(); ++k) {
      const Mat& D = A.diag[k];
      for (Index j = 0; j < D.cols(); ++j)
        for (Index i = 0; i < D.rows(); ++i)
          if (D(i, j) != 0.0) f(A.row_offset[k] + i, A.col_offset[k] + j, D(i, j));
      if (k + 1 < A.num_blocks()) {
        const Mat& B = A.sub[k];
        for (Index j = 0; j < B.cols(); ++j)
          for (Index i = 0; i < B.rows(); ++i)
            if (B(i, j) != 0.0) f(A.row_offset[k + 1] + i, A.col_offset[k] + j, B(i, j));
      }
    }
  };
  Index nnz = 0;
  each([&](Index, Index, double) { ++nnz; });
  os << "%%MatrixMarket matrix coordinate real general\n";
  os << A.rows << ' ' << A.cols << ' ' << nnz << '\n';
  os << std::setprecision(17);
  each([&](Index i, Index j, double v) { os << i + 1 << ' ' << j + 1 << ' ' << v << '\n'; });
}

}  // namespace singsmooth
