#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace hvi {

using Index = Eigen::Index;

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using RowMajorSparse = Eigen::SparseMatrix<Scalar, Eigen::RowMajor, std::int64_t>;

/// Read-only view of one row of a SparseRows matrix. A row is either a sorted
/// list of (column, value) pairs or a dense run of all n values.
template <typename Scalar>
class RowView {
 public:
  RowView(const std::int32_t* cols, const Scalar* vals, Index count, bool dense)
      : cols_(cols), vals_(vals), count_(count), dense_(dense) {}

  bool dense() const { return dense_; }
  /// Stored entries; for a dense row this is n.
  Index stored() const { return count_; }

  template <typename F>
  void for_each(F&& f) const {
    if (dense_) {
      for (Index j = 0; j < count_; ++j)
        if (vals_[j] != Scalar(0)) f(j, vals_[j]);
    } else {
      for (Index k = 0; k < count_; ++k) f(Index(cols_[k]), vals_[k]);
    }
  }

  template <typename Vec>
  Scalar dot(const Vec& v) const {
    Scalar s(0);
    for_each([&](Index j, Scalar p) { s += p * v[j]; });
    return s;
  }

  Scalar sum() const {
    Scalar s(0);
    for_each([&](Index, Scalar p) { s += p; });
    return s;
  }

  Scalar coeff(Index j) const {
    if (dense_) return vals_[j];
    const std::int32_t* end = cols_ + count_;
    const std::int32_t* it = std::lower_bound(cols_, end, std::int32_t(j));
    return (it != end && *it == j) ? vals_[it - cols_] : Scalar(0);
  }

  /// True when the row is exactly the unit vector e_i.
  bool is_unit(Index i) const {
    Index nz = 0;
    bool ok = true;
    for_each([&](Index j, Scalar p) {
      ++nz;
      if (j != i || p != Scalar(1)) ok = false;
    });
    return ok && nz == 1;
  }

 private:
  const std::int32_t* cols_;
  const Scalar* vals_;
  Index count_;
  bool dense_;
};

/// Square n x n matrix stored by rows. Rows with more than n/2 nonzeros are
/// kept dense (no column indices), all others as sorted index/value pairs.
/// Immutable once built; use SparseRowsBuilder to construct.
template <typename Scalar>
class SparseRows {
 public:
  SparseRows() : col_off_{0}, val_off_{0} {}

  Index size() const { return n_; }
  Index rows() const { return Index(col_off_.size()) - 1; }

  RowView<Scalar> row(Index i) const {
    const auto c0 = col_off_[i], c1 = col_off_[i + 1];
    const auto v0 = val_off_[i], v1 = val_off_[i + 1];
    const bool dense = (c1 - c0) != (v1 - v0);
    return RowView<Scalar>(cols_.data() + c0, vals_.data() + v0, Index(v1 - v0), dense);
  }

  Index nonzeros() const {
    Index nz = 0;
    for (Index i = 0; i < rows(); ++i) row(i).for_each([&](Index, Scalar) { ++nz; });
    return nz;
  }

  Index dense_rows() const {
    Index d = 0;
    for (Index i = 0; i < rows(); ++i) d += row(i).dense() ? 1 : 0;
    return d;
  }

  static SparseRows identity(Index n);
  static SparseRows from_eigen(const RowMajorSparse<Scalar>& m);
  RowMajorSparse<Scalar> to_eigen() const;

 private:
  template <typename>
  friend class SparseRowsBuilder;

  Index n_ = 0;
  std::vector<std::int64_t> col_off_;
  std::vector<std::int64_t> val_off_;
  std::vector<std::int32_t> cols_;
  std::vector<Scalar> vals_;
};

/// Appends rows in order. Rows may be given as sorted pairs, as a dense
/// vector, or flushed from a RowAccumulator.
template <typename Scalar>
class SparseRowsBuilder {
 public:
  explicit SparseRowsBuilder(Index n) { m_.n_ = n; }

  void reserve(Index rows, Index nnz) {
    m_.col_off_.reserve(rows + 1);
    m_.val_off_.reserve(rows + 1);
    m_.cols_.reserve(nnz);
    m_.vals_.reserve(nnz);
  }

  /// Columns must be strictly increasing.
  void push_sparse(const std::int32_t* cols, const Scalar* vals, Index count) {
    if (2 * count > m_.n_) {
      const auto base = m_.vals_.size();
      m_.vals_.resize(base + m_.n_, Scalar(0));
      for (Index k = 0; k < count; ++k) m_.vals_[base + cols[k]] = vals[k];
    } else {
      m_.cols_.insert(m_.cols_.end(), cols, cols + count);
      m_.vals_.insert(m_.vals_.end(), vals, vals + count);
    }
    close_row();
  }

  void push_unit(Index j, Scalar value = Scalar(1)) {
    const std::int32_t c = std::int32_t(j);
    push_sparse(&c, &value, 1);
  }

  void push_empty() { push_sparse(nullptr, nullptr, 0); }

  void push_row(const RowView<Scalar>& r) {
    scratch_cols_.clear();
    scratch_vals_.clear();
    r.for_each([&](Index j, Scalar p) {
      scratch_cols_.push_back(std::int32_t(j));
      scratch_vals_.push_back(p);
    });
    push_sparse(scratch_cols_.data(), scratch_vals_.data(), Index(scratch_cols_.size()));
  }

  /// Splices every row of `block` (built with the same n) onto this builder.
  void append(const SparseRows<Scalar>& block) {
    const auto cbase = std::int64_t(m_.cols_.size());
    const auto vbase = std::int64_t(m_.vals_.size());
    m_.cols_.insert(m_.cols_.end(), block.cols_.begin(), block.cols_.end());
    m_.vals_.insert(m_.vals_.end(), block.vals_.begin(), block.vals_.end());
    for (std::size_t i = 1; i < block.col_off_.size(); ++i) {
      m_.col_off_.push_back(cbase + block.col_off_[i]);
      m_.val_off_.push_back(vbase + block.val_off_[i]);
    }
  }

  Index rows() const { return Index(m_.col_off_.size()) - 1; }

  SparseRows<Scalar> finish() && { return std::move(m_); }

 private:
  void close_row() {
    m_.col_off_.push_back(std::int64_t(m_.cols_.size()));
    m_.val_off_.push_back(std::int64_t(m_.vals_.size()));
  }

  SparseRows<Scalar> m_;
  std::vector<std::int32_t> scratch_cols_;
  std::vector<Scalar> scratch_vals_;
};

/// Sparse accumulator for building one row as a linear combination of rows.
/// The order in which add() is called fixes the floating point reduction
/// order, so results are reproducible.
template <typename Scalar>
class RowAccumulator {
 public:
  explicit RowAccumulator(Index n) : acc_(std::size_t(n), Scalar(0)), mark_(std::size_t(n), 0) {}

  void add(Index j, Scalar v) {
    if (!mark_[j]) {
      mark_[j] = 1;
      touched_.push_back(std::int32_t(j));
    }
    acc_[j] += v;
  }

  template <typename Row>
  void add_row(const Row& r, Scalar scale) {
    r.for_each([&](Index j, Scalar p) { add(j, scale * p); });
  }

  /// Emits the accumulated row into `out` and resets the accumulator.
  void flush(SparseRowsBuilder<Scalar>& out) {
    std::sort(touched_.begin(), touched_.end());
    cols_.clear();
    vals_.clear();
    for (auto j : touched_) {
      if (acc_[j] != Scalar(0)) {
        cols_.push_back(j);
        vals_.push_back(acc_[j]);
      }
      acc_[j] = Scalar(0);
      mark_[j] = 0;
    }
    touched_.clear();
    out.push_sparse(cols_.data(), vals_.data(), Index(cols_.size()));
  }

 private:
  std::vector<Scalar> acc_;
  std::vector<char> mark_;
  std::vector<std::int32_t> touched_;
  std::vector<std::int32_t> cols_;
  std::vector<Scalar> vals_;
};

template <typename Scalar>
SparseRows<Scalar> SparseRows<Scalar>::identity(Index n) {
  SparseRowsBuilder<Scalar> b(n);
  b.reserve(n, n);
  for (Index i = 0; i < n; ++i) b.push_unit(i);
  return std::move(b).finish();
}

template <typename Scalar>
SparseRows<Scalar> SparseRows<Scalar>::from_eigen(const RowMajorSparse<Scalar>& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("SparseRows: matrix must be square");
  RowMajorSparse<Scalar> c = m;
  c.makeCompressed();
  SparseRowsBuilder<Scalar> b(c.rows());
  RowAccumulator<Scalar> acc(c.rows());
  for (Index i = 0; i < c.outerSize(); ++i) {
    for (typename RowMajorSparse<Scalar>::InnerIterator it(c, i); it; ++it) acc.add(it.col(), it.value());
    acc.flush(b);
  }
  return std::move(b).finish();
}

template <typename Scalar>
RowMajorSparse<Scalar> SparseRows<Scalar>::to_eigen() const {
  std::vector<Eigen::Triplet<Scalar, std::int64_t>> t;
  for (Index i = 0; i < rows(); ++i)
    row(i).for_each([&](Index j, Scalar p) { t.emplace_back(i, j, p); });
  RowMajorSparse<Scalar> m(rows(), n_);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

}  // namespace hvi
