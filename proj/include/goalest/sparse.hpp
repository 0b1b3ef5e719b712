#pragma once

#include <goalest/error.hpp>
#include <goalest/space.hpp>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

namespace goalest {

/// Square compressed-row matrix. The pattern is the dof-coupling graph of a
/// FunctionSpace, so it is structurally symmetric even when values are not.
class SparseMatrix
{
public:
    SparseMatrix() = default;

    explicit SparseMatrix(const FunctionSpace& space) : n_(space.dof_count())
    {
        std::vector<std::vector<int>> rows(n_);
        for (std::size_t t = 0; t < space.mesh().num_triangles(); ++t) {
            const auto dofs = space.cell_dofs(t);
            for (int i : dofs)
                for (int j : dofs) rows[i].push_back(j);
        }
        row_offsets_.assign(n_ + 1, 0);
        for (std::size_t i = 0; i < n_; ++i) {
            auto& r = rows[i];
            std::sort(r.begin(), r.end());
            r.erase(std::unique(r.begin(), r.end()), r.end());
            row_offsets_[i + 1] = row_offsets_[i] + static_cast<int>(r.size());
        }
        columns_.reserve(row_offsets_.back());
        for (const auto& r : rows) columns_.insert(columns_.end(), r.begin(), r.end());
        values_.assign(columns_.size(), 0.0);
    }

    [[nodiscard]] std::size_t rows() const { return n_; }
    [[nodiscard]] std::size_t nonzeros() const { return values_.size(); }
    [[nodiscard]] std::span<const int> row_offsets() const { return row_offsets_; }
    [[nodiscard]] std::span<const int> columns() const { return columns_; }
    [[nodiscard]] std::span<const double> values() const { return values_; }

    /// Position of (i, j) in the value array, or -1 when outside the pattern.
    [[nodiscard]] int find(int i, int j) const
    {
        const auto begin = columns_.begin() + row_offsets_[i];
        const auto end = columns_.begin() + row_offsets_[i + 1];
        const auto it = std::lower_bound(begin, end, j);
        return (it != end && *it == j) ? static_cast<int>(it - columns_.begin()) : -1;
    }

    void add(int i, int j, double v)
    {
        const int k = find(i, j);
        if (k < 0) throw Error("SparseMatrix::add: entry outside sparsity pattern");
        values_[k] += v;
    }

    [[nodiscard]] double operator()(int i, int j) const
    {
        const int k = find(i, j);
        return k < 0 ? 0.0 : values_[k];
    }

    void set_zero() { std::fill(values_.begin(), values_.end(), 0.0); }

    /// Replace constrained rows and columns by the identity.
    void eliminate(const FunctionSpace& space)
    {
        for (std::size_t i = 0; i < n_; ++i)
            for (int k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) {
                const auto j = static_cast<std::size_t>(columns_[k]);
                if (space.is_dirichlet(i) || space.is_dirichlet(j)) values_[k] = (i == j) ? 1.0 : 0.0;
            }
    }

    [[nodiscard]] CoefficientVector multiply(const CoefficientVector& x) const
    {
        CoefficientVector y = CoefficientVector::Zero(static_cast<Eigen::Index>(n_));
        for (std::size_t i = 0; i < n_; ++i) {
            double s = 0.0;
            for (int k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) s += values_[k] * x[columns_[k]];
            y[static_cast<Eigen::Index>(i)] = s;
        }
        return y;
    }

    [[nodiscard]] CoefficientVector multiply_transpose(const CoefficientVector& x) const
    {
        CoefficientVector y = CoefficientVector::Zero(static_cast<Eigen::Index>(n_));
        for (std::size_t i = 0; i < n_; ++i)
            for (int k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k)
                y[columns_[k]] += values_[k] * x[static_cast<Eigen::Index>(i)];
        return y;
    }

    [[nodiscard]] SparseMatrix transpose() const
    {
        // pattern is symmetric, so only the values move
        SparseMatrix t = *this;
        for (std::size_t i = 0; i < n_; ++i)
            for (int k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k)
                t.values_[t.find(columns_[k], static_cast<int>(i))] = values_[k];
        return t;
    }

    [[nodiscard]] double frobenius_norm() const
    {
        double s = 0.0;
        for (double v : values_) s += v * v;
        return std::sqrt(s);
    }

    [[nodiscard]] Eigen::SparseMatrix<double, Eigen::RowMajor> to_eigen() const
    {
        const auto n = static_cast<Eigen::Index>(n_);
        Eigen::SparseMatrix<double, Eigen::RowMajor> m(n, n);
        std::vector<Eigen::Triplet<double>> trips;
        trips.reserve(values_.size());
        for (std::size_t i = 0; i < n_; ++i)
            for (int k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k)
                trips.emplace_back(static_cast<int>(i), columns_[k], values_[k]);
        m.setFromTriplets(trips.begin(), trips.end());
        return m;
    }

    /// Build from a dense matrix, keeping every entry (used for small tests).
    static SparseMatrix from_dense(const Eigen::MatrixXd& a)
    {
        SparseMatrix m;
        m.n_ = static_cast<std::size_t>(a.rows());
        m.row_offsets_.assign(m.n_ + 1, 0);
        for (std::size_t i = 0; i < m.n_; ++i) {
            for (std::size_t j = 0; j < m.n_; ++j) {
                m.columns_.push_back(static_cast<int>(j));
                m.values_.push_back(a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
            }
            m.row_offsets_[i + 1] = static_cast<int>(m.columns_.size());
        }
        return m;
    }

private:
    std::size_t n_ = 0;
    std::vector<int> row_offsets_;
    std::vector<int> columns_;
    std::vector<double> values_;
};

} // namespace goalest
