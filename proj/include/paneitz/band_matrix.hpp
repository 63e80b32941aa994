#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "paneitz/extended.hpp"

namespace paneitz {

/// Square banded matrix with kl sub- and ku super-diagonals, stored row by row.
template <class T>
class BandMatrix {
public:
    BandMatrix() = default;
    BandMatrix(int n, int kl, int ku)
        : n_(n), kl_(kl), ku_(ku), data_(static_cast<std::size_t>(n) * (kl + ku + 1), T(0)) {
        if (n < 1 || kl < 0 || ku < 0) throw std::invalid_argument("BandMatrix: bad shape");
    }

    int size() const { return n_; }
    int lower() const { return kl_; }
    int upper() const { return ku_; }

    bool in_band(int i, int j) const { return j - i <= ku_ && i - j <= kl_ && i >= 0 && j >= 0 && i < n_ && j < n_; }

    T& operator()(int i, int j) { return data_[index(i, j)]; }
    T operator()(int i, int j) const { return in_band(i, j) ? data_[index(i, j)] : T(0); }

    void multiply(std::span<const T> x, std::span<T> y) const {
        for (int i = 0; i < n_; ++i) {
            T acc(0);
            const int j0 = std::max(0, i - kl_), j1 = std::min(n_ - 1, i + ku_);
            for (int j = j0; j <= j1; ++j) acc += data_[index(i, j)] * x[j];
            y[i] = acc;
        }
    }

    std::vector<T> operator*(std::span<const T> x) const {
        std::vector<T> y(n_);
        multiply(x, y);
        return y;
    }

    double max_abs() const {
        double m = 0;
        for (const T& v : data_) m = std::max(m, static_cast<double>(abs_value(v)));
        return m;
    }

    template <class U>
    BandMatrix<U> cast() const {
        BandMatrix<U> out(n_, kl_, ku_);
        for (int i = 0; i < n_; ++i)
            for (int j = std::max(0, i - kl_); j <= std::min(n_ - 1, i + ku_); ++j) out(i, j) = U((*this)(i, j));
        return out;
    }

private:
    std::size_t index(int i, int j) const {
        return static_cast<std::size_t>(i) * (kl_ + ku_ + 1) + static_cast<std::size_t>(j - i + kl_);
    }

    int n_ = 0, kl_ = 0, ku_ = 0;
    std::vector<T> data_;
};

template <class T>
BandMatrix<T> band_product(const BandMatrix<T>& a, const BandMatrix<T>& b) {
    if (a.size() != b.size()) throw std::invalid_argument("band_product: size mismatch");
    const int n = a.size();
    BandMatrix<T> c(n, a.lower() + b.lower(), a.upper() + b.upper());
    for (int i = 0; i < n; ++i) {
        for (int k = std::max(0, i - a.lower()); k <= std::min(n - 1, i + a.upper()); ++k) {
            const T aik = a(i, k);
            for (int j = std::max(0, k - b.lower()); j <= std::min(n - 1, k + b.upper()); ++j) c(i, j) += aik * b(k, j);
        }
    }
    return c;
}

class SingularMatrix : public std::runtime_error {
public:
    explicit SingularMatrix(int column)
        : std::runtime_error("singular banded matrix at column " + std::to_string(column)), column_(column) {}
    int column() const { return column_; }

private:
    int column_;
};

/// LU factorization with partial pivoting; the factors are immutable after
/// construction, so concurrent solve() calls are safe.
template <class T>
class BandLU {
public:
    // A pivot with |p| <= pivot_tol * max|A| is treated as singular.
    explicit BandLU(const BandMatrix<T>& a, double pivot_tol = 0.0)
        : lu_(a.size(), a.lower(), a.upper() + a.lower()), pivots_(a.size()) {
        const int n = a.size(), kl = a.lower(), ku = a.upper() + a.lower();
        for (int i = 0; i < n; ++i)
            for (int j = std::max(0, i - kl); j <= std::min(n - 1, i + a.upper()); ++j) lu_(i, j) = a(i, j);
        const double threshold = pivot_tol * a.max_abs();
        for (int k = 0; k < n; ++k) {
            const int last = std::min(n - 1, k + kl);
            int p = k;
            for (int i = k + 1; i <= last; ++i)
                if (abs_value(lu_(i, k)) > abs_value(lu_(p, k))) p = i;
            pivots_[k] = p;
            if (!(static_cast<double>(abs_value(lu_(p, k))) > threshold) || lu_(p, k) == T(0)) throw SingularMatrix(k);
            const int jmax = std::min(n - 1, k + ku);
            if (p != k)
                for (int j = k; j <= jmax; ++j) std::swap(lu_(k, j), lu_(p, j));
            const T pivot = lu_(k, k);
            for (int i = k + 1; i <= last; ++i) {
                const T l = lu_(i, k) / pivot;
                lu_(i, k) = l;
                if (l == T(0)) continue;
                for (int j = k + 1; j <= jmax; ++j) lu_(i, j) -= l * lu_(k, j);
            }
        }
    }

    int size() const { return lu_.size(); }

    void solve_in_place(std::span<T> b) const {
        const int n = lu_.size(), kl = lu_.lower(), ku = lu_.upper();
        for (int k = 0; k < n; ++k) {
            if (pivots_[k] != k) std::swap(b[k], b[pivots_[k]]);
            for (int i = k + 1; i <= std::min(n - 1, k + kl); ++i) b[i] -= lu_(i, k) * b[k];
        }
        for (int k = n - 1; k >= 0; --k) {
            T acc = b[k];
            for (int j = k + 1; j <= std::min(n - 1, k + ku); ++j) acc -= lu_(k, j) * b[j];
            b[k] = acc / lu_(k, k);
        }
    }

    std::vector<T> solve(std::span<const T> b) const {
        std::vector<T> x(b.begin(), b.end());
        solve_in_place(x);
        return x;
    }

private:
    BandMatrix<T> lu_;
    std::vector<int> pivots_;
};

}  // namespace paneitz
