#pragma once

#include <string>
#include <vector>

#include "wordbound/errors.hpp"

namespace wordbound::nn {

// Dense row-major matrix. Vectors are 1×n matrices so the parameter registry
// stays uniform.
template <typename T>
struct Matrix {
    int rows = 0;
    int cols = 0;
    std::vector<T> data;

    Matrix() = default;
    Matrix(int r, int c, T fill = T(0))
        : rows(r), cols(c), data(static_cast<size_t>(r) * static_cast<size_t>(c), fill) {}

    T* row(int r) { return data.data() + static_cast<size_t>(r) * cols; }
    const T* row(int r) const { return data.data() + static_cast<size_t>(r) * cols; }
    T& at(int r, int c) { return data[static_cast<size_t>(r) * cols + c]; }
    const T& at(int r, int c) const { return data[static_cast<size_t>(r) * cols + c]; }
    size_t size() const { return data.size(); }
    bool empty() const { return data.empty(); }
    void zero() { std::fill(data.begin(), data.end(), T(0)); }
};

template <typename T>
void check_shape(const Matrix<T>& m, int rows, int cols, const char* name) {
    if (m.rows != rows || m.cols != cols) {
        throw ShapeMismatch(std::string(name) + ": expected " + std::to_string(rows) + "x" +
                            std::to_string(cols) + ", got " + std::to_string(m.rows) + "x" +
                            std::to_string(m.cols));
    }
}

// C (+)= A · B, A is m×k, B is k×n
template <typename T>
void gemm_nn(const Matrix<T>& a, const Matrix<T>& b, Matrix<T>& c, bool accumulate = false) {
    if (a.cols != b.rows || c.rows != a.rows || c.cols != b.cols) {
        throw ShapeMismatch("gemm_nn shape mismatch");
    }
    if (!accumulate) {
        c.zero();
    }
    for (int i = 0; i < a.rows; ++i) {
        const T* arow = a.row(i);
        T* crow = c.row(i);
        for (int k = 0; k < a.cols; ++k) {
            T av = arow[k];
            if (av == T(0)) {
                continue;
            }
            const T* brow = b.row(k);
            for (int j = 0; j < b.cols; ++j) {
                crow[j] += av * brow[j];
            }
        }
    }
}

// C (+)= A · Bᵀ, A is m×k, B is n×k
template <typename T>
void gemm_nt(const Matrix<T>& a, const Matrix<T>& b, Matrix<T>& c, bool accumulate = false) {
    if (a.cols != b.cols || c.rows != a.rows || c.cols != b.rows) {
        throw ShapeMismatch("gemm_nt shape mismatch");
    }
    for (int i = 0; i < a.rows; ++i) {
        const T* arow = a.row(i);
        T* crow = c.row(i);
        for (int j = 0; j < b.rows; ++j) {
            const T* brow = b.row(j);
            T acc = accumulate ? crow[j] : T(0);
            for (int k = 0; k < a.cols; ++k) {
                acc += arow[k] * brow[k];
            }
            crow[j] = acc;
        }
    }
}

// C (+)= Aᵀ · B, A is k×m, B is k×n
template <typename T>
void gemm_tn(const Matrix<T>& a, const Matrix<T>& b, Matrix<T>& c, bool accumulate = false) {
    if (a.rows != b.rows || c.rows != a.cols || c.cols != b.cols) {
        throw ShapeMismatch("gemm_tn shape mismatch");
    }
    if (!accumulate) {
        c.zero();
    }
    for (int k = 0; k < a.rows; ++k) {
        const T* arow = a.row(k);
        const T* brow = b.row(k);
        for (int i = 0; i < a.cols; ++i) {
            T av = arow[i];
            if (av == T(0)) {
                continue;
            }
            T* crow = c.row(i);
            for (int j = 0; j < b.cols; ++j) {
                crow[j] += av * brow[j];
            }
        }
    }
}

// dst (1×n) (+)= column sums of src
template <typename T>
void add_colsum(const Matrix<T>& src, Matrix<T>& dst) {
    if (dst.rows != 1 || dst.cols != src.cols) {
        throw ShapeMismatch("add_colsum shape mismatch");
    }
    T* d = dst.row(0);
    for (int i = 0; i < src.rows; ++i) {
        const T* s = src.row(i);
        for (int j = 0; j < src.cols; ++j) {
            d[j] += s[j];
        }
    }
}

// out = in · W + b (b is 1×n, broadcast over rows)
template <typename T>
void linear(const Matrix<T>& in, const Matrix<T>& w, const Matrix<T>& b, Matrix<T>& out) {
    gemm_nn(in, w, out, false);
    for (int i = 0; i < out.rows; ++i) {
        T* orow = out.row(i);
        const T* brow = b.row(0);
        for (int j = 0; j < out.cols; ++j) {
            orow[j] += brow[j];
        }
    }
}

}  // namespace wordbound::nn
