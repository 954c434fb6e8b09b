#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ctsm/tensor/tape.hpp"

namespace ctsm {

enum class Activation { none, relu, tanh, sigmoid, softmax };

// Elementwise arithmetic with right-aligned broadcasting: each extent of the
// shorter/operand shape must equal the result extent or be 1.
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);

Var neg(const Var& a);
Var scale(const Var& a, double factor);

// (m,k) x (k,n) -> (m,n).
Var matmul(const Var& a, const Var& b);

// Batched matrix-vector product: (B,m,n) x (B,n) -> (B,m).
Var batched_matvec(const Var& mats, const Var& vecs);

Var relu(const Var& x);
Var tanh(const Var& x);
Var sigmoid(const Var& x);
// Along the last axis.
Var softmax(const Var& x);
Var activate(const Var& x, Activation kind);

Var sum(const Var& x);
Var mean(const Var& x);

// Concatenation along the last axis; leading extents must agree.
Var concat(std::span<const Var> parts);
Var concat(std::initializer_list<Var> parts);

// Columns [begin, end) of the last axis.
Var slice_last(const Var& x, std::size_t begin, std::size_t end);

Var reshape(const Var& x, Shape shape);

// Stacks equally shaped (B, k) tensors into (B, n, k).
Var stack_steps(std::span<const Var> steps);

// base + sum_i coeffs[i] * terms[i], all operands of identical shape. One
// tape node regardless of the number of terms; used by the ODE solvers.
Var linear_combination(const Var& base, std::span<const Var> terms, std::span<const double> coeffs);
Var linear_combination(std::span<const Var> terms, std::span<const double> coeffs);

inline Var operator+(const Var& a, const Var& b) { return add(a, b); }
inline Var operator-(const Var& a, const Var& b) { return sub(a, b); }
inline Var operator*(const Var& a, const Var& b) { return mul(a, b); }
inline Var operator-(const Var& a) { return neg(a); }
inline Var operator*(double s, const Var& a) { return scale(a, s); }

// Value-level helpers (no tape).
Shape broadcast_shape(const Shape& a, const Shape& b);

}  // namespace ctsm
