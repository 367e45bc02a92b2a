#pragma once

#include "flowsynth/core/autograd.hpp"

namespace flowsynth::ag {

// elementwise
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var neg(const Var& a);
Var mul(const Var& a, const Var& b);
Var div(const Var& a, const Var& b);
Var smul(const Var& a, double s);
Var sadd(const Var& a, double s);
Var square(const Var& a);
Var sqrt_(const Var& a);
Var exp_(const Var& a);
Var log_(const Var& a);
Var tanh_(const Var& a);
Var sigmoid(const Var& a);
Var relu(const Var& a);
Var leaky_relu(const Var& a, double slope);
Var clamp(const Var& a, double lo, double hi);
Var xlogx(const Var& a);  // x ln x with the continuous extension 0 at x <= 0

// broadcasting over a B x n matrix
Var add_rowvec(const Var& a, const Var& row);   // row: 1 x n
Var rep_rows(const Var& row, Eigen::Index n);   // 1 x m -> n x m
Var rep_cols(const Var& col, Eigen::Index m);   // n x 1 -> n x m
Var bcast(const Var& s, Eigen::Index n, Eigen::Index m);  // 1 x 1 -> n x m

// reductions
Var row_sum(const Var& a);  // n x m -> n x 1
Var col_sum(const Var& a);  // n x m -> 1 x m
Var sum(const Var& a);      // n x m -> 1 x 1
Var mean(const Var& a);     // 1 x 1

// linear algebra / structure
Var matmul(const Var& a, const Var& b);
Var transpose(const Var& a);
// block matmul: both operands are split into n_blocks equal row blocks and
// multiplied blockwise, with optional per-block transposes
Var bmm(const Var& a, const Var& b, Eigen::Index n_blocks, bool ta, bool tb);
Var reshape(const Var& a, Eigen::Index r, Eigen::Index c);  // row-major reinterpret
Var slice_cols(const Var& a, Eigen::Index j0, Eigen::Index w);
Var concat_cols(const std::vector<Var>& parts);
Var softmax_rows(const Var& a);
Var log_softmax_rows(const Var& a);

// straight-through: forward is one_hot(argmax) per row (ties -> lowest
// index), backward passes the gradient to the soft input unchanged
Var straight_through_onehot(const Var& y_soft);

Var detach(const Var& a);

// 1-D convolution plumbing; rows are samples laid out position-major with
// interleaved channels (index = pos * ch + c)
Var im2col1d(const Var& x, Eigen::Index len, Eigen::Index ch, Eigen::Index ksize);  // same padding
Var maxpool1d(const Var& x, Eigen::Index len, Eigen::Index ch, Eigen::Index pool); // stride = pool

}  // namespace flowsynth::ag
