#pragma once

#include "trajflow/array.hpp"

namespace trajflow {

// Forward kernels. Every kernel validates shapes and throws ShapeError naming
// itself. Backward kernels accumulate (+=) into the gradient buffers so one
// value feeding several consumers sums its adjoints naturally.

Array k_add(const Array& a, const Array& b);
Array k_sub(const Array& a, const Array& b);
Array k_mul(const Array& a, const Array& b);
Array k_scale(const Array& a, double c);

// y = W x + b with x:[in], W:[out x in], b:[out].
Array k_dense(const Array& x, const Array& w, const Array& b);
void kb_dense(const Array& g, const Array& x, const Array& w, Array& dx, Array& dw, Array& db);

// Same-padded 1-D convolution over the trailing axis.
// x:[Cin x L], w:[Cout x Cin x k] (k odd), b:[Cout], output [Cout x L/stride].
Array k_conv1d(const Array& x, const Array& w, const Array& b, int stride);
void kb_conv1d(const Array& g, const Array& x, const Array& w, Array& dx, Array& dw, Array& db,
               int stride);

// Group normalization over [C x L]; statistics per group of C/groups channels.
Array k_group_norm(const Array& x, const Array& gamma, const Array& beta, int groups, double eps);
void kb_group_norm(const Array& g, const Array& x, const Array& gamma, Array& dx, Array& dgamma,
                   Array& dbeta, int groups, double eps);

// Mish activation, x * tanh(softplus(x)).
Array k_mish(const Array& x);
void kb_mish(const Array& g, const Array& x, Array& dx);

// Feature-wise affine modulation: out[c,l] = x[c,l] * (1 + scale[c]) + shift[c].
Array k_film(const Array& x, const Array& scale, const Array& shift);
void kb_film(const Array& g, const Array& x, const Array& scale, Array& dx, Array& dscale,
             Array& dshift);

Array k_concat_channels(const Array& a, const Array& b);
void kb_concat_channels(const Array& g, Array& da, Array& db);

Array k_slice_vec(const Array& x, std::size_t offset, std::size_t len);
void kb_slice_vec(const Array& g, Array& dx, std::size_t offset);

// Nearest-neighbour upsampling by 2 along the trailing axis of [C x L].
Array k_upsample_nearest2(const Array& x);
void kb_upsample_nearest2(const Array& g, Array& dx);

Array k_transpose2d(const Array& x);
void kb_transpose2d(const Array& g, Array& dx);

Array k_mean_square(const Array& x);
void kb_mean_square(const Array& g, const Array& x, Array& dx);

Array k_mean(const Array& x);
void kb_mean(const Array& g, const Array& x, Array& dx);

Array k_sum(const Array& x);
void kb_sum(const Array& g, const Array& x, Array& dx);

double mish_scalar(double x);

}  // namespace trajflow
