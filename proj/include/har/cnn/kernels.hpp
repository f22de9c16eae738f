#pragma once

#include <cstddef>

namespace har::cnn::kernels {

// 1D convolution with same padding (K odd). Layouts:
//   in   (B, Cin, L)   out (B, Cout, L)
//   w    (Cout, Cin, K)   b (Cout)
// The OpenMP variants parallelize over independent output elements with
// the same per-element accumulation order as the serial reference, so the
// two produce bitwise-identical results.

void conv1d_forward_serial(double* out, const double* in, const double* w, const double* b,
                           std::size_t B, std::size_t Cin, std::size_t Cout, std::size_t L,
                           std::size_t K);
void conv1d_forward(double* out, const double* in, const double* w, const double* b,
                    std::size_t B, std::size_t Cin, std::size_t Cout, std::size_t L,
                    std::size_t K);

// grad_in (B, Cin, L) from grad_out (B, Cout, L).
void conv1d_backward_input_serial(double* grad_in, const double* grad_out, const double* w,
                                  std::size_t B, std::size_t Cin, std::size_t Cout,
                                  std::size_t L, std::size_t K);
void conv1d_backward_input(double* grad_in, const double* grad_out, const double* w,
                           std::size_t B, std::size_t Cin, std::size_t Cout, std::size_t L,
                           std::size_t K);

// grad_w (Cout, Cin, K), grad_b (Cout); accumulation over the batch runs
// in fixed index order.
void conv1d_backward_params_serial(double* grad_w, double* grad_b, const double* in,
                                   const double* grad_out, std::size_t B, std::size_t Cin,
                                   std::size_t Cout, std::size_t L, std::size_t K);
void conv1d_backward_params(double* grad_w, double* grad_b, const double* in,
                            const double* grad_out, std::size_t B, std::size_t Cin,
                            std::size_t Cout, std::size_t L, std::size_t K);

// Dense layer: in (B, N), w (M, N), b (M), out (B, M).
void dense_forward_serial(double* out, const double* in, const double* w, const double* b,
                          std::size_t B, std::size_t N, std::size_t M);
void dense_forward(double* out, const double* in, const double* w, const double* b,
                   std::size_t B, std::size_t N, std::size_t M);

}  // namespace har::cnn::kernels
