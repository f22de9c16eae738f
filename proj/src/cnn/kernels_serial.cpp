#include "har/cnn/kernels.hpp"

// Reference kernels. Plain loops, no threading; the OpenMP variants in
// kernels_omp.cpp must match these bitwise.

namespace har::cnn::kernels {

void conv1d_forward_serial(double* out, const double* in, const double* w, const double* b,
                           std::size_t B, std::size_t Cin, std::size_t Cout, std::size_t L,
                           std::size_t K) {
    const std::ptrdiff_t pad = std::ptrdiff_t(K / 2);
    for (std::size_t n = 0; n < B; ++n)
        for (std::size_t co = 0; co < Cout; ++co)
            for (std::size_t l = 0; l < L; ++l) {
                double acc = b[co];
                for (std::size_t ci = 0; ci < Cin; ++ci) {
                    const double* row = in + (n * Cin + ci) * L;
                    const double* wk = w + (co * Cin + ci) * K;
                    for (std::size_t k = 0; k < K; ++k) {
                        std::ptrdiff_t p = std::ptrdiff_t(l) + std::ptrdiff_t(k) - pad;
                        if (p >= 0 && p < std::ptrdiff_t(L)) acc += wk[k] * row[p];
                    }
                }
                out[(n * Cout + co) * L + l] = acc;
            }
}

void conv1d_backward_input_serial(double* grad_in, const double* grad_out, const double* w,
                                  std::size_t B, std::size_t Cin, std::size_t Cout,
                                  std::size_t L, std::size_t K) {
    const std::ptrdiff_t pad = std::ptrdiff_t(K / 2);
    for (std::size_t n = 0; n < B; ++n)
        for (std::size_t ci = 0; ci < Cin; ++ci)
            for (std::size_t p = 0; p < L; ++p) {
                double acc = 0;
                for (std::size_t co = 0; co < Cout; ++co) {
                    const double* gout = grad_out + (n * Cout + co) * L;
                    const double* wk = w + (co * Cin + ci) * K;
                    for (std::size_t k = 0; k < K; ++k) {
                        // out position l such that l + k - pad == p
                        std::ptrdiff_t l = std::ptrdiff_t(p) - std::ptrdiff_t(k) + pad;
                        if (l >= 0 && l < std::ptrdiff_t(L)) acc += wk[k] * gout[l];
                    }
                }
                grad_in[(n * Cin + ci) * L + p] = acc;
            }
}

void conv1d_backward_params_serial(double* grad_w, double* grad_b, const double* in,
                                   const double* grad_out, std::size_t B, std::size_t Cin,
                                   std::size_t Cout, std::size_t L, std::size_t K) {
    const std::ptrdiff_t pad = std::ptrdiff_t(K / 2);
    for (std::size_t co = 0; co < Cout; ++co) {
        double accb = 0;
        for (std::size_t n = 0; n < B; ++n) {
            const double* gout = grad_out + (n * Cout + co) * L;
            for (std::size_t l = 0; l < L; ++l) accb += gout[l];
        }
        grad_b[co] = accb;
        for (std::size_t ci = 0; ci < Cin; ++ci)
            for (std::size_t k = 0; k < K; ++k) {
                double acc = 0;
                for (std::size_t n = 0; n < B; ++n) {
                    const double* row = in + (n * Cin + ci) * L;
                    const double* gout = grad_out + (n * Cout + co) * L;
                    for (std::size_t l = 0; l < L; ++l) {
                        std::ptrdiff_t p = std::ptrdiff_t(l) + std::ptrdiff_t(k) - pad;
                        if (p >= 0 && p < std::ptrdiff_t(L)) acc += gout[l] * row[p];
                    }
                }
                grad_w[(co * Cin + ci) * K + k] = acc;
            }
    }
}

void dense_forward_serial(double* out, const double* in, const double* w, const double* b,
                          std::size_t B, std::size_t N, std::size_t M) {
    for (std::size_t n = 0; n < B; ++n)
        for (std::size_t m = 0; m < M; ++m) {
            double acc = b[m];
            const double* row = in + n * N;
            const double* wm = w + m * N;
            for (std::size_t i = 0; i < N; ++i) acc += wm[i] * row[i];
            out[n * M + m] = acc;
        }
}

}  // namespace har::cnn::kernels
