#include <omp.h>

#include <algorithm>
#include <vector>

#include "penn/kernels.hpp"

namespace penn::kernels::omp {

namespace {

constexpr std::size_t kRows = 4;
constexpr std::size_t kCols = 16;

bool go_parallel(std::size_t work) {
    return work >= kParallelThreshold && !omp_in_parallel() && omp_get_max_threads() > 1;
}

// Four doubles; aligned(8) permits unaligned loads and stores.
typedef double Lane __attribute__((vector_size(32), aligned(8)));

// Register tile of C[4 x 16] += A[4 x K] * B[K x 16], summed in ascending k.
// A is addressed as a[r * a_row + k * a_k] so transposed operands need no copy.
// Accumulators are named individually; as an array they end up on the stack.
inline void tile(const double* a, std::size_t a_row, std::size_t a_k, const double* b, std::size_t ldb,
                 double* c, std::size_t ldc, std::size_t depth, bool zero_init) {
    auto load = [](const double* p) { return *reinterpret_cast<const Lane*>(p); };
    auto store = [](double* p, Lane v) { *reinterpret_cast<Lane*>(p) = v; };
    const Lane zero{0.0, 0.0, 0.0, 0.0};
    double* c0 = c;
    double* c1 = c + ldc;
    double* c2 = c + 2 * ldc;
    double* c3 = c + 3 * ldc;
    Lane r00 = zero, r01 = zero, r02 = zero, r03 = zero;
    Lane r10 = zero, r11 = zero, r12 = zero, r13 = zero;
    Lane r20 = zero, r21 = zero, r22 = zero, r23 = zero;
    Lane r30 = zero, r31 = zero, r32 = zero, r33 = zero;
    if (!zero_init) {
        r00 = load(c0), r01 = load(c0 + 4), r02 = load(c0 + 8), r03 = load(c0 + 12);
        r10 = load(c1), r11 = load(c1 + 4), r12 = load(c1 + 8), r13 = load(c1 + 12);
        r20 = load(c2), r21 = load(c2 + 4), r22 = load(c2 + 8), r23 = load(c2 + 12);
        r30 = load(c3), r31 = load(c3 + 4), r32 = load(c3 + 8), r33 = load(c3 + 12);
    }
    const double* a0 = a;
    const double* a1 = a + a_row;
    const double* a2 = a + 2 * a_row;
    const double* a3 = a + 3 * a_row;
    for (std::size_t k = 0; k < depth; ++k) {
        const double* bk = b + k * ldb;
        const Lane b0 = load(bk), b1 = load(bk + 4), b2 = load(bk + 8), b3 = load(bk + 12);
        const std::size_t ak = k * a_k;
        const double x0 = a0[ak], x1 = a1[ak], x2 = a2[ak], x3 = a3[ak];
        r00 += x0 * b0, r01 += x0 * b1, r02 += x0 * b2, r03 += x0 * b3;
        r10 += x1 * b0, r11 += x1 * b1, r12 += x1 * b2, r13 += x1 * b3;
        r20 += x2 * b0, r21 += x2 * b1, r22 += x2 * b2, r23 += x2 * b3;
        r30 += x3 * b0, r31 += x3 * b1, r32 += x3 * b2, r33 += x3 * b3;
    }
    store(c0, r00), store(c0 + 4, r01), store(c0 + 8, r02), store(c0 + 12, r03);
    store(c1, r10), store(c1 + 4, r11), store(c1 + 8, r12), store(c1 + 12, r13);
    store(c2, r20), store(c2 + 4, r21), store(c2 + 8, r22), store(c2 + 12, r23);
    store(c3, r30), store(c3 + 4, r31), store(c3 + 8, r32), store(c3 + 12, r33);
}

// One row of the tile above.
inline void tile_row(const double* a, std::size_t a_k, const double* b, std::size_t ldb, double* c,
                     std::size_t depth, bool zero_init) {
    auto load = [](const double* p) { return *reinterpret_cast<const Lane*>(p); };
    auto store = [](double* p, Lane v) { *reinterpret_cast<Lane*>(p) = v; };
    const Lane zero{0.0, 0.0, 0.0, 0.0};
    Lane r0 = zero, r1 = zero, r2 = zero, r3 = zero;
    if (!zero_init) r0 = load(c), r1 = load(c + 4), r2 = load(c + 8), r3 = load(c + 12);
    for (std::size_t k = 0; k < depth; ++k) {
        const double* bk = b + k * ldb;
        const double x = a[k * a_k];
        r0 += x * load(bk), r1 += x * load(bk + 4), r2 += x * load(bk + 8), r3 += x * load(bk + 12);
    }
    store(c, r0), store(c + 4, r1), store(c + 8, r2), store(c + 12, r3);
}

// Narrow tile C[8 x 4] += A[8 x K] * B[K x 4], for column remainders such as
// a small batch in the transposed forward product.
inline void tile_narrow(const double* a, std::size_t a_row, std::size_t a_k, const double* b, std::size_t ldb,
                        double* c, std::size_t ldc, std::size_t depth, bool zero_init) {
    auto load = [](const double* p) { return *reinterpret_cast<const Lane*>(p); };
    auto store = [](double* p, Lane v) { *reinterpret_cast<Lane*>(p) = v; };
    const Lane zero{0.0, 0.0, 0.0, 0.0};
    Lane r0 = zero, r1 = zero, r2 = zero, r3 = zero, r4 = zero, r5 = zero, r6 = zero, r7 = zero;
    if (!zero_init) {
        r0 = load(c), r1 = load(c + ldc), r2 = load(c + 2 * ldc), r3 = load(c + 3 * ldc);
        r4 = load(c + 4 * ldc), r5 = load(c + 5 * ldc), r6 = load(c + 6 * ldc), r7 = load(c + 7 * ldc);
    }
    for (std::size_t k = 0; k < depth; ++k) {
        const Lane bk = load(b + k * ldb);
        const double* ak = a + k * a_k;
        r0 += ak[0] * bk, r1 += ak[a_row] * bk, r2 += ak[2 * a_row] * bk, r3 += ak[3 * a_row] * bk;
        r4 += ak[4 * a_row] * bk, r5 += ak[5 * a_row] * bk, r6 += ak[6 * a_row] * bk, r7 += ak[7 * a_row] * bk;
    }
    store(c, r0), store(c + ldc, r1), store(c + 2 * ldc, r2), store(c + 3 * ldc, r3);
    store(c + 4 * ldc, r4), store(c + 5 * ldc, r5), store(c + 6 * ldc, r6), store(c + 7 * ldc, r7);
}

inline void tile_narrow_row(const double* a, std::size_t a_k, const double* b, std::size_t ldb, double* c,
                            std::size_t depth, bool zero_init) {
    auto load = [](const double* p) { return *reinterpret_cast<const Lane*>(p); };
    Lane r = zero_init ? Lane{0.0, 0.0, 0.0, 0.0} : load(c);
    for (std::size_t k = 0; k < depth; ++k) r += a[k * a_k] * load(b + k * ldb);
    *reinterpret_cast<Lane*>(c) = r;
}

// Single output column, same summation order.
template <std::size_t R>
inline void column(const double* a, std::size_t a_row, std::size_t a_k, const double* b, std::size_t ldb,
                   double* c, std::size_t ldc, std::size_t depth, bool zero_init) {
    double acc[R];
    for (std::size_t r = 0; r < R; ++r) acc[r] = zero_init ? 0.0 : c[r * ldc];
    for (std::size_t k = 0; k < depth; ++k) {
        const double bv = b[k * ldb];
        for (std::size_t r = 0; r < R; ++r) acc[r] += a[r * a_row + k * a_k] * bv;
    }
    for (std::size_t r = 0; r < R; ++r) c[r * ldc] = acc[r];
}

// C[m x n] (+)= A * B with B [depth x n] row-major and C row-major with ld n.
// Column panels are the outer loop so a depth x 16 slice of B stays in cache
// while every row block passes over it.
void gemm(std::size_t m, std::size_t n, std::size_t depth, const double* a, std::size_t a_row,
          std::size_t a_k, const double* b, double* c, bool zero_init) {
    const std::size_t panels = n / kCols;
    const std::size_t full_rows = m / kRows * kRows;
#pragma omp parallel for schedule(static) if (go_parallel(m * n * depth))
    for (std::size_t p = 0; p < panels; ++p) {
        const std::size_t j = p * kCols;
        // Packed copy of the panel: with power-of-two row strides the
        // unpacked panel rows collide in the same cache sets.
        thread_local std::vector<double> pack;
        pack.resize(depth * kCols);
        for (std::size_t k = 0; k < depth; ++k) std::copy_n(b + k * n + j, kCols, pack.data() + k * kCols);
        for (std::size_t i = 0; i < full_rows; i += kRows) {
            tile(a + i * a_row, a_row, a_k, pack.data(), kCols, c + i * n + j, n, depth, zero_init);
        }
        for (std::size_t i = full_rows; i < m; ++i) {
            tile_row(a + i * a_row, a_k, pack.data(), kCols, c + i * n + j, depth, zero_init);
        }
    }
    std::size_t j0 = panels * kCols;
    for (; j0 + 4 <= n; j0 += 4) {
        const std::size_t rows8 = m / 8 * 8;
        for (std::size_t i = 0; i < rows8; i += 8) {
            tile_narrow(a + i * a_row, a_row, a_k, b + j0, n, c + i * n + j0, n, depth, zero_init);
        }
        for (std::size_t i = rows8; i < m; ++i) {
            tile_narrow_row(a + i * a_row, a_k, b + j0, n, c + i * n + j0, depth, zero_init);
        }
    }
    for (std::size_t j = j0; j < n; ++j) {
        for (std::size_t i = 0; i < full_rows; i += kRows) {
            column<kRows>(a + i * a_row, a_row, a_k, b + j, n, c + i * n + j, n, depth, zero_init);
        }
        for (std::size_t i = full_rows; i < m; ++i) {
            column<1>(a + i * a_row, a_row, a_k, b + j, n, c + i * n + j, n, depth, zero_init);
        }
    }
}

}  // namespace

void linear_forward(std::span<const double> x, std::size_t batch, std::size_t in,
                    std::span<const double> w, std::span<const double> b, std::size_t out,
                    std::span<double> y) {
    if (batch < kRows) {
        serial::linear_forward(x, batch, in, w, b, out, y);
        return;
    }
    // y^T = W x^T keeps the large operand (W) in place; only the batch-sized
    // input and output are transposed.
    thread_local std::vector<double> xt, yt;
    xt.resize(in * batch);
    yt.resize(out * batch);
    for (std::size_t i = 0; i < batch; ++i)
        for (std::size_t k = 0; k < in; ++k) xt[k * batch + i] = x[i * in + k];

    gemm(out, batch, in, w.data(), in, 1, xt.data(), yt.data(), true);
    for (std::size_t i = 0; i < batch; ++i) {
        double* yi = y.data() + i * out;
        for (std::size_t o = 0; o < out; ++o) yi[o] = yt[o * batch + i] + b[o];
    }
}

void linear_backward_input(std::span<const double> dy, std::size_t batch, std::size_t out,
                           std::span<const double> w, std::size_t in, std::span<double> dx) {
    gemm(batch, in, out, dy.data(), out, 1, w.data(), dx.data(), false);
}

void linear_backward_params(std::span<const double> dy, std::span<const double> x,
                            std::size_t batch, std::size_t in, std::size_t out,
                            std::span<double> dw, std::span<double> db) {
    for (std::size_t o = 0; o < out; ++o) {
        double acc = db[o];
        for (std::size_t i = 0; i < batch; ++i) acc += dy[i * out + o];
        db[o] = acc;
    }
    // dW += dy^T x, with dy^T made contiguous first (reading dy by columns
    // strides through memory).
    thread_local std::vector<double> dyt;
    dyt.resize(out * batch);
    for (std::size_t i = 0; i < batch; ++i)
        for (std::size_t o = 0; o < out; ++o) dyt[o * batch + i] = dy[i * out + o];
    gemm(out, in, batch, dyt.data(), batch, 1, x.data(), dw.data(), false);
}

}  // namespace penn::kernels::omp
