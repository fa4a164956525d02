//! Floating-point element type and dense kernels.
//!
//! Training runs in `f32`; `f64` is used for gradient checking. All
//! matrices are row-major slices; the kernels take explicit strides so
//! per-head attention blocks can be addressed in place.

use std::fmt::Debug;
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_traits::Float;

pub trait Scalar:
    Float + AddAssign + SubAssign + MulAssign + DivAssign + Default + Debug + Sum + Send + Sync + 'static
{
    fn from_f64(x: f64) -> Self;
    fn as_f64(self) -> f64;

    /// `c = alpha * a · b + beta * c` with arbitrary strides.
    ///
    /// # Safety
    /// Every index reachable through the shapes and strides must lie inside
    /// the corresponding slice; [`gemm`] checks this before calling.
    #[allow(clippy::too_many_arguments)]
    unsafe fn gemm_raw(
        m: usize,
        k: usize,
        n: usize,
        alpha: Self,
        a: *const Self,
        rsa: isize,
        csa: isize,
        b: *const Self,
        rsb: isize,
        csb: isize,
        beta: Self,
        c: *mut Self,
        rsc: isize,
        csc: isize,
    );
}

impl Scalar for f32 {
    fn from_f64(x: f64) -> Self {
        x as f32
    }

    fn as_f64(self) -> f64 {
        self as f64
    }

    unsafe fn gemm_raw(
        m: usize,
        k: usize,
        n: usize,
        alpha: Self,
        a: *const Self,
        rsa: isize,
        csa: isize,
        b: *const Self,
        rsb: isize,
        csb: isize,
        beta: Self,
        c: *mut Self,
        rsc: isize,
        csc: isize,
    ) {
        matrixmultiply::sgemm(m, k, n, alpha, a, rsa, csa, b, rsb, csb, beta, c, rsc, csc);
    }
}

impl Scalar for f64 {
    fn from_f64(x: f64) -> Self {
        x
    }

    fn as_f64(self) -> f64 {
        self
    }

    unsafe fn gemm_raw(
        m: usize,
        k: usize,
        n: usize,
        alpha: Self,
        a: *const Self,
        rsa: isize,
        csa: isize,
        b: *const Self,
        rsb: isize,
        csb: isize,
        beta: Self,
        c: *mut Self,
        rsc: isize,
        csc: isize,
    ) {
        matrixmultiply::dgemm(m, k, n, alpha, a, rsa, csa, b, rsb, csb, beta, c, rsc, csc);
    }
}

/// Strided view of a matrix inside a slice.
#[derive(Clone, Copy, Debug)]
pub struct View {
    pub rows: usize,
    pub cols: usize,
    pub row_stride: usize,
    pub col_stride: usize,
}

impl View {
    pub fn row_major(rows: usize, cols: usize) -> Self {
        View {
            rows,
            cols,
            row_stride: cols,
            col_stride: 1,
        }
    }

    /// Row-major block of `cols` columns inside rows of width `stride`.
    pub fn block(rows: usize, cols: usize, stride: usize) -> Self {
        View {
            rows,
            cols,
            row_stride: stride,
            col_stride: 1,
        }
    }

    pub fn t(self) -> Self {
        View {
            rows: self.cols,
            cols: self.rows,
            row_stride: self.col_stride,
            col_stride: self.row_stride,
        }
    }

    fn extent(&self) -> usize {
        if self.rows == 0 || self.cols == 0 {
            0
        } else {
            (self.rows - 1) * self.row_stride + (self.cols - 1) * self.col_stride + 1
        }
    }
}

/// `c = alpha * a · b + beta * c` over strided views.
#[allow(clippy::too_many_arguments)]
pub fn gemm<T: Scalar>(alpha: T, a: &[T], av: View, b: &[T], bv: View, beta: T, c: &mut [T], cv: View) {
    assert_eq!(av.cols, bv.rows, "inner dimensions differ");
    assert_eq!((av.rows, bv.cols), (cv.rows, cv.cols), "output shape differs");
    assert!(av.extent() <= a.len() && bv.extent() <= b.len() && cv.extent() <= c.len());
    if cv.rows == 0 || cv.cols == 0 {
        return;
    }
    // SAFETY: extents checked above; c does not alias a or b (distinct borrows).
    unsafe {
        T::gemm_raw(
            av.rows,
            av.cols,
            bv.cols,
            alpha,
            a.as_ptr(),
            av.row_stride as isize,
            av.col_stride as isize,
            b.as_ptr(),
            bv.row_stride as isize,
            bv.col_stride as isize,
            beta,
            c.as_mut_ptr(),
            cv.row_stride as isize,
            cv.col_stride as isize,
        );
    }
}

/// `x[rows, in] · w[out, in]ᵀ + bias` → `[rows, out]`.
pub fn linear<T: Scalar>(x: &[T], rows: usize, w: &[T], bias: &[T], out_dim: usize) -> Vec<T> {
    let in_dim = w.len() / out_dim;
    let mut y = Vec::with_capacity(rows * out_dim);
    for _ in 0..rows {
        y.extend_from_slice(bias);
    }
    gemm(
        T::one(),
        x,
        View::row_major(rows, in_dim),
        w,
        View::row_major(out_dim, in_dim).t(),
        T::one(),
        &mut y,
        View::row_major(rows, out_dim),
    );
    y
}

/// Backward of [`linear`]: accumulates `dw += dyᵀ·x`, `db += Σ dy`, and
/// adds `dy · w` into `dx_acc`.
#[allow(clippy::too_many_arguments)]
pub fn linear_backward<T: Scalar>(
    dy: &[T],
    x: &[T],
    rows: usize,
    w: &[T],
    dw: &mut [T],
    db: &mut [T],
    out_dim: usize,
    dx_acc: &mut [T],
) {
    let in_dim = w.len() / out_dim;
    gemm(
        T::one(),
        dy,
        View::row_major(rows, out_dim).t(),
        x,
        View::row_major(rows, in_dim),
        T::one(),
        dw,
        View::row_major(out_dim, in_dim),
    );
    for row in dy.chunks_exact(out_dim) {
        for (b, &g) in db.iter_mut().zip(row) {
            *b += g;
        }
    }
    gemm(
        T::one(),
        dy,
        View::row_major(rows, out_dim),
        w,
        View::row_major(out_dim, in_dim),
        T::one(),
        dx_acc,
        View::row_major(rows, in_dim),
    );
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_matches_naive() {
        let x = [1.0f64, 2.0, 3.0, 4.0, 5.0, 6.0]; // 2x3
        let w = [1.0f64, 0.0, -1.0, 0.5, 0.5, 0.5]; // 2 out x 3 in
        let y = linear(&x, 2, &w, &[0.1, 0.2], 2);
        assert_eq!(y, [1.0 - 3.0 + 0.1, 3.0 + 0.2, 4.0 - 6.0 + 0.1, 7.5 + 0.2]);
    }

    #[test]
    fn strided_block_product() {
        // 2x4 buffer; multiply its right 2x2 block by identity
        let a = [9.0f64, 9.0, 1.0, 2.0, 9.0, 9.0, 3.0, 4.0];
        let id = [1.0f64, 0.0, 0.0, 1.0];
        let mut c = [0.0f64; 4];
        gemm(
            1.0,
            &a[2..],
            View::block(2, 2, 4),
            &id,
            View::row_major(2, 2),
            0.0,
            &mut c,
            View::row_major(2, 2),
        );
        assert_eq!(c, [1.0, 2.0, 3.0, 4.0]);
    }
}
