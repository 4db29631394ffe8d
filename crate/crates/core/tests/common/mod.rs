//! Reference implementations written directly from the definitions, with
//! no code shared with the library.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use pnp_core::Image;

/// xorshift64* stream for test inputs.
pub struct TestRng(u64);

impl TestRng {
    pub fn new(seed: u64) -> Self {
        TestRng(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) | 1)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 ^= self.0 >> 12;
        self.0 ^= self.0 << 25;
        self.0 ^= self.0 >> 27;
        self.0.wrapping_mul(0x2545_F491_4F6C_DD1D)
    }

    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn below(&mut self, n: usize) -> usize {
        (self.next_u64() % n as u64) as usize
    }

    pub fn image(&mut self, w: usize, h: usize) -> Image {
        Image::from_fn(w, h, |_, _| self.uniform())
    }
}

/// Half-sample symmetric reflection: `... 1 0 | 0 1 2 ... n-1 | n-1 n-2 ...`.
pub fn reflect(i: isize, n: usize) -> usize {
    let n = n as isize;
    let m = i.rem_euclid(2 * n);
    (if m < n { m } else { 2 * n - 1 - m }) as usize
}

pub fn reflected(g: &Image, x: isize, y: isize) -> f64 {
    g.get(reflect(x, g.width()), reflect(y, g.height()))
}

/// `||P_s - P_r||^2` by explicit summation over the patch.
pub fn patch_ssd(g: &Image, s: (isize, isize), r: (isize, isize), np: usize) -> f64 {
    let h = (np / 2) as isize;
    let mut acc = 0.0;
    for b in -h..=h {
        for a in -h..=h {
            let d = reflected(g, s.0 + a, s.1 + b) - reflected(g, r.0 + a, r.1 + b);
            acc += d * d;
        }
    }
    acc
}

/// Tapered NLM kernel matrix `Lambda_{s,r} k_{s,r}` over clipped windows.
pub fn kernel_matrix(g: &Image, np: usize, ns: usize, bw: f64) -> DMatrix<f64> {
    let (w, h) = (g.width(), g.height());
    let n = w * h;
    let span = (ns + 1) as f64;
    DMatrix::from_fn(n, n, |i, j| {
        let (sx, sy) = (i % w, i / w);
        let (rx, ry) = (j % w, j / w);
        let (dx, dy) = (sx.abs_diff(rx), sy.abs_diff(ry));
        if dx > ns || dy > ns {
            return 0.0;
        }
        let taper = (1.0 - dx as f64 / span) * (1.0 - dy as f64 / span);
        let d = patch_ssd(g, (sx as isize, sy as isize), (rx as isize, ry as isize), np);
        taper * (-d / (2.0 * (np * np) as f64 * bw * bw)).exp()
    })
}

/// DSG-NLM matrix: symmetric normalization, max-row-sum scaling, diagonal fill.
pub fn dsg_matrix(g: &Image, np: usize, ns: usize, bw: f64) -> DMatrix<f64> {
    let k = kernel_matrix(g, np, ns, bw);
    let n = k.nrows();
    let rows: Vec<f64> = (0..n).map(|i| k.row(i).sum()).collect();
    let cols: Vec<f64> = (0..n).map(|j| k.column(j).sum()).collect();
    let mut w = DMatrix::from_fn(n, n, |i, j| k[(i, j)] / (rows[i].sqrt() * cols[j].sqrt()));
    let max_row = (0..n).map(|i| w.row(i).sum()).fold(0.0, f64::max);
    w /= max_row;
    for i in 0..n {
        let s = w.row(i).sum();
        w[(i, i)] += 1.0 - s;
    }
    w
}

/// Classical NLM matrix `k_{s,r} / sum_r k_{s,r}` over clipped windows (no taper).
pub fn nlm_matrix(g: &Image, np: usize, ns: usize, bw: f64) -> DMatrix<f64> {
    let (w, h) = (g.width(), g.height());
    let n = w * h;
    let mut k = DMatrix::from_fn(n, n, |i, j| {
        let (sx, sy) = (i % w, i / w);
        let (rx, ry) = (j % w, j / w);
        if sx.abs_diff(rx) > ns || sy.abs_diff(ry) > ns {
            return 0.0;
        }
        let d = patch_ssd(g, (sx as isize, sy as isize), (rx as isize, ry as isize), np);
        (-d / (2.0 * (np * np) as f64 * bw * bw)).exp()
    });
    for i in 0..n {
        let s = k.row(i).sum();
        k.row_mut(i).scale_mut(1.0 / s);
    }
    k
}

pub fn to_vec(img: &Image) -> DVector<f64> {
    DVector::from_column_slice(img.data())
}

pub fn from_vec(v: &DVector<f64>, w: usize, h: usize) -> Image {
    Image::new(w, h, v.as_slice().to_vec()).unwrap()
}

/// Dense matrix of a linear image map, built column by column.
pub fn dense_operator(in_w: usize, in_h: usize, mut apply: impl FnMut(&Image) -> Image) -> DMatrix<f64> {
    let n = in_w * in_h;
    let mut cols = Vec::with_capacity(n);
    for j in 0..n {
        let mut e = Image::zeros(in_w, in_h);
        e.data_mut()[j] = 1.0;
        cols.push(to_vec(&apply(&e)));
    }
    DMatrix::from_columns(&cols)
}

pub fn max_abs(a: &DMatrix<f64>) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}
