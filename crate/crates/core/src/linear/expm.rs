//! Matrix exponential by scaling and squaring with the degree-13 Pade
//! approximant, and the first two phi-functions through an augmented block
//! matrix.

use nalgebra::{DMatrix, Matrix4, SMatrix};

use crate::C64;

const THETA_13: f64 = 5.371_920_351_148_152;

const PADE_13: [f64; 14] = [
    64_764_752_532_480_000.0,
    32_382_376_266_240_000.0,
    7_771_770_303_897_600.0,
    1_187_353_796_428_800.0,
    129_060_195_264_000.0,
    10_559_470_521_600.0,
    670_442_572_800.0,
    33_522_128_640.0,
    1_323_241_920.0,
    40_840_800.0,
    960_960.0,
    16_380.0,
    182.0,
    1.0,
];

fn one_norm<const N: usize>(a: &SMatrix<C64, N, N>) -> f64 {
    (0..N)
        .map(|c| a.column(c).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `e^A` for a small dense complex matrix.
pub fn expm<const N: usize>(a: &SMatrix<C64, N, N>) -> SMatrix<C64, N, N> {
    let norm = one_norm(a);
    if norm == 0.0 {
        return SMatrix::identity();
    }
    let s = if norm > THETA_13 {
        (norm / THETA_13).log2().ceil() as i32
    } else {
        0
    };
    let a = a * C64::from(2f64.powi(-s));
    let b = PADE_13.map(C64::from);
    let id = SMatrix::<C64, N, N>::identity();
    let a2 = a * a;
    let a4 = a2 * a2;
    let a6 = a4 * a2;
    let u_inner =
        a6 * (a6 * b[13] + a4 * b[11] + a2 * b[9]) + a6 * b[7] + a4 * b[5] + a2 * b[3] + id * b[1];
    let u = a * u_inner;
    let v =
        a6 * (a6 * b[12] + a4 * b[10] + a2 * b[8]) + a6 * b[6] + a4 * b[4] + a2 * b[2] + id * b[0];
    let den = DMatrix::from_column_slice(N, N, (v - u).as_slice());
    let num = DMatrix::from_column_slice(N, N, (v + u).as_slice());
    let sol = den
        .lu()
        .solve(&num)
        .expect("Pade denominator is invertible");
    let mut r = SMatrix::<C64, N, N>::from_column_slice(sol.as_slice());
    for _ in 0..s {
        r = r * r;
    }
    r
}

/// `e^Z`, `phi_1(Z)` and `phi_2(Z)` for a 4x4 matrix `Z`, where
/// `phi_1(z) = (e^z - 1)/z` and `phi_2(z) = (e^z - 1 - z)/z^2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhiTriple {
    pub exp: Matrix4<C64>,
    pub phi1: Matrix4<C64>,
    pub phi2: Matrix4<C64>,
}

/// Reads the phi-functions off `exp([[Z, I, 0], [0, 0, I], [0, 0, 0]])`,
/// whose first block row is `[e^Z, phi_1(Z), phi_2(Z)]`.
pub fn exp_phi(z: &Matrix4<C64>) -> PhiTriple {
    let mut aug = SMatrix::<C64, 12, 12>::zeros();
    aug.fixed_view_mut::<4, 4>(0, 0).copy_from(z);
    for i in 0..4 {
        aug[(i, 4 + i)] = C64::from(1.0);
        aug[(4 + i, 8 + i)] = C64::from(1.0);
    }
    let e = expm(&aug);
    PhiTriple {
        exp: e.fixed_view::<4, 4>(0, 0).into_owned(),
        phi1: e.fixed_view::<4, 4>(0, 4).into_owned(),
        phi2: e.fixed_view::<4, 4>(0, 8).into_owned(),
    }
}
