//! Fixed single- and two-qubit matrices.

use super::C64;

/// Row-major 2x2 complex matrix.
pub type Mat2 = [[C64; 2]; 2];

/// Row-major 4x4 complex matrix acting on an ordered qubit pair.
pub type Mat4 = [[C64; 4]; 4];

const O: C64 = C64::new(0.0, 0.0);
const L: C64 = C64::new(1.0, 0.0);

pub const I: Mat2 = [[L, O], [O, L]];
pub const X: Mat2 = [[O, L], [L, O]];
pub const Y: Mat2 = [[O, C64::new(0.0, -1.0)], [C64::new(0.0, 1.0), O]];
pub const Z: Mat2 = [[L, O], [O, C64::new(-1.0, 0.0)]];

pub fn hadamard() -> Mat2 {
    let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    [[h, h], [h, -h]]
}

pub fn scale(m: &Mat2, s: f64) -> Mat2 {
    [[m[0][0] * s, m[0][1] * s], [m[1][0] * s, m[1][1] * s]]
}

pub fn mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[O; 2]; 2];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

pub fn dagger(a: &Mat2) -> Mat2 {
    [[a[0][0].conj(), a[1][0].conj()], [a[0][1].conj(), a[1][1].conj()]]
}

pub fn add(a: &Mat2, b: &Mat2) -> Mat2 {
    [
        [a[0][0] + b[0][0], a[0][1] + b[0][1]],
        [a[1][0] + b[1][0], a[1][1] + b[1][1]],
    ]
}

pub fn trace(a: &Mat2) -> C64 {
    a[0][0] + a[1][1]
}

/// `|x><y|` for computational basis states.
pub fn outer_basis(x: usize, y: usize) -> Mat2 {
    let mut m = [[O; 2]; 2];
    m[x][y] = L;
    m
}

/// Pauli frame indexed by a 2-bit Bell outcome: `I, X, Z, XZ`.
pub fn bell_pauli(m: u8) -> Mat2 {
    match m & 3 {
        0 => I,
        1 => X,
        2 => Z,
        _ => mul(&X, &Z),
    }
}

/// Controlled-NOT with the first qubit of the pair as control.
pub fn cnot() -> Mat4 {
    let mut m = [[O; 4]; 4];
    m[0][0] = L;
    m[1][1] = L;
    m[2][3] = L;
    m[3][2] = L;
    m
}

pub fn max_abs_diff(a: &Mat2, b: &Mat2) -> f64 {
    let mut d: f64 = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            d = d.max((a[i][j] - b[i][j]).norm());
        }
    }
    d
}
