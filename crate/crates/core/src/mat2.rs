//! Real 2×2 matrices stored row-major.

pub type Mat2 = [[f64; 2]; 2];

pub const IDENTITY: Mat2 = [[1.0, 0.0], [0.0, 1.0]];

pub fn mul(a: &Mat2, b: &Mat2) -> Mat2 {
    [
        [
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
        ],
        [
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        ],
    ]
}

pub fn apply(a: &Mat2, v: [f64; 2]) -> [f64; 2] {
    [
        a[0][0] * v[0] + a[0][1] * v[1],
        a[1][0] * v[0] + a[1][1] * v[1],
    ]
}

pub fn det(a: &Mat2) -> f64 {
    a[0][0] * a[1][1] - a[0][1] * a[1][0]
}

pub fn trace(a: &Mat2) -> f64 {
    a[0][0] + a[1][1]
}

pub fn transpose(a: &Mat2) -> Mat2 {
    [[a[0][0], a[1][0]], [a[0][1], a[1][1]]]
}

/// Adjugate; the exact inverse when `det = 1`.
pub fn adjugate(a: &Mat2) -> Mat2 {
    [[a[1][1], -a[0][1]], [-a[1][0], a[0][0]]]
}

pub fn max_abs(a: &Mat2) -> f64 {
    a.iter().flatten().fold(0.0_f64, |m, v| m.max(v.abs()))
}

/// `a^n` by repeated squaring; negative powers go through the adjugate.
pub fn pow(a: &Mat2, n: i64) -> Mat2 {
    let mut base = if n < 0 { adjugate(a) } else { *a };
    let mut e = n.unsigned_abs();
    let mut acc = IDENTITY;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul(&acc, &base);
        }
        base = mul(&base, &base);
        e >>= 1;
    }
    acc
}

/// Eigenvalues of a real 2×2 matrix as `(re, im)` pairs.
pub fn eigenvalues(a: &Mat2) -> [(f64, f64); 2] {
    let tr = trace(a);
    let d = det(a);
    let disc = 0.25 * tr * tr - d;
    if disc >= 0.0 {
        let r = disc.sqrt();
        let big = 0.5 * tr + r.copysign(tr);
        let small = if big != 0.0 { d / big } else { 0.5 * tr - r };
        [(big, 0.0), (small, 0.0)]
    } else {
        let i = (-disc).sqrt();
        [(0.5 * tr, i), (0.5 * tr, -i)]
    }
}
