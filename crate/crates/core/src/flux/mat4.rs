//! Dense 4x4 helpers for the per-region coupling systems.

pub type Mat4 = [[f64; 4]; 4];
pub type Vec4 = [f64; 4];

pub const IDENTITY: Mat4 = [
    [1.0, 0.0, 0.0, 0.0],
    [0.0, 1.0, 0.0, 0.0],
    [0.0, 0.0, 1.0, 0.0],
    [0.0, 0.0, 0.0, 1.0],
];

pub fn mul(a: &Mat4, b: &Mat4) -> Mat4 {
    let mut c = [[0.0; 4]; 4];
    for i in 0..4 {
        for k in 0..4 {
            let aik = a[i][k];
            if aik == 0.0 {
                continue;
            }
            for j in 0..4 {
                c[i][j] += aik * b[k][j];
            }
        }
    }
    c
}

pub fn mul_vec(a: &Mat4, x: &Vec4) -> Vec4 {
    let mut y = [0.0; 4];
    for i in 0..4 {
        y[i] = a[i][0] * x[0] + a[i][1] * x[1] + a[i][2] * x[2] + a[i][3] * x[3];
    }
    y
}

/// Gauss-Jordan inverse with partial pivoting. `None` if a pivot vanishes.
pub fn inverse(a: &Mat4) -> Option<Mat4> {
    let mut m = *a;
    let mut inv = IDENTITY;
    for col in 0..4 {
        let mut piv = col;
        for r in col + 1..4 {
            if crate::math::abs(m[r][col]) > crate::math::abs(m[piv][col]) {
                piv = r;
            }
        }
        if m[piv][col] == 0.0 || !m[piv][col].is_finite() {
            return None;
        }
        m.swap(col, piv);
        inv.swap(col, piv);
        let d = 1.0 / m[col][col];
        for j in 0..4 {
            m[col][j] *= d;
            inv[col][j] *= d;
        }
        for r in 0..4 {
            if r == col {
                continue;
            }
            let f = m[r][col];
            if f == 0.0 {
                continue;
            }
            for j in 0..4 {
                m[r][j] -= f * m[col][j];
                inv[r][j] -= f * inv[col][j];
            }
        }
    }
    Some(inv)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_roundtrip() {
        let a = [
            [4.0, -1.0, 0.5, 0.0],
            [0.2, 3.0, -1.0, 0.1],
            [0.0, 1.0, 5.0, -2.0],
            [1.0, 0.0, 0.3, 2.0],
        ];
        let ai = inverse(&a).unwrap();
        let p = mul(&a, &ai);
        for i in 0..4 {
            for j in 0..4 {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((p[i][j] - e).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn singular_is_none() {
        let mut a = IDENTITY;
        a[2] = [0.0; 4];
        assert!(inverse(&a).is_none());
    }
}
