//! Multidimensional limiters `phi(r)` mapping a flux ratio to a weight.

/// Ratios above this are clamped before evaluation; every limiter is
/// saturated there.
pub const MAX_RATIO: f64 = 1e12;

/// Largest double below one. The smooth limiters are capped here so the
/// coupling matrices stay strictly diagonally dominant in floating point.
pub const MAX_WEIGHT: f64 = 1.0 - f64::EPSILON / 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Limiter {
    /// `phi = 0`: two-point upwinding.
    Zero,
    /// Tight multi-D upstream, `min(1, r)`.
    Tmu,
    /// Smooth multi-D upstream, `r / (1 + r)`.
    Smu,
    /// Fourth-order smooth multi-D upstream,
    /// `(r^4 + r^3 + r^2 + r) / (r^4 + r^3 + r^2 + r + 1)`.
    Smu4,
}

impl Limiter {
    /// Returns `(phi(r), phi'(r))` for `r >= 0`.
    pub fn eval(self, r: f64) -> (f64, f64) {
        let r = r.max(0.0);
        if r > MAX_RATIO {
            let (v, _) = self.eval(MAX_RATIO);
            return (v, 0.0);
        }
        match self {
            Limiter::Zero => (0.0, 0.0),
            Limiter::Tmu => {
                if r < 1.0 {
                    (r, 1.0)
                } else {
                    (1.0, 0.0)
                }
            }
            Limiter::Smu => {
                let d = 1.0 + r;
                ((r / d).min(MAX_WEIGHT), 1.0 / (d * d))
            }
            Limiter::Smu4 => {
                let r2 = r * r;
                let num = r2 * r2 + r2 * r + r2 + r;
                let den = num + 1.0;
                let dnum = 4.0 * r2 * r + 3.0 * r2 + 2.0 * r + 1.0;
                ((num / den).min(MAX_WEIGHT), dnum / (den * den))
            }
        }
    }

    #[inline]
    pub fn value(self, r: f64) -> f64 {
        self.eval(r).0
    }

    pub fn name(self) -> &'static str {
        match self {
            Limiter::Zero => "ZERO",
            Limiter::Tmu => "TMU",
            Limiter::Smu => "SMU",
            Limiter::Smu4 => "SMU4",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_uppercase().as_str() {
            "ZERO" => Some(Limiter::Zero),
            "TMU" => Some(Limiter::Tmu),
            "SMU" => Some(Limiter::Smu),
            "SMU4" => Some(Limiter::Smu4),
            _ => None,
        }
    }
}
