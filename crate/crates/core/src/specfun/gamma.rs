//! Gamma function family on the real line.

use std::f64::consts::PI;

use crate::error::{domain, Result};

/// Taylor coefficients of `1/Γ(1+t)` about `t = 0`.
pub(crate) const RGAMMA1P: [f64; 31] = [
    1.0,
    0.577_215_664_901_532_860_61,
    -0.655_878_071_520_253_881_08,
    -0.042_002_635_034_095_235_529,
    0.166_538_611_382_291_489_5,
    -0.042_197_734_555_544_336_748,
    -0.009_621_971_527_876_973_562_1,
    0.007_218_943_246_663_099_542_4,
    -0.001_165_167_591_859_065_112_1,
    -0.000_215_241_674_114_950_972_82,
    0.000_128_050_282_388_116_186_15,
    -0.000_020_134_854_780_788_238_656,
    -1.250_493_482_142_670_657_3e-6,
    1.133_027_231_981_695_882_4e-6,
    -2.056_338_416_977_607_103_5e-7,
    6.116_095_104_481_415_817_9e-9,
    5.002_007_644_469_222_930_1e-9,
    -1.181_274_570_487_020_144_6e-9,
    1.043_426_711_691_100_510_5e-10,
    7.782_263_439_905_071_254e-12,
    -3.696_805_618_642_205_708_2e-12,
    5.100_370_287_454_475_979e-13,
    -2.058_326_053_566_506_783_2e-14,
    -5.348_122_539_423_017_982_4e-15,
    1.226_778_628_238_260_790_2e-15,
    -1.181_259_301_697_458_769_5e-16,
    1.186_692_254_751_600_332_6e-18,
    1.412_380_655_318_031_781_6e-18,
    -2.298_745_684_435_370_206_6e-19,
    1.714_406_321_927_337_433_4e-20,
    1.337_351_730_493_693_114_9e-22,
];

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_741_78;

/// `1/Γ(1+t) − 1` for `|t| ≤ 1/2`, accurate relative to its own size.
pub(crate) fn rgamma1pm1(t: f64) -> f64 {
    let mut acc = 0.0;
    for &c in RGAMMA1P[1..].iter().rev() {
        acc = acc * t + c;
    }
    acc * t
}

/// `ln Γ(1+t)` for `|t| ≤ 1/2`.
fn ln_gamma1p_small(t: f64) -> f64 {
    -rgamma1pm1(t).ln_1p()
}

fn ln_gamma_stirling(x: f64) -> f64 {
    // Bernoulli terms B_{2k} / (2k (2k-1))
    const C: [f64; 7] = [
        1.0 / 12.0,
        -1.0 / 360.0,
        1.0 / 1260.0,
        -1.0 / 1680.0,
        1.0 / 1188.0,
        -691.0 / 360_360.0,
        1.0 / 156.0,
    ];
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let mut series = 0.0;
    for &c in C.iter().rev() {
        series = series * inv2 + c;
    }
    (x - 0.5) * x.ln() - x + LN_SQRT_2PI + series * inv
}

fn ln_gamma_pos(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    if x < 0.5 {
        ln_gamma1p_small(x) - x.ln()
    } else if x < 1.5 {
        ln_gamma1p_small(x - 1.0)
    } else if x < 2.5 {
        let t = x - 2.0;
        t.ln_1p() + ln_gamma1p_small(t)
    } else if x < 10.0 {
        let mut shift = 1.0;
        let mut y = x;
        while y < 10.0 {
            shift *= y;
            y += 1.0;
        }
        ln_gamma_stirling(y) - shift.ln()
    } else {
        ln_gamma_stirling(x)
    }
}

/// `sin(πx)` with exact zeros at the integers.
pub(crate) fn sin_pi(x: f64) -> f64 {
    let n = x.round();
    // x − n is exact, so tiny arguments keep full relative accuracy
    let f = x - n;
    if f == 0.0 {
        return 0.0;
    }
    let s = (PI * f).sin();
    if n.rem_euclid(2.0) == 0.0 {
        s
    } else {
        -s
    }
}

/// Natural logarithm of the gamma function for `x > 0`.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return domain(format!("log_gamma requires a finite positive argument, got {x}"));
    }
    Ok(ln_gamma_pos(x))
}

/// `(ln|Γ(x)|, sign Γ(x))` for any real `x` that is not a pole. Returns `None` at
/// `x = 0, -1, -2, ...`.
pub fn ln_gamma_signed(x: f64) -> Option<(f64, f64)> {
    if !x.is_finite() {
        return None;
    }
    if x > 0.0 {
        return Some((ln_gamma_pos(x), 1.0));
    }
    let s = sin_pi(x);
    if s == 0.0 {
        return None;
    }
    // Γ(x) Γ(1-x) = π / sin(πx), with Γ(1-x) > 0 for x < 1
    let ln_abs = PI.ln() - s.abs().ln() - ln_gamma_pos(1.0 - x);
    Some((ln_abs, s.signum()))
}

/// Gamma function for non-pole real arguments.
pub fn gamma(x: f64) -> Result<f64> {
    match ln_gamma_signed(x) {
        Some((l, s)) => Ok(s * l.exp()),
        None => domain(format!("gamma has a pole at {x}")),
    }
}

/// Reciprocal gamma `1/Γ(x)`, which is entire: zero at the poles of Γ.
pub fn rgamma(x: f64) -> f64 {
    match ln_gamma_signed(x) {
        Some((l, s)) => s * (-l).exp(),
        None => 0.0,
    }
}

/// Signed log-space accumulator for Γ-ratio prefactors.
///
/// Multiplying and dividing by Γ values keeps `ln|·|` and the sign separately;
/// a pole in a divisor turns the whole product into an exact zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogProduct {
    pub ln_abs: f64,
    pub sign: f64,
}

impl LogProduct {
    pub const ONE: Self = Self { ln_abs: 0.0, sign: 1.0 };
    pub const ZERO: Self = Self { ln_abs: f64::NEG_INFINITY, sign: 0.0 };

    pub fn from_value(v: f64) -> Self {
        if v == 0.0 {
            Self::ZERO
        } else {
            Self { ln_abs: v.abs().ln(), sign: v.signum() }
        }
    }

    /// Multiply by Γ(x). Returns an error at a pole.
    pub fn mul_gamma(self, x: f64) -> Result<Self> {
        match ln_gamma_signed(x) {
            Some((l, s)) => Ok(Self { ln_abs: self.ln_abs + l, sign: self.sign * s }),
            None => domain(format!("gamma pole at {x} in a numerator")),
        }
    }

    /// Divide by Γ(x); a pole gives zero.
    pub fn div_gamma(self, x: f64) -> Self {
        match ln_gamma_signed(x) {
            Some((l, s)) => Self { ln_abs: self.ln_abs - l, sign: self.sign * s },
            None => Self::ZERO,
        }
    }

    pub fn mul_ln(self, ln_factor: f64) -> Self {
        Self { ln_abs: self.ln_abs + ln_factor, ..self }
    }

    pub fn value(self) -> f64 {
        if self.sign == 0.0 {
            0.0
        } else {
            self.sign * self.ln_abs.exp()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn anchors() {
        assert_eq!(log_gamma(1.0).unwrap(), 0.0);
        assert!((log_gamma(0.5).unwrap() - PI.sqrt().ln()).abs() < 1e-15);
        assert!((log_gamma(5.0).unwrap() - 24f64.ln()).abs() < 1e-14);
        assert_eq!(log_gamma(2.0).unwrap(), 0.0);
    }

    #[test]
    fn factorials_relative() {
        let mut f = 1.0f64;
        assert_eq!(log_gamma(2.0).unwrap(), 0.0);
        for n in 2..170 {
            let x = n as f64 + 1.0;
            f *= n as f64;
            let want = f.ln();
            let got = log_gamma(x).unwrap();
            assert!((got - want).abs() <= 1e-13 * want.abs(), "n={n} got={got} want={want}");
        }
    }

    #[test]
    fn half_integers_and_reflection() {
        // Γ(n + 1/2) = (2n)! √π / (4^n n!)
        for n in 0..20u32 {
            let mut r = PI.sqrt();
            for k in 1..=n {
                r *= (2 * k - 1) as f64 / 2.0;
            }
            let got = gamma(n as f64 + 0.5).unwrap();
            assert!(((got - r) / r).abs() < 1e-13);
        }
        // Γ(-1/2) = -2√π, Γ(-3/2) = 4√π/3
        assert!((gamma(-0.5).unwrap() + 2.0 * PI.sqrt()).abs() < 1e-14);
        assert!((gamma(-1.5).unwrap() - 4.0 * PI.sqrt() / 3.0).abs() < 1e-14);
        assert!(ln_gamma_signed(-3.0).is_none());
        assert_eq!(rgamma(-2.0), 0.0);
    }

    #[test]
    fn near_roots_keep_relative_accuracy() {
        // ln Γ(1+t) ≈ -γ t for small t
        let t = 1e-9;
        let got = log_gamma(1.0 + t).unwrap();
        let want = -0.577_215_664_901_532_9 * t + 0.822_467_033_424_113_2 * t * t;
        assert!(((got - want) / want).abs() < 1e-6);
        let got2 = log_gamma(2.0 + t).unwrap();
        let want2 = (1.0 - 0.577_215_664_901_532_9) * t;
        assert!(((got2 - want2) / want2).abs() < 1e-6);
    }

    #[test]
    fn rejects_non_positive() {
        assert!(log_gamma(0.0).is_err());
        assert!(log_gamma(-1.0).is_err());
        assert!(log_gamma(f64::NAN).is_err());
    }

    #[test]
    fn recurrence_on_grid() {
        let mut x = 1e-3;
        while x < 1e3 {
            let lhs = log_gamma(x + 1.0).unwrap();
            let rhs = log_gamma(x).unwrap() + x.ln();
            let scale = lhs.abs().max(1e-300);
            assert!((lhs - rhs).abs() / scale < 1e-12 || (lhs - rhs).abs() < 1e-14, "x={x}");
            x *= 1.37;
        }
    }
}
