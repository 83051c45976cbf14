//! Special functions: log-gamma, the regularized incomplete beta function and
//! the Student t distribution built on top of it.

use crate::error::{Error, Result};

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural log of |Γ(x)| (Lanczos, g = 7).
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // reflection
        let s = (std::f64::consts::PI * x).sin().abs();
        return std::f64::consts::PI.ln() - s.ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

pub fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

/// Continued fraction for the incomplete beta (modified Lentz).
fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=500 {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h
}

/// Regularized incomplete beta `(I_x(a,b), 1 - I_x(a,b))`.
///
/// `y` must equal `1 - x`; passing it separately keeps full precision when the
/// caller can form `1 - x` without cancellation.
pub(crate) fn beta_inc_pair(a: f64, b: f64, x: f64, y: f64, ln_b: f64) -> (f64, f64) {
    if x <= 0.0 {
        return (0.0, 1.0);
    }
    if y <= 0.0 {
        return (1.0, 0.0);
    }
    let ln_front = a * x.ln() + b * y.ln() - ln_b;
    if x < (a + 1.0) / (a + b + 2.0) {
        let lower = (ln_front.exp() * beta_cf(a, b, x) / a).clamp(0.0, 1.0);
        (lower, 1.0 - lower)
    } else {
        let upper = (ln_front.exp() * beta_cf(b, a, y) / b).clamp(0.0, 1.0);
        (1.0 - upper, upper)
    }
}

/// Regularized incomplete beta function `I_x(a, b)`.
pub fn beta_inc(a: f64, b: f64, x: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0) {
        return Err(Error::Domain(format!("beta_inc requires a, b > 0 (got {a}, {b})")));
    }
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("beta_inc requires x in [0,1] (got {x})")));
    }
    Ok(beta_inc_pair(a, b, x, 1.0 - x, ln_beta(a, b)).0)
}

/// Student t distribution with `dof` degrees of freedom (real, positive).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StudentT {
    dof: f64,
    ln_b: f64,
    ln_norm: f64,
}

impl StudentT {
    pub fn new(dof: f64) -> Result<Self> {
        if !(dof > 0.0 && dof.is_finite()) {
            return Err(Error::ParameterDomain(format!(
                "student t degrees of freedom must be positive and finite (got {dof})"
            )));
        }
        Ok(Self::new_unchecked(dof))
    }

    pub(crate) fn new_unchecked(dof: f64) -> Self {
        let ln_b = ln_beta(0.5 * dof, 0.5);
        // ln density normaliser: -ln(sqrt(m) B(m/2, 1/2))
        let ln_norm = -0.5 * dof.ln() - ln_b;
        Self { dof, ln_b, ln_norm }
    }

    pub fn dof(&self) -> f64 {
        self.dof
    }

    pub fn ln_pdf(&self, x: f64) -> f64 {
        self.ln_norm - 0.5 * (self.dof + 1.0) * (x * x / self.dof).ln_1p()
    }

    pub fn pdf(&self, x: f64) -> f64 {
        self.ln_pdf(x).exp()
    }

    /// Probability mass in the tail beyond |x|, i.e. `P(T <= -|x|)`.
    fn tail(&self, x: f64) -> f64 {
        if x.is_infinite() {
            return 0.0;
        }
        let m = self.dof;
        let t2 = x * x;
        let denom = m + t2;
        // I_{m/(m+t²)}(m/2, 1/2) with the complement argument formed directly
        let (i, _) = beta_inc_pair(0.5 * m, 0.5, m / denom, t2 / denom, self.ln_b);
        0.5 * i
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x.is_nan() {
            return f64::NAN;
        }
        if x == 0.0 {
            return 0.5;
        }
        let tail = self.tail(x);
        if x < 0.0 {
            tail
        } else {
            1.0 - tail
        }
    }

    /// Inverse CDF. Newton on the log-CDF inside a maintained bracket, seeded
    /// from a Cornish-Fisher corrected normal quantile.
    pub fn quantile(&self, p: f64) -> f64 {
        if p.is_nan() || !(0.0..=1.0).contains(&p) {
            return f64::NAN;
        }
        if p == 0.0 {
            return f64::NEG_INFINITY;
        }
        if p == 1.0 {
            return f64::INFINITY;
        }
        if p == 0.5 {
            return 0.0;
        }
        if p > 0.5 {
            return -self.lower_quantile(1.0 - p);
        }
        self.lower_quantile(p)
    }

    /// Quantile for p < 1/2; returns a negative number.
    fn lower_quantile(&self, p: f64) -> f64 {
        let m = self.dof;
        let z = normal_quantile_approx(p);
        let mut x = z + (z * z * z + z) / (4.0 * m);
        if !(x < 0.0 && x.is_finite()) {
            x = -1.0;
        }
        let ln_p = p.ln();
        // bracket: cdf(lo) < p <= cdf(hi)
        let mut hi = 0.0_f64;
        let mut lo = x;
        while self.tail(lo) >= p {
            hi = lo;
            lo *= 4.0;
            if !lo.is_finite() {
                return f64::NEG_INFINITY;
            }
        }
        if self.tail(x) >= p {
            hi = hi.min(x);
        }
        x = x.clamp(lo, hi);
        for _ in 0..200 {
            let c = self.tail(x);
            if c < p {
                lo = lo.max(x);
            } else {
                hi = hi.min(x);
            }
            let g = c.ln() - ln_p;
            let dg = self.pdf(x) / c;
            let mut next = x - g / dg;
            if !(next > lo && next < hi) || !next.is_finite() {
                next = 0.5 * (lo + hi);
            }
            let step = (next - x).abs();
            x = next;
            if step <= 1e-15 * x.abs().max(1e-300) || (hi - lo).abs() <= 1e-15 * x.abs() {
                break;
            }
        }
        x
    }
}

/// Student t CDF with `m > 0` degrees of freedom.
pub fn student_t_cdf(x: f64, m: f64) -> Result<f64> {
    Ok(StudentT::new(m)?.cdf(x))
}

/// Student t quantile for `p` in (0,1) and `m > 0` degrees of freedom.
pub fn student_t_quantile(p: f64, m: f64) -> Result<f64> {
    let t = StudentT::new(m)?;
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!("quantile level must lie in (0,1) (got {p})")));
    }
    Ok(t.quantile(p))
}

/// Rough standard-normal quantile (Abramowitz & Stegun 26.2.23), |error| < 4.5e-4.
/// Only used to seed iterative solvers.
pub(crate) fn normal_quantile_approx(p: f64) -> f64 {
    let (q, sign) = if p < 0.5 { (p, -1.0) } else { (1.0 - p, 1.0) };
    let t = (-2.0 * q.ln()).sqrt();
    let num = 2.515_517 + 0.802_853 * t + 0.010_328 * t * t;
    let den = 1.0 + 1.432_788 * t + 0.189_269 * t * t + 0.001_308 * t * t * t;
    sign * (t - num / den)
}

/// `ln(1 + e^z)` without overflow.
pub(crate) fn ln_1p_exp(z: f64) -> f64 {
    if z > 35.0 {
        z + (-z).exp()
    } else if z < -35.0 {
        z.exp()
    } else {
        z.exp().ln_1p()
    }
}

/// `ln(e^a + e^b)`.
pub(crate) fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}
