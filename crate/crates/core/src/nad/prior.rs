use crate::error::{Error, Result};

const CELLS: usize = 4096;

fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Normalized prior density with its CDF tabulated on a fine uniform grid.
///
/// Each cell's mass comes from adaptive Simpson quadrature; between nodes the
/// CDF is the cubic Hermite interpolant with the density as slope.
pub(crate) struct PriorTable<'a> {
    f: &'a dyn Fn(f64) -> f64,
    lo: f64,
    h: f64,
    dens: Vec<f64>,
    cdf: Vec<f64>,
    total: f64,
}

impl<'a> PriorTable<'a> {
    pub fn new(f: &'a dyn Fn(f64) -> f64, lo: f64, hi: f64) -> Result<Self> {
        let h = (hi - lo) / CELLS as f64;
        let xs: Vec<f64> = (0..=CELLS).map(|k| lo + h * k as f64).collect();
        let raw: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
        if let Some((k, v)) = raw.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::InvalidPrior(format!("density must be nonnegative and finite, got {v} at x = {}", xs[k])));
        }
        let mut cdf = Vec::with_capacity(CELLS + 1);
        cdf.push(0.0);
        for k in 0..CELLS {
            let (a, b) = (xs[k], xs[k + 1]);
            let fm = f(0.5 * (a + b));
            let whole = h / 6.0 * (raw[k] + 4.0 * fm + raw[k + 1]);
            let mass = simpson(f, a, b, raw[k], fm, raw[k + 1], whole, 1e-15 * whole.abs().max(1e-300), 20);
            cdf.push(cdf[k] + mass);
        }
        let total = cdf[CELLS];
        if !(total > 0.0) {
            return Err(Error::InvalidPrior("density integrates to zero on the state range".into()));
        }
        cdf.iter_mut().for_each(|c| *c /= total);
        let dens = raw.iter().map(|v| v / total).collect();
        Ok(PriorTable { f, lo, h, dens, cdf, total })
    }

    /// Smallest tabulated density value.
    pub fn min_density(&self) -> f64 {
        self.dens.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn density(&self, x: f64) -> f64 {
        (self.f)(x) / self.total
    }

    pub fn hi(&self) -> f64 {
        self.lo + self.h * CELLS as f64
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= self.lo {
            return 0.0;
        }
        if x >= self.hi() {
            return 1.0;
        }
        let k = (((x - self.lo) / self.h) as usize).min(CELLS - 1);
        let s = (x - self.lo - self.h * k as f64) / self.h;
        let (s2, s3) = (s * s, s * s * s);
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        h00 * self.cdf[k] + h10 * self.h * self.dens[k] + h01 * self.cdf[k + 1] + h11 * self.h * self.dens[k + 1]
    }

    pub fn quantile(&self, p: f64) -> f64 {
        let p = p.clamp(0.0, 1.0);
        crate::model::bisect(|x| self.cdf(x) - p, self.lo, self.hi(), true)
    }

    /// ∫ g·f over the state range, with composite Simpson on the table cells.
    pub fn expect(&self, g: impl Fn(f64) -> f64) -> f64 {
        let mut acc = 0.0;
        for k in 0..CELLS {
            let a = self.lo + self.h * k as f64;
            let m = a + 0.5 * self.h;
            let b = a + self.h;
            acc += g(a) * self.dens[k] + 4.0 * g(m) * self.density(m) + g(b) * self.dens[k + 1];
        }
        acc * self.h / 6.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_density_cdf_matches_closed_form() {
        let e = std::f64::consts::E;
        let f = |x: f64| 1.0 / (2.0 * x);
        let t = PriorTable::new(&f, 1.0 / e, e).unwrap();
        for x in [0.4, 0.9, 1.0, 1.7, 2.5] {
            assert!((t.cdf(x) - 0.5 * (x.ln() + 1.0)).abs() < 1e-12, "x = {x}");
        }
        assert!((t.quantile(0.5) - 1.0).abs() < 1e-10);
        assert!((t.expect(|x| x) - (e - 1.0 / e) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn unnormalized_density_is_normalized() {
        let f = |x: f64| 3.0 * (1.0 + x);
        let t = PriorTable::new(&f, 0.0, 1.0).unwrap();
        assert!((t.cdf(1.0) - 1.0).abs() < 1e-15);
        assert!((t.cdf(0.5) - (0.5 + 0.125) / 1.5).abs() < 1e-12);
        assert!((t.density(0.0) - 1.0 / 1.5).abs() < 1e-12);
    }

    #[test]
    fn rejects_negative_density() {
        let f = |x: f64| x - 0.5;
        assert!(matches!(PriorTable::new(&f, 0.0, 1.0), Err(Error::InvalidPrior(_))));
        let g = |x: f64| x;
        assert_eq!(PriorTable::new(&g, 0.0, 1.0).unwrap().min_density(), 0.0);
    }
}
