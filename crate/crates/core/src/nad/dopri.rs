//! Dormand–Prince 5(4) with error-controlled steps. Steps whose stages leave the
//! admissible region are halved until they fit, which lands the final state on
//! the region's boundary to within `h_min`.

const A2: f64 = 1.0 / 5.0;
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0];
const A6: [f64; 5] = [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0];
const B5: [f64; 6] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0];
const B4: [f64; 7] =
    [5179.0 / 57600.0, 0.0, 7571.0 / 16695.0, 393.0 / 640.0, -92097.0 / 339200.0, 187.0 / 2100.0, 1.0 / 40.0];
const C: [f64; 6] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0];

#[derive(Clone, Copy, Debug)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
    pub h_max: f64,
    pub h_min: f64,
    pub max_steps: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stop {
    /// The terminal predicate fired on an accepted step.
    Terminal,
    /// No admissible step longer than `h_min` exists.
    Boundary,
    /// Error control asked for a step below `h_min` inside the admissible region.
    Underflow,
    End,
    MaxSteps,
}

#[derive(Clone, Copy, Debug)]
pub struct Run<const N: usize> {
    pub t: f64,
    pub z: [f64; N],
    pub stop: Stop,
}

fn combine<const N: usize>(z: &[f64; N], h: f64, ks: &[[f64; N]], w: &[f64]) -> [f64; N] {
    let mut out = *z;
    for (k, &wk) in ks.iter().zip(w) {
        if wk != 0.0 {
            for i in 0..N {
                out[i] += h * wk * k[i];
            }
        }
    }
    out
}

struct Trial<const N: usize> {
    z: [f64; N],
    k7: [f64; N],
    err: f64,
}

fn trial<const N: usize>(
    f: &impl Fn(f64, &[f64; N]) -> Option<[f64; N]>,
    t: f64,
    z: &[f64; N],
    k1: &[f64; N],
    h: f64,
    tol: &Tolerances,
) -> Option<Trial<N>> {
    let mut ks: Vec<[f64; N]> = Vec::with_capacity(7);
    ks.push(*k1);
    let rows: [&[f64]; 5] = [&[A2], &A3, &A4, &A5, &A6];
    for (s, row) in rows.iter().enumerate() {
        let zs = combine(z, h, &ks, row);
        ks.push(f(t + C[s + 1] * h, &zs)?);
    }
    let z5 = combine(z, h, &ks, &B5);
    let k7 = f(t + h, &z5)?;
    ks.push(k7);
    let z4 = combine(z, h, &ks, &B4);
    let mut acc = 0.0;
    for i in 0..N {
        let sc = tol.atol + tol.rtol * z[i].abs().max(z5[i].abs());
        acc += ((z5[i] - z4[i]) / sc).powi(2);
    }
    let err = (acc / N as f64).sqrt();
    err.is_finite().then_some(Trial { z: z5, k7, err })
}

/// Integrates z′ = f(t, z) from `t0` towards `t_end`.
///
/// `f` returns `None` outside its domain; `admissible` is checked on every
/// candidate step end. `observe` sees the initial point and every accepted step.
pub fn integrate<const N: usize>(
    f: impl Fn(f64, &[f64; N]) -> Option<[f64; N]>,
    admissible: impl Fn(f64, &[f64; N]) -> bool,
    terminal: impl Fn(f64, &[f64; N]) -> bool,
    t0: f64,
    z0: [f64; N],
    t_end: f64,
    tol: &Tolerances,
    mut observe: impl FnMut(f64, &[f64; N]),
) -> Run<N> {
    let (mut t, mut z) = (t0, z0);
    observe(t, &z);
    let Some(mut k1) = f(t, &z) else {
        return Run { t, z, stop: Stop::Boundary };
    };
    let mut h = (1e-3 * (t_end - t0)).min(tol.h_max);
    let mut steps = 0usize;
    while t < t_end {
        if steps >= tol.max_steps {
            return Run { t, z, stop: Stop::MaxSteps };
        }
        h = h.min(t_end - t);
        let tr = trial(&f, t, &z, &k1, h, tol).filter(|tr| admissible(t + h, &tr.z));
        let Some(tr) = tr else {
            h *= 0.5;
            if h < tol.h_min {
                return Run { t, z, stop: Stop::Boundary };
            }
            continue;
        };
        if tr.err <= 1.0 {
            t += h;
            z = tr.z;
            k1 = tr.k7;
            steps += 1;
            observe(t, &z);
            if terminal(t, &z) {
                return Run { t, z, stop: Stop::Terminal };
            }
            let grow = if tr.err == 0.0 { 5.0 } else { (0.9 * tr.err.powf(-0.2)).clamp(0.2, 5.0) };
            h = (h * grow).min(tol.h_max);
        } else {
            h *= (0.9 * tr.err.powf(-0.2)).clamp(0.2, 1.0);
            if h < tol.h_min {
                return Run { t, z, stop: Stop::Underflow };
            }
        }
    }
    Run { t, z, stop: Stop::End }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> Tolerances {
        Tolerances { rtol: 1e-10, atol: 1e-12, h_max: 0.1, h_min: 1e-14, max_steps: 100_000 }
    }

    #[test]
    fn exponential_decay_to_high_accuracy() {
        let run = integrate(|_, z: &[f64; 1]| Some([-z[0]]), |_, _| true, |_, _| false, 0.0, [1.0], 3.0, &tol(), |_, _| {});
        assert_eq!(run.stop, Stop::End);
        assert!((run.z[0] - (-3.0f64).exp()).abs() < 1e-9);
    }

    #[test]
    fn harmonic_oscillator_conserves_energy() {
        let run = integrate(
            |_, z: &[f64; 2]| Some([z[1], -z[0]]),
            |_, _| true,
            |_, _| false,
            0.0,
            [1.0, 0.0],
            10.0,
            &tol(),
            |_, _| {},
        );
        assert!((run.z[0] - 10f64.cos()).abs() < 1e-8);
        assert!((run.z[0].powi(2) + run.z[1].powi(2) - 1.0).abs() < 1e-8);
    }

    #[test]
    fn admissible_region_stops_on_its_boundary() {
        // z = 1 − t leaves z > 0 at t = 1.
        let run = integrate(|_, _: &[f64; 1]| Some([-1.0]), |_, z| z[0] > 0.0, |_, _| false, 0.0, [1.0], 5.0, &tol(), |_, _| {});
        assert_eq!(run.stop, Stop::Boundary);
        assert!((run.t - 1.0).abs() < 1e-12, "stopped at {}", run.t);
    }

    #[test]
    fn terminal_predicate_fires() {
        let run = integrate(|_, _: &[f64; 1]| Some([1.0]), |_, _| true, |_, z| z[0] >= 0.5, 0.0, [0.0], 5.0, &tol(), |_, _| {});
        assert_eq!(run.stop, Stop::Terminal);
        assert!(run.z[0] >= 0.5 && run.z[0] < 0.7);
    }

    #[test]
    fn undefined_start_is_a_boundary() {
        let run = integrate(|_, _: &[f64; 1]| None, |_, _| true, |_, _| false, 0.0, [0.0], 1.0, &tol(), |_, _| {});
        assert_eq!(run.stop, Stop::Boundary);
        assert_eq!(run.t, 0.0);
    }
}
