use rayon::prelude::*;
use serde::Serialize;

use crate::model::Problem;

const DIVISION_GUARD: f64 = 1e-12;
const STRICT_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SdpdLabel {
    DippedStrict,
    PeakedStrict,
    Dipped,
    Peaked,
    Neither,
}

impl SdpdLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            SdpdLabel::DippedStrict => "dipped_strict",
            SdpdLabel::PeakedStrict => "peaked_strict",
            SdpdLabel::Dipped => "dipped",
            SdpdLabel::Peaked => "peaked",
            SdpdLabel::Neither => "neither",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Ratio {
    /// u_yx(y, x) / u_x(y, x).
    ReceiverCurvature,
    /// V_yx(y2, x) / u_x(y1, x).
    Cross,
}

/// Adjacent grid states where a ratio moves the wrong way, or fails to move strictly.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SdpdWitness {
    pub ratio: Ratio,
    pub y1: f64,
    pub y2: f64,
    pub xa: f64,
    pub xb: f64,
    pub increment: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SdpdReport {
    pub label: SdpdLabel,
    /// Both ratios weakly increasing in x.
    pub dipped: bool,
    /// Both ratios weakly decreasing in x.
    pub peaked: bool,
    pub receiver_strictly_increasing: bool,
    pub cross_strictly_increasing: bool,
    pub receiver_strictly_decreasing: bool,
    pub cross_strictly_decreasing: bool,
    /// Some |u_x| fell below 1e−12; affected points were skipped and the label forced to neither.
    pub division_guard: bool,
    pub witness: Option<SdpdWitness>,
}

#[derive(Clone, Copy, Default)]
struct Tally {
    inc: bool,
    dec: bool,
    strict_inc: bool,
    strict_dec: bool,
    guard: bool,
    // First offending increment for each direction.
    not_inc: Option<SdpdWitness>,
    not_dec: Option<SdpdWitness>,
    not_strict_inc: Option<SdpdWitness>,
    not_strict_dec: Option<SdpdWitness>,
}

impl Tally {
    fn fresh() -> Self {
        Tally { inc: true, dec: true, strict_inc: true, strict_dec: true, ..Default::default() }
    }

    fn merge(mut self, o: Tally) -> Tally {
        self.inc &= o.inc;
        self.dec &= o.dec;
        self.strict_inc &= o.strict_inc;
        self.strict_dec &= o.strict_dec;
        self.guard |= o.guard;
        self.not_inc = self.not_inc.or(o.not_inc);
        self.not_dec = self.not_dec.or(o.not_dec);
        self.not_strict_inc = self.not_strict_inc.or(o.not_strict_inc);
        self.not_strict_dec = self.not_strict_dec.or(o.not_strict_dec);
        self
    }

    /// Records the increments of one ratio along the state grid.
    fn scan(&mut self, ratio: Ratio, y1: f64, y2: f64, xs: &[f64], r: &[Option<f64>], tol: f64) {
        let mut prev: Option<(f64, f64)> = None;
        for (&x, v) in xs.iter().zip(r) {
            let Some(v) = *v else {
                self.guard = true;
                prev = None;
                continue;
            };
            if let Some((xa, va)) = prev {
                let d = v - va;
                let w = SdpdWitness { ratio, y1, y2, xa, xb: x, increment: d };
                if d < -tol {
                    self.inc = false;
                    self.not_inc.get_or_insert(w);
                }
                if d > tol {
                    self.dec = false;
                    self.not_dec.get_or_insert(w);
                }
                if d <= tol {
                    self.strict_inc = false;
                    self.not_strict_inc.get_or_insert(w);
                }
                if d >= -tol {
                    self.strict_dec = false;
                    self.not_strict_dec.get_or_insert(w);
                }
            }
            prev = Some((x, v));
        }
    }
}

fn ratio(num: f64, den: f64) -> Option<f64> {
    (den.abs() >= DIVISION_GUARD).then(|| num / den)
}

/// Grid check of the monotonicity in x of u_yx/u_x (per action) and of
/// V_yx(y2, ·)/u_x(y1, ·) (per action pair y1 ≤ y2).
///
/// Increments between adjacent states count as strict when they exceed 1e−8 times
/// the larger of 1 and the largest magnitude of that ratio. When both ratios are weakly monotone
/// in both directions the label is neither, with `dipped` and `peaked` both set.
pub fn check_sdpd_sufficient(problem: &Problem) -> SdpdReport {
    let xs = problem.states().points();
    let ys = problem.actions().points();
    let ux: Vec<Vec<f64>> = ys.iter().map(|&y| xs.iter().map(|&x| problem.u_x(y, x)).collect()).collect();
    let r1: Vec<Vec<Option<f64>>> = ys
        .iter()
        .zip(&ux)
        .map(|(&y, row)| xs.iter().zip(row).map(|(&x, &d)| ratio(problem.u_yx(y, x), d)).collect())
        .collect();
    let vyx: Vec<Vec<f64>> = ys.iter().map(|&y| xs.iter().map(|&x| problem.v_yx(y, x)).collect()).collect();

    let mag = |it: &mut dyn Iterator<Item = f64>| it.fold(0.0f64, |a, b| a.max(b.abs()));
    let tol1 = STRICT_TOL * mag(&mut r1.iter().flatten().flatten().copied()).max(1.0);
    let vyx_max = mag(&mut vyx.iter().flatten().copied());
    let ux_min = ux.iter().flatten().filter(|d| d.abs() >= DIVISION_GUARD).fold(f64::INFINITY, |a, b| a.min(b.abs()));
    let tol2 = STRICT_TOL * (vyx_max / ux_min).max(1.0);

    let receiver = (0..ys.len())
        .into_par_iter()
        .map(|j| {
            let mut t = Tally::fresh();
            t.scan(Ratio::ReceiverCurvature, ys[j], ys[j], xs, &r1[j], tol1);
            t
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(Tally::fresh(), Tally::merge);
    let cross = (0..ys.len())
        .into_par_iter()
        .map(|a| {
            let mut t = Tally::fresh();
            for b in a..ys.len() {
                let r: Vec<Option<f64>> = (0..xs.len()).map(|i| ratio(vyx[b][i], ux[a][i])).collect();
                t.scan(Ratio::Cross, ys[a], ys[b], xs, &r, tol2);
            }
            t
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(Tally::fresh(), Tally::merge);

    let guard = receiver.guard || cross.guard;
    let dipped = receiver.inc && cross.inc && !guard;
    let peaked = receiver.dec && cross.dec && !guard;
    let strict_inc = receiver.strict_inc || cross.strict_inc;
    let strict_dec = receiver.strict_dec || cross.strict_dec;
    let (label, witness) = if guard {
        (SdpdLabel::Neither, None)
    } else if dipped && peaked {
        (SdpdLabel::Neither, receiver.not_strict_inc.or(cross.not_strict_inc))
    } else if dipped && strict_inc {
        (SdpdLabel::DippedStrict, None)
    } else if peaked && strict_dec {
        (SdpdLabel::PeakedStrict, None)
    } else if dipped {
        (SdpdLabel::Dipped, receiver.not_strict_inc.or(cross.not_strict_inc))
    } else if peaked {
        (SdpdLabel::Peaked, receiver.not_strict_dec.or(cross.not_strict_dec))
    } else {
        (SdpdLabel::Neither, receiver.not_inc.or(cross.not_inc))
    };
    SdpdReport {
        label,
        dipped,
        peaked,
        receiver_strictly_increasing: receiver.strict_inc && !guard,
        cross_strictly_increasing: cross.strict_inc && !guard,
        receiver_strictly_decreasing: receiver.strict_dec && !guard,
        cross_strictly_decreasing: cross.strict_dec && !guard,
        division_guard: guard,
        witness,
    }
}
