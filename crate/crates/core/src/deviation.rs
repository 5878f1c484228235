//! Long orbits of the cover interval exchange and the growth of their
//! homology classes.
//!
//! Visit counts on the doubled alphabet, signed by sheet, stand in for the
//! class of a long leaf closed up by a short path; `Ω̂` maps them to
//! homology. The anti-invariant part grows linearly, the invariant part at
//! the top invariant exponent.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cover::{push_forward, sheet_sign, CoverIet};
use crate::error::{Error, Result};
use crate::homology::intersection_form;
use crate::rauzy::LengthVector;

/// First checkpoint.
pub const T0: u64 = 1_000;
/// Minimum number of checkpoints left after the first decade.
pub const MIN_CHECKPOINTS: usize = 10;
const HIT_TOLERANCE: f64 = 1e-15;
const MAX_RESTARTS: u32 = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: u64,
    pub counts: Vec<u64>,
    /// Supremum over `t' ≤ t` of each tracked norm.
    pub sup: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct DeviationSeries {
    pub cover: CoverIet,
    pub samples: Vec<Sample>,
    /// Restarts after an iterate landed on a discontinuity.
    pub restarts: u32,
}

/// `T₀·2^k` up to `t_max`.
pub fn checkpoints(t_max: u64) -> Vec<u64> {
    std::iter::successors(Some(T0), |&t| t.checked_mul(2)).take_while(|&t| t <= t_max).collect()
}

/// A double-double number `hi + lo`.
#[derive(Debug, Clone, Copy)]
struct Dd {
    hi: f64,
    lo: f64,
}

impl Dd {
    fn add(self, b: Dd) -> Dd {
        let s = self.hi + b.hi;
        let v = s - self.hi;
        let e = (self.hi - (s - v)) + (b.hi - v) + self.lo + b.lo;
        let hi = s + e;
        Dd { hi, lo: e - (hi - s) }
    }

    fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }

    fn of(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }
}

/// A classical interval exchange: each row lists every letter once.
#[derive(Debug, Clone)]
pub struct ClassicalIet {
    starts: Vec<f64>,
    letters: Vec<usize>,
    shift: Vec<Dd>,
    total: f64,
}

impl ClassicalIet {
    pub fn new(top: &[usize], bottom: &[usize], lengths: &[f64]) -> Self {
        let n = lengths.len();
        let mut start_top = vec![Dd::of(0.0); n];
        let mut start_bottom = vec![Dd::of(0.0); n];
        let mut acc = Dd::of(0.0);
        let mut starts = Vec::with_capacity(top.len());
        for &x in top {
            start_top[x] = acc;
            starts.push(acc.hi);
            acc = acc.add(Dd::of(lengths[x]));
        }
        let total = acc.hi;
        let mut acc = Dd::of(0.0);
        for &x in bottom {
            start_bottom[x] = acc;
            acc = acc.add(Dd::of(lengths[x]));
        }
        let shift = (0..n).map(|x| start_bottom[x].add(start_top[x].neg())).collect();
        ClassicalIet { starts, letters: top.to_vec(), shift, total }
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    /// Runs `t_max` steps from `start`, recording counts at `marks`.
    /// `deltas[k][letter]` is the increment of the `k`-th tracked vector per
    /// visit; the supremum of its norm is recorded alongside.
    pub fn orbit_tracked(&self, start: f64, t_max: u64, marks: &[u64], deltas: &[Vec<Vec<f64>>]) -> Result<Vec<Sample>> {
        let n = self.shift.len();
        let mut x = Dd::of(start);
        let mut counts = vec![0u64; n];
        let mut cur: Vec<Vec<f64>> = deltas.iter().map(|d| vec![0.0; d.first().map_or(0, |v| v.len())]).collect();
        let mut sup = vec![0.0f64; deltas.len()];
        let mut out = Vec::with_capacity(marks.len());
        let mut next = 0;
        let tol = HIT_TOLERANCE * self.total;
        for t in 1..=t_max {
            let i = self.starts.partition_point(|&s| s <= x.hi).saturating_sub(1);
            let right = self.starts.get(i + 1).copied().unwrap_or(self.total);
            if x.hi - self.starts[i] < tol || right - x.hi < tol {
                return Err(Error::StartOnOrbitOfDiscontinuity);
            }
            let letter = self.letters[i];
            counts[letter] += 1;
            x = x.add(self.shift[letter]);
            for (k, d) in deltas.iter().enumerate() {
                let mut sq = 0.0;
                for (c, dv) in cur[k].iter_mut().zip(&d[letter]) {
                    *c += dv;
                    sq += *c * *c;
                }
                sup[k] = sup[k].max(sq);
            }
            if next < marks.len() && t == marks[next] {
                out.push(Sample { t, counts: counts.clone(), sup: sup.iter().map(|q| q.sqrt()).collect() });
                next += 1;
            }
        }
        Ok(out)
    }

    /// Counts per letter after `t_max` steps from `start`, recording at `marks`.
    pub fn orbit(&self, start: f64, t_max: u64, marks: &[u64]) -> Result<Vec<Sample>> {
        self.orbit_tracked(start, t_max, marks, &[])
    }
}

/// Iterates the cover exchange from a random start and records visit
/// counts at the checkpoints.
pub fn run_orbit(c: &CoverIet, lengths: &LengthVector, t_max: u64, seed: u64) -> Result<DeviationSeries> {
    if c.base().is_abelian() {
        return Err(Error::AbelianInput);
    }
    let iet = ClassicalIet::new(c.cover_top(), c.cover_bottom(), &lengths.cover_lengths());
    let marks = checkpoints(t_max);
    let last = marks.last().copied().unwrap_or(0);
    let form = intersection_form(c);
    let apply = |v: &[f64]| -> Vec<f64> { form.omega.iter().map(|r| r.iter().zip(v).map(|(&a, b)| a as f64 * b).sum()).collect() };
    let deltas: Vec<Vec<Vec<f64>>> = [true, false]
        .iter()
        .map(|&plus| {
            (0..c.n())
                .map(|x| {
                    let mut e = vec![0.0; c.n()];
                    e[x] = sheet_sign(x) as f64;
                    let (p, m) = split_pm(&e);
                    apply(if plus { &p } else { &m })
                })
                .collect()
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for restarts in 0..MAX_RESTARTS {
        let start = rng.gen::<f64>() * iet.total();
        match iet.orbit_tracked(start, last, &marks, &deltas) {
            Ok(samples) => return Ok(DeviationSeries { cover: c.clone(), samples, restarts }),
            Err(Error::StartOnOrbitOfDiscontinuity) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::StartOnOrbitOfDiscontinuity)
}

/// Norms of the projected classes at one checkpoint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormRow {
    pub t: u64,
    pub plus: f64,
    pub minus: f64,
    /// Suprema of the two norms over the orbit up to `t`.
    pub sup_plus: f64,
    pub sup_minus: f64,
    /// `‖push_forward(c_T)‖ / T`.
    pub base: f64,
}

/// Parity-`±` parts of a cover vector.
fn split_pm(c: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut plus = vec![0.0; c.len()];
    let mut minus = vec![0.0; c.len()];
    for a in 0..c.len() / 2 {
        let (p, q) = (c[2 * a], c[2 * a + 1]);
        plus[2 * a] = (p + q) / 2.0;
        plus[2 * a + 1] = (p + q) / 2.0;
        minus[2 * a] = (p - q) / 2.0;
        minus[2 * a + 1] = (q - p) / 2.0;
    }
    (plus, minus)
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

impl DeviationSeries {
    /// Sheet-signed counts of one sample.
    pub fn signed_counts(&self, k: usize) -> Vec<f64> {
        self.samples[k].counts.iter().enumerate().map(|(x, &c)| (sheet_sign(x) * c as i64) as f64).collect()
    }

    pub fn norms(&self) -> Vec<NormRow> {
        let form = intersection_form(&self.cover);
        let apply = |v: &[f64]| -> Vec<f64> { form.omega.iter().map(|r| r.iter().zip(v).map(|(&a, b)| a as f64 * b).sum()).collect() };
        (0..self.samples.len())
            .map(|k| {
                let c = self.signed_counts(k);
                let (plus, minus) = split_pm(&c);
                let sample = &self.samples[k];
                let sup = |i: usize| sample.sup.get(i).copied().unwrap_or(f64::NAN);
                NormRow {
                    t: sample.t,
                    plus: norm(&apply(&plus)),
                    minus: norm(&apply(&minus)),
                    sup_plus: sup(0),
                    sup_minus: sup(1),
                    base: norm(&push_forward(&c)) / sample.t as f64,
                }
            })
            .collect()
    }

    /// CSV with columns `T,plus,minus,sup_plus,sup_minus,base`.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["T", "plus", "minus", "sup_plus", "sup_minus", "base"]).map_err(io_err)?;
        for r in self.norms() {
            w.serialize((r.t, r.plus, r.minus, r.sup_plus, r.sup_minus, r.base)).map_err(io_err)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
    }
}

fn io_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope_minus_top: f64,
    pub slope_plus_top: f64,
    pub r_squared_minus: f64,
    pub r_squared_plus: f64,
    pub base_asymptotic_norm: f64,
    pub checkpoints_used: usize,
    pub rows: Vec<NormRow>,
}

/// Least-squares slope and `r²` of `y` against `x`.
fn regress(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r2 = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    (slope, r2)
}

fn running_max(v: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut m = 0.0f64;
    v.map(|x| {
        m = m.max(x);
        m
    })
    .collect()
}

/// Log–log slopes of the running maxima of `‖P±c_T‖`, skipping the first
/// decade of checkpoints. The maxima are taken over every step of the orbit
/// when the series tracked them, otherwise over the checkpoints.
pub fn fit_slopes(series: &DeviationSeries) -> Result<SlopeFit> {
    let rows = series.norms();
    let tracked = rows.iter().all(|r| r.sup_plus.is_finite() && r.sup_minus.is_finite());
    let (plus, minus) = if tracked {
        (rows.iter().map(|r| r.sup_plus).collect::<Vec<_>>(), rows.iter().map(|r| r.sup_minus).collect::<Vec<_>>())
    } else {
        (running_max(rows.iter().map(|r| r.plus)), running_max(rows.iter().map(|r| r.minus)))
    };
    let keep: Vec<usize> = (0..rows.len()).filter(|&k| rows[k].t >= 10 * T0 && plus[k] > 0.0 && minus[k] > 0.0).collect();
    if keep.len() < MIN_CHECKPOINTS {
        return Err(Error::InsufficientCheckpoints { got: keep.len(), need: MIN_CHECKPOINTS });
    }
    let lt: Vec<f64> = keep.iter().map(|&k| (rows[k].t as f64).ln()).collect();
    let lp: Vec<f64> = keep.iter().map(|&k| plus[k].ln()).collect();
    let lm: Vec<f64> = keep.iter().map(|&k| minus[k].ln()).collect();
    let (slope_plus_top, r_squared_plus) = regress(&lt, &lp);
    let (slope_minus_top, r_squared_minus) = regress(&lt, &lm);
    Ok(SlopeFit {
        slope_minus_top,
        slope_plus_top,
        r_squared_minus,
        r_squared_plus,
        base_asymptotic_norm: rows.last().map_or(0.0, |r| r.base),
        checkpoints_used: keep.len(),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn checkpoint_count() {
        assert_eq!(checkpoints(100_000_000).len(), 17);
        assert_eq!(checkpoints(999), Vec::<u64>::new());
    }

    #[test]
    fn golden_rotation_has_bounded_deviation() {
        let phi = (5f64.sqrt() - 1.0) / 2.0;
        let iet = ClassicalIet::new(&[0, 1], &[1, 0], &[phi, 1.0 - phi]);
        let marks: Vec<u64> = (1..=1000).map(|k| k * 1000).collect();
        let samples = iet.orbit(0.1234, 1_000_000, &marks).unwrap();
        for s in &samples {
            assert_eq!(s.counts.iter().sum::<u64>(), s.t);
            assert!((s.counts[0] as f64 - s.t as f64 * phi).abs() < 3.0);
        }
    }
}
