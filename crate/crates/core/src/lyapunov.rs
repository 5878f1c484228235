//! Lyapunov spectra of the cover cocycle by iterated Gram–Schmidt.
//!
//! Tracked vectors evolve like lengths (`u ← B⁻¹ u` per move). In base
//! letter coordinates the anti-invariant block updates as `u_w −= u_l` and
//! the invariant block as `u_w −= (−1)^{s_w+s_l} u_l`. Both blocks carry
//! relative classes; the absolute part is recovered by orthogonal
//! projection onto the image of the block intersection form, whose
//! orthogonal complement is the space of coboundaries.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cover::{cover_index, Parity};
use crate::error::{Error, Result};
use crate::genperm::{stratum_of, GeneralizedPermutation};
use crate::homology::intersection_form;
use crate::linalg::{mul, nullspace, transpose, IntMatrix};
use crate::rauzy::{InductionState, LengthVector, MoveRecord};
use crate::strata::stratum_info;

/// A family of `k` vectors in `ℝ^dim`, stored coordinate-major so a letter
/// update touches one contiguous row.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub dim: usize,
    pub k: usize,
    pub data: Vec<f64>,
}

impl Frame {
    pub fn zeros(dim: usize, k: usize) -> Self {
        Frame { dim, k, data: vec![0.0; dim * k] }
    }

    pub fn random<R: Rng + ?Sized>(dim: usize, k: usize, rng: &mut R) -> Self {
        Frame { dim, k, data: (0..dim * k).map(|_| rng.gen_range(-1.0..1.0)).collect() }
    }

    /// `row_w −= s · row_l`.
    #[inline]
    pub fn row_sub(&mut self, w: usize, l: usize, s: f64) {
        let k = self.k;
        if k == 0 {
            return;
        }
        let (wi, li) = (w * k, l * k);
        for j in 0..k {
            let x = self.data[li + j];
            self.data[wi + j] -= s * x;
        }
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.dim).map(|i| self.data[i * self.k + j]).collect()
    }

    fn set_column(&mut self, j: usize, v: &[f64]) {
        for (i, x) in v.iter().enumerate() {
            self.data[i * self.k + j] = *x;
        }
    }

    /// Applies a dense matrix to every vector.
    pub fn apply(&mut self, m: &[f64]) {
        let (n, k) = (self.dim, self.k);
        let mut out = vec![0.0; n * k];
        for i in 0..n {
            for l in 0..n {
                let a = m[i * n + l];
                if a == 0.0 {
                    continue;
                }
                for j in 0..k {
                    out[i * k + j] += a * self.data[l * k + j];
                }
            }
        }
        self.data = out;
    }

    /// Modified Gram–Schmidt; adds `ln ‖v_j^⊥‖` to `logs[j]`.
    pub fn orthonormalize(&mut self, logs: &mut [f64]) -> Result<()> {
        let mut cols: Vec<Vec<f64>> = (0..self.k).map(|j| self.column(j)).collect();
        for j in 0..self.k {
            for i in 0..j {
                let (done, rest) = cols.split_at_mut(j);
                let c = dot(&done[i], &rest[0]);
                for (x, y) in rest[0].iter_mut().zip(&done[i]) {
                    *x -= c * y;
                }
            }
            let norm = dot(&cols[j], &cols[j]).sqrt();
            if norm <= 0.0 || !norm.is_finite() {
                return Err(Error::Singular);
            }
            logs[j] += norm.ln();
            cols[j].iter_mut().for_each(|x| *x /= norm);
        }
        for (j, c) in cols.iter().enumerate() {
            self.set_column(j, c);
        }
        Ok(())
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// A source of cocycle matrices acting on one or more blocks of tracked
/// vectors.
pub trait CocycleStream {
    /// Ambient dimension of each block.
    fn block_dims(&self) -> Vec<usize>;
    /// Dimension of the space the tracked vectors represent in each block.
    fn block_ranks(&self) -> Vec<usize> {
        self.block_dims()
    }
    /// Advances one acceleration step, updating every frame.
    fn advance(&mut self, frames: &mut [Frame]) -> Result<()>;
    /// Replaces tracked vectors by canonical representatives of their
    /// classes at the current state.
    fn reduce(&mut self, _frames: &mut [Frame]) {}
    /// Number of degenerate steps that were resampled.
    fn resamples(&self) -> u64 {
        0
    }
    /// Elementary moves performed.
    fn moves(&self) -> u64 {
        0
    }
}

/// A stream whose every matrix is the identity.
pub struct IdentityStream {
    pub dims: Vec<usize>,
}

impl CocycleStream for IdentityStream {
    fn block_dims(&self) -> Vec<usize> {
        self.dims.clone()
    }

    fn advance(&mut self, _frames: &mut [Frame]) -> Result<()> {
        Ok(())
    }
}

/// A constant matrix acting on a single block.
pub struct FixedMatrixStream {
    dim: usize,
    matrix: Vec<f64>,
}

impl CocycleStream for FixedMatrixStream {
    fn block_dims(&self) -> Vec<usize> {
        vec![self.dim]
    }

    fn advance(&mut self, frames: &mut [Frame]) -> Result<()> {
        frames[0].apply(&self.matrix);
        Ok(())
    }
}

/// Which coordinates the induction stream tracks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Route {
    /// Two base-coordinate blocks: invariant, then anti-invariant.
    Split,
    /// One block in sheet-signed cover coordinates.
    Unsplit,
}

/// Radical of the form `omega` restricted to `constraint^⊥`: the vectors
/// `x ⊥ constraint` with `omega x ∈ span(constraint)`.
fn radical(omega: &IntMatrix, constraint: Option<&[i64]>) -> Vec<Vec<i64>> {
    let n = omega.len();
    match constraint {
        None => nullspace(omega, n),
        Some(c) => {
            let n_rows = nullspace(&[c.to_vec()], n);
            let n_cols = transpose(&n_rows);
            let reduced = mul(&mul(&n_rows, omega), &n_cols);
            nullspace(&reduced, n_rows.len()).iter().map(|y| crate::linalg::mul_vec(&n_cols, y)).collect()
        }
    }
}

/// Rauzy–Veech–Zorich induction from random lengths.
///
/// Each block carries, besides the tracked frame, an integer basis of its
/// coboundaries. Coboundaries are permuted among themselves by the
/// induction, so that basis evolves by the same row operations and stays
/// small and exact. Reduction subtracts the components along the current
/// length constraint and along the coboundaries.
pub struct InductionStream {
    state: InductionState,
    rng: ChaCha8Rng,
    route: Route,
    coboundaries: Vec<Frame>,
    ranks: Vec<usize>,
    resamples: u64,
    moves: u64,
}

fn apply_move(route: Route, m: &MoveRecord, frames: &mut [Frame]) {
    let s = m.twist();
    match route {
        Route::Split => {
            frames[0].row_sub(m.winner, m.loser, s);
            frames[1].row_sub(m.winner, m.loser, 1.0);
        }
        Route::Unsplit => {
            let w = cover_index(m.winner, m.winner_bit);
            let l = cover_index(m.loser, m.loser_bit);
            frames[0].row_sub(w, l, s);
            frames[0].row_sub(w ^ 1, l ^ 1, s);
        }
    }
}

fn frame_of(dim: usize, vectors: &[Vec<i64>]) -> Frame {
    let mut f = Frame::zeros(dim, vectors.len());
    for (j, v) in vectors.iter().enumerate() {
        let col: Vec<f64> = v.iter().map(|&x| x as f64).collect();
        f.set_column(j, &col);
    }
    f
}

impl InductionStream {
    pub fn new(p: &GeneralizedPermutation, route: Route, seed: u64) -> Result<Self> {
        if p.is_abelian() {
            return Err(Error::AbelianInput);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let lengths = LengthVector::random(p, &mut rng);
        let state = InductionState::new(p, lengths)?;
        let cover = state.cover();
        let form = intersection_form(&cover);
        let d = state.d();
        let (coboundaries, ranks) = match route {
            Route::Split => {
                let block = |sign: i64| -> IntMatrix {
                    (0..d)
                        .map(|a| {
                            (0..d)
                                .map(|b| form.raw[cover_index(a, 0)][cover_index(b, 0)] + sign * form.raw[cover_index(a, 0)][cover_index(b, 1)])
                                .collect()
                        })
                        .collect()
                };
                let kp = radical(&block(1), None);
                let c = imbalance(&state);
                let km = radical(&block(-1), if c.iter().any(|&x| x != 0) { Some(&c) } else { None });
                let rm = d - km.len() - usize::from(c.iter().any(|&x| x != 0));
                (vec![frame_of(d, &kp), frame_of(d, &km)], vec![d - kp.len(), rm])
            }
            Route::Unsplit => {
                let r = &form.relation;
                let nz = r.iter().any(|&x| x != 0);
                let k = radical(&form.raw, if nz { Some(r) } else { None });
                (vec![frame_of(2 * d, &k)], vec![2 * d - k.len() - usize::from(nz)])
            }
        };
        let expected = {
            let info = stratum_info(&stratum_of(p));
            match route {
                Route::Split => vec![info.dim_invariant as usize, info.dim_anti_invariant as usize],
                Route::Unsplit => vec![2 * info.cover_genus as usize],
            }
        };
        for (got, want) in ranks.iter().zip(&expected) {
            if got != want {
                return Err(Error::RankMismatch { what: "absolute cohomology block".into(), got: *got, expected: *want });
            }
        }
        Ok(InductionStream { state, rng, route, coboundaries, ranks, resamples: 0, moves: 0 })
    }

    pub fn state(&self) -> &InductionState {
        &self.state
    }

    /// Current length constraint of each block.
    fn constraints(&self) -> Vec<Vec<f64>> {
        match self.route {
            Route::Split => vec![Vec::new(), imbalance(&self.state).iter().map(|&x| x as f64).collect()],
            Route::Unsplit => vec![self.state.cover().relation().iter().map(|&x| x as f64).collect()],
        }
    }
}

/// `c_α` = occurrences of `α` in the top row minus those in the bottom row.
fn imbalance(state: &InductionState) -> Vec<i64> {
    let mut c = vec![0i64; state.d()];
    for &a in state.top() {
        c[a] += 1;
    }
    for &a in state.bottom() {
        c[a] -= 1;
    }
    c
}

fn orthonormal_columns(f: &Frame) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    for j in 0..f.k {
        let mut w = f.column(j);
        for _ in 0..2 {
            for u in &out {
                let c = dot(u, &w);
                for (x, y) in w.iter_mut().zip(u) {
                    *x -= c * y;
                }
            }
        }
        let n = dot(&w, &w).sqrt();
        if n > 1e-9 {
            w.iter_mut().for_each(|x| *x /= n);
            out.push(w);
        }
    }
    out
}

impl CocycleStream for InductionStream {
    fn block_dims(&self) -> Vec<usize> {
        match self.route {
            Route::Split => vec![self.state.d(), self.state.d()],
            Route::Unsplit => vec![2 * self.state.d()],
        }
    }

    fn block_ranks(&self) -> Vec<usize> {
        self.ranks.clone()
    }

    fn advance(&mut self, frames: &mut [Frame]) -> Result<()> {
        loop {
            let route = self.route;
            let mut count = 0u64;
            let cob = &mut self.coboundaries;
            let res = self.state.accelerate_with(|m: &MoveRecord| {
                count += 1;
                apply_move(route, m, frames);
                apply_move(route, m, cob);
            });
            self.moves += count;
            match res {
                Ok(_) => return Ok(()),
                Err(Error::TieLengths) | Err(Error::WinOverflow { .. }) | Err(Error::LengthUnderflow) => {
                    self.resamples += 1;
                    self.state.resample_lengths(&mut self.rng);
                    if count > 0 {
                        return Ok(());
                    }
                }
                Err(e) => return Err(e),
            }
        }
    }

    fn reduce(&mut self, frames: &mut [Frame]) {
        let constraints = self.constraints();
        for (b, f) in frames.iter_mut().enumerate() {
            let mut basis = Vec::new();
            let c = &constraints[b];
            let cc = dot(c, c);
            if cc > 0.0 {
                basis.push(c.iter().map(|x| x / cc.sqrt()).collect::<Vec<f64>>());
            }
            basis.extend(orthonormal_columns(&self.coboundaries[b]));
            for j in 0..f.k {
                let mut v = f.column(j);
                for u in &basis {
                    let t = dot(u, &v);
                    for (x, y) in v.iter_mut().zip(u) {
                        *x -= t * y;
                    }
                }
                f.set_column(j, &v);
            }
        }
    }

    fn resamples(&self) -> u64 {
        self.resamples
    }

    fn moves(&self) -> u64 {
        self.moves
    }
}

/// Schedule of one Gram–Schmidt run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Schedule {
    pub steps: u64,
    pub reorth_every: u64,
    pub burn_in: u64,
    pub batch_count: usize,
}

/// Raw accumulated logarithms of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct EngineOutput {
    /// `[batch][block][vector]`.
    pub batch_logs: Vec<Vec<Vec<f64>>>,
    /// `[batch]`: acceleration steps counted in the batch.
    pub batch_steps: Vec<u64>,
    pub frames: Vec<Frame>,
    pub resamples: u64,
    pub moves: u64,
}

impl EngineOutput {
    /// Total logs per block and vector.
    pub fn totals(&self) -> Vec<Vec<f64>> {
        let mut t: Vec<Vec<f64>> = self.batch_logs[0].iter().map(|b| vec![0.0; b.len()]).collect();
        for batch in &self.batch_logs {
            for (tb, bb) in t.iter_mut().zip(batch) {
                for (x, y) in tb.iter_mut().zip(bb) {
                    *x += y;
                }
            }
        }
        t
    }
}

/// Pushes frames with `ks[b]` vectors per block through `stream`.
pub fn run_engine<S: CocycleStream, R: Rng + ?Sized>(
    stream: &mut S,
    ks: &[usize],
    sched: Schedule,
    rng: &mut R,
) -> Result<EngineOutput> {
    if sched.reorth_every == 0 {
        return Err(Error::BadConfig("reorth_every must be at least 1".into()));
    }
    if sched.steps == 0 || sched.batch_count == 0 || (sched.batch_count as u64) * 10 > sched.steps.saturating_sub(sched.burn_in) {
        return Err(Error::InsufficientSteps { steps: sched.steps, batches: sched.batch_count });
    }
    let dims = stream.block_dims();
    let ranks = stream.block_ranks();
    let mut frames: Vec<Frame> = Vec::new();
    for (b, &k) in ks.iter().enumerate() {
        if k > ranks[b] {
            return Err(Error::BadConfig(format!("block {b}: {k} vectors requested, dimension {}", ranks[b])));
        }
        frames.push(Frame::random(dims[b], k, rng));
    }
    stream.reduce(&mut frames);
    let mut scratch: Vec<Vec<f64>> = ks.iter().map(|&k| vec![0.0; k]).collect();
    for (f, s) in frames.iter_mut().zip(scratch.iter_mut()) {
        f.orthonormalize(s)?;
    }
    let mut batch_logs = vec![ks.iter().map(|&k| vec![0.0; k]).collect::<Vec<_>>(); sched.batch_count];
    let mut batch_steps = vec![0u64; sched.batch_count];
    let counted = sched.steps - sched.burn_in;
    for step in 0..sched.steps {
        stream.advance(&mut frames)?;
        let batch = if step >= sched.burn_in {
            let b = (((step - sched.burn_in) as u128 * sched.batch_count as u128) / counted as u128) as usize;
            let b = b.min(sched.batch_count - 1);
            batch_steps[b] += 1;
            Some(b)
        } else {
            None
        };
        if (step + 1) % sched.reorth_every == 0 || step + 1 == sched.steps {
            stream.reduce(&mut frames);
            for (bi, f) in frames.iter_mut().enumerate() {
                let s = &mut scratch[bi];
                s.iter_mut().for_each(|x| *x = 0.0);
                f.orthonormalize(s)?;
                if let Some(b) = batch {
                    for (x, y) in batch_logs[b][bi].iter_mut().zip(s.iter()) {
                        *x += y;
                    }
                }
            }
        }
    }
    Ok(EngineOutput { batch_logs, batch_steps, frames, resamples: stream.resamples(), moves: stream.moves() })
}

/// Estimator settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorConfig {
    /// Acceleration steps per replica.
    pub steps: u64,
    pub reorth_every: u64,
    /// Tracked invariant vectors; `None` means `g`.
    pub k_plus: Option<usize>,
    /// Tracked anti-invariant vectors; `None` means `g + n − 1`.
    pub k_minus: Option<usize>,
    pub seed: u64,
    /// Replicas run with seeds `seed, seed + 1, …`.
    pub replicas: usize,
    /// Explicit replica seeds; overrides `seed` and `replicas` when set.
    #[serde(default)]
    pub seed_list: Option<Vec<u64>>,
    /// Discarded initial steps; `None` means 1% of `steps`.
    pub burn_in: Option<u64>,
    pub batch_count: usize,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        EstimatorConfig {
            steps: 1_000_000,
            reorth_every: 10,
            k_plus: None,
            k_minus: None,
            seed: 0,
            replicas: 1,
            seed_list: None,
            burn_in: None,
            batch_count: 20,
        }
    }
}

impl EstimatorConfig {
    pub fn burn_in_steps(&self) -> u64 {
        self.burn_in.unwrap_or(self.steps / 100)
    }

    fn schedule(&self) -> Schedule {
        Schedule { steps: self.steps, reorth_every: self.reorth_every, burn_in: self.burn_in_steps(), batch_count: self.batch_count }
    }

    pub fn seeds(&self) -> Vec<u64> {
        if let Some(list) = &self.seed_list {
            return list.clone();
        }
        (0..self.replicas as u64).map(|i| self.seed.wrapping_add(i)).collect()
    }

    fn check(&self) -> Result<()> {
        if self.reorth_every == 0 {
            return Err(Error::BadConfig("reorth_every must be at least 1".into()));
        }
        if self.seeds().is_empty() {
            return Err(Error::BadConfig("at least one replica is needed".into()));
        }
        if self.steps == 0 || (self.batch_count as u64) * 10 > self.steps {
            return Err(Error::InsufficientSteps { steps: self.steps, batches: self.batch_count });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Exponent {
    pub value: f64,
    pub se: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Largest difference between estimates from the first and the second
    /// half of the batches.
    pub split_half_discrepancy: f64,
    pub resamples: u64,
    pub moves: u64,
    pub steps: u64,
    pub replicas: usize,
    /// Parity defect of each tracked direction (unsplit route only).
    pub parity_defects: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumEstimate {
    pub lambda_plus: Vec<Exponent>,
    pub lambda_minus: Vec<Exponent>,
    /// Top anti-invariant exponent per acceleration step, before
    /// normalization.
    pub theta_top: f64,
    pub diagnostics: Diagnostics,
}

impl SpectrumEstimate {
    pub fn plus_values(&self) -> Vec<f64> {
        self.lambda_plus.iter().map(|e| e.value).collect()
    }

    pub fn minus_values(&self) -> Vec<f64> {
        self.lambda_minus.iter().map(|e| e.value).collect()
    }
}

/// Per-batch samples: `[batch] → ([direction] logs, normalizer log)`.
struct Pooled {
    logs: Vec<Vec<f64>>,
    norm: Vec<f64>,
    steps: u64,
}

impl Pooled {
    fn ratio(&self, range: std::ops::Range<usize>, j: usize) -> f64 {
        let num: f64 = self.logs[range.clone()].iter().map(|b| b[j]).sum();
        let den: f64 = self.norm[range].iter().sum();
        num / den
    }

    fn exponent(&self, j: usize) -> Exponent {
        let nb = self.logs.len();
        let value = self.ratio(0..nb, j);
        let samples: Vec<f64> = (0..nb).map(|b| self.logs[b][j] / self.norm[b]).collect();
        let mean = samples.iter().sum::<f64>() / nb as f64;
        let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (nb.max(2) - 1) as f64;
        Exponent { value, se: (var / nb as f64).sqrt() }
    }

    fn split_half(&self, dirs: usize) -> f64 {
        let nb = self.logs.len();
        let h = nb / 2;
        (0..dirs).map(|j| (self.ratio(0..h, j) - self.ratio(h..nb, j)).abs()).fold(0.0, f64::max)
    }

    fn theta(&self) -> f64 {
        self.norm.iter().sum::<f64>() / self.steps as f64
    }
}

fn sorted(mut v: Vec<Exponent>) -> Vec<Exponent> {
    v.sort_by(|a, b| b.value.total_cmp(&a.value));
    v
}

/// Default tracked counts `(g, g + n − 1)` and block dimensions.
fn block_sizes(p: &GeneralizedPermutation) -> ((usize, usize), (usize, usize)) {
    let info = stratum_info(&stratum_of(p));
    (
        (info.positive_invariant_count.max(0) as usize, info.positive_anti_invariant_count.max(0) as usize),
        (info.dim_invariant.max(0) as usize, info.dim_anti_invariant.max(0) as usize),
    )
}

/// One replica in the split route.
pub fn run_split_replica(p: &GeneralizedPermutation, cfg: &EstimatorConfig, seed: u64) -> Result<EngineOutput> {
    let ((gp, gm), _) = block_sizes(p);
    let ks = [cfg.k_plus.unwrap_or(gp), cfg.k_minus.unwrap_or(gm)];
    if ks[1] == 0 {
        return Err(Error::BadConfig("at least one anti-invariant vector is needed for normalization".into()));
    }
    let mut stream = InductionStream::new(p, Route::Split, seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    run_engine(&mut stream, &ks, cfg.schedule(), &mut rng)
}

pub fn estimate_spectrum(p: &GeneralizedPermutation, cfg: &EstimatorConfig) -> Result<SpectrumEstimate> {
    cfg.check()?;
    if p.is_abelian() {
        return Err(Error::AbelianInput);
    }
    let runs: Vec<Result<EngineOutput>> = cfg.seeds().par_iter().map(|&s| run_split_replica(p, cfg, s)).collect();
    let runs: Vec<EngineOutput> = runs.into_iter().collect::<Result<_>>()?;
    let kp = runs[0].batch_logs[0][0].len();
    let km = runs[0].batch_logs[0][1].len();
    let mut pooled = Pooled { logs: Vec::new(), norm: Vec::new(), steps: 0 };
    let mut diag = Diagnostics { replicas: runs.len(), ..Default::default() };
    for r in &runs {
        for b in &r.batch_logs {
            let mut row = b[0].clone();
            row.extend_from_slice(&b[1]);
            pooled.norm.push(b[1][0]);
            pooled.logs.push(row);
        }
        pooled.steps += r.batch_steps.iter().sum::<u64>();
        diag.resamples += r.resamples;
        diag.moves += r.moves;
    }
    diag.steps = cfg.steps * runs.len() as u64;
    diag.split_half_discrepancy = pooled.split_half(kp + km);
    let lambda_plus = sorted((0..kp).map(|j| pooled.exponent(j)).collect());
    let mut lambda_minus: Vec<Exponent> = (0..km).map(|j| pooled.exponent(kp + j)).collect();
    lambda_minus[0] = Exponent { value: 1.0, se: 0.0 };
    Ok(SpectrumEstimate { lambda_plus, lambda_minus: sorted(lambda_minus), theta_top: pooled.theta(), diagnostics: diag })
}

/// Parity of a unit vector in sheet-signed cover coordinates and its
/// defect `min(‖P⁺v‖, ‖P⁻v‖) / ‖v‖`.
pub fn parity_with_defect(v: &[f64]) -> (Parity, f64) {
    let (mut p, mut m, mut tot) = (0.0, 0.0, 0.0);
    for pair in v.chunks(2) {
        p += ((pair[0] + pair[1]) / 2.0).powi(2) * 2.0;
        m += ((pair[0] - pair[1]) / 2.0).powi(2) * 2.0;
        tot += pair[0] * pair[0] + pair[1] * pair[1];
    }
    let (p, m) = ((p / tot).sqrt(), (m / tot).sqrt());
    if p >= m {
        (Parity::Plus, m)
    } else {
        (Parity::Minus, p)
    }
}

/// Tracks vectors in the whole cover homology and sorts directions by
/// parity afterwards.
pub fn estimate_unsplit(p: &GeneralizedPermutation, cfg: &EstimatorConfig) -> Result<SpectrumEstimate> {
    cfg.check()?;
    if p.is_abelian() {
        return Err(Error::AbelianInput);
    }
    let ((gp, gm), _) = block_sizes(p);
    let k = cfg.k_plus.unwrap_or(gp) + cfg.k_minus.unwrap_or(gm);
    let runs: Vec<Result<EngineOutput>> = cfg
        .seeds()
        .par_iter()
        .map(|&s| {
            let mut stream = InductionStream::new(p, Route::Unsplit, s)?;
            let mut rng = ChaCha8Rng::seed_from_u64(s ^ 0x9e37_79b9_7f4a_7c15);
            run_engine(&mut stream, &[k], cfg.schedule(), &mut rng)
        })
        .collect();
    let runs: Vec<EngineOutput> = runs.into_iter().collect::<Result<_>>()?;
    let mut labels: Option<Vec<Parity>> = None;
    let mut defects = vec![0.0f64; k];
    for r in &runs {
        let mut mine = Vec::with_capacity(k);
        for (j, worst) in defects.iter_mut().enumerate() {
            let (par, def) = parity_with_defect(&r.frames[0].column(j));
            if def > 0.1 {
                return Err(Error::ParityAmbiguous { index: j, defect: def });
            }
            *worst = worst.max(def);
            mine.push(par);
        }
        match &labels {
            None => labels = Some(mine),
            Some(l) => {
                if let Some(j) = (0..k).find(|&j| l[j] != mine[j]) {
                    return Err(Error::ParityAmbiguous { index: j, defect: 0.5 });
                }
            }
        }
    }
    let labels = labels.unwrap_or_default();
    let top = labels.iter().position(|&l| l == Parity::Minus).ok_or(Error::ParityAmbiguous { index: 0, defect: 1.0 })?;
    let mut pooled = Pooled { logs: Vec::new(), norm: Vec::new(), steps: 0 };
    let mut diag = Diagnostics { replicas: runs.len(), parity_defects: defects, ..Default::default() };
    for r in &runs {
        for b in &r.batch_logs {
            pooled.norm.push(b[0][top]);
            pooled.logs.push(b[0].clone());
        }
        pooled.steps += r.batch_steps.iter().sum::<u64>();
        diag.resamples += r.resamples;
        diag.moves += r.moves;
    }
    diag.steps = cfg.steps * runs.len() as u64;
    diag.split_half_discrepancy = pooled.split_half(k);
    let mut plus = Vec::new();
    let mut minus = Vec::new();
    for (j, l) in labels.iter().enumerate() {
        let e = if j == top { Exponent { value: 1.0, se: 0.0 } } else { pooled.exponent(j) };
        match l {
            Parity::Plus => plus.push(e),
            _ => minus.push(e),
        }
    }
    Ok(SpectrumEstimate { lambda_plus: sorted(plus), lambda_minus: sorted(minus), theta_top: pooled.theta(), diagnostics: diag })
}

/// Lyapunov exponents (natural log, per step) of the constant sequence
/// `B, B, …`, from the same Gram–Schmidt engine. Sorted descending.
pub fn fixed_matrix_selftest(b: &IntMatrix, steps: u64) -> Result<Vec<f64>> {
    let n = b.len();
    if n == 0 || b.iter().any(|r| r.len() != n) {
        return Err(Error::BadConfig("square matrix expected".into()));
    }
    if crate::linalg::rank(b) < n {
        return Err(Error::Singular);
    }
    let matrix: Vec<f64> = b.iter().flatten().map(|&x| x as f64).collect();
    let mut stream = FixedMatrixStream { dim: n, matrix };
    let burn_in = steps / 10;
    let sched = Schedule { steps, reorth_every: 1, burn_in, batch_count: 1 };
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let out = run_engine(&mut stream, &[n], sched, &mut rng)?;
    let counted = (steps - burn_in) as f64;
    let mut v: Vec<f64> = out.totals()[0].iter().map(|x| x / counted).collect();
    v.sort_by(|a, b| b.total_cmp(a));
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_stream_has_zero_exponents() {
        let mut s = IdentityStream { dims: vec![3, 2] };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let sched = Schedule { steps: 1000, reorth_every: 10, burn_in: 10, batch_count: 10 };
        let out = run_engine(&mut s, &[3, 2], sched, &mut rng).unwrap();
        assert!(out.totals().iter().flatten().all(|x| x.abs() < 1e-12));
    }

    #[test]
    fn fibonacci_matrix() {
        let e = fixed_matrix_selftest(&vec![vec![2, 1], vec![1, 1]], 2000).unwrap();
        let phi2 = ((1.0 + 5f64.sqrt()) / 2.0).powi(2).ln();
        assert!((e[0] - phi2).abs() < 1e-9);
        assert!((e[1] + phi2).abs() < 1e-9);
    }

    #[test]
    fn zero_steps_rejected() {
        let p = GeneralizedPermutation::parse("b d b / a d a c c").unwrap();
        let cfg = EstimatorConfig { steps: 0, ..Default::default() };
        assert!(matches!(estimate_spectrum(&p, &cfg), Err(Error::InsufficientSteps { .. })));
    }

    #[test]
    fn small_run_is_normalized() {
        let p = GeneralizedPermutation::parse("b d b / a d a c c").unwrap();
        let cfg = EstimatorConfig { steps: 20_000, ..Default::default() };
        let e = estimate_spectrum(&p, &cfg).unwrap();
        assert_eq!(e.lambda_minus[0].value, 1.0);
        assert!((e.lambda_plus[0].value - 0.5).abs() < 0.1, "{:?}", e.lambda_plus);
    }
}
