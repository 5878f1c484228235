//! Rauzy–Veech induction on generalized permutations and their covers, with
//! Zorich acceleration and the integer transition matrices.
//!
//! A move compares the last letters `α` (top) and `β` (bottom). If
//! `λ_α > λ_β` the top wins: `λ_α −= λ_β` and `β` leaves the end of the
//! bottom row. It is re-inserted right after the other occurrence of `α`
//! if that occurrence is in the bottom row, and otherwise (α repeated in the
//! top row) right before it in the top row with its sheet bit toggled,
//! since the inserted side now crosses a half-turn gluing. The bottom move
//! is symmetric.
//!
//! Matrices act as `λ_old = B λ_new`. The base matrix is `I + E_{wl}` for
//! winner `w` and loser `l`. The cover matrix, in sheet-signed coordinates,
//! adds `(−1)^{s_w+s_l}` at `((w,s_w),(l,s_l))` and at the σ-image entry;
//! it commutes with σ and its anti-invariant block is the base matrix.

use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cover::{cover_index, default_bits, CoverIet};
use crate::error::{Error, Result};
use crate::genperm::{GeneralizedPermutation, Letter, Row};
use crate::linalg::{identity, mul, IntMatrix};

/// Relative tolerance under which two compared lengths count as tied.
pub const TIE_TOLERANCE: f64 = 1e-14;

/// Default cap on consecutive wins within one acceleration step.
pub const DEFAULT_WIN_CAP: u64 = 1_000_000;

/// Base lengths with the accumulated logarithm of all renormalizations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LengthVector {
    pub lengths: Vec<f64>,
    pub log_scale: f64,
}

impl LengthVector {
    pub fn new(lengths: Vec<f64>) -> Self {
        LengthVector { lengths, log_scale: 0.0 }
    }

    /// I.i.d. uniform lengths, adjusted so both rows have equal total length
    /// (flip letters of the bottom row are rescaled) and normalized to sum 1.
    pub fn random<R: Rng + ?Sized>(p: &GeneralizedPermutation, rng: &mut R) -> Self {
        let mut lengths: Vec<f64> = (0..p.d()).map(|_| rng.gen::<f64>().max(f64::MIN_POSITIVE)).collect();
        let top_count = row_counts(p.top(), p.d());
        let (st, sb) = flip_sums(&lengths, &top_count);
        if sb > 0.0 {
            for (a, c) in top_count.iter().enumerate() {
                if *c == 0 {
                    lengths[a] *= st / sb;
                }
            }
        }
        let total: f64 = lengths.iter().sum();
        lengths.iter_mut().for_each(|x| *x /= total);
        LengthVector::new(lengths)
    }

    /// Cover lengths: both sheets of `α` have length `λ_α`.
    pub fn cover_lengths(&self) -> Vec<f64> {
        crate::cover::lift(&self.lengths)
    }

    pub fn total(&self) -> f64 {
        self.lengths.iter().sum()
    }
}

fn row_counts(top: &[Letter], d: usize) -> Vec<u8> {
    let mut c = vec![0u8; d];
    for &x in top {
        c[x] += 1;
    }
    c
}

/// Sums of lengths of letters repeated in the top row and in the bottom row.
fn flip_sums(lengths: &[f64], top_count: &[u8]) -> (f64, f64) {
    let mut st = 0.0;
    let mut sb = 0.0;
    for (l, &c) in lengths.iter().zip(top_count) {
        match c {
            2 => st += l,
            0 => sb += l,
            _ => {}
        }
    }
    (st, sb)
}

/// Which row won a move.
pub type WinRow = Row;

/// Compact description of one move, enough to rebuild its matrices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MoveRecord {
    pub winner: Letter,
    pub winner_bit: u8,
    pub loser: Letter,
    pub loser_bit: u8,
    pub row: WinRow,
}

impl MoveRecord {
    /// `(−1)^{s_w + s_l}`: the sign of the invariant-block update.
    #[inline]
    pub fn twist(&self) -> f64 {
        if (self.winner_bit ^ self.loser_bit) == 0 {
            1.0
        } else {
            -1.0
        }
    }
}

/// Integer cocycle matrices of a move or a product of moves.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitionMatrix {
    /// `d × d`, nonnegative, acting on base lengths.
    pub base: IntMatrix,
    /// `2d × 2d` in sheet-signed cover coordinates.
    pub cover: IntMatrix,
}

impl TransitionMatrix {
    pub fn identity(d: usize) -> Self {
        TransitionMatrix { base: identity(d), cover: identity(2 * d) }
    }

    pub fn of_move(d: usize, m: &MoveRecord) -> Self {
        let mut t = Self::identity(d);
        t.base[m.winner][m.loser] += 1;
        let s = if m.twist() > 0.0 { 1 } else { -1 };
        let (w0, l0) = (cover_index(m.winner, m.winner_bit), cover_index(m.loser, m.loser_bit));
        t.cover[w0][l0] += s;
        t.cover[w0 ^ 1][l0 ^ 1] += s;
        t
    }

    /// Composition `self · next` (apply `self` first along the induction).
    pub fn then(&self, next: &TransitionMatrix) -> Self {
        TransitionMatrix { base: mul(&self.base, &next.base), cover: mul(&self.cover, &next.cover) }
    }

    /// In-place right multiplication by a single move, `self ← self · B(m)`.
    pub fn push_move(&mut self, m: &MoveRecord) {
        // Right multiplication by I + E_{wl} adds column w to column l.
        for row in self.base.iter_mut() {
            row[m.loser] += row[m.winner];
        }
        let s: i64 = if m.twist() > 0.0 { 1 } else { -1 };
        let (w0, l0) = (cover_index(m.winner, m.winner_bit), cover_index(m.loser, m.loser_bit));
        for row in self.cover.iter_mut() {
            row[l0] += s * row[w0];
            row[l0 ^ 1] += s * row[w0 ^ 1];
        }
    }
}

/// Induction state: rows, sheet bits and lengths. Mutated in place.
#[derive(Debug, Clone)]
pub struct InductionState {
    top: Vec<Letter>,
    bottom: Vec<Letter>,
    bits_top: Vec<u8>,
    bits_bottom: Vec<u8>,
    names: Arc<Vec<String>>,
    top_count: Vec<u8>,
    pub lengths: LengthVector,
    pub step_count: u64,
    pub win_cap: u64,
    last_row: Option<Row>,
    history: Option<Vec<Row>>,
}

impl InductionState {
    /// Starts from `p` with the default sheet bits. Abelian permutations are
    /// allowed here (classical induction).
    pub fn new(p: &GeneralizedPermutation, lengths: LengthVector) -> Result<Self> {
        if lengths.lengths.len() != p.d() || lengths.lengths.iter().any(|&x| x <= 0.0 || !x.is_finite()) {
            return Err(Error::BadConfig("lengths must be positive, one per letter".into()));
        }
        let (bt, bb) = default_bits(p);
        Ok(InductionState {
            top: p.top().to_vec(),
            bottom: p.bottom().to_vec(),
            bits_top: bt,
            bits_bottom: bb,
            names: Arc::new(p.names().to_vec()),
            top_count: row_counts(p.top(), p.d()),
            lengths,
            step_count: 0,
            win_cap: DEFAULT_WIN_CAP,
            last_row: None,
            history: None,
        })
    }

    /// Records the winning row of every move.
    pub fn record_history(mut self) -> Self {
        self.history = Some(Vec::new());
        self
    }

    pub fn history(&self) -> Option<&[Row]> {
        self.history.as_deref()
    }

    pub fn d(&self) -> usize {
        self.names.len()
    }

    pub fn top(&self) -> &[Letter] {
        &self.top
    }

    pub fn bottom(&self) -> &[Letter] {
        &self.bottom
    }

    pub fn bits_top(&self) -> &[u8] {
        &self.bits_top
    }

    pub fn bits_bottom(&self) -> &[u8] {
        &self.bits_bottom
    }

    pub fn permutation(&self) -> GeneralizedPermutation {
        GeneralizedPermutation::from_parts_unchecked(self.top.clone(), self.bottom.clone(), self.names.to_vec())
    }

    pub fn cover(&self) -> CoverIet {
        CoverIet::with_bits(self.permutation(), self.bits_top.clone(), self.bits_bottom.clone())
    }

    /// Key identifying the combinatorial state (rows and sheet bits).
    pub fn state_key(&self) -> Vec<u8> {
        let mut k = Vec::with_capacity(2 * self.top.len() + 2 * self.bottom.len() + 1);
        for (&a, &s) in self.top.iter().zip(&self.bits_top) {
            k.push((a as u8) << 1 | s);
        }
        k.push(u8::MAX);
        for (&a, &s) in self.bottom.iter().zip(&self.bits_bottom) {
            k.push((a as u8) << 1 | s);
        }
        k
    }

    /// Row that would win the next move.
    pub fn next_winner(&self) -> Result<Row> {
        let a = *self.top.last().expect("nonempty top row");
        let b = *self.bottom.last().expect("nonempty bottom row");
        let (la, lb) = (self.lengths.lengths[a], self.lengths.lengths[b]);
        if (la - lb).abs() <= TIE_TOLERANCE * la.max(lb) {
            return Err(Error::TieLengths);
        }
        Ok(if la > lb { Row::Top } else { Row::Bottom })
    }

    /// One Rauzy move in place.
    pub fn advance(&mut self) -> Result<MoveRecord> {
        let row = self.next_winner()?;
        let rec = match row {
            Row::Top => {
                let a = *self.top.last().unwrap();
                let sw = *self.bits_top.last().unwrap();
                if self.bottom.len() < 2 {
                    return Err(Error::MoveUndefined("bottom row would become empty".into()));
                }
                let b = self.bottom.pop().unwrap();
                let sl = self.bits_bottom.pop().unwrap();
                self.lengths.lengths[a] -= self.lengths.lengths[b];
                if let Some(j) = self.bottom.iter().position(|&x| x == a) {
                    self.bottom.insert(j + 1, b);
                    self.bits_bottom.insert(j + 1, sl);
                } else {
                    let i = self.top.iter().position(|&x| x == a).unwrap();
                    self.top.insert(i, b);
                    self.bits_top.insert(i, 1 - sl);
                    self.top_count[b] += 1;
                }
                MoveRecord { winner: a, winner_bit: sw, loser: b, loser_bit: sl, row }
            }
            Row::Bottom => {
                let b = *self.bottom.last().unwrap();
                let sw = *self.bits_bottom.last().unwrap();
                if self.top.len() < 2 {
                    return Err(Error::MoveUndefined("top row would become empty".into()));
                }
                let a = self.top.pop().unwrap();
                let sl = self.bits_top.pop().unwrap();
                self.top_count[a] -= 1;
                self.lengths.lengths[b] -= self.lengths.lengths[a];
                if let Some(i) = self.top.iter().position(|&x| x == b) {
                    self.top.insert(i + 1, a);
                    self.bits_top.insert(i + 1, sl);
                    self.top_count[a] += 1;
                } else {
                    let j = self.bottom.iter().position(|&x| x == b).unwrap();
                    self.bottom.insert(j, a);
                    self.bits_bottom.insert(j, 1 - sl);
                }
                MoveRecord { winner: b, winner_bit: sw, loser: a, loser_bit: sl, row }
            }
        };
        let w = self.lengths.lengths[rec.winner];
        if w <= 0.0 || !w.is_finite() {
            return Err(Error::LengthUnderflow);
        }
        self.repair_balance();
        self.step_count += 1;
        self.last_row = Some(row);
        if let Some(h) = self.history.as_mut() {
            h.push(row);
        }
        Ok(rec)
    }

    /// Restores equality of the two row totals, which rounding erodes: the
    /// letters repeated in each row are rescaled by reciprocal factors.
    fn repair_balance(&mut self) {
        let (st, sb) = flip_sums(&self.lengths.lengths, &self.top_count);
        if st > 0.0 && sb > 0.0 {
            let f = (st / sb).sqrt();
            if f != 1.0 {
                for (l, &c) in self.lengths.lengths.iter_mut().zip(&self.top_count) {
                    match c {
                        2 => *l /= f,
                        0 => *l *= f,
                        _ => {}
                    }
                }
            }
        }
    }

    /// Draws fresh lengths for the current combinatorics, keeping the
    /// accumulated scale. Used to step past ties.
    pub fn resample_lengths<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        let mut l: Vec<f64> = (0..self.d()).map(|_| rng.gen::<f64>().max(f64::MIN_POSITIVE)).collect();
        let (st, sb) = flip_sums(&l, &self.top_count);
        if sb > 0.0 {
            for (x, &c) in l.iter_mut().zip(&self.top_count) {
                if c == 0 {
                    *x *= st / sb;
                }
            }
        }
        let total: f64 = l.iter().sum();
        l.iter_mut().for_each(|x| *x /= total);
        self.lengths.lengths = l;
    }

    /// Rescales lengths to sum 1 and accrues the logarithm of the factor.
    pub fn renormalize(&mut self) {
        let t = self.lengths.total();
        self.lengths.lengths.iter_mut().for_each(|x| *x /= t);
        self.lengths.log_scale -= t.ln();
    }

    /// Runs moves while the same row keeps winning; calls `on_move` for each.
    /// Returns the number of moves.
    pub fn accelerate_with(&mut self, mut on_move: impl FnMut(&MoveRecord)) -> Result<u64> {
        let first = self.next_winner()?;
        let mut wins = 0u64;
        loop {
            let rec = self.advance()?;
            on_move(&rec);
            wins += 1;
            if wins > self.win_cap {
                return Err(Error::WinOverflow { cap: self.win_cap });
            }
            match self.next_winner() {
                Ok(r) if r == first => continue,
                Ok(_) => break,
                Err(e) => return Err(e),
            }
        }
        self.renormalize();
        Ok(wins)
    }
}

/// One Rauzy move with its matrices.
pub fn rauzy_move(s: &mut InductionState) -> Result<(MoveRecord, TransitionMatrix)> {
    let m = s.advance()?;
    Ok((m, TransitionMatrix::of_move(s.d(), &m)))
}

/// One Zorich step: the product matrix and the number of wins.
pub fn zorich_step(s: &mut InductionState) -> Result<(TransitionMatrix, u64)> {
    let mut t = TransitionMatrix::identity(s.d());
    let wins = s.accelerate_with(|m| t.push_move(m))?;
    Ok((t, wins))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::determinant;

    fn torus() -> GeneralizedPermutation {
        GeneralizedPermutation::parse_allow_abelian("a b / b a").unwrap()
    }

    #[test]
    fn classical_rotation_move() {
        // Top last letter is b; with λ_b = 0.7 > λ_a = 0.3 the top wins.
        let mut s = InductionState::new(&torus(), LengthVector::new(vec![0.3, 0.7])).unwrap();
        let (m, t) = rauzy_move(&mut s).unwrap();
        assert_eq!(m.row, Row::Top);
        assert_eq!(t.base, vec![vec![1, 0], vec![1, 1]]);
        assert!((s.lengths.lengths[1] - 0.4).abs() < 1e-15);
    }

    #[test]
    fn gauss_map_win_count() {
        let x = 0.3;
        let mut s = InductionState::new(&torus(), LengthVector::new(vec![1.0 - x, x])).unwrap();
        let (_, wins) = zorich_step(&mut s).unwrap();
        assert_eq!(wins, 2);
        assert!((s.lengths.total() - 1.0).abs() < 1e-15);
        assert!(s.lengths.log_scale > 0.0);
    }

    #[test]
    fn hand_move_on_small_representative() {
        // b d b / a d a c c with letters b=0, d=1, a=2, c=3.
        let p = GeneralizedPermutation::parse("b d b / a d a c c").unwrap();
        let l = LengthVector::new(vec![0.5, 0.3, 0.35, 0.15]);
        let mut s = InductionState::new(&p, l).unwrap();
        let (m, t) = rauzy_move(&mut s).unwrap();
        // λ_b = 0.5 > λ_c = 0.15: top wins, c leaves the bottom and b's other
        // occurrence is in the top row, so c enters the top row before it.
        assert_eq!(m.row, Row::Top);
        assert_eq!((m.winner, m.loser), (0, 3));
        assert_eq!(s.top(), &[3, 0, 1, 0]);
        assert_eq!(s.bottom(), &[2, 1, 2, 3]);
        assert_eq!(s.bits_top(), &[0, 0, 0, 1]);
        assert!((s.lengths.lengths[0] - 0.35).abs() < 1e-12);
        assert_eq!(determinant(&t.base), Some(1));
        let new = s.lengths.lengths.clone();
        let back: Vec<f64> = t.base.iter().map(|r| r.iter().zip(&new).map(|(&a, b)| a as f64 * b).sum()).collect();
        for (x, y) in back.iter().zip([0.5, 0.3, 0.35, 0.15]) {
            assert!((x - y).abs() < 1e-12);
        }
    }
}
