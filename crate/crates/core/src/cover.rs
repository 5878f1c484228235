//! The orienting double cover at the level of polygons.
//!
//! The cover surface is two copies of the suspension polygon: `P_0` and
//! `P_1 = σ(P_0)`, rotated by a half turn. Every occurrence of a base letter
//! carries a sheet bit `b`; in `P_0` that side is the cover side `(α, b)`
//! and in `P_1` it is `(α, 1 − b)`. Translation letters carry equal bits on
//! both occurrences, flip letters opposite bits.
//!
//! Cover letter `(α, s)` has index `2α + s`.
//!
//! Vectors over the doubled alphabet are expressed in sheet-signed
//! coordinates: the sheet-1 entry is negated relative to the geometric side
//! orientation. In these coordinates the deck involution acts on homology and
//! cohomology as the plain swap `(α, 0) ↔ (α, 1)`, so parity `+` (equal
//! entries on σ-pairs) is the invariant part and parity `−` the
//! anti-invariant part. Lengths of the cover, `(λ_α, λ_α)` geometrically,
//! read `(λ_α, −λ_α)` here and are anti-invariant.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::genperm::{GeneralizedPermutation, Letter, Row, Slot};
use crate::strata::SingularityPattern;

/// Index of cover letter `(α, s)`.
#[inline]
pub fn cover_index(alpha: Letter, sheet: u8) -> usize {
    2 * alpha + sheet as usize
}

/// Inverse of [`cover_index`].
#[inline]
pub fn cover_letter(x: usize) -> (Letter, u8) {
    (x / 2, (x % 2) as u8)
}

#[inline]
pub fn sigma(x: usize) -> usize {
    x ^ 1
}

/// Default sheet bits: the first occurrence of every letter in reading order
/// gets 0; the second occurrence gets 1 for flip letters and 0 otherwise.
pub fn default_bits(p: &GeneralizedPermutation) -> (Vec<u8>, Vec<u8>) {
    let mut bt = vec![0u8; p.top().len()];
    let mut bb = vec![0u8; p.bottom().len()];
    for [a, b] in p.occurrences() {
        if a.row == b.row {
            match b.row {
                Row::Top => bt[b.index] = 1,
                Row::Bottom => bb[b.index] = 1,
            }
        }
    }
    (bt, bb)
}

/// Interval exchange with involution on the doubled alphabet.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverIet {
    base: GeneralizedPermutation,
    bits_top: Vec<u8>,
    bits_bottom: Vec<u8>,
    cover_top: Vec<usize>,
    cover_bottom: Vec<usize>,
}

/// Builds the cover of a non-abelian permutation with the default sheet bits.
pub fn orient_double_cover(p: &GeneralizedPermutation) -> Result<CoverIet> {
    if p.is_abelian() {
        return Err(Error::AbelianInput);
    }
    let (bt, bb) = default_bits(p);
    Ok(CoverIet::with_bits(p.clone(), bt, bb))
}

impl CoverIet {
    /// Cover of `p` with explicit sheet bits, as reached along induction.
    pub fn with_bits(base: GeneralizedPermutation, bits_top: Vec<u8>, bits_bottom: Vec<u8>) -> Self {
        let (cover_top, cover_bottom) = concatenated_rows(base.top(), base.bottom(), &bits_top, &bits_bottom);
        CoverIet { base, bits_top, bits_bottom, cover_top, cover_bottom }
    }

    pub fn base(&self) -> &GeneralizedPermutation {
        &self.base
    }

    pub fn d(&self) -> usize {
        self.base.d()
    }

    /// Size of the doubled alphabet.
    pub fn n(&self) -> usize {
        2 * self.base.d()
    }

    pub fn bits(&self, row: Row) -> &[u8] {
        match row {
            Row::Top => &self.bits_top,
            Row::Bottom => &self.bits_bottom,
        }
    }

    /// Label in `P_0` of a base slot.
    pub fn label(&self, s: Slot) -> usize {
        cover_index(self.base.row(s.row)[s.index], self.bits(s.row)[s.index])
    }

    /// Top row of the lifted classical permutation: `σ(reversed bottom labels)`
    /// followed by the top labels.
    pub fn cover_top(&self) -> &[usize] {
        &self.cover_top
    }

    pub fn cover_bottom(&self) -> &[usize] {
        &self.cover_bottom
    }

    /// Readable names `a0`, `a1`, ... for cover letters.
    pub fn cover_name(&self, x: usize) -> String {
        let (a, s) = cover_letter(x);
        format!("{}{}", self.base.names()[a], s)
    }

    /// Every cover letter occurs exactly once in each row.
    pub fn is_classical(&self) -> bool {
        let n = self.n();
        let once = |row: &[usize]| {
            let mut seen = vec![false; n];
            row.len() == n && row.iter().all(|&x| !std::mem::replace(&mut seen[x], true))
        };
        once(&self.cover_top) && once(&self.cover_bottom)
    }

    /// σ applied to both rows, rows reversed and exchanged, reproduces the cover.
    pub fn is_sigma_symmetric(&self) -> bool {
        let flip = |row: &[usize]| row.iter().rev().map(|&x| sigma(x)).collect::<Vec<_>>();
        flip(&self.cover_bottom) == self.cover_top && flip(&self.cover_top) == self.cover_bottom
    }

    /// Forgets sheets: projects the lifted labels of `P_0` back to base letters.
    pub fn projected_base_rows(&self) -> (Vec<Letter>, Vec<Letter>) {
        let l = self.base.top().len();
        let m = self.base.bottom().len();
        let t = self.cover_top[m..].iter().map(|&x| x / 2).collect();
        let b = self.cover_bottom[l..].iter().map(|&x| x / 2).collect();
        (t, b)
    }

    /// Polygon relation in sheet-signed coordinates: the sum of the `P_0` top
    /// labels minus the bottom labels. It vanishes on translation letters.
    pub fn relation(&self) -> Vec<i64> {
        let mut r = vec![0i64; self.n()];
        for (row, sign) in [(Row::Top, 1i64), (Row::Bottom, -1i64)] {
            for i in 0..self.base.row(row).len() {
                let x = self.label(Slot { row, index: i });
                r[x] += sign * sheet_sign(x);
            }
        }
        r
    }

    /// Vertex structure of the two-polygon cover surface.
    pub fn skeleton(&self) -> CoverSkeleton {
        CoverSkeleton::build(self)
    }
}

/// `+1` on sheet 0, `−1` on sheet 1.
#[inline]
pub fn sheet_sign(x: usize) -> i64 {
    if x % 2 == 0 {
        1
    } else {
        -1
    }
}

pub(crate) fn concatenated_rows(top: &[Letter], bottom: &[Letter], bt: &[u8], bb: &[u8]) -> (Vec<usize>, Vec<usize>) {
    let t0: Vec<usize> = top.iter().zip(bt).map(|(&a, &s)| cover_index(a, s)).collect();
    let b0: Vec<usize> = bottom.iter().zip(bb).map(|(&a, &s)| cover_index(a, s)).collect();
    let mut ct: Vec<usize> = b0.iter().rev().map(|&x| sigma(x)).collect();
    ct.extend_from_slice(&t0);
    let mut cb: Vec<usize> = t0.iter().rev().map(|&x| sigma(x)).collect();
    cb.extend_from_slice(&b0);
    (ct, cb)
}

/// Vertices of the cover surface and the endpoints of its sides.
///
/// Each cover side is oriented with positive horizontal holonomy. Vertex
/// classes are the points of the cover lying over polygon corners; a class
/// is ramified when σ fixes it.
#[derive(Debug, Clone)]
pub struct CoverSkeleton {
    /// Start and end vertex class of each cover side.
    pub ends: Vec<(usize, usize)>,
    /// Number of vertex classes.
    pub vertex_count: usize,
    /// σ-image of each vertex class.
    pub vertex_sigma: Vec<usize>,
    /// Cone angle of each class in units of π.
    pub angle: Vec<i64>,
}

impl CoverSkeleton {
    fn build(c: &CoverIet) -> Self {
        let p = c.base();
        let (l, m) = (p.top().len(), p.bottom().len());
        let per = l + m + 2;
        let vid = |sheet: usize, row: Row, i: usize| -> usize {
            sheet * per
                + match row {
                    Row::Top => i,
                    Row::Bottom => l + 1 + i,
                }
        };
        let mut parent: Vec<usize> = (0..2 * per).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        let union = |p: &mut Vec<usize>, a: usize, b: usize| {
            let (ra, rb) = (find(p, a), find(p, b));
            if ra != rb {
                p[ra] = rb;
            }
        };
        for sheet in 0..2 {
            union(&mut parent, vid(sheet, Row::Top, 0), vid(sheet, Row::Bottom, 0));
            union(&mut parent, vid(sheet, Row::Top, l), vid(sheet, Row::Bottom, m));
        }
        // Every cover side appears at two slot instances; collect them with
        // their (start, end) raw vertex ids in the rightward orientation.
        let n = c.n();
        let mut appearances: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
        for row in [Row::Top, Row::Bottom] {
            for i in 0..p.row(row).len() {
                let x = c.label(Slot { row, index: i });
                appearances[x].push((vid(0, row, i), vid(0, row, i + 1)));
                appearances[sigma(x)].push((vid(1, row, i + 1), vid(1, row, i)));
            }
        }
        for app in &appearances {
            debug_assert_eq!(app.len(), 2);
            union(&mut parent, app[0].0, app[1].0);
            union(&mut parent, app[0].1, app[1].1);
        }
        let mut class_of = vec![usize::MAX; 2 * per];
        let mut count = 0;
        for v in 0..2 * per {
            let r = find(&mut parent, v);
            if class_of[r] == usize::MAX {
                class_of[r] = count;
                count += 1;
            }
            class_of[v] = class_of[r];
        }
        let mut angle = vec![0i64; count];
        for sheet in 0..2 {
            for i in 1..l {
                angle[class_of[vid(sheet, Row::Top, i)]] += 1;
            }
            for j in 1..m {
                angle[class_of[vid(sheet, Row::Bottom, j)]] += 1;
            }
        }
        let mut vertex_sigma = vec![0; count];
        for row in [Row::Top, Row::Bottom] {
            let len = p.row(row).len();
            for i in 0..=len {
                vertex_sigma[class_of[vid(0, row, i)]] = class_of[vid(1, row, i)];
                vertex_sigma[class_of[vid(1, row, i)]] = class_of[vid(0, row, i)];
            }
        }
        let ends = appearances.iter().map(|a| (class_of[a[0].0], class_of[a[0].1])).collect();
        CoverSkeleton { ends, vertex_count: count, vertex_sigma, angle }
    }

    pub fn is_ramified(&self, v: usize) -> bool {
        self.vertex_sigma[v] == v
    }

    /// Translation-surface pattern of the cover: a class of angle `2π(k+1)`
    /// has order `k`; order 0 is a marked point.
    pub fn pattern(&self) -> SingularityPattern {
        SingularityPattern::raw(self.angle.iter().map(|a| a / 2 - 1), 0)
    }

    /// Genus of the cover from its vertex angles.
    pub fn genus(&self) -> i64 {
        let s: i64 = self.angle.iter().map(|a| a / 2 - 1).sum();
        (s + 2) / 2
    }
}

/// Parity class of a vector over the doubled alphabet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Parity {
    Plus,
    Minus,
    Mixed,
}

/// A real vector over the doubled alphabet with its parity.
#[derive(Debug, Clone, PartialEq)]
pub struct SignedVector {
    pub entries: Vec<f64>,
    pub parity: Parity,
}

impl SignedVector {
    pub fn new(entries: Vec<f64>) -> Self {
        let parity = parity_of(&entries);
        SignedVector { entries, parity }
    }
}

pub fn parity_of(v: &[f64]) -> Parity {
    let plus = v.chunks(2).all(|p| p[0] == p[1]);
    let minus = v.chunks(2).all(|p| p[0] == -p[1]);
    match (plus, minus) {
        (true, false) => Parity::Plus,
        (false, true) => Parity::Minus,
        (true, true) => Parity::Plus,
        _ => Parity::Mixed,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

/// `P± = (Id ± σ)/2`.
pub fn project(v: &[f64], sign: Sign) -> SignedVector {
    let s = match sign {
        Sign::Plus => 1.0,
        Sign::Minus => -1.0,
    };
    let mut out = vec![0.0; v.len()];
    for (o, p) in out.chunks_mut(2).zip(v.chunks(2)) {
        o[0] = 0.5 * (p[0] + s * p[1]);
        o[1] = s * o[0];
    }
    let parity = match sign {
        Sign::Plus => Parity::Plus,
        Sign::Minus => Parity::Minus,
    };
    SignedVector { entries: out, parity }
}

/// Integer form of `2P±`.
pub fn project_int(v: &[i64], sign: Sign) -> Vec<i64> {
    let s = match sign {
        Sign::Plus => 1,
        Sign::Minus => -1,
    };
    let mut out = vec![0; v.len()];
    for (o, p) in out.chunks_mut(2).zip(v.chunks(2)) {
        o[0] = p[0] + s * p[1];
        o[1] = s * o[0];
    }
    out
}

/// Sums σ-pairs onto base letters. The kernel is the parity-`−` subspace.
pub fn push_forward(v: &[f64]) -> Vec<f64> {
    v.chunks(2).map(|p| p[0] + p[1]).collect()
}

/// Duplicates a base vector onto both sheets.
pub fn lift(u: &[f64]) -> Vec<f64> {
    u.iter().flat_map(|&x| [x, x]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cover(s: &str) -> CoverIet {
        orient_double_cover(&GeneralizedPermutation::parse(s).unwrap()).unwrap()
    }

    #[test]
    fn lifted_rows_are_classical() {
        let c = cover("b d b / a d a c c");
        assert_eq!(c.n(), 8);
        assert!(c.is_classical());
        assert!(c.is_sigma_symmetric());
        let (t, b) = c.projected_base_rows();
        assert_eq!(t, c.base().top());
        assert_eq!(b, c.base().bottom());
    }

    #[test]
    fn hand_lift_of_small_example() {
        // a a b / b c c: letters a=0, b=1, c=2.
        let c = cover("a a b / b c c");
        let names: Vec<String> = c.cover_top().iter().map(|&x| c.cover_name(x)).collect();
        assert_eq!(names, ["c0", "c1", "b1", "a0", "a1", "b0"]);
        let names: Vec<String> = c.cover_bottom().iter().map(|&x| c.cover_name(x)).collect();
        assert_eq!(names, ["b1", "a0", "a1", "b0", "c0", "c1"]);
    }

    #[test]
    fn abelian_rejected() {
        let p = GeneralizedPermutation::parse_allow_abelian("a b / b a").unwrap();
        assert_eq!(orient_double_cover(&p), Err(Error::AbelianInput));
    }

    #[test]
    fn cover_pattern_matches_hat() {
        let c = cover("b d b / a d a c c");
        let sk = c.skeleton();
        assert_eq!(sk.genus(), 2);
        assert_eq!(sk.pattern().orders(), &[1, 1]);
        let ramified = (0..sk.vertex_count).filter(|&v| sk.is_ramified(v)).count();
        assert_eq!(ramified, 2);
    }

    #[test]
    fn projectors() {
        let v = vec![1.0, 1.0, 0.0, 0.0];
        assert!(project(&v, Sign::Minus).entries.iter().all(|&x| x == 0.0));
        let v = vec![1.0, -1.0, 0.0, 0.0];
        assert_eq!(project(&v, Sign::Minus).entries, v);
        let v = vec![1.0, 0.0, 0.0, 0.0];
        let s: Vec<f64> = project(&v, Sign::Plus).entries.iter().zip(&project(&v, Sign::Minus).entries).map(|(a, b)| a + b).collect();
        assert_eq!(s, v);
        assert_eq!(push_forward(&[1.0, 1.0]), vec![2.0]);
        assert_eq!(push_forward(&lift(&[0.5, 3.0])), vec![1.0, 6.0]);
    }
}
