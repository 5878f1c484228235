//! Intersection forms on the cover, the splitting
//! `H₁ = H₁⁺ ⊕ Ĥ₁⁻ ⊕ 𝒞`, and exact checks that transition matrices respect
//! them.
//!
//! Everything lives in sheet-signed letter coordinates over the doubled
//! alphabet. Chains are taken modulo the polygon relation `r`; the integer
//! map `Q = (r·r) I − r rᵀ` picks the representative orthogonal to `r`
//! (scaled by `r·r`) and commutes with σ. The form used throughout is
//! `Ω̂ = Q Ω̃ Q / gcd`, where `Ω̃` is the classical crossing matrix of the
//! two cover rows. Its image is the absolute homology of the cover.
//!
//! A homology class is stored together with a preimage `u` under `Ω̂`, so
//! `ω(Ω̂u, h') = uᵀ h'` is one dot product.

use std::collections::VecDeque;

use crate::cover::{sheet_sign, sigma, CoverIet};
use crate::error::{Error, Result};
use crate::genperm::{stratum_of, GeneralizedPermutation};
use crate::linalg::{dot, independent_subset, nullspace, rank, same_span, solve_scaled, IntMatrix};
use crate::rauzy::TransitionMatrix;
use crate::strata::stratum_info;

/// `+1` if `x` precedes `y` in the top row and follows it in the bottom row,
/// `−1` for the reverse, else 0.
fn crossing_matrix(top: &[usize], bottom: &[usize], n: usize) -> IntMatrix {
    let mut pt = vec![0usize; n];
    let mut pb = vec![0usize; n];
    for (i, &x) in top.iter().enumerate() {
        pt[x] = i;
    }
    for (i, &x) in bottom.iter().enumerate() {
        pb[x] = i;
    }
    let mut w = vec![vec![0i64; n]; n];
    for x in 0..n {
        for y in 0..n {
            if pt[x] < pt[y] && pb[x] > pb[y] {
                w[x][y] = 1;
            } else if pt[x] > pt[y] && pb[x] < pb[y] {
                w[x][y] = -1;
            }
        }
    }
    w
}

/// Intersection matrix of a classical (Abelian) permutation in letter
/// coordinates.
pub fn classical_intersection_form(p: &GeneralizedPermutation) -> Result<IntMatrix> {
    if !p.is_abelian() {
        return Err(Error::BadConfig("classical form needs an Abelian permutation".into()));
    }
    Ok(crossing_matrix(p.top(), p.bottom(), p.d()))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntersectionForm {
    /// `Ω̂`: antisymmetric, rank `2ĝ`.
    pub omega: IntMatrix,
    /// `Ω̃` before projection.
    pub raw: IntMatrix,
    /// Polygon relation `r`.
    pub relation: Vec<i64>,
}

pub fn intersection_form(c: &CoverIet) -> IntersectionForm {
    let n = c.n();
    let mut raw = crossing_matrix(c.cover_top(), c.cover_bottom(), n);
    for (x, row) in raw.iter_mut().enumerate() {
        for (y, v) in row.iter_mut().enumerate() {
            *v *= sheet_sign(x) * sheet_sign(y);
        }
    }
    let relation = c.relation();
    let q = relation_projector(&relation);
    let mut omega = mul_i64(&mul_i64(&q, &raw), &q);
    let g = omega.iter().flatten().fold(0i64, |g, &x| num_integer::gcd(g, x));
    if g > 1 {
        omega.iter_mut().flatten().for_each(|x| *x /= g);
    }
    IntersectionForm { omega, raw, relation }
}

fn mul_i64(a: &IntMatrix, b: &IntMatrix) -> IntMatrix {
    crate::linalg::mul(a, b)
}

/// `Q = (r·r) I − r rᵀ`.
pub fn relation_projector(r: &[i64]) -> IntMatrix {
    let n = r.len();
    let rr = dot(r, r);
    let mut q = vec![vec![0i64; n]; n];
    for i in 0..n {
        for j in 0..n {
            q[i][j] = -r[i] * r[j] + if i == j { rr } else { 0 };
        }
    }
    // A classical cover has r = 0, where the identity is the right map.
    if rr == 0 {
        return crate::linalg::identity(n);
    }
    q
}

impl IntersectionForm {
    pub fn dim(&self) -> usize {
        self.omega.len()
    }

    pub fn rank(&self) -> usize {
        rank(&self.omega)
    }

    pub fn projector(&self) -> IntMatrix {
        relation_projector(&self.relation)
    }

    /// Reduces a chain modulo the relation: `Q h`.
    pub fn reduce(&self, h: &[i64]) -> Vec<i64> {
        crate::linalg::mul_vec(&self.projector(), h)
    }

    /// A basis of the homology subspace `Im Ω̂`, with preimages.
    pub fn homology_basis(&self) -> Classes {
        let n = self.dim();
        let cands: Vec<Vec<i64>> = (0..n).map(|j| self.omega.iter().map(|row| row[j]).collect()).collect();
        let idx = independent_subset(&cands);
        Classes {
            vectors: idx.iter().map(|&j| cands[j].clone()).collect(),
            preimages: idx.iter().map(|&j| unit(n, j)).collect(),
        }
    }

    /// Writes `h ∈ Im Ω̂` as a class with preimage (scaling `h` by an
    /// integer if needed). `None` if `h` is not a homology class.
    pub fn class_of(&self, h: &[i64]) -> Option<(Vec<i64>, Vec<i64>)> {
        let (u, t) = solve_scaled(&self.omega, h)?;
        let (u, t) = if t < 0 { (u.iter().map(|x| -x).collect(), -t) } else { (u, t) };
        Some((h.iter().map(|x| x * t).collect(), u))
    }
}

fn unit(n: usize, j: usize) -> Vec<i64> {
    let mut v = vec![0; n];
    v[j] = 1;
    v
}

/// Homology classes `vectors[i] = Ω̂ preimages[i]`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Classes {
    pub vectors: Vec<Vec<i64>>,
    pub preimages: Vec<Vec<i64>>,
}

impl Classes {
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// `ω(self_i, other_j)`.
    pub fn pairing(&self, other: &Classes) -> IntMatrix {
        self.preimages.iter().map(|u| other.vectors.iter().map(|h| dot(u, h)).collect()).collect()
    }

    fn extend(&mut self, other: Classes) {
        self.vectors.extend(other.vectors);
        self.preimages.extend(other.preimages);
    }
}

/// The three summands.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitHomology {
    /// `H₁⁺`, dimension `2g`.
    pub plus: Classes,
    /// `Ĥ₁⁻`, the ω-orthogonal complement of 𝒞 in `H₁⁻`.
    pub minus_hat: Classes,
    /// `𝒞`, dimension `max(2n−2, 0)`.
    pub c: Classes,
}

impl SplitHomology {
    pub fn basis_plus(&self) -> &[Vec<i64>] {
        &self.plus.vectors
    }

    /// `Ĥ₁⁻` followed by `𝒞`: a basis of `H₁⁻`.
    pub fn basis_minus(&self) -> Vec<Vec<i64>> {
        let mut v = self.minus_hat.vectors.clone();
        v.extend(self.c.vectors.iter().cloned());
        v
    }

    pub fn basis_c(&self) -> &[Vec<i64>] {
        &self.c.vectors
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.plus.len(), self.minus_hat.len() + self.c.len(), self.c.len())
    }

    pub fn minus(&self) -> Classes {
        let mut m = self.minus_hat.clone();
        m.extend(self.c.clone());
        m
    }
}

fn block_classes(form: &IntersectionForm, sign: i64) -> Classes {
    let n = form.dim();
    let mut vectors = Vec::new();
    let mut preimages = Vec::new();
    for a in 0..n / 2 {
        let mut u = vec![0i64; n];
        u[2 * a] = 1;
        u[2 * a + 1] = sign;
        vectors.push(crate::linalg::mul_vec(&form.omega, &u));
        preimages.push(u);
    }
    let idx = independent_subset(&vectors);
    Classes {
        vectors: idx.iter().map(|&i| vectors[i].clone()).collect(),
        preimages: idx.iter().map(|&i| preimages[i].clone()).collect(),
    }
}

/// Signed chain of cover sides along a shortest path between two vertex
/// classes, preferring paths that avoid other ramified vertices.
fn side_path(c: &CoverIet, from: usize, to: usize) -> Option<Vec<i64>> {
    let sk = c.skeleton();
    let mut adj: Vec<Vec<(usize, usize, i64)>> = vec![Vec::new(); sk.vertex_count];
    for (x, &(s, e)) in sk.ends.iter().enumerate() {
        adj[s].push((e, x, 1));
        adj[e].push((s, x, -1));
    }
    for strict in [true, false] {
        let mut prev: Vec<Option<(usize, usize, i64)>> = vec![None; sk.vertex_count];
        let mut seen = vec![false; sk.vertex_count];
        seen[from] = true;
        let mut queue = VecDeque::from([from]);
        while let Some(v) = queue.pop_front() {
            if v == to {
                break;
            }
            if strict && v != from && sk.is_ramified(v) {
                continue;
            }
            for &(w, x, s) in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    prev[w] = Some((v, x, s));
                    queue.push_back(w);
                }
            }
        }
        if !seen[to] {
            continue;
        }
        let mut chain = vec![0i64; c.n()];
        let mut v = to;
        while v != from {
            let (u, x, s) = prev[v].unwrap();
            chain[x] += s;
            v = u;
        }
        return Some(chain);
    }
    None
}

/// Anti-invariant cycles through pairs of ramified points: for a path `l`
/// of sides from the first ramified vertex to the `j`-th, the closed cycle
/// `l − σ l`, in sheet-signed coordinates and reduced by `Q`.
pub fn pole_pair_cycles(c: &CoverIet, form: &IntersectionForm) -> Result<Vec<Vec<i64>>> {
    let sk = c.skeleton();
    let ram: Vec<usize> = (0..sk.vertex_count).filter(|&v| sk.is_ramified(v)).collect();
    let mut out = Vec::new();
    if ram.len() < 2 {
        return Ok(out);
    }
    for &target in &ram[1..ram.len() - 1] {
        let l = side_path(c, ram[0], target).ok_or_else(|| Error::BadSurface("disconnected cover skeleton".into()))?;
        // Geometric σ sends side x to −σ(x); l − σl = l + S l.
        let mut geo = l.clone();
        for (x, &v) in l.iter().enumerate() {
            geo[sigma(x)] += v;
        }
        let twisted: Vec<i64> = geo.iter().enumerate().map(|(x, &v)| v * sheet_sign(x)).collect();
        out.push(form.reduce(&twisted));
    }
    Ok(out)
}

pub fn split_homology(c: &CoverIet, form: &IntersectionForm) -> Result<SplitHomology> {
    let info = stratum_info(&stratum_of(c.base()));
    let expect = |what: &str, got: usize, expected: i64| -> Result<()> {
        if got as i64 != expected {
            return Err(Error::RankMismatch { what: what.into(), got, expected: expected.max(0) as usize });
        }
        Ok(())
    };
    expect("rank of the intersection form", form.rank(), 2 * info.cover_genus)?;
    let plus = block_classes(form, 1);
    expect("invariant block", plus.len(), info.dim_invariant)?;
    let minus = block_classes(form, -1);
    expect("anti-invariant block", minus.len(), info.dim_anti_invariant)?;

    let mut cc = Classes::default();
    for h in pole_pair_cycles(c, form)? {
        let (v, u) = form.class_of(&h).ok_or_else(|| Error::RankMismatch {
            what: "pole-pair cycle outside the homology subspace".into(),
            got: 0,
            expected: 1,
        })?;
        cc.vectors.push(v);
        cc.preimages.push(u);
    }
    let idx = independent_subset(&cc.vectors);
    let cc = Classes {
        vectors: idx.iter().map(|&i| cc.vectors[i].clone()).collect(),
        preimages: idx.iter().map(|&i| cc.preimages[i].clone()).collect(),
    };
    expect("subspace C", cc.len(), (2 * info.n() - 2).max(0))?;
    expect("form restricted to C", rank(&cc.pairing(&cc)), cc.len() as i64)?;

    // Coefficients x with Σ xᵢ ω(mᵢ, c_k) = 0 for every k.
    let minus_hat = if cc.is_empty() {
        minus
    } else {
        let g: IntMatrix = cc.vectors.iter().map(|h| minus.preimages.iter().map(|u| dot(u, h)).collect()).collect();
        let ker = nullspace(&g, minus.len());
        let combine = |family: &[Vec<i64>], x: &[i64]| -> Vec<i64> {
            let mut v = vec![0i64; form.dim()];
            for (coef, f) in x.iter().zip(family) {
                for (a, b) in v.iter_mut().zip(f) {
                    *a += coef * b;
                }
            }
            v
        };
        Classes {
            vectors: ker.iter().map(|x| combine(&minus.vectors, x)).collect(),
            preimages: ker.iter().map(|x| combine(&minus.preimages, x)).collect(),
        }
    };
    expect("complement of C", minus_hat.len(), info.dim_anti_invariant - cc.len() as i64)?;
    Ok(SplitHomology { plus, minus_hat, c: cc })
}

fn mul_i128(a: &[Vec<i128>], b: &[Vec<i128>]) -> Option<Vec<Vec<i128>>> {
    let m = b.first().map_or(0, |r| r.len());
    let mut out = vec![vec![0i128; m]; a.len()];
    for (i, arow) in a.iter().enumerate() {
        for (l, brow) in b.iter().enumerate() {
            let x = arow[l];
            if x == 0 {
                continue;
            }
            for j in 0..m {
                out[i][j] = out[i][j].checked_add(x.checked_mul(brow[j])?)?;
            }
        }
    }
    Some(out)
}

fn widen(m: &IntMatrix) -> Vec<Vec<i128>> {
    m.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect()
}

fn transpose128(m: &[Vec<i128>]) -> Vec<Vec<i128>> {
    let c = m.first().map_or(0, |r| r.len());
    (0..c).map(|j| m.iter().map(|r| r[j]).collect()).collect()
}

/// Exact check that `b` (taking the state with form `before` to the state
/// with form `after`) is symplectic on homology: with `Q` the relation map
/// of `after`, `Q B̃ᵀ Ω̃_before B̃ Q = Q Ω̃_after Q`, `B̃` maps `r_after^⊥`
/// into `r_before^⊥`, and `B̃` commutes with σ.
pub fn check_symplectic(b: &TransitionMatrix, before: &IntersectionForm, after: &IntersectionForm) -> bool {
    let bt = &b.cover;
    let n = bt.len();
    if n != before.dim() || n != after.dim() {
        return false;
    }
    for i in 0..n {
        for j in 0..n {
            if bt[i][j] != bt[sigma(i)][sigma(j)] {
                return false;
            }
        }
    }
    let run = || -> Option<bool> {
        let bm = widen(bt);
        let q = widen(&after.projector());
        let bq = mul_i128(&bm, &q)?;
        let r: Vec<Vec<i128>> = vec![before.relation.iter().map(|&x| x as i128).collect()];
        if mul_i128(&r, &bq)?[0].iter().any(|&x| x != 0) {
            return Some(false);
        }
        let lhs = mul_i128(&mul_i128(&transpose128(&bq), &widen(&before.raw))?, &bq)?;
        let rhs = mul_i128(&mul_i128(&q, &widen(&after.raw))?, &q)?;
        Some(lhs == rhs)
    };
    run().unwrap_or_else(|| check_symplectic_big(b, before, after))
}

fn check_symplectic_big(b: &TransitionMatrix, before: &IntersectionForm, after: &IntersectionForm) -> bool {
    use num_bigint::BigInt;
    type M = Vec<Vec<BigInt>>;
    let big = |m: &IntMatrix| -> M { m.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect() };
    let mul = |a: &M, b: &M| -> M {
        let m = b.first().map_or(0, |r| r.len());
        a.iter()
            .map(|arow| (0..m).map(|j| arow.iter().zip(b).map(|(x, brow)| x * &brow[j]).sum()).collect())
            .collect()
    };
    let t = |m: &M| -> M {
        let c = m.first().map_or(0, |r| r.len());
        (0..c).map(|j| m.iter().map(|r| r[j].clone()).collect()).collect()
    };
    let q = big(&after.projector());
    let bq = mul(&big(&b.cover), &q);
    let r = big(&vec![before.relation.clone()]);
    if mul(&r, &bq)[0].iter().any(|x| *x != BigInt::from(0)) {
        return false;
    }
    let lhs = mul(&mul(&t(&bq), &big(&before.raw)), &bq);
    let rhs = mul(&mul(&q, &big(&after.raw)), &q);
    lhs == rhs
}

/// Pushes homology vectors along `b`: `h ↦ Q_after B̃ᵀ h`.
/// `None` if an entry leaves `i64`.
pub fn transport(b: &TransitionMatrix, after: &IntersectionForm, hs: &[Vec<i64>]) -> Option<Vec<Vec<i64>>> {
    let bq = mul_i128(&widen(&after.projector()), &transpose128(&widen(&b.cover)))?;
    hs.iter()
        .map(|h| {
            let h128: Vec<Vec<i128>> = h.iter().map(|&x| vec![x as i128]).collect();
            let v = mul_i128(&bq, &h128)?;
            let col: Vec<i128> = v.iter().map(|r| r[0]).collect();
            let g = col.iter().fold(0i128, |g, &x| num_integer::gcd(g, x));
            col.iter().map(|&x| i64::try_from(if g > 1 { x / g } else { x }).ok()).collect()
        })
        .collect()
}

/// Which summands `b` carries onto the corresponding summands of the
/// target state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplittingCheck {
    pub plus: bool,
    pub minus: bool,
    pub c: bool,
}

impl SplittingCheck {
    pub fn all(&self) -> bool {
        self.plus && self.minus && self.c
    }
}

pub fn check_splitting(
    b: &TransitionMatrix,
    after: &IntersectionForm,
    split_before: &SplitHomology,
    split_after: &SplitHomology,
) -> SplittingCheck {
    let ok = |old: &[Vec<i64>], new: &[Vec<i64>]| -> bool {
        match transport(b, after, old) {
            Some(t) => same_span(&t, new),
            None => false,
        }
    };
    SplittingCheck {
        plus: ok(split_before.basis_plus(), split_after.basis_plus()),
        minus: ok(&split_before.basis_minus(), &split_after.basis_minus()),
        c: ok(split_before.basis_c(), split_after.basis_c()),
    }
}
