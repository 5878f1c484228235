//! Square-tiled orienting double covers and their cylinder decompositions.
//!
//! A fixture is a translation surface tiled by `N` unit squares, given by
//! its right-neighbor map `h`, its up-neighbor map `v` and a deck
//! involution `τ` acting on squares as a half turn: `τ h τ = h⁻¹`,
//! `τ v τ = v⁻¹`. The quotient by `τ` is a half-translation surface tiled by
//! `N/2` squares.
//!
//! Chains live on the edges of the tiling: `e^h_x` is the bottom edge of
//! square `x` (rightward), `e^v_x` its left edge (upward); index `x` and
//! `N + x`. Dual chains live on the dual graph: `d^h_x` joins the center of
//! `x` to the center of `h x`, `d^v_x` the center of `x` to that of `v x`.
//! A primal cycle `a` and a dual cycle `β` meet with
//! `a · β = Σ_x a^h_{vx} β^v_x − a^v_{hx} β^h_x`.

use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{rank, IntMatrix};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SquareTiledCover {
    h: Vec<usize>,
    v: Vec<usize>,
    deck: Vec<usize>,
}

fn inverse(p: &[usize]) -> Vec<usize> {
    let mut q = vec![0; p.len()];
    for (i, &x) in p.iter().enumerate() {
        q[x] = i;
    }
    q
}

fn is_permutation(p: &[usize]) -> bool {
    let mut seen = vec![false; p.len()];
    for &x in p {
        if x >= p.len() || seen[x] {
            return false;
        }
        seen[x] = true;
    }
    true
}

fn cycles(p: &[usize]) -> Vec<Vec<usize>> {
    let mut seen = vec![false; p.len()];
    let mut out = Vec::new();
    for s in 0..p.len() {
        if seen[s] {
            continue;
        }
        let mut c = Vec::new();
        let mut x = s;
        while !seen[x] {
            seen[x] = true;
            c.push(x);
            x = p[x];
        }
        out.push(c);
    }
    out
}

fn parse_cycles(text: &str, n: usize) -> Result<Vec<usize>> {
    let bad = |reason: &str| Error::Syntax { input: text.to_string(), reason: reason.to_string() };
    let mut p: Vec<usize> = (0..n).collect();
    let mut seen = vec![false; n];
    let mut rest = text.trim();
    while !rest.is_empty() {
        let open = rest.strip_prefix('(').ok_or_else(|| bad("expected '('"))?;
        let close = open.find(')').ok_or_else(|| bad("unclosed cycle"))?;
        let items: Vec<usize> = open[..close]
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .map(|s| s.parse::<usize>().map_err(|_| bad("non-numeric entry")))
            .collect::<Result<_>>()?;
        for (i, &x) in items.iter().enumerate() {
            if x >= n || seen[x] {
                return Err(bad("entry out of range or repeated"));
            }
            seen[x] = true;
            p[x] = items[(i + 1) % items.len()];
        }
        rest = open[close + 1..].trim_start();
    }
    Ok(p)
}

fn cycle_string(p: &[usize]) -> String {
    cycles(p)
        .iter()
        .filter(|c| c.len() > 1)
        .map(|c| format!("({})", c.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")))
        .collect::<String>()
}

impl SquareTiledCover {
    /// Validates the maps: permutations, connectivity, a fixed-point-free
    /// involution and the half-turn relations.
    pub fn new(h: Vec<usize>, v: Vec<usize>, deck: Vec<usize>) -> Result<Self> {
        let n = h.len();
        if n == 0 || v.len() != n || deck.len() != n {
            return Err(Error::BadSurface("maps must have equal nonzero length".into()));
        }
        if !is_permutation(&h) || !is_permutation(&v) || !is_permutation(&deck) {
            return Err(Error::BadSurface("h, v and deck must be permutations".into()));
        }
        let s = SquareTiledCover { h, v, deck };
        if !s.relations_hold() {
            return Err(Error::BadSurface("deck must be a fixed-point-free involution with τhτ = h⁻¹ and τvτ = v⁻¹".into()));
        }
        if !s.is_connected() {
            return Err(Error::BadSurface("squares do not form a connected surface".into()));
        }
        Ok(s)
    }

    /// Builds without validation; `relations_hold` and `is_connected` report.
    pub fn new_unchecked(h: Vec<usize>, v: Vec<usize>, deck: Vec<usize>) -> Self {
        SquareTiledCover { h, v, deck }
    }

    pub fn relations_hold(&self) -> bool {
        let (hi, vi) = (inverse(&self.h), inverse(&self.v));
        (0..self.n()).all(|x| {
            let t = self.deck[x];
            t != x && self.deck[t] == x && self.deck[self.h[t]] == hi[x] && self.deck[self.v[t]] == vi[x]
        })
    }

    pub fn is_connected(&self) -> bool {
        let n = self.n();
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(x) = stack.pop() {
            for y in [self.h[x], self.v[x]] {
                if !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
        seen.iter().all(|&b| b)
    }

    pub fn n(&self) -> usize {
        self.h.len()
    }

    pub fn h(&self) -> &[usize] {
        &self.h
    }

    pub fn v(&self) -> &[usize] {
        &self.v
    }

    pub fn deck(&self) -> &[usize] {
        &self.deck
    }

    /// A copy with a different deck map, unvalidated.
    pub fn with_deck(&self, deck: Vec<usize>) -> Self {
        SquareTiledCover { h: self.h.clone(), v: self.v.clone(), deck }
    }

    /// Parses `N`, `h`, `v`, `deck` lines (cycle notation, 0-based).
    pub fn parse(text: &str) -> Result<Self> {
        let mut n = None;
        let mut maps: [Option<String>; 3] = [None, None, None];
        for line in text.lines() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, val) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
            match key {
                "N" => {
                    n = Some(val.trim().parse::<usize>().map_err(|_| Error::Syntax { input: line.into(), reason: "bad N".into() })?)
                }
                "h" => maps[0] = Some(val.to_string()),
                "v" => maps[1] = Some(val.to_string()),
                "deck" => maps[2] = Some(val.to_string()),
                _ => return Err(Error::Syntax { input: line.into(), reason: "unknown key".into() }),
            }
        }
        let n = n.ok_or_else(|| Error::Syntax { input: text.into(), reason: "missing N".into() })?;
        let get = |i: usize, name: &str| -> Result<Vec<usize>> {
            let s = maps[i].as_deref().ok_or_else(|| Error::Syntax { input: text.into(), reason: format!("missing {name}") })?;
            parse_cycles(s, n)
        };
        SquareTiledCover::new(get(0, "h")?, get(1, "v")?, get(2, "deck")?)
    }

    pub fn to_file_string(&self) -> String {
        format!("N {}\nh {}\nv {}\ndeck {}\n", self.n(), cycle_string(&self.h), cycle_string(&self.v), cycle_string(&self.deck))
    }

    /// Vertex class of the lower-left corner of each square, and the cone
    /// angle of each class in units of 2π.
    pub fn vertices(&self) -> (Vec<usize>, Vec<usize>) {
        let (hi, vi) = (inverse(&self.h), inverse(&self.v));
        // Going around LL(x) counterclockwise returns to the square v h v⁻¹ h⁻¹ x.
        let c: Vec<usize> = (0..self.n()).map(|x| self.v[self.h[vi[hi[x]]]]).collect();
        let cyc = cycles(&c);
        let mut class = vec![0; self.n()];
        for (k, cy) in cyc.iter().enumerate() {
            for &x in cy {
                class[x] = k;
            }
        }
        (class, cyc.iter().map(|c| c.len()).collect())
    }

    /// `τ` on vertex classes: `LL(x) ↦ UR(τx) = LL(h v τx)`.
    fn vertex_deck(&self, class: &[usize], count: usize) -> Vec<usize> {
        let mut t = vec![0; count];
        for x in 0..self.n() {
            t[class[x]] = class[self.h[self.v[self.deck[x]]]];
        }
        t
    }

    /// Edge boundary matrix: rows are vertex classes, columns edges.
    pub fn boundary_matrix(&self) -> IntMatrix {
        let n = self.n();
        let (class, angles) = self.vertices();
        let mut m = vec![vec![0i64; 2 * n]; angles.len()];
        for x in 0..n {
            m[class[self.h[x]]][x] += 1;
            m[class[x]][x] -= 1;
            m[class[self.v[x]]][n + x] += 1;
            m[class[x]][n + x] -= 1;
        }
        m
    }

    /// Boundaries of the squares as primal chains.
    pub fn face_boundaries(&self) -> Vec<Vec<i64>> {
        let n = self.n();
        (0..n)
            .map(|x| {
                let mut c = vec![0i64; 2 * n];
                c[x] += 1;
                c[n + self.h[x]] += 1;
                c[self.v[x]] -= 1;
                c[n + x] -= 1;
                c
            })
            .collect()
    }

    /// Boundaries of the dual faces (one per vertex) as dual chains.
    pub fn dual_face_boundaries(&self) -> Vec<Vec<i64>> {
        let n = self.n();
        let (hi, vi) = (inverse(&self.h), inverse(&self.v));
        let (class, angles) = self.vertices();
        let mut out = vec![vec![0i64; 2 * n]; angles.len()];
        // Around LL(x): dual edges h⁻¹x→x (below the vertex? no: the dual
        // edge from center(h⁻¹x) to center(x) passes above LL(x)).
        // Counterclockwise around LL(x) the centers run x, h⁻¹x, v⁻¹h⁻¹x,
        // h v⁻¹h⁻¹x and back to the next square with the same corner.
        for x in 0..n {
            let k = class[x];
            let nw = hi[x];
            let sw = vi[nw];
            let se = self.h[sw];
            out[k][nw] -= 1;
            out[k][n + sw] -= 1;
            out[k][sw] += 1;
            out[k][n + se] += 1;
        }
        out
    }

    /// `a · β` for a primal chain `a` and a dual chain `β`.
    pub fn intersection(&self, a: &[i64], beta: &[i64]) -> i64 {
        let n = self.n();
        (0..n).map(|x| a[self.v[x]] * beta[n + x] - a[n + self.h[x]] * beta[x]).sum()
    }

    /// Deck map on primal chains: `e^h_x ↦ −e^h_{vτx}`, `e^v_x ↦ −e^v_{hτx}`.
    pub fn sigma_primal(&self, a: &[i64]) -> Vec<i64> {
        let n = self.n();
        let mut out = vec![0i64; 2 * n];
        for x in 0..n {
            let t = self.deck[x];
            out[self.v[t]] -= a[x];
            out[n + self.h[t]] -= a[n + x];
        }
        out
    }

    /// Deck map on dual chains: `d^h_x ↦ −d^h_{h⁻¹τx}`, `d^v_x ↦ −d^v_{v⁻¹τx}`.
    pub fn sigma_dual(&self, b: &[i64]) -> Vec<i64> {
        let n = self.n();
        let (hi, vi) = (inverse(&self.h), inverse(&self.v));
        let mut out = vec![0i64; 2 * n];
        for x in 0..n {
            let t = self.deck[x];
            out[hi[t]] -= b[x];
            out[n + vi[t]] -= b[n + x];
        }
        out
    }

    /// Dimension of `H₁` of the cover, `2ĝ`.
    pub fn cover_homology_rank(&self) -> usize {
        2 * self.n() - rank(&self.boundary_matrix()) - rank(&self.face_boundaries())
    }

    pub fn cover_genus(&self) -> usize {
        self.cover_homology_rank() / 2
    }

    /// Points fixed by the deck map: vertex classes, and edges whose
    /// midpoint is fixed (as primal edge indices).
    pub fn odd_points(&self) -> (Vec<usize>, Vec<usize>) {
        let n = self.n();
        let (class, angles) = self.vertices();
        let t = self.vertex_deck(&class, angles.len());
        let verts = (0..angles.len()).filter(|&k| t[k] == k).collect();
        let mut edges = Vec::new();
        for x in 0..n {
            let d = self.deck[x];
            if self.v[d] == x {
                edges.push(x);
            }
            if self.h[d] == x {
                edges.push(n + x);
            }
        }
        (verts, edges)
    }

    pub fn odd_point_count(&self) -> usize {
        let (v, e) = self.odd_points();
        v.len() + e.len()
    }

    /// The quotient chain complex: edge orbits under the deck map, with the
    /// sign each cover edge maps with (0 on folded edges).
    fn base_edges(&self) -> (Vec<usize>, Vec<i64>, usize) {
        let n = self.n();
        let mut orbit = vec![usize::MAX; 2 * n];
        let mut sign = vec![0i64; 2 * n];
        let mut count = 0;
        for e in 0..2 * n {
            if orbit[e] != usize::MAX {
                continue;
            }
            let mut unit = vec![0i64; 2 * n];
            unit[e] = 1;
            let img = self.sigma_primal(&unit);
            let partner = img.iter().position(|&x| x != 0).unwrap();
            if partner == e {
                // Folded edges vanish in the quotient chains.
                orbit[e] = 0;
                continue;
            }
            orbit[e] = count;
            orbit[partner] = count;
            sign[e] = 1;
            sign[partner] = -1;
            count += 1;
        }
        (orbit, sign, count)
    }

    /// Push-forward of a primal chain to the quotient edge chains.
    pub fn push_forward(&self, a: &[i64]) -> Vec<i64> {
        let (orbit, sign, count) = self.base_edges();
        let mut out = vec![0i64; count];
        for (e, &x) in a.iter().enumerate() {
            if sign[e] != 0 {
                out[orbit[e]] += sign[e] * x;
            }
        }
        out
    }

    /// Quotient boundary matrix and face boundaries, for `H₁` of the base.
    fn base_complex(&self) -> (IntMatrix, Vec<Vec<i64>>) {
        let (class, angles) = self.vertices();
        let t = self.vertex_deck(&class, angles.len());
        let mut vorbit = vec![usize::MAX; angles.len()];
        let mut nv = 0;
        for k in 0..angles.len() {
            if vorbit[k] == usize::MAX {
                vorbit[k] = nv;
                vorbit[t[k]] = nv;
                nv += 1;
            }
        }
        let (orbit, sign, count) = self.base_edges();
        let cover_bd = self.boundary_matrix();
        let mut bd = vec![vec![0i64; count]; nv];
        for e in 0..2 * self.n() {
            if sign[e] != 1 {
                continue;
            }
            for (k, row) in cover_bd.iter().enumerate() {
                bd[vorbit[k]][orbit[e]] += row[e];
            }
        }
        let faces = self.face_boundaries().iter().map(|f| self.push_forward(f)).collect();
        (bd, faces)
    }

    /// Genus of the quotient surface.
    pub fn base_genus(&self) -> usize {
        let (bd, faces) = self.base_complex();
        let edges = bd.first().map_or(0, |r| r.len());
        (edges - rank(&bd) - rank(&faces)) / 2
    }
}

impl fmt::Display for SquareTiledCover {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_file_string())
    }
}

/// Dimension of the span of `vectors` in homology modulo `boundaries`.
fn homology_span(vectors: &[Vec<i64>], boundaries: &[Vec<i64>]) -> usize {
    let mut all = boundaries.to_vec();
    let rb = rank(&all);
    all.extend_from_slice(vectors);
    rank(&all) - rb
}

/// Random involution on `0..m`; each element is fixed with probability
/// `p_fixed`.
fn random_involution<R: Rng + ?Sized>(m: usize, p_fixed: f64, rng: &mut R) -> Vec<usize> {
    let mut order: Vec<usize> = (0..m).collect();
    order.shuffle(rng);
    let mut inv: Vec<usize> = (0..m).collect();
    let mut i = 0;
    while i < m {
        if i + 1 == m || rng.gen_bool(p_fixed) {
            i += 1;
        } else {
            let (a, b) = (order[i], order[i + 1]);
            inv[a] = b;
            inv[b] = a;
            i += 2;
        }
    }
    inv
}

/// Glues `m` quotient squares along random side pairings and returns the
/// orienting double cover, or `None` if the quotient is disconnected or a
/// translation surface.
///
/// Horizontal gluing sides are `R_j = 2j`, `L_j = 2j + 1`; vertical ones
/// `T_j = 2j`, `B_j = 2j + 1`. A right side glued to a left side is a
/// translation, two sides of the same kind a half turn, a side glued to
/// itself a fold with a pole at its midpoint. Cover square `(j, s)` has
/// index `2j + s`; sheet 1 is rotated by a half turn.
pub fn glue_squares<R: Rng + ?Sized>(m: usize, p_fold: f64, rng: &mut R) -> Option<SquareTiledCover> {
    let hp = random_involution(2 * m, p_fold, rng);
    let vp = random_involution(2 * m, p_fold, rng);
    let step = |pairing: &[usize], j: usize, s: usize| -> usize {
        let side = 2 * j + s;
        let other = pairing[side];
        let (k, kind) = (other / 2, other % 2);
        if kind != s {
            2 * k + s
        } else {
            2 * k + (1 - s)
        }
    };
    let n = 2 * m;
    let h: Vec<usize> = (0..n).map(|x| step(&hp, x / 2, x % 2)).collect();
    let v: Vec<usize> = (0..n).map(|x| step(&vp, x / 2, x % 2)).collect();
    let deck: Vec<usize> = (0..n).map(|x| x ^ 1).collect();
    SquareTiledCover::new(h, v, deck).ok()
}

/// A random fixture with at most `max_squares` cover squares.
pub fn random_fixture<R: Rng + ?Sized>(max_squares: usize, rng: &mut R) -> SquareTiledCover {
    let max_m = (max_squares / 2).max(1);
    loop {
        let m = rng.gen_range(1..=max_m);
        let p_fold = [0.0, 0.1, 0.3][rng.gen_range(0..3)];
        if let Some(s) = glue_squares(m, p_fold, rng) {
            return s;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    Horizontal,
    Vertical,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cylinder {
    /// Core curve as a primal cycle (the lower boundary of its first row).
    pub core: Vec<i64>,
    /// Core curve as a dual cycle (through the centers of its first row).
    pub dual_core: Vec<i64>,
    pub height: usize,
    pub circumference: usize,
    /// Rows from the lowest one up, each in cyclic order.
    pub rows: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CylinderDecomposition {
    pub direction: Direction,
    pub cylinders: Vec<Cylinder>,
    /// Cylinder containing each square.
    pub cylinder_of: Vec<usize>,
    /// Whether each square lies in the lowest row of its cylinder.
    pub in_first_row: Vec<bool>,
}

impl CylinderDecomposition {
    pub fn area(&self) -> usize {
        self.cylinders.iter().map(|c| c.height * c.circumference).sum()
    }

    /// Index of `τ(C)` for each cylinder `C`.
    pub fn deck_images(&self, s: &SquareTiledCover) -> Vec<usize> {
        self.cylinders.iter().map(|c| self.cylinder_of[s.deck()[c.rows[0][0]]]).collect()
    }
}

/// Maximal cylinders of the cover in the given direction. Rows are cycles
/// of `h` (or `v`); consecutive rows belong to one cylinder when every
/// vertex on the boundary between them has cone angle 2π.
pub fn cylinder_decomposition(s: &SquareTiledCover, direction: Direction) -> CylinderDecomposition {
    let n = s.n();
    let (along, across, offset) = match direction {
        Direction::Horizontal => (s.h(), s.v(), 0),
        Direction::Vertical => (s.v(), s.h(), n),
    };
    let (class, angles) = s.vertices();
    let rows = cycles(along);
    let mut row_of = vec![0; n];
    for (r, row) in rows.iter().enumerate() {
        for &x in row {
            row_of[x] = r;
        }
    }
    let regular_low = |r: usize| rows[r].iter().all(|&x| angles[class[x]] == 1);
    let mut used = vec![false; rows.len()];
    let mut cylinders = Vec::new();
    let mut cylinder_of = vec![0; n];
    let mut in_first_row = vec![false; n];
    let mut starts: Vec<usize> = (0..rows.len()).filter(|&r| !regular_low(r)).collect();
    // Rows with no singular boundary anywhere form closed stacks.
    for r in 0..rows.len() {
        if !starts.contains(&r) {
            starts.push(r);
        }
    }
    for r0 in starts {
        if used[r0] {
            continue;
        }
        let mut stack = vec![r0];
        used[r0] = true;
        loop {
            let last = *stack.last().unwrap();
            let next = row_of[across[rows[last][0]]];
            if regular_low(next) && !used[next] {
                used[next] = true;
                stack.push(next);
            } else {
                break;
            }
        }
        let idx = cylinders.len();
        let mut core = vec![0i64; 2 * n];
        let mut dual_core = vec![0i64; 2 * n];
        for &x in &rows[r0] {
            core[offset + x] += 1;
            dual_core[offset + x] += 1;
            in_first_row[x] = true;
        }
        for &r in &stack {
            for &x in &rows[r] {
                cylinder_of[x] = idx;
            }
        }
        cylinders.push(Cylinder {
            core,
            dual_core,
            height: stack.len(),
            circumference: rows[r0].len(),
            rows: stack.iter().map(|&r| rows[r].clone()).collect(),
        });
    }
    CylinderDecomposition { direction, cylinders, cylinder_of, in_first_row }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IsotropicSpans {
    /// `dim I(q)`: span of the waist curves in the base.
    pub dim_i: usize,
    pub dim_i_plus: usize,
    /// Rank of `P⁻` on lifts of a basis of `I(q)`.
    pub dim_i_minus: usize,
    pub dim_i_c: usize,
    pub lagrangian_base: bool,
    pub lagrangian_cover: bool,
    pub genus: usize,
    pub cover_genus: usize,
    pub odd_points: usize,
}

/// Anti-invariant cycles through pairs of deck-fixed points, doubled so
/// half edges at fixed edge midpoints stay integral.
pub fn pole_pair_cycles(s: &SquareTiledCover) -> Vec<Vec<i64>> {
    let n = s.n();
    let (class, angles) = s.vertices();
    let nv = angles.len();
    let (fixed_v, fixed_e) = s.odd_points();
    // Graph nodes: vertex classes, then midpoints of fixed edges. Arcs carry
    // their doubled chain.
    let mut adj: Vec<Vec<(usize, usize, i64)>> = vec![Vec::new(); nv + fixed_e.len()];
    let end = |e: usize| -> (usize, usize) {
        if e < n {
            (class[e], class[s.h()[e]])
        } else {
            (class[e - n], class[s.v()[e - n]])
        }
    };
    for e in 0..2 * n {
        let (a, b) = end(e);
        adj[a].push((b, e, 2));
        adj[b].push((a, e, -2));
    }
    for (i, &e) in fixed_e.iter().enumerate() {
        let m = nv + i;
        let (a, b) = end(e);
        // From the midpoint to the end: +½e; to the start: −½e.
        adj[m].push((b, e, 1));
        adj[b].push((m, e, -1));
        adj[m].push((a, e, -1));
        adj[a].push((m, e, 1));
    }
    let points: Vec<usize> = fixed_v.iter().copied().chain((0..fixed_e.len()).map(|i| nv + i)).collect();
    let is_point = |x: usize| points.contains(&x);
    let mut out = Vec::new();
    if points.len() < 2 {
        return out;
    }
    for &target in &points[1..points.len() - 1] {
        let from = points[0];
        let mut chain = None;
        for strict in [true, false] {
            let mut prev: Vec<Option<(usize, usize, i64)>> = vec![None; adj.len()];
            let mut seen = vec![false; adj.len()];
            seen[from] = true;
            let mut queue = std::collections::VecDeque::from([from]);
            while let Some(x) = queue.pop_front() {
                if x == target {
                    break;
                }
                if strict && x != from && is_point(x) {
                    continue;
                }
                for &(y, e, c) in &adj[x] {
                    if !seen[y] {
                        seen[y] = true;
                        prev[y] = Some((x, e, c));
                        queue.push_back(y);
                    }
                }
            }
            if seen[target] {
                let mut c = vec![0i64; 2 * n];
                let mut x = target;
                while x != from {
                    let (p, e, k) = prev[x].unwrap();
                    c[e] += k;
                    x = p;
                }
                chain = Some(c);
                break;
            }
        }
        if let Some(l) = chain {
            let sl = s.sigma_primal(&l);
            out.push(l.iter().zip(&sl).map(|(a, b)| a - b).collect());
        }
    }
    out
}

/// Ranks of the waist-curve spans in the base and in the three summands
/// of the cover homology.
pub fn isotropic_spans(s: &SquareTiledCover, dec: &CylinderDecomposition) -> IsotropicSpans {
    let faces = s.face_boundaries();
    let (_, base_faces) = s.base_complex();
    let cores: Vec<Vec<i64>> = dec.cylinders.iter().map(|c| c.core.clone()).collect();
    // One lift per quotient cylinder, kept when its base class is new: the
    // base classes of `lifts` form a basis of I(q).
    let mut lifts: Vec<Vec<i64>> = Vec::new();
    let mut base: Vec<Vec<i64>> = Vec::new();
    for (i, &t) in dec.deck_images(s).iter().enumerate() {
        if t < i {
            continue;
        }
        base.push(s.push_forward(&cores[i]));
        if homology_span(&base, &base_faces) > lifts.len() {
            lifts.push(cores[i].clone());
        } else {
            base.pop();
        }
    }
    let project = |a: &Vec<i64>, sign: i64| -> Vec<i64> { a.iter().zip(&s.sigma_primal(a)).map(|(x, y)| x + sign * y).collect() };
    let plus: Vec<Vec<i64>> = lifts.iter().map(|a| project(a, 1)).collect();
    let minus: Vec<Vec<i64>> = lifts.iter().map(|a| project(a, -1)).collect();
    let cc = pole_pair_cycles(s);
    let pairing: IntMatrix = cc.iter().map(|c| dec.cylinders.iter().map(|cy| s.intersection(c, &cy.dual_core)).collect()).collect();
    let genus = s.base_genus();
    let cover_genus = s.cover_genus();
    let dim_i = lifts.len();
    IsotropicSpans {
        dim_i,
        dim_i_plus: homology_span(&plus, &faces),
        dim_i_minus: homology_span(&minus, &faces),
        dim_i_c: rank(&pairing),
        lagrangian_base: dim_i == genus,
        lagrangian_cover: homology_span(&cores, &faces) == cover_genus,
        genus,
        cover_genus,
        odd_points: s.odd_point_count(),
    }
}

/// Every deck-invariant cover cylinder must have a waist curve that is
/// null-homologous in the base; equivalently, quotient cylinders with a
/// nonzero waist class lift to two cylinders.
pub fn check_monodromy(s: &SquareTiledCover, dec: &CylinderDecomposition) -> bool {
    if !s.relations_hold() {
        return false;
    }
    let (_, base_faces) = s.base_complex();
    let images = dec.deck_images(s);
    for (i, c) in dec.cylinders.iter().enumerate() {
        let t = &dec.cylinders[images[i]];
        if t.height != c.height || t.circumference != c.circumference {
            return false;
        }
        if images[i] == i && homology_span(&[s.push_forward(&c.core)], &base_faces) != 0 {
            return false;
        }
    }
    true
}

/// One step of an edge path between lower-left corners of squares.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Step {
    Up,
    Down,
    Left,
    Right,
}

impl Step {
    pub fn inverse(self) -> Step {
        match self {
            Step::Up => Step::Down,
            Step::Down => Step::Up,
            Step::Left => Step::Right,
            Step::Right => Step::Left,
        }
    }
}

/// The transverse period along a path computed two ways.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LeafIntegral {
    /// Direct sum of transverse edge lengths.
    pub direct: i64,
    /// Σ heights × signed crossings with the cylinder cores.
    pub via_cylinders: i64,
}

impl LeafIntegral {
    pub fn agrees(&self) -> bool {
        self.direct == self.via_cylinders
    }

    pub fn value(&self) -> i64 {
        self.direct
    }
}

/// Integrates the transverse form (`dy` for horizontal cylinders, `dx` for
/// vertical ones) along an edge path from `LL(start)`. The path must start
/// and end on the singular skeleton, i.e. at the lower corner of a first
/// row.
pub fn leaf_integral(s: &SquareTiledCover, dec: &CylinderDecomposition, start: usize, path: &[Step]) -> Result<LeafIntegral> {
    let (hi, vi) = (inverse(s.h()), inverse(s.v()));
    let (fwd, back) = match dec.direction {
        Direction::Horizontal => (Step::Up, Step::Down),
        Direction::Vertical => (Step::Right, Step::Left),
    };
    if start >= s.n() || !dec.in_first_row[start] {
        return Err(Error::PathNotOnSkeleton);
    }
    let mut x = start;
    let (mut direct, mut via) = (0i64, 0i64);
    for &st in path {
        let next = match st {
            Step::Up => s.v()[x],
            Step::Down => vi[x],
            Step::Right => s.h()[x],
            Step::Left => hi[x],
        };
        if st == fwd {
            direct += 1;
            if dec.in_first_row[x] {
                via += dec.cylinders[dec.cylinder_of[x]].height as i64;
            }
        } else if st == back {
            direct -= 1;
            if dec.in_first_row[next] {
                via -= dec.cylinders[dec.cylinder_of[next]].height as i64;
            }
        }
        x = next;
    }
    if !dec.in_first_row[x] {
        return Err(Error::PathNotOnSkeleton);
    }
    Ok(LeafIntegral { direct, via_cylinders: via })
}

/// Random closed-up walk from a first-row square back to the skeleton.
/// Returns `None` when the walk never returns within `max_len` steps.
pub fn random_skeleton_path<R: Rng + ?Sized>(
    s: &SquareTiledCover,
    dec: &CylinderDecomposition,
    max_len: usize,
    rng: &mut R,
) -> Option<(usize, Vec<Step>)> {
    let starts: Vec<usize> = (0..s.n()).filter(|&x| dec.in_first_row[x]).collect();
    let (hi, vi) = (inverse(s.h()), inverse(s.v()));
    let start = *starts.choose(rng)?;
    let mut x = start;
    let mut path = Vec::new();
    for _ in 0..max_len {
        let st = [Step::Up, Step::Down, Step::Left, Step::Right][rng.gen_range(0..4)];
        x = match st {
            Step::Up => s.v()[x],
            Step::Down => vi[x],
            Step::Right => s.h()[x],
            Step::Left => hi[x],
        };
        path.push(st);
        if path.len() > 10 && dec.in_first_row[x] {
            return Some((start, path));
        }
    }
    None
}

/// Outcome of the cylinder-lemma checks on one fixture, both directions.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixtureReport {
    pub area_and_isotropy: bool,
    pub rank_inequality: bool,
    /// `None` when the fixture has fewer than two odd points.
    pub rank_equality: Option<bool>,
    pub monodromy: bool,
    pub paths_tested: usize,
    pub paths_agreeing: usize,
}

impl FixtureReport {
    pub fn passed(&self) -> bool {
        self.area_and_isotropy
            && self.rank_inequality
            && self.rank_equality != Some(false)
            && self.monodromy
            && self.paths_agreeing == self.paths_tested
    }
}

pub fn check_fixture<R: Rng + ?Sized>(s: &SquareTiledCover, paths: usize, rng: &mut R) -> FixtureReport {
    let mut r = FixtureReport { area_and_isotropy: true, rank_inequality: true, monodromy: true, ..Default::default() };
    for dir in [Direction::Horizontal, Direction::Vertical] {
        let dec = cylinder_decomposition(s, dir);
        let isotropic = dec.cylinders.iter().all(|a| dec.cylinders.iter().all(|b| s.intersection(&a.core, &b.dual_core) == 0));
        r.area_and_isotropy &= isotropic && dec.area() == s.n();
        let sp = isotropic_spans(s, &dec);
        r.rank_inequality &= sp.dim_i_plus == sp.dim_i && sp.dim_i_plus >= sp.dim_i_minus;
        if sp.odd_points >= 2 {
            let eq = sp.dim_i_plus == sp.dim_i_minus;
            r.rank_equality = Some(r.rank_equality.unwrap_or(true) && eq);
        }
        r.monodromy &= check_monodromy(s, &dec);
        let across = match dir {
            Direction::Horizontal => Step::Up,
            Direction::Vertical => Step::Right,
        };
        // Crossing a cylinder once integrates to its height.
        let mut tried: Vec<(usize, Vec<Step>, Option<i64>)> =
            dec.cylinders.iter().map(|c| (c.rows[0][0], vec![across; c.height], Some(c.height as i64))).collect();
        tried.extend((0..paths).filter_map(|_| random_skeleton_path(s, &dec, 200, rng)).map(|(x, p)| (x, p, None)));
        for (start, path, expected) in tried {
            r.paths_tested += 1;
            if let Ok(li) = leaf_integral(s, &dec, start, &path) {
                if li.agrees() && expected.map_or(true, |e| e == li.value()) {
                    r.paths_agreeing += 1;
                }
            }
        }
    }
    r
}

/// Totals over a batch of random fixtures.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub fixtures: usize,
    pub area_and_isotropy: usize,
    pub rank_inequality: usize,
    pub rank_equality: usize,
    pub rank_equality_applicable: usize,
    pub monodromy: usize,
    pub paths_tested: usize,
    pub paths_agreeing: usize,
}

impl SuiteReport {
    pub fn all_passed(&self) -> bool {
        self.area_and_isotropy == self.fixtures
            && self.rank_inequality == self.fixtures
            && self.rank_equality == self.rank_equality_applicable
            && self.monodromy == self.fixtures
            && self.paths_agreeing == self.paths_tested
    }
}

/// Generates `count` fixtures from `seed` and checks each one. Fixtures are
/// drawn sequentially and checked in parallel, so the report depends only
/// on the arguments.
pub fn run_fixture_suite(count: usize, seed: u64, max_squares: usize) -> SuiteReport {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rayon::prelude::*;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let fixtures: Vec<SquareTiledCover> = (0..count).map(|_| random_fixture(max_squares, &mut rng)).collect();
    let reports: Vec<FixtureReport> = fixtures
        .par_iter()
        .enumerate()
        .map(|(i, s)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ ((i as u64 + 1) << 32));
            check_fixture(s, 20, &mut rng)
        })
        .collect();
    let mut total = SuiteReport { fixtures: count, ..Default::default() };
    for r in &reports {
        total.area_and_isotropy += r.area_and_isotropy as usize;
        total.rank_inequality += r.rank_inequality as usize;
        if let Some(eq) = r.rank_equality {
            total.rank_equality_applicable += 1;
            total.rank_equality += eq as usize;
        }
        total.monodromy += r.monodromy as usize;
        total.paths_tested += r.paths_tested;
        total.paths_agreeing += r.paths_agreeing;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn pillowcase() -> SquareTiledCover {
        SquareTiledCover::new(vec![1, 0], vec![1, 0], vec![1, 0]).unwrap()
    }

    #[test]
    fn pillowcase_cover() {
        let s = pillowcase();
        assert_eq!(s.cover_genus(), 1);
        assert_eq!(s.base_genus(), 0);
        assert_eq!(s.odd_point_count(), 4);
        let dec = cylinder_decomposition(&s, Direction::Horizontal);
        assert_eq!(dec.cylinders.len(), 1);
        assert_eq!(dec.cylinders[0].height, 1);
        assert_eq!(dec.area(), 2);
    }

    #[test]
    fn file_round_trip() {
        let s = pillowcase();
        let t = SquareTiledCover::parse(&format!("# pillowcase\n{}", s.to_file_string())).unwrap();
        assert_eq!(s, t);
    }

    #[test]
    fn pairing_vanishes_on_boundaries() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..30 {
            let s = random_fixture(16, &mut rng);
            let bd = s.boundary_matrix();
            let cycles = crate::linalg::nullspace(&bd, 2 * s.n());
            for f in s.dual_face_boundaries() {
                for a in &cycles {
                    assert_eq!(s.intersection(a, &f), 0);
                }
            }
        }
    }
}
