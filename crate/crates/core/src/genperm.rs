//! Generalized permutations: the two-row combinatorial data of linear
//! involutions, with validation, suspension-based irreducibility,
//! stratum identification and a catalog of representatives.

use std::collections::HashMap;
use std::fmt;

use minilp::{ComparisonOp, OptimizationDirection, Problem};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::strata::{parse_orders, SingularityPattern};

/// Letter index into the alphabet of a permutation.
pub type Letter = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Row {
    Top,
    Bottom,
}

impl Row {
    pub fn other(self) -> Row {
        match self {
            Row::Top => Row::Bottom,
            Row::Bottom => Row::Top,
        }
    }
}

/// A position in one of the two rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Slot {
    pub row: Row,
    pub index: usize,
}

/// Two rows over an alphabet of `d` letters, each letter occurring twice.
///
/// Values of this type are always validated: multiplicities are checked and
/// the permutation admits a suspension. Classical permutations (no letter
/// repeated within a row) are representable but flagged abelian.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GeneralizedPermutation {
    top: Vec<Letter>,
    bottom: Vec<Letter>,
    names: Vec<String>,
    abelian: bool,
}

impl GeneralizedPermutation {
    /// Parses `top / bottom` or two lines; `#` starts a comment.
    /// Abelian input is rejected.
    pub fn parse(text: &str) -> Result<Self> {
        Self::parse_with(text, false)
    }

    /// As [`parse`](Self::parse) but accepts classical permutations.
    pub fn parse_allow_abelian(text: &str) -> Result<Self> {
        Self::parse_with(text, true)
    }

    fn parse_with(text: &str, allow_abelian: bool) -> Result<Self> {
        let body: Vec<&str> = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or("").trim())
            .filter(|l| !l.is_empty())
            .collect();
        let joined = body.join(" / ");
        let rows: Vec<&str> = joined.split('/').map(str::trim).filter(|r| !r.is_empty()).collect();
        if rows.len() != 2 {
            return Err(Error::Syntax { input: text.to_string(), reason: "expected exactly two rows".into() });
        }
        let top: Vec<&str> = rows[0].split_whitespace().collect();
        let bottom: Vec<&str> = rows[1].split_whitespace().collect();
        Self::from_tokens(&top, &bottom, allow_abelian)
    }

    /// Builds from symbol tokens; letters are numbered by first appearance.
    pub fn from_tokens<S: AsRef<str>>(top: &[S], bottom: &[S], allow_abelian: bool) -> Result<Self> {
        let mut index: HashMap<String, Letter> = HashMap::new();
        let mut names: Vec<String> = Vec::new();
        let mut counts: Vec<usize> = Vec::new();
        let mut map = |s: &str| -> Letter {
            *index.entry(s.to_string()).or_insert_with(|| {
                names.push(s.to_string());
                counts.push(0);
                names.len() - 1
            })
        };
        let t: Vec<Letter> = top.iter().map(|s| map(s.as_ref())).collect();
        let b: Vec<Letter> = bottom.iter().map(|s| map(s.as_ref())).collect();
        for &x in t.iter().chain(&b) {
            counts[x] += 1;
        }
        if let Some((i, &c)) = counts.iter().enumerate().find(|(_, &c)| c != 2) {
            return Err(Error::BadMultiplicity { symbol: names[i].clone(), count: c });
        }
        Self::from_letters(t, b, names, allow_abelian)
    }

    /// Builds from letter indices `0..d` with the given display names.
    pub fn from_letters(top: Vec<Letter>, bottom: Vec<Letter>, names: Vec<String>, allow_abelian: bool) -> Result<Self> {
        let d = names.len();
        let mut counts = vec![0usize; d];
        for &x in top.iter().chain(&bottom) {
            if x >= d {
                return Err(Error::Syntax { input: format!("letter {x}"), reason: "letter outside alphabet".into() });
            }
            counts[x] += 1;
        }
        if let Some((i, &c)) = counts.iter().enumerate().find(|(_, &c)| c != 2) {
            return Err(Error::BadMultiplicity { symbol: names[i].clone(), count: c });
        }
        if top.is_empty() || bottom.is_empty() {
            return Err(Error::Reducible);
        }
        let abelian = !has_same_row_repeat(&top) && !has_same_row_repeat(&bottom);
        if abelian && !allow_abelian {
            return Err(Error::AbelianInput);
        }
        if !admits_suspension(&top, &bottom, d) {
            return Err(Error::Reducible);
        }
        Ok(GeneralizedPermutation { top, bottom, names, abelian })
    }

    /// Trusted constructor for states produced by induction from a valid start.
    pub(crate) fn from_parts_unchecked(top: Vec<Letter>, bottom: Vec<Letter>, names: Vec<String>) -> Self {
        let abelian = !has_same_row_repeat(&top) && !has_same_row_repeat(&bottom);
        GeneralizedPermutation { top, bottom, names, abelian }
    }

    pub fn top(&self) -> &[Letter] {
        &self.top
    }

    pub fn bottom(&self) -> &[Letter] {
        &self.bottom
    }

    pub fn row(&self, r: Row) -> &[Letter] {
        match r {
            Row::Top => &self.top,
            Row::Bottom => &self.bottom,
        }
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn d(&self) -> usize {
        self.names.len()
    }

    pub fn is_abelian(&self) -> bool {
        self.abelian
    }

    /// The two slots of each letter, in reading order (top left to right,
    /// then bottom left to right).
    pub fn occurrences(&self) -> Vec<[Slot; 2]> {
        let mut first: Vec<Option<Slot>> = vec![None; self.d()];
        let mut out: Vec<[Slot; 2]> = vec![[Slot { row: Row::Top, index: 0 }; 2]; self.d()];
        for (row, letters) in [(Row::Top, &self.top), (Row::Bottom, &self.bottom)] {
            for (index, &x) in letters.iter().enumerate() {
                let s = Slot { row, index };
                match first[x] {
                    None => first[x] = Some(s),
                    Some(f) => out[x] = [f, s],
                }
            }
        }
        out
    }

    /// Whether letter `x` occurs twice in the same row.
    pub fn is_flip(&self, x: Letter) -> bool {
        let [a, b] = self.occurrences()[x];
        a.row == b.row
    }

    pub fn render(&self) -> String {
        let r = |v: &[Letter]| v.iter().map(|&x| self.names[x].as_str()).collect::<Vec<_>>().join(" ");
        format!("{} / {}", r(&self.top), r(&self.bottom))
    }

    /// Text in the two-line file format.
    pub fn to_file_string(&self) -> String {
        let r = |v: &[Letter]| v.iter().map(|&x| self.names[x].as_str()).collect::<Vec<_>>().join(" ");
        format!("{}\n{}\n", r(&self.top), r(&self.bottom))
    }

    /// Renaming-invariant fingerprint: the rows with letters renumbered by
    /// first appearance.
    pub fn fingerprint(&self) -> String {
        let mut rename: Vec<Option<usize>> = vec![None; self.d()];
        let mut next = 0;
        let mut code = |x: Letter| {
            *rename[x].get_or_insert_with(|| {
                next += 1;
                next - 1
            })
        };
        let t: Vec<String> = self.top.iter().map(|&x| code(x).to_string()).collect();
        let b: Vec<String> = self.bottom.iter().map(|&x| code(x).to_string()).collect();
        format!("{}|{}", t.join("."), b.join("."))
    }

    /// Exchanges the two rows.
    pub fn swap_rows(&self) -> Self {
        GeneralizedPermutation {
            top: self.bottom.clone(),
            bottom: self.top.clone(),
            names: self.names.clone(),
            abelian: self.abelian,
        }
    }
}

impl fmt::Display for GeneralizedPermutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

fn has_same_row_repeat(row: &[Letter]) -> bool {
    let mut seen = std::collections::HashSet::new();
    row.iter().any(|x| !seen.insert(*x))
}

/// Suspension existence. Lengths need positive λ with the same total on
/// both rows, which is possible iff the two rows either both contain a
/// repeated letter or neither does. Heights need τ whose partial sums along
/// the top row stay positive and along the bottom row stay negative (strict
/// interior prefixes), with equal full sums; this is a linear feasibility
/// problem solved by maximizing the common margin.
pub fn admits_suspension(top: &[Letter], bottom: &[Letter], d: usize) -> bool {
    if top.is_empty() || bottom.is_empty() {
        return false;
    }
    if has_same_row_repeat(top) != has_same_row_repeat(bottom) {
        return false;
    }
    let mut lp = Problem::new(OptimizationDirection::Maximize);
    let tau: Vec<_> = (0..d).map(|_| lp.add_var(0.0, (-1.0, 1.0))).collect();
    let margin = lp.add_var(1.0, (-1.0, 1.0));
    let mut acc = vec![0.0f64; d];
    for &x in &top[..top.len() - 1] {
        acc[x] += 1.0;
        let mut expr: Vec<_> = (0..d).filter(|&i| acc[i] != 0.0).map(|i| (tau[i], acc[i])).collect();
        expr.push((margin, -1.0));
        lp.add_constraint(&expr[..], ComparisonOp::Ge, 0.0);
    }
    acc.iter_mut().for_each(|a| *a = 0.0);
    for &x in &bottom[..bottom.len() - 1] {
        acc[x] += 1.0;
        let mut expr: Vec<_> = (0..d).filter(|&i| acc[i] != 0.0).map(|i| (tau[i], acc[i])).collect();
        expr.push((margin, 1.0));
        lp.add_constraint(&expr[..], ComparisonOp::Le, 0.0);
    }
    let mut bal = vec![0.0f64; d];
    for &x in top {
        bal[x] += 1.0;
    }
    for &x in bottom {
        bal[x] -= 1.0;
    }
    let expr: Vec<_> = (0..d).filter(|&i| bal[i] != 0.0).map(|i| (tau[i], bal[i])).collect();
    if !expr.is_empty() {
        lp.add_constraint(&expr[..], ComparisonOp::Eq, 0.0);
    }
    match lp.solve() {
        Ok(sol) => sol.objective() > 1e-9,
        Err(_) => false,
    }
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }
    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra] = rb;
        }
    }
}

/// Singularity pattern of the suspension.
///
/// The polygon has vertices `t_0..t_l` on top and `b_0..b_m` on the bottom,
/// with `t_0 = b_0` and `t_l = b_m`. A letter on opposite rows at `i`, `j`
/// glues by translation (`t_i ~ b_j`, `t_{i+1} ~ b_{j+1}`); a letter twice
/// in one row at `i < j` glues by a half-turn (`r_i ~ r_{j+1}`,
/// `r_{i+1} ~ r_j`). A vertex class with `k` interior polygon corners has
/// cone angle `kπ`, hence order `k − 2`; order 0 gives a marked point.
pub fn stratum_of(p: &GeneralizedPermutation) -> SingularityPattern {
    let (l, m) = (p.top.len(), p.bottom.len());
    let tv = |i: usize| i;
    let bv = |j: usize| l + 1 + j;
    let mut uf = UnionFind::new(l + m + 2);
    uf.union(tv(0), bv(0));
    uf.union(tv(l), bv(m));
    let vert = |s: Slot, off: usize| match s.row {
        Row::Top => tv(s.index + off),
        Row::Bottom => bv(s.index + off),
    };
    for [a, b] in p.occurrences() {
        if a.row != b.row {
            uf.union(vert(a, 0), vert(b, 0));
            uf.union(vert(a, 1), vert(b, 1));
        } else {
            uf.union(vert(a, 0), vert(b, 1));
            uf.union(vert(a, 1), vert(b, 0));
        }
    }
    let mut interior: HashMap<usize, i64> = HashMap::new();
    for v in (0..=l).map(tv).chain((0..=m).map(bv)) {
        let r = uf.find(v);
        interior.entry(r).or_insert(0);
    }
    for v in (1..l).map(tv).chain((1..m).map(bv)) {
        let r = uf.find(v);
        *interior.get_mut(&r).unwrap() += 1;
    }
    SingularityPattern::raw(interior.values().map(|k| k - 2), 0)
}

/// A stored representative of a stratum component.
#[derive(Debug, Clone)]
pub struct CatalogEntry {
    pub stratum: SingularityPattern,
    pub component_label: String,
    pub permutation: GeneralizedPermutation,
    /// Free-form provenance notes from the fixture file.
    pub notes: Vec<String>,
}

const CATALOG_FILES: &[(&str, &str)] = &[
    ("2_-1^2.txt", include_str!("../catalog/2_-1^2.txt")),
    ("2_1_-1^3.txt", include_str!("../catalog/2_1_-1^3.txt")),
    ("8.txt", include_str!("../catalog/8.txt")),
    ("3^3_-1_adj.txt", include_str!("../catalog/3^3_-1_adj.txt")),
    ("3^3_-1_irr.txt", include_str!("../catalog/3^3_-1_irr.txt")),
    ("6_3_-1_adj.txt", include_str!("../catalog/6_3_-1_adj.txt")),
    ("6_3_-1_irr.txt", include_str!("../catalog/6_3_-1_irr.txt")),
    ("9_-1_adj.txt", include_str!("../catalog/9_-1_adj.txt")),
    ("9_-1_irr.txt", include_str!("../catalog/9_-1_irr.txt")),
    ("12_I.txt", include_str!("../catalog/12_I.txt")),
    ("12_II.txt", include_str!("../catalog/12_II.txt")),
    ("4^2.txt", include_str!("../catalog/4^2.txt")),
    ("1^2_-1^2.txt", include_str!("../catalog/1^2_-1^2.txt")),
    ("1^3_-1^3.txt", include_str!("../catalog/1^3_-1^3.txt")),
    ("1^4_-1^4.txt", include_str!("../catalog/1^4_-1^4.txt")),
    ("5_-1^5.txt", include_str!("../catalog/5_-1^5.txt")),
    ("3_2_-1.txt", include_str!("../catalog/3_2_-1.txt")),
];

/// Parses one catalog fixture: `# stratum:` and `# component:` header
/// lines followed by the two permutation rows.
pub fn parse_catalog_file(text: &str) -> Result<CatalogEntry> {
    let mut stratum = None;
    let mut component = String::new();
    let mut notes = Vec::new();
    for line in text.lines() {
        let Some(c) = line.trim().strip_prefix('#') else { continue };
        let c = c.trim();
        if let Some(s) = c.strip_prefix("stratum:") {
            stratum = Some(SingularityPattern::raw(parse_orders(s.trim())?, 0));
        } else if let Some(s) = c.strip_prefix("component:") {
            component = s.trim().to_string();
        } else if !c.is_empty() {
            notes.push(c.to_string());
        }
    }
    let stratum = stratum.ok_or_else(|| Error::Syntax { input: text.to_string(), reason: "missing stratum header".into() })?;
    let permutation = GeneralizedPermutation::parse(text)?;
    Ok(CatalogEntry { stratum, component_label: component, permutation, notes })
}

/// All shipped catalog entries, in a fixed order.
pub fn catalog_entries() -> Vec<CatalogEntry> {
    CATALOG_FILES
        .iter()
        .map(|(name, text)| parse_catalog_file(text).unwrap_or_else(|e| panic!("catalog file {name}: {e}")))
        .collect()
}

/// Looks up a representative. An empty component matches the first entry
/// listed for the stratum.
pub fn catalog(stratum: &SingularityPattern, component: &str) -> Result<CatalogEntry> {
    catalog_entries()
        .into_iter()
        .find(|e| &e.stratum == stratum && (component.is_empty() || e.component_label == component))
        .ok_or_else(|| Error::NotInCatalog { stratum: stratum.key(), component: component.to_string() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gp(s: &str) -> GeneralizedPermutation {
        GeneralizedPermutation::parse(s).unwrap()
    }

    #[test]
    fn parse_examples() {
        let p = gp("a a b / b c c");
        assert_eq!(p.d(), 3);
        assert!(!p.is_abelian());
        assert_eq!(GeneralizedPermutation::parse("a b / b a"), Err(Error::AbelianInput));
        assert!(GeneralizedPermutation::parse_allow_abelian("a b / b a").unwrap().is_abelian());
        assert_eq!(GeneralizedPermutation::parse("a a / b b"), Err(Error::Reducible));
        assert!(matches!(GeneralizedPermutation::parse("a a b / b c"), Err(Error::BadMultiplicity { .. })));
    }

    #[test]
    fn two_line_format_with_comments() {
        let p = gp("# a comment\na a b\nb c c # trailing\n");
        assert_eq!(p.render(), "a a b / b c c");
    }

    #[test]
    fn torus_has_one_marked_point() {
        let p = GeneralizedPermutation::parse_allow_abelian("a b / b a").unwrap();
        let s = stratum_of(&p);
        assert!(s.orders().is_empty());
        assert_eq!(s.marked_points(), 1);
    }

    #[test]
    fn small_strata_by_hand() {
        // Two flips and one translation letter: a pillowcase with four poles.
        assert_eq!(stratum_of(&gp("a a b / b c c")).orders(), &[-1, -1, -1, -1]);
        assert_eq!(stratum_of(&gp("b d b / a d a c c")).orders(), &[2, -1, -1]);
    }

    #[test]
    fn suspension_lp_small_cases() {
        assert!(!admits_suspension(&[0, 0], &[1, 1], 2));
        assert!(admits_suspension(&[0, 0, 1], &[1, 2, 2], 3));
        assert!(!admits_suspension(&[0, 1, 0], &[1], 2)); // flips only on top
        assert!(admits_suspension(&[0, 1], &[1, 0], 2));
        assert!(!admits_suspension(&[0, 1], &[0, 1], 2));
    }
}
