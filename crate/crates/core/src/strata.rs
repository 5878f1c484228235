//! Singularity patterns and the numerology of strata of quadratic
//! differentials and of their orienting double covers.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Multiset of singularity orders. Orders are kept sorted in decreasing
/// order; order-0 points (only produced for cover patterns) are stored as a
/// count of marked points.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SingularityPattern {
    orders: Vec<i64>,
    marked_points: usize,
}

impl SingularityPattern {
    /// Builds a pattern without validation. Zero orders become marked points.
    pub fn raw(orders: impl IntoIterator<Item = i64>, marked_points: usize) -> Self {
        let mut marked = marked_points;
        let mut v: Vec<i64> = Vec::new();
        for o in orders {
            if o == 0 {
                marked += 1;
            } else {
                v.push(o);
            }
        }
        v.sort_unstable_by(|a, b| b.cmp(a));
        SingularityPattern { orders: v, marked_points: marked }
    }

    pub fn orders(&self) -> &[i64] {
        &self.orders
    }

    pub fn marked_points(&self) -> usize {
        self.marked_points
    }

    pub fn sum(&self) -> i64 {
        self.orders.iter().sum()
    }

    /// τ: number of singularities (marked points excluded).
    pub fn tau(&self) -> usize {
        self.orders.len()
    }

    /// ν: number of odd-order singularities.
    pub fn nu(&self) -> usize {
        self.orders.iter().filter(|o| o.rem_euclid(2) == 1).count()
    }

    /// Genus from Σ n_i = 4g − 4, if the sum has that form.
    pub fn genus(&self) -> Option<i64> {
        let s = self.sum();
        (s.rem_euclid(4) == 0).then_some((s + 4) / 4)
    }

    /// Genus of an abelian pattern, Σ k_i = 2g − 2, marked points counting 0.
    pub fn abelian_genus(&self) -> Option<i64> {
        let s = self.sum();
        (s.rem_euclid(2) == 0).then_some((s + 2) / 2)
    }

    /// Canonical text form, e.g. `2,1,-1^3`. Marked points are appended as `0^k`.
    pub fn key(&self) -> String {
        let mut parts: Vec<String> = Vec::new();
        let mut items: Vec<(i64, usize)> = Vec::new();
        for &o in &self.orders {
            match items.last_mut() {
                Some((v, c)) if *v == o => *c += 1,
                _ => items.push((o, 1)),
            }
        }
        if self.marked_points > 0 {
            items.push((0, self.marked_points));
        }
        for (v, c) in items {
            if c == 1 {
                parts.push(v.to_string());
            } else {
                parts.push(format!("{v}^{c}"));
            }
        }
        parts.join(",")
    }
}

impl fmt::Display for SingularityPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Q({})", self.key())
    }
}

/// Parses pattern text such as `2,1,-1^3` into a raw order list.
/// Accepts the Unicode minus sign and surrounding whitespace.
pub fn parse_orders(text: &str) -> Result<Vec<i64>> {
    let syntax = |reason: &str| Error::Syntax { input: text.to_string(), reason: reason.to_string() };
    let cleaned = text.replace('\u{2212}', "-");
    let cleaned = cleaned.trim().trim_start_matches("Q(").trim_end_matches(')');
    let mut out = Vec::new();
    if cleaned.trim().is_empty() {
        return Ok(out);
    }
    for item in cleaned.split(',') {
        let item = item.trim();
        let (base, rep) = match item.split_once('^') {
            Some((b, r)) => {
                let r: usize = r.trim().parse().map_err(|_| syntax("bad exponent"))?;
                (b.trim(), r)
            }
            None => (item, 1),
        };
        let v: i64 = base.parse().map_err(|_| syntax("bad integer"))?;
        out.extend(std::iter::repeat(v).take(rep));
    }
    Ok(out)
}

fn masur_smillie_exception(orders: &[i64]) -> bool {
    let mut v = orders.to_vec();
    v.sort_unstable();
    matches!(v.as_slice(), [] | [-1, 1] | [4] | [1, 3])
}

/// Validates a base pattern: orders are −1 or positive, the sum is 4g − 4
/// with g ≥ 1, and the pattern is not one of the four empty strata.
pub fn validate_pattern(orders: &[i64]) -> Result<SingularityPattern> {
    if let Some(&o) = orders.iter().find(|&&o| o == 0 || o < -1) {
        return Err(Error::BadOrder { order: o });
    }
    let sum: i64 = orders.iter().sum();
    if !orders.is_empty() && (sum.rem_euclid(4) != 0 || sum < 0) {
        return Err(Error::BadSum { sum });
    }
    if masur_smillie_exception(orders) {
        let p = SingularityPattern::raw(orders.iter().copied(), 0);
        return Err(Error::ExceptionalPattern { pattern: p.to_string() });
    }
    Ok(SingularityPattern::raw(orders.iter().copied(), 0))
}

impl FromStr for SingularityPattern {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        validate_pattern(&parse_orders(s)?)
    }
}

/// The pattern of the orienting double cover: an odd order n becomes one
/// point of order n + 1 (poles become marked points), an even order n
/// becomes two points of order n / 2.
pub fn hat_pattern(kappa: &SingularityPattern) -> SingularityPattern {
    let mut out = Vec::new();
    let mut marked = 0;
    for &n in kappa.orders() {
        if n.rem_euclid(2) == 1 {
            if n == -1 {
                marked += 1;
            } else {
                out.push(n + 1);
            }
        } else {
            out.push(n / 2);
            out.push(n / 2);
        }
    }
    SingularityPattern::raw(out, marked)
}

/// Dimensions and exponent counts attached to a stratum.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StratumInfo {
    pub pattern: SingularityPattern,
    pub genus: i64,
    pub cover_genus: i64,
    pub cover_pattern: SingularityPattern,
    pub tau: usize,
    pub nu: usize,
    pub dim_complex: i64,
    pub dim_invariant: i64,
    pub dim_anti_invariant: i64,
    pub positive_invariant_count: i64,
    pub positive_anti_invariant_count: i64,
}

impl StratumInfo {
    /// Half the number of odd singularities.
    pub fn n(&self) -> i64 {
        self.nu as i64 / 2
    }

    /// Number of letters of a generalized permutation in this stratum.
    pub fn letters(&self) -> i64 {
        2 * self.genus + self.tau as i64 - 1
    }
}

pub fn stratum_info(kappa: &SingularityPattern) -> StratumInfo {
    let g = kappa.genus().expect("validated pattern has integral genus");
    let tau = kappa.tau();
    let nu = kappa.nu();
    let n = nu as i64 / 2;
    let cover_genus = (nu as i64 + 4 * g - 2) / 2;
    StratumInfo {
        pattern: kappa.clone(),
        genus: g,
        cover_genus,
        cover_pattern: hat_pattern(kappa),
        tau,
        nu,
        dim_complex: 2 * g + tau as i64 - 2,
        dim_invariant: 2 * g,
        dim_anti_invariant: 2 * g + 2 * n - 2,
        positive_invariant_count: g,
        positive_anti_invariant_count: g + n - 1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pat(s: &str) -> SingularityPattern {
        s.parse().unwrap()
    }

    #[test]
    fn genus_of_table_rows() {
        assert_eq!(pat("8").genus(), Some(3));
        assert_eq!(pat("2,-1,-1").genus(), Some(1));
        assert_eq!(pat("12").genus(), Some(4));
        assert_eq!(pat("-1,2,3").genus(), Some(2));
    }

    #[test]
    fn exceptions_and_bad_sums() {
        assert!(matches!(validate_pattern(&[-1, 1]), Err(Error::ExceptionalPattern { .. })));
        assert!(matches!(validate_pattern(&[]), Err(Error::ExceptionalPattern { .. })));
        assert!(matches!(validate_pattern(&[4]), Err(Error::ExceptionalPattern { .. })));
        assert!(matches!(validate_pattern(&[3, 1]), Err(Error::ExceptionalPattern { .. })));
        assert!(matches!(validate_pattern(&[1, 2]), Err(Error::BadSum { sum: 3 })));
        assert!(matches!(validate_pattern(&[-1, -1, -1, -1]), Err(Error::BadSum { .. })));
        assert!(matches!(validate_pattern(&[2, 0]), Err(Error::BadOrder { order: 0 })));
        assert!(matches!(validate_pattern(&[-2, 6]), Err(Error::BadOrder { order: -2 })));
    }

    #[test]
    fn parse_exponent_shorthand() {
        assert_eq!(parse_orders("2,1,-1^3").unwrap(), vec![2, 1, -1, -1, -1]);
        assert_eq!(parse_orders("\u{2212}1^2, 1^2").unwrap(), vec![-1, -1, 1, 1]);
        assert!(parse_orders("2,x").is_err());
        assert_eq!(pat("-1,1,-1,1").key(), "1^2,-1^2");
    }

    #[test]
    fn hat_examples() {
        let h = hat_pattern(&pat("2,-1,-1"));
        assert_eq!(h.orders(), &[1, 1]);
        assert_eq!(h.marked_points(), 2);
        assert_eq!(hat_pattern(&pat("8")).orders(), &[4, 4]);
        let h = hat_pattern(&pat("1,1,-1,-1"));
        assert_eq!(h.orders(), &[2, 2]);
        assert_eq!(h.marked_points(), 2);
    }

    #[test]
    fn info_examples() {
        let i = stratum_info(&pat("2,1,-1^3"));
        assert_eq!((i.genus, i.cover_genus, i.positive_anti_invariant_count), (1, 3, 2));
        let i = stratum_info(&pat("2,-1,-1"));
        assert_eq!((i.dim_anti_invariant, i.positive_anti_invariant_count), (2, 1));
        let i = stratum_info(&pat("8"));
        assert_eq!((i.positive_invariant_count, i.positive_anti_invariant_count), (3, 2));
        assert_eq!(i.letters(), 6);
        // Riemann-Hurwitz: 2ĝ = ν + 4g − 2 = 4 + 12 − 2.
        let i = stratum_info(&pat("-1,3,3,3"));
        assert_eq!((i.genus, i.cover_genus, i.positive_anti_invariant_count), (3, 7, 4));
    }
}
