//! Exact linear algebra over ℤ and ℚ on small dense matrices.
//!
//! Ranks use fraction-free Bareiss elimination in `i128` and fall back to
//! rational elimination when an intermediate overflows. Kernels and spans go
//! through reduced row echelon form over `BigRational`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Dense integer matrix, row major.
pub type IntMatrix = Vec<Vec<i64>>;

pub fn zeros(rows: usize, cols: usize) -> IntMatrix {
    vec![vec![0; cols]; rows]
}

pub fn identity(n: usize) -> IntMatrix {
    let mut m = zeros(n, n);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = 1;
    }
    m
}

pub fn transpose(m: &IntMatrix) -> IntMatrix {
    if m.is_empty() {
        return Vec::new();
    }
    let (r, c) = (m.len(), m[0].len());
    let mut t = zeros(c, r);
    for i in 0..r {
        for j in 0..c {
            t[j][i] = m[i][j];
        }
    }
    t
}

pub fn mul(a: &IntMatrix, b: &IntMatrix) -> IntMatrix {
    let n = a.len();
    let k = b.len();
    let m = if k == 0 { 0 } else { b[0].len() };
    let mut out = zeros(n, m);
    for i in 0..n {
        for (l, brow) in b.iter().enumerate() {
            let x = a[i][l];
            if x == 0 {
                continue;
            }
            for j in 0..m {
                out[i][j] += x * brow[j];
            }
        }
    }
    out
}

pub fn mul_vec(a: &IntMatrix, v: &[i64]) -> Vec<i64> {
    a.iter().map(|row| row.iter().zip(v).map(|(x, y)| x * y).sum()).collect()
}

pub fn dot(a: &[i64], b: &[i64]) -> i64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `aᵀ M b` for a bilinear form `M`.
pub fn pair(m: &IntMatrix, a: &[i64], b: &[i64]) -> i64 {
    dot(a, &mul_vec(m, b))
}

fn bareiss_rank_i128(rows: &[Vec<i64>]) -> Option<usize> {
    let mut a: Vec<Vec<i128>> = rows.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    let nr = a.len();
    if nr == 0 {
        return Some(0);
    }
    let nc = a[0].len();
    let mut rank = 0;
    let mut prev: i128 = 1;
    for col in 0..nc {
        if rank == nr {
            break;
        }
        let Some(p) = (rank..nr).find(|&i| a[i][col] != 0) else { continue };
        a.swap(rank, p);
        let piv = a[rank][col];
        for i in rank + 1..nr {
            let f = a[i][col];
            for j in col..nc {
                let v = piv.checked_mul(a[i][j])?.checked_sub(f.checked_mul(a[rank][j])?)?;
                if v % prev != 0 {
                    return None;
                }
                a[i][j] = v / prev;
            }
        }
        prev = piv;
        rank += 1;
    }
    Some(rank)
}

fn rank_rational(rows: &[Vec<i64>]) -> usize {
    let ncols = rows.first().map_or(0, |r| r.len());
    rref(rows, ncols).1.len()
}

/// Rank over ℚ of a list of integer row vectors.
pub fn rank(rows: &[Vec<i64>]) -> usize {
    if let Some((r, _)) = int_rref(rows, rows.first().map_or(0, |r| r.len())) {
        return r.len();
    }
    bareiss_rank_i128(rows).unwrap_or_else(|| rank_rational(rows))
}

fn gcd_i128(mut a: i128, mut b: i128) -> i128 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

fn normalize_row(row: &mut [i128]) {
    let g = row.iter().fold(0i128, |g, &x| gcd_i128(g, x));
    if g > 1 {
        row.iter_mut().for_each(|x| *x /= g);
    }
}

/// Integer reduced echelon form: every row primitive, pivot columns cleared
/// in all other rows, pivots positive. `None` if an entry leaves `i128`.
fn int_rref(rows: &[Vec<i64>], ncols: usize) -> Option<(Vec<Vec<i128>>, Vec<usize>)> {
    let mut a: Vec<Vec<i128>> = rows.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    let nr = a.len();
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..ncols {
        if r == nr {
            break;
        }
        let Some(p) = (r..nr).filter(|&i| a[i][col] != 0).min_by_key(|&i| a[i][col].abs()) else { continue };
        a.swap(r, p);
        if a[r][col] < 0 {
            a[r].iter_mut().for_each(|x| *x = -*x);
        }
        let pivot_row = a[r].clone();
        let piv = pivot_row[col];
        for (i, row) in a.iter_mut().enumerate() {
            if i == r || row[col] == 0 {
                continue;
            }
            let g = gcd_i128(piv, row[col]);
            let (fp, fr) = (row[col] / g, piv / g);
            for (x, &y) in row.iter_mut().zip(&pivot_row) {
                *x = x.checked_mul(fr)?.checked_sub(y.checked_mul(fp)?)?;
            }
            normalize_row(row);
        }
        pivots.push(col);
        r += 1;
    }
    a.truncate(r);
    Some((a, pivots))
}

fn to_i64_vec(v: &[i128]) -> Option<Vec<i64>> {
    v.iter().map(|&x| i64::try_from(x).ok()).collect()
}

fn int_nullspace(rows: &[Vec<i64>], ncols: usize) -> Option<Vec<Vec<i64>>> {
    let (r, pivots) = int_rref(rows, ncols)?;
    let mut out = Vec::new();
    for f in (0..ncols).filter(|c| !pivots.contains(c)) {
        let l = r.iter().zip(&pivots).fold(1i128, |l, (row, &p)| {
            let x = row[p];
            l / gcd_i128(l, x) * x
        });
        let mut v = vec![0i128; ncols];
        v[f] = l;
        for (row, &p) in r.iter().zip(&pivots) {
            v[p] = (-row[f]).checked_mul(l / row[p])?;
        }
        normalize_row(&mut v);
        out.push(to_i64_vec(&v)?);
    }
    Some(out)
}

/// Solves `A u = t b` for an integer vector `u` and integer `t ≠ 0`;
/// `None` when `b` is not in the column space of `A`.
pub fn solve_scaled(a: &IntMatrix, b: &[i64]) -> Option<(Vec<i64>, i64)> {
    let ncols = a.first().map_or(0, |r| r.len());
    let aug: Vec<Vec<i64>> = a.iter().zip(b).map(|(row, &x)| {
        let mut r = row.clone();
        r.push(-x);
        r
    }).collect();
    let ker = nullspace(&aug, ncols + 1);
    let v = ker.into_iter().find(|v| v[ncols] != 0)?;
    let t = v[ncols];
    Some((v[..ncols].to_vec(), t))
}

/// Reduced row echelon form over ℚ; returns the nonzero rows and pivot columns.
pub fn rref(rows: &[Vec<i64>], ncols: usize) -> (Vec<Vec<BigRational>>, Vec<usize>) {
    let mut a: Vec<Vec<BigRational>> = rows
        .iter()
        .map(|r| r.iter().map(|&x| BigRational::from_integer(BigInt::from(x))).collect())
        .collect();
    let nr = a.len();
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..ncols {
        if r == nr {
            break;
        }
        let Some(p) = (r..nr).find(|&i| !a[i][col].is_zero()) else { continue };
        a.swap(r, p);
        let inv = a[r][col].recip();
        for x in a[r].iter_mut() {
            *x = &*x * &inv;
        }
        let pivot_row = a[r].clone();
        for (i, row) in a.iter_mut().enumerate() {
            if i == r || row[col].is_zero() {
                continue;
            }
            let f = row[col].clone();
            for (x, y) in row.iter_mut().zip(&pivot_row) {
                *x = &*x - &f * y;
            }
        }
        pivots.push(col);
        r += 1;
    }
    a.truncate(r);
    (a, pivots)
}

/// Scales a rational vector to a primitive integer vector.
pub fn primitive(v: &[BigRational]) -> Vec<i64> {
    let mut l = BigInt::one();
    for x in v {
        l = l.lcm(x.denom());
    }
    let ints: Vec<BigInt> = v.iter().map(|x| (x * BigRational::from_integer(l.clone())).to_integer()).collect();
    let mut g = BigInt::zero();
    for x in &ints {
        g = g.gcd(x);
    }
    if g.is_zero() {
        g = BigInt::one();
    }
    ints.iter()
        .map(|x| (x / &g).to_i64().expect("primitive vector entry fits in i64"))
        .collect()
}

/// Integer basis of `{ x : A x = 0 }` where `A` has `ncols` columns.
pub fn nullspace(rows: &[Vec<i64>], ncols: usize) -> Vec<Vec<i64>> {
    if let Some(k) = int_nullspace(rows, ncols) {
        return k;
    }
    let (r, pivots) = rref(rows, ncols);
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    let mut out = Vec::new();
    for &f in &free {
        let mut v = vec![BigRational::zero(); ncols];
        v[f] = BigRational::one();
        for (row, &p) in r.iter().zip(&pivots) {
            v[p] = -row[f].clone();
        }
        out.push(primitive(&v));
    }
    out
}

/// Integer basis of the row span of `rows`, as primitive vectors in echelon form.
pub fn row_basis(rows: &[Vec<i64>], ncols: usize) -> Vec<Vec<i64>> {
    if let Some(b) = int_rref(rows, ncols).and_then(|(r, _)| r.iter().map(|v| to_i64_vec(v)).collect::<Option<Vec<_>>>()) {
        return b;
    }
    let (r, _) = rref(rows, ncols);
    r.iter().map(|row| primitive(row)).collect()
}

/// Column space of `m` (an integer basis of its image).
pub fn image(m: &IntMatrix) -> Vec<Vec<i64>> {
    if m.is_empty() {
        return Vec::new();
    }
    row_basis(&transpose(m), m.len())
}

/// Integer basis of the intersection of two row spans in ℚⁿ.
pub fn intersect(a: &[Vec<i64>], b: &[Vec<i64>], n: usize) -> Vec<Vec<i64>> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    // x·A = y·B  ⇔  (x, −y) in the left kernel of [A; B].
    let mut stacked: Vec<Vec<i64>> = a.to_vec();
    stacked.extend(b.iter().map(|r| r.iter().map(|x| -x).collect::<Vec<_>>()));
    let ker = nullspace(&transpose(&stacked), stacked.len());
    let vecs: Vec<Vec<i64>> = ker
        .iter()
        .map(|c| {
            let mut v = vec![0i64; n];
            for (coef, row) in c.iter().zip(a) {
                for (x, y) in v.iter_mut().zip(row) {
                    *x += coef * y;
                }
            }
            v
        })
        .collect();
    row_basis(&vecs, n)
}

/// Indices of a maximal linearly independent subset of `vectors`, greedily
/// from the front.
pub fn independent_subset(vectors: &[Vec<i64>]) -> Vec<usize> {
    if vectors.is_empty() {
        return Vec::new();
    }
    let cols = transpose(&vectors.to_vec());
    let n = vectors.len();
    match int_rref(&cols, n) {
        Some((_, p)) => p,
        None => rref(&cols, n).1,
    }
}

/// Whether two families span the same rational subspace.
pub fn same_span(a: &[Vec<i64>], b: &[Vec<i64>]) -> bool {
    let ra = rank(a);
    if ra != rank(b) {
        return false;
    }
    let mut all = a.to_vec();
    all.extend_from_slice(b);
    rank(&all) == ra
}

/// Whether `v` lies in the rational span of `rows`.
pub fn in_span(rows: &[Vec<i64>], v: &[i64]) -> bool {
    let mut all = rows.to_vec();
    let r0 = rank(&all);
    all.push(v.to_vec());
    rank(&all) == r0
}

/// Determinant of a square integer matrix (fails over `i64` range with `None`).
pub fn determinant(m: &IntMatrix) -> Option<i64> {
    let n = m.len();
    if n == 0 {
        return Some(1);
    }
    let mut a: Vec<Vec<i128>> = m.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n {
        if a[k][k] == 0 {
            let p = (k + 1..n).find(|&i| a[i][k] != 0);
            match p {
                Some(p) => {
                    a.swap(k, p);
                    sign = -sign;
                }
                None => return Some(0),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = a[k][k].checked_mul(a[i][j])?.checked_sub(a[i][k].checked_mul(a[k][j])?)?;
                a[i][j] = v / prev;
            }
        }
        prev = a[k][k];
    }
    (sign * a[n - 1][n - 1]).to_i64()
}

pub fn abs_max(m: &IntMatrix) -> i64 {
    m.iter().flatten().map(|x| x.abs()).max().unwrap_or(0)
}

/// Sign of a `BigRational`, exposed for callers that solve systems.
pub fn rational_sign(x: &BigRational) -> i32 {
    if x.is_positive() {
        1
    } else if x.is_negative() {
        -1
    } else {
        0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_and_kernel() {
        let m = vec![vec![1, 2, 3], vec![2, 4, 6], vec![1, 0, 1]];
        assert_eq!(rank(&m), 2);
        let k = nullspace(&m, 3);
        assert_eq!(k.len(), 1);
        assert!(mul_vec(&m, &k[0]).iter().all(|&x| x == 0));
    }

    #[test]
    fn determinant_small() {
        assert_eq!(determinant(&vec![vec![2, 1], vec![1, 1]]), Some(1));
        assert_eq!(determinant(&vec![vec![0, 1, 0], vec![1, 0, 0], vec![0, 0, 3]]), Some(-3));
    }

    #[test]
    fn intersection_of_planes() {
        let a = vec![vec![1, 0, 0], vec![0, 1, 0]];
        let b = vec![vec![0, 1, 0], vec![0, 0, 1]];
        let i = intersect(&a, &b, 3);
        assert_eq!(i.len(), 1);
        assert_eq!(rank(&[i[0].clone(), vec![0, 1, 0]]), 1);
    }

    #[test]
    fn integer_and_rational_paths_agree() {
        let m: IntMatrix = (0..7).map(|i| (0..9).map(|j| ((i * 5 + j * 3 + i * j) % 7) as i64 - 3).collect()).collect();
        assert_eq!(int_rref(&m, 9).unwrap().0.len(), rank_rational(&m));
        for v in nullspace(&m, 9) {
            assert!(mul_vec(&m, &v).iter().all(|&x| x == 0));
        }
        let b = mul_vec(&m, &[1, 0, 2, 0, 0, -1, 0, 0, 3]);
        let (u, t) = solve_scaled(&m, &b).unwrap();
        let lhs = mul_vec(&m, &u);
        assert!(lhs.iter().zip(&b).all(|(x, y)| *x == t * y));
    }

    #[test]
    fn overflow_falls_back() {
        let n = 30;
        let m: IntMatrix = (0..n).map(|i| (0..n).map(|j| ((i * 7 + j * 13) % 17) as i64 * 1_000_000 - 3).collect()).collect();
        let r = rank(&m);
        assert!(r <= n);
        assert_eq!(r, rank_rational(&m));
    }
}
