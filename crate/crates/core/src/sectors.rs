//! Fixed particle-number sectors.
//!
//! A sector state is the set of occupied modes, kept sorted. States are ranked
//! in colexicographic order: `rank(c_0 < c_1 < … < c_{m-1}) = Σ_k C(c_k, k+1)`.
//! The amplitude at a rank is the coefficient of the canonically ordered
//! Grassmann basis element whose mask is the complement of the occupied set,
//! so all signs agree with [`crate::grassmann`].

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::sparse::SparseMatrix;

/// Default cap on sector dimension.
pub const DEFAULT_SECTOR_LIMIT: usize = 1 << 22;

/// `C(n, k)` in `u128`, saturating at `u128::MAX`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut row = vec![0u128; k + 1];
    row[0] = 1;
    for i in 1..=n {
        for j in (1..=k.min(i)).rev() {
            row[j] = row[j].saturating_add(row[j - 1]);
        }
    }
    row[k]
}

#[derive(Debug, Clone, PartialEq)]
pub struct SectorBasis {
    modes: usize,
    m: usize,
    dim: usize,
    /// `table[k][c] = C(c, k)` for `k ≤ m`, `c ≤ modes`.
    table: Vec<Vec<usize>>,
}

impl SectorBasis {
    pub fn new(modes: usize, m: usize, limit: usize) -> Result<Self> {
        if m > modes {
            return Err(Error::InvalidParameter(format!("particle number {m} exceeds {modes} modes")));
        }
        let d = binomial(modes, m);
        if d > limit as u128 {
            return Err(Error::SectorTooLarge { dim: d, limit });
        }
        let table = (0..=m)
            .map(|k| (0..=modes).map(|c| binomial(c, k).min(usize::MAX as u128) as usize).collect())
            .collect();
        Ok(Self { modes, m, dim: d as usize, table })
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn particles(&self) -> usize {
        self.m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Rank of a sorted occupied set.
    pub fn rank(&self, occ: &[usize]) -> usize {
        debug_assert_eq!(occ.len(), self.m);
        debug_assert!(occ.windows(2).all(|w| w[0] < w[1]));
        occ.iter().enumerate().map(|(k, &c)| self.table[k + 1][c]).sum()
    }

    pub fn unrank(&self, mut r: usize) -> Vec<usize> {
        let mut occ = vec![0; self.m];
        let mut hi = self.modes;
        for k in (1..=self.m).rev() {
            // largest c < hi with C(c, k) <= r
            let mut c = hi - 1;
            while self.table[k][c] > r {
                c -= 1;
            }
            occ[k - 1] = c;
            r -= self.table[k][c];
            hi = c;
        }
        occ
    }

    pub fn states(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        (0..self.dim).map(|r| self.unrank(r))
    }

    /// Grassmann mask of a state (set bit = variable present = mode empty).
    pub fn mask_of(&self, occ: &[usize]) -> u32 {
        assert!(self.modes <= 32, "mask form needs at most 32 modes");
        let full = if self.modes == 32 { u32::MAX } else { (1u32 << self.modes) - 1 };
        occ.iter().fold(full, |m, &c| m & !(1u32 << c))
    }

    pub fn from_mask(&self, mask: u32) -> Option<usize> {
        let occ: Vec<usize> = (0..self.modes).filter(|&b| mask >> b & 1 == 0).collect();
        (occ.len() == self.m).then(|| self.rank(&occ))
    }
}

fn below(occ: &[usize], i: usize) -> usize {
    occ.partition_point(|&o| o < i)
}

/// Sign of `a_j = ψ_j·` on a state with `j` occupied.
pub fn annihilation_sign(occ: &[usize], j: usize) -> f64 {
    if (j - below(occ, j)) % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Sign of `a†_i = ∂/∂ψ_i` on a state with `i` empty.
pub fn creation_sign(occ: &[usize], i: usize) -> f64 {
    annihilation_sign(occ, i)
}

fn insert_sorted(occ: &mut Vec<usize>, i: usize) {
    let p = below(occ, i);
    occ.insert(p, i);
}

/// `a†_i v`: maps sector `m` into sector `m + 1`.
pub fn apply_creation(from: &SectorBasis, to: &SectorBasis, v: &[f64], i: usize) -> Result<Vec<f64>> {
    check_pair(from, to, 1)?;
    check_mode(from, i)?;
    let mut out = vec![0.0; to.dim()];
    for (r, &a) in v.iter().enumerate() {
        if a == 0.0 {
            continue;
        }
        let mut occ = from.unrank(r);
        if occ.binary_search(&i).is_ok() {
            continue;
        }
        let s = creation_sign(&occ, i);
        insert_sorted(&mut occ, i);
        out[to.rank(&occ)] += s * a;
    }
    Ok(out)
}

/// `a_j v`: maps sector `m` into sector `m - 1`.
pub fn apply_annihilation(from: &SectorBasis, to: &SectorBasis, v: &[f64], j: usize) -> Result<Vec<f64>> {
    check_pair(to, from, 1)?;
    check_mode(from, j)?;
    let mut out = vec![0.0; to.dim()];
    for (r, &a) in v.iter().enumerate() {
        if a == 0.0 {
            continue;
        }
        let mut occ = from.unrank(r);
        let Ok(p) = occ.binary_search(&j) else { continue };
        let s = annihilation_sign(&occ, j);
        occ.remove(p);
        out[to.rank(&occ)] += s * a;
    }
    Ok(out)
}

fn check_pair(lower: &SectorBasis, upper: &SectorBasis, shift: usize) -> Result<()> {
    if lower.modes != upper.modes || lower.m + shift != upper.m {
        return Err(Error::DimensionMismatch { expected: lower.m + shift, got: upper.m });
    }
    Ok(())
}

fn check_mode(b: &SectorBasis, i: usize) -> Result<()> {
    if i >= b.modes {
        return Err(Error::IndexOutOfRange { index: i, n: b.modes });
    }
    Ok(())
}

/// Column `r` of `Σ c_ij a†_i a_j` in the sector: `(rank', value)` pairs.
fn one_body_column(basis: &SectorBasis, by_j: &[Vec<(usize, f64)>], r: usize) -> Vec<(usize, f64)> {
    let occ = basis.unrank(r);
    let mut out = Vec::new();
    let mut rest = Vec::with_capacity(occ.len());
    for (p, &j) in occ.iter().enumerate() {
        if by_j[j].is_empty() {
            continue;
        }
        let sj = annihilation_sign(&occ, j);
        rest.clear();
        rest.extend(occ[..p].iter().chain(&occ[p + 1..]));
        for &(i, c) in &by_j[j] {
            if i == j {
                out.push((r, c));
                continue;
            }
            if rest.binary_search(&i).is_ok() {
                continue;
            }
            let si = creation_sign(&rest, i);
            let mut next = rest.clone();
            insert_sorted(&mut next, i);
            out.push((basis.rank(&next), sj * si * c));
        }
    }
    out
}

/// Sector image of the one-body operator `Σ_ij c_ij ∂/∂ψ_i ψ_j`, entries
/// `(i, j, c_ij)` of a `modes × modes` matrix.
pub fn one_body_operator(basis: &SectorBasis, c: &SparseMatrix<f64>) -> Result<SparseMatrix<f64>> {
    if c.rows() != basis.modes || c.cols() != basis.modes {
        return Err(Error::DimensionMismatch { expected: basis.modes, got: c.rows() });
    }
    let mut by_j: Vec<Vec<(usize, f64)>> = vec![Vec::new(); basis.modes];
    for (i, j, v) in c.iter() {
        by_j[j].push((i, v));
    }
    let dim = basis.dim();
    #[cfg(feature = "parallel")]
    let columns: Vec<Vec<(usize, f64)>> = (0..dim).into_par_iter().map(|r| one_body_column(basis, &by_j, r)).collect();
    #[cfg(not(feature = "parallel"))]
    let columns: Vec<Vec<(usize, f64)>> = (0..dim).map(|r| one_body_column(basis, &by_j, r)).collect();
    let trip = columns
        .into_iter()
        .enumerate()
        .flat_map(|(r, col)| col.into_iter().map(move |(row, v)| (row, r, v)));
    Ok(SparseMatrix::from_triplets(dim, dim, trip))
}

/// Occupation of mode `i` for every state of the sector.
pub fn occupation_values(basis: &SectorBasis, i: usize) -> Vec<f64> {
    (0..basis.dim())
        .map(|r| if basis.unrank(r).binary_search(&i).is_ok() { 1.0 } else { 0.0 })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grassmann::GrassmannElement;

    #[test]
    fn binomials() {
        assert_eq!(binomial(8, 2), 28);
        assert_eq!(binomial(3, 5), 0);
        // Pascal's triangle up to n = 128
        let mut row = vec![1u128];
        for n in 1..=128usize {
            let mut next = vec![1u128; n + 1];
            for k in 1..n {
                next[k] = row[k - 1] + row[k];
            }
            row = next;
            for k in [0, 1, n / 3, n / 2, n] {
                assert_eq!(binomial(n, k), row[k], "C({n}, {k})");
            }
        }
    }

    #[test]
    fn rank_is_a_bijection() {
        let b = SectorBasis::new(9, 4, DEFAULT_SECTOR_LIMIT).unwrap();
        assert_eq!(b.dim(), 126);
        for r in 0..b.dim() {
            let occ = b.unrank(r);
            assert_eq!(occ.len(), 4);
            assert!(occ.windows(2).all(|w| w[0] < w[1]));
            assert_eq!(b.rank(&occ), r);
        }
    }

    #[test]
    fn dimension_overflow_reports_size() {
        let e = SectorBasis::new(128, 64, DEFAULT_SECTOR_LIMIT).unwrap_err();
        match e {
            Error::SectorTooLarge { dim, .. } => assert_eq!(dim, binomial(128, 64)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn creation_matches_grassmann_derivative() {
        let n = 6;
        let from = SectorBasis::new(n, 2, 1000).unwrap();
        let to = SectorBasis::new(n, 3, 1000).unwrap();
        for r in 0..from.dim() {
            let mut v = vec![0.0; from.dim()];
            v[r] = 1.0;
            let g = GrassmannElement::basis(n, from.mask_of(&from.unrank(r))).unwrap();
            for i in 0..n {
                let out = apply_creation(&from, &to, &v, i).unwrap();
                let dg = g.derive(i).unwrap();
                for r2 in 0..to.dim() {
                    let mask = to.mask_of(&to.unrank(r2));
                    assert_eq!(out[r2], dg.coefficient(mask));
                }
                let down = SectorBasis::new(n, 1, 1000).unwrap();
                let out = apply_annihilation(&from, &down, &v, i).unwrap();
                let pg = g.mul_generator(i).unwrap();
                for r2 in 0..down.dim() {
                    assert_eq!(out[r2], pg.coefficient(down.mask_of(&down.unrank(r2))));
                }
            }
        }
    }

    #[test]
    fn double_creation_vanishes() {
        let b1 = SectorBasis::new(5, 1, 100).unwrap();
        let b2 = SectorBasis::new(5, 2, 100).unwrap();
        let b3 = SectorBasis::new(5, 3, 100).unwrap();
        let v: Vec<f64> = (0..5).map(|k| k as f64 + 1.0).collect();
        for i in 0..5 {
            let once = apply_creation(&b1, &b2, &v, i).unwrap();
            let twice = apply_creation(&b2, &b3, &once, i).unwrap();
            assert!(twice.iter().all(|&x| x == 0.0));
        }
    }
}
