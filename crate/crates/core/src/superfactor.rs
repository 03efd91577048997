//! Pointed factors, fermion sectors, reduced super-modular data and
//! permutation-robust comparison.

use std::collections::BTreeMap;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::algebra::e;
use crate::centerdata::ModularData;
use crate::condense::{resolve_matrix, Entry, Mode, PartialModularData, Resolution, LABEL_TOL};
use crate::io::PhaseJson;
use crate::linalg::ComplexMatrix;
use crate::{Error, Result};

/// Result of splitting off a pointed modular subcategory.
#[derive(Clone, Debug)]
pub struct Factorization {
    pub factor: PartialModularData,
    pub pointed: ModularData,
    /// `(factor index, pointed index) → parent index`.
    pub bijection: Vec<((usize, usize), usize)>,
    /// Largest Kronecker deviation over the known entries.
    pub kronecker_defect: f64,
}

/// Subsets of the invertibles (with known action) that contain the unit,
/// are closed under fusion and have unitary restricted S; largest first,
/// then by label order. The trivial subset is omitted.
pub fn pointed_modular_subsets(pmd: &PartialModularData) -> Vec<Vec<usize>> {
    let inv: Vec<usize> = pmd.actions.keys().copied().filter(|&g| g != 0).collect();
    if inv.len() > 16 {
        return Vec::new();
    }
    let mut out = Vec::new();
    for mask in 1u32..(1 << inv.len()) {
        let mut set: Vec<usize> = std::iter::once(0)
            .chain(
                inv.iter()
                    .enumerate()
                    .filter(|(i, _)| mask >> i & 1 == 1)
                    .map(|(_, &g)| g),
            )
            .collect();
        set.sort_unstable();
        let closed = set
            .iter()
            .all(|&a| set.iter().all(|&b| set.binary_search(&pmd.actions[&a][b]).is_ok()));
        if !closed || set.iter().any(|&a| !pmd.row_known(a)) {
            continue;
        }
        if let Ok(sub) = pmd.restrict(&set).to_modular() {
            if sub.s.unitarity_defect() < LABEL_TOL {
                out.push(set);
            }
        }
    }
    out.sort_by(|a, b| b.len().cmp(&a.len()).then(a.cmp(b)));
    out
}

/// Splits `pmd ≅ factor ⊠ pointed`, where `factor` is the centralizer of
/// `pointed`, checking the label bijection and
/// `S_{aX,bY} = S^factor_{XY} · S^pointed_{ab}` on known entries.
pub fn factor_pointed(pmd: &PartialModularData, pointed: &[usize]) -> Result<Factorization> {
    let mut pointed = pointed.to_vec();
    pointed.sort_unstable();
    if pointed.first() != Some(&0) {
        pointed.insert(0, 0);
    }
    for &a in &pointed {
        if (pmd.dims[a] - 1.0).abs() > LABEL_TOL || !pmd.row_known(a) || !pmd.actions.contains_key(&a) {
            return Err(Error::Factor(format!("{} is not a usable invertible", pmd.labels[a])));
        }
    }
    let pt = pmd
        .restrict(&pointed)
        .to_modular()
        .map_err(|_| Error::Factor("pointed part not modular".into()))?;
    if pt.s.unitarity_defect() > LABEL_TOL {
        return Err(Error::Factor("pointed part not modular".into()));
    }
    let fac_idx = pmd.centralizer(&pointed)?;
    let factor = pmd.restrict(&fac_idx);
    let mut bijection = Vec::new();
    let mut hit = vec![false; pmd.rank()];
    for (xi, &x) in fac_idx.iter().enumerate() {
        for (ai, &a) in pointed.iter().enumerate() {
            let y = pmd.actions[&a][x];
            if hit[y] {
                return Err(Error::Factor(format!("{} is reached twice", pmd.labels[y])));
            }
            hit[y] = true;
            bijection.push(((xi, ai), y));
        }
    }
    if hit.iter().any(|h| !h) {
        return Err(Error::Factor("factor x pointed does not exhaust the labels".into()));
    }
    let mut defect: f64 = 0.0;
    for &((x, a), p) in &bijection {
        for &((y, b), q) in &bijection {
            if let (Some(full), Some(f)) = (pmd.known(p, q), factor.known(x, y)) {
                defect = defect.max((full - f * pt.s[(a, b)]).norm());
            }
        }
    }
    if defect > LABEL_TOL {
        return Err(Error::Factor(format!("Kronecker identity fails ({defect:.2e})")));
    }
    Ok(Factorization {
        factor,
        pointed: pt,
        bijection,
        kronecker_defect: defect,
    })
}

/// The fermion's centralizer, renormalized (`λ₀ = λ/√2`).
pub fn extract_fermion_sector(pmd: &PartialModularData, fermion: usize) -> Result<PartialModularData> {
    check_fermion(pmd, fermion)?;
    let idx = pmd.centralizer(&[fermion])?;
    if idx.binary_search(&fermion).is_err() {
        return Err(Error::Factor("fermion is not transparent in its centralizer".into()));
    }
    if idx.len() % 2 != 0 {
        return Err(Error::Factor(format!("fermion sector has odd rank {}", idx.len())));
    }
    Ok(pmd.restrict(&idx))
}

fn check_fermion(pmd: &PartialModularData, f: usize) -> Result<()> {
    let ok = (pmd.dims[f] - 1.0).abs() < LABEL_TOL
        && (pmd.twists[f] + 1.0).norm() < LABEL_TOL
        && pmd.actions.get(&f).is_some_and(|p| p[f] == 0);
    if ok {
        Ok(())
    } else {
        Err(Error::Factor(format!("{} is not a fermion", pmd.labels[f])))
    }
}

/// Reduced data `(Ŝ, T̂²)` of a super-modular category.
#[derive(Clone, Debug, PartialEq)]
pub struct SuperModularData {
    pub pairs: Vec<[String; 2]>,
    pub dims: Vec<f64>,
    pub s_hat: ComplexMatrix,
    pub t2_hat: Vec<C64>,
    pub lambda_hat: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SuperModularDataJson {
    pub pairs: Vec<[String; 2]>,
    pub dims: Vec<f64>,
    #[serde(rename = "S_hat")]
    pub s_hat: ComplexMatrix,
    #[serde(rename = "T2_hat")]
    pub t2_hat: Vec<PhaseJson>,
}

impl SuperModularData {
    pub fn rank(&self) -> usize {
        self.pairs.len()
    }

    pub fn conj(&self) -> SuperModularData {
        SuperModularData {
            s_hat: self.s_hat.conj(),
            t2_hat: self.t2_hat.iter().map(|t| t.conj()).collect(),
            ..self.clone()
        }
    }

    pub fn to_json(&self) -> SuperModularDataJson {
        SuperModularDataJson {
            pairs: self.pairs.clone(),
            dims: self.dims.clone(),
            s_hat: self.s_hat.clone(),
            t2_hat: self.t2_hat.iter().map(|&t| PhaseJson::encode(t)).collect(),
        }
    }

    pub fn from_json(j: &SuperModularDataJson) -> Result<SuperModularData> {
        let r = j.pairs.len();
        if j.dims.len() != r || j.s_hat.rows() != r || j.s_hat.cols() != r || j.t2_hat.len() != r {
            return Err(Error::Invalid("super-modular data shape mismatch".into()));
        }
        Ok(SuperModularData {
            pairs: j.pairs.clone(),
            dims: j.dims.clone(),
            s_hat: j.s_hat.clone(),
            t2_hat: j.t2_hat.iter().map(|t| t.decode()).collect::<Result<_>>()?,
            lambda_hat: j.dims.iter().map(|d| d * d).sum::<f64>().sqrt(),
        })
    }

    /// Unitarity, symmetry and a positive first row.
    pub fn check(&self, tol: f64) -> Result<()> {
        let u = self.s_hat.unitarity_defect();
        let s = self.s_hat.symmetry_defect();
        let pos = (0..self.rank()).all(|j| self.s_hat[(0, j)].re > 0.0 && self.s_hat[(0, j)].im.abs() < tol);
        if u > tol || s > tol || !pos {
            return Err(Error::NotModular(format!(
                "S_hat: unitarity {u:.2e}, symmetry {s:.2e}, positive first row {pos}"
            )));
        }
        Ok(())
    }
}

/// Sector data with fermion pairs collapsed; unknown slots may remain.
#[derive(Clone, Debug)]
pub struct PartialSuper {
    pub pairs: Vec<[String; 2]>,
    pub dims: Vec<f64>,
    /// `θ` of each pair's representative.
    pub twists: Vec<C64>,
    pub s_hat: Vec<Vec<Entry>>,
}

impl PartialSuper {
    pub fn lambda_hat(&self) -> f64 {
        self.dims.iter().map(|d| d * d).sum::<f64>().sqrt()
    }

    fn finish(&self, s_hat: ComplexMatrix) -> SuperModularData {
        SuperModularData {
            pairs: self.pairs.clone(),
            dims: self.dims.clone(),
            s_hat,
            t2_hat: self.twists.iter().map(|t| t * t).collect(),
            lambda_hat: self.lambda_hat(),
        }
    }
}

/// Whether `θ` lies in the half-open upper half `arg ∈ [0, π)`.
fn upper(t: C64) -> bool {
    let a = t.arg();
    a > -1e-9 && a < std::f64::consts::PI - 1e-9
}

/// Collapses `{X, fX}` pairs: `Ŝ_{[X],[Y]} = √2 S_{X,Y}`, `T̂²_{[X]} = θ_X²`.
/// Rows of `X` and `fX` must agree; unknown slots are identified across
/// them.
pub fn split_super_partial(sector: &PartialModularData, fermion: usize) -> Result<PartialSuper> {
    check_fermion(sector, fermion)?;
    let r = sector.rank();
    let perm = &sector.actions[&fermion];
    if let Some(x) = (0..r).find(|&x| perm[x] == x) {
        return Err(Error::Factor(format!("fermion has a fixed point {}", sector.labels[x])));
    }
    let reps: Vec<usize> = (0..r)
        .filter(|&x| {
            let y = perm[x];
            let (ux, uy) = (upper(sector.twists[x]), upper(sector.twists[y]));
            if ux != uy {
                ux
            } else {
                x < y
            }
        })
        .collect();

    // Identify slots of fX with those of X; a slot meeting a known value is
    // fixed by it.
    let mut s = sector.s.clone();
    let mut alias: BTreeMap<usize, (Option<usize>, C64, f64)> = BTreeMap::new();
    let mut defect: f64 = 0.0;
    for x in 0..r {
        for y in 0..r {
            let (a, b) = (s[x][y], s[perm[x]][y]);
            match (a, b) {
                (Entry::Known(u), Entry::Known(v)) => defect = defect.max((u - v).norm()),
                (Entry::Known(u), Entry::Slot { id, scale }) | (Entry::Slot { id, scale }, Entry::Known(u)) => {
                    alias.insert(id, (None, u / scale, 1.0));
                }
                (Entry::Slot { id: i, scale: si }, Entry::Slot { id: j, scale: sj }) if i != j => {
                    let (keep, drop, f) = if i < j { (i, j, sj / si) } else { (j, i, si / sj) };
                    alias.entry(drop).or_insert((Some(keep), C64::default(), f));
                }
                _ => {}
            }
        }
    }
    if defect > LABEL_TOL {
        return Err(Error::Factor(format!(
            "fermion not transparent (rows differ by {defect:.2e})"
        )));
    }
    for _ in 0..alias.len() + 1 {
        let mut changed = false;
        for e in s.iter_mut().flatten() {
            if let Entry::Slot { id, scale } = *e {
                if let Some(&(to, val, f)) = alias.get(&id) {
                    *e = match to {
                        None => Entry::Known(val * scale),
                        Some(k) => Entry::Slot {
                            id: k,
                            scale: scale / f,
                        },
                    };
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    let root2 = 2f64.sqrt();
    Ok(PartialSuper {
        pairs: reps
            .iter()
            .map(|&x| [sector.labels[x].clone(), sector.labels[perm[x]].clone()])
            .collect(),
        dims: reps.iter().map(|&x| sector.dims[x]).collect(),
        twists: reps.iter().map(|&x| sector.twists[x]).collect(),
        s_hat: reps
            .iter()
            .map(|&x| {
                reps.iter()
                    .map(|&y| match s[x][y] {
                        Entry::Known(v) => Entry::Known(v * root2),
                        Entry::Slot { id, scale } => Entry::Slot {
                            id,
                            scale: scale * root2,
                        },
                    })
                    .collect()
            })
            .collect(),
    })
}

/// Fully known sector data to `(Ŝ, T̂²)`.
pub fn split_super(sector: &ModularData, fermion: usize) -> Result<SuperModularData> {
    let fusion = naive_actions(sector)?;
    let p = PartialModularData::from_modular(sector, &fusion);
    let ps = split_super_partial(&p, fermion)?;
    let s = ComplexMatrix::from_fn(ps.rank(), ps.rank(), |i, j| ps.s_hat[i][j].known().unwrap_or_default());
    let smd = ps.finish(s);
    smd.check(LABEL_TOL)?;
    Ok(smd)
}

/// Fusion of a degenerate sector is not given by Verlinde; the action of
/// an invertible `g` is still read off `S_{gX,Y} = S_{X,Y}·S̃_{g,Y}/d_Y`.
fn naive_actions(md: &ModularData) -> Result<crate::centerdata::Fusion> {
    let r = md.rank();
    let mut n = vec![0u32; r * r * r];
    for g in crate::condense::find_invertibles(md) {
        for x in 0..r {
            let target: Vec<C64> = (0..r).map(|y| md.s[(x, y)] * md.s_tilde(g, y) / md.dims[y]).collect();
            let hits: Vec<usize> = (0..r)
                .filter(|&z| (md.dims[z] - md.dims[x]).abs() < LABEL_TOL)
                .filter(|&z| (0..r).all(|y| (md.s[(z, y)] - target[y]).norm() < LABEL_TOL))
                .collect();
            if hits.len() != 1 {
                return Err(Error::Factor(format!(
                    "action of {} on {} is ambiguous",
                    md.labels[g], md.labels[x]
                )));
            }
            n[(g * r + x) * r + hits[0]] = 1;
        }
    }
    Ok(crate::centerdata::Fusion { rank: r, n })
}

impl PartialSuper {
    pub fn rank(&self) -> usize {
        self.pairs.len()
    }
}

/// Resolves remaining slots of collapsed sector data.
pub fn resolve_super(ps: &PartialSuper) -> Result<(SuperModularData, Resolution)> {
    let res = resolve_matrix(&ps.s_hat, &ps.dims, &ps.twists, Mode::Super)?;
    let smd = ps.finish(res.s.clone());
    smd.check(LABEL_TOL)?;
    Ok((smd, res))
}

/// Outcome of [`compare_modular`].
#[derive(Clone, Debug, Serialize)]
pub struct MatchResult {
    pub matched: bool,
    /// `perm[i]` is the index in `b` matched with index `i` of `a`.
    pub permutation: Vec<usize>,
    pub conjugated: bool,
    /// Largest entry deviation of the best permutation found.
    pub max_deviation: f64,
}

/// Data compared by [`compare_data`]: dimensions, a diagonal phase (`θ` or
/// `T̂²`) and the S-matrix.
pub struct Comparable<'a> {
    pub dims: &'a [f64],
    pub phases: Vec<C64>,
    pub s: &'a ComplexMatrix,
}

impl<'a> From<&'a ModularData> for Comparable<'a> {
    fn from(md: &'a ModularData) -> Self {
        Comparable {
            dims: &md.dims,
            phases: md.twists.clone(),
            s: &md.s,
        }
    }
}

impl<'a> From<&'a SuperModularData> for Comparable<'a> {
    fn from(sd: &'a SuperModularData) -> Self {
        Comparable {
            dims: &sd.dims,
            phases: sd.t2_hat.clone(),
            s: &sd.s_hat,
        }
    }
}

/// Searches permutations fixing 0 that respect `(dim, phase)` and match S
/// entrywise within `tol`, optionally after complex conjugation of `a`.
pub fn compare_data(a: &Comparable, b: &Comparable, allow_conjugation: bool, tol: f64) -> MatchResult {
    let r = a.dims.len();
    let mut best = MatchResult {
        matched: false,
        permutation: Vec::new(),
        conjugated: false,
        max_deviation: f64::INFINITY,
    };
    if r != b.dims.len() {
        return best;
    }
    let flags: &[bool] = if allow_conjugation { &[false, true] } else { &[false] };
    for &conj in flags {
        let sa = |i: usize, j: usize| if conj { a.s[(i, j)].conj() } else { a.s[(i, j)] };
        let pa = |i: usize| if conj { a.phases[i].conj() } else { a.phases[i] };
        let allowed: Vec<Vec<usize>> = (0..r)
            .map(|i| {
                (0..r)
                    .filter(|&j| (i == 0) == (j == 0))
                    .filter(|&j| {
                        (a.dims[i] - b.dims[j]).abs() < 1e-4 * a.dims[i].max(1.0) && (pa(i) - b.phases[j]).norm() < 1e-4
                    })
                    .collect()
            })
            .collect();
        let mut perm = vec![usize::MAX; r];
        let mut used = vec![false; r];
        // Depth-first over rows, pruning on the growing principal block with
        // a loose bound so near-misses are still scored.
        fn rec(
            i: usize,
            perm: &mut Vec<usize>,
            used: &mut Vec<bool>,
            cur: f64,
            allowed: &[Vec<usize>],
            dev: &dyn Fn(usize, usize, usize, usize) -> f64,
            best: &mut (f64, Vec<usize>),
        ) {
            let r = perm.len();
            if cur >= best.0 {
                return;
            }
            if i == r {
                *best = (cur, perm.clone());
                return;
            }
            for &j in &allowed[i] {
                if used[j] {
                    continue;
                }
                let mut m = cur;
                for k in 0..=i {
                    let jk = if k == i { j } else { perm[k] };
                    m = m.max(dev(i, k, j, jk)).max(dev(k, i, jk, j));
                }
                perm[i] = j;
                used[j] = true;
                rec(i + 1, perm, used, m, allowed, dev, best);
                used[j] = false;
                perm[i] = usize::MAX;
            }
        }
        let dev = |i: usize, k: usize, j: usize, jk: usize| (sa(i, k) - b.s[(j, jk)]).norm();
        let mut found = (
            if best.max_deviation.is_finite() {
                best.max_deviation
            } else {
                1.0
            },
            Vec::new(),
        );
        rec(0, &mut perm, &mut used, 0.0, &allowed, &dev, &mut found);
        if !found.1.is_empty() && found.0 < best.max_deviation {
            best = MatchResult {
                matched: found.0 <= tol,
                permutation: found.1,
                conjugated: conj,
                max_deviation: found.0,
            };
        }
        if best.matched {
            break;
        }
    }
    best
}

pub fn compare_modular(a: &ModularData, b: &ModularData, allow_conjugation: bool, tol: f64) -> MatchResult {
    compare_data(&a.into(), &b.into(), allow_conjugation, tol)
}

pub fn compare_super(a: &SuperModularData, b: &SuperModularData, allow_conjugation: bool, tol: f64) -> MatchResult {
    compare_data(&a.into(), &b.into(), allow_conjugation, tol)
}

/// `m + √n`.
fn chi(n: f64, m: f64) -> f64 {
    m + n.sqrt()
}

fn target_pairs(name: &str, r: usize) -> Vec<[String; 2]> {
    (0..r)
        .map(|i| [format!("{name}:{i}"), format!("{name}:f{i}")])
        .collect()
}

/// The two reference super-modular data, by name `smds1` / `smds2`.
pub fn target_data(name: &str) -> Result<SuperModularData> {
    let c = |x: f64| C64::new(x, 0.0);
    let (scale, rows, t2): (f64, Vec<Vec<C64>>, Vec<C64>) = match name {
        "smds1" => {
            let (x3, x4, x5) = (chi(15.0, 3.0), chi(15.0, 4.0), chi(15.0, 5.0));
            let (y1, y5) = (chi(5.0, 1.0), chi(5.0, 5.0));
            let root = (30.0 * x4).sqrt();
            let w = -2.0 * root / y5;
            (
                1.0 / root,
                vec![
                    vec![c(1.0), c(x4), c(x5), c(x3), c(x3)],
                    vec![c(x4), c(1.0), c(x5), c(-x3), c(-x3)],
                    vec![c(x5), c(x5), c(-x5), c(0.0), c(0.0)],
                    vec![c(x3), c(-x3), c(0.0), c(0.5 * y1 * x3), c(w)],
                    vec![c(x3), c(-x3), c(0.0), c(w), c(0.5 * y1 * x3)],
                ],
                vec![c(1.0), c(1.0), e(1.0 / 3.0), e(2.0 / 5.0), e(-2.0 / 5.0)],
            )
        }
        "smds2" => {
            let (z3, z4, z5) = (chi(6.0, 3.0), chi(24.0, 4.0), chi(24.0, 5.0));
            let root = (6.0 * z5).sqrt();
            let i = C64::new(0.0, root);
            (
                1.0 / (2.0 * root),
                vec![
                    vec![c(1.0), c(z5), c(z3), c(z3), c(z4)],
                    vec![c(z5), c(1.0), c(z3), c(z3), c(-z4)],
                    vec![c(z3), c(z3), -z3 - i, -z3 + i, c(0.0)],
                    vec![c(z3), c(z3), -z3 + i, -z3 - i, c(0.0)],
                    vec![c(z4), c(-z4), c(0.0), c(0.0), c(z4)],
                ],
                vec![c(1.0), c(1.0), c(-1.0), c(-1.0), e(1.0 / 3.0)],
            )
        }
        _ => return Err(Error::Invalid(format!("unknown target {name}"))),
    };
    let s_hat = ComplexMatrix::from_rows(rows).scale(scale);
    let dims: Vec<f64> = (0..5).map(|j| s_hat[(0, j)].re / s_hat[(0, 0)].re).collect();
    Ok(SuperModularData {
        pairs: target_pairs(name, 5),
        lambda_hat: dims.iter().map(|d| d * d).sum::<f64>().sqrt(),
        dims,
        s_hat,
        t2_hat: t2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn targets_unitary() {
        for n in ["smds1", "smds2"] {
            let t = target_data(n).unwrap();
            assert!(t.s_hat.unitarity_defect() < 1e-12, "{n}");
            assert!(t.check(1e-12).is_ok());
        }
    }

    #[test]
    fn smds1_entries() {
        let t = target_data("smds1").unwrap();
        let x4 = 4.0 + 15f64.sqrt();
        assert!((t.s_hat[(0, 1)].re - x4 / (30.0 * x4).sqrt()).abs() < 1e-12);
        assert!((t.s_hat[(3, 4)].re + 2.0 / (5.0 + 5f64.sqrt())).abs() < 1e-12);
    }

    #[test]
    fn smds2_conjugate_match() {
        let t = target_data("smds2").unwrap();
        let m = compare_super(&t.conj(), &t, true, 1e-9);
        assert!(m.matched);
        let m = compare_super(&t, &t, false, 1e-9);
        assert!(m.matched && !m.conjugated);
        assert_eq!(m.permutation, vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn smds1_vs_smds2_no_match() {
        let a = target_data("smds1").unwrap();
        let b = target_data("smds2").unwrap();
        assert!(!compare_super(&a, &b, true, 1e-6).matched);
    }
}
