//! Bosons, fermions, Müger centralizers and ℤ/2 boson condensation.
//!
//! Condensation only fixes part of the new S-matrix. Entries that are not
//! determined are carried as unknown slots in [`PartialModularData`] and
//! later fixed by [`resolve_unknowns`] (or its super-modular counterpart).

use std::collections::BTreeMap;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::centerdata::{integrality_defect, verlinde_raw, Fusion, ModularData};
use crate::linalg::{solve_affine, ComplexMatrix};
use crate::{Error, Result};

/// Tolerance for "dimension one", twist equalities and centralizer tests.
pub const LABEL_TOL: f64 = 1e-6;

pub fn find_invertibles(md: &ModularData) -> Vec<usize> {
    (0..md.rank())
        .filter(|&i| (md.dims[i] - 1.0).abs() < LABEL_TOL)
        .collect()
}

fn self_inverse_with_twist(md: &ModularData, fusion: &Fusion, theta: f64) -> Vec<usize> {
    find_invertibles(md)
        .into_iter()
        .filter(|&x| x != 0 && fusion.get(x, x, 0) == 1 && (md.twists[x] - C64::new(theta, 0.0)).norm() < LABEL_TOL)
        .collect()
}

/// Invertible `X ≠ 1` with `X⊗X = 1` and `θ_X = 1`.
pub fn find_bosons(md: &ModularData, fusion: &Fusion) -> Vec<usize> {
    self_inverse_with_twist(md, fusion, 1.0)
}

/// Invertible `X` with `X⊗X = 1` and `θ_X = −1`.
pub fn find_fermions(md: &ModularData, fusion: &Fusion) -> Vec<usize> {
    self_inverse_with_twist(md, fusion, -1.0)
}

/// Labels `Y` with `S̃_{X,Y} = d_X d_Y` for every generator `X`.
pub fn centralizer(md: &ModularData, generators: &[usize]) -> Vec<usize> {
    (0..md.rank())
        .filter(|&y| {
            generators
                .iter()
                .all(|&x| (md.s_tilde(x, y) - md.dims[x] * md.dims[y]).norm() < LABEL_TOL)
        })
        .collect()
}

/// Orbits of `X ↦ b⊗X` for an invertible `b` of order two.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Orbits {
    pub fixed: Vec<usize>,
    /// `(X, bX)` with `X < bX`.
    pub pairs: Vec<(usize, usize)>,
}

pub fn tensor_orbits(md: &ModularData, fusion: &Fusion, b: usize) -> Result<Orbits> {
    if (md.dims[b] - 1.0).abs() > LABEL_TOL {
        return Err(Error::Condense(format!("{} is not invertible", md.labels[b])));
    }
    let perm = fusion
        .action(b)
        .ok_or_else(|| Error::Condense(format!("fusion with {} is not a permutation", md.labels[b])))?;
    let mut orbits = Orbits {
        fixed: Vec::new(),
        pairs: Vec::new(),
    };
    for (x, &y) in perm.iter().enumerate() {
        if perm[y] != x {
            return Err(Error::Condense(format!(
                "{} does not act as an involution",
                md.labels[b]
            )));
        }
        if y == x {
            orbits.fixed.push(x);
        } else if x < y {
            orbits.pairs.push((x, y));
        }
    }
    Ok(orbits)
}

/// An S-entry that is either known or `scale · u[id]` for an unknown slot.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Entry {
    Known(C64),
    Slot { id: usize, scale: f64 },
}

impl Entry {
    pub fn known(&self) -> Option<C64> {
        match *self {
            Entry::Known(v) => Some(v),
            Entry::Slot { .. } => None,
        }
    }

    fn scaled(&self, f: f64) -> Entry {
        match *self {
            Entry::Known(v) => Entry::Known(v * f),
            Entry::Slot { id, scale } => Entry::Slot { id, scale: scale * f },
        }
    }
}

/// `u[a] + u[b] = value`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SumConstraint {
    pub slots: [usize; 2],
    pub value: C64,
}

/// Where a condensed simple comes from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Origin {
    /// Free orbit `{X, bX}` of parent labels.
    TypeI { rep: String, partner: String },
    /// Branch 1 or 2 of a fixed parent label.
    TypeII { fixed: String, branch: u8 },
    /// Carried over unchanged (no condensation happened).
    Plain(String),
}

/// Modular data whose S-matrix may contain unknown slots.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartialModularData {
    pub labels: Vec<String>,
    pub origins: Vec<Origin>,
    pub dims: Vec<f64>,
    pub twists: Vec<C64>,
    pub lambda: f64,
    /// Normalized entries, symmetric.
    pub s: Vec<Vec<Entry>>,
    pub constraints: Vec<SumConstraint>,
    /// Permutations `X ↦ g⊗X` for those invertibles `g` whose action is known.
    pub actions: BTreeMap<usize, Vec<usize>>,
}

impl PartialModularData {
    pub fn from_modular(md: &ModularData, fusion: &Fusion) -> PartialModularData {
        let r = md.rank();
        let actions = find_invertibles(md)
            .into_iter()
            .filter_map(|g| fusion.action(g).map(|p| (g, p)))
            .collect();
        PartialModularData {
            labels: md.labels.clone(),
            origins: md.labels.iter().map(|l| Origin::Plain(l.clone())).collect(),
            dims: md.dims.clone(),
            twists: md.twists.clone(),
            lambda: md.lambda,
            s: (0..r)
                .map(|i| (0..r).map(|j| Entry::Known(md.s[(i, j)])).collect())
                .collect(),
            constraints: Vec::new(),
            actions,
        }
    }

    pub fn rank(&self) -> usize {
        self.labels.len()
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn known(&self, i: usize, j: usize) -> Option<C64> {
        self.s[i][j].known()
    }

    pub fn row_known(&self, i: usize) -> bool {
        self.s[i].iter().all(|e| e.known().is_some())
    }

    /// Slot ids still present in `S`, ascending.
    pub fn slots(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self
            .s
            .iter()
            .flatten()
            .filter_map(|e| match e {
                Entry::Slot { id, .. } => Some(*id),
                _ => None,
            })
            .collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// `|λ S_{X,Y} − d_X d_Y| < tol` for every generator; generator rows
    /// must be known.
    pub fn centralizer(&self, generators: &[usize]) -> Result<Vec<usize>> {
        let mut out = Vec::new();
        for y in 0..self.rank() {
            let mut inside = true;
            for &x in generators {
                let v = self.known(x, y).ok_or_else(|| {
                    Error::Factor(format!("S entry ({}, {}) is unknown", self.labels[x], self.labels[y]))
                })?;
                if (v * self.lambda - self.dims[x] * self.dims[y]).norm() >= LABEL_TOL {
                    inside = false;
                }
            }
            if inside {
                out.push(y);
            }
        }
        Ok(out)
    }

    /// Restriction to `idx`, renormalized by `√Σ d²` of the kept labels.
    pub fn restrict(&self, idx: &[usize]) -> PartialModularData {
        let lam = idx.iter().map(|&i| self.dims[i].powi(2)).sum::<f64>().sqrt();
        let f = self.lambda / lam;
        let pos: BTreeMap<usize, usize> = idx.iter().enumerate().map(|(k, &i)| (i, k)).collect();
        let actions = self
            .actions
            .iter()
            .filter_map(|(g, perm)| {
                let gk = *pos.get(g)?;
                let p: Option<Vec<usize>> = idx.iter().map(|&i| pos.get(&perm[i]).copied()).collect();
                p.map(|p| (gk, p))
            })
            .collect();
        let s: Vec<Vec<Entry>> = idx
            .iter()
            .map(|&i| idx.iter().map(|&j| self.s[i][j].scaled(f)).collect())
            .collect();
        let mut out = PartialModularData {
            labels: idx.iter().map(|&i| self.labels[i].clone()).collect(),
            origins: idx.iter().map(|&i| self.origins[i].clone()).collect(),
            dims: idx.iter().map(|&i| self.dims[i]).collect(),
            twists: idx.iter().map(|&i| self.twists[i]).collect(),
            lambda: lam,
            s,
            constraints: Vec::new(),
            actions,
        };
        let live = out.slots();
        out.constraints = self
            .constraints
            .iter()
            .filter(|c| c.slots.iter().all(|s| live.binary_search(s).is_ok()))
            .cloned()
            .collect();
        out
    }

    /// Replaces slot `id` by `value` (in slot units) everywhere.
    pub fn assign(&mut self, id: usize, value: C64) {
        for e in self.s.iter_mut().flatten() {
            if let Entry::Slot { id: j, scale } = *e {
                if j == id {
                    *e = Entry::Known(value * scale);
                }
            }
        }
        self.constraints.retain(|c| !c.slots.contains(&id));
    }

    /// Concrete modular data, available once no slots remain.
    pub fn to_modular(&self) -> Result<ModularData> {
        if !self.slots().is_empty() {
            return Err(Error::Resolve(format!("{} unknown slots remain", self.slots().len())));
        }
        let r = self.rank();
        let s = ComplexMatrix::from_fn(r, r, |i, j| self.s[i][j].known().unwrap_or_default());
        ModularData::new(self.labels.clone(), self.dims.clone(), self.twists.clone(), s)
    }
}

fn type_one_name(rep: &str) -> String {
    format!("F[{rep}]")
}

fn type_two_name(fixed: &str, branch: u8) -> String {
    format!("[{fixed}]_{branch}")
}

/// Condenses the boson `b`: labels of the centralizer of `b` up to fusion
/// with `b`, fixed points split into two branches, `λ' = λ/2`.
pub fn condense(md: &ModularData, fusion: &Fusion, b: usize) -> Result<PartialModularData> {
    if !find_bosons(md, fusion).contains(&b) {
        return Err(Error::Condense(format!("{} is not a boson", md.labels[b])));
    }
    let orbits = tensor_orbits(md, fusion, b)?;
    let cent = centralizer(md, &[b]);
    let in_cent = |x: usize| cent.binary_search(&x).is_ok();
    if let Some(&y) = orbits.fixed.iter().find(|&&y| md.labels[y].starts_with("B(")) {
        return Err(Error::Condense(format!("{} is fixed by the boson", md.labels[y])));
    }
    let partner: BTreeMap<usize, usize> = orbits.pairs.iter().flat_map(|&(x, y)| [(x, y), (y, x)]).collect();

    // Condensed label k ↔ (parent label, branch 0 for type I).
    let mut parent: Vec<(usize, u8)> = Vec::new();
    let mut image: BTreeMap<(usize, u8), usize> = BTreeMap::new();
    for &x in &cent {
        match partner.get(&x) {
            Some(&y) => {
                if !in_cent(y) {
                    return Err(Error::Condense("centralizer is not closed under the boson".into()));
                }
                if x < y {
                    image.insert((x, 0), parent.len());
                    image.insert((y, 0), parent.len());
                    parent.push((x, 0));
                }
            }
            None => {
                for br in [1u8, 2] {
                    image.insert((x, br), parent.len());
                    parent.push((x, br));
                }
            }
        }
    }
    let r = parent.len();
    let lambda = md.lambda / 2.0;
    let mut labels = Vec::with_capacity(r);
    let mut origins = Vec::with_capacity(r);
    let mut dims = Vec::with_capacity(r);
    let mut twists = Vec::with_capacity(r);
    for &(x, br) in &parent {
        if br == 0 {
            labels.push(type_one_name(&md.labels[x]));
            origins.push(Origin::TypeI {
                rep: md.labels[x].clone(),
                partner: md.labels[partner[&x]].clone(),
            });
            dims.push(md.dims[x]);
        } else {
            labels.push(type_two_name(&md.labels[x], br));
            origins.push(Origin::TypeII {
                fixed: md.labels[x].clone(),
                branch: br,
            });
            dims.push(md.dims[x] / 2.0);
        }
        twists.push(md.twists[x]);
    }

    let mut s = vec![vec![Entry::Known(C64::default()); r]; r];
    let mut next_slot = 0;
    let mut constraints = Vec::new();
    for i in 0..r {
        for j in i..r {
            let (x, bi) = parent[i];
            let (y, bj) = parent[j];
            let full = md.s[(x, y)] * 2.0;
            let e = if bi == 0 && bj == 0 {
                Entry::Known(full)
            } else {
                next_slot += 1;
                Entry::Slot {
                    id: next_slot - 1,
                    scale: 1.0,
                }
            };
            s[i][j] = e;
            s[j][i] = e;
        }
    }
    // S̃_{α,β₁} + S̃_{α,β₂} = S̃_{X,Y} for type-I α against each fixed point.
    for i in 0..r {
        let (x, bi) = parent[i];
        if bi != 0 {
            continue;
        }
        for j in 0..r {
            let (y, bj) = parent[j];
            if bj != 1 {
                continue;
            }
            let j2 = image[&(y, 2)];
            if let (Entry::Slot { id: a, .. }, Entry::Slot { id: c, .. }) = (s[i][j], s[i][j2]) {
                constraints.push(SumConstraint {
                    slots: [a, c],
                    value: md.s[(x, y)] * 2.0,
                });
            }
        }
    }

    // Invertibles inherited from the parent act orbit-wise; a fixed point's
    // branch i goes to branch i of its image.
    let mut actions = BTreeMap::new();
    for (k, &(g, bg)) in parent.iter().enumerate() {
        if bg != 0 || (md.dims[g] - 1.0).abs() > LABEL_TOL {
            continue;
        }
        let Some(pg) = fusion.action(g) else { continue };
        let perm: Option<Vec<usize>> = parent.iter().map(|&(x, br)| image.get(&(pg[x], br)).copied()).collect();
        if let Some(p) = perm {
            actions.insert(k, p);
        }
    }

    Ok(PartialModularData {
        labels,
        origins,
        dims,
        twists,
        lambda,
        s,
        constraints,
        actions,
    })
}

/// Fixes type-I × type-II slots when row normalization forces equal
/// splitting: `|t|² + |v−t|² ≥ |v|²/2` with equality iff `t = v/2`, so if
/// the row reaches norm one with halves, halves are the only option.
pub fn resolve_sum_constraints(pmd: &PartialModularData) -> PartialModularData {
    let mut out = pmd.clone();
    for i in 0..pmd.rank() {
        let mut known = 0.0;
        let mut mine: Vec<&SumConstraint> = Vec::new();
        for j in 0..pmd.rank() {
            match pmd.s[i][j] {
                Entry::Known(v) => known += v.norm_sqr(),
                Entry::Slot { id, .. } => {
                    let c = pmd.constraints.iter().find(|c| c.slots.contains(&id));
                    match c {
                        Some(c) if !mine.contains(&c) => mine.push(c),
                        Some(_) => {}
                        None => {
                            known = f64::NAN;
                        }
                    }
                }
            }
        }
        if mine.is_empty() || known.is_nan() {
            continue;
        }
        let total = known + mine.iter().map(|c| c.value.norm_sqr() / 2.0).sum::<f64>();
        if (total - 1.0).abs() < LABEL_TOL {
            for c in mine {
                for &id in &c.slots {
                    out.assign(id, c.value / 2.0);
                }
            }
        }
    }
    out
}

/// Whether a resolved matrix is modular data or reduced super-modular data.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Modular,
    /// Rows are `{X, fX}` pairs; twists are the representatives' `θ`.
    Super,
}

/// Why a candidate was rejected.
#[derive(Clone, Debug, Serialize)]
pub struct Rejection {
    pub hypothesis: Vec<usize>,
    pub slot_values: Vec<[f64; 2]>,
    pub reason: String,
}

/// A resolved S-matrix and the slot values that produced it.
#[derive(Clone, Debug)]
pub struct Resolution {
    pub s: ComplexMatrix,
    /// `(slot id, value)` in slot units.
    pub slot_values: Vec<(usize, C64)>,
    /// Charge conjugation `X ↦ X*` of the survivor.
    pub conjugation: Vec<usize>,
    pub candidates: usize,
    pub rejected: Vec<Rejection>,
}

/// At most this many independent unknowns are handled.
pub const MAX_UNKNOWNS: usize = 4;

fn fill(entries: &[Vec<Entry>], ids: &[usize], u: &[C64]) -> ComplexMatrix {
    let r = entries.len();
    ComplexMatrix::from_fn(r, r, |i, j| match entries[i][j] {
        Entry::Known(v) => v,
        Entry::Slot { id, scale } => u[ids.binary_search(&id).expect("slot id")] * scale,
    })
}

/// Involutions of `0..r` fixing 0 that only swap labels with equal
/// dimension and twist.
fn involutions(dims: &[f64], twists: &[C64]) -> Vec<Vec<usize>> {
    fn rec(i: usize, perm: &mut Vec<Option<usize>>, ok: &dyn Fn(usize, usize) -> bool, out: &mut Vec<Vec<usize>>) {
        let r = perm.len();
        if i == r {
            out.push(perm.iter().map(|p| p.unwrap()).collect());
            return;
        }
        if perm[i].is_some() {
            rec(i + 1, perm, ok, out);
            return;
        }
        perm[i] = Some(i);
        rec(i + 1, perm, ok, out);
        perm[i] = None;
        if i == 0 {
            return;
        }
        for j in i + 1..r {
            if perm[j].is_none() && ok(i, j) {
                perm[i] = Some(j);
                perm[j] = Some(i);
                rec(i + 1, perm, ok, out);
                perm[i] = None;
                perm[j] = None;
            }
        }
    }
    let ok = |i: usize, j: usize| (dims[i] - dims[j]).abs() < LABEL_TOL && (twists[i] - twists[j]).norm() < LABEL_TOL;
    let mut out = Vec::new();
    rec(0, &mut vec![None; dims.len()], &ok, &mut out);
    out
}

/// `S²` as a permutation (largest entry per row), with its deviation.
fn square_permutation(s: &ComplexMatrix) -> (Vec<usize>, f64) {
    let s2 = s.mul(s);
    let r = s.rows();
    let mut perm = Vec::with_capacity(r);
    let mut dev: f64 = 0.0;
    for i in 0..r {
        let j = (0..r)
            .max_by(|&a, &b| s2[(i, a)].norm().partial_cmp(&s2[(i, b)].norm()).unwrap())
            .unwrap();
        for k in 0..r {
            let t = if k == j { 1.0 } else { 0.0 };
            dev = dev.max((s2[(i, k)] - t).norm());
        }
        perm.push(j);
    }
    (perm, dev)
}

/// Balancing with `Z` and `fZ` collapsed: `θ_Xθ_Y λ̂Ŝ_{XY} = Σ_[Z] e_Z θ_Z d_Z`
/// for some `e_Z ∈ {−N̂, −N̂+2, …, N̂}` (`θ_{fZ} = −θ_Z`).
fn super_balancing_ok(lhs: C64, terms: &[(u32, C64)], tol: f64) -> bool {
    fn rec(k: usize, acc: C64, lhs: C64, terms: &[(u32, C64)], tol: f64) -> bool {
        if k == terms.len() {
            return (acc - lhs).norm() <= tol;
        }
        let (n, w) = terms[k];
        (0..=n).any(|m| rec(k + 1, acc + w * (2.0 * m as f64 - n as f64), lhs, terms, tol))
    }
    rec(0, C64::default(), lhs, terms, tol)
}

/// Reason a fully specified candidate fails, if any.
fn candidate_failure(s: &ComplexMatrix, dims: &[f64], twists: &[C64], mode: Mode) -> Option<String> {
    let u = s.unitarity_defect();
    if u > LABEL_TOL {
        return Some(format!("not unitary ({u:.2e})"));
    }
    let (conj, dev) = square_permutation(s);
    if dev > LABEL_TOL || conj[0] != 0 {
        return Some(format!("S^2 is not a permutation ({dev:.2e})"));
    }
    let raw = verlinde_raw(s);
    let (worst, _) = integrality_defect(&raw);
    if worst > 1e-4 {
        return Some(format!("fusion coefficients not nonnegative integers ({worst:.2e})"));
    }
    let r = s.rows();
    let n = |a: usize, b: usize, c: usize| raw[(a * r + b) * r + c].re.round().max(0.0) as u32;
    let lam = dims.iter().map(|d| d * d).sum::<f64>().sqrt();
    let mut worst_bal: f64 = 0.0;
    for x in 0..r {
        let xs = conj[x];
        for y in 0..r {
            let lhs = twists[x] * twists[y] * s[(x, y)] * lam;
            match mode {
                Mode::Modular => {
                    let rhs: C64 = (0..r).map(|z| twists[z] * dims[z] * n(xs, y, z) as f64).sum();
                    worst_bal = worst_bal.max((lhs - rhs).norm());
                }
                Mode::Super => {
                    let terms: Vec<(u32, C64)> = (0..r)
                        .filter(|&z| n(xs, y, z) > 0)
                        .map(|z| (n(xs, y, z), twists[z] * dims[z]))
                        .collect();
                    if !super_balancing_ok(lhs, &terms, LABEL_TOL * (1.0 + lhs.norm())) {
                        return Some(format!("balancing fails at ({x}, {y})"));
                    }
                }
            }
        }
    }
    if worst_bal > LABEL_TOL {
        return Some(format!("balancing fails ({worst_bal:.2e})"));
    }
    None
}

/// Determines the unknown slots of a symmetric matrix with the given
/// dimensions (first row `dims/λ`) and twists.
///
/// Unitarity of known rows against rows with slots is linear in the
/// conjugated unknowns; at most one free parameter may remain, which is
/// fixed per charge-conjugation hypothesis by `S² = C` (a quadratic).
/// Candidates are then filtered by unitarity, `S²`, Verlinde integrality
/// and balancing.
pub fn resolve_matrix(entries: &[Vec<Entry>], dims: &[f64], twists: &[C64], mode: Mode) -> Result<Resolution> {
    let r = entries.len();
    let mut ids: Vec<usize> = entries
        .iter()
        .flatten()
        .filter_map(|e| match e {
            Entry::Slot { id, .. } => Some(*id),
            _ => None,
        })
        .collect();
    ids.sort_unstable();
    ids.dedup();
    let k = ids.len();
    if k > MAX_UNKNOWNS {
        return Err(Error::Resolve(format!(
            "{k} unknowns exceed the supported {MAX_UNKNOWNS}"
        )));
    }
    let col = |id: usize| ids.binary_search(&id).unwrap();
    let known_row = |i: usize| entries[i].iter().all(|e| e.known().is_some());

    // Σ_c S_ic conj(S_jc) = 0 for known row i, row j with slots.
    let mut a_rows: Vec<Vec<C64>> = Vec::new();
    let mut rhs: Vec<C64> = Vec::new();
    for i in (0..r).filter(|&i| known_row(i)) {
        for j in (0..r).filter(|&j| j != i && !known_row(j)) {
            let mut row = vec![C64::default(); k];
            let mut acc = C64::default();
            for c in 0..r {
                let sic = entries[i][c].known().unwrap();
                match entries[j][c] {
                    Entry::Known(v) => acc += sic * v.conj(),
                    Entry::Slot { id, scale } => row[col(id)] += sic * scale,
                }
            }
            a_rows.push(row);
            rhs.push(-acc);
        }
    }
    let (p, v) = if k == 0 {
        (Vec::new(), None)
    } else if a_rows.is_empty() {
        return Err(Error::Resolve("no linear constraints on the unknowns".into()));
    } else {
        // Square up with zero rows so the solver sees at least k equations.
        while a_rows.len() < k {
            a_rows.push(vec![C64::default(); k]);
            rhs.push(C64::default());
        }
        let a = ComplexMatrix::from_rows(a_rows);
        let sol = solve_affine(&a, &rhs, 1e-9);
        if !sol.consistent {
            return Err(Error::Resolve(format!(
                "orthogonality constraints inconsistent ({:.2e})",
                sol.residual
            )));
        }
        if sol.basis.len() > 1 {
            return Err(Error::Resolve(format!(
                "{} free parameters after orthogonality; only one is supported",
                sol.basis.len()
            )));
        }
        let conj = |x: &Vec<C64>| x.iter().map(|z| z.conj()).collect::<Vec<_>>();
        (conj(&sol.particular), sol.basis.first().map(conj))
    };

    let mut candidates: Vec<(Vec<usize>, Vec<C64>)> = Vec::new();
    match &v {
        None => candidates.push((Vec::new(), p.clone())),
        Some(v) => {
            let at = |t: C64| -> Vec<C64> { p.iter().zip(v).map(|(a, b)| a + t * b).collect() };
            for hyp in involutions(dims, twists) {
                // Each entry of S² − C is a polynomial of degree ≤ 2 in t.
                let eval = |t: C64| {
                    let s = fill(entries, &ids, &at(t));
                    let s2 = s.mul(&s);
                    ComplexMatrix::from_fn(r, r, |i, j| s2[(i, j)] - if hyp[i] == j { 1.0 } else { 0.0 })
                };
                let (e0, e1, em) = (
                    eval(C64::new(0.0, 0.0)),
                    eval(C64::new(1.0, 0.0)),
                    eval(C64::new(-1.0, 0.0)),
                );
                let mut best: Option<(f64, C64, C64, C64)> = None;
                for i in 0..r {
                    for j in 0..r {
                        let c0 = e0[(i, j)];
                        let c1 = (e1[(i, j)] - em[(i, j)]) / 2.0;
                        let c2 = (e1[(i, j)] + em[(i, j)]) / 2.0 - c0;
                        let key = if c2.norm() > 1e-9 {
                            1.0 + c2.norm()
                        } else {
                            c1.norm().min(1.0) * 0.5
                        };
                        if best.is_none_or(|b| key > b.0) {
                            best = Some((key, c0, c1, c2));
                        }
                    }
                }
                let Some((key, c0, c1, c2)) = best else { continue };
                let roots: Vec<C64> = if c2.norm() > 1e-9 {
                    let disc = (c1 * c1 - c2 * c0 * 4.0).sqrt();
                    vec![(-c1 + disc) / (c2 * 2.0), (-c1 - disc) / (c2 * 2.0)]
                } else if key > 1e-9 {
                    vec![-c0 / c1]
                } else {
                    return Err(Error::Resolve("free parameter not fixed by S^2 = C".into()));
                };
                for t in roots {
                    candidates.push((hyp.clone(), at(t)));
                }
            }
        }
    }

    let total = candidates.len();
    let mut survivors: Vec<(Vec<C64>, ComplexMatrix, Vec<usize>)> = Vec::new();
    let mut rejected = Vec::new();
    for (hyp, u) in candidates {
        let s = fill(entries, &ids, &u);
        match candidate_failure(&s, dims, twists, mode) {
            None => {
                if !survivors
                    .iter()
                    .any(|(w, _, _)| w.iter().zip(&u).all(|(a, b)| (a - b).norm() < LABEL_TOL))
                {
                    let conj = square_permutation(&s).0;
                    survivors.push((u, s, conj));
                }
            }
            Some(reason) => rejected.push(Rejection {
                hypothesis: hyp,
                slot_values: u.iter().map(|z| [z.re, z.im]).collect(),
                reason,
            }),
        }
    }
    match survivors.len() {
        1 => {
            let (u, s, conjugation) = survivors.pop().unwrap();
            Ok(Resolution {
                s,
                slot_values: ids.iter().copied().zip(u).collect(),
                conjugation,
                candidates: total,
                rejected,
            })
        }
        0 => Err(Error::Resolve(format!(
            "no candidate survives: {}",
            rejected
                .iter()
                .map(|r| r.reason.as_str())
                .collect::<Vec<_>>()
                .join("; ")
        ))),
        m => Err(Error::Resolve(format!(
            "{m} candidates survive; resolution is not unique"
        ))),
    }
}

/// Resolves every unknown slot of condensed data into modular data.
pub fn resolve_unknowns(pmd: &PartialModularData) -> Result<(ModularData, Resolution)> {
    let res = resolve_matrix(&pmd.s, &pmd.dims, &pmd.twists, Mode::Modular)?;
    let md = ModularData::new(pmd.labels.clone(), pmd.dims.clone(), pmd.twists.clone(), res.s.clone())?;
    Ok((md, res))
}
