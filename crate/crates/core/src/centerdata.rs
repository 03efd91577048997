//! Modular data: the container, its assembly for a near-group center and the
//! verifiers (unitarity, charge conjugation, Verlinde, balancing).

use std::fmt;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{recognize_phase, GroupElement};
use crate::centersolver::CenterTriple;
use crate::io::PhaseJson;
use crate::linalg::ComplexMatrix;
use crate::neargroup::NearGroupData;
use crate::{Error, Result};

/// Simple objects of the center.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SimpleLabel {
    A(GroupElement),
    B(GroupElement),
    /// `k` strictly before `l` in enumeration order.
    C(GroupElement, GroupElement),
    D(usize),
}

impl fmt::Display for SimpleLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimpleLabel::A(g) => write!(f, "A({g})"),
            SimpleLabel::B(h) => write!(f, "B({h})"),
            SimpleLabel::C(k, l) => write!(f, "C({k};{l})"),
            SimpleLabel::D(j) => write!(f, "D({j})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModularData {
    pub labels: Vec<String>,
    pub dims: Vec<f64>,
    pub twists: Vec<C64>,
    /// Normalized: `S = S̃/λ`.
    pub s: ComplexMatrix,
    pub lambda: f64,
}

impl ModularData {
    /// Builds and sanity-checks shape, `|θ| = 1`, symmetry and the unit row.
    pub fn new(labels: Vec<String>, dims: Vec<f64>, twists: Vec<C64>, s: ComplexMatrix) -> Result<Self> {
        let r = labels.len();
        if dims.len() != r || twists.len() != r || s.rows() != r || s.cols() != r || r == 0 {
            return Err(Error::Invalid("modular data shape mismatch".into()));
        }
        let lambda = dims.iter().map(|d| d * d).sum::<f64>().sqrt();
        let md = ModularData {
            labels,
            dims,
            twists,
            s,
            lambda,
        };
        if let Some(i) = md.twists.iter().position(|t| (t.norm() - 1.0).abs() > 1e-6) {
            return Err(Error::Invalid(format!("twist of {} is not a unit", md.labels[i])));
        }
        let sym = md.s.symmetry_defect();
        if sym > 1e-6 {
            return Err(Error::Invalid(format!("S not symmetric ({sym:.2e})")));
        }
        let unit = (0..r)
            .map(|j| (md.s[(0, j)] - md.dims[j] / lambda).norm())
            .fold(0.0, f64::max);
        if unit > 1e-6 {
            return Err(Error::Invalid(format!(
                "first row of S is not dims/lambda ({unit:.2e})"
            )));
        }
        Ok(md)
    }

    pub fn rank(&self) -> usize {
        self.labels.len()
    }

    /// `S̃ = λ S`.
    pub fn s_tilde(&self, i: usize, j: usize) -> C64 {
        self.s[(i, j)] * self.lambda
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Restriction to `idx`, renormalized by `√Σ d²` of the kept labels.
    pub fn restrict(&self, idx: &[usize]) -> Result<ModularData> {
        let lam = idx.iter().map(|&i| self.dims[i].powi(2)).sum::<f64>().sqrt();
        let f = self.lambda / lam;
        ModularData::new(
            idx.iter().map(|&i| self.labels[i].clone()).collect(),
            idx.iter().map(|&i| self.dims[i]).collect(),
            idx.iter().map(|&i| self.twists[i]).collect(),
            self.s.submatrix(idx, idx).scale(f),
        )
    }

    pub fn conj(&self) -> ModularData {
        ModularData {
            labels: self.labels.clone(),
            dims: self.dims.clone(),
            twists: self.twists.iter().map(|t| t.conj()).collect(),
            s: self.s.conj(),
            lambda: self.lambda,
        }
    }

    pub fn to_json(&self) -> ModularDataJson {
        ModularDataJson {
            labels: self.labels.clone(),
            dims: self.dims.clone(),
            twists: self.twists.iter().map(|&t| PhaseJson::encode(t)).collect(),
            s: self.s.clone(),
            lambda: self.lambda,
        }
    }

    pub fn from_json(j: &ModularDataJson) -> Result<ModularData> {
        let twists = j.twists.iter().map(|t| t.decode()).collect::<Result<Vec<_>>>()?;
        let mut md = ModularData::new(j.labels.clone(), j.dims.clone(), twists, j.s.clone())?;
        if (md.lambda - j.lambda).abs() > 1e-6 * md.lambda {
            return Err(Error::Invalid("lambda disagrees with the dimensions".into()));
        }
        md.lambda = j.lambda;
        Ok(md)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ModularDataJson {
    pub labels: Vec<String>,
    pub dims: Vec<f64>,
    pub twists: Vec<PhaseJson>,
    #[serde(rename = "S")]
    pub s: ComplexMatrix,
    pub lambda: f64,
}

/// Center labels in the canonical order `A(g)`, `B(h)`, `C(k,l)`, `D(j)`.
pub fn center_labels(data: &NearGroupData, triples: usize) -> Vec<SimpleLabel> {
    let els = data.group.elements();
    let n = els.len();
    let mut v: Vec<SimpleLabel> = els.iter().map(|g| SimpleLabel::A(g.clone())).collect();
    v.extend(els.iter().map(|h| SimpleLabel::B(h.clone())));
    for k in 0..n {
        for l in k + 1..n {
            v.push(SimpleLabel::C(els[k].clone(), els[l].clone()));
        }
    }
    v.extend((0..triples).map(SimpleLabel::D));
    v
}

/// `S_{j,j'}` (unnormalized) of two `D` labels.
fn s44(
    data: &NearGroupData,
    pair: &[Vec<C64>],
    add: &[Vec<usize>],
    neg: &[usize],
    tj: &CenterTriple,
    tk: &CenterTriple,
) -> C64 {
    let n = data.n();
    let g = &data.group;
    let (t1, t2) = (g.index(&tj.tau), g.index(&tk.tau));
    let (w1, w2) = (tj.omega(), tk.omega());
    let first: C64 = (0..n).map(|x| pair[add[add[t1][t2]][x]][x]).sum::<C64>() * w1 * w2;
    let mut second = C64::new(0.0, 0.0);
    let shift = add[t1][neg[t2]];
    for x in 0..n {
        for y in 0..n {
            let hg = add[y][neg[x]];
            second += (tj.xi[x] * tk.xi[y] * pair[add[shift][hg]][hg]).conj();
        }
    }
    let pre = data.d * w1 * w2 * data.c().powi(6) * data.a(t1) * data.a(t2) / n as f64;
    first + pre * second
}

/// Modular data of the center from the datum and its `n(n+3)/2` triples.
pub fn assemble_center_data(data: &NearGroupData, triples: &[CenterTriple]) -> Result<ModularData> {
    let n = data.n();
    if triples.len() != n * (n + 3) / 2 {
        return Err(Error::TripleCount {
            found: triples.len(),
            expected: n * (n + 3) / 2,
        });
    }
    let labels = center_labels(data, triples.len());
    let t = data.tables();
    let g = &data.group;
    let d = data.d;
    let p = &t.pair;
    let idx = |x: &GroupElement| g.index(x);
    let dims: Vec<f64> = labels
        .iter()
        .map(|l| match l {
            SimpleLabel::A(_) => 1.0,
            SimpleLabel::B(_) => d + 1.0,
            SimpleLabel::C(..) => d + 2.0,
            SimpleLabel::D(_) => d,
        })
        .collect();
    let twists: Vec<C64> = labels
        .iter()
        .map(|l| match l {
            SimpleLabel::A(x) | SimpleLabel::B(x) => p[idx(x)][idx(x)],
            SimpleLabel::C(k, l) => p[idx(k)][idx(l)],
            SimpleLabel::D(j) => triples[*j].omega(),
        })
        .collect();
    let inv2 = |z: C64| (z * z).inv();
    let entry = |x: &SimpleLabel, y: &SimpleLabel| -> C64 {
        use SimpleLabel::*;
        let zero = C64::new(0.0, 0.0);
        match (x, y) {
            (A(a), A(b)) | (B(a), B(b)) => inv2(p[idx(a)][idx(b)]),
            (A(a), B(b)) | (B(a), A(b)) => inv2(p[idx(a)][idx(b)]) * (d + 1.0),
            (A(a), C(k, l)) | (B(a), C(k, l)) | (C(k, l), A(a)) | (C(k, l), B(a)) => {
                p[idx(a)][t.add[idx(k)][idx(l)]].conj() * (d + 2.0)
            }
            (A(a), D(j)) | (D(j), A(a)) => p[idx(a)][idx(&triples[*j].tau)] * d,
            (B(a), D(j)) | (D(j), B(a)) => -p[idx(a)][idx(&triples[*j].tau)] * d,
            (C(k, l), C(k2, l2)) => {
                let (k, l, k2, l2) = (idx(k), idx(l), idx(k2), idx(l2));
                ((p[k][k2] * p[l][l2]).conj() + (p[k][l2] * p[l][k2]).conj()) * (d + 2.0)
            }
            (C(..), D(_)) | (D(_), C(..)) => zero,
            (D(j), D(k)) => s44(data, p, &t.add, &t.neg, &triples[*j], &triples[*k]),
        }
    };
    let r = labels.len();
    let lambda = dims.iter().map(|x| x * x).sum::<f64>().sqrt();
    let closed = n as f64 + d * d;
    if (lambda - closed).abs() > 1e-6 * lambda {
        return Err(Error::NotModular(format!("lambda {lambda} != n + d^2 = {closed}")));
    }
    let rows: Vec<Vec<C64>> = (0..r)
        .into_par_iter()
        .map(|i| (0..r).map(|j| entry(&labels[i], &labels[j]) / lambda).collect())
        .collect();
    ModularData::new(
        labels.iter().map(|l| l.to_string()).collect(),
        dims,
        twists,
        ComplexMatrix::from_rows(rows),
    )
}

/// Raw Verlinde sums `Σ_x S_ax S_bx conj(S_cx) / S_0x`, flattened `[a][b][c]`.
pub fn verlinde_raw(s: &ComplexMatrix) -> Vec<C64> {
    let r = s.rows();
    let s0: Vec<C64> = (0..r).map(|x| s[(0, x)]).collect();
    (0..r)
        .into_par_iter()
        .flat_map_iter(|a| {
            let s0 = &s0;
            (0..r).flat_map(move |b| {
                let ab: Vec<C64> = (0..r).map(|x| s[(a, x)] * s[(b, x)] / s0[x]).collect();
                (0..r).map(move |c| ab.iter().zip(s.row(c)).map(|(u, v)| u * v.conj()).sum::<C64>())
            })
        })
        .collect()
}

/// Integer fusion coefficients `N_{ab}^c`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fusion {
    pub rank: usize,
    pub n: Vec<u32>,
}

impl Fusion {
    pub fn get(&self, a: usize, b: usize, c: usize) -> u32 {
        self.n[(a * self.rank + b) * self.rank + c]
    }

    /// `a*`: the unique `c` with `N_{a,c}^0 = 1`.
    pub fn dual(&self, a: usize) -> Option<usize> {
        (0..self.rank).find(|&c| self.get(a, c, 0) == 1)
    }

    /// For invertible `g`, the permutation `X ↦ gX`.
    pub fn action(&self, g: usize) -> Option<Vec<usize>> {
        (0..self.rank)
            .map(|x| {
                let outs: Vec<usize> = (0..self.rank).filter(|&y| self.get(g, x, y) > 0).collect();
                (outs.len() == 1 && self.get(g, x, outs[0]) == 1).then(|| outs[0])
            })
            .collect()
    }
}

/// Largest distance of a raw Verlinde sum from a nonnegative integer.
pub fn integrality_defect(raw: &[C64]) -> (f64, usize) {
    raw.iter()
        .enumerate()
        .map(|(i, z)| {
            let re = z.re.round().max(0.0);
            ((z - C64::new(re, 0.0)).norm(), i)
        })
        .fold((0.0, 0), |acc, x| if x.0 > acc.0 { x } else { acc })
}

pub fn verlinde_fusion_tol(md: &ModularData, tol: f64) -> Result<Fusion> {
    let r = md.rank();
    let raw = verlinde_raw(&md.s);
    let (worst, at) = integrality_defect(&raw);
    if worst > tol {
        return Err(Error::NonIntegral {
            a: at / (r * r),
            b: (at / r) % r,
            c: at % r,
            value: raw[at].re,
        });
    }
    Ok(Fusion {
        rank: r,
        n: raw.iter().map(|z| z.re.round().max(0.0) as u32).collect(),
    })
}

/// Verlinde fusion rules rounded at tolerance `1e−4`.
pub fn verlinde_fusion(md: &ModularData) -> Result<Fusion> {
    verlinde_fusion_tol(md, 1e-4)
}

/// `|θ_Xθ_Y S̃_{X,Y} − Σ_Z N_{X*,Y}^Z θ_Z d_Z|`.
pub fn balancing_check(md: &ModularData, fusion: &Fusion, x: usize, y: usize) -> f64 {
    let xs = match fusion.dual(x) {
        Some(v) => v,
        None => return f64::INFINITY,
    };
    let lhs = md.twists[x] * md.twists[y] * md.s_tilde(x, y);
    let rhs: C64 = (0..md.rank())
        .map(|z| md.twists[z] * md.dims[z] * fusion.get(xs, y, z) as f64)
        .sum();
    (lhs - rhs).norm()
}

/// Outcome of [`verify_modular`]; each field is a max deviation.
#[derive(Clone, Debug, Serialize)]
pub struct ModularReport {
    pub unitarity: f64,
    pub symmetry: f64,
    pub charge_conjugation: f64,
    pub verlinde: f64,
    pub twists_finite_order: bool,
    pub balancing: f64,
    pub tol: f64,
}

impl ModularReport {
    pub fn passed(&self) -> bool {
        self.unitarity <= self.tol
            && self.symmetry <= self.tol
            && self.charge_conjugation <= self.tol
            && self.verlinde <= self.tol
            && self.twists_finite_order
            && self.balancing <= self.tol
    }

    pub fn failures(&self) -> Vec<&'static str> {
        let mut v = Vec::new();
        if self.unitarity > self.tol {
            v.push("unitarity");
        }
        if self.symmetry > self.tol {
            v.push("symmetry");
        }
        if self.charge_conjugation > self.tol {
            v.push("charge conjugation");
        }
        if self.verlinde > self.tol {
            v.push("verlinde");
        }
        if !self.twists_finite_order {
            v.push("twist order");
        }
        if self.balancing > self.tol {
            v.push("balancing");
        }
        v
    }
}

/// Deviation of `S²` from a permutation matrix fixing index 0.
pub fn charge_conjugation_defect(s: &ComplexMatrix) -> f64 {
    let s2 = s.mul(s);
    let r = s.rows();
    let mut worst: f64 = 0.0;
    for i in 0..r {
        let (j, _) = (0..r)
            .map(|j| (j, s2[(i, j)].norm()))
            .fold((0, -1.0), |a, b| if b.1 > a.1 { b } else { a });
        for k in 0..r {
            let target = if k == j { 1.0 } else { 0.0 };
            worst = worst.max((s2[(i, k)] - target).norm());
        }
        if i == 0 && j != 0 {
            worst = worst.max(1.0);
        }
    }
    worst
}

pub fn verify_modular(md: &ModularData, tol: f64) -> ModularReport {
    let unitarity = md.s.unitarity_defect();
    let symmetry = md.s.symmetry_defect();
    let charge_conjugation = charge_conjugation_defect(&md.s);
    let raw = verlinde_raw(&md.s);
    let (verlinde, _) = integrality_defect(&raw);
    let twists_finite_order = md
        .twists
        .iter()
        .all(|&t| recognize_phase(t, 2000, tol.max(1e-9)).is_some());
    let r = md.rank();
    let fusion = Fusion {
        rank: r,
        n: raw.iter().map(|z| z.re.round().max(0.0) as u32).collect(),
    };
    let balancing = (0..r)
        .into_par_iter()
        .map(|x| (0..r).map(|y| balancing_check(md, &fusion, x, y)).fold(0.0, f64::max))
        .reduce(|| 0.0, f64::max);
    ModularReport {
        unitarity,
        symmetry,
        charge_conjugation,
        verlinde,
        twists_finite_order,
        balancing,
        tol,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{pointed_modular_data, GroupSpec, QuadraticForm};
    use num_rational::Rational64 as Q;

    fn z3() -> ModularData {
        let g = GroupSpec::cyclic(3);
        let q = QuadraticForm::from_fn(g.clone(), |x| Q::new((x.coords[0] * x.coords[0]) as i64, 3)).unwrap();
        pointed_modular_data(&g, &q).unwrap()
    }

    #[test]
    fn pointed_z3_passes() {
        let md = z3();
        assert!(verify_modular(&md, 1e-10).passed());
        let f = verlinde_fusion(&md).unwrap();
        assert_eq!(f.get(1, 1, 2), 1);
        assert_eq!(f.get(1, 1, 0), 0);
    }

    #[test]
    fn perturbation_detected() {
        let mut md = z3();
        md.s[(1, 2)] += C64::new(1e-3, 0.0);
        assert!(verify_modular(&md, 1e-6).unitarity > 1e-4);
    }

    #[test]
    fn unit_balancing_exact() {
        let md = z3();
        let f = verlinde_fusion(&md).unwrap();
        assert!(balancing_check(&md, &f, 0, 0) < 1e-14);
    }
}
