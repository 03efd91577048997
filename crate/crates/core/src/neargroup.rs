//! Near-group data of type `G+n` (the `m = n` case), axiom checks, the
//! built-in catalog and Newton refinement of the tabulated `b`.

use num_complex::Complex64 as C64;
use num_rational::Rational64 as Q;
use serde::{Deserialize, Serialize};

use crate::algebra::{eq, frac, Bicharacter, GroupElement, GroupSpec};
use crate::io::{cjson, from_cjson, Rat};
use crate::linalg::newton_polish;
use crate::{Error, Result};

/// `d = (n + √(n² + 4n)) / 2`.
pub fn near_group_dim(n: usize) -> f64 {
    let n = n as f64;
    (n + (n * n + 4.0 * n).sqrt()) / 2.0
}

/// A table row: enough to rebuild the near-group datum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub name: String,
    pub orders: Vec<u32>,
    /// `m` of the pairing; for cyclic groups `a` uses `m ∈ ℤ/2n`.
    pub pairing_m: i64,
    /// `(s₁, s₂)` for two-factor groups, empty for cyclic ones.
    pub signs: Vec<i64>,
    /// `c = e(c_exp)`.
    pub c_exp: Q,
    /// `j(x)` at representatives; `b(x) = e^{i j(x)}/√n`.
    pub j: Vec<(Vec<u32>, f64)>,
}

impl CatalogEntry {
    pub fn group(&self) -> Result<GroupSpec> {
        GroupSpec::new(self.orders.clone())
    }

    pub fn pairing(&self) -> Result<Bicharacter> {
        standard_pairing(&self.group()?, self.pairing_m)
    }

    /// Reconstructs the (unrefined) near-group datum.
    pub fn build(&self) -> Result<NearGroupData> {
        let group = self.group()?;
        let pairing = self.pairing()?;
        let a = build_a(self)?;
        let b = build_b_from_j(self, &a)?;
        NearGroupData::new(self.name.clone(), group, pairing, self.c_exp, a, b)
    }
}

/// Pairing conventions of the two tables: `e(m x y / n)` for `ℤ/n`, and
/// `e(x₁x₂/o₁)·e(m y₁y₂/o₂)` for two factors.
pub fn standard_pairing(group: &GroupSpec, m: i64) -> Result<Bicharacter> {
    let o = group.orders();
    match o.len() {
        1 => Bicharacter::cyclic(o[0], m),
        2 => Bicharacter::diagonal(group.clone(), &[Q::new(1, o[0] as i64), Q::new(m, o[1] as i64)]),
        _ => Err(Error::Invalid("no standard pairing for more than two factors".into())),
    }
}

/// `a` as exact exponents in enumeration order.
pub fn build_a(entry: &CatalogEntry) -> Result<Vec<Q>> {
    let group = entry.group()?;
    let pairing = entry.pairing()?;
    let o = group.orders();
    let m = entry.pairing_m;
    let expo = |x: &GroupElement| -> Result<Q> {
        match o.len() {
            1 => {
                let v = x.coords[0] as i64;
                Ok(Q::new(-m * v * v, 2 * o[0] as i64))
            }
            2 => {
                if entry.signs.len() != 2 {
                    return Err(Error::Invalid(format!("{}: sign data missing", entry.name)));
                }
                let (u, v) = (x.coords[0] as i64, x.coords[1] as i64);
                let mut r = Q::new(-u * u, 2 * o[0] as i64) + Q::new(-m * v * v, 2 * o[1] as i64);
                if entry.signs[0] == -1 {
                    r += Q::new(u, 2);
                }
                if entry.signs[1] == -1 {
                    r += Q::new(v, 2);
                }
                Ok(r)
            }
            _ => Err(Error::Invalid("unsupported group shape".into())),
        }
    };
    let els = group.elements();
    let a: Vec<Q> = els
        .iter()
        .map(expo)
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .map(frac)
        .collect();
    check_a(&group, &pairing, &a)?;
    Ok(a)
}

fn check_a(group: &GroupSpec, pairing: &Bicharacter, a: &[Q]) -> Result<()> {
    let els = group.elements();
    let add = group.add_table();
    let neg = group.neg_table();
    if !a[0].is_integer() {
        return Err(Error::Axiom("a(0) != 1".into()));
    }
    for (x, ex) in els.iter().enumerate() {
        if a[x] != a[neg[x]] {
            return Err(Error::Axiom("a(x) != a(-x)".into()));
        }
        for (y, ey) in els.iter().enumerate() {
            if frac(a[add[x][y]] + pairing.exponent(ex, ey)) != frac(a[x] + a[y]) {
                return Err(Error::Axiom(format!("a(x+y)<x,y> != a(x)a(y) at ({ex}),({ey})")));
            }
        }
    }
    Ok(())
}

/// `b` from the tabulated `j`-values via `b(0) = −1/d` and the reflection
/// `b(−x) = conj(a(x) b(x))`.
pub fn build_b_from_j(entry: &CatalogEntry, a: &[Q]) -> Result<Vec<C64>> {
    let group = entry.group()?;
    let n = group.n();
    let neg = group.neg_table();
    let mut b: Vec<Option<C64>> = vec![None; n];
    b[0] = Some(C64::new(-1.0 / near_group_dim(n), 0.0));
    let rt = (n as f64).sqrt();
    for (coords, j) in &entry.j {
        let x = group.index(&GroupElement { coords: coords.clone() });
        let v = C64::from_polar(1.0 / rt, *j);
        b[x] = Some(v);
        if b[neg[x]].is_none() {
            b[neg[x]] = Some((eq(a[x]) * v).conj());
        }
    }
    let missing: Vec<String> = (0..n)
        .filter(|&i| b[i].is_none())
        .map(|i| group.element(i).to_string())
        .collect();
    if !missing.is_empty() {
        return Err(Error::Invalid(format!(
            "j-values do not reach elements {}",
            missing.join(" ")
        )));
    }
    Ok(b.into_iter().map(|v| v.unwrap()).collect())
}

/// The tuple `(G, ⟨,⟩, c, a, b, d)`.
#[derive(Clone, Debug)]
pub struct NearGroupData {
    pub name: String,
    pub group: GroupSpec,
    pub pairing: Bicharacter,
    pub c_exp: Q,
    pub a_exp: Vec<Q>,
    pub b: Vec<C64>,
    pub d: f64,
}

impl NearGroupData {
    pub fn new(
        name: String,
        group: GroupSpec,
        pairing: Bicharacter,
        c_exp: Q,
        a_exp: Vec<Q>,
        b: Vec<C64>,
    ) -> Result<Self> {
        let n = group.n();
        if pairing.group() != &group {
            return Err(Error::GroupMismatch("pairing group".into()));
        }
        if !pairing.is_nondegenerate() {
            return Err(Error::Invalid("pairing is degenerate".into()));
        }
        if a_exp.len() != n || b.len() != n {
            return Err(Error::Invalid("a/b length differs from |G|".into()));
        }
        check_a(&group, &pairing, &a_exp)?;
        Ok(NearGroupData {
            name,
            d: near_group_dim(n),
            group,
            pairing,
            c_exp: frac(c_exp),
            a_exp,
            b,
        })
    }

    pub fn n(&self) -> usize {
        self.group.n()
    }

    pub fn c(&self) -> C64 {
        eq(self.c_exp)
    }

    pub fn a(&self, x: usize) -> C64 {
        eq(self.a_exp[x])
    }

    pub fn tables(&self) -> Tables {
        Tables::new(self)
    }

    /// Entrywise conjugate datum (`m → −m`, `c → c̄`, `a → ā`, `b → b̄`).
    pub fn conjugate(&self, name: &str) -> Result<NearGroupData> {
        let ex: Vec<Vec<Q>> = self
            .pairing
            .exponents()
            .iter()
            .map(|r| r.iter().map(|q| -q).collect())
            .collect();
        NearGroupData::new(
            name.to_string(),
            self.group.clone(),
            Bicharacter::new(self.group.clone(), ex)?,
            -self.c_exp,
            self.a_exp.iter().map(|q| frac(-q)).collect(),
            self.b.iter().map(|z| z.conj()).collect(),
        )
    }
}

/// Precomputed group tables and values for a datum.
pub struct Tables {
    pub n: usize,
    pub add: Vec<Vec<usize>>,
    pub neg: Vec<usize>,
    pub pair: Vec<Vec<C64>>,
    pub a: Vec<C64>,
}

impl Tables {
    pub fn new(data: &NearGroupData) -> Tables {
        Tables {
            n: data.n(),
            add: data.group.add_table(),
            neg: data.group.neg_table(),
            pair: data.pairing.table(),
            a: (0..data.n()).map(|x| data.a(x)).collect(),
        }
    }

    pub fn sub(&self, x: usize, y: usize) -> usize {
        self.add[x][self.neg[y]]
    }
}

/// Max absolute residual per axiom family.
#[derive(Clone, Debug, Serialize)]
pub struct AxiomReport {
    pub residuals: Vec<(String, f64)>,
    pub tol: f64,
}

impl AxiomReport {
    pub fn max(&self) -> f64 {
        self.residuals.iter().map(|r| r.1).fold(0.0, f64::max)
    }

    pub fn passed(&self) -> bool {
        self.max() <= self.tol
    }

    pub fn get(&self, family: &str) -> Option<f64> {
        self.residuals.iter().find(|r| r.0 == family).map(|r| r.1)
    }
}

fn a_families(data: &NearGroupData, t: &Tables) -> Vec<(String, f64)> {
    let n = t.n;
    let mut cocycle: f64 = (t.a[0] - 1.0).norm();
    for x in 0..n {
        cocycle = cocycle.max((t.a[x] - t.a[t.neg[x]]).norm());
        for y in 0..n {
            cocycle = cocycle.max((t.a[t.add[x][y]] * t.pair[x][y] - t.a[x] * t.a[y]).norm());
        }
    }
    let c = data.c();
    let gauss: C64 = t.a.iter().sum();
    let gauss_res = (gauss - (n as f64).sqrt() * c.powi(-3)).norm();
    vec![("a_cocycle".into(), cocycle), ("gauss_sum".into(), gauss_res)]
}

/// Residual vector of the `b`-axioms; shared by the checker and Newton.
fn b_residuals(data: &NearGroupData, t: &Tables, b: &[C64]) -> [Vec<C64>; 5] {
    let n = t.n;
    let rt = (n as f64).sqrt();
    let d = data.d;
    let c = data.c();
    let b0 = vec![b[0] + 1.0 / d];
    let fourier: Vec<C64> = (0..n)
        .map(|x| (0..n).map(|y| t.pair[x][y].conj() * b[y]).sum::<C64>() - rt * c * b[x].conj())
        .collect();
    let reflection: Vec<C64> = (0..n).map(|x| t.a[x] * b[t.neg[x]] - b[x].conj()).collect();
    let conv2: Vec<C64> = (0..n)
        .map(|y| {
            let s: C64 = (0..n).map(|x| b[t.add[x][y]] * b[x].conj()).sum();
            let delta = if y == 0 { 1.0 } else { 0.0 };
            s - (delta - 1.0 / d)
        })
        .collect();
    let mut conv3 = Vec::with_capacity(n * n);
    let k = c / (d * rt);
    for y in 0..n {
        for z in 0..n {
            let s: C64 = (0..n).map(|x| b[t.add[x][y]] * b[t.add[x][z]] * b[x].conj()).sum();
            conv3.push(s - (t.pair[y][z].conj() * b[y] * b[z] - k));
        }
    }
    [b0, fourier, reflection, conv2, conv3]
}

const B_FAMILIES: [&str; 5] = ["b0", "fourier", "reflection", "convolution2", "convolution3"];

/// Checks every axiom family; the `δ` of the two-fold convolution is taken
/// at the identity element.
pub fn verify_axioms(data: &NearGroupData, tol: f64) -> AxiomReport {
    let t = data.tables();
    let mut residuals = a_families(data, &t);
    let br = b_residuals(data, &t, &data.b);
    for (name, r) in B_FAMILIES.iter().zip(br.iter()) {
        residuals.push((name.to_string(), r.iter().map(|z| z.norm()).fold(0.0, f64::max)));
    }
    AxiomReport { residuals, tol }
}

/// Newton-polishes `b` against the `b`-axioms; `a` and `c` are untouched.
pub fn refine_b(data: &NearGroupData) -> Result<NearGroupData> {
    let pre = verify_axioms(data, 1e-2);
    if !pre.passed() {
        return Err(Error::Axiom(format!(
            "{}: residual {:.3e} too large to refine",
            data.name,
            pre.max()
        )));
    }
    let t = data.tables();
    let f = |b: &[C64]| -> Vec<C64> { b_residuals(data, &t, b).concat() };
    let b = newton_polish(f, &data.b, 1e-12, 100).map_err(|r| Error::NoConvergence { residual: r })?;
    let mut out = data.clone();
    out.b = b;
    let post = verify_axioms(&out, 1e-10);
    if !post.passed() {
        return Err(Error::NoConvergence { residual: post.max() });
    }
    Ok(out)
}

fn entry(name: &str, orders: &[u32], m: i64, signs: &[i64], c: (i64, i64), j: &[(&[u32], f64)]) -> CatalogEntry {
    CatalogEntry {
        name: name.to_string(),
        orders: orders.to_vec(),
        pairing_m: m,
        signs: signs.to_vec(),
        c_exp: frac(Q::new(c.0, c.1)),
        j: j.iter().map(|(x, v)| (x.to_vec(), *v)).collect(),
    }
}

/// The four `ℤ/6+6` and four `ℤ/2×ℤ/4+8` near-groups.
// Six-digit printed phases; `refine_b` recovers full precision.
#[allow(clippy::approx_constant)]
pub fn catalog() -> Vec<CatalogEntry> {
    let z6 = |j1: f64, j2: f64, j3: f64| [(&[1u32][..], j1), (&[2][..], j2), (&[3][..], j3)];
    let z24 = |v: [f64; 5]| {
        [
            (&[0u32, 1][..], v[0]),
            (&[0, 2][..], v[1]),
            (&[1, 0][..], v[2]),
            (&[1, 1][..], v[3]),
            (&[1, 2][..], v[4]),
        ]
    };
    vec![
        entry("J6_1", &[6], 5, &[], (5, 24), &z6(2.91503, -1.59091, 2.35619)),
        entry("J6_1bar", &[6], -5, &[], (-5, 24), &z6(-2.91503, 1.59091, -2.35619)),
        entry("J6_2", &[6], 1, &[], (1, 24), &z6(2.95526, 0.0553542, -0.785398)),
        entry("J6_2bar", &[6], -1, &[], (-1, 24), &z6(-2.95526, -0.0553542, 0.785398)),
        entry(
            "J24_1",
            &[2, 4],
            1,
            &[1, 1],
            (5, 12),
            &z24([-0.992441, 1.5708, 0.785398, -1.42977, -0.785398]),
        ),
        entry(
            "J24_2",
            &[2, 4],
            -1,
            &[-1, 1],
            (-5, 12),
            &z24([0.992441, -1.5708, -0.785398, 1.42977, 0.785398]),
        ),
        entry(
            "J24_3",
            &[2, 4],
            1,
            &[1, -1],
            (-5, 12),
            &z24([1.42977, -1.5708, 0.785398, -1.77784, -0.785398]),
        ),
        entry(
            "J24_4",
            &[2, 4],
            -1,
            &[-1, -1],
            (5, 12),
            &z24([-1.42977, 1.5708, -0.785398, 1.77784, 0.785398]),
        ),
    ]
}

pub fn catalog_entry(name: &str) -> Result<CatalogEntry> {
    catalog()
        .into_iter()
        .find(|e| e.name == name)
        .ok_or_else(|| Error::Invalid(format!("unknown instance '{name}'")))
}

/// On-disk form of a near-group datum.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NearGroupJson {
    pub name: String,
    pub orders: Vec<u32>,
    pub pairing_m: i64,
    /// Full exponent matrix; when absent the standard convention for
    /// `pairing_m` is used.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pairing: Option<Vec<Vec<Rat>>>,
    pub c: Rat,
    pub a: Vec<Rat>,
    pub b: Vec<[f64; 2]>,
}

impl NearGroupData {
    pub fn to_json(&self, pairing_m: i64) -> NearGroupJson {
        NearGroupJson {
            name: self.name.clone(),
            orders: self.group.orders().to_vec(),
            pairing_m,
            pairing: Some(
                self.pairing
                    .exponents()
                    .iter()
                    .map(|r| r.iter().map(|&q| q.into()).collect())
                    .collect(),
            ),
            c: self.c_exp.into(),
            a: self.a_exp.iter().map(|&q| q.into()).collect(),
            b: self.b.iter().map(|&z| cjson(z)).collect(),
        }
    }

    pub fn from_json(j: &NearGroupJson) -> Result<NearGroupData> {
        let group = GroupSpec::new(j.orders.clone())?;
        let pairing = match &j.pairing {
            Some(m) => {
                let ex = m
                    .iter()
                    .map(|r| r.iter().map(|&q| Q::try_from(q)).collect::<Result<Vec<_>>>())
                    .collect::<Result<Vec<_>>>()?;
                Bicharacter::new(group.clone(), ex)?
            }
            None => standard_pairing(&group, j.pairing_m)?,
        };
        let a = j.a.iter().map(|&q| Q::try_from(q)).collect::<Result<Vec<_>>>()?;
        let b = j.b.iter().map(|&z| from_cjson(z)).collect();
        NearGroupData::new(j.name.clone(), group, pairing, Q::try_from(j.c)?, a, b)
    }

    /// Recovers `m` from the exponent matrix under the standard conventions.
    pub fn pairing_m(&self) -> i64 {
        let ex = self.pairing.exponents();
        let k = ex.len() - 1;
        let o = self.group.orders()[k] as i64;
        let q = frac(ex[k][k]) * Q::from_integer(o);
        *q.numer()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn d_satisfies_quadratic() {
        for n in [1, 2, 6, 8] {
            let d = near_group_dim(n);
            assert!((d * (d - n as f64) - n as f64).abs() < 1e-9);
        }
    }

    #[test]
    fn a_examples() {
        let e = catalog_entry("J6_1").unwrap();
        let a = build_a(&e).unwrap();
        assert_eq!(a[0], Q::from_integer(0));
        assert_eq!(a[1], frac(Q::new(-5, 12)));
        let e = catalog_entry("J24_1").unwrap();
        let a = build_a(&e).unwrap();
        let g = e.group().unwrap();
        let x = g.index(&GroupElement { coords: vec![1, 1] });
        assert_eq!(a[x], frac(Q::new(-3, 8)));
    }

    #[test]
    fn b_examples() {
        let e = catalog_entry("J6_1").unwrap();
        let data = e.build().unwrap();
        assert!((data.b[0].re + 0.145498).abs() < 1e-6);
        let rt6 = 6f64.sqrt();
        assert!((data.b[3] - C64::from_polar(1.0 / rt6, 2.35619)).norm() < 1e-12);
        let b1 = C64::from_polar(1.0 / rt6, 2.91503);
        assert!((data.b[5] - (data.a(1) * b1).conj()).norm() < 1e-12);
    }

    #[test]
    fn uncovered_elements_reported() {
        let mut e = catalog_entry("J6_1").unwrap();
        e.j.truncate(1);
        let err = e.build().unwrap_err().to_string();
        assert!(err.contains("2") && err.contains("3"), "{err}");
    }

    #[test]
    fn m_zero_rejected() {
        let mut e = catalog_entry("J6_1").unwrap();
        e.pairing_m = 0;
        assert!(e.build().is_err());
    }

    #[test]
    fn catalog_has_eight() {
        let c = catalog();
        assert_eq!(c.len(), 8);
        let j61 = c.iter().find(|e| e.name == "J6_1").unwrap();
        assert_eq!(j61.c_exp, Q::new(5, 24));
        let j241 = c.iter().find(|e| e.name == "J24_1").unwrap();
        assert_eq!(j241.c_exp, Q::new(5, 12));
        assert_eq!(j241.pairing_m, 1);
    }
}
