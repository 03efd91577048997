//! Finite abelian groups as products of cyclic factors, bicharacters,
//! quadratic forms and the modular data of pointed categories.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64 as C64;
use num_rational::Rational64 as Q;
use serde::{Deserialize, Serialize};

use crate::centerdata::ModularData;
use crate::linalg::ComplexMatrix;
use crate::{Error, Result};

/// Default tolerance for comparing unit complex numbers.
pub const UNIT_TOL: f64 = 1e-9;

/// `e(r) = exp(2πi r)`.
pub fn e(r: f64) -> C64 {
    C64::from_polar(1.0, 2.0 * PI * r)
}

/// `e(r)` for an exact exponent, reduced mod 1 first so large numerators do
/// not lose precision.
pub fn eq(r: Q) -> C64 {
    let f = frac(r);
    e(*f.numer() as f64 / *f.denom() as f64)
}

/// Representative of `r` in `[0, 1)`.
pub fn frac(r: Q) -> Q {
    r - r.floor()
}

pub fn units_close(a: C64, b: C64, tol: f64) -> bool {
    (a - b).norm() < tol
}

/// Recognizes `z` as `e(p/q)` with `q <= max_den`, smallest denominator first.
pub fn recognize_phase(z: C64, max_den: i64, tol: f64) -> Option<Q> {
    if (z.norm() - 1.0).abs() > tol {
        return None;
    }
    let x = z.arg() / (2.0 * PI);
    let x = x - x.floor();
    for q in 1..=max_den {
        let p = (x * q as f64).round() as i64;
        let r = frac(Q::new(p, q));
        if units_close(eq(r), z, tol) {
            return Some(r);
        }
    }
    None
}

/// A finite abelian group `ℤ/o₁ × … × ℤ/o_k`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<u32>", into = "Vec<u32>")]
pub struct GroupSpec {
    orders: Vec<u32>,
}

impl TryFrom<Vec<u32>> for GroupSpec {
    type Error = Error;
    fn try_from(orders: Vec<u32>) -> Result<Self> {
        GroupSpec::new(orders)
    }
}

impl From<GroupSpec> for Vec<u32> {
    fn from(g: GroupSpec) -> Vec<u32> {
        g.orders
    }
}

/// Group element as residues, one per cyclic factor.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GroupElement {
    pub coords: Vec<u32>,
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coords.iter().map(|c| c.to_string()).collect();
        write!(f, "{}", parts.join(","))
    }
}

impl GroupSpec {
    pub fn new(orders: Vec<u32>) -> Result<Self> {
        if orders.is_empty() || orders.contains(&0) {
            return Err(Error::Invalid(format!("bad group orders {orders:?}")));
        }
        Ok(GroupSpec { orders })
    }

    pub fn cyclic(n: u32) -> Self {
        GroupSpec::new(vec![n]).expect("cyclic order must be positive")
    }

    pub fn orders(&self) -> &[u32] {
        &self.orders
    }

    /// Group order.
    pub fn n(&self) -> usize {
        self.orders.iter().map(|&o| o as usize).product()
    }

    pub fn contains(&self, x: &GroupElement) -> bool {
        x.coords.len() == self.orders.len() && x.coords.iter().zip(&self.orders).all(|(c, o)| c < o)
    }

    fn check(&self, x: &GroupElement) -> Result<()> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(Error::GroupMismatch(format!("{x:?} not in {:?}", self.orders)))
        }
    }

    pub fn zero(&self) -> GroupElement {
        GroupElement {
            coords: vec![0; self.orders.len()],
        }
    }

    /// Element at position `idx` of the lexicographic enumeration (last
    /// factor varies fastest).
    pub fn element(&self, mut idx: usize) -> GroupElement {
        let mut coords = vec![0; self.orders.len()];
        for (c, &o) in coords.iter_mut().zip(&self.orders).rev() {
            *c = (idx % o as usize) as u32;
            idx /= o as usize;
        }
        GroupElement { coords }
    }

    pub fn index(&self, x: &GroupElement) -> usize {
        x.coords
            .iter()
            .zip(&self.orders)
            .fold(0, |acc, (&c, &o)| acc * o as usize + c as usize)
    }

    pub fn elements(&self) -> Vec<GroupElement> {
        (0..self.n()).map(|i| self.element(i)).collect()
    }

    pub fn add(&self, x: &GroupElement, y: &GroupElement) -> GroupElement {
        let coords = x
            .coords
            .iter()
            .zip(&y.coords)
            .zip(&self.orders)
            .map(|((a, b), o)| (a + b) % o)
            .collect();
        GroupElement { coords }
    }

    pub fn neg(&self, x: &GroupElement) -> GroupElement {
        let coords = x.coords.iter().zip(&self.orders).map(|(a, o)| (o - a) % o).collect();
        GroupElement { coords }
    }

    pub fn add_table(&self) -> Vec<Vec<usize>> {
        let els = self.elements();
        els.iter()
            .map(|x| els.iter().map(|y| self.index(&self.add(x, y))).collect())
            .collect()
    }

    pub fn neg_table(&self) -> Vec<usize> {
        self.elements().iter().map(|x| self.index(&self.neg(x))).collect()
    }

    /// Parses `"3"` or `"0,2"`.
    pub fn parse_element(&self, s: &str) -> Result<GroupElement> {
        let coords = s
            .split(',')
            .map(|t| t.trim().parse::<u32>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| Error::Invalid(format!("bad group element '{s}'")))?;
        let x = GroupElement { coords };
        self.check(&x)?;
        Ok(x)
    }
}

/// Enumerates all elements in lexicographic order, element 0 first.
pub fn enumerate_elements(spec: &GroupSpec) -> Vec<GroupElement> {
    spec.elements()
}

/// `⟨x,y⟩ = e(Σᵢⱼ Mᵢⱼ xᵢ yⱼ)` with one rational exponent per factor pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bicharacter {
    group: GroupSpec,
    exponents: Vec<Vec<Q>>,
}

impl Bicharacter {
    pub fn new(group: GroupSpec, exponents: Vec<Vec<Q>>) -> Result<Self> {
        let k = group.orders().len();
        if exponents.len() != k || exponents.iter().any(|r| r.len() != k) {
            return Err(Error::Invalid("exponent matrix shape".into()));
        }
        for i in 0..k {
            for j in 0..k {
                let m = exponents[i][j];
                let oi = Q::from_integer(group.orders()[i] as i64);
                let oj = Q::from_integer(group.orders()[j] as i64);
                if !(m * oi).is_integer() || !(m * oj).is_integer() {
                    return Err(Error::Invalid(format!("exponent {m} not defined mod the orders")));
                }
                if !(m - exponents[j][i]).is_integer() {
                    return Err(Error::Invalid("bicharacter is not symmetric".into()));
                }
            }
        }
        Ok(Bicharacter { group, exponents })
    }

    /// `⟨x,y⟩ = e(m x y / n)` on `ℤ/n`.
    pub fn cyclic(n: u32, m: i64) -> Result<Self> {
        Bicharacter::new(GroupSpec::cyclic(n), vec![vec![Q::new(m, n as i64)]])
    }

    /// Diagonal exponent matrix.
    pub fn diagonal(group: GroupSpec, diag: &[Q]) -> Result<Self> {
        let k = group.orders().len();
        let mut ex = vec![vec![Q::from_integer(0); k]; k];
        for (i, &d) in diag.iter().enumerate().take(k) {
            ex[i][i] = d;
        }
        Bicharacter::new(group, ex)
    }

    pub fn group(&self) -> &GroupSpec {
        &self.group
    }

    pub fn exponents(&self) -> &[Vec<Q>] {
        &self.exponents
    }

    /// Exponent of `⟨x,y⟩` reduced to `[0,1)`.
    pub fn exponent(&self, x: &GroupElement, y: &GroupElement) -> Q {
        let mut r = Q::from_integer(0);
        for (i, &xi) in x.coords.iter().enumerate() {
            for (j, &yj) in y.coords.iter().enumerate() {
                r += self.exponents[i][j] * Q::from_integer(xi as i64 * yj as i64);
            }
        }
        frac(r)
    }

    pub fn pair(&self, x: &GroupElement, y: &GroupElement) -> Result<C64> {
        self.group.check(x)?;
        self.group.check(y)?;
        Ok(eq(self.exponent(x, y)))
    }

    /// Table of `⟨x,y⟩` indexed by enumeration positions.
    pub fn table(&self) -> Vec<Vec<C64>> {
        let els = self.group.elements();
        els.iter()
            .map(|x| els.iter().map(|y| eq(self.exponent(x, y))).collect())
            .collect()
    }

    /// True iff `x ↦ ⟨x,·⟩` is injective.
    pub fn is_nondegenerate(&self) -> bool {
        let els = self.group.elements();
        els.iter()
            .skip(1)
            .all(|x| els.iter().any(|y| !self.exponent(x, y).is_integer()))
    }
}

pub fn pair(b: &Bicharacter, x: &GroupElement, y: &GroupElement) -> Result<C64> {
    b.pair(x, y)
}

pub fn is_nondegenerate(b: &Bicharacter) -> bool {
    b.is_nondegenerate()
}

/// Quadratic form stored as exponents `q(g) = e(r_g)` in enumeration order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadraticForm {
    group: GroupSpec,
    exponents: Vec<Q>,
}

impl QuadraticForm {
    pub fn new(group: GroupSpec, exponents: Vec<Q>) -> Result<Self> {
        if exponents.len() != group.n() {
            return Err(Error::Invalid("quadratic form length".into()));
        }
        let q = QuadraticForm {
            group,
            exponents: exponents.into_iter().map(frac).collect(),
        };
        q.validate()?;
        Ok(q)
    }

    pub fn from_fn(group: GroupSpec, f: impl Fn(&GroupElement) -> Q) -> Result<Self> {
        let ex = group.elements().iter().map(f).collect();
        QuadraticForm::new(group, ex)
    }

    fn validate(&self) -> Result<()> {
        let g = &self.group;
        let add = g.add_table();
        let neg = g.neg_table();
        let n = g.n();
        for x in 0..n {
            if self.exponents[x] != self.exponents[neg[x]] {
                return Err(Error::Invalid("q(g) != q(-g)".into()));
            }
        }
        for x in 0..n {
            for y in 0..n {
                if self.assoc(x, y) != self.assoc(y, x) {
                    return Err(Error::Invalid("associated form not symmetric".into()));
                }
                for z in 0..n {
                    let lhs = self.assoc(add[x][y], z);
                    let rhs = frac(self.assoc(x, z) + self.assoc(y, z));
                    if lhs != rhs {
                        return Err(Error::Invalid("associated form not bilinear".into()));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn group(&self) -> &GroupSpec {
        &self.group
    }

    pub fn exponents(&self) -> &[Q] {
        &self.exponents
    }

    pub fn value(&self, idx: usize) -> C64 {
        eq(self.exponents[idx])
    }

    /// Exponent of `q(x+y)/(q(x)q(y))`, indices in enumeration order.
    pub fn assoc(&self, x: usize, y: usize) -> Q {
        let g = &self.group;
        let s = g.index(&g.add(&g.element(x), &g.element(y)));
        frac(self.exponents[s] - self.exponents[x] - self.exponents[y])
    }

    pub fn is_nondegenerate(&self) -> bool {
        let n = self.group.n();
        (1..n).all(|x| (0..n).any(|y| !self.assoc(x, y).is_integer()))
    }
}

/// Modular data of `C(G, q)`: `S_{g,h} = conj⟨g,h⟩/√|G|`, `T_g = q(g)`.
pub fn pointed_modular_data(spec: &GroupSpec, q: &QuadraticForm) -> Result<ModularData> {
    if q.group() != spec {
        return Err(Error::GroupMismatch("quadratic form lives on another group".into()));
    }
    if !q.is_nondegenerate() {
        return Err(Error::NotModular("degenerate quadratic form".into()));
    }
    let n = spec.n();
    let rt = (n as f64).sqrt();
    let s = ComplexMatrix::from_fn(n, n, |i, j| eq(-q.assoc(i, j)) / rt);
    let labels = spec.elements().iter().map(|g| format!("g({g})")).collect();
    let twists = (0..n).map(|i| q.value(i)).collect();
    ModularData::new(labels, vec![1.0; n], twists, s)
}
