#![allow(dead_code)]

use std::f64::consts::PI;
use std::path::Path;

use ngcenter::algebra::{pointed_modular_data, GroupSpec, QuadraticForm};
use ngcenter::centerdata::ModularData;
use ngcenter::centersolver::CenterTriple;
use ngcenter::linalg::ComplexMatrix;
use ngcenter::pipeline::{run_pipeline, PipelineConfig, PipelineOutcome};
use ngcenter::Q;

pub fn chi(n: f64, m: f64) -> f64 {
    m + n.sqrt()
}

/// Distance between two angles on the circle.
pub fn circ(a: f64, b: f64) -> f64 {
    let t = (a - b).rem_euclid(2.0 * PI);
    t.min(2.0 * PI - t)
}

/// One printed triple: `ω` exponent, `τ` coordinates, `ξ` phases.
#[derive(Clone, Debug)]
pub struct GoldenRow {
    pub k: u32,
    pub tau: Vec<u32>,
    pub xi: Vec<f64>,
}

pub fn golden_rows(file: &str) -> Vec<GoldenRow> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(file);
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .map(|l| {
            let p: Vec<&str> = l.split_whitespace().collect();
            GoldenRow {
                k: p[0].parse().unwrap(),
                tau: p[1].split(',').map(|x| x.parse().unwrap()).collect(),
                xi: p[2].split(',').map(|x| x.parse().unwrap()).collect(),
            }
        })
        .collect()
}

/// Largest phase deviation of `row` from `t` after reindexing `g ↦ map(g)`.
pub fn row_deviation(row: &GoldenRow, t: &CenterTriple, map: &dyn Fn(usize) -> usize) -> f64 {
    let ph = t.phases();
    row.xi
        .iter()
        .enumerate()
        .map(|(g, &x)| circ(ph[map(g)], x))
        .fold(0.0, f64::max)
}

/// Perfect matching in a bipartite graph given as adjacency lists, or `None`.
pub fn perfect_matching(adj: &[Vec<usize>], right: usize) -> Option<Vec<usize>> {
    fn augment(u: usize, adj: &[Vec<usize>], seen: &mut [bool], owner: &mut [Option<usize>]) -> bool {
        for &v in &adj[u] {
            if seen[v] {
                continue;
            }
            seen[v] = true;
            if owner[v].is_none() || augment(owner[v].unwrap(), adj, seen, owner) {
                owner[v] = Some(u);
                return true;
            }
        }
        false
    }
    if adj.len() != right {
        return None;
    }
    let mut owner = vec![None; right];
    for u in 0..adj.len() {
        if !augment(u, adj, &mut vec![false; right], &mut owner) {
            return None;
        }
    }
    let mut m = vec![0; adj.len()];
    for (v, u) in owner.iter().enumerate() {
        m[u.unwrap()] = v;
    }
    Some(m)
}

pub fn pipeline(instance: &str, compare: Option<&str>, allow_conjugation: bool) -> PipelineOutcome {
    let mut cfg = PipelineConfig::instance(instance);
    cfg.compare = compare.map(str::to_string);
    cfg.allow_conjugation = allow_conjugation;
    run_pipeline(&cfg).unwrap()
}

/// Multiset equality of `(dim, phase)` pairs within `tol`.
pub fn same_multiset(a: &[(f64, num_complex::Complex64)], b: &[(f64, num_complex::Complex64)], tol: f64) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let mut used = vec![false; b.len()];
    a.iter().all(|&(d, t)| {
        match (0..b.len()).find(|&j| !used[j] && (b[j].0 - d).abs() < tol && (b[j].1 - t).norm() < tol) {
            Some(j) => {
                used[j] = true;
                true
            }
            None => false,
        }
    })
}

fn ph(r: f64) -> num_complex::Complex64 {
    num_complex::Complex64::from_polar(1.0, 2.0 * PI * r)
}

/// `(dim, twist)` of the 36 simples of the condensed J24_1 center.
pub fn condensed_reference() -> Vec<(f64, num_complex::Complex64)> {
    let (y, z2, z, w, v) = (
        chi(24.0, 5.0),
        2.0 * chi(6.0, 3.0),
        chi(6.0, 3.0),
        chi(24.0, 4.0),
        chi(6.0, 2.0),
    );
    let mut t = Vec::new();
    for q in [0.0, 0.25, 0.5, 0.75] {
        t.push((1.0, ph(q)));
        t.push((y, ph(q)));
    }
    for q in [0.0, 0.0, 0.25, 0.75] {
        t.push((z2, ph(q)));
    }
    for q in [0.0, 0.0, 0.75, 0.75, 0.5, 0.5, 0.25, 0.25] {
        t.push((z, ph(q)));
    }
    for q in [
        1.0 / 3.0,
        -1.0 / 6.0,
        1.0 / 12.0,
        -5.0 / 12.0,
        11.0 / 24.0,
        11.0 / 24.0,
        -7.0 / 24.0,
        -7.0 / 24.0,
    ] {
        t.push((w, ph(q)));
    }
    for q in [0.125, 0.125, 0.125, 0.125, 0.375, 0.375, 0.375, 0.375] {
        t.push((v, ph(q)));
    }
    t
}

/// `(dim, twist)` of the 18 simples of the semion's centralizer. The reference
/// list has `F(Z_(0,0),(1,2))` with twist 1 among the `2χ₆³` objects; that
/// object is not centralized by the semion, and its coset partner
/// `F(Z_(0,1),(1,3))` (twist `-i`) is used instead.
pub fn centralizer_reference() -> Vec<(f64, num_complex::Complex64)> {
    let (y, z2, z, w, v) = (
        chi(24.0, 5.0),
        2.0 * chi(6.0, 3.0),
        chi(6.0, 3.0),
        chi(24.0, 4.0),
        chi(6.0, 2.0),
    );
    let mut t = vec![(1.0, ph(0.0)), (1.0, ph(0.5)), (y, ph(0.0)), (y, ph(0.5))];
    t.push((z2, ph(0.0)));
    t.push((z2, ph(0.75)));
    for q in [0.75, 0.75, 0.25, 0.25] {
        t.push((z, ph(q)));
    }
    for q in [1.0 / 3.0, -1.0 / 6.0, 11.0 / 24.0, 11.0 / 24.0] {
        t.push((w, ph(q)));
    }
    for _ in 0..4 {
        t.push((v, ph(0.125)));
    }
    t
}

/// Product data `a ⊠ b`, index `i·rank(b) + j`.
pub fn kron(a: &ModularData, b: &ModularData) -> ModularData {
    let (ra, rb) = (a.rank(), b.rank());
    let mut labels = Vec::new();
    let mut dims = Vec::new();
    let mut twists = Vec::new();
    for i in 0..ra {
        for j in 0..rb {
            labels.push(format!("{}x{}", a.labels[i], b.labels[j]));
            dims.push(a.dims[i] * b.dims[j]);
            twists.push(a.twists[i] * b.twists[j]);
        }
    }
    let s = ComplexMatrix::from_fn(ra * rb, ra * rb, |p, q| a.s[(p / rb, q / rb)] * b.s[(p % rb, q % rb)]);
    ModularData::new(labels, dims, twists, s).unwrap()
}

/// Pointed data on `ℤ/n` with `q(x) = e(num·x²/den)`.
pub fn pointed(n: u32, num: i64, den: i64) -> ModularData {
    let g = GroupSpec::cyclic(n);
    let q = QuadraticForm::new(g.clone(), (0..n as i64).map(|x| Q::new(num * x * x, den)).collect()).unwrap();
    pointed_modular_data(&g, &q).unwrap()
}
