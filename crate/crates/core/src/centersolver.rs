//! The `(ξ, τ, ω)` triples of the center equations, found by sweeping
//! `ω = e(k/N)` and `τ ∈ G` and solving the linearized system
//! `(C(ω,τ) − B) ξ = z`.

use std::cmp::Ordering;
use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use num_rational::Rational64 as Q;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{e, GroupElement};
use crate::io::{cjson, from_cjson, Rat};
use crate::linalg::{newton_polish, norm_inf, solve_affine, ComplexMatrix};
use crate::neargroup::{NearGroupData, Tables};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct CenterTriple {
    /// `ω = e(omega_k / omega_n)`.
    pub omega_k: u32,
    pub omega_n: u32,
    pub tau: GroupElement,
    pub xi: Vec<C64>,
}

impl CenterTriple {
    pub fn omega(&self) -> C64 {
        e(self.omega_k as f64 / self.omega_n as f64)
    }

    pub fn omega_q(&self) -> Q {
        Q::new(self.omega_k as i64, self.omega_n as i64)
    }

    /// `ω` exponent over `ζ_m` when `m` is a multiple of its order.
    pub fn omega_over(&self, m: u32) -> Option<u32> {
        let q = self.omega_q() * Q::from_integer(m as i64);
        q.is_integer().then(|| (*q.numer()).rem_euclid(m as i64) as u32)
    }

    pub fn phases(&self) -> Vec<f64> {
        self.xi.iter().map(|z| z.arg()).collect()
    }

    pub fn to_json(&self) -> TripleJson {
        TripleJson {
            omega: Rat {
                num: self.omega_k as i64,
                den: self.omega_n as i64,
            },
            tau: self.tau.coords.clone(),
            xi: self.xi.iter().map(|&z| cjson(z)).collect(),
        }
    }

    pub fn from_json(j: &TripleJson) -> Result<CenterTriple> {
        if j.omega.den <= 0 || j.omega.num < 0 || j.omega.num >= j.omega.den {
            return Err(Error::Invalid("omega exponent must be k/N with 0 <= k < N".into()));
        }
        Ok(CenterTriple {
            omega_k: j.omega.num as u32,
            omega_n: j.omega.den as u32,
            tau: GroupElement { coords: j.tau.clone() },
            xi: j.xi.iter().map(|&z| from_cjson(z)).collect(),
        })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TripleJson {
    pub omega: Rat,
    pub tau: Vec<u32>,
    pub xi: Vec<[f64; 2]>,
}

#[derive(Clone, Debug)]
pub struct SolverConfig {
    pub omega_order: u32,
    pub rank_tol: f64,
    pub residual_tol: f64,
    pub dedup_tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            omega_order: 240,
            rank_tol: 1e-8,
            residual_tol: 1e-9,
            dedup_tol: 1e-6,
        }
    }
}

impl SolverConfig {
    // Written negated so that NaN is rejected.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<()> {
        if self.omega_order == 0 {
            return Err(Error::Invalid("omega order must be positive".into()));
        }
        if !(self.residual_tol > 0.0) || !(self.dedup_tol > self.residual_tol) || !(self.rank_tol > 0.0) {
            return Err(Error::Invalid(
                "need rank_tol > 0 and dedup_tol > residual_tol > 0".into(),
            ));
        }
        Ok(())
    }
}

/// `C` with `ω a(τ) conj(a(g+τ) a(g))` at `(g, −g)`, `B_{g,k} = b(g+k)` and
/// the constant right side `c√n/d`.
pub fn build_cb(data: &NearGroupData, omega: C64, tau: usize) -> (ComplexMatrix, ComplexMatrix, Vec<C64>) {
    let t = data.tables();
    build_cb_with(data, &t, omega, tau)
}

fn build_cb_with(data: &NearGroupData, t: &Tables, omega: C64, tau: usize) -> (ComplexMatrix, ComplexMatrix, Vec<C64>) {
    let n = t.n;
    let mut c = ComplexMatrix::zeros(n, n);
    for g in 0..n {
        c[(g, t.neg[g])] = omega * t.a[tau] * (t.a[t.add[g][tau]] * t.a[g]).conj();
    }
    let b = ComplexMatrix::from_fn(n, n, |g, k| data.b[t.add[g][k]]);
    let z = vec![data.c() * (n as f64).sqrt() / data.d; n];
    (c, b, z)
}

/// Residuals of the four center equation families plus `|ξ(g)|² − 1`,
/// concatenated.
fn half_residuals(data: &NearGroupData, t: &Tables, xi: &[C64], tau: usize, omega: C64) -> [Vec<C64>; 5] {
    let n = t.n;
    let rt = (n as f64).sqrt();
    let d = data.d;
    let c = data.c();
    let c3 = c.powi(3);
    let w2 = omega * omega;
    let at = t.a[tau];
    let b = &data.b;
    let h1 = vec![xi.iter().sum::<C64>() - (rt * w2 * at * c3 - n as f64 / d)];
    let h2 = (0..n)
        .map(|g| {
            let s: C64 = (0..n).map(|k| b[t.add[g][k]] * xi[k]).sum();
            c.conj() * s - (w2 * c3 * at * xi[t.add[g][tau]].conj() - rt / d)
        })
        .collect();
    let c4 = c.powi(4);
    let h3 = (0..n)
        .map(|g| {
            let tg = t.sub(tau, g);
            xi[tg] - omega * c4 * t.a[g] * t.a[tg] * xi[g].conj()
        })
        .collect();
    let cm2 = c.powi(-2);
    let c2d = c.powi(2) / d;
    let mut h4 = Vec::with_capacity(n * n);
    for g in 0..n {
        for h in 0..n {
            let s: C64 = (0..n).map(|k| xi[k] * b[t.sub(k, g)] * b[t.sub(k, h)]).sum();
            let ghmt = t.sub(t.add[g][h], tau);
            let rhs = cm2 * b[ghmt] * xi[g] * xi[h] * t.a[t.sub(g, h)].conj() - c2d;
            h4.push(s - rhs);
        }
    }
    let modulus = xi.iter().map(|z| C64::new(z.norm_sqr() - 1.0, 0.0)).collect();
    [h1, h2, h3, h4, modulus]
}

const FAMILIES: [&str; 5] = ["half1", "half2", "half3", "half4", "modulus"];

#[derive(Clone, Debug, Serialize)]
pub struct TripleReport {
    pub residuals: Vec<(String, f64)>,
    pub tol: f64,
}

impl TripleReport {
    pub fn max(&self) -> f64 {
        self.residuals.iter().map(|r| r.1).fold(0.0, f64::max)
    }

    pub fn passed(&self) -> bool {
        self.max() <= self.tol
    }
}

pub fn check_triple(data: &NearGroupData, triple: &CenterTriple, tol: f64) -> TripleReport {
    let t = data.tables();
    let tau = data.group.index(&triple.tau);
    let r = half_residuals(data, &t, &triple.xi, tau, triple.omega());
    TripleReport {
        residuals: FAMILIES
            .iter()
            .zip(r.iter())
            .map(|(f, v)| (f.to_string(), norm_inf(v)))
            .collect(),
        tol,
    }
}

fn full_residual(data: &NearGroupData, t: &Tables, xi: &[C64], tau: usize, omega: C64) -> Vec<C64> {
    half_residuals(data, t, xi, tau, omega).concat()
}

/// All center-equation residuals of `(ω, τ, ξ)` as one complex vector.
pub fn triple_residual(data: &NearGroupData, xi: &[C64], tau: usize, omega: C64) -> Vec<C64> {
    full_residual(data, &data.tables(), xi, tau, omega)
}

/// Candidate `ξ` for one `(ω, τ)`: the affine solution if unique, otherwise
/// Newton-polished points of the affine manifold.
pub fn candidate_xis(data: &NearGroupData, omega: C64, tau: usize, cfg: &SolverConfig) -> Vec<Vec<C64>> {
    let t = data.tables();
    candidate_xis_with(data, &t, omega, tau, cfg)
}

fn candidate_xis_with(data: &NearGroupData, t: &Tables, omega: C64, tau: usize, cfg: &SolverConfig) -> Vec<Vec<C64>> {
    let (c, b, z) = build_cb_with(data, t, omega, tau);
    let sol = solve_affine(&c.sub(&b), &z, cfg.rank_tol);
    if !sol.consistent {
        return Vec::new();
    }
    if sol.basis.is_empty() {
        return vec![sol.particular];
    }
    let k = sol.basis.len();
    let mut grid = Vec::new();
    for m in [2.0 / 3.0, 4.0 / 3.0, 2.0] {
        for p in 0..8 {
            grid.push(C64::from_polar(m, 2.0 * PI * p as f64 / 8.0));
        }
    }
    let starts = grid.len().pow(k as u32);
    let embed = |tc: &[C64]| -> Vec<C64> {
        let mut x = sol.particular.clone();
        for (v, tcoef) in sol.basis.iter().zip(tc) {
            for (xi, vi) in x.iter_mut().zip(v) {
                *xi += tcoef * vi;
            }
        }
        x
    };
    // Stage one: |ξ(g)| = 1 in the null-space coordinates only.
    let modulus = |tc: &[C64]| -> Vec<C64> { embed(tc).iter().map(|z| C64::new(z.norm_sqr() - 1.0, 0.0)).collect() };
    let mut seeds: Vec<Vec<C64>> = Vec::new();
    for s in 0..starts {
        let mut idx = s;
        let t0: Vec<C64> = (0..k)
            .map(|_| {
                let v = grid[idx % grid.len()];
                idx /= grid.len();
                v
            })
            .collect();
        if let Ok(tc) = newton_polish(modulus, &t0, 1e-10, 30) {
            let x = embed(&tc);
            if !seeds.iter().any(|y| dist_inf(y, &x) < cfg.dedup_tol) {
                seeds.push(x);
            }
        }
    }
    let mut found: Vec<Vec<C64>> = Vec::new();
    let f = |x: &[C64]| full_residual(data, t, x, tau, omega);
    for x0 in seeds {
        if norm_inf(&f(&x0)) > 1e-3 {
            continue;
        }
        if let Ok(x) = newton_polish(f, &x0, cfg.residual_tol * 1e-2, 40) {
            if !found.iter().any(|y| dist_inf(y, &x) < cfg.dedup_tol) {
                found.push(x);
            }
        }
    }
    found
}

fn dist_inf(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn phase_key(xi: &[C64]) -> Vec<f64> {
    xi.iter()
        .map(|z| {
            let p = (z.arg() * 1e6).round() / 1e6;
            if p <= -PI + 1e-6 {
                PI
            } else {
                p
            }
        })
        .collect()
}

fn triple_order(a: &CenterTriple, b: &CenterTriple, ta: usize, tb: usize) -> Ordering {
    ta.cmp(&tb).then(a.omega_q().cmp(&b.omega_q())).then_with(|| {
        phase_key(&a.xi)
            .iter()
            .zip(phase_key(&b.xi).iter())
            .map(|(x, y)| x.partial_cmp(y).unwrap_or(Ordering::Equal))
            .find(|o| *o != Ordering::Equal)
            .unwrap_or(Ordering::Equal)
    })
}

/// Sweeps all `(ω, τ)` and returns exactly `n(n+3)/2` deduplicated triples
/// sorted by `(τ, ω, phases)`.
pub fn solve_all_triples(data: &NearGroupData, cfg: &SolverConfig) -> Result<Vec<CenterTriple>> {
    cfg.validate()?;
    let n = data.n();
    let t = data.tables();
    let big_n = cfg.omega_order;
    let tasks: Vec<(u32, usize)> = (0..big_n).flat_map(|k| (0..n).map(move |tau| (k, tau))).collect();
    let mut raw: Vec<(usize, CenterTriple)> = tasks
        .par_iter()
        .flat_map_iter(|&(k, tau)| {
            let omega = e(k as f64 / big_n as f64);
            let cands = candidate_xis_with(data, &t, omega, tau, cfg);
            let t = &t;
            cands.into_iter().filter_map(move |xi| {
                let r = norm_inf(&full_residual(data, t, &xi, tau, omega));
                (r <= cfg.residual_tol).then(|| {
                    let g = gcd(k, big_n);
                    (
                        tau,
                        CenterTriple {
                            omega_k: k / g,
                            omega_n: big_n / g,
                            tau: data.group.element(tau),
                            xi,
                        },
                    )
                })
            })
        })
        .collect();
    raw.sort_by(|a, b| triple_order(&a.1, &b.1, a.0, b.0));
    let mut out: Vec<(usize, CenterTriple)> = Vec::new();
    for (tau, tr) in raw {
        let dup = out
            .iter()
            .any(|(t2, o)| *t2 == tau && o.omega_q() == tr.omega_q() && dist_inf(&o.xi, &tr.xi) < cfg.dedup_tol);
        if !dup {
            out.push((tau, tr));
        }
    }
    let expected = n * (n + 3) / 2;
    if out.len() != expected {
        return Err(Error::TripleCount {
            found: out.len(),
            expected,
        });
    }
    Ok(out.into_iter().map(|x| x.1).collect())
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neargroup::{catalog_entry, refine_b};

    fn j61() -> NearGroupData {
        refine_b(&catalog_entry("J6_1").unwrap().build().unwrap()).unwrap()
    }

    #[test]
    fn cb_shape() {
        let data = j61();
        let (c, b, z) = build_cb(&data, e(12.0 / 60.0), 0);
        assert!(b.symmetry_defect() < 1e-15);
        for g in 0..6 {
            let nz = (0..6).filter(|&k| c[(g, k)].norm() > 0.0).count();
            assert_eq!(nz, 1);
        }
        assert!((c[(0, 0)] - e(0.2)).norm() < 1e-12);
        assert_eq!(z.len(), 6);
    }

    #[test]
    fn random_xi_fails_check() {
        let data = j61();
        let tr = CenterTriple {
            omega_k: 0,
            omega_n: 1,
            tau: data.group.zero(),
            xi: (0..6).map(|g| e(0.37 * g as f64 + 0.1)).collect(),
        };
        assert!(check_triple(&data, &tr, 1e-6).max() > 1e-2);
    }

    #[test]
    fn insufficient_omega_order_fails_loudly() {
        let data = j61();
        let cfg = SolverConfig {
            omega_order: 7,
            ..Default::default()
        };
        match solve_all_triples(&data, &cfg) {
            Err(Error::TripleCount { found, expected }) => {
                assert_eq!(expected, 27);
                assert!(found < 27);
            }
            other => panic!("expected a count error, got {other:?}"),
        }
    }
}
