//! Acceptance criteria 1–8, one PASS/FAIL line each.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::{
    centralizer_reference, chi, condensed_reference, golden_rows, kron, perfect_matching, pointed, row_deviation,
    same_multiset, GoldenRow,
};
use ngcenter::centerdata::{verify_modular, verlinde_fusion, ModularData};
use ngcenter::centersolver::{check_triple, solve_all_triples, CenterTriple, SolverConfig};
use ngcenter::condense::PartialModularData;
use ngcenter::neargroup::{catalog, catalog_entry, refine_b, verify_axioms, NearGroupData};
use ngcenter::pipeline::PipelineOutcome;
use ngcenter::superfactor::{compare_modular, compare_super, factor_pointed, target_data};
use ngcenter::C64;

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn refined(name: &str) -> NearGroupData {
    refine_b(&catalog_entry(name).unwrap().build().unwrap()).unwrap()
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let t0 = Instant::now();
    let v = f();
    (v, t0.elapsed())
}

fn criterion_1() -> Check {
    let (res, dt) = timed(|| {
        let mut worst_pre: f64 = 0.0;
        let mut worst_post: f64 = 0.0;
        for entry in catalog() {
            let raw = entry.build().map_err(|e| e.to_string())?;
            let pre = verify_axioms(&raw, 1e-3);
            ensure(pre.passed(), format!("{} pre-refinement {:.2e}", entry.name, pre.max()))?;
            let post = verify_axioms(&refine_b(&raw).map_err(|e| e.to_string())?, 1e-9);
            ensure(
                post.passed(),
                format!("{} post-refinement {:.2e}", entry.name, post.max()),
            )?;
            worst_pre = worst_pre.max(pre.max());
            worst_post = worst_post.max(post.max());
        }
        Ok::<_, String>((worst_pre, worst_post))
    });
    let (pre, post) = res?;
    ensure(dt < Duration::from_secs(1), format!("runtime {dt:?}"))?;
    Ok(format!(
        "8 instances, max residual {pre:.1e} before / {post:.1e} after refinement, {dt:.2?}"
    ))
}

fn criterion_2(j6: &[CenterTriple], t6: Duration, j24: &[CenterTriple], t24: Duration) -> Check {
    ensure(j6.len() == 27, format!("J6_1: {} triples", j6.len()))?;
    ensure(j24.len() == 44, format!("J24_1: {} triples", j24.len()))?;
    ensure(t6 < Duration::from_secs(60) && t24 < Duration::from_secs(60), "runtime")?;
    Ok(format!("27 and 44 triples in {t6:.2?} and {t24:.2?}"))
}

fn table_match(
    rows: &[GoldenRow],
    triples: &[CenterTriple],
    m: u32,
    map: &dyn Fn(&GoldenRow, usize) -> usize,
) -> Result<f64, String> {
    let mut a: Vec<_> = rows.iter().map(|r| (r.k, r.tau.clone())).collect();
    let mut b: Vec<_> = triples
        .iter()
        .map(|t| (t.omega_over(m).unwrap_or(u32::MAX), t.tau.coords.clone()))
        .collect();
    a.sort();
    b.sort();
    ensure(a == b, "(omega, tau) multisets differ")?;
    let dev = |r: &GoldenRow, t: &CenterTriple| {
        if t.omega_over(m) == Some(r.k) && t.tau.coords == r.tau {
            row_deviation(r, t, &|g| map(r, g))
        } else {
            f64::INFINITY
        }
    };
    let adj: Vec<Vec<usize>> = rows
        .iter()
        .map(|r| (0..triples.len()).filter(|&j| dev(r, &triples[j]) < 2e-3).collect())
        .collect();
    let matching = perfect_matching(&adj, triples.len()).ok_or("no row matching within 2e-3")?;
    Ok(rows
        .iter()
        .zip(&matching)
        .map(|(r, &j)| dev(r, &triples[j]))
        .fold(0.0, f64::max))
}

fn criterion_3(j6: &[CenterTriple]) -> Check {
    let worst = table_match(&golden_rows("j6_1_triples.txt"), j6, 60, &|_, g| g)?;
    Ok(format!("27 rows matched, max phase deviation {worst:.1e}"))
}

fn criterion_4(data: &NearGroupData, j24: &[CenterTriple]) -> Check {
    let rows = golden_rows("j24_1_triples.txt");
    let g = &data.group;
    let reflect = |r: &GoldenRow, i: usize| {
        let tau = ngcenter::algebra::GroupElement { coords: r.tau.clone() };
        g.index(&g.add(&tau, &g.neg(&g.element(i))))
    };
    let literal = rows
        .iter()
        .filter(|r| {
            j24.iter()
                .any(|t| t.omega_over(48) == Some(r.k) && t.tau.coords == r.tau && row_deviation(r, t, &|i| i) < 2e-3)
        })
        .count();
    let worst = table_match(&rows, j24, 48, &reflect)?;
    Ok(format!(
        "44 rows matched reading the table as xi(tau - g), max phase deviation {worst:.1e} ({literal}/44 match read literally)"
    ))
}

fn criterion_5(c6: &ModularData, c24: &ModularData) -> Check {
    let mut out = Vec::new();
    for (md, rank, lambda) in [
        (c6, 54, 6.0 * (10.0 * chi(15.0, 4.0)).sqrt()),
        (c24, 88, 16.0 * (3.0 * chi(24.0, 5.0)).sqrt()),
    ] {
        let rep = verify_modular(md, 1e-6);
        ensure(rep.passed(), format!("rank {}: {:?}", md.rank(), rep.failures()))?;
        ensure(md.rank() == rank, format!("rank {} != {rank}", md.rank()))?;
        let rel = (md.lambda - lambda).abs() / lambda;
        ensure(rel < 1e-6, format!("lambda {} vs {lambda}", md.lambda))?;
        out.push(format!(
            "rank {rank} lambda {:.4} (unitarity {:.0e}, verlinde {:.0e}, balancing {:.0e})",
            md.lambda, rep.unitarity, rep.verlinde, rep.balancing
        ));
    }
    Ok(out.join("; "))
}

fn criterion_6(out: &PipelineOutcome, dt: Duration) -> Check {
    let sector = out.sector.as_ref().ok_or("no sector")?;
    ensure(sector.rank() == 10, format!("sector rank {}", sector.rank()))?;
    let gdim: f64 = sector.dims.iter().map(|d| d * d).sum();
    ensure((gdim - 472.379).abs() < 0.01, format!("global dimension {gdim}"))?;
    let m = out.comparison.as_ref().ok_or("no comparison")?;
    ensure(m.matched && !m.conjugated, format!("{m:?}"))?;
    ensure(dt < Duration::from_secs(120), format!("runtime {dt:?}"))?;
    Ok(format!(
        "sector rank 10, global dimension {gdim:.4}, SMDS1 matched without conjugation (deviation {:.1e}), {dt:.2?}",
        m.max_deviation
    ))
}

fn dims_twists(p: &PartialModularData) -> Vec<(f64, C64)> {
    p.dims.iter().cloned().zip(p.twists.iter().cloned()).collect()
}

fn criterion_7(out: &PipelineOutcome, dt: Duration) -> Check {
    let cond = out.condensed.as_ref().ok_or("no condensation")?;
    ensure(cond.rank() == 36, format!("condensed rank {}", cond.rank()))?;
    ensure(
        same_multiset(&dims_twists(cond), &condensed_reference(), 1e-6),
        "condensed dims/twists differ from the reference list",
    )?;
    let fac = out.factorization.as_ref().ok_or("no factorization")?;
    ensure(fac.pointed.rank() == 2, "pointed factor is not a semion")?;
    ensure(fac.factor.rank() == 18, format!("factor rank {}", fac.factor.rank()))?;
    ensure(
        same_multiset(&dims_twists(&fac.factor), &centralizer_reference(), 1e-6),
        "factor dims/twists differ from the reference list",
    )?;
    let res = out.resolution.as_ref().ok_or("no resolution")?;
    let survivors = res.candidates - res.rejected.len();
    ensure(survivors == 1, format!("{survivors} surviving candidates"))?;
    let smd = out.super_data.as_ref().ok_or("no super data")?;
    let gamma = (0..smd.rank())
        .find(|&i| (smd.dims[i] - chi(6.0, 3.0)).abs() < 1e-6)
        .ok_or("no object of dimension 3+sqrt 6")?;
    let u3 = smd.s_hat[(gamma, gamma)] * smd.lambda_hat;
    let want = C64::new(-(6f64.sqrt()) - 3.0, 3.0 * 2f64.sqrt() + 2.0 * 3f64.sqrt());
    ensure((u3 - want).norm() < 1e-6, format!("u3 = {u3}"))?;
    let lam = 2.0 * (6.0 * chi(24.0, 5.0)).sqrt();
    ensure(
        (smd.lambda_hat - lam).abs() < 1e-9,
        format!("lambda_hat {}", smd.lambda_hat),
    )?;
    let m = out.comparison.as_ref().ok_or("no comparison")?;
    ensure(m.matched && m.conjugated, format!("{m:?}"))?;
    ensure(dt < Duration::from_secs(180), format!("runtime {dt:?}"))?;
    Ok(format!(
        "36 condensed simples as listed, 18 in the semion's centralizer, unique survivor u3 = {:.6}{:+.6}i, SMDS2 matched under conjugation, {dt:.2?}",
        u3.re, u3.im
    ))
}

fn criterion_8(j6: &[CenterTriple], j6_out: &PipelineOutcome) -> Check {
    // Galois conjugate pair.
    let bar = refined("J6_1bar");
    let bar_triples = solve_all_triples(&bar, &SolverConfig::default()).map_err(|e| e.to_string())?;
    ensure(bar_triples.len() == j6.len(), "conjugate triple count")?;
    for t in j6 {
        let hit = bar_triples.iter().any(|u| {
            (u.omega() - t.omega().conj()).norm() < 1e-9
                && u.tau == t.tau
                && u.xi.iter().zip(&t.xi).all(|(a, b)| (a - b.conj()).norm() < 1e-8)
        });
        ensure(hit, "a J6_1 triple has no conjugate among the J6_1bar triples")?;
    }
    let bar_out = common::pipeline("J6_1bar", None, false);
    let sd = j6_out.super_data.as_ref().ok_or("no J6_1 super data")?;
    let sd_bar = bar_out.super_data.as_ref().ok_or("no J6_1bar super data")?;
    let m = compare_super(&sd.conj(), sd_bar, false, 1e-6);
    ensure(m.matched, "J6_1bar super data is not the conjugate")?;
    ensure(
        compare_super(sd_bar, &target_data("smds1").unwrap(), true, 1e-6).conjugated,
        "J6_1bar vs SMDS1",
    )?;

    // Each verifier sees a 1e-3 corruption.
    let eps = 1e-3;
    let data = refined("J6_1");
    let mut bad = data.clone();
    bad.b[1] *= C64::from_polar(1.0, eps);
    ensure(!verify_axioms(&bad, 1e-6).passed(), "axioms missed perturbed b")?;
    let mut t = j6[0].clone();
    t.xi[2] *= C64::from_polar(1.0, eps);
    ensure(
        !check_triple(&data, &t, 1e-6).passed(),
        "triple check missed perturbed xi",
    )?;
    let center = j6_out.center.as_ref().ok_or("no center")?;
    let mut md = center.clone();
    md.s[(3, 7)] += eps;
    md.s[(7, 3)] += eps;
    ensure(!verify_modular(&md, 1e-6).passed(), "verify_modular missed perturbed S")?;
    let mut md = center.clone();
    md.twists[5] *= C64::from_polar(1.0, eps);
    ensure(!verify_modular(&md, 1e-6).passed(), "verify_modular missed perturbed T")?;
    let mut sd2 = sd.clone();
    sd2.s_hat[(1, 2)] += eps;
    ensure(sd2.check(1e-6).is_err(), "super check missed perturbed S_hat")?;
    ensure(
        !compare_super(&sd2, &target_data("smds1").unwrap(), true, 1e-6).matched,
        "compare matched perturbed data",
    )?;

    // pointed ⊠ pointed splits back exactly.
    let z3 = pointed(3, 1, 3);
    let semion = pointed(2, 1, 4);
    let prod = kron(&z3, &semion);
    let fusion = verlinde_fusion(&prod).map_err(|e| e.to_string())?;
    let pmd = PartialModularData::from_modular(&prod, &fusion);
    let set = vec![0, 1];
    let f = factor_pointed(&pmd, &set).map_err(|e| e.to_string())?;
    let back = f.factor.to_modular().map_err(|e| e.to_string())?;
    let mz = compare_modular(&back, &z3, false, 1e-12);
    let ms = compare_modular(&f.pointed, &semion, false, 1e-12);
    ensure(
        mz.matched && ms.matched && f.kronecker_defect < 1e-12,
        "split product did not round-trip",
    )?;
    Ok(format!(
        "conjugate pair consistent, 6 perturbations detected, split product round-trips (defect {:.0e})",
        f.kronecker_defect.max(mz.max_deviation)
    ))
}

fn run(n: usize, name: &str, f: impl FnOnce() -> Check) -> bool {
    let res = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
        Err(p
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "panic".into()))
    });
    match res {
        Ok(msg) => {
            println!("criterion {n} ({name}): PASS - {msg}");
            true
        }
        Err(msg) => {
            println!("criterion {n} ({name}): FAIL - {msg}");
            false
        }
    }
}

fn main() -> ExitCode {
    let mut ok = run(1, "catalog axioms", criterion_1);

    let d6 = refined("J6_1");
    let d24 = refined("J24_1");
    let cfg = SolverConfig::default();
    let (j6, t6) = timed(|| solve_all_triples(&d6, &cfg).unwrap_or_default());
    let (j24, t24) = timed(|| solve_all_triples(&d24, &cfg).unwrap_or_default());
    ok &= run(2, "triple counts", || criterion_2(&j6, t6, &j24, t24));
    ok &= run(3, "J6_1 triple table", || criterion_3(&j6));
    ok &= run(4, "J24_1 triple table", || criterion_4(&d24, &j24));

    let (o6, dt6) = timed(|| catch_unwind(|| common::pipeline("J6_1", Some("smds1"), false)).ok());
    let (o24, dt24) = timed(|| catch_unwind(|| common::pipeline("J24_1", Some("smds2"), true)).ok());
    ok &= run(5, "center modularity", || {
        let c6 = o6
            .as_ref()
            .and_then(|o| o.center.as_ref())
            .ok_or("J6_1 pipeline failed")?;
        let c24 = o24
            .as_ref()
            .and_then(|o| o.center.as_ref())
            .ok_or("J24_1 pipeline failed")?;
        criterion_5(c6, c24)
    });
    ok &= run(6, "J6_1 end to end", || {
        criterion_6(o6.as_ref().ok_or("pipeline failed")?, dt6)
    });
    ok &= run(7, "J24_1 end to end", || {
        criterion_7(o24.as_ref().ok_or("pipeline failed")?, dt24)
    });
    ok &= run(8, "property suite", || {
        criterion_8(&j6, o6.as_ref().ok_or("pipeline failed")?)
    });

    if ok {
        println!("acceptance: all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: some criteria failed");
        ExitCode::FAILURE
    }
}
