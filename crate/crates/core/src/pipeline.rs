//! Stage orchestration and artifact plumbing shared by the CLI and the FFI.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::centerdata::{assemble_center_data, verify_modular, verlinde_fusion, ModularData, ModularDataJson};
use crate::centersolver::{solve_all_triples, CenterTriple, SolverConfig, TripleJson};
use crate::condense::{
    condense, find_bosons, resolve_sum_constraints, resolve_unknowns, PartialModularData, Resolution,
};
use crate::io::{complex_text, phase_text};
use crate::neargroup::{catalog_entry, refine_b, verify_axioms, NearGroupData, NearGroupJson};
use crate::superfactor::{
    compare_super, extract_fermion_sector, factor_pointed, pointed_modular_subsets, resolve_super, split_super_partial,
    target_data, Factorization, MatchResult, SuperModularData, SuperModularDataJson,
};
use crate::{Error, Result};

/// Tolerance for the near-group axioms after refinement.
pub const AXIOM_TOL: f64 = 1e-9;

/// Pipeline steps in execution order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Stage {
    Solve,
    Center,
    Condense,
    Factor,
    Supermodular,
    Compare,
}

impl Stage {
    pub const ALL: [Stage; 6] = [
        Stage::Solve,
        Stage::Center,
        Stage::Condense,
        Stage::Factor,
        Stage::Supermodular,
        Stage::Compare,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Solve => "solve",
            Stage::Center => "center",
            Stage::Condense => "condense",
            Stage::Factor => "factor",
            Stage::Supermodular => "supermodular",
            Stage::Compare => "compare",
        }
    }
}

impl FromStr for Stage {
    type Err = Error;
    fn from_str(s: &str) -> Result<Stage> {
        Stage::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| Error::Invalid(format!("unknown stage '{s}'")))
    }
}

/// Where the near-group datum comes from.
#[derive(Clone, Debug)]
pub enum Source {
    Instance(String),
    Input(PathBuf),
}

#[derive(Clone, Debug)]
pub struct PipelineConfig {
    pub source: Source,
    pub omega_order: u32,
    /// Verifier tolerance for the center and the super-modular data.
    pub tol: f64,
    /// Comparison tolerance.
    pub compare_tol: f64,
    pub out_dir: Option<PathBuf>,
    /// Last stage to run; the stages run are the prefix ending here.
    pub through: Stage,
    pub compare: Option<String>,
    pub allow_conjugation: bool,
    /// Boson to condense; by default the first boson, if any.
    pub boson: Option<String>,
    /// Labels of the pointed factor; by default the largest candidate.
    pub pointed: Option<Vec<String>>,
    /// Fermion label; by default the first fermion with known action.
    pub fermion: Option<String>,
}

impl PipelineConfig {
    pub fn instance(name: &str) -> PipelineConfig {
        PipelineConfig {
            source: Source::Instance(name.to_string()),
            omega_order: SolverConfig::default().omega_order,
            tol: 1e-6,
            compare_tol: 1e-6,
            out_dir: None,
            through: Stage::Supermodular,
            compare: None,
            allow_conjugation: false,
            boson: None,
            pointed: None,
            fermion: None,
        }
    }

    /// Stages in run order; `compare` is appended when a target is set.
    pub fn steps(&self) -> Vec<Stage> {
        let mut s: Vec<Stage> = Stage::ALL.into_iter().filter(|&st| st <= self.through).collect();
        if self.compare.is_some() && !s.contains(&Stage::Compare) {
            s.push(Stage::Compare);
        }
        s
    }

    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<()> {
        if self.omega_order == 0 {
            return Err(Error::Invalid("omega order must be positive".into()));
        }
        if !(self.tol > 0.0) || !(self.compare_tol > 0.0) {
            return Err(Error::Invalid("tolerances must be positive".into()));
        }
        if self.through == Stage::Compare && self.compare.is_none() {
            return Err(Error::Invalid("compare stage needs a target".into()));
        }
        if self.compare.is_some() && self.through < Stage::Supermodular {
            return Err(Error::Invalid("compare needs the supermodular stage".into()));
        }
        if let Some(t) = &self.compare {
            target_data(t)?;
        }
        Ok(())
    }
}

/// Everything the pipeline produced, stage by stage.
#[derive(Clone, Debug, Default)]
pub struct PipelineOutcome {
    pub data: Option<NearGroupData>,
    pub triples: Vec<CenterTriple>,
    pub center: Option<ModularData>,
    pub condensed: Option<PartialModularData>,
    pub factorization: Option<Factorization>,
    pub sector: Option<PartialModularData>,
    pub super_data: Option<SuperModularData>,
    pub resolution: Option<Resolution>,
    pub comparison: Option<MatchResult>,
    pub artifacts: Vec<(Stage, PathBuf)>,
    pub log: Vec<String>,
}

impl PipelineOutcome {
    /// 0 unless a comparison ran and failed.
    pub fn exit_code(&self) -> i32 {
        match &self.comparison {
            Some(m) if !m.matched => 1,
            _ => 0,
        }
    }
}

/// Exit status for an error: 2 for a failed stage, 3 for bad configuration.
pub fn error_exit_code(err: &Error) -> i32 {
    match err {
        Error::Stage { .. } => 2,
        _ => 3,
    }
}

/// Refined catalog instance or a JSON file, checked against the axioms.
pub fn load_source(source: &Source) -> Result<NearGroupData> {
    let data = match source {
        Source::Instance(name) => catalog_entry(name)?.build()?,
        Source::Input(path) => {
            let j: NearGroupJson = serde_json::from_str(&fs::read_to_string(path)?)?;
            NearGroupData::from_json(&j)?
        }
    };
    let data = if verify_axioms(&data, AXIOM_TOL).passed() {
        data
    } else {
        refine_b(&data)?
    };
    let rep = verify_axioms(&data, AXIOM_TOL);
    if !rep.passed() {
        return Err(Error::Axiom(format!(
            "{} after refinement: defect {:.3e}",
            data.name,
            rep.max()
        )));
    }
    Ok(data)
}

pub fn stage_solve(data: &NearGroupData, omega_order: u32) -> Result<Vec<CenterTriple>> {
    let cfg = SolverConfig {
        omega_order,
        ..SolverConfig::default()
    };
    solve_all_triples(data, &cfg).map_err(|e| e.at("solve"))
}

pub fn stage_center(data: &NearGroupData, triples: &[CenterTriple], tol: f64) -> Result<ModularData> {
    let run = || {
        let md = assemble_center_data(data, triples)?;
        let rep = verify_modular(&md, tol);
        if !rep.passed() {
            return Err(Error::NotModular(rep.failures().join(", ")));
        }
        Ok(md)
    };
    run().map_err(|e| e.at("center"))
}

/// Condenses `boson` (or the first boson) and fixes the sum-constrained
/// slots. `None` when there is nothing to condense.
pub fn stage_condense(md: &ModularData, boson: Option<&str>) -> Result<Option<PartialModularData>> {
    let run = || {
        let fusion = verlinde_fusion(md)?;
        let b = match boson {
            Some(label) => md
                .index_of(label)
                .ok_or_else(|| Error::Condense(format!("no simple labelled '{label}'")))?,
            None => match find_bosons(md, &fusion).first() {
                Some(&b) => b,
                None => return Ok(None),
            },
        };
        let pmd = resolve_sum_constraints(&condense(md, &fusion, b)?);
        let total: f64 = pmd.dims.iter().map(|d| d * d).sum();
        if (total.sqrt() - pmd.lambda).abs() > 1e-6 * pmd.lambda {
            return Err(Error::Condense(format!(
                "dimensions give {:.6}, expected {:.6}",
                total.sqrt(),
                pmd.lambda
            )));
        }
        Ok(Some(pmd))
    };
    run().map_err(|e| e.at("condense"))
}

pub fn partial_from_modular(md: &ModularData) -> Result<PartialModularData> {
    Ok(PartialModularData::from_modular(md, &verlinde_fusion(md)?))
}

/// Splits off `pointed` (labels) or the largest pointed modular subcategory.
pub fn stage_factor(pmd: &PartialModularData, pointed: Option<&[String]>) -> Result<Factorization> {
    let run = || {
        let set = match pointed {
            Some(labels) => labels
                .iter()
                .map(|l| {
                    pmd.index_of(l)
                        .ok_or_else(|| Error::Factor(format!("no simple labelled '{l}'")))
                })
                .collect::<Result<Vec<_>>>()?,
            None => pointed_modular_subsets(pmd)
                .into_iter()
                .next()
                .ok_or_else(|| Error::Factor("no nontrivial pointed modular subcategory".into()))?,
        };
        factor_pointed(pmd, &set)
    };
    run().map_err(|e| e.at("factor"))
}

/// First invertible with known action and twist `-1`.
pub fn default_fermion(pmd: &PartialModularData) -> Option<usize> {
    pmd.actions
        .keys()
        .copied()
        .find(|&x| (pmd.twists[x] + 1.0).norm() < 1e-6)
}

/// Fermion sector, collapsed pairs and resolved `(Ŝ, T̂²)`.
pub fn stage_supermodular(
    pmd: &PartialModularData,
    fermion: Option<&str>,
    tol: f64,
) -> Result<(PartialModularData, SuperModularData, Resolution)> {
    let run = || {
        let f = match fermion {
            Some(l) => pmd
                .index_of(l)
                .ok_or_else(|| Error::Invalid(format!("no simple labelled '{l}'")))?,
            None => default_fermion(pmd).ok_or_else(|| Error::Invalid("no fermion found".into()))?,
        };
        let sector = extract_fermion_sector(pmd, f)?;
        let fi = sector
            .index_of(&pmd.labels[f])
            .ok_or_else(|| Error::Invalid("fermion missing from its sector".into()))?;
        let ps = split_super_partial(&sector, fi)?;
        let (smd, res) = resolve_super(&ps)?;
        smd.check(tol)?;
        Ok::<_, Error>((sector, smd, res))
    };
    run().map_err(|e| e.at("supermodular"))
}

pub fn stage_compare(smd: &SuperModularData, target: &str, allow_conjugation: bool, tol: f64) -> Result<MatchResult> {
    let t = target_data(target).map_err(|e| e.at("compare"))?;
    Ok(compare_super(smd, &t, allow_conjugation, tol))
}

/// Pretty JSON with a trailing newline.
pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

/// Writes `contents` as `<stage>-<sha256 prefix>.json` under `dir`.
pub fn write_artifact(dir: &Path, stage: &str, contents: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let digest = Sha256::digest(contents.as_bytes());
    let hex: String = digest.iter().take(6).map(|b| format!("{b:02x}")).collect();
    let path = dir.join(format!("{stage}-{hex}.json"));
    fs::write(&path, contents)?;
    Ok(path)
}

pub fn triples_json(triples: &[CenterTriple]) -> Vec<TripleJson> {
    triples.iter().map(|t| t.to_json()).collect()
}

/// Runs the configured prefix of the pipeline.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<PipelineOutcome> {
    cfg.validate()?;
    let mut out = PipelineOutcome::default();
    let data = load_source(&cfg.source)?;
    let steps = cfg.steps();
    let save = |out: &mut PipelineOutcome, stage: Stage, body: String| -> Result<()> {
        if let Some(dir) = &cfg.out_dir {
            let p = write_artifact(dir, stage.name(), &body).map_err(|e| e.at(stage.name()))?;
            out.artifacts.push((stage, p));
        }
        Ok(())
    };

    let triples = stage_solve(&data, cfg.omega_order)?;
    out.log.push(format!("solve: {} triples", triples.len()));
    save(&mut out, Stage::Solve, to_json_string(&triples_json(&triples))?)?;
    out.triples = triples;
    out.data = Some(data);
    if !steps.contains(&Stage::Center) {
        return Ok(out);
    }

    let md = stage_center(out.data.as_ref().unwrap(), &out.triples, cfg.tol)?;
    out.log
        .push(format!("center: rank {}, lambda {:.6}", md.rank(), md.lambda));
    save(&mut out, Stage::Center, to_json_string(&md.to_json())?)?;
    out.center = Some(md);
    if !steps.contains(&Stage::Condense) {
        return Ok(out);
    }

    let md = out.center.as_ref().unwrap();
    let pmd = match stage_condense(md, cfg.boson.as_deref())? {
        Some(c) => {
            out.log
                .push(format!("condense: rank {}, {} open slots", c.rank(), c.slots().len()));
            save(&mut out, Stage::Condense, to_json_string(&c)?)?;
            out.condensed = Some(c.clone());
            c
        }
        None => {
            out.log.push("condense: no boson, skipped".into());
            partial_from_modular(md).map_err(|e| e.at("condense"))?
        }
    };
    if !steps.contains(&Stage::Factor) {
        return Ok(out);
    }

    let fac = stage_factor(&pmd, cfg.pointed.as_deref())?;
    out.log.push(format!(
        "factor: pointed rank {}, factor rank {}, kronecker defect {:.2e}",
        fac.pointed.rank(),
        fac.factor.rank(),
        fac.kronecker_defect
    ));
    save(&mut out, Stage::Factor, to_json_string(&fac.factor)?)?;
    out.factorization = Some(fac);
    if !steps.contains(&Stage::Supermodular) {
        return Ok(out);
    }

    let factor = &out.factorization.as_ref().unwrap().factor;
    let (sector, smd, res) = stage_supermodular(factor, cfg.fermion.as_deref(), cfg.tol)?;
    out.log.push(format!(
        "supermodular: sector rank {}, super rank {}, {} candidates",
        sector.rank(),
        smd.rank(),
        res.candidates
    ));
    save(&mut out, Stage::Supermodular, to_json_string(&smd.to_json())?)?;
    out.sector = Some(sector);
    out.super_data = Some(smd);
    out.resolution = Some(res);

    if let Some(target) = &cfg.compare {
        let m = stage_compare(
            out.super_data.as_ref().unwrap(),
            target,
            cfg.allow_conjugation,
            cfg.compare_tol,
        )?;
        out.log.push(format!(
            "compare {target}: matched {}, conjugated {}, max deviation {:.3e}",
            m.matched, m.conjugated, m.max_deviation
        ));
        out.comparison = Some(m);
    }
    Ok(out)
}

/// Reads modular data or partial data (as written by `condense --emit-partial`
/// and `factor`).
pub fn read_partial(path: &Path) -> Result<PartialModularData> {
    let text = fs::read_to_string(path)?;
    if let Ok(p) = serde_json::from_str::<PartialModularData>(&text) {
        return Ok(p);
    }
    let j: ModularDataJson = serde_json::from_str(&text)?;
    partial_from_modular(&ModularData::from_json(&j)?)
}

pub fn read_modular(path: &Path) -> Result<ModularData> {
    let j: ModularDataJson = serde_json::from_str(&fs::read_to_string(path)?)?;
    ModularData::from_json(&j)
}

pub fn read_super(path: &Path) -> Result<SuperModularData> {
    let j: SuperModularDataJson = serde_json::from_str(&fs::read_to_string(path)?)?;
    SuperModularData::from_json(&j)
}

/// Condensation followed by a modular-mode resolution of any open slots.
/// `Err` carries the partial data when resolution is ambiguous.
pub fn condense_and_resolve(
    md: &ModularData,
    boson: Option<&str>,
) -> Result<std::result::Result<ModularData, (PartialModularData, Error)>> {
    let pmd =
        stage_condense(md, boson)?.ok_or_else(|| Error::Condense("no boson to condense".to_string()).at("condense"))?;
    if pmd.slots().is_empty() {
        return pmd.to_modular().map(Ok).map_err(|e| e.at("condense"));
    }
    Ok(match resolve_unknowns(&pmd) {
        Ok((m, _)) => Ok(m),
        Err(e) => Err((pmd, e)),
    })
}

fn real_text(x: f64) -> String {
    complex_text(crate::C64::new(x, 0.0))
}

fn diag_text(name: &str, phases: &[crate::C64]) -> String {
    let items: Vec<String> = phases.iter().map(|&z| phase_text(z)).collect();
    format!("{name} = diag({})", items.join(", "))
}

fn matrix_text(name: &str, rows: usize, entry: impl Fn(usize, usize) -> String) -> String {
    let mut s = format!("{name} =\n");
    for i in 0..rows {
        let row: Vec<String> = (0..rows).map(|j| entry(i, j)).collect();
        let _ = writeln!(s, "  [{}]", row.join(", "));
    }
    s
}

/// Labels, dims, `T` and `S` in human-readable form.
pub fn modular_text(md: &ModularData) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "rank = {}", md.rank());
    let _ = writeln!(s, "lambda = {}", real_text(md.lambda));
    let _ = writeln!(s, "labels = ({})", md.labels.join(", "));
    let dims: Vec<String> = md.dims.iter().map(|&d| real_text(d)).collect();
    let _ = writeln!(s, "d = ({})", dims.join(", "));
    let _ = writeln!(s, "{}", diag_text("T", &md.twists));
    s + &matrix_text("S", md.rank(), |i, j| complex_text(md.s[(i, j)]))
}

pub fn super_text(smd: &SuperModularData) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "rank = {}", smd.rank());
    let pairs: Vec<String> = smd.pairs.iter().map(|p| format!("{{{}, {}}}", p[0], p[1])).collect();
    let _ = writeln!(s, "pairs = ({})", pairs.join(", "));
    let dims: Vec<String> = smd.dims.iter().map(|&d| real_text(d)).collect();
    let _ = writeln!(s, "d = ({})", dims.join(", "));
    let _ = writeln!(s, "{}", diag_text("T2_hat", &smd.t2_hat));
    s + &matrix_text("S_hat", smd.rank(), |i, j| complex_text(smd.s_hat[(i, j)]))
}

pub fn partial_text(pmd: &PartialModularData) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "rank = {}", pmd.rank());
    let _ = writeln!(s, "labels = ({})", pmd.labels.join(", "));
    let dims: Vec<String> = pmd.dims.iter().map(|&d| real_text(d)).collect();
    let _ = writeln!(s, "d = ({})", dims.join(", "));
    let _ = writeln!(s, "{}", diag_text("T", &pmd.twists));
    let _ = writeln!(s, "open slots = {}", pmd.slots().len());
    s + &matrix_text("S", pmd.rank(), |i, j| match pmd.known(i, j) {
        Some(z) => complex_text(z),
        None => "?".to_string(),
    })
}
