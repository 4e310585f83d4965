//! One function per subcommand, each run once per prime of the sweep.

use demuskin::abelian::{build_complex, cohomology, h0_torsion_probe, H0Verdict};
use demuskin::lifting::{classify, LiftContext, LiftFailure, ObstructionTag};
use demuskin::linalg::{dot, Matrix};
use demuskin::nilpotent::{d2_nilpotent, gram_matrix, kernel_and_kld, Cochain1, KldReport};
use demuskin::sampling::{random_mod_p_cocycle, random_vector};
use demuskin::systems::validate_nilpotent;
use demuskin::unipotent::{power_closed_form, power_iterated, GroupElement, ShortRootCoords};
use demuskin::{ModuleProfile, NilpotentSystem, RingModulus};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{RunConfig, SystemKind};
use crate::report::InstanceReport;
use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum CommandKind {
    Cohomology,
    Mr2,
    Gram,
    PowerCheck,
    Lift,
    DeltaProbe,
    Validate,
}

impl CommandKind {
    pub fn name(self) -> &'static str {
        match self {
            CommandKind::Cohomology => "cohomology",
            CommandKind::Mr2 => "mr2",
            CommandKind::Gram => "gram",
            CommandKind::PowerCheck => "power-check",
            CommandKind::Lift => "lift",
            CommandKind::DeltaProbe => "delta-probe",
            CommandKind::Validate => "validate",
        }
    }

    pub fn notes(self) -> Vec<String> {
        match self {
            CommandKind::Lift => vec![
                "lifts are to Z/p^target, not to characteristic 0".into(),
                "works over a single field; no averaging over a Galois group".into(),
            ],
            CommandKind::DeltaProbe => vec!["dimensions are probed at finite precision only".into()],
            _ => Vec::new(),
        }
    }

    pub fn run(self, cfg: &RunConfig, p: u64) -> Result<InstanceReport, CliError> {
        match self {
            CommandKind::Cohomology => cmd_cohomology(cfg, p),
            CommandKind::Mr2 => cmd_mr2(cfg, p),
            CommandKind::Gram => cmd_gram(cfg, p),
            CommandKind::PowerCheck => cmd_power_check(cfg, p),
            CommandKind::Lift => cmd_lift(cfg, p),
            CommandKind::DeltaProbe => cmd_delta_probe(cfg, p),
            CommandKind::Validate => cmd_validate(cfg, p),
        }
    }
}

fn instance<T: Serialize>(p: u64, passed: bool, summary: String, details: &T) -> InstanceReport {
    InstanceReport { p, passed, summary, details: serde_json::to_value(details).expect("details serialize") }
}

/// System and presentation at `precision`, with `q = p^precision` unless configured.
fn setup(cfg: &RunConfig, p: u64, precision: u32, index: u64) -> Result<(NilpotentSystem, Vec<i64>), CliError> {
    let m = RingModulus::new(p, precision)?;
    let levi = cfg.levi_values(p, index, &m);
    Ok((cfg.system(p, precision, &levi)?, levi))
}

#[derive(Serialize)]
struct PieceReport {
    name: &'static str,
    rank: usize,
    h0: ModuleProfile,
    h1: ModuleProfile,
    h2: ModuleProfile,
    dims: [usize; 3],
    euler_length: i64,
    euler_expected: i64,
}

#[derive(Serialize)]
struct CohomologyDetails {
    levi: Vec<i64>,
    q: u64,
    pieces: Vec<PieceReport>,
}

fn cmd_cohomology(cfg: &RunConfig, p: u64) -> Result<InstanceReport, CliError> {
    let (sys, levi) = setup(cfg, p, cfg.s, 0)?;
    let pres = cfg.presentation(p, cfg.s)?;
    let mut pieces = Vec::new();
    for (name, piece) in [("ad", sys.ad().clone()), ("centre", sys.center())] {
        let h = cohomology(&build_complex(&pres, &piece)?);
        pieces.push(PieceReport {
            name,
            rank: piece.rank(),
            dims: [h.h0.dim_mod_p(), h.h1.dim_mod_p(), h.h2.dim_mod_p()],
            euler_length: h.euler_length(),
            euler_expected: -((cfg.n * piece.rank()) as i64) * cfg.s as i64,
            h0: h.h0,
            h1: h.h1,
            h2: h.h2,
        });
    }
    let passed = pieces.iter().all(|pc| pc.euler_length == pc.euler_expected);
    let summary = pieces
        .iter()
        .map(|pc| format!("{} dims {:?}, Euler {} (expected {})", pc.name, pc.dims, pc.euler_length, pc.euler_expected))
        .collect::<Vec<_>>()
        .join("; ");
    Ok(instance(p, passed, summary, &CohomologyDetails { levi, q: pres.q(), pieces }))
}

#[derive(Serialize)]
struct GramEntry {
    levi: Vec<i64>,
    anti_triangular: bool,
    determinant: u64,
    mr2: bool,
    block_map: Vec<String>,
}

fn gram_entry(cfg: &RunConfig, p: u64, index: u64) -> Result<(GramEntry, Matrix), CliError> {
    let (sys, levi) = setup(cfg, p, cfg.s, index)?;
    let pres = cfg.presentation(p, cfg.s)?;
    let g = gram_matrix(&sys, &pres)?;
    let entry = GramEntry {
        levi,
        anti_triangular: g.anti_triangular,
        determinant: g.determinant,
        mr2: g.mr2_verdict,
        block_map: g.block_map(),
    };
    Ok((entry, g.matrix))
}

fn instance_count(cfg: &RunConfig, default: usize) -> usize {
    if cfg.levi.is_some() || cfg.system == SystemKind::Custom {
        1
    } else {
        cfg.trials.unwrap_or(default)
    }
}

fn cmd_mr2(cfg: &RunConfig, p: u64) -> Result<InstanceReport, CliError> {
    let count = instance_count(cfg, 20);
    let entries = (0..count as u64)
        .into_par_iter()
        .map(|i| gram_entry(cfg, p, i).map(|(e, _)| e))
        .collect::<Result<Vec<_>, _>>()?;
    let true_count = entries.iter().filter(|e| e.mr2).count();
    let anti = entries.iter().filter(|e| e.anti_triangular).count();
    let summary = format!("MR2 true for {true_count}/{count}, anti-triangular {anti}/{count}");
    Ok(instance(p, true_count == count, summary, &entries))
}

#[derive(Serialize)]
struct GramDetails {
    #[serde(flatten)]
    entry: GramEntry,
    matrix: Vec<Vec<u64>>,
}

fn cmd_gram(cfg: &RunConfig, p: u64) -> Result<InstanceReport, CliError> {
    let (entry, matrix) = gram_entry(cfg, p, 0)?;
    let summary = format!(
        "determinant {}, anti-triangular {}, blocks {}",
        entry.determinant,
        entry.anti_triangular,
        entry.block_map.join("/")
    );
    let passed = entry.mr2;
    Ok(instance(p, passed, summary, &GramDetails { entry, matrix: matrix.row_vectors() }))
}

#[derive(Serialize)]
struct PowerDetails {
    precision: u32,
    trials: usize,
    closed_form_checked: usize,
    /// Closed-form coefficients with a denominator divisible by `p`.
    closed_form_undefined: usize,
    closed_form_mismatches: Vec<(GroupElement, u64)>,
    pow_p_failures: Vec<GroupElement>,
}

fn random_element<R: Rng>(rng: &mut R, sys: &NilpotentSystem) -> GroupElement {
    let m = sys.modulus();
    let u = random_vector(rng, sys.m_a(), m);
    GroupElement {
        levi: rng.gen_range(0..m.order()),
        u: demuskin::nilpotent::LieValue::new(u, rng.gen_range(0..m.order())),
    }
}

fn closed_form_power(sys: &NilpotentSystem, g: &GroupElement, q: u64) -> Result<Option<GroupElement>, CliError> {
    let coords = ShortRootCoords::from_element(sys, g)?;
    match power_closed_form(sys.modulus(), &coords, q) {
        Ok(c) => Ok(Some(c.to_element(sys)?)),
        Err(demuskin::Error::InvalidInput(_)) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

fn cmd_power_check(cfg: &RunConfig, p: u64) -> Result<InstanceReport, CliError> {
    if cfg.system != SystemKind::G2Short {
        return Err(CliError::Invalid("power-check needs the g2-short system".into()));
    }
    let trials = cfg.trials.unwrap_or(100);
    let zeros = vec![0; cfg.n + 2];
    let sys = cfg.system(p, cfg.s, &zeros)?;
    let sys1 = cfg.system(p, 1, &zeros)?;
    let mut rng = cfg.rng(p, 0);
    let mut d = PowerDetails {
        precision: cfg.s,
        trials,
        closed_form_checked: 0,
        closed_form_undefined: 0,
        closed_form_mismatches: Vec::new(),
        pow_p_failures: Vec::new(),
    };
    for _ in 0..trials {
        let g = random_element(&mut rng, &sys);
        let q = rng.gen_range(1..=100);
        match closed_form_power(&sys, &g, q)? {
            Some(c) => {
                d.closed_form_checked += 1;
                if c != power_iterated(&sys, &g, q)? {
                    d.closed_form_mismatches.push((g, q));
                }
            }
            None => d.closed_form_undefined += 1,
        }
        let h = random_element(&mut rng, &sys1);
        let mut ok = power_iterated(&sys1, &h, p)?.is_identity();
        if let Some(c) = closed_form_power(&sys1, &h, p)? {
            ok &= c.is_identity();
        }
        if !ok {
            d.pow_p_failures.push(h);
        }
    }
    let passed = d.closed_form_mismatches.is_empty() && d.pow_p_failures.is_empty();
    let summary = format!(
        "closed form matched {}/{} (undefined {}), g^p = id failed for {}/{trials}",
        d.closed_form_checked - d.closed_form_mismatches.len(),
        d.closed_form_checked,
        d.closed_form_undefined,
        d.pow_p_failures.len()
    );
    Ok(instance(p, passed, summary, &d))
}

#[derive(Serialize)]
struct LiftEntry {
    x_bar: Vec<u64>,
    y_bar: Vec<u64>,
    succeeded: bool,
    precision: u32,
    used_quadratic: bool,
    failure: Option<LiftFailure>,
    /// `d2 = 0` recomputed through the relator at the reached precision.
    certificate_ok: bool,
    /// The failure's obstruction class rechecked against the complex.
    obstruction_verified: Option<bool>,
}

#[derive(Serialize)]
struct LiftDetails {
    levi: Vec<i64>,
    target: u32,
    classification: demuskin::lifting::ObstructionCase,
    entries: Vec<LiftEntry>,
}

fn verify_failure(ctx: &LiftContext, x_bar: &[u64], failure: &LiftFailure) -> bool {
    let cx = ctx.complex();
    let f = cx.modulus().residue_field();
    match failure {
        LiftFailure::Ad { level, functional, value } => {
            let kills = ctx.z_image(*level).iter().all(|z| dot(functional, z, &f) == 0);
            *value != 0 && kills && dot(functional, x_bar, &f) == *value
        }
        LiftFailure::Center { residue, .. } | LiftFailure::Degenerate { residue, .. } => {
            *residue != 0 && cx.center().d2().row(0).iter().all(|&c| c % f.p() == 0)
        }
    }
}

fn cmd_lift(cfg: &RunConfig, p: u64) -> Result<InstanceReport, CliError> {
    let target = cfg.target_precision.unwrap_or(4);
    let trials = cfg.trials.unwrap_or(50);
    let (sys, levi) = setup(cfg, p, target, 0)?;
    let pres = cfg.presentation(p, target)?;
    let classification = classify(&sys, &pres)?;
    let ctx = LiftContext::new(&sys, &pres, target)?;
    let width = ctx.complex().c1_dim();
    let gens = pres.num_generators();

    let mut rng = cfg.rng(p, 1);
    let mut inputs = vec![(vec![0; width], vec![0; gens])];
    let mut attempts = 0;
    while inputs.len() <= trials && attempts < 20 * (trials + 1) {
        attempts += 1;
        if let Some(c) = random_mod_p_cocycle(&mut rng, ctx.complex()) {
            inputs.push(c);
        }
    }
    let entries = inputs
        .par_iter()
        .map(|(x, y)| -> Result<LiftEntry, CliError> {
            let out = ctx.lift(x, y)?;
            let st = &out.state;
            let sys_k = sys.reduce_to(st.precision)?;
            let cert = d2_nilpotent(&sys_k, &pres, &Cochain1::from_parts(sys.m_a(), &st.x, &st.y))?;
            let reduces = st.x.iter().zip(x).chain(st.y.iter().zip(y)).all(|(&a, &b)| a % p == b);
            Ok(LiftEntry {
                x_bar: x.clone(),
                y_bar: y.clone(),
                succeeded: out.succeeded(),
                precision: st.precision,
                used_quadratic: st.used_quadratic,
                obstruction_verified: out.failure.as_ref().map(|fl| verify_failure(&ctx, x, fl)),
                failure: out.failure,
                certificate_ok: cert.is_zero() && reduces,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;

    let lifted = entries.iter().filter(|e| e.succeeded).count();
    let certified = entries.iter().all(|e| e.certificate_ok);
    let failures_verified = entries.iter().all(|e| e.obstruction_verified != Some(false));
    let predicted = classification.tag == ObstructionTag::OutsideTheoremHypotheses;
    let passed = certified && (lifted == entries.len() || (predicted && failures_verified));
    let summary = format!(
        "{:?}; {lifted}/{} lifted to p^{target} (first entry is the zero cocycle), certificates {}",
        classification.tag,
        entries.len(),
        if certified { "ok" } else { "FAILED" }
    );
    Ok(instance(p, passed, summary, &LiftDetails { levi, target, classification, entries }))
}

#[derive(Serialize)]
struct DeltaDetails {
    levi: Vec<i64>,
    max_precision: u32,
    mr2: bool,
    levels: Vec<KldReport>,
    radical_bound_ok: bool,
    /// `K` has the same dimension at every level; only claimed under MR2.
    stabilized: Option<bool>,
    /// The radical is all of the mod-p image of `Z^1` at the top level.
    radical_is_z: bool,
    mr1_proxy: Option<H0Verdict>,
}

fn cmd_delta_probe(cfg: &RunConfig, p: u64) -> Result<InstanceReport, CliError> {
    let top = cfg.target_precision.unwrap_or(3);
    let (sys, levi) = setup(cfg, p, top, 0)?;
    let pres = cfg.presentation(p, top)?;
    build_complex(&pres, sys.ad())?;
    let mr2 = gram_matrix(&sys, &pres)?.mr2_verdict;
    let levels = (1..=top).map(|s| kernel_and_kld(&sys, &pres, s)).collect::<Result<Vec<_>, _>>()?;
    let radical_bound_ok = levels.iter().all(|l| l.radical_dim <= sys.m_a());
    let stabilized = mr2.then(|| levels.windows(2).all(|w| w[0].kld_dim == w[1].kld_dim));
    let last = levels.last().expect("at least one level");
    let radical_is_z = last.radical_dim == last.z_dim;
    let mr1_proxy = if top >= 2 { Some(h0_torsion_probe(&pres, sys.ad(), top)?.verdict) } else { None };
    let passed = mr2 && radical_bound_ok && stabilized == Some(true);
    let radicals: Vec<usize> = levels.iter().map(|l| l.radical_dim).collect();
    let summary = format!(
        "MR2 {mr2}, radical dims {radicals:?} (bound {}), stabilized {}, MR1 proxy {}",
        sys.m_a(),
        stabilized.map_or("not claimed".to_string(), |b| b.to_string()),
        mr1_proxy.map_or("skipped".to_string(), |v| format!("{v:?}"))
    );
    Ok(instance(
        p,
        passed,
        summary,
        &DeltaDetails { levi, max_precision: top, mr2, levels, radical_bound_ok, stabilized, radical_is_z, mr1_proxy },
    ))
}

#[derive(Serialize)]
struct ValidateDetails {
    levi: Vec<i64>,
    validation: demuskin::systems::ValidationReport,
    relator_acts_trivially: bool,
    relator_error: Option<String>,
}

fn cmd_validate(cfg: &RunConfig, p: u64) -> Result<InstanceReport, CliError> {
    let (sys, levi) = setup(cfg, p, cfg.s, 0)?;
    let pres = cfg.presentation(p, cfg.s)?;
    let validation = validate_nilpotent(&sys);
    let relator = build_complex(&pres, sys.ad()).and_then(|_| build_complex(&pres, &sys.center()));
    let relator_error = relator.err().map(|e| e.to_string());
    let relator_acts_trivially = relator_error.is_none();
    let passed = validation.passed() && relator_acts_trivially;
    let summary = format!(
        "unitriangularizable {}, order p {}, antisymmetric {:?}, equivariant {:?}, relator ok {relator_acts_trivially}",
        validation.unitriangularizable,
        validation.order_p.iter().all(|&b| b),
        validation.bracket_antisymmetric,
        validation.equivariant
    );
    Ok(instance(p, passed, summary, &ValidateDetails { levi, validation, relator_acts_trivially, relator_error }))
}
