use std::fmt::Write as _;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::alt::{alt_proof_check, concavity_instance, ALT_QUADRATURE_NODES};
use super::checks::{corollary1_ratio, duality_monotonicity_check, normalized_theorem_gap};
use super::counter::{two_atom_search, CounterexampleReport};
use super::proof::{
    case1a_step_check, case1b_decomposition_check, case2_conclusion_check, case2_default_depth, case2_identity_check,
    log_t_grid,
};
use crate::expectations::{ce_block_sizes, ce_spectral_averaging, ConditionalExpectation};
use crate::matcore::{
    instance_rng, random_hermitian, random_unitary, sample_psd, sample_psd_pair, InstanceKind, LabRng, PositiveMatrix,
};
use crate::semigroups::{make_pinching_generator, make_unitary_mixing_generator, resolvent_defect_check, Generator};
use crate::{Error, Result};

/// Largest matrix size accepted in a campaign.
pub const MAX_CAMPAIGN_DIM: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    Theorem,
    Duality,
    Case1a,
    Case1b,
    Case2Identity,
    Case2Chain,
    AltProof,
    Concavity,
    Corollary1,
    Corollary2,
    CounterexampleGuard,
}

impl CheckKind {
    pub const ALL: [CheckKind; 11] = [
        CheckKind::Theorem,
        CheckKind::Duality,
        CheckKind::Case1a,
        CheckKind::Case1b,
        CheckKind::Case2Identity,
        CheckKind::Case2Chain,
        CheckKind::AltProof,
        CheckKind::Concavity,
        CheckKind::Corollary1,
        CheckKind::Corollary2,
        CheckKind::CounterexampleGuard,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CheckKind::Theorem => "theorem",
            CheckKind::Duality => "duality",
            CheckKind::Case1a => "case1a",
            CheckKind::Case1b => "case1b",
            CheckKind::Case2Identity => "case2_identity",
            CheckKind::Case2Chain => "case2_chain",
            CheckKind::AltProof => "alt_proof",
            CheckKind::Concavity => "concavity",
            CheckKind::Corollary1 => "corollary1",
            CheckKind::Corollary2 => "corollary2",
            CheckKind::CounterexampleGuard => "counterexample_guard",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.name() == s)
    }

    /// Exponent range on which the check is defined.
    pub fn applies(self, p: f64) -> bool {
        match self {
            CheckKind::Case1a | CheckKind::Case1b => (2.0..=3.0).contains(&p),
            CheckKind::Case2Identity | CheckKind::Case2Chain => p >= 3.0,
            CheckKind::AltProof => (3.0..=4.0).contains(&p),
            CheckKind::Concavity => p > 2.0 && p < 3.0,
            _ => true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CampaignConfig {
    pub seed: u64,
    /// Instances per `(check, dim, p, kind)` cell.
    pub trials: u64,
    pub dims: Vec<usize>,
    /// Exponents for the theorem-side checks, all `>= 2`.
    pub p_grid: Vec<f64>,
    /// Exponents in `[1, 2)` for the two-atom counterexample search.
    pub sub2_p_grid: Vec<f64>,
    pub kinds: Vec<InstanceKind>,
    pub checks: Vec<CheckKind>,
    /// Resolvent parameters for the semigroup cells.
    pub lambdas: Vec<f64>,
    /// Relative shift used where invertibility is required.
    pub eps: f64,
    /// Relative slack for inequality checks.
    pub tol: f64,
    /// Agreement tolerance for finite-difference derivatives.
    pub derivative_tol: f64,
    /// Evaluation budget of each two-atom search.
    pub search_budget: usize,
    /// Adds one deliberately non-positive instance, which must be reported.
    pub inject_fault: bool,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            trials: 20,
            dims: vec![2, 3, 4, 6],
            p_grid: vec![2.0, 2.3, 2.5, 2.7, 3.0, 3.2, 3.5, 4.0, 5.0, 6.8],
            sub2_p_grid: vec![1.0, 1.25, 1.5, 1.75],
            kinds: vec![InstanceKind::Generic, InstanceKind::Singular, InstanceKind::CommutingPair],
            checks: CheckKind::ALL.to_vec(),
            lambdas: vec![0.1, 1.0, 10.0],
            eps: 1e-8,
            tol: 1e-9,
            derivative_tol: 1e-5,
            search_budget: 8192,
            inject_fault: false,
        }
    }
}

impl CampaignConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if let Some(d) = self.dims.iter().find(|&&d| d == 0 || d > MAX_CAMPAIGN_DIM) {
            return bad(format!("dimension {d} outside 1..={MAX_CAMPAIGN_DIM}"));
        }
        if let Some(p) = self.p_grid.iter().find(|&&p| !(p >= 2.0) || !p.is_finite()) {
            return bad(format!("p = {p} in the p grid; theorem cells need finite p >= 2"));
        }
        if let Some(p) = self.sub2_p_grid.iter().find(|&&p| !(1.0..2.0).contains(&p)) {
            return bad(format!("p = {p} in the sub-2 grid; counterexample cells need p ∈ [1, 2)"));
        }
        if let Some(l) = self.lambdas.iter().find(|&&l| !(l > 0.0) || !l.is_finite()) {
            return bad(format!("resolvent parameter {l} must be positive"));
        }
        for (name, v) in [("tol", self.tol), ("eps", self.eps), ("derivative_tol", self.derivative_tol)] {
            if !(v > 0.0) || !v.is_finite() {
                return bad(format!("{name} must be positive, got {v}"));
            }
        }
        Ok(())
    }
}

/// Summary of one `(check, dim, p, kind)` cell.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CellReport {
    pub check: String,
    pub dim: usize,
    pub p: f64,
    pub kind: String,
    pub trials: u64,
    pub min_gap: Option<f64>,
    pub normalized_min_gap: Option<f64>,
    pub median_normalized_gap: Option<f64>,
    pub failures: u64,
    /// Theorem instances with normalized gap below `1e-6` for a
    /// non-commuting pair and `p > 2`; recorded, not asserted.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub near_equalities: Option<u64>,
    /// Most negative normalized `δ`-quadratic form in a concavity cell.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<f64>,
}

/// A failed instance and everything needed to regenerate it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FailureRecord {
    pub check: String,
    pub seed: u64,
    pub trial: u64,
    pub dim: usize,
    pub kind: String,
    pub p: f64,
    pub value: Option<f64>,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GapReport {
    pub seed: u64,
    pub config: CampaignConfig,
    pub instances: u64,
    pub cells: Vec<CellReport>,
    pub failures: Vec<FailureRecord>,
    pub counterexamples: Vec<CounterexampleReport>,
}

pub const CSV_HEADER: &str = "check,dim,p,kind,trials,min_gap,normalized_min_gap,failures";

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:e}")).unwrap_or_default()
}

impl GapReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for c in &self.cells {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                c.check,
                c.dim,
                c.p,
                c.kind,
                c.trials,
                opt(c.min_gap),
                opt(c.normalized_min_gap),
                c.failures
            );
        }
        out
    }

    /// Smallest normalized gap per check, in check order.
    pub fn worst_by_check(&self) -> Vec<(String, f64)> {
        let mut out: Vec<(String, f64)> = Vec::new();
        for c in &self.cells {
            let Some(g) = c.normalized_min_gap else { continue };
            match out.iter_mut().find(|(name, _)| *name == c.check) {
                Some((_, worst)) => *worst = worst.min(g),
                None => out.push((c.check.clone(), g)),
            }
        }
        out
    }
}

struct Outcome {
    gap: f64,
    normalized: f64,
    problems: Vec<String>,
    near_equality: bool,
    witness: Option<f64>,
}

impl Outcome {
    fn new(gap: f64, normalized: f64) -> Self {
        Self { gap, normalized, problems: Vec::new(), near_equality: false, witness: None }
    }

    fn require(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if !ok {
            self.problems.push(what());
        }
    }
}

#[derive(Clone)]
struct CellSpec {
    check: CheckKind,
    dim: usize,
    p: f64,
    kinds: Vec<InstanceKind>,
    label: String,
}

struct Instance {
    seed: u64,
    dim: usize,
    kind: InstanceKind,
    trial: u64,
}

impl Instance {
    fn rng(&self) -> LabRng {
        instance_rng(self.seed, self.dim, self.kind, self.trial)
    }
}

fn random_expectation(dim: usize, rng: &mut LabRng, spectral: bool) -> Result<ConditionalExpectation> {
    if spectral {
        ce_spectral_averaging(&random_hermitian(dim, rng))
    } else {
        let mut sizes = Vec::new();
        let mut left = dim;
        while left > 0 {
            let s = rng.random_range(1..=left);
            sizes.push(s);
            left -= s;
        }
        let u = random_unitary(dim, rng);
        ce_block_sizes(&sizes, Some(&u))
    }
}

fn random_generator(dim: usize, rng: &mut LabRng, mixing: bool) -> Result<Generator> {
    if mixing {
        let count = rng.random_range(1..=3);
        let unitaries = (0..count).map(|_| random_unitary(dim, rng)).collect();
        let rates = (0..count).map(|_| rng.random_range(0.1..2.0)).collect();
        make_unitary_mixing_generator(unitaries, rates)
    } else {
        let spectral = rng.random_bool(0.5);
        make_pinching_generator(random_expectation(dim, rng, spectral)?)
    }
}

fn evaluate(check: CheckKind, inst: &Instance, p: f64, config: &CampaignConfig) -> Result<Outcome> {
    let tol = config.tol;
    let mut rng = inst.rng();
    let (a, b) = sample_psd_pair(inst.dim, inst.kind, &mut rng);
    Ok(match check {
        CheckKind::Theorem => {
            let (gap, normalized) = normalized_theorem_gap(&a, &b, p)?;
            let mut o = Outcome::new(gap, normalized);
            o.require(normalized >= -tol, || format!("normalized gap {normalized:e} below -{tol:e}"));
            if p == 2.0 {
                o.require(normalized.abs() <= 1e-11, || format!("p = 2 gap {normalized:e} is not zero"));
            }
            o.near_equality = p > 2.0 && inst.kind != InstanceKind::CommutingPair && normalized < 1e-6;
            o
        }
        CheckKind::Duality => {
            let r = duality_monotonicity_check(&a, &b, p)?;
            let (_, normalized) = normalized_theorem_gap(&a, &b, p)?;
            let mut o = Outcome::new(r.gap, normalized);
            o.require(normalized >= -tol, || format!("normalized gap {normalized:e}"));
            o.require(r.agreement_residual <= 1e-12, || format!("pairing differs by {:e}", r.agreement_residual));
            o.require(r.norm_residual <= 1e-10, || format!("dual norm residual {:e}", r.norm_residual));
            o
        }
        CheckKind::Case1a => {
            let delta = a;
            let grid = log_t_grid(b.op_norm() + delta.op_norm(), 33);
            let r = case1a_step_check(&b, &delta, p - 2.0, &grid)?;
            let mut o = Outcome::new(r.min_residual * r.scale, r.min_residual);
            o.require(r.min_residual >= -1e-10, || format!("residual {:e} at t = {:e}", r.min_residual, r.worst_t));
            if let Some(i) = &r.integrated {
                let margin = (i.spectral_lhs - i.rhs) / r.scale;
                o.require(margin >= -tol, || format!("integrated margin {margin:e}"));
                if let Some(q) = i.quadrature_lhs {
                    let rel = (q - i.spectral_lhs).abs() / i.spectral_lhs.abs().max(i.rhs).max(f64::MIN_POSITIVE);
                    o.require(rel <= 1e-6, || format!("quadrature off by {rel:e}"));
                }
            }
            o
        }
        CheckKind::Case1b => {
            let r = case1b_decomposition_check(&a, &b, p)?;
            let m = r.min_margin();
            let mut o = Outcome::new(m * r.scale, m);
            o.require(r.identity_residual <= 1e-10, || format!("identity residual {:e}", r.identity_residual));
            o.require(m >= -tol, || format!("margin {m:e}"));
            o
        }
        CheckKind::Case2Identity => {
            let r = case2_identity_check(&a, &b, p, case2_default_depth(p)?)?;
            let mut o = Outcome::new(r.lhs - r.rhs, -r.residual);
            o.require(r.residual <= 1e-9, || format!("identity residual {:e}", r.residual));
            o
        }
        CheckKind::Case2Chain => {
            let r = case2_conclusion_check(&a, &b, p)?;
            let m = r.min_margin();
            let mut o = Outcome::new(m * r.scale, m);
            o.require(m >= -tol, || format!("chain margin {m:e}"));
            o.require(r.terminal_residual <= 1e-10, || format!("terminal residual {:e}", r.terminal_residual));
            o
        }
        CheckKind::AltProof => {
            let r = alt_proof_check(&a, &b, p, config.eps, ALT_QUADRATURE_NODES)?;
            let m = r.min_margin();
            let mut o = Outcome::new(m * r.scale, m);
            o.require(r.representation_residual <= 1e-6, || {
                format!("representation residual {:e} (eps {:e})", r.representation_residual, r.epsilon)
            });
            o.require(m >= -tol, || format!("chain margin {m:e}"));
            o.require(r.jensen_floor >= -1e-9, || format!("operator Jensen floor {:e}", r.jensen_floor));
            o
        }
        CheckKind::Concavity => {
            let t: f64 = rng.random();
            let u: f64 = rng.random();
            let (top, form) = concavity_instance(&a, &b, p, t, u)?;
            let mut o = Outcome::new(-top, -top);
            o.require(top <= 1e-9, || format!("reversed order fails by {top:e}"));
            o.witness = Some(form);
            o
        }
        CheckKind::Corollary1 => {
            let e = random_expectation(inst.dim, &mut rng, inst.trial.is_multiple_of(2))?;
            let r = corollary1_ratio(&a, &e, p)?;
            let mut o = Outcome::new(1.0 - r.ratio, 1.0 - r.ratio);
            o.require(r.ratio <= 1.0 + 1e-10, || format!("ratio {}", r.ratio));
            o.require(r.orthogonality.abs() <= 1e-10, || format!("orthogonality {:e}", r.orthogonality));
            o
        }
        CheckKind::Corollary2 => {
            let g = random_generator(inst.dim, &mut rng, inst.trial.is_multiple_of(2))?;
            let mut o = Outcome::new(f64::INFINITY, f64::INFINITY);
            for &lambda in &config.lambdas {
                let r = resolvent_defect_check(&g, lambda, &a, p)?;
                let scale = r.input_norm.max(f64::MIN_POSITIVE);
                let margin = ((r.input_norm - r.defect_norm) / scale).min(r.cross_term / scale.powf(p));
                o.gap = o.gap.min(margin);
                o.normalized = o.normalized.min(margin);
                o.require(r.holds(p, tol), || format!("λ = {lambda}: {r:?}"));
            }
            o
        }
        CheckKind::CounterexampleGuard => {
            let r = two_atom_search(p, config.search_budget)?;
            let mut o = Outcome::new(1.0 - r.ratio, 1.0 - r.ratio);
            o.require(r.ratio <= 1.0 + 1e-12, || format!("ratio {} at μ = {}, x = {:?}", r.ratio, r.weights[0], r.x));
            o
        }
    })
}

fn run_cell(spec: &CellSpec, config: &CampaignConfig) -> (CellReport, Vec<FailureRecord>) {
    let trials = if spec.check == CheckKind::CounterexampleGuard { 1 } else { config.trials };
    let mut gaps = Vec::new();
    let mut normalized = Vec::new();
    let mut failures = Vec::new();
    let mut near = 0;
    let mut witness: Option<f64> = None;
    let mut count = 0;
    for &kind in &spec.kinds {
        for trial in 0..trials {
            count += 1;
            let inst = Instance { seed: config.seed, dim: spec.dim, kind, trial };
            let record = |value: Option<f64>, detail: String| FailureRecord {
                check: spec.check.name().to_string(),
                seed: config.seed,
                trial,
                dim: spec.dim,
                kind: kind.name().to_string(),
                p: spec.p,
                value,
                detail,
            };
            match evaluate(spec.check, &inst, spec.p, config) {
                Ok(o) => {
                    gaps.push(o.gap);
                    normalized.push(o.normalized);
                    near += o.near_equality as u64;
                    if let Some(w) = o.witness {
                        witness = Some(witness.map_or(w, |v| v.min(w)));
                    }
                    if !o.problems.is_empty() {
                        failures.push(record(Some(o.normalized), o.problems.join("; ")));
                    }
                }
                Err(e) => failures.push(record(None, e.to_string())),
            }
        }
    }
    let min = |v: &[f64]| v.iter().copied().reduce(f64::min);
    let median = {
        let mut sorted = normalized.clone();
        sorted.sort_by(f64::total_cmp);
        sorted.get(sorted.len() / 2).copied()
    };
    let cell = CellReport {
        check: spec.check.name().to_string(),
        dim: spec.dim,
        p: spec.p,
        kind: spec.label.clone(),
        trials: count,
        min_gap: min(&gaps),
        normalized_min_gap: min(&normalized),
        median_normalized_gap: median,
        failures: failures.len() as u64,
        near_equalities: (spec.check == CheckKind::Theorem).then_some(near),
        witness,
    };
    (cell, failures)
}

fn execute(config: &CampaignConfig, specs: Vec<CellSpec>) -> Result<GapReport> {
    config.validate()?;
    let specs = if config.trials == 0 { Vec::new() } else { specs };
    let results: Vec<(CellReport, Vec<FailureRecord>)> = specs.par_iter().map(|s| run_cell(s, config)).collect();
    let mut cells = Vec::with_capacity(results.len());
    let mut failures = Vec::new();
    let mut instances = 0;
    for (cell, f) in results {
        instances += cell.trials;
        cells.push(cell);
        failures.extend(f);
    }
    if config.inject_fault {
        let (cell, record) = injected_fault(config);
        instances += 1;
        cells.push(cell);
        failures.push(record);
    }
    Ok(GapReport { seed: config.seed, config: config.clone(), instances, cells, failures, counterexamples: Vec::new() })
}

/// A positive instance shifted below zero; building it as a positive
/// matrix must fail and the failure must reach the report.
fn injected_fault(config: &CampaignConfig) -> (CellReport, FailureRecord) {
    let dim = config.dims.first().copied().unwrap_or(2);
    let p = config.p_grid.first().copied().unwrap_or(2.0);
    let mut rng = instance_rng(config.seed, dim, InstanceKind::Generic, 0);
    let x = sample_psd(dim, InstanceKind::Generic, &mut rng);
    let corrupted = x.base().shift(-2.0 * x.op_norm().max(1.0));
    let detail = match PositiveMatrix::new(corrupted) {
        Err(e) => format!("injected fault: {e}"),
        Ok(_) => "injected fault was accepted as positive".to_string(),
    };
    let cell = CellReport {
        check: CheckKind::Theorem.name().to_string(),
        dim,
        p,
        kind: "injected".to_string(),
        trials: 1,
        min_gap: None,
        normalized_min_gap: None,
        median_normalized_gap: None,
        failures: 1,
        near_equalities: None,
        witness: None,
    };
    let record = FailureRecord {
        check: CheckKind::Theorem.name().to_string(),
        seed: config.seed,
        trial: 0,
        dim,
        kind: "injected".to_string(),
        p,
        value: None,
        detail,
    };
    (cell, record)
}

fn campaign_cells(config: &CampaignConfig, checks: &[CheckKind]) -> Vec<CellSpec> {
    let mut specs = Vec::new();
    for &check in checks {
        if check == CheckKind::CounterexampleGuard {
            for &p in &config.p_grid {
                specs.push(CellSpec { check, dim: 2, p, kinds: vec![InstanceKind::Generic], label: "two-atom".into() });
            }
            continue;
        }
        for &dim in &config.dims {
            for &p in config.p_grid.iter().filter(|&&p| check.applies(p)) {
                for &kind in &config.kinds {
                    specs.push(CellSpec { check, dim, p, kinds: vec![kind], label: kind.name().to_string() });
                }
            }
        }
    }
    specs
}

/// Runs every configured check over `dims × p_grid × kinds`, plus the
/// two-atom searches over the sub-2 grid. Deterministic in the seed; cells
/// run in parallel and are reported in a fixed order.
pub fn run_campaign(config: &CampaignConfig) -> Result<GapReport> {
    let mut report = execute(config, campaign_cells(config, &config.checks))?;
    if config.trials > 0 {
        report.counterexamples = config
            .sub2_p_grid
            .par_iter()
            .map(|&p| two_atom_search(p, config.search_budget))
            .collect::<Result<_>>()?;
    }
    Ok(report)
}

/// The semigroup cells alone.
pub fn corollary2_check(config: &CampaignConfig) -> Result<GapReport> {
    execute(config, campaign_cells(config, &[CheckKind::Corollary2]))
}

/// One theorem cell per `(dim, p)` with all configured kinds pooled.
pub fn run_sweep(config: &CampaignConfig) -> Result<GapReport> {
    let label = config.kinds.iter().map(|k| k.name()).collect::<Vec<_>>().join("+");
    let mut specs = Vec::new();
    for &dim in &config.dims {
        for &p in &config.p_grid {
            specs.push(CellSpec { check: CheckKind::Theorem, dim, p, kinds: config.kinds.clone(), label: label.clone() });
        }
    }
    execute(config, specs)
}
