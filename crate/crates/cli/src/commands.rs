//! One function per analysis. Each returns its JSON document, its CSV table
//! and the headline numbers a sweep records.

use cavsqueeze_core::evolution::{compare_level, margin_ladder};
use cavsqueeze_core::fock::HilbertLayout;
use cavsqueeze_core::inout::{analyze, output_state_description, output_variances, spectral_variances, DriveParams, OutputState};
use cavsqueeze_core::params::{
    coherence_report, derive_effective, dissipation_estimate, regime_report, AtomSite, ConditionReport, EffectiveModel,
    Hierarchy, PhysicalParams, RegimeReport,
};
use cavsqueeze_core::{Error, C64};
use serde::{Deserialize, Serialize};

use crate::config::{CommandName, DriveOmega, LevelName, RunConfig};
use crate::error::CliError;
use crate::output::{to_json, Cell, Cplx, EffectiveSummary, Ext, Table};

/// Everything a command produced, before anything is written.
#[derive(Debug, Clone)]
pub struct CommandOutput {
    pub command: CommandName,
    pub json: String,
    pub table: Table,
    /// Scalar results recorded per point by a sweep.
    pub headline: Vec<(String, Cell)>,
    pub gate_failures: Vec<String>,
    pub warnings: Vec<String>,
    pub banner: Option<String>,
    pub text: String,
    pub effective: Option<EffectiveSummary>,
}

pub fn run(command: CommandName, cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    match command {
        CommandName::Validate => validate(cfg),
        CommandName::Effective => effective(cfg),
        CommandName::Simulate => simulate(cfg),
        CommandName::Inout => inout(cfg),
    }
}

struct Model {
    params: PhysicalParams,
    sites: Vec<AtomSite>,
    model: EffectiveModel,
}

fn model(cfg: &RunConfig) -> Result<Model, CliError> {
    let params = cfg.params()?;
    let sites = cfg.sites()?;
    let model = derive_effective(&params, &sites)?;
    Ok(Model { params, sites, model })
}

fn summary(m: &Model, regime_ok: bool) -> EffectiveSummary {
    EffectiveSummary {
        n_atoms: m.sites.len(),
        omega: m.model.omega_eff.into(),
        delta_tilde: m.model.delta_tilde,
        xi: m.model.xi.into(),
        condition_relative: m.model.condition.relative,
        regime_ok,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeRow {
    pub check: String,
    pub hierarchy: String,
    pub actual: Ext,
    pub required: f64,
    pub ok: bool,
}

fn regime_rows(r: &RegimeReport) -> Vec<RegimeRow> {
    r.checks
        .iter()
        .map(|c| RegimeRow {
            check: c.name.clone(),
            hierarchy: match c.hierarchy {
                Hierarchy::Dispersive => "dispersive",
                Hierarchy::TimeAveraging => "time-averaging",
            }
            .into(),
            actual: c.actual.into(),
            required: c.required,
            ok: c.ok,
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionRow {
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    pub relative: f64,
    pub delta_tilde: f64,
    pub gate: f64,
    pub ok: bool,
}

fn condition_row(c: &ConditionReport, gate: f64) -> ConditionRow {
    ConditionRow {
        lhs: c.lhs,
        rhs: c.rhs,
        residual: c.residual,
        relative: c.relative,
        delta_tilde: c.delta_tilde,
        gate,
        ok: c.relative < gate,
    }
}

/// Regime report at the configured `τ`; an error when `τ` is not positive.
fn regime_at_tau(cfg: &RunConfig, m: &Model) -> Result<RegimeReport, CliError> {
    if !(m.params.tau > 0.0) {
        return Err(CliError::Config("[parameters]: `tau` must be positive for the regime checks".into()));
    }
    Ok(regime_report(&m.params, &m.sites, m.params.tau, cfg.gates.margin())?)
}

fn gate_messages(regime: &RegimeReport, cond: &ConditionRow) -> Vec<String> {
    let mut out: Vec<String> = regime
        .failures()
        .map(|c| {
            let actual = c.actual.finite().map_or("inf".to_string(), |x| format!("{x:.6e}"));
            format!("regime check `{}` = {actual} below {}", c.name, c.required)
        })
        .collect();
    if !cond.ok {
        out.push(format!("matching condition residual {:.6e} (relative) exceeds {:.1e}", cond.relative, cond.gate));
    }
    out
}

fn text_table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for r in rows {
        for (w, c) in widths.iter_mut().zip(r) {
            *w = (*w).max(c.len());
        }
    }
    let line = |cells: Vec<&str>| -> String {
        let padded: Vec<String> = cells.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
        padded.join("  ").trim_end().to_string() + "\n"
    };
    let mut out = line(header.to_vec());
    out += &line(widths.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>().iter().map(String::as_str).collect());
    for r in rows {
        out += &line(r.iter().map(String::as_str).collect());
    }
    out
}

// ---------------------------------------------------------------- validate

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoherenceRow {
    pub axial: f64,
    pub laser_angular: f64,
    pub laser_ordinary: f64,
    pub threshold: f64,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidateReport {
    pub n_atoms: usize,
    pub tau: f64,
    pub margin: f64,
    pub regime: Vec<RegimeRow>,
    pub condition: ConditionRow,
    pub coherence: Option<CoherenceRow>,
    pub ok: bool,
}

pub fn validate(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let m = model(cfg)?;
    let regime = regime_at_tau(cfg, &m)?;
    let cond = condition_row(&m.model.condition, cfg.gates.condition());
    let mut failures = gate_messages(&regime, &cond);
    let coherence = match (cfg.geometry()?, cfg.geometry.as_ref().and_then(|g| g.speed_of_light)) {
        (Some(geom), Some(c)) => {
            let r = coherence_report(&geom, m.params.nu_1, m.params.nu_2, c.0, cfg.gates.coherence_threshold())?;
            if !r.ok {
                failures.push(format!(
                    "coherence: d|q_a - q_b| = {:.3e}, w|nu_1 - nu_2|/c = {:.3e}, threshold {}",
                    r.axial, r.laser_angular, r.threshold
                ));
            }
            Some(CoherenceRow {
                axial: r.axial,
                laser_angular: r.laser_angular,
                laser_ordinary: r.laser_ordinary,
                threshold: r.threshold,
                ok: r.ok,
            })
        }
        _ => None,
    };
    let report = ValidateReport {
        n_atoms: m.sites.len(),
        tau: m.params.tau,
        margin: cfg.gates.margin(),
        regime: regime_rows(&regime),
        condition: cond.clone(),
        coherence: coherence.clone(),
        ok: failures.is_empty(),
    };

    let mut table = Table::new(&["check", "group", "actual", "required", "ok"]);
    let mut text_rows = Vec::new();
    for r in &report.regime {
        table.push(vec![r.check.as_str().into(), r.hierarchy.as_str().into(), r.actual.into(), r.required.into(), r.ok.into()]);
        let actual = r.actual.finite().map_or("inf".into(), |x| format!("{x:.6e}"));
        text_rows.push(vec![r.check.clone(), r.hierarchy.clone(), actual, format!(">= {}", r.required), ok_text(r.ok)]);
    }
    table.push(vec!["condition residual / |deltaT|".into(), "condition".into(), cond.relative.into(), cond.gate.into(), cond.ok.into()]);
    text_rows.push(vec![
        "condition residual / |deltaT|".into(),
        "condition".into(),
        format!("{:.6e}", cond.relative),
        format!("< {:.1e}", cond.gate),
        ok_text(cond.ok),
    ]);
    if let Some(c) = &coherence {
        for (name, v) in [("d |q_a - q_b|", c.axial), ("w |nu_1 - nu_2| / c", c.laser_angular)] {
            let ok = v < c.threshold;
            table.push(vec![name.into(), "coherence".into(), v.into(), c.threshold.into(), ok.into()]);
            text_rows.push(vec![name.into(), "coherence".into(), format!("{v:.6e}"), format!("< {}", c.threshold), ok_text(ok)]);
        }
    }
    let mut text = text_table(&["check", "group", "actual", "required", "status"], &text_rows);
    text += &format!("\n{} gate(s) failed\n", failures.len());

    let regime_ok = regime.ok();
    Ok(CommandOutput {
        command: CommandName::Validate,
        json: to_json(&report)?,
        table,
        headline: vec![
            ("ok".into(), report.ok.into()),
            ("condition_relative".into(), cond.relative.into()),
            ("dispersive_min_ratio".into(), regime.min_ratio(Hierarchy::Dispersive).into()),
            ("time_averaging_min_ratio".into(), regime.min_ratio(Hierarchy::TimeAveraging).into()),
        ],
        gate_failures: failures,
        warnings: Vec::new(),
        banner: None,
        text,
        effective: Some(summary(&m, regime_ok)),
    })
}

fn ok_text(ok: bool) -> String {
    if ok { "pass" } else { "FAIL" }.into()
}

// --------------------------------------------------------------- effective

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spread {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct XiRow {
    pub tau: f64,
    pub xi: Cplx,
    pub abs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub scale: f64,
    pub n_atoms: f64,
    pub omega: Cplx,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseRow {
    pub n_bar: f64,
    pub tau_diss: Ext,
    pub n_gamma: Ext,
    pub xi_max: Option<f64>,
    pub squeezing_fraction: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectiveReport {
    pub n_atoms: usize,
    pub delta_k: Spread,
    pub delta_tilde: f64,
    pub omega: Cplx,
    pub omega_abs: f64,
    pub omega_per_atom: Cplx,
    pub condition: ConditionRow,
    pub xi: Vec<XiRow>,
    pub extrapolation: Vec<ScalingRow>,
    pub noise: Option<NoiseRow>,
}

pub fn effective(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let m = model(cfg)?;
    let n = m.sites.len();
    let dk = &m.model.delta_k;
    let spread = match n {
        0 => Spread { min: 0.0, max: 0.0, mean: 0.0 },
        _ => Spread {
            min: dk.iter().copied().fold(f64::INFINITY, f64::min),
            max: dk.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            mean: dk.iter().sum::<f64>() / n as f64,
        },
    };
    let omega = m.model.omega_eff;
    let taus = match &cfg.effective.tau {
        Some(g) => g.values()?,
        None => vec![m.params.tau],
    };
    let xi: Vec<XiRow> = taus
        .iter()
        .map(|&tau| {
            let x = C64::new(0.0, tau) * omega;
            XiRow { tau, xi: x.into(), abs: x.norm() }
        })
        .collect();
    let per_atom = if n == 0 { C64::new(0.0, 0.0) } else { omega / n as f64 };
    let scales: Vec<f64> = match &cfg.effective.scale_n {
        Some(v) => v.iter().map(|s| s.0).collect(),
        None => vec![1.0, 2.0, 10.0],
    };
    let extrapolation = scales
        .iter()
        .map(|&s| ScalingRow { scale: s, n_atoms: s * n as f64, omega: (omega * s).into() })
        .collect();
    let noise = if m.params.kappa() > 0.0 {
        let e = dissipation_estimate(&m.params, &m.sites, m.model.xi)?;
        Some(NoiseRow {
            n_bar: e.n_bar,
            tau_diss: e.tau_diss.into(),
            n_gamma: e.n_gamma.into(),
            xi_max: e.xi_max.map(|x| x.xi_max),
            squeezing_fraction: e.xi_max.map(|x| x.squeezing_fraction),
        })
    } else {
        None
    };
    let cond = condition_row(&m.model.condition, cfg.gates.condition());
    let (regime_ok, failures) = if m.params.tau > 0.0 {
        let r = regime_at_tau(cfg, &m)?;
        (r.ok(), gate_messages(&r, &cond))
    } else {
        (false, gate_messages(&RegimeReport::default(), &cond))
    };
    let report = EffectiveReport {
        n_atoms: n,
        delta_k: spread,
        delta_tilde: m.model.delta_tilde,
        omega: omega.into(),
        omega_abs: omega.norm(),
        omega_per_atom: per_atom.into(),
        condition: cond,
        xi,
        extrapolation,
        noise,
    };
    let mut table = Table::new(&["tau", "xi_re", "xi_im", "xi_abs"]);
    for r in &report.xi {
        table.push(vec![r.tau.into(), r.xi.re.into(), r.xi.im.into(), r.abs.into()]);
    }
    let mut text = text_table(
        &["quantity", "value"],
        &[
            vec!["atoms".into(), n.to_string()],
            vec!["delta_k min / max".into(), format!("{:.12e} / {:.12e}", report.delta_k.min, report.delta_k.max)],
            vec!["deltaT".into(), format!("{:.12e}", report.delta_tilde)],
            vec!["Omega".into(), format!("{:.12e} {:+.12e}i", omega.re, omega.im)],
            vec!["Omega per atom".into(), format!("{:.12e} {:+.12e}i", per_atom.re, per_atom.im)],
            vec!["condition residual / |deltaT|".into(), format!("{:.6e}", report.condition.relative)],
        ],
    );
    for r in &report.xi {
        text += &format!("xi(tau = {}) = {:.12e} {:+.12e}i\n", r.tau, r.xi.re, r.xi.im);
    }
    let headline = vec![
        ("omega_re".into(), omega.re.into()),
        ("omega_im".into(), omega.im.into()),
        ("omega_abs".into(), omega.norm().into()),
        ("delta_tilde".into(), m.model.delta_tilde.into()),
        ("xi_abs".into(), m.model.xi.norm().into()),
        ("condition_relative".into(), report.condition.relative.into()),
    ];
    Ok(CommandOutput {
        command: CommandName::Effective,
        json: to_json(&report)?,
        table,
        headline,
        gate_failures: failures,
        warnings: Vec::new(),
        banner: None,
        text,
        effective: Some(summary(&m, regime_ok)),
    })
}

// ---------------------------------------------------------------- simulate

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateRow {
    pub tau: f64,
    pub xi_abs: f64,
    pub infidelity: f64,
    pub leakage: f64,
    pub excited_population: f64,
    pub var_x: f64,
    pub var_y: f64,
    /// Principal (minimum) quadrature variance; `e^{-2|xi|}/4` for the ideal state.
    pub var_min: f64,
    pub n_a: f64,
    pub n_b: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LadderRow {
    pub margin: f64,
    pub n_atoms: usize,
    pub tau: f64,
    pub omega: Cplx,
    pub infidelity: f64,
    pub leakage: f64,
    pub excited_population: f64,
    pub regime_ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum SimulateReport {
    Grid { level: String, n_max: usize, n_max_b: usize, omega: Cplx, rows: Vec<SimulateRow>, regime_ok: bool },
    Ladder { n_max: usize, xi_target: f64, rows: Vec<LadderRow> },
}

fn level_label(l: LevelName) -> &'static str {
    match l {
        LevelName::I => "I",
        LevelName::II => "II",
        LevelName::III => "III",
        LevelName::IvFull => "IV",
        LevelName::IvReduced => "IV_reduced",
    }
}

pub fn simulate(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let sim = cfg.simulation.as_ref().ok_or_else(|| CliError::Config("simulate needs a [simulation] block".into()))?;
    if let Some(ladder) = &sim.ladder {
        let margins: Vec<f64> = ladder.margins.iter().map(|x| x.0).collect();
        let rows: Vec<LadderRow> = margin_ladder(&margins, ladder.n_atoms, ladder.xi_target.0, sim.n_max)?
            .into_iter()
            .map(|p| LadderRow {
                margin: p.margin,
                n_atoms: p.n_atoms,
                tau: p.tau,
                omega: p.omega_eff.into(),
                infidelity: p.infidelity,
                leakage: p.leakage,
                excited_population: p.excited_population,
                regime_ok: p.regime_ok,
            })
            .collect();
        let mut table =
            Table::new(&["margin", "n_atoms", "tau", "omega_re", "omega_im", "infidelity", "leakage", "excited_population", "regime_ok"]);
        let mut text_rows = Vec::new();
        for r in &rows {
            table.push(vec![
                r.margin.into(),
                r.n_atoms.into(),
                r.tau.into(),
                r.omega.re.into(),
                r.omega.im.into(),
                r.infidelity.into(),
                r.leakage.into(),
                r.excited_population.into(),
                r.regime_ok.into(),
            ]);
            text_rows.push(vec![format!("{}", r.margin), format!("{:.6e}", r.tau), format!("{:.6e}", r.infidelity), ok_text(r.regime_ok)]);
        }
        let headline = rows.iter().map(|r| (format!("infidelity@margin={}", r.margin), Cell::from(r.infidelity))).collect();
        let report = SimulateReport::Ladder { n_max: sim.n_max, xi_target: ladder.xi_target.0, rows };
        return Ok(CommandOutput {
            command: CommandName::Simulate,
            json: to_json(&report)?,
            table,
            headline,
            gate_failures: Vec::new(),
            warnings: Vec::new(),
            banner: None,
            text: text_table(&["margin", "tau", "infidelity", "regime"], &text_rows),
            effective: None,
        });
    }

    let m = model(cfg)?;
    let n_max_b = sim.n_max_b.unwrap_or(sim.n_max);
    let layout = HilbertLayout::new(sim.n_max, n_max_b, m.sites.len())?;
    let taus = match &sim.tau {
        Some(g) => g.values()?,
        None => {
            let n = 10;
            (0..=n).map(|i| m.params.tau * i as f64 / n as f64).collect()
        }
    };
    let cmp = compare_level(sim.level.level(), &m.params, &m.sites, &layout, &taus, None)?;
    let rows: Vec<SimulateRow> = cmp
        .points
        .iter()
        .map(|p| SimulateRow {
            tau: p.tau,
            xi_abs: p.tau * cmp.omega_eff.norm(),
            infidelity: p.infidelity,
            leakage: p.leakage,
            excited_population: p.excited_population,
            var_x: p.var_x,
            var_y: p.var_y,
            var_min: p.var_min,
            n_a: p.n_a,
            n_b: p.n_b,
        })
        .collect();
    let mut table =
        Table::new(&["tau", "xi_abs", "infidelity", "leakage", "excited_population", "var_x", "var_y", "var_min", "n_a", "n_b"]);
    let mut text_rows = Vec::new();
    for r in &rows {
        table.push(vec![
            r.tau.into(),
            r.xi_abs.into(),
            r.infidelity.into(),
            r.leakage.into(),
            r.excited_population.into(),
            r.var_x.into(),
            r.var_y.into(),
            r.var_min.into(),
            r.n_a.into(),
            r.n_b.into(),
        ]);
        text_rows.push(vec![
            format!("{:.6e}", r.tau),
            format!("{:.6e}", r.infidelity),
            format!("{:.3e}", r.leakage),
            format!("{:.6e}", r.var_min),
        ]);
    }
    let cond = condition_row(&m.model.condition, cfg.gates.condition());
    let mut failures = gate_messages(&cmp.regime, &cond);
    let mut warnings = Vec::new();
    if let Some(worst) = rows.iter().map(|r| r.leakage).reduce(f64::max) {
        if worst > 1e-6 {
            warnings.push(format!("Fock leakage reached {worst:.3e}; raise n_max"));
        }
    }
    if taus.iter().all(|t| *t == 0.0) {
        failures.clear();
    }
    let regime_ok = !cmp.flagged;
    let headline = match rows.last() {
        Some(r) => vec![
            ("infidelity".into(), r.infidelity.into()),
            ("leakage".into(), r.leakage.into()),
            ("var_y".into(), r.var_y.into()),
            ("var_min".into(), r.var_min.into()),
        ],
        None => Vec::new(),
    };
    let report = SimulateReport::Grid {
        level: level_label(sim.level).into(),
        n_max: sim.n_max,
        n_max_b,
        omega: cmp.omega_eff.into(),
        rows,
        regime_ok,
    };
    Ok(CommandOutput {
        command: CommandName::Simulate,
        json: to_json(&report)?,
        table,
        headline,
        gate_failures: failures,
        warnings,
        banner: None,
        text: text_table(&["tau", "infidelity", "leakage", "var_min"], &text_rows),
        effective: Some(summary(&m, regime_ok)),
    })
}

// ------------------------------------------------------------------- inout

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriveRow {
    pub omega: f64,
    pub kappa_a: f64,
    pub kappa_b: f64,
    pub eps_a: Cplx,
    pub eps_b: Cplx,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputStateRow {
    pub xi: Cplx,
    pub alpha: Cplx,
    pub beta: Cplx,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumRow {
    pub omega: f64,
    pub var_x: Ext,
    pub var_y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InoutReport {
    pub drive: DriveRow,
    pub critical: bool,
    pub banner: Option<String>,
    pub alpha_0: Option<Cplx>,
    pub beta_0: Option<Cplx>,
    pub var_x_out: Ext,
    pub var_y_out: f64,
    pub r: Ext,
    pub alpha_eff: Option<Cplx>,
    pub beta_eff: Option<Cplx>,
    /// `S(ξ) D_a(α) D_b(β)|0>`.
    pub two_photon_coherent: Option<OutputStateRow>,
    /// `D_a(α′) D_b(β′) S(ξ)|0>`.
    pub ideal_squeezed: Option<OutputStateRow>,
    pub ordering_note: String,
    pub spectrum: Vec<SpectrumRow>,
}

pub const PERFECT_SQUEEZING_BANNER: &str =
    "*** perfect squeezing point: Omega^2 = kappa_a kappa_b; var_Y_out = 0, r = infinite, displacements diverge ***";

const ORDERING_NOTE: &str = "ideal_squeezed amplitudes use alpha' = alpha cosh r - beta* e^{i theta} sinh r, \
beta' = beta cosh r - alpha* e^{i theta} sinh r with xi = r e^{i theta}; this conversion is computed here, not quoted";

fn drive(cfg: &RunConfig) -> Result<DriveParams, CliError> {
    let d = cfg.drive.as_ref().ok_or_else(|| CliError::Config("inout needs a [drive] block".into()))?;
    let p = cfg.params()?;
    let ka = d.kappa_a.map_or(p.kappa_a, |x| x.0);
    let kb = d.kappa_b.map_or(p.kappa_b, |x| x.0);
    let (ea, eb) = (d.eps_a.value(), d.eps_b.value());
    let built = match d.omega {
        DriveOmega::Value(o) => DriveParams::new(o, ka, kb, ea, eb),
        DriveOmega::Effective => {
            let m = model(cfg)?;
            DriveParams::from_effective(m.model.omega_eff, ka, kb, ea, eb)
        }
    };
    built.map_err(|e| CliError::Config(format!("[drive]: {e}")))
}

fn state_row(s: &OutputState, after: bool) -> OutputStateRow {
    let (a, b) = if after { s.after } else { s.before };
    OutputStateRow { xi: s.xi.into(), alpha: a.into(), beta: b.into() }
}

pub fn inout(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let d = drive(cfg)?;
    let io = analyze(&d)?;
    let states = match output_state_description(&d) {
        Ok(s) => Some(s),
        Err(Error::CriticalPoint) => None,
        Err(e) => return Err(e.into()),
    };
    let grid = match cfg.drive.as_ref().and_then(|b| b.spectrum.as_ref()) {
        Some(g) => g.values()?,
        None => vec![0.0],
    };
    let mut spectrum = Vec::with_capacity(grid.len());
    for &w in &grid {
        let row = match spectral_variances(&d, w) {
            Ok((sx, sy)) => SpectrumRow { omega: w, var_x: Ext::Finite(sx), var_y: sy },
            // The only pole below threshold is the critical point at resonance.
            Err(Error::ResolventPole { .. }) if d.is_critical() && w == 0.0 => {
                let v = output_variances(&d)?;
                SpectrumRow { omega: w, var_x: v.var_x.into(), var_y: v.var_y }
            }
            Err(e) => return Err(e.into()),
        };
        spectrum.push(row);
    }
    let banner = io.is_critical.then(|| PERFECT_SQUEEZING_BANNER.to_string());
    let mut warnings = Vec::new();
    if !io.is_critical && d.omega * d.omega > d.kappa_a * d.kappa_b {
        warnings.push(format!(
            "Omega = {:e} exceeds sqrt(kappa_a kappa_b) = {:e}: above threshold there is no stable steady state and the closed forms are evaluated formally",
            d.omega,
            (d.kappa_a * d.kappa_b).sqrt()
        ));
    }
    let report = InoutReport {
        drive: DriveRow { omega: d.omega, kappa_a: d.kappa_a, kappa_b: d.kappa_b, eps_a: d.eps_a.into(), eps_b: d.eps_b.into() },
        critical: io.is_critical,
        banner: banner.clone(),
        alpha_0: io.alpha_0.map(Into::into),
        beta_0: io.beta_0.map(Into::into),
        var_x_out: io.var_x_out.into(),
        var_y_out: io.var_y_out,
        r: io.r.into(),
        alpha_eff: io.alpha_eff.map(Into::into),
        beta_eff: io.beta_eff.map(Into::into),
        two_photon_coherent: states.as_ref().map(|s| state_row(s, false)),
        ideal_squeezed: states.as_ref().map(|s| state_row(s, true)),
        ordering_note: ORDERING_NOTE.into(),
        spectrum,
    };
    let mut table = Table::new(&["omega", "var_x", "var_y"]);
    for r in &report.spectrum {
        table.push(vec![r.omega.into(), r.var_x.into(), r.var_y.into()]);
    }
    let fmt_ext = |e: Ext| e.finite().map_or("infinite".to_string(), |x| format!("{x:.12e}"));
    let text = text_table(
        &["quantity", "value"],
        &[
            vec!["Omega / kappa".into(), format!("{:.12e}", d.omega / d.kappa())],
            vec!["var_X_out".into(), fmt_ext(report.var_x_out)],
            vec!["var_Y_out".into(), format!("{:.12e}", report.var_y_out)],
            vec!["r".into(), fmt_ext(report.r)],
        ],
    );
    let headline = vec![
        ("var_x_out".into(), report.var_x_out.into()),
        ("var_y_out".into(), report.var_y_out.into()),
        ("r".into(), report.r.into()),
        ("critical".into(), report.critical.into()),
    ];
    Ok(CommandOutput {
        command: CommandName::Inout,
        json: to_json(&report)?,
        table,
        headline,
        gate_failures: Vec::new(),
        warnings,
        banner,
        text,
        effective: None,
    })
}
