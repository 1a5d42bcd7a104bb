use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Result};
use bergcomp_core::criteria::{
    boundedness_criterion, carleson_criterion, carleson_vanishing, compact_probe, equivalence_gap,
    essential_norm_estimate, order_bounded_criterion, CriterionResult, CriterionVerdict, EquivalenceGap, Problem,
};
use bergcomp_core::functions::{choose_delta, DeltaChoice};
use bergcomp_core::geometry::DiskPoint;
use bergcomp_core::quadrature::Verdict;
use bergcomp_core::weights::{doubling_report, DoublingReport, RadialWeight, DEFAULT_THETAS};
use serde::Serialize;

use crate::config::{ExperimentConfig, Loaded};
use crate::oracle;
use crate::output::{write_csv, write_json};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    Undecided,
}

impl Status {
    fn from_flags(undecided: bool) -> Self {
        if undecided {
            Status::Undecided
        } else {
            Status::Ok
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    WeightReport,
    Criteria,
    Essnorm,
    Oracle,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::WeightReport => "weight-report",
            Command::Criteria => "criteria",
            Command::Essnorm => "essnorm",
            Command::Oracle => "oracle",
        }
    }
}

pub fn experiment_dir(out: &Path, config: &ExperimentConfig) -> PathBuf {
    out.join(&config.name)
}

pub fn run(command: Command, loaded: &Loaded, out: &Path) -> Result<Status> {
    let dir = experiment_dir(out, &loaded.config);
    match command {
        Command::WeightReport => weight_report(loaded, &dir),
        Command::Criteria => criteria(loaded, &dir),
        Command::Essnorm => essnorm(loaded, &dir),
        Command::Oracle => oracle::run(loaded, &dir),
    }
}

#[derive(Serialize)]
pub(crate) struct Header<'a> {
    pub command: &'static str,
    pub version: &'static str,
    pub config: &'a ExperimentConfig,
}

pub(crate) fn header(command: Command, config: &ExperimentConfig) -> Header<'_> {
    Header {
        command: command.name(),
        version: env!("CARGO_PKG_VERSION"),
        config,
    }
}

#[derive(Serialize)]
struct WeightRow {
    role: &'static str,
    r: f64,
    omega_hat: f64,
    omega_tilde: f64,
    box_weight: f64,
    upper_ratio: f64,
}

#[derive(Serialize)]
struct WeightEntry {
    role: &'static str,
    weight: String,
    report: DoublingReport,
}

fn weight_report(loaded: &Loaded, dir: &Path) -> Result<Status> {
    let c = &loaded.config;
    let grid = c.doubling_grid();
    let mut roles = vec![("source", loaded.source_weight()?)];
    if c.target_weight.is_some() {
        roles.push(("target", loaded.target_weight()?));
    }
    let mut rows = Vec::new();
    let mut entries = Vec::new();
    for (role, w) in roles {
        let report = doubling_report(&w, &grid, &DEFAULT_THETAS)?;
        for (&r, &ratio) in report.grid.iter().zip(&report.upper_ratios) {
            rows.push(WeightRow {
                role,
                r,
                omega_hat: w.omega_hat(r)?,
                omega_tilde: w.omega_tilde(r)?,
                box_weight: w.carleson_box_weight(DiskPoint::new(r, 0.0)?)?,
                upper_ratio: ratio,
            });
        }
        entries.push(WeightEntry {
            role,
            weight: w.describe(),
            report,
        });
    }
    write_csv(&dir.join("weight_report.csv"), &rows)?;
    #[derive(Serialize)]
    struct Doc<'a> {
        #[serde(flatten)]
        header: Header<'a>,
        weights: Vec<WeightEntry>,
    }
    write_json(
        &dir.join("weight_report.json"),
        &Doc {
            header: header(Command::WeightReport, c),
            weights: entries,
        },
    )?;
    Ok(Status::Ok)
}

pub(crate) fn resolve_delta(c: &ExperimentConfig, w: &RadialWeight) -> Result<DeltaChoice> {
    match c.delta {
        Some(d) => Ok(DeltaChoice::user(d)?),
        None => {
            let report = doubling_report(w, &c.doubling_grid(), &DEFAULT_THETAS)?;
            Ok(choose_delta(c.p, &report))
        }
    }
}

pub(crate) fn problem(loaded: &Loaded) -> Result<Problem> {
    let c = &loaded.config;
    Ok(Problem::new(c.operator()?, loaded.source_weight()?, c.p, loaded.target_weight()?, c.q)?)
}

#[derive(Serialize)]
struct CriterionRecord {
    criterion: String,
    status: &'static str,
    error: Option<String>,
    result: Option<CriterionResult>,
    gap: Option<EquivalenceGap>,
}

impl CriterionRecord {
    fn from_result(name: &str, r: Result<CriterionResult>) -> Self {
        match r {
            Ok(res) => CriterionRecord {
                criterion: name.into(),
                status: "ok",
                error: None,
                result: Some(res),
                gap: None,
            },
            Err(e) => Self::error(name, e),
        }
    }

    fn error(name: &str, e: anyhow::Error) -> Self {
        CriterionRecord {
            criterion: name.into(),
            status: "error",
            error: Some(format!("{e:#}")),
            result: None,
            gap: None,
        }
    }

    fn undecided(&self) -> bool {
        self.result.as_ref().is_some_and(|r| r.verdict == CriterionVerdict::Undecided)
    }
}

#[derive(Serialize)]
struct PointRow {
    criterion: String,
    re: Option<f64>,
    im: Option<f64>,
    value: f64,
    error_estimate: f64,
    verdict: Verdict,
}

fn criteria(loaded: &Loaded, dir: &Path) -> Result<Status> {
    let c = &loaded.config;
    let spec = c.spec();
    let pb = problem(loaded)?;
    let delta = resolve_delta(c, &pb.w)?;
    let mut records = Vec::new();
    let mut carleson: Option<Result<CriterionResult, String>> = None;
    let mut carleson_once = || -> Result<CriterionResult> {
        carleson
            .get_or_insert_with(|| {
                c.z_grid(&pb.op)
                    .and_then(|g| Ok(carleson_criterion(&pb, c.carleson.r, &g, &spec)?))
                    .map_err(|e| format!("{e:#}"))
            })
            .clone()
            .map_err(|e| anyhow!(e))
    };
    for name in &c.criteria {
        let rec = match name.as_str() {
            "order_bounded" => CriterionRecord::from_result(name, order_bounded_criterion(&pb, &spec).map_err(Into::into)),
            "bounded" => {
                let r = c.a_grid(&pb.op).and_then(|g| Ok(boundedness_criterion(&pb, &delta, &g, &spec)?));
                CriterionRecord::from_result(name, r)
            }
            "carleson" => CriterionRecord::from_result(name, carleson_once()),
            "carleson_vanishing" => {
                CriterionRecord::from_result(name, carleson_once().map(|r| carleson_vanishing(&r)))
            }
            "equivalence_gap" => {
                match c.z_grid(&pb.op).and_then(|g| Ok(equivalence_gap(&pb, c.carleson.r, &delta, &g, &spec)?)) {
                    Ok(gap) => CriterionRecord {
                        criterion: name.clone(),
                        status: "ok",
                        error: None,
                        result: None,
                        gap: Some(gap),
                    },
                    Err(e) => CriterionRecord::error(name, e),
                }
            }
            other => bail!("unknown criterion `{other}`"),
        };
        records.push(rec);
    }

    let mut rows = Vec::new();
    for rec in &records {
        if let Some(res) = &rec.result {
            if res.per_point.is_empty() {
                let out = res.diagnostics.outcome.as_ref();
                rows.push(PointRow {
                    criterion: rec.criterion.clone(),
                    re: None,
                    im: None,
                    value: res.value,
                    error_estimate: out.map_or(0.0, |o| o.error_estimate),
                    verdict: out.map_or(Verdict::Converged, |o| o.verdict),
                });
            }
            for p in &res.per_point {
                rows.push(PointRow {
                    criterion: rec.criterion.clone(),
                    re: Some(p.point.re),
                    im: Some(p.point.im),
                    value: p.value,
                    error_estimate: p.error_estimate,
                    verdict: p.verdict,
                });
            }
        }
    }
    write_csv(&dir.join("criteria.csv"), &rows)?;
    let undecided = records.iter().any(CriterionRecord::undecided);
    #[derive(Serialize)]
    struct Doc<'a> {
        #[serde(flatten)]
        header: Header<'a>,
        delta: DeltaChoice,
        records: Vec<CriterionRecord>,
    }
    write_json(
        &dir.join("criteria.json"),
        &Doc {
            header: header(Command::Criteria, c),
            delta,
            records,
        },
    )?;
    Ok(Status::from_flags(undecided))
}

#[derive(Serialize)]
struct TailRow {
    r: f64,
    sup_integral: f64,
    probe_norm: f64,
    probe_power: f64,
}

fn essnorm(loaded: &Loaded, dir: &Path) -> Result<Status> {
    let c = &loaded.config;
    let spec = c.spec();
    let pb = problem(loaded)?;
    let delta = resolve_delta(c, &pb.w)?;
    let json_path = dir.join("essnorm.json");

    let bounded = c
        .a_grid(&pb.op)
        .and_then(|g| Ok(boundedness_criterion(&pb, &delta, &g, &spec)?));
    let holds = matches!(&bounded, Ok(r) if r.verdict == CriterionVerdict::Holds);
    let bounded = CriterionRecord::from_result("bounded", bounded);

    #[derive(Serialize)]
    struct Doc<'a> {
        #[serde(flatten)]
        header: Header<'a>,
        delta: DeltaChoice,
        boundedness: CriterionRecord,
        refused: Option<String>,
        essential_norm: Option<CriterionResult>,
        probe: Option<CriterionResult>,
        /// `max_j probe_j^q / E_j`
        sandwich_constant: Option<f64>,
        classifications_agree: Option<bool>,
    }
    let mut doc = Doc {
        header: header(Command::Essnorm, c),
        delta,
        boundedness: bounded,
        refused: None,
        essential_norm: None,
        probe: None,
        sandwich_constant: None,
        classifications_agree: None,
    };
    if !holds {
        let msg = "refusing the essential-norm sweep: boundedness does not hold (see the `boundedness` record)";
        doc.refused = Some(msg.into());
        write_json(&json_path, &doc)?;
        bail!("{msg} in {}", json_path.display());
    }

    let radii = c.tail_radii();
    let ess = essential_norm_estimate(&pb, &delta, &radii, &spec)?;
    let seq = radii.iter().map(|&r| DiskPoint::new(r, 0.0)).collect::<Result<Vec<_>, _>>()?;
    let probe = compact_probe(&pb, &delta, &seq, false, &spec)?;
    let rows: Vec<TailRow> = ess
        .diagnostics
        .tail
        .iter()
        .zip(&probe.per_point)
        .zip(&probe.diagnostics.tail)
        .map(|((e, p), pq)| TailRow {
            r: e.radius,
            sup_integral: e.value,
            probe_norm: p.value,
            probe_power: pq.value,
        })
        .collect();
    write_csv(&dir.join("essnorm.csv"), &rows)?;
    let undecided = ess.verdict == CriterionVerdict::Undecided || probe.verdict == CriterionVerdict::Undecided;
    doc.sandwich_constant = rows
        .iter()
        .filter(|r| r.sup_integral > 0.0)
        .map(|r| r.probe_power / r.sup_integral)
        .reduce(f64::max);
    doc.classifications_agree = Some(ess.verdict == probe.verdict);
    doc.essential_norm = Some(ess);
    doc.probe = Some(probe);
    write_json(&json_path, &doc)?;
    Ok(Status::from_flags(undecided))
}
