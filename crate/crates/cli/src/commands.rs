//! Subcommand implementations: resolve arguments, run, render.

use std::fmt::Write as _;

use maxcop::aggregate::{
    excess_of_loss_premium, largest_claim_influence, stop_loss_premium, PremiumGrid, RiskMeasureTable,
};
use maxcop::data::{load_csv, summarize, synthesize, write_csv, Censoring, ColumnSummary, SynthesisConfig};
use maxcop::dependence::{dependence_summary, tau_convergence_study, write_convergence_csv, DEFAULT_TAIL_QUANTILE};
use maxcop::estimation::{model_grid_fit, write_fits_csv, GridFit};
use maxcop::{
    ClaimsDataset, ColumnMapping, CopulaFamily, CopulaModel, CountLaw, FamilyKind, FitOptions, Margin, MixingLaw,
    MixingModel, MixtureCopula, SeededStream, Treaty,
};
use serde::Serialize;
use serde_json::Value;

use crate::args::*;
use crate::error::{config, CliError};

/// Resolved options shared by every subcommand.
#[derive(Debug, Clone, Serialize)]
pub struct Globals {
    pub seed: u64,
    pub threads: usize,
    pub format: Format,
}

/// Rendered primary output plus the resolved subcommand arguments.
pub struct Outcome {
    pub resolved: Value,
    pub body: Vec<u8>,
}

fn outcome<A: Serialize>(args: &A, body: Vec<u8>) -> Result<Outcome, CliError> {
    Ok(Outcome {
        resolved: serde_json::to_value(args).map_err(|e| config(e.to_string()))?,
        body,
    })
}

fn json<T: Serialize + ?Sized>(value: &T) -> Result<Vec<u8>, CliError> {
    let mut out = serde_json::to_vec_pretty(value).map_err(|e| config(e.to_string()))?;
    out.push(b'\n');
    Ok(out)
}

fn csv_rows<T: Serialize>(rows: &[T]) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(maxcop::Error::from)?;
    }
    w.into_inner().map_err(|e| CliError::Output(e.into_error()))
}

fn millions(x: f64) -> String {
    format!("{:.2}", x / 1e6)
}

fn mapping(d: &DataArgs) -> ColumnMapping {
    let def = ColumnMapping::default();
    ColumnMapping {
        loss: d.loss_col.clone().unwrap_or(def.loss),
        alae: d.alae_col.clone().unwrap_or(def.alae),
        censor: d.censor_col.clone(),
        limit: d.limit_col.clone(),
    }
}

fn load(d: &DataArgs) -> Result<Option<ClaimsDataset>, CliError> {
    d.data.as_ref().map(|p| load_csv(p, &mapping(d))).transpose().map_err(CliError::from)
}

fn require_data(d: &DataArgs) -> Result<ClaimsDataset, CliError> {
    load(d)?.ok_or_else(|| config("--data is required"))
}

fn parse<T: std::str::FromStr<Err = maxcop::Error>>(s: &str) -> Result<T, CliError> {
    s.parse::<T>().map_err(|e| config(e.to_string()))
}

fn base_family(m: &ModelArgs) -> Result<CopulaFamily, CliError> {
    let kind: FamilyKind = parse(m.base.as_deref().ok_or_else(|| config("--base is required"))?)?;
    let params: Vec<f64> = match kind {
        FamilyKind::Independence => vec![],
        FamilyKind::Student => vec![
            m.alpha.ok_or_else(|| config("--alpha (correlation) is required for student"))?,
            m.dof.ok_or_else(|| config("--dof is required for student"))?,
        ],
        _ => vec![m.alpha.ok_or_else(|| config(format!("--alpha is required for {kind}")))?],
    };
    Ok(CopulaFamily::from_kind(kind, &params)?)
}

fn mixing_model(m: &ModelArgs) -> Result<Option<MixingModel>, CliError> {
    match m.mixing.as_deref() {
        None | Some("none") => Ok(None),
        Some(s) => parse(s).map(Some),
    }
}

fn copula_model(m: &ModelArgs) -> Result<CopulaModel, CliError> {
    let base = base_family(m)?;
    match mixing_model(m)? {
        None => Ok(base.into()),
        Some(model) => {
            let theta = m.theta.ok_or_else(|| config("--theta is required with --mixing"))?;
            Ok(MixtureCopula::new(base, MixingLaw::new(model, theta)?)?.into())
        }
    }
}

fn margin(spec: Option<&str>, column: Option<&[f64]>) -> Result<Margin, CliError> {
    let spec = spec.unwrap_or("uniform");
    let parts: Vec<&str> = spec.split(':').collect();
    match parts.as_slice() {
        ["uniform"] => Ok(Margin::Uniform),
        ["pareto", scale, shape] => {
            let num = |s: &str| s.parse::<f64>().map_err(|_| config(format!("bad number '{s}' in margin '{spec}'")));
            Ok(Margin::pareto(num(scale)?, num(shape)?)?)
        }
        ["empirical"] => Ok(Margin::empirical(
            column.ok_or_else(|| config("an empirical margin needs --data"))?,
        )?),
        _ => Err(config(format!("unknown margin '{spec}'"))),
    }
}

fn margins(m: &MarginArgs, data: Option<&ClaimsDataset>) -> Result<(Margin, Margin), CliError> {
    Ok((
        margin(m.margin_x.as_deref(), data.map(|d| d.x.as_slice()))?,
        margin(m.margin_y.as_deref(), data.map(|d| d.y.as_slice()))?,
    ))
}

fn count_law(c: &CountArgs) -> Result<CountLaw, CliError> {
    let name = c.count.as_deref().ok_or_else(|| config("--count is required"))?;
    let param = c.count_param.ok_or_else(|| config("--count-param is required"))?;
    let law = match name {
        "poisson" => CountLaw::Poisson { mean: param },
        "fixed" => {
            if !(param >= 0.0 && param.fract() == 0.0) {
                return Err(config(format!("a fixed claim count must be a whole number, got {param}")));
            }
            CountLaw::Fixed { n: param as u64 }
        }
        other => MixingLaw::new(parse(other)?, param)?.into(),
    };
    law.validate()?;
    Ok(law)
}

pub fn fit(g: &Globals, mut a: FitArgs) -> Result<Outcome, CliError> {
    let ds = require_data(&a.data)?;
    let families = a
        .families
        .get_or_insert_with(|| ["gumbel", "frank", "student", "joe"].map(String::from).to_vec())
        .iter()
        .map(|s| parse::<FamilyKind>(s))
        .collect::<Result<Vec<_>, _>>()?;
    let names = a.mixing.get_or_insert_with(|| MixingModel::ALL.map(|m| m.name().to_string()).to_vec());
    let mixings = names
        .iter()
        .filter(|s| s.as_str() != "none")
        .map(|s| parse::<MixingModel>(s))
        .collect::<Result<Vec<_>, _>>()?;
    let opts = FitOptions {
        starts: *a.starts.get_or_insert(FitOptions::default().starts),
        ..Default::default()
    };
    let obs = ds.pseudo_observations()?;
    let grid: GridFit = model_grid_fit(&obs, &families, &mixings, &opts)?;
    for f in &grid.failures {
        eprintln!("warning: {}/{}: {}", f.family, f.mixing.map_or("none", |m| m.name()), f.message);
    }
    if grid.fits.is_empty() {
        return Err(CliError::AllFitsFailed);
    }
    let body = match g.format {
        Format::Csv => {
            let mut buf = Vec::new();
            write_fits_csv(&grid.fits, &mut buf)?;
            buf
        }
        Format::Json => json(&grid)?,
        Format::Table => {
            let mut s = format!("{:<36} {:>10} {:>10} {:>10} {:>14}\n", "Model", "theta", "alpha", "m", "AIC");
            let opt = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.4}"));
            for f in &grid.fits {
                let _ = writeln!(
                    s,
                    "{:<36} {:>10} {:>10} {:>10} {:>14.2}",
                    f.label(),
                    opt(f.theta),
                    opt(f.alpha),
                    opt(f.m),
                    f.aic
                );
            }
            s.into_bytes()
        }
    };
    outcome(&a, body)
}

pub fn simulate(g: &Globals, mut a: SimulateArgs) -> Result<Outcome, CliError> {
    let model = copula_model(&a.model)?;
    let (loss, alae) = margins(&a.margins, None)?;
    let n = *a.n.get_or_insert(1000);
    let ds = synthesize(&SynthesisConfig {
        model,
        loss,
        alae,
        n,
        seed: g.seed,
        censoring: a.censor_quantile.map(|p| Censoring::Quantile { p }),
    })?;
    let body = match g.format {
        Format::Json => json(&ds)?,
        Format::Csv | Format::Table => {
            let mut buf = Vec::new();
            write_csv(&ds, &mut buf)?;
            buf
        }
    };
    outcome(&a, body)
}

pub fn dependence(g: &Globals, mut a: DependenceArgs) -> Result<Outcome, CliError> {
    if let Some(means) = a.elambda.clone() {
        let base = base_family(&a.model)?;
        let model = mixing_model(&a.model)?.ok_or_else(|| config("the study needs --mixing"))?;
        let reps = *a.reps.get_or_insert(10_000);
        let rows = tau_convergence_study(&base, model, &means, reps, SeededStream::new(g.seed, 0))?;
        let body = match g.format {
            Format::Csv => {
                let mut buf = Vec::new();
                write_convergence_csv(&rows, &mut buf)?;
                buf
            }
            Format::Json => json(&rows)?,
            Format::Table => {
                let mut s = format!("{:>10} {:>8} {:>8} {:>8} {:>8}\n", "E[L]", "tau(C)", "tau(Q)", "rho(C)", "rho(Q)");
                for r in &rows {
                    let _ = writeln!(
                        s,
                        "{:>10} {:>8.4} {:>8.4} {:>8.4} {:>8.4}",
                        r.e_lambda, r.tau_c, r.tau_q, r.rho_c, r.rho_q
                    );
                }
                s.into_bytes()
            }
        };
        return outcome(&a, body);
    }
    let ds = require_data(&a.data)?;
    let q = *a.tail_quantile.get_or_insert(DEFAULT_TAIL_QUANTILE);
    let pairs: Vec<(f64, f64)> = ds.x.iter().copied().zip(ds.y.iter().copied()).collect();
    let summary = dependence_summary(&pairs, q)?;
    let body = match g.format {
        Format::Csv => csv_rows(&[summary])?,
        Format::Json => json(&summary)?,
        Format::Table => format!(
            "Pearson        {:.4}\nSpearman       {:.4}\nKendall        {:.4}\nUpper tail     {:.4} (q = {})\n",
            summary.pearson, summary.spearman, summary.kendall, summary.upper_tail, q
        )
        .into_bytes(),
    };
    outcome(&a, body)
}

#[derive(Serialize)]
struct InfluenceRow {
    measure: &'static str,
    total: f64,
    total_without_largest: f64,
    influence: f64,
    influence_pct: f64,
    allocation_x: f64,
    allocation_y: f64,
}

fn influence_rows(t: &RiskMeasureTable) -> Vec<InfluenceRow> {
    let pick: [(&'static str, fn(&maxcop::aggregate::RiskMeasures) -> f64); 4] = [
        ("mean", |r| r.mean),
        ("std", |r| r.std),
        ("var", |r| r.var),
        ("tvar", |r| r.tvar),
    ];
    pick.iter()
        .map(|&(measure, f)| InfluenceRow {
            measure,
            total: f(&t.total),
            total_without_largest: f(&t.total_without_largest),
            influence: f(&t.influence),
            influence_pct: f(&t.influence_pct),
            allocation_x: f(&t.allocation_x),
            allocation_y: f(&t.allocation_y),
        })
        .collect()
}

pub fn influence(g: &Globals, mut a: InfluenceArgs) -> Result<Outcome, CliError> {
    let model = copula_model(&a.model)?;
    let (mx, my) = margins(&a.margins, None)?;
    let count = count_law(&a.count)?;
    let b = *a.b.get_or_insert(10_000);
    let p = *a.p.get_or_insert(0.99);
    let t = largest_claim_influence(&model, (&mx, &my), &count, b, p, SeededStream::new(g.seed, 0))?;
    let rows = influence_rows(&t);
    let body = match g.format {
        Format::Csv => csv_rows(&rows)?,
        Format::Json => json(&t)?,
        Format::Table => {
            let mut s = format!(
                "{:<10} {:>10} {:>10} {:>8} {:>8} {:>8} {:>8}\n",
                "measure", "S_N", "S_N*", "I*", "I* %", "I(X)", "I(Y)"
            );
            for r in &rows {
                let _ = writeln!(
                    s,
                    "{:<10} {:>10} {:>10} {:>8} {:>8.2} {:>8} {:>8}",
                    r.measure,
                    millions(r.total),
                    millions(r.total_without_largest),
                    millions(r.influence),
                    r.influence_pct,
                    millions(r.allocation_x),
                    millions(r.allocation_y)
                );
            }
            let _ = writeln!(
                s,
                "amounts in millions; B = {b}; VaR is the order statistic of rank ceil(pB), TVaR averages it and all larger ones"
            );
            s.into_bytes()
        }
    };
    outcome(&a, body)
}

#[derive(Serialize)]
struct PremiumRow {
    level: f64,
    estimate: f64,
    std_error: f64,
    two_stage: Option<f64>,
}

pub fn premium(g: &Globals, mut a: PremiumArgs) -> Result<Outcome, CliError> {
    let data = load(&a.data)?;
    if data.is_some() {
        a.margins.margin_x.get_or_insert_with(|| "empirical".into());
        a.margins.margin_y.get_or_insert_with(|| "empirical".into());
    }
    let model = copula_model(&a.model)?;
    let (mx, my) = margins(&a.margins, data.as_ref())?;
    let count = count_law(&a.count)?;
    let b = *a.b.get_or_insert(10_000);
    let stream = SeededStream::new(g.seed, 0);
    let grid: PremiumGrid = match *a.treaty.get_or_insert(TreatyArg::ExcessOfLoss) {
        TreatyArg::ExcessOfLoss => {
            let levels = a.retentions.as_deref().ok_or_else(|| config("--retentions is required"))?;
            excess_of_loss_premium(&model, (&mx, &my), &count, levels, b, stream)?
        }
        TreatyArg::StopLoss => {
            let levels = a.deductibles.as_deref().ok_or_else(|| config("--deductibles is required"))?;
            stop_loss_premium(&model, (&mx, &my), &count, levels, b, stream)?
        }
    };
    let rows: Vec<PremiumRow> = (0..grid.levels.len())
        .map(|j| PremiumRow {
            level: grid.levels[j],
            estimate: grid.estimates[j],
            std_error: grid.std_errors[j],
            two_stage: grid.two_stage.as_ref().map(|t| t[j]),
        })
        .collect();
    let body = match g.format {
        Format::Csv => csv_rows(&rows)?,
        Format::Json => json(&grid)?,
        Format::Table => {
            let name = match grid.treaty {
                Treaty::ExcessOfLoss => "retention",
                Treaty::StopLoss => "deductible",
            };
            let mut s = format!("{name:>12} {:>12} {:>10}\n", "premium", "std err");
            for r in &rows {
                let _ = writeln!(s, "{:>12} {:>12} {:>10}", millions(r.level), millions(r.estimate), millions(r.std_error));
            }
            let _ = writeln!(s, "amounts in millions; B = {b}");
            s.into_bytes()
        }
    };
    outcome(&a, body)
}

pub fn summarize_cmd(g: &Globals, a: SummarizeArgs) -> Result<Outcome, CliError> {
    let ds = require_data(&a.data)?;
    let rows: Vec<ColumnSummary> = summarize(&ds)?;
    let body = match g.format {
        Format::Csv => csv_rows(&rows)?,
        Format::Json => json(&rows)?,
        Format::Table => {
            let mut s = format!(
                "{:<6} {:>8} {:>14} {:>14} {:>14} {:>14} {:>14} {:>14} {:>14}\n",
                "", "count", "min", "Q1", "Q2", "Q3", "max", "mean", "std"
            );
            for r in &rows {
                let _ = writeln!(
                    s,
                    "{:<6} {:>8} {:>14.2} {:>14.2} {:>14.2} {:>14.2} {:>14.2} {:>14.2} {:>14.2}",
                    r.name, r.count, r.min, r.q1, r.median, r.q3, r.max, r.mean, r.std
                );
            }
            if ds.delta.is_some() {
                let _ = writeln!(s, "censored losses: {}", ds.n_censored());
            }
            s.into_bytes()
        }
    };
    outcome(&a, body)
}
