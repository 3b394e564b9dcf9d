use std::time::Instant;

use anyhow::{bail, Context, Result};
use lmep::analysis::{conserved_quantities, log_spaced, loglog_slope, norms, scan_stability, spectral_footprint};
use lmep::harvest::{assemble_global_fixed, assemble_global_phi_fixed};
use lmep::{select_stencils, BenchmarkSpec, Error, Reference, ScanSettings, WeightTable};

use crate::closed_form;
use crate::config::{Command, Format, RunConfig};
use crate::table::{Cell, Table};

/// φ_0 through φ_3.
const PHI_DEPTH: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub enum Body {
    Table(Table),
    /// Pre-rendered text with its file extension.
    Text { text: String, extension: &'static str },
}

/// One output of a command. The primary artifact goes to `--out` (or
/// stdout); the others are printed, or written next to it by `run`.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub name: &'static str,
    pub body: Body,
    pub primary: bool,
}

impl Artifact {
    fn table(name: &'static str, table: Table, primary: bool) -> Self {
        Artifact {
            name,
            body: Body::Table(table),
            primary,
        }
    }

    pub fn extension(&self, format: Format) -> &'static str {
        match &self.body {
            Body::Table(_) => format.extension(),
            Body::Text { extension, .. } => extension,
        }
    }

    pub fn render(&self, cfg: &RunConfig) -> String {
        match &self.body {
            Body::Table(t) => t.render(cfg.format, cfg.gnuplot, self.name),
            Body::Text { text, .. } => text.clone(),
        }
    }

    pub fn as_table(&self) -> Option<&Table> {
        match &self.body {
            Body::Table(t) => Some(t),
            Body::Text { .. } => None,
        }
    }
}

pub fn execute(cfg: &RunConfig) -> Result<Vec<Artifact>> {
    match cfg.command {
        Command::Harvest => harvest(cfg),
        Command::Run => run(cfg),
        Command::Footprint => footprint(cfg),
        Command::ScanStability => scan(cfg),
        Command::Scaling => scaling(cfg),
    }
}

pub fn harvest(cfg: &RunConfig) -> Result<Vec<Artifact>> {
    let spec = cfg.benchmark_spec()?;
    let grid = spec.build_grid()?;
    let stencils = spec.stencils(&grid)?;
    let fixed = spec.boundary.fixed_nodes(grid.len());
    let ops = assemble_global_phi_fixed(&grid, &stencils, &spec.linear, spec.delta_t, PHI_DEPTH, &fixed)?;
    let weights = WeightTable::from_phi(&grid, &stencils, &spec.linear, &ops);

    let mut out = vec![match cfg.format {
        Format::Json => Artifact {
            name: "weights",
            body: Body::Text {
                text: weights.to_json()?,
                extension: "json",
            },
            primary: true,
        },
        Format::Csv => Artifact::table("weights", weight_rows(&weights), true),
    }];
    if cfg.closed_form {
        out.push(Artifact::table("closed-form", closed_form::comparison()?, false));
    }
    Ok(out)
}

/// Wide CSV form: node, x, target row, member indices, then `exp(dt L)` weights.
/// The phi rows are only in the JSON form.
fn weight_rows(weights: &WeightTable) -> Table {
    let n = weights.stencil_len;
    let mut names = vec!["node".to_string(), "x".to_string(), "target_row".to_string()];
    names.extend((0..n).map(|j| format!("m{j}")));
    names.extend((0..n).map(|j| format!("w{j}")));
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let mut table = Table::new(&refs);
    for r in &weights.rows {
        let mut row: Vec<Cell> = vec![r.node.into(), r.x.into(), r.target_row.into()];
        row.extend(r.members.iter().map(|&m| Cell::from(m)));
        row.extend(r.w_lin.iter().map(|&w| Cell::from(w)));
        table.push(row);
    }
    table
}

pub fn run(cfg: &RunConfig) -> Result<Vec<Artifact>> {
    let spec = cfg.benchmark_spec()?;
    let start = Instant::now();
    let mut wall: Vec<u128> = Vec::new();
    let sol = spec
        .solve_with_observer(cfg.stride, |_, _, _| wall.push(start.elapsed().as_nanos()))
        .map_err(|e| match e {
            Error::Diverged { step, t, .. } => {
                anyhow::anyhow!("{} diverged at step {step} (t = {t}); reduce --dt", spec.kind.as_str())
            }
            e => e.into(),
        })?;
    let grid = &sol.grid;
    let result = &sol.result;

    let final_reference = match spec.reference {
        Reference::SelfRefined { .. } => spec.reference_solution().context("reference run")?,
        _ => None,
    };

    let mut snapshots = Table::new(&["t", "x", "u"]).with_plot(1, 2, false);
    let mut metrics = Table::new(&["step", "t", "l_inf_err", "mass_l1", "energy_l2", "wall_ns"]).with_plot(1, 2, true);
    for snap in &result.snapshots {
        for (&x, &u) in grid.nodes().iter().zip(&snap.u) {
            snapshots.push(vec![snap.t.into(), x.into(), u.into()]);
        }
        let reference = spec.analytic_reference(grid, snap.t).or_else(|| {
            if snap.step == result.steps {
                final_reference.clone()
            } else {
                None
            }
        });
        let err = match reference {
            Some(r) => norms(&snap.u, &r)?.l_inf,
            None => f64::NAN,
        };
        let c = conserved_quantities(&snap.u, grid)?;
        metrics.push(vec![
            snap.step.into(),
            snap.t.into(),
            err.into(),
            c.mass_l1.into(),
            c.energy_l2.into(),
            wall.get(snap.step).copied().unwrap_or(0).into(),
        ]);
    }

    let mut out = vec![
        Artifact::table("metrics", metrics, true),
        Artifact::table("snapshots", snapshots, false),
    ];
    if cfg.sweep > 0 {
        out.push(Artifact::table("convergence", convergence(&spec, cfg.sweep)?, false));
    }
    out.push(Artifact {
        name: "config",
        body: Body::Text {
            text: cfg.to_toml()?,
            extension: "toml",
        },
        primary: false,
    });
    Ok(out)
}

/// Step-halving study from the configured step. The reference is analytic
/// when the benchmark has one, otherwise the same run at `dt / 64` (or a
/// quarter of the smallest step, whichever is smaller).
pub fn convergence(spec: &BenchmarkSpec, halvings: usize) -> Result<Table> {
    let dts: Vec<f64> = (0..halvings).map(|j| spec.delta_t / 2f64.powi(j as i32)).collect();
    let grid = spec.build_grid()?;
    let reference = match spec.analytic_reference(&grid, spec.t_final) {
        Some(r) => r,
        None => {
            let mut fine = spec.clone();
            fine.delta_t = (spec.delta_t / 64.0).min(dts[dts.len() - 1] / 4.0);
            fine.reference = Reference::None;
            fine.solve(0)?.result.state.u
        }
    };
    let mut table = Table::new(&["dt", "steps", "l_inf_err", "rel_l_inf_err", "order"]).with_plot(0, 2, true);
    let mut errors: Vec<f64> = Vec::new();
    for (j, &dt) in dts.iter().enumerate() {
        let mut run = spec.clone();
        run.delta_t = dt;
        let res = run.solve(0)?.result;
        let e = norms(&res.state.u, &reference)?;
        let order = if j == 0 {
            f64::NAN
        } else {
            (errors[j - 1] / e.l_inf).ln() / (dts[j - 1] / dt).ln()
        };
        errors.push(e.l_inf);
        table.push(vec![res.delta_t.into(), res.steps.into(), e.l_inf.into(), e.rel_l_inf.into(), order.into()]);
    }
    if dts.len() >= 2 {
        eprintln!("least-squares order: {:.3}", loglog_slope(&dts, &errors));
    }
    Ok(table)
}

pub fn footprint(cfg: &RunConfig) -> Result<Vec<Artifact>> {
    let spec = cfg.benchmark_spec()?;
    let grid = spec.build_grid()?;
    if !grid.is_periodic() {
        bail!("footprint needs a periodic uniform grid");
    }
    let stencils = spec.stencils(&grid)?;
    let prop = assemble_global_fixed(&grid, &stencils, &spec.linear, spec.delta_t, &[])?;
    let node = cfg.node.unwrap_or(grid.len() / 2);
    let (_, weights) = prop.row(node);
    let offsets = stencils[node].signed_offsets(grid.len());
    let fp = spectral_footprint(weights, &offsets, grid.h_min(), cfg.num_k)?;
    let phase = fp.phase_error_against(&spec.linear, spec.delta_t);

    let mut table = Table::new(&["kh", "re_g", "im_g", "abs_g", "phase_error"]).with_plot(0, 3, false);
    for (i, g) in fp.amplification.iter().enumerate() {
        table.push(vec![
            (fp.wavenumbers[i] * fp.h).into(),
            g.re.into(),
            g.im.into(),
            fp.dissipation[i].into(),
            phase[i].into(),
        ]);
    }
    Ok(vec![Artifact::table("footprint", table, true)])
}

pub fn scan(cfg: &RunConfig) -> Result<Vec<Artifact>> {
    let spec = cfg.benchmark_spec()?;
    let grid = spec.build_grid()?;
    let lo = cfg.dt_min.unwrap_or(spec.delta_t / 10.0);
    let hi = cfg.dt_max.unwrap_or(spec.delta_t * 10.0);
    if lo >= hi {
        bail!("empty step range [{lo}, {hi}]");
    }
    let dts = log_spaced(lo, hi, cfg.dt_count);
    let settings = ScanSettings {
        steps: cfg.scan_steps,
        growth_tol: cfg.growth_tol,
        seed: cfg.seed,
    };
    let ns = if cfg.n_ladder.is_empty() {
        vec![spec.stencil_len]
    } else {
        cfg.n_ladder.clone()
    };

    let mut trials = Table::new(&["n", "dt", "final_linf", "stable"]).with_plot(1, 2, true);
    let mut summary = Table::new(&["n", "dt_star"]);
    for n in ns {
        let stencils = select_stencils(&grid, n, spec.policy)?;
        let boundary = scan_stability(&grid, &stencils, &spec.linear, &dts, settings)?;
        for t in &boundary.trials {
            trials.push(vec![n.into(), t.delta_t.into(), t.final_linf.into(), usize::from(t.stable).into()]);
        }
        summary.push(vec![n.into(), boundary.delta_t_star.unwrap_or(f64::NAN).into()]);
    }
    Ok(vec![
        Artifact::table("scan", trials, true),
        Artifact::table("boundary", summary, false),
    ])
}

pub fn scaling(cfg: &RunConfig) -> Result<Vec<Artifact>> {
    let runs: Vec<RunConfig> = if cfg.n_ladder.is_empty() {
        cfg.ladder.iter().map(|&len| cfg.with_sizes(Some(len), None)).collect()
    } else {
        cfg.n_ladder.iter().map(|&n| cfg.with_sizes(None, Some(n))).collect()
    };
    let mut table = Table::new(&["N", "harvest_ns", "step_ns_total", "steps", "n"]).with_plot(0, 2, true);
    let mut lens = Vec::new();
    let mut times = Vec::new();
    for run in runs {
        let spec = run.benchmark_spec()?;
        let sample = spec.time_stepping(cfg.warmup)?;
        lens.push(sample.len as f64);
        times.push(sample.step_ns_total as f64);
        table.push(vec![
            sample.len.into(),
            sample.harvest_ns.into(),
            sample.step_ns_total.into(),
            sample.steps.into(),
            sample.stencil_len.into(),
        ]);
    }
    if cfg.n_ladder.is_empty() && lens.len() >= 2 {
        eprintln!("step-time log-log slope: {:.3}", loglog_slope(&lens, &times));
    }
    Ok(vec![Artifact::table("scaling", table, true)])
}
