//! Run configuration. Defaults, then a TOML config file, then command-line
//! flags; later sources win.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::ValueEnum;
use lmep::problems::{advdiff_benchmark, advection_benchmark, allen_cahn_benchmark, burgers_benchmark, kdv_benchmark};
use lmep::{BenchmarkKind, BenchmarkSpec, Scheme, StencilPolicy};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::Subcommand)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Write the harvested weight table of the configured benchmark.
    #[default]
    Harvest,
    /// Run a benchmark and write snapshots and metrics.
    Run,
    /// Von Neumann footprint of one harvested row.
    Footprint,
    /// Empirical stability boundary over a log-spaced step grid.
    ScanStability,
    /// Harvest and stepping times over a ladder of grid sizes or stencil lengths.
    Scaling,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum PolicyArg {
    Centered,
    Upwind,
}

impl From<PolicyArg> for StencilPolicy {
    fn from(p: PolicyArg) -> Self {
        match p {
            PolicyArg::Centered => StencilPolicy::Centered,
            PolicyArg::Upwind => StencilPolicy::OneSidedUpwind,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// Everything a single invocation needs. Optional benchmark parameters fall
/// back to the benchmark preset; `spec` replaces the preset entirely.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct RunConfig {
    pub command: Command,
    pub benchmark: BenchmarkKind,
    #[serde(rename = "N", skip_serializing_if = "Option::is_none")]
    pub len: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_final: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub policy: Option<PolicyArg>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub order_s: Option<usize>,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    pub format: Format,
    /// Prepend a gnuplot script header to CSV output.
    pub gnuplot: bool,
    pub closed_form: bool,
    /// Snapshot every `stride` steps; 0 keeps only the first and last.
    pub stride: usize,
    /// Number of step halvings in the convergence study of `run`; 0 disables it.
    pub sweep: usize,
    pub ladder: Vec<usize>,
    pub n_ladder: Vec<usize>,
    pub warmup: bool,
    pub num_k: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub node: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt_max: Option<f64>,
    pub dt_count: usize,
    pub scan_steps: usize,
    pub growth_tol: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spec: Option<BenchmarkSpec>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            command: Command::Harvest,
            benchmark: BenchmarkKind::Advection,
            len: None,
            n: None,
            dt: None,
            t_final: None,
            policy: None,
            sigma: None,
            order_s: None,
            seed: 0,
            threads: None,
            out: None,
            format: Format::Csv,
            gnuplot: false,
            closed_form: false,
            stride: 0,
            sweep: 0,
            ladder: vec![128, 256, 512, 1024],
            n_ladder: Vec::new(),
            warmup: true,
            num_k: 129,
            node: None,
            dt_min: None,
            dt_max: None,
            dt_count: 41,
            scan_steps: 500,
            growth_tol: 10.0,
            spec: None,
        }
    }
}

/// Command-line overrides. Every flag is optional so that unset flags leave
/// the config file value alone.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct Flags {
    /// TOML file with any of the keys below (kebab-case, `N` for the grid size).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// advection | advdiff | burgers | kdv | allen-cahn
    #[arg(long, global = true)]
    pub benchmark: Option<BenchmarkKind>,
    /// Grid size.
    #[arg(long = "N", global = true)]
    pub len: Option<usize>,
    /// Stencil length.
    #[arg(long = "n", global = true)]
    pub n: Option<usize>,
    #[arg(long, global = true)]
    pub dt: Option<f64>,
    #[arg(long = "t-final", global = true)]
    pub t_final: Option<f64>,
    #[arg(long, global = true, value_enum)]
    pub policy: Option<PolicyArg>,
    /// Offset of the advection Courant number below its Lagrangian value.
    #[arg(long, global = true)]
    pub sigma: Option<f64>,
    /// Use the ETD multistep scheme of this order.
    #[arg(long = "order-s", global = true)]
    pub order_s: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Output file; a directory for `run`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[arg(long, global = true)]
    pub gnuplot: bool,
    /// Also compare against the closed-form three- and five-point rows.
    #[arg(long = "closed-form", global = true)]
    pub closed_form: bool,
    #[arg(long, global = true)]
    pub stride: Option<usize>,
    #[arg(long, global = true)]
    pub sweep: Option<usize>,
    /// Grid sizes for `scaling`, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    pub ladder: Option<Vec<usize>>,
    /// Stencil lengths for `scaling` and `scan-stability`, comma separated.
    #[arg(long = "n-ladder", global = true, value_delimiter = ',')]
    pub n_ladder: Option<Vec<usize>>,
    /// Skip the untimed warm-up pass in `scaling`.
    #[arg(long = "no-warmup", global = true)]
    pub no_warmup: bool,
    #[arg(long = "num-k", global = true)]
    pub num_k: Option<usize>,
    /// Row used by `footprint` (default: middle node).
    #[arg(long, global = true)]
    pub node: Option<usize>,
    #[arg(long = "dt-min", global = true)]
    pub dt_min: Option<f64>,
    #[arg(long = "dt-max", global = true)]
    pub dt_max: Option<f64>,
    #[arg(long = "dt-count", global = true)]
    pub dt_count: Option<usize>,
    #[arg(long = "scan-steps", global = true)]
    pub scan_steps: Option<usize>,
    #[arg(long = "growth-tol", global = true)]
    pub growth_tol: Option<f64>,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_toml(&text).with_context(|| format!("parsing {}", path.display()))
    }

    /// Merge defaults, the optional config file and the flags, then validate.
    pub fn load(command: Command, flags: &Flags) -> Result<Self> {
        let mut cfg = match &flags.config {
            Some(path) => Self::from_file(path)?,
            None => Self::default(),
        };
        cfg.command = command;
        cfg.apply(flags);
        cfg.validate()?;
        Ok(cfg)
    }

    fn apply(&mut self, f: &Flags) {
        macro_rules! set {
            ($($field:ident),*) => {$(
                if let Some(v) = f.$field.clone() {
                    self.$field = Some(v);
                }
            )*};
        }
        set!(len, n, dt, t_final, policy, sigma, order_s, threads, out, node, dt_min, dt_max);
        if let Some(b) = f.benchmark {
            self.benchmark = b;
        }
        if let Some(v) = f.seed {
            self.seed = v;
        }
        if let Some(v) = f.format {
            self.format = v;
        }
        if let Some(v) = f.stride {
            self.stride = v;
        }
        if let Some(v) = f.sweep {
            self.sweep = v;
        }
        if let Some(v) = &f.ladder {
            self.ladder = v.clone();
        }
        if let Some(v) = &f.n_ladder {
            self.n_ladder = v.clone();
        }
        if let Some(v) = f.num_k {
            self.num_k = v;
        }
        if let Some(v) = f.dt_count {
            self.dt_count = v;
        }
        if let Some(v) = f.scan_steps {
            self.scan_steps = v;
        }
        if let Some(v) = f.growth_tol {
            self.growth_tol = v;
        }
        self.gnuplot |= f.gnuplot;
        self.closed_form |= f.closed_form;
        if f.no_warmup {
            self.warmup = false;
        }
    }

    /// Commands that only inspect weights accept a zero step.
    fn allows_zero_step(&self) -> bool {
        matches!(self.command, Command::Harvest | Command::Footprint)
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(len) = self.len {
            if len < 2 {
                bail!("N = {len}: need at least 2 nodes");
            }
        }
        if let Some(n) = self.n {
            if n < 2 {
                bail!("n = {n}: need at least 2 stencil nodes");
            }
        }
        if let Some(dt) = self.dt {
            let ok = dt.is_finite() && (dt > 0.0 || (dt == 0.0 && self.allows_zero_step()));
            if !ok {
                bail!("dt = {dt}: must be positive and finite");
            }
        }
        if let Some(t) = self.t_final {
            if !(t.is_finite() && t >= 0.0) {
                bail!("t-final = {t}: must be non-negative and finite");
            }
        }
        if let Some(sigma) = self.sigma {
            if !(0.0..1.0).contains(&sigma) {
                bail!("sigma = {sigma}: must lie in [0, 1)");
            }
            if self.spec.is_none() && self.benchmark != BenchmarkKind::Advection {
                bail!("sigma only applies to the advection benchmark");
            }
        }
        if self.order_s == Some(0) {
            bail!("order-s must be at least 1");
        }
        if self.threads == Some(0) {
            bail!("threads must be at least 1");
        }
        if self.num_k == 0 {
            bail!("num-k must be at least 1");
        }
        if self.dt_count < 2 {
            bail!("dt-count must be at least 2");
        }
        if self.scan_steps == 0 {
            bail!("scan-steps must be at least 1");
        }
        if !(self.growth_tol.is_finite() && self.growth_tol > 0.0) {
            bail!("growth-tol = {}: must be positive", self.growth_tol);
        }
        for (name, v) in [("dt-min", self.dt_min), ("dt-max", self.dt_max)] {
            if let Some(v) = v {
                if !(v.is_finite() && v > 0.0) {
                    bail!("{name} = {v}: must be positive and finite");
                }
            }
        }
        if let (Some(lo), Some(hi)) = (self.dt_min, self.dt_max) {
            if lo >= hi {
                bail!("dt-min = {lo} must be below dt-max = {hi}");
            }
        }
        if self.sweep > 12 {
            bail!("sweep = {}: at most 12 halvings", self.sweep);
        }
        if let Some(&v) = self.ladder.iter().find(|&&v| v < 2) {
            bail!("ladder entry {v}: need at least 2 nodes");
        }
        if let Some(&v) = self.n_ladder.iter().find(|&&v| v < 2) {
            bail!("n-ladder entry {v}: need at least 2 stencil nodes");
        }
        if self.command == Command::Scaling && self.ladder.is_empty() && self.n_ladder.is_empty() {
            bail!("scaling needs a ladder of grid sizes or stencil lengths");
        }

        let mut spec = self.benchmark_spec()?;
        if spec.delta_t == 0.0 && self.allows_zero_step() {
            spec.delta_t = 1.0;
        }
        spec.validate()?;
        if spec.stencil_len > spec.grid.len {
            bail!("n = {} exceeds N = {}", spec.stencil_len, spec.grid.len);
        }
        if let Some(node) = self.node {
            if node >= spec.grid.len {
                bail!("node {node} out of range for N = {}", spec.grid.len);
            }
        }
        Ok(())
    }

    /// The benchmark this configuration describes, with every override applied.
    pub fn benchmark_spec(&self) -> Result<BenchmarkSpec> {
        let mut spec = match &self.spec {
            Some(spec) => {
                let mut spec = spec.clone();
                if let Some(len) = self.len {
                    spec.grid.len = len;
                }
                if let Some(n) = self.n {
                    spec.stencil_len = n;
                }
                if let Some(p) = self.policy {
                    spec.policy = p.into();
                }
                spec
            }
            None => self.preset_spec()?,
        };
        if let Some(dt) = self.dt {
            spec.delta_t = dt;
        }
        if let Some(t) = self.t_final {
            spec.t_final = t;
        }
        if let Some(s) = self.order_s {
            if spec.scheme == Scheme::Linear {
                bail!("order-s needs a semi-linear benchmark; {} is linear", spec.kind.as_str());
            }
            spec.scheme = Scheme::EtdMultistep(s);
        }
        Ok(spec)
    }

    fn preset_spec(&self) -> Result<BenchmarkSpec> {
        let base = BenchmarkSpec::preset(self.benchmark);
        let len = self.len.unwrap_or(base.grid.len);
        let n = self.n.unwrap_or(base.stencil_len);
        let policy = self.policy.map(StencilPolicy::from).unwrap_or(base.policy);
        let mut spec = match self.benchmark {
            BenchmarkKind::Advection => advection_benchmark(len, n, policy, self.sigma.unwrap_or(0.0))?,
            BenchmarkKind::Advdiff => advdiff_benchmark(len, n),
            BenchmarkKind::Burgers => burgers_benchmark(len, n, self.dt.unwrap_or(base.delta_t)),
            BenchmarkKind::Kdv => kdv_benchmark(len, n),
            BenchmarkKind::AllenCahn => allen_cahn_benchmark(len, n),
        };
        spec.policy = policy;
        Ok(spec)
    }

    /// Copy with a different grid size and/or stencil length.
    pub fn with_sizes(&self, len: Option<usize>, n: Option<usize>) -> Self {
        let mut cfg = self.clone();
        if len.is_some() {
            cfg.len = len;
        }
        if n.is_some() {
            cfg.n = n;
        }
        cfg
    }
}
