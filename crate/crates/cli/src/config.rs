//! Job configuration: a single JSON document, validated before any work runs.

use serde::{Deserialize, Serialize};
use weylchar::climit::Support;
use weylchar::dynamics::HamiltonianSpec;
use weylchar::grid::PhaseGrid;
use weylchar::positivity::Composition;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Char,
    Invert,
    Pdcheck,
    Wigner,
    Climit,
    Mean,
    Evolve,
    OracleCompare,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Char => "char",
            Task::Invert => "invert",
            Task::Pdcheck => "pdcheck",
            Task::Wigner => "wigner",
            Task::Climit => "climit",
            Task::Mean => "mean",
            Task::Evolve => "evolve",
            Task::OracleCompare => "oracle-compare",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StateSpec {
    Fock { m: usize },
    Coherent { q: f64, p: f64 },
    /// Atoms `[q, p, weight]` of a Glauber-Sudarshan P-mixture.
    PMixture { atoms: Vec<[f64; 3]> },
    /// Random density matrix on the lowest `support` levels; drawn from the job seed.
    Random { support: usize, rank: usize },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub extent: Option<f64>,
    pub points: Option<usize>,
}

impl GridSpec {
    pub fn eta_xi(&self) -> weylchar::Result<PhaseGrid> {
        PhaseGrid::eta_xi(self.extent.unwrap_or(f64::NAN), self.points.unwrap_or(0))
    }

    pub fn qp(&self) -> weylchar::Result<PhaseGrid> {
        PhaseGrid::qp(self.extent.unwrap_or(f64::NAN), self.points.unwrap_or(0))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum SamplerSpec {
    /// Seeded from the job seed.
    Random { count: usize, radius: f64 },
    Lattice { spacing: f64, radius: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PdcheckSpec {
    #[serde(default = "default_composition")]
    pub composition: Composition,
    pub sampler: SamplerSpec,
    #[serde(default = "default_pd_tol")]
    pub tol: f64,
}

fn default_composition() -> Composition {
    Composition::Heisenberg
}

fn default_pd_tol() -> f64 {
    weylchar::positivity::PD_TOL
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FamilySpec {
    /// The configured state rebuilt at every `hbar`.
    State,
    FixedFock { m: usize },
    /// Fock level `round(energy / hbar)`.
    FockShell { energy: f64 },
    CoherentMixture { atoms: Vec<[f64; 3]> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSpec {
    #[serde(default = "one")]
    pub start: f64,
    #[serde(default = "half")]
    pub ratio: f64,
    #[serde(default = "six")]
    pub count: usize,
}

impl Default for ScheduleSpec {
    fn default() -> Self {
        Self { start: 1.0, ratio: 0.5, count: 6 }
    }
}

fn one() -> f64 {
    1.0
}

fn half() -> f64 {
    0.5
}

fn six() -> usize {
    6
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InvertSpec {
    pub grid: GridSpec,
    #[serde(default)]
    pub support: SupportSpec,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SupportSpec {
    #[default]
    Regular,
    Singular,
}

impl SupportSpec {
    pub fn resolve(self, grid: &PhaseGrid) -> Support {
        match self {
            SupportSpec::Regular => Support::Regular,
            SupportSpec::Singular => Support::singular_for(grid),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClimitSpec {
    pub family: FamilySpec,
    #[serde(default)]
    pub schedule: ScheduleSpec,
    /// Explicit `hbar` values; overrides `schedule`.
    #[serde(default)]
    pub hbar_schedule: Option<Vec<f64>>,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    #[serde(default)]
    pub invert: Option<InvertSpec>,
}

fn default_threshold() -> f64 {
    weylchar::climit::CONVERGENCE_THRESHOLD
}

impl ClimitSpec {
    pub fn hbars(&self) -> weylchar::Result<Vec<f64>> {
        match &self.hbar_schedule {
            Some(v) => Ok(v.clone()),
            None => weylchar::climit::geometric_schedule(self.schedule.start, self.schedule.ratio, self.schedule.count),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ObservableSpec {
    Identity,
    /// `a^dag a`
    Number,
    Position,
    Momentum,
    PositionSquared,
    MomentumSquared,
    /// `amplitude * exp(-(eta^2 + xi^2) / (2 width^2))` as a function on the grid.
    Gaussian { amplitude: f64, width: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveSpec {
    pub t: f64,
    #[serde(default = "default_steps")]
    pub steps: usize,
    #[serde(default = "default_frames")]
    pub frames: usize,
    #[serde(default)]
    pub oracle_dim: Option<usize>,
}

fn default_steps() -> usize {
    20
}

fn default_frames() -> usize {
    4
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    #[serde(default)]
    pub state: Option<StateSpec>,
    #[serde(default)]
    pub hbar: Option<f64>,
    /// Fock truncation for constructed states and reconstructions.
    #[serde(default = "default_dim")]
    pub dim: usize,
    #[serde(default)]
    pub grid: Option<GridSpec>,
    /// Output grid for `wigner`; the FFT grid is used when absent.
    #[serde(default)]
    pub out_grid: Option<GridSpec>,
    /// Characteristic-function CSV used instead of `state` by
    /// `invert`, `pdcheck`, `wigner` and `mean`.
    #[serde(default)]
    pub input: Option<String>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub pdcheck: Option<PdcheckSpec>,
    #[serde(default)]
    pub climit: Option<ClimitSpec>,
    #[serde(default)]
    pub observable: Option<ObservableSpec>,
    #[serde(default)]
    pub hamiltonian: Option<HamiltonianSpec>,
    #[serde(default)]
    pub evolve: Option<EvolveSpec>,
}

fn default_dim() -> usize {
    32
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub field: String,
    pub message: String,
}

impl Violation {
    fn new(field: &str, message: impl Into<String>) -> Self {
        Self { field: field.to_string(), message: message.into() }
    }
}

fn check_grid(out: &mut Vec<Violation>, prefix: &str, grid: Option<&GridSpec>) {
    let Some(g) = grid else {
        out.push(Violation::new(prefix, "required"));
        return;
    };
    match g.extent {
        None => out.push(Violation::new(&format!("{prefix}.extent"), "required")),
        Some(e) if !(e.is_finite() && e > 0.0) => out.push(Violation::new(&format!("{prefix}.extent"), "must be positive")),
        _ => {}
    }
    match g.points {
        None => out.push(Violation::new(&format!("{prefix}.points"), "required")),
        Some(m) if m < 8 || m % 2 != 0 => out.push(Violation::new(&format!("{prefix}.points"), "must be even and at least 8")),
        _ => {}
    }
}

fn check_positive(out: &mut Vec<Violation>, field: &str, v: f64) {
    if !(v.is_finite() && v > 0.0) {
        out.push(Violation::new(field, "must be positive"));
    }
}

fn check_atoms(out: &mut Vec<Violation>, field: &str, atoms: &[[f64; 3]]) {
    if atoms.is_empty() {
        out.push(Violation::new(field, "needs at least one atom"));
        return;
    }
    if atoms.iter().flatten().any(|v| !v.is_finite()) || atoms.iter().any(|a| a[2] < 0.0) {
        out.push(Violation::new(field, "atoms must be finite with nonnegative weights"));
        return;
    }
    let sum: f64 = atoms.iter().map(|a| a[2]).sum();
    if (sum - 1.0).abs() > 1e-12 {
        out.push(Violation::new(field, format!("weights sum to {sum}, not 1")));
    }
}

fn check_state(out: &mut Vec<Violation>, config: &JobConfig) {
    match &config.state {
        None => out.push(Violation::new("state", "required")),
        Some(StateSpec::Fock { m }) if *m >= config.dim => out.push(Violation::new("state.m", "must be below dim")),
        Some(StateSpec::Coherent { q, p }) if !(q.is_finite() && p.is_finite()) => out.push(Violation::new("state", "q and p must be finite")),
        Some(StateSpec::PMixture { atoms }) => check_atoms(out, "state.atoms", atoms),
        Some(StateSpec::Random { support, rank }) => {
            if *support == 0 || *support > config.dim {
                out.push(Violation::new("state.support", "must be in 1..=dim"));
            }
            if *rank == 0 {
                out.push(Violation::new("state.rank", "must be at least 1"));
            }
        }
        _ => {}
    }
}

fn check_hbar(out: &mut Vec<Violation>, config: &JobConfig) {
    match config.hbar {
        None => out.push(Violation::new("hbar", "required")),
        Some(h) => check_positive(out, "hbar", h),
    }
}

/// Checks for the characteristic-function source: `input`, or `state` + `hbar` + `grid`.
fn check_char_source(out: &mut Vec<Violation>, config: &JobConfig) {
    if config.input.is_some() {
        return;
    }
    check_state(out, config);
    check_hbar(out, config);
    check_grid(out, "grid", config.grid.as_ref());
}

/// All violations of `config` for `task`; empty iff the job can run.
pub fn validate(config: &JobConfig, task: Task) -> Vec<Violation> {
    let mut out = Vec::new();
    if config.hbar.is_some() {
        check_hbar(&mut out, config);
    }
    if config.dim < 2 {
        out.push(Violation::new("dim", "must be at least 2"));
    }
    match task {
        Task::Char => {
            check_state(&mut out, config);
            check_hbar(&mut out, config);
            check_grid(&mut out, "grid", config.grid.as_ref());
        }
        Task::Invert | Task::Wigner => check_char_source(&mut out, config),
        Task::Pdcheck => {
            check_char_source(&mut out, config);
            match &config.pdcheck {
                None => out.push(Violation::new("pdcheck", "required")),
                Some(p) => {
                    if !(p.tol >= 0.0) {
                        out.push(Violation::new("pdcheck.tol", "must be nonnegative"));
                    }
                    match p.sampler {
                        SamplerSpec::Random { count, radius } => {
                            if count == 0 {
                                out.push(Violation::new("pdcheck.sampler.count", "must be at least 1"));
                            }
                            check_positive(&mut out, "pdcheck.sampler.radius", radius);
                        }
                        SamplerSpec::Lattice { spacing, radius } => {
                            check_positive(&mut out, "pdcheck.sampler.spacing", spacing);
                            check_positive(&mut out, "pdcheck.sampler.radius", radius);
                        }
                    }
                }
            }
        }
        Task::Mean => {
            check_char_source(&mut out, config);
            match &config.observable {
                None => out.push(Violation::new("observable", "required")),
                Some(ObservableSpec::Gaussian { amplitude, width }) => {
                    if !amplitude.is_finite() {
                        out.push(Violation::new("observable.amplitude", "must be finite"));
                    }
                    check_positive(&mut out, "observable.width", *width);
                }
                Some(_) => {}
            }
        }
        Task::Climit => {
            check_grid(&mut out, "grid", config.grid.as_ref());
            match &config.climit {
                None => out.push(Violation::new("climit", "required")),
                Some(c) => {
                    match &c.family {
                        FamilySpec::State => check_state(&mut out, config),
                        FamilySpec::FockShell { energy } => check_positive(&mut out, "climit.family.energy", *energy),
                        FamilySpec::CoherentMixture { atoms } => check_atoms(&mut out, "climit.family.atoms", atoms),
                        FamilySpec::FixedFock { .. } => {}
                    }
                    match &c.hbar_schedule {
                        Some(v) => {
                            if v.len() < 3 || v.iter().any(|h| !(h.is_finite() && *h > 0.0)) || v.windows(2).any(|w| w[1] >= w[0]) {
                                out.push(Violation::new("climit.hbar_schedule", "needs at least 3 positive, strictly decreasing values"));
                            }
                        }
                        None => {
                            let s = &c.schedule;
                            if !(s.start > 0.0) || !(s.ratio > 0.0 && s.ratio < 1.0) || s.count < 3 {
                                out.push(Violation::new("climit.schedule", "need start > 0, 0 < ratio < 1 and count >= 3"));
                            }
                        }
                    }
                    check_positive(&mut out, "climit.threshold", c.threshold);
                    if let Some(inv) = &c.invert {
                        check_grid(&mut out, "climit.invert.grid", Some(&inv.grid));
                    }
                }
            }
        }
        Task::Evolve | Task::OracleCompare => {
            if task == Task::Evolve {
                check_char_source(&mut out, config);
            } else {
                check_state(&mut out, config);
                check_hbar(&mut out, config);
                check_grid(&mut out, "grid", config.grid.as_ref());
            }
            match &config.hamiltonian {
                None => out.push(Violation::new("hamiltonian", "required")),
                Some(h) => {
                    if let Err(e) = h.validate() {
                        out.push(Violation::new("hamiltonian", e.to_string()));
                    }
                }
            }
            match &config.evolve {
                None => out.push(Violation::new("evolve", "required")),
                Some(e) => {
                    if !(e.t.is_finite() && e.t >= 0.0) {
                        out.push(Violation::new("evolve.t", "must be finite and nonnegative"));
                    }
                    if e.steps == 0 {
                        out.push(Violation::new("evolve.steps", "must be at least 1"));
                    }
                    if e.frames == 0 {
                        out.push(Violation::new("evolve.frames", "must be at least 1"));
                    }
                }
            }
        }
    }
    if let Some(g) = &config.out_grid {
        check_grid(&mut out, "out_grid", Some(g));
    }
    out.sort_by(|a, b| a.field.cmp(&b.field));
    out.dedup();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> JobConfig {
        serde_json::from_str(s).unwrap()
    }

    #[test]
    fn minimal_config_is_valid() {
        let c = parse(r#"{"state": {"kind": "fock", "m": 1}, "hbar": 1.0, "grid": {"extent": 10.0, "points": 64}}"#);
        assert_eq!(validate(&c, Task::Char), vec![]);
        assert_eq!(c.seed, 0);
    }

    #[test]
    fn missing_extent_names_the_field() {
        let c = parse(r#"{"state": {"kind": "fock", "m": 1}, "hbar": 1.0, "grid": {"points": 64}}"#);
        let v = validate(&c, Task::Char);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].field, "grid.extent");
    }

    #[test]
    fn negative_hbar_is_rejected() {
        let c = parse(r#"{"state": {"kind": "fock", "m": 1}, "hbar": -1.0, "grid": {"extent": 10.0, "points": 64}}"#);
        let v = validate(&c, Task::Char);
        assert!(v.iter().any(|x| x.field == "hbar"), "{v:?}");
    }

    #[test]
    fn task_sections_are_required() {
        let c = parse(r#"{"state": {"kind": "fock", "m": 1}, "hbar": 1.0, "grid": {"extent": 10.0, "points": 64}}"#);
        assert!(validate(&c, Task::Pdcheck).iter().any(|x| x.field == "pdcheck"));
        assert!(validate(&c, Task::Evolve).iter().any(|x| x.field == "hamiltonian"));
        assert!(validate(&c, Task::Climit).iter().any(|x| x.field == "climit"));
    }

    #[test]
    fn default_schedule_halves_from_one() {
        let s = ScheduleSpec::default();
        assert_eq!((s.start, s.ratio, s.count), (1.0, 0.5, 6));
    }
}
