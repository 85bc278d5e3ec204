//! Task pipelines. Every artifact carries the resolved config in its metadata.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use weylchar::climit::{
    bochner_invert, classify, limit_extrapolate, CoherentMixture, FixedFock, FockShell, MatrixFamily, StateFamily,
};
use weylchar::dynamics::{evolve_char, oracle_evolve_compare, EvolveOptions, HamiltonianSpec};
use weylchar::io::{read_grid, write_complex_grid, write_real_grid, GridHeader};
use weylchar::linalg::CMatrix;
use weylchar::observables::{from_operator, mean, quadrature_moments, ObservableFunction};
use weylchar::positivity::{pd_check, PhysicalState, Sampler};
use weylchar::repr::{lowering, TruncatedRep};
use weylchar::states::{coherent_state, fock_state, p_mixture, random_state, DensityMatrix, PMixtureSpec};
use weylchar::transform::{forward, inverse, wigner, wigner_fft, CharFunction};

use crate::config::{FamilySpec, JobConfig, ObservableSpec, SamplerSpec, StateSpec, Task};
use crate::error::CliError;

/// What a finished task reports on stdout.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub task: Task,
    pub metric: (String, f64),
    pub files: Vec<PathBuf>,
}

impl Outcome {
    pub fn summary(&self) -> String {
        let files: Vec<String> = self.files.iter().map(|p| p.display().to_string()).collect();
        format!("{}: {}={:e} files={}", self.task.name(), self.metric.0, self.metric.1, files.join(","))
    }
}

struct Job<'a> {
    config: &'a JobConfig,
    out: &'a Path,
    meta: Value,
    files: Vec<PathBuf>,
}

impl Job<'_> {
    fn meta_with(&self, extra: Value) -> Value {
        let mut m = self.meta.clone();
        if let (Some(obj), Value::Object(more)) = (m.as_object_mut(), extra) {
            obj.extend(more);
        }
        m
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn write_json<T: Serialize>(&mut self, name: &str, result: &T) -> Result<(), CliError> {
        let doc = json!({ "meta": self.meta, "result": result });
        let path = self.path(name);
        let mut text = serde_json::to_string_pretty(&doc).map_err(|e| CliError::Io(e.to_string()))?;
        text.push('\n');
        fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
        self.files.push(path);
        Ok(())
    }

    fn write_complex(&mut self, name: &str, header: &GridHeader, values: &DMatrix<Complex64>) -> Result<(), CliError> {
        let path = self.path(name);
        let mut w = BufWriter::new(File::create(&path).map_err(|e| CliError::io(&path, e))?);
        write_complex_grid(&mut w, header, values)?;
        w.flush().map_err(|e| CliError::io(&path, e))?;
        self.files.push(path);
        Ok(())
    }

    fn write_real(&mut self, name: &str, header: &GridHeader, values: &DMatrix<f64>) -> Result<(), CliError> {
        let path = self.path(name);
        let mut w = BufWriter::new(File::create(&path).map_err(|e| CliError::io(&path, e))?);
        write_real_grid(&mut w, header, values)?;
        w.flush().map_err(|e| CliError::io(&path, e))?;
        self.files.push(path);
        Ok(())
    }

    fn hbar(&self) -> f64 {
        self.config.hbar.unwrap_or(f64::NAN)
    }

    fn grid(&self) -> Result<weylchar::grid::PhaseGrid, CliError> {
        Ok(self.config.grid.clone().unwrap_or_default().eta_xi()?)
    }

    fn state(&self, hbar: f64) -> Result<DensityMatrix, CliError> {
        Ok(build_state(self.config, hbar)?)
    }

    /// The characteristic function from `input`, or from `state` on `grid`.
    fn chi(&self) -> Result<CharFunction, CliError> {
        match &self.config.input {
            Some(path) => load_char(Path::new(path)),
            None => Ok(forward(&self.state(self.hbar())?, &self.grid()?)?),
        }
    }
}

pub fn build_state(config: &JobConfig, hbar: f64) -> weylchar::Result<DensityMatrix> {
    let dim = config.dim;
    match config.state.as_ref() {
        Some(StateSpec::Fock { m }) => fock_state(*m, dim, hbar),
        Some(StateSpec::Coherent { q, p }) => coherent_state(*q, *p, dim, hbar),
        Some(StateSpec::PMixture { atoms }) => p_mixture(&pmixture(atoms)?, dim, hbar),
        Some(StateSpec::Random { support, rank }) => {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            random_state(&mut rng, *support, *rank, dim, hbar)
        }
        None => Err(weylchar::Error::InvalidParameter { name: "state", reason: "required".into() }),
    }
}

fn pmixture(atoms: &[[f64; 3]]) -> weylchar::Result<PMixtureSpec> {
    PMixtureSpec::new(atoms.iter().map(|a| (a[0], a[1], a[2])).collect())
}

pub fn load_char(path: &Path) -> Result<CharFunction, CliError> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    let (header, values) = read_grid(BufReader::new(file))?;
    let grid = header.grid()?;
    let hbar = header
        .hbar
        .ok_or_else(|| CliError::Io(format!("{}: grid header carries no hbar", path.display())))?;
    Ok(CharFunction::new(hbar, grid, values)?)
}

fn observable(spec: &ObservableSpec, chi: &CharFunction, dim: usize) -> weylchar::Result<ObservableFunction> {
    let (grid, hbar) = (chi.grid(), chi.hbar());
    let op = |a: CMatrix| from_operator(&a, grid, hbar);
    match *spec {
        ObservableSpec::Identity => op(CMatrix::identity(dim, dim)),
        ObservableSpec::Number => {
            let a = lowering(dim);
            op(a.adjoint() * a)
        }
        ObservableSpec::Position => op(TruncatedRep::build_generators(hbar, dim)?.qhat().clone()),
        ObservableSpec::Momentum => op(TruncatedRep::build_generators(hbar, dim)?.phat().clone()),
        ObservableSpec::PositionSquared => {
            let q = TruncatedRep::build_generators(hbar, dim + 1)?.qhat().clone();
            op((&q * &q).view((0, 0), (dim, dim)).into_owned())
        }
        ObservableSpec::MomentumSquared => {
            let p = TruncatedRep::build_generators(hbar, dim + 1)?.phat().clone();
            op((&p * &p).view((0, 0), (dim, dim)).into_owned())
        }
        ObservableSpec::Gaussian { amplitude, width } => ObservableFunction::from_fn(hbar, *grid, |e, x| {
            Complex64::new(amplitude * (-(e * e + x * x) / (2.0 * width * width)).exp(), 0.0)
        }),
    }
}

fn matrix_json(m: &CMatrix) -> Value {
    let rows = |f: fn(&Complex64) -> f64| -> Vec<Vec<f64>> {
        (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| f(&m[(i, j)])).collect()).collect()
    };
    json!({ "re": rows(|z| z.re), "im": rows(|z| z.im) })
}

fn max_abs(v: &DMatrix<f64>) -> f64 {
    v.iter().fold(0.0f64, |a, x| a.max(x.abs()))
}

/// Runs `task`, writing its artifacts under `out`.
pub fn run(task: Task, config: &JobConfig, out: &Path) -> Result<Outcome, CliError> {
    let violations = crate::config::validate(config, task);
    if !violations.is_empty() {
        return Err(CliError::Validation(violations));
    }
    fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    let meta = json!({
        "tool": "weylchar",
        "version": env!("CARGO_PKG_VERSION"),
        "task": task.name(),
        "seed": config.seed,
        "config": config,
    });
    let mut job = Job { config, out, meta, files: Vec::new() };
    let metric = match task {
        Task::Char => run_char(&mut job)?,
        Task::Invert => run_invert(&mut job)?,
        Task::Pdcheck => run_pdcheck(&mut job)?,
        Task::Wigner => run_wigner(&mut job)?,
        Task::Climit => run_climit(&mut job)?,
        Task::Mean => run_mean(&mut job)?,
        Task::Evolve => run_evolve(&mut job)?,
        Task::OracleCompare => run_oracle(&mut job)?,
    };
    Ok(Outcome { task, metric, files: job.files })
}

fn run_char(job: &mut Job) -> Result<(String, f64), CliError> {
    let chi = job.chi()?;
    let header = GridHeader::new("char", chi.grid(), Some(chi.hbar()), job.meta.clone());
    job.write_complex("char.csv", &header, chi.values())?;
    let inv = chi.invariants();
    job.write_json("char.json", &json!({ "invariants": inv, "boundary_ratio": chi.boundary_ratio() }))?;
    Ok(("max_modulus".into(), inv.max_modulus))
}

fn run_invert(job: &mut Job) -> Result<(String, f64), CliError> {
    let chi = job.chi()?;
    let r = inverse(&chi, job.config.dim)?;
    let report = json!({
        "dim": r.rho.dim(),
        "hbar": r.rho.hbar(),
        "raw_trace": r.raw_trace,
        "hermiticity_defect": r.hermiticity_defect,
        "min_eigenvalue": r.min_eigenvalue,
        "repaired": r.repaired,
        "purity": r.rho.purity(),
        "matrix": matrix_json(r.rho.matrix()),
    });
    job.write_json("density_matrix.json", &report)?;
    Ok(("raw_trace".into(), r.raw_trace))
}

fn run_pdcheck(job: &mut Job) -> Result<(String, f64), CliError> {
    let chi = job.chi()?;
    let spec = job.config.pdcheck.clone().expect("validated");
    let sampler = match spec.sampler {
        SamplerSpec::Random { count, radius } => Sampler::Random { seed: job.config.seed, count, radius },
        SamplerSpec::Lattice { spacing, radius } => Sampler::Lattice { spacing, radius },
    };
    let report = pd_check(&PhysicalState::new(&chi), spec.composition, &sampler, spec.tol)?;
    job.write_json("pdcheck.json", &json!({ "sampler": sampler, "report": report }))?;
    Ok(("min_eigenvalue".into(), report.min_eigenvalue))
}

fn run_wigner(job: &mut Job) -> Result<(String, f64), CliError> {
    let chi = job.chi()?;
    let w = match &job.config.out_grid {
        Some(g) => wigner(&chi, &g.qp()?)?,
        None => wigner_fft(&chi)?,
    };
    let header = GridHeader::new("wigner", &w.grid, Some(chi.hbar()), job.meta.clone());
    job.write_real("wigner.csv", &header, &w.values)?;
    let origin = w.nearest(0.0, 0.0);
    job.write_json(
        "wigner.json",
        &json!({
            "origin_value": origin,
            "min": w.values.min(),
            "max": w.values.max(),
            "mass": w.mass(),
            "imag_residue": w.imag_residue,
        }),
    )?;
    Ok(("origin_value".into(), origin))
}

fn run_climit(job: &mut Job) -> Result<(String, f64), CliError> {
    let spec = job.config.climit.clone().expect("validated");
    let grid = job.grid()?;
    let hbars = spec.hbars()?;
    let config = job.config;
    let family: Box<dyn StateFamily> = match &spec.family {
        FamilySpec::State => Box::new(MatrixFamily {
            label: format!("{:?}", config.state.as_ref().expect("validated")),
            build: move |h: f64| build_state(config, h),
        }),
        FamilySpec::FixedFock { m } => Box::new(FixedFock(*m)),
        FamilySpec::FockShell { energy } => Box::new(FockShell { energy: *energy }),
        FamilySpec::CoherentMixture { atoms } => Box::new(CoherentMixture(pmixture(atoms)?)),
    };
    let result = limit_extrapolate(family.as_ref(), &hbars, &grid, spec.threshold)?;
    let class = classify(&result.extrapolated);
    let header = GridHeader::new("classical_char", &grid, None, job.meta_with(json!({ "limit": "extrapolated" })));
    job.write_complex("climit.csv", &header, result.extrapolated.values())?;
    let last_header = GridHeader::new(
        "classical_char",
        &grid,
        None,
        job.meta_with(json!({ "limit": "last", "hbar_last": hbars.last() })),
    );
    job.write_complex("climit_last.csv", &last_header, result.last.values())?;
    let mut density = Value::Null;
    if let Some(inv) = &spec.invert {
        let out = inv.grid.qp()?;
        let support = inv.support.resolve(&grid);
        let mu = bochner_invert(&result.last, &out, support)?;
        let header = GridHeader::new("classical_density", &out, None, job.meta_with(json!({ "support": support })));
        job.write_real("density.csv", &header, mu.values())?;
        density = json!({ "support": support, "summary": mu, "peak": max_abs(mu.values()) });
    }
    job.write_json("climit.json", &json!({ "convergence": result.report, "class": class, "density": density }))?;
    let last_diff = result.report.sup_differences.last().copied().unwrap_or(f64::NAN);
    Ok(("last_sup_difference".into(), last_diff))
}

fn run_mean(job: &mut Job) -> Result<(String, f64), CliError> {
    let chi = job.chi()?;
    let spec = job.config.observable.clone().expect("validated");
    let f = observable(&spec, &chi, job.config.dim)?;
    let m = mean(&f, &chi)?;
    let moments = match quadrature_moments(&chi) {
        Ok(mo) => json!(mo),
        Err(e) => json!({ "error": e.to_string() }),
    };
    job.write_json("mean.json", &json!({ "observable": spec, "mean": m, "moments": moments }))?;
    Ok(("mean".into(), m.value))
}

fn hamiltonian(job: &Job) -> HamiltonianSpec {
    job.config.hamiltonian.clone().expect("validated")
}

fn run_evolve(job: &mut Job) -> Result<(String, f64), CliError> {
    let chi = job.chi()?;
    let h = hamiltonian(job);
    let spec = job.config.evolve.clone().expect("validated");
    let opts = EvolveOptions { frames: spec.frames, oracle_dim: spec.oracle_dim, estimate_error: true };
    let evo = evolve_char(&chi, &h, spec.t, spec.steps, &opts)?;
    let mut names = Vec::new();
    for (k, (frame, &t)) in evo.frames.iter().zip(&evo.report.times).enumerate() {
        let name = format!("frame_{k:03}.csv");
        let header = GridHeader::new("char", frame.grid(), Some(frame.hbar()), job.meta_with(json!({ "frame": k, "t": t })));
        job.write_complex(&name, &header, frame.values())?;
        names.push(name);
    }
    job.write_json("evolve.json", &json!({ "frames": names, "report": evo.report }))?;
    Ok(("drift_rate".into(), evo.report.drift_rate))
}

fn run_oracle(job: &mut Job) -> Result<(String, f64), CliError> {
    let rho = job.state(job.hbar())?;
    let h = hamiltonian(job);
    let spec = job.config.evolve.clone().expect("validated");
    let cmp = oracle_evolve_compare(&rho, &h, spec.t, spec.steps, &job.grid()?, spec.frames)?;
    job.write_json("oracle.json", &cmp)?;
    Ok(("max_deviation".into(), cmp.max_deviation))
}

/// A standalone matplotlib script that renders every CSV grid in `files`.
pub fn write_plotscript(out: &Path, files: &[PathBuf]) -> Result<PathBuf, CliError> {
    let names: Vec<String> = files
        .iter()
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .filter_map(|p| p.file_name().map(|n| format!("{:?}", n.to_string_lossy())))
        .collect();
    let script = format!(
        r#"import json
import os
import sys

import matplotlib.pyplot as plt
import numpy as np

HERE = os.path.dirname(os.path.abspath(__file__))
FILES = [{files}]


def load(name):
    with open(os.path.join(HERE, name)) as f:
        header = json.loads(f.readline()[2:])
        columns = f.readline().strip().split(",")
        data = np.loadtxt(f, delimiter=",")
    m = header["points"]
    fields = {{c: data[:, k].reshape(m, m) for k, c in enumerate(columns)}}
    return header, columns, fields


for name in FILES:
    header, columns, fields = load(name)
    x, y = fields[columns[0]], fields[columns[1]]
    extent = [x.min(), x.max(), y.min(), y.max()]
    value_columns = columns[2:]
    fig, axes = plt.subplots(1, len(value_columns), figsize=(5 * len(value_columns), 4), squeeze=False)
    for ax, c in zip(axes[0], value_columns):
        im = ax.imshow(fields[c].T, origin="lower", extent=extent, cmap="RdBu_r")
        ax.set_xlabel(columns[0])
        ax.set_ylabel(columns[1])
        ax.set_title(f"{{header['quantity']}} ({{c}})")
        fig.colorbar(im, ax=ax)
    fig.tight_layout()
    fig.savefig(os.path.join(HERE, os.path.splitext(name)[0] + ".png"), dpi=120)
    plt.close(fig)

if "--show" in sys.argv:
    plt.show()
"#,
        files = names.join(", ")
    );
    let path = out.join("plot.py");
    fs::write(&path, script).map_err(|e| CliError::io(&path, e))?;
    Ok(path)
}
