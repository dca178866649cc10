//! Scenario pipeline: spectrum → tensor → generator → trajectory / steady
//! state / classification, with artifacts and a manifest per run.

use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use collisional::collision::{check_detailed_balance, check_sum_rule, fmt17, write_tensor};
use collisional::linalg::trace_distance;
use collisional::*;
use rayon::prelude::*;

use crate::config::{MethodChoice, ScenarioConfig};
use crate::manifest::RunManifest;

/// How far down the pipeline a command goes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Stage {
    Spectrum,
    Tensor,
    Evolve,
    Steady,
    Classify,
    Full,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Spectrum => "spectrum",
            Stage::Tensor => "tensor",
            Stage::Evolve => "evolve",
            Stage::Steady => "steady",
            Stage::Classify => "classify",
            Stage::Full => "run",
        }
    }

    fn wants(self, part: Stage) -> bool {
        self == Stage::Full || self == part || (part == Stage::Tensor && self > Stage::Spectrum)
    }
}

/// In-memory results of one scenario, alongside its manifest.
pub struct Outcome {
    pub manifest: RunManifest,
    pub spectrum: Option<Spectrum64>,
    pub trajectory: Option<Trajectory64>,
}

pub const TRAJECTORY_FILE: &str = "trajectory.csv";
pub const STEADY_FILE: &str = "steady.csv";
pub const CLASSIFY_FILE: &str = "classify.txt";
pub const SPECTRUM_FILE: &str = "spectrum.csv";
pub const TENSOR_FILE: &str = "tensor.txt";

/// Relative size of the largest off-identity entry below which the manifest
/// notes an identity map.
const IDENTITY_TOL: f64 = 1e-12;

pub fn observable_spec(config: &ScenarioConfig, spectrum: &Spectrum64) -> ObservableSpec {
    let mut spec = ObservableSpec::default_for(spectrum);
    if let Some([j, k]) = config.outputs.beta_pair {
        spec.beta_pair = (j, k);
    }
    if let Some(list) = &config.outputs.coherences {
        spec.coherences = list.iter().map(|&[a, b]| (a, b)).collect();
    }
    spec
}

/// Initial state in the energy eigenbasis.
pub fn initial_state(config: &ScenarioConfig, spectrum: &Spectrum64) -> Result<DensityMatrix64> {
    let n = config.n_qubits;
    let key = config.initial_state.trim();
    let rho = match key {
        "ground" => product_state(&"0".repeat(n), n)?,
        "gibbs" => gibbs_state(spectrum, config.beta),
        "local-thermal" => local_thermal_state(&config.chain_spec())?,
        bits if bits.len() == n && bits.chars().all(|c| c == '0' || c == '1') => {
            product_state(bits, n)?
        }
        path => read_density_matrix(Path::new(path), 1 << n)?,
    };
    Ok(rho.in_eigenbasis(spectrum))
}

/// `d` rows of `re,im` pairs in the local basis; `#` lines are comments.
pub fn read_density_matrix(path: &Path, d: usize) -> Result<DensityMatrix64> {
    let text = std::fs::read_to_string(path).with_context(|| {
        format!(
            "initial_state '{}' is neither a keyword, a bit string nor a readable file",
            path.display()
        )
    })?;
    let mut rows = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let values: Vec<f64> = line
            .split(',')
            .map(|f| f.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .with_context(|| {
                format!("{}: line {}: expected comma-separated numbers", path.display(), n + 1)
            })?;
        if values.len() != 2 * d {
            bail!(
                "{}: line {}: expected {} numbers, found {}",
                path.display(),
                n + 1,
                2 * d,
                values.len()
            );
        }
        rows.push(values);
    }
    if rows.len() != d {
        bail!("{}: expected {d} rows, found {}", path.display(), rows.len());
    }
    let data = CMatrix64::from_fn(d, d, |i, j| Complex::new(rows[i][2 * j], rows[i][2 * j + 1]));
    let rho = DensityMatrix64::new(data, Basis::Local);
    rho.validate(1e-10).with_context(|| format!("{} is not a density matrix", path.display()))?;
    Ok(rho)
}

pub fn spectrum_csv(s: &Spectrum64) -> String {
    let mut out = String::from("# spectrum\n");
    let _ = writeln!(out, "# format_version = {}", collisional::collision::FORMAT_VERSION);
    out.push_str("index,energy,local_energy,excitations\n");
    for j in 0..s.dim() {
        let _ = writeln!(
            out,
            "{j},{},{},{}",
            fmt17(s.energies[j]),
            fmt17(s.local_energies[j]),
            s.excitations[j]
        );
    }
    out
}

pub fn steady_csv(
    config: &ScenarioConfig,
    s: &Spectrum64,
    rho: &DensityMatrix64,
    variant: Variant,
) -> Result<String> {
    let spec = observable_spec(config, s);
    let obs = observables(rho, s, &spec)?;
    let gibbs = gibbs_state(s, config.beta);
    let local = local_gibbs_state(s, config.beta);
    let rho = rho.in_eigenbasis(s);
    let opt = |x: Option<f64>| x.map_or_else(|| "NaN".to_string(), fmt17);
    let mut out = String::from("# steady-state\n");
    let _ = writeln!(out, "# format_version = {}", collisional::collision::FORMAT_VERSION);
    let _ = writeln!(out, "# variant = {variant}");
    let _ = writeln!(out, "# beta_pair = {},{}", spec.beta_pair.0, spec.beta_pair.1);
    let _ = writeln!(out, "# beta_eff = {}", opt(obs.beta_eff));
    let _ = writeln!(out, "# rho123_over_rho00 = {}", opt(obs.first_band_ratio));
    let _ = writeln!(
        out,
        "# trace_distance_gibbs = {}",
        fmt17(trace_distance(&rho.data, &gibbs.data)?)
    );
    let _ = writeln!(
        out,
        "# trace_distance_local_gibbs = {}",
        fmt17(trace_distance(&rho.data, &local.data)?)
    );
    for (&(a, b), z) in spec.coherences.iter().zip(&obs.coherences) {
        let _ = writeln!(out, "# rho_{a}_{b} = {},{}", fmt17(z.re), fmt17(z.im));
    }
    out.push_str("index,energy,excitations,population,gibbs_population\n");
    for j in 0..s.dim() {
        let _ = writeln!(
            out,
            "{j},{},{},{},{}",
            fmt17(s.energies[j]),
            s.excitations[j],
            fmt17(obs.populations[j]),
            fmt17(gibbs.data[(j, j)].re)
        );
    }
    Ok(out)
}

/// Propagates with the configured method, falling back to Runge–Kutta when
/// the generator's eigenbasis is too ill-conditioned.
pub fn propagate(
    l: &Liouvillian64,
    rho0: &DensityMatrix64,
    times: &[f64],
    choice: MethodChoice,
    notes: &mut Vec<String>,
) -> Result<Trajectory64> {
    let method = match choice {
        MethodChoice::Spectral => Method::SpectralExp,
        MethodChoice::Rk4 => Method::Rk4,
    };
    match evolve(l, rho0, times, method) {
        Err(Error::IllConditionedSpectral { condition }) => {
            notes.push(format!(
                "spectral propagation ill-conditioned (condition {condition:.3e}); used rk4"
            ));
            Ok(evolve(l, rho0, times, Method::Rk4)?)
        }
        other => Ok(other?),
    }
}

/// Records the structural checks of `tensor` in the manifest.
pub fn record_tensor_checks(
    m: &mut RunManifest,
    tensor: &CollisionTensor64,
    s: &Spectrum64,
    beta: f64,
) -> Result<()> {
    m.check("tp_defect", tensor.tp_defect());
    m.check("hermiticity_defect", tensor.hermiticity_defect());
    m.check("choi_min_eigenvalue", tensor.choi_min_eigenvalue()?);
    m.check("detailed_balance_residual", check_detailed_balance(tensor, s, beta));
    if tensor.variant == Variant::Local {
        m.check("sum_rule_residual", check_sum_rule(tensor, s, beta)?);
    }
    if let Some(q) = &tensor.quadrature {
        m.check("quadrature_max_error", q.max_error);
        if q.unclassified > 0 {
            m.notes.push(format!(
                "{} tuples with intermediate Bohr frequencies set to zero",
                q.unclassified
            ));
        }
    }
    let identity = CollisionTensor64::identity(tensor.dim, tensor.variant);
    if tensor.max_difference(&identity, |_| true)? <= IDENTITY_TOL {
        m.notes.push("identity tensor: the reservoir does not act on the chain".into());
    }
    Ok(())
}

/// Runs one scenario into `dir`. A manifest is written in every case; on
/// failure it is marked `failed` and lists whatever was produced.
pub fn run_scenario(config: &ScenarioConfig, dir: &Path, stage: Stage) -> Result<Outcome> {
    let mut manifest = RunManifest::new(stage.name(), config);
    let mut outcome = Outcome { manifest: manifest.clone(), spectrum: None, trajectory: None };
    let result = run_inner(config, dir, stage, &mut manifest, &mut outcome);
    match &result {
        Ok(()) => manifest.status = "completed".into(),
        Err(e) => manifest.error = Some(format!("{e:#}")),
    }
    manifest.save(dir).with_context(|| format!("cannot write manifest in {}", dir.display()))?;
    result?;
    outcome.manifest = manifest;
    Ok(outcome)
}

fn run_inner(
    config: &ScenarioConfig,
    dir: &Path,
    stage: Stage,
    m: &mut RunManifest,
    out: &mut Outcome,
) -> Result<()> {
    config.validate()?;
    std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let spec = config.chain_spec();
    let variant = config.variant()?;

    let clock = Instant::now();
    let s = spectrum(&spec)?;
    m.timings.insert("spectrum".into(), clock.elapsed().as_secs_f64());
    if stage.wants(Stage::Spectrum) {
        m.write(dir, SPECTRUM_FILE, &spectrum_csv(&s))?;
    }
    out.spectrum = Some(s.clone());
    if stage == Stage::Spectrum {
        return Ok(());
    }

    let clock = Instant::now();
    let tensor = assemble_tensor(&spec, &s, variant, &config.quadrature_config())?;
    m.timings.insert("tensor".into(), clock.elapsed().as_secs_f64());
    m.write(dir, TENSOR_FILE, &write_tensor(&tensor))?;
    record_tensor_checks(m, &tensor, &s, config.beta)?;
    if stage == Stage::Tensor {
        return Ok(());
    }

    let l = poisson_generator(&s.hamiltonian(), &tensor, config.gamma)?;
    if stage.wants(Stage::Evolve) {
        let clock = Instant::now();
        let rho0 = initial_state(config, &s)?;
        let traj = propagate(&l, &rho0, &config.times(), config.method()?, &mut m.notes)?;
        m.timings.insert("evolve".into(), clock.elapsed().as_secs_f64());
        m.write(dir, TRAJECTORY_FILE, &traj.to_csv(&s, &observable_spec(config, &s))?)?;
        out.trajectory = Some(traj);
    }
    if stage.wants(Stage::Steady) {
        let clock = Instant::now();
        let ss = steady_state(&l)?;
        m.timings.insert("steady".into(), clock.elapsed().as_secs_f64());
        m.check(
            "steady_trace_distance_gibbs",
            trace_distance(&ss.data, &gibbs_state(&s, config.beta).data)?,
        );
        m.write(dir, STEADY_FILE, &steady_csv(config, &s, &ss, variant)?)?;
    }
    if stage.wants(Stage::Classify) {
        let clock = Instant::now();
        let text = match kraus_decomposition(&tensor, 1e-10) {
            Ok(kraus) => {
                let report =
                    classify(&tensor, &kraus, &s, config.beta, analysis::CLASSIFY_TOL, 1e-6)?;
                m.check("kraus_completeness_defect", report.kraus_completeness_defect);
                m.check("gibbs_defect", report.gibbs_defect);
                let lp = generic_generator(&s.hamiltonian(), &kraus.operators, config.gamma)?;
                m.check("poisson_identity_defect", linalg::max_abs(&(&lp.matrix - &l.matrix)));
                report.to_text()
            }
            Err(e) => {
                m.notes.push(format!("classification unavailable: {e}"));
                format!(
                    "format_version: {}\nvariant: {variant}\nclassification: unavailable\nreason: {e}\n",
                    collisional::collision::FORMAT_VERSION
                )
            }
        };
        m.timings.insert("classify".into(), clock.elapsed().as_secs_f64());
        m.write(dir, CLASSIFY_FILE, &text)?;
    }
    Ok(())
}

/// Name of the subdirectory holding one sweep point.
pub fn point_dir(parameter: &str, value: f64) -> String {
    format!("{parameter}_{value:e}")
}

/// Runs every sweep point (in parallel) into its own subdirectory and writes
/// the combined `ρ_123/ρ_00` dataset.
pub fn run_sweep(config: &ScenarioConfig, dir: &Path) -> Result<RunManifest> {
    config.validate()?;
    let Some(parameter) = config.sweep_parameter()? else {
        bail!("the configuration has no [sweep] section");
    };
    let values = config.sweep.as_ref().map(|s| s.values.clone()).unwrap_or_default();
    let mut manifest = RunManifest::new("sweep", config);
    let clock = Instant::now();
    let results: Vec<(f64, Result<Outcome>)> = values
        .par_iter()
        .map(|&v| {
            let sub = dir.join(point_dir(parameter.name(), v));
            (v, run_scenario(&config.with_parameter(parameter, v), &sub, Stage::Full))
        })
        .collect();
    manifest.timings.insert("sweep".into(), clock.elapsed().as_secs_f64());

    let mut failures = Vec::new();
    let mut columns = Vec::new();
    for (v, r) in &results {
        let name = point_dir(parameter.name(), *v);
        match r {
            Ok(o) => {
                for a in &o.manifest.artifacts {
                    manifest.artifacts.push(crate::manifest::Artifact {
                        path: format!("{name}/{}", a.path),
                        ..a.clone()
                    });
                }
                let (s, t) = (
                    o.spectrum.as_ref().expect("spectrum"),
                    o.trajectory.as_ref().expect("trajectory"),
                );
                let spec = ObservableSpec { beta_pair: (0, 0), coherences: vec![] };
                let ratios: Vec<Option<f64>> =
                    t.observables(s, &spec)?.into_iter().map(|o| o.first_band_ratio).collect();
                columns.push((name, ratios));
            }
            Err(e) => failures.push(format!("{name}: {e:#}")),
        }
    }
    let times = config.times();
    let mut csv = String::from("# sweep ratio rho123_over_rho00\n");
    let _ = writeln!(csv, "# format_version = {}", collisional::collision::FORMAT_VERSION);
    let _ = writeln!(csv, "# parameter = {}", parameter.name());
    let header: Vec<String> =
        std::iter::once("t".to_string()).chain(columns.iter().map(|(n, _)| n.clone())).collect();
    let _ = writeln!(csv, "{}", header.join(","));
    for (i, &t) in times.iter().enumerate() {
        let mut row = vec![fmt17(t)];
        row.extend(columns.iter().map(|(_, c)| c[i].map_or_else(|| "NaN".into(), fmt17)));
        let _ = writeln!(csv, "{}", row.join(","));
    }
    manifest.write(dir, "sweep_ratio.csv", &csv)?;
    if failures.is_empty() {
        manifest.status = "completed".into();
    } else {
        manifest.error = Some(failures.join("; "));
    }
    manifest.save(dir)?;
    if !failures.is_empty() {
        bail!(
            "{} of {} sweep points failed: {}",
            failures.len(),
            values.len(),
            failures.join("; ")
        );
    }
    Ok(manifest)
}
