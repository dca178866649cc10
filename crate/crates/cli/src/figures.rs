//! Datasets behind the three figures: the ε crossover of the thermalization
//! plateau, inter-band thermometry across variants, and intra-band populations.

use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use anyhow::{Context, Result};
use collisional::collision::fmt17;
use collisional::*;
use rayon::prelude::*;

use crate::config::{ScenarioConfig, SweepParameter};
use crate::manifest::RunManifest;
use crate::pipeline::{initial_state, propagate, record_tensor_checks};
use crate::svg::{Chart, Series};

/// ε values of the crossover panel. The figure does not list its curves;
/// these span the plateau-free and plateau regimes.
pub const FIG2_SWEEP: [f64; 5] = [1e-1, 1e-2, 1e-3, 1e-4, 5e-5];

#[derive(Debug, thiserror::Error)]
#[error("unknown figure '{0}' (expected fig2, fig3 or fig4)")]
pub struct UnknownFigure(pub String);

struct Run {
    epsilon: f64,
    variant: Variant,
    spectrum: Spectrum64,
    trajectory: Trajectory64,
    steady: DensityMatrix64,
    notes: Vec<String>,
    tensor: CollisionTensor64,
}

fn simulate(base: &ScenarioConfig, variant: Variant, epsilon: f64) -> Result<Run> {
    let mut config = base.with_parameter(SweepParameter::Epsilon, epsilon);
    config.variant = variant.name().into();
    config.validate()?;
    let spec = config.chain_spec();
    let s = spectrum(&spec)?;
    let tensor = assemble_tensor(&spec, &s, variant, &config.quadrature_config())
        .with_context(|| format!("{variant} tensor at epsilon = {epsilon:e}"))?;
    let l = poisson_generator(&s.hamiltonian(), &tensor, config.gamma)?;
    let mut notes = Vec::new();
    let trajectory =
        propagate(&l, &initial_state(&config, &s)?, &config.times(), config.method()?, &mut notes)?;
    let steady = steady_state(&l)?;
    Ok(Run { epsilon, variant, spectrum: s, trajectory, steady, notes, tensor })
}

fn simulate_all(base: &ScenarioConfig, jobs: &[(Variant, f64)]) -> Result<Vec<Run>> {
    jobs.par_iter().map(|&(v, e)| simulate(base, v, e)).collect()
}

fn preamble(title: &str) -> String {
    let mut out = format!("# {title}\n");
    let _ = writeln!(out, "# format_version = {}", collisional::collision::FORMAT_VERSION);
    out
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "NaN".into(), fmt17)
}

/// Writes a table whose first column is time.
fn time_table(mut out: String, times: &[f64], columns: &[(String, Vec<f64>)]) -> String {
    let header: Vec<&str> =
        std::iter::once("t").chain(columns.iter().map(|c| c.0.as_str())).collect();
    let _ = writeln!(out, "{}", header.join(","));
    for (i, &t) in times.iter().enumerate() {
        let row: Vec<String> = std::iter::once(fmt17(t))
            .chain(
                columns.iter().map(|c| if c.1[i].is_nan() { "NaN".into() } else { fmt17(c.1[i]) }),
            )
            .collect();
        let _ = writeln!(out, "{}", row.join(","));
    }
    out
}

fn series(name: String, times: &[f64], values: &[f64]) -> Series {
    Series { name, points: times.iter().copied().zip(values.iter().copied()).collect() }
}

fn ratios(run: &Run) -> Result<Vec<f64>> {
    let spec = ObservableSpec::default_for(&run.spectrum);
    Ok(run
        .trajectory
        .observables(&run.spectrum, &spec)?
        .iter()
        .map(|o| o.first_band_ratio.unwrap_or(f64::NAN))
        .collect())
}

/// First-band over ground population of the Gibbs state at the given spectrum.
fn gibbs_ratio(s: &Spectrum64, beta: f64) -> f64 {
    let ground = (-beta * s.energies[0]).exp();
    s.bands[1].iter().map(|&i| (-beta * s.energies[i]).exp()).sum::<f64>() / ground
}

pub fn reproduce(figure: &str, base: &ScenarioConfig, dir: &Path) -> Result<RunManifest> {
    let mut manifest = RunManifest::new(&format!("reproduce {figure}"), base);
    let clock = Instant::now();
    let result = match figure {
        "fig2" => fig2(base, dir, &mut manifest),
        "fig3" => fig3(base, dir, &mut manifest),
        "fig4" => fig4(base, dir, &mut manifest),
        other => return Err(UnknownFigure(other.to_string()).into()),
    };
    manifest.timings.insert("total".into(), clock.elapsed().as_secs_f64());
    match &result {
        Ok(()) => manifest.status = "completed".into(),
        Err(e) => manifest.error = Some(format!("{e:#}")),
    }
    manifest.save(dir)?;
    result.map(|()| manifest)
}

fn record(manifest: &mut RunManifest, runs: &[Run], beta: f64) -> Result<()> {
    for r in runs {
        let mut m = RunManifest::new("", &manifest.config);
        record_tensor_checks(&mut m, &r.tensor, &r.spectrum, beta)?;
        let tag = format!("{}_eps_{:e}", r.variant.name(), r.epsilon);
        for (k, v) in m.checks {
            manifest.check(&format!("{tag}.{k}"), v);
        }
        manifest.notes.extend(
            m.notes.into_iter().chain(r.notes.iter().cloned()).map(|n| format!("{tag}: {n}")),
        );
    }
    Ok(())
}

fn fig2(base: &ScenarioConfig, dir: &Path, manifest: &mut RunManifest) -> Result<()> {
    let times = base.times();
    let jobs: Vec<(Variant, f64)> = FIG2_SWEEP.iter().map(|&e| (Variant::Exact, e)).collect();
    let runs = simulate_all(base, &jobs)?;
    record(manifest, &runs, base.beta)?;

    // Populations for the two extreme couplings.
    for run in runs.iter().filter(|r| r.epsilon == 1e-1 || r.epsilon == 5e-5) {
        let d = run.spectrum.dim();
        let columns: Vec<(String, Vec<f64>)> = (0..d)
            .map(|j| {
                (
                    format!("rho_{j}_{j}"),
                    run.trajectory.states.iter().map(|s| s.data[(j, j)].re).collect(),
                )
            })
            .collect();
        let name = format!("fig2_populations_eps_{:e}", run.epsilon);
        let mut head = preamble("eigenstate populations, exact map");
        let _ = writeln!(head, "# epsilon = {}", fmt17(run.epsilon));
        manifest.write(dir, &format!("{name}.csv"), &time_table(head, &times, &columns))?;
        if base.outputs.emit_plots {
            let chart = Chart {
                title: format!("Populations, ε = {:e}", run.epsilon),
                x_label: "t".into(),
                y_label: "ρ_jj".into(),
                log_x: true,
                series: columns.iter().map(|(n, v)| series(n.clone(), &times, v)).collect(),
                references: vec![],
            };
            manifest.write(dir, &format!("{name}.svg"), &chart.render())?;
        }
    }

    // Crossover panel with the local and global reference ratios.
    let beta = base.beta;
    let reference_local = (-beta * base.h).exp();
    let flat = spectrum(&base.with_parameter(SweepParameter::Epsilon, 0.0).chain_spec())?;
    let reference_global = gibbs_ratio(&flat, beta);
    let mut head = preamble("rho123_over_rho00 for several epsilon, exact map");
    let _ = writeln!(head, "# reference_local = {}", fmt17(reference_local));
    let _ = writeln!(head, "# reference_global_eps0 = {}", fmt17(reference_global));
    let mut columns = Vec::new();
    for run in &runs {
        let _ = writeln!(
            head,
            "# gibbs_ratio_eps_{:e} = {}",
            run.epsilon,
            fmt17(gibbs_ratio(&run.spectrum, beta))
        );
        columns.push((format!("eps_{:e}", run.epsilon), ratios(run)?));
    }
    manifest.check("reference_local", reference_local);
    manifest.check("reference_global", reference_global);
    manifest.write(dir, "fig2d_ratio.csv", &time_table(head, &times, &columns))?;
    if base.outputs.emit_plots {
        let chart = Chart {
            title: "ρ_123/ρ_00".into(),
            x_label: "t".into(),
            y_label: "ratio".into(),
            log_x: true,
            series: columns.iter().map(|(n, v)| series(n.clone(), &times, v)).collect(),
            references: vec![
                ("local".into(), reference_local),
                ("global".into(), reference_global),
            ],
        };
        manifest.write(dir, "fig2d_ratio.svg", &chart.render())?;
    }
    Ok(())
}

fn fig3(base: &ScenarioConfig, dir: &Path, manifest: &mut RunManifest) -> Result<()> {
    let times = base.times();
    let variants = [Variant::Exact, Variant::Local, Variant::Narrow];
    for eps in [0.1, 3e-3] {
        let jobs: Vec<(Variant, f64)> = variants.iter().map(|&v| (v, eps)).collect();
        let runs = simulate_all(base, &jobs)?;
        record(manifest, &runs, base.beta)?;
        let s = &runs[0].spectrum;
        let spec = ObservableSpec { coherences: vec![(2, 3)], ..ObservableSpec::default_for(s) };
        let mut betas = Vec::new();
        let mut coherences = Vec::new();
        let mut head = preamble("inter-band temperature and rho_23 per variant");
        let _ = writeln!(head, "# epsilon = {}", fmt17(eps));
        let _ = writeln!(head, "# beta_pair = {},{}", spec.beta_pair.0, spec.beta_pair.1);
        let _ = writeln!(head, "# reservoir_beta = {}", fmt17(base.beta));
        for run in &runs {
            let obs = run.trajectory.observables(&run.spectrum, &spec)?;
            let steady = observables(&run.steady, &run.spectrum, &spec)?;
            let _ = writeln!(
                head,
                "# steady_beta_eff_{} = {}",
                run.variant.name(),
                opt(steady.beta_eff)
            );
            betas.push((
                format!("beta_eff_{}", run.variant.name()),
                obs.iter().map(|o| o.beta_eff.unwrap_or(f64::NAN)).collect::<Vec<_>>(),
            ));
            coherences.push((
                format!("abs_rho_2_3_{}", run.variant.name()),
                obs.iter().map(|o| o.coherences[0].norm()).collect::<Vec<_>>(),
            ));
        }
        let columns: Vec<(String, Vec<f64>)> = betas.iter().chain(&coherences).cloned().collect();
        let name = format!("fig3_eps_{eps:e}");
        manifest.write(dir, &format!("{name}.csv"), &time_table(head, &times, &columns))?;
        if base.outputs.emit_plots {
            let beta_chart = Chart {
                title: format!("β_eff(0→2), ε = {eps:e}"),
                x_label: "t".into(),
                y_label: "β_eff".into(),
                log_x: true,
                series: betas.iter().map(|(n, v)| series(n.clone(), &times, v)).collect(),
                references: vec![("β".into(), base.beta)],
            };
            manifest.write(dir, &format!("{name}_beta.svg"), &beta_chart.render())?;
            let coherence_chart = Chart {
                title: format!("|ρ_23|, ε = {eps:e}"),
                x_label: "t".into(),
                y_label: "|ρ_23|".into(),
                log_x: true,
                series: coherences.iter().map(|(n, v)| series(n.clone(), &times, v)).collect(),
                references: vec![],
            };
            manifest.write(dir, &format!("{name}_rho23.svg"), &coherence_chart.render())?;
        }
    }
    Ok(())
}

fn fig4(base: &ScenarioConfig, dir: &Path, manifest: &mut RunManifest) -> Result<()> {
    let times = base.times();
    let runs = simulate_all(base, &[(Variant::Exact, 0.1), (Variant::Local, 0.1)])?;
    record(manifest, &runs, base.beta)?;
    let s = &runs[0].spectrum;
    let d = s.dim();
    let mut columns = Vec::new();
    for run in &runs {
        for j in 0..d {
            let values = run.trajectory.states.iter().map(|st| st.data[(j, j)].re).collect();
            columns.push((format!("{}_rho_{j}_{j}", run.variant.name()), values));
        }
    }
    let mut head = preamble("eigenstate populations, exact and local maps");
    let _ = writeln!(head, "# epsilon = {}", fmt17(0.1));
    manifest.write(dir, "fig4_populations.csv", &time_table(head, &times, &columns))?;

    let mut steady = preamble("steady eigenstate populations");
    steady.push_str("index,energy,excitations,exact,local,gibbs\n");
    let gibbs = gibbs_state(s, base.beta);
    let pops: Vec<Vec<f64>> =
        runs.iter().map(|r| r.steady.in_eigenbasis(&r.spectrum).populations()).collect();
    for j in 0..d {
        let _ = writeln!(
            steady,
            "{j},{},{},{},{},{}",
            fmt17(s.energies[j]),
            s.excitations[j],
            fmt17(pops[0][j]),
            fmt17(pops[1][j]),
            fmt17(gibbs.data[(j, j)].re)
        );
    }
    manifest.write(dir, "fig4_steady.csv", &steady)?;
    if base.outputs.emit_plots {
        let band = &s.bands[1];
        let chart = Chart {
            title: "One-excitation band populations, ε = 0.1".into(),
            x_label: "t".into(),
            y_label: "ρ_jj".into(),
            log_x: true,
            series: columns
                .iter()
                .filter(|(n, _)| band.iter().any(|j| n.ends_with(&format!("_rho_{j}_{j}"))))
                .map(|(n, v)| series(n.clone(), &times, v))
                .collect(),
            references: vec![],
        };
        manifest.write(dir, "fig4_populations.svg", &chart.render())?;
    }
    Ok(())
}
