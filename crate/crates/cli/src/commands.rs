use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use emhd_core::diagnostics::{
    budget, budget_table, cross_energy_residual, flux_spectrum, generalized_helicity_identity,
    region_classify, uniqueness_bound_check, TestFunction, UniquenessReport,
};
use emhd_core::field::init::random_shells;
use emhd_core::littlewood_paley::{besov_norm, shell_amplitudes};
use emhd_core::solver::{evolve, evolve_from, evolve_potential, initial_field};
use emhd_core::table::{Cell, Table};
use emhd_core::{BesovSpec, Error, LpFamily, Snapshot, SolverConfig, SpectralField, Trajectory};

use crate::manifest::{digest, Recorder};
use crate::Failure;

type Outcome = Result<(), Failure>;

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure {
        code: 1,
        message: format!("i/o error on {}: {e}", path.display()),
    }
}

fn read_config(path: &Path) -> Result<SolverConfig, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| io_failure(path, e))?;
    Ok(SolverConfig::parse(&text)?)
}

fn out_dir(flag: Option<PathBuf>, cfg: Option<&SolverConfig>, fallback: &str) -> PathBuf {
    flag.or_else(|| cfg.and_then(|c| c.out_dir.clone()))
        .unwrap_or_else(|| PathBuf::from(fallback))
}

fn create(dir: &Path) -> Outcome {
    std::fs::create_dir_all(dir).map_err(|e| io_failure(dir, e))
}

fn save(table: &Table, dir: &Path, name: &str, rec: &mut Recorder) -> Outcome {
    table.save(dir.join(name))?;
    rec.add(name);
    Ok(())
}

/// Snapshots, step log, budget and resolved config of a (possibly partial) run.
fn write_trajectory(traj: &Trajectory, dir: &Path, rec: &mut Recorder) -> Outcome {
    let cfg = &traj.config;
    for (i, b) in traj.snapshots.iter().enumerate() {
        let name = format!("snap_{i:05}.bin");
        Snapshot::new(b.clone(), cfg.mu, cfg.d_i).write(dir.join(&name))?;
        rec.add(name);
    }
    save(&traj.log_table(), dir, "log.csv", rec)?;
    save(&budget_table(&budget(traj)), dir, "budget.csv", rec)?;
    let path = dir.join("config.resolved");
    std::fs::write(&path, cfg.resolved_text()).map_err(|e| io_failure(&path, e))?;
    rec.add("config.resolved");
    Ok(())
}

pub fn run(config: &Path, out: Option<PathBuf>, potential: bool) -> Outcome {
    let cfg = read_config(config)?;
    let resolved = cfg.resolved_text();
    let dir = out_dir(out, Some(&cfg), "emhd_out");
    let mut rec = Recorder::new("run", &resolved);
    let result = if potential { evolve_potential(&cfg) } else { evolve(&cfg) };
    match result {
        Ok(traj) => {
            create(&dir)?;
            write_trajectory(&traj, &dir, &mut rec)?;
            rec.finish(&dir, "ok")
        }
        Err(Error::Unstable(inst)) => {
            create(&dir)?;
            if let Some(partial) = &inst.partial {
                write_trajectory(partial, &dir, &mut rec)?;
            }
            rec.finish(&dir, "unstable")?;
            Err(Failure {
                code: 2,
                message: format!("{inst}; partial artifacts kept in {}", dir.display()),
            })
        }
        Err(e) => Err(e.into()),
    }
}

pub fn diagnose(snapshot: &Path, besov: &[String]) -> Outcome {
    let specs = besov
        .iter()
        .map(|s| BesovSpec::parse(s))
        .collect::<Result<Vec<_>, _>>()?;
    let b = Snapshot::read(snapshot)?.field;
    let mut text = shell_amplitudes(&b)?.to_table().render();
    if !specs.is_empty() {
        let mut t = Table::new(&["s", "p", "q", "besov_norm"]);
        for spec in &specs {
            t.push(vec![spec.s.into(), spec.p.into(), spec.q.into(), besov_norm(&b, spec)?.into()]);
        }
        text.push('\n');
        text.push_str(&t.render());
    }
    print!("{text}");
    Ok(())
}

/// Canonical argument text for commands without a config file; the snapshot
/// enters through its content digest so the hash ignores its location.
fn snapshot_args(command: &str, snapshot: &Path, args: &[(&str, String)]) -> Result<String, Failure> {
    let bytes = std::fs::read(snapshot).map_err(|e| io_failure(snapshot, e))?;
    let mut text = format!("command = {command}\nsnapshot_sha256 = {}\n", digest(&bytes));
    for (k, v) in args {
        text.push_str(&format!("{k} = {v}\n"));
    }
    Ok(text)
}

pub fn flux(snapshot: &Path, qmax: Option<i32>, out: Option<PathBuf>) -> Outcome {
    let b = Snapshot::read(snapshot)?.field;
    let q_max = qmax.unwrap_or_else(|| LpFamily::new(b.grid()).q_max());
    let spectrum = flux_spectrum(&b, q_max)?;
    let args = snapshot_args("flux", snapshot, &[("qmax", q_max.to_string())])?;
    let dir = out_dir(out, None, "emhd_flux");
    create(&dir)?;
    let mut rec = Recorder::new("flux", &args);
    save(&spectrum.to_table(), &dir, "flux.csv", &mut rec)?;
    rec.finish(&dir, "ok")
}

pub fn identity(config: &Path, testfn: &str, out: Option<PathBuf>) -> Outcome {
    // Time integrals in the identity use every step.
    let cfg = read_config(config)?.with_snapshot_every(1);
    let grid = cfg.grid()?;
    let phi = match testfn {
        "constant" => TestFunction::constant(grid),
        "standard" => TestFunction::standard(grid, cfg.t_end)?,
        other => {
            return Err(Failure {
                code: 1,
                message: format!("unknown --testfn `{other}`; expected `constant` or `standard`"),
            })
        }
    };
    let resolved = format!("{}testfn = {testfn}\n", cfg.resolved_text());
    let dir = out_dir(out, Some(&cfg), "emhd_identity");
    let mut rec = Recorder::new("identity", &resolved);
    let traj = evolve_potential(&cfg)?;
    let id = generalized_helicity_identity(&traj, &phi)?;
    let mut t = Table::new(&["t", "local_helicity", "transport", "dissipation", "hall", "residual"]);
    for i in 0..id.times.len() {
        t.push(vec![
            id.times[i].into(),
            id.local_helicity[i].into(),
            id.transport[i].into(),
            id.dissipation[i].into(),
            id.hall[i].into(),
            id.residuals[i].into(),
        ]);
    }
    create(&dir)?;
    save(&t, &dir, "identity.csv", &mut rec)?;
    eprintln!("max relative residual {:.3e} (scale {:.3e})", id.max_residual(), id.scale);
    rec.finish(&dir, "ok")
}

/// Flags of the uniqueness ensemble.
pub struct Ensemble {
    pub perturb: f64,
    pub seeds: usize,
    pub shell: i32,
    pub p: f64,
    pub q: f64,
    pub r: f64,
    pub c_cap: f64,
}

impl Ensemble {
    fn render(&self) -> String {
        format!(
            "perturb = {}\nseeds = {}\nshell = {}\np = {}\nq = {}\nr = {}\nc_cap = {}\n",
            self.perturb, self.seeds, self.shell, self.p, self.q, self.r, self.c_cap
        )
    }
}

/// `EMHD_THREADS` when set to a positive integer, otherwise the machine's
/// parallelism; never more than `jobs`.
fn worker_count(jobs: usize) -> usize {
    let cap = std::env::var("EMHD_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    cap.min(jobs).max(1)
}

/// `B₀` plus a divergence-free shell-`q` perturbation of relative L² size `rel`.
fn perturbed(b0: &SpectralField, shell: i32, rel: f64, seed: u64) -> emhd_core::Result<SpectralField> {
    if rel == 0.0 {
        return Ok(b0.clone());
    }
    let mut p = random_shells(b0.grid(), shell, shell, seed)?;
    p.scale(rel * b0.l2_norm() / p.l2_norm());
    Ok(b0 + &p)
}

struct SeedResult {
    report: UniquenessReport,
    cross_residual: f64,
}

pub fn uniqueness(config: &Path, ens: Ensemble, out: Option<PathBuf>) -> Outcome {
    if ens.seeds == 0 {
        return Err(Failure {
            code: 1,
            message: "--seeds must be at least 1".into(),
        });
    }
    if !(ens.perturb >= 0.0 && ens.perturb.is_finite()) {
        return Err(Failure {
            code: 1,
            message: format!("--perturb must be finite and nonnegative, got {}", ens.perturb),
        });
    }
    // Reject the exponents before spending time on the runs.
    let class = region_classify(ens.p, ens.q, ens.r)?.classification;
    if class != emhd_core::diagnostics::Classification::UniquenessRegion {
        return Err(Error::Classification {
            p: ens.p,
            q: ens.q,
            r: ens.r,
            class: class.name().into(),
        }
        .into());
    }
    let cfg = read_config(config)?;
    let resolved = format!("{}{}", cfg.resolved_text(), ens.render());
    let dir = out_dir(out, Some(&cfg), "emhd_uniqueness");
    let mut rec = Recorder::new("uniqueness", &resolved);
    let b1 = initial_field(&cfg)?;
    let base = evolve_from(&cfg, b1.clone())?;

    let seed_of = |k: usize| cfg.seed.wrapping_add(1 + k as u64);
    let one = |k: usize| -> emhd_core::Result<SeedResult> {
        let traj = evolve_from(&cfg, perturbed(&b1, ens.shell, ens.perturb, seed_of(k))?)?;
        let report = uniqueness_bound_check(&base, &traj, ens.p, ens.q, ens.r, ens.c_cap)?;
        let cross_residual = cross_energy_residual(&base, &traj)?
            .iter()
            .fold(0.0, |m: f64, (_, r)| m.max(r.abs()));
        Ok(SeedResult { report, cross_residual })
    };
    let slots: Vec<Mutex<Option<emhd_core::Result<SeedResult>>>> =
        (0..ens.seeds).map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    std::thread::scope(|s| {
        for _ in 0..worker_count(ens.seeds) {
            s.spawn(|| loop {
                let k = next.fetch_add(1, Ordering::Relaxed);
                if k >= ens.seeds {
                    break;
                }
                let r = one(k);
                *slots[k].lock().expect("slot lock") = Some(r);
            });
        }
    });

    // Merge in seed order; the first failing seed decides the error.
    let mut results = Vec::with_capacity(ens.seeds);
    for slot in slots {
        results.push(slot.into_inner().expect("slot lock").expect("every seed ran")?);
    }
    create(&dir)?;
    let mut summary = Table::new(&[
        "seed",
        "fitted_C",
        "bound_ok",
        "max_Z_l2_sq",
        "max_cross_energy_residual",
    ]);
    for (k, r) in results.iter().enumerate() {
        save(&r.report.to_table(), &dir, &format!("uniqueness_seed{k}.csv"), &mut rec)?;
        let max_z = r.report.rows.iter().fold(0.0, |m: f64, row| m.max(row.z_l2_sq));
        summary.push(vec![
            Cell::Int(seed_of(k) as i64),
            r.report.fitted_c.into(),
            Cell::Bool(r.report.bound_ok),
            max_z.into(),
            r.cross_residual.into(),
        ]);
    }
    save(&summary, &dir, "uniqueness_summary.csv", &mut rec)?;
    rec.finish(&dir, "ok")
}

pub fn region(p: f64, q: f64, r: f64) -> Outcome {
    println!("{}", region_classify(p, q, r)?.classification.name());
    Ok(())
}
