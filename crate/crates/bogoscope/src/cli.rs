//! The `bogoscope` command-line front end.
//!
//! Subcommands map onto the library modules; outputs are CSV files written
//! atomically (temp file + rename) and JSON summaries on stdout. Exit codes:
//! 0 success, 1 domain error, 2 usage error.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde_json::json;

use crate::bogoliubov;
use crate::error::{Error, Result};
use crate::exact_diag;
use crate::gaussian::{self, Family, PolynomialHamiltonian, Statistics};
use crate::hfb;
use crate::improved;
use crate::model::{lattice_points, Lattice, MomentumVector, PotentialSpec, RunConfig};
use crate::spectrum::{self, DispersionTable};

#[derive(Parser)]
#[command(
    name = "bogoscope",
    about = "Excitation spectra of interacting Bose and Fermi gases",
    version
)]
pub struct Cli {
    /// Worker pool size (0 = one per logical CPU)
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Clone)]
pub struct ConfigArg {
    /// Path to the key=value run configuration
    #[arg(long)]
    pub config: PathBuf,
}

#[derive(Subcommand)]
pub enum Command {
    /// Elementary Bogoliubov dispersion over the lattice as CSV
    Dispersion {
        #[command(flatten)]
        config: ConfigArg,
        /// Output CSV path (columns p1..pd, abs_p, e_p)
        #[arg(long)]
        out: PathBuf,
        /// Pre-scale the potential by rho*lambda
        #[arg(long, default_value_t = 1.0)]
        rho_lambda: f64,
    },
    /// Bogoliubov energy (both formulas) and the density integral as JSON
    Ebog {
        #[command(flatten)]
        config: ConfigArg,
        #[arg(long, default_value_t = 1.0)]
        rho_lambda: f64,
    },
    /// Capped multi-quasiparticle enumeration as CSV
    Enumerate {
        #[command(flatten)]
        config: ConfigArg,
        /// Energy cap
        #[arg(long)]
        kappa: f64,
        /// Quasiparticle count cap
        #[arg(long, default_value_t = 6)]
        max_n: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Capped subadditive hull over the lattice as JSON
    Hull {
        #[command(flatten)]
        config: ConfigArg,
        #[arg(long, default_value_t = 6)]
        max_n: usize,
    },
    /// Energy gap of the elementary dispersion as JSON
    Gap {
        #[command(flatten)]
        config: ConfigArg,
    },
    /// Critical velocity of the elementary dispersion as JSON
    Cvel {
        #[command(flatten)]
        config: ConfigArg,
    },
    /// Improved Bogoliubov fixed point: per-mode CSV plus JSON summary
    Ibog {
        #[command(flatten)]
        config: ConfigArg,
        /// Condensate density kappa_c
        #[arg(long, default_value_t = 1.0)]
        kappa_c: f64,
        /// Damping factor in (0, 1]
        #[arg(long, default_value_t = 0.5)]
        gamma: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Spin-1/2 HFB gap equation: per-mode CSV plus JSON summary
    Hfb {
        #[command(flatten)]
        config: ConfigArg,
        /// Chemical potential
        #[arg(long)]
        mu: f64,
        #[arg(long, value_enum, default_value_t = Branch::Both)]
        branch: Branch,
        /// Damping factor in (0, 1]
        #[arg(long, default_value_t = 0.5)]
        gamma: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Gaussian-state minimization and the stationarity certificate as JSON
    Beliaev {
        /// Coefficient file (header `statistics n_modes`, then lines
        /// `alpha-multi-index beta-multi-index re im`)
        #[arg(long)]
        ham: PathBuf,
        #[arg(long, value_enum)]
        family: FamilyArg,
        #[arg(long, default_value_t = 8)]
        restarts: usize,
        /// Seed for the restart generator (echoed in the output)
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Optional truncated-Fock oracle cutoff (bosonic); include E0
        #[arg(long)]
        oracle_cutoff: Option<usize>,
    },
    /// Exact diagonalization vs Bogoliubov prediction: CSV plus JSON summary
    Ed {
        #[command(flatten)]
        config: ConfigArg,
        /// Particle number
        #[arg(long)]
        n: usize,
        /// Levels per momentum sector
        #[arg(long, default_value_t = 3)]
        max_level: usize,
        /// Scale the potential by a weak-coupling factor
        #[arg(long, default_value_t = 1.0)]
        g: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Reproduces the excitation-spectrum scatter data of the figures
    Figures {
        /// `rys1` (potential v1) or `rotons` (potential v2, scaled form)
        #[arg(long)]
        which: Figure,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Branch {
    Normal,
    Super,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum FamilyArg {
    EvenBosonic,
    FullBosonic,
    EvenFermionic,
    OddFermionic,
}

impl From<FamilyArg> for Family {
    fn from(f: FamilyArg) -> Family {
        match f {
            FamilyArg::EvenBosonic => Family::EvenBosonic,
            FamilyArg::FullBosonic => Family::FullBosonic,
            FamilyArg::EvenFermionic => Family::EvenFermionic,
            FamilyArg::OddFermionic => Family::OddFermionic,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Figure {
    Rys1,
    Rotons,
}

/// Entry point used by the binary: returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            // clap prints help/version through this path with status 0
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    if cli.threads > 0 {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global();
    }
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::Dispersion {
            config,
            out,
            rho_lambda,
        } => {
            let cfg = RunConfig::load(&config.config)?;
            let lat = lattice_points(&cfg.lattice)?;
            let v = cfg.potential.scaled(rho_lambda);
            let mut csv = String::new();
            let d = cfg.lattice.d;
            let mut header: Vec<String> = (1..=d).map(|i| format!("p{i}")).collect();
            header.push("abs_p".into());
            header.push("e_p".into());
            push_row(&mut csv, &header);
            for p in lat.points() {
                let abs = lat.norm(p);
                let e = bogoliubov::elementary_dispersion(&v, &lat, p)?;
                let mut row: Vec<String> =
                    lat.physical(p).iter().map(|x| fmt_f64(*x)).collect();
                row.push(fmt_f64(abs));
                row.push(fmt_f64(e));
                push_row(&mut csv, &row);
            }
            write_atomic(&out, csv.as_bytes())?;
            Ok(())
        }
        Command::Ebog { config, rho_lambda } => {
            let cfg = RunConfig::load(&config.config)?;
            let lat = lattice_points(&cfg.lattice)?;
            let both = bogoliubov::bogoliubov_energy_both(&lat, &cfg.potential)?;
            let density =
                bogoliubov::energy_density_integral(&cfg.potential, cfg.lattice.d, rho_lambda)?;
            print_json(&json!({
                "ebog_sum": both.sum,
                "ebog_alt": both.alt,
                "density_integral": density,
            }));
            Ok(())
        }
        Command::Enumerate {
            config,
            kappa,
            max_n,
            out,
        } => {
            let cfg = RunConfig::load(&config.config)?;
            let lat = lattice_points(&cfg.lattice)?;
            let disp = DispersionTable::from_fn(&lat, |l, p| {
                bogoliubov::elementary_dispersion(&cfg.potential, l, p)
            })?;
            let table = spectrum::enumerate_excitations(&disp, kappa, max_n)?;
            write_atomic(&out, spectrum_csv(cfg.lattice.d, &table).as_bytes())?;
            Ok(())
        }
        Command::Hull { config, max_n } => {
            let cfg = RunConfig::load(&config.config)?;
            let lat = lattice_points(&cfg.lattice)?;
            let disp = DispersionTable::from_fn(&lat, |l, p| {
                bogoliubov::elementary_dispersion(&cfg.potential, l, p)
            })?;
            let mut entries = Vec::new();
            for p in lat.nonzero_points() {
                let value = spectrum::subadditive_hull(&disp, p, max_n)?;
                entries.push(json!({"p": p.n, "value": value}));
            }
            print_json(&json!({"max_n": max_n, "entries": entries}));
            Ok(())
        }
        Command::Gap { config } => {
            let cfg = RunConfig::load(&config.config)?;
            let lat = lattice_points(&cfg.lattice)?;
            let disp = DispersionTable::from_fn(&lat, |l, p| {
                bogoliubov::elementary_dispersion(&cfg.potential, l, p)
            })?;
            print_json(&json!({"gap": spectrum::energy_gap(&disp)}));
            Ok(())
        }
        Command::Cvel { config } => {
            let cfg = RunConfig::load(&config.config)?;
            let lat = lattice_points(&cfg.lattice)?;
            let disp = DispersionTable::from_fn(&lat, |l, p| {
                bogoliubov::elementary_dispersion(&cfg.potential, l, p)
            })?;
            let cv = spectrum::critical_velocity_certified(&disp)?;
            print_json(&json!({"critical_velocity": cv}));
            Ok(())
        }
        Command::Ibog {
            config,
            kappa_c,
            gamma,
            out,
        } => {
            let cfg = RunConfig::load(&config.config)?;
            let lat = lattice_points(&cfg.lattice)?;
            let sol = improved::solve(
                lat,
                cfg.potential.clone(),
                kappa_c,
                gamma,
                1e-10,
                1e-8,
                10_000,
            )?;
            let mut csv = String::new();
            let d = cfg.lattice.d;
            let mut header: Vec<String> = (1..=d).map(|i| format!("k{i}")).collect();
            header.extend(["f", "abs_g", "d", "abs_o"].map(String::from));
            push_row(&mut csv, &header);
            for (p, &f) in &sol.coefficients.f {
                let mut row: Vec<String> = sol
                    .state
                    .lattice
                    .physical(p)
                    .iter()
                    .map(|x| fmt_f64(*x))
                    .collect();
                row.push(fmt_f64(f));
                row.push(fmt_f64(sol.coefficients.g[p].norm()));
                row.push(fmt_f64(sol.coefficients.d[p]));
                row.push(fmt_f64(sol.coefficients.o[p].norm()));
                push_row(&mut csv, &row);
            }
            write_atomic(&out, csv.as_bytes())?;
            print_json(&json!({
                "mu": sol.mu,
                "b": sol.b,
                "iterations": sol.iterations,
                "residual_c": sol.residual_c,
                "residual_o": sol.residual_o,
                "converged": sol.converged,
                "kappa_c": kappa_c,
                "gamma": gamma,
            }));
            Ok(())
        }
        Command::Hfb {
            config,
            mu,
            branch,
            gamma,
            out,
        } => run_hfb(&config.config, mu, branch, gamma, &out),
        Command::Beliaev {
            ham,
            family,
            restarts,
            seed,
            oracle_cutoff,
        } => {
            let text = std::fs::read_to_string(&ham)?;
            let h = parse_hamiltonian_file(&text)?;
            let family: Family = family.into();
            let opts = gaussian::MinimizeOptions {
                restarts,
                seed,
                ..Default::default()
            };
            let outcome = gaussian::minimize(&h, family, &opts)?;
            let cert = gaussian::beliaev_certificate(
                &h,
                &outcome.params,
                family == Family::FullBosonic,
            )?;
            let oracle_e0 = match oracle_cutoff {
                Some(c) => Some(gaussian::fock_oracle(&h, c, 2_000_000)?.eigenvalues[0]),
                None => None,
            };
            print_json(&json!({
                "b": cert.b,
                "norm_k": cert.norm_k,
                "norm_o": cert.norm_o,
                "min_eig_d": cert.min_eig_d,
                "oracle_e0": oracle_e0,
                "gradient_norm": outcome.grad_norm,
                "restarts": restarts,
                "seed": seed,
            }));
            Ok(())
        }
        Command::Ed {
            config,
            n,
            max_level,
            g,
            out,
        } => {
            let cfg = RunConfig::load(&config.config)?;
            let lat = lattice_points(&cfg.lattice)?;
            let v = cfg.potential.scaled(g);
            let opts = exact_diag::CompareOptions {
                max_level,
                ..Default::default()
            };
            let report = exact_diag::compare_with_bogoliubov(n, &lat, &v, &opts)?;
            let mut csv = String::new();
            let d = cfg.lattice.d;
            let mut header: Vec<String> = (1..=d).map(|i| format!("p{i}")).collect();
            header.extend(["j", "k_n", "k_bog", "diff"].map(String::from));
            push_row(&mut csv, &header);
            for row in &report.rows {
                let mut cells: Vec<String> =
                    row.momentum.iter().map(|c| c.to_string()).collect();
                cells.push(row.level.to_string());
                cells.push(fmt_f64(row.k_n));
                cells.push(fmt_f64(row.k_bog));
                cells.push(fmt_f64(row.diff));
                push_row(&mut csv, &cells);
            }
            write_atomic(&out, csv.as_bytes())?;
            print_json(&json!({
                "n": report.n_particles,
                "e_n": report.e_n,
                "e_bog_truncated": report.e_bog_truncated,
                "prediction": report.prediction,
                "vhat0": report.vhat0,
                "lemma_lower_bound": report.lemma_lower_bound,
                "lemma_upper_ok": report.lemma_upper_ok,
                "lemma_lower_ok": report.lemma_lower_ok,
            }));
            Ok(())
        }
        Command::Figures { which, out } => {
            let (table, d) = figure_table(which)?;
            write_atomic(&out, spectrum_csv(d, &table).as_bytes())?;
            Ok(())
        }
    }
}

/// Figure data: the paper's units 2 pi / L = 0.15. `rys1` enumerates the
/// spectrum of potential v1 as is; `rotons` uses v2 in the scaled mean-field
/// dispersion |p| sqrt(|p|^2 + 2 rho lambda v_hat) with rho*lambda = 5,
/// which places the maxon and the roton inside the plotted window.
pub fn figure_table(which: Figure) -> Result<(spectrum::SpectrumTable, usize)> {
    let lat = bogoliubov::paper_lattice(1, 3.0)?;
    let (v, kappa) = match which {
        Figure::Rys1 => (PotentialSpec::v1(), 10.0),
        Figure::Rotons => (PotentialSpec::v2().scaled(5.0), 12.0),
    };
    let disp = DispersionTable::from_fn(&lat, |l, p| {
        bogoliubov::elementary_dispersion(&v, l, p)
    })?;
    Ok((spectrum::enumerate_excitations(&disp, kappa, 3)?, 1))
}

fn run_hfb(config: &Path, mu: f64, branch: Branch, gamma: f64, out: &Path) -> Result<()> {
    let cfg = RunConfig::load(config)?;
    let lat = lattice_points(&cfg.lattice)?;
    let kernels = hfb::kernels_from_local_potential(&cfg.potential, &lat, lat.points())?;
    let model = hfb::HfbModel::from_lattice(&lat, mu, kernels)?;
    let normal = match branch {
        Branch::Super => None,
        _ => Some(hfb::normal_solution(&model)?),
    };
    let superconducting = match branch {
        Branch::Normal => None,
        _ => Some(hfb::solve_superconducting(&model, gamma, 1e-3, 1e-8, 50_000)?),
    };
    let emit = superconducting.as_ref().or(normal.as_ref()).unwrap();
    let mut csv = String::new();
    let d = cfg.lattice.d;
    let mut header: Vec<String> = (1..=d).map(|i| format!("k{i}")).collect();
    header.extend(["delta", "xi", "d"].map(String::from));
    push_row(&mut csv, &header);
    for (i, p) in model.modes.iter().enumerate() {
        let mut row: Vec<String> = lat.physical(p).iter().map(|x| fmt_f64(*x)).collect();
        row.push(fmt_f64(emit.gap_functions.delta[i]));
        row.push(fmt_f64(emit.gap_functions.xi[i]));
        row.push(fmt_f64(emit.gap_functions.d[i]));
        push_row(&mut csv, &row);
    }
    write_atomic(out, csv.as_bytes())?;
    let table = hfb::hfb_dispersion(&emit.state, &model);
    let nonzero: DispersionTable = DispersionTable {
        step: table.step,
        values: table
            .values
            .iter()
            .filter(|(p, _)| !p.is_zero())
            .map(|(p, &v)| (p.clone(), v))
            .collect(),
    };
    print_json(&json!({
        "b_normal": normal.as_ref().map(|s| s.gap_functions.b),
        "b_super": superconducting.as_ref().map(|s| s.gap_functions.b),
        "gap": spectrum::energy_gap(&table),
        "critical_velocity": spectrum::critical_velocity(&nonzero),
        "residual": emit.residual,
        "mu": mu,
    }));
    Ok(())
}

/// CSV of an enumerated spectrum table: momentum components, energy, count,
/// sorted by (p, energy).
fn spectrum_csv(d: usize, table: &spectrum::SpectrumTable) -> String {
    let mut csv = String::new();
    let mut header: Vec<String> = (1..=d).map(|i| format!("p{i}")).collect();
    header.push("energy".into());
    header.push("n_quasiparticles".into());
    push_row(&mut csv, &header);
    for (p, points) in &table.buckets {
        for e in points {
            let mut row: Vec<String> = p
                .n
                .iter()
                .map(|&c| fmt_f64(c as f64 * table.step))
                .collect();
            row.push(fmt_f64(e.energy));
            row.push(e.n_quasiparticles.to_string());
            push_row(&mut csv, &row);
        }
    }
    csv
}

/// Parses the Beliaev coefficient file: first non-comment line is
/// `<bosonic|fermionic> <n_modes>`; each following line is
/// `alpha-multi-index beta-multi-index re im` with comma-separated
/// per-mode exponents, e.g. `1,0 0,1 0.5 -0.25`.
pub fn parse_hamiltonian_file(text: &str) -> Result<PolynomialHamiltonian> {
    let mut lines = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'));
    let header = lines
        .next()
        .ok_or_else(|| Error::Hamiltonian("empty coefficient file".into()))?;
    let mut parts = header.split_whitespace();
    let statistics = match parts.next() {
        Some("bosonic") => Statistics::Bosonic,
        Some("fermionic") => Statistics::Fermionic,
        other => {
            return Err(Error::Hamiltonian(format!(
                "header must start with bosonic|fermionic, got {other:?}"
            )))
        }
    };
    let n_modes: usize = parts
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| Error::Hamiltonian("header must give the mode count".into()))?;
    let mut h = PolynomialHamiltonian::new(statistics, n_modes);
    let parse_multi = |tok: &str| -> Result<Vec<usize>> {
        let exps: Vec<usize> = tok
            .split(',')
            .map(|t| t.parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::Hamiltonian(format!("bad multi-index {tok:?}")))?;
        if exps.len() != n_modes {
            return Err(Error::Hamiltonian(format!(
                "multi-index {tok:?} has {} entries, expected {n_modes}",
                exps.len()
            )));
        }
        let mut indices = Vec::new();
        for (mode, &e) in exps.iter().enumerate() {
            for _ in 0..e {
                indices.push(mode);
            }
        }
        Ok(indices)
    };
    for line in lines {
        let cols: Vec<&str> = line.split_whitespace().collect();
        if cols.len() != 4 {
            return Err(Error::Hamiltonian(format!(
                "expected `alpha beta re im`, got {line:?}"
            )));
        }
        let dag = parse_multi(cols[0])?;
        let ann = parse_multi(cols[1])?;
        let re: f64 = cols[2]
            .parse()
            .map_err(|_| Error::Hamiltonian(format!("bad real part {:?}", cols[2])))?;
        let im: f64 = cols[3]
            .parse()
            .map_err(|_| Error::Hamiltonian(format!("bad imaginary part {:?}", cols[3])))?;
        h.add_term(&dag, &ann, Complex64::new(re, im));
    }
    h.validate()?;
    Ok(h)
}

/// Shortest decimal representation that parses back to the same f64.
pub fn fmt_f64(x: f64) -> String {
    format!("{x}")
}

/// RFC-4180-style field quoting (only when needed; our numeric fields never
/// are, but headers and future string fields go through the same path).
fn push_row(csv: &mut String, cells: &[String]) {
    for (i, cell) in cells.iter().enumerate() {
        if i > 0 {
            csv.push(',');
        }
        if cell.contains(',') || cell.contains('"') || cell.contains('\n') {
            let _ = write!(csv, "\"{}\"", cell.replace('"', "\"\""));
        } else {
            csv.push_str(cell);
        }
    }
    csv.push('\n');
}

/// Writes through a temp file in the same directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

fn print_json(value: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(value).unwrap());
}

/// Renders a JSON value for a subcommand without printing (test access).
pub fn ebog_json(lat: &Lattice, v: &PotentialSpec, rho_lambda: f64) -> Result<serde_json::Value> {
    let both = bogoliubov::bogoliubov_energy_both(lat, v)?;
    let density = bogoliubov::energy_density_integral(v, lat.spec.d, rho_lambda)?;
    Ok(json!({
        "ebog_sum": both.sum,
        "ebog_alt": both.alt,
        "density_integral": density,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formats_round_trip() {
        for &x in &[0.1, 1.0 / 3.0, 1e-300, -2.5e17, std::f64::consts::PI] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn csv_quoting() {
        let mut s = String::new();
        push_row(&mut s, &["a,b".into(), "plain".into(), "q\"q".into()]);
        assert_eq!(s, "\"a,b\",plain,\"q\"\"q\"\n");
    }

    #[test]
    fn hamiltonian_file_round_trip() {
        let text = "# comment\nbosonic 2\n1,0 1,0 1.5 0\n2,0 0,0 0.25 0.1\n0,0 2,0 0.25 -0.1\n";
        let h = parse_hamiltonian_file(text).unwrap();
        assert_eq!(h.statistics, Statistics::Bosonic);
        assert_eq!(h.n_modes, 2);
        assert_eq!(h.terms.len(), 3);
        h.validate().unwrap();
    }

    #[test]
    fn hamiltonian_file_rejects_non_hermitian() {
        let text = "bosonic 1\n2 0 1.0 0\n";
        assert!(parse_hamiltonian_file(text).is_err());
    }

    #[test]
    fn figure_rotons_has_maxon_and_roton() {
        let (table, _) = figure_table(Figure::Rotons).unwrap();
        // the 1-quasiparticle branch over positive momenta
        let mut branch: Vec<(f64, f64)> = table
            .buckets
            .iter()
            .filter(|(p, _)| p.n[0] > 0)
            .filter_map(|(p, pts)| {
                pts.iter()
                    .find(|e| e.n_quasiparticles == 1)
                    .map(|e| (p.n[0] as f64 * table.step, e.energy))
            })
            .collect();
        branch.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let es: Vec<f64> = branch.iter().map(|x| x.1).collect();
        let mut maxon = None;
        let mut roton = None;
        for i in 1..es.len() - 1 {
            if es[i] > es[i - 1] && es[i] > es[i + 1] && maxon.is_none() {
                maxon = Some(i);
            }
            if let Some(m) = maxon {
                if i > m && es[i] < es[i - 1] && es[i] < es[i + 1] && roton.is_none() {
                    roton = Some(i);
                }
            }
        }
        assert!(maxon.is_some(), "no interior local maximum");
        assert!(roton.is_some(), "no interior local minimum after the maximum");
    }

    #[test]
    fn figure_rys1_has_beliaev_crossing() {
        let (table, _) = figure_table(Figure::Rys1).unwrap();
        let mut found = false;
        for points in table.buckets.values() {
            let one = points
                .iter()
                .find(|e| e.n_quasiparticles == 1)
                .map(|e| e.energy);
            let two = points
                .iter()
                .filter(|e| e.n_quasiparticles == 2)
                .map(|e| e.energy)
                .fold(f64::INFINITY, f64::min);
            if let Some(one) = one {
                if two < one {
                    found = true;
                }
            }
        }
        assert!(found, "no 2-quasiparticle state below the elementary branch");
    }
}
