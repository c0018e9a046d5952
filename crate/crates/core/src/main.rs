use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use foldvol::compat::{compat_experiment, compat_family, table_csv, CompatReport, ExperimentConfig};
use foldvol::desing::{build_profile, desingularize, verify_desing, DesingReport, Parity, DEFAULT_CONTACT_ORDER};
use foldvol::invariants::{
    bm_equivalent, folded_equivalent, liouville_volume_pv, modular_periods, regional_volumes, DEFAULT_CUTOFFS,
    DEFAULT_EQUIV_TOL,
};
use foldvol::io::{load_form, to_pretty, write_json, Loaded, LoadedForm, SampledForm};
use foldvol::moser::{run_moser, MoserConfig};
use foldvol::selftest::run_selftest;
use foldvol::{BmNambuForm, Error, ExecMode, FoldedVolumeForm};

/// Desingularized slopes must match their prediction to this relative error.
const SLOPE_TOL: f64 = 1e-6;
/// Agreement with the source away from the profile support.
const OUTSIDE_TOL: f64 = 1e-9;

#[derive(Parser)]
#[command(name = "foldvol", version, about = "Folded volume forms and b^m-Nambu forms on the flat torus")]
struct Cli {
    /// Machine-readable JSON on stdout.
    #[arg(long, global = true)]
    json: bool,
    /// Disable the thread pool.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Regional volumes, modular periods and the principal-value volume.
    Invariants { form: PathBuf },
    /// Decide equivalence of two forms of the same kind.
    Equiv {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value_t = DEFAULT_EQUIV_TOL)]
        tol: f64,
    },
    /// Build and certify the Moser diffeomorphism between two folded forms.
    Moser {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value_t = 200)]
        steps: usize,
        #[arg(long, default_value_t = 256)]
        grid: usize,
        /// Relative pullback tolerance of the certificate.
        #[arg(long, default_value_t = 1e-4)]
        tol: f64,
        #[arg(long, default_value_t = 64)]
        bandwidth: usize,
        /// Where to write the grid map.
        #[arg(long, default_value = "map.json")]
        map: PathBuf,
        /// Where to write the certificate (also printed).
        #[arg(long)]
        certificate: Option<PathBuf>,
    },
    /// Replace the singular density by the smooth or folded profile.
    Desing {
        form: PathBuf,
        #[arg(long)]
        epsilon: f64,
        #[arg(long, default_value_t = DEFAULT_CONTACT_ORDER)]
        contact_order: usize,
        /// Samples per axis of the output.
        #[arg(long, default_value_t = 256)]
        grid: usize,
        /// Where to write the sampled form.
        #[arg(long, default_value = "desing.json")]
        out: PathBuf,
    },
    /// Desingularize a pair of odd-order forms and compare the results.
    Compat {
        #[arg(required_unless_present = "family")]
        a: Option<PathBuf>,
        #[arg(required_unless_present = "family")]
        b: Option<PathBuf>,
        #[arg(long, value_delimiter = ',', default_values_t = [0.05, 0.1, 0.2])]
        eps: Vec<f64>,
        /// Run the Moser flow for every equivalent row.
        #[arg(long)]
        witness: bool,
        #[arg(long, default_value_t = 64)]
        grid: usize,
        #[arg(long, default_value_t = 50)]
        steps: usize,
        #[arg(long, default_value_t = DEFAULT_CONTACT_ORDER)]
        contact_order: usize,
        /// Run the random equivalent family with seeds 0..N instead of files.
        #[arg(long, conflicts_with_all = ["a", "b"])]
        family: Option<u64>,
        /// Order of the family forms.
        #[arg(long, default_value_t = 1)]
        m: usize,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Quick checks of every subsystem.
    Selftest,
}

struct Outcome {
    code: u8,
    json: serde_json::Value,
    text: String,
}

impl Outcome {
    fn ok(json: serde_json::Value, text: String) -> Self {
        Self { code: 0, json, text }
    }
}

fn load(path: &Path) -> Result<Loaded, Error> {
    let l = load_form(path)?;
    if l.correction > 0.0 {
        eprintln!("warning: {}: coefficients symmetrized (correction {:.3e})", path.display(), l.correction);
    }
    Ok(l)
}

fn load_folded(path: &Path) -> Result<FoldedVolumeForm, Error> {
    match load(path)?.form {
        LoadedForm::Folded(f) => Ok(f),
        LoadedForm::Bm(_) => Err(Error::InvalidInput(format!("{}: expected a folded form", path.display()))),
    }
}

fn load_bm(path: &Path) -> Result<BmNambuForm, Error> {
    match load(path)?.form {
        LoadedForm::Bm(t) => Ok(t),
        LoadedForm::Folded(_) => Err(Error::InvalidInput(format!("{}: expected a b^m form", path.display()))),
    }
}

fn value<T: Serialize>(v: &T) -> Result<serde_json::Value, Error> {
    Ok(serde_json::to_value(v)?)
}

fn invariants(path: &Path) -> Result<Outcome, Error> {
    match load(path)?.form {
        LoadedForm::Folded(f) => {
            let v = regional_volumes(&f);
            let text = format!(
                "folded form, {} circles\nregional volumes: {:?}\ntotal: {:e}",
                f.critical().len(),
                v.volumes,
                v.total
            );
            let json = json!({
                "regional_volumes": v.volumes,
                "total": v.total,
                "periods": null,
                "liouville": null,
            });
            Ok(Outcome::ok(json, text))
        }
        LoadedForm::Bm(t) => {
            let p = modular_periods(&t);
            let l = liouville_volume_pv(&t, &DEFAULT_CUTOFFS)?;
            let volume = match l.value {
                Some(v) => format!("{v:e}"),
                None => "diverged".into(),
            };
            let text = format!("b^{} form\nperiods: {:?}\nliouville volume: {volume}", t.m(), p.values);
            let json = json!({
                "regional_volumes": null,
                "total": l.value,
                "periods": p.values,
                "liouville": { "value": l.value, "diverged": l.diverged },
            });
            Ok(Outcome::ok(json, text))
        }
    }
}

fn verdict(equivalent: bool, json: serde_json::Value, detail: String) -> Outcome {
    let word = if equivalent { "equivalent" } else { "inequivalent" };
    Outcome { code: if equivalent { 0 } else { 2 }, json, text: format!("{word}\n{detail}") }
}

fn equiv(a: &Path, b: &Path, tol: f64) -> Result<Outcome, Error> {
    let incomparable = |reason: String| {
        let json = json!({ "equivalent": false, "reason": reason });
        verdict(false, json, reason)
    };
    match (load(a)?.form, load(b)?.form) {
        (LoadedForm::Folded(f0), LoadedForm::Folded(f1)) => match folded_equivalent(&f0, &f1, tol) {
            Ok(v) => {
                let detail = format!("regional defects: {:?}", v.defects);
                Ok(verdict(v.equivalent, value(&v)?, detail))
            }
            Err(Error::Incomparable(r)) => Ok(incomparable(r)),
            Err(e) => Err(e),
        },
        (LoadedForm::Bm(t0), LoadedForm::Bm(t1)) => match bm_equivalent(&t0, &t1, tol) {
            Ok(v) => {
                let detail = format!(
                    "max period difference: {:e}\nvolume difference: {:e}",
                    v.max_period_difference, v.volume_difference
                );
                Ok(verdict(v.equivalent, value(&v)?, detail))
            }
            Err(Error::Incomparable(r)) => Ok(incomparable(r)),
            Err(e) => Err(e),
        },
        _ => Err(Error::InvalidInput("cannot compare a folded form with a b^m form".into())),
    }
}

fn obstruction(defects: Vec<f64>) -> Outcome {
    let text = format!("inequivalent: regional volume defects {defects:?}");
    Outcome { code: 2, json: json!({ "status": "obstruction", "defects": defects }), text }
}

fn moser(a: &Path, b: &Path, cfg: MoserConfig, map_path: &Path, cert_path: Option<&Path>) -> Result<Outcome, Error> {
    let o0 = load_folded(a)?;
    let o1 = load_folded(b)?;
    let out = match run_moser(&o0, &o1, &cfg) {
        Ok(out) => out,
        Err(Error::Obstruction { defects }) => return Ok(obstruction(defects)),
        Err(e) => return Err(e),
    };
    fs::write(map_path, out.map.to_json()?)?;
    let cert = &out.certificate;
    if let Some(p) = cert_path {
        write_json(p, cert)?;
    }
    let status = if cert.passed { "certified" } else { "certificate failure" };
    let text = format!(
        "{status}\npullback error: {:e}\nfixing error: {:e}\nmin jacobian: {}\nprimitive residual: {:e}\nprimitive orders: {:?}\nmap written to {}",
        cert.pullback_error,
        cert.fixing_error,
        cert.min_jacobian,
        cert.primitive_residual,
        cert.primitive_orders,
        map_path.display()
    );
    let json = json!({ "status": status, "certificate": cert, "map": map_path });
    Ok(Outcome { code: if cert.passed { 0 } else { 3 }, json, text })
}

fn desing_passed(r: &DesingReport) -> bool {
    let shape = match r.parity {
        Parity::Even => r.min_abs_coefficient.is_some_and(|v| v > 0.0),
        Parity::Odd => r.fold.is_some() && r.slope_rel_error.is_some_and(|e| e <= SLOPE_TOL),
    };
    shape && r.outside_agreement.is_none_or(|e| e <= OUTSIDE_TOL)
}

fn desing(path: &Path, epsilon: f64, order: usize, grid: usize, out: &Path) -> Result<Outcome, Error> {
    let theta = load_bm(path)?;
    let profile = build_profile(theta.m(), epsilon, order)?;
    let d = desingularize(&theta, &profile)?;
    let report = verify_desing(&d);
    let passed = desing_passed(&report);
    write_json(out, &SampledForm::new(&d, report.clone(), grid))?;
    let opt = |v: Option<f64>| v.map_or("n/a".to_string(), |x| format!("{x:e}"));
    let text = format!(
        "{}\nparity: {:?}\ncontact order used: {}\nmin |coef|: {}\nslope error: {}\noutside agreement: {}\nwritten to {}",
        if passed { "verified" } else { "verification failed" },
        report.parity,
        report.used_order,
        opt(report.min_abs_coefficient),
        opt(report.slope_rel_error),
        opt(report.outside_agreement),
        out.display()
    );
    let json = json!({ "passed": passed, "report": report, "out": out });
    Ok(Outcome { code: if passed { 0 } else { 3 }, json, text })
}

fn compat_table(reports: &[CompatReport]) -> String {
    let mut s = String::from("case  epsilon  bm   folded  max_defect  diff_volume  witness\n");
    for (i, r) in reports.iter().enumerate() {
        for row in &r.rows {
            let diff = row.difference_volumes.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            let w = row.witness.as_ref().map_or("-".to_string(), |w| match (w.passed, w.pullback_error) {
                (true, Some(e)) => format!("pass {e:.1e}"),
                (false, Some(e)) => format!("FAIL {e:.1e}"),
                _ => "FAIL".into(),
            });
            s += &format!(
                "{i:<5} {:<8} {:<4} {:<7} {:<11.2e} {:<12.2e} {w}\n",
                row.epsilon,
                if r.bm.equivalent { "eq" } else { "neq" },
                if row.folded_equivalent { "eq" } else { "neq" },
                row.max_defect,
                diff,
            );
        }
    }
    s
}

fn compat(
    files: Option<(PathBuf, PathBuf)>,
    family: Option<u64>,
    m: usize,
    cfg: &ExperimentConfig,
    csv: Option<&Path>,
) -> Result<Outcome, Error> {
    let reports = match (files, family) {
        (_, Some(n)) => compat_family(m, &ExperimentConfig { seeds: (0..n).collect(), ..cfg.clone() })?,
        (Some((a, b)), None) => vec![compat_experiment(&load_bm(&a)?, &load_bm(&b)?, cfg)?],
        (None, None) => return Err(Error::InvalidInput("two forms or --family are required".into())),
    };
    if let Some(p) = csv {
        fs::write(p, table_csv(&reports)?)?;
    }
    let code = if reports.iter().any(|r| !r.consistent) {
        3
    } else if reports.iter().any(|r| !r.bm.equivalent) {
        2
    } else {
        0
    };
    let json = if family.is_some() { value(&reports)? } else { value(&reports[0])? };
    Ok(Outcome { code, json, text: compat_table(&reports) })
}

fn selftest(mode: ExecMode) -> Result<Outcome, Error> {
    let results = run_selftest(mode);
    let width = results.iter().map(|r| r.name.len()).max().unwrap_or(0);
    let mut text = String::new();
    for r in &results {
        let mark = if r.passed { "PASS" } else { "FAIL" };
        text += &format!("{mark}  {:<width$}  {:>6.2}s  {}\n", r.name, r.seconds, r.detail);
    }
    let failed = results.iter().filter(|r| !r.passed).count();
    text += &format!("{} passed, {failed} failed", results.len() - failed);
    Ok(Outcome { code: if failed == 0 { 0 } else { 3 }, json: value(&results)?, text })
}

fn dispatch(cli: Cli) -> Result<Outcome, Error> {
    let exec = if cli.sequential { ExecMode::Sequential } else { ExecMode::Parallel };
    match cli.command {
        Command::Invariants { form } => invariants(&form),
        Command::Equiv { a, b, tol } => equiv(&a, &b, tol),
        Command::Moser { a, b, steps, grid, tol, bandwidth, map, certificate } => {
            let cfg = MoserConfig { steps, grid, bandwidth, pullback_tol: tol, exec, ..MoserConfig::default() };
            moser(&a, &b, cfg, &map, certificate.as_deref())
        }
        Command::Desing { form, epsilon, contact_order, grid, out } => {
            desing(&form, epsilon, contact_order, grid, &out)
        }
        Command::Compat { a, b, eps, witness, grid, steps, contact_order, family, m, csv } => {
            let cfg = ExperimentConfig {
                grid,
                steps,
                epsilons: eps,
                contact_order,
                witness,
                exec,
                ..ExperimentConfig::default()
            };
            compat(a.zip(b), family, m, &cfg, csv.as_deref())
        }
        Command::Selftest => selftest(exec),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    let json = cli.json;
    match dispatch(cli) {
        Ok(out) => {
            if json {
                match to_pretty(&out.json) {
                    Ok(s) => println!("{s}"),
                    Err(e) => {
                        eprintln!("error: {e}");
                        return ExitCode::from(e.exit_code());
                    }
                }
            } else {
                println!("{}", out.text.trim_end());
            }
            ExitCode::from(out.code)
        }
        Err(e) => {
            if json {
                println!("{}", json!({ "error": e.to_string(), "exit_code": e.exit_code() }));
            }
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
