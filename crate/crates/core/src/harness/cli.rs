//! Command-line front end. Exit codes: 0 success, 1 runtime failure,
//! 2 invalid input, 3 scale refusal.

use super::{concentration_probe, run_experiment, ExperimentConfig};
use crate::analytics::{self, regime::d_of_eta};
use crate::count::{self, count_equitable, count_proper};
use crate::error::{Error, Result};
use crate::group::{check_sofic, ModelParams, UniformHom};
use crate::hypergraph::{build_hypergraph, Coloring};
use crate::numeric::parse_fraction;
use crate::rng::RngState;
use crate::samplers::{sample_planted_hom, sample_uniform_hom};
use crate::structure::{core_decomposition, density_report, expansivity_scan, rigidity_violation_search};
use crate::tree::{build_ball, local_convergence_stat, Pattern, TreeDomain};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};
use std::io::Write;
use std::path::{Path, PathBuf};

#[derive(Parser, Debug)]
#[command(name = "sofic-lab", version, about = "Planted and uniform hypergraph models of (Z/kZ)^{*d}")]
struct Cli {
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, default_value_t = 0)]
    stream: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Serialize)]
struct Model {
    #[arg(long)]
    d: usize,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    n: usize,
}

#[derive(Args, Debug, Serialize)]
struct Instance {
    /// JSON file with `n`, `k`, `d`, `images` and optionally `chi`.
    #[arg(long)]
    input: PathBuf,
    /// Coloring as a 0/1 string; defaults to the file's `chi`, then to
    /// `0..01..1`.
    #[arg(long)]
    chi: Option<String>,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Command {
    /// Sample from the uniform model and print the homomorphism as JSON.
    SampleUniform {
        #[command(flatten)]
        model: Model,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Sample from the planted model for `chi` (default `0..01..1`).
    SamplePlanted {
        #[command(flatten)]
        model: Model,
        #[arg(long)]
        chi: Option<String>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Count colorings with at most `eps n` monochromatic edges.
    Count {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "0")]
        eps: String,
        /// Count proper equitable colorings instead.
        #[arg(long)]
        equitable: bool,
    },
    /// Closed-form and numeric quantities.
    Analytic {
        #[command(subcommand)]
        which: AnalyticCmd,
    },
    /// `|C_l ∪ A_l ∖ A'_l| / n` and the level sets.
    CoreDensity {
        #[command(flatten)]
        inst: Instance,
        #[arg(long, default_value_t = 4)]
        level: usize,
    },
    /// Worst `|E_T| - 2|T|` over small sets, plus a randomized search.
    Expansivity {
        #[command(flatten)]
        inst: Instance,
        #[arg(long, default_value_t = 3)]
        t_max: usize,
        #[arg(long, default_value_t = 0)]
        trials: usize,
    },
    /// Search for a proper coloring breaking `rho`-rigidity of a set.
    Rigidity {
        #[command(flatten)]
        inst: Instance,
        #[arg(long)]
        rho: String,
        /// Comma-separated vertices; defaults to the rigid set at `--level`.
        #[arg(long)]
        set: Option<String>,
        #[arg(long, default_value_t = 4)]
        level: usize,
    },
    /// Frequency of a tree pattern among pullbacks of the coloring.
    LocalConvergence {
        #[command(flatten)]
        inst: Instance,
        /// `singleton`, `edge:<label>` or `ball:<radius>`.
        #[arg(long, default_value = "edge:1")]
        domain: String,
        /// 0/1 string over the domain's elements.
        #[arg(long)]
        pattern: String,
    },
    /// `(D, δ)`-soficity with `D = {s_i, s_i s_j}`.
    SoficCheck {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "1/10")]
        delta: String,
    },
    /// Exact moments as rationals.
    Moments {
        #[command(subcommand)]
        which: MomentCmd,
    },
    /// Deviation probe of a 1-Lipschitz statistic in the planted model.
    Concentration {
        #[command(flatten)]
        model: Model,
        #[arg(long, default_value_t = 1000)]
        replicas: usize,
    },
    /// Run an experiment described by a JSON config.
    Experiment { config: PathBuf },
}

#[derive(Args, Debug, Serialize)]
struct Degree {
    #[arg(long, conflicts_with = "eta", required_unless_present = "eta")]
    d: Option<u64>,
    /// Choose `d` from the large-`k` parametrization instead.
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    k: usize,
}

impl Degree {
    fn resolve(&self) -> Result<u64> {
        match (self.d, self.eta) {
            (Some(d), _) => Ok(d),
            (None, Some(eta)) => Ok(d_of_eta(self.k, eta)?.d),
            _ => Err(Error::invalid("give --d or --eta")),
        }
    }
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
enum AnalyticCmd {
    /// First-moment exponent `f(d, k)`.
    F {
        #[command(flatten)]
        deg: Degree,
    },
    /// Second-moment exponent `ψ(x)` of the uniform model.
    Psi {
        #[command(flatten)]
        deg: Degree,
        #[arg(long)]
        x: f64,
    },
    /// Planted second-moment exponent `ψ₀(δ)` by both routes.
    Psi0 {
        #[command(flatten)]
        deg: Degree,
        #[arg(long)]
        delta: f64,
    },
    /// The equitable optimum type `t*`.
    Tstar {
        #[arg(long)]
        k: usize,
    },
    /// Core-survival iteration `p_l` and its limit.
    FixedPoint {
        #[command(flatten)]
        deg: Degree,
        #[arg(long, default_value_t = 1e-300)]
        tol: f64,
        #[arg(long, default_value_t = 1000)]
        l_max: usize,
    },
    /// `ψ₀` on a grid symmetric about 1/2.
    Scan {
        #[command(flatten)]
        deg: Degree,
        #[arg(long, default_value_t = 2001)]
        points: usize,
        /// CSV destination; the summary goes to stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
enum MomentCmd {
    /// `E[Z]`, or `E[Z_e]` with `--equitable`.
    First {
        #[command(flatten)]
        model: Model,
        #[arg(long)]
        equitable: bool,
    },
    /// `E^χ[Z_χ(δ)]` in the planted model.
    PlantedDistance {
        #[command(flatten)]
        model: Model,
        #[arg(long)]
        delta: String,
    },
}

/// Maps an error to the process exit code.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidInput(_) | Error::Domain(_) | Error::Unsupported(_) | Error::Json(_) => 2,
        Error::Scale { .. } => 3,
        Error::Solver(_) | Error::Io(_) | Error::Csv(_) => 1,
    }
}

/// Parses `argv` (including the program name), runs the command, and
/// returns the exit code. Results go to `out`, the parameter record and
/// diagnostics to `err`.
pub fn cli_dispatch<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{e}");
                return 2;
            }
            let _ = write!(out, "{e}");
            return 0;
        }
    };
    let rng = RngState::new(cli.seed, cli.stream);
    let record = serde_json::to_string(&cli.command).unwrap_or_default();
    let _ = writeln!(err, "# {rng} params: {record}");
    match run(&cli.command, &rng, out, err) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn emit<T: Serialize>(out: &mut dyn Write, v: &T) -> Result<()> {
    writeln!(out, "{}", serde_json::to_string_pretty(v)?)?;
    Ok(())
}

fn write_or_print(out: &mut dyn Write, path: Option<&Path>, body: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, format!("{body}\n"))?,
        None => writeln!(out, "{body}")?,
    }
    Ok(())
}

fn load_instance(inst: &Instance) -> Result<(UniformHom, Coloring)> {
    let (hom, chi) = load_hom(&inst.input)?;
    let chi = match (&inst.chi, chi) {
        (Some(s), _) => s.parse()?,
        (None, Some(c)) => c,
        (None, None) => Coloring::canonical_equitable(hom.n())?,
    };
    if chi.len() != hom.n() {
        return Err(Error::invalid("coloring length does not match the instance"));
    }
    Ok((hom, chi))
}

fn load_hom(path: &Path) -> Result<(UniformHom, Option<Coloring>)> {
    let mut v: Value = serde_json::from_str(&std::fs::read_to_string(path)?)?;
    let chi = match v.as_object_mut().and_then(|m| m.remove("chi")) {
        Some(Value::String(s)) => Some(s.parse()?),
        Some(_) => return Err(Error::invalid("`chi` must be a 0/1 string")),
        None => None,
    };
    Ok((serde_json::from_value(v)?, chi))
}

fn parse_domain(spec: &str, d: usize, k: usize) -> Result<TreeDomain> {
    let bad = || Error::invalid(format!("unknown domain `{spec}`; use singleton, edge:<label> or ball:<radius>"));
    match spec.split_once(':') {
        None if spec == "singleton" => TreeDomain::singleton(d, k),
        Some(("edge", l)) => {
            let l: usize = l.parse().map_err(|_| bad())?;
            if l == 0 {
                return Err(bad());
            }
            TreeDomain::single_edge(d, k, l - 1)
        }
        Some(("ball", r)) => build_ball(d, k, r.parse().map_err(|_| bad())?, 1 << 20),
        _ => Err(bad()),
    }
}

fn run(cmd: &Command, rng: &RngState, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    match cmd {
        Command::SampleUniform { model, output } => {
            let p = ModelParams::uniform(model.d, model.k, model.n)?;
            let hom = sample_uniform_hom(&p, &mut rng.rng())?;
            write_or_print(out, output.as_deref(), &hom.to_json()?)
        }
        Command::SamplePlanted { model, chi, output } => {
            let p = ModelParams::planted(model.d, model.k, model.n)?;
            let chi: Coloring = match chi {
                Some(s) => s.parse()?,
                None => Coloring::canonical_equitable(model.n)?,
            };
            let hom = sample_planted_hom(&p, &chi, &mut rng.rng())?;
            let mut v = serde_json::to_value(&hom)?;
            v["chi"] = json!(chi.to_string());
            write_or_print(out, output.as_deref(), &serde_json::to_string(&v)?)
        }
        Command::Count { input, eps, equitable } => {
            let (hom, _) = load_hom(input)?;
            let g = build_hypergraph(&hom);
            let rep = if *equitable { count_equitable(&g)? } else { count_proper(&g, &parse_fraction(eps)?)? };
            writeln!(out, "{}", rep.value)?;
            writeln!(err, "# method={:?} elapsed={:.3}s", rep.method, rep.elapsed)?;
            Ok(())
        }
        Command::Analytic { which } => run_analytic(which, out),
        Command::CoreDensity { inst, level } => {
            let (hom, chi) = load_instance(inst)?;
            let g = build_hypergraph(&hom);
            let dec = core_decomposition(&g, &chi, *level)?;
            let density = density_report(&g, &chi, *level)?;
            let lvl = dec.level(*level)?;
            emit(
                out,
                &json!({
                    "level": level,
                    "density": density.to_string(),
                    "density_f64": crate::numeric::fraction_to_f64(&density),
                    "core": lvl.core.len(),
                    "attached": lvl.attached.len(),
                    "attached_prime": lvl.attached_prime.len(),
                    "stabilized_at": dec.stabilized_at,
                }),
            )
        }
        Command::Expansivity { inst, t_max, trials } => {
            let (hom, chi) = load_instance(inst)?;
            let rep = expansivity_scan(&build_hypergraph(&hom), &chi, *t_max, *trials, &mut rng.rng())?;
            emit(out, &rep)
        }
        Command::Rigidity { inst, rho, set, level } => {
            let (hom, chi) = load_instance(inst)?;
            let g = build_hypergraph(&hom);
            let r: Vec<usize> = match set {
                Some(s) if s.trim().is_empty() => Vec::new(),
                Some(s) => s
                    .split(',')
                    .map(|x| x.trim().parse().map_err(|_| Error::invalid(format!("bad vertex `{x}`"))))
                    .collect::<Result<_>>()?,
                None => core_decomposition(&g, &chi, *level)?.level(*level)?.rigid_set(),
            };
            let witness = rigidity_violation_search(&g, &chi, &r, &parse_fraction(rho)?)?;
            emit(out, &json!({"set_size": r.len(), "rigid": witness.is_none(), "witness": witness.map(|c| c.to_string())}))
        }
        Command::LocalConvergence { inst, domain, pattern } => {
            let (hom, chi) = load_instance(inst)?;
            let p = hom.params();
            let dom = parse_domain(domain, p.d, p.k)?;
            let bits = pattern
                .chars()
                .map(|c| match c {
                    '0' => Ok(0),
                    '1' => Ok(1),
                    _ => Err(Error::invalid("pattern must be a 0/1 string")),
                })
                .collect::<Result<_>>()?;
            let xi = Pattern { bits };
            if !xi.is_proper_on(&dom) {
                writeln!(err, "warning: pattern is not proper on the domain; its cylinder has mass 0")?;
            }
            emit(out, &local_convergence_stat(&hom, &chi, &dom, &xi)?)
        }
        Command::SoficCheck { input, delta } => {
            let (hom, _) = load_hom(input)?;
            let p = hom.params();
            let words = super::default_sofic_words(p.d, p.k);
            emit(out, &check_sofic(&hom, &words, parse_fraction(delta)?)?)
        }
        Command::Moments { which } => {
            let value = match which {
                MomentCmd::First { model, equitable } => {
                    if *equitable {
                        count::equitable_first_moment(&ModelParams::planted(model.d, model.k, model.n)?)?
                    } else {
                        count::first_moment(model.d, model.k, model.n)?
                    }
                }
                MomentCmd::PlantedDistance { model, delta } => count::exact_planted_distance_moment(
                    &ModelParams::planted(model.d, model.k, model.n)?,
                    &parse_fraction(delta)?,
                )?,
            };
            writeln!(out, "{value}")?;
            Ok(())
        }
        Command::Concentration { model, replicas } => {
            emit(out, &concentration_probe(model.d, model.k, model.n, *replicas, rng)?)
        }
        Command::Experiment { config } => {
            let cfg = ExperimentConfig::from_json(&std::fs::read_to_string(config)?)?;
            emit(out, &run_experiment(&cfg)?)
        }
    }
}

fn run_analytic(which: &AnalyticCmd, out: &mut dyn Write) -> Result<()> {
    match which {
        AnalyticCmd::F { deg } => writeln!(out, "{}", analytics::f_dk(deg.resolve()?, deg.k)?)?,
        AnalyticCmd::Psi { deg, x } => writeln!(out, "{}", analytics::psi(*x, deg.resolve()?, deg.k)?)?,
        AnalyticCmd::Psi0 { deg, delta } => emit(out, &analytics::psi0_value(*delta, deg.resolve()?, deg.k)?)?,
        AnalyticCmd::Tstar { k } => emit(out, &analytics::t_star(*k)?)?,
        AnalyticCmd::FixedPoint { deg, tol, l_max } => {
            emit(out, &analytics::core_fixed_point(deg.resolve()?, deg.k, *tol, *l_max)?)?
        }
        AnalyticCmd::Scan { deg, points, output } => {
            let scan = analytics::psi0_scan(deg.resolve()?, deg.k, *points)?;
            if let Some(path) = output {
                let mut w = csv::Writer::from_path(path)?;
                for row in &scan.rows {
                    w.serialize(row)?;
                }
                let mut file = w.into_inner().map_err(|e| e.into_error())?;
                let params = json!({
                    "d": scan.d, "k": scan.k, "eta": deg.eta, "points": points,
                    "precision": analytics::Hp::default().precision(),
                });
                writeln!(file, "# params: {params}")?;
            }
            emit(
                out,
                &json!({
                    "d": scan.d, "k": scan.k, "points": scan.rows.len(),
                    "argmax_delta": scan.argmax_delta, "margin": scan.margin,
                    "asymmetry": scan.asymmetry, "max_route_gap": scan.max_route_gap,
                }),
            )?
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (i32, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = cli_dispatch(std::iter::once("sofic-lab").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap())
    }

    #[test]
    fn f_of_2_2_is_zero() {
        let (code, out) = run_args(&["analytic", "f", "--d", "2", "--k", "2"]);
        assert_eq!(code, 0);
        assert_eq!(out.trim(), "0");
    }

    #[test]
    fn validation_and_scale_codes() {
        assert_eq!(run_args(&["moments", "first", "--d", "1", "--k", "3", "--n", "4"]).0, 2);
        assert_eq!(run_args(&["moments", "first", "--d", "1", "--k", "2", "--n", "200"]).0, 3);
        assert_eq!(run_args(&["no-such-command"]).0, 2);
    }
}
