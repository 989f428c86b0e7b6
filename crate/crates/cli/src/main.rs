use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use bvkit::bv::{observables, BvModel, BvModelJson};
use bvkit::graded::{Cutoff, DgSpace, Functional, Kernel2, Kernel2Json, TermJson};
use bvkit::hrg::{exp_contract, graph_sum};
use bvkit::modular::{eisenstein, relative_gap, two_loop_lhs, two_loop_rhs, Complex64, LatticeParams};
use bvkit::singularity::{brieskorn_rank, classical_observables_match, Superpotential};
use bvkit::suite::{paper_acceptance, Area};
use bvkit::weyl::{
    algebraic_index, index_to_json, moyal, qme_vs_star, tqm_effective, IndexInput, ModeModel, SymplecticJson,
    SymplecticSpace,
};
use bvkit::Error;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "bvkit", version, about = "Exact-arithmetic Batalin–Vilkovisky workbench")]
struct Cli {
    /// Report format.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Subcommand)]
enum Cmd {
    /// BV models and master equations.
    #[command(subcommand)]
    Bv(BvCmd),
    /// Homotopic renormalization-group flow.
    #[command(subcommand)]
    Hrg(HrgCmd),
    /// Moyal product, topological quantum mechanics, algebraic index.
    #[command(subcommand)]
    Weyl(WeylCmd),
    /// Jacobian rings and Brieskorn lattices.
    #[command(subcommand)]
    Sing(SingCmd),
    /// Eisenstein series and the two-loop identity.
    #[command(subcommand)]
    Mod(ModCmd),
    /// Acceptance battery.
    #[command(subcommand)]
    Suite(SuiteCmd),
}

#[derive(Args)]
struct Trunc {
    /// Polynomial degree cutoff D (default: largest degree in the input).
    #[arg(long)]
    degree: Option<u32>,
    /// ℏ-order cutoff H (default: largest ℏ power in the input).
    #[arg(long)]
    hbar: Option<u32>,
}

#[derive(Subcommand)]
enum BvCmd {
    /// Check Δ² = 0, [Q, Δ] = 0 and Q² = 0 on random functionals.
    Check {
        model: PathBuf,
        #[arg(long, default_value_t = 10)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 5)]
        degree: u32,
        #[arg(long, default_value_t = 1)]
        hbar: u32,
    },
    /// Classical master equation residual QI₀ + ½{I₀, I₀}.
    Cme {
        model: PathBuf,
        interaction: PathBuf,
        #[command(flatten)]
        trunc: Trunc,
    },
    /// Quantum master equation residual QI + ℏΔI + ½{I, I}.
    Qme {
        model: PathBuf,
        interaction: PathBuf,
        #[command(flatten)]
        trunc: Trunc,
    },
    /// Cohomology of classical or quantum observables.
    Obs {
        model: PathBuf,
        interaction: PathBuf,
        #[arg(long)]
        quantum: bool,
        #[command(flatten)]
        trunc: Trunc,
    },
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Method {
    Graph,
    Exp,
    Both,
}

#[derive(Subcommand)]
enum HrgCmd {
    /// W(P, I) = ℏ log(e^{ℏ∂_P} e^{I/ℏ}).
    Flow {
        model: PathBuf,
        propagator: PathBuf,
        interaction: PathBuf,
        #[command(flatten)]
        trunc: Trunc,
        #[arg(long, value_enum, default_value_t = Method::Both)]
        method: Method,
    },
    /// Per-graph breakdown of W(P, I).
    Graphs {
        model: PathBuf,
        propagator: PathBuf,
        interaction: PathBuf,
        #[command(flatten)]
        trunc: Trunc,
    },
}

#[derive(Subcommand)]
enum WeylCmd {
    /// Moyal product a ⋆ b.
    Star {
        space: PathBuf,
        a: PathBuf,
        b: PathBuf,
        #[arg(long)]
        hbar: u32,
        #[arg(long)]
        degree: Option<u32>,
    },
    /// Effective QME obstruction against the star-commutator prediction.
    Tqm {
        space: PathBuf,
        interaction: PathBuf,
        /// Mode cutoffs, comma separated.
        #[arg(long, value_delimiter = ',', default_value = "4,8,16")]
        modes: Vec<usize>,
        #[arg(long = "L", default_value_t = 1.0)]
        l: f64,
        #[arg(long, value_delimiter = ',', default_value = "0.004,0.002,0.001")]
        eps_grid: Vec<f64>,
        #[command(flatten)]
        trunc: Trunc,
    },
    /// Algebraic index ∫ e^{ω_ℏ/ℏ} Â.
    Index {
        input: PathBuf,
        #[arg(long)]
        hbar: u32,
    },
}

#[derive(Subcommand)]
enum SingCmd {
    /// Jacobian ring, Milnor number, classical observables.
    Milnor {
        polynomial: String,
        #[arg(long, default_value_t = 8)]
        degree: u32,
    },
    /// Truncated Brieskorn-lattice rank.
    Brieskorn {
        polynomial: String,
        #[arg(long, default_value_t = 8)]
        degree: u32,
        #[arg(long, default_value_t = 3)]
        hbar: u32,
    },
}

#[derive(Subcommand)]
enum ModCmd {
    /// q-expansion of E_k.
    Eisenstein {
        k: u32,
        #[arg(long, default_value_t = 10)]
        order: usize,
    },
    /// Disk-excised ∫ 𝐏³ against the quasimodular right-hand side.
    Twoloop {
        #[arg(long, value_parser = parse_tau)]
        tau: Complex64,
        #[arg(long, default_value_t = 12)]
        lattice: usize,
        #[arg(long, default_value_t = 0.05)]
        disk: f64,
        #[arg(long, default_value_t = 40)]
        order: usize,
        #[arg(long, default_value_t = 48)]
        nodes: usize,
        #[arg(long, default_value_t = 1e-4)]
        tolerance: f64,
        /// Replace E₂* by E₂ on the right-hand side.
        #[arg(long)]
        hol_limit: bool,
    },
}

#[derive(Subcommand)]
enum SuiteCmd {
    /// All acceptance criteria.
    PaperAcceptance {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// bv, hrg, singularity, weyl or modular.
        #[arg(long)]
        only: Option<String>,
    },
}

/// Usage errors exit with 2, mathematical failures with 1.
enum Fail {
    Usage(String),
    Math(String),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Fail {
        match e {
            Error::Argument(_) | Error::Parse(_) | Error::Cutoff(_) | Error::Space(_) => Fail::Usage(e.to_string()),
            _ => Fail::Math(e.to_string()),
        }
    }
}

type Out = Result<(Value, bool), Fail>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.cmd {
        Cmd::Bv(c) => bv(c),
        Cmd::Hrg(c) => hrg(c),
        Cmd::Weyl(c) => weyl(c),
        Cmd::Sing(c) => sing(c),
        Cmd::Mod(c) => modular(c),
        Cmd::Suite(c) => suite(c, cli.format),
    };
    match res {
        Ok((report, pass)) => {
            match cli.format {
                Format::Json => println!("{}", serde_json::to_string_pretty(&report).expect("json")),
                Format::Text => print_text(&report),
            }
            if pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(Fail::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Fail::Math(m)) => {
            eprintln!("failure: {m}");
            ExitCode::from(1)
        }
    }
}

fn print_text(v: &Value) {
    if let Some(lines) = v.get("lines").and_then(Value::as_array) {
        for l in lines {
            println!("{}", l.as_str().unwrap_or_default());
        }
        return;
    }
    match v.as_object() {
        Some(obj) => {
            for (k, x) in obj {
                match x {
                    Value::String(s) => println!("{k}: {s}"),
                    _ => println!("{k}: {x}"),
                }
            }
        }
        None => println!("{v}"),
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Fail> {
    let text = std::fs::read_to_string(path).map_err(|e| Fail::Usage(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Fail::Usage(format!("{}: {e}", path.display())))
}

fn load_model(path: &Path) -> Result<(BvModel, Option<Vec<TermJson>>), Fail> {
    let j: BvModelJson = read_json(path)?;
    let m = BvModel::from_json(&j).map_err(|e| Fail::Usage(format!("{}: {e}", path.display())))?;
    Ok((m, j.interaction))
}

fn cutoff_for(terms: &[TermJson], trunc: &Trunc) -> Cutoff {
    let d = terms.iter().map(|t| t.monomial.len() as u32).max().unwrap_or(0);
    let h = terms.iter().map(|t| t.hbar).max().unwrap_or(0);
    Cutoff::new(trunc.degree.unwrap_or(d), trunc.hbar.unwrap_or(h))
}

fn load_functional(space: &Arc<DgSpace>, path: &Path, trunc: &Trunc) -> Result<Functional, Fail> {
    let terms: Vec<TermJson> = read_json(path)?;
    load_terms(space, path, &terms, cutoff_for(&terms, trunc))
}

/// For master equations the default cutoff holds the whole residual: `{I, I}`
/// has degree up to `2d − 2` and `ℏΔI` raises the ℏ-order by one.
fn load_for_residual(space: &Arc<DgSpace>, path: &Path, trunc: &Trunc) -> Result<Functional, Fail> {
    let terms: Vec<TermJson> = read_json(path)?;
    let c = cutoff_for(&terms, &Trunc { degree: None, hbar: None });
    let cut = Cutoff::new(
        trunc.degree.unwrap_or(c.degree.max(2 * c.degree.saturating_sub(1))),
        trunc.hbar.unwrap_or(c.hbar + 1),
    );
    load_terms(space, path, &terms, cut)
}

fn load_terms(space: &Arc<DgSpace>, path: &Path, terms: &[TermJson], cut: Cutoff) -> Result<Functional, Fail> {
    Functional::from_json(space.clone(), cut, terms).map_err(|e| Fail::Usage(format!("{}: {e}", path.display())))
}

fn cut_json(c: Cutoff) -> Value {
    json!({"degree": c.degree, "hbar": c.hbar})
}

fn bv(c: BvCmd) -> Out {
    match c {
        BvCmd::Check { model, samples, seed, degree, hbar } => {
            use rand::SeedableRng;
            if samples == 0 || degree == 0 {
                return Err(Fail::Usage("samples and degree must be positive".into()));
            }
            let (m, _) = load_model(&model)?;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let cut = Cutoff::new(degree, hbar);
            let r = m.check_axioms(&mut rng, samples, cut)?;
            let q_closed = m.kernel().apply_q().is_zero();
            let pass = r.passed() && q_closed;
            Ok((json!({"truncation": cut_json(cut), "seed": seed, "kernel_q_closed": q_closed, "axioms": r, "pass": pass}), pass))
        }
        BvCmd::Cme { model, interaction, trunc } => {
            let (m, _) = load_model(&model)?;
            let i = load_for_residual(m.space(), &interaction, &Trunc { hbar: Some(0), ..trunc })?;
            let r = m.cme_residual(&i)?;
            let pass = r.is_zero();
            Ok((json!({"truncation": cut_json(i.cutoff()), "residual": r.to_json(), "pass": pass}), pass))
        }
        BvCmd::Qme { model, interaction, trunc } => {
            let (m, _) = load_model(&model)?;
            let i = load_for_residual(m.space(), &interaction, &trunc)?;
            let r = m.qme_residual(&i)?;
            let pass = r.classical_zero && r.quantum_zero;
            Ok((json!({"truncation": cut_json(i.cutoff()), "residual": r.to_json(), "pass": pass}), pass))
        }
        BvCmd::Obs { model, interaction, quantum, trunc } => {
            let (m, _) = load_model(&model)?;
            let i = load_functional(m.space(), &interaction, &trunc)?;
            let cut = i.cutoff();
            let r = observables(&m, &i, quantum, cut.degree, cut.hbar)?;
            Ok((json!({"truncation": cut_json(cut), "observables": r, "pass": true}), true))
        }
    }
}

fn load_kernel(space: &Arc<DgSpace>, path: &Path) -> Result<Kernel2, Fail> {
    let j: Kernel2Json = read_json(path)?;
    Kernel2::from_json(space.clone(), &j).map_err(|e| Fail::Usage(format!("{}: {e}", path.display())))
}

fn hrg(c: HrgCmd) -> Out {
    match c {
        HrgCmd::Flow { model, propagator, interaction, trunc, method } => {
            let (m, _) = load_model(&model)?;
            let p = load_kernel(m.space(), &propagator)?;
            let i = load_functional(m.space(), &interaction, &trunc)?;
            let cut = i.cutoff();
            let name = match method {
                Method::Graph => "graph",
                Method::Exp => "exp",
                Method::Both => "both",
            };
            let mut out = json!({"truncation": cut_json(cut), "method": name});
            let mut pass = true;
            let graph = if method != Method::Exp { Some(graph_sum(&p, &i, cut)?) } else { None };
            let exp = if method != Method::Graph { Some(exp_contract(&p, &i, cut)?) } else { None };
            if let (Some(g), Some(e)) = (&graph, &exp) {
                pass = g.total == *e;
                out["equal"] = json!(pass);
            }
            let total = graph.as_ref().map(|g| g.total.clone()).or(exp).expect("one method ran");
            out["functional"] = json!(total.to_json());
            if let Some(g) = graph {
                out["graphs"] = Value::Array(g.graphs.iter().map(|w| w.to_json()).collect());
            }
            out["pass"] = json!(pass);
            Ok((out, pass))
        }
        HrgCmd::Graphs { model, propagator, interaction, trunc } => {
            let (m, _) = load_model(&model)?;
            let p = load_kernel(m.space(), &propagator)?;
            let i = load_functional(m.space(), &interaction, &trunc)?;
            let cut = i.cutoff();
            let g = graph_sum(&p, &i, cut)?;
            let graphs: Vec<Value> = g.graphs.iter().map(|w| w.to_json()).collect();
            Ok((json!({"truncation": cut_json(cut), "count": graphs.len(), "graphs": graphs, "pass": true}), true))
        }
    }
}

fn load_symplectic(path: &Path) -> Result<SymplecticSpace, Fail> {
    let j: SymplecticJson = read_json(path)?;
    SymplecticSpace::from_json(&j).map_err(|e| Fail::Usage(format!("{}: {e}", path.display())))
}

fn weyl(c: WeylCmd) -> Out {
    match c {
        WeylCmd::Star { space, a, b, hbar, degree } => {
            let sp = load_symplectic(&space)?;
            let ta: Vec<TermJson> = read_json(&a)?;
            let tb: Vec<TermJson> = read_json(&b)?;
            let d = ta.iter().chain(&tb).map(|t| t.monomial.len() as u32).max().unwrap_or(0);
            let cut = Cutoff::new(degree.unwrap_or(2 * d), hbar);
            let fa = Functional::from_json(sp.space().clone(), cut, &ta)?;
            let fb = Functional::from_json(sp.space().clone(), cut, &tb)?;
            let prod = moyal(&sp, &fa, &fb)?;
            Ok((json!({"truncation": cut_json(cut), "product": prod.to_json(), "pass": true}), true))
        }
        WeylCmd::Tqm { space, interaction, modes, l, eps_grid, trunc } => {
            if modes.is_empty() || modes.contains(&0) || modes.iter().any(|&n| n > 64) {
                return Err(Fail::Usage("mode cutoffs must lie in 1..=64".into()));
            }
            let emax = eps_grid.iter().copied().fold(0.0, f64::max);
            if !(l >= emax) {
                return Err(Fail::Usage("need every ε ≤ L".into()));
            }
            let sp = load_symplectic(&space)?;
            let i = load_functional(sp.space(), &interaction, &trunc)?;
            let rep = qme_vs_star(&sp, &i, &modes, &eps_grid)?;
            let top = *modes.iter().max().expect("nonempty");
            let emin = eps_grid.iter().copied().fold(f64::INFINITY, f64::min);
            let eff = tqm_effective(&ModeModel::new(sp.clone(), top)?, &i, emin, l)?;
            let pairs: Vec<Value> = rep.runs.iter().map(|r| json!([r.modes, r.extrapolated])).collect();
            let pass = rep.monotone;
            Ok((
                json!({
                    "truncation": cut_json(i.cutoff()),
                    "modes": modes,
                    "L": l,
                    "eps_grid": eps_grid,
                    "convergence": pairs,
                    "report": rep.to_json(),
                    "effective_terms_at_top_modes": eff.len(),
                    "pass": pass,
                }),
                pass,
            ))
        }
        WeylCmd::Index { input, hbar } => {
            let inp: IndexInput = read_json(&input)?;
            let s = algebraic_index(&inp, hbar)?;
            Ok((json!({"truncation": {"hbar": hbar}, "index": index_to_json(&s), "pass": true}), true))
        }
    }
}

fn sing(c: SingCmd) -> Out {
    match c {
        SingCmd::Milnor { polynomial, degree } => {
            let f = Superpotential::parse(&polynomial, None)?;
            let r = classical_observables_match(&f, degree)?;
            let pass = r.matches;
            Ok((json!({"polynomial": f.render(), "truncation": {"degree": degree}, "report": r, "pass": pass}), pass))
        }
        SingCmd::Brieskorn { polynomial, degree, hbar } => {
            let f = Superpotential::parse(&polynomial, None)?;
            let r = brieskorn_rank(&f, degree, hbar)?;
            let pass = r.free_rank == r.milnor;
            Ok((
                json!({"polynomial": f.render(), "truncation": {"degree": degree, "hbar": hbar}, "report": r, "pass": pass}),
                pass,
            ))
        }
    }
}

fn parse_tau(s: &str) -> Result<Complex64, String> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let body = t.strip_suffix('i').ok_or("τ must be written a+bi")?;
    // split at the last sign that is not at the start or after an exponent marker
    let split = body
        .char_indices()
        .filter(|&(k, ch)| k > 0 && (ch == '+' || ch == '-') && !matches!(body.as_bytes()[k - 1], b'e' | b'E'))
        .map(|(k, _)| k)
        .last();
    let (re, im) = match split {
        Some(k) => (&body[..k], &body[k..]),
        None => ("0", body),
    };
    let im = match im {
        "" | "+" => "1",
        "-" => "-1",
        x => x,
    };
    let re: f64 = re.parse().map_err(|_| format!("bad real part in {s:?}"))?;
    let im: f64 = im.trim_start_matches('+').parse().map_err(|_| format!("bad imaginary part in {s:?}"))?;
    if !(im > 0.0) {
        return Err("τ must lie in the upper half plane".into());
    }
    Ok(Complex64::new(re, im))
}

fn modular(c: ModCmd) -> Out {
    match c {
        ModCmd::Eisenstein { k, order } => {
            let e = eisenstein(k, order)?;
            Ok((json!({"k": k, "truncation": {"order": order}, "series": e.to_json(), "pass": true}), true))
        }
        ModCmd::Twoloop { tau, lattice, disk, order, nodes, tolerance, hol_limit } => {
            if !(1..=200).contains(&lattice) || !(4..=400).contains(&nodes) || order == 0 || order > 400 {
                return Err(Fail::Usage("need 1 ≤ lattice ≤ 200, 4 ≤ nodes ≤ 400, 1 ≤ order ≤ 400".into()));
            }
            let params = LatticeParams { tau, lattice, disk, nodes };
            let lhs = two_loop_lhs(&params)?;
            let rhs = two_loop_rhs(tau, order, hol_limit)?;
            let rel = relative_gap(lhs.value, rhs.value);
            let pass = rel < tolerance;
            Ok((
                json!({
                    "tau": [tau.re, tau.im],
                    "truncation": {"lattice": lattice, "disk": disk, "nodes": nodes, "order": order},
                    "lhs": lhs,
                    "rhs": rhs,
                    "relative_gap": rel,
                    "tolerance": tolerance,
                    "pass": pass,
                }),
                pass,
            ))
        }
    }
}

fn suite(c: SuiteCmd, format: Format) -> Out {
    let SuiteCmd::PaperAcceptance { seed, only } = c;
    let only: Option<Area> = match only {
        Some(s) => Some(s.parse::<Area>()?),
        None => None,
    };
    let r = paper_acceptance(seed, only);
    let mut v = serde_json::to_value(&r).expect("plain data");
    if matches!(format, Format::Text) {
        v["lines"] = json!(r.criteria.iter().map(|c| c.line()).collect::<Vec<_>>());
    }
    Ok((v, r.passed))
}
