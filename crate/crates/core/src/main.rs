use clap::{Args, Parser, Subcommand};
use lienard_audit::audit::{branch_name, render_report, run_full_audit, AuditConfig, Format};
use lienard_audit::exact::{self, cubic_residual, EPS};
use lienard_audit::exppoly::fmt_cx;
use lienard_audit::factorization::{
    ode_residual_at, BernoulliSolution, HalfPowerSheet, OdeForm, DEFAULT_QUAD_TOL,
};
use lienard_audit::lienard::{integrate_vdp, skeleton_csv, skeleton_grid};
use lienard_audit::num::complex::{parse_pair, Cx};
use lienard_audit::num::fmt_num;
use lienard_audit::num::ode::StepperConfig;
use lienard_audit::symmetry::{
    char_roots, general_ansatz_structure, invariance_audit, make_generators, AuditGrid, ZERO_TOL,
};
use lienard_audit::{Error, Result, Sign};
use serde_json::{json, Map, Value};
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

#[derive(Parser, Debug)]
#[command(
    name = "lienard-audit",
    version,
    about = "Residual audit of the deformed complex Van der Pol chain"
)]
struct Cli {
    /// JSON file whose keys mirror the long flags; explicit flags win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for the randomized sweeps.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Roots of the amplitude cubic.
    Roots {
        #[arg(long)]
        branch: Option<String>,
        #[arg(long)]
        json: bool,
    },
    /// One exact-solution branch record.
    Exact {
        #[arg(long)]
        branch: Option<String>,
        #[arg(long)]
        root_index: Option<usize>,
    },
    /// Integrates the oscillator and writes the trajectory as CSV.
    Integrate(IntegrateArgs),
    /// Samples the skeleton surface of the deformed equation.
    Skeleton(SkeletonArgs),
    /// Samples the Bernoulli closed form with its pointwise residual.
    Bernoulli(BernoulliArgs),
    /// Determining-equation groups for the two generators.
    Symmetry {
        #[arg(long)]
        branch: Option<String>,
        #[arg(long)]
        general_ansatz: bool,
    },
    /// Runs every check and prints the report.
    Audit {
        #[arg(long)]
        branch: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        kappa: Option<String>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        format: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct IntegrateArgs {
    #[arg(long, allow_hyphen_values = true)]
    eps: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    z0: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    v0: Option<String>,
    #[arg(long)]
    t1: Option<f64>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SkeletonArgs {
    #[arg(long)]
    branch: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    ymin: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    ymax: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pmin: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pmax: Option<f64>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    t: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BernoulliArgs {
    #[arg(long)]
    branch: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    sign: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    t0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    t1: Option<f64>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Flag values merged with the optional config file.
struct Settings {
    file: Map<String, Value>,
}

impl Settings {
    fn load(path: Option<&PathBuf>) -> Result<Self> {
        let file = match path {
            None => Map::new(),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| Error::InvalidInput(format!("{}: {e}", p.display())))?;
                match serde_json::from_str(&text) {
                    Ok(Value::Object(m)) => m,
                    Ok(_) => return Err(Error::Parse("config must be a JSON object".into())),
                    Err(e) => return Err(Error::Parse(format!("{}: {e}", p.display()))),
                }
            }
        };
        Ok(Self { file })
    }

    fn raw(&self, key: &str) -> Option<&Value> {
        self.file
            .get(key)
            .or_else(|| self.file.get(&key.replace('-', "_")))
    }

    fn string(&self, flag: Option<String>, key: &str) -> Option<String> {
        flag.or_else(|| match self.raw(key)? {
            Value::String(s) => Some(s.clone()),
            v => Some(v.to_string()),
        })
    }

    fn f64(&self, flag: Option<f64>, key: &str, default: f64) -> Result<f64> {
        if let Some(v) = flag {
            return Ok(v);
        }
        match self.raw(key) {
            None => Ok(default),
            Some(v) => v.as_f64().ok_or_else(|| bad_key(key)),
        }
    }

    fn opt_f64(&self, flag: Option<f64>, key: &str) -> Result<Option<f64>> {
        match (flag, self.raw(key)) {
            (Some(v), _) => Ok(Some(v)),
            (None, None) => Ok(None),
            (None, Some(v)) => v.as_f64().map(Some).ok_or_else(|| bad_key(key)),
        }
    }

    fn usize(&self, flag: Option<usize>, key: &str, default: usize) -> Result<usize> {
        if let Some(v) = flag {
            return Ok(v);
        }
        match self.raw(key) {
            None => Ok(default),
            Some(v) => v.as_u64().map(|n| n as usize).ok_or_else(|| bad_key(key)),
        }
    }

    fn u64(&self, flag: Option<u64>, key: &str) -> Result<Option<u64>> {
        match (flag, self.raw(key)) {
            (Some(v), _) => Ok(Some(v)),
            (None, None) => Ok(None),
            (None, Some(v)) => v.as_u64().map(Some).ok_or_else(|| bad_key(key)),
        }
    }

    fn bool(&self, flag: bool, key: &str) -> bool {
        flag || self.raw(key).and_then(Value::as_bool).unwrap_or(false)
    }

    fn branch(&self, flag: Option<String>) -> Result<Sign> {
        match self.string(flag, "branch").as_deref() {
            None => Ok(Sign::Plus),
            Some("upper") => Ok(Sign::Plus),
            Some("lower") => Ok(Sign::Minus),
            Some(other) => Err(Error::Parse(format!(
                "branch must be upper or lower, got `{other}`"
            ))),
        }
    }

    fn complex(&self, flag: Option<String>, key: &str, default: Cx) -> Result<Cx> {
        match self.string(flag, key) {
            None => Ok(default),
            Some(s) => parse_pair(&s)
                .ok_or_else(|| Error::Parse(format!("--{key} expects RE,IM, got `{s}`"))),
        }
    }
}

fn bad_key(key: &str) -> Error {
    Error::Parse(format!("config key `{key}` has the wrong type"))
}

fn emit(text: &str, out: Option<&PathBuf>, quiet: bool) -> Result<()> {
    match out {
        Some(p) => {
            std::fs::write(p, text)
                .map_err(|e| Error::InvalidInput(format!("{}: {e}", p.display())))?;
            if !quiet {
                eprintln!("wrote {}", p.display());
            }
            Ok(())
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cx_json(z: Cx) -> Value {
    json!([z.re, z.im])
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json value");
    s.push('\n');
    s
}

fn run(cli: Cli) -> Result<ExitCode> {
    let cfg = Settings::load(cli.config.as_ref())?;
    let quiet = cfg.bool(cli.quiet, "quiet");
    let seed = cfg.u64(cli.seed, "seed")?;
    match cli.command {
        Command::Roots { branch, json } => {
            let b = cfg.branch(branch)?;
            let roots = exact::solve_c(b);
            if cfg.bool(json, "json") {
                let list: Vec<Value> = roots
                    .iter()
                    .map(|c| json!({"re": c.re, "im": c.im, "residual": cubic_residual(*c, b)}))
                    .collect();
                print!(
                    "{}",
                    pretty(&json!({"branch": branch_name(b), "roots": list}))
                );
            } else {
                for c in roots {
                    println!("{}  residual {}", fmt_cx(c), fmt_num(cubic_residual(c, b)));
                }
            }
        }
        Command::Exact { branch, root_index } => {
            let b = cfg.branch(branch)?;
            let k = cfg.usize(root_index, "root-index", 0)?;
            let roots = exact::solve_c(b);
            let c = *roots.get(k).ok_or_else(|| {
                Error::InvalidInput(format!("root index {k} out of range (0..3)"))
            })?;
            let br = exact::make_branch(c, b)?;
            let th = br.theta.value();
            let f2 = br.coeffs.f2.eval(0.0);
            let rec = json!({
                "branch": branch_name(b),
                "c": cx_json(br.c),
                "theta": cx_json(th),
                "theta_real": br.theta.as_real().is_some(),
                "eps": cx_json(br.eps),
                "F1": cx_json(br.coeffs.f1.eval(0.0)),
                "G": cx_json(br.g()),
                "F2_amplitude": cx_json(f2),
                "F2_rate": cx_json(Cx::new(0.0, 1.0) * th),
                "theta_c_residual": exact::theta_c_identity(&br),
            });
            print!("{}", pretty(&rec));
        }
        Command::Integrate(a) => {
            let eps = cfg.complex(a.eps, "eps", Cx::new(1.0, 0.0))?;
            let z0 = cfg.complex(a.z0, "z0", Cx::new(1.0, 0.0))?;
            let v0 = cfg.complex(a.v0, "v0", Cx::new(0.0, 1.0))?;
            let t1 = cfg.f64(a.t1, "t1", 20.0)?;
            let n = cfg.usize(a.n, "n", 2001)?;
            let out = a.out.or_else(|| cfg.string(None, "out").map(PathBuf::from));
            let tr = integrate_vdp(eps, z0, v0, t1, n, &StepperConfig::default())?;
            let dz = tr.dz().expect("integrated trajectories carry derivatives");
            let mut csv = String::from("t,z_re,z_im,dz_re,dz_im\n");
            for ((t, z), d) in tr.t().iter().zip(tr.z()).zip(dz) {
                csv.push_str(&format!(
                    "{},{},{},{},{}\n",
                    fmt_num(*t),
                    fmt_num(z.re),
                    fmt_num(z.im),
                    fmt_num(d.re),
                    fmt_num(d.im)
                ));
            }
            emit(&csv, out.as_ref(), quiet)?;
        }
        Command::Skeleton(a) => {
            let b = exact::real_branch(cfg.branch(a.branch)?);
            let y = (
                cfg.f64(a.ymin, "ymin", -2.0)?,
                cfg.f64(a.ymax, "ymax", 2.0)?,
            );
            let p = (
                cfg.f64(a.pmin, "pmin", -2.0)?,
                cfg.f64(a.pmax, "pmax", 2.0)?,
            );
            let n = cfg.usize(a.n, "n", 41)?;
            let t = cfg.f64(a.t, "t", 0.0)?;
            let out = a.out.or_else(|| cfg.string(None, "out").map(PathBuf::from));
            let nodes = skeleton_grid(&b.coeffs, y, p, n, t)?;
            emit(&skeleton_csv(&nodes), out.as_ref(), quiet)?;
        }
        Command::Bernoulli(a) => {
            let b = exact::real_branch(cfg.branch(a.branch)?);
            let sign = match cfg.string(a.sign, "sign") {
                None => Sign::Plus,
                Some(s) => Sign::from_str(&s)?,
            };
            let t0 = cfg.f64(a.t0, "t0", 0.0)?;
            let t1 = cfg.f64(a.t1, "t1", t0 + 3.0)?;
            let n = cfg.usize(a.n, "n", 101)?;
            if n < 2 || !(t1 > t0) {
                return Err(Error::InvalidInput("need n >= 2 and t1 > t0".into()));
            }
            let out = a.out.or_else(|| cfg.string(None, "out").map(PathBuf::from));
            let sol = BernoulliSolution::new(b.coeffs.clone(), sign, t0).with_tol(DEFAULT_QUAD_TOL);
            let y = |t: f64| sol.y(t);
            let form = OdeForm::bernoulli(&sol, HalfPowerSheet::Substitution);
            let mut csv = String::from("t,Y_re,Y_im,residual\n");
            let mut skipped = 0;
            for k in 0..n {
                let t = t0 + (t1 - t0) * k as f64 / (n - 1) as f64;
                match (sol.y(t), ode_residual_at(&y, &form, t)) {
                    (Ok(v), Ok(r)) => csv.push_str(&format!(
                        "{},{},{},{}\n",
                        fmt_num(t),
                        fmt_num(v.re),
                        fmt_num(v.im),
                        fmt_num(r.norm())
                    )),
                    _ => skipped += 1,
                }
            }
            if skipped > 0 && !quiet {
                eprintln!("skipped {skipped} samples near a pole");
            }
            emit(&csv, out.as_ref(), quiet)?;
        }
        Command::Symmetry {
            branch,
            general_ansatz,
        } => {
            let b = exact::real_branch(cfg.branch(branch)?);
            let f1 = b.coeffs.f1.eval(0.0);
            let (ap, am) = char_roots(f1, b.g());
            let (x1, x2) = make_generators(f1, ap, am);
            let grid = AuditGrid::for_coeffs(&b.coeffs);
            let mut rec = Map::new();
            rec.insert("branch".into(), json!(branch_name(b.branch)));
            for (name, v) in [("X1", &x1), ("X2", &x2)] {
                let a = invariance_audit(v, &b.coeffs, &grid, ZERO_TOL)?;
                let groups = serde_json::to_value(a.system.report(ZERO_TOL, &grid)).expect("json");
                rec.insert(name.into(), groups);
            }
            if cfg.bool(general_ansatz, "general-ansatz") {
                let st = general_ansatz_structure(&b.coeffs)?;
                rec.insert(
                    "general_ansatz".into(),
                    json!({
                        "yy'": st.linear_yy.to_string(),
                        "y'^3": st.quadratic_cubic.to_string(),
                        "forces_point_form": st.forces_point_form(ZERO_TOL),
                    }),
                );
            }
            print!("{}", pretty(&Value::Object(rec)));
        }
        Command::Audit {
            branch,
            kappa,
            tol,
            format,
            out,
        } => {
            let config = AuditConfig {
                branch: cfg.branch(branch)?,
                kappa: cfg.complex(kappa, "kappa", Cx::new(0.0, -EPS.im))?,
                tol: cfg.opt_f64(tol, "tol")?,
                seed,
            };
            let format = match cfg.string(format, "format") {
                None => Format::Table,
                Some(s) => Format::from_str(&s)?,
            };
            let out = out.or_else(|| cfg.string(None, "out").map(PathBuf::from));
            let report = run_full_audit(&config);
            emit(&render_report(&report, format), out.as_ref(), quiet)?;
            if !report.gated_ok() {
                return Ok(ExitCode::from(1));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
