mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use num_bigint::BigInt;
use serde::Serialize;
use serde_json::json;

use sharpext::bessel::{bessel_j, j1_zeros};
use sharpext::certifier::{certify_lemma31, CertReport};
use sharpext::extension::{
    extension_norm_sixth, proof_chain_audit, verify_mixed_inequality, verify_sharp_inequality,
    InequalityVerdict, NormReport, SpectrumFunction, Theorem,
};
use sharpext::quadrature::{direct_i6, quad_i3, quad_i6, IntegralSpec};
use sharpext::sets::{check_ph, enumerate_ph, generate, greedy_terms, Generator, IntegerSet, PhCheck};
use sharpext::{Config, Error, OutputFormat};

const EXIT_FAIL: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_UNDECIDED: u8 = 3;

#[derive(Parser)]
#[command(name = "sharpext", version, about = "Certification toolkit for sharp circle extension inequalities")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// JSON configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// json, csv or text.
    #[arg(long, global = true)]
    format: Option<OutputFormat>,
}

#[derive(Args, Clone, Default)]
struct QuadOpts {
    /// Quadrature truncation N.
    #[arg(long = "n")]
    truncation: Option<usize>,
    /// Tail target for the truncated sums.
    #[arg(long)]
    budget: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// P(h)-sets: checks, enumeration, constructions.
    #[command(subcommand)]
    Sets(SetsCmd),
    /// Bessel functions and zeros of J_1.
    #[command(subcommand)]
    Bessel(BesselCmd),
    /// Sextuple Bessel integrals.
    #[command(subcommand)]
    Quad(QuadCmd),
    /// Integral inequality certification.
    #[command(subcommand)]
    Certify(CertifyCmd),
    /// Extension norms of finite-spectrum functions.
    #[command(subcommand)]
    Extension(ExtensionCmd),
}

#[derive(Subcommand)]
enum SetsCmd {
    /// Check property P(h) for a finite set or a windowed family.
    Check {
        #[arg(long)]
        h: u32,
        /// JSON array, e.g. "[-1,1,2]".
        #[arg(long, conflicts_with = "kind")]
        set: Option<String>,
        #[command(flatten)]
        family: FamilyArgs,
    },
    /// All P(h)-subsets of [lo, hi].
    Enumerate {
        #[arg(long, allow_hyphen_values = true)]
        lo: i64,
        #[arg(long, allow_hyphen_values = true)]
        hi: i64,
        #[arg(long)]
        h: u32,
    },
    /// Greedy symmetric P(h)-set.
    Greedy {
        #[arg(long)]
        h: u32,
        #[arg(long)]
        count: usize,
    },
    /// Elements of a family inside a window.
    Generate {
        #[command(flatten)]
        family: FamilyArgs,
        /// Also check P(h).
        #[arg(long)]
        h: Option<u32>,
    },
}

#[derive(Args)]
struct FamilyArgs {
    /// lacunary, powers or rudin.
    #[arg(long)]
    kind: Option<String>,
    #[arg(long)]
    q: Option<u64>,
    /// Explicit lacunary terms, comma separated.
    #[arg(long)]
    terms: Option<String>,
    /// h parameter of the rudin family.
    #[arg(long = "rudin-h")]
    rudin_h: Option<u32>,
    #[arg(long)]
    levels: Option<u32>,
    /// Largest |element| kept, e.g. 1e6.
    #[arg(long)]
    window: Option<String>,
}

#[derive(Subcommand)]
enum BesselCmd {
    /// J_n(x) with an error estimate.
    Eval {
        #[arg(long = "n", allow_hyphen_values = true)]
        order: i64,
        #[arg(long)]
        x: f64,
    },
    /// Zeros of J_1 written in the cache format.
    Zeros {
        #[arg(long)]
        count: usize,
    },
}

#[derive(Subcommand)]
enum QuadCmd {
    /// 𝓘(k, m, l) by the truncated sum.
    I3 {
        #[arg(long)]
        orders: String,
        #[command(flatten)]
        opts: QuadOpts,
    },
    /// I(n_1, ..., n_6) by the truncated sum.
    I6 {
        #[arg(long, allow_hyphen_values = true)]
        orders: String,
        #[command(flatten)]
        opts: QuadOpts,
    },
    /// I(n_1, ..., n_6) by direct adaptive integration.
    Oracle {
        #[arg(long, allow_hyphen_values = true)]
        orders: String,
        #[arg(long = "R", default_value_t = 5000.0)]
        r_max: f64,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
}

#[derive(Subcommand)]
enum CertifyCmd {
    /// The five integral inequality families.
    Lemma31 {
        /// Full report with every case.
        #[arg(long)]
        json: Option<PathBuf>,
        #[command(flatten)]
        opts: QuadOpts,
    },
}

#[derive(Subcommand)]
enum ExtensionCmd {
    /// ‖f̂σ‖_6^6 and its ratio to ‖f‖_2^6.
    Norm {
        /// Coefficients as JSON, `{"n": [re, im], ...}`.
        #[arg(long)]
        spec: PathBuf,
        /// Shift every index by this integer first.
        #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
        shift: i64,
        #[command(flatten)]
        opts: QuadOpts,
    },
    /// Check the sharp inequality.
    Verify {
        /// Coefficients as JSON, `{"n": [re, im], ...}`.
        #[arg(long)]
        spec: PathBuf,
        /// l6, or mixed for the L6 radial / L4 angular norm.
        #[arg(long, default_value = "l6")]
        theorem: Theorem,
        /// Shift every index by this integer first.
        #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
        shift: i64,
        #[command(flatten)]
        opts: QuadOpts,
    },
    /// Audit the chain of bounds for a P(3) spectrum.
    Audit {
        /// Coefficients as JSON, `{"n": [re, im], ...}`.
        #[arg(long)]
        spec: PathBuf,
        /// Shift every index by this integer first.
        #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
        shift: i64,
        #[command(flatten)]
        opts: QuadOpts,
    },
}

struct Outcome {
    text: String,
    code: u8,
    /// Ignore --out (it already named a data file).
    stdout_only: bool,
}

fn parse_bigint(s: &str) -> anyhow::Result<BigInt> {
    let t = s.trim();
    if let Some((m, e)) = t.split_once(['e', 'E']) {
        let m: BigInt = m.parse()?;
        let e: u32 = e.parse()?;
        return Ok(m * BigInt::from(10u32).pow(e));
    }
    Ok(t.parse()?)
}

fn family(args: &FamilyArgs) -> anyhow::Result<Option<Generator>> {
    let Some(kind) = args.kind.as_deref() else {
        return Ok(None);
    };
    let need_q = || args.q.ok_or_else(|| anyhow::anyhow!("--q is required for --kind {kind}"));
    let g = match kind {
        "powers" => Generator::Powers { q: need_q()? },
        "lacunary" => Generator::Lacunary {
            q: need_q()?,
            terms: args
                .terms
                .as_deref()
                .map(|t| t.split(',').map(parse_bigint).collect::<anyhow::Result<Vec<_>>>())
                .transpose()?,
        },
        "rudin" => Generator::Rudin {
            h: args.rudin_h.ok_or_else(|| anyhow::anyhow!("--rudin-h is required"))?,
            levels: args.levels.ok_or_else(|| anyhow::anyhow!("--levels is required"))?,
        },
        other => anyhow::bail!("unknown family {other:?}; expected lacunary, powers or rudin"),
    };
    Ok(Some(g))
}

fn window(args: &FamilyArgs) -> anyhow::Result<Option<BigInt>> {
    args.window.as_deref().map(parse_bigint).transpose()
}

fn config(g: &Global, opts: &QuadOpts) -> anyhow::Result<Config> {
    let mut cfg = match &g.config {
        Some(p) => Config::from_json_file(p)?,
        None => Config::default(),
    };
    if let Some(n) = opts.truncation {
        cfg.truncation_n = n;
    }
    if let Some(b) = opts.budget {
        cfg.tail_target = b;
    }
    if let Some(f) = g.format {
        cfg.output_format = f;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn report<T: Serialize>(v: &T, cfg: &Config, summary: String, code: u8) -> anyhow::Result<Outcome> {
    Ok(Outcome {
        text: output::render(v, cfg.output_format, Some(summary))?,
        code,
        stdout_only: false,
    })
}

fn ph_outcome(set: &IntegerSet, h: u32, check: PhCheck, cfg: &Config) -> anyhow::Result<Outcome> {
    let (summary, code) = match &check {
        PhCheck::Holds => (format!("{set} is P({h})"), 0),
        PhCheck::Violated(w) => (format!("not P({h}): {w}"), EXIT_FAIL),
    };
    let v = json!({"h": h, "size": set.len(), "result": check});
    report(&v, cfg, summary, code)
}

fn run_sets(cmd: &SetsCmd, cfg: &Config) -> anyhow::Result<Outcome> {
    match cmd {
        SetsCmd::Check { h, set, family: fam } => {
            let set = match (set, family(fam)?) {
                (Some(s), _) => IntegerSet::from_str(s)?,
                (None, Some(g)) => generate(&g, window(fam)?.as_ref())?,
                (None, None) => anyhow::bail!("give --set or --kind"),
            };
            let check = check_ph(&set, *h)?;
            ph_outcome(&set, *h, check, cfg)
        }
        SetsCmd::Enumerate { lo, hi, h } => {
            let sets = enumerate_ph(*lo, *hi, *h)?;
            let summary = sets.iter().map(|s| s.to_string()).collect::<Vec<_>>().join("\n");
            let v = json!({"lo": lo, "hi": hi, "h": h, "count": sets.len(), "sets": sets});
            report(&v, cfg, format!("{} sets\n{summary}", sets.len()), 0)
        }
        SetsCmd::Greedy { h, count } => {
            let terms = greedy_terms(*h, *count)?;
            let strs: Vec<String> = terms.iter().map(|t| t.to_string()).collect();
            let v = json!({"h": h, "count": count, "terms": strs});
            report(&v, cfg, strs.join(" "), 0)
        }
        SetsCmd::Generate { family: fam, h } => {
            let g = family(fam)?.ok_or_else(|| anyhow::anyhow!("--kind is required"))?;
            let set = generate(&g, window(fam)?.as_ref())?;
            let mut v = json!({"generator": g, "size": set.len(), "set": set});
            let mut summary = set.to_string();
            let mut code = 0;
            if let Some(h) = h {
                let check = check_ph(&set, *h)?;
                v["validFor"] = json!(g.valid_for(*h));
                if let PhCheck::Violated(w) = &check {
                    summary.push_str(&format!("\nnot P({h}): {w}"));
                    code = EXIT_FAIL;
                } else {
                    summary.push_str(&format!("\nP({h}) holds"));
                }
                v["check"] = json!(check);
            }
            report(&v, cfg, summary, code)
        }
    }
}

fn run_bessel(cmd: &BesselCmd, cfg: &Config, out: Option<&Path>) -> anyhow::Result<Outcome> {
    match cmd {
        BesselCmd::Eval { order, x } => {
            let v = bessel_j(*order, *x)?;
            let s = format!("J_{order}({x}) = {:.16e} (error <= {:.3e})", v.value, v.abs_error_estimate);
            report(&v, cfg, s, 0)
        }
        BesselCmd::Zeros { count } => {
            let t = j1_zeros(*count)?;
            if let Some(p) = out {
                t.save(p)?;
                let v = json!({"count": t.count(), "path": p, "last": t.zeros.last()});
                return Ok(Outcome {
                    text: output::render(&v, cfg.output_format, None)?,
                    code: 0,
                    stdout_only: true,
                });
            }
            let v = json!({"count": t.count(), "zeros": t.zeros});
            report(&v, cfg, t.zeros.iter().map(|z| format!("{z:.16e}")).collect::<Vec<_>>().join("\n"), 0)
        }
    }
}

fn parse_triple(s: &str) -> anyhow::Result<[u64; 3]> {
    let v: Vec<u64> = s
        .split(',')
        .map(|p| p.trim().parse::<u64>())
        .collect::<Result<_, _>>()?;
    let arr: [u64; 3] = v
        .try_into()
        .map_err(|_| anyhow::anyhow!("expected three nonnegative orders, got {s:?}"))?;
    Ok(arr)
}

fn run_quad(cmd: &QuadCmd, cfg: &Config) -> anyhow::Result<Outcome> {
    let (enc, label) = match cmd {
        QuadCmd::I3 { orders, .. } => {
            let [k, m, l] = parse_triple(orders)?;
            (quad_i3(k, m, l, cfg)?, format!("I({k},{m},{l})"))
        }
        QuadCmd::I6 { orders, .. } => {
            let spec = IntegralSpec::from_str(orders)?;
            (quad_i6(&spec, cfg)?, format!("I{spec}"))
        }
        QuadCmd::Oracle { orders, r_max, tol } => {
            let spec = IntegralSpec::from_str(orders)?;
            (direct_i6(&spec, *r_max, *tol)?, format!("I{spec} (direct)"))
        }
    };
    let s = format!("{label} = {:.16e} in [{:.16e}, {:.16e}]", enc.value, enc.lower, enc.upper);
    report(&enc, cfg, s, 0)
}

fn cert_summary(r: &CertReport) -> String {
    let mut s = format!(
        "N = {}, tail <= {:.3e}\nI(0,0,0) in [{:.10}, {:.10}]\nI(0,0,0) - 5 I(0,0,1) = {:.3e} (enclosures overlap: {})\n",
        r.truncation_n,
        r.tail_bound,
        r.reference.lower,
        r.reference.upper,
        r.identity.difference,
        r.identity.overlap
    );
    for it in &r.items {
        let (a, b) = it.target_fraction;
        s.push_str(&format!(
            "({}) target {a}/{b}: threshold {}, {} numeric cases, max {}, {}\n",
            it.item,
            it.analytic.threshold,
            it.numeric_cases.len(),
            it.numeric_max
                .as_ref()
                .map(|c| format!("{:?} = {:.6}", c.orders, c.value))
                .unwrap_or_else(|| "-".into()),
            if it.pass { "pass" } else { "FAIL" }
        ));
        for e in &it.exceptions {
            s.push_str(&format!(
                "    exception {:?}: {}/{} bound holds: {}, own target fails: {}\n",
                e.orders, e.fraction.0, e.fraction.1, e.weaker_bound_holds, e.main_target_fails
            ));
        }
    }
    s.push_str(if r.pass { "certified\n" } else { "NOT certified\n" });
    s
}

fn run_certify(cmd: &CertifyCmd, cfg: &Config) -> anyhow::Result<Outcome> {
    let CertifyCmd::Lemma31 { json: full, .. } = cmd;
    let r = certify_lemma31(cfg)?;
    if let Some(p) = full {
        std::fs::write(p, output::to_json(&r)?)?;
    }
    let summary = json!({
        "pass": r.pass,
        "truncationN": r.truncation_n,
        "tailBound": r.tail_bound,
        "reference": r.reference,
        "identity": r.identity,
        "bn": r.bn,
        "thresholds": r.thresholds(),
        "items": r.items.iter().map(|it| json!({
            "item": it.item,
            "targetFraction": it.target_fraction,
            "threshold": it.analytic.threshold,
            "numericCases": it.numeric_cases.len(),
            "numericMax": it.numeric_max,
            "exceptions": it.exceptions,
            "coverageComplete": it.coverage_complete,
            "pass": it.pass,
        })).collect::<Vec<_>>(),
    });
    report(&summary, cfg, cert_summary(&r), if r.pass { 0 } else { EXIT_FAIL })
}

fn norm_summary(r: &NormReport) -> String {
    let mut s = format!(
        "ratio = {:.12} in [{:.12}, {:.12}]\nconstant = {:.12}\nslack = {:.6e}\nP({}) spectrum: {}\n",
        r.ratio, r.ratio_lower, r.ratio_upper, r.c_opt, r.slack, r.ph_h, r.spectrum_is_ph
    );
    if let Some(w) = &r.ph_witness {
        s.push_str(&format!("witness: {w}\n"));
    }
    if let Some(v) = r.verdict {
        s.push_str(&format!("verdict: {v}\n"));
    }
    s
}

fn load_spec(path: &Path, shift: i64) -> anyhow::Result<SpectrumFunction> {
    let f = SpectrumFunction::from_json_file(path)?;
    Ok(if shift != 0 { f.shifted(shift)? } else { f })
}

fn run_extension(cmd: &ExtensionCmd, cfg: &Config) -> anyhow::Result<Outcome> {
    match cmd {
        ExtensionCmd::Norm { spec, shift, .. } => {
            let r = extension_norm_sixth(&load_spec(spec, *shift)?, cfg)?;
            report(&r, cfg, norm_summary(&r), 0)
        }
        ExtensionCmd::Verify { spec, theorem, shift, .. } => {
            let f = load_spec(spec, *shift)?;
            let r = match theorem {
                Theorem::L6 => verify_sharp_inequality(&f, cfg)?,
                Theorem::Mixed => verify_mixed_inequality(&f, cfg)?,
            };
            let code = match r.verdict {
                Some(InequalityVerdict::Equality | InequalityVerdict::Strict) => 0,
                Some(InequalityVerdict::Undecided) => EXIT_UNDECIDED,
                _ => EXIT_FAIL,
            };
            report(&r, cfg, norm_summary(&r), code)
        }
        ExtensionCmd::Audit { spec, shift, .. } => {
            let a = proof_chain_audit(&load_spec(spec, *shift)?, cfg)?;
            let mut s = String::new();
            for st in &a.stages {
                s.push_str(&format!("{:<12} {:.16e}\n", st.stage, st.value));
            }
            s.push_str(&format!(
                "nondecreasing: {}, unique part matches: {}, monomials checked: {}\n{}\n",
                a.nondecreasing,
                a.unique_matches,
                a.monomials.len(),
                if a.pass { "pass" } else { "FAIL" }
            ));
            report(&a, cfg, s, if a.pass { 0 } else { EXIT_FAIL })
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<Error>() {
        Some(Error::Undecidable { .. } | Error::TailExceedsTarget { .. } | Error::ToleranceNotReached { .. }) => {
            EXIT_UNDECIDED
        }
        Some(Error::NotPh { .. }) => EXIT_FAIL,
        _ => EXIT_USAGE,
    }
}

fn run(cli: &Cli) -> anyhow::Result<Outcome> {
    if let Some(t) = cli.global.threads {
        rayon::ThreadPoolBuilder::new().num_threads(t.max(1)).build_global()?;
    }
    let opts = match &cli.command {
        Command::Quad(QuadCmd::I3 { opts, .. } | QuadCmd::I6 { opts, .. })
        | Command::Certify(CertifyCmd::Lemma31 { opts, .. })
        | Command::Extension(
            ExtensionCmd::Norm { opts, .. } | ExtensionCmd::Verify { opts, .. } | ExtensionCmd::Audit { opts, .. },
        ) => opts.clone(),
        _ => QuadOpts::default(),
    };
    let cfg = config(&cli.global, &opts)?;
    match &cli.command {
        Command::Sets(c) => run_sets(c, &cfg),
        Command::Bessel(c) => run_bessel(c, &cfg, cli.global.out.as_deref()),
        Command::Quad(c) => run_quad(c, &cfg),
        Command::Certify(c) => run_certify(c, &cfg),
        Command::Extension(c) => run_extension(c, &cfg),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    match run(&cli) {
        Ok(o) => {
            let out = if o.stdout_only { None } else { cli.global.out.as_deref() };
            if let Err(e) = output::emit(&o.text, out) {
                eprintln!("error: {e:#}");
                return ExitCode::from(EXIT_USAGE);
            }
            ExitCode::from(o.code)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
