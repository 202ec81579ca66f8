//! Command-line front end.
//!
//! Documents are JSON. Complex numbers are `[re, im]` pairs.
//!
//! * signals: `{"K": k, "N": n, "signals": [[[re, im], ...], ...]}` with `K`
//!   rows of `N` samples.
//! * gamma: `{"K": k, "N": n, "entries": [...]}` with `K*K` row-major
//!   entries, each `2N-1` coefficients in ascending powers `z^0..z^{2N-2}`.
//!   The coefficient at power `p` is the correlation at lag `p - (N-1)`.
//! * polynomial: `{"coeffs": [[re, im], ...]}` (degree bound = length - 1).
//! * polynomial list: `{"polys": [[[re, im], ...], ...]}`.
//!
//! Roots are written as `[re, im]`, or the string `"inf"`.
//!
//! Exit codes: 0 ok, 2 malformed input, 3 mathematical inconsistency,
//! 4 combinatorial budget exceeded.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::autocorr::{correlate, palindromic_violation, residual, CorrMatrixPoly, SignalTuple};
use crate::error::Error;
use crate::factorize::{
    common_gcd_full, coprime_recover, enumerate_all, is_unique, pair_structure, FactorizeOptions,
};
use crate::gcd::{gcd_many, sylvester_coprime, GcdOptions};
use crate::oracle::{brute_force_factorizations, DEFAULT_BUDGET};
use crate::poly::BoundedPoly;
use crate::roots::{find_roots, ExtRoot, RootOptions};

pub const LAG_CONVENTION: &str = "coefficient at power p is the correlation at lag p-(N-1)";

#[derive(Debug, Parser)]
#[command(
    name = "paf",
    version,
    about = "Factorize auto-correlation matrix polynomials"
)]
pub struct Cli {
    #[command(flatten)]
    pub tolerances: Tolerances,

    /// Worker threads (defaults to the number of logical processors).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Write the output document here instead of stdout.
    #[arg(short, long, global = true)]
    pub output: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, Args)]
pub struct Tolerances {
    /// Root clustering and matching tolerance.
    #[arg(long, env = "PAF_TOL_ROOT", default_value_t = 1e-6, global = true)]
    pub tol_root: f64,
    /// Half-width of the band around the unit circle treated as on-circle.
    #[arg(long, env = "PAF_TOL_CIRCLE", default_value_t = 1e-6, global = true)]
    pub tol_circle: f64,
    /// Relative singular-value threshold for the Sylvester test.
    #[arg(long, env = "PAF_TOL_RANK", default_value_t = 1e-8, global = true)]
    pub tol_rank: f64,
    /// Relative residual accepted for divisions and reconstructions.
    #[arg(long, env = "PAF_TOL_RESIDUAL", default_value_t = 1e-8, global = true)]
    pub tol_residual: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            tol_root: 1e-6,
            tol_circle: 1e-6,
            tol_rank: 1e-8,
            tol_residual: 1e-8,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<(), CliError> {
        for (name, v) in [
            ("tol-root", self.tol_root),
            ("tol-circle", self.tol_circle),
            ("tol-rank", self.tol_rank),
            ("tol-residual", self.tol_residual),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(CliError::parse(format!(
                    "--{name} must be positive, got {v}"
                )));
            }
        }
        Ok(())
    }

    pub fn factorize_options(&self) -> FactorizeOptions {
        FactorizeOptions {
            gcd: GcdOptions {
                roots: RootOptions {
                    tol_cluster: self.tol_root,
                    ..RootOptions::default()
                },
                tol_match: self.tol_root,
            },
            tol_circle: self.tol_circle,
            tol_residual: self.tol_residual,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Signals document -> gamma document.
    Correlate { input: PathBuf },
    /// One canonical factorization of a gamma document.
    Factorize { input: PathBuf },
    /// Every factorization with its index and the root-pair structure.
    Enumerate { input: PathBuf },
    /// Number of distinct factorizations.
    Count { input: PathBuf },
    /// Whether the factorization is unique up to a global phase.
    CheckUnique { input: PathBuf },
    /// Root factorization of a polynomial document.
    Roots { input: PathBuf },
    /// GCD of a polynomial-list document.
    Gcd { input: PathBuf },
    /// Residual of signals (or every solution of an enumerate document)
    /// against a gamma document.
    Verify { gamma: PathBuf, signals: PathBuf },
    /// Brute-force cross-check of the enumeration.
    #[command(hide = true)]
    Oracle {
        input: PathBuf,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u128,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Parse,
    Math,
    Budget,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub kind: ErrorKind,
    pub message: String,
}

impl CliError {
    pub fn parse(message: impl Into<String>) -> Self {
        Self {
            kind: ErrorKind::Parse,
            message: message.into(),
        }
    }

    pub fn math(message: impl Into<String>) -> Self {
        Self {
            kind: ErrorKind::Math,
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self.kind {
            ErrorKind::Parse => 2,
            ErrorKind::Math => 3,
            ErrorKind::Budget => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let kind = match e {
            Error::BudgetExceeded { .. } => ErrorKind::Budget,
            _ => ErrorKind::Math,
        };
        Self {
            kind,
            message: e.to_string(),
        }
    }
}

type Pair = [f64; 2];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalsDoc {
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub signals: Vec<Vec<Pair>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaDoc {
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lag_convention: Option<String>,
    pub entries: Vec<Vec<Pair>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyDoc {
    pub coeffs: Vec<Pair>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolysDoc {
    pub polys: Vec<Vec<Pair>>,
}

#[derive(Debug, Clone, Deserialize)]
struct EnumerateSolutions {
    solutions: Vec<SolutionEntry>,
}

#[derive(Debug, Clone, Deserialize)]
struct SolutionEntry {
    #[serde(default)]
    index: Vec<usize>,
    signals: Vec<Vec<Pair>>,
}

fn to_c(p: &Pair) -> Complex64 {
    Complex64::new(p[0], p[1])
}

fn to_pair(c: &Complex64) -> Pair {
    [c.re, c.im]
}

fn pairs(cs: &[Complex64]) -> Vec<Pair> {
    cs.iter().map(to_pair).collect()
}

fn root_value(r: &ExtRoot) -> Value {
    match r {
        ExtRoot::Finite(z) => json!([z.re, z.im]),
        ExtRoot::Infinity => json!("inf"),
    }
}

fn check_finite(field: &str, v: &[Pair]) -> Result<(), CliError> {
    if let Some(i) = v
        .iter()
        .position(|p| !p[0].is_finite() || !p[1].is_finite())
    {
        return Err(CliError::parse(format!(
            "{field}[{i}]: value is not finite"
        )));
    }
    Ok(())
}

impl SignalsDoc {
    pub fn from_signals(x: &SignalTuple) -> Self {
        Self {
            k: x.k(),
            n: x.n(),
            signals: x.channels().iter().map(|c| pairs(c)).collect(),
        }
    }

    pub fn to_signals(&self) -> Result<SignalTuple, CliError> {
        signals_from_rows(self.k, self.n, &self.signals, "signals")
    }
}

fn signals_from_rows(
    k: usize,
    n: usize,
    rows: &[Vec<Pair>],
    field: &str,
) -> Result<SignalTuple, CliError> {
    if k == 0 || n == 0 {
        return Err(CliError::parse("K and N must be positive"));
    }
    if rows.len() != k {
        return Err(CliError::parse(format!(
            "{field}: expected K={k} channels, got {}",
            rows.len()
        )));
    }
    let mut channels = Vec::with_capacity(k);
    for (i, row) in rows.iter().enumerate() {
        let name = format!("{field}[{i}]");
        if row.len() != n {
            return Err(CliError::parse(format!(
                "{name}: expected N={n} samples, got {}",
                row.len()
            )));
        }
        check_finite(&name, row)?;
        channels.push(row.iter().map(to_c).collect());
    }
    SignalTuple::new(channels).map_err(|e| CliError::parse(e.to_string()))
}

impl GammaDoc {
    pub fn from_gamma(g: &CorrMatrixPoly) -> Self {
        Self {
            k: g.k(),
            n: g.n(),
            lag_convention: Some(LAG_CONVENTION.to_string()),
            entries: g.entries().iter().map(|e| pairs(e.coeffs())).collect(),
        }
    }

    pub fn to_gamma(&self) -> Result<CorrMatrixPoly, CliError> {
        if self.k == 0 || self.n == 0 {
            return Err(CliError::parse("K and N must be positive"));
        }
        if self.entries.len() != self.k * self.k {
            return Err(CliError::parse(format!(
                "entries: expected K*K={} arrays, got {}",
                self.k * self.k,
                self.entries.len()
            )));
        }
        let len = 2 * self.n - 1;
        let mut polys = Vec::with_capacity(self.entries.len());
        for (i, e) in self.entries.iter().enumerate() {
            let name = format!("entries[{i}]");
            if e.len() != len {
                return Err(CliError::parse(format!(
                    "{name}: expected 2N-1={len} coefficients, got {}",
                    e.len()
                )));
            }
            check_finite(&name, e)?;
            polys.push(
                BoundedPoly::new(e.iter().map(to_c).collect())
                    .map_err(|e| CliError::parse(e.to_string()))?,
            );
        }
        CorrMatrixPoly::new(self.k, self.n, polys).map_err(|e| CliError::parse(e.to_string()))
    }
}

fn poly_from_pairs(field: &str, v: &[Pair]) -> Result<BoundedPoly, CliError> {
    if v.is_empty() {
        return Err(CliError::parse(format!(
            "{field}: polynomial needs at least one coefficient"
        )));
    }
    check_finite(field, v)?;
    BoundedPoly::new(v.iter().map(to_c).collect()).map_err(|e| CliError::parse(e.to_string()))
}

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path)
        .map_err(|e| CliError::parse(format!("{}: cannot read: {e}", path.display())))
}

fn parse_doc<T: for<'de> Deserialize<'de>>(path: &Path, text: &str) -> Result<T, CliError> {
    serde_json::from_str(text).map_err(|e| {
        CliError::parse(format!(
            "{}: line {} column {}: {e}",
            path.display(),
            e.line(),
            e.column()
        ))
    })
}

fn read_doc<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    parse_doc(path, &read_text(path)?)
}

fn read_gamma(path: &Path) -> Result<CorrMatrixPoly, CliError> {
    read_doc::<GammaDoc>(path)?.to_gamma()
}

fn validated_gamma(path: &Path, tol: &Tolerances) -> Result<CorrMatrixPoly, CliError> {
    let g = read_gamma(path)?;
    if let Some(why) = palindromic_violation(&g, tol.tol_residual) {
        return Err(Error::NotPalindromic(why).into());
    }
    Ok(g)
}

fn pair_structure_json(s: &crate::factorize::RootPairStructure) -> Value {
    json!({
        "pairs": s.offcircle_pairs.iter().map(|p| json!({
            "outer": root_value(&p.outer),
            "inner": root_value(&p.inner),
            "multiplicity": p.multiplicity,
        })).collect::<Vec<_>>(),
        "circle": s.circle_roots.iter().map(|(e, nu)| json!({
            "root": [e.re, e.im],
            "multiplicity": nu,
        })).collect::<Vec<_>>(),
    })
}

/// Runs one command and returns the output document.
pub fn run(command: &Command, tol: &Tolerances) -> Result<Value, CliError> {
    tol.validate()?;
    let opts = tol.factorize_options();
    match command {
        Command::Correlate { input } => {
            let x = read_doc::<SignalsDoc>(input)?.to_signals()?;
            Ok(serde_json::to_value(GammaDoc::from_gamma(&correlate(&x))).expect("serializable"))
        }
        Command::Factorize { input } => {
            let g = validated_gamma(input, tol)?;
            let coprime = common_gcd_full(&g, &opts)?.gcd.degree_bound() == 0;
            let (method, index, count, y) = if coprime && !g.is_zero() {
                let j = (0..g.k())
                    .max_by(|&a, &b| g.center(a, a).re.total_cmp(&g.center(b, b).re))
                    .unwrap_or(0);
                (
                    "coprime",
                    Vec::new(),
                    1u128,
                    coprime_recover(&g, j, &opts)?.canonicalize(),
                )
            } else {
                let set = enumerate_all(&g, &opts)?;
                let first = set
                    .indices()
                    .next()
                    .expect("index iterator yields at least one index");
                let sol = set.solution(&first)?;
                ("enumerated", sol.index, set.base_count, sol.signals)
            };
            let res = residual(&g, &y)?;
            let doc = SignalsDoc::from_signals(&y);
            Ok(json!({
                "K": doc.k,
                "N": doc.n,
                "method": method,
                "index": index,
                "count": u64::try_from(count).unwrap_or(u64::MAX),
                "residual": res,
                "signals": doc.signals,
            }))
        }
        Command::Enumerate { input } => {
            let g = validated_gamma(input, tol)?;
            let set = enumerate_all(&g, &opts)?;
            let sols = set.materialize()?;
            let mut doc = pair_structure_json(&set.pairs);
            let obj = doc.as_object_mut().expect("object");
            obj.insert("K".into(), json!(g.k()));
            obj.insert("N".into(), json!(g.n()));
            obj.insert("count".into(), json!(sols.len()));
            obj.insert("h".into(), json!(pairs(set.h.coeffs())));
            obj.insert(
                "quotients".into(),
                json!(set
                    .quotients
                    .iter()
                    .map(|q| pairs(q.coeffs()))
                    .collect::<Vec<_>>()),
            );
            obj.insert(
                "solutions".into(),
                json!(sols
                    .iter()
                    .map(|s| json!({
                        "index": s.index,
                        "residual": s.residual,
                        "spectral_factor": pairs(s.spectral_factor.coeffs()),
                        "signals": SignalsDoc::from_signals(&s.signals).signals,
                    }))
                    .collect::<Vec<_>>()),
            );
            Ok(doc)
        }
        Command::Count { input } => {
            let g = validated_gamma(input, tol)?;
            let s = pair_structure(&g, &opts)?;
            Ok(json!({
                "count": u64::try_from(s.count()).unwrap_or(u64::MAX),
                "multiplicities": s.multiplicities(),
            }))
        }
        Command::CheckUnique { input } => {
            let g = validated_gamma(input, tol)?;
            let unique = is_unique(&g, &opts)?;
            let h = common_gcd_full(&g, &opts)?;
            let roots: Vec<Value> = h
                .factorization
                .map(|f| {
                    f.roots
                        .iter()
                        .map(|(r, m)| {
                            let on = r
                                .finite()
                                .is_some_and(|z| (z.norm() - 1.0).abs() < opts.tol_circle);
                            json!({"root": root_value(r), "multiplicity": m, "on_circle": on})
                        })
                        .collect()
                })
                .unwrap_or_default();
            Ok(json!({"unique": unique, "h": pairs(h.gcd.coeffs()), "roots": roots}))
        }
        Command::Roots { input } => {
            let doc: PolyDoc = read_doc(input)?;
            let p = poly_from_pairs("coeffs", &doc.coeffs)?;
            let f = find_roots(&p, &opts.gcd.roots)?;
            Ok(json!({
                "degree_bound": f.degree_bound,
                "leading": to_pair(&f.leading),
                "roots": f.roots.iter().map(|(r, m)| json!({
                    "root": root_value(r),
                    "multiplicity": m,
                })).collect::<Vec<_>>(),
            }))
        }
        Command::Gcd { input } => {
            let doc: PolysDoc = read_doc(input)?;
            let polys = doc
                .polys
                .iter()
                .enumerate()
                .map(|(i, p)| poly_from_pairs(&format!("polys[{i}]"), p))
                .collect::<Result<Vec<_>, _>>()?;
            let r = gcd_many(&polys, &opts.gcd)?;
            let mut out = json!({
                "gcd": pairs(r.gcd.coeffs()),
                "degree_bound": r.gcd.degree_bound(),
                "cofactors": r.cofactors.iter().map(|c| pairs(c.coeffs())).collect::<Vec<_>>(),
                "residual": r.residual,
            });
            if let [a, b] = polys.as_slice() {
                if a.degree_bound() == b.degree_bound() {
                    out["sylvester_coprime"] = json!(sylvester_coprime(a, b, tol.tol_rank)?);
                }
            }
            Ok(out)
        }
        Command::Verify { gamma, signals } => {
            let g = read_gamma(gamma)?;
            let text = read_text(signals)?;
            let value: Value = parse_doc(signals, &text)?;
            let candidates: Vec<(Vec<usize>, SignalTuple)> = if value.get("solutions").is_some() {
                let doc: EnumerateSolutions = parse_doc(signals, &text)?;
                doc.solutions
                    .iter()
                    .enumerate()
                    .map(|(i, s)| {
                        signals_from_rows(
                            g.k(),
                            g.n(),
                            &s.signals,
                            &format!("solutions[{i}].signals"),
                        )
                        .map(|x| (s.index.clone(), x))
                    })
                    .collect::<Result<_, _>>()?
            } else {
                let doc: SignalsDoc = parse_doc(signals, &text)?;
                vec![(Vec::new(), doc.to_signals()?)]
            };
            let mut results = Vec::with_capacity(candidates.len());
            let mut worst: f64 = 0.0;
            for (index, x) in &candidates {
                let r = residual(&g, x)?;
                worst = worst.max(r);
                results.push(json!({"index": index, "residual": r}));
            }
            let ok = worst < tol.tol_residual;
            let doc = json!({
                "ok": ok,
                "residual": worst,
                "tolerance": tol.tol_residual,
                "checked": results,
            });
            if ok {
                Ok(doc)
            } else {
                Err(CliError::math(format!(
                    "residual {worst:e} exceeds tolerance {:e}: {doc}",
                    tol.tol_residual
                )))
            }
        }
        Command::Oracle { input, budget } => {
            let g = validated_gamma(input, tol)?;
            let rep = brute_force_factorizations(&g, tol.tol_residual, *budget)?;
            Ok(json!({
                "candidate_count": rep.candidate_count.to_string(),
                "count": rep.accepted.len(),
                "max_residual": rep.max_residual,
                "solutions": rep.accepted.iter().map(|s| json!({
                    "signals": SignalsDoc::from_signals(s).signals,
                })).collect::<Vec<_>>(),
            }))
        }
    }
}

/// Runs the parsed command line and writes the document.
pub fn execute(cli: &Cli) -> Result<(), CliError> {
    let doc = run(&cli.command, &cli.tolerances)?;
    let text = serde_json::to_string_pretty(&doc).expect("serializable");
    match &cli.output {
        Some(path) => fs::write(path, text + "\n")
            .map_err(|e| CliError::parse(format!("{}: cannot write: {e}", path.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            writeln!(out, "{text}").map_err(|e| CliError::parse(format!("stdout: {e}")))
        }
    }
}
