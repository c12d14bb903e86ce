//! Batch runs driven by a JSON configuration: each command writes its CSV
//! and JSON artifacts plus `meta.json` into an output directory.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::characteristic::{fmt_f64, write_samples_csv, CharacteristicSample, Evaluator, PipelineConfig};
use crate::convergence::convergence_report;
use crate::error::{Error, Result};
use crate::oracles::oracle_characteristic;
use crate::potentials::{load_csv, make_builtin, width, Builtin, Domain, PotentialSpec};
use crate::spectra::{
    count_zeros_rectangle, find_eigenvalues, growth_order_estimate, write_eigenvalues_csv, Rectangle,
    SpectraConfig,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Eval,
    Eigs,
    Count,
    OracleCompare,
    Width,
    Order,
    Convergence,
}

impl Command {
    pub const ALL: [Command; 7] = [
        Command::Eval,
        Command::Eigs,
        Command::Count,
        Command::OracleCompare,
        Command::Width,
        Command::Order,
        Command::Convergence,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Eval => "eval",
            Command::Eigs => "eigs",
            Command::Count => "count",
            Command::OracleCompare => "oracle-compare",
            Command::Width => "width",
            Command::Order => "order",
            Command::Convergence => "convergence",
        }
    }

    pub fn parse(s: &str) -> Result<Command> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown command `{s}`")))
    }
}

/// Either a builtin (with `kappa` for `truncated_morse`) or a CSV table with
/// columns `x,V,dV` on a half line (`wall` given) or the whole line.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialConfig {
    pub builtin: Option<Builtin>,
    pub kappa: Option<f64>,
    pub csv: Option<PathBuf>,
    pub wall: Option<f64>,
}

impl PotentialConfig {
    pub fn build(&self) -> Result<PotentialSpec> {
        match (&self.builtin, &self.csv) {
            (Some(b), None) => {
                if self.wall.is_some() {
                    return Err(Error::Config("`wall` only applies to CSV potentials".into()));
                }
                make_builtin(*b, self.kappa)
            }
            (None, Some(path)) => {
                if self.kappa.is_some() {
                    return Err(Error::Config("`kappa` only applies to truncated_morse".into()));
                }
                let domain = match self.wall {
                    Some(a) => Domain::HalfLineHardWall(a),
                    None => Domain::WholeLine,
                };
                let p = load_csv(path, domain)?;
                p.validate()?;
                Ok(p)
            }
            _ => Err(Error::Config("potential needs exactly one of `builtin` or `csv`".into())),
        }
    }
}

/// Energies on a (possibly one-row) rectangular lattice.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub re_min: f64,
    pub re_max: f64,
    pub n: usize,
    #[serde(default)]
    pub im_min: f64,
    #[serde(default)]
    pub im_max: f64,
    #[serde(default = "one")]
    pub n_im: usize,
}

fn one() -> usize {
    1
}

impl Grid {
    fn validate(&self) -> Result<()> {
        let finite = [self.re_min, self.re_max, self.im_min, self.im_max].iter().all(|v| v.is_finite());
        if !finite || self.n == 0 || self.n_im == 0 || self.re_min > self.re_max || self.im_min > self.im_max {
            return Err(Error::Config(format!("energy grid is empty or not finite: {self:?}")));
        }
        if (self.n > 1 && self.re_min == self.re_max) || (self.n_im > 1 && self.im_min == self.im_max) {
            return Err(Error::Config("grid with several points needs a nonzero range".into()));
        }
        Ok(())
    }

    pub fn energies(&self) -> Vec<Complex64> {
        let at = |lo: f64, hi: f64, i: usize, n: usize| {
            if n == 1 {
                lo
            } else {
                lo + (hi - lo) * i as f64 / (n - 1) as f64
            }
        };
        (0..self.n_im)
            .flat_map(|j| {
                (0..self.n).map(move |i| {
                    Complex64::new(at(self.re_min, self.re_max, i, self.n), at(self.im_min, self.im_max, j, self.n_im))
                })
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EigsConfig {
    pub e_min: f64,
    pub e_max: f64,
    pub n: usize,
    /// Half height of the certifying rectangle; `None` skips the contour count.
    pub half_height: Option<f64>,
}

impl Default for EigsConfig {
    fn default() -> Self {
        EigsConfig {
            e_min: 0.0,
            e_max: 200.0,
            n: 400,
            half_height: Some(5.0),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleConfig {
    /// Energy whose value divides every ratio.
    pub reference_energy: f64,
    pub tol: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            reference_energy: -1.0,
            tol: 1e-6,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WidthConfig {
    pub v_min: f64,
    pub v_max: f64,
    /// Logarithmically spaced levels.
    pub n: usize,
}

impl Default for WidthConfig {
    fn default() -> Self {
        WidthConfig {
            v_min: 1e3,
            v_max: 1e9,
            n: 25,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OrderConfig {
    pub r: Vec<f64>,
}

impl Default for OrderConfig {
    fn default() -> Self {
        OrderConfig {
            r: vec![1e2, 1e3, 1e4, 1e5, 1e6],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConvergenceConfig {
    pub indices: Vec<usize>,
    /// Naive cutoffs measured from each eigenvalue's turning point.
    pub offsets: Vec<f64>,
    pub e_min: f64,
    pub e_max: f64,
    pub n: usize,
    pub extension: f64,
}

impl Default for ConvergenceConfig {
    fn default() -> Self {
        ConvergenceConfig {
            indices: vec![1],
            offsets: vec![0.2, 0.4, 0.6, 0.8, 1.0],
            e_min: 0.0,
            e_max: 200.0,
            n: 100,
            extension: 2.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub potential: PotentialConfig,
    #[serde(default)]
    pub command: Option<Command>,
    /// Constant added to V internally; requested and reported energies are
    /// unaffected.
    #[serde(default)]
    pub shift: f64,
    #[serde(default)]
    pub grid: Option<Grid>,
    #[serde(default)]
    pub rect: Option<Rectangle>,
    #[serde(default)]
    pub eigs: EigsConfig,
    #[serde(default)]
    pub oracle: OracleConfig,
    #[serde(default)]
    pub width: WidthConfig,
    #[serde(default)]
    pub order: OrderConfig,
    #[serde(default)]
    pub convergence: ConvergenceConfig,
    #[serde(default)]
    pub pipeline: PipelineConfig,
    #[serde(default)]
    pub spectra: SpectraConfig,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub threads: Option<usize>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<RunConfig> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| Error::Config(format!("config: {e}")))?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<RunConfig> {
        RunConfig::from_json(&fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.shift.is_finite() {
            return Err(Error::Config("shift must be finite".into()));
        }
        self.pipeline.validate()?;
        self.spectra.validate()?;
        if let Some(g) = &self.grid {
            g.validate()?;
        }
        if self.threads == Some(0) {
            return Err(Error::Config("threads must be positive".into()));
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// What a successful run produced.
#[derive(Clone, Debug, Serialize)]
pub struct RunSummary {
    pub command: Command,
    pub outputs: Vec<PathBuf>,
    pub certificates: Value,
}

struct Ctx<'a> {
    cfg: &'a RunConfig,
    user: PotentialSpec,
    ev: Option<Evaluator>,
    out: &'a Path,
    outputs: Vec<PathBuf>,
}

impl Ctx<'_> {
    fn evaluator(&mut self) -> Result<&Evaluator> {
        if self.ev.is_none() {
            let p = if self.cfg.shift == 0.0 {
                self.user.clone()
            } else {
                self.user.shifted(self.cfg.shift)
            };
            self.ev = Some(Evaluator::new(&p, &self.cfg.pipeline)?);
        }
        Ok(self.ev.as_ref().unwrap())
    }

    fn gamma(&self) -> Complex64 {
        Complex64::new(self.cfg.shift, 0.0)
    }

    /// Evaluates at user energies (shifted internally) and reports user energies.
    fn evaluate(&mut self, es: &[Complex64]) -> Result<Vec<CharacteristicSample>> {
        let g = self.gamma();
        let shifted: Vec<Complex64> = es.iter().map(|e| e + g).collect();
        let ev = self.evaluator()?;
        let mut samples = ev.evaluate_batch(&shifted).into_iter().collect::<Result<Vec<_>>>()?;
        for s in &mut samples {
            s.e -= g;
        }
        Ok(samples)
    }

    fn file(&mut self, name: &str) -> Result<BufWriter<File>> {
        let path = self.out.join(name);
        self.outputs.push(path.clone());
        Ok(BufWriter::new(File::create(path)?))
    }

    fn json(&mut self, name: &str, value: &impl Serialize) -> Result<()> {
        let mut w = self.file(name)?;
        serde_json::to_writer_pretty(&mut w, value)?;
        use std::io::Write;
        writeln!(w)?;
        Ok(())
    }
}

/// Runs `cfg.command`, writing artifacts and `meta.json` into `out`.
///
/// `meta.json` is written even when the command fails a certificate, so the
/// failing numbers can be inspected.
pub fn run(cfg: &RunConfig, out: &Path) -> Result<RunSummary> {
    cfg.validate()?;
    let command = cfg
        .command
        .ok_or_else(|| Error::Config("no command given in the config or on the command line".into()))?;
    fs::create_dir_all(out)?;
    let user = cfg.potential.build()?;
    let mut ctx = Ctx {
        cfg,
        user,
        ev: None,
        out,
        outputs: Vec::new(),
    };
    let result = match command {
        Command::Eval => eval(&mut ctx),
        Command::Eigs => eigs(&mut ctx),
        Command::Count => count(&mut ctx),
        Command::OracleCompare => oracle_compare(&mut ctx),
        Command::Width => widths(&mut ctx),
        Command::Order => order(&mut ctx),
        Command::Convergence => convergence(&mut ctx),
    };
    let (certificates, failure) = match result {
        Ok(c) => (c, None),
        Err(Outcome::Failed(c, e)) => (c, Some(e)),
        Err(Outcome::Error(e)) => return Err(e),
    };
    let e_ref = ctx.ev.as_ref().map(|ev| ev.e_ref() - cfg.shift);
    let mut outputs = ctx.outputs.clone();
    outputs.push(out.join("meta.json"));
    let meta = json!({
        "version": env!("CARGO_PKG_VERSION"),
        "command": command.name(),
        "config_sha256": cfg.hash(),
        "potential": ctx.user.label(),
        "shift": cfg.shift,
        "reference_energy": e_ref,
        "outputs": outputs.iter().map(|p| p.file_name().unwrap().to_string_lossy()).collect::<Vec<_>>(),
        "certificates": certificates,
        "status": match &failure { None => "ok".to_string(), Some(e) => e.to_string() },
    });
    ctx.json("meta.json", &meta)?;
    match failure {
        Some(e) => Err(e),
        None => Ok(RunSummary {
            command,
            outputs,
            certificates: meta["certificates"].clone(),
        }),
    }
}

/// A command either errors outright or finishes with certificates that failed.
enum Outcome {
    Error(Error),
    Failed(Value, Error),
}

impl From<Error> for Outcome {
    fn from(e: Error) -> Self {
        Outcome::Error(e)
    }
}

type CmdResult = std::result::Result<Value, Outcome>;

fn certificate_failure(certs: Value, e: Complex64, detail: String) -> CmdResult {
    Err(Outcome::Failed(
        certs,
        Error::Certificate {
            stage: "run",
            e,
            detail,
        },
    ))
}

/// Every `stride`-th sample gets a central-difference check of `dP`.
fn fd_check(ctx: &mut Ctx, samples: &[CharacteristicSample]) -> Result<(usize, f64, Complex64)> {
    let stride = 20;
    let mut worst = (0.0, Complex64::new(0.0, 0.0));
    let mut checked = 0;
    for s in samples.iter().step_by(stride) {
        let h = 1e-4 * s.e.norm().max(1.0);
        let pair = ctx.evaluate(&[s.e + h, s.e - h])?;
        let center = s.p_scaled();
        let fd = (pair[0].p_scaled().ratio(&center) - pair[1].p_scaled().ratio(&center)) / (2.0 * h);
        let exact = s.log_derivative();
        let rel = (fd - exact).norm() / exact.norm();
        checked += 1;
        if rel > worst.0 {
            worst = (rel, s.e);
        }
    }
    Ok((checked, worst.0, worst.1))
}

fn sample_certificates(samples: &[CharacteristicSample]) -> Value {
    let sides = samples.iter().flat_map(|s| s.sides.iter());
    let mut max_iters = 0;
    let (mut res, mut trunc, mut dist, mut gap, mut closure) = (0f64, 0f64, 0f64, 0f64, 0f64);
    for d in sides {
        max_iters = max_iters.max(d.iters);
        res = res.max(d.residual);
        trunc = trunc.max(d.truncation);
        dist = dist.max(d.norm_dist);
        gap = gap.max(d.tail_gap);
        closure = closure.max(d.closure);
    }
    json!({
        "samples": samples.len(),
        "max_slope_iterations": max_iters,
        "max_riccati_residual": res,
        "max_tail_truncation": trunc,
        "max_ball_distance": dist,
        "max_tail_gap": gap,
        "max_closure": closure,
    })
}

fn eval(ctx: &mut Ctx) -> CmdResult {
    let grid = ctx
        .cfg
        .grid
        .clone()
        .ok_or_else(|| Error::Config("eval needs `grid`".into()))?;
    let samples = ctx.evaluate(&grid.energies())?;
    let w = ctx.file("samples.csv")?;
    write_samples_csv(w, &samples)?;
    let (checked, worst, at) = fd_check(ctx, &samples)?;
    let mut certs = sample_certificates(&samples);
    certs["fd_checked"] = json!(checked);
    certs["fd_max_rel_err"] = json!(worst);
    if worst > 1e-5 {
        return certificate_failure(certs, at, format!("dP differs from central differences by {worst:.3e}"));
    }
    Ok(certs)
}

fn eigs(ctx: &mut Ctx) -> CmdResult {
    let c = ctx.cfg.eigs.clone();
    let g = ctx.cfg.shift;
    let spectra = ctx.cfg.spectra.clone();
    let mut report = find_eigenvalues(ctx.evaluator()?, c.e_min + g, c.e_max + g, c.n, c.half_height, &spectra)?;
    report.e_min -= g;
    report.e_max -= g;
    for r in &mut report.eigenvalues {
        r.e -= g;
        r.bracket = r.bracket.map(|(a, b)| (a - g, b - g));
    }
    if let Some(ct) = report.contour.as_mut() {
        ct.rect.re_min -= g;
        ct.rect.re_max -= g;
    }
    write_eigenvalues_csv(ctx.file("eigenvalues.csv")?, &report.eigenvalues)?;
    ctx.json("eigenvalues.json", &report)?;
    let certs = json!({
        "eigenvalues": report.eigenvalues.len(),
        "max_residual": report.eigenvalues.iter().map(|r| r.residual).fold(0.0, f64::max),
        "contour_count": report.contour.as_ref().map(|c| c.count),
        "contour_raw": report.contour.as_ref().map(|c| c.raw),
        "complete": report.complete,
        "max_real_axis_imag": report.max_imag,
    });
    if report.complete == Some(false) {
        return certificate_failure(
            certs,
            Complex64::new(c.e_min, 0.0),
            "contour count differs from the number of eigenvalues found".into(),
        );
    }
    Ok(certs)
}

fn count(ctx: &mut Ctx) -> CmdResult {
    let rect = ctx
        .cfg
        .rect
        .ok_or_else(|| Error::Config("count needs `rect`".into()))?;
    let rect = Rectangle::new(rect.re_min, rect.re_max, rect.im_min, rect.im_max)?;
    let g = ctx.cfg.shift;
    let spectra = ctx.cfg.spectra.clone();
    let shifted = Rectangle::new(rect.re_min + g, rect.re_max + g, rect.im_min, rect.im_max)?;
    let mut c = count_zeros_rectangle(ctx.evaluator()?, &shifted, &spectra)?;
    c.rect.re_min -= g;
    c.rect.re_max -= g;
    ctx.json("count.json", &c)?;
    Ok(json!({ "count": c.count, "raw": c.raw, "points": c.points, "perturbed": c.perturbed }))
}

fn oracle_compare(ctx: &mut Ctx) -> CmdResult {
    let tag = ctx
        .user
        .oracle_tag()
        .ok_or_else(|| Error::Unsupported(format!("{} has no closed-form oracle", ctx.user.label())))?;
    let grid = ctx
        .cfg
        .grid
        .clone()
        .ok_or_else(|| Error::Config("oracle-compare needs `grid`".into()))?;
    let oc = ctx.cfg.oracle.clone();
    let e0 = Complex64::new(oc.reference_energy, 0.0);
    let es = grid.energies();
    let reference = ctx.evaluate(&[e0])?.remove(0);
    let o0 = oracle_characteristic(tag, e0)?;
    let samples = ctx.evaluate(&es)?;
    let mut w = csv::Writer::from_writer(ctx.file("oracle.csv")?);
    w.write_record([
        "Re_E",
        "Im_E",
        "Re_ratio",
        "Im_ratio",
        "Re_oracle_ratio",
        "Im_oracle_ratio",
        "rel_err",
        "oracle_err",
    ])
    .map_err(Error::from)?;
    let mut worst = (0.0, e0);
    for s in &samples {
        let o = oracle_characteristic(tag, s.e)?;
        let ratio = s.ratio(&reference);
        let oracle_ratio = o.value / o0.value;
        let rel = ((ratio - oracle_ratio) / oracle_ratio).norm();
        let oracle_err = o.abs_err_estimate / o.value.norm() + o0.abs_err_estimate / o0.value.norm();
        if rel > worst.0 {
            worst = (rel, s.e);
        }
        w.write_record([
            fmt_f64(s.e.re),
            fmt_f64(s.e.im),
            fmt_f64(ratio.re),
            fmt_f64(ratio.im),
            fmt_f64(oracle_ratio.re),
            fmt_f64(oracle_ratio.im),
            fmt_f64(rel),
            fmt_f64(oracle_err),
        ])
        .map_err(Error::from)?;
    }
    w.flush().map_err(Error::from)?;
    let certs = json!({
        "points": samples.len(),
        "reference_energy": oc.reference_energy,
        "max_rel_err": worst.0,
        "tol": oc.tol,
    });
    ctx.json("oracle.json", &certs)?;
    if worst.0 > oc.tol {
        return certificate_failure(certs, worst.1, format!("oracle ratio error {:.3e} exceeds {}", worst.0, oc.tol));
    }
    Ok(certs)
}

/// `|w(v) − ln(√v/2π)| · √v / ln v`.
pub fn scaled_width_deviation(w: f64, v: f64) -> f64 {
    (w - (v.sqrt() / (2.0 * std::f64::consts::PI)).ln()).abs() * v.sqrt() / v.ln()
}

fn widths(ctx: &mut Ctx) -> CmdResult {
    let wc = ctx.cfg.width.clone();
    if !(wc.v_min > 0.0 && wc.v_max > wc.v_min && wc.n >= 2) {
        return Err(Error::Config(format!("width levels need 0 < v_min < v_max and n ≥ 2, got {wc:?}")).into());
    }
    let mut w = csv::Writer::from_writer(ctx.file("width.csv")?);
    w.write_record(["v", "w", "asymptotic", "scaled_deviation"]).map_err(Error::from)?;
    let mut worst: f64 = 0.0;
    for i in 0..wc.n {
        let v = wc.v_min * (wc.v_max / wc.v_min).powf(i as f64 / (wc.n - 1) as f64);
        let level = v + ctx.cfg.shift;
        let p = if ctx.cfg.shift == 0.0 { ctx.user.clone() } else { ctx.user.shifted(ctx.cfg.shift) };
        let wv = width(&p, level)?;
        let dev = scaled_width_deviation(wv, v);
        worst = worst.max(dev);
        w.write_record([
            fmt_f64(v),
            fmt_f64(wv),
            fmt_f64((v.sqrt() / (2.0 * std::f64::consts::PI)).ln()),
            fmt_f64(dev),
        ])
        .map_err(Error::from)?;
    }
    w.flush().map_err(Error::from)?;
    Ok(json!({ "levels": wc.n, "max_scaled_deviation": worst }))
}

fn order(ctx: &mut Ctx) -> CmdResult {
    let r = ctx.cfg.order.r.clone();
    let g = ctx.cfg.shift;
    // |P(−r)| of the user's operator is |P(−r + γ)| of the shifted one.
    let shifted: Vec<f64> = r.iter().map(|r| r - g).collect();
    let mut fit = growth_order_estimate(ctx.evaluator()?, &shifted)?;
    fit.r = r;
    ctx.json("order.json", &fit)?;
    Ok(json!({
        "exponent": fit.exponent,
        "ci_half_width": fit.ci_half_width,
        "in_range": fit.exponent >= 0.4 && fit.exponent <= 1.1,
    }))
}

fn convergence(ctx: &mut Ctx) -> CmdResult {
    let c = ctx.cfg.convergence.clone();
    let g = ctx.cfg.shift;
    let spectra = ctx.cfg.spectra.clone();
    let mut report = convergence_report(
        ctx.evaluator()?,
        &c.indices,
        &c.offsets,
        (c.e_min + g, c.e_max + g, c.n),
        c.extension,
        &spectra,
    )?;
    for row in &mut report.rows {
        row.e_naive -= g;
    }
    for e in &mut report.eigenvalues {
        e.exact -= g;
    }
    let mut w = csv::Writer::from_writer(ctx.file("convergence.csv")?);
    w.write_record(["index", "offset", "b", "E_naive", "error"]).map_err(Error::from)?;
    for row in &report.rows {
        w.write_record([
            row.index.to_string(),
            fmt_f64(row.offset),
            fmt_f64(row.b),
            fmt_f64(row.e_naive),
            fmt_f64(row.error),
        ])
        .map_err(Error::from)?;
    }
    w.flush().map_err(Error::from)?;
    ctx.json("convergence.json", &report)?;
    let certs = json!({
        "monotone": report.eigenvalues.iter().all(|e| e.monotone),
        "max_extension_shift": report.eigenvalues.iter().map(|e| e.extension_shift).fold(0.0, f64::max),
    });
    Ok(certs)
}
