//! Command-line front end.
//!
//! Every command computes its tables in memory first. With `--out DIR` the
//! tables are written there together with one `manifest.json`; otherwise the
//! primary table goes to stdout. Failures print a JSON object on stderr and
//! exit with status 1; nothing is written in that case.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::graph::{validate_graph, GraphSpec, LocalScattering};
use crate::ring::{ring_poles_c, sigmas, RingSpec};
use crate::scaling::{beta_sweep, extract_coefficient, geometric_grid, theta_profile, MuRule, DEFAULT_GRID_POINTS};
use crate::smatrix::GraphScatterer;
use crate::transport::{current_bound, noise_matrix, steady_current, Dynamics, QuadratureConfig, Reservoir};
use crate::{Error, Result};

#[derive(Parser, Debug)]
#[command(name = "qgs", version, about = "Quantum graph scattering, currents and thermal noise")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check a graph spec file
    Validate { spec: PathBuf },
    /// Total scattering matrix on a momentum grid
    Smatrix(SmatrixArgs),
    /// Fundamental eigenvalue and |sigma_n|^2 of a regular ring
    RingEigen(RingEigenArgs),
    /// Poles of the scale-invariant ring
    RingPoles(RingPolesArgs),
    /// Steady lead currents
    Current(TransportArgs),
    /// Zero-frequency noise matrix
    Noise(TransportArgs),
    /// Inverse-temperature sweep of P_n and power-law fit
    Scaling(ScalingArgs),
}

#[derive(Args, Debug)]
struct OutArgs {
    /// Directory for tables and manifest
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SmatrixArgs {
    spec: PathBuf,
    #[arg(long, default_value_t = 0.1)]
    k_min: f64,
    #[arg(long, default_value_t = 3.0)]
    k_max: f64,
    #[arg(long, default_value_t = 30)]
    k_points: usize,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum DynamicsKind {
    Schrodinger,
    Dirac,
}

#[derive(Args, Debug, Clone)]
struct RingArgs {
    #[arg(long, default_value_t = 3)]
    n_leads: usize,
    #[arg(long, default_value_t = 0.5)]
    t: f64,
    /// Selects the energy-dependent vertex
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    d: f64,
    /// Total flux through the ring
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    flux: f64,
}

#[derive(Args, Debug)]
struct RingEigenArgs {
    #[command(flatten)]
    ring: RingArgs,
    /// Uses the step vertex of massless Dirac fermions
    #[arg(long, value_enum, default_value_t = DynamicsKind::Schrodinger)]
    dynamics: DynamicsKind,
    #[arg(long, default_value_t = 0.05, allow_hyphen_values = true)]
    kd_min: f64,
    #[arg(long, default_value_t = 6.2, allow_hyphen_values = true)]
    kd_max: f64,
    #[arg(long, default_value_t = 64)]
    kd_points: usize,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args, Debug)]
struct RingPolesArgs {
    #[arg(long, default_value_t = 3)]
    n_leads: usize,
    #[arg(long, default_value_t = 0.5)]
    t: f64,
    #[arg(long, default_value_t = 1.0)]
    d: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    flux: f64,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args, Debug, Clone)]
struct QuadArgs {
    #[arg(long)]
    rel_tol: Option<f64>,
    #[arg(long)]
    abs_tol: Option<f64>,
    #[arg(long)]
    z_max: Option<f64>,
    #[arg(long)]
    max_subdivisions: Option<usize>,
}

#[derive(Args, Debug)]
struct TransportArgs {
    spec: PathBuf,
    /// JSON array of {beta, mu, mu_tilde}, one per lead
    #[arg(long, conflicts_with_all = ["beta", "mu"])]
    reservoirs: Option<PathBuf>,
    /// Inverse temperature shared by all leads
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    mu: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    mu_tilde: Option<f64>,
    #[arg(long, value_enum, default_value_t = DynamicsKind::Schrodinger)]
    dynamics: DynamicsKind,
    #[arg(long, default_value_t = 0.5)]
    mass: f64,
    #[command(flatten)]
    quad: QuadArgs,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args, Debug)]
struct ScalingArgs {
    #[command(flatten)]
    ring: RingArgs,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    mu: f64,
    /// Holds the product mu*beta fixed instead of mu
    #[arg(long, allow_hyphen_values = true, conflicts_with = "mu")]
    mu_beta: Option<f64>,
    #[arg(long, value_enum, default_value_t = DynamicsKind::Schrodinger)]
    dynamics: DynamicsKind,
    #[arg(long, default_value_t = 0.5)]
    mass: f64,
    #[arg(long, default_value_t = 1e2)]
    beta_min: f64,
    #[arg(long, default_value_t = 1e4)]
    beta_max: f64,
    /// Defaults to 25 points per requested range
    #[arg(long)]
    beta_points: Option<usize>,
    /// Comma-separated flux-per-edge values; produces a g(theta) profile
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    theta_grid: Option<Vec<f64>>,
    #[arg(long, default_value_t = 0)]
    pn_index: usize,
    #[command(flatten)]
    quad: QuadArgs,
    #[command(flatten)]
    out: OutArgs,
}

/// Tables produced by one command.
struct Output {
    command: &'static str,
    params: Value,
    inputs: Vec<PathBuf>,
    /// (file name, CSV or JSON body); the first entry is the primary table.
    files: Vec<(String, String)>,
    residuals: Value,
    tolerances: Value,
    /// Printed instead of the primary table when present.
    stdout: Option<String>,
}

fn fmt(x: f64) -> String {
    // `+ 0.0` turns −0 into 0 so reruns and sign-symmetric cases print alike
    format!("{:.16e}", x + 0.0)
}

fn csv_body(header: &[String], rows: &[Vec<String>]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    String::from_utf8(bytes).map_err(|e| Error::InvalidArgument(e.to_string()))
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn env_tol(name: &str) -> Result<Option<f64>> {
    match std::env::var(name) {
        Ok(v) => {
            v.trim().parse::<f64>().map(Some).map_err(|_| Error::InvalidArgument(format!("{name}={v} is not a number")))
        }
        Err(_) => Ok(None),
    }
}

fn quad_config(q: &QuadArgs) -> Result<QuadratureConfig> {
    let mut cfg = QuadratureConfig::default();
    if let Some(v) = env_tol("QGS_REL_TOL")? {
        cfg.rel_tol = v;
    }
    if let Some(v) = env_tol("QGS_ABS_TOL")? {
        cfg.abs_tol = v;
    }
    if let Some(v) = q.rel_tol {
        cfg.rel_tol = v;
    }
    if let Some(v) = q.abs_tol {
        cfg.abs_tol = v;
    }
    cfg.z_max = q.z_max;
    if let Some(v) = q.max_subdivisions {
        cfg.max_subdivisions = v;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn tolerances_json(cfg: &QuadratureConfig) -> Value {
    json!({
        "rel_tol": cfg.rel_tol,
        "abs_tol": cfg.abs_tol,
        "z_max": cfg.z_max,
        "max_subdivisions": cfg.max_subdivisions,
    })
}

fn dynamics(kind: DynamicsKind, mass: f64) -> Dynamics {
    match kind {
        DynamicsKind::Schrodinger => Dynamics::Schrodinger { mass },
        DynamicsKind::Dirac => Dynamics::DiracMassless,
    }
}

fn ring_spec(r: &RingArgs, kind: DynamicsKind) -> Result<RingSpec> {
    let local = match (kind, r.eta) {
        (DynamicsKind::Dirac, Some(_)) => {
            return Err(Error::InvalidArgument("--eta cannot be combined with --dynamics dirac".into()))
        }
        (DynamicsKind::Dirac, None) => LocalScattering::DiracStep { t: r.t },
        (_, Some(eta)) => LocalScattering::EnergyDependentE { t: r.t, eta },
        (_, None) => LocalScattering::ScaleInvariantC { t: r.t },
    };
    RingSpec::new(r.n_leads, r.d, r.flux, local)
}

fn ring_params(r: &RingArgs) -> Value {
    json!({ "n_leads": r.n_leads, "t": r.t, "eta": r.eta, "d": r.d, "flux": r.flux })
}

fn linear_grid(min: f64, max: f64, points: usize) -> Result<Vec<f64>> {
    if points == 0 || !(min.is_finite() && max.is_finite()) || (points > 1 && max <= min) {
        return Err(Error::InvalidArgument(format!("bad grid [{min}, {max}] with {points} points")));
    }
    if points == 1 {
        return Ok(vec![min]);
    }
    Ok((0..points).map(|i| min + (max - min) * i as f64 / (points - 1) as f64).collect())
}

fn load_graph(path: &Path) -> Result<GraphSpec> {
    let spec = GraphSpec::from_json_file(path)?;
    let report = validate_graph(&spec);
    if !report.is_valid() {
        return Err(Error::InvalidGraph(report.violations));
    }
    Ok(spec)
}

fn cmd_validate(spec: &Path) -> Result<Output> {
    load_graph(spec)?;
    Ok(Output {
        command: "validate",
        params: json!({ "spec": spec }),
        inputs: vec![spec.to_path_buf()],
        files: vec![("validate.json".into(), json!({ "status": "valid" }).to_string())],
        residuals: json!({}),
        tolerances: json!({}),
        stdout: Some("valid\n".into()),
    })
}

fn cmd_smatrix(a: &SmatrixArgs) -> Result<Output> {
    let spec = load_graph(&a.spec)?;
    let scatterer = GraphScatterer::new(spec)?;
    let n = scatterer.ordering().d_ext();
    let mut header = vec!["k".to_string()];
    for i in 1..=n {
        for j in 1..=n {
            header.push(format!("re_S_{i}_{j}"));
            header.push(format!("im_S_{i}_{j}"));
        }
    }
    header.push("unitarity_residual".into());
    let mut rows = Vec::new();
    let mut worst: f64 = 0.0;
    for k in linear_grid(a.k_min, a.k_max, a.k_points)? {
        let s = scatterer.total_s(k)?;
        let res = s.unitarity_residual();
        worst = worst.max(res);
        let mut row = vec![fmt(k)];
        for i in 0..n {
            for j in 0..n {
                row.push(fmt(s.matrix[(i, j)].re));
                row.push(fmt(s.matrix[(i, j)].im));
            }
        }
        row.push(fmt(res));
        rows.push(row);
    }
    Ok(Output {
        command: "smatrix",
        params: json!({ "spec": a.spec, "k_min": a.k_min, "k_max": a.k_max, "k_points": a.k_points }),
        inputs: vec![a.spec.clone()],
        files: vec![("smatrix.csv".into(), csv_body(&header, &rows)?)],
        residuals: json!({ "max_unitarity_residual": worst }),
        tolerances: json!({ "pole_rcond": crate::smatrix::POLE_RCOND }),
        stdout: None,
    })
}

fn cmd_ring_eigen(a: &RingEigenArgs) -> Result<Output> {
    let ring = ring_spec(&a.ring, a.dynamics)?;
    let theta = ring.theta();
    let p = ring.n / 2;
    let mut header: Vec<String> = ["kd", "theta", "re_lambda", "im_lambda"].map(String::from).to_vec();
    header.extend((0..p).map(|n| format!("abs2_sigma_{n}")));
    let mut rows = Vec::new();
    let mut worst_modulus: f64 = 0.0;
    for kd in linear_grid(a.kd_min, a.kd_max, a.kd_points)? {
        let k = kd / ring.d;
        let lam = ring.lambda(k, theta)?;
        worst_modulus = worst_modulus.max((lam.norm() - 1.0).abs());
        let sig = sigmas(&ring, k)?;
        let mut row = vec![fmt(kd), fmt(theta), fmt(lam.re), fmt(lam.im)];
        row.extend(sig[..p].iter().map(|s| fmt(s.norm_sqr())));
        rows.push(row);
    }
    let mut params = ring_params(&a.ring);
    params["dynamics"] = json!(format!("{:?}", a.dynamics).to_lowercase());
    params["kd_min"] = json!(a.kd_min);
    params["kd_max"] = json!(a.kd_max);
    params["kd_points"] = json!(a.kd_points);
    Ok(Output {
        command: "ring-eigen",
        params,
        inputs: vec![],
        files: vec![("ring_eigen.csv".into(), csv_body(&header, &rows)?)],
        residuals: json!({ "max_abs_modulus_minus_one": worst_modulus }),
        tolerances: json!({ "eigen_pole_tol": crate::ring::EIGEN_POLE_TOL }),
        stdout: None,
    })
}

fn cmd_ring_poles(a: &RingPolesArgs) -> Result<Output> {
    let ring = RingSpec::new(a.n_leads, a.d, a.flux, LocalScattering::ScaleInvariantC { t: a.t })?;
    let theta = ring.theta();
    let header: Vec<String> = ["branch", "theta", "re_u", "im_u", "re_kd", "im_kd", "re_k", "im_k", "bae_residual"]
        .map(String::from)
        .to_vec();
    let mut rows = Vec::new();
    let mut worst: f64 = 0.0;
    for (pole, branch) in ring_poles_c(a.t, theta).iter().zip(["+", "-"]) {
        worst = worst.max(pole.residual);
        let mut row = vec![branch.to_string(), fmt(theta), fmt(pole.u.re), fmt(pole.u.im)];
        match pole.kd {
            Some(kd) => {
                let k = kd / a.d;
                row.extend([fmt(kd.re), fmt(kd.im), fmt(k.re), fmt(k.im)]);
            }
            None => row.extend(["inf", "inf", "inf", "inf"].map(String::from)),
        }
        row.push(fmt(pole.residual));
        rows.push(row);
    }
    Ok(Output {
        command: "ring-poles",
        params: json!({ "n_leads": a.n_leads, "t": a.t, "d": a.d, "flux": a.flux }),
        inputs: vec![],
        files: vec![("ring_poles.csv".into(), csv_body(&header, &rows)?)],
        residuals: json!({ "max_bae_residual": worst }),
        tolerances: json!({}),
        stdout: None,
    })
}

fn reservoirs(a: &TransportArgs, leads: usize) -> Result<Vec<Reservoir>> {
    let list: Vec<Reservoir> = match (&a.reservoirs, a.beta) {
        (Some(path), _) => serde_json::from_str(&fs::read_to_string(path)?)?,
        (None, Some(beta)) => {
            let mut r = Reservoir::new(beta, a.mu.unwrap_or(0.0));
            if let Some(mt) = a.mu_tilde {
                r = r.with_mu_tilde(mt);
            }
            vec![r; leads]
        }
        (None, None) => return Err(Error::InvalidArgument("give --reservoirs FILE or --beta (and --mu)".into())),
    };
    if list.len() != leads {
        return Err(Error::InvalidArgument(format!("{} reservoirs given for {leads} leads", list.len())));
    }
    Ok(list)
}

fn transport_common(a: &TransportArgs) -> Result<(GraphScatterer, Vec<Reservoir>, Dynamics, QuadratureConfig, Value)> {
    let spec = load_graph(&a.spec)?;
    let scatterer = GraphScatterer::new(spec)?;
    let res = reservoirs(a, scatterer.ordering().d_ext())?;
    let dynamics = dynamics(a.dynamics, a.mass);
    let cfg = quad_config(&a.quad)?;
    let params = json!({
        "spec": a.spec,
        "reservoirs": res,
        "dynamics": dynamics,
    });
    Ok((scatterer, res, dynamics, cfg, params))
}

fn transport_inputs(a: &TransportArgs) -> Vec<PathBuf> {
    let mut v = vec![a.spec.clone()];
    v.extend(a.reservoirs.clone());
    v
}

fn cmd_current(a: &TransportArgs) -> Result<Output> {
    let (scatterer, res, dynamics, cfg, params) = transport_common(a)?;
    let currents = steady_current(&scatterer, &res, &dynamics, &cfg)?;
    let bound = current_bound(&res);
    let header: Vec<String> = ["lead", "current", "bound"].map(String::from).to_vec();
    let rows: Vec<Vec<String>> = currents
        .values
        .iter()
        .zip(&bound)
        .enumerate()
        .map(|(i, (j, b))| vec![(i + 1).to_string(), fmt(*j), fmt(*b)])
        .collect();
    Ok(Output {
        command: "current",
        params,
        inputs: transport_inputs(a),
        files: vec![("current.csv".into(), csv_body(&header, &rows)?)],
        residuals: json!({
            "max_unitarity_residual": currents.diagnostics.max_unitarity_residual,
            "quadrature_error": currents.diagnostics.error_estimate,
            "current_sum": currents.values.iter().sum::<f64>(),
        }),
        tolerances: tolerances_json(&cfg),
        stdout: None,
    })
}

fn cmd_noise(a: &TransportArgs) -> Result<Output> {
    let (scatterer, res, dynamics, cfg, params) = transport_common(a)?;
    let p = noise_matrix(&scatterer, &res, &dynamics, &cfg)?;
    let n = p.matrix.nrows();
    let mut header = vec!["a".to_string()];
    header.extend((1..=n).map(|b| format!("P_a_{b}")));
    let rows: Vec<Vec<String>> = (0..n)
        .map(|i| {
            let mut r = vec![(i + 1).to_string()];
            r.extend((0..n).map(|j| fmt(p.matrix[(i, j)])));
            r
        })
        .collect();
    let pn_rows: Vec<Vec<String>> =
        p.first_row().iter().enumerate().map(|(i, v)| vec![i.to_string(), fmt(*v)]).collect();
    Ok(Output {
        command: "noise",
        params,
        inputs: transport_inputs(a),
        files: vec![
            ("noise.csv".into(), csv_body(&header, &rows)?),
            ("noise_pn.csv".into(), csv_body(&["n".to_string(), "P_n".to_string()], &pn_rows)?),
        ],
        residuals: json!({
            "kirchhoff": p.kirchhoff_residual(),
            "symmetry": p.symmetry_residual(),
            "circulant": p.circulant_residual(),
            "max_unitarity_residual": p.diagnostics.max_unitarity_residual,
            "quadrature_error": p.diagnostics.error_estimate,
        }),
        tolerances: tolerances_json(&cfg),
        stdout: None,
    })
}

fn cmd_scaling(a: &ScalingArgs) -> Result<Output> {
    let ring = ring_spec(&a.ring, a.dynamics)?;
    let dynamics = dynamics(a.dynamics, a.mass);
    let cfg = quad_config(&a.quad)?;
    let points = a.beta_points.unwrap_or(DEFAULT_GRID_POINTS);
    let betas = geometric_grid(a.beta_min, a.beta_max, points)?;
    let mu = match a.mu_beta {
        Some(l) => MuRule::FixedProduct(l),
        None => MuRule::Fixed(a.mu),
    };
    let mut params = ring_params(&a.ring);
    params["dynamics"] = json!(dynamics);
    params["mu"] = json!(a.mu);
    params["mu_beta"] = json!(a.mu_beta);
    params["betas"] = json!(betas);
    params["pn_index"] = json!(a.pn_index);
    let tolerances = tolerances_json(&cfg);

    if let Some(thetas) = &a.theta_grid {
        if a.mu_beta.is_some() {
            return Err(Error::InvalidArgument("--theta-grid needs a fixed --mu".into()));
        }
        let profile = theta_profile(&ring, a.mu, a.pn_index, &dynamics, thetas, &betas, &cfg)?;
        let header: Vec<String> = ["theta", "g", "stderr", "local_slope"].map(String::from).to_vec();
        let rows: Vec<Vec<String>> =
            profile.iter().map(|p| vec![fmt(p.theta), fmt(p.g), fmt(p.stderr), fmt(p.local_slope)]).collect();
        let summary = json!({ "profile": profile });
        params["theta_grid"] = json!(thetas);
        return Ok(Output {
            command: "scaling",
            params,
            inputs: vec![],
            files: vec![
                ("scaling_profile.csv".into(), csv_body(&header, &rows)?),
                ("scaling.json".into(), serde_json::to_string_pretty(&summary)?),
            ],
            residuals: json!({}),
            tolerances,
            stdout: Some(serde_json::to_string_pretty(&summary)? + "\n"),
        });
    }

    let sweep = beta_sweep(&ring, mu, a.pn_index, &dynamics, &betas, &cfg)?;
    let header: Vec<String> = ["beta", "mu", "P_n"].map(String::from).to_vec();
    let rows: Vec<Vec<String>> = sweep.rows.iter().map(|r| vec![fmt(r.beta), fmt(r.mu), fmt(r.value)]).collect();
    let target = sweep.fit.exponent.round();
    let (coefficient, coefficient_diag) = match extract_coefficient(&sweep, target) {
        Ok(c) => (
            json!(c.coefficient),
            json!({ "exponent": target, "last_value": c.last_value, "relative_change": c.diagnostic }),
        ),
        Err(e) => (Value::Null, json!({ "exponent": target, "error": e.to_string() })),
    };
    let summary = json!({
        "theta": sweep.theta,
        "exponent": sweep.fit.exponent,
        "stderr": sweep.fit.stderr,
        "coefficient": coefficient,
        "diagnostics": {
            "intercept": sweep.fit.intercept,
            "r_squared": sweep.fit.r_squared,
            "local_slope": sweep.fit.local_slope,
            "fit_points": sweep.fit.points,
            "coefficient": coefficient_diag,
        },
    });
    Ok(Output {
        command: "scaling",
        params,
        inputs: vec![],
        files: vec![
            ("scaling.csv".into(), csv_body(&header, &rows)?),
            ("scaling.json".into(), serde_json::to_string_pretty(&summary)?),
        ],
        residuals: json!({}),
        tolerances,
        stdout: Some(serde_json::to_string_pretty(&summary)? + "\n"),
    })
}

fn write_artifacts(out: &Path, o: &Output, started: Instant) -> Result<()> {
    let mut inputs = Vec::new();
    for p in &o.inputs {
        inputs.push(json!({ "path": p, "sha256": sha256_hex(&fs::read(p)?) }));
    }
    let outputs: BTreeMap<&str, String> =
        o.files.iter().map(|(name, body)| (name.as_str(), sha256_hex(body.as_bytes()))).collect();
    let timestamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let manifest = json!({
        "command": o.command,
        "params": o.params,
        "inputs": inputs,
        "outputs": outputs,
        "tolerances": o.tolerances,
        "residuals": o.residuals,
        "version": env!("CARGO_PKG_VERSION"),
        "duration_seconds": started.elapsed().as_secs_f64(),
        "timestamp_unix": timestamp,
    });
    fs::create_dir_all(out)?;
    for (name, body) in &o.files {
        fs::write(out.join(name), body)?;
    }
    fs::write(out.join("manifest.json"), serde_json::to_string_pretty(&manifest)? + "\n")?;
    Ok(())
}

fn error_json(e: &Error) -> Value {
    let kind = match e {
        Error::InvalidGraph(_) => "invalid_graph",
        Error::LocalMatrix { .. } => "local_matrix",
        Error::StepDiscontinuity => "step_discontinuity",
        Error::ScatteringPole { .. } => "scattering_pole",
        Error::EigenvaluePole { .. } => "eigenvalue_pole",
        Error::Quadrature { .. } => "quadrature",
        Error::IntegrandRange { .. } => "integrand_range",
        Error::SweepPoint { .. } => "sweep_point",
        Error::Fit(_) => "fit",
        Error::InvalidArgument(_) => "invalid_argument",
        Error::Parse(_) => "parse",
        Error::Io(_) => "io",
        Error::Csv(_) => "csv",
    };
    let mut v = json!({ "error": kind, "message": e.to_string() });
    if let Error::InvalidGraph(violations) = e {
        v["violations"] = json!(violations.iter().map(|x| x.to_string()).collect::<Vec<_>>());
    }
    if let Some((key, value)) = e.location() {
        v[key] = json!(value);
    }
    v
}

/// Runs the command line and returns the process exit status.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let started = Instant::now();
    let (result, out) = match &cli.command {
        Command::Validate { spec } => (cmd_validate(spec), None),
        Command::Smatrix(a) => (cmd_smatrix(a), a.out.out.as_ref()),
        Command::RingEigen(a) => (cmd_ring_eigen(a), a.out.out.as_ref()),
        Command::RingPoles(a) => (cmd_ring_poles(a), a.out.out.as_ref()),
        Command::Current(a) => (cmd_current(a), a.out.out.as_ref()),
        Command::Noise(a) => (cmd_noise(a), a.out.out.as_ref()),
        Command::Scaling(a) => (cmd_scaling(a), a.out.out.as_ref()),
    };
    let written = result.and_then(|o| {
        if let Some(dir) = out {
            write_artifacts(dir, &o, started)?;
        }
        match (&o.stdout, out) {
            (Some(s), _) => print!("{s}"),
            (None, None) => print!("{}", o.files[0].1),
            (None, Some(dir)) => println!("wrote {}", dir.join(&o.files[0].0).display()),
        }
        Ok(())
    });
    match written {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}", error_json(&e));
            1
        }
    }
}
