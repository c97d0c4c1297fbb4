use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use eulerian_shape::density::polynomial_regime;
use eulerian_shape::inference::{density_grid, samples_from_configurations, TailMethod};
use eulerian_shape::simulate::synthetic_configurations;
use eulerian_shape::{
    discriminate_landmarks, mle, sample_canonical_pairs, tail_probability, write_landmark_file, CanonicalCorrModel,
    Centering, CorrelationSample, DensityForm, Discrimination, EstimationReport, LandmarkConfiguration, MleOptions,
    QuadratureSpec, SeriesSpec, SimSpec, TailOptions, TailProbability,
};

use crate::args::{
    CenterArg, Command, Common, DiscriminateArgs, EstimateArgs, Format, GridArgs, PairInputs, SimulateArgs, TailArgs,
};
use crate::io::{parse_samples, parse_schedule, read_landmarks, read_text, write_samples};
use crate::CliError;

pub fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Estimate(a) => estimate(&a),
        Command::Tailprob(a) => tailprob(&a),
        Command::Simulate(a) => simulate(&a),
        Command::DensityGrid(a) => grid(&a),
        Command::Discriminate(a) => discriminate(&a),
    }
}

fn emit(common: &Common, text: &str) -> Result<(), CliError> {
    match &common.out {
        Some(path) => fs::write(path, text).map_err(|e| CliError::Input(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

fn density_form(common: &Common) -> DensityForm {
    if common.polynomial {
        DensityForm::Polynomial
    } else if common.series {
        DensityForm::Series
    } else {
        DensityForm::Auto
    }
}

fn quadrature(common: &Common) -> Result<QuadratureSpec, CliError> {
    if common.quad_nodes == 0 {
        return Err(CliError::Input("--quad-nodes must be positive".into()));
    }
    Ok(QuadratureSpec {
        nodes: common.quad_nodes,
        seed: common.seed,
        ..QuadratureSpec::default()
    })
}

fn series(common: &Common) -> Result<SeriesSpec, CliError> {
    if common.max_degree == 0 {
        return Err(CliError::Input("--max-degree must be positive".into()));
    }
    Ok(SeriesSpec::with_max_degree(common.max_degree))
}

fn mle_options(common: &Common, starts: usize, max_iterations: usize) -> Result<MleOptions, CliError> {
    if starts == 0 || max_iterations == 0 {
        return Err(CliError::Input("--starts and --max-iterations must be positive".into()));
    }
    Ok(MleOptions {
        starts,
        max_iterations,
        form: density_form(common),
        quadrature: quadrature(common)?,
        series: series(common)?,
        ..MleOptions::default()
    })
}

fn check_k(common: &Common, k: usize, what: &str) -> Result<(), CliError> {
    match common.k {
        Some(given) if given != k => Err(CliError::Input(format!("--k {given} disagrees with {what} (K = {k})"))),
        _ => Ok(()),
    }
}

/// Fails early, with a remediation hint, when the polynomial form is
/// required but the parity condition does not hold.
fn check_parity(common: &Common, k: usize, n: usize) -> Result<(), CliError> {
    if common.polynomial && !polynomial_regime(k, n) {
        let hint = if k.is_multiple_of(2) {
            "K-even requires N odd"
        } else {
            "K-odd requires N even"
        };
        return Err(CliError::Input(format!(
            "--polynomial needs (K - N + 1)/2 to be a negative integer; got K = {k}, N = {}: {hint} (or use --series)",
            n + 1
        )));
    }
    Ok(())
}

fn model(k: usize, n: usize, rho2: Vec<f64>) -> Result<CanonicalCorrModel, CliError> {
    CanonicalCorrModel::new(k, n, rho2).map_err(CliError::from)
}

/// Description of the two sides of the comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputSummary {
    pub y: String,
    pub x: String,
    /// `population`, `template`, `figure` or `samples`.
    pub x_kind: String,
    pub landmarks: Option<usize>,
    pub centering: String,
}

struct PairData {
    x: Vec<LandmarkConfiguration>,
    y: Vec<LandmarkConfiguration>,
    centering: Centering,
    summary: InputSummary,
}

fn display(p: &Path) -> String {
    p.display().to_string()
}

fn load_pairs(inputs: &PairInputs) -> Result<PairData, CliError> {
    let (y_path, x_path, kind): (&PathBuf, &PathBuf, &str) =
        match (inputs.population.as_slice(), &inputs.template, &inputs.figure) {
            ([y, x], None, None) => (y, x, "population"),
            ([y], Some(t), None) => (y, t, "template"),
            ([y], None, Some(f)) => (y, f, "figure"),
            ([], _, _) => return Err(CliError::Input("--population is required".into())),
            ([_], None, None) => {
                return Err(CliError::Input(
                    "give a second --population, a --template or a --figure for X".into(),
                ))
            }
            _ => {
                return Err(CliError::Input(
                    "use --population Y with exactly one of --population X, --template, --figure".into(),
                ))
            }
        };
    let y = read_landmarks(y_path)?;
    let x = read_landmarks(x_path)?;
    if kind != "population" && x.len() != 1 {
        return Err(CliError::Input(format!(
            "{}: a {kind} file must hold exactly one configuration, found {}",
            x_path.display(),
            x.len()
        )));
    }
    let centering = match inputs.center {
        CenterArg::Auto => Centering::Auto,
        CenterArg::None => Centering::None,
        CenterArg::SampleMean => Centering::SampleMean,
    };
    let summary = InputSummary {
        y: display(y_path),
        x: display(x_path),
        x_kind: kind.into(),
        landmarks: y.first().map(|c| c.landmarks()),
        centering: format!("{:?}", inputs.center).to_lowercase(),
    };
    Ok(PairData {
        x,
        y,
        centering,
        summary,
    })
}

fn dims(data: &PairData) -> Result<(usize, usize), CliError> {
    let first = data
        .y
        .first()
        .ok_or_else(|| CliError::Input(format!("{}: no configurations", data.summary.y)))?;
    Ok((first.dim(), first.landmarks()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateOutput {
    pub command: String,
    pub input: InputSummary,
    pub report: EstimationReport,
    pub notes: Vec<String>,
}

fn estimate(a: &EstimateArgs) -> Result<(), CliError> {
    let opts = mle_options(&a.common, a.starts, a.max_iterations)?;
    let (samples, k, n, input) = match &a.samples {
        Some(path) => {
            let samples = parse_samples(&read_text(path)?, &display(path))?;
            let n = a.n.ok_or_else(|| CliError::Input("--samples needs --n".into()))?;
            let k = samples
                .first()
                .map(CorrelationSample::len)
                .or(a.common.k)
                .ok_or_else(|| CliError::Input(format!("{}: no samples", path.display())))?;
            let input = InputSummary {
                y: display(path),
                x: display(path),
                x_kind: "samples".into(),
                landmarks: Some(n + 1),
                centering: "none".into(),
            };
            (samples, k, n, input)
        }
        None => {
            let data = load_pairs(&a.pairs)?;
            let (k, landmarks) = dims(&data)?;
            if let Some(n) = a.n {
                if n + 1 != landmarks {
                    return Err(CliError::Input(format!(
                        "--n {n} disagrees with N = {landmarks} landmarks"
                    )));
                }
            }
            if landmarks < 2 * k + 1 {
                return Err(CliError::Input(format!(
                    "N = {landmarks} landmarks is below 2K + 1 = {}",
                    2 * k + 1
                )));
            }
            check_k(&a.common, k, "the landmark files")?;
            check_parity(&a.common, k, landmarks - 1)?;
            let samples = samples_from_configurations(&data.x, &data.y, data.centering)?;
            (samples, k, landmarks - 1, data.summary)
        }
    };
    check_k(&a.common, k, "the samples")?;
    check_parity(&a.common, k, n)?;
    if samples.is_empty() {
        return Err(CliError::Input("no samples to estimate from".into()));
    }
    let report = mle(&samples, k, n, &opts)?;
    let mut notes = Vec::new();
    match report.polynomial_degree {
        Some(d) => notes.push(format!(
            "exact polynomial density: degree {d} (q = {}) in the {k} latent roots of the zonal argument",
            d / k
        )),
        None => notes.push(format!(
            "zonal series form truncated at degree {}",
            opts.series.max_degree
        )),
    }
    if !report.converged {
        notes.push("no start met the convergence tolerance; estimate not reliable".into());
    }
    let converged = report.converged;
    let out = EstimateOutput {
        command: "estimate".into(),
        input,
        report,
        notes,
    };
    emit(
        &a.common,
        &match a.common.format {
            Format::Json => to_json(&out),
            Format::Table => estimate_table(&out),
        },
    )?;
    if converged {
        Ok(())
    } else {
        Err(CliError::NotConverged(
            "maximum-likelihood search did not converge".into(),
        ))
    }
}

fn fmt_vec(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.6}")).collect::<Vec<_>>().join(" ")
}

fn estimate_table(o: &EstimateOutput) -> String {
    let r = &o.report;
    let mut s = String::new();
    let _ = writeln!(s, "Y                 {}", o.input.y);
    let _ = writeln!(s, "X ({:<10})    {}", o.input.x_kind, o.input.x);
    let _ = writeln!(s, "K, n, samples     {}, {}, {}", r.k, r.n, r.samples);
    let _ = writeln!(s, "density form      {}", r.form);
    let _ = writeln!(s, "rho2_hat          {}", fmt_vec(&r.rho2_hat));
    let _ = writeln!(s, "log-likelihood    {:.6}", r.log_likelihood);
    let _ = writeln!(s, "converged         {}", r.converged);
    let _ = writeln!(s, "iterations        {} ({} evaluations)", r.iterations, r.evaluations);
    let _ = writeln!(s, "starts:");
    for (i, st) in r.starts.iter().enumerate() {
        let _ = writeln!(
            s,
            "  {}  start [{}]  rho2_hat [{}]  loglik {:.6}  iters {}  converged {}",
            i + 1,
            fmt_vec(&st.start),
            fmt_vec(&st.rho2_hat),
            st.log_likelihood,
            st.iterations,
            st.converged
        );
    }
    for n in &o.notes {
        let _ = writeln!(s, "note: {n}");
    }
    s
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailOutput {
    pub command: String,
    pub k: usize,
    pub n: usize,
    pub rho2: Vec<f64>,
    pub t: Vec<f64>,
    pub probability: TailProbability,
}

fn tailprob(a: &TailArgs) -> Result<(), CliError> {
    let (rho2, k, n) = match (&a.rho2, &a.estimate) {
        (Some(r), None) => {
            let n = a.n.ok_or_else(|| CliError::Input("--rho2 needs --n".into()))?;
            (r.clone(), r.len(), n)
        }
        (None, Some(path)) => {
            let est: EstimateOutput = serde_json::from_str(&read_text(path)?)
                .map_err(|e| CliError::Input(format!("{}: not an estimate report: {e}", path.display())))?;
            if let Some(n) = a.n {
                if n != est.report.n {
                    return Err(CliError::Input(format!(
                        "--n {n} disagrees with the estimate (n = {})",
                        est.report.n
                    )));
                }
            }
            (est.report.rho2_hat, est.report.k, est.report.n)
        }
        _ => return Err(CliError::Input("give either --rho2 with --n or --estimate".into())),
    };
    check_k(&a.common, k, "rho2")?;
    check_parity(&a.common, k, n)?;
    if a.t.len() != k {
        return Err(CliError::Input(format!(
            "--t has {} values, expected K = {k}",
            a.t.len()
        )));
    }
    if let Some(bad) = a.t.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(CliError::Input(format!("threshold {bad} is outside [0, 1]")));
    }
    let m = model(k, n, rho2)?;
    if a.common.series {
        return Err(CliError::Input(
            "tailprob integrates the polynomial density or simulates; --series does not apply".into(),
        ));
    }
    let opts = TailOptions {
        quadrature: quadrature(&a.common)?,
        mc_samples: a.mc_samples,
        seed: a.common.seed,
        ..TailOptions::default()
    };
    let probability = tail_probability(&a.t, &m, &opts)?;
    let out = TailOutput {
        command: "tailprob".into(),
        k,
        n,
        rho2: m.rho2().to_vec(),
        t: a.t.clone(),
        probability,
    };
    let text = match a.common.format {
        Format::Json => to_json(&out),
        Format::Table => {
            let method = match probability.method {
                TailMethod::Quadrature => "adaptive quadrature".to_string(),
                TailMethod::MonteCarlo { samples } => format!("Monte Carlo ({samples} samples)"),
            };
            format!(
                "K, n              {k}, {n}\nrho2              {}\nthreshold         {}\nprobability       {:.10}\nerror             {:.3e}\nmethod            {method}\n",
                fmt_vec(&out.rho2),
                fmt_vec(&out.t),
                probability.value,
                probability.error
            )
        }
    };
    emit(&a.common, &text)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateOutput {
    pub command: String,
    pub k: usize,
    pub n: usize,
    pub rho2: Vec<f64>,
    pub count: usize,
    pub seed: u64,
    pub rejected: usize,
    pub samples: Vec<Vec<f64>>,
}

fn simulate(a: &SimulateArgs) -> Result<(), CliError> {
    let k = a.rho2.len();
    check_k(&a.common, k, "rho2")?;
    let spec = SimSpec {
        k,
        n: a.n,
        rho2: a.rho2.clone(),
        count: a.count,
        seed: a.common.seed,
    };
    model(k, a.n, a.rho2.clone())?;
    let out = sample_canonical_pairs(&spec)?;
    if let (Some(xp), Some(yp)) = (&a.x_out, &a.y_out) {
        if a.count == 0 {
            return Err(CliError::Input("landmark files need --count >= 1".into()));
        }
        let (xs, ys) = synthetic_configurations(&spec)?;
        for (path, side) in [(xp, &xs), (yp, &ys)] {
            fs::write(path, write_landmark_file(side)?)
                .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        }
    }
    let text = match a.common.format {
        Format::Table => write_samples(&out.samples),
        Format::Json => to_json(&SimulateOutput {
            command: "simulate".into(),
            k,
            n: a.n,
            rho2: a.rho2.clone(),
            count: a.count,
            seed: a.common.seed,
            rejected: out.rejected,
            samples: out.samples.iter().map(|s| s.values().to_vec()).collect(),
        }),
    };
    emit(&a.common, &text)?;
    eprintln!(
        "simulated {} samples ({} tied or boundary draws rejected)",
        a.count, out.rejected
    );
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridOutput {
    pub command: String,
    pub n: usize,
    pub rho2: Vec<f64>,
    pub resolution: usize,
    /// `[r1², r2², density]` at cell centres.
    pub rows: Vec<[f64; 3]>,
}

fn grid(a: &GridArgs) -> Result<(), CliError> {
    let k = a.rho2.len();
    check_k(&a.common, k, "rho2")?;
    if k != 2 {
        return Err(CliError::Input(format!(
            "density-grid needs K = 2, got {k} values in --rho2"
        )));
    }
    check_parity(&a.common, k, a.n)?;
    if a.resolution == 0 {
        return Err(CliError::Input("--resolution must be positive".into()));
    }
    let m = model(k, a.n, a.rho2.clone())?;
    let rows = density_grid(
        &m,
        a.resolution,
        density_form(&a.common),
        &quadrature(&a.common)?,
        &series(&a.common)?,
    )?;
    let text = match a.common.format {
        Format::Json => to_json(&GridOutput {
            command: "density-grid".into(),
            n: a.n,
            rho2: a.rho2.clone(),
            resolution: a.resolution,
            rows,
        }),
        Format::Table => {
            let mut s = String::with_capacity(rows.len() * 48);
            let _ = writeln!(s, "# r1^2 r2^2 density (n = {}, rho2 = {})", a.n, fmt_vec(&a.rho2));
            for [x, y, d] in rows {
                let _ = writeln!(s, "{x:.8} {y:.8} {d:.12e}");
            }
            s
        }
    };
    emit(&a.common, &text)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscriminateOutput {
    pub command: String,
    pub input: InputSummary,
    pub discrimination: Discrimination,
}

fn discriminate(a: &DiscriminateArgs) -> Result<(), CliError> {
    let schedule = parse_schedule(&a.schedule)?;
    if a.threshold.is_nan() || a.threshold <= 0.0 {
        return Err(CliError::Input("--threshold must be positive".into()));
    }
    let opts = mle_options(&a.common, a.starts, a.max_iterations)?;
    let data = load_pairs(&a.pairs)?;
    let (k, landmarks) = dims(&data)?;
    check_k(&a.common, k, "the landmark files")?;
    if let Some(bad) = schedule.iter().flatten().find(|&&i| i >= landmarks) {
        return Err(CliError::Input(format!(
            "schedule index {} exceeds N = {landmarks} landmarks",
            bad + 1
        )));
    }
    let d = discriminate_landmarks(&data.x, &data.y, &schedule, data.centering, &opts, a.threshold)?;
    for w in &d.warnings {
        eprintln!("warning: {w}");
    }
    let all_converged = d.steps.iter().all(|s| s.report.converged);
    let out = DiscriminateOutput {
        command: "discriminate".into(),
        input: data.summary,
        discrimination: d,
    };
    let text = match a.common.format {
        Format::Json => to_json(&out),
        Format::Table => {
            let d = &out.discrimination;
            let mut s = String::new();
            let _ = writeln!(s, "step  landmarks  rho2_hat              loglik        converged");
            for (i, st) in d.steps.iter().enumerate() {
                let _ = writeln!(
                    s,
                    "{:<5} {:<10} {:<21} {:<13.6} {}",
                    i + 1,
                    st.subset.len(),
                    fmt_vec(&st.report.rho2_hat),
                    st.report.log_likelihood,
                    st.report.converged
                );
            }
            match d.drastic_change {
                Some(i) => {
                    let _ = writeln!(s, "drastic change at step {} (threshold {})", i + 1, d.threshold);
                }
                None => {
                    let _ = writeln!(s, "no drastic change (threshold {})", d.threshold);
                }
            }
            for w in &d.warnings {
                let _ = writeln!(s, "warning: {w}");
            }
            s
        }
    };
    emit(&a.common, &text)?;
    if out.discrimination.steps.is_empty() {
        return Err(CliError::Input("every subset of the schedule was skipped".into()));
    }
    if all_converged {
        Ok(())
    } else {
        Err(CliError::NotConverged("at least one subset did not converge".into()))
    }
}
