//! Subcommand implementations. Each returns the process exit code:
//! 0 success, 2 a certificate/estimate came back negative, 3 geodesic solve
//! failure. Configuration and IO problems bubble up as errors (exit 1).

use crate::config::*;
use anyhow::{Context, Result};
use entroflow::convexity::{self, counterexample};
use entroflow::error::Error;
use entroflow::flow::{self, FlowSystem, State};
use entroflow::geodesics;
use entroflow::markov::Potential;
use entroflow::means::{self, Mean};
use entroflow::report::PropertyReport;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::fs;
use std::path::Path;

fn write_json<T: Serialize>(out: &Path, name: &str, value: &T) -> Result<()> {
    fs::create_dir_all(out)
        .with_context(|| format!("creating output directory {}", out.display()))?;
    let path = out.join(name);
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn write_csv(out: &Path, name: &str, header: &str, rows: &[Vec<f64>]) -> Result<()> {
    fs::create_dir_all(out)?;
    let path = out.join(name);
    let mut text = String::from(header);
    text.push('\n');
    for row in rows {
        let mut first = true;
        for v in row {
            if !first {
                text.push(',');
            }
            text.push_str(&format!("{v:.17e}"));
            first = false;
        }
        text.push('\n');
    }
    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15u64.wrapping_mul(stream + 1))
}

#[derive(Serialize)]
struct SimulateReport {
    n: usize,
    t_end: f64,
    tol: f64,
    steps: usize,
    final_entropy: f64,
    mass_drift: f64,
    min_rho_overall: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    estimates: Option<flow::EstimateReport>,
}

pub fn simulate(cfg: &SimulateConfig, out: &Path, seed: u64) -> Result<i32> {
    let grid = entroflow::markov::Grid::new(cfg.n)?;
    let potential = cfg.potential.build()?;
    let phi = cfg.phi.build()?;
    let sys = FlowSystem::fokker_planck(grid, potential, phi)?;
    let mut rng = rng_for(seed, 0);
    let rho0 = cfg.rho0.build(sys.grid(), &mut rng)?;
    let traj = flow::integrate(&sys, &rho0, cfg.t_end, cfg.tol)?;

    let mut rows = Vec::with_capacity(traj.times.len());
    for (k, t) in traj.times.iter().enumerate() {
        let mut row = vec![*t];
        row.extend_from_slice(&traj.states[k]);
        let s = &traj.stats[k];
        row.extend_from_slice(&[s.entropy, s.min_rho, s.max_rho, s.grad_phi_l2]);
        rows.push(row);
    }
    let mut header = String::from("t");
    for i in 0..sys.grid().node_count() {
        header.push_str(&format!(",rho_{i}"));
    }
    header.push_str(",entropy,min_rho,max_rho,grad_norm");
    write_csv(out, "simulate.csv", &header, &rows)?;

    let estimates = if sys.potential().is_zero() {
        Some(flow::apriori_monitor(&sys, &traj)?)
    } else {
        None
    };
    let mass_drift = traj
        .states
        .iter()
        .map(|s| (s.iter().sum::<f64>() - 1.0).abs())
        .fold(0.0, f64::max);
    let min_rho_overall = traj
        .stats
        .iter()
        .map(|s| s.min_rho)
        .fold(f64::INFINITY, f64::min);
    let report = SimulateReport {
        n: cfg.n,
        t_end: cfg.t_end,
        tol: cfg.tol,
        steps: traj.times.len(),
        final_entropy: traj.stats.last().map(|s| s.entropy).unwrap_or(f64::NAN),
        mass_drift,
        min_rho_overall,
        estimates,
    };
    write_json(out, "simulate_report.json", &report)?;

    match &report.estimates {
        Some(rep) if !rep.all_passed() => {
            eprintln!("a priori estimate violated");
            Ok(2)
        }
        _ => Ok(0),
    }
}

#[derive(Serialize)]
struct ConvexityStateReport {
    index: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    time: Option<f64>,
    report: convexity::ConvexityReport,
}

#[derive(Serialize)]
struct ConvexityCommandReport {
    n: usize,
    path: String,
    lambda_policy: String,
    states: Vec<ConvexityStateReport>,
    all_certified: bool,
}

pub fn convexity_cmd(cfg: &ConvexityConfig, out: &Path, seed: u64, jobs: usize) -> Result<i32> {
    let sys = cfg.system.build()?;
    let mut rng = rng_for(seed, 1);

    // collect the states to certify
    let mut states: Vec<(Option<f64>, Vec<f64>)> = Vec::new();
    match &cfg.state {
        StateSource::Uniform => {
            states.push((None, State::uniform(sys.grid().node_count()).into_vec()))
        }
        StateSource::GaussianBump { center, width } => states.push((
            None,
            State::gaussian_bump(sys.grid(), *center, *width)?.into_vec(),
        )),
        StateSource::Explicit { values } => states.push((None, State::new(values.clone())?.into_vec())),
        StateSource::Random { count } => {
            for _ in 0..*count {
                states.push((None, State::sample(sys.grid().node_count(), &mut rng).into_vec()));
            }
        }
        StateSource::Simulate {
            rho0,
            t_end,
            tol,
            samples,
        } => {
            let rho0 = rho0.build(sys.grid(), &mut rng)?;
            let traj = flow::integrate(&sys, &rho0, *t_end, *tol)?;
            let count = (*samples).max(1);
            for k in 0..count {
                let idx = (k * (traj.times.len() - 1)) / count.max(1);
                states.push((Some(traj.times[idx]), traj.states[idx].clone()));
            }
        }
    }

    let lambda_policy = match (cfg.lambda, sys.quadratic_gamma()) {
        (Some(l), _) => format!("fixed ({l})"),
        (None, Some(_)) => "lambda_h per state".to_string(),
        (None, None) => "0".to_string(),
    };

    let certify_one = |(index, (time, rho)): (usize, &(Option<f64>, Vec<f64>))| -> Result<ConvexityStateReport> {
        let tm = convexity::assemble_tilde_m(&sys, rho)?;
        let l = sys.edge_conductivity(rho)?;
        let lambda = match cfg.lambda {
            Some(l) => l,
            None => match sys.quadratic_gamma() {
                Some(_) => convexity::lambda_h(&sys, rho)?,
                None => 0.0,
            },
        };
        Ok(ConvexityStateReport {
            index,
            time: *time,
            report: convexity::certify(&tm, &l, lambda)?,
        })
    };

    let reports: Vec<ConvexityStateReport> = if jobs > 1 {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build()?;
        pool.install(|| {
            states
                .par_iter()
                .enumerate()
                .map(certify_one)
                .collect::<Result<Vec<_>>>()
        })?
    } else {
        states
            .iter()
            .enumerate()
            .map(certify_one)
            .collect::<Result<Vec<_>>>()?
    };

    let all_certified = reports.iter().all(|r| r.report.certified());
    let report = ConvexityCommandReport {
        n: cfg.system.n,
        path: format!("{:?}", cfg.system.path),
        lambda_policy,
        states: reports,
        all_certified,
    };
    write_json(out, "convexity.json", &report)?;
    Ok(if all_certified { 0 } else { 2 })
}

#[derive(Serialize)]
struct GeodesicReport {
    n: usize,
    w: f64,
    action: f64,
    residual: f64,
    method: geodesics::SolveMethod,
    lambda: f64,
    convexity_check: geodesics::VerificationReport,
}

pub fn geodesic(cfg: &GeodesicConfig, out: &Path, seed: u64) -> Result<i32> {
    let sys = cfg.system.build()?;
    let mut rng = rng_for(seed, 2);
    let rho0 = cfg.rho0.build(sys.grid(), &mut rng)?;
    let rho1 = cfg.rho1.build(sys.grid(), &mut rng)?;

    let path = match geodesics::shoot_sampled(&sys, &rho0, &rho1, cfg.tol, cfg.samples) {
        Ok(p) => p,
        Err(e @ Error::GeodesicFailure { .. }) => {
            eprintln!("{e}");
            return Ok(3);
        }
        Err(e) => return Err(e.into()),
    };

    let lambda = match cfg.lambda {
        Some(l) => l,
        None => match sys.quadratic_gamma() {
            Some(_) => path
                .states
                .iter()
                .map(|s| convexity::lambda_h(&sys, s))
                .collect::<entroflow::Result<Vec<f64>>>()?
                .into_iter()
                .fold(f64::INFINITY, f64::min),
            None => 0.0,
        },
    };
    let check = geodesics::verify_along_path(&sys, &path, lambda)?;

    let n1 = sys.grid().node_count();
    let mut rows = Vec::with_capacity(path.times.len());
    for k in 0..path.times.len() {
        let mut row = vec![path.times[k]];
        row.extend_from_slice(&path.states[k]);
        row.extend_from_slice(&path.momenta[k]);
        row.push(path.speeds[k]);
        rows.push(row);
    }
    let mut header = String::from("t");
    for i in 0..n1 {
        header.push_str(&format!(",rho_{i}"));
    }
    for i in 0..n1 {
        header.push_str(&format!(",psi_{i}"));
    }
    header.push_str(",speed");
    write_csv(out, "geodesic.csv", &header, &rows)?;

    let report = GeodesicReport {
        n: cfg.system.n,
        w: path.distance(),
        action: path.action,
        residual: path.boundary_residual,
        method: path.method,
        lambda,
        convexity_check: check,
    };
    let ok = report.convexity_check.chord_ok
        && report.convexity_check.differential_ok
        && report.convexity_check.formula_ok;
    write_json(out, "geodesic.json", &report)?;
    Ok(if ok { 0 } else { 2 })
}

#[derive(Serialize)]
struct LambdaReport {
    n: usize,
    h: f64,
    gamma: f64,
    lambda_h: f64,
    min_dphi: f64,
    max_grad_dphi: f64,
    /// Whether φ' ∘ φ⁻¹ is nonincreasing (the convexity hypothesis).
    hypothesis_nonincreasing: bool,
}

pub fn lambda(cfg: &LambdaConfig, out: &Path, seed: u64) -> Result<i32> {
    let grid = entroflow::markov::Grid::new(cfg.n)?;
    let potential = cfg.potential.build()?;
    let gamma = match potential {
        Potential::Quadratic { gamma } => gamma,
        _ => anyhow::bail!("lambda needs the quadratic potential with gamma > 0"),
    };
    let phi = cfg.phi.build()?;
    let sys = FlowSystem::fokker_planck(grid, potential, phi)?;
    let mut rng = rng_for(seed, 3);
    let state = cfg.state.build(sys.grid(), &mut rng)?;
    let value = convexity::lambda_h(&sys, &state)?;

    let h = sys.grid().h();
    let dphi: Vec<f64> = state.iter().map(|&r| phi.d1(r)).collect();
    let report = LambdaReport {
        n: cfg.n,
        h,
        gamma,
        lambda_h: value,
        min_dphi: dphi.iter().cloned().fold(f64::INFINITY, f64::min),
        max_grad_dphi: dphi
            .windows(2)
            .map(|p| ((p[1] - p[0]) / h).abs())
            .fold(0.0, f64::max),
        hypothesis_nonincreasing: phi.dphi_of_inverse_nonincreasing(),
    };
    write_json(out, "lambda.json", &report)?;
    Ok(0)
}

#[derive(Serialize)]
struct CoefficientEntry {
    exponents: [u8; 5],
    numerator: i64,
    denominator: i64,
    value: f64,
}

#[derive(Serialize)]
struct CounterexampleReport {
    coefficients: Vec<CoefficientEntry>,
    matches_reference: bool,
    draws: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    witness: Option<counterexample::Witness>,
}

pub fn counterexample_cmd(cfg: &CounterexampleConfig, out: &Path, seed: u64) -> Result<i32> {
    let poly = counterexample::minor_polynomial();
    let reference = counterexample::reference_coefficients();
    let matches_reference = poly == reference;

    let coefficients = poly
        .iter()
        .map(|(exps, q)| CoefficientEntry {
            exponents: *exps,
            numerator: *q.numer(),
            denominator: *q.denom(),
            value: *q.numer() as f64 / *q.denom() as f64,
        })
        .collect();

    let witness = counterexample::search_witness(cfg.draws, seed);
    let report = CounterexampleReport {
        coefficients,
        matches_reference,
        draws: cfg.draws,
        witness,
    };
    let has_witness = report.witness.is_some();
    write_json(out, "counterexample.json", &report)?;

    if !matches_reference {
        anyhow::bail!("interpolated polynomial disagrees with the reference table");
    }
    Ok(if has_witness { 2 } else { 0 })
}

#[derive(Serialize)]
struct VerifyMeansReport {
    samples: usize,
    lemma_identities: PropertyReport,
    concavity_log: PropertyReport,
    concavity_power_15: PropertyReport,
    all_passed: bool,
}

pub fn verify_means(cfg: &VerifyMeansConfig, out: &Path, seed: u64) -> Result<i32> {
    // structural identities of the logarithmic mean, aggregated over random
    // points (worst residual per check)
    let mut lemma = PropertyReport::default();
    for k in 0..cfg.samples {
        let mut rng = rng_for(seed, 100 + k as u64);
        let draw = |rng: &mut ChaCha8Rng| -> f64 {
            let e: f64 = rand::Rng::random_range(rng, -1.0..1.0);
            10f64.powf(e)
        };
        let (s, t) = (draw(&mut rng), draw(&mut rng));
        let (a, b) = (draw(&mut rng), draw(&mut rng));
        let grid = means::default_r_grid(t);
        let report = means::check_lemma_a1(s, t, a, b, &grid)?;
        lemma.merge_worst(&report);
    }

    let concavity_log = means::check_concavity(&Mean::Logarithmic, cfg.samples, seed ^ 0x51)?;
    let concavity_power_15 = means::check_concavity(
        &Mean::F(entroflow::means::Density::Power { alpha: 1.5 }),
        cfg.samples,
        seed ^ 0x52,
    )?;

    let all_passed =
        lemma.all_passed() && concavity_log.all_passed() && concavity_power_15.all_passed();
    let report = VerifyMeansReport {
        samples: cfg.samples,
        lemma_identities: lemma,
        concavity_log,
        concavity_power_15,
        all_passed,
    };
    write_json(out, "verify_means.json", &report)?;
    Ok(if all_passed { 0 } else { 2 })
}
