use std::path::Path;
use std::str::FromStr;
use std::time::{Duration, Instant};

use ising_coupling::constructions::{compile as build, Method};
use ising_coupling::cost::{estimate_time, worst_case_unweighted, TimingParams};
use ising_coupling::exact::{
    solve_l0, solve_l1, subsample_solve, BigMKind, Engine, L0Options, ObjectiveKind, OptResult, SolveStatus,
};
use ising_coupling::graph::{graph_to_json, parse_graph, random_er_graph, serialize_edge_list};
use ising_coupling::qaoa::{optimize_angles, Compilation, NoiseSpec, QaoaCircuit};
use ising_coupling::scalar::{format_rational, parse_rational, rational_to_f64};
use ising_coupling::{Error, Graph, MergePolicy, PulseSequence, Rational};

use crate::config::Config;
use crate::failure::{CliResult, Failure, EXIT_FAILED, EXIT_OK, EXIT_TIMEOUT};
use crate::manifest::RunManifest;
use crate::{CompileArgs, CostArgs, GenArgs, OptimizeArgs, SimulateArgs, VerifyArgs};

pub fn read_graph(path: &Path) -> CliResult<Graph<Rational>> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::io(path, e))?;
    parse_graph(&text).map_err(|e| Failure::from(e).in_file(path))
}

pub fn read_pulse(path: &Path) -> CliResult<PulseSequence<Rational>> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::io(path, e))?;
    PulseSequence::from_json(&text).map_err(|e| Failure::from(e).in_file(path))
}

pub fn parse<T: FromStr<Err = Error>>(text: &str) -> CliResult<T> {
    text.parse().map_err(Failure::from)
}

pub fn seconds(s: f64) -> CliResult<Duration> {
    Duration::try_from_secs_f64(s).map_err(|_| Failure::usage(format!("invalid time limit {s}")))
}

/// Writes `text` to `out` with a manifest beside it and prints `summary`,
/// or prints `text` and sends `summary` to standard error.
fn emit(out: Option<&Path>, text: &str, summary: &str, mut manifest: RunManifest, started: Instant) -> CliResult<()> {
    match out {
        Some(path) => {
            std::fs::write(path, format!("{text}\n")).map_err(|e| Failure::io(path, e))?;
            manifest.outputs.push(path.to_path_buf());
            manifest.write_beside(path, started.elapsed())?;
            println!("{summary}");
        }
        None => {
            println!("{text}");
            eprintln!("{summary}");
        }
    }
    Ok(())
}

pub fn compile(a: &CompileArgs, config: &Config) -> CliResult<u8> {
    let started = Instant::now();
    let g = read_graph(&a.graph)?;
    let method: Method = parse(&a.method)?;
    let policy: MergePolicy = parse(&a.merge)?;
    let seq = build(&g, method, policy)?;
    if let Some((i, j)) = seq.first_mismatch(&g)? {
        return Err(Failure::failed(format!("construction does not realize ({i}, {j})")));
    }
    let bound_name = match method {
        Method::Stars => "3n-2",
        Method::Edges => "3m+1",
    };
    let summary = format!(
        "n={} m={} L0={} L1={} bound={} ({bound_name}) verified=true",
        g.n(),
        g.m(),
        seq.l0(),
        format_rational(&seq.l1()),
        method.l0_bound(&g),
    );
    let mut manifest = RunManifest::new("compile", config);
    manifest.inputs.push(a.graph.clone());
    emit(a.out.as_deref(), &seq.to_json(), &summary, manifest, started)?;
    Ok(EXIT_OK)
}

pub fn optimize(a: &OptimizeArgs, config: &mut Config) -> CliResult<u8> {
    let started = Instant::now();
    if let Some(m) = &a.big_m {
        config.optimize.big_m = m.clone();
    }
    if let Some(t) = a.time_limit {
        config.optimize.time_limit_s = t;
    }
    if let Some(e) = &a.engine {
        config.optimize.engine = e.clone();
    }
    let g = read_graph(&a.graph)?;
    let objective: ObjectiveKind = parse(&a.objective)?;
    let options = L0Options {
        big_m: parse::<BigMKind>(&config.optimize.big_m)?,
        time_limit: seconds(config.optimize.time_limit_s)?,
        engine: parse::<Engine>(&config.optimize.engine)?,
        ..L0Options::default()
    };
    let too_large = |e: Error| match e {
        Error::TooLarge { .. } => {
            Failure::usage(format!("{e}; pass --subsample ROWS to search a random subset of rows"))
        }
        other => Failure::from(other),
    };
    let result: OptResult = match (objective, a.subsample) {
        (ObjectiveKind::L0, None) => solve_l0(&g, &options).map_err(too_large)?,
        (ObjectiveKind::L0, Some(budget)) => subsample_solve(&g, budget, config.seed, &options)?,
        (ObjectiveKind::L1, None) => solve_l1(&g).map_err(too_large)?,
        (ObjectiveKind::L1, Some(_)) => return Err(Failure::usage("--subsample applies to the l0 objective only")),
    };
    if !result.sequence.verify(&g)? {
        return Err(Failure::failed(
            "solver returned a sequence that does not realize the graph",
        ));
    }
    let summary = format!(
        "status={} objective={} L0={} L1={} nodes={} time_ms={:.1}",
        result.status,
        format_rational(&result.objective),
        result.sequence.l0(),
        format_rational(&result.sequence.l1()),
        result.nodes_explored,
        result.wall_time.as_secs_f64() * 1e3,
    );
    let mut manifest = RunManifest::new("optimize", config);
    manifest.inputs.push(a.graph.clone());
    emit(a.out.as_deref(), &result.to_json(), &summary, manifest, started)?;
    Ok(match result.status {
        SolveStatus::IncumbentTimeout => EXIT_TIMEOUT,
        SolveStatus::Infeasible => EXIT_FAILED,
        SolveStatus::Optimal | SolveStatus::Feasible => EXIT_OK,
    })
}

pub fn verify(a: &VerifyArgs) -> CliResult<u8> {
    let seq = read_pulse(&a.pulse)?;
    let g = read_graph(&a.graph)?;
    match seq.first_mismatch(&g)? {
        None => {
            println!("verified n={} L0={} L1={}", g.n(), seq.l0(), format_rational(&seq.l1()));
            Ok(EXIT_OK)
        }
        Some((i, j)) => {
            let got = seq.evaluate().get(i, j).clone();
            println!(
                "mismatch at ({i}, {j}): graph has {}, sequence gives {}",
                format_rational(&g.weight(i, j)),
                format_rational(&got)
            );
            Ok(EXIT_FAILED)
        }
    }
}

pub fn timing_params(config: &Config) -> CliResult<TimingParams<f64>> {
    let t = &config.timing;
    Ok(TimingParams::new(t.t_pi_us, t.t_ising_per_ion_us, t.t_ms_us)?)
}

pub fn cost(a: &CostArgs, config: &mut Config) -> CliResult<u8> {
    for (flag, slot) in [
        (a.t_pi, &mut config.timing.t_pi_us),
        (a.t_ising_per_ion, &mut config.timing.t_ising_per_ion_us),
        (a.t_ms, &mut config.timing.t_ms_us),
    ] {
        if let Some(v) = flag {
            *slot = v;
        }
    }
    let params = timing_params(config)?;
    let (n, l0, l1, us) = match (&a.pulse, a.worst_case) {
        (_, Some(n)) => (
            n,
            (3 * n).saturating_sub(2),
            n.saturating_sub(1) as f64,
            worst_case_unweighted(n, &params),
        ),
        (Some(path), None) => {
            let seq = read_pulse(path)?.canonicalize();
            let seq = seq.map_strengths(rational_to_f64);
            (seq.n(), seq.l0(), seq.l1(), estimate_time(&seq, &params))
        }
        (None, None) => return Err(Failure::usage("give a sequence file or --worst-case N")),
    };
    println!(
        "n={n} L0={l0} L1={l1} flip_rounds={} time_us={us:.3} time_ms={:.6}",
        l0 + 1,
        us / 1e3
    );
    Ok(EXIT_OK)
}

pub fn simulate(a: &SimulateArgs, config: &mut Config) -> CliResult<u8> {
    if let Some(r) = a.grid_res {
        config.sweep.grid_res = r;
    }
    let g = read_graph(&a.graph)?;
    let compilation: Compilation = parse(&a.compilation)?;
    let seq = match (&a.pulse, compilation) {
        (Some(path), _) => Some(read_pulse(path)?),
        (None, Compilation::Ms) => Some(ms_sequence(&g)),
        (None, Compilation::Cx) => None,
    };
    let circuit = QaoaCircuit::<f64>::new(&g, compilation, seq.as_ref())?;
    let noise = NoiseSpec::from_lambda(a.lambda)?;
    let max_cut = circuit.cost().max_cut();
    let (gamma, beta, expectation) = match (a.gamma, a.beta) {
        (Some(gamma), Some(beta)) => (gamma, beta, circuit.expectation(gamma, beta, &noise)?),
        _ => {
            let best = optimize_angles(&circuit, &noise, config.sweep.grid_res)?;
            (best.gamma, best.beta, best.expectation)
        }
    };
    let ratio = if max_cut > 0.0 { expectation / max_cut } else { 0.0 };
    println!(
        "compilation={compilation} lambda={} gamma={gamma:.6} beta={beta:.6} expectation={expectation:.9} max_cut={max_cut} ratio={ratio:.9} entangling_ops={}",
        a.lambda,
        circuit.entangling_count()
    );
    Ok(EXIT_OK)
}

/// The sequence the MS compilation runs by default: the canonical form of
/// the union-of-stars construction, or of edge-by-edge for weighted graphs.
pub fn ms_sequence(g: &Graph<Rational>) -> PulseSequence<Rational> {
    build(g, Method::Stars, MergePolicy::Identical)
        .unwrap_or_else(|_| build(g, Method::Edges, MergePolicy::Identical).expect("edge-by-edge always applies"))
        .canonicalize()
}

pub fn gen(a: &GenArgs, config: &Config) -> CliResult<u8> {
    let weights: Vec<Rational> = a
        .weights
        .iter()
        .flatten()
        .map(|w| parse_rational(w.trim()).ok_or_else(|| Failure::usage(format!("invalid weight {w:?}"))))
        .collect::<CliResult<_>>()?;
    let g = random_er_graph(a.n, a.p, &weights, config.seed)?;
    let text = if a.json {
        graph_to_json(&g)
    } else {
        serialize_edge_list(&g)
    };
    match &a.out {
        Some(path) => {
            std::fs::write(path, &text).map_err(|e| Failure::io(path, e))?;
            let mut manifest = RunManifest::new("gen", config);
            manifest.outputs.push(path.clone());
            manifest.write_beside(path, Duration::ZERO)?;
        }
        None => print!("{text}"),
    }
    Ok(EXIT_OK)
}
