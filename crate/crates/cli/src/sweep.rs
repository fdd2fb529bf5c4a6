//! Batch experiments. Instances fan out over a bounded worker pool; rows are
//! written in instance order and flushed after every batch, so an
//! interrupted run keeps what it finished.

use std::fs::File;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use ising_coupling::constructions::{union_of_stars, weighted_edge_by_edge};
use ising_coupling::exact::{solve_l0, solve_l1, BigMKind, Engine, L0Options, SolveStatus};
use ising_coupling::graph::{catalog, enumerate_labeled_graphs, random_er_graph};
use ising_coupling::qaoa::{optimize_angles, Compilation, NoiseSpec, QaoaCircuit};
use ising_coupling::scalar::{format_rational, int};
use ising_coupling::{Graph, MergePolicy, Rational};

use crate::commands::{ms_sequence, parse, seconds};
use crate::config::Config;
use crate::failure::{CliResult, Failure, EXIT_OK, EXIT_TIMEOUT};
use crate::manifest::RunManifest;
use crate::SweepArgs;

#[derive(Debug, Serialize)]
struct RandomRow {
    graph_id: usize,
    p: f64,
    seed: u64,
    n: usize,
    m: usize,
    #[serde(rename = "L0_construction")]
    l0_construction: usize,
    #[serde(rename = "L0_opt")]
    l0_opt: usize,
    status: String,
    #[serde(rename = "L1_construction")]
    l1_construction: String,
    #[serde(rename = "L1_opt")]
    l1_opt: String,
    time_ms: f64,
}

#[derive(Debug, Serialize)]
struct WorstCaseRow {
    n: usize,
    labeled_graphs: u64,
    classes: usize,
    #[serde(rename = "max_L0_opt")]
    max_l0_opt: usize,
    n_plus_1: usize,
    timeouts: usize,
}

#[derive(Debug, Serialize)]
struct NoiseRow {
    graph_id: &'static str,
    compilation: Compilation,
    lambda: f64,
    gamma: f64,
    beta: f64,
    expectation: f64,
    ratio: f64,
}

/// Stand-ins for the noise experiment: sparse to dense on six vertices.
fn noise_graphs() -> Vec<(&'static str, Graph<Rational>)> {
    vec![
        ("star_k1_5", Graph::star(6)),
        ("cycle_c6", Graph::cycle(6)),
        ("complete_k6", Graph::complete(6)),
        ("two_hub", catalog::two_hub_graph()),
    ]
}

pub fn run(a: &SweepArgs, config: &mut Config) -> CliResult<u8> {
    let s = &mut config.sweep;
    for (flag, slot) in [
        (a.n, &mut s.n),
        (a.graphs_per_p, &mut s.graphs_per_p),
        (a.p_count, &mut s.p_count),
    ] {
        if let Some(v) = flag {
            *slot = v;
        }
    }
    if let Some(v) = a.max_n {
        s.max_worstcase_n = v;
    }
    if let Some(v) = a.time_limit {
        s.time_limit_s = v;
    }
    if let Some(v) = &a.lambda_grid {
        s.lambda_grid = v.clone();
    }
    if let Some(v) = a.grid_res {
        s.grid_res = v;
    }
    if let Some(v) = a.jobs {
        s.jobs = v;
    }
    let started = Instant::now();
    std::fs::create_dir_all(&a.out).map_err(|e| Failure::io(&a.out, e))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.sweep.jobs)
        .build()
        .map_err(|e| Failure::failed(format!("thread pool: {e}")))?;
    let csv_path = a.out.join(format!("{}.csv", a.kind));
    let timeouts = pool.install(|| match a.kind.as_str() {
        "fig_random_unweighted" => random_sweep(config, false, &csv_path),
        "fig_random_weighted" => random_sweep(config, true, &csv_path),
        "fig_worstcase" => worst_case(config, &csv_path),
        "fig_noise" => noise(config, &csv_path),
        other => Err(Failure::usage(format!(
            "unknown sweep {other:?} (expected fig_random_unweighted, fig_random_weighted, fig_worstcase or fig_noise)"
        ))),
    })?;
    let mut manifest = RunManifest::new("sweep", config);
    manifest.outputs.push(csv_path.clone());
    manifest.write_to(&a.out.join(format!("{}.manifest.json", a.kind)), started.elapsed())?;
    println!("wrote {} (timeouts: {timeouts})", csv_path.display());
    Ok(if timeouts > 0 { EXIT_TIMEOUT } else { EXIT_OK })
}

fn options(config: &Config) -> CliResult<L0Options> {
    Ok(L0Options {
        big_m: parse::<BigMKind>(&config.optimize.big_m)?,
        engine: parse::<Engine>(&config.optimize.engine)?,
        time_limit: seconds(config.sweep.time_limit_s)?,
        ..L0Options::default()
    })
}

/// Maps `work` over `items` in parallel batches, writing each batch's rows
/// in order before starting the next.
fn write_batched<I: Sync, R: Serialize + Send>(
    path: &Path,
    items: &[I],
    work: impl Fn(&I) -> CliResult<R> + Sync,
) -> CliResult<Vec<R>> {
    let file = File::create(path).map_err(|e| Failure::io(path, e))?;
    let mut writer = csv::Writer::from_writer(file);
    let batch = rayon::current_num_threads().max(1);
    let mut all = Vec::with_capacity(items.len());
    for chunk in items.chunks(batch) {
        let rows: Vec<R> = chunk.par_iter().map(&work).collect::<CliResult<_>>()?;
        for row in &rows {
            writer.serialize(row)?;
        }
        writer.flush().map_err(|e| Failure::io(path, e))?;
        all.extend(rows);
    }
    Ok(all)
}

fn random_sweep(config: &Config, weighted: bool, path: &Path) -> CliResult<usize> {
    let s = &config.sweep;
    let opts = options(config)?;
    let weights: Vec<Rational> = if weighted {
        s.weights.iter().map(|&w| int(w)).collect()
    } else {
        Vec::new()
    };
    let instances: Vec<(usize, f64, u64)> = (0..s.p_count * s.graphs_per_p)
        .map(|i| (i, s.p_step * (i / s.graphs_per_p + 1) as f64, config.seed + i as u64))
        .collect();
    let rows = write_batched(path, &instances, |&(graph_id, p, seed)| {
        let p = p.min(1.0);
        let g = random_er_graph(s.n, p, &weights, seed)?;
        let construction = if weighted {
            weighted_edge_by_edge(&g, MergePolicy::Identical)
        } else {
            union_of_stars(&g, MergePolicy::Identical)?
        };
        let t = Instant::now();
        let l0 = solve_l0(&g, &opts)?;
        let l1 = solve_l1(&g)?;
        Ok(RandomRow {
            graph_id,
            p,
            seed,
            n: g.n(),
            m: g.m(),
            l0_construction: construction.l0(),
            l0_opt: l0.sequence.l0(),
            status: l0.status.to_string(),
            l1_construction: format_rational(&construction.l1()),
            l1_opt: format_rational(&l1.objective),
            time_ms: t.elapsed().as_secs_f64() * 1e3,
        })
    })?;
    Ok(rows
        .iter()
        .filter(|r| r.status == SolveStatus::IncumbentTimeout.to_string())
        .count())
}

fn worst_case(config: &Config, path: &Path) -> CliResult<usize> {
    let opts = options(config)?;
    let sizes: Vec<usize> = (3..=config.sweep.max_worstcase_n).collect();
    let rows = write_batched(path, &sizes, |&n| {
        let classes: Vec<Graph<Rational>> = enumerate_labeled_graphs(n, true)?.collect();
        let solved = classes
            .par_iter()
            .map(|g| solve_l0(g, &opts).map(|r| (r.sequence.l0(), r.status)))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(WorstCaseRow {
            n,
            labeled_graphs: 1 << (n * (n - 1) / 2),
            classes: classes.len(),
            max_l0_opt: solved.iter().map(|r| r.0).max().unwrap_or(0),
            n_plus_1: n + 1,
            timeouts: solved.iter().filter(|r| r.1 == SolveStatus::IncumbentTimeout).count(),
        })
    })?;
    Ok(rows.iter().map(|r| r.timeouts).sum())
}

fn noise(config: &Config, path: &Path) -> CliResult<usize> {
    let s = &config.sweep;
    let mut points = Vec::new();
    for (id, g) in noise_graphs() {
        let seq = ms_sequence(&g);
        for compilation in [Compilation::Cx, Compilation::Ms] {
            let circuit = QaoaCircuit::<f64>::new(&g, compilation, Some(&seq))?;
            for &lambda in &s.lambda_grid {
                points.push((id, circuit.clone(), lambda));
            }
        }
    }
    write_batched(path, &points, |(id, circuit, lambda)| {
        let best = optimize_angles(circuit, &NoiseSpec::from_lambda(*lambda)?, s.grid_res)?;
        Ok(NoiseRow {
            graph_id: id,
            compilation: circuit.compilation(),
            lambda: *lambda,
            gamma: best.gamma,
            beta: best.beta,
            expectation: best.expectation,
            ratio: best.ratio,
        })
    })?;
    Ok(0)
}
