//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails. Pass criterion numbers or name fragments as
//! arguments to run a subset, e.g. `cargo test --test acceptance -- 2 6`.

use std::collections::HashMap;
use std::panic::{self, AssertUnwindSafe};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use voxel_coevo::cli::{cmd_run, RunConfig, STATS_FILE};
use voxel_coevo::evolution::{
    evolve, evolve_nested_baseline, evolve_observed, remove_stagnant, speciate, speciate_with, EvaluatedIndividual,
    EvolutionConfig, SpeciesSet, Status,
};
use voxel_coevo::hyperneat::{build_substrates, express_single, CPPN_INPUTS};
use voxel_coevo::morphology::{body_distance, decode_body, voxel_distance, BodyGrid, VoxelType};
use voxel_coevo::neat::{
    genotypic_distance, mutate, new_minimal_genome, Genome, InnovationRegistry, MutationParams, NodeId, NodeKind,
};
use voxel_coevo::network::CompiledCppn;
use voxel_coevo::physics::{PhysicsParams, SimWorld, TerrainSpec, WorldSetup};
use voxel_coevo::tasks::TaskKind;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(limit: Duration, start: Instant) -> Result<(), String> {
    ensure(start.elapsed() < limit, || format!("took {:.1?}, limit {limit:?}", start.elapsed()))
}

/// Random CPPN genomes grown by repeated mutation from one shared registry.
fn random_genomes(count: usize, inputs: usize, max_mutations: usize, seed: u64) -> Vec<Genome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut registry = InnovationRegistry::new(inputs, 1);
    let params = MutationParams::default();
    (0..count)
        .map(|_| {
            let mut g = new_minimal_genome(inputs, 1, &mut rng).unwrap();
            for _ in 0..rng.random_range(0..=max_mutations) {
                g = mutate(&g, &mut registry, &params, &mut rng);
            }
            g
        })
        .collect()
}

/// Recursive evaluation straight off the genome graph.
fn oracle_node(g: &Genome, id: NodeId, inputs: &[f64]) -> f64 {
    let node = g.nodes.iter().find(|n| n.id == id).unwrap();
    if node.kind == NodeKind::Input {
        return inputs[id.0 as usize];
    }
    let sum = g
        .connections
        .iter()
        .filter(|c| c.enabled && c.target == id)
        .map(|c| c.weight * oracle_node(g, c.source, inputs))
        .sum::<f64>()
        + node.bias;
    node.activation.unwrap().apply(sum)
}

fn c1_cppn_oracle() -> Outcome {
    let start = Instant::now();
    let genomes = random_genomes(100, CPPN_INPUTS, 40, 11);
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut max_diff: f64 = 0.0;
    let mut hidden = 0;
    for g in &genomes {
        hidden += g.hidden_count();
        let net = CompiledCppn::compile(g).map_err(|e| e.to_string())?;
        let out = NodeId(g.input_count as u32);
        for _ in 0..100 {
            let x: Vec<f64> = (0..CPPN_INPUTS).map(|_| rng.random_range(-3.0..3.0)).collect();
            let got = net.activate(&x).map_err(|e| e.to_string())?[0];
            max_diff = max_diff.max((got - oracle_node(g, out, &x)).abs());
        }
    }
    ensure(max_diff < 1e-9, || format!("max abs diff {max_diff:e}"))?;
    ensure(hidden > 100, || format!("only {hidden} hidden nodes across the sample"))?;
    within(Duration::from_secs(10), start)?;
    Ok(format!("max abs diff {max_diff:e} over 10^4 queries, {hidden} hidden nodes"))
}

fn c2_substrate_counts() -> Outcome {
    let (morph, ctrl) = build_substrates(52, 5).map_err(|e| e.to_string())?;
    ensure(morph.layer_sizes() == vec![2, 3, 5], || format!("morphology layers {:?}", morph.layer_sizes()))?;
    ensure(ctrl.layer_sizes() == vec![52, 25, 25], || format!("controller layers {:?}", ctrl.layer_sizes()))?;
    let g = &random_genomes(1, CPPN_INPUTS, 10, 21)[0];
    let m = express_single(g, &morph).map_err(|e| e.to_string())?;
    let c = express_single(g, &ctrl).map_err(|e| e.to_string())?;
    let dense = |l: &[usize]| l.windows(2).map(|w| w[0] * w[1]).sum::<usize>();
    ensure(m.connection_count() == 21 && dense(m.layers()) == 21, || format!("morphology has {}", m.connection_count()))?;
    ensure(c.connection_count() == 1925 && dense(c.layers()) == 1925, || format!("controller has {}", c.connection_count()))?;
    Ok("morphology 21, walker controller 1925".into())
}

fn case_value(a: VoxelType, b: VoxelType) -> f64 {
    match (a == VoxelType::Empty, b == VoxelType::Empty) {
        _ if a == b => 0.0,
        (true, false) | (false, true) => 1.0,
        _ => 0.5,
    }
}

fn random_grid(rng: &mut ChaCha8Rng, n: usize, empty_prob: f64) -> BodyGrid {
    let cells = (0..n * n)
        .map(|_| if rng.random_bool(empty_prob) { VoxelType::Empty } else { VoxelType::ALL[rng.random_range(1..5)] })
        .collect();
    BodyGrid::new(n, cells).unwrap()
}

fn c3_distance_suite() -> Outcome {
    use VoxelType::*;
    ensure(voxel_distance(Soft, Soft) == 0.0, || "same type".into())?;
    ensure(voxel_distance(Rigid, VerticalActuator) == 0.5, || "two occupied types".into())?;
    ensure(voxel_distance(Empty, HorizontalActuator) == 1.0, || "empty vs occupied".into())?;
    ensure(voxel_distance(HorizontalActuator, Empty) == 1.0, || "occupied vs empty".into())?;
    let full = BodyGrid::filled(5, Rigid);
    let none = BodyGrid::filled(5, Empty);
    ensure(body_distance(&full, &none).unwrap() == 25.0, || "upper bound not reached".into())?;
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..2000 {
        let a = random_grid(&mut rng, 5, 0.4);
        let b = if rng.random_bool(0.1) { a.clone() } else { random_grid(&mut rng, 5, 0.4) };
        let d = body_distance(&a, &b).unwrap();
        let oracle: f64 = a.cells().iter().zip(b.cells()).map(|(&x, &y)| case_value(x, y)).sum();
        ensure(d == oracle, || format!("distance {d} vs oracle {oracle}"))?;
        ensure(d == body_distance(&b, &a).unwrap(), || "not symmetric".into())?;
        ensure((0.0..=25.0).contains(&d), || format!("{d} out of [0, 25]"))?;
        ensure((d == 0.0) == (a == b), || "identity of indiscernibles".into())?;
    }
    Ok("cases {0, 0.5, 1}, bound 25, 2000 random pairs".into())
}

fn individual(genome: Genome, body: BodyGrid) -> EvaluatedIndividual {
    let status = match body.validate() {
        Ok(()) => Status::Skipped,
        Err(e) => Status::Invalid(e),
    };
    EvaluatedIndividual { genome, phenotypes: None, body, fitness: None, status, controller_genome: None }
}

fn c4_degeneracy() -> Outcome {
    let start = Instant::now();
    let (morph, _) = build_substrates(52, 5).unwrap();
    let pop: Vec<_> = random_genomes(128, CPPN_INPUTS, 12, 41)
        .into_iter()
        .map(|g| {
            let body = decode_body(&express_single(&g, &morph).unwrap(), 5).unwrap();
            individual(g, body)
        })
        .collect();
    let v0 = EvolutionConfig { body_coefficient: 0.0, compat_threshold: 1.0, ..Default::default() };
    let hybrid = speciate(&pop, &SpeciesSet::default(), &v0, 0);
    let genotypic = speciate_with(&pop, &SpeciesSet::default(), v0.compat_threshold, 0, |ind, rep| {
        genotypic_distance(&ind.genome, &rep.genome, v0.distance)
    });
    ensure(hybrid.assignment(128) == genotypic.assignment(128), || "partitions differ".into())?;
    // the second generation starts from carried-over representatives
    let hybrid2 = speciate(&pop[..].iter().rev().cloned().collect::<Vec<_>>(), &hybrid, &v0, 1);
    let genotypic2 = speciate_with(&pop.iter().rev().cloned().collect::<Vec<_>>(), &genotypic, v0.compat_threshold, 1, |ind, rep| {
        genotypic_distance(&ind.genome, &rep.genome, v0.distance)
    });
    ensure(hybrid2.assignment(128) == genotypic2.assignment(128), || "carried-over partitions differ".into())?;
    let with_body = speciate(&pop, &SpeciesSet::default(), &EvolutionConfig { body_coefficient: 1.0, ..v0.clone() }, 0);
    within(Duration::from_secs(30), start)?;
    Ok(format!("{} species with v = 0 (v = 1 gives {})", hybrid.len(), with_body.len()))
}

/// Depth-first connectivity and actuator check.
fn admissible(body: &BodyGrid) -> bool {
    let n = body.size();
    let occupied = |r: usize, c: usize| body.get(r, c) != VoxelType::Empty;
    let mut seen = vec![vec![false; n]; n];
    fn visit(r: usize, c: usize, n: usize, seen: &mut [Vec<bool>], occ: &dyn Fn(usize, usize) -> bool) -> usize {
        if seen[r][c] || !occ(r, c) {
            return 0;
        }
        seen[r][c] = true;
        let mut total = 1;
        if r > 0 {
            total += visit(r - 1, c, n, seen, occ);
        }
        if r + 1 < n {
            total += visit(r + 1, c, n, seen, occ);
        }
        if c > 0 {
            total += visit(r, c - 1, n, seen, occ);
        }
        if c + 1 < n {
            total += visit(r, c + 1, n, seen, occ);
        }
        total
    }
    let cells: Vec<(usize, usize)> = (0..n).flat_map(|r| (0..n).map(move |c| (r, c))).filter(|&(r, c)| occupied(r, c)).collect();
    let Some(&(r0, c0)) = cells.first() else { return false };
    let reached = visit(r0, c0, n, &mut seen, &occupied);
    let actuated = cells
        .iter()
        .any(|&(r, c)| matches!(body.get(r, c), VoxelType::HorizontalActuator | VoxelType::VerticalActuator));
    reached == cells.len() && actuated
}

fn c5_validity_filter() -> Outcome {
    let start = Instant::now();
    let (morph, _) = build_substrates(52, 5).unwrap();
    let genomes = random_genomes(10_000, CPPN_INPUTS, 20, 51);
    let verdicts: Vec<(bool, bool)> = genomes
        .par_iter()
        .map(|g| {
            let body = decode_body(&express_single(g, &morph).unwrap(), 5).unwrap();
            (individual(g.clone(), body.clone()).is_valid(), admissible(&body))
        })
        .collect();
    let disagreements = verdicts.iter().filter(|(a, b)| a != b).count();
    let admitted = verdicts.iter().filter(|v| v.0).count();
    ensure(disagreements == 0, || format!("{disagreements} disagreements with the oracle"))?;
    ensure(admitted > 0 && admitted < 10_000, || format!("{admitted} admitted, sample is one-sided"))?;
    within(Duration::from_secs(120), start)?;
    Ok(format!("{admitted} admitted, {} rejected, 0 disagreements", 10_000 - admitted))
}

fn random_valid_body(rng: &mut ChaCha8Rng) -> BodyGrid {
    loop {
        let b = random_grid(rng, 5, 0.35);
        if b.is_valid() {
            return b;
        }
    }
}

/// Five seconds of settling before the at-rest window.
const SETTLE_STEPS: usize = 100;

fn c6_physics() -> Outcome {
    let start = Instant::now();
    let p = PhysicsParams::default();
    let single = BodyGrid::from_rows(&[".....", ".....", "..H..", ".....", "....."]).unwrap();

    // (a) free fall for 0.5 s
    let mut w = SimWorld::build(&single, &WorldSetup::on(TerrainSpec::Open, 0.0), &p).map_err(|e| e.to_string())?;
    let y0 = w.observe().com[1];
    for _ in 0..10 {
        w.step(p.control_dt).map_err(|e| e.to_string())?;
    }
    let drop = y0 - w.observe().com[1];
    let expected = 0.5 * 9.8 * 0.25;
    let fall_err = (drop - expected).abs() / expected;
    ensure(fall_err < 0.01, || format!("(a) fell {drop}, expected {expected}"))?;

    // (b) single voxel released with its bottom 0.3 m above ground
    let mut w = SimWorld::build(&single, &WorldSetup::on(TerrainSpec::Flat { height: 0.0 }, 0.0), &p).unwrap();
    let bottom = w.observe().bounds_min[1];
    w.translate(0.0, 0.3 - bottom);
    for _ in 0..200 {
        w.step(p.control_dt).map_err(|e| e.to_string())?;
    }
    let rest = w.observe().com[1];
    ensure((rest - 0.05).abs() <= 0.005, || format!("(b) settled at {rest}"))?;

    // (c) zero-action drift of random bodies once at rest
    let mut rng = ChaCha8Rng::seed_from_u64(61);
    let bodies: Vec<BodyGrid> = (0..30).map(|_| random_valid_body(&mut rng)).collect();
    let drift = bodies
        .par_iter()
        .map(|b| {
            let mut w = SimWorld::build(b, &WorldSetup::on(TerrainSpec::Flat { height: 0.0 }, 0.0), &p).unwrap();
            w.apply_actions(&[0.0; 25]).unwrap();
            // let top-heavy bodies tip over and come to rest first
            for _ in 0..SETTLE_STEPS {
                w.step(p.control_dt).unwrap();
            }
            let x0 = w.observe().com[0];
            for _ in 0..500 {
                w.step(p.control_dt).unwrap();
            }
            (w.observe().com[0] - x0).abs()
        })
        .reduce(|| 0.0, f64::max);
    ensure(drift < 0.02, || format!("(c) drift {drift}"))?;

    // (d) randomized actions on 100 random bodies, 1000 steps each
    let bodies: Vec<(u64, BodyGrid)> = (0..100).map(|i| (i, random_valid_body(&mut rng))).collect();
    let failures: usize = bodies
        .par_iter()
        .map(|(i, b)| {
            let mut rng = ChaCha8Rng::seed_from_u64(1000 + i);
            let mut w = SimWorld::build(b, &WorldSetup::on(TerrainSpec::Flat { height: 0.0 }, 0.0), &p).unwrap();
            let mut actions = [0.0; 25];
            for _ in 0..1000 {
                for a in &mut actions {
                    *a = rng.random_range(-1.0..=1.0);
                }
                w.apply_actions(&actions).unwrap();
                if w.step(p.control_dt).is_err() {
                    return 1;
                }
            }
            let finite = w.points().iter().all(|q| q.position.iter().chain(&q.velocity).all(|v| v.is_finite()));
            usize::from(!finite)
        })
        .sum();
    ensure(failures == 0, || format!("(d) {failures} of 100 bodies produced non-finite state"))?;
    within(Duration::from_secs(300), start)?;
    Ok(format!(
        "(a) fall error {:.2}% (b) rest COM {rest:.4} m (c) max drift {drift:.4} m (d) 10^5 steps, no NaN",
        fall_err * 100.0
    ))
}

fn c7_determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cfg = RunConfig::from_value(serde_json::json!({
        "task": "walker",
        "output_dir": dir.path(),
        "seed": 2024,
        "evolution": {"population": 24, "generations": 20, "horizon": 200},
    }))
    .map_err(|e| e.to_string())?;
    let mut files = Vec::new();
    for _ in 0..2 {
        cmd_run(&cfg).map_err(|e| e.to_string())?;
        files.push(std::fs::read(dir.path().join(STATS_FILE)).map_err(|e| e.to_string())?);
    }
    ensure(files[0] == files[1], || "stats files differ".into())?;
    let rows = files[0].iter().filter(|&&b| b == b'\n').count();
    ensure(rows == 22, || format!("{rows} lines, expected echo + header + 20 rows"))?;
    Ok(format!("{} identical bytes", files[0].len()))
}

fn efficacy_config(seed: u64) -> EvolutionConfig {
    EvolutionConfig { population: 24, generations: 30, horizon: Some(200), seed, ..Default::default() }
}

fn c8_efficacy() -> Outcome {
    let mut passing = 0;
    let mut lines = Vec::new();
    for seed in 0..5 {
        let cfg = efficacy_config(seed);
        let run = evolve(&cfg, &cfg.task(TaskKind::Walker)).map_err(|e| e.to_string())?;
        ensure(run.stats.len() == 30, || format!("seed {seed}: {} generations", run.stats.len()))?;
        for w in run.stats.windows(2) {
            ensure(w[1].best >= w[0].best, || format!("seed {seed}: best fell from {} to {}", w[0].best, w[1].best))?;
        }
        let (first, last) = (run.stats[0].best, run.stats[29].best);
        let ratio = last / first;
        if first > 0.0 && ratio >= 2.0 {
            passing += 1;
        }
        lines.push(format!("{seed}:{first:.2}->{last:.2}"));
    }
    let summary = format!("{passing}/5 seeds at 2x [{}], monotone in all", lines.join(" "));
    ensure(passing >= 3, || summary.clone())?;
    Ok(summary)
}

/// Matched budget: what 30 generations of 24 individuals could spend.
const MATCHED_BUDGET: u64 = 24 * 30;

fn c9_baseline_ordering() -> Outcome {
    let mut wins = 0;
    let mut lines = Vec::new();
    for seed in 0..5 {
        let cfg = EvolutionConfig { generations: 10_000, max_evaluations: Some(MATCHED_BUDGET), ..efficacy_config(seed) };
        let task = cfg.task(TaskKind::Walker);
        let hyper = evolve(&cfg, &task).map_err(|e| e.to_string())?;
        let nested = evolve_nested_baseline(&cfg, &task).map_err(|e| e.to_string())?;
        let best = |r: &voxel_coevo::evolution::RunArtifacts| r.best.as_ref().map_or(f64::NEG_INFINITY, |c| c.fitness);
        let spent = |r: &voxel_coevo::evolution::RunArtifacts| r.stats.last().map_or(0, |s| s.evaluations_cumulative);
        ensure(spent(&hyper) >= MATCHED_BUDGET && spent(&nested) == MATCHED_BUDGET, || {
            format!("seed {seed}: budgets {} / {}", spent(&hyper), spent(&nested))
        })?;
        let (h, n) = (best(&hyper), best(&nested));
        if h >= n {
            wins += 1;
        }
        lines.push(format!("{seed}:{h:.2}vs{n:.2}"));
    }
    let summary = format!("hyperneat >= nested in {wins}/5 seeds at {MATCHED_BUDGET} episodes [{}]", lines.join(" "));
    ensure(wins >= 3, || summary.clone())?;
    Ok(summary)
}

fn c10_bookkeeping() -> Outcome {
    let cfg = EvolutionConfig { population: 24, generations: 12, horizon: Some(60), seed: 101, ..Default::default() };
    let mut generations = 0;
    let mut checked_parents = 0;
    let mut problems: Vec<String> = Vec::new();
    evolve_observed(&cfg, &cfg.task(TaskKind::Walker), &mut |r| {
        generations += 1;
        let g = r.stats.generation;
        if r.population.len() != 24 {
            problems.push(format!("gen {g}: population {}", r.population.len()));
        }
        if r.species.is_empty() {
            problems.push(format!("gen {g}: no species"));
        }
        let members: usize = r.species.species.iter().map(|s| s.members.len()).sum();
        if members != 24 {
            problems.push(format!("gen {g}: {members} speciated"));
        }
        if let Some(off) = r.offspring {
            if off.genomes.len() != 24 {
                problems.push(format!("gen {g}: {} offspring", off.genomes.len()));
            }
            for &p in off.parents.iter().chain(&off.elites) {
                checked_parents += 1;
                if !r.population[p].is_valid() || r.population[p].fitness.is_none() {
                    problems.push(format!("gen {g}: invalid parent {p}"));
                }
            }
        }
        Ok(())
    })
    .map_err(|e| e.to_string())?;
    ensure(problems.is_empty(), || problems.join("; "))?;
    ensure(generations == 12 && checked_parents > 0, || format!("{generations} generations, {checked_parents} parents"))?;

    // two species that never improve: only the fitter one survives stagnation
    let genome = random_genomes(1, CPPN_INPUTS, 0, 102).remove(0);
    let a = BodyGrid::from_rows(&[".....", ".....", "#HHH#", "#...#", "....."]).unwrap();
    let mut b = a.clone();
    for c in 0..5 {
        b.set(0, c, VoxelType::Soft);
    }
    let pop: Vec<_> = (0..8)
        .map(|i| {
            let mut ind = individual(genome.clone(), if i < 4 { b.clone() } else { a.clone() });
            ind.fitness = Some(if i < 4 { 1.0 } else { 5.0 });
            ind.status = Status::Evaluated;
            ind
        })
        .collect();
    let cfg = EvolutionConfig { population: 8, ..Default::default() };
    let mut set = speciate(&pop, &SpeciesSet::default(), &cfg, 0);
    ensure(set.len() == 2, || format!("{} species in the stagnation fixture", set.len()))?;
    remove_stagnant(&mut set, &pop, &cfg, 0);
    let removed = remove_stagnant(&mut set, &pop, &cfg, cfg.max_stagnation + 1);
    ensure(removed.len() == 1 && set.len() == 1 && set.species[0].members.contains(&4), || "best species not spared".into())?;
    Ok(format!("{generations} generations, {checked_parents} parent/elite slots checked, stagnation spares best"))
}

fn main() {
    let criteria: [(u32, &str, fn() -> Outcome); 10] = [
        (1, "cppn oracle", c1_cppn_oracle),
        (2, "substrate counts", c2_substrate_counts),
        (3, "body distance", c3_distance_suite),
        (4, "v=0 degeneracy", c4_degeneracy),
        (5, "validity filter", c5_validity_filter),
        (6, "physics sanity", c6_physics),
        (7, "determinism", c7_determinism),
        (8, "evolution efficacy", c8_efficacy),
        (9, "baseline ordering", c9_baseline_ordering),
        (10, "bookkeeping", c10_bookkeeping),
    ];
    let filters: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let selected = |n: u32, name: &str| filters.is_empty() || filters.iter().any(|f| *f == n.to_string() || name.contains(f.as_str()));

    panic::set_hook(Box::new(|_| {}));
    let mut results: HashMap<u32, bool> = HashMap::new();
    for (n, name, run) in criteria {
        if !selected(n, name) {
            continue;
        }
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let (tag, detail) = match &outcome {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        println!("criterion {n:>2} {name:<20} {tag}  {detail} ({:.1?})", start.elapsed());
        results.insert(n, outcome.is_ok());
    }
    let failed = results.values().filter(|ok| !**ok).count();
    println!("{} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
