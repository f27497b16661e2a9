use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::sync::Arc;

use iel_avgcase::{
    bucket_claims, build_bucket_sets, heuristic_b, hit_probabilities, light_bucket_family, measure_avg_access,
    two_universal_picking, vv_isolation_probability, ExhaustiveSolver, HeuristicParams, IsolationMode,
    MismatchedWitness, PreimageRelation, QOracle, RandomGuess, RelationQ, Sampler,
};
use iel_constructions::TruncConstruction;
use iel_core::{BitString, FiniteFunction, IelError, Result, Rng};
use iel_entropy::{rational_string, real_entropy_of_domain, real_entropy_of_inverse, LogSum};
use iel_pipeline::params::big_log2;
use iel_pipeline::{
    build_uowhf_avgmax, build_uowhf_shannon, calc_params, fit_exponent, parse_rational, KeyedFamily, PathKind,
    PipelineConfig,
};
use iel_reductions::{
    audit_shannon, function_target, trunc_target, Canonical, CollisionFinder, Identity, Lazy, Optimal, Sampling,
    Strategy, Target,
};
use serde_json::{json, Value};

use crate::args::*;
use crate::report::{Body, Report};

fn load_function(src: &FunctionSource, seed: u64) -> Result<FiniteFunction> {
    if let Some(path) = &src.file {
        return FiniteFunction::read_ffn(path);
    }
    let (n, m) = (src.n, src.m.unwrap_or(src.n));
    let mut rng = Rng::new(seed, 0);
    match src.generator {
        Generator::Perm if m != n => Err(IelError::Config(format!("a permutation needs m = n, got {n} -> {m}"))),
        Generator::Perm => FiniteFunction::random_permutation(n, &mut rng),
        Generator::Random => FiniteFunction::random_function(n, m, &mut rng),
        Generator::Identity if m != n => Err(IelError::Config(format!("identity needs m = n, got {n} -> {m}"))),
        Generator::Identity => FiniteFunction::identity(n),
        Generator::Constant => FiniteFunction::constant(n, m, 0),
    }
}

fn describe_function(f: &FiniteFunction) -> Value {
    json!({"label": f.label(), "n": f.input_len(), "m": f.output_len()})
}

fn bits(v: &LogSum) -> Value {
    json!({"exact": v.to_string(), "bits": v.to_f64()})
}

/// `f(x)_{1..i-1}` as a table.
fn slice_function(f: &FiniteFunction, i: usize) -> Result<FiniteFunction> {
    let (n, m) = (f.input_len(), f.output_len());
    let keep = i - 1;
    let table = (0..1u64 << n).map(|x| f.eval_u64(x) >> (m - keep)).collect();
    FiniteFunction::from_table(n, keep, table, format!("{}[..{keep}]", f.label()))
}

/// Mean and standard error of `log2 |F^-1(F(Z))|` over sampled `Z`.
fn sampled_entropy(counts: &[u64], draws: impl Iterator<Item = u64>) -> (f64, f64) {
    let v: Vec<f64> = draws.map(|z| (counts[z as usize] as f64).log2()).collect();
    let k = v.len().max(1) as f64;
    let mean = v.iter().sum::<f64>() / k;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1.0).max(1.0);
    (mean, (var / k).sqrt())
}

pub fn cmd_entropy(cli: &Cli, a: &EntropyArgs) -> Result<Report> {
    let f = load_function(&a.source, cli.seed)?;
    let (n, m) = (f.input_len(), f.output_len());
    let mut failures = Vec::new();
    let mut out = json!({"function": describe_function(&f), "construction": a.construction});
    if cli.mode == Mode::Mc {
        let counts = f.preimage_counts()?;
        let table = f.tabulate()?;
        let mut rng = Rng::new(cli.seed, 1);
        let (mean, stderr) = match a.construction {
            Construction::None => {
                let per_x: Vec<u64> = (0..1u64 << n).map(|x| counts[table.eval_u64(x) as usize]).collect();
                sampled_entropy(&per_x, (0..cli.trials).map(|_| rng.below(1 << n)))
            }
            Construction::Trunc => {
                let slices: Vec<Vec<u64>> =
                    (1..=n).map(|i| slice_function(&f, i)?.preimage_counts()).collect::<Result<_>>()?;
                let per_z: Vec<u64> = (1..=n)
                    .flat_map(|i| {
                        let s = &slices[i - 1];
                        let shift = m - (i - 1);
                        let table = &table;
                        (0..1u64 << n).map(move |x| s[(table.eval_u64(x) >> shift) as usize])
                    })
                    .collect();
                sampled_entropy(&per_z, (0..cli.trials).map(|_| rng.below((n as u64) << n)))
            }
        };
        out["estimate"] = json!({"shannon_bits": mean, "stderr": stderr, "trials": cli.trials});
        return Ok(Report::json(out, failures));
    }
    match a.construction {
        Construction::None => {
            let rep = real_entropy_of_inverse(&f)?;
            let bound = LogSum::integer(n as i64 - m as i64);
            out["entropy"] = rep.to_json();
            out["lower_bound"] = bits(&bound);
            if !rep.chain_holds() {
                failures.push("min <= shannon <= max with flat-iff-equal".to_string());
            }
            if !bound.le(&rep.shannon) {
                failures.push(format!("real entropy {} below n - m = {}", rep.shannon, n as i64 - m as i64));
            }
        }
        Construction::Trunc => {
            let c = TruncConstruction::new(f.clone())?;
            let rep = real_entropy_of_domain(&c)?;
            let mut slices = Vec::new();
            for i in 1..=n {
                let s = real_entropy_of_inverse(&slice_function(&f, i)?)?;
                let bound = LogSum::integer((n - (i - 1)) as i64);
                if !bound.le(&s.shannon) {
                    failures.push(format!("slice {i}: {} below {}", s.shannon, n - (i - 1)));
                }
                slices.push(json!({"i": i, "shannon": bits(&s.shannon), "lower_bound": n - (i - 1)}));
            }
            if !rep.chain_holds() {
                failures.push("min <= shannon <= max with flat-iff-equal".to_string());
            }
            out["entropy"] = rep.to_json();
            out["slices"] = Value::Array(slices);
        }
    }
    Ok(Report::json(out, failures))
}

fn strategy(a: &AuditArgs) -> Result<Arc<dyn Strategy>> {
    Ok(match a.finder {
        FinderKind::Optimal => Arc::new(Optimal),
        FinderKind::Identity => Arc::new(Identity),
        FinderKind::Canonical => Arc::new(Canonical),
        FinderKind::Lazy => Arc::new(Lazy::new(parse_rational(&a.eps)?)?),
        FinderKind::Sampling => Arc::new(Sampling { tries: a.tries }),
    })
}

fn target_of(f: FiniteFunction, c: Construction) -> Result<(Arc<dyn Target>, LogSum)> {
    Ok(match c {
        Construction::None => {
            let real = real_entropy_of_inverse(&f)?.shannon;
            (Arc::new(function_target(f)?), real)
        }
        Construction::Trunc => {
            let real = real_entropy_of_domain(&TruncConstruction::new(f.clone())?)?.shannon;
            (Arc::new(trunc_target(f)?), real)
        }
    })
}

fn parse_range(s: &str) -> Result<(usize, usize)> {
    let (a, b) = s.split_once("..").ok_or_else(|| IelError::Parse(format!("expected a..b, got {s:?}")))?;
    let a: usize = a.trim().parse().map_err(|_| IelError::Parse(format!("bad range start in {s:?}")))?;
    let b: usize = b.trim().parse().map_err(|_| IelError::Parse(format!("bad range end in {s:?}")))?;
    if a == 0 || a > b {
        return Err(IelError::Parse(format!("empty range {s:?}")));
    }
    Ok((a, b))
}

pub fn cmd_audit(cli: &Cli, a: &AuditArgs) -> Result<Report> {
    let strat = strategy(a)?;
    if let Some(series) = &a.series {
        let (lo, hi) = parse_range(series)?;
        let mut rows = Vec::new();
        for n in lo..=hi {
            let f = FiniteFunction::random_function(n, n, &mut Rng::new(cli.seed, n as u64))?;
            let (target, real) = target_of(f, a.construction)?;
            let acc = audit_shannon(&CollisionFinder::new(target, strat.clone()), None, cli.seed)?.shannon.unwrap();
            let gap = &real - &acc;
            rows.push(vec![
                n.to_string(),
                format!("{:.9}", real.to_f64()),
                format!("{:.9}", acc.to_f64()),
                format!("{:.9}", gap.to_f64()),
            ]);
        }
        let header = ["n", "real_entropy", "accessible_entropy", "gap"].map(String::from).to_vec();
        return Ok(Report { body: Body::Csv { header, rows }, failures: Vec::new() });
    }
    let f = load_function(&a.source, cli.seed)?;
    let (target, real) = target_of(f, a.construction)?;
    let finder = CollisionFinder::new(target.clone(), strat);
    let audit = match cli.mode {
        Mode::Exact => audit_shannon(&finder, None, cli.seed)?,
        Mode::Mc => {
            let mut rng = Rng::new(cli.seed, 0);
            let sample: Vec<BitString> = (0..cli.trials).map(|_| target.sample_input(&mut rng)).collect();
            audit_shannon(&finder, Some(&sample), cli.seed)?
        }
    };
    let acc = audit.shannon.clone().unwrap();
    let mut failures = Vec::new();
    if cli.mode == Mode::Exact {
        if !acc.le(&real) {
            failures.push(format!("accessible {acc} exceeds real {real}"));
        }
        if a.finder == FinderKind::Optimal && acc.cmp_value(&real) != Ordering::Equal {
            failures.push(format!("optimal finder reaches {acc}, real entropy is {real}"));
        }
    }
    let mut out = json!({"audit": audit.to_json(), "real": bits(&real), "gap": bits(&(&real - &acc))});
    if let Some(se) = audit.shannon_stderr {
        out["stderr"] = json!(se);
    }
    Ok(Report::json(out, failures))
}

pub fn cmd_pipeline(cli: &Cli, a: &PipelineArgs) -> Result<Report> {
    let path: PathKind = a.path.parse()?;
    let cfg = PipelineConfig::new(path, a.n, a.n0 as u64, a.m0 as u64, parse_rational(&a.delta)?, a.s)?;
    let src = FunctionSource { generator: a.generator, n: a.n0, m: Some(a.m0), file: a.file.clone() };
    let f = load_function(&src, cli.seed)?;
    if f.input_len() != a.n0 || f.output_len() != a.m0 {
        return Err(IelError::Config(format!(
            "base function is {} -> {}, configured {} -> {}",
            f.input_len(),
            f.output_len(),
            a.n0,
            a.m0
        )));
    }
    let u = match path {
        PathKind::AvgMax => build_uowhf_avgmax(&f, &cfg)?,
        PathKind::Shannon => build_uowhf_shannon(&f, &cfg)?,
    };
    let fam = &u.family;
    let mut failures = Vec::new();
    if !fam.shrinks() {
        failures.push(format!("family maps {} bits to {}", fam.in_len(), fam.out_len()));
    }
    let out = json!({
        "function": describe_function(&f),
        "descriptor": u.descriptor_json(),
        "in_len": fam.in_len(),
        "out_len": fam.out_len(),
        "key_len": fam.key_len(),
        "shrinks": fam.shrinks(),
    });
    Ok(Report::json(out, failures))
}

fn sampler_of(a: &AvgcaseArgs, seed: u64) -> Result<Sampler> {
    let n = a.coins as u64;
    match a.sampler {
        SamplerKind::Identity => Sampler::identity(n, 1, a.coins),
        SamplerKind::Truncation => Sampler::truncation(n, 1, a.coins, a.drop),
        SamplerKind::Planted => Sampler::planted_biased(n, 1, a.coins, a.len),
        SamplerKind::FOutput => {
            Sampler::f_output(n, 1, FiniteFunction::random_function(a.coins, a.coins, &mut Rng::new(seed, 2))?)
        }
    }
}

fn relation_q(a: &AvgcaseArgs, seed: u64) -> Result<Arc<RelationQ>> {
    let sampler = sampler_of(a, seed)?;
    let out = sampler.out_len();
    let rel = FiniteFunction::random_function(out, out, &mut Rng::new(seed, 1))?;
    Ok(Arc::new(RelationQ::new(sampler, Arc::new(PreimageRelation::new(rel)))?))
}

fn oracle_of(kind: OracleKind, q: &Arc<RelationQ>) -> Box<dyn QOracle> {
    match kind {
        OracleKind::Exhaustive => Box::new(ExhaustiveSolver::new(q.clone())),
        OracleKind::Random => Box::new(RandomGuess::new(q)),
        OracleKind::Mismatched => Box::new(MismatchedWitness::new(q.clone())),
    }
}

pub fn cmd_avgcase(cli: &Cli, a: &AvgcaseArgs) -> Result<Report> {
    let mut failures = Vec::new();
    let mut out = json!({"task": a.task, "sampler": a.sampler});
    if a.task == Task::Vv {
        let k = a.k;
        if k >= 16 {
            return Err(IelError::Capacity(format!("isolation with k = {k}")));
        }
        let mut rng = Rng::new(cli.seed, 0);
        let size = a.size.unwrap_or_else(|| (1usize << k) + rng.below((1u64 << k) + 1) as usize);
        if a.coins < 64 && size as u128 > 1u128 << a.coins {
            return Err(IelError::Domain(format!("{size} distinct strings of {} bits", a.coins)));
        }
        let mut set = BTreeSet::new();
        while set.len() < size {
            set.insert(rng.bits(a.coins));
        }
        let mode = match cli.mode {
            Mode::Exact => IsolationMode::Exhaustive,
            Mode::Mc => IsolationMode::Sampled { trials: cli.trials, seed: cli.seed },
        };
        let r = vv_isolation_probability(&set, k, mode)?;
        if !r.holds() {
            failures.push(format!("isolation {} below {}", rational_string(&r.min), rational_string(&r.bound)));
        }
        out["isolation"] = json!({
            "k": r.k,
            "set_size": r.set_size,
            "members": r.members,
            "min": rational_string(&r.min),
            "bound": rational_string(&r.bound),
            "unique": rational_string(&r.unique),
            "holds": r.holds(),
        });
        return Ok(Report::json(out, failures));
    }
    let q = relation_q(a, cli.seed)?;
    out["relation"] = q.describe();
    let oracle = oracle_of(a.oracle, &q);
    out["oracle"] = json!(oracle.label());
    let tau = parse_rational(&a.tau)?;
    match a.task {
        Task::Vv => unreachable!(),
        Task::Heuristic => {
            let params = HeuristicParams::new(q.m() as u64, parse_rational(&a.delta)?, a.beta)?;
            let out_len = q.sampler().out_len();
            let (mut found, mut solvable, mut false_pos) = (0u64, 0u64, 0u64);
            for t in 0..cli.trials {
                let mut rng = Rng::new(cli.seed, t);
                // even trials draw from the sampler, odd ones are uniform strings
                let y = if t % 2 == 0 { q.instance_of(rng.below(1 << q.m())) } else { rng.bits(out_len) };
                solvable += !q.relation().witnesses(&y).is_empty() as u64;
                let r = heuristic_b(&q, oracle.as_ref(), &y, &params, &mut rng)?;
                if let Some(w) = r.witness {
                    found += 1;
                    false_pos += !q.relation().holds(&y, &w) as u64;
                }
            }
            if false_pos > 0 {
                failures.push(format!("{false_pos} false positives"));
            }
            out["heuristic"] = json!({
                "loops": params.loops()?,
                "delta": rational_string(&params.delta),
                "beta": params.beta,
                "trials": cli.trials,
                "solvable": solvable,
                "found": found,
                "false_positives": false_pos,
            });
        }
        Task::Buckets | Task::Measure => {
            let hits = hit_probabilities(&q, oracle.as_ref())?;
            let bad: BTreeSet<BitString> = iel_avgcase::bad_instances(&hits, &tau).into_iter().collect();
            let buckets = build_bucket_sets(q.sampler(), &bad)?;
            let expected =
                (0..1u64 << q.m()).filter(|&x| bad.contains(&q.instance_of(x))).count();
            let mut seen = BTreeSet::new();
            let disjoint = buckets.buckets.values().flatten().all(|&x| seen.insert(x));
            let partition = disjoint && seen.len() == expected;
            if !partition {
                failures.push("buckets do not partition the bad coin strings".to_string());
            }
            let claims = bucket_claims(&q, oracle.as_ref(), &buckets, &tau)?;
            if !claims.holds() {
                failures.push("bucket counting claims".to_string());
            }
            out["bad_instances"] = json!(bad.len());
            out["buckets"] = buckets.to_json();
            out["partition"] = json!(partition);
            out["claims"] = json!({
                "tau": rational_string(&claims.tau),
                "oracle_in_buckets": rational_string(&claims.oracle_in_buckets),
                "oracle_bound": rational_string(&claims.oracle_bound),
                "uniform_in_buckets": rational_string(&claims.uniform_in_buckets),
                "uniform_bound": rational_string(&claims.uniform_bound),
                "holds": claims.holds(),
            });
            if a.task == Task::Measure {
                let family = light_bucket_family(&q, &buckets);
                let m = measure_avg_access(&q, oracle.as_ref(), &family, cli.trials, cli.seed, cli.mode == Mode::Exact)?;
                if let (Some(k), Some(real)) = (&m.k_avg, &m.real) {
                    out["gap"] = bits(&(real - k));
                }
                out["measurement"] = m.to_json();
            }
        }
        Task::Picking => {
            let r = two_universal_picking(&q)?;
            if !r.holds {
                failures.push("pairwise picking bound".to_string());
            }
            out["picking"] = json!({
                "tuples": r.tuples,
                "min": r.min_probability.as_ref().map(rational_string),
                "bound": rational_string(&r.bound),
                "holds": r.holds,
            });
        }
    }
    Ok(Report::json(out, failures))
}

fn owf_config(path: PathKind, n: u64) -> Result<PipelineConfig> {
    match path {
        PathKind::AvgMax => PipelineConfig::avg_max_for_owf(n),
        PathKind::Shannon => PipelineConfig::shannon_for_owf(n),
    }
}

pub fn cmd_params(cli: &Cli, a: &ParamsArgs) -> Result<Report> {
    let path: PathKind = a.path.parse()?;
    let overridden = a.n0.is_some() || a.m0.is_some() || a.delta.is_some() || a.s.is_some();
    if let Some(list) = &a.fit {
        if overridden {
            return Err(IelError::Config("--fit uses the one-way-function instances; drop n0, m0, delta and s".into()));
        }
        let ns: Vec<u64> = list
            .split(',')
            .map(|s| s.trim().parse().map_err(|_| IelError::Parse(format!("bad security parameter {s:?}"))))
            .collect::<Result<_>>()?;
        let mut points = Vec::new();
        let mut rows = Vec::new();
        for &n in &ns {
            let sheet = calc_params(&owf_config(path, n)?)?;
            let l = big_log2(&sheet.out_len);
            points.push((n as f64, l));
            rows.push(vec![n.to_string(), sheet.out_len.to_string(), format!("{l:.9}"), format!("{:.9}", big_log2(&sheet.key_len))]);
        }
        let exponent = fit_exponent(&points)?;
        if cli.out.as_ref().is_some_and(|p| p.extension().is_some_and(|e| e == "csv")) {
            let header = ["n", "out_len", "log2_out", "log2_key"].map(String::from).to_vec();
            return Ok(Report { body: Body::Csv { header, rows }, failures: Vec::new() });
        }
        let out = json!({
            "path": path.as_str(),
            "exponent": exponent,
            "points": rows.iter().map(|r| json!({"n": r[0], "out_len": r[1], "log2_out": r[2]})).collect::<Vec<_>>(),
        });
        return Ok(Report::json(out, Vec::new()));
    }
    let mut cfg = owf_config(path, a.n)?;
    if let Some(v) = a.n0 {
        cfg.n0 = v;
    }
    if let Some(v) = a.m0 {
        cfg.m0 = v;
    }
    if let Some(v) = &a.delta {
        cfg.delta = parse_rational(v)?;
    }
    if let Some(v) = a.s {
        cfg.s = v;
    }
    cfg.validate()?;
    let sheet = calc_params(&cfg)?;
    let mut failures = Vec::new();
    if !sheet.shrinks() {
        failures.push(format!("output {} not below input {}", sheet.out_len, sheet.in_len));
    }
    Ok(Report::json(json!({"sheet": sheet.to_json(), "shrinks": sheet.shrinks()}), failures))
}
