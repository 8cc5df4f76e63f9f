//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

use std::collections::HashSet;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use coarsedim::borst::{ord_system, ord_system_naive, FinSet, SetSystem};
use coarsedim::covers::check_cover;
use coarsedim::metrics::{dist_level, dist_sup, DistanceTable, MetricHandle};
use coarsedim::search::{
    afragment_ord_bounds, build_afragment, check_fragment_closure, decide_cover,
    decide_cover_naive, Outcome, SearchOptions,
};
use coarsedim::spaces::{gen_window, IndexRange, Point, Window, WindowSpec};
use coarsedim::witness::{check_coasdim_step, theorem1_witness};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

const BUDGET: u64 = 10_000_000;

type Verdict = Result<String, String>;

fn cli(dir: &Path, args: &[&str]) -> Result<(Value, Option<i32>), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_coarsedim"))
        .current_dir(dir)
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    let code = out.status.code();
    if code == Some(1) {
        return Err(String::from_utf8_lossy(&out.stderr).trim().to_string());
    }
    if out.stdout.is_empty() {
        return Ok((Value::Null, code));
    }
    let v = serde_json::from_slice(&out.stdout).map_err(|e| format!("{args:?}: {e}"))?;
    Ok((v, code))
}

fn table(w: &Window) -> DistanceTable {
    DistanceTable::for_window(w, w.default_metric()).unwrap()
}

fn sigmas(max_elem: u64) -> Vec<Vec<u64>> {
    let mut out: Vec<Vec<u64>> = (1..=max_elem).map(|a| vec![a]).collect();
    for a in 1..=max_elem {
        for b in a + 1..=max_elem {
            out.push(vec![a, b]);
        }
    }
    out
}

fn decide(t: &DistanceTable, sigma: &[u64], bound: u64) -> Outcome {
    decide_cover(t, sigma, bound, SearchOptions::sequential(BUDGET))
        .unwrap()
        .outcome
}

fn criterion_1() -> Verdict {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let started = Instant::now();
    let mut configs: Vec<(String, Vec<String>)> = Vec::new();
    for (block, r) in [(1, 32), (2, 32), (3, 32), (4, 16)] {
        configs.push((
            format!("sup b{block} R{r}"),
            ["--kind", "r", "--block", &block.to_string(), "--r", &r.to_string()]
                .map(String::from)
                .to_vec(),
        ));
    }
    for k in 1..=3 {
        configs.push((
            format!("d_{k} blocks 1..4 R16"),
            ["--kind", "xomegak", "--k", &k.to_string(), "--blocks", "1..4", "--r", "16"]
                .map(String::from)
                .to_vec(),
        ));
    }
    configs.push((
        "d levels 1..3 blocks 1..3 R16".into(),
        ["--kind", "x2omega", "--levels", "1..3", "--blocks", "1..3", "--r", "16"]
            .map(String::from)
            .to_vec(),
    ));
    let mut failures = Vec::new();
    let mut total = 0;
    for (i, (label, gen)) in configs.iter().enumerate() {
        let file = format!("w{i}.jsonl");
        let mut args: Vec<&str> = vec!["window", "gen"];
        args.extend(gen.iter().map(String::as_str));
        args.extend(["--out", &file]);
        cli(dir.path(), &args)?;
        let (report, _) = cli(
            dir.path(),
            &["metric", "audit", "--window", &file, "--samples", "100000", "--seed", "42"],
        )?;
        total += report["checked"].as_u64().unwrap_or(0);
        let count = report["violation_count"].as_u64().unwrap_or(u64::MAX);
        if count > 0 {
            let first = &report["violations"][0];
            failures.push(format!("{label}: {count} violations, first {}", first["detail"]));
        }
    }
    let elapsed = started.elapsed();
    if elapsed > Duration::from_secs(30) {
        failures.push(format!("took {:.1}s", elapsed.as_secs_f64()));
    }
    if failures.is_empty() {
        Ok(format!("{total} triples over {} metrics, {:.1}s", configs.len(), elapsed.as_secs_f64()))
    } else {
        Err(failures.join("; "))
    }
}

fn criterion_2() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut failures = Vec::new();
    let mut checked = 0;
    for block in 1..=3u32 {
        let w = gen_window(WindowSpec::R { block, radius: 8 }).unwrap();
        for target in block..=block + 2 {
            let mut bad = 0;
            for _ in 0..10_000 {
                let (Point::R(x), Point::R(y)) = (w.points().choose(&mut rng).unwrap(), w.points().choose(&mut rng).unwrap()) else {
                    unreachable!()
                };
                let d = dist_sup(x, y).unwrap();
                let e = dist_sup(&x.embed_block(target).unwrap(), &y.embed_block(target).unwrap()).unwrap();
                checked += 1;
                bad += usize::from(d != e);
            }
            if bad > 0 {
                failures.push(format!("embed_block {block}->{target}: {bad} mismatches"));
            }
        }
    }
    for m in 1..=3u32 {
        let w = gen_window(WindowSpec::XOmegaK { k: m, blocks: IndexRange::new(1, 3), radius: 8 }).unwrap();
        for n in m..=5 {
            let mut bad = 0;
            let mut example = None;
            for _ in 0..10_000 {
                let (Point::Level(x), Point::Level(y)) = (w.points().choose(&mut rng).unwrap(), w.points().choose(&mut rng).unwrap()) else {
                    unreachable!()
                };
                let d = dist_level(m, x, y).unwrap();
                let e = dist_level(n, &x.embed_level(n).unwrap(), &y.embed_level(n).unwrap()).unwrap();
                checked += 1;
                if d != e {
                    bad += 1;
                    example.get_or_insert(format!("{:?} vs {:?}: {d} -> {e}", x.coords(), y.coords()));
                }
            }
            if bad > 0 {
                failures.push(format!("embed_level {m}->{n}: {bad} mismatches, e.g. {}", example.unwrap()));
            }
        }
    }
    if failures.is_empty() {
        Ok(format!("{checked} pairs"))
    } else {
        Err(format!("{} of 21 configurations break: {}", failures.len(), failures[0]))
    }
}

fn criterion_3() -> Verdict {
    let mut checked = 0usize;
    let mut configs = 0;
    for k in 1..=3u32 {
        for block in 1..=3u32 {
            for radius in (1..=32i64).filter(|r| r % (1 << block) == 0) {
                configs += 1;
                let x = gen_window(WindowSpec::Xki { k, i: block, radius }).unwrap();
                let step = 1i64 << k;
                let y: HashSet<Vec<i64>> = x
                    .points()
                    .iter()
                    .map(|p| p.coords().to_vec())
                    .filter(|c| c.iter().all(|v| v % step == 0))
                    .collect();
                if radius % (1i64 << k.max(block)) == 0 {
                    let gen = gen_window(WindowSpec::YOmegaK { k, blocks: IndexRange::single(block), radius }).unwrap();
                    let gen: HashSet<Vec<i64>> = gen.points().iter().map(|p| p.coords().to_vec()).collect();
                    if gen != y {
                        return Err(format!("Y window differs from the 2^{k} grid of X at block {block} R {radius}"));
                    }
                }
                for p in x.points() {
                    let c = p.coords();
                    // rounding candidates first, then a full scan
                    let near = (0..1u32 << block).any(|mask| {
                        let cand: Vec<i64> = c
                            .iter()
                            .enumerate()
                            .map(|(j, v)| v.div_euclid(step) * step + if mask >> j & 1 == 1 { step } else { 0 })
                            .collect();
                        y.contains(&cand)
                    }) || y.iter().any(|q| {
                        q.iter().zip(c).map(|(a, b)| (a - b).abs()).max().unwrap_or(0) <= step
                    });
                    if !near {
                        return Err(format!("k={k} block={block} R={radius}: {c:?} is farther than {step} from Y"));
                    }
                    checked += 1;
                }
            }
        }
    }
    Ok(format!("{checked} points in {configs} windows"))
}

fn criterion_4() -> Verdict {
    let all = SetSystem::all_subsets(3, 3).members().to_vec();
    for mask in 0u32..128 {
        let m = SetSystem::from_sets(all.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, s)| s.clone()));
        if ord_system(&m) != ord_system_naive(&m).unwrap() {
            return Err(format!("disagreement on {m}"));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..1000 {
        let labels = rng.gen_range(1..=6);
        let p = rng.gen_range(0.05..0.6);
        let m = SetSystem::from_sets(
            SetSystem::all_subsets(labels, labels as usize)
                .members()
                .iter()
                .filter(|_| rng.gen_bool(p))
                .cloned(),
        );
        if ord_system(&m) != ord_system_naive(&m).unwrap() {
            return Err(format!("disagreement on {m}"));
        }
    }
    for n in 1..=4u32 {
        for labels in n..=6 {
            let m = SetSystem::all_subsets(labels, n as usize);
            if ord_system(&m) != n {
                return Err(format!("size-{n} system over {labels} labels has rank {}", ord_system(&m)));
            }
        }
    }
    let _ = FinSet::new([1]);
    Ok("128 exhaustive + 1000 seeded systems, size-n systems rank n".into())
}

fn criterion_5() -> Verdict {
    let mut compared = 0;
    let mut witnesses = 0;
    for n in 0..=6 {
        let w = Window::interval(n).unwrap();
        let t = table(&w);
        for sigma in sigmas(4) {
            for bound in 0..=t.diameter() {
                let fast = decide_cover(&t, &sigma, bound, SearchOptions::sequential(BUDGET)).unwrap();
                let slow = decide_cover_naive(&t, &sigma, bound).unwrap();
                compared += 1;
                if fast.outcome != slow.outcome {
                    return Err(format!("N={n} sigma={sigma:?} B={bound}: {:?} vs {:?}", fast.outcome, slow.outcome));
                }
                for d in [&fast, &slow] {
                    if let Some(c) = &d.witness {
                        witnesses += 1;
                        if !check_cover(c, &t, bound).unwrap().passed() {
                            return Err(format!("witness fails the checker at N={n} sigma={sigma:?} B={bound}"));
                        }
                    }
                }
            }
        }
    }
    Ok(format!("{compared} instances, {witnesses} witnesses checked"))
}

fn criterion_6() -> Verdict {
    let mut instances = 0;
    for n in 0..=24i64 {
        let t = table(&Window::interval(n).unwrap());
        for bound in 0..=(n as u64 + 2) {
            let expected = if bound >= n as u64 { Outcome::Exists } else { Outcome::None };
            let got = decide(&t, &[2], bound);
            if got != expected {
                return Err(format!("N={n} B={bound}: {got:?}"));
            }
            if n <= 7 && decide_cover_naive(&t, &[2], bound).unwrap().outcome != expected {
                return Err(format!("oracle disagrees at N={n} B={bound}"));
            }
            instances += 1;
        }
    }
    Ok(format!("{instances} instances, oracle-confirmed for N <= 7"))
}

fn random_subwindow(rng: &mut ChaCha8Rng, base: &Window, max: usize) -> Window {
    let mut idx: Vec<usize> = (0..base.len()).collect();
    idx.shuffle(rng);
    idx.truncate(rng.gen_range(2..=base.len().min(max)));
    idx.sort_unstable();
    base.restrict(&idx).unwrap()
}

fn bases() -> Vec<Window> {
    vec![
        Window::interval(16).unwrap(),
        gen_window(WindowSpec::Xki { k: 1, i: 2, radius: 4 }).unwrap(),
        gen_window(WindowSpec::R { block: 2, radius: 3 }).unwrap(),
        gen_window(WindowSpec::X2Omega { levels: IndexRange::new(1, 2), blocks: IndexRange::new(1, 2), radius: 4 }).unwrap(),
    ]
}

fn criterion_7() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let bases = bases();
    let mut configs = 0;
    for round in 0..24 {
        let w = random_subwindow(&mut rng, &bases[round % bases.len()], 10);
        let t = table(&w);
        let bound = rng.gen_range(0..=t.diameter());
        let budget = if round % 3 == 0 { 5 } else { BUDGET };
        let f = build_afragment(&t, &w.digest(), bound, 5, 3, budget, false).map_err(|e| e.to_string())?;
        check_fragment_closure(&f).map_err(|e| e.to_string())?;
        for a in f.definite_in.members() {
            for b in SetSystem::all_subsets(5, 3).members() {
                if b.is_subset_of(a) && !f.definite_in.contains(b) {
                    return Err(format!("{b} missing below {a}"));
                }
            }
        }
        let (lo, hi) = afragment_ord_bounds(&f).map_err(|e| e.to_string())?;
        if lo > hi {
            return Err(format!("ord bounds {lo} > {hi}"));
        }
        configs += 1;
    }
    Ok(format!("{configs} configurations, zero contradictions"))
}

fn criterion_8() -> Verdict {
    let mut failures = Vec::new();
    let mut steps = 0;
    for levels in 1..=4u32 {
        for blocks in 1..=2u32 {
            for radius in [16i64, 32] {
                if radius % (1 << levels.max(blocks)) != 0 {
                    continue;
                }
                let w = gen_window(WindowSpec::X2Omega {
                    levels: IndexRange::new(1, levels),
                    blocks: IndexRange::new(1, blocks),
                    radius,
                })
                .unwrap();
                for r in 1..=8 {
                    let dec = theorem1_witness(&w, r).unwrap();
                    let v = check_coasdim_step(&w, &dec, MetricHandle::Tower).unwrap();
                    steps += 1;
                    if !v.passed {
                        failures.push(format!(
                            "levels 1..{levels} blocks 1..{blocks} R{radius} r{r}: {} residual points beyond c={} (max {:?}), disjoint={}",
                            v.uncovered.len(),
                            dec.c,
                            v.max_residual_distance,
                            v.disjoint_ok
                        ));
                    }
                }
            }
        }
    }
    if failures.is_empty() {
        Ok(format!("{steps} steps"))
    } else {
        let rs: HashSet<&str> = failures.iter().filter_map(|f| f.split(": ").next()?.split(' ').last()).collect();
        let mut rs: Vec<&str> = rs.into_iter().collect();
        rs.sort();
        Err(format!("{} of {steps} steps fail (scales {}); first: {}", failures.len(), rs.join(","), failures[0]))
    }
}

fn criterion_9() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let bases = bases();
    let mut pairs = 0;
    let mut nones = 0;
    for round in 0..60 {
        let big = random_subwindow(&mut rng, &bases[round % bases.len()], 12);
        let keep: Vec<usize> = (0..big.len()).filter(|_| rng.gen_bool(0.6)).collect();
        let small = big.restrict(if keep.is_empty() { &[0] } else { &keep }).unwrap();
        let (tb, ts) = (table(&big), table(&small));
        for sigma in sigmas(4) {
            for bound in [0, 1, 2, 4, ts.diameter()] {
                if decide(&ts, &sigma, bound) == Outcome::None {
                    nones += 1;
                    if decide(&tb, &sigma, bound) != Outcome::None {
                        return Err(format!("round {round} sigma={sigma:?} B={bound}"));
                    }
                }
            }
        }
        pairs += 1;
    }
    Ok(format!("{pairs} nested pairs, {nones} NONE instances transferred"))
}

fn criterion_10() -> Verdict {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    cli(dir.path(), &["window", "gen", "--kind", "r", "--block", "1", "--r", "60", "--out", "w60.json"])?;
    cli(dir.path(), &["window", "gen", "--kind", "xki", "--k", "1", "--i", "2", "--r", "4", "--out", "x.json"])?;
    let decision = |v: &Value| {
        let mut v = v.clone();
        v.as_object_mut().unwrap().remove("manifest");
        v
    };
    let runs: [&[&str]; 4] = [
        &["cover", "decide", "--window", "w60.json", "--sigma", "4", "--bound", "30", "--canonical"],
        &["cover", "decide", "--window", "x.json", "--sigma", "2,3", "--bound", "2", "--canonical"],
        &["cover", "decide", "--window", "x.json", "--sigma", "1,3", "--bound", "1", "--budget", "200"],
        &["afrag", "--window", "x.json", "--bound", "2", "--max-elem", "4", "--max-size", "2"],
    ];
    for args in runs {
        let mut one = vec!["--threads", "1"];
        one.extend(args);
        let mut eight = vec!["--threads", "8"];
        eight.extend(args);
        let (a, ca) = cli(dir.path(), &one)?;
        let (b, cb) = cli(dir.path(), &eight)?;
        if decision(&a) != decision(&b) || ca != cb {
            return Err(format!("{args:?} differs between 1 and 8 threads"));
        }
    }
    let started = Instant::now();
    let (v, _) = cli(dir.path(), &["cover", "decide", "--window", "w60.json", "--sigma", "4", "--bound", "30"])?;
    let elapsed = started.elapsed();
    let nodes = v["nodes_explored"].as_u64().unwrap_or(u64::MAX);
    if v["outcome"] != "NONE" || nodes >= 1_000_000 || elapsed >= Duration::from_secs(5) {
        return Err(format!("outcome {} after {nodes} nodes in {:.2}s", v["outcome"], elapsed.as_secs_f64()));
    }
    Ok(format!("thread counts agree; {{0..60}} sigma {{4}} B 30 NONE in {nodes} nodes, {:.2}s", elapsed.as_secs_f64()))
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 10] = [
        ("metric audit", criterion_1),
        ("isometric embeddings", criterion_2),
        ("thickening identity", criterion_3),
        ("Ord oracle equivalence", criterion_4),
        ("search oracle equivalence", criterion_5),
        ("interval law", criterion_6),
        ("fragment closures", criterion_7),
        ("level-cut witness", criterion_8),
        ("subspace law", criterion_9),
        ("determinism and pruning", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
