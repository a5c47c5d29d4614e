//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails. Oracle comparisons print SKIP when no pinned golden file
//! is present.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use unfold_synth::formats::{read_json, EncodingFile, Golden, GoldenFile, PhiReport};
use unfold_synth::pipeline::{run_pipeline, EncodingSource, PipelineOptions, PHI_ZERO};
use unfold_synth::{load_fsa, phi_states};
use unfold_synth_core::circuit::{verify_against_fsa, Simulator};
use unfold_synth_core::encoding::{dependency_graph, derive_csa, is_feed_forward};
use unfold_synth_core::iit::{compute_phi_with, tpm_from_csa};
use unfold_synth_core::partitions::{
    encoding_from_sequence, find_nested_sequence, is_preserved, sequence_from_encoding, validate_sequence,
};
use unfold_synth_core::synthesis::{build_netlist, excitation_from_csa, jk_requirement, minimize, Channel};
use unfold_synth_core::{
    Automaton, Basis, CircuitState, Code, Csa, Encoding, Partition, PhiConfig, StateId, Trit,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn tollbooth() -> (Automaton, unfold_synth::formats::FsaFile) {
    load_fsa(&fixtures().join("tollbooth.json")).expect("bundled tollbooth fixture")
}

fn labels(name: &str) -> EncodingFile {
    read_json(&fixtures().join(name)).expect("bundled label fixture")
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(start: Instant, limit: Duration) -> Result<(), String> {
    let spent = start.elapsed();
    ensure(spent < limit, || format!("took {spent:.1?}, limit {limit:?}"))
}

fn conscious_circuit() -> Outcome {
    let start = Instant::now();
    let (a, fsa) = tollbooth();
    let opts = PipelineOptions {
        encoding: EncodingSource::Labels(labels("conscious.json")),
        basis: Basis::AndOrNotXor,
        phi: true,
        dot: None,
    };
    let report = run_pipeline(&a, &fsa, &opts).map_err(|e| e.to_string())?;
    ensure(report.verification.verified, || {
        format!("verification failed: {:?}", report.verification.mismatches)
    })?;
    ensure(!report.feed_forward, || "dependency graph is acyclic".into())?;
    let phi = report.phi.as_ref().ok_or("no phi section")?;
    ensure(phi.states.len() == 8, || {
        format!("{} phi values", phi.states.len())
    })?;
    let min = phi.states.values().map(|e| e.phi).fold(f64::INFINITY, f64::min);
    ensure(min > PHI_ZERO, || format!("smallest phi {min}"))?;
    within(start, Duration::from_secs(60))?;
    Ok(format!(
        "8 states verified, cyclic, min phi {min} in {:.2?}",
        start.elapsed()
    ))
}

fn unfolded_circuit() -> Outcome {
    let start = Instant::now();
    let (a, fsa) = tollbooth();
    let ns = find_nested_sequence(&a).map_err(|e| e.to_string())?;
    let report = validate_sequence(&ns, &a);
    ensure(report.is_valid(), || {
        format!("unfolded sequence invalid: {report}")
    })?;
    let published = labels("hierarchical.json")
        .to_encoding(&a)
        .map_err(|e| e.to_string())?;
    let derived = validate_sequence(&sequence_from_encoding(&published), &a);
    ensure(derived.is_valid(), || {
        format!("published labels not hierarchical: {derived}")
    })?;
    ensure(
        encoding_from_sequence(&ns).map_err(|e| e.to_string())? == published,
        || "unfolded labels differ from the published ones".into(),
    )?;
    let opts = PipelineOptions {
        encoding: EncodingSource::Labels(labels("hierarchical.json")),
        basis: Basis::AndOrNotXor,
        phi: true,
        dot: None,
    };
    let report = run_pipeline(&a, &fsa, &opts).map_err(|e| e.to_string())?;
    ensure(report.verification.verified, || {
        format!("verification failed: {:?}", report.verification.mismatches)
    })?;
    ensure(report.feed_forward, || "dependency graph has a cycle".into())?;
    let phi = report.phi.as_ref().ok_or("no phi section")?;
    ensure(phi.states.len() == 8, || {
        format!("{} phi values", phi.states.len())
    })?;
    let max = phi.states.values().map(|e| e.phi.abs()).fold(0.0, f64::max);
    ensure(max <= PHI_ZERO, || format!("largest |phi| {max}"))?;
    within(start, Duration::from_secs(60))?;
    Ok(format!(
        "valid sequence, verified, acyclic, max |phi| {max} in {:.2?}",
        start.elapsed()
    ))
}

fn excitation_semantics() -> Outcome {
    let rows = [
        ((false, false), (Trit::Zero, Trit::DontCare)),
        ((false, true), (Trit::One, Trit::DontCare)),
        ((true, false), (Trit::DontCare, Trit::One)),
        ((true, true), (Trit::DontCare, Trit::Zero)),
    ];
    for ((q, next), expected) in rows {
        ensure(jk_requirement(q, next) == expected, || {
            format!("row {q} -> {next}")
        })?;
    }
    let (a, _) = tollbooth();
    let mut checks = 0;
    for file in ["conscious.json", "hierarchical.json"] {
        let e = labels(file).to_encoding(&a).map_err(|e| e.to_string())?;
        let csa = derive_csa(&a, &e).map_err(|e| e.to_string())?;
        let ex = excitation_from_csa(&csa);
        for s in a.states() {
            let (x, y) = (e.code(s), e.code(a.next(s)));
            for bit in 0..3 {
                let (j, k) = jk_requirement(x.bit(bit), y.bit(bit));
                let got_j = ex.channel(bit, Channel::J)[x.0 as usize];
                let got_k = ex.channel(bit, Channel::K)[x.0 as usize];
                ensure(got_j == j && got_k == k, || {
                    format!("{file} state {} Q{}: got {got_j:?}/{got_k:?}", a.name(s), bit + 1)
                })?;
                checks += 1;
            }
        }
    }
    Ok(format!("4 rows; {checks} (circuit, state, flip-flop) J/K pairs"))
}

fn minimization_soundness() -> Outcome {
    let start = Instant::now();
    let check = |table: &[Trit], width: u32| -> Result<(), String> {
        let f = minimize(table, width);
        for (x, t) in table.iter().enumerate() {
            ensure(t.admits(f.eval(Code(x as u32))), || {
                format!("{f} disagrees at {} on {table:?}", Code(x as u32).render(width))
            })?;
        }
        Ok(())
    };
    for bits in 0u32..256 {
        let table: Vec<Trit> = (0..8).map(|x| Trit::from_bool(bits >> x & 1 == 1)).collect();
        check(&table, 3)?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x4d49_4e49);
    for _ in 0..1000 {
        let table: Vec<Trit> = (0..16)
            .map(|_| match rng.gen_range(0..3) {
                0 => Trit::Zero,
                1 => Trit::One,
                _ => Trit::DontCare,
            })
            .collect();
        check(&table, 4)?;
    }
    within(start, Duration::from_secs(30))?;
    Ok(format!("256 + 1000 tables in {:.2?}", start.elapsed()))
}

fn preservation_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5052_4553);
    let mut preserved = 0;
    for case in 0..1000 {
        let n = rng.gen_range(1..=8);
        let successors: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
        let names: Vec<String> = (0..n).map(|i| format!("s{i}")).collect();
        let a = Automaton::from_successors(names, &successors).map_err(|e| e.to_string())?;
        let k = rng.gen_range(1..=n);
        let block: Vec<usize> = (0..n).map(|_| rng.gen_range(0..k)).collect();
        let p = Partition::new(
            (0..k)
                .map(|b| (0..n).filter(|&s| block[s] == b).map(StateId).collect::<Vec<_>>())
                .filter(|b| !b.is_empty()),
        );
        // every pair in one block moves into one block
        let expected = (0..n)
            .all(|x| (0..n).all(|y| block[x] != block[y] || block[successors[x]] == block[successors[y]]));
        let got = is_preserved(&p, &a).map_err(|e| e.to_string())?;
        ensure(got == expected, || {
            format!("case {case}: {successors:?} {block:?} gave {got}")
        })?;
        preserved += usize::from(got);
    }
    Ok(format!("1000 pairs agree ({preserved} preserved)"))
}

/// Random full update table on three bits with a random topological order:
/// each bit reads only itself and bits earlier in the order.
fn random_feed_forward(rng: &mut ChaCha8Rng) -> Csa {
    let mut order = [0u32, 1, 2];
    for i in (1..3).rev() {
        order.swap(i, rng.gen_range(0..=i));
    }
    let tables: Vec<Vec<bool>> = (0..3)
        .map(|i| (0..1 << (i + 1)).map(|_| rng.gen()).collect())
        .collect();
    let next = (0..8u32)
        .map(|x| {
            let mut y = 0;
            for (i, &bit) in order.iter().enumerate() {
                let inputs = order[..=i]
                    .iter()
                    .enumerate()
                    .fold(0usize, |acc, (k, &b)| acc | ((x >> b & 1) as usize) << k);
                y |= u32::from(tables[i][inputs]) << bit;
            }
            Some(Code(y))
        })
        .collect();
    Csa::from_table(3, next).expect("complete table")
}

fn feed_forward_phi() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x4646_5048);
    // evaluate every cut rather than stopping at the disconnection test
    let full = PhiConfig {
        skip_disconnected: false,
    };
    let mut evaluations = 0;
    for case in 0..200 {
        let csa = random_feed_forward(&mut rng);
        ensure(is_feed_forward(&dependency_graph(&csa)), || {
            format!("case {case} not feed-forward")
        })?;
        let t = tpm_from_csa(&csa).map_err(|e| e.to_string())?;
        for s in 0..8 {
            let r = compute_phi_with(&t, Code(s), full).map_err(|e| e.to_string())?;
            ensure(r.big_phi.abs() <= PHI_ZERO, || {
                format!("case {case} state {}: phi {}", Code(s).render(3), r.big_phi)
            })?;
            evaluations += 1;
        }
    }
    within(start, Duration::from_secs(600))?;
    Ok(format!(
        "200 systems, {evaluations} states, all zero in {:.2?}",
        start.elapsed()
    ))
}

fn basis_equivalence() -> Outcome {
    let (a, _) = tollbooth();
    for file in ["conscious.json", "hierarchical.json"] {
        let e: Encoding = labels(file).to_encoding(&a).map_err(|e| e.to_string())?;
        let ex = excitation_from_csa(&derive_csa(&a, &e).map_err(|e| e.to_string())?);
        let and = build_netlist(&ex, Basis::AndOrNotXor);
        let nand = build_netlist(&ex, Basis::NandOnly);
        ensure(nand.gates.iter().all(|g| g.op.name() == "NAND"), || {
            format!("{file}: non-NAND gate")
        })?;
        let (sa, sn) = (
            Simulator::new(&and).map_err(|e| e.to_string())?,
            Simulator::new(&nand).map_err(|e| e.to_string())?,
        );
        for s in a.states() {
            let x = CircuitState::from_code(e.code(s), 3);
            let (ya, yn) = (
                sa.step(&x).map_err(|e| e.to_string())?,
                sn.step(&x).map_err(|e| e.to_string())?,
            );
            ensure(ya == yn, || format!("{file} state {}: {ya} vs {yn}", a.name(s)))?;
        }
        for n in [&and, &nand] {
            let report = verify_against_fsa(n, &a, &e).map_err(|e| e.to_string())?;
            ensure(report.is_verified(), || format!("{file}: {report}"))?;
        }
    }
    Ok("both circuits, 8 states each".into())
}

fn run_cli(args: &[&str]) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_unfold-synth"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    ensure(out.status.success(), || {
        format!(
            "{args:?} exited {}: {}",
            out.status,
            String::from_utf8_lossy(&out.stderr)
        )
    })?;
    Ok(out.stdout)
}

fn determinism() -> Outcome {
    let fsa = fixtures().join("tollbooth.json");
    let conscious = fixtures().join("conscious.json");
    let fsa = fsa.to_str().ok_or("non-UTF-8 path")?;
    let conscious = conscious.to_str().ok_or("non-UTF-8 path")?;
    let mut bytes = 0;
    for args in [
        vec!["pipeline", "--fsa", fsa, "--labels", conscious, "--phi"],
        vec!["pipeline", "--fsa", fsa, "--unfold", "--phi"],
        vec![
            "pipeline", "--fsa", fsa, "--random", "--seed", "7", "--fix", "A=000", "--basis", "nand",
        ],
    ] {
        let first = run_cli(&args)?;
        let second = run_cli(&args)?;
        ensure(first == second, || format!("{args:?}: reports differ"))?;
        bytes += first.len();
    }
    Ok(format!("3 pipelines, {bytes} identical bytes"))
}

/// Compare against every pinned golden file under `fixtures/golden`.
fn oracle_cross_check() -> Option<Outcome> {
    let dir = fixtures().join("golden");
    let mut paths: Vec<PathBuf> = std::fs::read_dir(&dir)
        .ok()?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    let (a, _) = tollbooth();
    let mut compared = 0;
    let result = (|| -> Result<(), String> {
        for path in &paths {
            let Golden::Pinned(golden) = GoldenFile::load(path).map_err(|e| e.to_string())? else {
                continue;
            };
            let t = match (&golden.tpm, path.file_stem().and_then(|s| s.to_str())) {
                (Some(t), _) => t.to_tpm().map_err(|e| e.to_string())?,
                (None, Some(stem @ ("conscious" | "hierarchical"))) => {
                    let e = labels(&format!("{stem}.json"))
                        .to_encoding(&a)
                        .map_err(|e| e.to_string())?;
                    tpm_from_csa(&derive_csa(&a, &e).map_err(|e| e.to_string())?)
                        .map_err(|e| e.to_string())?
                }
                _ => continue,
            };
            let ours = PhiReport::from_results(&phi_states(&t).map_err(|e| e.to_string())?, t.nodes());
            let expected: BTreeMap<u32, f64> = golden.report().by_index().map_err(|e| e.to_string())?;
            let got = ours.by_index().map_err(|e| e.to_string())?;
            for (state, phi) in expected {
                let mine = got
                    .get(&state)
                    .ok_or_else(|| format!("{}: no state {state}", path.display()))?;
                ensure((mine - phi).abs() <= 1e-6, || {
                    format!("{} state {state}: {mine} vs golden {phi}", path.display())
                })?;
                compared += 1;
            }
        }
        Ok(())
    })();
    if compared == 0 && result.is_ok() {
        return None;
    }
    Some(result.map(|()| format!("{compared} state values within 1e-6")))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("conscious circuit", conscious_circuit),
        ("unfolded circuit", unfolded_circuit),
        ("excitation semantics", excitation_semantics),
        ("minimization soundness", minimization_soundness),
        ("preservation oracle", preservation_oracle),
        ("feed-forward implies zero phi", feed_forward_phi),
        ("basis equivalence", basis_equivalence),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        match check() {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL {name}: {why}");
            }
        }
    }
    match oracle_cross_check() {
        None => println!("SKIP oracle cross-check: no pinned golden files in fixtures/golden"),
        Some(Ok(detail)) => println!("PASS oracle cross-check: {detail}"),
        Some(Err(why)) => {
            failed += 1;
            println!("FAIL oracle cross-check: {why}");
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
