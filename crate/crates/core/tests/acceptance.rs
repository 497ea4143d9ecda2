//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails. Reference values come from the oracles
//! below, never from the library's own probability helpers.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_complex::Complex64;

use tempochain::classical::ClassicalChain;
use tempochain::consensus::{run_round, run_round_with_angles, AngleSet, NodeStrategy};
use tempochain::network::{BlockProposal, Network, NodeId};
use tempochain::qchain::{AttackKind, ChainError, QuantumChain, TamperAttack};
use tempochain::qsim::{bell_state, ghz_state, BellLabel, StateVector, Unitary2};
use tempochain::scenario::config::{ScenarioConfig, ScenarioKind};
use tempochain::scenario::report::render;
use tempochain::scenario::run::run_scenario;
use tempochain::timeline::PhotonId;
use tempochain::{BitString, RandomSource};

type Check = Result<(), String>;
type Criterion = (&'static str, fn() -> Check, Duration);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Check {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// `|count − N·p| ≤ 3·sqrt(N·p·(1−p))`.
fn three_sigma(count: usize, n: usize, p: f64) -> bool {
    let mean = n as f64 * p;
    let sd = (n as f64 * p * (1.0 - p)).sqrt();
    (count as f64 - mean).abs() <= 3.0 * sd + 1e-9
}

fn overlap(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.conj() * y)
        .sum::<Complex64>()
        .norm_sqr()
}

/// Two-qubit Bell vector `|0y⟩ + (−1)^x |1ȳ⟩` over basis |00⟩,|01⟩,|10⟩,|11⟩.
fn bell_vec(x: bool, y: bool) -> [Complex64; 4] {
    let mut v = [c(0.0); 4];
    let s = if x { -1.0 } else { 1.0 };
    v[y as usize] = c(FRAC_1_SQRT_2);
    v[2 | (!y) as usize] = c(s * FRAC_1_SQRT_2);
    v
}

/// GHZ vector for label `r`, qubit 0 most significant.
fn ghz_vec(r: &[bool]) -> Vec<Complex64> {
    let n = r.len();
    let mut v = vec![c(0.0); 1 << n];
    let mut idx0 = 0;
    for &b in &r[1..] {
        idx0 = (idx0 << 1) | b as usize;
    }
    let idx1 = (1 << (n - 1)) | (!idx0 & ((1 << (n - 1)) - 1));
    v[idx0] = c(FRAC_1_SQRT_2);
    v[idx1] = c(if r[0] { -FRAC_1_SQRT_2 } else { FRAC_1_SQRT_2 });
    v
}

fn bits(s: &str) -> BitString {
    s.parse().unwrap()
}

fn random_bits(len: usize, rng: &mut RandomSource) -> BitString {
    BitString::new((0..len).map(|_| rng.fair_bit()).collect())
}

fn superdense() -> Check {
    for x in [false, true] {
        for y in [false, true] {
            let state = bell_state(x, y);
            ensure(
                overlap(state.amplitudes(), &bell_vec(x, y)) > 1.0 - 1e-9,
                || format!("bell_state({x},{y}) differs from oracle"),
            )?;
            let probs = state.bell_probabilities(0, 1).map_err(|e| e.to_string())?;
            let want = BellLabel::from_bits(x, y) as usize;
            for (i, p) in probs.iter().enumerate() {
                let target = if i == want { 1.0 } else { 0.0 };
                ensure((p - target).abs() < 1e-9, || {
                    format!("({x},{y}) label {i} has probability {p}")
                })?;
            }
            let mut rng = RandomSource::new(u64::from(x) * 2 + u64::from(y));
            let m = state
                .project_bell(0, 1, &mut rng)
                .map_err(|e| e.to_string())?;
            ensure(m.label.bits() == (x, y), || {
                format!("decoded {:?}", m.label)
            })?;
        }
    }
    Ok(())
}

fn entanglement_swap() -> Check {
    const N: usize = 10_000;
    let psi_minus = bell_state(true, true);
    let start = psi_minus.tensor(&psi_minus);
    let root = RandomSource::new(6);
    let mut counts = [0usize; 4];
    for t in 0..N {
        let m = start
            .project_bell(1, 2, &mut root.split(t as u64))
            .map_err(|e| e.to_string())?;
        counts[m.label as usize] += 1;
        // Exterior (0,3) and interior (1,2) both end in the measured label.
        let (x, y) = m.label.bits();
        let pair = bell_vec(x, y);
        let mut want = vec![c(0.0); 16];
        for (i, w) in want.iter_mut().enumerate() {
            let (q0, q1, q2, q3) = (i >> 3 & 1, i >> 2 & 1, i >> 1 & 1, i & 1);
            *w = pair[q0 << 1 | q3] * pair[q1 << 1 | q2];
        }
        let f = overlap(&want, m.post_state.amplitudes());
        ensure((f - 1.0).abs() < 1e-9, || {
            format!("trial {t}: exterior fidelity {f} for {}", m.label)
        })?;
    }
    for (label, &n) in BellLabel::ALL.iter().zip(&counts) {
        ensure(three_sigma(n, N, 0.25), || {
            format!("{label} frequency {n}/{N} outside 1/4 ± 3σ")
        })?;
    }
    Ok(())
}

fn fusion() -> Check {
    const N: usize = 10_000;
    let psi_plus = bell_state(false, true);
    let start = psi_plus.tensor(&psi_plus);
    let mut want = vec![c(0.0); 16];
    want[0b0110] = c(FRAC_1_SQRT_2);
    want[0b1001] = c(FRAC_1_SQRT_2);
    let root = RandomSource::new(8);
    let mut successes = 0;
    for t in 0..N {
        let f = start
            .fuse_pbs(1, 2, &mut root.split(t as u64))
            .map_err(|e| e.to_string())?;
        if f.success {
            successes += 1;
            let fid = overlap(&want, f.post_state.amplitudes());
            ensure((fid - 1.0).abs() < 1e-9, || {
                format!("trial {t}: success fidelity {fid}")
            })?;
        }
    }
    ensure(three_sigma(successes, N, 0.5), || {
        format!("success frequency {successes}/{N} outside 0.5 ± 3σ")
    })
}

fn chain_roundtrip() -> Check {
    let root = RandomSource::new(9);
    for n in 1..=8usize {
        for t in 0..100u64 {
            let mut rng = root.split((n as u64) << 32 | t);
            let records = random_bits(2 * n, &mut rng);
            let chain = QuantumChain::build(&records, &mut rng).map_err(|e| e.to_string())?;
            ensure(
                overlap(
                    &ghz_vec(records.as_slice()),
                    chain.state().unwrap().amplitudes(),
                ) > 1.0 - 1e-9,
                || format!("n={n} trial {t}: state is not GHZ({records})"),
            )?;
            let decoded = chain.decode(&mut rng).map_err(|e| e.to_string())?;
            ensure(decoded == records, || {
                format!("n={n} trial {t}: {records} decoded as {decoded}")
            })?;
        }
    }
    Ok(())
}

fn worked_example() -> Check {
    let mut rng = RandomSource::new(3);
    let mut chain = QuantumChain::new();
    for (record, logical) in [("00", "00"), ("10", "0010"), ("11", "001011")] {
        chain
            .extend(&bits(record), &mut rng)
            .map_err(|e| e.to_string())?;
        ensure(chain.logical_bits().to_string() == logical, || {
            format!("after {record}: logical {}", chain.logical_bits())
        })?;
        if logical.len() >= 4 {
            let f = overlap(
                &ghz_vec(bits(logical).as_slice()),
                chain.state().unwrap().amplitudes(),
            );
            ensure((f - 1.0).abs() < 1e-9, || {
                format!("{logical}: fidelity {f}")
            })?;
        }
    }
    Ok(())
}

fn tamper_detection() -> Check {
    const N: usize = 1_000;
    let root = RandomSource::new(10);
    let paulis: [(&str, &[AttackKind]); 3] = [
        ("X", &[AttackKind::BitFlip]),
        ("Z", &[AttackKind::PhaseFlip]),
        ("XZ", &[AttackKind::PhaseFlip, AttackKind::BitFlip]),
    ];
    for n in 1..=3u64 {
        for (p, (name, kinds)) in paulis.iter().enumerate() {
            for t in 0..N as u64 {
                let mut rng = root.split(n << 40 | (p as u64) << 32 | t);
                let records = random_bits(2 * n as usize, &mut rng);
                let mut chain =
                    QuantumChain::build(&records, &mut rng).map_err(|e| e.to_string())?;
                let live = chain.last_photon().unwrap();
                for &kind in kinds.iter() {
                    chain
                        .tamper(TamperAttack::new(kind, live, rng.split(1)))
                        .map_err(|e| e.to_string())?;
                }
                let ok = chain
                    .validate(&records, &mut rng)
                    .map_err(|e| e.to_string())?;
                ensure(!ok, || format!("n={n} {name} trial {t}: validate passed"))?;
            }
        }

        // Validation passes w.p. |tr U|²/4 per trial; over Haar U that is 1/4.
        let mut passes = 0;
        for t in 0..N as u64 {
            let mut rng = root.split(n << 40 | 7 << 32 | t);
            let records = random_bits(2 * n as usize, &mut rng);
            let mut chain = QuantumChain::build(&records, &mut rng).map_err(|e| e.to_string())?;
            let attack_rng = rng.split(1);
            let u = Unitary2::haar_random(&mut attack_rng.clone());
            let m = u.matrix();
            let predicted = (m[0][0] + m[1][1]).norm_sqr() / 4.0;
            let live = chain.last_photon().unwrap();
            chain
                .tamper(TamperAttack::new(
                    AttackKind::RandomUnitary,
                    live,
                    attack_rng,
                ))
                .map_err(|e| e.to_string())?;
            let p = chain
                .validation_probability(&records)
                .map_err(|e| e.to_string())?;
            ensure((p - predicted).abs() < 1e-9, || {
                format!("n={n} Haar trial {t}: overlap {p} vs {predicted}")
            })?;
            if chain
                .validate(&records, &mut rng)
                .map_err(|e| e.to_string())?
            {
                passes += 1;
            }
        }
        ensure(three_sigma(passes, N, 0.25), || {
            format!("n={n} Haar pass count {passes}/{N} outside 1/4 ± 3σ")
        })?;
    }

    let kinds = [
        AttackKind::BitFlip,
        AttackKind::PhaseFlip,
        AttackKind::RandomUnitary,
        AttackKind::ZMeasure,
    ];
    for t in 0..N as u64 {
        let mut rng = root.split(99 << 40 | t);
        let n = 2 + rng.below(3);
        let records = random_bits(2 * n, &mut rng);
        let mut chain = QuantumChain::build(&records, &mut rng).map_err(|e| e.to_string())?;
        let absorbed: Vec<PhotonId> = chain
            .timeline()
            .photons()
            .filter(|p| !p.is_live())
            .map(|p| p.id)
            .collect();
        let target = absorbed[rng.below(absorbed.len())];
        let kind = kinds[rng.below(kinds.len())];
        let before = chain.state().unwrap().clone();
        match chain.tamper(TamperAttack::new(kind, target, rng.split(1))) {
            Err(ChainError::TemporalAccess { .. }) => {}
            other => return Err(format!("attempt {t} on {target}: {other:?}")),
        }
        ensure(chain.state() == Some(&before), || {
            format!("attempt {t}: denied attack changed the state")
        })?;
    }
    Ok(())
}

/// Born probability of the joint θ-basis outcome `o` on `ψ`.
fn theta_born(psi: &[Complex64], thetas: &[f64], o: &[bool]) -> f64 {
    let n = thetas.len();
    let mut amp = c(0.0);
    for (idx, a) in psi.iter().enumerate() {
        let mut w = c(1.0);
        for q in 0..n {
            let bit = idx >> (n - 1 - q) & 1;
            // ⟨±θ| = (⟨0| ± e^{−iθ}⟨1|)/√2
            w *= if bit == 0 {
                c(FRAC_1_SQRT_2)
            } else {
                let s = if o[q] { -FRAC_1_SQRT_2 } else { FRAC_1_SQRT_2 };
                Complex64::from_polar(s, -thetas[q])
            };
        }
        amp += w * a;
    }
    amp.norm_sqr()
}

fn theta_protocol() -> Check {
    let root = RandomSource::new(12);
    for n in 2..=4usize {
        let ghz = ghz_state(&BitString::new(vec![false; n])).map_err(|e| e.to_string())?;
        let honest = vec![NodeStrategy::Honest; n];
        let mut rng = root.split(n as u64);
        for r in 0..1_000 {
            ensure(
                run_round(&ghz, &honest, &mut rng)
                    .map_err(|e| e.to_string())?
                    .passed(),
                || format!("n={n}: honest GHZ round {r} failed"),
            )?;
        }
        let mut flip = honest.clone();
        flip[n - 1] = NodeStrategy::FlipReport;
        for r in 0..1_000 {
            ensure(
                !run_round(&ghz, &flip, &mut rng)
                    .map_err(|e| e.to_string())?
                    .passed(),
                || format!("n={n}: round {r} passed with a flip_report node"),
            )?;
        }
        let product = StateVector::zero(n).map_err(|e| e.to_string())?;
        let passes = (0..10_000)
            .filter(|_| {
                run_round(&product, &honest, &mut rng)
                    .map(|v| v.passed())
                    .unwrap_or(false)
            })
            .count();
        ensure(three_sigma(passes, 10_000, 0.5), || {
            format!("n={n}: product pass count {passes}/10000 outside 0.5 ± 3σ")
        })?;
    }

    // Sampled joint outcomes against the Born oracle, n ≤ 3.
    const ROUNDS: usize = 10_000;
    let mut case = 0u64;
    for n in 2..=3usize {
        let mut srng = root.split(100 + n as u64);
        let random_state = StateVector::normalized(
            (0..1 << n)
                .map(|_| Complex64::new(srng.standard_normal(), srng.standard_normal()))
                .collect(),
        )
        .map_err(|e| e.to_string())?;
        let mut label = vec![false; n];
        label[0] = true;
        label[n - 1] = true;
        let states = [
            ghz_state(&BitString::new(label)).map_err(|e| e.to_string())?,
            StateVector::zero(n).map_err(|e| e.to_string())?,
            random_state,
        ];
        let mut angle_sets = vec![vec![0.0; n]];
        let mut fixed = vec![PI / 3.0; n - 1];
        fixed.push((PI - (PI / 3.0 * (n - 1) as f64) % PI) % PI);
        angle_sets.push(fixed);
        angle_sets.push(
            tempochain::consensus::generate_angles(n, &mut srng)
                .map_err(|e| e.to_string())?
                .thetas()
                .to_vec(),
        );
        let honest = vec![NodeStrategy::Honest; n];
        for state in &states {
            for thetas in &angle_sets {
                case += 1;
                let mut rng = root.split(1_000 + case);
                // Exact path probabilities from sequential measurement.
                for _ in 0..200 {
                    let (mut psi, mut joint, mut o) = (state.clone(), 1.0, Vec::new());
                    for (q, &theta) in thetas.iter().enumerate() {
                        let m = psi
                            .measure_theta_basis(q, theta, &mut rng)
                            .map_err(|e| e.to_string())?;
                        joint *= m.probability;
                        o.push(m.outcome);
                        psi = m.post_state;
                    }
                    let p = theta_born(state.amplitudes(), thetas, &o);
                    ensure((joint - p).abs() < 1e-12, || {
                        format!("n={n} θ={thetas:?} outcome {o:?}: path probability {joint} vs {p}")
                    })?;
                }
                let mut counts = vec![0usize; 1 << n];
                for _ in 0..ROUNDS {
                    let angles = AngleSet::new(thetas.clone()).map_err(|e| e.to_string())?;
                    let round = run_round_with_angles(state, angles, &honest, &mut rng)
                        .map_err(|e| e.to_string())?;
                    let idx = round
                        .outcomes
                        .iter()
                        .fold(0, |acc, &b| acc << 1 | b as usize);
                    counts[idx] += 1;
                }
                for (idx, &count) in counts.iter().enumerate() {
                    let o: Vec<bool> = (0..n).map(|q| idx >> (n - 1 - q) & 1 == 1).collect();
                    let p = theta_born(state.amplitudes(), thetas, &o);
                    ensure(three_sigma(count, ROUNDS, p), || {
                        format!("n={n} θ={thetas:?} outcome {o:?}: {count}/{ROUNDS} vs p={p}")
                    })?;
                }
            }
        }
    }
    Ok(())
}

fn network_locality() -> Check {
    let root = RandomSource::new(14);
    let kinds = [
        AttackKind::BitFlip,
        AttackKind::PhaseFlip,
        AttackKind::RandomUnitary,
        AttackKind::ZMeasure,
    ];
    for episode in 0..100u64 {
        let mut rng = root.split(episode);
        let nodes = 2 + rng.below(3);
        let mut net = Network::new(&vec![NodeStrategy::Honest; nodes]);
        let ghz = ghz_state(&BitString::new(vec![false; nodes])).map_err(|e| e.to_string())?;
        for _ in 0..1 + rng.below(3) {
            let proposal = BlockProposal::from_state(random_bits(2, &mut rng), ghz.clone());
            net.propose_and_commit(&proposal, &mut rng)
                .map_err(|e| e.to_string())?;
        }
        let before: Vec<StateVector> = net
            .nodes()
            .iter()
            .map(|n| n.local_chain.state().unwrap().clone())
            .collect();
        let victim = rng.below(nodes);
        let chain = &net.nodes()[victim].local_chain;
        let target = if rng.fair_bit() {
            chain.last_photon().unwrap()
        } else {
            chain.qubit_photons()[rng.below(chain.qubit_photons().len())]
        };
        let kind = kinds[rng.below(kinds.len())];
        net.node_tamper(
            NodeId(victim as u32),
            TamperAttack::new(kind, target, rng.split(1)),
        )
        .map_err(|e| e.to_string())?;
        for (i, node) in net.nodes().iter().enumerate().filter(|(i, _)| *i != victim) {
            let f = overlap(
                before[i].amplitudes(),
                node.local_chain.state().unwrap().amplitudes(),
            );
            ensure((f - 1.0).abs() < 1e-9, || {
                format!("episode {episode}: node {i} fidelity {f} after attack on node {victim}")
            })?;
        }
    }
    Ok(())
}

fn classical_contrast() -> Check {
    let payloads: Vec<String> = (0..6).map(|i| format!("block-{i}")).collect();
    let chain = ClassicalChain::build(&payloads);
    ensure(chain.validate_chain().is_none(), || {
        "honest chain invalid".into()
    })?;
    for k in 0..=4usize {
        let forged = chain
            .tamper_block(k, b"forged")
            .map_err(|e| e.to_string())?;
        ensure(forged.validate_chain() == Some(k + 1), || {
            format!("k={k}: first_invalid {:?}", forged.validate_chain())
        })?;
        ensure(forged.blocks()[..k] == chain.blocks()[..k], || {
            format!("k={k}: prefix changed")
        })?;

        let mut rng = RandomSource::new(15 + k as u64);
        let records = random_bits(12, &mut rng);
        let mut q = QuantumChain::build(&records, &mut rng).map_err(|e| e.to_string())?;
        let early = q.blocks()[k].early;
        ensure(
            matches!(
                q.tamper(TamperAttack::new(AttackKind::BitFlip, early, rng.split(1))),
                Err(ChainError::TemporalAccess { .. })
            ),
            || format!("k={k}: historical photon was writable"),
        )?;
        let live = q.last_photon().unwrap();
        q.tamper(TamperAttack::new(AttackKind::BitFlip, live, rng.split(2)))
            .map_err(|e| e.to_string())?;
        let mass = overlap(
            &ghz_vec(records.as_slice()),
            q.state().unwrap().amplitudes(),
        );
        ensure(mass < 1e-12, || {
            format!("k={k}: original string keeps mass {mass}")
        })?;
        for _ in 0..200 {
            ensure(
                q.decode(&mut rng).map_err(|e| e.to_string())? != records,
                || format!("k={k}: tampered chain decoded to the original"),
            )?;
        }
    }

    let config = ScenarioConfig {
        scenario: ScenarioKind::Compare,
        seed: 2024,
        blocks: 6,
        tamper_index: 3,
        trials: 20,
        ..Default::default()
    };
    let run = |cfg: &ScenarioConfig| -> Result<String, String> {
        let report = run_scenario(cfg).map_err(|e| e.to_string())?;
        ensure(report.passed(), || {
            format!("scenario self-checks: {:?}", report.failures)
        })?;
        Ok(render(&report, cfg.format))
    };
    let first = run(&config)?;
    ensure(first == run(&config)?, || {
        "reports differ across equal-seed runs".into()
    })?;
    let golden = include_str!("golden/compare_seed2024.json");
    ensure(first == golden, || "report differs from golden file".into())?;
    let summary: serde_json::Value = serde_json::from_str(&first).map_err(|e| e.to_string())?;
    ensure(summary["summary"]["first_invalid"] == 4, || {
        format!(
            "golden first_invalid {}",
            summary["summary"]["first_invalid"]
        )
    })
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("superdense roundtrip", superdense, Duration::from_secs(1)),
        (
            "entanglement swap",
            entanglement_swap,
            Duration::from_secs(5),
        ),
        ("fusion", fusion, Duration::from_secs(5)),
        ("chain roundtrip", chain_roundtrip, Duration::from_secs(60)),
        ("worked example", worked_example, Duration::from_secs(1)),
        (
            "tamper detection",
            tamper_detection,
            Duration::from_secs(30),
        ),
        ("theta protocol", theta_protocol, Duration::from_secs(60)),
        (
            "network locality",
            network_locality,
            Duration::from_secs(30),
        ),
        (
            "classical contrast",
            classical_contrast,
            Duration::from_secs(5),
        ),
    ];
    let mut failed = 0;
    for (name, check, budget) in criteria {
        let started = Instant::now();
        let result = check();
        let elapsed = started.elapsed();
        let result = result.and_then(|()| {
            ensure(elapsed <= budget, || {
                format!(
                    "took {:.2}s, budget {}s",
                    elapsed.as_secs_f64(),
                    budget.as_secs()
                )
            })
        });
        match result {
            Ok(()) => println!("PASS  {name} ({:.2}s)", elapsed.as_secs_f64()),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name} ({:.2}s): {why}", elapsed.as_secs_f64());
            }
        }
    }
    println!("{} passed, {failed} failed", 9 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
