use proptest::prelude::*;

use tempochain::qchain::{AttackKind, ChainError, QuantumChain, TamperAttack};
use tempochain::timeline::PhotonStatus;
use tempochain::{BitString, RandomSource};

fn records(max_blocks: usize) -> impl Strategy<Value = BitString> {
    (1..=max_blocks)
        .prop_flat_map(|n| proptest::collection::vec(any::<bool>(), 2 * n))
        .prop_map(BitString::new)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn build_then_decode_is_identity(bits in records(6), seed in any::<u64>()) {
        let mut rng = RandomSource::new(seed);
        let chain = QuantumChain::build(&bits, &mut rng).unwrap();
        prop_assert_eq!(chain.logical_bits(), &bits);
        prop_assert_eq!(chain.decode(&mut rng).unwrap(), bits.clone());
        prop_assert!((chain.validation_probability(&bits).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn only_the_newest_photon_survives(bits in records(5), seed in any::<u64>()) {
        let mut rng = RandomSource::new(seed);
        let chain = QuantumChain::build(&bits, &mut rng).unwrap();
        let n = bits.len() as u64 / 2;
        prop_assert_eq!(chain.timeline().clock().0, n);
        let live = chain.live_photons();
        prop_assert_eq!(live.len(), 1);
        prop_assert_eq!(Some(live[0]), chain.last_photon());
        for p in chain.timeline().photons() {
            if p.status == PhotonStatus::Absorbed {
                let t = p.absorbed_at.unwrap();
                prop_assert!(p.created_at <= t && t.0 <= n);
            }
        }
    }

    #[test]
    fn pauli_on_live_photon_is_always_caught(
        bits in records(4),
        seed in any::<u64>(),
        which in 0usize..3,
    ) {
        let mut rng = RandomSource::new(seed);
        let mut chain = QuantumChain::build(&bits, &mut rng).unwrap();
        let live = chain.last_photon().unwrap();
        let kinds: &[AttackKind] = match which {
            0 => &[AttackKind::BitFlip],
            1 => &[AttackKind::PhaseFlip],
            _ => &[AttackKind::BitFlip, AttackKind::PhaseFlip],
        };
        for &kind in kinds {
            chain.tamper(TamperAttack::new(kind, live, rng.split(1))).unwrap();
        }
        prop_assert!(chain.validation_probability(&bits).unwrap() < 1e-12);
        prop_assert_ne!(chain.decode(&mut rng).unwrap(), bits.clone());
    }

    #[test]
    fn history_is_read_only(bits in records(4), seed in any::<u64>(), pick in any::<prop::sample::Index>()) {
        let mut rng = RandomSource::new(seed);
        let mut chain = QuantumChain::build(&bits, &mut rng).unwrap();
        let absorbed: Vec<_> = chain
            .timeline()
            .photons()
            .filter(|p| !p.is_live())
            .map(|p| p.id)
            .collect();
        prop_assume!(!absorbed.is_empty());
        let target = *pick.get(&absorbed);
        let before = chain.state().cloned();
        let err = chain
            .tamper(TamperAttack::new(AttackKind::RandomUnitary, target, rng.split(1)))
            .unwrap_err();
        let is_temporal = matches!(err, ChainError::TemporalAccess { .. });
        prop_assert!(is_temporal);
        prop_assert_eq!(chain.state().cloned(), before);
    }
}
