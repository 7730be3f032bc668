use nalgebra::{DMatrix, DVector};
use portfolio_admm::penalty::{
    bb_scalars, rbb_scalar, spectral_rho, PenaltyConfig, PenaltyKind, SpectralInput,
    SpectralMemory, SpectralPoint,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TAUS: [f64; 6] = [0.0, 0.1, 1.0, 10.0, 1e6, 1e12];

fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.random::<f64>() * 2.0 - 1.0)
}

/// Secant pair with `dg = H·dv` for a random symmetric positive definite `H`.
fn spd_pair(rng: &mut ChaCha8Rng, n: usize) -> (DVector<f64>, DVector<f64>) {
    let g = DMatrix::from_fn(n, n, |_, _| rng.random::<f64>() - 0.5);
    let h = &g * g.transpose() + DMatrix::identity(n, n) * 1e-3;
    let dv = random_vec(rng, n);
    let dg = &h * &dv;
    (dv, dg)
}

#[test]
fn rbb_interpolates_between_bb_scalars() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..2_000 {
        let n = rng.random_range(2..9);
        let (dv, dg) = spd_pair(&mut rng, n);
        let s = bb_scalars(&dv, &dg).unwrap();
        let bb2 = s.bb2.unwrap();
        let mut prev = f64::NEG_INFINITY;
        for tau in TAUS {
            let v = rbb_scalar(&dv, &dg, tau).unwrap();
            assert!(v >= s.bb1 - 1e-12 && v <= bb2 + 1e-12);
            assert!(v >= prev - 1e-12 * v.abs());
            prev = v;
        }
        assert_eq!(rbb_scalar(&dv, &dg, 0.0).unwrap(), s.bb1);
        let top = rbb_scalar(&dv, &dg, 1e12).unwrap();
        assert!((top - bb2).abs() <= 1e-6 * bb2);
    }
}

fn snapshot(rng: &mut ChaCha8Rng, n: usize) -> SpectralPoint {
    SpectralPoint {
        x: random_vec(rng, n),
        z: random_vec(rng, n),
        y: random_vec(rng, n),
        ybar: random_vec(rng, n),
    }
}

fn scaled(p: &SpectralPoint, s: f64) -> SpectralPoint {
    SpectralPoint {
        x: &p.x * s,
        z: &p.z * s,
        y: &p.y * s,
        ybar: &p.ybar * s,
    }
}

fn emitted_rho(kind: PenaltyKind, prev: &SpectralPoint, cur: &SpectralPoint, r: f64, d: f64) -> f64 {
    let cfg = PenaltyConfig::with_kind(kind);
    let memory = SpectralMemory {
        last: Some(prev.clone()),
        tau: 0.0,
        last_rho: 0.7,
    };
    let input = SpectralInput {
        x: &cur.x,
        z: &cur.z,
        y: &cur.y,
        ybar: &cur.ybar,
        rho: 0.7,
        r_norm: r,
        d_norm: d,
    };
    spectral_rho(&memory, &input, &cfg).rho
}

#[test]
fn emitted_rho_is_scale_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..500 {
        let n = rng.random_range(2..10);
        let prev = snapshot(&mut rng, n);
        let cur = snapshot(&mut rng, n);
        let (r, d) = (rng.random::<f64>(), rng.random::<f64>());
        for kind in [PenaltyKind::SpectralBb, PenaltyKind::RegularizedBb] {
            let base = emitted_rho(kind, &prev, &cur, r, d);
            for s in [1e-3, 1e3] {
                let moved = emitted_rho(kind, &scaled(&prev, s), &scaled(&cur, s), r * s, d * s);
                assert!((moved - base).abs() <= 1e-12 * base, "{kind} s={s}: {base} vs {moved}");
            }
        }
    }
}

#[test]
fn non_spectral_kinds_keep_rho() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let prev = snapshot(&mut rng, 4);
    let cur = snapshot(&mut rng, 4);
    for kind in [PenaltyKind::Fixed, PenaltyKind::ResidualBalancing] {
        assert_eq!(emitted_rho(kind, &prev, &cur, 1.0, 1.0), 0.7);
    }
}

proptest! {
    #[test]
    fn rbb_stays_in_bb_interval(
        seed in any::<u64>(),
        n in 2usize..12,
        tau in 0.0f64..1e8,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (dv, dg) = spd_pair(&mut rng, n);
        let s = bb_scalars(&dv, &dg).unwrap();
        let v = rbb_scalar(&dv, &dg, tau).unwrap();
        prop_assert!(v >= s.bb1 - 1e-12 && v <= s.bb2.unwrap() + 1e-12);
        prop_assert!(s.corr > 0.0 && s.corr <= 1.0 + 1e-15);
    }

    #[test]
    fn spectral_rho_respects_bounds(seed in any::<u64>(), n in 2usize..8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let prev = snapshot(&mut rng, n);
        let cur = snapshot(&mut rng, n);
        for kind in [PenaltyKind::SpectralBb, PenaltyKind::RegularizedBb] {
            let rho = emitted_rho(kind, &prev, &cur, rng.random(), rng.random());
            prop_assert!((1e-8..=1e8).contains(&rho));
        }
    }
}
