//! Main-term constants and trend diagnostics on the Δ system.

use std::sync::OnceLock;

use heckelab::dseries::{l_value_at_one, prime_divisors, LKind};
use heckelab::eigencore::EigenSystem;
use heckelab::kfull::KernelFunction;
use heckelab::sumlab::{compute_c2, error_exponent_estimate, progression_trend, C1Model};

fn eigen() -> &'static EigenSystem {
    static SYSTEM: OnceLock<EigenSystem> = OnceLock::new();
    SYSTEM.get_or_init(|| EigenSystem::delta(1_000_001).unwrap())
}

fn model() -> &'static C1Model {
    static MODEL: OnceLock<C1Model> = OnceLock::new();
    MODEL.get_or_init(|| C1Model::new(eigen(), 200_000, 200_000).unwrap())
}

#[test]
fn c1_is_positive_with_positive_factors() {
    let c = model().base();
    assert!(c.sym2.value > 0.0 && c.sym4.value > 0.0 && c.u_at_one > 0.0);
    assert!(c.c1 > 0.0 && c.bracket < 0.1 * c.c1, "{c:?}");
}

#[test]
fn c1_ratio_matches_removed_euler_factors() {
    let m = model();
    for q in [2u64, 3, 4, 5, 7, 12, 15, 30] {
        let direct = m.c1(q).unwrap();
        let closed = m.c1_for_primes(&prime_divisors(q));
        let allowed = direct.bracket + m.base().bracket * closed / m.base().c1;
        assert!((direct.c1 - closed).abs() <= allowed, "q = {q}: {} vs {closed} (allowed {allowed})", direct.c1);
    }
}

#[test]
fn c1_stable_under_larger_cutoffs() {
    let small = C1Model::new(eigen(), 50_000, 50_000).unwrap();
    let (a, b) = (small.base(), model().base());
    assert!((a.c1 - b.c1).abs() <= a.bracket + b.bracket, "{} vs {} (brackets {}, {})", a.c1, b.c1, a.bracket, b.bracket);
}

#[test]
fn l_values_stable_under_larger_cutoff() {
    for kind in [LKind::Sym2, LKind::Sym4] {
        let coarse = l_value_at_one(kind, 1, 10_000, eigen()).unwrap();
        let fine = l_value_at_one(kind, 1, 100_000, eigen()).unwrap();
        assert!((coarse.value - fine.value).abs() <= coarse.bracket, "{kind:?}: {coarse:?} vs {fine:?}");
    }
}

#[test]
fn c2_doubling_stays_inside_bracket() {
    let m = model();
    let at = |k_max, d_max| {
        compute_c2(KernelFunction::ConstOne, 2, |p: &[u64]| m.c1_for_primes(p), k_max, d_max).unwrap()
    };
    let (base, doubled) = (at(100_000, 1000), at(200_000, 2000));
    assert!((base.value - doubled.value).abs() < base.bracket, "{base:?} vs {doubled:?}");
}

#[test]
fn progression_ratio_approaches_one() {
    let grid = [10_000u64, 100_000, 1_000_000];
    let rows = progression_trend(eigen(), 1, &grid, model().base()).unwrap();
    let gaps: Vec<f64> = rows.iter().map(|r| (r.ratio - 1.0).abs()).collect();
    assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");

    let c5 = model().c1(5).unwrap();
    let rows = progression_trend(eigen(), 5, &grid, &c5).unwrap();
    assert!(rows.iter().all(|r| r.s > 0.0 && !r.in_stated_range));
    let slope = error_exponent_estimate(&rows.iter().map(|r| (r.x as f64, r.s - r.main)).collect::<Vec<_>>()).unwrap();
    assert!(slope.is_finite());
}
