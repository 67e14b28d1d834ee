use ehrelay_core::analytic::{self, IntegralMethod};
use ehrelay_core::mc;
use ehrelay_core::model::{substream, SystemParams, TargetRates};
use rand::Rng;

fn reference(snr_db: f64, lambda: f64) -> SystemParams {
    SystemParams::reference(10f64.powf(snr_db / 10.0), lambda).unwrap()
}

#[test]
fn marginals_match_simulation_at_20db() {
    let p = reference(20.0, 0.75);
    let t = TargetRates::symmetric(1.0).unwrap();
    let k = p.coeffs();
    let ev = mc::estimate_outage_events(&p, &t, 1_000_000, 21, mc::SnrModel::Approximate).unwrap();
    for (est, dir) in [(ev.first, analytic::Direction::One), (ev.second, analytic::Direction::Two)] {
        let f = analytic::marginal_outage(&p, &k, t.tau1, dir).unwrap();
        assert!((est.mean - f).abs() <= 3.0 * est.std_err, "{dir:?}: {} vs {f}", est.mean);
    }
}

#[test]
fn asymmetric_outage_matches_simulation() {
    let mut p = reference(15.0, 0.6).with_d1(0.3).unwrap();
    p.p2 = 10.0;
    let t = TargetRates::new(1.0, 0.5).unwrap();
    let e = mc::estimate_outage(&p, &t, 1_000_000, 8).unwrap();
    let exact = analytic::outage_exact(&p, &t, IntegralMethod::Quadrature).unwrap();
    assert!((e.mean - exact).abs() <= 3.0 * e.std_err, "{} vs {exact}", e.mean);
    let b = analytic::outage_bounds(&p, &t).unwrap();
    assert!(b.lower <= exact && exact <= b.upper);
}

#[test]
fn diversity_estimate_near_closed_form() {
    let p = reference(20.0, 0.75);
    let d = mc::estimate_diversity_fd(&p, 0.5, 20.0, 0.25, 1_000_000, 17).unwrap();
    let closed = analytic::dmt(0.5, 100.0, &p).unwrap();
    assert!((d.value - closed).abs() <= 3.0 * d.std_err, "{d:?} vs {closed}");
}

#[test]
fn diversity_std_err_shrinks_with_samples() {
    let p = reference(10.0, 0.75);
    let a = mc::estimate_diversity_fd(&p, 0.5, 10.0, 0.25, 250_000, 3).unwrap();
    let b = mc::estimate_diversity_fd(&p, 0.5, 10.0, 0.25, 1_000_000, 3).unwrap();
    assert!((b.std_err / a.std_err - 0.5).abs() < 0.05);
}

#[test]
fn relay_beats_direct_link_at_high_snr() {
    let p = reference(20.0, 0.5);
    let t = TargetRates::symmetric(1.0).unwrap();
    let base = ehrelay_core::model::NonCoopBaseline::new(&p);
    let relay = analytic::outage_exact(&p, &t, IntegralMethod::Quadrature).unwrap();
    assert!(relay < base.outage(&t));
    assert!(analytic::capacity_quadrature(&p).unwrap() > base.capacity().unwrap());
}

#[test]
fn non_coop_outage_matches_simulation() {
    let p = reference(10.0, 0.5);
    let t = TargetRates::new(1.0, 0.5).unwrap();
    let base = ehrelay_core::model::NonCoopBaseline::new(&p);
    let mut rng = substream(99, 0);
    let n = 1_000_000;
    let mut hits = 0u64;
    for _ in 0..n {
        let g: f64 = rng.sample(rand_distr::Exp1);
        let r1 = ehrelay_core::model::half_duplex_rate(base.mean_snr1 * g);
        let r2 = ehrelay_core::model::half_duplex_rate(base.mean_snr2 * g);
        hits += (r1 < t.t1 || r2 < t.t2) as u64;
    }
    let pm = hits as f64 / n as f64;
    let se = (pm * (1.0 - pm) / n as f64).sqrt();
    assert!((pm - base.outage(&t)).abs() <= 3.0 * se);
}

/// The tight upper capacity bound is checked over the full random operating
/// sweep (symmetric powers, default geometry exponents, lambda in
/// [0.05, 0.95], SNR in [0, 40] dB, d1 in [0.1, 0.9]). The lower bound and the
/// loose upper bound are rigorous; the tight upper bound rests on an
/// approximation of `J_l` that can fall below `C_e` at low SNR and large
/// lambda, and can exceed the Psi-sum when `c / (b omega)` is large. The
/// violating tuples are printed.
#[test]
fn capacity_bound_chain_over_random_sweep() {
    let mut rng = substream(2024, 0);
    let mut violations = Vec::new();
    for _ in 0..200 {
        let lam = rng.random_range(0.05..0.95);
        let db = rng.random_range(0.0..40.0);
        let d1 = rng.random_range(0.1..0.9);
        let p = reference(db, lam).with_d1(d1).unwrap();
        let ce = analytic::capacity_quadrature(&p).unwrap();
        let b = analytic::capacity_bounds(&p).unwrap();
        assert!(b.lower <= ce + 1e-9);
        assert!(ce <= b.loose_upper + 1e-9);
        if ce > b.tight_upper + 1e-9 {
            violations.push(format!("C_e > C_e^t at lambda {lam:.3}, {db:.2} dB, d1 {d1:.3}: {ce:.6} > {:.6}", b.tight_upper));
        }
        if b.tight_upper > b.loose_upper + 1e-9 {
            violations.push(format!(
                "C_e^t > Psi sum at lambda {lam:.3}, {db:.2} dB, d1 {d1:.3}: {:.6} > {:.6}",
                b.tight_upper, b.loose_upper
            ));
        }
    }
    for v in &violations {
        eprintln!("{v}");
    }
    assert!(violations.is_empty(), "{} violations of the tight-bound links", violations.len());
}
