//! Frozen values from independent high-precision evaluations.

use std::f64::consts::PI;

use deco_core::chaos::{self, sample_levels, LevelKind};
use deco_core::dephasing::{gamma_t, asymptotic_rate};
use deco_core::formfactor::SpectralWeight;
use deco_core::stats;

fn rel(a: f64, b: f64) -> f64 {
    (a / b - 1.0).abs()
}

// 8 − 8√(π/2t)·C(√(2t/π)) with the Fresnel cosine integral, 30 digits.
const POWER_LAW_HALF: [(f64, f64); 5] = [
    (1.0, 0.76380609679782334820),
    (10.0, 6.6145350704622540456),
    (500.0, 7.7795354438724000028),
    (750.0, 7.8129656648446640202),
    (1000.0, 7.8381605171681832705),
];

#[test]
fn power_law_half_matches_fresnel_form() {
    let j = SpectralWeight::power_law(1.0, 0.5, 0.0, 1.0).unwrap();
    for (t, g) in POWER_LAW_HALF {
        assert!(rel(gamma_t(&j, t).unwrap(), g) < 1e-9, "t = {t}");
    }
}

#[test]
fn late_time_deficit_is_the_infrared_tail() {
    // γ_t − 8 → −4√(π/2t): the saturation value is approached only as t^(-1/2).
    let j = SpectralWeight::power_law(1.0, 0.5, 0.0, 1.0).unwrap();
    for t in [2000.0, 4000.0, 8000.0] {
        let deficit = 8.0 - gamma_t(&j, t).unwrap();
        let tail = 4.0 * (PI / (2.0 * t)).sqrt();
        assert!((deficit - tail).abs() < 0.03 * tail, "t = {t}: {deficit} vs {tail}");
    }
}

// γ_t = 4ct[F(ω_c t) − F(ω_min t)], F(u) = Si(u) − (1 − cos u)/u.
const INVERSE_SQUARE: [(f64, f64); 3] = [
    (5.0, 0.31018277861115563),
    (100.0, 6.2789820041803032),
    (1000.0, 62.807853194520996),
];

#[test]
fn inverse_square_samples() {
    let j = SpectralWeight::inverse_square(0.01, 1e-6, 10.0).unwrap();
    for (t, g) in INVERSE_SQUARE {
        assert!(rel(gamma_t(&j, t).unwrap(), g) < 1e-8, "t = {t}");
    }
}

#[test]
fn inverse_square_rate_fit() {
    let j = SpectralWeight::inverse_square(0.01, 1e-6, 10.0).unwrap();
    let est = asymptotic_rate(&j, (5.0, 1000.0), 200).unwrap();
    assert!(rel(est.slope, 0.062811749621871465) < 1e-9);
    assert!((est.intercept + 0.00061416420530459849).abs() < 1e-9);
    assert!(rel(est.analytic_candidate.unwrap(), 2.0 * PI * 0.01) < 1e-15);
}

#[test]
fn goe_spacings_agree_with_surmise_samples() {
    let goe = sample_levels(LevelKind::Goe, 1000, 1.0, 17).unwrap();
    let wig = sample_levels(LevelKind::WignerSurmise, 1000, 1.0, 17).unwrap();
    let ks = stats::ks_two_sample(&goe.spacings(), &wig.spacings());
    assert!(ks.p_value > 0.01, "{ks:?}");
}

#[test]
fn mean_spacing_of_large_ensembles() {
    for kind in [LevelKind::WignerSurmise, LevelKind::Poisson] {
        let e = sample_levels(kind, 10_000, 0.3, 99).unwrap();
        assert!(rel(e.mean_spacing(), 0.3) < 0.02, "{kind}");
    }
    let goe = sample_levels(LevelKind::Goe, 1000, 0.3, 99).unwrap();
    assert!(rel(goe.mean_spacing(), 0.3) < 0.02);
}

#[test]
fn poisson_has_ten_times_more_small_spacings() {
    let frac = |kind| {
        let s = sample_levels(kind, 100_001, 1.0, 3).unwrap().spacings();
        s.iter().filter(|&&x| x < 0.1).count() as f64 / s.len() as f64
    };
    let (w, p) = (frac(LevelKind::WignerSurmise), frac(LevelKind::Poisson));
    assert!(p / w > 10.0, "{p} / {w}");
    assert!((p - (1.0 - (-0.1f64).exp())).abs() < 4e-3);
}

#[test]
fn wigner_spectrum_tracks_surmise_at_low_frequency() {
    // R̂(ω) ≈ πQ̄²p(ω) for σ ≪ ω ≪ Δ
    let mut cfg = chaos::EnsembleConfig::new(LevelKind::WignerSurmise, 1000, 1.0);
    cfg.realizations = 40;
    let est = chaos::run_ensemble(&cfg, 5).unwrap();
    let k = est.omega.iter().position(|&w| (w - 0.3).abs() < 1e-9).unwrap();
    let expect = PI * est.q_bar_sq * chaos::wigner_pdf(0.3, 1.0);
    assert!(rel(est.r[k], expect) < 0.1, "{} vs {expect}", est.r[k]);
}
