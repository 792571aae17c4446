use cpi_core::analysis::{envelope_shape, fit_gaussian_dip, hilbert_envelope};
use cpi_core::cpi::{cpi_interferogram, CpiEngine, OpticalSetup};
use cpi_core::csvio::write_trace;
use cpi_core::hom::{coincidence_rate, hom_dip};
use cpi_core::material::{MaterialSpec, SampleStack, Taylor};
use cpi_core::scan::ScanSpec;
use cpi_core::units::{delay_to_stage, stage_to_delay, wavelength_nm, C_UM_PER_FS};
use cpi_core::wli::wli_interferogram;
use proptest::prelude::*;

fn taylor_sample(setup: &OpticalSetup, alpha: f64, beta: f64, higher: Vec<f64>) -> SampleStack {
    let m = MaterialSpec::taylor(
        "test",
        Taylor {
            group_delay_fs_per_mm: alpha,
            gvd_fs2_per_mm: beta,
            higher_orders: higher,
            reference_wavelength_nm: wavelength_nm(setup.effective_centre_omega()),
        },
    );
    SampleStack::single(m, 1.0).unwrap()
}

fn dip_fwhm_fs(setup: &OpticalSetup, centre_um: f64) -> f64 {
    let trace = cpi_interferogram(setup, &ScanSpec::centred(centre_um, 60.0, 1.0)).unwrap();
    fit_gaussian_dip(&trace.stage_positions, &trace.signal).unwrap().fwhm_fs
}

#[test]
fn quarter_wave_path_offset_only_shifts_the_dip() {
    let base = OpticalSetup::paper();
    let reference = CpiEngine::new(&base).unwrap();
    // a quarter-wave path in the sample arm, expressed as pure group delay
    let delta = 0.790 / 4.0 / C_UM_PER_FS;
    let mut shifted = base.clone();
    shifted.sample = taylor_sample(&base, delta, 0.0, vec![]);
    let engine = CpiEngine::new(&shifted).unwrap();
    let b = reference.signal(stage_to_delay(60.0)).unwrap();
    let mut worst = 0.0f64;
    for i in -40..=40 {
        let tau = i as f64 * 5.0;
        let d = (engine.signal(tau + delta).unwrap() - reference.signal(tau).unwrap()).abs() / b;
        worst = worst.max(d);
    }
    assert!(worst < 1e-3, "{worst}");
    // and neighbouring delays a quarter wave apart show no fringe
    let mut fringe = 0.0f64;
    for i in -40..=40 {
        let tau = i as f64 * 5.0;
        fringe = fringe.max((reference.signal(tau + delta).unwrap() - reference.signal(tau).unwrap()).abs() / b);
    }
    assert!(fringe < 0.01, "{fringe}");
}

#[test]
fn group_delay_moves_dip_like_the_oracle() {
    let mut setup = OpticalSetup::paper();
    setup.sample = taylor_sample(&setup, 400.0, 0.0, vec![]);
    let expected = delay_to_stage(400.0);
    assert!((setup.predicted_dip_position_um().unwrap() - expected).abs() < 1e-9);
    let scan = ScanSpec::centred(expected, 60.0, 1.0);
    let cpi = cpi_interferogram(&setup, &scan).unwrap();
    let fit = fit_gaussian_dip(&cpi.stage_positions, &cpi.signal).unwrap();
    assert!((fit.centre_um - expected).abs() < 1.0, "{}", fit.centre_um);
    let (spectrum, sample) = setup.hom_equivalent().unwrap();
    let hom = hom_dip(&spectrum, &sample, &scan).unwrap();
    let hom_fit = fit_gaussian_dip(&hom.stage_positions, &hom.signal).unwrap();
    assert!((hom_fit.centre_um - expected).abs() < 1.0);
    assert!(coincidence_rate(&spectrum, &sample, 400.0) < 1e-12);
}

#[test]
fn even_orders_broaden_white_light_but_not_the_dip() {
    let base = OpticalSetup::paper();
    let mut dispersed = base.clone();
    dispersed.sample = taylor_sample(&base, 0.0, 5000.0, vec![0.0, 1e6]);
    let cpi = dip_fwhm_fs(&dispersed, 0.0) / dip_fwhm_fs(&base, 0.0);
    assert!((cpi - 1.0).abs() < 0.03, "{cpi}");
    let wli_width = |s: &OpticalSetup| {
        let t = wli_interferogram(s, &ScanSpec::centred(0.0, 150.0, 0.04)).unwrap();
        envelope_shape(&t.delays, &hilbert_envelope(&t.signal)).unwrap().fwhm
    };
    let wli = wli_width(&dispersed) / wli_width(&base);
    assert!(wli > 1.5, "{wli}");
}

#[test]
fn identical_setups_give_identical_csv() {
    let setup = OpticalSetup::paper();
    let scan = ScanSpec::centred(0.0, 30.0, 2.0);
    let write = || {
        let mut out = Vec::new();
        write_trace(&mut out, &cpi_interferogram(&setup, &scan).unwrap()).unwrap();
        out
    };
    assert_eq!(write(), write());
}

#[test]
fn signal_is_positive() {
    let trace = cpi_interferogram(&OpticalSetup::paper(), &ScanSpec::centred(0.0, 60.0, 2.0)).unwrap();
    assert!(trace.signal.iter().all(|s| *s > 0.0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn even_order_phase_leaves_dip_width(beta in -5000.0f64..5000.0, quartic in -1e6f64..1e6) {
        let base = OpticalSetup::paper();
        let mut dispersed = base.clone();
        dispersed.sample = taylor_sample(&base, 0.0, beta, vec![0.0, quartic]);
        let ratio = dip_fwhm_fs(&dispersed, 0.0) / dip_fwhm_fs(&base, 0.0);
        prop_assert!((ratio - 1.0).abs() < 0.03, "{}", ratio);
    }

    #[test]
    fn constant_phase_leaves_dip_unchanged(delta in 0.05f64..3.0) {
        // pure group delay δ leaves only the constant phase −ω·δ on the sample arm
        let base = OpticalSetup::paper();
        let reference = CpiEngine::new(&base).unwrap();
        let mut shifted = base.clone();
        shifted.sample = taylor_sample(&base, delta, 0.0, vec![]);
        let engine = CpiEngine::new(&shifted).unwrap();
        let b = reference.signal(1000.0).unwrap();
        for tau in [-300.0, -70.0, 0.0, 35.0, 140.0] {
            let d = (engine.signal(tau + delta).unwrap() - reference.signal(tau).unwrap()).abs();
            prop_assert!(d / b < 1e-3);
        }
    }
}
