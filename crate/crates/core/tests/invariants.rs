use faer::{c64, Mat};
use proptest::prelude::*;

use squeezespin::lindblad::{liouvillian, steady_state};
use squeezespin::model::{resonator_annihilation, squeezed_frame_params};
use squeezespin::moments::{moment_generator, steady_moments, MomentLabel, MomentOrder};
use squeezespin::operators::{bogoliubov_pair, fock_ladder, OperatorMatrix};
use squeezespin::pipeline::{linspace, Session};
use squeezespin::spectra::{find_peaks, linewidth, Spectrum, SpectrumTarget};
use squeezespin::{BathSpec, ModelParams};

fn lorentz(w: f64, w0: f64, fwhm: f64) -> f64 {
    let u = 2.0 * (w - w0) / fwhm;
    1.0 / (1.0 + u * u)
}

fn op_from(dim: usize, entries: &[(f64, f64)]) -> OperatorMatrix {
    OperatorMatrix::from_fn(dim, "m", |i, j| {
        let (re, im) = entries[i * dim + j];
        c64::new(re, im)
    })
}

fn entries(dim: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), dim * dim)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn peaks_invariant_under_scaling(c1 in -0.3..-0.1f64, c2 in 0.1..0.3f64, w in 0.01..0.05f64, h2 in 0.2..1.0f64, scale in 1e-6..1e6f64) {
        let omega = linspace(-1.0, 1.0, 801);
        let values: Vec<f64> = omega.iter().map(|&x| lorentz(x, c1, w) + h2 * lorentz(x, c2, w)).collect();
        let s = Spectrum::new(omega, values, SpectrumTarget::Custom("two".into())).unwrap();
        let p = find_peaks(&s).unwrap();
        let q = find_peaks(&s.scaled(scale)).unwrap();
        prop_assert_eq!(p.len(), q.len());
        for (a, b) in p.iter().zip(&q) {
            prop_assert!((a.omega - b.omega).abs() < 1e-12);
            prop_assert!((b.height / a.height - scale).abs() < 1e-9 * scale);
        }
    }

    #[test]
    fn generator_preserves_trace_and_adjoint(h in entries(4), l in entries(4), x in entries(4)) {
        let h = op_from(4, &h);
        let h = (&h + &h.adjoint()) * 0.5;
        let liou = liouvillian(&h, &[op_from(4, &l)]).unwrap();
        let x = op_from(4, &x);
        let lx = liou.apply(x.mat());
        let tr: c64 = (0..4).map(|i| lx[(i, i)]).sum();
        prop_assert!(tr.norm() < 1e-12);
        let lxd = liou.apply(x.adjoint().mat());
        let defect = (&lxd - lx.adjoint().to_owned()).norm_max();
        prop_assert!(defect < 1e-12);
    }

    #[test]
    fn squeezing_round_trip(r in 0.0..2.5f64, w in 0.2..3.0f64) {
        let p = ModelParams { omega_r_t: w, ..ModelParams::default() }.with_r(r);
        let sq = squeezed_frame_params(&p).unwrap();
        prop_assert!(((2.0 * sq.r).tanh() * w - p.lambda).abs() <= 1e-14 * p.lambda.abs().max(1e-300));
    }

    #[test]
    fn bogoliubov_inverse_on_interior(r in 0.0..1.5f64) {
        let n = 30;
        let (a, ad) = fock_ladder(n).unwrap();
        let (g, gd) = bogoliubov_pair(&a, &ad, r);
        let (back, _) = bogoliubov_pair(&g, &gd, -r);
        let interior = n - 4;
        let diff = (back.block(interior).mat() - a.block(interior).mat()).norm_max();
        prop_assert!(diff <= 1e-10 * a.max_abs());
    }
}

fn moment_op(label: MomentLabel, a: &OperatorMatrix) -> OperatorMatrix {
    let ad = a.adjoint();
    let word: Vec<&OperatorMatrix> = match label {
        MomentLabel::N => vec![&ad, a],
        MomentLabel::A2 => vec![a, a],
        MomentLabel::Ad2 => vec![&ad, &ad],
        MomentLabel::Ad2A2 => vec![&ad, &ad, a, a],
        MomentLabel::Ad3A => vec![&ad, &ad, &ad, a],
        MomentLabel::AdA3 => vec![&ad, a, a, a],
        MomentLabel::A4 => vec![a, a, a, a],
        MomentLabel::Ad4 => vec![&ad, &ad, &ad, &ad],
        MomentLabel::A => vec![a],
        MomentLabel::Ad => vec![&ad],
        MomentLabel::Identity => return OperatorMatrix::identity(a.dim()),
    };
    word[1..].iter().fold(word[0].clone(), |acc, o| &acc * *o)
}

#[test]
fn quartic_moments_match_master_equation_across_kappa() {
    for kappa in [0.02, 0.04, 0.4] {
        for k in 1..=12 {
            let r = 0.1 * k as f64;
            let n_fock = if kappa > 0.1 { 60 } else { 30 };
            let p = ModelParams { g: 0.0, kappa, n_fock, ..ModelParams::default() }.with_r(r);
            let s = Session::resonator_only(&p, &BathSpec::Vacuum).unwrap();
            let a = resonator_annihilation(&p, s.layout()).unwrap();
            let sys = moment_generator(&p, &BathSpec::Vacuum, MomentOrder::Quartic9).unwrap();
            let want = steady_moments(&sys).unwrap();
            let tol = if k == 12 { 1e-2 } else { 1e-3 };
            for (label, w) in sys.basis().iter().zip(&want) {
                let got = s.steady().expect(&moment_op(*label, &a));
                let e = (got - w).norm() / w.norm();
                assert!(e < tol, "kappa {kappa} r {r:.1} <{}>: {got} vs {w}", label.name());
            }
        }
    }
}

#[test]
fn lorentzian_width_is_grid_converged() {
    let fwhm = 0.013;
    let width_at = |points: usize| {
        let omega = linspace(-0.2, 0.2, points);
        let values = omega.iter().map(|&w| lorentz(w, 0.0123, fwhm)).collect();
        linewidth(&Spectrum::new(omega, values, SpectrumTarget::Resonator).unwrap()).unwrap().fwhm
    };
    let (coarse, fine) = (width_at(401), width_at(801));
    assert!((coarse / fine - 1.0).abs() < 2e-3);
    assert!((fine / fwhm - 1.0).abs() < 1e-3);
}

#[test]
fn default_spectra_are_nonnegative() {
    for r in [0.0, 0.3, 0.8] {
        let p = ModelParams::default().with_r(r);
        let s = Session::new(&p, &BathSpec::Vacuum).unwrap();
        let spin = s.spin_spectrum_auto(801).unwrap();
        assert!(spin.negativity() <= 1e-3, "spin r={r}: {}", spin.negativity());
        if r > 0.0 {
            let res = s.resonator_spectrum(&linspace(0.4, 0.8, 801)).unwrap();
            assert!(res.negativity() <= 1e-3, "resonator r={r}: {}", res.negativity());
        }
    }
}

#[test]
fn steady_state_is_a_density_operator() {
    let p = ModelParams { n_fock: 12, ..ModelParams::default() }.with_r(0.7);
    let layout = p.layout().unwrap();
    let (h, ls) = squeezespin::model::build_system(&p, &BathSpec::Vacuum, &layout).unwrap();
    let l = liouvillian(&h, &ls).unwrap().with_parity(&layout.parity_signs());
    let rho = steady_state(&l).unwrap();
    assert!((rho.trace() - c64::new(1.0, 0.0)).norm() < 1e-12);
    assert!(rho.hermiticity_defect() < 1e-12);
    assert!(rho.min_eigenvalue().unwrap() > -1e-10);
    let resid: Mat<c64> = l.apply(rho.mat());
    assert!(resid.norm_l2() <= 1e-10 * l.norm());
}
