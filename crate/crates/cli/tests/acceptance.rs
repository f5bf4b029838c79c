//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs as a plain binary (`harness = false`). Pass criterion numbers as
//! arguments to run a subset, e.g. `cargo test --test acceptance -- 4 5`.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use num_complex::Complex64 as c64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;

use squeezespin::lindblad::{propagate, DensityOperator};
use squeezespin::model::{build_hamiltonian, resonator_annihilation, squeezed_frame_params};
use squeezespin::moments::{integrated_noise, moment_generator, steady_moments, MomentLabel, MomentOrder};
use squeezespin::operators::{fock_ladder, OperatorMatrix};
use squeezespin::pipeline::{
    anticross_point, anticrossing_grid, find_rc, frame_compare, linspace, photon_correlation, ratio_analytic,
    ratio_point, resonant_spin_frequency, shift_width_point, truncation_point, AnticrossRow, Session,
};
use squeezespin::spectra::{anticrossing_features, find_peaks};
use squeezespin::{BathSpec, Frame, ModelParams};

type Check = Result<(bool, String), String>;

fn rel(a: c64, b: c64) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}

fn moment_operator(label: MomentLabel, a: &OperatorMatrix) -> OperatorMatrix {
    let ad = a.adjoint();
    let prod = |ops: &[&OperatorMatrix]| ops[1..].iter().fold(ops[0].clone(), |acc, o| &acc * *o);
    match label {
        MomentLabel::N => prod(&[&ad, a]),
        MomentLabel::A => a.clone(),
        MomentLabel::Ad => ad.clone(),
        MomentLabel::A2 => prod(&[a, a]),
        MomentLabel::Ad2 => prod(&[&ad, &ad]),
        MomentLabel::Ad2A2 => prod(&[&ad, &ad, a, a]),
        MomentLabel::Ad3A => prod(&[&ad, &ad, &ad, a]),
        MomentLabel::AdA3 => prod(&[&ad, a, a, a]),
        MomentLabel::A4 => prod(&[a, a, a, a]),
        MomentLabel::Ad4 => prod(&[&ad, &ad, &ad, &ad]),
        MomentLabel::Identity => OperatorMatrix::identity(a.dim()),
    }
}

fn bare(kappa: f64, r: f64) -> ModelParams {
    ModelParams { g: 0.0, kappa, ..ModelParams::default() }.with_r(r)
}

fn c1_moment_oracle() -> Check {
    let rs: Vec<f64> = (1..=12).map(|k| 0.1 * k as f64).collect();
    let mut worst = (0.0, 0.0, "");
    let mut pass = true;
    for &r in &rs {
        let p = bare(0.04, r);
        let session = Session::resonator_only(&p, &BathSpec::Vacuum).map_err(|e| e.to_string())?;
        let a = resonator_annihilation(&p, session.layout()).map_err(|e| e.to_string())?;
        let sys = moment_generator(&p, &BathSpec::Vacuum, MomentOrder::Quartic9).map_err(|e| e.to_string())?;
        let closed = steady_moments(&sys).map_err(|e| e.to_string())?;
        let tol = if r > 1.15 { 1e-2 } else { 1e-3 };
        for (label, want) in sys.basis().iter().zip(&closed) {
            let got = session.steady().expect(&moment_operator(*label, &a));
            let e = rel(got, *want);
            if e > tol {
                pass = false;
            }
            if e > worst.0 {
                worst = (e, r, label.name());
            }
        }
    }
    Ok((pass, format!("worst relative error {:.2e} at r={:.1} for <{}>", worst.0, worst.1, worst.2)))
}

fn c2_bath_correlators() -> Check {
    let kappa = 0.04;
    let tau = linspace(0.0, 8.0 / kappa, 161);
    let p = ModelParams { g: 0.0, kappa, n_fock: 30, frame: Frame::Rotating, ..ModelParams::default() };
    let cases: [(BathSpec, Box<dyn Fn(f64) -> f64>); 2] = [
        (BathSpec::Thermal { n_bar: 1.0 }, Box::new(move |t: f64| 1.0 + 2.0 * (-kappa * t).exp())),
        (BathSpec::CoherentDrive { alpha: c64::new(2.0, 0.0) }, Box::new(move |t: f64| 16.0 + 4.0 * (-0.5 * kappa * t).exp())),
    ];
    let mut worst = [0.0f64; 2];
    for (k, (bath, exact)) in cases.iter().enumerate() {
        let rows = photon_correlation(&p, bath, &tau).map_err(|e| e.to_string())?;
        for row in rows {
            let want = exact(row.tau);
            let e_num = ((row.re_corr - want).abs() + row.im_corr.abs()) / want;
            let e_closed = (row.closed_form - want).abs() / want;
            worst[k] = worst[k].max(e_num).max(e_closed);
        }
    }
    let pass = worst.iter().all(|&w| w <= 1e-6);
    Ok((pass, format!("thermal max rel err {:.2e}, coherent {:.2e} over tau in [0, 8/kappa]", worst[0], worst[1])))
}

fn c3_eta() -> Check {
    let kappa = 0.04;
    let tau = linspace(0.0, 16.0 / kappa, 4001);
    let rs: Vec<f64> = (1..=10).map(|k| 0.1 * k as f64).collect();
    let rows: Vec<Result<(f64, f64, f64, f64), String>> = rs
        .par_iter()
        .map(|&r| {
            let p = bare(kappa, r);
            let s = Session::resonator_only(&p, &BathSpec::Vacuum).map_err(|e| e.to_string())?;
            let closed = integrated_noise(&p, &BathSpec::Vacuum).map_err(|e| e.to_string())?.eta;
            let solve = s.eta_exact().map_err(|e| e.to_string())?;
            let quad = s.eta_time_domain(&tau).map_err(|e| e.to_string())?;
            Ok((r, closed, solve, quad))
        })
        .collect();
    let mut pass = true;
    let mut worst = 0.0f64;
    let mut spot = String::new();
    for row in rows {
        let (r, closed, solve, quad) = row?;
        let e = ((solve / closed - 1.0).abs()).max((quad / closed - 1.0).abs());
        worst = worst.max(e);
        pass &= e <= 0.01;
        if (r - 0.5).abs() < 1e-9 {
            pass &= (closed - 41.20).abs() < 0.01;
            spot = format!("r=0.5: closed {closed:.4}, solve {solve:.4}, quadrature {quad:.4}");
        }
    }
    Ok((pass, format!("worst relative error {worst:.2e} for r<=1.0; {spot}")))
}

struct ShiftWidthRun {
    rows: Vec<(f64, Result<squeezespin::pipeline::ShiftWidthRow, String>)>,
    rc: f64,
}

fn shift_width_run() -> ShiftWidthRun {
    let p = ModelParams::default();
    let rs = linspace(0.0, 1.2, 25);
    let rows = rs
        .par_iter()
        .map(|&r| (r, shift_width_point(&p.with_r(r), 2001).map_err(|e| e.to_string())))
        .collect();
    ShiftWidthRun { rows, rc: 0.5 * (p.omega_r_t / p.omega_s_t).acosh() }
}

fn c4_shift(run: &ShiftWidthRun) -> Check {
    let mut pass = true;
    let mut bad = Vec::new();
    let mut worst = 0.0f64;
    let mut pts = Vec::new();
    for (r, row) in &run.rows {
        let row = match row {
            Ok(row) => row,
            Err(e) => {
                pass = false;
                bad.push(format!("r={r:.2} error {e}"));
                continue;
            }
        };
        pts.push((*r, row.shift_numeric));
        if !row.reliable {
            continue;
        }
        let e = (row.shift_numeric - row.shift_analytic).abs() / row.shift_analytic.abs();
        worst = worst.max(e);
        if e > 0.10 {
            pass = false;
            bad.push(format!("r={r:.2} off by {:.1}%", 100.0 * e));
        }
    }
    let crossing = pts.windows(2).find(|w| w[0].1 < 0.0 && w[1].1 > 0.0).map(|w| {
        let ((r0, s0), (r1, s1)) = (w[0], w[1]);
        r0 + (r1 - r0) * (-s0) / (s1 - s0)
    });
    let sign = match crossing {
        Some(rx) => {
            pass &= (rx - run.rc).abs() <= 0.05;
            format!("sign change at r={rx:.3} (analytic r_c {:.3})", run.rc)
        }
        None => {
            pass = false;
            "no negative-to-positive sign change".to_string()
        }
    };
    Ok((pass, format!("worst unflagged deviation {:.1}%; {sign}; {}", 100.0 * worst, summarize(&bad))))
}

fn c5_width(run: &ShiftWidthRun) -> Check {
    let mut pass = true;
    let mut bad = Vec::new();
    let mut worst = 0.0f64;
    for (r, row) in &run.rows {
        let row = match row {
            Ok(row) => row,
            Err(e) => {
                pass = false;
                bad.push(format!("r={r:.2} error {e}"));
                continue;
            }
        };
        if !row.reliable {
            continue;
        }
        let e = (row.width_numeric - row.gamma_total_analytic).abs() / row.gamma_total_analytic;
        worst = worst.max(e);
        if e > 0.15 {
            pass = false;
            bad.push(format!("r={r:.2} off by {:.1}%", 100.0 * e));
        }
    }
    Ok((pass, format!("worst unflagged deviation {:.1}%; {}", 100.0 * worst, summarize(&bad))))
}

fn summarize(bad: &[String]) -> String {
    if bad.is_empty() {
        "all points within tolerance".into()
    } else {
        format!("failing: {}", bad.join(", "))
    }
}

const KAPPAS: [f64; 4] = [0.02, 0.04, 0.1, 0.4];

struct AnticrossRun {
    rc: Vec<f64>,
    /// One row list per kappa, in `KAPPAS` order.
    rows: Vec<Vec<Result<AnticrossRow, String>>>,
}

fn anticross_run() -> AnticrossRun {
    let rc = linspace(0.0, 1.2, 25);
    let jobs: Vec<(usize, f64)> = (0..KAPPAS.len()).flat_map(|k| rc.iter().map(move |&r| (k, r))).collect();
    let flat: Vec<Result<AnticrossRow, String>> = jobs
        .par_iter()
        .map(|&(k, r)| {
            let base = ModelParams { kappa: KAPPAS[k], ..ModelParams::default() };
            let p = ModelParams { omega_s_t: resonant_spin_frequency(base.omega_r_t, r), ..base }.with_r(r);
            anticross_point(&p, &BathSpec::Vacuum, 2001).map_err(|e| e.to_string())
        })
        .collect();
    let mut rows = vec![Vec::new(); KAPPAS.len()];
    for ((k, _), row) in jobs.iter().zip(flat) {
        rows[*k].push(row);
    }
    AnticrossRun { rc, rows }
}

fn c6_chi_cap(run: &AnticrossRun) -> Check {
    let mut pass = true;
    let mut parts = Vec::new();
    let mut argmaxes = Vec::new();
    for (k, rows) in run.rows.iter().enumerate() {
        let chi: Vec<Option<f64>> = rows.iter().map(|r| r.as_ref().ok().and_then(|r| r.chi)).collect();
        let (Some(c1), Some(c2)) = (chi[1], chi[2]) else {
            pass = false;
            parts.push(format!("kappa={}: no baseline", KAPPAS[k]));
            continue;
        };
        let (r1, r2) = (run.rc[1], run.rc[2]);
        let baseline = c1 - r1 * (c2 - c1) / (r2 - r1);
        let (imax, cmax) = chi
            .iter()
            .enumerate()
            .filter_map(|(i, c)| c.map(|c| (i, c)))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .expect("baseline points exist");
        let ratio = cmax / baseline;
        pass &= (1.1..=1.35).contains(&ratio);
        argmaxes.push(run.rc[imax]);
        parts.push(format!("kappa={}: max ratio {ratio:.3} at r_c={:.2}", KAPPAS[k], run.rc[imax]));
    }
    let shifts = argmaxes.windows(2).all(|w| w[1] >= w[0]) && argmaxes.last() > argmaxes.first();
    pass &= shifts;
    Ok((pass, format!("{}; maximum moves to larger r_c with kappa: {shifts}", parts.join("; "))))
}

fn c7_contrast(run: &AnticrossRun) -> Check {
    let k = KAPPAS.iter().position(|&k| k == 0.04).expect("default kappa in family");
    let mut contrast = Vec::new();
    for (r, row) in run.rc.iter().zip(&run.rows[k]) {
        let row = row.as_ref().map_err(|e| format!("r_c={r:.2}: {e}"))?;
        if *r == 0.0 {
            // no photons at zero drive, so no spectrum to measure
            continue;
        }
        // a single merged line is the fully dephased limit
        contrast.push((*r, row.contrast.unwrap_or(0.0)));
    }
    let monotone = contrast.windows(2).all(|w| w[1].1 <= w[0].1);
    let at_one = contrast.iter().find(|(r, _)| (r - 1.0).abs() < 1e-9).map(|c| c.1).unwrap_or(f64::NAN);
    let pass = monotone && at_one < 0.1;
    Ok((pass, format!("non-increasing: {monotone}; contrast at r_c=1.0: {at_one:.3}")))
}

fn c8_ratio() -> Check {
    let p = ModelParams::default();
    let rc = 0.5 * (p.omega_r_t / p.omega_s_t).acosh();
    let rs: Vec<f64> = (0..=140).map(|k| 0.6 + 0.01 * k as f64).collect();
    let curve: Vec<Option<f64>> = rs
        .iter()
        .map(|&r| {
            let q = p.with_r(r);
            let rates = squeezespin::moments::analytic_rates(&q).ok()?;
            if rates.reliable { ratio_analytic(&q).ok() } else { None }
        })
        .collect();
    let mut maxima = Vec::new();
    for i in 1..rs.len() - 1 {
        if let (Some(a), Some(b), Some(c)) = (curve[i - 1], curve[i], curve[i + 1]) {
            if rs[i] > rc && b > a && b >= c {
                maxima.push(rs[i]);
            }
        }
    }
    let local_ok = maxima.iter().any(|r| (r - 1.1).abs() <= 0.15);

    let r_axis = linspace(0.05, 1.6, 20);
    let k_axis = linspace(0.01, 0.1, 10);
    let grid: Vec<(f64, f64)> = r_axis.iter().flat_map(|&r| k_axis.iter().map(move |&k| (r, k))).collect();
    let rows: Vec<Result<squeezespin::pipeline::RatioRow, String>> = grid
        .par_iter()
        .map(|&(r, k)| ratio_point(&ModelParams { kappa: k, ..p }.with_r(r), 2001).map_err(|e| e.to_string()))
        .collect();
    let (mut compared, mut bad, mut worst) = (0, Vec::new(), 0.0f64);
    for ((r, k), row) in grid.iter().zip(&rows) {
        match row {
            Ok(row) if row.reliable => {
                compared += 1;
                let e = (row.ratio_numeric - row.ratio_analytic).abs() / row.ratio_analytic.abs();
                worst = worst.max(e);
                if e > 0.15 {
                    bad.push(format!("(r={r:.2}, kappa={k:.3}) {:.0}%", 100.0 * e));
                }
            }
            Ok(_) => {}
            Err(e) => bad.push(format!("(r={r:.2}, kappa={k:.3}) error {e}")),
        }
    }
    let pass = local_ok && bad.is_empty();
    let shown: Vec<String> = bad.iter().take(8).cloned().collect();
    Ok((
        pass,
        format!(
            "analytic local maxima at r={maxima:.2?}; map: {compared} unflagged points, worst {:.1}%, {} outside 15%{}",
            100.0 * worst,
            bad.len(),
            if shown.is_empty() { String::new() } else { format!(" [{}]", shown.join(", ")) }
        ),
    ))
}

fn c9_truncation() -> Check {
    let p = bare(0.04, 0.0);
    let mut pass = true;
    let mut worst_sq = 0.0f64;
    for k in 0..=12 {
        let r = 0.1 * k as f64;
        let row = truncation_point(&p.with_r(r)).map_err(|e| e.to_string())?;
        let e = if row.eta_closed_form == 0.0 { row.eta_numeric.abs() } else { (row.eta_numeric / row.eta_closed_form - 1.0).abs() };
        worst_sq = worst_sq.max(e);
        pass &= e <= 0.01;
    }
    let ns = [30usize, 60, 90, 120, 150];
    let mut errs = Vec::new();
    for &n in &ns {
        let row = truncation_point(&p.with_r(1.5).with_frame(Frame::Rotating, n)).map_err(|e| e.to_string())?;
        errs.push((row.eta_numeric / row.eta_closed_form - 1.0).abs());
    }
    let approaches = errs.windows(2).all(|w| w[1] < w[0]);
    pass &= errs[0] > 0.2 && approaches;
    let listed: Vec<String> = ns.iter().zip(&errs).map(|(n, e)| format!("N={n}: {:.0}%", 100.0 * e)).collect();
    Ok((pass, format!("squeezed N=30 worst {:.2e} up to r=1.2; rotating r=1.5 {}", worst_sq, listed.join(", "))))
}

fn c10_frame_compare() -> Check {
    let r = 1.2;
    let base = ModelParams { g: 0.01, kappa: 0.02, omega_s_t: resonant_spin_frequency(1.0, r), ..ModelParams::default() }.with_r(r);
    let omega = anticrossing_grid(&base, 2001).map_err(|e| e.to_string())?;
    let cmp = frame_compare(&base, &omega).map_err(|e| e.to_string())?;
    let phys = anticrossing_features(&cmp.physical).map_err(|e| e.to_string())?;
    let refr = anticrossing_features(&cmp.reference).map_err(|e| e.to_string())?;
    let same_h = cmp.hamiltonian_hashes.0 == cmp.hamiltonian_hashes.1;
    let ref_contrast = refr.contrast.unwrap_or(0.0);
    let pass = ref_contrast > 0.5 && phys.peak_positions.len() < 2 && same_h;
    Ok((
        pass,
        format!(
            "squeezed-mode decay: contrast {ref_contrast:.3}; physical decay: {} peak(s){}; identical Hamiltonians: {same_h}",
            phys.peak_positions.len(),
            phys.note.map(|n| format!(" ({n})")).unwrap_or_default()
        ),
    ))
}

fn c11_structure() -> Check {
    let mut notes = Vec::new();
    let mut pass = true;

    let n = 30;
    let (a, ad) = fock_ladder(n).map_err(|e| e.to_string())?;
    let comm = a.commutator(&ad);
    let mut pattern = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let want = if i != j { 0.0 } else if i + 1 == n { -((n - 1) as f64) } else { 1.0 };
            pattern = pattern.max((comm.get(i, j) - c64::new(want, 0.0)).norm());
        }
    }
    pass &= pattern < 1e-12;
    notes.push(format!("commutator pattern defect {pattern:.1e}"));

    let p = ModelParams::default().with_r(0.3);
    let h = build_hamiltonian(&p, &p.layout().map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    pass &= h.hermiticity_defect() == 0.0;

    let s = Session::new(&p, &BathSpec::Vacuum).map_err(|e| e.to_string())?;
    let resid = s.liouvillian().apply(s.steady().mat()).norm_l2() / s.liouvillian().norm();
    pass &= resid <= 1e-10;
    notes.push(format!("steady residual {resid:.1e}"));

    let small = ModelParams { n_fock: 12, ..p };
    let ss = Session::new(&small, &BathSpec::Vacuum).map_err(|e| e.to_string())?;
    let d = ss.layout().dim();
    let mut rng = StdRng::seed_from_u64(7);
    let b = OperatorMatrix::from_fn(d, "b", |_, _| c64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    let bb = &b * &b.adjoint();
    let rho0 = DensityOperator::from_raw(bb.mat()).map_err(|e| e.to_string())?;
    let (mut tr_err, mut herm_err) = (0.0f64, 0.0f64);
    for t in [1.0, 5.0, 10.0].map(|x| x / small.kappa) {
        let rho_t = propagate(ss.liouvillian(), rho0.op(), t).map_err(|e| e.to_string())?;
        tr_err = tr_err.max((rho_t.trace() - c64::new(1.0, 0.0)).norm());
        herm_err = herm_err.max(rho_t.hermiticity_defect());
    }
    pass &= tr_err < 1e-10 && herm_err < 1e-10;
    notes.push(format!("propagation trace drift {tr_err:.1e}, Hermiticity {herm_err:.1e}"));

    let mut qrt = 0.0f64;
    for r in [0.3, 0.6, 1.0] {
        let q = bare(0.04, r);
        let sess = Session::resonator_only(&q, &BathSpec::Vacuum).map_err(|e| e.to_string())?;
        let a = resonator_annihilation(&q, sess.layout()).map_err(|e| e.to_string())?;
        let nop = moment_operator(MomentLabel::N, &a);
        let sys = moment_generator(&q, &BathSpec::Vacuum, MomentOrder::Quadratic4).map_err(|e| e.to_string())?;
        let ops: Vec<OperatorMatrix> = sys.basis()[..3].iter().map(|l| moment_operator(*l, &a)).collect();
        let nbar = sess.steady().expect(&nop);
        let hstep = 1e-2;
        for t0 in [0.5 / q.kappa, 2.0 / q.kappa] {
            let tau: Vec<f64> = std::iter::once(0.0).chain((-2..=2).map(|k| t0 + hstep * k as f64)).collect();
            let series: Vec<Vec<c64>> = ops
                .iter()
                .map(|o| sess.correlation(o, &nop, &tau).map(|c| c.values[1..].to_vec()))
                .collect::<Result<_, _>>()
                .map_err(|e| e.to_string())?;
            let x: Vec<c64> = series.iter().map(|v| v[2]).chain([nbar]).collect();
            let dx: Vec<c64> = series.iter().map(|v| (v[0] - v[1] * 8.0 + v[3] * 8.0 - v[4]) / (12.0 * hstep)).collect();
            let g = sys.generator();
            for i in 0..3 {
                let gx: c64 = (0..4).map(|j| g[(i, j)] * x[j]).sum();
                qrt = qrt.max((dx[i] - gx).norm() / gx.norm().max(x[i].norm() * 1e-3));
            }
        }
    }
    pass &= qrt < 1e-6;
    notes.push(format!("regression residual {qrt:.1e}"));

    let r0 = squeezed_frame_params(&p).map_err(|e| e.to_string())?.r;
    let lone = Session::new(&p, &BathSpec::Vacuum).and_then(|s| s.resonator_spectrum(&anticrossing_grid(&p, 2001)?)).map_err(|e| e.to_string())?;
    let neg = lone.negativity();
    pass &= neg <= 1e-3 && !find_peaks(&lone).map_err(|e| e.to_string())?.is_empty();
    notes.push(format!("spectrum negativity {neg:.1e} at r={r0:.1}"));

    Ok((pass, notes.join("; ")))
}

fn c_rc_caption() -> Check {
    let caption = [(0.9, 0.16), (0.6, 0.61), (0.3, 0.89)];
    let mut pass = true;
    let mut parts = Vec::new();
    for (ws, quoted) in caption {
        let p = ModelParams { omega_s_t: ws, ..ModelParams::default() };
        let analytic = squeezespin::spectra::find_rc_analytic(&p).map_err(|e| e.to_string())?;
        let grid: Vec<f64> = (-10..=10).map(|k| analytic + 0.02 * k as f64).filter(|r| *r > 0.0).collect();
        let est = find_rc(&p, &grid, 2001).map_err(|e| e.to_string())?;
        let spectral = est.spectral.unwrap_or(f64::NAN);
        pass &= (spectral - quoted).abs() <= 0.1;
        parts.push(format!("omega_s={ws}: analytic {analytic:.3}, spectral {spectral:.3}, quoted {quoted}"));
    }
    Ok((pass, parts.join("; ")))
}

fn run(id: &str, title: &str, f: impl FnOnce() -> Check) -> bool {
    let start = Instant::now();
    let out = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
        let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
        Err(format!("panicked: {}", msg.unwrap_or_default()))
    });
    let (ok, detail) = match out {
        Ok((ok, d)) => (ok, d),
        Err(e) => (false, format!("error: {e}")),
    };
    println!(
        "criterion {id:>2} {} {title}: {detail} [{:.1} s]",
        if ok { "PASS" } else { "FAIL" },
        start.elapsed().as_secs_f64()
    );
    ok
}

fn main() {
    let wanted: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let on = |id: &str| wanted.is_empty() || wanted.iter().any(|w| w == id);
    let mut results = Vec::new();

    if on("1") {
        results.push(run("1", "moment oracle", c1_moment_oracle));
    }
    if on("2") {
        results.push(run("2", "bath correlators", c2_bath_correlators));
    }
    if on("3") {
        results.push(run("3", "photon-noise integral", c3_eta));
    }
    if on("4") || on("5") {
        let t = Instant::now();
        let sw = shift_width_run();
        println!("(shift/width sweep: {} points in {:.1} s)", sw.rows.len(), t.elapsed().as_secs_f64());
        if on("4") {
            results.push(run("4", "dispersive shift", || c4_shift(&sw)));
        }
        if on("5") {
            results.push(run("5", "spin linewidth", || c5_width(&sw)));
        }
    }
    if on("6") || on("7") {
        let t = Instant::now();
        let ac = anticross_run();
        println!("(anticrossing sweep: {} points in {:.1} s)", ac.rows.iter().map(Vec::len).sum::<usize>(), t.elapsed().as_secs_f64());
        if on("6") {
            results.push(run("6", "gap enhancement cap", || c6_chi_cap(&ac)));
        }
        if on("7") {
            results.push(run("7", "contrast collapse", || c7_contrast(&ac)));
        }
    }
    if on("8") {
        results.push(run("8", "shift-to-decoherence optimum", c8_ratio));
    }
    if on("9") {
        results.push(run("9", "truncation study", c9_truncation));
    }
    if on("10") {
        results.push(run("10", "decay-operator comparison", c10_frame_compare));
    }
    if on("11") {
        results.push(run("11", "structural properties", c11_structure));
    }
    if on("rc") {
        results.push(run("rc", "resonance squeezing vs quoted values", c_rc_caption));
    }

    let failed = results.iter().filter(|ok| !**ok).count();
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
