use num_complex::Complex64;
use num_traits::Zero;
use puq_core::canon::{equal_freq_spectrum, generating_function, transform_report, MapKind};
use puq_core::evolution::StarEvolution;
use puq_core::grid::{Axis, Grid, GridData, Values};
use puq_core::moyal::poisson_bracket;
use puq_core::pu::{eliminate_hamilton_equations, hamiltonian, noether_charges, oscillator_hamiltonian};
use puq_core::scalar::{int, rat, rational_to_f64, render_rational};
use puq_core::specfun::{gaussian_integral_check, laguerre_hermite_identity_check, reindex_double_sum};
use puq_core::wavefn::{
    dirac_transform, distance_up_to_phase, gram_matrix, osc_wavefunction, pu_box, pu_wavefunction_closed,
    wavefunction_from_wigner, WaveFn2D,
};
use puq_core::wigner::{spectrum, wigner_in, GenvalueOperator};
use puq_core::{Frame, PairSignature, PuParams, Rational, WignerState};
use serde::Serialize;
use serde_json::json;

use crate::config::{Format, GridObject, RunConfig};
use crate::error::CliError;
use crate::output::to_json;

pub fn spectrum_table(cfg: &RunConfig, p: &PuParams, format: Format) -> Result<String, CliError> {
    let s = &cfg.spectrum;
    if s.equal_frequency {
        return equal_frequency_table(cfg, p, format);
    }
    let table = spectrum(p, s.n_max, s.m_max)?;
    Ok(match format {
        Format::Csv => {
            let mut out = String::from("n,m,energy,energy_f64\n");
            for e in &table.entries {
                out.push_str(&format!("{},{},{},{}\n", e.n, e.m, render_rational(&e.energy), rational_to_f64(&e.energy)));
            }
            out
        }
        Format::Json => {
            let rows: Vec<_> = table
                .entries
                .iter()
                .map(|e| json!({ "n": e.n, "m": e.m, "energy": render_rational(&e.energy), "energy_f64": rational_to_f64(&e.energy) }))
                .collect();
            to_json(&json!({ "params": params_json(p), "unbounded_below": table.unbounded_below, "note": table.note, "rows": rows }))
        }
    })
}

/// `E_mk` on `m = 0..=m_max` and `k_count` evenly spaced wave numbers.
fn equal_frequency_table(cfg: &RunConfig, p: &PuParams, format: Format) -> Result<String, CliError> {
    if p.omega1 != p.omega2 {
        return Err(CliError::Config {
            field: "params.omega2".into(),
            message: "spectrum.equal_frequency needs omega1 = omega2".into(),
        });
    }
    let s = &cfg.spectrum;
    let ks = Axis::new("k", s.k_min, s.k_max, s.k_count)?.values();
    let (w, h) = (p.omega1_f64(), p.hbar_f64());
    let rows: Vec<(u32, f64, f64)> =
        (0..=s.m_max).flat_map(|m| ks.iter().map(move |&k| (m, k, equal_freq_spectrum(w, h, m as i64, k)))).collect();
    Ok(match format {
        Format::Csv => {
            let mut out = String::from("m,k,energy\n");
            for (m, k, e) in rows {
                out.push_str(&format!("{},{},{}\n", m, k, e));
            }
            out
        }
        Format::Json => {
            let rows: Vec<_> = rows.iter().map(|(m, k, e)| json!({ "m": m, "k": k, "energy": e })).collect();
            to_json(&json!({ "params": params_json(p), "rows": rows }))
        }
    })
}

fn params_json(p: &PuParams) -> serde_json::Value {
    json!({
        "omega1": render_rational(&p.omega1),
        "omega2": render_rational(&p.omega2),
        "hbar": render_rational(&p.hbar),
    })
}

pub fn grid_output(cfg: &RunConfig, p: &PuParams, format: Format) -> Result<String, CliError> {
    let g = &cfg.grid;
    let grid = cfg.grid()?;
    let mut data = match g.object {
        GridObject::PuWigner | GridObject::OscWigner => wigner_grid(g.object.frame(), g.n, g.m, p, &grid)?,
        GridObject::PuPsi => pu_wavefunction_closed(g.n, g.m, p)?.grid_data(&grid)?,
        GridObject::OscPsi => osc_wavefunction(g.n, g.m, p)?.grid_data(&grid)?,
    };
    data.metadata.insert("object".into(), g.object.name().into());
    Ok(match format {
        Format::Csv => data.to_csv(),
        Format::Json => to_json(&data.to_json()),
    })
}

fn wigner_grid(frame: Frame, n: u32, m: u32, p: &PuParams, grid: &Grid) -> Result<GridData, CliError> {
    let s = WignerState::new(n, m, p.clone(), frame)?;
    let rho = wigner_in::<Rational>(&s)?;
    let values = grid.map(|x| rho.value(&[x[0], x[1], x[2], x[3]]));
    let mut meta = serde_json::Map::new();
    meta.insert("n".into(), n.into());
    meta.insert("m".into(), m.into());
    meta.insert("frame".into(), frame.name().into());
    meta.insert("energy".into(), render_rational(&s.energy()).into());
    Ok(GridData::new(grid.clone(), Values::Real(values), meta)?)
}

pub fn transform_output(cfg: &RunConfig, p: &PuParams) -> Result<String, CliError> {
    Ok(to_json(&transform_report(cfg.transform.kind, p)?))
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub status: Status,
    /// Exact identity in rational arithmetic, as opposed to a floating-point tolerance.
    pub exact: bool,
    pub residual: Option<f64>,
    pub tolerance: Option<f64>,
    pub detail: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skip,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub params: serde_json::Value,
    pub checks: Vec<CheckResult>,
    /// `{J1, J2}` as computed, empty when the charges do not exist.
    pub j1_j2: String,
    pub passed: usize,
    pub failed: Vec<&'static str>,
    pub skipped: Vec<&'static str>,
}

struct Outcome {
    ok: bool,
    residual: Option<f64>,
    detail: String,
}

enum Step {
    Done(Outcome),
    Skip(String),
}

type StepResult = Result<Step, CliError>;

fn exact(ok: bool, detail: impl Into<String>) -> StepResult {
    Ok(Step::Done(Outcome { ok, residual: Some(if ok { 0.0 } else { 1.0 }), detail: detail.into() }))
}

fn within(residual: f64, tol: f64, detail: impl Into<String>) -> StepResult {
    Ok(Step::Done(Outcome { ok: residual <= tol, residual: Some(residual), detail: detail.into() }))
}

fn run(name: &'static str, is_exact: bool, tolerance: Option<f64>, f: impl FnOnce() -> StepResult) -> CheckResult {
    let (status, residual, detail) = match f() {
        Ok(Step::Done(o)) => (if o.ok { Status::Pass } else { Status::Fail }, o.residual, o.detail),
        Ok(Step::Skip(why)) => (Status::Skip, None, why),
        Err(e) => (Status::Fail, None, e.to_string()),
    };
    CheckResult { name, status, exact: is_exact, residual, tolerance, detail }
}

fn genvalue_check(p: &PuParams, frame: Frame, level: u32, shift: &Rational) -> StepResult {
    let h = match frame {
        Frame::Pu => hamiltonian::<Rational>(p),
        Frame::Oscillator => oscillator_hamiltonian::<Rational>(p),
    };
    let op = GenvalueOperator::new(&h, frame, &p.hbar)?;
    let mut worst: f64 = 0.0;
    let mut bad = Vec::new();
    for n in 0..=level {
        for m in 0..=level {
            let s = WignerState::new(n, m, p.clone(), frame)?;
            let rho = wigner_in::<Rational>(&s)?;
            let r = op.residual(&rho.gauss, &(s.energy() + shift))?;
            if !r.is_zero() {
                worst = worst.max(r.real.prefactor().max_abs_coeff()).max(r.imag.prefactor().max_abs_coeff());
                bad.push(format!("({},{})", n, m));
            }
        }
    }
    let count = (level + 1) * (level + 1);
    let detail = if bad.is_empty() {
        format!("{} states, all residuals exactly zero", count)
    } else {
        format!("nonzero residual at {}", bad.join(" "))
    };
    Ok(Step::Done(Outcome { ok: bad.is_empty(), residual: Some(worst), detail }))
}

fn requires_wavefunctions(p: &PuParams) -> Option<String> {
    if p.hbar != int(1) {
        Some("wavefunctions are built with hbar = 1".into())
    } else if p.omega1 <= p.omega2 {
        Some("wavefunctions need omega1 > omega2".into())
    } else {
        None
    }
}

fn triangle_check(cfg: &RunConfig, p: &PuParams) -> StepResult {
    if let Some(why) = requires_wavefunctions(p) {
        return Ok(Step::Skip(why));
    }
    let v = &cfg.verify;
    let quad = &cfg.quadrature;
    let f = generating_function(p)?;
    let axis = |name| Axis::new(name, -v.triangle_extent, v.triangle_extent, v.triangle_points);
    let grid = Grid::new(vec![axis("q")?, axis("x")?]);
    let mut worst: f64 = 0.0;
    for n in 0..=v.wavefunction_level {
        for m in 0..=v.wavefunction_level {
            let closed = pu_wavefunction_closed(n, m, p)?.values_on(&grid)?;
            let dirac = dirac_transform(&osc_wavefunction(n, m, p)?, &f, quad)?.values_on(&grid)?;
            let rho = wigner_in(&WignerState::new(n, m, p.clone(), Frame::Pu)?)?;
            let inv = wavefunction_from_wigner(&rho, n, m, quad)?.values_on(&grid)?;
            for (a, b) in [(&closed, &dirac), (&closed, &inv), (&dirac, &inv)] {
                worst = worst.max(distance_up_to_phase(a, b));
            }
        }
    }
    within(worst, 1e-5, format!("closed form, Dirac transform and Wigner inversion on a {0}x{0} grid", v.triangle_points))
}

fn unitarity_check(cfg: &RunConfig, p: &PuParams) -> StepResult {
    if let Some(why) = requires_wavefunctions(p) {
        return Ok(Step::Skip(why));
    }
    let quad = &cfg.quadrature;
    let f = generating_function(p)?;
    let level = cfg.verify.wavefunction_level;
    let mut states: Vec<WaveFn2D> = Vec::new();
    for n in 0..=level {
        for m in 0..=level {
            states.push(dirac_transform(&osc_wavefunction(n, m, p)?, &f, quad)?);
        }
    }
    let refs: Vec<&WaveFn2D> = states.iter().collect();
    let g = gram_matrix(&refs, pu_box(p), quad, 1e-9)?;
    let mut worst: f64 = 0.0;
    for r in 0..g.nrows() {
        for c in 0..g.ncols() {
            let want = if r == c { 1.0 } else { 0.0 };
            worst = worst.max((g[(r, c)] - Complex64::new(want, 0.0)).norm());
        }
    }
    within(worst, 1e-6, format!("{0}x{0} Gram matrix of transformed states", states.len()))
}

fn appendix_tables() -> Vec<Vec<Vec<Rational>>> {
    (1..=6)
        .map(|size: i64| {
            (0..size)
                .map(|k| (0..size).map(|n| if n >= k { rat((7 * k + 3 * n + size) % 11 - 5, n + 1) } else { int(0) }).collect())
                .collect()
        })
        .collect()
}

pub fn verify_report(cfg: &RunConfig, p: &PuParams) -> VerifyReport {
    let v = &cfg.verify;
    let shift = if v.wrong_energy { int(1) } else { int(0) };
    let sig = PairSignature::pu();
    let mut j1_j2 = String::new();
    let mut checks = vec![
        run("genvalue_residuals_pu", true, None, || genvalue_check(p, Frame::Pu, v.genvalue_level, &shift)),
        run("genvalue_residuals_oscillator", true, None, || genvalue_check(p, Frame::Oscillator, v.genvalue_level, &shift)),
        run("hamiltonian_from_charges", true, None, || {
            let (j1, j2) = noether_charges::<Rational>(p)?;
            exact((&j1 - &j2).scale(&rat(1, 2)) == hamiltonian(p), "H = (J1 - J2)/2")
        }),
        run("charges_conserved", true, None, || {
            let (j1, j2) = noether_charges::<Rational>(p)?;
            let h = hamiltonian(p);
            let (a, b) = (poisson_bracket(&j1, &h, &sig)?, poisson_bracket(&j2, &h, &sig)?);
            exact(a.is_zero() && b.is_zero(), format!("{{J1,H}} = {}, {{J2,H}} = {}", a, b))
        }),
        run("charges_in_involution", true, None, || {
            let (j1, j2) = noether_charges::<Rational>(p)?;
            let b = poisson_bracket(&j1, &j2, &sig)?;
            j1_j2 = b.to_string();
            exact(b.is_zero(), format!("{{J1,J2}} = {}", b))
        }),
        run("equation_of_motion", true, None, || {
            let e = eliminate_hamilton_equations(p)?;
            exact(e.closes(), format!("residual {}", e.residual))
        }),
    ];
    for (name, kind) in [("diagonalizing_map", MapKind::Diagonalize), ("equal_frequency_map", MapKind::EqualFrequency)] {
        checks.push(run(name, true, None, || {
            let r = transform_report(kind, p)?;
            exact(r.symplectic && r.pullback_matches, format!("symplectic: {}, pullback = {}", r.symplectic, r.pullback))
        }));
    }
    checks.push(run("consistency_triangle", false, Some(1e-5), || triangle_check(cfg, p)));
    checks.push(run("unitarity", false, Some(1e-6), || unitarity_check(cfg, p)));
    checks.push(run("laguerre_hermite_identity", false, Some(1e-8), || {
        let mut worst: f64 = 0.0;
        for n in 0..=8 {
            for (a, b) in [(0.0, 0.0), (0.5, 0.3), (-0.7, 1.4)] {
                worst = worst.max(laguerre_hermite_identity_check(n, a, b, &cfg.quadrature)?.residual);
            }
        }
        within(worst, 1e-8, "n <= 8 at three shifts")
    }));
    checks.push(run("gaussian_integral", false, Some(1e-9), || {
        let mut worst: f64 = 0.0;
        for (a, b) in [(Complex64::new(1.2, 0.3), Complex64::new(0.5, -1.0)), (Complex64::new(2.0, 0.5), Complex64::new(3.0, 0.0))] {
            worst = worst.max(gaussian_integral_check(a, b, &cfg.quadrature)?.residual);
        }
        within(worst, 1e-9, "closed form against quadrature")
    }));
    checks.push(run("double_sum_reindexing", true, None, || {
        let tables = appendix_tables();
        let ok = tables.iter().all(|t| {
            let s = reindex_double_sum(t);
            s.agree() && s.form1 == s.full
        });
        exact(ok, format!("{} triangular tables", tables.len()))
    }));
    checks.push(run("stationary_evolution", true, None, || {
        let mut ok = true;
        for (n, m) in [(0, 0), (1, 2)] {
            let st = WignerState::new(n, m, p.clone(), Frame::Oscillator)?;
            let e = StarEvolution::new(&[(Complex64::new(1.0, 0.0), st)])?;
            let pt = [0.3, -0.2, 0.1, 0.4];
            ok &= [0.5, 7.0, -3.0].iter().all(|&t| e.value_c64(&pt, t) == e.value_c64(&pt, 0.0));
        }
        exact(ok, "eigenstates unchanged at t = 0.5, 7, -3")
    }));
    checks.push(run("moyal_equation", false, Some(1e-6), || {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let st = |n, m| WignerState::new(n, m, p.clone(), Frame::Oscillator);
        let e = StarEvolution::new(&[(Complex64::new(r, 0.0), st(0, 0)?), (Complex64::new(0.0, r), st(1, 1)?)])?;
        let mut worst: f64 = 0.0;
        for pt in [[0.2, -0.1, 0.4, 0.3], [-0.7, 0.5, 0.1, -0.9]] {
            for t in [0.0, 0.5, 1.3] {
                worst = worst.max(e.moyal_residual(&pt, t, 1e-4));
            }
        }
        within(worst, 1e-6, "two-state superposition")
    }));

    let pick = |s: Status| checks.iter().filter(|c| c.status == s).map(|c| c.name).collect::<Vec<_>>();
    let (failed, skipped) = (pick(Status::Fail), pick(Status::Skip));
    let passed = checks.iter().filter(|c| c.status == Status::Pass).count();
    VerifyReport { params: params_json(p), checks, j1_j2, passed, failed, skipped }
}
