//! Acceptance criteria, one PASS/FAIL line each.
//!
//! Runs without the libtest harness so the summary is always printed.

use std::process::ExitCode;
use std::time::Instant;

use mapflow::chain1d::chain_checks;
use mapflow::harness::{composition_check, verify_correspondence, verify_flow_correspondence, VerifyOptions};
use mapflow::integrate::{integrate_at, IntegratorConfig};
use mapflow::maps::{
    catalog_entry, henon_hamiltonian, henon_solution_family, hermite_checks, hermite_constraint_constant,
    hermite_hamiltonian, hermite_source_constraint, kdv2, kdv2_det_formula, kdv2_dx_dy, kdv2_image_velocity, kdv3,
    kdv3_display_rhs, kdv3_flow, qp4, qp4_invariants, qp4_normalization_oracle, CatalogOptions, KdvInvariants,
    CATALOG_IDS,
};
use mapflow::sampling::rng;
use mapflow::{nambu_bracket, Jet, Params, ScalarField};
use rand::Rng;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn ok<T, E: std::fmt::Display>(r: Result<T, E>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn params(kv: &[(&str, f64)]) -> Params {
    kv.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

fn cfg() -> IntegratorConfig {
    IntegratorConfig::default()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / (1.0 + b.abs())
}

/// Random polynomial `sum c_k prod x_i^{e_ki}` with total degree at most 3.
#[derive(Clone)]
struct Poly {
    terms: Vec<(f64, Vec<i32>)>,
}

impl Poly {
    fn random(n: usize, r: &mut impl Rng) -> Self {
        let terms = (0..r.gen_range(1..=4))
            .map(|_| {
                let mut e = vec![0i32; n];
                for _ in 0..r.gen_range(0..=3) {
                    e[r.gen_range(0..n)] += 1;
                }
                (r.gen_range(-2.0..2.0), e)
            })
            .collect();
        Poly { terms }
    }

    fn field(&self, n: usize) -> ScalarField {
        let p = self.clone();
        ScalarField::new("poly", n, move |x| {
            let mut acc = Jet::constant(0.0);
            for (c, e) in &p.terms {
                let mut t = Jet::constant(*c);
                for (xi, &k) in x.iter().zip(e) {
                    if k > 0 {
                        t = &t * &xi.powi(k);
                    }
                }
                acc = &acc + &t;
            }
            Ok(acc)
        })
    }
}

fn criterion_1() -> Outcome {
    let mut r = rng(42);
    let mut worst: f64 = 0.0;
    for case in 0..500 {
        let n = if case % 2 == 0 { 2 } else { 3 };
        let fs: Vec<ScalarField> = (0..n).map(|_| Poly::random(n, &mut r).field(n)).collect();
        let g = Poly::random(n, &mut r).field(n);
        let slot = r.gen_range(0..n);
        let x: Vec<f64> = (0..n).map(|_| r.gen_range(-1.5..1.5)).collect();
        let grad_g = ok(g.grad(&x))?;
        let mut lhs = 0.0;
        let mut scale = 1.0;
        for (l, &dg) in grad_g.as_slice().iter().enumerate() {
            let mut with_coord = fs.clone();
            with_coord[slot] = ScalarField::coordinate(n, l);
            let term = ok(nambu_bracket(&with_coord, &x))? * dg;
            lhs += term;
            scale += term.abs();
        }
        let mut with_g = fs.clone();
        with_g[slot] = g;
        let rhs = ok(nambu_bracket(&with_g, &x))?;
        worst = worst.max((lhs - rhs).abs() / scale.max(1.0 + rhs.abs()));
    }
    ensure!(worst <= 1e-9, "max relative error {worst:e}");
    Ok(format!("500 instances, max relative error {worst:.2e}"))
}

fn criterion_2() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut ids: Vec<String> = vec![];
    for id in CATALOG_IDS {
        let e = ok(catalog_entry(id, &[]))?;
        if e.dim() != 2 {
            continue;
        }
        ids.push(id.to_string());
        let flow = ok(e.flow(None))?;
        let h = &flow.hamiltonians()[0];
        for x in e.samples(1000, 42) {
            let big = ok(e.map.forward(&x))?;
            // Partials straight from the Hamiltonian's jet, not via the bracket.
            let j = ok(h.eval_jet(&Jet::seed(big.as_slice())))?;
            let want = [-j.partial(1), j.partial(0)];
            let got = ok(flow.nambu_rhs(big.as_slice()))?;
            for k in 0..2 {
                worst = worst.max((got[k] - want[k]).abs() / (1.0 + want[k].abs()));
            }
        }
    }
    ensure!(worst <= 1e-12, "max error {worst:e}");
    Ok(format!("{} on 1000 points each, max error {worst:.2e}", ids.join(", ")))
}

fn criterion_3() -> Outcome {
    let (b, c) = (1.0, 0.0);
    let p = params(&[("b", b), ("c", c)]);
    let mut worst_dev: f64 = 0.0;
    let mut worst_drift: f64 = 0.0;
    let mut worst_family: f64 = 0.0;
    for x in [1.0, -0.4, 0.25, 2.0] {
        let rep = ok(verify_correspondence("henon", &p, &[x], 0.0, 2.0, &cfg(), &VerifyOptions::default()))?;
        ensure!(rep.samples.len() >= 21, "only {} samples", rep.samples.len());
        worst_dev = worst_dev.max(rep.max_deviation);
        worst_drift = worst_drift.max(rep.max_drift());
        for s in &rep.samples {
            // Closed-form image: (y, y^2 - b x + c).
            let want = [s.t, s.t * s.t - b * x + c];
            let d = (s.flow[0] - want[0]).abs().max((s.flow[1] - want[1]).abs()) / (1.0 + want[1].abs());
            worst_dev = worst_dev.max(d);
            let (alpha, beta) = henon_solution_family(s.flow[0], s.flow[1], s.t);
            worst_family = worst_family.max((alpha * alpha - beta - (b * x - c)).abs());
        }
    }
    ensure!(worst_dev <= 1e-6, "deviation {worst_dev:e}");
    ensure!(worst_drift <= 1e-7, "drift {worst_drift:e}");
    ensure!(worst_family <= 1e-8, "solution family residual {worst_family:e}");
    Ok(format!(
        "deviation {worst_dev:.2e}, drift {worst_drift:.2e}, family residual {worst_family:.2e}"
    ))
}

fn criterion_4() -> Outcome {
    let mut worst_dev: f64 = 0.0;
    let mut worst_drift: f64 = 0.0;
    let mut worst_curve: f64 = 0.0;
    for (m, cs) in [(2usize, [0.1, -0.5, 0.3]), (3, [1.0, 0.5, -0.2])] {
        let h = ok(hermite_hamiltonian(m))?;
        for c in cs {
            let y0 = 0.5;
            let x0 = ok(hermite_source_constraint(m, c, y0))?;
            let rep = ok(verify_correspondence(
                "hermite",
                &params(&[("m", m as f64)]),
                &[x0],
                y0,
                2.0,
                &cfg(),
                &VerifyOptions::default(),
            ))?;
            worst_dev = worst_dev.max(rep.max_deviation);
            let h0 = ok(h.eval(&rep.samples[0].flow))?;
            for s in &rep.samples {
                worst_drift = worst_drift.max(rel(ok(h.eval(&s.flow))?, h0));
                let want = ok(hermite_source_constraint(m, c, s.t))?;
                worst_curve = worst_curve.max(rel(s.source[0], want));
                let back = ok(hermite_constraint_constant(m, s.source[0], s.source[1]))?;
                worst_curve = worst_curve.max((back - c).abs());
            }
        }
    }
    ensure!(worst_dev <= 1e-6, "deviation {worst_dev:e}");
    ensure!(worst_drift <= 1e-7, "drift {worst_drift:e}");
    ensure!(worst_curve <= 1e-6, "source curve off by {worst_curve:e}");
    let exact = ok(hermite_checks(12))?;
    ensure!(exact.pass, "exact suite failed: {:?}", exact.rows.iter().filter(|r| !r.pass()).collect::<Vec<_>>());
    Ok(format!(
        "deviation {worst_dev:.2e}, drift {worst_drift:.2e}, exact suite m <= 12 ({} rows)",
        exact.rows.len()
    ))
}

fn criterion_5() -> Outcome {
    let e = ok(catalog_entry("kdv3", &[]))?;
    let map = kdv3();
    let points = e.samples(1000, 42);
    let mut det_err: f64 = 0.0;
    let mut inv_step: f64 = 0.0;
    let mut rhs_err: f64 = 0.0;
    let flow = ok(kdv3_flow())?;
    for p in &points {
        det_err = det_err.max((ok(map.det_jacobian(p))? - 1.0).abs());
        let img = ok(map.forward(p))?;
        let a = ok(KdvInvariants::of(p))?;
        inv_step = inv_step.max(a.max_rel_diff(&ok(KdvInvariants::of(&img))?));
        let shown = ok(kdv3_display_rhs(&img))?;
        let v = ok(flow.nambu_rhs(&img))?;
        for j in 0..3 {
            rhs_err = rhs_err.max((shown[j] - v[j]).abs() / (1.0 + shown[j].abs()));
        }
    }
    let mut inv_orbit: f64 = 0.0;
    for p in points.iter().take(50) {
        let start = ok(KdvInvariants::of(p))?;
        let mut cur = p.clone();
        for _ in 0..50 {
            cur = ok(map.forward(&cur))?;
        }
        inv_orbit = inv_orbit.max(start.max_rel_diff(&ok(KdvInvariants::of(&cur))?));
    }
    let mut dev: f64 = 0.0;
    let mut drift: f64 = 0.0;
    let mut starts = vec![vec![1.1, 0.9]];
    starts.extend(e.samples(5, 7).iter().map(|p| p.as_slice()[..2].to_vec()));
    for x0 in starts {
        let rep = ok(verify_correspondence("kdv3", &Params::new(), &x0, 1.0, 2.0, &cfg(), &VerifyOptions::default()))?;
        dev = dev.max(rep.max_deviation);
        drift = drift.max(rep.max_drift());
    }
    ensure!(det_err <= 1e-10, "det J error {det_err:e}");
    ensure!(inv_step <= 1e-10 && inv_orbit <= 1e-10, "invariants drift {inv_step:e} / {inv_orbit:e}");
    ensure!(dev <= 1e-6, "deviation {dev:e}");
    ensure!(drift <= 1e-8, "drift {drift:e}");
    ensure!(rhs_err <= 1e-9, "displayed RHS error {rhs_err:e}");
    Ok(format!(
        "det {det_err:.1e}, invariants {inv_step:.1e}/{inv_orbit:.1e}, deviation {dev:.1e}, drift {drift:.1e}, rhs {rhs_err:.1e}"
    ))
}

fn criterion_6() -> Outcome {
    let r = 2.0;
    let e = ok(catalog_entry("kdv2", &[("r", r)]))?;
    let m2 = ok(kdv2(r))?;
    let m3 = kdv3();
    let mut surf: f64 = 0.0;
    let mut det_err: f64 = 0.0;
    let mut vel_err: f64 = 0.0;
    let flow = ok(e.flow(None))?;
    for p in e.samples(100, 42) {
        let (x, y) = (p[0], p[1]);
        let a = ok(m2.forward(&[x, y]))?;
        let b = ok(m3.forward(&[x, y, r / (x * y)]))?;
        surf = surf.max(rel(a[0], b[0])).max(rel(a[1], b[1])).max(rel(r / (a[0] * a[1]), b[2]));
        det_err = det_err.max(rel(ok(m2.det_jacobian(&[x, y]))?, ok(kdv2_det_formula(r, x, y))?));
        // Chain rule along the source curve: dX/dy = J (dx/dy, 1).
        let jac = ok(m2.jacobian(&[x, y]))?;
        let dxdy = ok(kdv2_dx_dy(r, x, y))?;
        let chain: Vec<f64> = (0..2).map(|i| jac[(i, 0)] * dxdy + jac[(i, 1)]).collect();
        let shown = ok(kdv2_image_velocity(r, x, y))?;
        let v = ok(flow.nambu_rhs(&a))?;
        for i in 0..2 {
            vel_err = vel_err.max(rel(v[i], chain[i])).max(rel(shown[i], chain[i]));
        }
    }
    let mut dev: f64 = 0.0;
    let mut drift: f64 = 0.0;
    let mut curve: f64 = 0.0;
    for x0 in [1.0, 0.6, 1.4] {
        let rep = ok(verify_correspondence("kdv2", &params(&[("r", r)]), &[x0], 1.0, 1.8, &cfg(), &VerifyOptions::default()))?;
        dev = dev.max(rep.max_deviation);
        drift = drift.max(rep.max_drift());
        let times: Vec<f64> = rep.samples.iter().map(|s| s.t).collect();
        let oracle = ok(integrate_at(|t, x| Ok(vec![kdv2_dx_dy(r, x[0], t)?]), &[x0], &times, &cfg()))?;
        for (s, o) in rep.samples.iter().zip(&oracle.samples) {
            curve = curve.max(rel(s.source[0], o.state[0]));
        }
    }
    ensure!(surf <= 1e-10, "surface mismatch {surf:e}");
    ensure!(det_err <= 1e-9, "det J {det_err:e}");
    ensure!(drift <= 1e-7, "drift {drift:e}");
    ensure!(dev <= 1e-6, "deviation {dev:e}");
    ensure!(curve <= 1e-7, "source curve {curve:e}");
    ensure!(vel_err <= 1e-8, "velocity {vel_err:e}");
    Ok(format!(
        "surface {surf:.1e}, det {det_err:.1e}, drift {drift:.1e}, deviation {dev:.1e}, velocity {vel_err:.1e}"
    ))
}

fn criterion_7() -> Outcome {
    let mut det_err: f64 = 0.0;
    for (a, b, c) in [(1.0, 1.0, 1.0), (2.0, 1.0, 1.0), (0.5, 1.5, 0.8), (-1.0, 1.0, 1.0)] {
        let m = ok(qp4(a, b, c))?;
        let q2 = (a * b * c) * (a * b * c);
        for p in catalog_entry("qp4", &[]).map_err(|e| e.to_string())?.samples(200, 3) {
            det_err = det_err.max(rel(ok(m.det_jacobian(&p))?, q2));
        }
    }
    let unit = ok(qp4(1.0, 1.0, 1.0))?;
    let mut inv: f64 = 0.0;
    for p in ok(catalog_entry("qp4", &[]))?.samples(200, 5) {
        let img = ok(unit.forward(&p))?;
        let (r0, s0) = qp4_invariants(1.0, 1.0, 1.0, &p);
        let (r1, s1) = qp4_invariants(1.0, 1.0, 1.0, &img);
        inv = inv.max((r1 - r0).abs() / r0.abs()).max((s1 - s0).abs() / s0.abs());
    }
    let rep = ok(verify_correspondence("qp4", &Params::new(), &[1.1, 0.9], 1.0, 2.0, &cfg(), &VerifyOptions::default()))?;
    let oracle = ok(qp4_normalization_oracle(2.0, 1.0, 1.0, &[1.1, 0.9, 1.3], 1e-5))?;
    let winner = oracle.winner.ok_or_else(|| format!("no unique winner: {:?}", oracle.candidates))?;
    let best = oracle.candidates.iter().find(|c| c.normalization == winner).map(|c| c.residual).unwrap_or(f64::NAN);
    // The winner must also reproduce the map end to end.
    let opts = VerifyOptions {
        catalog: CatalogOptions {
            normalization: Some(winner),
        },
        ..Default::default()
    };
    let p2 = params(&[("a", 2.0), ("b", 1.0), ("c", 1.0)]);
    let rep2 = ok(verify_correspondence("qp4", &p2, &[1.1, 0.9], 1.3, 1.8, &cfg(), &opts))?;
    ensure!(det_err <= 1e-9, "det J {det_err:e}");
    ensure!(inv <= 1e-10, "r, s drift {inv:e}");
    ensure!(rep.pass, "a=b=c=1 correspondence deviation {:e}", rep.max_deviation);
    ensure!(best <= 1e-5, "winner residual {best:e}");
    ensure!(rep2.max_deviation <= 1e-6, "winner flow deviation {:e}", rep2.max_deviation);
    Ok(format!(
        "det {det_err:.1e}, r/s {inv:.1e}, deviation {:.1e}, normalization winner {} (residual {best:.1e})",
        rep.max_deviation,
        winner.as_str()
    ))
}

fn criterion_8() -> Outcome {
    let mut det_err: f64 = 0.0;
    let mut checks = 0;
    for id in CATALOG_IDS {
        let e = ok(catalog_entry(id, &[]))?;
        for p in e.samples(4, 11) {
            for m in 1..=5 {
                let r = ok(composition_check(id, &Params::new(), m, &p, p[e.time_index] + 0.1, &cfg(), &VerifyOptions::default()))?;
                det_err = det_err.max(r.det_rel_error);
                checks += 1;
            }
        }
    }
    let mut drift: f64 = 0.0;
    for iterations in [2, 3] {
        let r = ok(composition_check("henon", &Params::new(), iterations, &[0.3, -0.2], 0.6, &cfg(), &VerifyOptions::default()))?;
        let c = r.correspondence.ok_or("missing Hénon flow check")?;
        ensure!(c.pass, "henon {iterations} iterations: deviation {:e}", c.max_deviation);
        // Independent oracle: the m-step closed form evaluated on the map images.
        let h = ok(henon_hamiltonian(iterations + 1, 1.0, 0.0))?;
        let h0 = ok(h.eval(&c.samples[0].map))?;
        for s in &c.samples {
            drift = drift.max(rel(ok(h.eval(&s.flow))?, h0));
        }
    }
    let y0 = 0.6;
    let x0 = ok(hermite_source_constraint(3, 0.8, y0))?;
    let r = ok(composition_check("hermite", &Params::new(), 2, &[x0, y0], 1.8, &cfg(), &VerifyOptions::default()))?;
    let c = r.correspondence.ok_or("missing Hermite flow check")?;
    let h = ok(hermite_hamiltonian(3))?;
    let h0 = ok(h.eval(&c.samples[0].flow))?;
    for s in &c.samples {
        drift = drift.max(rel(ok(h.eval(&s.flow))?, h0));
    }
    ensure!(det_err <= 1e-8, "det multiplicativity {det_err:e}");
    ensure!(c.pass, "hermite m = 3 deviation {:e}", c.max_deviation);
    ensure!(drift <= 1e-7, "drift {drift:e}");
    Ok(format!("{checks} det checks (max {det_err:.1e}), Hamiltonian drift {drift:.1e}"))
}

fn criterion_9() -> Outcome {
    let mut lines = vec![];
    for (m, c) in [(2, 0.0), (3, 0.0), (3, 0.4)] {
        let r = ok(chain_checks(m, 0.0, c, 42))?;
        ensure!(r.det_recurrence_error <= 1e-12, "m={m}: recurrence {:e}", r.det_recurrence_error);
        ensure!(r.bar_a_identity_error <= 1e-10, "m={m}: bar A identity {:e}", r.bar_a_identity_error);
        ensure!(r.hamiltonian_error <= 1e-10, "m={m}: H - q0 {:e}", r.hamiltonian_error);
        ensure!(r.closed_form_error.is_none_or(|e| e <= 1e-10), "m={m}: closed form {:?}", r.closed_form_error);
        ensure!(r.hamilton.iter().all(|h| h.pass), "m={m}: Hamilton equations");
        let corr = r.correspondence_error.unwrap_or(f64::NAN);
        ensure!(corr <= 1e-10, "m={m}: correspondence {corr:e}");
        ensure!(r.pass, "m={m}: report failed");
        lines.push(format!(
            "m={m} c={c}: corrected {corr:.1e}, literal (X,Y)=(q+1,p+a+1) {:.1e}",
            r.literal_correspondence_error.unwrap_or(f64::NAN)
        ));
    }
    Ok(lines.join("; "))
}

fn criterion_10() -> Outcome {
    let mut worst: f64 = 0.0;
    for (id, kv) in [("henon", vec![("m", 1.0)]), ("henon", vec![("b", 0.7), ("c", 0.3)]), ("hermite", vec![("m", 2.0)])] {
        let e = ok(catalog_entry(id, &kv))?;
        let numeric = ok(e.numeric_flow(None))?;
        let closed = &e.hamiltonians.as_ref().ok_or("no closed form")?[0];
        let mut offset = None;
        for p in e.samples(100, 42) {
            let big = ok(e.map.forward(&p))?;
            let d = ok(numeric.hamiltonians()[0].eval(&big))? - ok(closed.eval(&big))?;
            let o = *offset.get_or_insert(d);
            worst = worst.max((d - o).abs());
        }
    }
    ensure!(worst <= 1e-7, "deviation from closed form {worst:e}");
    Ok(format!("henon, hermite m=2: max deviation {worst:.2e} up to a constant"))
}

fn criterion_11() -> Outcome {
    let e = ok(catalog_entry("henon", &[("b", 1.0), ("c", 0.0)]))?;
    let bad = ScalarField::new("X^2", 2, |v| Ok(v[0].square()));
    let flow = ok(ok(e.flow(None))?.with_hamiltonians(vec![bad]))?;
    let rep = ok(verify_flow_correspondence(&flow, false, &[1.0, 0.0], 0.0, 2.0, &cfg(), &VerifyOptions::default()))?;
    ensure!(!rep.pass, "corrupted Hamiltonian passed");
    ensure!(rep.max_deviation > 1e-3, "deviation only {:e}", rep.max_deviation);
    let flow3 = ok(kdv3_flow())?;
    let swapped = vec![flow3.hamiltonians()[1].clone(), flow3.hamiltonians()[0].clone()];
    let rep3 = ok(verify_flow_correspondence(
        &ok(flow3.with_hamiltonians(swapped))?,
        false,
        &[1.1, 0.9, 1.0],
        1.0,
        2.0,
        &cfg(),
        &VerifyOptions::default(),
    ))?;
    ensure!(!rep3.pass && rep3.max_deviation > 1e-3, "swapped kdv3 Hamiltonians deviation {:e}", rep3.max_deviation);
    Ok(format!(
        "henon H=X^2 deviation {:.2e}, kdv3 swapped H deviation {:.2e}",
        rep.max_deviation, rep3.max_deviation
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("nambu bracket identity", criterion_1),
        ("n=2 bracket vs canonical equations", criterion_2),
        ("henon correspondence", criterion_3),
        ("hermite flows and exact suite", criterion_4),
        ("kdv 3d", criterion_5),
        ("kdv 2d reduction", criterion_6),
        ("q-painleve iv", criterion_7),
        ("composition", criterion_8),
        ("one-dimensional chain", criterion_9),
        ("numeric hamiltonian builder", criterion_10),
        ("negative control", criterion_11),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = f();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name} [{secs:.1}s]: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name} [{secs:.1}s]: {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
