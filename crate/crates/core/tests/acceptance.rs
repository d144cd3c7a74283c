//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::time::{Duration, Instant};

use keller_core::chart::{blowup_demo, Truncation};
use keller_core::flow::{integrate, FlowSpec, Integrator, RunStatus, Schedule, Trajectory};
use keller_core::galois::{apply_sigma, derive_sigma, CycloLaurent};
use keller_core::jacrep::{flow_rates, perturb, uv_jacobian, verify_identity_hh, Driven, Status};
use keller_core::json::Experiment;
use keller_core::registry::{f0, f0_rep, f0_sqrt_rep, f1, f1_rep, g0, n3_triangular, Registry};
use keller_core::rat::rat_to_cf;
use keller_core::uvrep::{LaurentGamma, UVRep};
use keller_core::{rat, PSeries, Poly, PolyMap, Rat, CF};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Suite {
    passed: usize,
    failed: Vec<String>,
}

impl Suite {
    fn record(&mut self, name: &str, ok: bool, detail: impl AsRef<str>) {
        println!("{} {name}: {}", if ok { "PASS" } else { "FAIL" }, detail.as_ref());
        if ok {
            self.passed += 1;
        } else {
            self.failed.push(name.to_string());
        }
    }

    /// Records a criterion that must also finish within `limit`.
    fn timed(&mut self, name: &str, limit: Duration, f: impl FnOnce() -> (bool, String)) {
        let t0 = Instant::now();
        let (ok, detail) = f();
        let dt = t0.elapsed();
        let in_time = dt <= limit;
        let detail = format!("{detail} [{:.3}s, limit {}s]", dt.as_secs_f64(), limit.as_secs_f64());
        self.record(name, ok && in_time, detail);
    }
}

fn g() -> Poly {
    Poly::var(1, 0).unwrap()
}

fn gs(terms: &[(i64, Poly)]) -> LaurentGamma {
    PSeries::from_coeffs(1, terms.iter().cloned(), None).unwrap()
}

fn x(n: usize, i: usize) -> Poly {
    Poly::var(n, i).unwrap()
}

fn cr(v: f64) -> CF {
    CF::new(v, 0.0)
}

fn main() {
    let mut s = Suite { passed: 0, failed: Vec::new() };
    let one_sec = Duration::from_secs(1);

    // ---- exact symbolic checks ----
    s.timed("jacobian determinants", one_sec, || {
        let dg = g0().jacobian_det().unwrap();
        let df = f0().jacobian_det().unwrap();
        let expect = x(2, 1).pow(2).scale(&rat(2));
        (dg.is_one() && df == expect, format!("|J(g0)| = {dg}, |J(f0)| = {df}"))
    });

    s.timed("f0 u-gamma jacobian entries", one_sec, uv_entries_f0);
    s.timed("generalized hh identity", one_sec, hh_identity);
    s.timed("galois invariance of psi1 for f1", one_sec, galois_invariance);
    s.timed("reversion coefficients and chart limits", one_sec, reversion_and_limits);

    // ---- numerical runs ----
    let reg = Registry::builtin();
    let exp = |name: &str| reg.experiment(name).unwrap().resolve(&reg, None).unwrap();
    let mut trajectories: Vec<(String, Trajectory)> = Vec::new();

    s.timed("f0-basic conservation, limit and driven rate", Duration::from_secs(30), || {
        let e = exp("f0-basic");
        let t = integrate(&e.spec, &e.x0).unwrap();
        let out = f0_basic(&e, &t);
        trajectories.push(("f0-basic".into(), t));
        out
    });

    s.timed("f0-sqrt rate residuals", Duration::from_secs(60), || {
        let (ok, detail, runs) = f0_sqrt(&reg);
        trajectories.extend(runs);
        (ok, detail)
    });

    s.timed("f1-long conservation and gamma limit", Duration::from_secs(300), || {
        let e = exp("f1-long");
        let t = integrate(&e.spec, &e.x0).unwrap();
        let out = f1_long(&e, &t);
        trajectories.push(("f1-long".into(), t));
        out
    });

    // ---- properties ----
    s.timed("conservation on random maps and n3 triangular", Duration::from_secs(120), random_conservation);
    s.timed("finite differences vs symbolic partials", Duration::from_secs(10), finite_differences);
    s.timed("series back-substitution on random inputs", Duration::from_secs(60), series_back_substitution);

    let breaks: Vec<String> = trajectories
        .iter()
        .filter(|(_, t)| t.branch_breaks > 0)
        .map(|(n, t)| format!("{n}: {}", t.branch_breaks))
        .collect();
    let with_branch = trajectories.iter().filter(|(_, t)| t.records[0].u.is_some()).count();
    s.record(
        "branch continuity on every trajectory",
        breaks.is_empty() && with_branch == trajectories.len(),
        format!("{} trajectories with a tracked branch, breaks: {:?}", with_branch, breaks),
    );

    println!("\n{} passed, {} failed", s.passed, s.failed.len());
    if !s.failed.is_empty() {
        println!("failed: {}", s.failed.join(", "));
        std::process::exit(1);
    }
}

fn uv_entries_f0() -> (bool, String) {
    let rep = f0_rep();
    let f = f0();
    let exp = rep.expand_image(&f, 8).unwrap();
    let jdet = f.jacobian_det().unwrap();
    let j = uv_jacobian(&exp, &rep, &jdet).unwrap();
    // a = eps, b = eps + eps^2 t^-2: chi1 = 1, psi1 = 1 + 2 eps t^-2
    let chi1 = gs(&[(0, Poly::one(1))]);
    let psi1 = gs(&[(0, Poly::one(1)), (2, g().scale(&rat(2)))]);
    let t = gs(&[(-1, Poly::one(1))]);
    let r2 = t.mul(&chi1).unwrap();
    let r4 = t.mul(&psi1).unwrap();
    let r3 = gs(&[(1, g())]);
    // r1 = eps t^-1 and r1 psi1 = |J| t^-L + r3 chi1
    let r1 = gs(&[(1, g())]);
    let mut ok = j.r2 == r2 && j.r4 == r4 && j.r3 == r3 && j.r1_den == psi1;
    ok &= j.r1_num == r1.mul(&psi1).unwrap();
    let jdet_curve = gs(&[(2, g().pow(2).scale(&rat(2)))]);
    ok &= j.r1_num == jdet_curve.shift(1).add(&r3.mul(&chi1).unwrap()).unwrap();

    // oracle: partial derivatives of f substituted along the curve
    let curve = rep.curve_series();
    let one = PSeries::one(1);
    let entry = |c: usize, v: usize| f.component(c).partial(v).unwrap().substitute(&curve, &one).unwrap();
    ok &= entry(0, 1) == j.r2 && entry(1, 0) == j.r3 && entry(1, 1) == j.r4;
    ok &= entry(0, 0).mul(&j.r1_den).unwrap() == j.r1_num;
    let n = vec!["g".to_string()];
    (ok, format!("r3 = {}, r1*psi1 = {}", j.r3.display_with("w", &n), j.r1_num.display_with("w", &n)))
}

/// Numerical oracle for the identity: finite differences of f along the
/// curve built by hand.
fn hh_numeric(f: &PolyMap, rep: &UVRep, gamma: f64, u: f64) -> f64 {
    let curve = |g: f64, u: f64| {
        let m = rep.m() as i32;
        let n = rep.N() as i32;
        let lead = rep.sign() as f64 * u.powi(m);
        let mut other = g * u.powi(m - n);
        for (i, h) in rep.h().iter().enumerate() {
            other += rat_to_cf(h).re * u.powi(m - i as i32);
        }
        let mut p = [0.0; 2];
        p[rep.role()[0]] = lead;
        p[rep.role()[1]] = other;
        [cr(p[0]), cr(p[1])]
    };
    let ab = |g: f64, u: f64| {
        let pt = curve(g, u);
        [f.component(0).eval(&pt).unwrap().re, f.component(1).eval(&pt).unwrap().re]
    };
    let h = 1e-5;
    let d_g = |i: usize| (ab(gamma + h, u)[i] - ab(gamma - h, u)[i]) / (2.0 * h);
    let d_u = |i: usize| (ab(gamma, u + h)[i] - ab(gamma, u - h)[i]) / (2.0 * h);
    d_g(1) * d_u(0) - d_g(0) * d_u(1)
}

fn hh_identity() -> (bool, String) {
    let mut ok = true;
    let mut notes = Vec::new();
    for (name, f, rep) in [("f0", f0(), f0_rep()), ("f1", f1(), f1_rep())] {
        let exp = rep.expand_image(&f, 24).unwrap();
        let jdet = f.jacobian_det().unwrap();
        let v = verify_identity_hh(&exp, &rep, &jdet).unwrap();
        ok &= v.status == Status::Pass;
        let bad = verify_identity_hh(&perturb(&exp, 1), &rep, &jdet).unwrap();
        ok &= bad.status == Status::Fail;
        // numerical oracle at a few points
        let m = rep.m() as i32;
        let mut worst: f64 = 0.0;
        for &(gamma, u) in &[(0.7, 2.0), (-1.3, 3.5), (2.0, -2.5)] {
            let lhs = hh_numeric(&f, &rep, gamma, u);
            let pt = rep.curve_eval(cr(gamma), cr(u)).unwrap();
            let rhs = rep.orientation() as f64 * jdet.eval(&pt).unwrap().re * m as f64 * u.powi(2 * m - rep.N() as i32 - 1);
            worst = worst.max((lhs - rhs).abs() / (1.0 + rhs.abs()));
        }
        ok &= worst < 1e-6;
        notes.push(format!("{name}: {} (perturbed: {}), numeric rel err {worst:.1e}", v.status, bad.status));
    }
    (ok, notes.join("; "))
}

fn galois_invariance() -> (bool, String) {
    let rep = f1_rep();
    let exp = rep.expand_image(&f1(), 24).unwrap();
    let psi1 = exp.b.param_partial(0);
    let expected = gs(&[(0, Poly::constant(1, rat(2))), (3, g().scale(&rat(6))), (6, g().pow(2).scale(&rat(3)))]);
    let sigma = derive_sigma(&rep, 1).unwrap();
    let image = apply_sigma(&sigma, &expected).unwrap();
    let same = CycloLaurent::from_series(sigma.field(), &expected).unwrap();
    let mut ok = psi1 == expected && image == same;
    // oracle: gamma -> gamma + 2 v^3, v -> -v, evaluated numerically
    let p = |gm: f64, v: f64| 2.0 + 6.0 * gm * v.powi(-3) + 3.0 * gm * gm * v.powi(-6);
    for &(gm, v) in &[(0.3f64, 1.7f64), (-2.0, 0.9), (5.0, -3.1)] {
        ok &= (p(gm + 2.0 * v.powi(3), -v) - p(gm, v)).abs() <= 1e-9 * (1.0 + p(gm, v).abs());
    }
    (ok, format!("sigma(gamma) = {}, sigma(psi1) = {image}", sigma.gamma_image))
}

/// Compositional inverse by undetermined coefficients.
fn revert_oracle(t: &[Poly], order: usize) -> Vec<Poly> {
    // t[k] is the coefficient of s^k, t[0] = 0, t[1] = 1
    let pa = t[1].arity();
    let mut c = vec![Poly::zero(pa); order + 1];
    c[1] = Poly::one(pa);
    for n in 2..=order {
        // [z^n] t(s(z)) with c[n] = 0, then c[n] = -that
        let mut total = Poly::zero(pa);
        let mut s_pow = c.clone(); // s^1
        for k in 1..=n {
            if k > 1 {
                let mut next = vec![Poly::zero(pa); order + 1];
                for (i, a) in s_pow.iter().enumerate() {
                    for (j, b) in c.iter().enumerate() {
                        if i + j <= order && !a.is_zero() && !b.is_zero() {
                            next[i + j] = &next[i + j] + &(a * b);
                        }
                    }
                }
                s_pow = next;
            }
            if k < t.len() {
                total = &total + &(&t[k] * &s_pow[n]);
            }
        }
        c[n] = total.neg_ref();
    }
    c
}

fn reversion_and_limits() -> (bool, String) {
    let e = g();
    let one = Poly::one(1);
    let t = PSeries::from_coeffs(1, [(1, one.clone()), (2, e.clone()), (3, one.clone())], None).unwrap();
    let order = 6;
    let s = t.revert(order).unwrap();
    let c3 = &e.pow(2).scale(&rat(2)) - &one;
    let mut ok = s.coeff_or_zero(1) == one && s.coeff_or_zero(2) == e.neg_ref() && s.coeff_or_zero(3) == c3;
    let oracle = revert_oracle(&[Poly::zero(1), one.clone(), e.clone(), one.clone()], order as usize);
    ok &= (1..=order).all(|k| s.coeff_or_zero(k) == oracle[k as usize]);
    let back = PSeries::compose(&t, &s).unwrap();
    ok &= (0..=order).all(|k| back.coeff_or_zero(k) == if k == 1 { one.clone() } else { Poly::zero(1) });

    let truncated = blowup_demo(Truncation::FirstDependent, 8).unwrap();
    let full = blowup_demo(Truncation::None, 8).unwrap();
    let over = blowup_demo(Truncation::At(2), 8).unwrap();
    ok &= truncated.limits_match() && full.limits_match() && !over.limits_match();
    let n = vec!["e".to_string()];
    let lim: Vec<String> = truncated.limits.iter().map(|(k, v)| format!("{k} -> {}", v.display_with(&n))).collect();
    (ok, format!("s(z) = {}; limits {}", s.truncate(3).display_with("z", &n), lim.join(", ")))
}

fn rel(a: CF, b: CF) -> f64 {
    (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
}

fn f0_basic(e: &Experiment, t: &Trajectory) -> (bool, String) {
    let y0 = t.records[0].y[1].re;
    let drift = t.step_drift[1].unwrap();
    let mut ok = t.status == RunStatus::Completed && (y0 + 12.0).abs() < 1e-12;
    ok &= (t.records[0].gamma.unwrap().re + 21.0).abs() < 1e-12;
    ok &= drift <= 1e-3;
    let far: Vec<_> = t.records.iter().filter(|r| r.x[0].norm() > 1e4).collect();
    let worst_lim = far.iter().map(|r| (r.y[0].re + 12.0).abs()).fold(0.0, f64::max);
    ok &= !far.is_empty() && worst_lim <= 1e-2;
    let mut worst_rate: f64 = 0.0;
    for r in &t.records[1..] {
        // 2 x2^2 averaged over the step, as the determinant oracle
        let j_exact = cr(2.0) * r.x[1] * r.x[1];
        ok &= rel(r.jdet_step.unwrap(), j_exact) < 1e-3;
        worst_rate = worst_rate.max(rel(r.driven_rate.unwrap(), r.jdet_step.unwrap()));
    }
    ok &= worst_rate <= 1e-3;
    ok &= e.spec.step == 1e-5;
    (
        ok,
        format!(
            "conserved {y0:.3}, max drift {drift:.2e}; |x1x2 + 12| <= {worst_lim:.1e} over {} rows with |x1| > 1e4; driven-rate rel err {worst_rate:.1e}",
            far.len()
        ),
    )
}

fn f0_sqrt(reg: &Registry) -> (bool, String, Vec<(String, Trajectory)>) {
    // closed forms: du/dr = (1/2) v psi1, dgamma/dr = 2 eps^2 v^-4
    let rep = f0_sqrt_rep();
    let exp = rep.expand_image(&f0(), 16).unwrap();
    let (du, dg) = flow_rates(&exp, &rep, Driven::A);
    let psi1 = gs(&[(0, Poly::one(1)), (4, g().scale(&rat(2)))]);
    let du_expect = psi1.shift(-1).scale(&Rat::new(1.into(), 2.into()));
    let dg_expect = gs(&[(4, g().pow(2).scale(&rat(2)))]);
    let mut ok = du == du_expect && dg == dg_expect;
    let mut notes = vec![];
    let mut runs = Vec::new();
    let mut at_r = Vec::new(); // (step size, |res_u| at r = 1e-4)
    for (name, limit_u) in [("f0-sqrt-m3", 1e-6), ("f0-sqrt-m3-fine", 1e-7), ("f0-sqrt-m3-coarse", f64::INFINITY)] {
        for branch in [3.0, -3.0] {
            let mut e = reg.experiment(name).unwrap().resolve(reg, None).unwrap();
            e.spec.initial_branch = Some(cr(branch));
            let t = integrate(&e.spec, &e.x0).unwrap();
            ok &= t.status == RunStatus::Completed;
            ok &= (t.records[0].u.unwrap().re - branch).abs() < 1e-12 && (t.records[0].gamma.unwrap().re - 27.0).abs() < 1e-12;
            let max_u = t.records.iter().filter_map(|r| r.res_u).map(|z| z.norm()).fold(0.0, f64::max);
            let max_g = t.records.iter().filter_map(|r| r.res_gamma).map(|z| z.norm()).fold(0.0, f64::max);
            ok &= max_u <= limit_u;
            if name.ends_with("coarse") {
                ok &= max_g <= 2e-4;
            }
            // oracle at step 1 from the closed forms
            let r1 = &t.records[1];
            let (u0, g0v, u1, g1) = (cr(branch), cr(27.0), r1.u.unwrap(), r1.gamma.unwrap());
            let h = e.spec.step;
            let o_u = (u1 - u0) / h - 0.5 * u1 * (1.0 + 2.0 * g1 / u1.powi(4));
            let o_g = (g1 - g0v) / h - 2.0 * g1 * g1 / u1.powi(4);
            ok &= (o_u - r1.res_u.unwrap()).norm() <= 1e-9 && (o_g - r1.res_gamma.unwrap()).norm() <= 1e-7;
            let sample = t.records.iter().find(|r| (r.r - 1e-4).abs() < 1e-12).unwrap();
            at_r.push((h, branch, sample.res_u.unwrap().norm()));
            notes.push(format!(
                "dt={h:e} v0={branch:+}: first |res_u| {:.4e}, max |res_u| {max_u:.2e}, max |res_g| {max_g:.2e}",
                r1.res_u.unwrap().re.abs()
            ));
            runs.push((format!("{name} v0={branch:+}"), t));
        }
    }
    // first-step residuals against the reference tables: 4.586e-7, 4.568e-8 and -9.000e-5
    let first = |run: usize| runs[run].1.records[1].clone();
    ok &= (first(0).res_u.unwrap().re + 4.586e-7).abs() <= 0.01 * 4.586e-7;
    ok &= (first(1).res_u.unwrap().re - 4.586e-7).abs() <= 0.01 * 4.586e-7;
    ok &= (first(3).res_u.unwrap().re - 4.568e-8).abs() <= 0.01 * 4.568e-8;
    ok &= (first(5).res_gamma.unwrap().re + 9.000e-5).abs() <= 0.01 * 9.0e-5;
    // linear scaling: each tenfold step reduction shrinks the residual ~tenfold
    for branch in [3.0, -3.0] {
        let get = |h: f64| at_r.iter().find(|(s, b, _)| *s == h && *b == branch).unwrap().2;
        for (big, small) in [(1e-5, 1e-6), (1e-6, 1e-7)] {
            let ratio = get(big) / get(small);
            ok &= (5.0..=20.0).contains(&ratio);
            notes.push(format!("v0={branch:+} ratio {big:e}/{small:e}: {ratio:.2}"));
        }
    }
    (ok, notes.join("; "), runs)
}

fn f1_long(e: &Experiment, t: &Trajectory) -> (bool, String) {
    let r0 = &t.records[0];
    let (v0, g0v) = (r0.u.unwrap().re, r0.gamma.unwrap().re);
    let mut ok = t.status == RunStatus::Completed && t.steps_taken == 21_000_000;
    ok &= (v0 - 11f64.sqrt()).abs() < 1e-3 && (v0 - 3.3166).abs() < 1e-3 && (g0v - 18.517).abs() < 1e-3;
    ok &= (r0.y[0].re - 266.0).abs() < 1e-9 && (r0.y[1].re - 70.0).abs() < 1e-9;
    let drift = t.step_drift[1].unwrap();
    ok &= drift <= 1e-2;
    let last = t.last();
    let gamma = last.gamma.unwrap().re;
    ok &= (34.8..=35.2).contains(&gamma);
    ok &= (last.r - 2.1).abs() < 1e-9 && e.spec.step == 1e-7;
    (
        ok,
        format!(
            "row 0 (v, gamma) = ({v0:.4}, {g0v:.3}); max |y2 - 70| = {drift:.2e}; final gamma = {gamma:.3} (reference 34.973), x = ({:.3}, {:.3})",
            last.x[0].re, last.x[1].re
        ),
    )
}

fn random_poly(rng: &mut ChaCha8Rng, n: usize, max_deg: u32, terms: usize, max_coeff: i64) -> Poly {
    let mut p = Poly::zero(n);
    for _ in 0..terms {
        let deg = rng.gen_range(1..=max_deg);
        let mut exps = vec![0u32; n];
        for _ in 0..deg {
            exps[rng.gen_range(0..n)] += 1;
        }
        let c = Rat::new(rng.gen_range(-max_coeff..=max_coeff).into(), rng.gen_range(1..=2i64).into());
        p = &p + &Poly::monomial(n, exps, c);
    }
    p
}

fn conservation_run(f: PolyMap, driven: usize, x0: &[CF]) -> (bool, f64) {
    let mut spec = FlowSpec::new(f, driven);
    spec.integrator = Integrator::Euler;
    spec.step = 1e-5;
    spec.max_steps = 100_000;
    spec.schedule = Schedule::Stride(10_000);
    let t = integrate(&spec, x0).unwrap();
    let y0 = &t.records[0].y;
    let mut worst: f64 = 0.0;
    for (j, d) in t.step_drift.iter().enumerate() {
        if let Some(d) = d {
            worst = worst.max(d / (1e-3 * (1.0 + y0[j].norm())));
        }
    }
    (t.status == RunStatus::Completed && worst <= 1.0, worst)
}

/// The exact flow must exist on `[0, 1]`: an RK4 reference run has to stay
/// within `|x| <= 100`.
fn flow_exists(f: &PolyMap, x0: &[CF]) -> bool {
    let mut spec = FlowSpec::new(f.clone(), 0);
    spec.integrator = Integrator::Rk4;
    spec.step = 1e-3;
    spec.max_steps = 1000;
    spec.schedule = Schedule::Stride(1);
    let t = integrate(&spec, x0).unwrap();
    t.status == RunStatus::Completed && t.records.iter().all(|r| r.x.iter().all(|z| z.norm() <= 100.0))
}

fn random_conservation() -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0001);
    let mut ok = true;
    let mut worst: f64 = 0.0;
    let (mut accepted, mut rejected) = (0, 0);
    while accepted < 20 && rejected < 200 {
        let f = PolyMap::new(vec![random_poly(&mut rng, 2, 3, 4, 2), random_poly(&mut rng, 2, 3, 4, 2)]).unwrap();
        let x0 = vec![cr(rng.gen_range(-0.5..0.5)), cr(rng.gen_range(-0.5..0.5))];
        if !flow_exists(&f, &x0) {
            rejected += 1;
            continue;
        }
        accepted += 1;
        let (good, w) = conservation_run(f, 0, &x0);
        ok &= good;
        worst = worst.max(w);
    }
    ok &= accepted == 20;
    let mut w3: f64 = 0.0;
    for driven in 0..3 {
        let (good, w) = conservation_run(n3_triangular(), driven, &[cr(0.3), cr(-0.7), cr(0.5)]);
        ok &= good;
        w3 = w3.max(w);
    }
    (
        ok,
        format!("worst drift / tolerance: {accepted} random maps {worst:.2e} ({rejected} draws without a flow on [0, 1]), n3 {w3:.2e}"),
    )
}

fn finite_differences() -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0002);
    let h = 1e-6;
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let n = rng.gen_range(1..=3);
        let p = random_poly(&mut rng, n, 4, 6, 5);
        let pt: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        for i in 0..n {
            let at = |d: f64| {
                let q: Vec<CF> = pt.iter().enumerate().map(|(k, &v)| cr(if k == i { v + d } else { v })).collect();
                p.eval(&q).unwrap().re
            };
            let fd = (at(h) - at(-h)) / (2.0 * h);
            let q: Vec<CF> = pt.iter().map(|&v| cr(v)).collect();
            let exact = p.partial(i).unwrap().eval(&q).unwrap().re;
            worst = worst.max((fd - exact).abs());
        }
    }
    (worst <= 1e-6, format!("max |fd - exact| = {worst:.2e}"))
}

fn random_series(rng: &mut ChaCha8Rng, from: i64, to: i64) -> Vec<(i64, Poly)> {
    let mut out = Vec::new();
    for k in from..=to {
        if rng.gen_bool(0.7) {
            let c = Rat::new(rng.gen_range(-4..=4i64).into(), rng.gen_range(1..=3i64).into());
            out.push((k, if rng.gen_bool(0.5) { Poly::constant(1, c) } else { g().scale(&c) }));
        }
    }
    out
}

fn series_back_substitution() -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0003);
    let order = 7;
    let mut ok = true;
    let mut counts = [0usize; 3];
    let agrees = |a: &PSeries, b: &PSeries, upto: i64| (-8..=upto).all(|k| a.coeff_or_zero(k) == b.coeff_or_zero(k));
    for i in 0..100 {
        let mut terms = random_series(&mut rng, 1, 6);
        match i % 3 {
            0 => {
                terms.retain(|(k, _)| *k > 1);
                terms.push((1, Poly::constant(1, rat(rng.gen_range(1..=3)))));
                let t = PSeries::from_coeffs(1, terms, None).unwrap();
                let s = t.revert(order).unwrap();
                let back = PSeries::compose(&t, &s).unwrap();
                let fwd = PSeries::compose(&s, &t).unwrap();
                let z = PSeries::var(1);
                ok &= agrees(&back, &z, order) && agrees(&fwd, &z, order);
                counts[0] += 1;
            }
            1 => {
                terms.push((0, Poly::constant(1, rat(rng.gen_range(1..=4)))));
                let u = PSeries::from_coeffs(1, terms, None).unwrap();
                let inv = u.invert_unit(order).unwrap();
                ok &= agrees(&u.mul(&inv).unwrap(), &PSeries::one(1), order);
                counts[1] += 1;
            }
            _ => {
                let m = rng.gen_range(2..=3u32);
                terms.push((0, Poly::one(1)));
                let u = PSeries::from_coeffs(1, terms, None).unwrap();
                let val = rng.gen_range(-2..=2i64);
                let p = u.pow(m).shift(val * m as i64);
                let r = p.root(m, order).unwrap();
                ok &= agrees(&r, &u.shift(val), order);
                ok &= agrees(&r.pow(m), &p, order + val * (m as i64 - 1));
                counts[2] += 1;
            }
        }
    }
    (ok, format!("{} reversions, {} inverses, {} roots", counts[0], counts[1], counts[2]))
}
