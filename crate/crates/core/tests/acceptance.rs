//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
//! failure. Indented lines give the measured values.

use std::time::Instant;

use pemkit::benchmarks::polynomial::{self, quadform_moment_oracle};
use pemkit::benchmarks::references::POLYNOMIAL_SAMPLE_SIZES;
use pemkit::benchmarks::{self, BenchmarkCase};
use pemkit::estimator::{estimate_from_outputs, relative_errors};
use pemkit::hpem::build_hpem;
use pemkit::mce::verify_mce;
use pemkit::propagate::{mc_reference_case, propagate, propagate_case, Method, DEFAULT_SEED};
use pemkit::qpem::{argmin_r6, build_qpem, e6_squared, point_count, stability_factor, QpemParams};
use pemkit::sparsequad::{sgh3_point_count, smolyak_grid};
use pemkit::transform::FactorMethod;
use pemkit::types::{MarginalShape, MomentSummary};

struct Criterion {
    notes: Vec<String>,
    ok: bool,
}

impl Criterion {
    fn new() -> Self {
        Self { notes: Vec::new(), ok: true }
    }

    fn check(&mut self, ok: bool, note: impl Into<String>) {
        let note = note.into();
        self.notes.push(format!("{} {note}", if ok { "ok  " } else { "MISS" }));
        self.ok &= ok;
    }

    fn note(&mut self, note: impl Into<String>) {
        self.notes.push(format!("     {}", note.into()));
    }
}

fn run(id: usize, title: &str, body: impl FnOnce(&mut Criterion)) -> bool {
    let start = Instant::now();
    let mut c = Criterion::new();
    body(&mut c);
    let status = if c.ok { "PASS" } else { "FAIL" };
    println!("{status} {id:>2} {title} ({:.2} s)", start.elapsed().as_secs_f64());
    for n in &c.notes {
        println!("        {n}");
    }
    c.ok
}

fn qpem3() -> Method {
    Method::for_table_key("qpem-3", 2).unwrap()
}

fn shape(s: &MomentSummary) -> (f64, f64) {
    (s.skew.unwrap_or(f64::NAN), s.kurt.unwrap_or(f64::NAN))
}

fn mce_suite(c: &mut Criterion) {
    let radii = [("1.5", 1.5), ("sqrt3", 3f64.sqrt()), ("3", 3.0), ("5", 5.0)];
    for n in [2usize, 3, 5, 10, 20, 50] {
        let mut worst5: f64 = 0.0;
        let mut worst_odd: f64 = 0.0;
        for (_, r) in radii {
            let (set, w) = build_qpem(&QpemParams::new(n).with_r(r)).unwrap();
            worst5 = worst5.max(verify_mce(&set, &w, 5).max_residual().residual);
            worst_odd = worst_odd.max(verify_mce(&set, &w, 7).max_odd_residual().residual);
        }
        c.check(
            worst5 <= 1e-9 && worst_odd <= 1e-12,
            format!("n={n:<3} max residual deg<=5 {worst5:.2e}, odd deg<=7 {worst_odd:.2e}"),
        );
    }
}

fn point_counts(c: &mut Criterion) {
    for (n, q, s, h) in POLYNOMIAL_SAMPLE_SIZES {
        let nq = build_qpem(&QpemParams::new(n)).unwrap().0.len();
        let ns = smolyak_grid(n, 2).unwrap().0.len();
        let nh = build_hpem(n, &MarginalShape::standard_normal(n)).unwrap().0.len();
        c.check(
            nq == q && ns == s && nh == h && point_count(n) == q && sgh3_point_count(n) == s,
            format!("n={n:<3} qpem {nq} (table {q}), sgh3 {ns} ({s}), hpem {nh} ({h})"),
        );
    }
}

fn polynomial_exactness(c: &mut Criterion) {
    let rel = |a: f64, b: f64| (a - b).abs() / b.abs();
    for n in [5usize, 10, 20] {
        let case = polynomial::case(n).unwrap();
        let exact = quadform_moment_oracle(n);
        let mut methods: Vec<(String, Method)> = vec![("sgh3".into(), Method::Sgh3)];
        for r in [1.5, 3f64.sqrt(), 3.0, 5.0] {
            methods.push((format!("qpem r={r:.3}"), Method::Qpem { r, zeta: -8.0, xi: 60.0 }));
            methods.push((format!("qpem-unscaled r={r:.3}"), Method::QpemUnscaled { r }));
        }
        let mut worst: f64 = 0.0;
        for (_, m) in &methods {
            let s = propagate_case(&case, m).unwrap().summary;
            worst = worst.max(rel(s.mean, exact.mean)).max(rel(s.std, exact.std));
        }
        let h = propagate_case(&case, &Method::Hpem).unwrap().summary;
        let hpem_mean = rel(h.mean, exact.mean);
        c.check(
            worst <= 1e-10 && hpem_mean <= 1e-10,
            format!(
                "n={n:<3} qpem/sgh3 worst mean/std rel error {worst:.2e}, hpem mean {hpem_mean:.2e}"
            ),
        );
    }
}

fn ordering(c: &mut Criterion) {
    for n in [10usize, 20] {
        let case = polynomial::case(n).unwrap();
        let target = quadform_moment_oracle(n);
        let err = |m: &Method| {
            let s = propagate_case(&case, m).unwrap().summary;
            relative_errors(&s, &target, "analytic")
        };
        let q = err(&qpem3());
        let s = err(&Method::Sgh3);
        let (qs, qk, ss, sk) = (q.skew.unwrap(), q.kurt.unwrap(), s.skew.unwrap(), s.kurt.unwrap());
        c.check(
            qs <= ss && qk <= sk,
            format!("n={n:<3} skew err qpem {qs:.3e} <= sgh3 {ss:.3e}; kurt err qpem {qk:.3e} <= sgh3 {sk:.3e}"),
        );
    }
}

fn roof_truss(c: &mut Criterion) {
    let case = benchmarks::case("rooftruss").unwrap();
    let s = propagate_case(&case, &qpem3()).unwrap().summary;
    let (g, k) = shape(&s);
    let cov_ref = 2.5995 / 23.6688;
    c.check((g - 0.3432).abs() <= 0.02, format!("skew {g:.4} (0.3432 +- 0.02)"));
    c.check((k - 3.0913).abs() <= 0.05, format!("kurt {k:.4} (3.0913 +- 0.05)"));
    c.check(
        ((s.cov() - cov_ref) / cov_ref).abs() <= 0.005,
        format!("COV {:.5} ({cov_ref:.5} +- 0.5%), mean {:.4} mm, std {:.4} mm", s.cov(), s.mean, s.std),
    );
    sensitivity(c, &benchmarks::case("rooftruss-asprinted").unwrap());
}

/// Reports the tabulated-input variant under both factorizations.
fn sensitivity(c: &mut Criterion, case: &BenchmarkCase) {
    let band = benchmarks::case("rooftruss").unwrap().reference("mc").unwrap().ci.unwrap();
    for factor in [FactorMethod::Cholesky, FactorMethod::Eigen] {
        let s = propagate(case.model.as_ref(), &case.input, factor, &qpem3()).unwrap().summary;
        let (g, k) = shape(&s);
        c.note(format!(
            "tabulated inputs, {}: mean {:.4} std {:.4} skew {g:.4} kurt {k:.4} COV {:.4}; skew in MC band: {}",
            factor.as_str(),
            s.mean,
            s.std,
            s.cov(),
            band.contains(2, g)
        ));
    }
}

fn six_story(c: &mut Criterion) {
    let case = benchmarks::case("sixstory").unwrap();
    let s = propagate_case(&case, &qpem3()).unwrap().summary;
    let (g, k) = shape(&s);
    c.check(((s.mean - 112.6266) / 112.6266).abs() <= 1e-3, format!("mean {:.4} mm (112.6266 +- 0.1%)", s.mean));
    c.check(((s.std - 26.7430) / 26.7430).abs() <= 5e-3, format!("std {:.4} mm (26.7430 +- 0.5%)", s.std));
    c.check((g - 0.0492).abs() <= 0.005, format!("skew {g:.4} (0.0492 +- 0.005)"));
    c.check((k - 2.9805).abs() <= 0.02, format!("kurt {k:.4} (2.9805 +- 0.02)"));
}

fn elastic_bar(c: &mut Criterion) {
    let case = benchmarks::case("elasticbar").unwrap();
    let s = propagate_case(&case, &qpem3()).unwrap().summary;
    let (g, k) = shape(&s);
    c.check(((s.mean - 5.0515) / 5.0515).abs() <= 5e-3, format!("mean {:.5} mm (5.0515 +- 0.5%)", s.mean));
    c.check(((s.std - 0.3265) / 0.3265).abs() <= 2e-2, format!("std {:.5} mm (0.3265 +- 2%)", s.std));
    c.check((g - 0.4799).abs() <= 0.05, format!("skew {g:.4} (0.4799 +- 0.05)"));
    c.check((k - 3.5007).abs() <= 0.10, format!("kurt {k:.4} (3.5007 +- 0.10)"));
    let mc = mc_reference_case(&case, 1_000_000, DEFAULT_SEED).unwrap();
    let (dm, ds) = ((s.mean - mc.summary.mean).abs(), (s.std - mc.summary.std).abs());
    c.check(
        dm <= 4.0 * mc.mean_se && ds <= 4.0 * mc.std_se,
        format!(
            "MC 1e6 (seed {}): mean {:.5} +- {:.1e}, std {:.5} +- {:.1e}; |qpem - mc| = {dm:.1e}, {ds:.1e}",
            mc.seed, mc.summary.mean, 4.0 * mc.mean_se, mc.summary.std, 4.0 * mc.std_se
        ),
    );
    let (mg, mk) = shape(&mc.summary);
    c.note(format!("MC shape for reference: skew {mg:.4}, kurt {mk:.4}"));
}

/// `Σ|w|` evaluated directly from the weight formulas.
fn stability_oracle(n: usize, r: f64) -> f64 {
    let nf = n as f64;
    let u = r * r;
    let w1 = (4.0 - nf) / (2.0 * u * u);
    let w2 = 0.25 * ((u + nf - 4.0) / (u * (nf - 1.0))).powi(2);
    let w0 = 1.0 - 2.0 * nf * w1 - 2.0 * nf * (nf - 1.0) * w2;
    w0.abs() + 2.0 * nf * w1.abs() + 2.0 * nf * (nf - 1.0) * w2.abs()
}

fn stability(c: &mut Criterion) {
    let (_, w) = build_qpem(&QpemParams::new(50)).unwrap();
    let sf = stability_factor(&w);
    let oracle = stability_oracle(50, 3.0);
    c.check(sf < 100.0, format!("stability factor n=50 r=3: {sf:.6} < 100"));
    c.check(
        ((sf - oracle) / oracle).abs() <= 1e-9,
        format!("closed form {oracle:.12}, relative difference {:.1e}", ((sf - oracle) / oracle).abs()),
    );
}

fn tuning(c: &mut Criterion) {
    for n in [4usize, 10, 50] {
        let s = argmin_r6(n).unwrap();
        let d = (s.r - 3f64.sqrt()).abs();
        c.check(d <= 1e-6, format!("n={n:<3} argmin r = {:.12} (|r - sqrt3| = {d:.1e})", s.r));
    }
    let s = argmin_r6(2).unwrap();
    let e = e6_squared(s.r, 2);
    c.check(e <= 1e-18, format!("n=2   argmin r = {:.12}, e6^2 = {e:.1e}", s.r));
}

fn estimator_properties(c: &mut Criterion) {
    let (set, w) = build_qpem(&QpemParams::new(4)).unwrap();
    let y: Vec<f64> = set
        .points
        .rows()
        .map(|z| (z[0] + 0.3 * z[1]).exp() + z[2] * z[3])
        .collect();
    let base = estimate_from_outputs(&y, &w).unwrap();
    let mut worst: f64 = 0.0;
    for (a, b) in [(2.0, 0.0), (1e-3, 5.0), (250.0, -1e4)] {
        let ys: Vec<f64> = y.iter().map(|v| a * v + b).collect();
        let t = estimate_from_outputs(&ys, &w).unwrap();
        let (g0, k0) = shape(&base);
        let (g, k) = shape(&t);
        worst = worst.max((g - g0).abs() / g0.abs()).max((k - k0).abs() / k0);
    }
    c.check(worst <= 1e-12, format!("affine maps: worst relative change of skew/kurt {worst:.1e}"));

    let (_, zero) = build_qpem(&QpemParams::new(4).with_scaling(0.0, 0.0)).unwrap();
    let (_, plain) = build_qpem(&QpemParams::new(4).unscaled()).unwrap();
    let a = estimate_from_outputs(&y, &zero).unwrap();
    let b = estimate_from_outputs(&y, &plain).unwrap();
    let bitwise = zero == plain
        && [a.mean, a.m2, a.m3, a.m4].map(f64::to_bits) == [b.mean, b.m2, b.m3, b.m4].map(f64::to_bits);
    c.check(bitwise, "zeta = xi = 0 equals the unscaled rule bit for bit");

    let (set, w) = build_qpem(&QpemParams::new(4)).unwrap();
    let odd: Vec<f64> = set.points.rows().map(|z| z[0] + z[1].powi(3) - 0.5 * z[2] * z[3] * z[0]).collect();
    let s = estimate_from_outputs(&odd, &w).unwrap();
    c.check(s.m3.abs() <= 1e-12, format!("symmetric output distribution: m3 = {:.1e}", s.m3));
}

fn main() {
    // `cargo test` passes harness flags; a filter argument skips the suite
    if std::env::args().skip(1).any(|a| !a.starts_with('-')) {
        return;
    }
    let results = [
        run(1, "MCE exactness of QPEM", mce_suite),
        run(2, "point-count laws", point_counts),
        run(3, "polynomial exactness of mean and std", polynomial_exactness),
        run(4, "QPEM vs SGH3 higher-moment errors", ordering),
        run(5, "roof truss, scale-invariant statistics", roof_truss),
        run(6, "six-story frame", six_story),
        run(7, "elastic bar with Monte Carlo bracket", elastic_bar),
        run(8, "stability factor", stability),
        run(9, "sixth-order radius tuning", tuning),
        run(10, "estimator properties", estimator_properties),
    ];
    let failed = results.iter().filter(|ok| !**ok).count();
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
