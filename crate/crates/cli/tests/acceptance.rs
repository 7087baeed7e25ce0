//! Acceptance criteria, one pass/fail line each. Runs without the libtest
//! harness so the lines are always printed.

use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use minimax_cert::certify::{
    certify, check_first_order, check_first_order_dual, check_nonsmooth_necessary,
    check_second_order_necessary, schur_check, CertifyOptions, Conclusion, Verdict,
};
use minimax_cert::cones::{Constraint, ConstraintKind, ConstraintSystem};
use minimax_cert::expr::{
    gradient, hessian, parse_expression, second_subderivative, subderivative, Axis, Exactness,
    Expr, Point,
};
use minimax_cert::kkt::{multiplier_set, vertices, MinimaxProblem, Side};
use minimax_cert::oracle::{check_implications, classify, GridSpec, Tri};
use minimax_cert_cli::{load_problem, run, Loaded, RunReport, EXIT_INTERNAL, EXIT_OK};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

const CORPUS: [&str; 9] = [
    "cubic",
    "cubic_half",
    "cubic_quarter",
    "sextic",
    "abs_powers",
    "quartic",
    "fair",
    "xy",
    "saddle",
];

fn example(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("examples")
        .join(format!("{name}.json"))
}

fn load(name: &str) -> Loaded {
    load_problem(&example(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn run_json(args: &[&str]) -> Result<RunReport, String> {
    let mut argv = vec!["minimax-cert".to_string(), "--json".to_string()];
    argv.extend(args.iter().map(|s| s.to_string()));
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run(argv, &mut out, &mut err);
    if code != EXIT_OK {
        return Err(format!("exit {code}: {}", String::from_utf8_lossy(&err)));
    }
    serde_json::from_slice(&out).map_err(|e| e.to_string())
}

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn timed<T>(
    limit: Duration,
    what: &str,
    f: impl FnOnce() -> Result<T, String>,
) -> Result<T, String> {
    let t = Instant::now();
    let v = f()?;
    let el = t.elapsed();
    ensure(el < limit, format!("{what} took {el:?}, limit {limit:?}"))?;
    Ok(v)
}

fn criterion_1() -> Outcome {
    let mut notes = Vec::new();
    for (name, expect_certified) in [
        ("cubic", true),
        ("cubic_half", true),
        ("cubic_quarter", false),
    ] {
        let path = example(name);
        let r = timed(Duration::from_secs(1), name, || {
            run_json(&["certify", path.to_str().unwrap()])
        })?;
        let c = r.certificate.ok_or("no certificate")?;
        if expect_certified {
            ensure(
                c.conclusion == Conclusion::Certified,
                format!("{name}: {}", c.conclusion),
            )?;
            let m = c.schur_sufficient.margin.ok_or("no Schur margin")?;
            ensure((m - 0.5).abs() <= 1e-9, format!("{name}: Schur margin {m}"))?;
            notes.push(format!("{name} margin {m:.12}"));
        } else {
            ensure(
                c.conclusion
                    == Conclusion::Refuted {
                        which: "schur_necessary".into(),
                    },
                format!("{name}: {}", c.conclusion),
            )?;
            let v = c
                .schur_necessary
                .witness
                .as_ref()
                .ok_or("no witness")?
                .value;
            ensure((v + 0.25).abs() <= 1e-9, format!("{name}: Schur value {v}"))?;
            notes.push(format!("{name} value {v:.12}"));
        }
    }
    Ok(notes.join(", "))
}

fn criterion_2() -> Outcome {
    let path = example("sextic");
    let p = path.to_str().unwrap();
    timed(Duration::from_secs(30), "sextic", || {
        let r = run_json(&["certify", p])?;
        let c = r.certificate.ok_or("no certificate")?;
        let refuted_by_second_order = matches!(
            &c.conclusion,
            Conclusion::Refuted { which } if which == "so_necessary_joint" || which == "nonsmooth_necessary_joint"
        );
        ensure(
            refuted_by_second_order,
            format!("conclusion {}", c.conclusion),
        )?;
        let w = c.so_necessary_joint.witness.as_ref().ok_or("no witness")?;
        ensure(
            w.u.as_deref() == Some(&[1.0][..]),
            format!("witness u {:?}", w.u),
        )?;
        ensure(
            (w.value + 2.0).abs() <= 1e-12,
            format!("witness value {}", w.value),
        )?;

        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let csv = dir.path().join("tau.csv");
        run_json(&[
            "tau-profile",
            p,
            "--mesh",
            "201",
            "--csv",
            csv.to_str().unwrap(),
        ])?;
        let text = std::fs::read_to_string(&csv).map_err(|e| e.to_string())?;
        ensure(text.starts_with("delta,tau_min,ratio\n"), "CSV header")?;
        let last = text.lines().last().unwrap_or_default();
        let exp: f64 = last
            .strip_prefix("# exponent=")
            .and_then(|s| s.split_whitespace().next())
            .and_then(|s| s.parse().ok())
            .ok_or(format!("bad trailer {last:?}"))?;
        ensure((exp - 0.33).abs() <= 0.05, format!("exponent {exp}"))?;
        ensure(
            last.ends_with("verdict=not_calm"),
            format!("trailer {last:?}"),
        )?;
        let deltas: Vec<f64> = text
            .lines()
            .skip(1)
            .filter(|l| !l.starts_with('#'))
            .map(|l| l.split(',').next().unwrap().parse().unwrap())
            .collect();
        ensure(
            (deltas[0] - 1e-1).abs() < 1e-12 && (deltas[deltas.len() - 1] - 1e-4).abs() < 1e-15,
            "δ range",
        )?;

        let r = run_json(&["classify", p])?;
        let k = r.classification.ok_or("no classification")?;
        ensure(k.local_minimax.verdict == Tri::True, "local_minimax")?;
        ensure(k.calm_local_minimax.verdict == Tri::False, "calm")?;
        ensure(
            k.global_minimax_on_box.verdict == Tri::True,
            "global on box",
        )?;
        Ok(format!(
            "witness u=1 value {}, exponent {exp:.4} not_calm, local/¬calm/global",
            w.value
        ))
    })
}

fn criterion_3() -> Outcome {
    let path = example("quartic");
    timed(Duration::from_secs(30), "quartic", || {
        let r = run_json(&["classify", path.to_str().unwrap()])?;
        let k = r.classification.ok_or("no classification")?;
        ensure(k.calm_local_minimax.verdict == Tri::True, "calm")?;
        let ratio = k.tau_profile.as_ref().ok_or("no profile")?.max_ratio();
        ensure(ratio <= 1.5, format!("max ratio {ratio}"))?;
        ensure(k.local_nash.verdict == Tri::False, "local_nash")?;
        let witness = match &k.local_nash.evidence {
            Some(minimax_cert::oracle::Evidence::Point { x, .. }) => x.clone(),
            other => return Err(format!("local_nash evidence {other:?}")),
        };
        let Loaded {
            problem,
            point,
            options,
            ..
        } = load("quartic");
        let (suf, nec) =
            schur_check(&problem, &point, &options.certify).map_err(|e| e.to_string())?;
        ensure(
            suf.verdict == Verdict::Inconclusive && nec.verdict == Verdict::Inconclusive,
            "Schur not inconclusive",
        )?;
        let (nm, nj) = check_nonsmooth_necessary(&problem, &point, &options.certify)
            .map_err(|e| e.to_string())?;
        let (sm, sj) = check_second_order_necessary(&problem, &point, &options.certify)
            .map_err(|e| e.to_string())?;
        ensure(nm.ok() && nj.ok() && sm.ok() && sj.ok(), "necessary checks")?;
        Ok(format!(
            "calm ratio {ratio:.4}, local_nash witness x={witness:?}, Schur inconclusive"
        ))
    })
}

fn criterion_4() -> Outcome {
    let path = example("fair");
    let r = run_json(&["classify", path.to_str().unwrap()])?;
    let k = r.classification.ok_or("no classification")?;
    ensure(k.local_nash.verdict == Tri::False, "local_nash")?;
    ensure(k.calm_local_minimax.verdict == Tri::True, "calm")?;
    let slack = 2.0 / (k.resolution.mesh_per_axis - 1) as f64;
    let ratio = k.tau_profile.as_ref().ok_or("no profile")?.max_ratio();
    ensure(ratio <= 1.0 + slack, format!("ratio {ratio}"))?;
    let Loaded {
        problem,
        point,
        options,
        ..
    } = load("fair");
    let (px, py) =
        check_first_order(&problem, &point, &options.certify).map_err(|e| e.to_string())?;
    let (dx, dy) =
        check_first_order_dual(&problem, &point, &options.certify).map_err(|e| e.to_string())?;
    ensure(
        px.ok() && py.ok() && dx.ok() && dy.ok(),
        "first-order checks",
    )?;
    let mp = multiplier_set(&problem, &point, Side::Max, 1e-8).map_err(|e| e.to_string())?;
    let v = vertices(&mp).map_err(|e| e.to_string())?;
    let zero =
        v.vertices.len() == 1 && v.vertices[0].iter().all(|b| *b == 0.0) && v.rays.is_empty();
    ensure(
        zero,
        format!("Λ_max vertices {:?} rays {:?}", v.vertices, v.rays),
    )?;
    Ok(format!("¬local_nash, calm ratio {ratio:.4}, Λ_max = {{0}}"))
}

fn criterion_5() -> Outcome {
    let Loaded {
        problem,
        point,
        options,
        ..
    } = load("abs_powers");
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut dirs: Vec<[f64; 2]> =
        vec![[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0], [1.0, 1.0]];
    dirs.extend((0..32).map(|_| [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)]));
    for w in &dirs {
        for r in [
            subderivative(&problem.f, &point, w),
            second_subderivative(&problem.f, &point, w),
        ] {
            let r = r.map_err(|e| e.to_string())?;
            ensure(
                r.value == 0.0 && r.exactness == Exactness::Analytic,
                format!("{w:?}: {r:?}"),
            )?;
        }
    }
    let (nm, nj) =
        check_nonsmooth_necessary(&problem, &point, &options.certify).map_err(|e| e.to_string())?;
    ensure(
        nm.verdict == Verdict::Holds && nj.verdict == Verdict::Holds,
        "nonsmooth necessary",
    )?;
    let path = example("abs_powers");
    let r = run_json(&["classify", path.to_str().unwrap()])?;
    let k = r.classification.ok_or("no classification")?;
    ensure(k.calm_local_minimax.verdict == Tri::True, "calm")?;
    let rows = &k.tau_profile.as_ref().ok_or("no profile")?.rows;
    let (first, last) = (rows[0].ratio, rows[rows.len() - 1].ratio);
    ensure(last < first, format!("ratio {first} -> {last}"))?;
    Ok(format!(
        "{} directions exact zero, nonsmooth holds, ratio {first:.4} -> {last:.4}",
        dirs.len()
    ))
}

/// Random polynomial of degree ≤ 4 in `n + m` variables, as text.
fn random_poly(rng: &mut ChaCha8Rng, n: usize, m: usize) -> String {
    let vars: Vec<String> = (1..=n)
        .map(|i| format!("x{i}"))
        .chain((1..=m).map(|j| format!("y{j}")))
        .collect();
    let terms = rng.random_range(1..=6);
    (0..terms)
        .map(|_| {
            let c: f64 = rng.random_range(-2.0..2.0);
            let deg = rng.random_range(0..=4);
            let mut t = format!("({c})");
            for _ in 0..deg {
                t.push_str(&format!("*{}", vars[rng.random_range(0..vars.len())]));
            }
            t
        })
        .collect::<Vec<_>>()
        .join(" + ")
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = 0.0f64;
    for case in 0..200 {
        let (n, m) = (rng.random_range(1..=3), rng.random_range(1..=3));
        let text = random_poly(&mut rng, n, m);
        let f = parse_expression(&text, n, m).map_err(|e| e.to_string())?;
        let z: Vec<f64> = (0..n + m).map(|_| rng.random_range(-1.0..1.0)).collect();
        let p = Point::from_flat(&z, n);
        let g = gradient(&f, &p).map_err(|e| e.to_string())?;
        let h = hessian(&f, &p).map_err(|e| e.to_string())?;
        let step = 1e-5;
        for i in 0..n + m {
            let mut e = vec![0.0; n + m];
            e[i] = 1.0;
            let (pp, pm) = (p.offset(step, &e), p.offset(-step, &e));
            let fd = (f.evaluate(&pp).unwrap() - f.evaluate(&pm).unwrap()) / (2.0 * step);
            let rel = (fd - g[i]).abs() / g[i].abs().max(1.0);
            worst = worst.max(rel);
            ensure(
                rel <= 1e-6,
                format!("case {case} {text}: ∂{i} {fd} vs {}", g[i]),
            )?;
            let (gp, gm) = (gradient(&f, &pp).unwrap(), gradient(&f, &pm).unwrap());
            for j in 0..n + m {
                let fd = (gp[j] - gm[j]) / (2.0 * step);
                let rel = (fd - h[(i, j)]).abs() / h[(i, j)].abs().max(1.0);
                worst = worst.max(rel);
                ensure(
                    rel <= 1e-6,
                    format!("case {case} {text}: ∂²{i}{j} {fd} vs {}", h[(i, j)]),
                )?;
            }
        }
        let w: Vec<f64> = (0..n + m).map(|_| rng.random_range(-1.0..1.0)).collect();
        let neg: Expr = f.clone().neg();
        let d1 = subderivative(&f, &p, &w).unwrap().value;
        let d2 = second_subderivative(&f, &p, &w).unwrap().value;
        ensure(
            second_subderivative(&neg, &p, &w).unwrap().value == -d2,
            format!("case {case}: sign flip"),
        )?;
        for t in [0.5, 2.0, 4.0] {
            let tw: Vec<f64> = w.iter().map(|v| t * v).collect();
            ensure(
                subderivative(&f, &p, &tw).unwrap().value == t * d1,
                format!("case {case}: d1 homogeneity"),
            )?;
            ensure(
                second_subderivative(&f, &p, &tw).unwrap().value == t * t * d2,
                format!("case {case}: d2 homogeneity"),
            )?;
        }
    }
    Ok(format!("200 problems, worst relative FD error {worst:.2e}"))
}

fn affine_system(rng: &mut ChaCha8Rng, axis: Axis, z: &[f64]) -> (ConstraintSystem, Vec<Vec<f64>>) {
    let d = z.len();
    let name = |i: usize| match axis {
        Axis::X => format!("x{}", i + 1),
        Axis::Y => format!("y{}", i + 1),
    };
    let mut cons = Vec::new();
    let mut active = Vec::new();
    for _ in 0..rng.random_range(0..=3) {
        let a: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
        let eq = rng.random_bool(0.15);
        let slack = if !eq && rng.random_bool(0.25) {
            rng.random_range(0.1..1.0)
        } else {
            0.0
        };
        let b: f64 = a.iter().zip(z).map(|(ai, zi)| ai * zi).sum::<f64>() + slack;
        let lhs: Vec<String> = a
            .iter()
            .enumerate()
            .map(|(i, ai)| format!("({ai})*{}", name(i)))
            .collect();
        let text = format!("{} - ({b})", lhs.join(" + "));
        let (n, m) = match axis {
            Axis::X => (d, 0),
            Axis::Y => (0, d),
        };
        let expr = parse_expression(&text, n, m).unwrap();
        if slack == 0.0 {
            active.push(if eq && rng.random_bool(0.5) {
                a.iter().map(|v| -v).collect()
            } else {
                a.clone()
            });
        }
        cons.push(Constraint {
            expr,
            kind: if eq {
                ConstraintKind::Eq
            } else {
                ConstraintKind::Le
            },
        });
    }
    (ConstraintSystem::new(axis, d, cons).unwrap(), active)
}

/// Gradient that is either a nonnegative combination of active normals
/// (stationary) or random.
fn block_gradient(rng: &mut ChaCha8Rng, d: usize, active: &[Vec<f64>], sign: f64) -> Vec<f64> {
    if !active.is_empty() && rng.random_bool(0.5) {
        let mut g = vec![0.0; d];
        for a in active {
            let c: f64 = rng.random_range(0.0..1.0);
            for (gi, ai) in g.iter_mut().zip(a) {
                *gi += sign * c * ai;
            }
        }
        g
    } else {
        (0..d).map(|_| rng.random_range(-1.0..1.0)).collect()
    }
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let opts = CertifyOptions::default();
    let (mut holds, mut fails) = (0, 0);
    for case in 0..100 {
        let (n, m) = (rng.random_range(1..=3), rng.random_range(1..=3));
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let y: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..1.0)).collect();
        let (xs, ax) = affine_system(&mut rng, Axis::X, &x);
        let (ys, ay) = affine_system(&mut rng, Axis::Y, &y);
        // Stationarity: −∇_x f ∈ cone of active x normals, ∇_y f likewise.
        let gx = block_gradient(&mut rng, n, &ax, -1.0);
        let gy = block_gradient(&mut rng, m, &ay, 1.0);
        let mut terms = Vec::new();
        for i in 0..n {
            terms.push(format!("({})*(x{} - ({}))", gx[i], i + 1, x[i]));
        }
        for j in 0..m {
            terms.push(format!("({})*(y{} - ({}))", gy[j], j + 1, y[j]));
        }
        let c: f64 = rng.random_range(-1.0..1.0);
        terms.push(format!("({c})*(x1 - ({}))^2*(y1 - ({}))", x[0], y[0]));
        let f = parse_expression(&terms.join(" + "), n, m).unwrap();
        let prob = MinimaxProblem::new(f, xs, ys, false).unwrap();
        let p = Point::new(x, y).unwrap();
        let (px, py) = check_first_order(&prob, &p, &opts).map_err(|e| e.to_string())?;
        let (dx, dy) = check_first_order_dual(&prob, &p, &opts).map_err(|e| e.to_string())?;
        for (side, a, b) in [("x", &px, &dx), ("y", &py, &dy)] {
            ensure(
                a.ok() == b.ok(),
                format!(
                    "case {case} {side}: primal {:?} dual {:?}",
                    a.verdict, b.verdict
                ),
            )?;
            ensure(
                a.verdict != Verdict::Inconclusive,
                format!("case {case} {side}: inconclusive"),
            )?;
            if a.ok() {
                holds += 1;
            } else {
                fails += 1;
            }
        }
    }
    Ok(format!(
        "100 problems, {holds} sides hold and {fails} fail in both forms"
    ))
}

fn criterion_8() -> Outcome {
    let meshes = [51usize, 101, 201];
    for name in CORPUS {
        let path = example(name);
        for mesh in meshes {
            let argv = [
                "minimax-cert",
                "--json",
                "--mesh",
                &mesh.to_string(),
                "classify",
                path.to_str().unwrap(),
            ];
            let (mut out, mut err) = (Vec::new(), Vec::new());
            let code = run(argv, &mut out, &mut err);
            ensure(
                code != EXIT_INTERNAL,
                format!("{name} mesh {mesh}: {}", String::from_utf8_lossy(&err)),
            )?;
            ensure(code == EXIT_OK, format!("{name} mesh {mesh}: exit {code}"))?;
            let r: RunReport = serde_json::from_slice(&out).map_err(|e| e.to_string())?;
            check_implications(&r.classification.unwrap())
                .map_err(|e| format!("{name} mesh {mesh}: {e}"))?;
        }
    }
    Ok(format!("{} problems × meshes {meshes:?}", CORPUS.len()))
}

fn criterion_9() -> Outcome {
    let mut lines = Vec::new();
    for name in CORPUS {
        let Loaded {
            problem,
            point,
            options,
            ..
        } = load(name);
        let cert = certify(&problem, &point, &options.certify).map_err(|e| e.to_string())?;
        let class = classify(&problem, &point, &GridSpec::default()).map_err(|e| e.to_string())?;
        let calm = class.calm_local_minimax.verdict;
        let bad = matches!(
            (&cert.conclusion, calm),
            (Conclusion::Certified, Tri::False) | (Conclusion::Refuted { .. }, Tri::True)
        );
        ensure(
            !bad,
            format!("{name}: {} with oracle calm = {calm:?}", cert.conclusion),
        )?;
        let tag = match cert.conclusion {
            Conclusion::Certified => "C",
            Conclusion::Refuted { .. } => "R",
            Conclusion::Consistent => "c",
            Conclusion::Inconclusive { .. } => "i",
        };
        lines.push(format!("{name}:{tag}/{calm:?}"));
    }
    Ok(lines.join(" "))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("cubic example certificates", criterion_1),
        ("sextic refutation and radius profile", criterion_2),
        ("quartic classification", criterion_3),
        ("switching game classification", criterion_4),
        ("abs-power nonsmooth checks", criterion_5),
        ("calculus properties", criterion_6),
        ("primal/dual first-order agreement", criterion_7),
        ("oracle implication chain", criterion_8),
        ("certificate/oracle soundness", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        let el = t.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {}: PASS {name} ({el:.2}s) {detail}", i + 1),
            Err(reason) => {
                failed += 1;
                println!("criterion {}: FAIL {name} ({el:.2}s) {reason}", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
