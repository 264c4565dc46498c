//! Acceptance suite. Prints one line per criterion and exits non-zero when
//! any criterion fails.

use std::f64::consts::{PI, TAU};
use std::process::ExitCode;
use std::time::Instant;

use nc_cover::kinv::circle_params;
use nc_cover::linalg::{normal_eig, op_norm, unitary_pow, CMatrix};
use nc_cover::partition::DEFAULT_DEGREE;
use nc_cover::rep::trace_compatibility_residual;
use nc_cover::scenario::{self, ScenarioConfig};
use nc_cover::torus::pullback;
use nc_cover::*;
use num_complex::Complex64;

type Outcome = (bool, String);
type Criterion = (&'static str, fn() -> Outcome);

fn thetas() -> [TorusParams; 2] {
    [
        TorusParams::rational(1, 3).unwrap(),
        TorusParams::real(2f64.sqrt() - 1.0).unwrap(),
    ]
}

fn galois_round_trip() -> Outcome {
    let start = Instant::now();
    let (mut fwd, mut inv) = (0.0f64, 0.0f64);
    let mut ranks_ok = true;
    for (m, n, k) in [(2, 2, 1), (3, 2, 5), (2, 1, 0)] {
        for theta in thetas() {
            let spec = CoveringSpec::new(m, n, k, theta).unwrap();
            let r = verify_galois(&spec, 6, 20, 0, false).unwrap();
            fwd = fwd.max(r.max_residual_forward);
            inv = inv.max(r.max_residual_inverse);
            ranks_ok &= r.rank == (m * n) as usize;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let pass = fwd < 1e-10 && inv < 1e-10 && ranks_ok && secs < 10.0;
    (
        pass,
        format!("max residuals {fwd:.2e} / {inv:.2e}, ranks exact: {ranks_ok}, {secs:.2}s"),
    )
}

fn fixed_points() -> Outcome {
    let mut filter_ok = true;
    let mut image_ok = true;
    let mut rng = random::rng(1);
    for (m, n, k) in [(2, 2, 1), (3, 2, 5), (2, 1, 0), (3, 3, 4)] {
        for theta in thetas() {
            let spec = CoveringSpec::new(m, n, k, theta).unwrap();
            for _ in 0..25 {
                let a = random::element(&mut rng, spec.cover(), 6, 12);
                let proj = project_invariant(&spec, &a).unwrap();
                let oracle: Vec<_> = a
                    .terms()
                    .filter(|(mono, _)| mono.r % m as i64 == 0 && mono.s % n as i64 == 0)
                    .collect();
                filter_ok &= proj.terms().collect::<Vec<_>>() == oracle;
                // the projection lands in the embedded base and the embedded
                // base is fixed
                let back = pullback(&spec, &proj).unwrap();
                image_ok &= embed_cover(&spec, &back).unwrap() == proj;
                let b = random::element(&mut rng, spec.base(), 6, 12);
                let e = embed_cover(&spec, &b).unwrap();
                image_ok &= project_invariant(&spec, &e).unwrap() == e;
            }
        }
    }
    (
        filter_ok && image_ok,
        format!("exact filter: {filter_ok}, image equality: {image_ok}"),
    )
}

fn partitions() -> Outcome {
    let mut worst_sum: f64 = 0.0;
    let mut worst_orth: f64 = 0.0;
    for n in [2, 3, 5] {
        let p = build_partition_of_unity(n, 2048).unwrap();
        worst_sum = worst_sum.max(p.sum_squares_residual());
        worst_orth = worst_orth.max(p.max_orthogonality_residual());
    }
    let mut worst_ab: f64 = 0.0;
    for (m, n) in [(2u32, 1u32), (2, 3), (5, 2), (3, 5)] {
        let spec = CoveringSpec::new(m, n, 1 % (m * n) as u64, TorusParams::rational(1, 3).unwrap()).unwrap();
        let x = build_partition_of_unity(m as usize, 2048).unwrap();
        let y = build_partition_of_unity(n as usize, 2048).unwrap();
        let sys = assemble_ab(&x, &y, &spec, DEFAULT_DEGREE).unwrap();
        worst_ab = worst_ab.max(sys.max_residual());
    }
    let pass = worst_sum < 1e-10 && worst_orth < 1e-10 && worst_ab < 1e-6;
    (
        pass,
        format!("sum of squares {worst_sum:.2e}, orthogonality {worst_orth:.2e}, a/b at degree 64 {worst_ab:.2e}"),
    )
}

fn algebra_laws() -> Outcome {
    let mut worst: [f64; 4] = [0.0; 4];
    let mut rng = random::rng(2);
    for theta in thetas() {
        for _ in 0..100 {
            let a = random::element(&mut rng, theta, 6, 8);
            let b = random::element(&mut rng, theta, 6, 8);
            let c = random::element(&mut rng, theta, 6, 8);
            let assoc = a.mul(&b).unwrap().mul(&c).unwrap();
            worst[0] = worst[0].max(assoc.max_abs_diff(&a.mul(&b.mul(&c).unwrap()).unwrap()).unwrap());
            let adj = a.mul(&b).unwrap().adjoint();
            worst[1] = worst[1].max(adj.max_abs_diff(&b.adjoint().mul(&a.adjoint()).unwrap()).unwrap());
            let cyc = a.mul(&b).unwrap().trace_tau0() - b.mul(&a).unwrap().trace_tau0();
            worst[2] = worst[2].max(cyc.norm());
            let pos = a.adjoint().mul(&a).unwrap().trace_tau0();
            let sq: f64 = a.terms().map(|(_, z)| z.norm_sqr()).sum();
            let neg = if pos.re < 0.0 { f64::INFINITY } else { 0.0 };
            worst[3] = worst[3].max(pos.im.abs()).max((pos.re - sq).abs()).max(neg);
        }
    }
    let pass = worst.iter().all(|w| *w < 1e-12);
    (
        pass,
        format!(
            "associativity {:.2e}, adjoint {:.2e}, trace cyclicity {:.2e}, positivity {:.2e}",
            worst[0], worst[1], worst[2], worst[3]
        ),
    )
}

fn representation_fidelity() -> Outcome {
    let mut relation: f64 = 0.0;
    let mut trace: f64 = 0.0;
    for q in 1..=64u64 {
        for p in [1, q as i64 - 1].into_iter().filter(|p| *p >= 1) {
            let rep = clock_shift_rep(p, q).unwrap();
            relation = relation.max(rep.relation_residual());
        }
        let rep = clock_shift_rep(1, q).unwrap();
        trace = trace.max(trace_compatibility_residual(&rep, q as i64).unwrap());
    }
    (
        relation < 1e-12 && trace < 1e-12,
        format!("relation {relation:.2e}, normalized trace vs tau0 {trace:.2e} for q <= 64"),
    )
}

fn su2() -> Outcome {
    let r = su2_counterexample().unwrap();
    let status = r.intertwiner.status;
    let verdict = r.to_json_value(false)["verdict"]
        .as_str()
        .unwrap_or_default()
        .to_string();
    let pass = status == IntertwinerStatus::UnitaryEquivalent
        && r.intertwiner.residual < 1e-8
        && r.proportionality_residual < 1e-8
        && verdict == "not strictly outer";
    (
        pass,
        format!(
            "{}, residual {:.2e}, distance to phase * [[0,-1],[1,0]] {:.2e}, verdict \"{verdict}\"",
            status.as_str(),
            r.intertwiner.residual,
            r.proportionality_residual
        ),
    )
}

fn root_branch() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut rejected = 0;
    let mut rng = random::rng(7);
    for i in 0..50usize {
        let dim = 1 + i % 16;
        let n = 2 + (i % 4) as u32;
        let alpha = -PI + TAU * (i as f64 * 0.6180339887).fract();
        let margin = 1e-2;
        let u = random::unitary_with_spectrum_in(&mut rng, dim, alpha - TAU + margin, alpha - margin);
        let b = RootBranch::new(n, alpha).unwrap();
        let v = root_branch_apply(&u, &b).unwrap();
        worst = worst.max(op_norm(&(unitary_pow(&v, n as i64) - &u)));

        // plant an eigenvalue next to the cut
        let (q, mut eig) = normal_eig(&u).unwrap();
        let side = if i % 2 == 0 { 1.0 } else { -1.0 };
        eig[0] = Complex64::from_polar(1.0, alpha + side * 1e-7);
        let d = CMatrix::from_fn(dim, dim, |r, c| if r == c { eig[r] } else { Complex64::new(0.0, 0.0) });
        let near = &q * d * q.adjoint();
        if matches!(root_branch_apply(&near, &b), Err(Error::NearBranchCut { .. })) {
            rejected += 1;
        }
    }
    (
        worst < 1e-10 && rejected == 50,
        format!("max |phi(U)^n - U| {worst:.2e} over 50 unitaries, near-cut rejected {rejected}/50"),
    )
}

fn winding() -> Outcome {
    let g = SampledLoop::generator(4096).unwrap();
    let powers_ok = (1..=5).all(|n| winding_number(&g.power(n)).unwrap() == n);
    let mut composed_ok = true;
    for a in 1..=4u32 {
        for b in 1..=4u32 {
            let composed = winding_number(&g.power(a as i64).power(b as i64)).unwrap();
            composed_ok &= composed == phi_k_of_cover(a, 4096).unwrap() * phi_k_of_cover(b, 4096).unwrap();
        }
    }
    let mut classes_ok = true;
    for n in [2u32, 3, 4] {
        for w in 0..=7 {
            classes_ok &= cone_class(&g.power(w), n).unwrap() as i64 == w % n as i64;
        }
    }
    (
        powers_ok && composed_ok && classes_ok,
        format!("z^n windings: {powers_ok}, composed covers: {composed_ok}, cone classes: {classes_ok}"),
    )
}

fn mapping_cone() -> Outcome {
    let v = TorusElement::u(circle_params());
    let r = cone_membership(&ConePath::constant(3, v, 1).unwrap()).unwrap();
    let d: Vec<f64> = r.powers.iter().map(|p| p.distance).collect();
    let pass = d.len() == 3 && d[0] > 0.5 && d[1] > 0.5 && d[2] < 1e-8;
    (
        pass,
        format!("distances v, v^2, v^3: {:.3e}, {:.3e}, {:.3e}", d[0], d[1], d[2]),
    )
}

fn morita() -> Outcome {
    let mut worst: f64 = 0.0;
    for (m, n, k) in [(2, 2, 1), (2, 3, 5)] {
        let r = morita_twist_witness(m, n, k, 3).unwrap();
        worst = worst.max(r.witness_residual).max(r.clock_shift_residual);
    }
    (worst < 1e-10, format!("witness relation residual {worst:.2e}"))
}

fn determinism() -> Outcome {
    let mut same = Vec::new();
    for (name, _) in scenario::list_scenarios() {
        let cfg = ScenarioConfig::new(name);
        let cfg = ScenarioConfig { seed: 12345, ..cfg };
        let a = scenario::run(&cfg).and_then(|r| r.to_json(false));
        let b = scenario::run(&cfg).and_then(|r| r.to_json(false));
        let ok = matches!((&a, &b), (Ok(x), Ok(y)) if x == y);
        same.push((name, ok));
    }
    let pass = same.iter().all(|s| s.1);
    let failing: Vec<&str> = same.iter().filter(|s| !s.1).map(|s| s.0).collect();
    (
        pass,
        if pass {
            format!("{} scenarios byte-identical across two runs", same.len())
        } else {
            format!("differing: {}", failing.join(", "))
        },
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("galois round trip", galois_round_trip),
        ("fixed-point identification", fixed_points),
        ("partition identities", partitions),
        ("algebra laws", algebra_laws),
        ("representation fidelity", representation_fidelity),
        ("su2 counterexample", su2),
        ("root branch", root_branch),
        ("winding and K1", winding),
        ("mapping-cone membership", mapping_cone),
        ("morita twist", morita),
        ("determinism", determinism),
    ];
    let mut failures = 0;
    for (i, (label, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (pass, detail) = check();
        if !pass {
            failures += 1;
        }
        println!(
            "acceptance {:>2} {:<4} {label}: {detail} [{:.2}s]",
            i + 1,
            if pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failures,
        criteria.len()
    );
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
