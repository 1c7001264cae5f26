//! Acceptance suite: one test per criterion, each printing a PASS line with
//! the measured quantities. Run with `cargo test --test acceptance`.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use covlap::complex::{build_preset, PresetKind};
use covlap::config::RunConfig;
use covlap::cover::{build_cover, preimage_components, sampling, CoverSpec};
use covlap::group::{
    abelian_mu, enumerate_index_n, intermediate_count_check, min_generators_coset, CosetAction,
    Presentation,
};
use covlap::nodal::{canonical_cluster_vector, nodal_decomposition, unstable_cover_plan};
use covlap::spectra::{
    assemble, count_below, dense_spectrum, invariant_splitting, lowest_eigenpairs, transfer_pair,
    CountMode, LaplaceKind,
};
use covlap::stability::{
    duality_check, nodal_doubling_tower, numberg_check, stability_verdict, tower_experiment,
    Provenance, StabilityTarget, Verdict,
};
use covlap::AbelianInvariants;

fn cfg() -> RunConfig {
    RunConfig::default()
}

fn provenance() -> Provenance {
    Provenance { seed: 7, tol: 1e-10, margin: 1e-9 }
}

fn cycle_eigenvalues(n: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n)
        .map(|k| 2.0 - 2.0 * (2.0 * std::f64::consts::PI * k as f64 / n as f64).cos())
        .collect();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v
}

fn torus_eigenvalues(a: usize, b: usize) -> Vec<f64> {
    let ta = cycle_eigenvalues(a);
    let tb = cycle_eigenvalues(b);
    let mut v = Vec::with_capacity(a * b);
    for x in &ta {
        for y in &tb {
            v.push(x + y);
        }
    }
    v.sort_by(|x, y| x.partial_cmp(y).unwrap());
    v
}

/// Criterion 1: circle double cover, exact counts and closed-form spectra.
#[test]
fn criterion_1_circle_double_cover() {
    let t0 = Instant::now();
    let c = build_preset(PresetKind::Cycle, &[12]).unwrap();
    let op = assemble(&c, LaplaceKind::Graph).unwrap();
    let sb = lowest_eigenpairs(&op, 12, 1e-10, 7, 4000, 1e-7).unwrap();
    let oracle12 = cycle_eigenvalues(12);
    for (a, b) in sb.eigenvalues.iter().zip(&oracle12) {
        assert!((a - b).abs() <= 1e-9, "base eigenvalue {a} vs oracle {b}");
    }
    let phi = canonical_cluster_vector(&op, &sb, sb.clusters[1], 7);
    let d = nodal_decomposition(&c, &phi, 1e-8).unwrap();
    let plan = unstable_cover_plan(&c, &d, 0, 2).unwrap();
    let cov = build_cover(&c, &plan.spec).unwrap();
    assert_eq!(cov.total().n_vertices(), 24);
    let cover_op = assemble(cov.total(), LaplaceKind::Graph).unwrap();
    let sc = lowest_eigenpairs(&cover_op, 24, 1e-10, 7, 4000, 1e-7).unwrap();
    let oracle24 = cycle_eigenvalues(24);
    for (a, b) in sc.eigenvalues.iter().zip(&oracle24) {
        assert!((a - b).abs() <= 1e-9, "cover eigenvalue {a} vs oracle {b}");
    }
    let lambda1 = sb.eigenvalues[1];
    let nb = count_below(&sb, lambda1, CountMode::Open, 1e-9).unwrap();
    let nc = count_below(&sc, lambda1, CountMode::Open, 1e-9).unwrap();
    assert_eq!(nb, 1);
    assert_eq!(nc, 3);
    let ledger = numberg_check(&cov, &sb, &phi, lambda1, &cfg()).unwrap();
    assert_eq!(ledger.claimed - ledger.n_base_open, 2, "sum of (|J_i| - 1) is 2");
    assert!(ledger.holds && ledger.tight, "bound met with equality");
    let elapsed = t0.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "runtime {elapsed:?} exceeds 1 s");
    println!(
        "ACCEPTANCE 1 PASS circle double cover: N12(l1-)={nb} N24(l1-)={nc} gain=2 tight, {elapsed:?}"
    );
}

/// Criterion 2: component-orbit duality on 200 randomized triples.
#[test]
fn criterion_2_component_orbit_duality() {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xC0DA);
    let mut checked = 0usize;
    while checked < 200 {
        let base = sampling::random_base(&mut rng);
        let degree = rng.gen_range(2..=6usize);
        let spec = sampling::random_spec(&base, degree, &mut rng).unwrap();
        let cover = build_cover(&base, &spec).unwrap();
        let sub = sampling::random_subdomain(&base, &mut rng);
        let (components, orbits) = duality_check(&cover, &sub).unwrap();
        assert_eq!(
            components, orbits,
            "duality violated: base {} vertices, degree {degree}, subset {sub:?}",
            base.n_vertices()
        );
        checked += 1;
    }
    let elapsed = t0.elapsed();
    assert!(elapsed.as_secs_f64() < 30.0, "runtime {elapsed:?} exceeds 30 s");
    println!("ACCEPTANCE 2 PASS component-orbit duality: 200/200 exact, {elapsed:?}");
}

/// Criterion 3: transfer identities on 50 random covers.
#[test]
fn criterion_3_transfer_identities() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x7AA5);
    let mut clusters_checked = 0usize;
    for case in 0..50 {
        let base = sampling::random_base(&mut rng);
        let degree = rng.gen_range(2..=5usize);
        let spec = sampling::random_spec(&base, degree, &mut rng).unwrap();
        let cover = build_cover(&base, &spec).unwrap();
        // Intertwining and the structural identity are verified inside.
        let pair = transfer_pair(&cover).unwrap();
        let bop = assemble(cover.base(), LaplaceKind::Graph).unwrap();
        let cop = assemble(cover.total(), LaplaceKind::Graph).unwrap();
        for _ in 0..5 {
            let phi: Vec<f64> = (0..bop.dim()).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
            let psi: Vec<f64> = (0..cop.dim()).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
            let lhs = cop.inner(&psi, &pair.pullback(&phi));
            let rhs = degree as f64 * bop.inner(&pair.pushdown(&psi), &phi);
            assert!(
                (lhs - rhs).abs() <= 1e-12 * lhs.abs().max(rhs.abs()).max(1.0),
                "adjointness residual too large (case {case})"
            );
            let round = pair.pushdown(&pair.pullback(&phi));
            for (a, b) in round.iter().zip(&phi) {
                assert!((a - b).abs() < 1e-13, "pushdown-pullback identity (case {case})");
            }
        }
        // Splitting dims on every certified cluster of the cover spectrum.
        let sb = dense_spectrum(&bop, 1e-7);
        let sc = if cop.dim() <= 400 {
            dense_spectrum(&cop, 1e-7)
        } else {
            lowest_eigenpairs(&cop, 8.min(cop.dim()), 1e-10, 7, 4000, 1e-7).unwrap()
        };
        let usable = if sc.complete { sc.clusters.len() } else { sc.clusters.len().saturating_sub(1) };
        for &(cs, ce) in sc.clusters.iter().take(usable) {
            let lambda = sc.eigenvalues[cs..ce].iter().sum::<f64>() / (ce - cs) as f64;
            let rep = invariant_splitting(&cover, lambda, &sb, &sc, 1e-7).unwrap();
            assert!(rep.additive, "splitting not additive at {lambda} (case {case}): {rep:?}");
            assert!(rep.ortho_residual <= 1e-7, "ortho residual (case {case}): {rep:?}");
            clusters_checked += 1;
        }
    }
    println!("ACCEPTANCE 3 PASS transfer identities: 50 covers, {clusters_checked} clusters split additively");
}

/// Criterion 4: torus cyclic covers from nodal bands, degrees 2..4.
#[test]
fn criterion_4_torus_cyclic_covers() {
    let c = build_preset(PresetKind::GridTorus, &[12, 12]).unwrap();
    let op = assemble(&c, LaplaceKind::Graph).unwrap();
    let sb = dense_spectrum(&op, 1e-7);
    let lambda1 = sb.eigenvalues[1];
    let cluster = sb.cluster_at(lambda1, 1e-9).unwrap();
    let phi = canonical_cluster_vector(&op, &sb, cluster, 7);
    let d = nodal_decomposition(&c, &phi, 1e-8).unwrap();
    assert_eq!(d.nu(), 2, "two annular bands");
    for n in [2usize, 3, 4] {
        let t0 = Instant::now();
        let plan = unstable_cover_plan(&c, &d, 0, n).unwrap();
        let cov = build_cover(&c, &plan.spec).unwrap();
        assert!(cov.is_connected());
        let cop = assemble(cov.total(), LaplaceKind::Graph).unwrap();
        let sc = dense_spectrum(&cop, 1e-7);
        // Discrete spectrum matches the stretched-torus closed form.
        let oracle = torus_eigenvalues(12 * n, 12);
        for (a, b) in sc.eigenvalues.iter().zip(&oracle) {
            assert!((a - b).abs() <= 1e-8, "degree {n}: {a} vs {b}");
        }
        let report =
            stability_verdict(&sb, &sc, StabilityTarget::LambdaK(1), 1e-9, provenance()).unwrap();
        assert_eq!(report.verdict, Verdict::StrictlyUnstable, "degree {n}");
        let observed = report.n_cover_open.unwrap();
        assert!(observed >= 1 + (n - 1), "degree {n}: N'={observed}");
        // The normal closure condition: both bands lift to n components.
        for dom in &d.domains {
            assert_eq!(preimage_components(&cov, &dom.vertices).unwrap().len(), n);
        }
        let elapsed = t0.elapsed();
        assert!(elapsed.as_secs_f64() < 10.0, "degree {n} runtime {elapsed:?}");
        println!(
            "ACCEPTANCE 4 PASS torus cyclic cover degree {n}: strictly unstable, N'(l1-)={observed} >= {}, {elapsed:?}",
            1 + (n - 1)
        );
    }
}

/// Criterion 5: subgroup enumeration against Hall's recursion and the
/// intermediate containment bound.
#[test]
fn criterion_5_subgroup_enumeration() {
    let t0 = Instant::now();
    // Hall's recursion for free rank 2, recomputed here.
    let factorial = |n: usize| -> usize { (1..=n).product() };
    let mut hall = vec![0usize; 6];
    for n in 1..=5 {
        let mut v = n * factorial(n);
        for k in 1..n {
            v -= factorial(n - k) * hall[k];
        }
        hall[n] = v;
    }
    assert_eq!(&hall[2..=5], &[3, 13, 71, 461]);
    let f2 = Presentation::free(2);
    for n in 2..=5 {
        let subs = enumerate_index_n(&f2, n, 6).unwrap();
        assert_eq!(subs.len(), hall[n], "a({n})");
    }
    let genus2 = Presentation::surface(2);
    let subs = enumerate_index_n(&genus2, 2, 4).unwrap();
    assert_eq!(subs.len(), 15, "genus-2 index-2 count");
    // Containment bounds.
    for n in [2usize, 3] {
        let report = intermediate_count_check(&f2, n, 6).unwrap();
        assert!(report.bound_holds, "free rank 2, n={n}: {report:?}");
        assert!(report.max_containments <= 2 * n - 1);
    }
    let report = intermediate_count_check(&genus2, 2, 4).unwrap();
    assert!(report.bound_holds, "genus 2, n=2: {report:?}");
    let elapsed = t0.elapsed();
    assert!(elapsed.as_secs_f64() < 60.0, "runtime {elapsed:?} exceeds 60 s");
    println!(
        "ACCEPTANCE 5 PASS subgroup enumeration: a(2..5)={:?}, genus-2 a(2)=15, containments bounded, {elapsed:?}",
        &hall[2..=5]
    );
}

/// Criterion 6: minimal generators of abelian groups against brute force.
#[test]
fn criterion_6_minimal_generators() {
    // All abelian groups of order <= 256 in primary decomposition.
    fn partitions(n: usize) -> Vec<Vec<usize>> {
        fn rec(n: usize, max: usize) -> Vec<Vec<usize>> {
            if n == 0 {
                return vec![vec![]];
            }
            let mut out = Vec::new();
            for first in (1..=max.min(n)).rev() {
                for rest in rec(n - first, first) {
                    let mut p = vec![first];
                    p.extend(rest);
                    out.push(p);
                }
            }
            out
        }
        rec(n, n)
    }
    fn prime_factors(mut n: u64) -> Vec<(u64, usize)> {
        let mut out = Vec::new();
        let mut p = 2;
        while p * p <= n {
            if n % p == 0 {
                let mut e = 0;
                while n % p == 0 {
                    n /= p;
                    e += 1;
                }
                out.push((p, e));
            }
            p += 1;
        }
        if n > 1 {
            out.push((n, 1));
        }
        out
    }
    /// Element-counting oracle: the p-rank is log_p of the number of
    /// elements killed by p, counted by explicit enumeration.
    fn mu_oracle(factors: &[u64]) -> usize {
        let order: u64 = factors.iter().product();
        let primes: std::collections::BTreeSet<u64> =
            prime_factors(order).into_iter().map(|(p, _)| p).collect();
        let mut best = 0usize;
        for &p in &primes {
            let mut killed = 0u64;
            let total = order;
            for code in 0..total {
                let mut x = code;
                let mut dies = true;
                for &k in factors {
                    let digit = x % k;
                    x /= k;
                    if (digit * p) % k != 0 {
                        dies = false;
                        break;
                    }
                }
                if dies {
                    killed += 1;
                }
            }
            let mut rank = 0usize;
            let mut v = killed;
            while v > 1 {
                assert_eq!(v % p, 0, "element count must be a p-power");
                v /= p;
                rank += 1;
            }
            best = best.max(rank);
        }
        best
    }
    /// Exhaustive generating-set search for small groups.
    fn min_generators_exhaustive(factors: &[u64]) -> usize {
        let order: u64 = factors.iter().product();
        let n = order as usize;
        let add = |a: usize, b: usize| -> usize {
            let (mut x, mut y, mut out, mut stride) = (a, b, 0usize, 1usize);
            for &k in factors {
                let k = k as usize;
                out += (x % k + y % k) % k * stride;
                stride *= k;
                x /= k;
                y /= k;
            }
            out
        };
        let generates = |gens: &[usize]| -> bool {
            let mut seen = vec![false; n];
            seen[0] = true;
            let mut stack = vec![0usize];
            let mut count = 1;
            while let Some(x) = stack.pop() {
                for &g in gens {
                    let y = add(x, g);
                    if !seen[y] {
                        seen[y] = true;
                        count += 1;
                        stack.push(y);
                    }
                }
            }
            count == n
        };
        if n == 1 {
            return 0;
        }
        for k in 1..=factors.len() {
            let mut found = false;
            let mut combo: Vec<usize> = (1..=k).collect();
            'outer: loop {
                if generates(&combo.iter().map(|&i| i).collect::<Vec<_>>()) {
                    found = true;
                    break;
                }
                let mut i = k;
                while i > 0 {
                    i -= 1;
                    if combo[i] + 1 <= n - (k - i) {
                        combo[i] += 1;
                        for j in i + 1..k {
                            combo[j] = combo[j - 1] + 1;
                        }
                        continue 'outer;
                    }
                    if i == 0 {
                        break 'outer;
                    }
                }
            }
            if found {
                return k;
            }
        }
        factors.len()
    }

    let mut groups_checked = 0usize;
    for order in 1..=256u64 {
        // Abelian groups of this order: a partition choice per prime power.
        let pf = prime_factors(order);
        let mut decomps: Vec<Vec<u64>> = vec![vec![]];
        for (p, e) in pf {
            let mut next = Vec::new();
            for part in partitions(e) {
                for base in &decomps {
                    let mut d = base.clone();
                    for &exp in &part {
                        d.push(p.pow(exp as u32));
                    }
                    next.push(d);
                }
            }
            decomps = next;
        }
        for factors in decomps {
            let inv = AbelianInvariants { rank: 0, torsion: factors.clone() };
            let mu = abelian_mu(&inv).unwrap();
            assert_eq!(mu, mu_oracle(&factors), "order {order}, factors {factors:?}");
            if order <= 36 {
                assert_eq!(
                    mu,
                    min_generators_exhaustive(&factors),
                    "exhaustive check, factors {factors:?}"
                );
            }
            groups_checked += 1;
        }
    }
    // Consistency with the coset-space search on regular actions.
    let mut actions_checked = 0usize;
    for order in 2..=24u64 {
        let pf = prime_factors(order);
        let mut decomps: Vec<Vec<u64>> = vec![vec![]];
        for (p, e) in pf {
            let mut next = Vec::new();
            for part in partitions(e) {
                for base in &decomps {
                    let mut d = base.clone();
                    for &exp in &part {
                        d.push(p.pow(exp as u32));
                    }
                    next.push(d);
                }
            }
            decomps = next;
        }
        for factors in decomps {
            let action = CosetAction::regular_abelian(&factors).unwrap();
            let k = min_generators_coset(&action, 24).unwrap();
            let mu = abelian_mu(&AbelianInvariants { rank: 0, torsion: factors.clone() }).unwrap();
            assert_eq!(k, mu, "regular action of {factors:?}");
            actions_checked += 1;
        }
    }
    println!(
        "ACCEPTANCE 6 PASS minimal generators: {groups_checked} abelian groups vs brute force, {actions_checked} regular actions consistent"
    );
}

/// Criterion 7: tower trajectories against closed forms.
#[test]
fn criterion_7_towers() {
    // Circle tower: lambda_2 of C(3 * 2^k).
    let c3 = build_preset(PresetKind::Cycle, &[3]).unwrap();
    let tower = nodal_doubling_tower(&c3, 8, &cfg()).unwrap();
    let report = tower_experiment(&tower, 2, 0.01, 1e-9, &cfg()).unwrap();
    assert!(report.strictly_decreasing, "lambda_2 strictly decreasing");
    for (k, lam) in report.trajectory.iter().enumerate() {
        let m = (3usize << k) as f64;
        let oracle = 2.0 - 2.0 * (2.0 * std::f64::consts::PI / m).cos();
        assert!((lam - oracle).abs() <= 1e-8, "level {k}: {lam} vs {oracle}");
        if k >= 6 {
            assert!(*lam < 0.01, "level {k}: lambda_2 = {lam}");
        }
    }
    assert!(report.entered_below_roof);
    assert!(report.composition_ok, "counting monotone along the tower");
    println!(
        "ACCEPTANCE 7a PASS circle tower: lambda_2 {:.3e} -> {:.3e} over 8 doublings",
        report.trajectory[0],
        report.trajectory.last().unwrap()
    );
    // Torus tower: lambda_3 below 1e-3 by level 6.
    let t8 = build_preset(PresetKind::GridTorus, &[8, 8]).unwrap();
    let tower = nodal_doubling_tower(&t8, 6, &cfg()).unwrap();
    let report = tower_experiment(&tower, 3, 1e-3, 1e-9, &cfg()).unwrap();
    assert!(report.entered_below_roof, "lambda_3(M_6) = {:.3e}", report.trajectory.last().unwrap());
    assert!(*report.trajectory.last().unwrap() < 1e-3);
    assert!(report.composition_ok);
    println!(
        "ACCEPTANCE 7b PASS torus tower: lambda_3(M_6) = {:.3e} < 1e-3",
        report.trajectory.last().unwrap()
    );
}

/// Criterion 8: the spectral-decomposition dimension lemma on 100 seeded
/// instances plus the three closed-form ones.
#[test]
fn criterion_8_respec_instances() {
    for (i, inst) in covlap::respec::trivial_instances().iter().enumerate() {
        let r = covlap::respec::respec_check(inst, 1e-9).unwrap();
        assert!(r.pass, "trivial instance {i}: {r:?}");
    }
    let mut passed = 0usize;
    for seed in 0..100u64 {
        let inst = covlap::respec::random_instance(50, seed);
        let r = covlap::respec::respec_check(&inst, 1e-9)
            .unwrap_or_else(|e| panic!("seed {seed}: {e}"));
        assert!(r.pass, "seed {seed}: {r:?}");
        assert!(r.equality_ok && r.inequality_ok && r.kernel_match_ok);
        passed += 1;
    }
    println!("ACCEPTANCE 8 PASS spectral dimension lemma: 3 trivial + {passed}/100 random instances");
}

/// Criterion 9: the one-sided counting inequalities hold on every suite case.
#[test]
fn criterion_9_counting_inequalities() {
    let mut cases: Vec<(covlap::SurfaceComplex, CoverSpec, String)> = Vec::new();
    // Circle double and triple covers via nodal plans.
    let c12 = build_preset(PresetKind::Cycle, &[12]).unwrap();
    let op12 = assemble(&c12, LaplaceKind::Graph).unwrap();
    let s12 = dense_spectrum(&op12, 1e-7);
    let phi = canonical_cluster_vector(&op12, &s12, s12.clusters[1], 7);
    let d = nodal_decomposition(&c12, &phi, 1e-8).unwrap();
    for n in [2usize, 3] {
        let plan = unstable_cover_plan(&c12, &d, 0, n).unwrap();
        cases.push((c12.clone(), plan.spec, format!("circle x{n}")));
    }
    // Torus cyclic covers.
    let t12 = build_preset(PresetKind::GridTorus, &[12, 12]).unwrap();
    let opt = assemble(&t12, LaplaceKind::Graph).unwrap();
    let st = dense_spectrum(&opt, 1e-7);
    let phi = canonical_cluster_vector(&opt, &st, st.cluster_at(st.eigenvalues[1], 1e-9).unwrap(), 7);
    let dt = nodal_decomposition(&t12, &phi, 1e-8).unwrap();
    for n in [2usize, 3, 4] {
        let plan = unstable_cover_plan(&t12, &dt, 0, n).unwrap();
        cases.push((t12.clone(), plan.spec, format!("torus x{n}")));
    }
    // Random covers, kept small enough for the dense path.
    let mut rng = ChaCha8Rng::seed_from_u64(0x99E1);
    let mut added = 0;
    while added < 10 {
        let base = sampling::random_base(&mut rng);
        let degree = rng.gen_range(2..=4usize);
        if base.n_vertices() * degree > 400 {
            continue;
        }
        let spec = sampling::random_spec(&base, degree, &mut rng).unwrap();
        cases.push((base, spec, format!("random {added}")));
        added += 1;
    }
    let mut intervals_checked = 0usize;
    let mut liftk_checked = 0usize;
    for (base, spec, name) in &cases {
        let cover = build_cover(base, spec).unwrap();
        let bop = assemble(base, LaplaceKind::Graph).unwrap();
        let cop = assemble(cover.total(), LaplaceKind::Graph).unwrap();
        let sb = dense_spectrum(&bop, 1e-7);
        let sc = dense_spectrum(&cop, 1e-7);
        // liftk: lambda_k never grows under the cover.
        for k in 0..sb.len() {
            assert!(
                sc.eigenvalues[k] <= sb.eigenvalues[k] + 1e-9,
                "{name}: lambda_{k} grew: {} vs {}",
                sc.eigenvalues[k],
                sb.eigenvalues[k]
            );
            liftk_checked += 1;
        }
        // lifti: N(I) is monotone for certified intervals [0, lambda].
        let lmax = sb.last_eigenvalue();
        for i in 1..=24 {
            let lam = lmax * i as f64 / 24.0;
            let (nb, nc) = match (
                count_below(&sb, lam, CountMode::Closed, 1e-9),
                count_below(&sc, lam, CountMode::Closed, 1e-9),
            ) {
                (Ok(nb), Ok(nc)) => (nb, nc),
                _ => continue,
            };
            assert!(nb <= nc, "{name}: N_base([0,{lam}]) = {nb} > N_cover = {nc}");
            intervals_checked += 1;
        }
    }
    println!(
        "ACCEPTANCE 9 PASS counting inequalities: {} cases, {liftk_checked} liftk checks, {intervals_checked} certified intervals",
        cases.len()
    );
}
