//! Acceptance suite: one PASS/FAIL line per criterion, then a single assertion.
//!
//! Run with `cargo test -p gmtkit --test acceptance -- --nocapture` to see the lines.

use gmtkit::chain::{chains_equal, EqualityMode, PLChain, PolyChain, TestForm};
use gmtkit::complex::builders::{grid_2d, grid_3d, single_triangle};
use gmtkit::complex::SimplicialComplex;
use gmtkit::deform::{deform, DeformConfig, DeformationResult, TriangulatedSpace};
use gmtkit::fill::{self, cone_fill, fillvol, flat_norm, region_boundary, undistortion_report, FillMode, RowFlag};
use gmtkit::linalg::{self, Point};
use gmtkit::nerve::{build_cover, build_nerve, tau_sum_bound_holds, verify_structure, MetricPointCloud};
use gmtkit::rational::{q, qf, to_f64, Q};
use num_traits::Signed;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::{Duration, Instant};

/// Instances per chain-algebra identity.
const ALGEBRA_INSTANCES: usize = 200;
const ALGEBRA_BUDGET: Duration = Duration::from_secs(60);
const FILL_BUDGET: Duration = Duration::from_secs(120);
/// Allowed spread `max / min - 1` of the suite ledger maxima across seeds.
/// Center candidates per simplex for the ledger suite.
const LEDGER_SAMPLES: usize = 32;
const LEDGER_SPREAD: f64 = 0.25;
const LEDGER_SEEDS: [u64; 5] = [1, 2, 3, 4, 5];
/// Float slack when comparing a rational optimum against a floating-point cone mass.
const MASS_TOL: f64 = 1e-12;

type Outcome = Result<String, String>;

fn pt(c: &[Q]) -> Point {
    c.to_vec()
}

fn rand_q<R: Rng>(rng: &mut R) -> Q {
    qf(rng.gen_range(-12..=12), rng.gen_range(1..=4))
}

fn random_chain<R: Rng>(rng: &mut R, k: usize, ambient: usize) -> PLChain {
    let terms = rng.gen_range(1..=3);
    let mut t = PLChain::zero(k, ambient);
    for _ in 0..terms {
        let vs: Vec<Point> = (0..=k).map(|_| (0..ambient).map(|_| rand_q(rng)).collect()).collect();
        let c = rng.gen_range(1..=3) * if rng.gen_bool(0.5) { 1 } else { -1 };
        t = t.plus(&PLChain::from_terms(k, ambient, vec![(vs, c)]).unwrap());
    }
    t
}

fn random_instance<R: Rng>(rng: &mut R) -> PLChain {
    let ambient = rng.gen_range(2..=3);
    let k = rng.gen_range(1..=ambient);
    random_chain(rng, k, ambient)
}

fn eq(a: &PLChain, b: &PLChain) -> bool {
    chains_equal(a, b, &EqualityMode::Exact).equal
}

fn criterion_1() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC1);
    let start = Instant::now();
    let mut failures = [0usize; 4];
    for _ in 0..ALGEBRA_INSTANCES {
        let t = random_instance(&mut rng);
        if !t.boundary().boundary().is_zero() {
            failures[0] += 1;
        }
    }
    for _ in 0..ALGEBRA_INSTANCES {
        let t = random_instance(&mut rng);
        let a: Point = (0..t.ambient()).map(|_| rand_q(&mut rng)).collect();
        if !eq(&t.cone(&a).boundary().plus(&t.boundary().cone(&a)), &t) {
            failures[1] += 1;
        }
    }
    for _ in 0..ALGEBRA_INSTANCES {
        let ambient = rng.gen_range(2..=3);
        let k = rng.gen_range(1..ambient);
        let t = random_chain(&mut rng, k, ambient);
        let shift: Point = (0..ambient).map(|_| rand_q(&mut rng)).collect();
        let f = qf(rng.gen_range(1..=5), rng.gen_range(1..=3));
        let h0 = |x: &Point| x.clone();
        let h1 = |x: &Point| linalg::add(&linalg::scale(x, &f), &shift);
        let lhs = t.prism(h0, h1).boundary();
        let rhs = t.pushforward(ambient, h1).minus(&t.pushforward(ambient, h0)).minus(&t.boundary().prism(h0, h1));
        if !eq(&lhs, &rhs) {
            failures[2] += 1;
        }
    }
    for _ in 0..ALGEBRA_INSTANCES {
        let t = random_instance(&mut rng);
        let w = TestForm::random(t.dim() - 1, t.ambient(), 2, 5, &mut rng);
        let lhs = w.evaluate(&t.boundary()).unwrap();
        let rhs = w.d().evaluate(&t).unwrap();
        if lhs != rhs {
            failures[3] += 1;
        }
    }
    let elapsed = start.elapsed();
    let detail = format!(
        "{ALGEBRA_INSTANCES} instances each; failures dd={}, cone={}, prism={}, stokes={}; {:.1}s (budget {}s)",
        failures[0],
        failures[1],
        failures[2],
        failures[3],
        elapsed.as_secs_f64(),
        ALGEBRA_BUDGET.as_secs()
    );
    if failures.iter().all(|&f| f == 0) && elapsed < ALGEBRA_BUDGET {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC2);
    let mut bad = 0;
    for _ in 0..ALGEBRA_INSTANCES {
        let t = random_instance(&mut rng);
        let a: Point = (0..t.ambient()).map(|_| rand_q(&mut rng)).collect();
        if !t.cone_bound_holds(&a) {
            bad += 1;
        }
    }
    // apex on the support: cycles through a vertex
    let mut diam_bad = 0;
    for _ in 0..ALGEBRA_INSTANCES {
        let ambient = rng.gen_range(2..=3);
        let c = random_chain(&mut rng, 2, ambient).boundary();
        let Some(a) = c.vertex_set().first().cloned() else { continue };
        let f = cone_fill(&c, &a).unwrap();
        if f.diam_bound_holds != Some(true) || !f.bound_holds {
            diam_bad += 1;
        }
    }
    let detail = format!("{ALGEBRA_INSTANCES} random apexes: {bad} violations; {ALGEBRA_INSTANCES} apexes on spt T: {diam_bad} diameter-bound violations (exact)");
    if bad == 0 && diam_bad == 0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

struct Fixture {
    name: &'static str,
    space: usize,
    chain: PLChain,
}

fn seg(a: &[Q], b: &[Q]) -> (Vec<Point>, i64) {
    (vec![pt(a), pt(b)], 1)
}

fn polygon(vs: &[Vec<Q>], c: i64) -> PLChain {
    let n = vs.len();
    let d = vs[0].len();
    PLChain::from_terms(1, d, (0..n).map(|i| (vec![vs[i].clone(), vs[(i + 1) % n].clone()], c))).unwrap()
}

fn spaces() -> Vec<TriangulatedSpace> {
    vec![
        TriangulatedSpace::new(grid_2d(1, 1, &q(1))).unwrap(),
        TriangulatedSpace::new(grid_2d(2, 2, &qf(1, 2))).unwrap(),
        TriangulatedSpace::new(grid_3d([1, 1, 1], &q(1))).unwrap(),
        TriangulatedSpace::new(grid_3d([2, 1, 1], &qf(1, 2))).unwrap(),
    ]
}

fn fixtures() -> Vec<Fixture> {
    let v = |c: &[(i64, i64)]| c.iter().map(|&(n, d)| qf(n, d)).collect::<Vec<Q>>();
    let mut out = Vec::new();
    let mut add = |name, space, chain| out.push(Fixture { name, space, chain });
    // concentric triangle: face [0,1,3] of the unit square shrunk by 3/4 about its centroid
    let centroid = v(&[(2, 3), (1, 3)]);
    let outer = [v(&[(0, 1), (0, 1)]), v(&[(1, 1), (0, 1)]), v(&[(1, 1), (1, 1)])];
    let inner: Vec<Point> = outer.iter().map(|p| linalg::lerp(&centroid, p, &qf(3, 4))).collect();
    add("concentric-triangle", 0, polygon(&inner, 1));
    add("diagonal-segment", 0, PLChain::from_terms(1, 2, vec![seg(&v(&[(1, 2), (0, 1)]), &v(&[(1, 1), (1, 2)]))]).unwrap());
    add(
        "crossing-loop",
        1,
        polygon(&[v(&[(1, 5), (1, 7)]), v(&[(9, 10), (1, 3)]), v(&[(2, 5), (17, 20)])], 1),
    );
    add(
        "doubled-square-loop",
        1,
        polygon(&[v(&[(1, 8), (1, 8)]), v(&[(7, 8), (1, 8)]), v(&[(7, 8), (7, 8)]), v(&[(1, 8), (7, 8)])], 2),
    );
    add(
        "open-path",
        1,
        PLChain::from_terms(
            1,
            2,
            vec![
                seg(&v(&[(1, 10), (1, 5)]), &v(&[(3, 5), (3, 10)])),
                seg(&v(&[(3, 5), (3, 10)]), &v(&[(7, 10), (4, 5)])),
                seg(&v(&[(7, 10), (4, 5)]), &v(&[(1, 5), (9, 10)])),
            ],
        )
        .unwrap(),
    );
    add("edge-piece", 1, PLChain::from_terms(1, 2, vec![seg(&v(&[(1, 8), (0, 1)]), &v(&[(3, 8), (0, 1)]))]).unwrap());
    add(
        "points",
        1,
        PLChain::from_terms(0, 2, vec![(vec![v(&[(1, 3), (1, 7)])], 1), (vec![v(&[(5, 6), (2, 3)])], -1)]).unwrap(),
    );
    add(
        "small-face-triangle",
        1,
        PLChain::from_terms(2, 2, vec![(vec![v(&[(1, 10), (1, 20)]), v(&[(2, 5), (1, 20)]), v(&[(2, 5), (3, 10)])], 1)]).unwrap(),
    );
    add(
        "large-triangle",
        1,
        PLChain::from_terms(2, 2, vec![(vec![v(&[(1, 9), (1, 7)]), v(&[(8, 9), (2, 7)]), v(&[(3, 7), (8, 9)])], 1)]).unwrap(),
    );
    add(
        "polyhedral-edges",
        1,
        PolyChain::from_int_terms(1, vec![(vec![0, 1], 1), (vec![1, 4], 1)]).to_pl(&grid_2d(2, 2, &qf(1, 2))).unwrap(),
    );
    add(
        "two-loops",
        1,
        polygon(&[v(&[(1, 10), (1, 10)]), v(&[(2, 5), (1, 10)]), v(&[(1, 10), (2, 5)])], 1).plus(&polygon(
            &[v(&[(3, 5), (3, 5)]), v(&[(9, 10), (3, 5)]), v(&[(3, 5), (9, 10)])],
            -1,
        )),
    );
    let w = |c: &[(i64, i64)]| v(c);
    add(
        "cube-segment",
        2,
        PLChain::from_terms(1, 3, vec![seg(&w(&[(1, 5), (1, 3), (1, 7)]), &w(&[(4, 5), (5, 7), (2, 3)]))]).unwrap(),
    );
    add(
        "cube-loop",
        2,
        polygon(&[w(&[(1, 5), (1, 4), (1, 3)]), w(&[(4, 5), (1, 3), (1, 2)]), w(&[(1, 2), (5, 6), (2, 3)])], 1),
    );
    add(
        "cube-triangle",
        2,
        PLChain::from_terms(
            2,
            3,
            vec![(vec![w(&[(1, 5), (1, 4), (1, 3)]), w(&[(4, 5), (1, 3), (1, 2)]), w(&[(1, 2), (5, 6), (2, 3)])], 1)],
        )
        .unwrap(),
    );
    add("cube-point", 2, PLChain::from_terms(0, 3, vec![(vec![w(&[(1, 3), (1, 5), (1, 7)])], 1)]).unwrap());
    add(
        "cube-tetrahedron",
        2,
        PLChain::from_terms(
            3,
            3,
            vec![(
                vec![w(&[(1, 5), (1, 5), (1, 5)]), w(&[(3, 5), (1, 4), (1, 5)]), w(&[(1, 4), (3, 5), (1, 5)]), w(&[(1, 4), (1, 4), (3, 5)])],
                1,
            )],
        )
        .unwrap(),
    );
    add(
        "cube-face-loop",
        2,
        polygon(&[w(&[(1, 5), (1, 5), (0, 1)]), w(&[(4, 5), (1, 5), (0, 1)]), w(&[(1, 2), (4, 5), (0, 1)])], 1),
    );
    // the box [0,1] x [0,1/2] x [0,1/2]: halve the last two coordinates
    let b = |c: &[(i64, i64)]| {
        let mut p = v(c);
        p[1] /= q(2);
        p[2] /= q(2);
        p
    };
    add(
        "box-segment",
        3,
        PLChain::from_terms(1, 3, vec![seg(&b(&[(1, 10), (1, 3), (1, 7)]), &b(&[(9, 10), (2, 3), (5, 7)]))]).unwrap(),
    );
    add(
        "box-loop",
        3,
        polygon(&[b(&[(1, 10), (1, 4), (1, 3)]), b(&[(9, 10), (1, 3), (1, 2)]), b(&[(1, 2), (5, 6), (2, 3)])], 1),
    );
    add(
        "box-cross-section",
        3,
        PLChain::from_terms(
            2,
            3,
            vec![
                (vec![b(&[(1, 10), (1, 10), (1, 3)]), b(&[(9, 10), (1, 10), (1, 3)]), b(&[(9, 10), (9, 10), (1, 3)])], 1),
                (vec![b(&[(1, 10), (1, 10), (1, 3)]), b(&[(9, 10), (9, 10), (1, 3)]), b(&[(1, 10), (9, 10), (1, 3)])], 1),
            ],
        )
        .unwrap(),
    );
    add(
        "box-path",
        3,
        PLChain::from_terms(
            1,
            3,
            vec![
                seg(&b(&[(1, 10), (1, 10), (1, 10)]), &b(&[(1, 2), (1, 3), (1, 4)])),
                seg(&b(&[(1, 2), (1, 3), (1, 4)]), &b(&[(9, 10), (4, 5), (3, 4)])),
            ],
        )
        .unwrap(),
    );
    out
}

fn run_suite(seed: u64) -> Result<Vec<(String, DeformationResult)>, String> {
    let sp = spaces();
    fixtures()
        .into_iter()
        .map(|f| {
            let cfg = DeformConfig { seed, samples: LEDGER_SAMPLES, ..Default::default() };
            deform(&sp[f.space], &f.chain, &cfg).map(|r| (f.name.to_string(), r)).map_err(|e| format!("{}: {e}", f.name))
        })
        .collect()
}

fn criterion_3(first: &[(String, DeformationResult)]) -> Outcome {
    let sp = spaces();
    let fx = fixtures();
    let mut problems = Vec::new();
    let dims: std::collections::BTreeSet<usize> = fx.iter().map(|f| sp[f.space].complex.dim()).collect();
    for ((name, res), f) in first.iter().zip(&fx) {
        if !res.certificate.equal {
            problems.push(format!("{name}: certificate"));
        }
        if !res.supports.all() {
            problems.push(format!("{name}: supports {:?}", res.supports));
        }
        let space = &sp[f.space];
        let p_pl = res.p.to_pl(&space.complex).unwrap();
        let again = deform(space, &p_pl, &DeformConfig { seed: 77, ..Default::default() }).unwrap();
        if again.p != res.p || !again.r.is_zero() || !again.s.is_zero() {
            problems.push(format!("{name}: not idempotent"));
        }
    }
    // the winding fixture must snap to the face boundary
    let face = PolyChain::from_int_terms(2, vec![(vec![0, 1, 3], 1)]).boundary();
    let conc = &first[0].1.p;
    if *conc != face && *conc != face.scaled(&q(-1)) {
        problems.push("concentric-triangle: P is not the face boundary".into());
    }
    let detail = format!("{} chains on complexes of dimensions {:?}; exact certificates, supports, idempotence", first.len(), dims);
    if problems.is_empty() && first.len() >= 20 && dims.contains(&2) && dims.contains(&3) {
        Ok(detail)
    } else {
        Err(format!("{detail}; problems: {}", problems.join(", ")))
    }
}

fn criterion_4(runs: &[Vec<(String, DeformationResult)>]) -> Outcome {
    let mut all_finite = true;
    let mut suite = Vec::new();
    for run in runs {
        let mut m = [0.0f64; 4];
        for (_, r) in run {
            all_finite &= r.maxima.all_finite() && r.ledger.iter().all(|row| row.ratios.iter().all(|x| x.is_finite()));
            for (a, b) in m.iter_mut().zip(r.maxima.as_array()) {
                *a = a.max(b);
            }
        }
        suite.push(m);
    }
    let mut spread = [0.0f64; 4];
    for (i, s) in spread.iter_mut().enumerate() {
        let hi = suite.iter().map(|m| m[i]).fold(0.0, f64::max);
        let lo = suite.iter().map(|m| m[i]).fold(f64::INFINITY, f64::min);
        *s = if hi == 0.0 { 0.0 } else { hi / lo - 1.0 };
    }
    let fmt = |a: &[f64; 4]| a.iter().map(|x| format!("{x:.3}")).collect::<Vec<_>>().join("/");
    let detail = format!(
        "{LEDGER_SAMPLES} center samples; suite maxima P/T, dP/dT, S/eT, R/edT per seed: {}; spread {} (limit {LEDGER_SPREAD})",
        suite.iter().map(fmt).collect::<Vec<_>>().join(" | "),
        fmt(&spread)
    );
    if all_finite && spread.iter().all(|&s| s <= LEDGER_SPREAD) {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn block(nx: usize, i0: usize, i1: usize, j0: usize, j1: usize) -> Vec<Vec<usize>> {
    let idx = |i: usize, j: usize| j * (nx + 1) + i;
    let mut out = Vec::new();
    for j in j0..j1 {
        for i in i0..i1 {
            out.push(vec![idx(i, j), idx(i + 1, j), idx(i + 1, j + 1)]);
            out.push(vec![idx(i, j), idx(i, j + 1), idx(i + 1, j + 1)]);
        }
    }
    out
}

fn grid(n: usize) -> SimplicialComplex {
    grid_2d(n, n, &qf(1, n as i64))
}

/// Independent oracle for a disk: `∂_2` is injective, so the filling is the
/// unique solution of the linear system and its mass is `Σ w |s|`.
fn unique_filling_mass(c: &SimplicialComplex, t: &PolyChain) -> Q {
    let d = c.boundary_matrix(2).unwrap().to_dense();
    let a: Vec<Vec<Q>> = d.iter().map(|r| r.iter().map(|&v| q(v)).collect()).collect();
    let (w, _) = fill::weights(c, 2);
    match linalg::solve(&a, &t.to_vector(c).unwrap()) {
        linalg::Solution::Unique(s) => w.iter().zip(&s).map(|(a, b)| a * b.abs()).sum(),
        other => panic!("expected a unique filling, got {other:?}"),
    }
}

/// Brute-force oracle: minimum of `c·x` over all basic feasible solutions.
fn vertex_enumeration(a: &[Vec<Q>], b: &[Q], c: &[Q]) -> Option<Q> {
    let n = c.len();
    let r = linalg::rank(a);
    let mut best: Option<Q> = None;
    let mut idx: Vec<usize> = (0..r).collect();
    loop {
        let cols: Vec<Vec<Q>> = a.iter().map(|row| idx.iter().map(|&j| row[j].clone()).collect()).collect();
        if let linalg::Solution::Unique(xb) = linalg::solve(&cols, b) {
            if xb.iter().all(|v| !v.is_negative()) {
                let val: Q = idx.iter().zip(&xb).map(|(&j, v)| &c[j] * v).sum();
                if best.as_ref().is_none_or(|bst| &val < bst) {
                    best = Some(val);
                }
            }
        }
        let mut i = r;
        loop {
            if i == 0 {
                return best;
            }
            i -= 1;
            if idx[i] < n - r + i {
                idx[i] += 1;
                for j in i + 1..r {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
    }
}

fn criterion_5() -> Outcome {
    let mut problems = Vec::new();
    let tri = single_triangle();
    let face_t = region_boundary(&tri, &[vec![0, 1, 2]]);
    let face = fillvol(&tri, &face_t, FillMode::Ilp).unwrap();
    if face.value != qf(1, 2) {
        problems.push(format!("single face {}", face.value));
    }

    let g4 = grid(4);
    let outer = region_boundary(&g4, &block(4, 0, 4, 0, 4));
    let f4 = fillvol(&g4, &outer, FillMode::Lp).unwrap();
    let oracle4 = unique_filling_mass(&g4, &outer);
    if f4.value != q(1) || oracle4 != q(1) {
        problems.push(format!("4x4 outer: LP {} oracle {}", f4.value, oracle4));
    }
    let inner = region_boundary(&g4, &block(4, 1, 3, 1, 3));
    if fillvol(&g4, &inner, FillMode::Lp).unwrap().value != qf(1, 4) {
        problems.push("4x4 inner block".into());
    }
    // brute-force basic-feasible-solution enumeration on the 2x1 grid's LP
    let small = grid_2d(2, 1, &qf(1, 2));
    let ts = region_boundary(&small, small.simplices(2));
    let d = small.boundary_matrix(2).unwrap().to_dense();
    let a: Vec<Vec<Q>> = d.iter().map(|r| r.iter().map(|&v| q(v)).chain(r.iter().map(|&v| q(-v))).collect()).collect();
    let (w, _) = fill::weights(&small, 2);
    let cost: Vec<Q> = w.iter().chain(&w).cloned().collect();
    let bf = vertex_enumeration(&a, &ts.to_vector(&small).unwrap(), &cost);
    if bf.as_ref() != Some(&fillvol(&small, &ts, FillMode::Lp).unwrap().value) {
        problems.push(format!("vertex enumeration {bf:?}"));
    }

    // LP <= ILP <= cone mass, boundary feasibility
    let mut instances = 0;
    for (n, (i0, i1, j0, j1)) in [(4, (0, 4, 0, 4)), (4, (1, 3, 0, 2)), (6, (1, 5, 2, 6)), (6, (0, 3, 0, 6)), (8, (2, 7, 1, 4))] {
        let c = grid(n);
        let t = region_boundary(&c, &block(n, i0, i1, j0, j1));
        let lp = fillvol(&c, &t, FillMode::Lp).unwrap();
        let ilp = fillvol(&c, &t, FillMode::Ilp).unwrap();
        let coords = c.coords().unwrap();
        let apex = coords[j0 * (n + 1) + i0].clone();
        let cone = cone_fill(&t.to_pl(&c).unwrap(), &apex).unwrap();
        let mut oracle_s = PolyChain::zero(2);
        for (s, v) in ilp.s.terms() {
            oracle_s.add(s, v);
        }
        if !(lp.value <= ilp.value && to_f64(&ilp.value) <= cone.mass + MASS_TOL) {
            problems.push(format!("ordering on {n}x{n}: {} {} {}", lp.value, ilp.value, cone.mass));
        }
        if !(lp.boundary_verified && ilp.boundary_verified && oracle_s.boundary() == t) {
            problems.push(format!("boundary check on {n}x{n}"));
        }
        instances += 1;
    }

    let g12 = grid(12);
    let t12 = region_boundary(&g12, &block(12, 0, 12, 0, 12));
    let start = Instant::now();
    let lp12 = fillvol(&g12, &t12, FillMode::Lp).unwrap();
    let ilp12 = fillvol(&g12, &t12, FillMode::Ilp).unwrap();
    let elapsed = start.elapsed();
    if lp12.value != q(1) || ilp12.value != q(1) || elapsed > FILL_BUDGET {
        problems.push(format!("12x12: {} {} in {elapsed:?}", lp12.value, ilp12.value));
    }
    let detail = format!(
        "face 1/2, 4x4 outer {} (linear-solve oracle {}), inner 1/4, BFS enumeration {}, {instances} ordering instances, 12x12 LP+ILP {:.2}s",
        f4.value,
        oracle4,
        bf.map_or("none".into(), |v| v.to_string()),
        elapsed.as_secs_f64()
    );
    if problems.is_empty() {
        Ok(detail)
    } else {
        Err(format!("{detail}; problems: {}", problems.join(", ")))
    }
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC6);
    let c = grid(6);
    let mut violations = 0;
    let instances = 40;
    for i in 0..instances {
        let k = 1 + i % 2;
        let simplices = c.simplices(k);
        let mut t = PolyChain::zero(k);
        for _ in 0..rng.gen_range(1..=6) {
            let s = &simplices[rng.gen_range(0..simplices.len())];
            t.add(s, &q(rng.gen_range(-2..=2)));
        }
        let (w, _) = fill::weights(&c, k);
        let tv = t.to_vector(&c).unwrap();
        let weighted_mass: Q = w.iter().zip(&tv).map(|(a, b)| a * b.abs()).sum();
        let f = flat_norm(&c, &t, FillMode::Lp).unwrap();
        if f.value > weighted_mass || !f.decomposition_verified {
            violations += 1;
        }
    }
    let g8 = grid(8);
    let small = region_boundary(&g8, &block(8, 3, 5, 3, 5));
    let f = flat_norm(&g8, &small, FillMode::Lp).unwrap();
    let oracle = fillvol(&g8, &small, FillMode::Lp).unwrap().value;
    let detail = format!(
        "{instances} random chains: {violations} exceed mass; inner 2x2 cycle on 8x8 flat norm {} (fill oracle {oracle}, area 1/16)",
        f.value
    );
    if violations == 0 && f.value == qf(1, 16) && f.value == oracle && f.u.is_zero() {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn criterion_7() -> Outcome {
    let n = 20;
    let pts: Vec<Point> = (0..n)
        .flat_map(|j| (0..n).map(move |i| vec![qf(i, n - 1), qf(j, n - 1)]))
        .collect();
    let s = qf(3, 20);
    let run = || {
        let cloud = MetricPointCloud::from_coordinates(pts.clone()).unwrap();
        let cover = build_cover(&cloud, &s).unwrap();
        let nerve = build_nerve(&cover, &cloud).unwrap();
        let report = verify_structure(&nerve, &cloud, &s);
        let tau_ok = (0..cloud.len()).all(|x| tau_sum_bound_holds(&cover, x));
        (cover.sets.clone(), nerve.complex.clone(), nerve.phi0.clone(), report, tau_ok)
    };
    let a = run();
    let b = run();
    let r = &a.3;
    let finite = r.density_defect.is_finite()
        && r.quasi_isometry.is_finite()
        && r.displacement.is_some_and(f64::is_finite)
        && r.psi_lipschitz.is_finite();
    let detail = format!(
        "{} points, {} cover sets, nerve dim {}; density {:.4}, QI {:.4}, displacement {:.4}, psi-Lipschitz {:.4}; tau bound {}",
        pts.len(),
        a.0.len(),
        a.1.dim(),
        r.density_defect,
        r.quasi_isometry,
        r.displacement.unwrap_or(f64::NAN),
        r.psi_lipschitz,
        if a.4 { "holds" } else { "fails" }
    );
    if a == b && finite && a.4 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn criterion_8() -> Outcome {
    let mut problems = Vec::new();
    let y = grid(4);
    let cycles = vec![region_boundary(&y, &block(4, 0, 1, 0, 1)), region_boundary(&y, &block(4, 1, 3, 1, 4))];
    let same = undistortion_report(&y, &y, &cycles, FillMode::Lp).unwrap();
    if !same.rows.iter().all(|r| r.ratio == Some(q(1))) {
        problems.push("X = Y ratios".to_string());
    }

    let top_right = block(4, 2, 4, 2, 4);
    let keep: Vec<Vec<usize>> = y.simplices(2).iter().filter(|s| !top_right.contains(s)).cloned().collect();
    let l = y.subcomplex(&keep).unwrap();
    let l_cycles = vec![region_boundary(&y, &block(4, 0, 1, 0, 1)), region_boundary(&y, &block(4, 0, 2, 2, 4))];
    let l1 = undistortion_report(&y, &l, &l_cycles, FillMode::Ilp).unwrap();
    let l2 = undistortion_report(&y, &l, &l_cycles, FillMode::Ilp).unwrap();

    let solid = grid_3d([1, 1, 2], &q(1));
    let tets = solid.simplices(3).to_vec();
    let surface_faces: Vec<Vec<usize>> = solid
        .simplices(2)
        .iter()
        .filter(|f| tets.iter().filter(|t| gmtkit::complex::is_face(f, t)).count() == 1)
        .cloned()
        .collect();
    let surface = solid.subcomplex(&surface_faces).unwrap();
    let ring = [4usize, 5, 7, 6];
    let mut meridian = PolyChain::zero(1);
    for i in 0..4 {
        meridian.add(&[ring[i], ring[(i + 1) % 4]], &q(1));
    }
    let c1 = undistortion_report(&solid, &surface, std::slice::from_ref(&meridian), FillMode::Lp).unwrap();
    let c2 = undistortion_report(&solid, &surface, std::slice::from_ref(&meridian), FillMode::Lp).unwrap();

    let full = grid(3);
    let hole = block(3, 1, 2, 1, 2);
    let keep: Vec<Vec<usize>> = full.simplices(2).iter().filter(|s| !hole.contains(s)).cloned().collect();
    let annulus = full.subcomplex(&keep).unwrap();
    let around = region_boundary(&full, &hole);
    let obs = undistortion_report(&full, &annulus, &[around, region_boundary(&full, &block(3, 0, 1, 0, 1))], FillMode::Lp).unwrap();

    if l1 != l2 || l1.max_ratio.is_none() {
        problems.push("L-shape".into());
    }
    if c1 != c2 || c1.max_ratio.is_none() {
        problems.push("cylinder surface".into());
    }
    if obs.rows.len() != 2 || obs.rows[0].flag != RowFlag::ObstructionInX || !obs.infinite || obs.rows[1].flag != RowFlag::Ok {
        problems.push("obstruction flags".into());
    }
    let show = |r: &Option<Q>| r.as_ref().map_or("none".to_string(), |v| v.to_string());
    let detail = format!(
        "X=Y all 1; L-shape max {}; cylinder surface max {} (fill {} vs {}); annulus row flagged {:?}",
        show(&l1.max_ratio),
        show(&c1.max_ratio),
        show(&c1.rows[0].fill_x),
        show(&c1.rows[0].fill_y),
        obs.rows[0].flag
    );
    if problems.is_empty() {
        Ok(detail)
    } else {
        Err(format!("{detail}; problems: {}", problems.join(", ")))
    }
}

fn criterion_9() -> Outcome {
    let space = TriangulatedSpace::new(grid_2d(1, 1, &q(1))).unwrap();
    let t = PLChain::from_terms(
        3,
        2,
        vec![(vec![vec![q(0), q(0)], vec![q(1), q(0)], vec![q(0), q(1)], vec![q(1), q(1)]], 1)],
    )
    .unwrap();
    let res = deform(&space, &t, &DeformConfig::default()).unwrap();
    let zero = res.p.is_zero() && res.r.is_zero() && res.s.is_zero();
    match (&res.note, zero && res.certificate.equal) {
        (Some(note), true) => Ok(format!("k=3 on a 2-complex: zero triple, note: {note}")),
        _ => Err(format!("zero {zero}, note {:?}", res.note)),
    }
}

#[test]
fn acceptance() {
    let mut lines = Vec::new();
    let mut record = |n: usize, o: Outcome| {
        let line = match &o {
            Ok(d) => format!("criterion {n}: PASS ({d})"),
            Err(d) => format!("criterion {n}: FAIL ({d})"),
        };
        println!("{line}");
        lines.push((n, o.is_ok()));
    };
    record(1, criterion_1());
    record(2, criterion_2());
    let runs: Result<Vec<_>, String> = LEDGER_SEEDS.iter().map(|&s| run_suite(s)).collect();
    match runs {
        Ok(runs) => {
            record(3, criterion_3(&runs[0]));
            record(4, criterion_4(&runs));
        }
        Err(e) => {
            record(3, Err(e.clone()));
            record(4, Err(e));
        }
    }
    record(5, criterion_5());
    record(6, criterion_6());
    record(7, criterion_7());
    record(8, criterion_8());
    record(9, criterion_9());
    let failed: Vec<usize> = lines.iter().filter(|(_, ok)| !ok).map(|(n, _)| *n).collect();
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}
