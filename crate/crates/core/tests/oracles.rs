//! Cross-checks of the optimized computation paths against independent,
//! deliberately naive reference implementations.

use num_complex::Complex64;

use uptorus::kernels;
use uptorus::lattice::{CoeffMap, Direction, LatticeIndex};
use uptorus::localization::{min_var_directional, thread_decompose, SupportSet};
use uptorus::numeric::SplitMix64;
use uptorus::uncertainty::{closed_form_up, up_directional, up_gg, ClosedForm, UpStatus};

/// Brute-force directional uncertainty product straight from the definition:
/// sorted iteration, plain summation, no shared code with the library path.
fn up_directional_naive(f: &CoeffMap, l: &[i64]) -> Option<f64> {
    let entries: Vec<(Vec<i64>, Complex64)> = {
        let mut v: Vec<_> = f.iter().map(|(k, c)| (k.coords.clone(), *c)).collect();
        v.sort_by(|a, b| a.0.cmp(&b.0));
        v
    };
    let norm_sq: f64 = entries.iter().map(|(_, c)| c.norm_sqr()).sum();
    let mut corr = Complex64::ZERO;
    for (k, c) in &entries {
        let km: Vec<i64> = k.iter().zip(l).map(|(a, b)| a - b).collect();
        corr += f.get(&km) * c.conj();
    }
    if corr.norm() == 0.0 {
        return None;
    }
    let dot = |k: &[i64]| -> f64 { k.iter().zip(l).map(|(a, b)| (a * b) as f64).sum() };
    let m1: f64 = entries.iter().map(|(k, c)| dot(k) * c.norm_sqr()).sum();
    let m2: f64 = entries.iter().map(|(k, c)| dot(k) * dot(k) * c.norm_sqr()).sum();
    let mean = m1 / norm_sq;
    let var_f = m2 / norm_sq - mean * mean;
    let var_a = (norm_sq / corr.norm()).powi(2) - 1.0;
    let lsq: f64 = l.iter().map(|&x| (x * x) as f64).sum();
    Some(var_a * var_f / (lsq * lsq))
}

fn random_map(rng: &mut SplitMix64, dim: usize, count: usize, radius: i64) -> CoeffMap {
    let entries = (0..count).map(|_| {
        let k: Vec<i64> = (0..dim).map(|_| rng.next_range(-radius, radius)).collect();
        (
            LatticeIndex::new(k),
            Complex64::new(rng.next_normal(), rng.next_normal()),
        )
    });
    CoeffMap::from_entries(dim, entries).unwrap()
}

#[test]
fn up_matches_naive_on_random_maps() {
    let mut rng = SplitMix64::new(11);
    for _ in 0..50 {
        let f = random_map(&mut rng, 2, 14, 5);
        if f.is_empty() {
            continue;
        }
        let l = loop {
            let v = vec![rng.next_range(-2, 2), rng.next_range(-2, 2)];
            if v.iter().any(|&x| x != 0) {
                break v;
            }
        };
        let fast = up_directional(&f, &Direction::new(l.clone()).unwrap()).unwrap();
        match up_directional_naive(&f, &l) {
            Some(naive) if fast.status == UpStatus::Finite => {
                let got = fast.up.unwrap();
                assert!(
                    (got - naive).abs() <= 1e-11 * naive.abs().max(1.0),
                    "L={l:?}: {got} vs naive {naive}"
                );
            }
            _ => {}
        }
    }
}

#[test]
fn up_matches_naive_on_kernels() {
    let l = Direction::new(vec![1, 1]).unwrap();
    for f in [
        kernels::dirichlet_rect(&LatticeIndex::new(vec![3, 4])).unwrap(),
        kernels::fejer_inf(6, 2).unwrap(),
        kernels::powered_cos(7, &l).unwrap(),
        kernels::fejer_along(9, &l, None).unwrap(),
    ] {
        let fast = up_directional(&f, &l).unwrap().up.unwrap();
        let naive = up_directional_naive(&f, &[1, 1]).unwrap();
        assert!((fast - naive).abs() <= 1e-12 * naive.max(1.0));
    }
}

#[test]
fn gg_dirichlet_matches_closed_form() {
    // UP_GG(D_N) = (d - sum (1 - 1/(2N_j+1))^2) / (sum (1 - 1/(2N_j+1)))^2
    //              * sum N_j(N_j+1)/3
    for n in [vec![1i64, 1], vec![2, 3], vec![4, 2], vec![5, 5]] {
        let f = kernels::dirichlet_rect(&LatticeIndex::new(n.clone())).unwrap();
        let got = up_gg(&f).unwrap().up.unwrap();
        let d = n.len() as f64;
        let mut corr_sum = 0.0;
        let mut corr_sq = 0.0;
        let mut var_f = 0.0;
        for &nj in &n {
            let c = 1.0 - 1.0 / (2.0 * nj as f64 + 1.0);
            corr_sum += c;
            corr_sq += c * c;
            var_f += (nj * (nj + 1)) as f64 / 3.0;
        }
        let expect = (d - corr_sq) / (corr_sum * corr_sum) * var_f;
        assert!(
            (got - expect).abs() <= 1e-12 * expect,
            "N={n:?}: {got} vs {expect}"
        );
    }
}

#[test]
fn dirichlet_directional_matches_closed_form_grid() {
    for n in [vec![1i64, 2], vec![3, 3], vec![6, 4]] {
        let nn = LatticeIndex::new(n.clone());
        let f = kernels::dirichlet_rect(&nn).unwrap();
        for lx in -2i64..=2 {
            for ly in -2i64..=2 {
                if lx == 0 && ly == 0 {
                    continue;
                }
                let l = Direction::new(vec![lx, ly]).unwrap();
                let got = up_directional(&f, &l).unwrap().up.unwrap();
                let expect =
                    closed_form_up(&ClosedForm::DirichletRect { n: nn.clone(), l }).unwrap();
                assert!(
                    (got - expect).abs() <= 1e-10 * expect.max(1.0),
                    "N={n:?} L=({lx},{ly}): {got} vs {expect}"
                );
            }
        }
    }
}

/// Exhaustive progression enumeration, independent of the walk in
/// thread_decompose: for every point and both endpoints checks maximality.
fn threads_naive(points: &[Vec<i64>], l: &[i64]) -> Vec<usize> {
    let set: std::collections::BTreeSet<Vec<i64>> = points.iter().cloned().collect();
    let sub = |a: &[i64]| -> Vec<i64> { a.iter().zip(l).map(|(x, y)| x - y).collect() };
    let add = |a: &[i64]| -> Vec<i64> { a.iter().zip(l).map(|(x, y)| x + y).collect() };
    let mut lens = vec![];
    for p in &set {
        if set.contains(&sub(p)) {
            continue;
        }
        let mut len = 1;
        let mut cur = add(p);
        while set.contains(&cur) {
            len += 1;
            cur = add(&cur);
        }
        lens.push(len);
    }
    lens.sort_unstable_by(|a, b| b.cmp(a));
    lens
}

#[test]
fn thread_decomposition_matches_enumeration() {
    let mut rng = SplitMix64::new(5);
    for _ in 0..40 {
        let dim = 1 + (rng.next_u64() % 3) as usize;
        let count = 2 + (rng.next_u64() % 40) as usize;
        let pts: Vec<Vec<i64>> = (0..count)
            .map(|_| (0..dim).map(|_| rng.next_range(-4, 4)).collect())
            .collect();
        let l: Vec<i64> = loop {
            let v: Vec<i64> = (0..dim).map(|_| rng.next_range(-2, 2)).collect();
            if v.iter().any(|&x| x != 0) {
                break v;
            }
        };
        let s = SupportSet::new(dim, pts.iter().cloned().map(LatticeIndex::new).collect()).unwrap();
        let threads = thread_decompose(&s, &Direction::new(l.clone()).unwrap()).unwrap();
        let mut got: Vec<usize> = threads.iter().map(|t| t.len()).collect();
        got.sort_unstable_by(|a, b| b.cmp(a));
        let expect = threads_naive(
            &s.points().iter().map(|p| p.coords.clone()).collect::<Vec<_>>(),
            &l,
        );
        assert_eq!(got, expect);
        assert_eq!(got.iter().sum::<usize>(), s.len());
    }
}

#[test]
fn random_unit_vectors_never_beat_the_extremal_correlation() {
    // Rayleigh quotient of the thread adjacency form stays below
    // cos(pi/(m0+2)) for arbitrary unit coefficient vectors on the support
    let s = SupportSet::cube(&LatticeIndex::new(vec![3, 3])).unwrap();
    let l = Direction::new(vec![1, 0]).unwrap();
    let sol = min_var_directional(&s, &l, false).unwrap();
    let lambda_max = (std::f64::consts::PI / (sol.m0 as f64 + 2.0)).cos();

    let pts: Vec<&LatticeIndex> = s.points().iter().collect();
    let mut rng = SplitMix64::new(404);
    for _ in 0..1000 {
        let c: Vec<f64> = (0..pts.len()).map(|_| rng.next_normal()).collect();
        let norm_sq: f64 = c.iter().map(|x| x * x).sum();
        let mut corr = 0.0;
        for (i, p) in pts.iter().enumerate() {
            let q = p.add(l.coords());
            if let Some(j) = pts.iter().position(|r| **r == q) {
                corr += c[i] * c[j];
            }
        }
        assert!(corr.abs() / norm_sq <= lambda_max + 1e-12);
    }
}

#[test]
fn min_var_beats_random_search_never_by_much() {
    // randomized Rayleigh check on a support with known m0
    let s = SupportSet::cube(&LatticeIndex::new(vec![2, 2])).unwrap();
    let l = Direction::new(vec![1, 0]).unwrap();
    let sol = min_var_directional(&s, &l, false).unwrap();
    let lam = uptorus::localization::rayleigh_max_search(&s, &l, 2000, 99).unwrap();
    let var_found = 1.0 / (lam * lam) - 1.0;
    assert!(var_found >= sol.var_angular - 1e-9);
}

#[test]
fn powered_cos_norm_matches_double_factorial_sequence() {
    // ||p_n||^2 = I_{2n} with I_m = (2m-1)!!/m!, checked by recurrence
    let l = Direction::new(vec![1]).unwrap();
    let mut i_m = 1.0f64; // I_0
    let mut values = vec![i_m];
    for m in 1..=40i64 {
        i_m *= (2 * m - 1) as f64 / m as f64;
        values.push(i_m);
    }
    for n in [1usize, 2, 5, 12, 20] {
        let p = kernels::powered_cos(n as u32, &l).unwrap();
        let expect = values[2 * n];
        assert!((p.squared_norm() - expect).abs() <= 1e-12 * expect);
    }
}

#[test]
fn fejer_norm_matches_odd_power_sums() {
    // ||F_n||^2 = 2 S(d,n)/n - S(d+1,n)/n^2 with S(d,n) = sum_{j<n} (2j+1)^d
    for (d, n) in [(1usize, 6u32), (2, 5), (3, 4)] {
        let f = kernels::fejer_inf(n, d).unwrap();
        let s = |p: usize| -> f64 { (0..n as i64).map(|j| ((2 * j + 1) as f64).powi(p as i32)).sum() };
        let expect = 2.0 * s(d) / n as f64 - s(d + 1) / (n as f64 * n as f64);
        assert!((f.squared_norm() - expect).abs() < 1e-10 * expect);
    }
}
