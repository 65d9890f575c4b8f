//! Fast paths checked against brute-force recomputation.

use kmu_core::datagen::{gen_1d, OneDSpec};
use kmu_core::jumps::{perform_jump, select_pair, unit_random_vector, utilities};
use kmu_core::seeding::seed_kmpp;
use kmu_core::{assign, CenterSet, Dataset, JumpConfig, SeedingConfig};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn min_sq(p: &[f64], centers: &[Vec<f64>], skip: Option<usize>) -> f64 {
    centers
        .iter()
        .enumerate()
        .filter(|(j, _)| Some(*j) != skip)
        .map(|(_, c)| sq(p, c))
        .fold(f64::INFINITY, f64::min)
}

struct Instance {
    data: Dataset,
    rows: Vec<Vec<f64>>,
    centers: CenterSet,
    center_rows: Vec<Vec<f64>>,
}

fn random_instance(rng: &mut ChaCha8Rng) -> Instance {
    let n = rng.random_range(3..=200);
    let k = rng.random_range(2..=20.min(n - 1));
    let d = rng.random_range(1..=5);
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..d).map(|_| rng.random::<f64>()).collect())
        .collect();
    let data = Dataset::from_rows("rand", &rows).unwrap();
    let picks = sample(rng, n, k).into_vec();
    let centers = CenterSet::from_points(&data, &picks).unwrap();
    let center_rows = picks.iter().map(|&i| rows[i].clone()).collect();
    Instance {
        data,
        rows,
        centers,
        center_rows,
    }
}

/// Leave-one-out utilities: error with center `i` removed minus the error
/// with all centers, summed per point.
fn brute_utilities(inst: &Instance) -> Vec<f64> {
    (0..inst.center_rows.len())
        .map(|i| {
            inst.rows
                .iter()
                .map(|p| min_sq(p, &inst.center_rows, Some(i)) - min_sq(p, &inst.center_rows, None))
                .sum()
        })
        .collect()
}

fn brute_pair(u: &[f64], voronoi: &[f64]) -> (usize, usize) {
    let argmin = |skip: Option<usize>| {
        (0..u.len())
            .filter(|&i| Some(i) != skip)
            .min_by(|&a, &b| u[a].partial_cmp(&u[b]).unwrap().then(a.cmp(&b)))
            .unwrap()
    };
    let mu = (0..voronoi.len())
        .max_by(|&a, &b| voronoi[a].partial_cmp(&voronoi[b]).unwrap().then(b.cmp(&a)))
        .unwrap();
    let lambda = argmin(None);
    (
        if lambda == mu {
            argmin(Some(mu))
        } else {
            lambda
        },
        mu,
    )
}

#[test]
fn utilities_match_leave_one_out_on_100_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for case in 0..100 {
        let inst = random_instance(&mut rng);
        let part = assign(&inst.data, &inst.centers).unwrap();
        let fast = utilities(&part).unwrap();
        let brute = brute_utilities(&inst);
        for (i, (f, b)) in fast.iter().zip(&brute).enumerate() {
            let rel = (f - b).abs() / b.abs().max(f64::MIN_POSITIVE);
            assert!(
                rel <= 1e-9 || f == b,
                "case {case} center {i}: fast {f} brute {b}"
            );
        }

        // same values through the SSE of the reduced center set
        let phi: f64 = inst
            .rows
            .iter()
            .map(|p| min_sq(p, &inst.center_rows, None))
            .sum();
        for (i, f) in fast.iter().enumerate() {
            let reduced = kmu_core::sse(&inst.data, &inst.centers.without(i).unwrap()).unwrap();
            assert!(
                (reduced - phi - f).abs() <= 1e-9 * reduced.max(1.0),
                "case {case} center {i}"
            );
        }

        let voronoi: Vec<f64> = (0..inst.center_rows.len())
            .map(|j| {
                inst.rows
                    .iter()
                    .filter(|p| {
                        let best = min_sq(p, &inst.center_rows, None);
                        (0..j).all(|l| sq(p, &inst.center_rows[l]) > best)
                            && sq(p, &inst.center_rows[j]) == best
                    })
                    .map(|p| sq(p, &inst.center_rows[j]))
                    .sum()
            })
            .collect();
        assert_eq!(
            select_pair(&fast, &part),
            brute_pair(&brute, &voronoi),
            "case {case}"
        );
    }
}

#[test]
fn unit_vectors_are_uniform_in_3d() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let draws = 100_000;
    let mut sum = [0.0; 3];
    let mut positive = [0usize; 3];
    for _ in 0..draws {
        let u = unit_random_vector(3, &mut rng);
        let norm = u.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!((norm - 1.0).abs() < 1e-12);
        for j in 0..3 {
            sum[j] += u[j];
            positive[j] += usize::from(u[j] > 0.0);
        }
    }
    for j in 0..3 {
        let mean = sum[j] / draws as f64;
        let frac = positive[j] as f64 / draws as f64;
        assert!(mean.abs() <= 0.02, "coordinate {j} mean {mean}");
        assert!(
            (frac - 0.5).abs() <= 0.01,
            "coordinate {j} hemisphere {frac}"
        );
    }
}

#[test]
fn separated_1d_clusters_get_one_seed_each() {
    let spec = OneDSpec {
        g: 10,
        h: 50,
        a: 1.0,
        eta: 100.0,
    };
    let data = gen_1d(&spec).unwrap();
    let cfg = SeedingConfig::new(spec.g);
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let trials = 1000;
    let mut hits = 0;
    for _ in 0..trials {
        let seeds = seed_kmpp(&data, &cfg, &mut rng).unwrap();
        let mut covered = vec![0usize; spec.g];
        for c in seeds.centers() {
            let cluster = (0..spec.g)
                .find(|&j| {
                    let s = spec.cluster_start(j);
                    c[0] >= s && c[0] <= s + spec.a
                })
                .expect("seed is a data point");
            covered[cluster] += 1;
        }
        hits += usize::from(covered.iter().all(|&n| n == 1));
    }
    assert!(hits * 100 >= trials * 99, "{hits} of {trials}");
}

#[test]
fn jump_splits_mu_cell_by_offset_hyperplane() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..50 {
        // one wide blob plus tight satellites
        let mut rows: Vec<[f64; 2]> = (0..300)
            .map(|_| [rng.random::<f64>(), rng.random::<f64>()])
            .collect();
        for s in 0..4 {
            let base = [3.0 + s as f64, 3.0];
            rows.extend((0..20).map(|_| {
                [
                    base[0] + 1e-3 * rng.random::<f64>(),
                    base[1] + 1e-3 * rng.random::<f64>(),
                ]
            }));
        }
        let data = Dataset::from_rows("split", &rows).unwrap();
        let centers = CenterSet::from_rows(&[
            [0.5, 0.5],
            [3.0, 3.0],
            [4.0, 3.0],
            [5.0, 3.0],
            [6.0, 3.0],
            [5.5, 3.0],
        ])
        .unwrap();
        let part = assign(&data, &centers).unwrap();
        let jump =
            perform_jump(&centers, &part, &JumpConfig::new(centers.len()), &mut rng).unwrap();
        assert_eq!(jump.mu, 0);

        let old_mu = centers.center(jump.mu);
        for (a, b) in jump
            .centers
            .center(jump.lambda)
            .iter()
            .zip(old_mu)
            .zip(&jump.offset)
            .map(|((l, m), o)| (l, m + o))
        {
            assert_eq!(*a, b);
        }
        for (a, b) in jump
            .centers
            .center(jump.mu)
            .iter()
            .zip(old_mu)
            .zip(&jump.offset)
            .map(|((l, m), o)| (l, m - o))
        {
            assert_eq!(*a, b);
        }

        let after = assign(&data, &jump.centers).unwrap();
        let mut split = [0usize; 2];
        for (i, &c) in part.nearest_idx.iter().enumerate() {
            if c != jump.mu {
                continue;
            }
            let side: f64 = data
                .point(i)
                .iter()
                .zip(old_mu)
                .zip(&jump.offset)
                .map(|((x, m), o)| (x - m) * o)
                .sum();
            let now = after.nearest_idx[i];
            if side > 0.0 {
                assert_eq!(now, jump.lambda, "point {i}");
                split[0] += 1;
            } else if side < 0.0 {
                assert_eq!(now, jump.mu, "point {i}");
                split[1] += 1;
            }
        }
        assert!(split[0] > 0 && split[1] > 0);
    }
}
