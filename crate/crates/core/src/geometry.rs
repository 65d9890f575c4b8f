//! Point sets, codebooks and the nearest-center assignment shared by every
//! algorithm in the crate.
//!
//! Coordinates are stored row-major in a flat `Vec<f64>`. Only squared
//! Euclidean distances are used here.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

/// Squared Euclidean distance between two equally sized slices.
#[inline]
pub fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let t = x - y;
            t * t
        })
        .sum()
}

fn check_coords(coords: &[f64], d: usize) -> Result<usize> {
    if d == 0 {
        return Err(Error::ZeroDimension);
    }
    if coords.is_empty() {
        return Err(Error::Empty);
    }
    if coords.len() % d != 0 {
        return Err(Error::RaggedCoordinates {
            len: coords.len(),
            d,
        });
    }
    if let Some(index) = coords.iter().position(|c| !c.is_finite()) {
        return Err(Error::NonFinite { index });
    }
    Ok(coords.len() / d)
}

/// An immutable collection of `n` points in `d` dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    name: String,
    coords: Vec<f64>,
    n: usize,
    d: usize,
}

impl Dataset {
    /// Builds a dataset from row-major coordinates.
    pub fn new(name: impl Into<String>, d: usize, coords: Vec<f64>) -> Result<Self> {
        let n = check_coords(&coords, d)?;
        Ok(Self {
            name: name.into(),
            coords,
            n,
            d,
        })
    }

    pub fn from_rows<R: AsRef<[f64]>>(name: impl Into<String>, rows: &[R]) -> Result<Self> {
        let d = rows.first().map(|r| r.as_ref().len()).ok_or(Error::Empty)?;
        let mut coords = Vec::with_capacity(rows.len() * d);
        for row in rows {
            let row = row.as_ref();
            if row.len() != d {
                return Err(Error::RaggedCoordinates {
                    len: coords.len() + row.len(),
                    d,
                });
            }
            coords.extend_from_slice(row);
        }
        Self::new(name, d, coords)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Same points under a different label.
    pub fn renamed(self, name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            ..self
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.d..(i + 1) * self.d]
    }

    pub fn points(&self) -> core::slice::ChunksExact<'_, f64> {
        self.coords.chunks_exact(self.d)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.coords
    }
}

/// An ordered codebook of `k` centers. Index identity matters: ties in the
/// assignment are resolved towards the lowest index.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CenterSet {
    coords: Vec<f64>,
    k: usize,
    d: usize,
}

impl CenterSet {
    pub fn new(d: usize, coords: Vec<f64>) -> Result<Self> {
        let k = check_coords(&coords, d)?;
        Ok(Self { coords, k, d })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let data = Dataset::from_rows("", rows)?;
        Ok(Self {
            k: data.n,
            d: data.d,
            coords: data.coords,
        })
    }

    /// Copies the data points with the given indices.
    pub fn from_points(data: &Dataset, indices: &[usize]) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::Empty);
        }
        let mut coords = Vec::with_capacity(indices.len() * data.d);
        for &i in indices {
            coords.extend_from_slice(data.point(i));
        }
        Ok(Self {
            coords,
            k: indices.len(),
            d: data.d,
        })
    }

    pub fn len(&self) -> usize {
        self.k
    }

    pub fn is_empty(&self) -> bool {
        self.k == 0
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn center(&self, i: usize) -> &[f64] {
        &self.coords[i * self.d..(i + 1) * self.d]
    }

    pub(crate) fn center_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.coords[i * self.d..(i + 1) * self.d]
    }

    pub fn centers(&self) -> core::slice::ChunksExact<'_, f64> {
        self.coords.chunks_exact(self.d)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.coords
    }

    /// A copy with center `i` removed. `None` when that would leave no center.
    pub fn without(&self, i: usize) -> Option<Self> {
        if self.k < 2 {
            return None;
        }
        let mut coords = self.coords.clone();
        coords.drain(i * self.d..(i + 1) * self.d);
        Some(Self {
            coords,
            k: self.k - 1,
            d: self.d,
        })
    }
}

/// Nearest and runner-up center of every point plus per-center Voronoi
/// aggregates.
///
/// `second_idx`/`second_sqdist` are empty when there is only one center.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    pub nearest_idx: Vec<usize>,
    /// `a²` for each point.
    pub nearest_sqdist: Vec<f64>,
    pub second_idx: Vec<usize>,
    /// `b²` for each point.
    pub second_sqdist: Vec<f64>,
    pub voronoi_sse: Vec<f64>,
    pub voronoi_count: Vec<usize>,
}

impl Partition {
    pub fn has_second(&self) -> bool {
        !self.second_idx.is_empty()
    }

    /// Runner-up center and its squared distance for point `i`.
    pub fn second(&self, i: usize) -> Option<(usize, f64)> {
        self.has_second()
            .then(|| (self.second_idx[i], self.second_sqdist[i]))
    }

    /// Total SSE, summed in point order (identical to [`sse`]).
    pub fn sse(&self) -> f64 {
        self.nearest_sqdist.iter().sum()
    }

    pub fn num_centers(&self) -> usize {
        self.voronoi_sse.len()
    }
}

fn check_dims(data: &Dataset, centers: &CenterSet) -> Result<()> {
    if data.d != centers.d {
        return Err(Error::DimensionMismatch {
            data: data.d,
            centers: centers.d,
        });
    }
    Ok(())
}

#[inline]
fn nearest(point: &[f64], centers: &CenterSet) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (j, c) in centers.centers().enumerate() {
        let dist = squared_distance(point, c);
        if dist < best.1 {
            best = (j, dist);
        }
    }
    best
}

/// Summed squared error: Σₓ min_c ‖x − c‖².
pub fn sse(data: &Dataset, centers: &CenterSet) -> Result<f64> {
    check_dims(data, centers)?;
    Ok(data.points().map(|x| nearest(x, centers).1).sum())
}

/// Maps every point to its nearest center (lowest index on ties) and records
/// the runner-up when `k ≥ 2`.
pub fn assign(data: &Dataset, centers: &CenterSet) -> Result<Partition> {
    check_dims(data, centers)?;
    let n = data.len();
    let k = centers.len();
    let with_second = k >= 2;

    let mut part = Partition {
        nearest_idx: Vec::with_capacity(n),
        nearest_sqdist: Vec::with_capacity(n),
        second_idx: Vec::with_capacity(if with_second { n } else { 0 }),
        second_sqdist: Vec::with_capacity(if with_second { n } else { 0 }),
        voronoi_sse: vec![0.0; k],
        voronoi_count: vec![0; k],
    };

    for x in data.points() {
        let (mut i1, mut d1) = (usize::MAX, f64::INFINITY);
        let (mut i2, mut d2) = (usize::MAX, f64::INFINITY);
        for (j, c) in centers.centers().enumerate() {
            let dist = squared_distance(x, c);
            if dist < d1 {
                (i2, d2) = (i1, d1);
                (i1, d1) = (j, dist);
            } else if dist < d2 {
                (i2, d2) = (j, dist);
            }
        }
        part.nearest_idx.push(i1);
        part.nearest_sqdist.push(d1);
        part.voronoi_sse[i1] += d1;
        part.voronoi_count[i1] += 1;
        if with_second {
            part.second_idx.push(i2);
            part.second_sqdist.push(d2);
        }
    }
    Ok(part)
}

/// Arithmetic mean of the selected points.
pub fn centroid(data: &Dataset, members: &[usize]) -> Result<Vec<f64>> {
    if members.is_empty() {
        return Err(Error::Empty);
    }
    let mut mean = vec![0.0; data.dim()];
    for &i in members {
        for (m, x) in mean.iter_mut().zip(data.point(i)) {
            *m += x;
        }
    }
    let count = members.len() as f64;
    mean.iter_mut().for_each(|m| *m /= count);
    Ok(mean)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn line(xs: &[f64]) -> Dataset {
        Dataset::new("line", 1, xs.to_vec()).unwrap()
    }

    fn random_instance(rng: &mut ChaCha8Rng, n: usize, k: usize, d: usize) -> (Dataset, CenterSet) {
        let pts: Vec<f64> = (0..n * d).map(|_| rng.random::<f64>()).collect();
        let cs: Vec<f64> = (0..k * d).map(|_| rng.random::<f64>()).collect();
        (
            Dataset::new("rand", d, pts).unwrap(),
            CenterSet::new(d, cs).unwrap(),
        )
    }

    #[test]
    fn sse_two_points_one_center() {
        let data = Dataset::from_rows("p", &[[0.0, 0.0], [2.0, 0.0]]).unwrap();
        let centers = CenterSet::from_rows(&[[1.0, 0.0]]).unwrap();
        assert_eq!(sse(&data, &centers).unwrap(), 2.0);
    }

    #[test]
    fn sse_zero_when_centers_are_the_points() {
        let data = Dataset::from_rows("p", &[[0.5, 1.0], [2.0, -3.0], [7.0, 7.0]]).unwrap();
        let centers = CenterSet::new(2, data.as_slice().to_vec()).unwrap();
        assert_eq!(sse(&data, &centers).unwrap(), 0.0);
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let data = line(&[0.0, 1.0]);
        let centers = CenterSet::from_rows(&[[0.0, 0.0]]).unwrap();
        let err = Error::DimensionMismatch {
            data: 1,
            centers: 2,
        };
        assert_eq!(sse(&data, &centers), Err(err.clone()));
        assert_eq!(assign(&data, &centers), Err(err));
    }

    #[test]
    fn construction_rejects_bad_input() {
        assert_eq!(Dataset::new("x", 0, vec![1.0]), Err(Error::ZeroDimension));
        assert_eq!(Dataset::new("x", 2, vec![]), Err(Error::Empty));
        assert!(matches!(
            Dataset::new("x", 2, vec![1.0, 2.0, 3.0]),
            Err(Error::RaggedCoordinates { .. })
        ));
        assert_eq!(
            Dataset::new("x", 1, vec![1.0, f64::NAN]),
            Err(Error::NonFinite { index: 1 })
        );
    }

    #[test]
    fn assign_simple_line() {
        let part = assign(
            &line(&[0.0, 10.0]),
            &CenterSet::new(1, vec![1.0, 9.0]).unwrap(),
        )
        .unwrap();
        assert_eq!(part.nearest_idx, [0, 1]);
        assert_eq!(part.second_idx, [1, 0]);
        assert_eq!(part.nearest_sqdist, [1.0, 1.0]);
        assert_eq!(part.second_sqdist, [81.0, 81.0]);
    }

    #[test]
    fn ties_go_to_lowest_index() {
        let part = assign(
            &line(&[5.0]),
            &CenterSet::new(1, vec![4.0, 6.0, 5.0 + 1.0]).unwrap(),
        )
        .unwrap();
        assert_eq!(part.nearest_idx, [0]);
        assert_eq!(part.second_idx, [1]);
        assert_eq!(part.nearest_sqdist, part.second_sqdist);
    }

    #[test]
    fn single_center_has_no_runner_up() {
        let part = assign(&line(&[0.0, 3.0]), &CenterSet::new(1, vec![1.0]).unwrap()).unwrap();
        assert!(!part.has_second());
        assert_eq!(part.second(0), None);
        assert_eq!(part.voronoi_count, [2]);
        assert_eq!(part.voronoi_sse, [5.0]);
    }

    #[test]
    fn assign_matches_exhaustive_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(20);
        let (data, centers) = random_instance(&mut rng, 20, 4, 3);
        let part = assign(&data, &centers).unwrap();
        for (i, x) in data.points().enumerate() {
            // sort every (distance, index) pair; lexicographic order encodes the tie rule
            let mut all: Vec<(f64, usize)> = centers
                .centers()
                .enumerate()
                .map(|(j, c)| (squared_distance(x, c), j))
                .collect();
            all.sort_by(|a, b| a.partial_cmp(b).unwrap());
            assert_eq!((part.nearest_sqdist[i], part.nearest_idx[i]), all[0]);
            assert_eq!((part.second_sqdist[i], part.second_idx[i]), all[1]);
        }
    }

    #[test]
    fn centroid_cases() {
        let data = Dataset::from_rows("p", &[[0.0, 0.0], [2.0, 0.0], [3.0, 4.5]]).unwrap();
        assert_eq!(centroid(&data, &[0, 1]).unwrap(), [1.0, 0.0]);
        assert_eq!(centroid(&data, &[2]).unwrap(), [3.0, 4.5]);
        assert_eq!(centroid(&data, &[]), Err(Error::Empty));
    }

    #[test]
    fn without_removes_one_center() {
        let cs = CenterSet::new(1, vec![1.0, 2.0, 3.0]).unwrap();
        assert_eq!(cs.without(1).unwrap().as_slice(), [1.0, 3.0]);
        assert!(CenterSet::new(1, vec![1.0]).unwrap().without(0).is_none());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;
        use rand::Rng;

        fn instance() -> impl Strategy<Value = (Dataset, CenterSet)> {
            (1usize..=4, 1usize..=200, 1usize..=20).prop_flat_map(|(d, n, k)| {
                (
                    proptest::collection::vec(-10.0f64..10.0, n * d),
                    proptest::collection::vec(-10.0f64..10.0, k * d),
                )
                    .prop_map(move |(p, c)| {
                        (
                            Dataset::new("p", d, p).unwrap(),
                            CenterSet::new(d, c).unwrap(),
                        )
                    })
            })
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn partition_aggregates_are_consistent((data, centers) in instance()) {
                let part = assign(&data, &centers).unwrap();
                let total = sse(&data, &centers).unwrap();
                prop_assert_eq!(part.sse(), total);
                let by_center: f64 = part.voronoi_sse.iter().sum();
                prop_assert!((by_center - total).abs() <= 1e-9 * total.max(f64::MIN_POSITIVE));
                prop_assert_eq!(part.voronoi_count.iter().sum::<usize>(), data.len());
                for (i, x) in data.points().enumerate() {
                    let brute = centers.centers().map(|c| squared_distance(x, c)).fold(f64::INFINITY, f64::min);
                    prop_assert_eq!(part.nearest_sqdist[i], brute);
                    if let Some((j, b2)) = part.second(i) {
                        prop_assert!(part.nearest_sqdist[i] <= b2);
                        prop_assert_ne!(j, part.nearest_idx[i]);
                    }
                }
            }

            #[test]
            fn assignment_follows_center_permutation((data, centers) in instance(), seed in any::<u64>()) {
                let k = centers.len();
                let mut perm: Vec<usize> = (0..k).collect();
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                for i in (1..k).rev() {
                    perm.swap(i, rng.random_range(0..=i));
                }
                let rows: Vec<&[f64]> = perm.iter().map(|&j| centers.center(j)).collect();
                let permuted = CenterSet::from_rows(&rows).unwrap();
                let a = assign(&data, &centers).unwrap();
                let b = assign(&data, &permuted).unwrap();
                for i in 0..data.len() {
                    let orig = perm[b.nearest_idx[i]];
                    if orig != a.nearest_idx[i] {
                        // only a tie may resolve differently
                        prop_assert_eq!(a.nearest_sqdist[i], squared_distance(data.point(i), centers.center(orig)));
                    }
                    prop_assert_eq!(a.nearest_sqdist[i], b.nearest_sqdist[i]);
                }
            }
        }
    }
}
