//! The discrete six-dimensional board-configuration space.
//!
//! Every dimension is an ordered list of physical levels. Inputs are stored
//! as level indices; networks see them through [`InputSpace::normalize`],
//! which maps index `0` to `-1` and the last index to `1`.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DIMS: usize = 6;

/// Canonical dimension order.
pub const DIMENSION_NAMES: [&str; DIMS] = [
    "big_cpus",
    "big_freq",
    "big_util",
    "little_cpus",
    "little_freq",
    "little_util",
];

pub const BIG_CPUS: usize = 0;
pub const BIG_FREQ: usize = 1;
pub const BIG_UTIL: usize = 2;
pub const LITTLE_CPUS: usize = 3;
pub const LITTLE_FREQ: usize = 4;
pub const LITTLE_UTIL: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dimension {
    pub name: String,
    pub levels: Vec<f64>,
}

impl Dimension {
    pub fn new(name: impl Into<String>, levels: Vec<f64>) -> Result<Self> {
        let name = name.into();
        if levels.is_empty() {
            return Err(Error::contract(format!("dimension `{name}` has no levels")));
        }
        if levels.iter().any(|v| !v.is_finite()) {
            return Err(Error::contract(format!("dimension `{name}` has a non-finite level")));
        }
        if levels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::contract(format!(
                "levels of dimension `{name}` must be strictly increasing"
            )));
        }
        Ok(Self { name, levels })
    }

    /// `count` levels `start, start + step, ...`.
    fn stepped(name: &str, start: f64, step: f64, count: usize) -> Self {
        let levels = (0..count).map(|i| start + step * i as f64).collect();
        Self::new(name, levels).expect("stepped levels are increasing")
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn max(&self) -> f64 {
        *self.levels.last().expect("non-empty by construction")
    }

    /// Normalized coordinate of level `index`.
    #[inline]
    fn normalized(&self, index: usize) -> f64 {
        let n = self.levels.len();
        if n == 1 {
            0.0
        } else {
            -1.0 + 2.0 * index as f64 / (n - 1) as f64
        }
    }
}

/// A point of the space, as one level index per dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TestInput(pub [usize; DIMS]);

impl TestInput {
    pub fn indices(&self) -> &[usize; DIMS] {
        &self.0
    }
}

/// A point of `[-1, 1]^6`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizedInput(pub [f64; DIMS]);

impl NormalizedInput {
    pub fn new(vector: [f64; DIMS]) -> Result<Self> {
        if vector.iter().any(|v| !(-1.0..=1.0).contains(v)) {
            return Err(Error::contract(format!(
                "normalized input {vector:?} leaves [-1, 1]"
            )));
        }
        Ok(Self(vector))
    }

    /// Builds from a network output row, clamping into `[-1, 1]`.
    pub fn from_slice_clamped(row: &[f64]) -> Self {
        let mut v = [0.0; DIMS];
        for (dst, src) in v.iter_mut().zip(row) {
            *dst = src.clamp(-1.0, 1.0);
        }
        Self(v)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InputSpace {
    dims: Vec<Dimension>,
}

impl InputSpace {
    pub fn new(dims: Vec<Dimension>) -> Result<Self> {
        if dims.len() != DIMS {
            return Err(Error::contract(format!(
                "input space needs exactly {DIMS} dimensions, got {}",
                dims.len()
            )));
        }
        let dims = dims
            .into_iter()
            .map(|d| Dimension::new(d.name, d.levels))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { dims })
    }

    /// Synthetic big.LITTLE analog: 5 × 19 × 10 × 5 × 14 × 10 = 665,000 points.
    pub fn default_board() -> Self {
        Self {
            dims: vec![
                Dimension::stepped("big_cpus", 0.0, 1.0, 5),
                Dimension::stepped("big_freq", 200.0, 100.0, 19),
                Dimension::new("big_util", utilization_levels()).expect("valid"),
                Dimension::stepped("little_cpus", 0.0, 1.0, 5),
                Dimension::stepped("little_freq", 200.0, 100.0, 14),
                Dimension::new("little_util", utilization_levels()).expect("valid"),
            ],
        }
    }

    pub fn dims(&self) -> &[Dimension] {
        &self.dims
    }

    pub fn level_counts(&self) -> [usize; DIMS] {
        std::array::from_fn(|i| self.dims[i].len())
    }

    pub fn cardinality(&self) -> usize {
        self.dims.iter().map(Dimension::len).product()
    }

    pub fn contains(&self, input: &TestInput) -> bool {
        input.0.iter().zip(&self.dims).all(|(&i, d)| i < d.len())
    }

    fn check(&self, input: &TestInput) -> Result<()> {
        if self.contains(input) {
            Ok(())
        } else {
            Err(Error::contract(format!(
                "input {:?} is outside a space with level counts {:?}",
                input.0,
                self.level_counts()
            )))
        }
    }

    /// Physical level values of an input.
    pub fn values(&self, input: &TestInput) -> Result<[f64; DIMS]> {
        self.check(input)?;
        Ok(std::array::from_fn(|i| self.dims[i].levels[input.0[i]]))
    }

    pub fn normalize(&self, input: &TestInput) -> Result<NormalizedInput> {
        self.check(input)?;
        Ok(NormalizedInput(std::array::from_fn(|i| {
            self.dims[i].normalized(input.0[i])
        })))
    }

    /// Nearest grid point per dimension; exact midpoints go to the lower index.
    pub fn snap(&self, vector: &NormalizedInput) -> TestInput {
        TestInput(std::array::from_fn(|i| {
            let n = self.dims[i].len();
            if n == 1 {
                return 0;
            }
            let pos = (vector.0[i].clamp(-1.0, 1.0) + 1.0) * 0.5 * (n - 1) as f64;
            let lower = pos.floor();
            let idx = if pos - lower > 0.5 { lower + 1.0 } else { lower };
            (idx as usize).min(n - 1)
        }))
    }

    /// Row-major linear index, last dimension fastest.
    pub fn linear_index(&self, input: &TestInput) -> usize {
        input
            .0
            .iter()
            .zip(&self.dims)
            .fold(0, |acc, (&i, d)| acc * d.len() + i)
    }

    pub fn from_linear(&self, mut index: usize) -> TestInput {
        let mut out = [0; DIMS];
        for (slot, d) in out.iter_mut().zip(&self.dims).rev() {
            *slot = index % d.len();
            index /= d.len();
        }
        TestInput(out)
    }

    /// All inputs in lexicographic order of their level indices.
    pub fn enumerate(&self) -> impl Iterator<Item = TestInput> + '_ {
        (0..self.cardinality()).map(move |i| self.from_linear(i))
    }

    /// `k` distinct inputs drawn uniformly without replacement from the
    /// space minus `exclude`.
    pub fn sample_uniform<R: Rng + ?Sized>(
        &self,
        exclude: &HashSet<TestInput>,
        k: usize,
        rng: &mut R,
    ) -> Result<Vec<TestInput>> {
        let total = self.cardinality();
        let excluded = exclude.iter().filter(|t| self.contains(t)).count();
        let available = total - excluded;
        if k > available {
            return Err(Error::Exhausted {
                requested: k,
                available,
            });
        }
        if k == 0 {
            return Ok(Vec::new());
        }
        if k.saturating_mul(4) <= available {
            // Sparse request: rejection sampling over linear indices.
            let mut chosen = HashSet::with_capacity(k);
            let mut out = Vec::with_capacity(k);
            while out.len() < k {
                let t = self.from_linear(rng.gen_range(0..total));
                if !exclude.contains(&t) && chosen.insert(t) {
                    out.push(t);
                }
            }
            Ok(out)
        } else {
            let mut pool: Vec<TestInput> = self.enumerate().filter(|t| !exclude.contains(t)).collect();
            let (picked, _) = pool.partial_shuffle(rng, k);
            Ok(picked.to_vec())
        }
    }

    /// A non-excluded grid point near `vector`: its snap if free, otherwise
    /// the Euclidean-closest free point on the smallest Chebyshev ring (in
    /// level steps) around the snap that has one. Ties go to the
    /// lexicographically smaller input. `None` when every point is excluded.
    pub fn nearest_excluding(
        &self,
        vector: &NormalizedInput,
        exclude: &HashSet<TestInput>,
    ) -> Option<TestInput> {
        let center = self.snap(vector);
        if !exclude.contains(&center) {
            return Some(center);
        }
        let counts = self.level_counts();
        let max_radius = counts.iter().copied().max().unwrap_or(1);
        for radius in 1..max_radius {
            let lo: [usize; DIMS] = std::array::from_fn(|i| center.0[i].saturating_sub(radius));
            let hi: [usize; DIMS] = std::array::from_fn(|i| (center.0[i] + radius).min(counts[i] - 1));
            let mut best: Option<(f64, TestInput)> = None;
            let mut cur = lo;
            loop {
                let on_ring = (0..DIMS).any(|i| cur[i].abs_diff(center.0[i]) == radius);
                let t = TestInput(cur);
                if on_ring && !exclude.contains(&t) {
                    let d = self.distance_sq(vector, &t);
                    if best.is_none_or(|(bd, bt)| d < bd || (d == bd && t < bt)) {
                        best = Some((d, t));
                    }
                }
                if !advance(&mut cur, &lo, &hi) {
                    break;
                }
            }
            if let Some((_, t)) = best {
                return Some(t);
            }
        }
        None
    }

    fn distance_sq(&self, vector: &NormalizedInput, input: &TestInput) -> f64 {
        (0..DIMS)
            .map(|i| {
                let d = self.dims[i].normalized(input.0[i]) - vector.0[i];
                d * d
            })
            .sum()
    }
}

/// Odometer step over the box `lo..=hi`; false once it wraps around.
fn advance(cur: &mut [usize; DIMS], lo: &[usize; DIMS], hi: &[usize; DIMS]) -> bool {
    for d in (0..DIMS).rev() {
        if cur[d] < hi[d] {
            cur[d] += 1;
            return true;
        }
        cur[d] = lo[d];
    }
    false
}

fn utilization_levels() -> Vec<f64> {
    (1..=10).map(|i| i as f64 / 10.0).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    pub(crate) fn grid(counts: [usize; DIMS]) -> InputSpace {
        InputSpace::new(
            counts
                .iter()
                .zip(DIMENSION_NAMES)
                .map(|(&n, name)| Dimension::new(name, (0..n).map(|i| i as f64).collect()).unwrap())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn cardinality_examples() {
        assert_eq!(InputSpace::default_board().cardinality(), 665_000);
        assert_eq!(InputSpace::default_board().level_counts(), [5, 19, 10, 5, 14, 10]);
        assert_eq!(grid([1; DIMS]).cardinality(), 1);
        assert_eq!(grid([2; DIMS]).cardinality(), 64);
    }

    #[test]
    fn default_board_levels() {
        let s = InputSpace::default_board();
        assert_eq!(s.dims()[BIG_FREQ].levels.first(), Some(&200.0));
        assert_eq!(s.dims()[BIG_FREQ].max(), 2000.0);
        assert_eq!(s.dims()[LITTLE_FREQ].max(), 1500.0);
        assert_eq!(s.dims()[BIG_UTIL].levels[0], 0.1);
        assert_eq!(s.dims()[LITTLE_UTIL].max(), 1.0);
    }

    #[test]
    fn construction_errors() {
        assert!(Dimension::new("x", vec![]).is_err());
        assert!(Dimension::new("x", vec![1.0, 1.0]).is_err());
        assert!(Dimension::new("x", vec![2.0, 1.0]).is_err());
        let five = (0..5).map(|i| Dimension::new(format!("d{i}"), vec![0.0]).unwrap()).collect();
        assert!(InputSpace::new(five).is_err());
    }

    #[test]
    fn normalize_endpoints_and_midpoint() {
        let s = grid([5, 3, 2, 5, 4, 7]);
        assert_eq!(s.normalize(&TestInput([0; DIMS])).unwrap().0, [-1.0; DIMS]);
        assert_eq!(s.normalize(&TestInput([4, 2, 1, 4, 3, 6])).unwrap().0, [1.0; DIMS]);
        assert_eq!(s.normalize(&TestInput([2, 0, 0, 0, 0, 0])).unwrap().0[0], 0.0);
        assert_eq!(grid([1; DIMS]).normalize(&TestInput([0; DIMS])).unwrap().0, [0.0; DIMS]);
        assert!(matches!(
            s.normalize(&TestInput([5, 0, 0, 0, 0, 0])),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn snap_endpoints_and_ties() {
        let s = grid([2, 3, 5, 1, 4, 19]);
        assert_eq!(s.snap(&NormalizedInput([-1.0; DIMS])), TestInput([0; DIMS]));
        assert_eq!(s.snap(&NormalizedInput([1.0; DIMS])), TestInput([1, 2, 4, 0, 3, 18]));
        // midpoint of a 2-level dimension resolves downward
        assert_eq!(s.snap(&NormalizedInput([0.0; DIMS])).0[0], 0);
        // 3 levels at -1, 0, 1: -0.5 is a tie between 0 and 1
        let t = s.snap(&NormalizedInput([0.0, -0.5, 0.0, 0.0, 0.0, 0.0]));
        assert_eq!(t.0[1], 0);
        let t = s.snap(&NormalizedInput([0.0, -0.49, 0.0, 0.0, 0.0, 0.0]));
        assert_eq!(t.0[1], 1);
    }

    #[test]
    fn snap_normalize_round_trip_exhaustive() {
        for counts in [[2; DIMS], [3, 1, 4, 2, 5, 2], [5, 19, 1, 1, 14, 1]] {
            let s = grid(counts);
            for t in s.enumerate() {
                assert_eq!(s.snap(&s.normalize(&t).unwrap()), t);
            }
        }
    }

    #[test]
    fn enumerate_is_lexicographic_and_complete() {
        let s = grid([2, 1, 1, 1, 1, 1]);
        let all: Vec<_> = s.enumerate().collect();
        assert_eq!(all, vec![TestInput([0; DIMS]), TestInput([1, 0, 0, 0, 0, 0])]);

        let s = grid([3, 2, 1, 2, 3, 2]);
        let all: Vec<_> = s.enumerate().collect();
        assert_eq!(all.len(), s.cardinality());
        assert!(all.windows(2).all(|w| w[0] < w[1]));
        for (i, t) in all.iter().enumerate() {
            assert_eq!(s.linear_index(t), i);
        }
    }

    #[test]
    fn sample_forced_choice() {
        let s = grid([2; DIMS]);
        let keep = TestInput([1, 0, 1, 0, 1, 0]);
        let exclude: HashSet<_> = s.enumerate().filter(|t| *t != keep).collect();
        let got = s.sample_uniform(&exclude, 1, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        assert_eq!(got, vec![keep]);
        assert!(matches!(
            s.sample_uniform(&exclude, 2, &mut ChaCha8Rng::seed_from_u64(0)),
            Err(Error::Exhausted { requested: 2, available: 1 })
        ));
    }

    #[test]
    fn sample_whole_space_is_permutation() {
        let s = grid([2; DIMS]);
        let mut got = s
            .sample_uniform(&HashSet::new(), 64, &mut ChaCha8Rng::seed_from_u64(1))
            .unwrap();
        got.sort();
        assert_eq!(got, s.enumerate().collect::<Vec<_>>());
    }

    #[test]
    fn single_draw_frequencies_are_uniform() {
        // Binomial(10000, 1/64): mean 156.25, sd ≈ 12.40
        let s = grid([2; DIMS]);
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let mut counts = [0usize; 64];
        let n = 10_000;
        for _ in 0..n {
            let t = s.sample_uniform(&HashSet::new(), 1, &mut rng).unwrap()[0];
            counts[s.linear_index(&t)] += 1;
        }
        let p = 1.0 / 64.0;
        let mean = n as f64 * p;
        let sd = (n as f64 * p * (1.0 - p)).sqrt();
        for c in counts {
            assert!((c as f64 - mean).abs() <= 5.0 * sd, "count {c}");
        }
    }

    #[test]
    fn nearest_excluding_prefers_snap_then_neighbours() {
        let s = grid([5; DIMS]);
        let v = NormalizedInput([1.0; DIMS]);
        let corner = TestInput([4; DIMS]);
        assert_eq!(s.nearest_excluding(&v, &HashSet::new()), Some(corner));
        let exclude: HashSet<_> = [corner].into();
        let next = s.nearest_excluding(&v, &exclude).unwrap();
        assert_eq!(next.0.iter().filter(|&&i| i == 3).count(), 1);
        assert_eq!(next, TestInput([3, 4, 4, 4, 4, 4]));

        let tiny = grid([1; DIMS]);
        let all: HashSet<_> = tiny.enumerate().collect();
        assert_eq!(tiny.nearest_excluding(&NormalizedInput([0.0; DIMS]), &all), None);
    }

    #[test]
    fn nearest_excluding_matches_ring_brute_force() {
        let s = grid([3, 2, 4, 2, 3, 2]);
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..50 {
            let exclude: HashSet<_> = s
                .sample_uniform(&HashSet::new(), 60, &mut rng)
                .unwrap()
                .into_iter()
                .collect();
            let v = NormalizedInput(std::array::from_fn(|_| rng.gen_range(-1.0..=1.0)));
            let got = s.nearest_excluding(&v, &exclude).unwrap();
            let center = s.snap(&v);
            let ring = |t: &TestInput| (0..DIMS).map(|i| t.0[i].abs_diff(center.0[i])).max().unwrap();
            let free: Vec<_> = s.enumerate().filter(|t| !exclude.contains(t)).collect();
            let r = free.iter().map(ring).min().unwrap();
            let expected = free
                .iter()
                .filter(|t| ring(t) == r)
                .min_by(|a, b| {
                    s.distance_sq(&v, a)
                        .partial_cmp(&s.distance_sq(&v, b))
                        .unwrap()
                        .then(a.cmp(b))
                })
                .copied();
            assert_eq!(Some(got), expected);
            assert!(!exclude.contains(&got));
        }
    }
}
