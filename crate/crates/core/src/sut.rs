//! Systems under test, fitness, and the exhaustive positive-set oracle.

use std::process::Command;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::space::{
    InputSpace, TestInput, BIG_CPUS, BIG_FREQ, BIG_UTIL, LITTLE_CPUS, LITTLE_FREQ, LITTLE_UTIL,
};

/// Something that executes a test input and reports its power draw in watts.
///
/// Implementations must be deterministic: the same input always yields the
/// same measurement.
pub trait Sut {
    fn measure(&self, space: &InputSpace, input: &TestInput) -> Result<f64>;
}

/// Closed-form big.LITTLE power model:
///
/// `p_idle + gain · Σ_cluster κ · cpus · util · (freq / freq_max)³`
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSut {
    pub p_idle: f64,
    pub kappa_big: f64,
    pub kappa_little: f64,
    pub gain: f64,
}

impl Default for SyntheticSut {
    fn default() -> Self {
        Self {
            p_idle: 0.5,
            kappa_big: 1.0,
            kappa_little: 0.15,
            gain: 1.0,
        }
    }
}

impl SyntheticSut {
    pub fn new(p_idle: f64, kappa_big: f64, kappa_little: f64, gain: f64) -> Result<Self> {
        let sut = Self {
            p_idle,
            kappa_big,
            kappa_little,
            gain,
        };
        sut.validate()?;
        Ok(sut)
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("p_idle", self.p_idle),
            ("kappa_big", self.kappa_big),
            ("kappa_little", self.kappa_little),
            ("gain", self.gain),
        ];
        for (name, v) in fields {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::contract(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    /// The gain-free dynamic term.
    fn dynamic_term(&self, space: &InputSpace, input: &TestInput) -> Result<f64> {
        let v = space.values(input)?;
        let dims = space.dims();
        let cluster = |cpus: usize, freq: usize, util: usize| {
            let ratio = v[freq] / dims[freq].max();
            v[cpus] * v[util] * ratio * ratio * ratio
        };
        Ok(self.kappa_big * cluster(BIG_CPUS, BIG_FREQ, BIG_UTIL)
            + self.kappa_little * cluster(LITTLE_CPUS, LITTLE_FREQ, LITTLE_UTIL))
    }

    pub fn with_gain(&self, gain: f64) -> Self {
        Self { gain, ..*self }
    }
}

impl Sut for SyntheticSut {
    fn measure(&self, space: &InputSpace, input: &TestInput) -> Result<f64> {
        Ok(self.p_idle + self.gain * self.dynamic_term(space, input)?)
    }
}

/// Runs an external command per test.
///
/// Every `{dimension_name}` placeholder in the template is replaced by that
/// dimension's physical level, and the same values are exported as
/// `PERFGAN_<NAME>` environment variables. The last non-empty stdout line
/// must be a decimal watts value. Executions are serialized by the caller.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShellSut {
    pub command: String,
}

impl ShellSut {
    pub fn new(command: impl Into<String>) -> Self {
        Self {
            command: command.into(),
        }
    }

    pub fn render(&self, space: &InputSpace, input: &TestInput) -> Result<(String, Vec<(String, String)>)> {
        let values = space.values(input)?;
        let mut cmd = self.command.clone();
        let mut env = Vec::with_capacity(values.len());
        for (dim, v) in space.dims().iter().zip(values) {
            cmd = cmd.replace(&format!("{{{}}}", dim.name), &v.to_string());
            env.push((format!("PERFGAN_{}", dim.name.to_uppercase()), v.to_string()));
        }
        Ok((cmd, env))
    }
}

impl Sut for ShellSut {
    fn measure(&self, space: &InputSpace, input: &TestInput) -> Result<f64> {
        let (cmd, env) = self.render(space, input)?;
        let output = Command::new("sh")
            .arg("-c")
            .arg(&cmd)
            .envs(env)
            .output()
            .map_err(|e| Error::io("sh", e))?;
        if !output.status.success() {
            return Err(Error::contract(format!(
                "SUT command `{cmd}` exited with {}",
                output.status
            )));
        }
        let stdout = String::from_utf8_lossy(&output.stdout);
        let last = stdout
            .lines()
            .rev()
            .find(|l| !l.trim().is_empty())
            .ok_or_else(|| Error::contract(format!("SUT command `{cmd}` printed nothing")))?;
        let watts: f64 = last.trim().parse().map_err(|_| {
            Error::contract(format!("SUT command `{cmd}` printed `{last}`, not a number"))
        })?;
        if !(watts >= 0.0 && watts.is_finite()) {
            return Err(Error::contract(format!("SUT reported invalid power {watts}")));
        }
        Ok(watts)
    }
}

/// Power threshold `p_m`; a test is positive when its power reaches it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitnessSpec {
    pub p_m: f64,
}

impl Default for FitnessSpec {
    fn default() -> Self {
        Self { p_m: 6.0 }
    }
}

/// Largest `f64` below one.
const BELOW_ONE: f64 = 1.0 - f64::EPSILON / 2.0;

impl FitnessSpec {
    pub fn new(p_m: f64) -> Result<Self> {
        if !(p_m > 0.0 && p_m.is_finite()) {
            return Err(Error::contract(format!("p_m must be positive, got {p_m}")));
        }
        Ok(Self { p_m })
    }

    pub fn is_positive(&self, power: f64) -> bool {
        power >= self.p_m
    }

    /// `min(1, power / p_m)`.
    ///
    /// Exactly 1 iff `power >= p_m`; a quotient that rounds up to 1 below
    /// the threshold is held just under it.
    pub fn fitness(&self, power: f64) -> Result<f64> {
        if power.is_nan() || power < 0.0 {
            return Err(Error::contract(format!("power must be non-negative, got {power}")));
        }
        if self.is_positive(power) {
            Ok(1.0)
        } else {
            Ok((power / self.p_m).min(BELOW_ONE))
        }
    }
}

/// Exhaustive ground truth for a space.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleReport {
    pub cardinality: usize,
    pub positive_count: usize,
    pub density: f64,
    pub max_power: f64,
}

/// Every input whose power meets `p_m`, in enumeration order.
pub fn oracle_positive_set<S: Sut + ?Sized>(
    sut: &S,
    space: &InputSpace,
    spec: &FitnessSpec,
) -> Result<Vec<TestInput>> {
    let mut out = Vec::new();
    for t in space.enumerate() {
        if spec.is_positive(sut.measure(space, &t)?) {
            out.push(t);
        }
    }
    Ok(out)
}

pub fn oracle_report<S: Sut + ?Sized>(
    sut: &S,
    space: &InputSpace,
    spec: &FitnessSpec,
) -> Result<OracleReport> {
    let mut positive_count = 0;
    let mut max_power = f64::NEG_INFINITY;
    for t in space.enumerate() {
        let p = sut.measure(space, &t)?;
        max_power = max_power.max(p);
        if spec.is_positive(p) {
            positive_count += 1;
        }
    }
    let cardinality = space.cardinality();
    Ok(OracleReport {
        cardinality,
        positive_count,
        density: positive_count as f64 / cardinality as f64,
        max_power,
    })
}

/// Chooses `gain` so that the `(1 − target_density)` quantile of power over
/// the space lands on `p_m`.
///
/// Concretely, with `k = ⌈target_density · |I|⌉`, the `k`-th largest dynamic
/// term is mapped exactly onto the threshold, so at least `k` inputs are
/// positive (more when the quantile value is tied).
pub fn calibrate_gain(
    sut: &SyntheticSut,
    space: &InputSpace,
    spec: &FitnessSpec,
    target_density: f64,
) -> Result<SyntheticSut> {
    if !(target_density > 0.0 && target_density < 1.0) {
        return Err(Error::Calibration(format!(
            "target density must lie in (0, 1), got {target_density}"
        )));
    }
    if spec.p_m <= sut.p_idle {
        return Err(Error::Calibration(format!(
            "p_m = {} does not exceed idle power {}; every input is positive",
            spec.p_m, sut.p_idle
        )));
    }
    let mut terms = space
        .enumerate()
        .map(|t| sut.dynamic_term(space, &t))
        .collect::<Result<Vec<_>>>()?;
    terms.sort_by(|a, b| b.total_cmp(a));
    let (hi, lo) = (terms[0], terms[terms.len() - 1]);
    if hi == lo {
        return Err(Error::Calibration(
            "power is constant over the space; no density other than 0 or 1 is reachable".into(),
        ));
    }
    let k = ((target_density * terms.len() as f64).ceil() as usize).clamp(1, terms.len());
    let quantile = terms[k - 1];
    if quantile <= 0.0 {
        return Err(Error::Calibration(format!(
            "target density {target_density} reaches inputs with no dynamic power"
        )));
    }
    let mut gain = (spec.p_m - sut.p_idle) / quantile;
    while sut.p_idle + gain * quantile < spec.p_m {
        gain = gain.next_up();
    }
    let calibrated = sut.with_gain(gain);
    calibrated.validate().map_err(|e| Error::Calibration(e.to_string()))?;
    Ok(calibrated)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{Dimension, DIMENSION_NAMES};

    fn space_from(levels: [Vec<f64>; 6]) -> InputSpace {
        InputSpace::new(
            levels
                .into_iter()
                .zip(DIMENSION_NAMES)
                .map(|(l, n)| Dimension::new(n, l).unwrap())
                .collect(),
        )
        .unwrap()
    }

    /// big_cpus {0, 2}, little_cpus {0, 4}, everything else a single level.
    fn toy() -> InputSpace {
        space_from([
            vec![0.0, 2.0],
            vec![1000.0],
            vec![0.5],
            vec![0.0, 4.0],
            vec![800.0],
            vec![1.0],
        ])
    }

    #[test]
    fn idle_only_when_no_cpus() {
        let s = InputSpace::default_board();
        let sut = SyntheticSut::default();
        let t = TestInput([0, 18, 9, 0, 13, 9]);
        assert_eq!(sut.measure(&s, &t).unwrap(), 0.5);
    }

    #[test]
    fn four_big_cpus_at_full_speed() {
        let s = InputSpace::default_board();
        let sut = SyntheticSut::default();
        let t = TestInput([4, 18, 9, 0, 0, 0]);
        assert_eq!(sut.measure(&s, &t).unwrap(), 4.5);
    }

    #[test]
    fn power_is_monotone_in_every_level() {
        let s = space_from([
            vec![0.0, 1.0, 2.0],
            vec![200.0, 600.0, 1000.0],
            vec![0.1, 0.5, 1.0],
            vec![0.0, 1.0, 2.0],
            vec![200.0, 500.0],
            vec![0.2, 1.0],
        ]);
        let sut = SyntheticSut::default();
        for t in s.enumerate() {
            let p = sut.measure(&s, &t).unwrap();
            for d in 0..6 {
                let mut up = t;
                up.0[d] += 1;
                if s.contains(&up) {
                    assert!(sut.measure(&s, &up).unwrap() >= p);
                }
            }
        }
    }

    #[test]
    fn measure_rejects_outside_input() {
        let s = toy();
        assert!(SyntheticSut::default().measure(&s, &TestInput([2, 0, 0, 0, 0, 0])).is_err());
    }

    #[test]
    fn fitness_examples() {
        let spec = FitnessSpec::default();
        assert_eq!(spec.fitness(6.0).unwrap(), 1.0);
        assert_eq!(spec.fitness(3.0).unwrap(), 0.5);
        assert_eq!(spec.fitness(9.0).unwrap(), 1.0);
        assert!(spec.fitness(-0.1).is_err());
        assert!(spec.fitness(f64::NAN).is_err());
        // just below the threshold never reports a full score
        let below = 6.0f64.next_down();
        assert!(spec.fitness(below).unwrap() < 1.0);
    }

    #[test]
    fn oracle_extremes() {
        let s = toy();
        let sut = SyntheticSut::default();
        assert!(oracle_positive_set(&sut, &s, &FitnessSpec::new(1e6).unwrap()).unwrap().is_empty());
        let all = oracle_positive_set(&sut, &s, &FitnessSpec::new(0.5).unwrap()).unwrap();
        assert_eq!(all.len(), s.cardinality());
    }

    #[test]
    fn oracle_toy_hand_enumeration() {
        // ratios: big (1000/1000)^3 = 1, little (800/800)^3 = 1
        // (0,0): 0.5
        // (0,4): 0.5 + 0.15·4·1.0 = 1.1
        // (2,0): 0.5 + 1.0·2·0.5 = 1.5
        // (2,4): 0.5 + 1.0 + 0.6 = 2.1
        let s = toy();
        let sut = SyntheticSut::default();
        let powers: Vec<f64> = s.enumerate().map(|t| sut.measure(&s, &t).unwrap()).collect();
        let expected = [0.5, 1.1, 1.5, 2.1];
        for (p, e) in powers.iter().zip(expected) {
            assert!((p - e).abs() < 1e-12, "{p} vs {e}");
        }
        let got = oracle_positive_set(&sut, &s, &FitnessSpec::new(1.2).unwrap()).unwrap();
        assert_eq!(got, vec![TestInput([1, 0, 0, 0, 0, 0]), TestInput([1, 0, 0, 1, 0, 0])]);
    }

    #[test]
    fn fitness_one_iff_oracle_member() {
        let s = toy();
        let sut = SyntheticSut::default();
        let spec = FitnessSpec::new(1.5).unwrap();
        let positives = oracle_positive_set(&sut, &s, &spec).unwrap();
        for t in s.enumerate() {
            let f = spec.fitness(sut.measure(&s, &t).unwrap()).unwrap();
            assert_eq!(f == 1.0, positives.contains(&t));
        }
    }

    #[test]
    fn calibration_hits_maximizer_for_tiny_density() {
        let s = toy();
        let spec = FitnessSpec::new(5.0).unwrap();
        let cal = calibrate_gain(&SyntheticSut::default(), &s, &spec, 1e-9).unwrap();
        let pos = oracle_positive_set(&cal, &s, &spec).unwrap();
        assert_eq!(pos, vec![TestInput([1, 0, 0, 1, 0, 0])]);
        let max = oracle_report(&cal, &s, &spec).unwrap().max_power;
        assert!((5.0..5.0 + 1e-9).contains(&max));
    }

    #[test]
    fn calibration_errors() {
        let s = toy();
        let sut = SyntheticSut::default();
        let spec = FitnessSpec::default();
        assert!(matches!(calibrate_gain(&sut, &s, &spec, 0.0), Err(Error::Calibration(_))));
        assert!(matches!(calibrate_gain(&sut, &s, &spec, 1.0), Err(Error::Calibration(_))));
        let low = FitnessSpec::new(0.4).unwrap();
        assert!(matches!(calibrate_gain(&sut, &s, &low, 0.1), Err(Error::Calibration(_))));
        let flat = space_from([vec![2.0], vec![1.0], vec![1.0], vec![1.0], vec![1.0], vec![1.0]]);
        assert!(matches!(calibrate_gain(&sut, &flat, &spec, 0.5), Err(Error::Calibration(_))));
        // 3 of 4 toy points would need the zero-power point to be positive
        assert!(matches!(calibrate_gain(&sut, &s, &spec, 0.9), Err(Error::Calibration(_))));
    }

    #[test]
    fn doubling_gain_never_shrinks_positive_set() {
        let s = toy();
        let spec = FitnessSpec::new(1.6).unwrap();
        let mut sut = SyntheticSut::default();
        let mut last = 0;
        for _ in 0..6 {
            let n = oracle_positive_set(&sut, &s, &spec).unwrap().len();
            assert!(n >= last);
            last = n;
            sut = sut.with_gain(sut.gain * 2.0);
        }
        assert_eq!(last, 3);
    }

    #[test]
    fn shell_sut_substitutes_and_parses() {
        let s = toy();
        let sut = ShellSut::new("echo warming up; echo {big_cpus}; echo \"$PERFGAN_LITTLE_CPUS\" >/dev/null");
        let (cmd, env) = sut.render(&s, &TestInput([1, 0, 0, 1, 0, 0])).unwrap();
        assert!(cmd.contains("echo 2;"));
        assert!(env.contains(&("PERFGAN_LITTLE_CPUS".into(), "4".into())));
        assert_eq!(sut.measure(&s, &TestInput([1, 0, 0, 0, 0, 0])).unwrap(), 2.0);
        let env_sut = ShellSut::new("echo $PERFGAN_LITTLE_CPUS");
        assert_eq!(env_sut.measure(&s, &TestInput([0, 0, 0, 1, 0, 0])).unwrap(), 4.0);
        assert!(ShellSut::new("echo nope").measure(&s, &TestInput([0; 6])).is_err());
        assert!(ShellSut::new("exit 3").measure(&s, &TestInput([0; 6])).is_err());
    }
}
