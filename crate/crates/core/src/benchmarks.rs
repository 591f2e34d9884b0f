//! Analytic test functions and the indoor-exposure scenario geometry.
//!
//! Room: 4 m × 3 m (× 2 m high), origin at a corner. Walls, identified by the
//! local frame each one induces on the emitting box:
//!
//! | wall | plane  | inward normal | θ offset |
//! |------|--------|---------------|----------|
//! | W1   | y = 0  | +y            | 0°       |
//! | W2   | x = 0  | +x            | 90°      |
//! | W3   | y = 3  | −y            | 180°     |
//! | W4   | x = 4  | −x            | 270°     |
//!
//! The `sar-synthetic` response is an analytic stand-in, not measured or
//! simulated exposure data.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{PceError, Result};
use crate::input_model::{lhs_sample, lhs_unit, ExperimentalDesign, InputSpace, InputVariable, MarginalDistribution};
use crate::rng::rng_from_seed;

pub const ROOM_X: f64 = 4.0;
pub const ROOM_Y: f64 = 3.0;
pub const ROOM_Z: f64 = 2.0;

/// Distance between the emitting box and the wall it is mounted on.
pub const SOURCE_WALL_OFFSET: f64 = 0.05;

pub const ISHIGAMI_A: f64 = 7.0;
pub const ISHIGAMI_B: f64 = 0.1;

pub fn ishigami(x: &[f64; 3], a: f64, b: f64) -> f64 {
    x[0].sin() + a * x[1].sin().powi(2) + b * x[2].powi(4) * x[0].sin()
}

/// Exact variance of the Ishigami function for inputs uniform on `[-π, π]³`.
pub fn ishigami_variance(a: f64, b: f64) -> f64 {
    a * a / 8.0 + b * PI.powi(4) / 5.0 + b * b * PI.powi(8) / 18.0 + 0.5
}

pub fn ishigami_space() -> InputSpace {
    InputSpace::from_marginals((0..3).map(|_| MarginalDistribution::uniform(-PI, PI).expect("valid bounds")))
        .expect("non-empty space")
}

pub const BOREHOLE_NAMES: [&str; 8] = ["rw", "r", "Tu", "Hu", "Tl", "Hl", "L", "Kw"];

/// Borehole water flow; inputs ordered `(r_w, r, T_u, H_u, T_l, H_l, L, K_w)`.
pub fn borehole(x: &[f64; 8]) -> Result<f64> {
    let [rw, r, tu, hu, tl, hl, l, kw] = *x;
    let fail = |name: &str, v: f64| Err(PceError::BenchmarkDomain(format!("borehole {name} = {v} out of domain")));
    if !(rw > 0.0) {
        return fail("rw", rw);
    }
    if !(r > rw) {
        return fail("r", r);
    }
    if !(tl > 0.0) {
        return fail("Tl", tl);
    }
    if !(kw > 0.0) {
        return fail("Kw", kw);
    }
    if !(l > 0.0) {
        return fail("L", l);
    }
    let log_ratio = (r / rw).ln();
    Ok(2.0 * PI * tu * (hu - hl) / (log_ratio * (1.0 + tu / tl) + 2.0 * l * tu / (rw * rw * kw)))
}

pub fn borehole_space() -> InputSpace {
    let m = [
        MarginalDistribution::gaussian(0.10, 0.0161812).and_then(|m| m.truncated(0.05, 0.15)),
        MarginalDistribution::lognormal(7.71, 1.0056).and_then(|m| m.truncated(100.0, 50000.0)),
        MarginalDistribution::uniform(63070.0, 115600.0),
        MarginalDistribution::uniform(990.0, 1110.0),
        MarginalDistribution::uniform(63.1, 116.0),
        MarginalDistribution::uniform(700.0, 820.0),
        MarginalDistribution::uniform(1120.0, 1680.0),
        MarginalDistribution::uniform(9855.0, 12045.0),
    ];
    InputSpace::new(
        BOREHOLE_NAMES
            .iter()
            .zip(m)
            .map(|(name, m)| InputVariable { name: name.to_string(), marginal: m.expect("valid marginal") })
            .collect(),
    )
    .expect("non-empty space")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Wall {
    W1,
    W2,
    W3,
    W4,
}

impl Wall {
    pub const ALL: [Wall; 4] = [Wall::W1, Wall::W2, Wall::W3, Wall::W4];

    pub fn number(self) -> u8 {
        match self {
            Wall::W1 => 1,
            Wall::W2 => 2,
            Wall::W3 => 3,
            Wall::W4 => 4,
        }
    }

    pub fn from_number(n: u8) -> Option<Wall> {
        Wall::ALL.get(usize::from(n).checked_sub(1)?).copied()
    }

    pub fn theta_offset(self) -> f64 {
        90.0 * f64::from(self.number() - 1)
    }

    /// Box-frame coordinates `(x_sp, y_sp)` of the person relative to a box on
    /// this wall.
    pub fn relative(self, source: (f64, f64), person: (f64, f64)) -> (f64, f64) {
        let (xs, ys) = source;
        let (xp, yp) = person;
        match self {
            Wall::W1 => (xp - xs, yp - ys),
            Wall::W2 => (ys - yp, xp - xs),
            Wall::W3 => (xs - xp, ys - yp),
            Wall::W4 => (yp - ys, xs - xp),
        }
    }
}

impl fmt::Display for Wall {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "W{}", self.number())
    }
}

impl FromStr for Wall {
    type Err = PceError;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let digits = t.strip_prefix(['W', 'w']).unwrap_or(t);
        digits
            .parse::<u8>()
            .ok()
            .and_then(Wall::from_number)
            .ok_or_else(|| PceError::InvalidArgument(format!("unknown wall '{s}'")))
    }
}

/// Maps an angle in degrees onto `[0, 360)`.
pub fn wrap_degrees(angle: f64) -> f64 {
    let w = angle.rem_euclid(360.0);
    if w >= 360.0 {
        0.0
    } else {
        w + 0.0
    }
}

/// Positions of the emitting box and the person in room coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioPose {
    pub source: [f64; 3],
    pub wall: Wall,
    pub person: [f64; 2],
    /// Person orientation in degrees, `[0, 360)`.
    pub theta_p: f64,
}

impl ScenarioPose {
    pub fn new(source: [f64; 3], wall: Wall, person: [f64; 2], theta_p: f64) -> Result<Self> {
        let inside = |v: f64, hi: f64| (0.0..=hi).contains(&v);
        if !(inside(source[0], ROOM_X) && inside(source[1], ROOM_Y) && inside(source[2], ROOM_Z)) {
            return Err(PceError::InvalidArgument(format!("source {source:?} outside the room")));
        }
        if !(inside(person[0], ROOM_X) && inside(person[1], ROOM_Y)) {
            return Err(PceError::InvalidArgument(format!("person {person:?} outside the room")));
        }
        if !theta_p.is_finite() {
            return Err(PceError::InvalidArgument(format!("orientation {theta_p} is not finite")));
        }
        Ok(Self { source, wall, person, theta_p: wrap_degrees(theta_p) })
    }
}

/// Person position and orientation in the polar frame of the box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalPose {
    pub r: f64,
    /// Polar angle of the person seen from the box, degrees in `[0, 360)`.
    pub psi: f64,
    pub theta: f64,
    pub z_source: f64,
}

pub fn to_local(pose: &ScenarioPose) -> LocalPose {
    let (x, y) = pose.wall.relative((pose.source[0], pose.source[1]), (pose.person[0], pose.person[1]));
    LocalPose {
        r: x.hypot(y),
        psi: wrap_degrees(y.atan2(x).to_degrees()),
        theta: wrap_degrees(pose.theta_p + pose.wall.theta_offset()),
        z_source: pose.source[2],
    }
}

/// Analytic exposure stand-in: `c (1 + r)⁻² h(z)` with `h` a Gaussian bump in
/// the source height centred at 0.75 m.
pub fn sar_synthetic(local: &LocalPose) -> f64 {
    const SCALE: f64 = 0.01;
    const Z_CENTER: f64 = 0.75;
    const Z_WIDTH: f64 = 0.35;
    let h = (-((local.z_source - Z_CENTER) / Z_WIDTH).powi(2)).exp();
    SCALE * h / (1.0 + local.r).powi(2)
}

/// Scenario samples with their responses.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub poses: Vec<ScenarioPose>,
    pub responses: Vec<f64>,
}

/// Draws `n` poses: one Latin hypercube column picks the wall, the others the
/// along-wall box coordinate, the box height, the person position and the
/// orientation. The box sits [`SOURCE_WALL_OFFSET`] from its wall.
pub fn generate_poses(n: usize, seed: u64) -> Result<Vec<ScenarioPose>> {
    if n == 0 {
        return Err(PceError::InvalidArgument("scenario size must be positive".into()));
    }
    let mut rng = rng_from_seed(seed);
    let unit = lhs_unit(n, 6, &mut rng);
    let lerp = |lo: f64, hi: f64, u: f64| lo + u * (hi - lo);
    (0..n)
        .map(|i| {
            let u = |j: usize| unit[(i, j)];
            let wall = Wall::ALL[((u(0) * 4.0) as usize).min(3)];
            let along_x = lerp(0.3, 3.7, u(1));
            let along_y = lerp(0.3, 2.7, u(1));
            let (xs, ys) = match wall {
                Wall::W1 => (along_x, SOURCE_WALL_OFFSET),
                Wall::W2 => (SOURCE_WALL_OFFSET, along_y),
                Wall::W3 => (along_x, ROOM_Y - SOURCE_WALL_OFFSET),
                Wall::W4 => (ROOM_X - SOURCE_WALL_OFFSET, along_y),
            };
            ScenarioPose::new(
                [xs, ys, lerp(0.25, 2.0, u(2))],
                wall,
                [lerp(0.05, 3.95, u(3)), lerp(0.05, 2.95, u(4))],
                lerp(0.0, 360.0, u(5)),
            )
        })
        .collect()
}

pub fn sar_scenario(n: usize, seed: u64) -> Result<Scenario> {
    let poses = generate_poses(n, seed)?;
    let responses = poses.iter().map(|p| sar_synthetic(&to_local(p))).collect();
    Ok(Scenario { poses, responses })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReductionMode {
    /// Room coordinates `(xs, ys, zs, xp, yp, theta_p)`.
    Six,
    /// Box frame `(r, psi, theta_s, zs)`.
    Four,
    /// `(r, zs)`.
    Two,
}

impl FromStr for ReductionMode {
    type Err = PceError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "six" | "6" => Ok(Self::Six),
            "four" | "4" => Ok(Self::Four),
            "two" | "2" => Ok(Self::Two),
            _ => Err(PceError::InvalidArgument(format!("unknown reduction mode '{s}'"))),
        }
    }
}

fn uniform_var(name: &str, lo: f64, hi: f64) -> InputVariable {
    InputVariable { name: name.into(), marginal: MarginalDistribution::uniform(lo, hi).expect("valid bounds") }
}

/// Uniform input model for each reduction mode. `r_max` and `psi_max`
/// default to the room diagonal and 180°.
pub fn reduced_space(mode: ReductionMode, r_max: f64, psi_max: f64) -> InputSpace {
    let vars = match mode {
        ReductionMode::Six => vec![
            uniform_var("xs", 0.0, ROOM_X),
            uniform_var("ys", 0.0, ROOM_Y),
            uniform_var("zs", 0.25, ROOM_Z),
            uniform_var("xp", 0.0, ROOM_X),
            uniform_var("yp", 0.0, ROOM_Y),
            uniform_var("theta_p", 0.0, 360.0),
        ],
        ReductionMode::Four => vec![
            uniform_var("r", 0.0, r_max),
            uniform_var("psi", 0.0, psi_max),
            uniform_var("theta_s", 0.0, 360.0),
            uniform_var("zs", 0.25, ROOM_Z),
        ],
        ReductionMode::Two => vec![uniform_var("r", 0.0, r_max), uniform_var("zs", 0.25, ROOM_Z)],
    };
    InputSpace::new(vars).expect("non-empty space")
}

pub fn room_diagonal() -> f64 {
    ROOM_X.hypot(ROOM_Y)
}

/// Rewrites scenario poses in the requested coordinates.
///
/// The reduced input model is uniform over the reachable range; ψ is
/// declared on `[0°, 180°]` unless some person stands behind the box plane,
/// in which case `[0°, 360°]` is used.
pub fn reduce_inputs(scenario: &Scenario, mode: ReductionMode) -> Result<(ExperimentalDesign, InputSpace)> {
    let n = scenario.poses.len();
    if scenario.responses.len() != n {
        return Err(PceError::DimensionMismatch { expected: n, found: scenario.responses.len() });
    }
    let locals: Vec<LocalPose> = scenario.poses.iter().map(to_local).collect();
    let rows: Vec<Vec<f64>> = match mode {
        ReductionMode::Six => scenario
            .poses
            .iter()
            .map(|p| vec![p.source[0], p.source[1], p.source[2], p.person[0], p.person[1], p.theta_p])
            .collect(),
        ReductionMode::Four => locals.iter().map(|l| vec![l.r, l.psi, l.theta, l.z_source]).collect(),
        ReductionMode::Two => locals.iter().map(|l| vec![l.r, l.z_source]).collect(),
    };
    let d = rows.first().map_or(0, Vec::len);
    let inputs = DMatrix::from_fn(n, d, |i, j| rows[i][j]);
    let psi_max = if locals.iter().all(|l| l.psi <= 180.0) { 180.0 } else { 360.0 };
    let r_max = locals.iter().map(|l| l.r).fold(room_diagonal(), f64::max);
    let ed = ExperimentalDesign::new(inputs, DVector::from_column_slice(&scenario.responses))?;
    Ok((ed, reduced_space(mode, r_max, psi_max)))
}

/// Benchmark problems addressable by id.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Benchmark {
    Ishigami,
    Borehole,
    SarSynthetic(ReductionMode),
}

impl Benchmark {
    pub fn parse(id: &str, mode: Option<ReductionMode>) -> Result<Self> {
        match id {
            "ishigami" => Ok(Self::Ishigami),
            "borehole" => Ok(Self::Borehole),
            "sar-synthetic" => Ok(Self::SarSynthetic(mode.unwrap_or(ReductionMode::Six))),
            _ => Err(PceError::InvalidArgument(format!("unknown benchmark '{id}'"))),
        }
    }

    pub fn id(&self) -> &'static str {
        match self {
            Self::Ishigami => "ishigami",
            Self::Borehole => "borehole",
            Self::SarSynthetic(_) => "sar-synthetic",
        }
    }

    pub fn input_space(&self) -> InputSpace {
        match self {
            Self::Ishigami => ishigami_space(),
            Self::Borehole => borehole_space(),
            Self::SarSynthetic(mode) => reduced_space(*mode, room_diagonal(), 180.0),
        }
    }

    /// Evaluates the benchmark at natural-unit inputs (room coordinates for
    /// the six-input scenario; box-frame coordinates otherwise).
    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        let need = self.input_space().dimension();
        if x.len() != need {
            return Err(PceError::DimensionMismatch { expected: need, found: x.len() });
        }
        match self {
            Self::Ishigami => Ok(ishigami(&[x[0], x[1], x[2]], ISHIGAMI_A, ISHIGAMI_B)),
            Self::Borehole => borehole(&[x[0], x[1], x[2], x[3], x[4], x[5], x[6], x[7]]),
            Self::SarSynthetic(ReductionMode::Four) => {
                Ok(sar_synthetic(&LocalPose { r: x[0], psi: x[1], theta: x[2], z_source: x[3] }))
            }
            Self::SarSynthetic(ReductionMode::Two) => {
                Ok(sar_synthetic(&LocalPose { r: x[0], psi: 0.0, theta: 0.0, z_source: x[1] }))
            }
            Self::SarSynthetic(ReductionMode::Six) => Err(PceError::InvalidArgument(
                "six-input scenario responses depend on the wall; evaluate a ScenarioPose instead".into(),
            )),
        }
    }

    /// Fresh design of `n` samples reproducible from `seed`.
    pub fn sample(&self, n: usize, seed: u64) -> Result<ExperimentalDesign> {
        match self {
            Self::SarSynthetic(mode) => {
                let (ed, _) = reduce_inputs(&sar_scenario(n, seed)?, *mode)?;
                Ok(ed)
            }
            _ => {
                let s = lhs_sample(n, &self.input_space(), seed)?;
                let y = s
                    .natural
                    .row_iter()
                    .map(|row| self.evaluate(&row.iter().copied().collect::<Vec<_>>()))
                    .collect::<Result<Vec<_>>>()?;
                ExperimentalDesign::new(s.natural, DVector::from_vec(y))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn ishigami_values() {
        assert_eq!(ishigami(&[0.0, 0.0, 0.0], 7.0, 0.1), 0.0);
        assert_eq!(ishigami(&[FRAC_PI_2, 0.0, 0.0], 7.0, 0.1), 1.0);
        assert!((ishigami(&[FRAC_PI_2, FRAC_PI_2, 1.0], 7.0, 0.1) - 8.1).abs() < 1e-14);
        assert!((ishigami_variance(7.0, 0.1) - 13.844587940719254).abs() < 1e-12);
    }

    #[test]
    fn borehole_values() {
        let base = [0.10, 7.71f64.exp(), 89335.0, 1050.0, 89.55, 760.0, 1400.0, 10950.0];
        let mut equal = base;
        equal[5] = equal[3];
        assert_eq!(borehole(&equal).unwrap(), 0.0);
        let mut doubled = base;
        doubled[5] = 1050.0 - 2.0 * (1050.0 - 760.0);
        assert!((borehole(&doubled).unwrap() - 2.0 * borehole(&base).unwrap()).abs() < 1e-12);
        // Hand evaluation: ln(r/rw) = 7.71 + ln 10.
        let lr = 7.71 + 10f64.ln();
        let hand = 2.0 * PI * 89335.0 * 290.0 / (lr * (1.0 + 89335.0 / 89.55) + 2.0 * 1400.0 * 89335.0 / (0.01 * 10950.0));
        assert!((borehole(&base).unwrap() - hand).abs() < 1e-12 * hand);
        let mut bad = base;
        bad[1] = 0.05;
        assert!(matches!(borehole(&bad), Err(PceError::BenchmarkDomain(m)) if m.contains(" r ")));
    }

    #[test]
    fn local_coordinates_examples() {
        let w1 = ScenarioPose::new([1.0, 0.3, 1.0], Wall::W1, [1.0, 1.3], 0.0).unwrap();
        let l = to_local(&w1);
        assert!((l.r - 1.0).abs() < 1e-15 && (l.psi - 90.0).abs() < 1e-12 && l.theta == 0.0);
        let w3 = ScenarioPose::new([2.0, 2.7, 1.0], Wall::W3, [1.0, 1.7], 200.0).unwrap();
        let (x, y) = Wall::W3.relative((2.0, 2.7), (1.0, 1.7));
        assert!((x - 1.0).abs() < 1e-15 && (y - 1.0).abs() < 1e-15);
        assert!((to_local(&w3).theta - 20.0).abs() < 1e-12);
        let w2 = ScenarioPose::new([0.05, 1.0, 1.0], Wall::W2, [1.0, 1.0], 350.0).unwrap();
        assert_eq!(to_local(&w2).theta, 80.0);
        assert!(ScenarioPose::new([5.0, 1.0, 1.0], Wall::W2, [1.0, 1.0], 0.0).is_err());
    }

    #[test]
    fn person_on_inward_normal_is_wall_independent() {
        let poses = [
            ScenarioPose::new([1.5, 0.05, 1.0], Wall::W1, [1.5, 1.05], 10.0).unwrap(),
            ScenarioPose::new([0.05, 2.0, 1.0], Wall::W2, [1.05, 2.0], 10.0).unwrap(),
            ScenarioPose::new([2.5, 2.95, 1.0], Wall::W3, [2.5, 1.95], 10.0).unwrap(),
            ScenarioPose::new([3.95, 0.5, 1.0], Wall::W4, [2.95, 0.5], 10.0).unwrap(),
        ];
        for p in &poses {
            let l = to_local(p);
            assert!((l.r - 1.0).abs() < 1e-12, "{p:?}");
            assert!((l.psi - 90.0).abs() < 1e-12, "{p:?}");
        }
    }

    #[test]
    fn wrap_keeps_half_open_range() {
        assert_eq!(wrap_degrees(360.0), 0.0);
        assert_eq!(wrap_degrees(-90.0), 270.0);
        assert_eq!(wrap_degrees(-1e-20), 0.0);
        assert!(wrap_degrees(-0.0).is_sign_positive());
    }

    #[test]
    fn generated_scenario_respects_geometry() {
        let s = sar_scenario(400, 12).unwrap();
        let mut walls = [0usize; 4];
        for p in &s.poses {
            walls[usize::from(p.wall.number() - 1)] += 1;
            let l = to_local(p);
            assert!(l.r >= 0.0 && (0.0..=180.0).contains(&l.psi) && (0.0..360.0).contains(&l.theta));
        }
        assert_eq!(walls, [100; 4]);
        assert_eq!(s, sar_scenario(400, 12).unwrap());
    }

    #[test]
    fn reduction_projection_consistency() {
        let s = sar_scenario(50, 3).unwrap();
        let (four, _) = reduce_inputs(&s, ReductionMode::Four).unwrap();
        let (two, space) = reduce_inputs(&s, ReductionMode::Two).unwrap();
        assert_eq!(two.inputs().column(0), four.inputs().column(0));
        assert_eq!(two.inputs().column(1), four.inputs().column(3));
        assert_eq!(two.responses(), four.responses());
        space.standardize(two.inputs()).unwrap();
        let (six, six_space) = reduce_inputs(&s, ReductionMode::Six).unwrap();
        six_space.standardize(six.inputs()).unwrap();
    }

    #[test]
    fn wall_parsing() {
        assert_eq!("W3".parse::<Wall>().unwrap(), Wall::W3);
        assert_eq!("2".parse::<Wall>().unwrap(), Wall::W2);
        assert!("W5".parse::<Wall>().is_err());
        assert_eq!(Wall::W4.to_string(), "W4");
    }
}
