// SPDX-License-Identifier: MIT OR Apache-2.0

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::rng::{replicate_rng, standard_normals};
use crate::{PrutfError, Result};

pub const SCENARIO_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Noise {
    Iid { sigma: f64 },
    Ar1 { rho: f64, sigma: f64 },
}

impl Noise {
    pub fn sigma(&self) -> f64 {
        match *self {
            Noise::Iid { sigma } | Noise::Ar1 { sigma, .. } => sigma,
        }
    }

    /// Same noise family with a different marginal standard deviation.
    pub fn with_sigma(&self, sigma: f64) -> Self {
        match *self {
            Noise::Iid { .. } => Noise::Iid { sigma },
            Noise::Ar1 { rho, .. } => Noise::Ar1 { rho, sigma },
        }
    }
}

/// Piecewise polynomial signal plus a noise model.
///
/// Segment `j` covers observations `τ_j + 1 ..= τ_{j+1}` (1-based, with
/// `τ_0 = 0` and `τ_{J+1} = n`) and equals `Σ_k c_{jk} (i/n)^k` there.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub n: usize,
    pub r: usize,
    pub change_points: Vec<usize>,
    pub coefficients: Vec<Vec<f64>>,
    pub noise: Noise,
    pub seed: u64,
}

#[derive(Serialize, Deserialize)]
struct ScenarioFile {
    version: u32,
    #[serde(flatten)]
    scenario: Scenario,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(PrutfError::InvalidScenario(format!("{}: {msg}", self.name)));
        if self.n == 0 {
            return bad("n must be positive".into());
        }
        let mut prev = 0;
        for &t in &self.change_points {
            if t <= prev || t >= self.n {
                return bad(format!("change points must increase strictly inside (0, {})", self.n));
            }
            prev = t;
        }
        if self.coefficients.len() != self.change_points.len() + 1 {
            return bad(format!(
                "{} segments need {} coefficient rows, got {}",
                self.change_points.len() + 1,
                self.change_points.len() + 1,
                self.coefficients.len()
            ));
        }
        if let Some(row) = self.coefficients.iter().find(|c| c.len() != self.r + 1) {
            return bad(format!("each segment needs {} coefficients, got {}", self.r + 1, row.len()));
        }
        match self.noise {
            Noise::Iid { sigma } | Noise::Ar1 { sigma, .. } if !(sigma >= 0.0 && sigma.is_finite()) => {
                bad(format!("noise sigma must be nonnegative, got {sigma}"))
            }
            Noise::Ar1 { rho, .. } if !(rho.abs() < 1.0) => bad(format!("AR(1) needs |rho| < 1, got {rho}")),
            _ => Ok(()),
        }
    }

    /// The noiseless signal.
    pub fn signal(&self) -> Vec<f64> {
        let n = self.n as f64;
        let mut out = Vec::with_capacity(self.n);
        let mut seg = 0;
        for i in 1..=self.n {
            while seg < self.change_points.len() && i > self.change_points[seg] {
                seg += 1;
            }
            let x = i as f64 / n;
            let value = self.coefficients[seg].iter().rev().fold(0.0, |acc, c| acc * x + c);
            out.push(value);
        }
        out
    }

    /// Signs of the true changes, i.e. of `D^{(r+1)} f` at each change.
    pub fn change_signs(&self) -> Vec<i8> {
        let f = self.signal();
        let op = crate::DifferenceOperator::new(self.n, self.r).expect("valid scenario");
        let df = op.apply(&f).expect("length n");
        let r_a = (self.r + 1) / 2;
        self.change_points
            .iter()
            .map(|&t| {
                let v = df[t - r_a - 1];
                if v > 0.0 {
                    1
                } else if v < 0.0 {
                    -1
                } else {
                    0
                }
            })
            .collect()
    }

    /// TOML integers are signed, so seeds above `i64::MAX` are rejected.
    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(&ScenarioFile {
            version: SCENARIO_FORMAT_VERSION,
            scenario: self.clone(),
        })
        .map_err(|e| PrutfError::InvalidScenario(e.to_string()))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let file: ScenarioFile =
            toml::from_str(text).map_err(|e| PrutfError::InvalidScenario(e.message().to_string()))?;
        if file.version != SCENARIO_FORMAT_VERSION {
            return Err(PrutfError::InvalidScenario(format!(
                "unsupported format version {}",
                file.version
            )));
        }
        file.scenario.validate()?;
        Ok(file.scenario)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| PrutfError::InvalidScenario(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_toml()?)
            .map_err(|e| PrutfError::InvalidScenario(format!("{}: {e}", path.display())))
    }

    pub fn by_name(name: &str) -> Option<Self> {
        match name {
            "pwc" => Some(scenario_pwc()),
            "pwl" => Some(scenario_pwl()),
            "teeth" => Some(scenario_teeth()),
            "wave" => Some(scenario_wave()),
            "staircase" => Some(scenario_staircase_demo()),
            _ => None,
        }
    }
}

pub const SCENARIO_NAMES: [&str; 5] = ["pwc", "pwl", "teeth", "wave", "staircase"];

/// Observations `y = f + ε` and the noiseless `f`, drawn from the
/// scenario's own seed.
pub fn generate(scn: &Scenario) -> Result<(Vec<f64>, Vec<f64>)> {
    generate_replicate(scn, 0)
}

/// Replicate `k`: noise drawn from seed `scn.seed ^ k`.
pub fn generate_replicate(scn: &Scenario, k: u64) -> Result<(Vec<f64>, Vec<f64>)> {
    scn.validate()?;
    let f = scn.signal();
    let z = standard_normals(&mut replicate_rng(scn.seed, k), scn.n);
    let eps = match scn.noise {
        Noise::Iid { sigma } => z.iter().map(|v| sigma * v).collect::<Vec<_>>(),
        Noise::Ar1 { rho, sigma } => {
            let innov = (1.0 - rho * rho).sqrt() * sigma;
            let mut eps = Vec::with_capacity(scn.n);
            let mut prev = sigma * z[0];
            eps.push(prev);
            for v in &z[1..] {
                prev = rho * prev + innov * v;
                eps.push(prev);
            }
            eps
        }
    };
    let y = f.iter().zip(&eps).map(|(a, e)| a + e).collect();
    Ok((y, f))
}

pub fn scenario_pwc() -> Scenario {
    let change_points = vec![205, 308, 512, 820, 902, 1332, 1557, 1659];
    let jumps = [1.464, -0.656, 0.098, 1.830, 0.537, 0.768, -0.574, -3.335];
    let mut level = 0.0;
    let mut coefficients = vec![vec![level]];
    for j in jumps {
        level += j;
        coefficients.push(vec![level]);
    }
    Scenario {
        name: "pwc".into(),
        n: 2024,
        r: 0,
        change_points,
        coefficients,
        noise: Noise::Iid { sigma: 1.0 },
        seed: 1,
    }
}

pub fn scenario_pwl() -> Scenario {
    let intercepts = [0.111, 0.553, -0.481, 3.002, -7.169, -0.030, 7.217, -0.958];
    let slopes = [-8.0, 6.0, -3.0, -11.0, 12.0, 4.0, -7.0, 8.0];
    Scenario {
        name: "pwl".into(),
        n: 1408,
        r: 1,
        change_points: vec![256, 512, 768, 1024, 1152, 1280, 1344],
        coefficients: intercepts.iter().zip(slopes).map(|(&a, b)| vec![a, b]).collect(),
        noise: Noise::Iid { sigma: 1.0 },
        seed: 1,
    }
}

// Period of the tooth pattern in force at time t.
fn regime_period(t: usize) -> usize {
    match t {
        1..=50 => 10,
        51..=150 => 20,
        151..=250 => 40,
        _ => 100,
    }
}

// Phase within the current period, mapped to 1..=period.
fn phase(t: usize, period: usize) -> usize {
    match t % period {
        0 => period,
        u => u,
    }
}

/// Builds a scenario from per-time affine pieces `f_t = c0 + c1 t`,
/// starting a new segment whenever the piece changes.
fn from_pieces(name: &str, n: usize, r: usize, piece: impl Fn(usize) -> (f64, f64)) -> Scenario {
    let mut change_points = Vec::new();
    let mut coefficients = Vec::new();
    let mut current = piece(1);
    let to_x = |(c0, c1): (f64, f64)| {
        let mut row = vec![c0];
        if r >= 1 {
            row.push(c1 * n as f64);
        }
        row
    };
    for t in 2..=n {
        let next = piece(t);
        if next != current {
            change_points.push(t - 1);
            coefficients.push(to_x(current));
            current = next;
        }
    }
    coefficients.push(to_x(current));
    Scenario {
        name: name.into(),
        n,
        r,
        change_points,
        coefficients,
        noise: Noise::Iid { sigma: 0.1 },
        seed: 1,
    }
}

/// 0/1 teeth whose width doubles across four regimes (29 changes).
pub fn scenario_teeth() -> Scenario {
    from_pieces("teeth", 500, 0, |t| {
        let period = regime_period(t);
        let level = if phase(t, period) <= period / 2 { 0.0 } else { 1.0 };
        (level, 0.0)
    })
}

/// Triangle wave whose period and slope change across the same regimes.
/// The phase is local to each period, counted from `t = 1`.
pub fn scenario_wave() -> Scenario {
    from_pieces("wave", 500, 1, |t| {
        let period = regime_period(t);
        let slope = match period {
            10 => 0.4,
            20 => 0.2,
            40 => 0.1,
            _ => 0.04,
        };
        let half = period / 2;
        let u = phase(t, period);
        // Start of the current period, so that u = t - base.
        let base = (t - u) as f64;
        if u <= half {
            (-1.0 - slope * base, slope)
        } else {
            (1.0 + slope * (base + half as f64), -slope)
        }
    })
}

/// Four changes with a staircase in the block `(50, 80]`.
pub fn scenario_staircase_demo() -> Scenario {
    Scenario {
        name: "staircase".into(),
        n: 100,
        r: 0,
        change_points: vec![15, 40, 50, 80],
        coefficients: vec![vec![0.0], vec![1.5], vec![0.5], vec![2.5], vec![3.5]],
        noise: Noise::Iid { sigma: 0.3 },
        seed: 1,
    }
}
