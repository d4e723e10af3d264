//! Simulators for the benchmark processes.
//!
//! Every path is a deterministic function of the spec. Randomness comes from
//! `ChaCha8Rng` (crate `rand_chacha` 0.9) seeded with `seed_from_u64(seed)`;
//! innovations are drawn through `rand` 0.9 / `rand_distr` 0.5. Changing any of
//! these versions may change the recorded paths.
//!
//! | kind            | recursion                                              | burn-in |
//! |-----------------|--------------------------------------------------------|---------|
//! | `iid_uniform`   | `X ~ U(0,1)`                                           | 0       |
//! | `moving_maxima` | `X_n = max(Y_n, Y_{n-2}, Y_{n-3})`, `Y ~ U(0,1)`       | 0       |
//! | `ar1_negative`  | `X_n = -X_{n-1}/beta + e_n`, `e ~ U{1/beta,..,1}`      | 0       |
//! | `mar1`          | `X_n = alpha max(X_{n-1}, e_n)`, `e` unit Frechet      | 0       |
//! | `ar2`           | `X_n = phi1 X_{n-1} + phi2 X_{n-2} + e_n`, `e ~ N(0,1)` | 1000    |
//! | `garch11`       | `X_t = sigma_t Z_t`, unit-variance Student-t `Z`       | 1000    |

use std::collections::BTreeMap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Open01, StandardNormal, StudentT};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::upcross::TimeSeries;

/// Name of the generator backing every simulated path.
pub const RNG_ALGORITHM: &str = "ChaCha8Rng (rand_chacha 0.9, seed_from_u64)";

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Child seed for stream `index` under `base`:
/// `splitmix64(base ^ splitmix64(index))`.
pub fn derive_seed(base: u64, index: u64) -> u64 {
    splitmix64(base ^ splitmix64(index))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProcessKind {
    #[serde(alias = "iid")]
    IidUniform,
    #[serde(alias = "mm")]
    MovingMaxima,
    #[serde(alias = "ar1")]
    Ar1Negative {
        beta: u32,
    },
    Mar1 {
        alpha: f64,
    },
    Ar2 {
        phi1: f64,
        phi2: f64,
    },
    #[serde(alias = "garch")]
    Garch11 {
        alpha: f64,
        beta: f64,
        df: f64,
    },
}

impl ProcessKind {
    pub fn name(&self) -> &'static str {
        match self {
            ProcessKind::IidUniform => "iid_uniform",
            ProcessKind::MovingMaxima => "moving_maxima",
            ProcessKind::Ar1Negative { .. } => "ar1_negative",
            ProcessKind::Mar1 { .. } => "mar1",
            ProcessKind::Ar2 { .. } => "ar2",
            ProcessKind::Garch11 { .. } => "garch11",
        }
    }

    pub fn default_burn_in(&self) -> usize {
        match self {
            ProcessKind::Ar2 { .. } | ProcessKind::Garch11 { .. } => 1000,
            _ => 0,
        }
    }

    /// Builds a kind from a name and `key = value` parameters. Unset parameters
    /// fall back to the benchmark settings (`beta = 2`, `alpha = 0.9`,
    /// `phi1 = 0.93, phi2 = -0.86`, GARCH `alpha = 0.08, beta = 0.87, df = 7`).
    pub fn from_name(name: &str, params: &BTreeMap<String, f64>) -> Result<Self> {
        let get = |key: &str, default: f64| params.get(key).copied().unwrap_or(default);
        let allowed: &[&str] = match name {
            "iid" | "iid_uniform" | "mm" | "moving_maxima" => &[],
            "ar1" | "ar1_negative" => &["beta"],
            "mar1" => &["alpha"],
            "ar2" => &["phi1", "phi2"],
            "garch" | "garch11" => &["alpha", "beta", "df"],
            other => return Err(Error::InvalidProcess(format!("unknown process {other:?}"))),
        };
        if let Some(bad) = params.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(Error::InvalidProcess(format!(
                "process {name:?} takes no parameter {bad:?}"
            )));
        }
        let kind = match name {
            "iid" | "iid_uniform" => ProcessKind::IidUniform,
            "mm" | "moving_maxima" => ProcessKind::MovingMaxima,
            "ar1" | "ar1_negative" => {
                let beta = get("beta", 2.0);
                if beta.fract() != 0.0 || beta < 0.0 || beta > u32::MAX as f64 {
                    return Err(Error::InvalidProcess(format!(
                        "beta must be an integer, got {beta}"
                    )));
                }
                ProcessKind::Ar1Negative { beta: beta as u32 }
            }
            "mar1" => ProcessKind::Mar1 {
                alpha: get("alpha", 0.9),
            },
            "ar2" => ProcessKind::Ar2 {
                phi1: get("phi1", 0.93),
                phi2: get("phi2", -0.86),
            },
            _ => ProcessKind::Garch11 {
                alpha: get("alpha", 0.08),
                beta: get("beta", 0.87),
                df: get("df", 7.0),
            },
        };
        kind.validate()?;
        Ok(kind)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidProcess(msg));
        match *self {
            ProcessKind::Ar1Negative { beta } if beta < 2 => {
                fail(format!("ar1_negative needs integer beta >= 2, got {beta}"))
            }
            ProcessKind::Mar1 { alpha } if !(alpha > 0.0 && alpha < 1.0) => {
                fail(format!("mar1 needs alpha in (0, 1), got {alpha}"))
            }
            ProcessKind::Ar2 { phi1, phi2 }
                if !(phi1.is_finite()
                    && phi2.abs() < 1.0
                    && phi1 + phi2 < 1.0
                    && phi2 - phi1 < 1.0) =>
            {
                fail(format!(
                    "ar2 coefficients ({phi1}, {phi2}) violate the stationarity triangle"
                ))
            }
            ProcessKind::Garch11 { alpha, beta, df } => {
                if !(alpha >= 0.0 && beta >= 0.0 && alpha + beta < 1.0) {
                    fail(format!(
                        "garch11 needs alpha, beta >= 0 and alpha + beta < 1, got ({alpha}, {beta})"
                    ))
                } else if !(df > 2.0 && df.is_finite()) {
                    fail(format!("garch11 needs finite df > 2, got {df}"))
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for ProcessKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            ProcessKind::Ar1Negative { beta } => write!(f, "ar1_negative(beta={beta})"),
            ProcessKind::Mar1 { alpha } => write!(f, "mar1(alpha={alpha})"),
            ProcessKind::Ar2 { phi1, phi2 } => write!(f, "ar2(phi1={phi1}, phi2={phi2})"),
            ProcessKind::Garch11 { alpha, beta, df } => {
                write!(f, "garch11(alpha={alpha}, beta={beta}, df={df})")
            }
            other => f.write_str(other.name()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProcessSpec {
    #[serde(flatten)]
    pub kind: ProcessKind,
    pub n: usize,
    pub seed: u64,
    pub burn_in: usize,
}

impl ProcessSpec {
    /// Spec with the default burn-in for `kind`.
    pub fn new(kind: ProcessKind, n: usize, seed: u64) -> Self {
        Self {
            kind,
            n,
            seed,
            burn_in: kind.default_burn_in(),
        }
    }

    pub fn with_burn_in(mut self, burn_in: usize) -> Self {
        self.burn_in = burn_in;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidProcess(format!(
                "sample size must be at least 2, got {}",
                self.n
            )));
        }
        self.kind.validate()
    }
}

/// Known extremal and upcrossings indices of a process.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct TrueParams {
    pub theta: Option<f64>,
    pub eta: Option<f64>,
}

pub fn true_params(kind: &ProcessKind) -> TrueParams {
    let both = |theta: f64, eta: f64| TrueParams {
        theta: Some(theta),
        eta: Some(eta),
    };
    match *kind {
        ProcessKind::IidUniform => both(1.0, 1.0),
        ProcessKind::MovingMaxima => both(1.0 / 3.0, 0.5),
        ProcessKind::Ar1Negative { beta } => {
            let b = beta as f64;
            let v = 1.0 - 1.0 / (b * b);
            both(v, v)
        }
        ProcessKind::Mar1 { alpha } => both(1.0 - alpha, 1.0),
        ProcessKind::Ar2 { .. } | ProcessKind::Garch11 { .. } => TrueParams::default(),
    }
}

fn unit_frechet(rng: &mut ChaCha8Rng) -> f64 {
    let u: f64 = Open01.sample(rng);
    -1.0 / u.ln()
}

pub fn simulate(spec: &ProcessSpec) -> Result<TimeSeries> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let total = spec.n + spec.burn_in;
    let mut out = Vec::with_capacity(total);
    match spec.kind {
        ProcessKind::IidUniform => {
            out.extend((0..total).map(|_| rng.random::<f64>()));
        }
        ProcessKind::MovingMaxima => {
            // lag[0] = Y_{n-1}, lag[1] = Y_{n-2}, lag[2] = Y_{n-3}
            let mut lag = [0.0f64; 3];
            for slot in lag.iter_mut().rev() {
                *slot = rng.random::<f64>();
            }
            for _ in 0..total {
                let y: f64 = rng.random();
                out.push(y.max(lag[1]).max(lag[2]));
                lag = [y, lag[0], lag[1]];
            }
        }
        ProcessKind::Ar1Negative { beta } => {
            let b = beta as f64;
            let mut x: f64 = rng.random();
            for _ in 0..total {
                let j = rng.random_range(1..=beta) as f64;
                x = -x / b + j / b;
                out.push(x);
            }
        }
        ProcessKind::Mar1 { alpha } => {
            // Stationary law exp(-alpha / ((1 - alpha) x)), by inverse transform.
            let u: f64 = Open01.sample(&mut rng);
            let mut x = -alpha / ((1.0 - alpha) * u.ln());
            for _ in 0..total {
                let e = unit_frechet(&mut rng);
                x = alpha * x.max(e);
                out.push(x);
            }
        }
        ProcessKind::Ar2 { phi1, phi2 } => {
            let (mut x1, mut x2) = (0.0f64, 0.0f64);
            for _ in 0..total {
                let e: f64 = StandardNormal.sample(&mut rng);
                let x = phi1 * x1 + phi2 * x2 + e;
                out.push(x);
                x2 = x1;
                x1 = x;
            }
        }
        ProcessKind::Garch11 { alpha, beta, df } => {
            let omega = 1.0 - alpha - beta;
            let t = StudentT::new(df)
                .map_err(|e| Error::InvalidProcess(format!("student-t({df}): {e}")))?;
            let scale = ((df - 2.0) / df).sqrt();
            let (mut sigma2, mut x_prev2) = (1.0f64, 1.0f64);
            for _ in 0..total {
                sigma2 = omega + alpha * x_prev2 + beta * sigma2;
                let x = sigma2.sqrt() * scale * t.sample(&mut rng);
                out.push(x);
                x_prev2 = x * x;
            }
        }
    }
    out.drain(..spec.burn_in);
    let series = TimeSeries::new(out)?;
    Ok(series.with_name(spec.kind.to_string()))
}
