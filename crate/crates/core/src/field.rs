use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Real value per vertex id, tagged with the level of the graph it lives on.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RealField {
    level: u32,
    values: Vec<f64>,
}

impl RealField {
    pub fn new(level: u32, values: Vec<f64>) -> Self {
        RealField { level, values }
    }

    pub fn constant(level: u32, len: usize, c: f64) -> Self {
        RealField::new(level, vec![c; len])
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn max_abs_diff(&self, other: &RealField) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("id,value\n");
        for (i, v) in self.values.iter().enumerate() {
            s.push_str(&format!("{i},{}\n", fmt_num(*v)));
        }
        s
    }

    pub fn from_csv(level: u32, text: &str) -> Result<Self> {
        let mut values = Vec::new();
        for (line_no, line) in text.lines().enumerate().skip(1) {
            if line.trim().is_empty() {
                continue;
            }
            let (id, v) = line
                .split_once(',')
                .ok_or_else(|| Error::Unsupported(format!("csv line {}: '{line}'", line_no + 1)))?;
            let id: usize = id
                .trim()
                .parse()
                .map_err(|_| Error::Unsupported(format!("csv line {}: bad id", line_no + 1)))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| Error::Unsupported(format!("csv line {}: bad value", line_no + 1)))?;
            if id != values.len() {
                return Err(Error::Unsupported(format!(
                    "csv line {}: expected id {}",
                    line_no + 1,
                    values.len()
                )));
            }
            values.push(v);
        }
        Ok(RealField::new(level, values))
    }
}

/// Circle-valued field with representatives in `[0, 1)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseField {
    level: u32,
    values: Vec<f64>,
}

impl PhaseField {
    /// Wraps arbitrary reals into `[0, 1)`.
    pub fn from_lift(level: u32, values: &[f64]) -> Self {
        PhaseField {
            level,
            values: values.iter().map(|&v| wrap(v)).collect(),
        }
    }

    pub fn constant(level: u32, len: usize, c: f64) -> Self {
        PhaseField::from_lift(level, &vec![c; len])
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn shifted(&self, c: f64) -> PhaseField {
        PhaseField::from_lift(self.level, &self.values.iter().map(|v| v + c).collect::<Vec<_>>())
    }

    /// `max_x |u(x) - v(x)|` in circle distance.
    pub fn max_distance(&self, other: &PhaseField) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| circle_distance(*a, *b))
            .fold(0.0, f64::max)
    }

    /// Circle distance after aligning the fields by their circular mean offset.
    pub fn max_distance_mod_rotation(&self, other: &PhaseField) -> f64 {
        let shift = mean_offset(&self.values, &other.values);
        self.shifted(-shift).max_distance(other)
    }

    pub fn to_csv(&self) -> String {
        RealField::new(self.level, self.values.clone()).to_csv()
    }
}

/// Circular mean of `a - b`, used to align two fields that differ by a rotation.
fn mean_offset(a: &[f64], b: &[f64]) -> f64 {
    let (mut s, mut c) = (0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let t = std::f64::consts::TAU * (x - y);
        s += t.sin();
        c += t.cos();
    }
    s.atan2(c) / std::f64::consts::TAU
}

pub fn wrap(v: f64) -> f64 {
    let r = v - v.floor();
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// Representative of `d` in `(-1/2, 1/2]`.
pub fn nearest_rep(d: f64) -> f64 {
    let r = d - d.round();
    if r <= -0.5 {
        r + 1.0
    } else {
        r
    }
}

pub fn circle_distance(a: f64, b: f64) -> f64 {
    nearest_rep(a - b).abs()
}

/// Neumaier-compensated sum.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for x in iter {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// 17 significant digits, round-trip exact.
pub fn fmt_num(v: f64) -> String {
    format!("{v:.16e}")
}
