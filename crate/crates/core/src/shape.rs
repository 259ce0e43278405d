//! Peak counting and shape classification of infection curves.

use crate::error::{Error, Result};
use crate::ode::Trajectory;

/// Default suppression level for ripple in peak detection.
pub const DEFAULT_VALUE_TOL: f64 = 1e-9;
pub const DEFAULT_PLATEAU_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Shape {
    MonotoneDecreasing,
    SinglePeak,
    PlateauPeak,
    Multimodal,
}

impl Shape {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::MonotoneDecreasing => "monotone-decreasing",
            Self::SinglePeak => "single-peak",
            Self::PlateauPeak => "plateau-peak",
            Self::Multimodal => "multimodal",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShapeReport {
    pub shape: Shape,
    pub peak_times: Vec<f64>,
    pub peak_values: Vec<f64>,
    /// Time span of the plateau at the peak, when one was found.
    pub plateau: Option<(f64, f64)>,
}

impl ShapeReport {
    pub fn peak_count(&self) -> usize {
        self.peak_times.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapeTolerances {
    pub value_tol: f64,
    pub plateau_tol: f64,
}

impl Default for ShapeTolerances {
    fn default() -> Self {
        Self {
            value_tol: DEFAULT_VALUE_TOL,
            plateau_tol: DEFAULT_PLATEAU_TOL,
        }
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Trend {
    Unknown,
    Up,
    Down,
}

/// Indices of local maxima of `values`.
///
/// A maximum only counts once the series has fallen more than `value_tol`
/// below it, and a minimum once it has risen more than `value_tol` above, so
/// ripple smaller than `value_tol` is ignored. A series that starts by falling
/// has a maximum at index 0; a series that is still rising at its end has one
/// at its last index.
pub fn local_maxima(values: &[f64], value_tol: f64) -> Vec<usize> {
    let mut peaks = Vec::new();
    if values.is_empty() {
        return peaks;
    }
    let mut trend = Trend::Unknown;
    let (mut hi, mut lo) = (0usize, 0usize);
    let mut cand = 0usize;
    for (i, &v) in values.iter().enumerate().skip(1) {
        match trend {
            Trend::Unknown => {
                if v > values[hi] {
                    hi = i;
                }
                if v < values[lo] {
                    lo = i;
                }
                if values[hi] - v > value_tol {
                    peaks.push(hi);
                    trend = Trend::Down;
                    cand = i;
                } else if v - values[lo] > value_tol {
                    trend = Trend::Up;
                    cand = i;
                }
            }
            Trend::Up => {
                if v > values[cand] {
                    cand = i;
                } else if values[cand] - v > value_tol {
                    peaks.push(cand);
                    trend = Trend::Down;
                    cand = i;
                }
            }
            Trend::Down => {
                if v < values[cand] {
                    cand = i;
                } else if v - values[cand] > value_tol {
                    trend = Trend::Up;
                    cand = i;
                }
            }
        }
    }
    if trend == Trend::Up {
        peaks.push(cand);
    }
    peaks
}

/// Classifies one time series.
pub fn classify_shape(times: &[f64], values: &[f64], tol: ShapeTolerances) -> Result<ShapeReport> {
    let n = values.len().min(times.len());
    if n < 3 {
        return Err(Error::InsufficientData(n));
    }
    let values = &values[..n];
    let peaks = local_maxima(values, tol.value_tol);

    if peaks.is_empty() {
        // Flat within value_tol: a positive level is a plateau, zero is degenerate.
        let level = values[0];
        let (shape, plateau) = if level > tol.value_tol {
            (Shape::PlateauPeak, Some((times[0], times[n - 1])))
        } else {
            (Shape::MonotoneDecreasing, None)
        };
        return Ok(ShapeReport {
            shape,
            peak_times: if plateau.is_some() { vec![times[0]] } else { Vec::new() },
            peak_values: if plateau.is_some() { vec![level] } else { Vec::new() },
            plateau,
        });
    }

    let peak_times = peaks.iter().map(|&i| times[i]).collect();
    let peak_values = peaks.iter().map(|&i| values[i]).collect();
    let (shape, plateau) = match peaks.as_slice() {
        [0] => (Shape::MonotoneDecreasing, None),
        [p] => match plateau_around(values, *p, tol.plateau_tol) {
            Some((a, b)) => (Shape::PlateauPeak, Some((times[a], times[b]))),
            None => (Shape::SinglePeak, None),
        },
        _ => (Shape::Multimodal, None),
    };
    Ok(ShapeReport {
        shape,
        peak_times,
        peak_values,
        plateau,
    })
}

/// Index range of points within `plateau_tol` of `values[peak]` around the
/// peak, if it spans more than two steps.
fn plateau_around(values: &[f64], peak: usize, plateau_tol: f64) -> Option<(usize, usize)> {
    let level = values[peak];
    let near = |i: usize| (values[i] - level).abs() <= plateau_tol;
    let mut a = peak;
    while a > 0 && near(a - 1) {
        a -= 1;
    }
    let mut b = peak;
    while b + 1 < values.len() && near(b + 1) {
        b += 1;
    }
    (b - a > 2).then_some((a, b))
}

/// Classifies component `index` of a trajectory.
pub fn classify_trajectory(traj: &Trajectory, index: usize, tol: ShapeTolerances) -> Result<ShapeReport> {
    classify_shape(&traj.times, &traj.component(index), tol)
}
