//! Analytic derivatives of smoothed curves and the phase-plane triples
//! (area, velocity, acceleration) with month anchors.

use crate::error::{Error, Result};
use crate::smooth::{CurveEnsemble, FourierCurve};

/// First day of each month on the 365-day (non-leap) domain.
pub const MONTH_START_DAYS: [u16; 12] = [1, 32, 60, 91, 121, 152, 182, 213, 244, 274, 305, 335];

/// Three-letter month tags aligned with [`MONTH_START_DAYS`].
pub const MONTH_LABELS: [&str; 12] = [
    "Jan", "Feb", "Mar", "Apr", "May", "Jun", "Jul", "Aug", "Sep", "Oct", "Nov", "Dec",
];

/// A month marker resolved onto a specific grid.
#[derive(Debug, Clone, PartialEq)]
pub struct MonthAnchor {
    pub label: &'static str,
    /// First day of the month (non-leap calendar).
    pub day: u16,
    /// Index of the nearest grid point.
    pub index: usize,
}

/// Sampled (area, velocity, acceleration) triples over one year.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseCurve {
    grid: Vec<f64>,
    area: Vec<f64>,
    velocity: Vec<f64>,
    acceleration: Vec<f64>,
    month_anchors: Vec<MonthAnchor>,
    label: String,
}

/// Which pair of phase quantities to plot against each other.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhasePair {
    AreaVelocity,
    AreaAcceleration,
    VelocityAcceleration,
}

impl PhasePair {
    pub fn axis_labels(self) -> (&'static str, &'static str) {
        match self {
            PhasePair::AreaVelocity => ("area (million km^2)", "velocity (million km^2/day)"),
            PhasePair::AreaAcceleration => {
                ("area (million km^2)", "acceleration (million km^2/day^2)")
            }
            PhasePair::VelocityAcceleration => (
                "velocity (million km^2/day)",
                "acceleration (million km^2/day^2)",
            ),
        }
    }
}

impl std::str::FromStr for PhasePair {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "area-velocity" | "av" => Ok(PhasePair::AreaVelocity),
            "area-acceleration" | "aa" => Ok(PhasePair::AreaAcceleration),
            "velocity-acceleration" | "va" => Ok(PhasePair::VelocityAcceleration),
            other => Err(Error::config(format!(
                "unknown phase pair {other:?} (area-velocity, area-acceleration, velocity-acceleration)"
            ))),
        }
    }
}

impl PhaseCurve {
    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn area(&self) -> &[f64] {
        &self.area
    }

    pub fn velocity(&self) -> &[f64] {
        &self.velocity
    }

    pub fn acceleration(&self) -> &[f64] {
        &self.acceleration
    }

    pub fn month_anchors(&self) -> &[MonthAnchor] {
        &self.month_anchors
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// The (x, y) series for a chosen axis pair.
    pub fn pair(&self, which: PhasePair) -> (&[f64], &[f64]) {
        match which {
            PhasePair::AreaVelocity => (&self.area, &self.velocity),
            PhasePair::AreaAcceleration => (&self.area, &self.acceleration),
            PhasePair::VelocityAcceleration => (&self.velocity, &self.acceleration),
        }
    }

    /// CSV of all three series over the grid.
    pub fn to_csv(&self) -> String {
        let mut out = format!("# {}\nday,area,velocity,acceleration\n", self.label);
        for i in 0..self.grid.len() {
            out.push_str(&format!(
                "{},{},{},{}\n",
                self.grid[i], self.area[i], self.velocity[i], self.acceleration[i]
            ));
        }
        out
    }

    /// JSON sidecar describing the month anchors.
    pub fn anchors_json(&self) -> String {
        let mut out = format!("{{\"label\":\"{}\",\"months\":[", self.label);
        for (i, a) in self.month_anchors.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str(&format!(
                "{{\"month\":\"{}\",\"day\":{},\"index\":{}}}",
                a.label, a.day, a.index
            ));
        }
        out.push_str("]}");
        out
    }
}

/// Exact analytic derivative of a curve, as coefficients over the same basis.
///
/// The derivative of an odd-size Fourier span stays in the span; its constant
/// coefficient is zero.
pub fn differentiate(curve: &FourierCurve, order: u8) -> Result<FourierCurve> {
    if order != 1 && order != 2 {
        return Err(Error::arg(format!(
            "derivative order must be 1 or 2, got {order}"
        )));
    }
    let p = curve.basis().p();
    let omega = curve.basis().omega();
    let c = curve.coeffs();
    let mut out = vec![0.0; p];
    for m in 1..=(p - 1) / 2 {
        let sin_idx = 2 * m - 1; // basis k = 2m
        let cos_idx = 2 * m; // basis k = 2m + 1
        let a = m as f64 * omega;
        match order {
            1 => {
                // d/dt [s sin(at) + g cos(at)] = a s cos(at) - a g sin(at)
                out[sin_idx] = -a * c[cos_idx];
                out[cos_idx] = a * c[sin_idx];
            }
            _ => {
                out[sin_idx] = -a * a * c[sin_idx];
                out[cos_idx] = -a * a * c[cos_idx];
            }
        }
    }
    FourierCurve::new(*curve.basis(), out, curve.year())
}

fn nearest_index(grid: &[f64], day: f64) -> usize {
    let mut best = 0;
    let mut best_dist = f64::INFINITY;
    for (i, &g) in grid.iter().enumerate() {
        let d = (g - day).abs();
        if d < best_dist {
            best_dist = d;
            best = i;
        }
    }
    best
}

/// Evaluate a curve's area/velocity/acceleration over a grid and attach
/// month anchors.
pub fn phase_curve_of(curve: &FourierCurve, grid: &[f64], label: impl Into<String>) -> Result<PhaseCurve> {
    if grid.is_empty() {
        return Err(Error::arg("phase curve grid is empty"));
    }
    let area = curve.values_on(grid)?;
    let velocity = differentiate(curve, 1)?.values_on(grid)?;
    let acceleration = differentiate(curve, 2)?.values_on(grid)?;
    let month_anchors = MONTH_START_DAYS
        .iter()
        .zip(MONTH_LABELS)
        .map(|(&day, label)| MonthAnchor {
            label,
            day,
            index: nearest_index(grid, f64::from(day)),
        })
        .collect();
    Ok(PhaseCurve {
        grid: grid.to_vec(),
        area,
        velocity,
        acceleration,
        month_anchors,
        label: label.into(),
    })
}

/// Phase curve of a block's mean function (coefficient-wise mean curve),
/// labeled with the block's year span.
pub fn phase_curve(block: &CurveEnsemble) -> Result<PhaseCurve> {
    let mean = block.mean_curve();
    let (start, end) = block.year_span();
    phase_curve_of(&mean, block.grid(), format!("{start}-{end}"))
}

/// Days where the order-th derivative changes sign: extrema for order 1,
/// inflections for order 2. Grid bracketing plus bisection to 1e-3 day.
pub fn zero_crossings(curve: &FourierCurve, order: u8, grid: &[f64]) -> Result<Vec<f64>> {
    let deriv = differentiate(curve, order)?;
    if grid.len() < 2 {
        return Ok(Vec::new());
    }
    let values: Vec<f64> = grid.iter().map(|&t| deriv.eval(t)).collect();
    // Sign changes are judged between consecutive nonzero samples, so runs
    // of exact zeros (a flat derivative, or a touching zero) never count on
    // their own.
    let nonzero: Vec<(usize, f64)> = values
        .iter()
        .enumerate()
        .filter(|(_, v)| **v != 0.0)
        .map(|(i, &v)| (i, v))
        .collect();
    let mut crossings = Vec::new();
    for pair in nonzero.windows(2) {
        let (i, fi) = pair[0];
        let (j, fj) = pair[1];
        if fi * fj >= 0.0 {
            continue;
        }
        if j == i + 1 {
            let mut lo = grid[i];
            let mut hi = grid[j];
            let mut flo = fi;
            while hi - lo > 1e-3 {
                let mid = 0.5 * (lo + hi);
                let fmid = deriv.eval(mid);
                if fmid == 0.0 {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if flo * fmid < 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                    flo = fmid;
                }
            }
            crossings.push(0.5 * (lo + hi));
        } else {
            // The grid itself hit zero; report the middle of the zero run.
            crossings.push(0.5 * (grid[i + 1] + grid[j - 1]));
        }
    }
    Ok(crossings)
}
