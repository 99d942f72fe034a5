//! Damping-factor grids written as `START:STOP:STEP`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Slack on the point count so that `0:0.95:0.05` includes 0.95.
const COUNT_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct DampingGrid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl DampingGrid {
    pub fn new(start: f64, stop: f64, step: f64) -> Result<Self> {
        if !(start.is_finite() && stop.is_finite() && step.is_finite()) {
            return Err(Error::InvalidParameter("grid bounds must be finite".into()));
        }
        if !(0.0 <= start && start <= stop && stop < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "grid needs 0 <= START <= STOP < 1, got {start}:{stop}"
            )));
        }
        if step.is_nan() || step <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "grid STEP must be positive, got {step}"
            )));
        }
        Ok(Self { start, stop, step })
    }

    /// Points `start + k*step`, rounded to 12 decimals to drop accumulated
    /// representation error.
    pub fn points(&self) -> Vec<f64> {
        let count = ((self.stop - self.start) / self.step + COUNT_SLACK).floor() as usize + 1;
        (0..count)
            .map(|k| {
                let c = self.start + k as f64 * self.step;
                ((c * 1e12).round() / 1e12).min(self.stop)
            })
            .collect()
    }
}

impl FromStr for DampingGrid {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(Error::InvalidParameter(format!(
                "grid must be START:STOP:STEP, got {s:?}"
            )));
        }
        let num = |p: &str| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidParameter(format!("grid component {p:?} is not a number")))
        };
        Self::new(num(parts[0])?, num(parts[1])?, num(parts[2])?)
    }
}

impl fmt::Display for DampingGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.start, self.stop, self.step)
    }
}

/// Parses a comma-separated list of damping factors in `[0, 1)`.
pub fn parse_damping_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|p| {
            let c: f64 = p
                .trim()
                .parse()
                .map_err(|_| Error::InvalidParameter(format!("damping {p:?} is not a number")))?;
            if !(0.0..1.0).contains(&c) {
                return Err(Error::InvalidParameter(format!("damping must lie in [0, 1), got {c}")));
            }
            Ok(c)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twenty_points() {
        let g: DampingGrid = "0:0.95:0.05".parse().unwrap();
        let p = g.points();
        assert_eq!(p.len(), 20);
        assert_eq!(p[0], 0.0);
        assert_eq!(p[19], 0.95);
        assert_eq!(p[3], 0.15);
    }

    #[test]
    fn hundred_points() {
        let p = "0:0.99:0.01".parse::<DampingGrid>().unwrap().points();
        assert_eq!(p.len(), 100);
        assert_eq!(p[99], 0.99);
    }

    #[test]
    fn single_point() {
        assert_eq!("0.5:0.5:0.1".parse::<DampingGrid>().unwrap().points(), vec![0.5]);
    }

    #[test]
    fn rejects_bad_grids() {
        for bad in [
            "0:1:0.1",
            "0.5:0.4:0.1",
            "0:0.9:0",
            "-0.1:0.5:0.1",
            "0:0.5",
            "a:0.5:0.1",
        ] {
            assert!(bad.parse::<DampingGrid>().is_err(), "{bad}");
        }
    }

    #[test]
    fn damping_lists() {
        assert_eq!(parse_damping_list("0.5, 0.85,0.95").unwrap(), vec![0.5, 0.85, 0.95]);
        assert!(parse_damping_list("0.5,1").is_err());
        assert!(parse_damping_list("x").is_err());
    }
}
