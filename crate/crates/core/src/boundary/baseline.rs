use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::PiecewiseLinearBoundary;
use crate::error::{Error, Result};
use crate::stats::QuadForms;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BaselineKind {
    Kelly,
    Amf,
    Ace,
    Kalson,
}

impl fmt::Display for BaselineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Kelly => "kelly",
            Self::Amf => "amf",
            Self::Ace => "ace",
            Self::Kalson => "kalson",
        })
    }
}

impl FromStr for BaselineKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "kelly" => Ok(Self::Kelly),
            "amf" => Ok(Self::Amf),
            "ace" => Ok(Self::Ace),
            "kalson" => Ok(Self::Kalson),
            other => Err(Error::Parse(format!("unknown detector '{other}'"))),
        }
    }
}

/// A classical detector with its threshold `η` on the raw statistic.
///
/// Raw statistics, with `a = z†S⁻¹z` and `q = |z†S⁻¹v|²/(v†S⁻¹v)`:
/// Kelly `q/(1+a)`, AMF `q`, ACE `q/a`, Kalson `q/(1 + κ(a−q))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaselineDetector {
    pub kind: BaselineKind,
    pub threshold: f64,
    #[serde(default)]
    pub kappa: f64,
}

impl BaselineDetector {
    pub fn new(kind: BaselineKind, threshold: f64) -> Result<Self> {
        Self::with_kappa(kind, threshold, 0.0)
    }

    pub fn kalson(kappa: f64, threshold: f64) -> Result<Self> {
        Self::with_kappa(BaselineKind::Kalson, threshold, kappa)
    }

    pub fn with_kappa(kind: BaselineKind, threshold: f64, kappa: f64) -> Result<Self> {
        if !(threshold > 0.0) || !threshold.is_finite() {
            return Err(Error::InvalidParameter(format!("threshold must be positive, got {threshold}")));
        }
        if !(0.0..=1.0).contains(&kappa) {
            return Err(Error::InvalidParameter(format!("Kalson kappa must lie in [0, 1], got {kappa}")));
        }
        if matches!(kind, BaselineKind::Kelly | BaselineKind::Ace) && threshold >= 1.0 {
            return Err(Error::InvalidParameter(format!("{kind} threshold must be below 1, got {threshold}")));
        }
        Ok(Self { kind, threshold, kappa })
    }

    /// The feature-plane boundary of the detector: a single segment.
    pub fn boundary(&self) -> PiecewiseLinearBoundary {
        let eta = self.threshold;
        let (m, eps) = match self.kind {
            BaselineKind::Kelly => (0.0, eta / (1.0 - eta)),
            BaselineKind::Amf => (eta, 0.0),
            BaselineKind::Ace => (-eta / (1.0 - eta), eta / (1.0 - eta)),
            BaselineKind::Kalson => (eta * (1.0 - self.kappa), eta * self.kappa),
        };
        PiecewiseLinearBoundary::new_unchecked(vec![m], vec![eps]).expect("finite coefficients")
    }

    pub fn value(&self, beta: f64) -> f64 {
        let b = self.boundary();
        b.line(0, beta).max(0.0)
    }
}

/// The raw decision statistic of a detector kind.
pub fn raw_statistic(kind: BaselineKind, kappa: f64, forms: QuadForms) -> f64 {
    let QuadForms { a, q } = forms;
    match kind {
        BaselineKind::Kelly => q / (1.0 + a),
        BaselineKind::Amf => q,
        BaselineKind::Ace => {
            if a == 0.0 {
                0.0
            } else {
                q / a
            }
        }
        BaselineKind::Kalson => q / (1.0 + kappa * (a - q)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kalson_endpoints_collapse() {
        let k0 = BaselineDetector::kalson(0.0, 0.7).unwrap().boundary();
        let amf = BaselineDetector::new(BaselineKind::Amf, 0.7).unwrap().boundary();
        assert_eq!(k0, amf);
        let k1 = BaselineDetector::kalson(1.0, 0.7).unwrap().boundary();
        assert_eq!(k1.slopes(), &[0.0]);
        assert_eq!(k1.intercepts(), &[0.7]);
    }

    #[test]
    fn shapes() {
        let amf = BaselineDetector::new(BaselineKind::Amf, 2.0).unwrap();
        assert_eq!(amf.value(0.0), 0.0);
        assert!(amf.boundary().slopes()[0] > 0.0);
        let ace = BaselineDetector::new(BaselineKind::Ace, 0.2).unwrap();
        assert!((ace.value(1.0)).abs() < 1e-15);
        assert!((ace.value(0.0) - 0.25).abs() < 1e-15);
        let kelly = BaselineDetector::new(BaselineKind::Kelly, 0.5).unwrap();
        assert_eq!(kelly.value(0.3), 1.0);
    }

    #[test]
    fn invalid_thresholds() {
        assert!(BaselineDetector::new(BaselineKind::Ace, 1.0).is_err());
        assert!(BaselineDetector::new(BaselineKind::Kelly, 1.5).is_err());
        assert!(BaselineDetector::new(BaselineKind::Amf, 0.0).is_err());
        assert!(BaselineDetector::kalson(1.5, 0.3).is_err());
        assert!("rob".parse::<BaselineKind>().is_err());
        assert_eq!("AMF".parse::<BaselineKind>().unwrap(), BaselineKind::Amf);
    }

    #[test]
    fn raw_statistics_in_feature_coordinates() {
        let forms = QuadForms { a: 3.0, q: 1.2 };
        let fp = forms.feature();
        assert!((raw_statistic(BaselineKind::Kelly, 0.0, forms) - fp.kelly()).abs() < 1e-15);
        let ace = raw_statistic(BaselineKind::Ace, 0.0, forms);
        assert!((0.0..=1.0).contains(&ace));
    }
}
