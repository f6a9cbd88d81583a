use serde::{Deserialize, Serialize};

use super::{CMat, HermitianMatrix, PositiveMatrix, C64};
use crate::{Error, Result};

/// Matrix literal `{ "dim": N, "re": [[...]], "im": [[...]] }`, row-major.
/// `im` may be omitted for real matrices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixJson {
    pub dim: usize,
    pub re: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im: Option<Vec<Vec<f64>>>,
}

impl MatrixJson {
    pub fn to_matrix(&self) -> Result<CMat> {
        let n = self.dim;
        check_rows(&self.re, n)?;
        if let Some(im) = &self.im {
            check_rows(im, n)?;
        }
        Ok(CMat::from_fn(n, n, |i, j| {
            let im = self.im.as_ref().map_or(0.0, |m| m[i][j]);
            C64::new(self.re[i][j], im)
        }))
    }

    pub fn from_matrix(m: &CMat) -> Self {
        let n = m.nrows();
        let re = (0..n).map(|i| (0..n).map(|j| m[(i, j)].re).collect()).collect();
        let im = (0..n).map(|i| (0..n).map(|j| m[(i, j)].im).collect()).collect();
        Self { dim: n, re, im: Some(im) }
    }

    pub fn to_hermitian(&self) -> Result<HermitianMatrix> {
        HermitianMatrix::new(self.to_matrix()?)
    }

    pub fn to_positive(&self) -> Result<PositiveMatrix> {
        PositiveMatrix::new(self.to_hermitian()?)
    }
}

fn check_rows(rows: &[Vec<f64>], n: usize) -> Result<()> {
    if rows.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: rows.len() });
    }
    for r in rows {
        if r.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: r.len() });
        }
    }
    Ok(())
}

impl Serialize for HermitianMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixJson::from_matrix(self.as_matrix()).serialize(s)
    }
}

impl<'de> Deserialize<'de> for HermitianMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = MatrixJson::deserialize(d)?;
        j.to_hermitian().map_err(serde::de::Error::custom)
    }
}

impl Serialize for PositiveMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.base().serialize(s)
    }
}

impl<'de> Deserialize<'de> for PositiveMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let h = HermitianMatrix::deserialize(d)?;
        PositiveMatrix::new(h).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::{frobenius, random_psd, InstanceKind};
    use proptest::prelude::*;

    #[test]
    fn parses_real_literal() {
        let h: HermitianMatrix = serde_json::from_str(r#"{"dim":2,"re":[[1,2],[2,3]]}"#).unwrap();
        assert_eq!(h.as_matrix()[(0, 1)], C64::new(2.0, 0.0));
    }

    #[test]
    fn rejects_bad_shapes_and_asymmetry() {
        assert!(serde_json::from_str::<HermitianMatrix>(r#"{"dim":2,"re":[[1,2]]}"#).is_err());
        assert!(serde_json::from_str::<HermitianMatrix>(r#"{"dim":2,"re":[[1,2],[0,3]]}"#).is_err());
        assert!(serde_json::from_str::<HermitianMatrix>(r#"{"dim":1,"re":[[1]],"extra":0}"#).is_err());
        assert!(serde_json::from_str::<PositiveMatrix>(r#"{"dim":1,"re":[[-1]]}"#).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn round_trip(seed in any::<u64>(), dim in 1usize..6) {
            let a = random_psd(dim, seed, InstanceKind::Generic);
            let text = serde_json::to_string(&a).unwrap();
            let back: PositiveMatrix = serde_json::from_str(&text).unwrap();
            prop_assert!(frobenius(&(back.as_matrix() - a.as_matrix())) == 0.0);
        }
    }
}
