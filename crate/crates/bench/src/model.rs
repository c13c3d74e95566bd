use std::fmt;
use std::str::FromStr;

use rst_core::{Dataset, Ensemble, RfConfig, RstConfig, Variant};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{BenchError, Result};

/// A model column of the experiment grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Model {
    Rf,
    Rst(Variant),
}

impl Model {
    pub const ALL: [Model; 5] = [
        Model::Rf,
        Model::Rst(Variant::RstB),
        Model::Rst(Variant::RstR),
        Model::Rst(Variant::RstBB),
        Model::Rst(Variant::RstRB),
    ];

    /// Position in [`Model::ALL`]; report columns follow this order.
    pub fn column(self) -> usize {
        Model::ALL.iter().position(|&m| m == self).expect("listed model")
    }

    pub fn name(self) -> &'static str {
        match self {
            Model::Rf => "RF",
            Model::Rst(v) => v.name(),
        }
    }

    /// Label of the same model in listings that swap the bootstrap variants.
    pub fn swapped_label(self) -> &'static str {
        match self {
            Model::Rf => "RF",
            Model::Rst(v) => v.swapped_label(),
        }
    }

    pub fn variant(self) -> Option<Variant> {
        match self {
            Model::Rf => None,
            Model::Rst(v) => Some(v),
        }
    }

    /// Trains this model with `seed` as its master seed and `n_estimators` trees.
    pub fn fit(
        self,
        train: &Dataset,
        rst: &RstConfig,
        rf: &RfConfig,
        n_estimators: usize,
        seed: u64,
    ) -> Result<Ensemble> {
        let ens = match self {
            Model::Rf => Ensemble::fit_rf(
                train,
                &RfConfig {
                    n_estimators,
                    seed,
                    ..rf.clone()
                },
            )?,
            Model::Rst(v) => Ensemble::fit_rst(
                train,
                &RstConfig {
                    n_estimators,
                    master_seed: seed,
                    split_strategy: v.split_strategy(),
                    bootstrap: v.bootstrap(),
                    ..rst.clone()
                },
            )?,
        };
        Ok(ens)
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Model {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self> {
        if s.trim().eq_ignore_ascii_case("RF") {
            return Ok(Model::Rf);
        }
        s.parse::<Variant>().map(Model::Rst).map_err(|_| {
            BenchError::Config(format!(
                "unknown model {s:?}; expected RF, RST-B, RST-R, RST-BB or RST-RB"
            ))
        })
    }
}

impl Serialize for Model {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for Model {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
