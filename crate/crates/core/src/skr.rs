use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Propagation segment an eavesdropper can sit on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Segment {
    #[serde(rename = "d")]
    Direct,
    #[serde(rename = "t")]
    TxRis,
    #[serde(rename = "r")]
    RisRx,
}

impl Segment {
    pub const ALL: [Segment; 3] = [Segment::Direct, Segment::TxRis, Segment::RisRx];
}

/// Eavesdropping model: a single tapped segment, or full purification of
/// the composite channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Scenario {
    Local(Segment),
    Global,
}

impl Scenario {
    pub const ALL: [Scenario; 4] = [
        Scenario::Local(Segment::Direct),
        Scenario::Local(Segment::TxRis),
        Scenario::Local(Segment::RisRx),
        Scenario::Global,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Scenario::Local(Segment::Direct) => "d",
            Scenario::Local(Segment::TxRis) => "t",
            Scenario::Local(Segment::RisRx) => "r",
            Scenario::Global => "global",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "d" => Ok(Scenario::Local(Segment::Direct)),
            "t" => Ok(Scenario::Local(Segment::TxRis)),
            "r" => Ok(Scenario::Local(Segment::RisRx)),
            "global" => Ok(Scenario::Global),
            other => Err(Error::Contract(format!(
                "unknown scenario `{other}` (expected d, t, r or global)"
            ))),
        }
    }
}

impl TryFrom<String> for Scenario {
    type Error = Error;
    fn try_from(s: String) -> Result<Self, Error> {
        s.parse()
    }
}

impl From<Scenario> for String {
    fn from(s: Scenario) -> String {
        s.as_str().to_string()
    }
}

/// Contribution of one parallel subchannel in the global model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubchannelSkr {
    pub index: usize,
    pub transmissivity: f64,
    pub mutual_information: f64,
    pub holevo: f64,
    pub skr: f64,
}

/// Key-rate terms at one operating point, in bits per channel use.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkrBreakdown {
    pub scenario: Scenario,
    pub mutual_information: f64,
    pub holevo: f64,
    /// Raw rate; negative values are kept.
    pub skr: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub subchannels: Vec<SubchannelSkr>,
}

impl SkrBreakdown {
    pub fn new(scenario: Scenario, mutual_information: f64, holevo: f64) -> Self {
        SkrBreakdown {
            scenario,
            mutual_information,
            holevo,
            skr: mutual_information - holevo,
            subchannels: Vec::new(),
        }
    }

    pub fn clamped(&self) -> f64 {
        self.skr.max(0.0)
    }
}
