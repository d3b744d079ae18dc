//! Ordinal support and demandingness scales.
//!
//! Both scales have nine categories mirrored around a neutral midpoint. Each
//! category carries a ratio pair at initiation: `(numerator, denominator)`.
//! Level names (as written in model files) are the source of truth; ratio
//! pairs are derived from them.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown {scale} level `{name}`")]
pub struct LevelParseError {
    pub scale: &'static str,
    pub name: String,
}

/// Ratio magnitudes of the four non-neutral grades, weakest first.
const GRADE_RATIOS: [f64; 4] = [1.5, 3.0, 8.0, 50.0];

fn pair_for_rank(rank: i8) -> (f64, f64) {
    match rank {
        0 => (1.0, 1.0),
        r if r > 0 => (GRADE_RATIOS[(r - 1) as usize], 1.0),
        r => (1.0, GRADE_RATIOS[(-r - 1) as usize]),
    }
}

/// Collapse a signed rank to the five-category scale: grades 4,3 → 3 and
/// grades 2,1 → 1, sign preserved.
fn coarse_rank(rank: i8) -> i8 {
    match rank.abs() {
        0 => 0,
        1 | 2 => rank.signum(),
        _ => 3 * rank.signum(),
    }
}

macro_rules! ordinal_scale {
    (
        $(#[$meta:meta])*
        $name:ident, $scale:literal,
        [$($variant:ident = $rank:literal => $label:literal $(| $alias:literal)*),+ $(,)?]
    ) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum $name {
            $($variant),+
        }

        impl $name {
            pub const ALL: [$name; 9] = [$($name::$variant),+];

            /// Signed position on the scale, -4 ..= 4, neutral at 0.
            pub fn rank(self) -> i8 {
                match self {
                    $($name::$variant => $rank),+
                }
            }

            pub fn from_rank(rank: i8) -> Option<Self> {
                match rank {
                    $($rank => Some($name::$variant),)+
                    _ => None,
                }
            }

            pub fn name(self) -> &'static str {
                match self {
                    $($name::$variant => $label),+
                }
            }

            /// `(numerator, denominator)` at initiation.
            pub fn ratio_pair(self) -> (f64, f64) {
                pair_for_rank(self.rank())
            }

            pub fn ratio(self) -> f64 {
                let (n, d) = self.ratio_pair();
                n / d
            }

            pub fn is_neutral(self) -> bool {
                self.rank() == 0
            }

            /// Five-category collapse used by the coarse-graining variant.
            pub fn coarse(self) -> Self {
                Self::from_rank(coarse_rank(self.rank())).expect("coarse rank in range")
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.name())
            }
        }

        impl FromStr for $name {
            type Err = LevelParseError;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                let norm = s.trim().to_ascii_lowercase();
                let norm = norm.split_whitespace().collect::<Vec<_>>().join(" ");
                match norm.as_str() {
                    $($label $(| $alias)* => Ok($name::$variant),)+
                    _ => Err(LevelParseError { scale: $scale, name: s.to_string() }),
                }
            }
        }

        impl Serialize for $name {
            fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
                serializer.serialize_str(self.name())
            }
        }

        impl<'de> Deserialize<'de> for $name {
            fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
                let s = String::deserialize(deserializer)?;
                s.parse().map_err(serde::de::Error::custom)
            }
        }
    };
}

ordinal_scale! {
    /// How much more often the child is present when the parent is present
    /// than when it is absent (sensitivity / (1 - specificity)).
    SupportLevel, "support",
    [
        OverwhelmingCountersupport = -4 => "overwhelming countersupport",
        StrongCountersupport = -3 => "strong countersupport",
        ModerateCountersupport = -2 => "moderate countersupport",
        WeakCountersupport = -1 => "weak countersupport",
        NoSupport = 0 => "no support" | "none" | "neutral" | "no bearing",
        Weak = 1 => "weak support",
        Moderate = 2 => "moderate support",
        Strong = 3 => "strong support",
        Overwhelming = 4 => "overwhelming support",
    ]
}

ordinal_scale! {
    /// How rare the child is when the parent is absent
    /// (specificity / (1 - specificity)).
    DemandingnessLevel, "demandingness",
    [
        OverwhelminglyUndemanding = -4 => "overwhelmingly undemanding",
        StronglyUndemanding = -3 => "strongly undemanding",
        ModeratelyUndemanding = -2 => "moderately undemanding",
        WeaklyUndemanding = -1 => "weakly undemanding",
        Neutral = 0 => "neutral" | "neutral demandingness",
        Weakly = 1 => "weakly demanding",
        Moderately = 2 => "moderately demanding",
        Strongly = 3 => "strongly demanding",
        Overwhelmingly = 4 => "overwhelmingly demanding",
    ]
}

impl SupportLevel {
    pub fn is_positive(self) -> bool {
        self.rank() > 0
    }

    pub fn is_negative(self) -> bool {
        self.rank() < 0
    }
}
