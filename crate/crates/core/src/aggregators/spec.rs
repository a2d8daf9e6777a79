use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{
    Aggregator, AggregatorError, Cwmv, Exp4, ExpertiseTree, Exploration, FollowMember, MajorityVote, MetaCmab,
    Oracle, Penalty, RandomExpert,
};

fn one() -> f64 {
    1.0
}

/// Serializable description of an aggregator and its hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AlgorithmSpec {
    Random,
    Mv,
    Cwmv,
    Exp4 {
        /// `None` picks the finite-horizon default.
        #[serde(default)]
        gamma: Option<f64>,
    },
    Metacmab {
        #[serde(default = "one")]
        lambda: f64,
        #[serde(default = "one")]
        alpha: f64,
        #[serde(default)]
        exploration: Exploration,
    },
    Etree {
        #[serde(default = "one")]
        lambda: f64,
        #[serde(default = "one")]
        alpha: f64,
        #[serde(default)]
        penalty: Penalty,
    },
    Follow {
        member: usize,
    },
    Oracle,
}

impl AlgorithmSpec {
    pub fn metacmab() -> Self {
        AlgorithmSpec::Metacmab {
            lambda: 1.0,
            alpha: 1.0,
            exploration: Exploration::Optimism,
        }
    }

    pub fn etree() -> Self {
        AlgorithmSpec::Etree {
            lambda: 1.0,
            alpha: 1.0,
            penalty: Penalty::default(),
        }
    }

    /// Short name used in output tables.
    pub fn label(&self) -> String {
        match self {
            AlgorithmSpec::Random => "random".into(),
            AlgorithmSpec::Mv => "mv".into(),
            AlgorithmSpec::Cwmv => "cwmv".into(),
            AlgorithmSpec::Exp4 { .. } => "exp4".into(),
            AlgorithmSpec::Metacmab { .. } => "metacmab".into(),
            AlgorithmSpec::Etree { .. } => "etree".into(),
            AlgorithmSpec::Follow { member } => format!("follow{member}"),
            AlgorithmSpec::Oracle => "oracle".into(),
        }
    }

    pub fn build(&self, experts: usize, arms: usize, horizon: usize) -> Result<Box<dyn Aggregator>, AggregatorError> {
        Ok(match *self {
            AlgorithmSpec::Random => Box::new(RandomExpert),
            AlgorithmSpec::Mv => Box::new(MajorityVote),
            AlgorithmSpec::Cwmv => Box::new(Cwmv),
            AlgorithmSpec::Exp4 { gamma } => {
                let g = gamma.unwrap_or_else(|| Exp4::default_gamma(arms, experts, horizon));
                Box::new(Exp4::new(experts, g)?)
            }
            AlgorithmSpec::Metacmab {
                lambda,
                alpha,
                exploration,
            } => Box::new(MetaCmab::with_exploration(experts, lambda, alpha, exploration)?),
            AlgorithmSpec::Etree { lambda, alpha, penalty } => {
                Box::new(ExpertiseTree::new(experts, lambda, alpha, penalty)?)
            }
            AlgorithmSpec::Follow { member } => {
                if member >= experts {
                    return Err(AggregatorError::Hyperparameter(format!(
                        "member {member} outside a group of {experts}"
                    )));
                }
                Box::new(FollowMember::new(member))
            }
            AlgorithmSpec::Oracle => Box::new(Oracle::default()),
        })
    }

    /// Parses a comma-separated list such as `cwmv,exp4,etree`.
    pub fn parse_list(s: &str) -> Result<Vec<Self>, AggregatorError> {
        s.split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(str::parse)
            .collect()
    }
}

impl fmt::Display for AlgorithmSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// Names take default hyperparameters; `follow<k>` follows member `k`.
impl FromStr for AlgorithmSpec {
    type Err = AggregatorError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim().to_ascii_lowercase();
        Ok(match s.as_str() {
            "random" | "random_expert" => AlgorithmSpec::Random,
            "mv" => AlgorithmSpec::Mv,
            "cwmv" | "wmv" => AlgorithmSpec::Cwmv,
            "exp4" => AlgorithmSpec::Exp4 { gamma: None },
            "metacmab" => AlgorithmSpec::metacmab(),
            "etree" | "expertisetree" => AlgorithmSpec::etree(),
            "oracle" => AlgorithmSpec::Oracle,
            other => match other.strip_prefix("follow").map(str::parse) {
                Some(Ok(member)) => AlgorithmSpec::Follow { member },
                _ => return Err(AggregatorError::UnknownAlgorithm(other.to_string())),
            },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_names_and_lists() {
        let l = AlgorithmSpec::parse_list("cwmv, exp4,follow3").unwrap();
        assert_eq!(l[0], AlgorithmSpec::Cwmv);
        assert_eq!(l[1], AlgorithmSpec::Exp4 { gamma: None });
        assert_eq!(l[2], AlgorithmSpec::Follow { member: 3 });
        assert!(AlgorithmSpec::parse_list("cwmv,bogus").is_err());
    }

    #[test]
    fn json_round_trip_with_defaults() {
        let s: AlgorithmSpec = serde_json::from_str(r#"{"kind":"etree"}"#).unwrap();
        assert_eq!(s, AlgorithmSpec::etree());
        let s: AlgorithmSpec = serde_json::from_str(r#"{"kind":"etree","penalty":{"fixed":0.5}}"#).unwrap();
        assert!(matches!(s, AlgorithmSpec::Etree { penalty: Penalty::Fixed(c), .. } if c == 0.5));
        let back: AlgorithmSpec = serde_json::from_str(&serde_json::to_string(&s).unwrap()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn build_names_match_labels() {
        for s in AlgorithmSpec::parse_list("random,mv,cwmv,exp4,metacmab,etree,oracle").unwrap() {
            assert_eq!(s.build(3, 2, 48).unwrap().name(), s.label());
        }
        assert!(AlgorithmSpec::Follow { member: 3 }.build(3, 2, 48).is_err());
    }
}
