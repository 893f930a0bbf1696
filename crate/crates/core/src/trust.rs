//! Dynamic trust scoring.
//!
//! A [`TrustScore`] blends four components, each in `[0, 1]`:
//!
//! - **role**: the highest configured weight among the principal's roles
//! - **purpose**: the configured score of the declared purpose
//! - **context**: the mean of network, device and authentication factor scores
//! - **behavior**: the Beta posterior mean maintained by [`crate::behavior`]
//!
//! The blend is a convex combination, so the raw score is monotone in every
//! component and always stays in `[0, 1]`. The raw score is then discretized
//! into one of four tiers.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance used when checking that weights are normalized.
const WEIGHT_SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TrustError {
    #[error("principal id must be nonempty")]
    EmptyPrincipalId,
    #[error("role `{role}` of principal `{principal}` has no configured weight")]
    UnknownRole { principal: String, role: String },
    #[error("behavior score {0} is outside [0, 1]")]
    BehaviorOutOfRange(f64),
    #[error("trust weights must be nonnegative and sum to 1 (got {0})")]
    WeightsNotNormalized(f64),
    #[error("tier thresholds must satisfy 0 < t1 < t2 < t3 < 1 (got {0:?})")]
    BadThresholds([f64; 3]),
    #[error("factor score for `{0}` is outside [0, 1]")]
    FactorOutOfRange(String),
}

/// Discrete trust tier, 0 (least trusted) to 3 (most trusted).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Tier(u8);

impl Tier {
    pub const ZERO: Tier = Tier(0);
    pub const ONE: Tier = Tier(1);
    pub const TWO: Tier = Tier(2);
    pub const THREE: Tier = Tier(3);
    pub const ALL: [Tier; 4] = [Tier::ZERO, Tier::ONE, Tier::TWO, Tier::THREE];

    /// Returns `None` for values above 3.
    pub fn new(value: u8) -> Option<Tier> {
        (value <= 3).then_some(Tier(value))
    }

    pub fn get(self) -> u8 {
        self.0
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for Tier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NetworkZone {
    Trusted,
    Vpn,
    Public,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DevicePosture {
    Managed,
    Unmanaged,
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AuthStrength {
    Mfa,
    Password,
    Anonymous,
}

macro_rules! str_names {
    ($ty:ty { $($variant:ident => $name:literal),* $(,)? }) => {
        impl $ty {
            pub const VARIANTS: &'static [$ty] = &[$(<$ty>::$variant),*];

            pub fn as_str(self) -> &'static str {
                match self {
                    $(<$ty>::$variant => $name),*
                }
            }
        }

        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }
    };
}

str_names!(NetworkZone { Trusted => "trusted", Vpn => "vpn", Public => "public" });
str_names!(DevicePosture { Managed => "managed", Unmanaged => "unmanaged", Unknown => "unknown" });
str_names!(AuthStrength { Mfa => "mfa", Password => "password", Anonymous => "anonymous" });

/// An authenticated caller.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Principal {
    pub id: String,
    #[serde(default)]
    pub roles: BTreeSet<String>,
    #[serde(default)]
    pub attributes: BTreeMap<String, String>,
}

impl Principal {
    pub fn new(id: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            roles: BTreeSet::new(),
            attributes: BTreeMap::new(),
        }
    }

    pub fn with_role(mut self, role: impl Into<String>) -> Self {
        self.roles.insert(role.into());
        self
    }

    pub fn with_attribute(mut self, key: impl Into<String>, value: impl Into<String>) -> Self {
        self.attributes.insert(key.into(), value.into());
        self
    }

    /// Checks the principal against a role-weight map.
    pub fn validate(&self, role_weights: &BTreeMap<String, f64>) -> Result<(), TrustError> {
        if self.id.is_empty() {
            return Err(TrustError::EmptyPrincipalId);
        }
        if let Some(role) = self.roles.iter().find(|r| !role_weights.contains_key(*r)) {
            return Err(TrustError::UnknownRole {
                principal: self.id.clone(),
                role: role.clone(),
            });
        }
        Ok(())
    }
}

/// Per-request environment of a call.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RequestContext {
    pub purpose: String,
    pub network_zone: NetworkZone,
    pub device_posture: DevicePosture,
    pub auth_strength: AuthStrength,
    pub timestamp: DateTime<Utc>,
}

impl RequestContext {
    pub fn new(
        purpose: impl Into<String>,
        network_zone: NetworkZone,
        device_posture: DevicePosture,
        auth_strength: AuthStrength,
    ) -> Self {
        Self {
            purpose: purpose.into(),
            network_zone,
            device_posture,
            auth_strength,
            timestamp: Utc::now(),
        }
    }
}

/// Factor tables mapping context enums to scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ContextFactors {
    pub network: BTreeMap<NetworkZone, f64>,
    pub device: BTreeMap<DevicePosture, f64>,
    pub auth: BTreeMap<AuthStrength, f64>,
}

impl Default for ContextFactors {
    fn default() -> Self {
        Self {
            network: [
                (NetworkZone::Trusted, 1.0),
                (NetworkZone::Vpn, 0.7),
                (NetworkZone::Public, 0.2),
            ]
            .into(),
            device: [
                (DevicePosture::Managed, 1.0),
                (DevicePosture::Unmanaged, 0.3),
                (DevicePosture::Unknown, 0.1),
            ]
            .into(),
            auth: [
                (AuthStrength::Mfa, 1.0),
                (AuthStrength::Password, 0.5),
                (AuthStrength::Anonymous, 0.0),
            ]
            .into(),
        }
    }
}

impl ContextFactors {
    pub fn validate(&self) -> Result<(), TrustError> {
        fn check<K: Copy + fmt::Display + Ord>(
            table: &BTreeMap<K, f64>,
            all: &[K],
            section: &str,
        ) -> Result<(), TrustError> {
            for key in all {
                match table.get(key) {
                    Some(v) if (0.0..=1.0).contains(v) => {}
                    _ => return Err(TrustError::FactorOutOfRange(format!("{section}.{key}"))),
                }
            }
            Ok(())
        }
        check(&self.network, NetworkZone::VARIANTS, "network")?;
        check(&self.device, DevicePosture::VARIANTS, "device")?;
        check(&self.auth, AuthStrength::VARIANTS, "auth")
    }

    fn network(&self, zone: NetworkZone) -> f64 {
        self.network.get(&zone).copied().unwrap_or(0.0)
    }

    fn device(&self, posture: DevicePosture) -> f64 {
        self.device.get(&posture).copied().unwrap_or(0.0)
    }

    fn auth(&self, strength: AuthStrength) -> f64 {
        self.auth.get(&strength).copied().unwrap_or(0.0)
    }
}

/// Component weights and tier thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrustWeights {
    pub role: f64,
    pub purpose: f64,
    pub context: f64,
    pub behavior: f64,
    pub thresholds: [f64; 3],
}

impl Default for TrustWeights {
    fn default() -> Self {
        Self {
            role: 0.4,
            purpose: 0.2,
            context: 0.2,
            behavior: 0.2,
            thresholds: [0.30, 0.60, 0.85],
        }
    }
}

impl TrustWeights {
    pub fn sum(&self) -> f64 {
        self.role + self.purpose + self.context + self.behavior
    }

    pub fn validate(&self) -> Result<(), TrustError> {
        let parts = [self.role, self.purpose, self.context, self.behavior];
        if parts.iter().any(|w| !w.is_finite() || *w < 0.0)
            || (self.sum() - 1.0).abs() > WEIGHT_SUM_TOLERANCE
        {
            return Err(TrustError::WeightsNotNormalized(self.sum()));
        }
        let [t1, t2, t3] = self.thresholds;
        if !(0.0 < t1 && t1 < t2 && t2 < t3 && t3 < 1.0) {
            return Err(TrustError::BadThresholds(self.thresholds));
        }
        Ok(())
    }
}

/// Everything needed to score a principal, loaded from configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct TrustModel {
    pub weights: TrustWeights,
    pub role_weights: BTreeMap<String, f64>,
    pub purpose_scores: BTreeMap<String, f64>,
    pub default_purpose_score: f64,
    pub factors: ContextFactors,
}

impl Default for TrustModel {
    fn default() -> Self {
        Self {
            weights: TrustWeights::default(),
            role_weights: BTreeMap::new(),
            purpose_scores: BTreeMap::new(),
            default_purpose_score: 0.5,
            factors: ContextFactors::default(),
        }
    }
}

impl TrustModel {
    pub fn score(
        &self,
        principal: &Principal,
        ctx: &RequestContext,
        behavior: f64,
    ) -> Result<TrustScore, TrustError> {
        if !(0.0..=1.0).contains(&behavior) {
            return Err(TrustError::BehaviorOutOfRange(behavior));
        }
        let role = principal
            .roles
            .iter()
            .map(|r| {
                self.role_weights
                    .get(r)
                    .copied()
                    .ok_or_else(|| TrustError::UnknownRole {
                        principal: principal.id.clone(),
                        role: r.clone(),
                    })
            })
            .try_fold(0.0_f64, |acc, w| w.map(|w| acc.max(w)))?;
        let purpose = self
            .purpose_scores
            .get(&ctx.purpose)
            .copied()
            .unwrap_or(self.default_purpose_score);
        let components = TrustComponents {
            role,
            purpose,
            context: compute_context_score(ctx, &self.factors),
            behavior,
        };
        Ok(TrustScore::from_components(
            components,
            &self.weights,
            Utc::now(),
        ))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrustComponents {
    pub role: f64,
    pub purpose: f64,
    pub context: f64,
    pub behavior: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrustScore {
    pub raw: f64,
    pub tier: Tier,
    pub components: TrustComponents,
    pub computed_at: DateTime<Utc>,
}

impl TrustScore {
    /// Blends already-computed components.
    pub fn from_components(
        components: TrustComponents,
        weights: &TrustWeights,
        computed_at: DateTime<Utc>,
    ) -> Self {
        let raw = (weights.role * components.role
            + weights.purpose * components.purpose
            + weights.context * components.context
            + weights.behavior * components.behavior)
            .clamp(0.0, 1.0);
        Self {
            raw,
            tier: tier_of(raw, weights.thresholds),
            components,
            computed_at,
        }
    }
}

/// Mean of the network, device and authentication factor scores.
pub fn compute_context_score(ctx: &RequestContext, factors: &ContextFactors) -> f64 {
    (factors.network(ctx.network_zone)
        + factors.device(ctx.device_posture)
        + factors.auth(ctx.auth_strength))
        / 3.0
}

/// Scores `principal` under `model`, substituting `weights` for the model's own.
pub fn compute_trust_score(
    principal: &Principal,
    ctx: &RequestContext,
    behavior: f64,
    weights: &TrustWeights,
    model: &TrustModel,
) -> Result<TrustScore, TrustError> {
    weights.validate()?;
    let model = TrustModel {
        weights: *weights,
        ..model.clone()
    };
    model.score(principal, ctx, behavior)
}

/// Thresholds are inclusive upward: `raw == t2` lands in tier 2.
pub fn tier_of(raw: f64, thresholds: [f64; 3]) -> Tier {
    let [t1, t2, t3] = thresholds;
    if raw >= t3 {
        Tier::THREE
    } else if raw >= t2 {
        Tier::TWO
    } else if raw >= t1 {
        Tier::ONE
    } else {
        Tier::ZERO
    }
}
