//! Ground-truth synthetic demonstrations built from known screws.
//!
//! Noise model: each pose gets an isotropic Gaussian position offset whose
//! per-axis standard deviation is `sigma_p / sqrt(3)` (so the RMS offset
//! length is `sigma_p`), and its orientation is left-multiplied by the
//! normalized quaternion `(1, v)` with `v` isotropic Gaussian of per-axis
//! standard deviation `sigma_phi / sqrt(3)` (so the RMS quaternion chord to
//! the clean orientation is about `sigma_phi`). The rotation is about the
//! pose's own position, which the orientation noise leaves unchanged.
//!
//! With this convention the offset length follows `sigma_p / sqrt(3)` times a
//! chi distribution with three degrees of freedom: mean
//! `sigma_p * 2 sqrt(2 / pi) / sqrt(3) ~= 0.921 sigma_p`, median
//! `~0.888 sigma_p`.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::dual_quat::UnitDualQuaternion;
use crate::error::{Error, Result};
use crate::extraction::{PoseTrajectory, Verdict};
use crate::float;
use crate::quat::{Quaternion, UnitQuaternion};
use crate::screw::{Pitch, ScrewParams, ScrewPower};
use crate::segmentation::{ResidualStats, ScrewSegment, Segmentation};
use crate::vec3::Vec3;

/// One constant-screw leg: world-frame screw (its `magnitude` is the leg's
/// total motion) sampled at `samples` evenly spaced poses after the leg start.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthLeg {
    pub screw: ScrewParams,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub legs: Vec<SynthLeg>,
    pub start: UnitDualQuaternion,
    pub sigma_p: f64,
    pub sigma_phi: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthOutput {
    /// Noisy demonstration: the start pose followed by every leg's samples.
    pub trajectory: PoseTrajectory,
    /// The same poses without noise.
    pub clean: PoseTrajectory,
    /// Leg boundaries on the clean poses.
    pub ground_truth: Segmentation,
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        if self.legs.is_empty() {
            return Err(Error::InvalidSynth("at least one leg is required"));
        }
        if self.legs.iter().any(|l| l.samples < 2) {
            return Err(Error::InvalidSynth("each leg needs at least two samples"));
        }
        if !(self.sigma_p >= 0.0 && self.sigma_phi >= 0.0) {
            return Err(Error::InvalidSynth("noise levels must be non-negative"));
        }
        for leg in &self.legs {
            leg.screw.validate()?;
        }
        Ok(())
    }
}

/// Applies the noise model to one pose.
pub fn perturb_pose<R: Rng + ?Sized>(d: &UnitDualQuaternion, sigma_p: f64, sigma_phi: f64, rng: &mut R) -> UnitDualQuaternion {
    let per_axis_p = sigma_p / float::sqrt(3.0);
    let per_axis_phi = sigma_phi / float::sqrt(3.0);
    let mut gauss3 = |s: f64| {
        let x: f64 = StandardNormal.sample(rng);
        let y: f64 = StandardNormal.sample(rng);
        let z: f64 = StandardNormal.sample(rng);
        Vec3::new(x, y, z) * s
    };
    let dp = gauss3(per_axis_p);
    let v = gauss3(per_axis_phi);
    if sigma_p == 0.0 && sigma_phi == 0.0 {
        return *d;
    }
    let noise = UnitQuaternion::new_normalize(Quaternion::new(1.0, v));
    UnitDualQuaternion::from_rotation_translation(noise * d.rotation(), d.translation() + dp)
}

/// The noise generator used by [`gen_trajectory`] for a given seed.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gen_trajectory(spec: &SynthSpec) -> Result<SynthOutput> {
    spec.validate()?;
    let mut clean = Vec::with_capacity(1 + spec.legs.iter().map(|l| l.samples).sum::<usize>());
    clean.push(spec.start);
    let mut segments = Vec::with_capacity(spec.legs.len());
    for leg in &spec.legs {
        let start_index = clean.len() - 1;
        let leg_start = clean[start_index];
        let power = ScrewPower::new(&leg.screw.displacement());
        for k in 1..=leg.samples {
            let tau = k as f64 / leg.samples as f64;
            clean.push(power.power(tau) * leg_start);
        }
        let end_index = clean.len() - 1;
        segments.push(ScrewSegment {
            start_index,
            end_index,
            start_pose: leg_start,
            end_pose: clean[end_index],
            verdict: match leg.screw.pitch {
                Pitch::Infinite => Verdict::PureTranslation,
                Pitch::Finite(_) => Verdict::GeneralScrew,
            },
            params: Some(leg.screw),
            residual_stats: ResidualStats::default(),
        });
    }
    let mut rng = rng_from_seed(spec.seed);
    let noisy: Vec<_> = clean.iter().map(|d| perturb_pose(d, spec.sigma_p, spec.sigma_phi, &mut rng)).collect();
    let source_len = clean.len();
    Ok(SynthOutput {
        trajectory: PoseTrajectory::new(noisy)?,
        clean: PoseTrajectory::new(clean)?,
        ground_truth: Segmentation { segments, source_len },
    })
}
