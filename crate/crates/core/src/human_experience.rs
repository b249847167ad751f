//! Knowledge-driven proposals from a pair of networks.
//!
//! Every ordered pair of evaluated configurations yields a training row
//! `(base, ΔP, Δλ̄)`. One network (the *adjuster*) learns `(base, ΔP) -> Δλ̄`,
//! the other (the *verifier*) learns `(base, Δλ̄) -> ΔP`. Each known
//! configuration is then asked for the adjustment that would close its
//! remaining headroom to the ideal score; the verifier predicts the gain of
//! that adjustment, and candidates on which the two networks agree best (the
//! smallest gap between requested and verified gain) are proposed first.

use std::cmp::Ordering;
use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::experience::{dedup_triples, ordered_pair_triples, pspace, ExperienceSet, TripleOrientation};
use crate::nn::{rows_to_matrix, MlpNetwork, TrainSettings};
use crate::rng::{derive_seed, seeded, SeededRng};
use crate::space::{Configuration, SearchSpace};

/// Performance deltas enter the networks as fractions (`ΔP / 100`), clipped
/// to this magnitude so near-zero scores cannot produce unbounded inputs.
pub const NET_GAIN_LIMIT: f64 = 10.0;

fn gain_to_net(percent: f64) -> f64 {
    (percent / 100.0).clamp(-NET_GAIN_LIMIT, NET_GAIN_LIMIT)
}

/// Predicts the normalized adjustment that changes performance by
/// `requested_gain` percent.
pub trait AdjustmentModel {
    fn adjustment(&self, base: &[f64], requested_gain: f64) -> Vec<f64>;
}

/// Predicts the performance change, in percent, of applying `adjust`.
pub trait GainModel {
    fn gain(&self, base: &[f64], adjust: &[f64]) -> f64;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GapOrder {
    /// Smallest disagreement first.
    #[default]
    Ascending,
    /// Largest disagreement first (the literal sort of the pseudocode).
    Descending,
}

impl GapOrder {
    fn compare(self, a: f64, b: f64) -> Ordering {
        match self {
            GapOrder::Ascending => a.total_cmp(&b),
            GapOrder::Descending => b.total_cmp(&a),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct HumanExperienceSettings {
    pub train: TrainSettings,
    pub orientation: TripleOrientation,
    pub order: GapOrder,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeCandidate {
    pub config: Configuration,
    pub confidence_gap: f64,
}

/// The trained adjuster/verifier pair.
#[derive(Debug, Clone)]
pub struct NetworkPair {
    adjust: MlpNetwork,
    verify: MlpNetwork,
}

impl NetworkPair {
    pub fn hidden_width(dim: usize) -> usize {
        (2 * dim).max(16)
    }

    pub fn train(
        exp: &ExperienceSet,
        space: &SearchSpace,
        settings: &HumanExperienceSettings,
        seed: u64,
    ) -> Result<Self> {
        let n = space.dim();
        let h = Self::hidden_width(n);
        let triples = dedup_triples(ordered_pair_triples(exp, space, settings.orientation)?);

        let adjust_in: Vec<Vec<f64>> = triples
            .iter()
            .map(|t| {
                let mut row = t.base.coords().to_vec();
                row.push(gain_to_net(t.pdiff));
                row
            })
            .collect();
        let adjust_out: Vec<Vec<f64>> = triples.iter().map(|t| t.adjust.clone()).collect();
        let verify_in: Vec<Vec<f64>> = triples
            .iter()
            .map(|t| {
                let mut row = t.base.coords().to_vec();
                row.extend_from_slice(&t.adjust);
                row
            })
            .collect();
        let verify_out: Vec<Vec<f64>> = triples.iter().map(|t| vec![gain_to_net(t.pdiff)]).collect();

        let mut adjust = MlpNetwork::init(&[n + 1, h, h, n], derive_seed(seed, 1))?;
        adjust.train(
            rows_to_matrix(&adjust_in, n + 1)?.view(),
            rows_to_matrix(&adjust_out, n)?.view(),
            &settings.train,
        )?;
        let mut verify = MlpNetwork::init(&[2 * n, h, h, 1], derive_seed(seed, 2))?;
        verify.train(
            rows_to_matrix(&verify_in, 2 * n)?.view(),
            rows_to_matrix(&verify_out, 1)?.view(),
            &settings.train,
        )?;
        Ok(Self { adjust, verify })
    }

    pub fn adjuster(&self) -> &MlpNetwork {
        &self.adjust
    }

    pub fn verifier(&self) -> &MlpNetwork {
        &self.verify
    }
}

impl AdjustmentModel for NetworkPair {
    fn adjustment(&self, base: &[f64], requested_gain: f64) -> Vec<f64> {
        let mut input = base.to_vec();
        input.push(gain_to_net(requested_gain));
        self.adjust
            .forward(&input)
            .unwrap_or_else(|_| vec![f64::NAN; base.len()])
    }
}

impl GainModel for NetworkPair {
    fn gain(&self, base: &[f64], adjust: &[f64]) -> f64 {
        let mut input = base.to_vec();
        input.extend_from_slice(adjust);
        self.verify
            .forward(&input)
            .map(|out| out[0] * 100.0)
            .unwrap_or(f64::NAN)
    }
}

/// Applies each entry's requested adjustment and records how far the verifier
/// disagrees with the requested gain. Candidates are in experience order and
/// may repeat known configurations; non-finite predictions are dropped.
pub fn score_candidates(
    exp: &ExperienceSet,
    space: &SearchSpace,
    f_ideal: f64,
    adjust: &dyn AdjustmentModel,
    verify: &dyn GainModel,
) -> Result<Vec<HeCandidate>> {
    let mut out = Vec::with_capacity(exp.len());
    for entry in exp.entries() {
        let base = space.normalize(&entry.config)?;
        let requested = pspace(entry.score, f_ideal);
        let delta = adjust.adjustment(base.coords(), requested);
        if delta.len() != space.dim() {
            return Err(Error::DimensionMismatch {
                expected: space.dim(),
                found: delta.len(),
            });
        }
        let verified = verify.gain(base.coords(), &delta);
        let gap = (requested - verified).abs();
        if !gap.is_finite() || delta.iter().any(|d| !d.is_finite()) {
            continue;
        }
        let target: Vec<f64> = base
            .coords()
            .iter()
            .zip(&delta)
            .map(|(u, d)| (u + d).clamp(0.0, 1.0))
            .collect();
        out.push(HeCandidate {
            config: space.denormalize(&target)?,
            confidence_gap: gap,
        });
    }
    Ok(out)
}

/// Drops known and repeated configurations, orders by gap (stable) and keeps
/// the first `num`.
pub fn select_candidates(
    mut candidates: Vec<HeCandidate>,
    exp: &ExperienceSet,
    num: usize,
    order: GapOrder,
) -> Vec<HeCandidate> {
    candidates.retain(|c| !exp.contains(&c.config));
    candidates.sort_by(|a, b| order.compare(a.confidence_gap, b.confidence_gap));
    let mut seen = HashSet::new();
    candidates
        .into_iter()
        .filter(|c| seen.insert(c.config.clone()))
        .take(num)
        .collect()
}

/// Proposals from externally supplied models. Short lists are padded with
/// fresh uniform samples; the result has `num` entries unless the space runs
/// out of unevaluated configurations.
#[allow(clippy::too_many_arguments)]
pub fn propose_with_models(
    exp: &ExperienceSet,
    space: &SearchSpace,
    num: usize,
    f_ideal: f64,
    adjust: &dyn AdjustmentModel,
    verify: &dyn GainModel,
    order: GapOrder,
    rng: &mut SeededRng,
) -> Result<Vec<Configuration>> {
    check_inputs(exp, num)?;
    let scored = score_candidates(exp, space, f_ideal, adjust, verify)?;
    let mut chosen: Vec<Configuration> = select_candidates(scored, exp, num, order)
        .into_iter()
        .map(|c| c.config)
        .collect();
    pad_with_uniform(space, exp, &mut chosen, num, rng);
    Ok(chosen)
}

pub fn propose_with_settings(
    exp: &ExperienceSet,
    space: &SearchSpace,
    num: usize,
    f_ideal: f64,
    settings: &HumanExperienceSettings,
    seed: u64,
) -> Result<Vec<Configuration>> {
    check_inputs(exp, num)?;
    let pair = NetworkPair::train(exp, space, settings, seed)?;
    let mut rng = seeded(derive_seed(seed, 3));
    propose_with_models(exp, space, num, f_ideal, &pair, &pair, settings.order, &mut rng)
}

/// Trains the network pair on `exp` and proposes `num` new configurations.
pub fn propose(
    exp: &ExperienceSet,
    space: &SearchSpace,
    num: usize,
    f_ideal: f64,
    seed: u64,
) -> Result<Vec<Configuration>> {
    propose_with_settings(exp, space, num, f_ideal, &HumanExperienceSettings::default(), seed)
}

fn check_inputs(exp: &ExperienceSet, num: usize) -> Result<()> {
    if exp.len() < 2 {
        return Err(Error::InsufficientExperience {
            needed: 2,
            found: exp.len(),
        });
    }
    if num == 0 {
        return Err(Error::InvalidArgument("num must be at least 1".into()));
    }
    Ok(())
}

pub(crate) fn pad_with_uniform(
    space: &SearchSpace,
    exp: &ExperienceSet,
    chosen: &mut Vec<Configuration>,
    num: usize,
    rng: &mut SeededRng,
) {
    if chosen.len() >= num {
        return;
    }
    let mut seen: HashSet<Configuration> = exp.configurations().clone();
    seen.extend(chosen.iter().cloned());
    while chosen.len() < num {
        match space.sample_novel(&seen, rng) {
            Some(cfg) => {
                seen.insert(cfg.clone());
                chosen.push(cfg);
            }
            None => break,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experience::pdiffer;
    use crate::space::{HyperparameterDef, Value};

    fn line() -> SearchSpace {
        SearchSpace::new(vec![HyperparameterDef::real("x", 0.0, 1.0).unwrap()]).unwrap()
    }

    fn x(v: f64) -> Configuration {
        Configuration::new(vec![Value::real(v)])
    }

    fn quad(v: f64) -> f64 {
        -(v - 0.8).powi(2) + 0.96
    }

    fn sample_exp() -> ExperienceSet {
        let mut exp = ExperienceSet::new();
        for v in [0.0, 0.5, 1.0] {
            exp.push(x(v), quad(v)).unwrap();
        }
        exp
    }

    #[test]
    fn ascending_gap_selection() {
        let exp = sample_exp();
        let cands = vec![
            HeCandidate { config: x(0.1), confidence_gap: 0.5 },
            HeCandidate { config: x(0.2), confidence_gap: 0.01 },
            HeCandidate { config: x(0.3), confidence_gap: 0.2 },
        ];
        let picked = select_candidates(cands.clone(), &exp, 2, GapOrder::Ascending);
        assert_eq!(picked.iter().map(|c| c.config.clone()).collect::<Vec<_>>(), vec![x(0.2), x(0.3)]);
        let picked = select_candidates(cands, &exp, 2, GapOrder::Descending);
        assert_eq!(picked[0].config, x(0.1));
    }

    #[test]
    fn known_and_repeated_candidates_are_dropped() {
        let exp = sample_exp();
        let cands = vec![
            HeCandidate { config: x(0.5), confidence_gap: 0.0 },
            HeCandidate { config: x(0.7), confidence_gap: 0.3 },
            HeCandidate { config: x(0.7), confidence_gap: 0.1 },
        ];
        let picked = select_candidates(cands, &exp, 5, GapOrder::Ascending);
        assert_eq!(picked.len(), 1);
        assert_eq!(picked[0].confidence_gap, 0.1);
    }

    struct ZeroAdjust;
    impl AdjustmentModel for ZeroAdjust {
        fn adjustment(&self, base: &[f64], _: f64) -> Vec<f64> {
            vec![0.0; base.len()]
        }
    }
    struct ZeroGain;
    impl GainModel for ZeroGain {
        fn gain(&self, _: &[f64], _: &[f64]) -> f64 {
            0.0
        }
    }

    #[test]
    fn colliding_predictions_are_padded_uniformly() {
        let exp = sample_exp();
        let mut rng = seeded(5);
        let out = propose_with_models(&exp, &line(), 3, 0.96, &ZeroAdjust, &ZeroGain, GapOrder::Ascending, &mut rng)
            .unwrap();
        assert_eq!(out.len(), 3);
        let unique: HashSet<_> = out.iter().collect();
        assert_eq!(unique.len(), 3);
        assert!(out.iter().all(|c| !exp.contains(c)));
    }

    /// Moves every configuration to a fixed point; the verifier knows the
    /// analytic objective, so its gain is the true relative improvement.
    struct ToPoint(f64);
    impl AdjustmentModel for ToPoint {
        fn adjustment(&self, base: &[f64], _: f64) -> Vec<f64> {
            vec![self.0 - base[0]]
        }
    }
    struct Oracle;
    impl GainModel for Oracle {
        fn gain(&self, base: &[f64], adjust: &[f64]) -> f64 {
            pdiffer(quad(base[0]), quad((base[0] + adjust[0]).clamp(0.0, 1.0)))
        }
    }

    #[test]
    fn oracle_verifier_ranks_exact_requests_first() {
        let exp = sample_exp();
        let space = line();
        // Moving to the optimum 0.8 realizes exactly the requested headroom.
        let cands = score_candidates(&exp, &space, 0.96, &ToPoint(0.8), &Oracle).unwrap();
        assert_eq!(cands.len(), 3);
        for c in &cands {
            assert!(c.confidence_gap < 1e-9, "gap {}", c.confidence_gap);
        }
        // A proposer aiming elsewhere leaves positive gaps.
        let off = score_candidates(&exp, &space, 0.96, &ToPoint(0.3), &Oracle).unwrap();
        assert!(off.iter().all(|c| c.confidence_gap > 1.0));
    }

    #[test]
    fn trained_pair_end_to_end() {
        let exp = sample_exp();
        let space = line();
        let a = propose(&exp, &space, 2, 0.96, 7).unwrap();
        let b = propose(&exp, &space, 2, 0.96, 7).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 2);
        for c in &a {
            space.validate(c).unwrap();
            assert!(!exp.contains(c));
            if let Value::Real(v) = c.values()[0] {
                assert!((0.0..=1.0).contains(&v));
            }
        }
    }

    #[test]
    fn input_checks() {
        let mut exp = ExperienceSet::new();
        exp.push(x(0.1), 0.5).unwrap();
        assert!(matches!(
            propose(&exp, &line(), 1, 1.0, 0),
            Err(Error::InsufficientExperience { needed: 2, found: 1 })
        ));
        assert!(propose(&sample_exp(), &line(), 0, 1.0, 0).is_err());
    }

    #[test]
    fn network_sizes_follow_dimension() {
        let space = SearchSpace::new(
            (0..10)
                .map(|i| HyperparameterDef::real(format!("p{i}"), 0.0, 1.0).unwrap())
                .collect(),
        )
        .unwrap();
        let mut rng = seeded(1);
        let mut exp = ExperienceSet::new();
        for i in 0..4 {
            exp.push(space.sample_uniform(&mut rng), 0.5 + i as f64 * 0.1).unwrap();
        }
        let settings = HumanExperienceSettings {
            train: TrainSettings { epochs: 1, learning_rate: 0.05 },
            ..Default::default()
        };
        let pair = NetworkPair::train(&exp, &space, &settings, 0).unwrap();
        assert_eq!(pair.adjuster().layer_sizes(), vec![11, 20, 20, 10]);
        assert_eq!(pair.verifier().layer_sizes(), vec![20, 20, 20, 1]);
    }
}
