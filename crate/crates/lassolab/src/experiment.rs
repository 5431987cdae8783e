//! The Monte Carlo experiment runner: one design, one true coefficient
//! vector, many independent noise replications, aggregated bound and cone
//! verdicts. Replication r draws its noise from stream r of the seeded
//! generator, so reports are bit-reproducible for a fixed configuration.

use std::collections::BTreeMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::bounds::{
    cone_parameter, lambda_universal, verify_replication, BoundReport, LambdaRule, Losses,
    NoiseModel,
};
use crate::conditions::{
    compatibility_constant, strong_restricted_eigenvalue_at, uniform_irrepresentable,
    ConditionReport, ConeSpec,
};
use crate::design::{generate_design, DesignSpec};
use crate::error::{Error, Result};
use crate::model::{gram, min_eigen, support_of, CoefVector, Support};
use crate::solver::SolverOptions;

/// Version tag carried by every JSON report; the schema document of the
/// same name ships with the crate.
pub const REPORT_SCHEMA_VERSION: &str = "report-v1";

/// How the true coefficient vector is specified: explicitly, or as a sparse
/// pattern with equal magnitudes. The sparse default places `s` positive
/// entries on the first coordinates.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Beta0Spec {
    Explicit {
        values: Vec<f64>,
    },
    Sparse {
        s: usize,
        magnitude: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        support: Option<Vec<usize>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        signs: Option<Vec<i8>>,
    },
}

impl Beta0Spec {
    pub fn realize(&self, p: usize) -> Result<CoefVector> {
        match self {
            Beta0Spec::Explicit { values } => {
                if values.len() != p {
                    return Err(Error::InvalidArgument(format!(
                        "explicit coefficient vector has length {}, design has {p} columns",
                        values.len()
                    )));
                }
                CoefVector::new(values.clone())
            }
            Beta0Spec::Sparse {
                s,
                magnitude,
                support,
                signs,
            } => {
                let support = match support {
                    Some(list) => Support::new(list.clone(), p)?,
                    None => Support::new((1..=*s).collect(), p)?,
                };
                if support.len() != *s {
                    return Err(Error::InvalidArgument(
                        "sparse support length disagrees with s".into(),
                    ));
                }
                let mut values = vec![0.0; p];
                for (k, &j) in support.zero_based().iter().enumerate() {
                    let sign = match signs {
                        Some(list) => {
                            if list.len() != *s {
                                return Err(Error::InvalidArgument(
                                    "sign pattern length disagrees with s".into(),
                                ));
                            }
                            list[k] as f64
                        }
                        None => 1.0,
                    };
                    values[j] = sign * *magnitude;
                }
                CoefVector::new(values)
            }
        }
    }
}

/// A complete experiment: design, truth, noise, penalty rule, replications.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub design: DesignSpec,
    pub beta0: Beta0Spec,
    pub noise: NoiseModel,
    pub rule: LambdaRule,
    pub reps: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct ReplicationRecord {
    pub rep: usize,
    pub lambda: f64,
    pub stochastic: f64,
    pub good_event: bool,
    pub cone_holds: bool,
    pub basic_inequality_holds: bool,
    pub converged: bool,
    pub losses: Losses,
    pub bounds: Vec<BoundReport>,
}

#[derive(Clone, Debug, Serialize)]
pub struct MeanLosses {
    pub pred: f64,
    pub l1: f64,
    pub l2sq: f64,
    pub selection_rate: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Aggregates {
    pub replications: usize,
    pub good_event_count: usize,
    pub good_event_frequency: f64,
    pub cone_hold_frequency: f64,
    pub cone_hold_frequency_on_good: f64,
    pub basic_inequality_frequency: f64,
    pub bound_hold_frequency: BTreeMap<String, f64>,
    pub bound_hold_frequency_on_good: BTreeMap<String, f64>,
    pub mean_losses: MeanLosses,
}

#[derive(Clone, Debug, Serialize)]
pub struct DesignSummary {
    pub n: usize,
    pub p: usize,
    pub spec: DesignSpec,
    pub gram_min_eigen: f64,
    pub cone_l: f64,
    pub support: Vec<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentReport {
    pub schema_version: String,
    pub config: ExperimentConfig,
    pub design_summary: DesignSummary,
    pub condition_reports: Vec<ConditionReport>,
    pub replications: Vec<ReplicationRecord>,
    pub aggregates: Aggregates,
}

fn frequency(count: usize, total: usize) -> f64 {
    if total == 0 {
        1.0
    } else {
        count as f64 / total as f64
    }
}

/// Runs every replication of the configured experiment. Design-condition
/// constants are computed once; each replication then solves one noisy
/// instance and scores the bound cells against its realized losses.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    if config.reps == 0 {
        return Err(Error::InvalidArgument("need at least one replication".into()));
    }
    let x = generate_design(&config.design)?;
    let beta0 = config.beta0.realize(x.p())?;
    let support = support_of(&beta0, 0.0);
    if !support.is_proper_nonempty() {
        return Err(Error::InvalidArgument(
            "true support must be nonempty and proper".into(),
        ));
    }
    let cone_l = cone_parameter(config.rule.c)?;
    let cone = ConeSpec::new(support.clone(), cone_l)?;

    let sigma = gram(&x);
    let gram_min = min_eigen(sigma.matrix())?;
    let comp = compatibility_constant(&x, &cone)?;
    let strong = strong_restricted_eigenvalue_at(&x, &support, cone_l)?;
    let mut condition_reports = vec![comp.clone(), strong.clone()];
    if let Ok(ir) = uniform_irrepresentable(&sigma, &support) {
        condition_reports.push(ir);
    }

    let lambda = if config.noise.sigma > 0.0 {
        lambda_universal(config.noise.sigma, x.n(), x.p(), config.rule.tau)?
    } else {
        0.0
    };

    let opts = SolverOptions::default();
    let mut replications = Vec::with_capacity(config.reps);
    let mut good_count = 0usize;
    let mut cone_count = 0usize;
    let mut cone_good_count = 0usize;
    let mut basic_count = 0usize;
    let mut bound_counts: BTreeMap<String, usize> = BTreeMap::new();
    let mut bound_good_counts: BTreeMap<String, usize> = BTreeMap::new();
    let mut bound_good_totals: BTreeMap<String, usize> = BTreeMap::new();
    let mut bound_totals: BTreeMap<String, usize> = BTreeMap::new();
    let mut sums = (0.0, 0.0, 0.0, 0usize);

    for rep in 0..config.reps {
        let mut rng = ChaCha8Rng::seed_from_u64(config.noise.seed);
        rng.set_stream(rep as u64);
        let eps: Vec<f64> = (0..x.n())
            .map(|_| config.noise.sigma * rng.sample::<f64, _>(StandardNormal))
            .collect();
        let outcome = verify_replication(
            &x,
            &beta0,
            &eps,
            lambda,
            config.rule.c,
            &cone,
            comp.value,
            strong.value,
            true,
            &opts,
        )
        .map_err(|e| Error::InvalidArgument(format!("replication {rep}: {e}")))?;

        if outcome.good_event {
            good_count += 1;
            if outcome.cone_holds {
                cone_good_count += 1;
            }
        }
        if outcome.cone_holds {
            cone_count += 1;
        }
        if outcome.basic_inequality_holds {
            basic_count += 1;
        }
        for bound in &outcome.bounds {
            if !bound.applicable {
                continue;
            }
            *bound_totals.entry(bound.bound_name.clone()).or_default() += 1;
            if bound.holds {
                *bound_counts.entry(bound.bound_name.clone()).or_default() += 1;
            }
            if outcome.good_event {
                *bound_good_totals.entry(bound.bound_name.clone()).or_default() += 1;
                if bound.holds {
                    *bound_good_counts.entry(bound.bound_name.clone()).or_default() += 1;
                }
            }
        }
        sums.0 += outcome.losses.pred;
        sums.1 += outcome.losses.l1;
        sums.2 += outcome.losses.l2sq;
        sums.3 += outcome.losses.selection as usize;

        replications.push(ReplicationRecord {
            rep,
            lambda: outcome.lambda,
            stochastic: outcome.stochastic,
            good_event: outcome.good_event,
            cone_holds: outcome.cone_holds,
            basic_inequality_holds: outcome.basic_inequality_holds,
            converged: outcome.converged,
            losses: outcome.losses,
            bounds: outcome.bounds,
        });
    }

    let reps = config.reps;
    let bound_hold_frequency = bound_totals
        .iter()
        .map(|(name, &total)| {
            (
                name.clone(),
                frequency(bound_counts.get(name).copied().unwrap_or(0), total),
            )
        })
        .collect();
    let bound_hold_frequency_on_good = bound_good_totals
        .iter()
        .map(|(name, &total)| {
            (
                name.clone(),
                frequency(bound_good_counts.get(name).copied().unwrap_or(0), total),
            )
        })
        .collect();

    let aggregates = Aggregates {
        replications: reps,
        good_event_count: good_count,
        good_event_frequency: frequency(good_count, reps),
        cone_hold_frequency: frequency(cone_count, reps),
        cone_hold_frequency_on_good: frequency(cone_good_count, good_count),
        basic_inequality_frequency: frequency(basic_count, reps),
        bound_hold_frequency,
        bound_hold_frequency_on_good,
        mean_losses: MeanLosses {
            pred: sums.0 / reps as f64,
            l1: sums.1 / reps as f64,
            l2sq: sums.2 / reps as f64,
            selection_rate: sums.3 as f64 / reps as f64,
        },
    };

    Ok(ExperimentReport {
        schema_version: REPORT_SCHEMA_VERSION.into(),
        config: config.clone(),
        design_summary: DesignSummary {
            n: x.n(),
            p: x.p(),
            spec: config.design,
            gram_min_eigen: gram_min,
            cone_l,
            support: support.indices().to_vec(),
        },
        condition_reports,
        replications,
        aggregates,
    })
}
