//! Deterministic census-style benchmark dataset mirroring the classic adult
//! income schema (14 demographic attributes, binary income label, sex as the
//! protected attribute). Generated rather than downloaded so benchmarks run
//! fully offline and reproducibly.
//!
//! The generating process plants a known causal structure:
//! - `sex` drives the proxy attributes `relationship`, `marital_status`,
//!   `occupation`, and `hours_per_week`;
//! - income depends on `education_num`, `age`, `capital_gain`, and
//!   `occupation` (the last one leaking sex into the label);
//! - `education` is an exact recoding of `education_num` (redundant);
//! - the remaining attributes are pure noise.

use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::column::FeatureColumn;
use crate::data::Dataset;

/// Fraction of rows labeled income-positive (the adult dataset is ~25-30%).
const POSITIVE_RATE: f64 = 0.3;

pub fn generate_census(n: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gauss = |scale: f64, rng: &mut ChaCha8Rng| -> f64 {
        scale * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, rng)
    };

    let sex: Vec<f64> = (0..n).map(|_| f64::from(rng.random::<bool>())).collect();

    let mut relationship = Vec::with_capacity(n);
    let mut marital_status = Vec::with_capacity(n);
    let mut occupation = Vec::with_capacity(n);
    let mut hours_per_week = Vec::with_capacity(n);
    let mut education_num = Vec::with_capacity(n);
    let mut age = Vec::with_capacity(n);
    let mut capital_gain = Vec::with_capacity(n);
    let mut latent = Vec::with_capacity(n);
    for row in 0..n {
        let s = sex[row];
        relationship.push(1.2 * s + gauss(0.6, &mut rng));
        marital_status.push(0.9 * s + gauss(0.6, &mut rng));
        occupation.push(1.0 * s + gauss(0.6, &mut rng));
        hours_per_week.push(0.7 * s + gauss(0.8, &mut rng));
        education_num.push(gauss(1.0, &mut rng));
        age.push(gauss(1.0, &mut rng));
        capital_gain.push(gauss(1.0, &mut rng));
        // The occupation weight is kept small: conditioning on the label
        // couples predictions with sex even when no sex-linked feature is
        // used, so a strong leak would inflate equalized odds for every
        // selector, fair or not.
        latent.push(
            1.0 * education_num[row]
                + 0.8 * age[row]
                + 0.6 * capital_gain[row]
                + 0.2 * occupation[row]
                + gauss(0.7, &mut rng),
        );
    }

    let noise_col = |rng: &mut ChaCha8Rng| -> Vec<f64> {
        (0..n).map(|_| <StandardNormal as Distribution<f64>>::sample(&StandardNormal, rng)).collect()
    };
    let fnlwgt = noise_col(&mut rng);
    let workclass = noise_col(&mut rng);
    let race = noise_col(&mut rng);
    let native_country = noise_col(&mut rng);
    let capital_loss = noise_col(&mut rng);

    // education is a deterministic recoding of education_num.
    let education: Vec<f64> = education_num.clone();

    let mut sorted = latent.clone();
    sorted.sort_by(f64::total_cmp);
    let cut = sorted[((n as f64) * (1.0 - POSITIVE_RATE)) as usize];
    let income: Vec<f64> = latent.iter().map(|&v| if v >= cut { 1.0 } else { 0.0 }).collect();

    let feature = |name: &str, values: Vec<f64>| Arc::new(FeatureColumn::continuous(name, values).standardized());
    let features = vec![
        feature("age", age),
        feature("workclass", workclass),
        feature("fnlwgt", fnlwgt),
        feature("education", education),
        feature("education_num", education_num),
        feature("marital_status", marital_status),
        feature("occupation", occupation),
        feature("relationship", relationship),
        feature("race", race),
        feature("capital_gain", capital_gain),
        feature("capital_loss", capital_loss),
        feature("hours_per_week", hours_per_week),
        feature("native_country", native_country),
    ];

    Dataset {
        features,
        label: Arc::new(FeatureColumn::continuous("income", income)),
        protected: Arc::new(FeatureColumn::continuous("sex", sex)),
        n,
        dropped_rows: 0,
    }
}
