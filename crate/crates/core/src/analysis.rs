//! Execution-time prediction from plan features: quadratic least squares,
//! MAPE scoring, single-feature ablations and SoC/AET correlation.

use std::collections::HashSet;
use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("need at least {need} rows to fit {coefs} coefficients, have {have}")]
    TooFewRows { need: usize, coefs: usize, have: usize },
    #[error("row {row} has non-positive execution time {aet}")]
    NonPositiveAet { row: usize, aet: f64 },
    #[error("duplicate dataset key (instance {instance}, plan {plan})")]
    DuplicateKey { instance: String, plan: String },
    #[error("{0} has zero variance")]
    ZeroVariance(&'static str),
    #[error("need at least 3 rows, have {0}")]
    TooFewPoints(usize),
    #[error("dataset csv: {0}")]
    Csv(#[from] csv::Error),
}

/// The six plan/graph features used to predict execution time.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FeatureVector {
    pub soc: u64,
    pub rotations: u64,
    pub type1_edges: u64,
    pub type2_edges: u64,
    pub conflict_robot_pairs: u64,
    pub robots: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Feature {
    Soc,
    Rotations,
    Type1,
    Type2,
    Pairs,
    Robots,
}

impl Feature {
    pub const ALL: [Feature; 6] = [
        Feature::Soc,
        Feature::Rotations,
        Feature::Type1,
        Feature::Type2,
        Feature::Pairs,
        Feature::Robots,
    ];

    /// Column name in the dataset CSV.
    pub fn name(self) -> &'static str {
        match self {
            Feature::Soc => "soc",
            Feature::Rotations => "rotations",
            Feature::Type1 => "type1",
            Feature::Type2 => "type2",
            Feature::Pairs => "pairs",
            Feature::Robots => "robots",
        }
    }

    /// Column heading in the ablation report.
    pub fn label(self) -> &'static str {
        match self {
            Feature::Soc => "SoC",
            Feature::Rotations => "Rotations (#)",
            Feature::Type1 => "Type-1 edges (#)",
            Feature::Type2 => "Type-2 edges (#)",
            Feature::Pairs => "Conflict robot pairs (#)",
            Feature::Robots => "Robots (#)",
        }
    }
}

impl std::str::FromStr for Feature {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Feature::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| format!("unknown feature {s:?}"))
    }
}

impl FeatureVector {
    pub fn get(&self, f: Feature) -> f64 {
        (match f {
            Feature::Soc => self.soc,
            Feature::Rotations => self.rotations,
            Feature::Type1 => self.type1_edges,
            Feature::Type2 => self.type2_edges,
            Feature::Pairs => self.conflict_robot_pairs,
            Feature::Robots => self.robots,
        }) as f64
    }
}

/// One executed plan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataRow {
    pub soc: u64,
    pub rotations: u64,
    pub type1: u64,
    pub type2: u64,
    pub pairs: u64,
    pub robots: u64,
    pub aet: f64,
    pub instance: String,
    pub plan: String,
}

impl DataRow {
    pub fn new(f: FeatureVector, aet: f64, instance: impl Into<String>, plan: impl Into<String>) -> Self {
        Self {
            soc: f.soc,
            rotations: f.rotations,
            type1: f.type1_edges,
            type2: f.type2_edges,
            pairs: f.conflict_robot_pairs,
            robots: f.robots,
            aet,
            instance: instance.into(),
            plan: plan.into(),
        }
    }

    pub fn features(&self) -> FeatureVector {
        FeatureVector {
            soc: self.soc,
            rotations: self.rotations,
            type1_edges: self.type1,
            type2_edges: self.type2,
            conflict_robot_pairs: self.pairs,
            robots: self.robots,
        }
    }
}

/// Rows keyed by (instance, plan); keys are unique and every AET is positive.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Dataset {
    rows: Vec<DataRow>,
    keys: HashSet<(String, String)>,
}

impl Dataset {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, row: DataRow) -> Result<(), AnalysisError> {
        if !(row.aet > 0.0) {
            return Err(AnalysisError::NonPositiveAet {
                row: self.rows.len(),
                aet: row.aet,
            });
        }
        if !self.keys.insert((row.instance.clone(), row.plan.clone())) {
            return Err(AnalysisError::DuplicateKey {
                instance: row.instance,
                plan: row.plan,
            });
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn from_rows(rows: impl IntoIterator<Item = DataRow>) -> Result<Self, AnalysisError> {
        let mut d = Self::new();
        for r in rows {
            d.push(r)?;
        }
        Ok(d)
    }

    pub fn rows(&self) -> &[DataRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn subset(&self, idx: &[usize]) -> Dataset {
        Dataset::from_rows(idx.iter().map(|&i| self.rows[i].clone())).expect("subset of a valid dataset")
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.rows {
            w.serialize(r).expect("in-memory csv");
        }
        if self.rows.is_empty() {
            w.write_record(["soc", "rotations", "type1", "type2", "pairs", "robots", "aet", "instance", "plan"])
                .expect("in-memory csv");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
    }

    pub fn from_csv(text: &str) -> Result<Self, AnalysisError> {
        let mut rdr = csv::Reader::from_reader(text.as_bytes());
        let rows: Vec<DataRow> = rdr.deserialize().collect::<Result<_, _>>()?;
        Self::from_rows(rows)
    }
}

/// Quadratic least-squares model over standardized features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionModel {
    /// Features actually used (zero-variance ones are dropped).
    pub features: Vec<Feature>,
    pub dropped: Vec<Feature>,
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
    /// Intercept, linear terms, then products `x_i x_j` for `i <= j`.
    pub coefficients: Vec<f64>,
}

/// Number of terms in a full quadratic expansion of `p` variables.
pub fn quadratic_terms(p: usize) -> usize {
    1 + p + p * (p + 1) / 2
}

fn expand(z: &[f64]) -> Vec<f64> {
    let mut row = Vec::with_capacity(quadratic_terms(z.len()));
    row.push(1.0);
    row.extend_from_slice(z);
    for i in 0..z.len() {
        for j in i..z.len() {
            row.push(z[i] * z[j]);
        }
    }
    row
}

impl RegressionModel {
    fn standardized(&self, f: &FeatureVector) -> Vec<f64> {
        self.features
            .iter()
            .enumerate()
            .map(|(i, &feat)| (f.get(feat) - self.mean[i]) / self.scale[i])
            .collect()
    }

    pub fn predict(&self, f: &FeatureVector) -> f64 {
        expand(&self.standardized(f))
            .iter()
            .zip(&self.coefficients)
            .map(|(x, c)| x * c)
            .sum()
    }
}

/// Fits a full quadratic model in `subset` by minimum-norm least squares (SVD).
pub fn fit_quadratic(data: &Dataset, subset: &[Feature]) -> Result<RegressionModel, AnalysisError> {
    let rows = data.rows();
    let n = rows.len() as f64;
    let mut features = Vec::new();
    let mut dropped = Vec::new();
    let (mut mean, mut scale) = (Vec::new(), Vec::new());
    for &feat in subset {
        let xs: Vec<f64> = rows.iter().map(|r| r.features().get(feat)).collect();
        let m = xs.iter().sum::<f64>() / n.max(1.0);
        let sd = (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n.max(1.0)).sqrt();
        if sd > 1e-12 * m.abs().max(1.0) {
            features.push(feat);
            mean.push(m);
            scale.push(sd);
        } else {
            log::warn!("feature {} has zero variance and is dropped", feat.name());
            dropped.push(feat);
        }
    }
    let coefs = quadratic_terms(features.len());
    if rows.len() < 2 * coefs {
        return Err(AnalysisError::TooFewRows {
            need: 2 * coefs,
            coefs,
            have: rows.len(),
        });
    }
    let mut model = RegressionModel {
        features,
        dropped,
        mean,
        scale,
        coefficients: Vec::new(),
    };
    let design: Vec<f64> = rows
        .iter()
        .flat_map(|r| expand(&model.standardized(&r.features())))
        .collect();
    let x = DMatrix::from_row_slice(rows.len(), coefs, &design);
    let y = DVector::from_iterator(rows.len(), rows.iter().map(|r| r.aet));
    let svd = x.svd(true, true);
    let tol = svd.singular_values.max() * 1e-10 * rows.len().max(coefs) as f64;
    let beta = svd.solve(&y, tol).expect("u and v were computed");
    model.coefficients = beta.iter().copied().collect();
    Ok(model)
}

/// Mean absolute percentage error of `model` on `data`, as a fraction.
pub fn mape(model: &RegressionModel, data: &Dataset) -> Result<f64, AnalysisError> {
    let mut total = 0.0;
    for (i, r) in data.rows().iter().enumerate() {
        if !(r.aet > 0.0) {
            return Err(AnalysisError::NonPositiveAet { row: i, aet: r.aet });
        }
        total += (r.aet - model.predict(&r.features())).abs() / r.aet;
    }
    Ok(total / data.len().max(1) as f64)
}

/// MAPE over held-out rows of a seeded `folds`-fold split.
pub fn cross_validated_mape(
    data: &Dataset,
    subset: &[Feature],
    folds: usize,
    seed: u64,
) -> Result<f64, AnalysisError> {
    let mut idx: Vec<usize> = (0..data.len()).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let folds = folds.clamp(2, data.len().max(2));
    let mut total = 0.0;
    for f in 0..folds {
        let test: Vec<usize> = idx.iter().copied().skip(f).step_by(folds).collect();
        let train: Vec<usize> = idx
            .iter()
            .enumerate()
            .filter(|(i, _)| i % folds != f)
            .map(|(_, &r)| r)
            .collect();
        let model = fit_quadratic(&data.subset(&train), subset)?;
        let held = data.subset(&test);
        total += mape(&model, &held)? * held.len() as f64;
    }
    Ok(total / data.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AblationEntry {
    /// `None` for the all-features model.
    pub feature: Option<Feature>,
    pub cv_mape: f64,
    pub train_mape: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AblationReport {
    pub folds: usize,
    pub seed: u64,
    /// All-features model first, then one entry per single feature.
    pub entries: Vec<AblationEntry>,
}

impl AblationReport {
    pub fn all(&self) -> &AblationEntry {
        &self.entries[0]
    }

    pub fn single(&self, f: Feature) -> Option<&AblationEntry> {
        self.entries.iter().find(|e| e.feature == Some(f))
    }

    /// Single features sorted by cross-validated MAPE, best first.
    pub fn ranking(&self) -> Vec<Feature> {
        let mut s: Vec<&AblationEntry> = self.entries.iter().filter(|e| e.feature.is_some()).collect();
        s.sort_by(|a, b| a.cv_mape.total_cmp(&b.cv_mape));
        s.into_iter().filter_map(|e| e.feature).collect()
    }

    /// One column per model (All, then each single feature), one row per protocol.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("Features");
        for e in &self.entries {
            out.push(',');
            out.push_str(e.feature.map(Feature::label).unwrap_or("All"));
        }
        out.push('\n');
        for (name, pick) in [
            ("MAPE (cross-validated)", (|e: &AblationEntry| e.cv_mape) as fn(&AblationEntry) -> f64),
            ("MAPE (training)", |e: &AblationEntry| e.train_mape),
        ] {
            out.push_str(name);
            for e in &self.entries {
                let _ = write!(out, ",{:.4}", pick(e));
            }
            out.push('\n');
        }
        out
    }
}

/// MAPE of the all-features model and of each single-feature model.
pub fn ablation_table(data: &Dataset, folds: usize, seed: u64) -> Result<AblationReport, AnalysisError> {
    let mut entries = Vec::with_capacity(7);
    let subsets = std::iter::once((None, Feature::ALL.to_vec()))
        .chain(Feature::ALL.iter().map(|&f| (Some(f), vec![f])));
    for (feature, subset) in subsets {
        let train = mape(&fit_quadratic(data, &subset)?, data)?;
        let cv = cross_validated_mape(data, &subset, folds, seed)?;
        entries.push(AblationEntry {
            feature,
            cv_mape: cv,
            train_mape: train,
        });
    }
    Ok(AblationReport { folds, seed, entries })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Correlation {
    pub n: usize,
    pub r: f64,
    pub slope: f64,
    pub intercept: f64,
}

/// Pearson correlation and least-squares line of `y` on `x`.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<Correlation, AnalysisError> {
    let n = x.len().min(y.len());
    if n < 3 {
        return Err(AnalysisError::TooFewPoints(n));
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
        sxy += (a - mx) * (b - my);
    }
    if sxx <= 0.0 {
        return Err(AnalysisError::ZeroVariance("x"));
    }
    if syy <= 0.0 {
        return Err(AnalysisError::ZeroVariance("y"));
    }
    let slope = sxy / sxx;
    Ok(Correlation {
        n,
        r: sxy / (sxx * syy).sqrt(),
        slope,
        intercept: my - slope * mx,
    })
}

/// Correlation between one feature and AET over the dataset.
pub fn correlation(data: &Dataset, x: Feature) -> Result<Correlation, AnalysisError> {
    let xs: Vec<f64> = data.rows().iter().map(|r| r.features().get(x)).collect();
    let ys: Vec<f64> = data.rows().iter().map(|r| r.aet).collect();
    pearson(&xs, &ys)
}

/// Plot-ready scatter of one feature against AET.
pub fn scatter_csv(data: &Dataset, x: Feature) -> String {
    let mut out = format!("{},aet,instance,plan\n", x.name());
    for r in data.rows() {
        let _ = writeln!(out, "{},{},{},{}", r.features().get(x), r.aet, r.instance, r.plan);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn row(i: usize, f: FeatureVector, aet: f64) -> DataRow {
        DataRow::new(f, aet, format!("i{i}"), "p")
    }

    fn fv(soc: u64, rot: u64) -> FeatureVector {
        FeatureVector {
            soc,
            rotations: rot,
            type1_edges: (soc * 2) % 13 + 3,
            type2_edges: (soc * 7) % 5,
            conflict_robot_pairs: soc % 3,
            robots: 4,
        }
    }

    #[test]
    fn exact_quadratic_fits_perfectly() {
        let d = Dataset::from_rows((0..30).map(|i| {
            let s = 10 + i as u64;
            row(i, fv(s, 0), 3.0 + 0.5 * s as f64 + 0.02 * (s * s) as f64)
        }))
        .unwrap();
        let m = fit_quadratic(&d, &[Feature::Soc]).unwrap();
        assert!(mape(&m, &d).unwrap() < 1e-6);
        assert_eq!(m.coefficients.len(), quadratic_terms(1));
    }

    #[test]
    fn constant_target_gives_intercept_fit() {
        let d = Dataset::from_rows((0..40).map(|i| row(i, fv(i as u64, 1), 7.0))).unwrap();
        let m = fit_quadratic(&d, &Feature::ALL).unwrap();
        assert!(mape(&m, &d).unwrap() < 1e-9);
        // rotations and robots are constant here
        assert_eq!(m.dropped, vec![Feature::Rotations, Feature::Robots]);
    }

    #[test]
    fn doubled_predictions_give_mape_one() {
        let d = Dataset::from_rows((0..6).map(|i| row(i, fv(i as u64, 0), 2.0))).unwrap();
        let m = RegressionModel {
            features: vec![],
            dropped: vec![],
            mean: vec![],
            scale: vec![],
            coefficients: vec![4.0],
        };
        assert_relative_eq!(mape(&m, &d).unwrap(), 1.0);
    }

    #[test]
    fn rejects_duplicates_and_bad_aet() {
        let mut d = Dataset::new();
        d.push(row(0, fv(1, 0), 1.0)).unwrap();
        assert!(matches!(d.push(row(0, fv(2, 0), 1.0)), Err(AnalysisError::DuplicateKey { .. })));
        assert!(matches!(d.push(row(1, fv(2, 0), 0.0)), Err(AnalysisError::NonPositiveAet { .. })));
    }

    #[test]
    fn too_few_rows() {
        let d = Dataset::from_rows((0..5).map(|i| row(i, fv(i as u64, i as u64), 1.0 + i as f64))).unwrap();
        assert!(matches!(
            fit_quadratic(&d, &[Feature::Soc, Feature::Rotations]),
            Err(AnalysisError::TooFewRows { .. })
        ));
    }

    #[test]
    fn csv_round_trip() {
        let d = Dataset::from_rows((0..4).map(|i| row(i, fv(i as u64 + 1, 2), 1.5 * (i + 1) as f64))).unwrap();
        let text = d.to_csv();
        assert!(text.starts_with("soc,rotations,type1,type2,pairs,robots,aet,instance,plan\n"));
        assert_eq!(Dataset::from_csv(&text).unwrap(), d);
    }

    #[test]
    fn pearson_extremes() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let c = pearson(&x, &x.map(|v| 2.0 * v + 1.0)).unwrap();
        assert_relative_eq!(c.r, 1.0, epsilon = 1e-12);
        assert_relative_eq!(c.slope, 2.0, epsilon = 1e-12);
        assert_relative_eq!(c.intercept, 1.0, epsilon = 1e-12);
        assert_relative_eq!(pearson(&x, &x.map(|v| -v)).unwrap().r, -1.0, epsilon = 1e-12);
        assert!(matches!(pearson(&x, &[1.0; 4]), Err(AnalysisError::ZeroVariance("y"))));
    }

    #[test]
    fn ablation_ranks_the_true_feature_first() {
        let d = Dataset::from_rows((0..60).map(|i| {
            let s = 5 + (i as u64 * 37) % 50;
            row(i, fv(s, (i as u64 * 11) % 7), 2.0 + 0.3 * s as f64)
        }))
        .unwrap();
        let rep = ablation_table(&d, 5, 1).unwrap();
        assert!(rep.single(Feature::Soc).unwrap().cv_mape < 1e-6);
        assert_eq!(rep.ranking()[0], Feature::Soc);
        assert!(rep.to_csv().starts_with("Features,All,SoC,Rotations (#)"));
    }
}
