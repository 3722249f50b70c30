//! CSV ingestion, one-hot expansion, seeded splits and min-max scaling.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{InputScaler, MonotonicitySpec};
use crate::spline::Direction;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Regression,
    BinaryClassification,
}

/// Rows of numeric features with one target each.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub features: Vec<Vec<f64>>,
    pub targets: Vec<f64>,
    pub feature_names: Vec<String>,
    pub task: Task,
}

impl Dataset {
    pub fn new(features: Vec<Vec<f64>>, targets: Vec<f64>, feature_names: Vec<String>, task: Task) -> Result<Self> {
        if features.len() != targets.len() {
            return Err(Error::Dataset(format!(
                "{} feature rows but {} targets",
                features.len(),
                targets.len()
            )));
        }
        for (r, row) in features.iter().enumerate() {
            if row.len() != feature_names.len() {
                return Err(Error::Dataset(format!(
                    "row {r} has {} features, expected {}",
                    row.len(),
                    feature_names.len()
                )));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::Dataset(format!("row {r} has a non-finite feature")));
            }
        }
        if let Some(r) = targets.iter().position(|t| !t.is_finite()) {
            return Err(Error::Dataset(format!("row {r} has a non-finite target")));
        }
        if task == Task::BinaryClassification {
            if let Some(r) = targets.iter().position(|&t| t != 0.0 && t != 1.0) {
                return Err(Error::Dataset(format!(
                    "row {r}: classification target {} is not 0 or 1",
                    targets[r]
                )));
            }
        }
        Ok(Self {
            features,
            targets,
            feature_names,
            task,
        })
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    /// A copy with every row mapped through `scaler`.
    pub fn scaled(&self, scaler: &InputScaler) -> Result<Dataset> {
        if scaler.len() != self.n_features() {
            return Err(Error::Dimension {
                expected: self.n_features(),
                got: scaler.len(),
            });
        }
        Ok(Dataset {
            features: self.features.iter().map(|row| scaler.transform(row)).collect(),
            ..self.clone()
        })
    }

    fn subset(&self, rows: &[usize]) -> Dataset {
        Dataset {
            features: rows.iter().map(|&r| self.features[r].clone()).collect(),
            targets: rows.iter().map(|&r| self.targets[r]).collect(),
            feature_names: self.feature_names.clone(),
            task: self.task,
        }
    }
}

/// Min-max scaler fit on `data`, mapping each feature onto [-1, 1]. A
/// constant feature maps to 0 with scale 1.
pub fn fit_min_max(data: &Dataset) -> Result<InputScaler> {
    if data.is_empty() {
        return Err(Error::Dataset("cannot fit a scaler on an empty dataset".into()));
    }
    let n = data.n_features();
    let mut lo = vec![f64::INFINITY; n];
    let mut hi = vec![f64::NEG_INFINITY; n];
    for row in &data.features {
        for (i, &v) in row.iter().enumerate() {
            lo[i] = lo[i].min(v);
            hi[i] = hi[i].max(v);
        }
    }
    let (shift, scale) = lo
        .iter()
        .zip(&hi)
        .map(|(&lo, &hi)| {
            if hi > lo {
                (0.5 * (lo + hi), 2.0 / (hi - lo))
            } else {
                (lo, 1.0)
            }
        })
        .unzip();
    let scaler = InputScaler { shift, scale };
    scaler.validate()?;
    Ok(scaler)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitFractions {
    pub train: f64,
    pub validation: f64,
    pub test: f64,
}

impl Default for SplitFractions {
    fn default() -> Self {
        Self {
            train: 0.6,
            validation: 0.2,
            test: 0.2,
        }
    }
}

impl SplitFractions {
    /// Row counts: rounded train and validation shares, the rest to test.
    pub fn sizes(&self, n: usize) -> Result<(usize, usize, usize)> {
        let parts = [self.train, self.validation, self.test];
        if parts.iter().any(|f| !(f.is_finite() && *f >= 0.0)) || (parts.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::Dataset(format!(
                "split fractions {parts:?} must be nonnegative and sum to 1"
            )));
        }
        let train = ((n as f64 * self.train).round() as usize).min(n);
        let validation = ((n as f64 * self.validation).round() as usize).min(n - train);
        Ok((train, validation, n - train - validation))
    }
}

/// Raw file layout understood by [`convert_source`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SourceFormat {
    /// Already a CSV with the descriptor's header.
    #[default]
    Csv,
    /// Whitespace-separated `auto-mpg.data` with a quoted car name.
    UciAutoMpg,
    /// Comma-separated `processed.cleveland.data` without a header.
    UciCleveland,
}

/// Where `fetch-data` downloads the raw file from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Source {
    pub url: String,
    #[serde(default)]
    pub format: SourceFormat,
}

fn default_missing() -> Vec<String> {
    vec!["?".into(), String::new(), "NA".into()]
}

/// A dataset descriptor, usually a JSON file next to the CSV it names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSpec {
    #[serde(default)]
    pub name: String,
    /// CSV path, relative to the descriptor's directory.
    pub path: PathBuf,
    pub target: String,
    pub task: Task,
    /// Direction tags by post-expansion column name; unlisted columns are free.
    #[serde(default)]
    pub monotone: BTreeMap<String, Direction>,
    /// One-hot expanded into `name=value` columns, always free.
    #[serde(default)]
    pub categorical: Vec<String>,
    /// Columns ignored entirely.
    #[serde(default)]
    pub drop: Vec<String>,
    #[serde(default)]
    pub split: SplitFractions,
    #[serde(default)]
    pub seed: u64,
    /// Cell values treated as missing; rows containing one are dropped.
    #[serde(default = "default_missing")]
    pub missing: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<Source>,
    /// Directory `path` is resolved against; set by [`DatasetSpec::load`].
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl DatasetSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Reads a descriptor and resolves its data path relative to the file.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut spec = Self::from_json(&text)?;
        spec.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(spec)
    }

    pub fn data_path(&self) -> PathBuf {
        self.base_dir.join(&self.path)
    }
}

/// The output of [`load`]: raw splits plus the scaler fit on the training rows.
#[derive(Debug, Clone)]
pub struct Splits {
    pub train: Dataset,
    pub validation: Dataset,
    pub test: Dataset,
    pub scaler: InputScaler,
    pub monotonicity: MonotonicitySpec,
    /// Rows dropped for missing values.
    pub dropped_rows: usize,
}

impl Splits {
    pub fn feature_names(&self) -> &[String] {
        &self.train.feature_names
    }

    /// Train, validation and test mapped through [`Splits::scaler`].
    pub fn scaled(&self) -> Result<(Dataset, Dataset, Dataset)> {
        Ok((
            self.train.scaled(&self.scaler)?,
            self.validation.scaled(&self.scaler)?,
            self.test.scaled(&self.scaler)?,
        ))
    }
}

/// Reads the CSV named by `spec` and returns the seeded train/validation/test
/// split with a scaler fit on the training rows only.
pub fn load(spec: &DatasetSpec) -> Result<Splits> {
    let path = spec.data_path();
    let file = std::fs::File::open(&path).map_err(|e| Error::io(&path, e))?;
    load_reader(spec, file)
}

/// [`load`] over any CSV reader.
pub fn load_reader(spec: &DatasetSpec, reader: impl std::io::Read) -> Result<Splits> {
    let (data, monotonicity, dropped_rows) = parse_csv(spec, reader)?;

    let (n_train, n_val, n_test) = spec.split.sizes(data.len())?;
    for (name, size, frac) in [
        ("train", n_train, spec.split.train),
        ("validation", n_val, spec.split.validation),
        ("test", n_test, spec.split.test),
    ] {
        if size == 0 && (frac > 0.0 || name == "train") {
            return Err(Error::Dataset(format!(
                "{name} split is empty ({} usable rows)",
                data.len()
            )));
        }
    }
    let mut order: Vec<usize> = (0..data.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(spec.seed));
    let train = data.subset(&order[..n_train]);
    let validation = data.subset(&order[n_train..n_train + n_val]);
    let test = data.subset(&order[n_train + n_val..]);
    let scaler = fit_min_max(&train)?;
    Ok(Splits {
        train,
        validation,
        test,
        scaler,
        monotonicity,
        dropped_rows,
    })
}

enum ColumnRole {
    Numeric,
    Categorical,
    Target,
    Dropped,
}

fn parse_csv(spec: &DatasetSpec, reader: impl std::io::Read) -> Result<(Dataset, MonotonicitySpec, usize)> {
    let mut csv = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header: Vec<String> = csv.headers()?.iter().map(str::to_owned).collect();
    let has = |c: &String| header.contains(c);

    if !has(&spec.target) {
        return Err(Error::Dataset(format!("target column '{}' not found", spec.target)));
    }
    for c in spec.categorical.iter().chain(&spec.drop) {
        if !has(c) {
            return Err(Error::Dataset(format!("column '{c}' not found")));
        }
    }
    let roles: Vec<ColumnRole> = header
        .iter()
        .map(|c| {
            if *c == spec.target {
                ColumnRole::Target
            } else if spec.drop.contains(c) {
                ColumnRole::Dropped
            } else if spec.categorical.contains(c) {
                ColumnRole::Categorical
            } else {
                ColumnRole::Numeric
            }
        })
        .collect();

    let is_missing = |cell: &str| spec.missing.iter().any(|m| m == cell);
    let mut rows: Vec<Vec<String>> = Vec::new();
    let mut dropped = 0;
    for record in csv.records() {
        let record = record?;
        let cells: Vec<String> = record.iter().map(str::to_owned).collect();
        let incomplete = cells
            .iter()
            .zip(&roles)
            .any(|(c, role)| !matches!(role, ColumnRole::Dropped) && is_missing(c));
        if incomplete {
            dropped += 1;
        } else {
            rows.push(cells);
        }
    }

    // categories come from every complete row so the column set does not
    // depend on the split
    let mut categories: BTreeMap<usize, Vec<String>> = BTreeMap::new();
    for (c, role) in roles.iter().enumerate() {
        if matches!(role, ColumnRole::Categorical) {
            let levels: BTreeSet<&str> = rows.iter().map(|r| r[c].as_str()).collect();
            categories.insert(c, levels.into_iter().map(str::to_owned).collect());
        }
    }

    let mut names = Vec::new();
    for (c, role) in roles.iter().enumerate() {
        match role {
            ColumnRole::Numeric => names.push(header[c].clone()),
            ColumnRole::Categorical => names.extend(categories[&c].iter().map(|v| format!("{}={v}", header[c]))),
            _ => {}
        }
    }

    let mut directions = vec![Direction::Free; names.len()];
    for (col, &dir) in &spec.monotone {
        if spec.categorical.contains(col) {
            return Err(Error::Dataset(format!("categorical column '{col}' cannot be monotone")));
        }
        let idx = names
            .iter()
            .position(|n| n == col)
            .ok_or_else(|| Error::Dataset(format!("monotone column '{col}' is not a feature")))?;
        directions[idx] = dir;
    }

    let mut features = Vec::with_capacity(rows.len());
    let mut targets = Vec::with_capacity(rows.len());
    for (r, cells) in rows.iter().enumerate() {
        let mut x = Vec::with_capacity(names.len());
        for (c, role) in roles.iter().enumerate() {
            let cell = &cells[c];
            match role {
                ColumnRole::Numeric => x.push(parse_number(cell).ok_or_else(|| {
                    let kind = if spec.monotone.contains_key(&header[c]) {
                        "monotone feature"
                    } else {
                        "feature"
                    };
                    Error::Dataset(format!(
                        "non-numeric {kind} '{}' in data row {}: '{cell}'",
                        header[c],
                        r + 1
                    ))
                })?),
                ColumnRole::Categorical => x.extend(categories[&c].iter().map(|v| if v == cell { 1.0 } else { 0.0 })),
                ColumnRole::Target => targets
                    .push(parse_number(cell).ok_or_else(|| {
                        Error::Dataset(format!("non-numeric target in data row {}: '{cell}'", r + 1))
                    })?),
                ColumnRole::Dropped => {}
            }
        }
        features.push(x);
    }
    let data = Dataset::new(features, targets, names, spec.task)?;
    Ok((data, MonotonicitySpec::new(directions), dropped))
}

fn parse_number(cell: &str) -> Option<f64> {
    cell.parse::<f64>().ok().filter(|v| v.is_finite())
}

pub const AUTO_MPG_HEADER: &str =
    "mpg,cylinders,displacement,horsepower,weight,acceleration,model_year,origin,car_name";
pub const CLEVELAND_HEADER: &str = "age,sex,cp,trestbps,chol,fbs,restecg,thalach,exang,oldpeak,slope,ca,thal,disease";

/// Converts a downloaded raw file into the CSV layout the descriptors expect.
pub fn convert_source(raw: &str, format: SourceFormat) -> Result<String> {
    match format {
        SourceFormat::Csv => Ok(raw.to_owned()),
        SourceFormat::UciAutoMpg => convert_uci_auto_mpg(raw),
        SourceFormat::UciCleveland => convert_uci_cleveland(raw),
    }
}

/// `auto-mpg.data`: eight whitespace-separated fields, then a quoted name.
pub fn convert_uci_auto_mpg(raw: &str) -> Result<String> {
    let mut out = csv::Writer::from_writer(Vec::new());
    out.write_record(AUTO_MPG_HEADER.split(','))?;
    for (n, line) in raw.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let (fields, name) = match line.find('"') {
            Some(q) => (&line[..q], line[q..].trim().trim_matches('"')),
            None => (line, ""),
        };
        let fields: Vec<&str> = fields.split_whitespace().collect();
        if fields.len() != 8 {
            return Err(Error::Dataset(format!(
                "auto-mpg line {}: expected 8 numeric fields, found {}",
                n + 1,
                fields.len()
            )));
        }
        let mut record: Vec<&str> = fields;
        record.push(name);
        out.write_record(&record)?;
    }
    finish_csv(out)
}

/// `processed.cleveland.data`: 14 comma-separated fields; the diagnosis
/// `num` in 0..=4 becomes `disease = num > 0`.
pub fn convert_uci_cleveland(raw: &str) -> Result<String> {
    let mut out = csv::Writer::from_writer(Vec::new());
    out.write_record(CLEVELAND_HEADER.split(','))?;
    for (n, line) in raw.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut fields: Vec<String> = line.split(',').map(|f| f.trim().to_owned()).collect();
        if fields.len() != 14 {
            return Err(Error::Dataset(format!(
                "cleveland line {}: expected 14 fields, found {}",
                n + 1,
                fields.len()
            )));
        }
        let num: f64 = fields[13]
            .parse()
            .map_err(|_| Error::Dataset(format!("cleveland line {}: bad diagnosis '{}'", n + 1, fields[13])))?;
        fields[13] = if num > 0.0 { "1" } else { "0" }.to_owned();
        out.write_record(&fields)?;
    }
    finish_csv(out)
}

fn finish_csv(out: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = out
        .into_inner()
        .map_err(|e| Error::Dataset(format!("csv writer: {e}")))?;
    String::from_utf8(bytes).map_err(|e| Error::Dataset(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy_spec() -> DatasetSpec {
        DatasetSpec::from_json(
            r#"{
                "path": "toy.csv",
                "target": "y",
                "task": "regression",
                "monotone": {"a": "increasing", "b": "decreasing"},
                "categorical": ["color"],
                "drop": ["id"],
                "seed": 7
            }"#,
        )
        .unwrap()
    }

    fn toy_csv(rows: usize) -> String {
        let mut s = String::from("id,a,b,color,y\n");
        let colors = ["red", "green", "blue"];
        for r in 0..rows {
            s.push_str(&format!("r{r},{},{},{},{}\n", r, 2 * r, colors[r % 3], r as f64 * 0.5));
        }
        s
    }

    #[test]
    fn ten_rows_split_six_two_two() {
        let splits = load_reader(&toy_spec(), toy_csv(10).as_bytes()).unwrap();
        assert_eq!(
            (splits.train.len(), splits.validation.len(), splits.test.len()),
            (6, 2, 2)
        );
        assert_eq!(
            splits.feature_names(),
            &["a", "b", "color=blue", "color=green", "color=red"]
        );
        assert_eq!(
            splits.monotonicity.directions(),
            &[
                Direction::Increasing,
                Direction::Decreasing,
                Direction::Free,
                Direction::Free,
                Direction::Free
            ]
        );
    }

    #[test]
    fn split_is_deterministic_and_seed_dependent() {
        let a = load_reader(&toy_spec(), toy_csv(30).as_bytes()).unwrap();
        let b = load_reader(&toy_spec(), toy_csv(30).as_bytes()).unwrap();
        assert_eq!(a.train, b.train);
        assert_eq!(a.test, b.test);
        let mut other = toy_spec();
        other.seed = 8;
        let c = load_reader(&other, toy_csv(30).as_bytes()).unwrap();
        assert_ne!(a.train.targets, c.train.targets);
        let mut all: Vec<f64> = [&a.train, &a.validation, &a.test]
            .iter()
            .flat_map(|d| d.targets.clone())
            .collect();
        all.sort_by(f64::total_cmp);
        assert_eq!(all, (0..30).map(|r| r as f64 * 0.5).collect::<Vec<_>>());
    }

    #[test]
    fn scaler_maps_train_onto_unit_box() {
        let splits = load_reader(&toy_spec(), toy_csv(20).as_bytes()).unwrap();
        let (train, _, _) = splits.scaled().unwrap();
        for i in 0..2 {
            let col: Vec<f64> = train.features.iter().map(|r| r[i]).collect();
            let lo = col.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = col.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            assert!((lo + 1.0).abs() < 1e-12 && (hi - 1.0).abs() < 1e-12);
        }
        assert!(splits.scaler.scale.iter().all(|&s| s > 0.0));
    }

    #[test]
    fn constant_feature_maps_to_zero() {
        let data = Dataset::new(
            vec![vec![3.0, 1.0], vec![3.0, 2.0]],
            vec![0.0, 1.0],
            vec!["c".into(), "v".into()],
            Task::Regression,
        )
        .unwrap();
        let s = fit_min_max(&data).unwrap();
        assert_eq!(s.scale[0], 1.0);
        assert_eq!(s.transform(&[3.0, 1.5]), vec![0.0, 0.0]);
    }

    #[test]
    fn missing_rows_dropped_and_counted() {
        let csv = "id,a,b,color,y\nx,1,2,red,1\nx,?,2,red,1\nx,1,2,,1\nx,1,2,red,?\n?,1,2,red,1\nx,2,3,blue,2\n";
        let mut spec = toy_spec();
        spec.split = SplitFractions {
            train: 1.0,
            validation: 0.0,
            test: 0.0,
        };
        let splits = load_reader(&spec, csv.as_bytes()).unwrap();
        // the dropped id column does not count
        assert_eq!(splits.dropped_rows, 3);
        assert_eq!(splits.train.len(), 3);
    }

    #[test]
    fn descriptive_errors() {
        let mut spec = toy_spec();
        spec.target = "nope".into();
        let err = load_reader(&spec, toy_csv(10).as_bytes()).unwrap_err();
        assert!(err.to_string().contains("target column 'nope'"), "{err}");

        let bad = "id,a,b,color,y\nx,1,high,red,1\nx,2,3,red,2\n";
        let err = load_reader(&toy_spec(), bad.as_bytes()).unwrap_err();
        assert!(err.to_string().contains("non-numeric monotone feature 'b'"), "{err}");

        let err = load_reader(&toy_spec(), toy_csv(2).as_bytes()).unwrap_err();
        assert!(err.to_string().contains("split is empty"), "{err}");

        let mut spec = toy_spec();
        spec.monotone.insert("color".into(), Direction::Increasing);
        assert!(load_reader(&spec, toy_csv(10).as_bytes()).is_err());

        let mut spec = toy_spec();
        spec.monotone.insert("zzz".into(), Direction::Increasing);
        assert!(load_reader(&spec, toy_csv(10).as_bytes()).is_err());
    }

    #[test]
    fn classification_targets_checked() {
        let csv = "a,y\n1,0\n2,1\n3,2\n";
        let spec = DatasetSpec::from_json(r#"{"path":"x","target":"y","task":"binary_classification"}"#).unwrap();
        assert!(load_reader(&spec, csv.as_bytes()).is_err());
    }

    #[test]
    fn uci_converters() {
        let raw = "18.0   8   307.0      130.0      3504.      12.0   70  1\t\"chevrolet chevelle malibu\"\n\
                   25.0   4   98.00      ?          2046.      19.0   71  1\t\"ford pinto\"\n";
        let csv = convert_uci_auto_mpg(raw).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], AUTO_MPG_HEADER);
        assert_eq!(lines[1], "18.0,8,307.0,130.0,3504.,12.0,70,1,chevrolet chevelle malibu");
        assert_eq!(lines[2], "25.0,4,98.00,?,2046.,19.0,71,1,ford pinto");

        let raw = "63.0,1.0,1.0,145.0,233.0,1.0,2.0,150.0,0.0,2.3,3.0,0.0,6.0,0\n\
                   67.0,1.0,4.0,160.0,286.0,0.0,2.0,108.0,1.0,1.5,2.0,3.0,3.0,2\n";
        let csv = convert_uci_cleveland(raw).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert!(lines[1].ends_with(",0") && lines[2].ends_with(",1"));
        assert!(convert_uci_cleveland("1,2,3\n").is_err());
    }
}
