//! Yearly indicator tables: loading, repair, consistency checks, and
//! error-statistics derivation.
//!
//! The calibration data for realistic experiments comes from national
//! accounts: a table of yearly values where each row is a year and each
//! column an indicator (consumption, capital formation, GDP by one of the
//! three accounting approaches, …). Such tables arrive with quirks this
//! module deals with head-on:
//!
//! * **Gaps.** Statistical offices backfill some series late or not at
//!   all. [`IndicatorTable::fill_forward`] repairs interior gaps by
//!   carrying the last published value forward — and refuses to invent a
//!   value for a series that starts with a hole.
//! * **Accounting identities.** GDP by expenditure should equal the sum of
//!   its components, and likewise for the income and production
//!   approaches. [`IndicatorTable::check_identities`] verifies these on
//!   level data and reports every year that breaks them.
//! * **Error statistics.** Treating each indicator's yearly growth as a
//!   noisy "view" of reference GDP growth yields an empirical error series
//!   per indicator; [`IndicatorTable::derive_error_stats`] summarizes them
//!   into the mean/deviation pairs that seed provider profiles.

use std::collections::BTreeSet;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::stats::OnlineMoments;
use crate::{Error, Result};

/// A year-by-indicator table with possibly missing cells.
#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorTable {
    pub years: Vec<i32>,
    /// `(indicator name, one value per year)`, in file column order.
    pub columns: Vec<(String, Vec<Option<f64>>)>,
}

/// One accounting identity: `target = Σ components` for every year.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityRule {
    pub target: String,
    pub components: Vec<String>,
}

/// A year where an identity failed to hold within tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct IdentityViolation {
    pub target: String,
    pub year: i32,
    pub target_value: f64,
    pub component_sum: f64,
}

/// Summary of one indicator's empirical error series against a reference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorStats {
    pub indicator: String,
    /// Years where both the indicator and the reference had values.
    pub count: u64,
    /// Mean signed error (indicator − reference).
    pub mean: f64,
    /// Mean absolute error.
    pub mean_abs: f64,
    /// Population standard deviation of the signed errors.
    pub std_dev: f64,
}

impl IndicatorTable {
    /// Parse a CSV whose first column is the year and whose remaining
    /// columns are indicators. Empty cells and `NA` mean missing.
    pub fn from_reader(reader: impl Read) -> Result<Self> {
        let mut csv = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers = csv.headers()?.clone();
        if headers.len() < 2 {
            return Err(Error::Dataset(
                "need a year column and at least one indicator column".into(),
            ));
        }
        if !headers[0].eq_ignore_ascii_case("year") {
            return Err(Error::Dataset(format!(
                "first column must be 'year', found {:?}",
                &headers[0]
            )));
        }
        let names: Vec<String> = headers.iter().skip(1).map(str::to_owned).collect();
        {
            let mut seen = BTreeSet::new();
            for name in &names {
                if !seen.insert(name) {
                    return Err(Error::Dataset(format!("duplicate indicator column {name:?}")));
                }
            }
        }

        let mut years = Vec::new();
        let mut columns: Vec<(String, Vec<Option<f64>>)> =
            names.into_iter().map(|n| (n, Vec::new())).collect();
        for (i, record) in csv.records().enumerate() {
            let record = record?;
            if record.len() != headers.len() {
                return Err(Error::Dataset(format!(
                    "row {}: expected {} fields, found {}",
                    i + 2,
                    headers.len(),
                    record.len()
                )));
            }
            let year: i32 = record[0].parse().map_err(|_| {
                Error::Dataset(format!("row {}: bad year {:?}", i + 2, &record[0]))
            })?;
            if let Some(&last) = years.last() {
                if year <= last {
                    return Err(Error::Dataset(format!(
                        "years must be strictly increasing ({last} then {year})"
                    )));
                }
            }
            years.push(year);
            for (col, cell) in columns.iter_mut().zip(record.iter().skip(1)) {
                let value = match cell {
                    "" | "NA" | "na" => None,
                    s => Some(s.parse::<f64>().map_err(|_| {
                        Error::Dataset(format!(
                            "row {}, column {:?}: bad number {s:?}",
                            i + 2,
                            col.0
                        ))
                    })?),
                };
                col.1.push(value);
            }
        }
        if years.is_empty() {
            return Err(Error::Dataset("table has no data rows".into()));
        }
        Ok(IndicatorTable { years, columns })
    }

    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| {
            Error::Dataset(format!("cannot open {}: {e}", path.display()))
        })?;
        Self::from_reader(file)
    }

    /// Write the table back out as CSV, missing cells as empty fields.
    pub fn write_csv(&self, writer: impl std::io::Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["year".to_owned()];
        header.extend(self.columns.iter().map(|(n, _)| n.clone()));
        w.write_record(&header)?;
        for (i, year) in self.years.iter().enumerate() {
            let mut row = vec![year.to_string()];
            for (_, values) in &self.columns {
                row.push(values[i].map(|v| v.to_string()).unwrap_or_default());
            }
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn column(&self, name: &str) -> Option<&[Option<f64>]> {
        self.columns
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.as_slice())
    }

    fn require_column(&self, name: &str) -> Result<&[Option<f64>]> {
        self.column(name)
            .ok_or_else(|| Error::Dataset(format!("no column named {name:?}")))
    }

    /// Count of missing cells across the whole table.
    pub fn missing_cells(&self) -> usize {
        self.columns
            .iter()
            .map(|(_, v)| v.iter().filter(|c| c.is_none()).count())
            .sum()
    }

    /// Replace each missing cell with the most recent earlier value in its
    /// column. Returns how many cells were filled.
    ///
    /// A column whose *first* value is missing is an error: carrying
    /// forward needs something to carry, and inventing an opening value
    /// would silently bias every statistic derived downstream.
    pub fn fill_forward(&mut self) -> Result<usize> {
        // Validate all columns before touching any, so a failure leaves the
        // table unmodified.
        for (name, values) in &self.columns {
            if values.first().is_some_and(|v| v.is_none()) {
                return Err(Error::Dataset(format!(
                    "column {name:?} starts with a missing value in {}; \
                     fill-forward has nothing to carry",
                    self.years[0]
                )));
            }
        }
        let mut filled = 0;
        for (_, values) in &mut self.columns {
            let mut last = None;
            for cell in values.iter_mut() {
                match cell {
                    Some(v) => last = Some(*v),
                    None => {
                        *cell = last;
                        filled += 1;
                    }
                }
            }
        }
        Ok(filled)
    }

    /// Check one identity; returns the years violating it beyond `tol`.
    /// Years where any involved cell is missing are skipped.
    pub fn check_identity(&self, rule: &IdentityRule, tol: f64) -> Result<Vec<IdentityViolation>> {
        let target = self.require_column(&rule.target)?;
        let components: Vec<&[Option<f64>]> = rule
            .components
            .iter()
            .map(|c| self.require_column(c))
            .collect::<Result<_>>()?;
        let mut violations = Vec::new();
        for (i, &year) in self.years.iter().enumerate() {
            let Some(target_value) = target[i] else { continue };
            let Some(component_sum) = components
                .iter()
                .map(|c| c[i])
                .sum::<Option<f64>>()
            else {
                continue;
            };
            if (target_value - component_sum).abs() > tol {
                violations.push(IdentityViolation {
                    target: rule.target.clone(),
                    year,
                    target_value,
                    component_sum,
                });
            }
        }
        Ok(violations)
    }

    /// Check several identities; violations come back in rule order.
    pub fn check_identities(
        &self,
        rules: &[IdentityRule],
        tol: f64,
    ) -> Result<Vec<IdentityViolation>> {
        let mut all = Vec::new();
        for rule in rules {
            all.extend(self.check_identity(rule, tol)?);
        }
        Ok(all)
    }

    /// Summarize each non-reference column's error series against the
    /// reference column. Only years where both sides are present
    /// contribute; a column sharing no years with the reference gets
    /// count 0 and zero statistics.
    pub fn derive_error_stats(&self, reference: &str) -> Result<Vec<ErrorStats>> {
        let reference_values = self.require_column(reference)?.to_vec();
        Ok(self
            .columns
            .iter()
            .filter(|(name, _)| name != reference)
            .map(|(name, values)| {
                let mut signed = OnlineMoments::new();
                let mut absolute = OnlineMoments::new();
                for (value, truth) in values.iter().zip(&reference_values) {
                    if let (Some(v), Some(t)) = (value, truth) {
                        signed.push(v - t);
                        absolute.push((v - t).abs());
                    }
                }
                ErrorStats {
                    indicator: name.clone(),
                    count: signed.count(),
                    mean: signed.mean(),
                    mean_abs: absolute.mean(),
                    std_dev: signed.variance().sqrt(),
                }
            })
            .collect())
    }

    /// Calibration pairs `(truth, view)` for one indicator against a
    /// reference column, in year order, years with gaps skipped.
    pub fn calibration_pairs(&self, indicator: &str, reference: &str) -> Result<Vec<(f64, f64)>> {
        let views = self.require_column(indicator)?;
        let truths = self.require_column(reference)?;
        Ok(views
            .iter()
            .zip(truths)
            .filter_map(|(v, t)| Some(((*t)?, (*v)?)))
            .collect())
    }
}

/// The three GDP accounting identities on level data: expenditure, income,
/// and production approaches, each equal to the sum of their components.
pub fn default_gdp_identities() -> Vec<IdentityRule> {
    let rule = |target: &str, components: &[&str]| IdentityRule {
        target: target.to_owned(),
        components: components.iter().map(|&c| c.to_owned()).collect(),
    };
    vec![
        rule("GDP_EA", &["FCE", "GCF", "NE"]),
        rule("GDP_IA", &["NPT", "WC", "DFA", "BB"]),
        rule("GDP_PA", &["FI", "SI", "TI"]),
    ]
}
