//! Likert survey tabulation: weighted means, composite means,
//! interpretation bands and competition ranking.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SurveyError {
    #[error("no responses")]
    Empty,
    #[error("response value {0} outside 1..=5")]
    OutOfScale(u32),
    #[error("mean {0} outside [1.00, 5.00]")]
    MeanOutOfRange(f64),
    #[error("row {row}: {reason}")]
    Row { row: usize, reason: String },
    #[error("csv: {0}")]
    Csv(String),
}

/// Half-up rounding to two decimals.
pub fn round2(x: f64) -> f64 {
    // the nudge keeps values like 4.665 (stored as 4.66499..) rounding up
    ((x * 100.0 + 0.5 + 1e-9).floor()) / 100.0
}

/// Frequencies of the answers 1 through 5 for one survey item.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LikertResponseSet {
    pub item_text: String,
    pub counts: [u64; 5],
}

impl LikertResponseSet {
    pub fn from_counts(item_text: impl Into<String>, counts: [u64; 5]) -> Result<Self, SurveyError> {
        if counts.iter().sum::<u64>() == 0 {
            return Err(SurveyError::Empty);
        }
        Ok(LikertResponseSet {
            item_text: item_text.into(),
            counts,
        })
    }

    pub fn from_responses(item_text: impl Into<String>, responses: &[u32]) -> Result<Self, SurveyError> {
        let mut counts = [0u64; 5];
        for &r in responses {
            if !(1..=5).contains(&r) {
                return Err(SurveyError::OutOfScale(r));
            }
            counts[(r - 1) as usize] += 1;
        }
        Self::from_counts(item_text, counts)
    }

    pub fn n(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn total(&self) -> u64 {
        self.counts
            .iter()
            .enumerate()
            .map(|(i, c)| (i as u64 + 1) * c)
            .sum()
    }
}

/// `Σ value·count / Σ count`, rounded half-up to two decimals. Computed in
/// integers so the rounding decision is exact.
pub fn weighted_mean(r: &LikertResponseSet) -> Result<f64, SurveyError> {
    let n = r.n();
    if n == 0 {
        return Err(SurveyError::Empty);
    }
    let hundredths = (200 * r.total() + n) / (2 * n);
    Ok(hundredths as f64 / 100.0)
}

/// Unweighted mean of component means, rounded half-up to two decimals.
pub fn composite_mean(component_means: &[f64]) -> Result<f64, SurveyError> {
    if component_means.is_empty() {
        return Err(SurveyError::Empty);
    }
    let sum: f64 = component_means.iter().sum();
    Ok(round2(sum / component_means.len() as f64))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScaleName {
    Acceptance,
    Occurrence,
}

impl FromStr for ScaleName {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "acceptance" => Ok(ScaleName::Acceptance),
            "occurrence" => Ok(ScaleName::Occurrence),
            other => Err(format!("unknown scale {other:?} (expected acceptance or occurrence)")),
        }
    }
}

impl fmt::Display for ScaleName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScaleName::Acceptance => "acceptance",
            ScaleName::Occurrence => "occurrence",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Band {
    pub lower: f64,
    pub upper: f64,
    pub label: &'static str,
}

/// Five labelled bands over [1.00, 5.00]. Each band is `[lower, upper)`
/// except the last, which is closed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InterpretationScale {
    pub name: ScaleName,
    pub bands: [Band; 5],
}

const CUTS: [f64; 6] = [1.00, 1.81, 2.61, 3.41, 4.21, 5.00];
const EPS: f64 = 1e-9;

impl InterpretationScale {
    pub fn new(name: ScaleName) -> Self {
        let labels = match name {
            ScaleName::Acceptance => [
                "Not Acceptable",
                "Slightly Acceptable",
                "Acceptable",
                "Moderately Acceptable",
                "Highly Acceptable",
            ],
            ScaleName::Occurrence => [
                "Never Encountered",
                "Rarely Encountered",
                "Sometimes Encountered",
                "Often Encountered",
                "Always Encountered",
            ],
        };
        let bands = std::array::from_fn(|i| Band {
            lower: CUTS[i],
            upper: CUTS[i + 1],
            label: labels[i],
        });
        InterpretationScale { name, bands }
    }

    pub fn acceptance() -> Self {
        Self::new(ScaleName::Acceptance)
    }

    pub fn occurrence() -> Self {
        Self::new(ScaleName::Occurrence)
    }
}

pub fn interpret(mean: f64, scale: &InterpretationScale) -> Result<&'static str, SurveyError> {
    if !(1.0 - EPS..=5.0 + EPS).contains(&mean) {
        return Err(SurveyError::MeanOutOfRange(mean));
    }
    let band = scale
        .bands
        .iter()
        .rev()
        .find(|b| mean >= b.lower - EPS)
        .expect("first band starts at 1.00");
    Ok(band.label)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Ranked {
    /// Position in the input list.
    pub index: usize,
    pub text: String,
    pub mean: f64,
    pub rank: usize,
}

/// Competition ranking ("1224"): rank 1 is the highest mean, tied means
/// share the smaller rank. Output is sorted by rank, input order kept
/// within ties.
pub fn rank_by_mean(items: &[(String, f64)]) -> Vec<Ranked> {
    let mut order: Vec<usize> = (0..items.len()).collect();
    order.sort_by(|&a, &b| items[b].1.total_cmp(&items[a].1).then(a.cmp(&b)));
    let mut out: Vec<Ranked> = Vec::with_capacity(items.len());
    for (pos, &i) in order.iter().enumerate() {
        let (text, mean) = &items[i];
        let rank = match out.last() {
            Some(prev) if (prev.mean - mean).abs() < EPS => prev.rank,
            _ => pos + 1,
        };
        out.push(Ranked {
            index: i,
            text: text.clone(),
            mean: *mean,
            rank,
        });
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SurveyRow {
    pub item: String,
    pub n: u64,
    pub mean: f64,
    pub interpretation: &'static str,
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SurveyTable {
    pub scale: ScaleName,
    pub rows: Vec<SurveyRow>,
    pub composite_mean: f64,
    pub composite_interpretation: &'static str,
}

/// Means, labels and ranks for every item plus the composite row. Rows
/// keep input order.
pub fn tabulate(sets: &[LikertResponseSet], scale: &InterpretationScale) -> Result<SurveyTable, SurveyError> {
    if sets.is_empty() {
        return Err(SurveyError::Empty);
    }
    let means = sets
        .iter()
        .map(weighted_mean)
        .collect::<Result<Vec<_>, _>>()?;
    let ranked = rank_by_mean(
        &sets
            .iter()
            .zip(&means)
            .map(|(s, m)| (s.item_text.clone(), *m))
            .collect::<Vec<_>>(),
    );
    let mut ranked = ranked;
    ranked.sort_by_key(|r| r.index);
    let mut rows = Vec::with_capacity(sets.len());
    for r in ranked {
        rows.push(SurveyRow {
            item: r.text,
            n: sets[r.index].n(),
            mean: r.mean,
            interpretation: interpret(r.mean, scale)?,
            rank: r.rank,
        });
    }
    let composite = composite_mean(&means)?;
    Ok(SurveyTable {
        scale: scale.name,
        rows,
        composite_mean: composite,
        composite_interpretation: interpret(composite, scale)?,
    })
}

/// Reads survey rows: item text followed by the counts of answers 1..5. A
/// first row whose count columns are not integers is taken as a header.
pub fn read_survey_csv(bytes: &[u8]) -> Result<Vec<LikertResponseSet>, SurveyError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(bytes);
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| SurveyError::Csv(e.to_string()))?;
        let row = i + 1;
        if rec.iter().all(str::is_empty) {
            continue;
        }
        if rec.len() != 6 {
            return Err(SurveyError::Row {
                row,
                reason: format!(
                    "expected item text plus 5 frequency columns (values 1..5), found {} columns",
                    rec.len()
                ),
            });
        }
        let parsed: Result<Vec<u64>, _> = rec.iter().skip(1).map(str::parse::<u64>).collect();
        let counts = match parsed {
            Ok(c) => c,
            Err(_) if i == 0 => continue,
            Err(_) => {
                return Err(SurveyError::Row {
                    row,
                    reason: "frequency columns must be non-negative integers".into(),
                })
            }
        };
        let counts: [u64; 5] = counts.try_into().expect("five columns");
        let set = LikertResponseSet::from_counts(&rec[0], counts).map_err(|e| SurveyError::Row {
            row,
            reason: e.to_string(),
        })?;
        out.push(set);
    }
    if out.is_empty() {
        return Err(SurveyError::Empty);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn counts(pairs: &[(usize, u64)]) -> LikertResponseSet {
        let mut c = [0; 5];
        for &(v, n) in pairs {
            c[v - 1] = n;
        }
        LikertResponseSet::from_counts("q", c).unwrap()
    }

    /// Exhaustive: every multiset of `n` answers in 1..=5 is determined by
    /// its total, which ranges over n..=5n.
    fn reachable_means(n: u64) -> Vec<(u64, f64)> {
        (n..=5 * n)
            .map(|total| (total, round2(total as f64 / n as f64)))
            .collect()
    }

    #[test]
    fn weighted_mean_examples() {
        assert_eq!(weighted_mean(&counts(&[(5, 2), (4, 1)])).unwrap(), 4.67);
        assert_eq!(weighted_mean(&counts(&[(5, 24)])).unwrap(), 5.00);
        assert!(matches!(LikertResponseSet::from_counts("q", [0; 5]), Err(SurveyError::Empty)));
        assert!(matches!(LikertResponseSet::from_responses("q", &[1, 6]), Err(SurveyError::OutOfScale(6))));
    }

    #[test]
    fn no_24_answer_multiset_averages_4_84() {
        let hits: Vec<_> = reachable_means(24).into_iter().filter(|(_, m)| *m == 4.84).collect();
        assert!(hits.is_empty(), "{hits:?}");
        // the neighbours that do exist
        assert_eq!(weighted_mean(&counts(&[(5, 20), (4, 4)])).unwrap(), 4.83);
        assert_eq!(weighted_mean(&counts(&[(5, 21), (4, 3)])).unwrap(), 4.88);
        // smallest panel that can produce 4.84: 19 answers totalling 92
        let n = (1..=100u64)
            .find(|&n| reachable_means(n).iter().any(|(_, m)| *m == 4.84))
            .unwrap();
        assert_eq!(n, 19);
        assert_eq!(weighted_mean(&counts(&[(5, 16), (4, 3)])).unwrap(), 4.84);
        assert_eq!(weighted_mean(&counts(&[(5, 21), (4, 4)])).unwrap(), 4.84);
    }

    #[test]
    fn integer_rounding_matches_float_oracle() {
        for n in 1..=40u64 {
            for (total, expected) in reachable_means(n) {
                // any multiset with this size and total will do
                let mut c = [0u64; 5];
                let mut rest = total - n;
                let mut answers = vec![1u64; n as usize];
                for a in answers.iter_mut() {
                    let bump = rest.min(4);
                    *a += bump;
                    rest -= bump;
                }
                for a in answers {
                    c[(a - 1) as usize] += 1;
                }
                let got = weighted_mean(&LikertResponseSet::from_counts("q", c).unwrap()).unwrap();
                assert_eq!(got, expected, "n={n} total={total}");
            }
        }
    }

    #[test]
    fn composite_means() {
        assert_eq!(composite_mean(&[4.71, 4.58, 4.71]).unwrap(), 4.67);
        assert_eq!(composite_mean(&[3.17]).unwrap(), 3.17);
        assert_eq!(composite_mean(&[4.58, 4.79, 4.92]).unwrap(), 4.76);
        assert_eq!(composite_mean(&[4.84, 4.79, 4.53, 4.47, 4.26]).unwrap(), 4.58);
        assert!(composite_mean(&[]).is_err());
    }

    #[test]
    fn interpretation_bands() {
        let acc = InterpretationScale::acceptance();
        let occ = InterpretationScale::occurrence();
        assert_eq!(interpret(4.67, &acc).unwrap(), "Highly Acceptable");
        assert_eq!(interpret(4.26, &occ).unwrap(), "Always Encountered");
        assert_eq!(interpret(1.00, &acc).unwrap(), "Not Acceptable");
        assert_eq!(interpret(1.80, &acc).unwrap(), "Not Acceptable");
        assert_eq!(interpret(1.81, &acc).unwrap(), "Slightly Acceptable");
        assert_eq!(interpret(2.60, &acc).unwrap(), "Slightly Acceptable");
        assert_eq!(interpret(2.61, &acc).unwrap(), "Acceptable");
        assert_eq!(interpret(3.40, &acc).unwrap(), "Acceptable");
        assert_eq!(interpret(3.41, &acc).unwrap(), "Moderately Acceptable");
        assert_eq!(interpret(4.20, &acc).unwrap(), "Moderately Acceptable");
        assert_eq!(interpret(4.21, &acc).unwrap(), "Highly Acceptable");
        assert_eq!(interpret(5.00, &acc).unwrap(), "Highly Acceptable");
        assert!(interpret(0.99, &acc).is_err());
        assert!(interpret(5.01, &acc).is_err());
        assert!(interpret(f64::NAN, &acc).is_err());
    }

    #[test]
    fn every_two_decimal_mean_has_one_band() {
        let scale = InterpretationScale::acceptance();
        for h in 100..=500 {
            let m = h as f64 / 100.0;
            let containing = scale
                .bands
                .iter()
                .enumerate()
                .filter(|(i, b)| m >= b.lower - EPS && (m < b.upper - EPS || (*i == 4 && m <= b.upper + EPS)))
                .count();
            assert_eq!(containing, 1, "{m}");
            interpret(m, &scale).unwrap();
        }
    }

    #[test]
    fn competition_ranking() {
        let t3: Vec<(String, f64)> = [4.84, 4.79, 4.53, 4.47, 4.26]
            .iter()
            .enumerate()
            .map(|(i, m)| (format!("issue {i}"), *m))
            .collect();
        let ranks: Vec<_> = rank_by_mean(&t3).iter().map(|r| r.rank).collect();
        assert_eq!(ranks, [1, 2, 3, 4, 5]);
        let ties = vec![("a".to_string(), 4.5), ("b".to_string(), 4.5), ("c".to_string(), 4.0)];
        let r = rank_by_mean(&ties);
        assert_eq!(r.iter().map(|x| x.rank).collect::<Vec<_>>(), [1, 1, 3]);
        assert_eq!(r[0].text, "a");
        assert_eq!(rank_by_mean(&[("x".into(), 3.0)])[0].rank, 1);
    }

    #[test]
    fn csv_with_header_and_validation() {
        let body = b"item,count_1,count_2,count_3,count_4,count_5\nProvides accurate profiles,0,0,0,7,17\nHandles errors,0,0,0,10,14\nAccurate report,0,0,0,7,17\n";
        let sets = read_survey_csv(body).unwrap();
        assert_eq!(sets.len(), 3);
        let table = tabulate(&sets, &InterpretationScale::acceptance()).unwrap();
        let means: Vec<_> = table.rows.iter().map(|r| r.mean).collect();
        assert_eq!(means, [4.71, 4.58, 4.71]);
        assert_eq!(table.rows.iter().map(|r| r.rank).collect::<Vec<_>>(), [1, 3, 1]);
        assert_eq!(table.composite_mean, 4.67);
        assert_eq!(table.composite_interpretation, "Highly Acceptable");

        let bad = b"item,0,0,0,1,2,3\n";
        assert!(matches!(read_survey_csv(bad), Err(SurveyError::Row { row: 1, .. })));
        let bad = b"a,1,2,3,4,5\nb,1,x,3,4,5\n";
        assert!(matches!(read_survey_csv(bad), Err(SurveyError::Row { row: 2, .. })));
        assert!(matches!(read_survey_csv(b"q,0,0,0,0,0\n"), Err(SurveyError::Row { .. })));
    }
}
