//! Weighted scoring of findings: annotation loading, the auto/manual merge,
//! per-section totals, margin comparison and frequency analysis.

use crate::ast::SourceSpan;
use crate::diagnostic::{Diagnostic, Origin};
use crate::taxonomy::{ErrorType, Section};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

/// Default equivalence margin on total weighted scores.
pub const DEFAULT_MARGIN: u32 = 8;

/// One manual annotation record: `count` occurrences of one error type in
/// one section of one case.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Annotation {
    pub case_id: u32,
    pub section: Section,
    pub taxonomy: ErrorType,
    pub count: u32,
    pub note: String,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AnnotationError {
    #[error("line {line}: unknown taxonomy id `{value}`")]
    UnknownTaxonomyId { line: usize, value: String },
    #[error("line {line}: unknown section `{value}`")]
    UnknownSection { line: usize, value: String },
    #[error("line {line}: count must be a positive integer, found `{value}`")]
    NonPositiveCount { line: usize, value: String },
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
}

/// Parses `caseId | section | taxonomyId | count | note` records. Blank lines
/// and `#` comments are skipped; the note may be empty or omitted.
pub fn load_annotations(source: &str) -> Result<Vec<Annotation>, AnnotationError> {
    let mut out = Vec::new();
    for (i, raw) in source.lines().enumerate() {
        let line = i + 1;
        let text = raw.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = text.splitn(5, '|').map(str::trim).collect();
        if fields.len() < 4 {
            return Err(AnnotationError::Malformed {
                line,
                message: format!("expected `caseId | section | taxonomyId | count | note`, found `{text}`"),
            });
        }
        let case_id = fields[0]
            .parse::<u32>()
            .map_err(|_| AnnotationError::Malformed { line, message: format!("invalid case id `{}`", fields[0]) })?;
        let section = fields[1]
            .parse::<Section>()
            .map_err(|_| AnnotationError::UnknownSection { line, value: fields[1].to_string() })?;
        let taxonomy = fields[2]
            .parse::<u8>()
            .ok()
            .and_then(ErrorType::from_id)
            .ok_or_else(|| AnnotationError::UnknownTaxonomyId { line, value: fields[2].to_string() })?;
        let count = match fields[3].parse::<i64>() {
            Ok(n) if n >= 1 && n <= i64::from(u32::MAX) => n as u32,
            _ => return Err(AnnotationError::NonPositiveCount { line, value: fields[3].to_string() }),
        };
        out.push(Annotation { case_id, section, taxonomy, count, note: fields.get(4).unwrap_or(&"").to_string() });
    }
    Ok(out)
}

/// Renders annotations in the format [`load_annotations`] reads.
pub fn write_annotations(annotations: &[Annotation]) -> String {
    let mut out = String::from("# caseId | section | taxonomyId | count | note\n");
    for a in annotations {
        out.push_str(&format!(
            "{} | {} | {} | {} | {}\n",
            a.case_id,
            a.section,
            a.taxonomy.id(),
            a.count,
            a.note.replace('\n', " ")
        ));
    }
    out
}

/// A scored finding, from either the linter or an annotation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Finding {
    pub taxonomy: ErrorType,
    pub section: Section,
    pub count: u32,
    pub origin: Origin,
    /// A manual finding that an automated diagnostic agreed with.
    pub corroborated: bool,
    pub note: String,
    pub span: Option<SourceSpan>,
}

impl Finding {
    pub fn weight(&self) -> u32 {
        self.taxonomy.weight()
    }

    pub fn weighted(&self) -> u32 {
        self.weight() * self.count
    }
}

impl From<&Diagnostic> for Finding {
    fn from(d: &Diagnostic) -> Self {
        Finding {
            taxonomy: d.taxonomy,
            section: d.section,
            count: 1,
            origin: d.origin,
            corroborated: false,
            note: d.message.clone(),
            span: d.span,
        }
    }
}

impl From<&Annotation> for Finding {
    fn from(a: &Annotation) -> Self {
        Finding {
            taxonomy: a.taxonomy,
            section: a.section,
            count: a.count,
            origin: Origin::Manual,
            corroborated: false,
            note: a.note.clone(),
            span: None,
        }
    }
}

/// Combines automated and manual findings. A manual annotation absorbs every
/// automated diagnostic with the same taxonomy type and section: the manual
/// count stands and the annotation is marked corroborated.
pub fn merge(auto: &[Diagnostic], manual: &[Annotation]) -> Vec<Finding> {
    let key = |t: ErrorType, s: Section| (t, s);
    let manual_keys: Vec<_> = manual.iter().map(|a| key(a.taxonomy, a.section)).collect();
    let mut out: Vec<Finding> = manual
        .iter()
        .map(|a| {
            let mut f = Finding::from(a);
            f.corroborated = auto.iter().any(|d| key(d.taxonomy, d.section) == key(a.taxonomy, a.section));
            f
        })
        .collect();
    out.extend(auto.iter().filter(|d| !manual_keys.contains(&key(d.taxonomy, d.section))).map(Finding::from));
    out
}

/// Weighted totals for the eight sections, in column order.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SectionTotals {
    pub cont: u32,
    pub dom: u32,
    pub dec: u32,
    pub pre: u32,
    pub pos: u32,
    pub sig: u32,
    pub op: u32,
    pub cos: u32,
}

impl SectionTotals {
    pub fn get(&self, s: Section) -> u32 {
        match s {
            Section::Contract => self.cont,
            Section::Domain => self.dom,
            Section::Declarations => self.dec,
            Section::Precondition => self.pre,
            Section::Postcondition => self.pos,
            Section::Signature => self.sig,
            Section::ObligationsPowers => self.op,
            Section::Constraints => self.cos,
        }
    }

    pub fn get_mut(&mut self, s: Section) -> &mut u32 {
        match s {
            Section::Contract => &mut self.cont,
            Section::Domain => &mut self.dom,
            Section::Declarations => &mut self.dec,
            Section::Precondition => &mut self.pre,
            Section::Postcondition => &mut self.pos,
            Section::Signature => &mut self.sig,
            Section::ObligationsPowers => &mut self.op,
            Section::Constraints => &mut self.cos,
        }
    }

    pub fn values(&self) -> [u32; 8] {
        Section::ALL.map(|s| self.get(s))
    }

    pub fn sum(&self) -> u32 {
        self.values().iter().sum()
    }

    pub fn add(&mut self, other: &SectionTotals) {
        for s in Section::ALL {
            *self.get_mut(s) += other.get(s);
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub case_id: Option<u32>,
    pub per_section: SectionTotals,
    pub total: u32,
}

impl ScoreReport {
    pub fn from_sections(case_id: Option<u32>, per_section: SectionTotals) -> Self {
        ScoreReport { case_id, per_section, total: per_section.sum() }
    }
}

pub fn score(findings: &[Finding]) -> ScoreReport {
    let mut per_section = SectionTotals::default();
    for f in findings {
        *per_section.get_mut(f.section) += f.weighted();
    }
    ScoreReport::from_sections(None, per_section)
}

/// Scores annotations grouped by case id, in ascending case order.
pub fn score_cases(annotations: &[Annotation]) -> Vec<ScoreReport> {
    let mut by_case: BTreeMap<u32, Vec<Finding>> = BTreeMap::new();
    for a in annotations {
        by_case.entry(a.case_id).or_default().push(Finding::from(a));
    }
    by_case.into_iter().map(|(id, fs)| ScoreReport { case_id: Some(id), ..score(&fs) }).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Equivalence {
    Equivalent,
    Different,
}

/// Two reports are equivalent when their totals differ by at most `margin`.
/// The relation is reflexive and symmetric but not transitive.
pub fn compare(a: &ScoreReport, b: &ScoreReport, margin: u32) -> Equivalence {
    if a.total.abs_diff(b.total) <= margin {
        Equivalence::Equivalent
    } else {
        Equivalence::Different
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TypeFrequency {
    pub taxonomy: ErrorType,
    pub name: String,
    pub count: u64,
    /// Percentage of all counted occurrences.
    pub share: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BandFrequency {
    pub name: String,
    pub members: Vec<ErrorType>,
    pub count: u64,
    pub share: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrequencyReport {
    pub total: u64,
    /// All sixteen types, most frequent first (ties by id).
    pub types: Vec<TypeFrequency>,
    pub bands: Vec<BandFrequency>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Band {
    pub name: String,
    pub members: Vec<ErrorType>,
}

/// Grammar adherence, environment variables and syntax form the top band;
/// the rest split by how often they occur in practice.
pub fn default_bands() -> Vec<Band> {
    use ErrorType::*;
    vec![
        Band {
            name: "grammar, environment variables, syntax".into(),
            members: vec![GrammarInconsistency, EnvironmentVariables, IncorrectSyntax],
        },
        Band {
            name: "attributes, elements, conditions, logic, structure, data types".into(),
            members: vec![
                MissingElements,
                MissingConditions,
                StructureRoles,
                IncorrectDataType,
                WrongLogic,
                MissingAttributes,
            ],
        },
        Band {
            name: "other".into(),
            members: vec![
                IncorrectElements,
                OutsideQuery,
                MissingCalculations,
                MissingAllAttributes,
                IncorrectCalculations,
                UnnecessaryInformation,
                MissingParameters,
            ],
        },
    ]
}

/// Occurrence counts per type (weights are not applied) with percentage
/// shares per type and per band.
pub fn frequency(findings: &[Finding], bands: &[Band]) -> FrequencyReport {
    let mut counts: BTreeMap<ErrorType, u64> = ErrorType::ALL.iter().map(|&t| (t, 0)).collect();
    for f in findings {
        *counts.entry(f.taxonomy).or_default() += u64::from(f.count);
    }
    let total: u64 = counts.values().sum();
    let share = |n: u64| if total == 0 { 0.0 } else { n as f64 * 100.0 / total as f64 };
    let mut types: Vec<TypeFrequency> = counts
        .iter()
        .map(|(&t, &n)| TypeFrequency { taxonomy: t, name: t.name().to_string(), count: n, share: share(n) })
        .collect();
    types.sort_by(|a, b| b.count.cmp(&a.count).then(a.taxonomy.cmp(&b.taxonomy)));
    let bands = bands
        .iter()
        .map(|b| {
            let n = b.members.iter().map(|t| counts[t]).sum();
            BandFrequency { name: b.name.clone(), members: b.members.clone(), count: n, share: share(n) }
        })
        .collect();
    FrequencyReport { total, types, bands }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ann(case_id: u32, section: Section, id: u8, count: u32) -> Annotation {
        Annotation { case_id, section, taxonomy: ErrorType::from_id(id).unwrap(), count, note: String::new() }
    }

    #[test]
    fn loads_records_and_comments() {
        let src = "# header\n\n2 | Dom | 9 | 2 | repeated concept\n2|OP|7|1\n";
        let anns = load_annotations(src).unwrap();
        assert_eq!(anns.len(), 2);
        assert_eq!(anns[0].taxonomy.weight(), 3);
        assert_eq!(anns[0].note, "repeated concept");
        assert_eq!(anns[1].section, Section::ObligationsPowers);
        assert!(load_annotations("").unwrap().is_empty());
    }

    #[test]
    fn errors_name_the_line() {
        assert_eq!(
            load_annotations("\n1 | Dom | 17 | 1 | x"),
            Err(AnnotationError::UnknownTaxonomyId { line: 2, value: "17".into() })
        );
        assert_eq!(
            load_annotations("1 | Body | 9 | 1"),
            Err(AnnotationError::UnknownSection { line: 1, value: "Body".into() })
        );
        assert_eq!(
            load_annotations("# c\n1 | Dom | 9 | 0"),
            Err(AnnotationError::NonPositiveCount { line: 2, value: "0".into() })
        );
        assert!(matches!(load_annotations("1 | Dom"), Err(AnnotationError::Malformed { line: 1, .. })));
        let msg = load_annotations("1 | Dom | 9 | -2").unwrap_err().to_string();
        assert!(msg.starts_with("line 1:"), "{msg}");
    }

    #[test]
    fn write_then_load_round_trips() {
        let anns = vec![ann(1, Section::Domain, 9, 2), ann(4, Section::Constraints, 15, 1)];
        assert_eq!(load_annotations(&write_annotations(&anns)).unwrap(), anns);
    }

    #[test]
    fn manual_absorbs_matching_auto() {
        let auto = vec![Diagnostic::auto(
            ErrorType::GrammarInconsistency,
            Section::ObligationsPowers,
            SourceSpan::new(2, 1, 2, 9),
            "bad consequent",
        )];
        let manual = vec![ann(1, Section::ObligationsPowers, 9, 2)];
        let merged = merge(&auto, &manual);
        assert_eq!(merged.len(), 1);
        assert_eq!(merged[0].count, 2);
        assert!(merged[0].corroborated);
        assert_eq!(merged[0].origin, Origin::Manual);
        assert_eq!(score(&merged).total, 6);
    }

    #[test]
    fn disjoint_and_auto_only_merges() {
        let auto =
            vec![Diagnostic::auto(ErrorType::IncorrectSyntax, Section::Domain, SourceSpan::new(1, 1, 1, 2), "x")];
        let manual = vec![ann(1, Section::Domain, 9, 1)];
        let merged = merge(&auto, &manual);
        assert_eq!(merged.len(), 2);
        assert!(!merged[0].corroborated);
        assert_eq!(merge(&auto, &[]), vec![Finding::from(&auto[0])]);
    }

    #[test]
    fn scores_sections() {
        // Dom 14, Dec 23, Pre 7, Sig 4, OP 16.
        let anns = [
            ann(2, Section::Domain, 1, 2),
            ann(2, Section::Domain, 15, 3),
            ann(2, Section::Declarations, 2, 5),
            ann(2, Section::Declarations, 9, 1),
            ann(2, Section::Precondition, 4, 1),
            ann(2, Section::Precondition, 9, 1),
            ann(2, Section::Signature, 16, 2),
            ann(2, Section::ObligationsPowers, 7, 4),
        ];
        let r = &score_cases(&anns)[0];
        assert_eq!(r.case_id, Some(2));
        assert_eq!(r.per_section.values(), [0, 14, 23, 7, 0, 4, 16, 0]);
        assert_eq!(r.total, 64);
        assert_eq!(score(&[]), ScoreReport::default());
    }

    #[test]
    fn compare_uses_totals() {
        let r = |total| ScoreReport { case_id: None, per_section: SectionTotals::default(), total };
        assert_eq!(compare(&r(10), &r(8), DEFAULT_MARGIN), Equivalence::Equivalent);
        assert_eq!(compare(&r(177), &r(64), DEFAULT_MARGIN), Equivalence::Different);
        assert_eq!(compare(&r(0), &r(8), 8), Equivalence::Equivalent);
        assert_eq!(compare(&r(0), &r(9), 8), Equivalence::Different);
        // Not transitive.
        assert_eq!(compare(&r(0), &r(16), 8), Equivalence::Different);
    }

    #[test]
    fn frequency_shares() {
        let one = [Finding::from(&ann(1, Section::Domain, 9, 1))];
        let f = frequency(&one, &default_bands());
        assert_eq!(f.types[0].taxonomy, ErrorType::GrammarInconsistency);
        assert_eq!(f.types[0].share, 100.0);
        assert_eq!(f.types.len(), 16);

        let uniform: Vec<Finding> = (1..=16).map(|id| Finding::from(&ann(1, Section::Domain, id, 1))).collect();
        let f = frequency(&uniform, &default_bands());
        assert!(f.types.iter().all(|t| t.share == 6.25));
        assert_eq!(f.bands[0].count, 3);
        let band_total: f64 = f.bands.iter().map(|b| b.share).sum();
        assert!((band_total - 100.0).abs() < 1e-9);
    }

    #[test]
    fn default_bands_partition_the_registry() {
        let mut all: Vec<ErrorType> = default_bands().into_iter().flat_map(|b| b.members).collect();
        all.sort();
        assert_eq!(all, ErrorType::ALL);
    }

    fn finding() -> impl Strategy<Value = Finding> {
        (1u8..=16, 0usize..8, 1u32..20).prop_map(|(id, s, count)| Finding {
            taxonomy: ErrorType::from_id(id).unwrap(),
            section: Section::ALL[s],
            count,
            origin: Origin::Manual,
            corroborated: false,
            note: String::new(),
            span: None,
        })
    }

    proptest! {
        #[test]
        fn scoring_is_linear(a in prop::collection::vec(finding(), 0..30), b in prop::collection::vec(finding(), 0..30)) {
            let joined: Vec<Finding> = a.iter().chain(&b).cloned().collect();
            prop_assert_eq!(score(&joined).total, score(&a).total + score(&b).total);
        }

        #[test]
        fn scoring_is_permutation_invariant(mut a in prop::collection::vec(finding(), 0..30), seed in any::<u64>()) {
            let before = score(&a);
            let n = a.len();
            if n > 1 {
                for i in 0..n {
                    let j = (seed.wrapping_mul(i as u64 + 1) % n as u64) as usize;
                    a.swap(i, j);
                }
            }
            prop_assert_eq!(score(&a), before);
        }

        #[test]
        fn total_is_sum_of_weighted_counts(a in prop::collection::vec(finding(), 0..30)) {
            let r = score(&a);
            prop_assert_eq!(r.total, r.per_section.sum());
            prop_assert_eq!(r.total, a.iter().map(|f| f.taxonomy.weight() * f.count).sum::<u32>());
        }

        #[test]
        fn compare_is_reflexive_and_symmetric(x in 0u32..500, y in 0u32..500, margin in 0u32..50) {
            let r = |total| ScoreReport { case_id: None, per_section: SectionTotals::default(), total };
            prop_assert_eq!(compare(&r(x), &r(x), margin), Equivalence::Equivalent);
            prop_assert_eq!(compare(&r(x), &r(y), margin), compare(&r(y), &r(x), margin));
        }

        #[test]
        fn frequency_shares_sum_to_100(a in prop::collection::vec(finding(), 1..40)) {
            let f = frequency(&a, &default_bands());
            let sum: f64 = f.types.iter().map(|t| t.share).sum();
            prop_assert!((sum - 100.0).abs() <= 0.1);
            prop_assert!(f.types.windows(2).all(|w| w[0].count >= w[1].count));
        }
    }
}
