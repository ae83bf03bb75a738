//! The sixteen weighted error types and the eight structural sections that
//! weighted totals are reported over.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Tier {
    High,
    Medium,
    Low,
}

impl Tier {
    pub fn weight(self) -> u32 {
        match self {
            Tier::High => 4,
            Tier::Medium => 3,
            Tier::Low => 2,
        }
    }
}

/// Error type identifier. Discriminants are the stable ids 1-16.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
#[repr(u8)]
pub enum ErrorType {
    IncorrectElements = 1,
    MissingElements = 2,
    OutsideQuery = 3,
    MissingConditions = 4,
    MissingCalculations = 5,
    MissingAllAttributes = 6,
    StructureRoles = 7,
    IncorrectDataType = 8,
    GrammarInconsistency = 9,
    EnvironmentVariables = 10,
    WrongLogic = 11,
    IncorrectCalculations = 12,
    UnnecessaryInformation = 13,
    MissingAttributes = 14,
    IncorrectSyntax = 15,
    MissingParameters = 16,
}

/// One registry row.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TaxonomyEntry {
    pub id: u8,
    pub kind: ErrorType,
    pub name: &'static str,
    pub tier: Tier,
}

impl TaxonomyEntry {
    pub fn weight(&self) -> u32 {
        self.tier.weight()
    }
}

const fn entry(kind: ErrorType, name: &'static str, tier: Tier) -> TaxonomyEntry {
    TaxonomyEntry { id: kind as u8, kind, name, tier }
}

pub static REGISTRY: [TaxonomyEntry; 16] = [
    entry(ErrorType::IncorrectElements, "Incorrect Elements Identification", Tier::High),
    entry(ErrorType::MissingElements, "Missing Elements Identification", Tier::High),
    entry(ErrorType::OutsideQuery, "Including Information from Outside the Query", Tier::High),
    entry(ErrorType::MissingConditions, "Missing Conditions in the Contract", Tier::High),
    entry(ErrorType::MissingCalculations, "Missing Calculations", Tier::High),
    entry(ErrorType::MissingAllAttributes, "Missing All Attributes", Tier::High),
    entry(ErrorType::StructureRoles, "Misunderstanding of Structure Roles", Tier::High),
    entry(ErrorType::IncorrectDataType, "Incorrect Data Type Identification", Tier::Medium),
    entry(ErrorType::GrammarInconsistency, "Inconsistency with the Grammar", Tier::Medium),
    entry(ErrorType::EnvironmentVariables, "Misidentified Environment Variables", Tier::Medium),
    entry(ErrorType::WrongLogic, "Providing Wrong Logic", Tier::Medium),
    entry(ErrorType::IncorrectCalculations, "Incorrect Calculations", Tier::Medium),
    entry(ErrorType::UnnecessaryInformation, "Including Unnecessary Information", Tier::Medium),
    entry(ErrorType::MissingAttributes, "Missing Attributes", Tier::Medium),
    entry(ErrorType::IncorrectSyntax, "Incorrect Syntax", Tier::Low),
    entry(ErrorType::MissingParameters, "Missing Parameters", Tier::Low),
];

impl ErrorType {
    pub const ALL: [ErrorType; 16] = [
        ErrorType::IncorrectElements,
        ErrorType::MissingElements,
        ErrorType::OutsideQuery,
        ErrorType::MissingConditions,
        ErrorType::MissingCalculations,
        ErrorType::MissingAllAttributes,
        ErrorType::StructureRoles,
        ErrorType::IncorrectDataType,
        ErrorType::GrammarInconsistency,
        ErrorType::EnvironmentVariables,
        ErrorType::WrongLogic,
        ErrorType::IncorrectCalculations,
        ErrorType::UnnecessaryInformation,
        ErrorType::MissingAttributes,
        ErrorType::IncorrectSyntax,
        ErrorType::MissingParameters,
    ];

    pub fn id(self) -> u8 {
        self as u8
    }

    pub fn from_id(id: u8) -> Option<ErrorType> {
        ErrorType::ALL.get(usize::from(id).checked_sub(1)?).copied()
    }

    pub fn entry(self) -> &'static TaxonomyEntry {
        &REGISTRY[usize::from(self.id()) - 1]
    }

    pub fn name(self) -> &'static str {
        self.entry().name
    }

    pub fn tier(self) -> Tier {
        self.entry().tier
    }

    pub fn weight(self) -> u32 {
        self.tier().weight()
    }

    /// Whether the linter can detect this type without a reference
    /// specification to compare against.
    pub fn is_automatable(self) -> bool {
        matches!(
            self,
            ErrorType::StructureRoles
                | ErrorType::IncorrectDataType
                | ErrorType::GrammarInconsistency
                | ErrorType::EnvironmentVariables
                | ErrorType::IncorrectSyntax
        )
    }
}

impl From<ErrorType> for u8 {
    fn from(e: ErrorType) -> u8 {
        e.id()
    }
}

impl TryFrom<u8> for ErrorType {
    type Error = String;

    fn try_from(id: u8) -> Result<Self, Self::Error> {
        ErrorType::from_id(id).ok_or_else(|| format!("unknown taxonomy id {id}"))
    }
}

impl fmt::Display for ErrorType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Structural column a weighted error is attributed to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum Section {
    Contract,
    Domain,
    Declarations,
    Precondition,
    Postcondition,
    Signature,
    ObligationsPowers,
    Constraints,
}

impl Section {
    /// Column order of the results table.
    pub const ALL: [Section; 8] = [
        Section::Contract,
        Section::Domain,
        Section::Declarations,
        Section::Precondition,
        Section::Postcondition,
        Section::Signature,
        Section::ObligationsPowers,
        Section::Constraints,
    ];

    pub fn code(self) -> &'static str {
        match self {
            Section::Contract => "Cont",
            Section::Domain => "Dom",
            Section::Declarations => "Dec",
            Section::Precondition => "Pre",
            Section::Postcondition => "Pos",
            Section::Signature => "Sig",
            Section::ObligationsPowers => "OP",
            Section::Constraints => "Cos",
        }
    }

    pub fn long_name(self) -> &'static str {
        match self {
            Section::Contract => "Contract structure",
            Section::Domain => "Domain",
            Section::Declarations => "Declarations",
            Section::Precondition => "Precondition",
            Section::Postcondition => "Postcondition",
            Section::Signature => "Signature",
            Section::ObligationsPowers => "Obligations&Powers",
            Section::Constraints => "Constraints",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl From<crate::ast::Block> for Section {
    fn from(b: crate::ast::Block) -> Section {
        use crate::ast::Block;
        match b {
            Block::Declarations => Section::Declarations,
            Block::Preconditions => Section::Precondition,
            Block::Postconditions => Section::Postcondition,
            Block::Obligations | Block::SurvivingObligations | Block::Powers => Section::ObligationsPowers,
            Block::Constraints => Section::Constraints,
        }
    }
}

impl fmt::Display for Section {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for Section {
    type Err = String;

    /// Accepts the short column code or the long name, case-insensitively.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        Section::ALL
            .into_iter()
            .find(|sec| sec.code().eq_ignore_ascii_case(s) || sec.long_name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown section `{s}`"))
    }
}

impl From<Section> for String {
    fn from(s: Section) -> String {
        s.code().to_string()
    }
}

impl TryFrom<String> for Section {
    type Error = String;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}
