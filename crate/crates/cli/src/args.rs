use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nichols_core::field::{lcm, smallest_k_containing_order, ElementCode};
use nichols_core::{BraidedError, BraidedSpace, Field, FieldElement, FieldError};
use thiserror::Error;

#[derive(Debug, Parser)]
#[command(name = "nichols", version, about = "Nichols algebras of braided vector spaces over GF(2^k)")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Hilbert series of 𝔅(V)
    Compute(ComputeArgs),
    /// Relations and PBW basis of a known presentation
    Verify(VerifyArgs),
    /// Dynkin diagram of the diagonal braiding on K¹
    Dynkin(JobArgs),
    /// K¹ generators, Hilbert-series factorization and identities
    Split(ComputeArgs),
    /// Engine dimensions against the quantum symmetrizer
    Oracle(ComputeArgs),
    /// Total dimension against the table of finite rows
    Table1(ExpensiveArgs),
    /// Dimension of the bosonization with a finite abelian group
    Boson(BosonArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum FamilyName {
    Jordan,
    Block,
    Diagonal,
    Lstr,
    BlockPoints,
    Poseidon,
    Pale,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Debug, Args)]
pub struct FamilyArgs {
    #[arg(long, visible_alias = "row", value_enum)]
    pub family: FamilyName,
    /// `℘ = q12` (lstr, pale)
    #[arg(long)]
    pub p: Option<String>,
    #[arg(long)]
    pub q22: Option<String>,
    /// scalar for lstr, comma-separated vector for block_points and poseidon
    #[arg(long)]
    pub a: Option<String>,
    /// matrix: rows separated by `;`, entries by `,`
    #[arg(long)]
    pub q: Option<String>,
    /// number of blocks (poseidon)
    #[arg(long)]
    pub t: Option<usize>,
    #[arg(long)]
    pub eps: Option<String>,
    #[arg(long)]
    pub len: Option<usize>,
    /// extension degree, or `auto` for the least one containing all `ord:` parameters
    #[arg(long, default_value = "auto")]
    pub k: String,
}

#[derive(Debug, Args)]
pub struct Output {
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    /// file to write; `stdout` or absent for standard output
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct JobArgs {
    #[command(flatten)]
    pub family: FamilyArgs,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct ComputeArgs {
    #[command(flatten)]
    pub job: JobArgs,
    #[arg(long)]
    pub max_degree: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ExpensiveArgs {
    #[command(flatten)]
    pub job: JobArgs,
    /// allow full runs of the largest algebras
    #[arg(long)]
    pub expensive: bool,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub run: ExpensiveArgs,
    /// number of random consistency checks to add
    #[arg(long, default_value_t = 0)]
    pub fuzz: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct BosonArgs {
    #[command(flatten)]
    pub job: JobArgs,
    /// orders of the cyclic factors, comma-separated
    #[arg(long)]
    pub orders: String,
}

#[derive(Debug, Error)]
pub enum UsageError {
    #[error("missing --{0}")]
    Missing(&'static str),
    #[error("--{0} does not apply to this family")]
    Unused(&'static str),
    #[error("bad --k `{0}`")]
    BadK(String),
    #[error("bad --orders `{0}`")]
    BadOrders(String),
    #[error("--{name}: {source}")]
    Element { name: &'static str, source: FieldError },
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Braided(#[from] BraidedError),
}

fn codes(text: &str) -> Vec<&str> {
    text.split([',', ';']).map(str::trim).filter(|s| !s.is_empty()).collect()
}

fn split_matrix(text: &str) -> Vec<Vec<&str>> {
    text.split(';').map(|row| row.split(',').map(str::trim).collect()).collect()
}

impl FamilyArgs {
    fn given(&self) -> [(&'static str, Option<&String>); 5] {
        [
            ("p", self.p.as_ref()),
            ("q22", self.q22.as_ref()),
            ("a", self.a.as_ref()),
            ("q", self.q.as_ref()),
            ("eps", self.eps.as_ref()),
        ]
    }

    fn allowed(&self) -> &'static [&'static str] {
        match self.family {
            FamilyName::Jordan => &[],
            FamilyName::Block => &["eps"],
            FamilyName::Diagonal => &["q"],
            FamilyName::Lstr => &["p", "q22", "a"],
            FamilyName::BlockPoints | FamilyName::Poseidon => &["q", "a"],
            FamilyName::Pale => &["p", "q22"],
        }
    }

    /// The field named by `--k`; `auto` takes the least k holding every `ord:` code.
    pub fn field(&self) -> Result<Field, UsageError> {
        if self.k != "auto" {
            let k = self.k.parse().map_err(|_| UsageError::BadK(self.k.clone()))?;
            return Ok(Field::new(k)?);
        }
        let mut order = 1;
        for (name, text) in self.given() {
            for code in text.map(|t| codes(t)).unwrap_or_default() {
                let parsed = code.parse::<ElementCode>().map_err(|source| UsageError::Element { name, source })?;
                if let ElementCode::Order(m) = parsed {
                    order = lcm(order, m);
                }
            }
        }
        Ok(Field::new(smallest_k_containing_order(order)?)?)
    }

    pub fn build(&self, field: &Field) -> Result<BraidedSpace, UsageError> {
        for (name, text) in self.given() {
            if text.is_some() && !self.allowed().contains(&name) {
                return Err(UsageError::Unused(name));
            }
        }
        if self.t.is_some() && self.family != FamilyName::Poseidon {
            return Err(UsageError::Unused("t"));
        }
        if self.len.is_some() && self.family != FamilyName::Block {
            return Err(UsageError::Unused("len"));
        }
        let elem = |name: &'static str, text: &str| {
            field.parse_element(text).map_err(|source| UsageError::Element { name, source })
        };
        let scalar = |name: &'static str, text: &Option<String>, default: &str| {
            elem(name, text.as_deref().unwrap_or(default))
        };
        let vector = |name: &'static str, text: &str| -> Result<Vec<FieldElement>, UsageError> {
            text.split(',').map(|c| elem(name, c)).collect()
        };
        let matrix = |text: &str| -> Result<Vec<Vec<FieldElement>>, UsageError> {
            split_matrix(text).into_iter().map(|row| row.into_iter().map(|c| elem("q", c)).collect()).collect()
        };
        let space = match self.family {
            FamilyName::Jordan => BraidedSpace::jordan(field),
            FamilyName::Block => BraidedSpace::block(field, scalar("eps", &self.eps, "int:1")?, self.len.unwrap_or(2))?,
            FamilyName::Diagonal => {
                BraidedSpace::diagonal(field, &matrix(self.q.as_deref().ok_or(UsageError::Missing("q"))?)?)?
            }
            FamilyName::Lstr => BraidedSpace::lstr(
                field,
                scalar("p", &self.p, "int:1")?,
                scalar("q22", &self.q22, "int:1")?,
                scalar("a", &self.a, "int:1")?,
            )?,
            FamilyName::Pale => {
                BraidedSpace::pale(field, scalar("p", &self.p, "int:1")?, scalar("q22", &self.q22, "int:1")?)?
            }
            FamilyName::BlockPoints => BraidedSpace::block_points(
                field,
                &matrix(self.q.as_deref().ok_or(UsageError::Missing("q"))?)?,
                &vector("a", self.a.as_deref().ok_or(UsageError::Missing("a"))?)?,
            )?,
            FamilyName::Poseidon => {
                let t = match (&self.a, self.t) {
                    (Some(a), _) => a.split(',').count(),
                    (None, Some(t)) => t,
                    (None, None) => 2,
                };
                let ones = vec!["int:1"; t].join(",");
                let a = vector("a", self.a.as_deref().unwrap_or(&ones))?;
                let q = match &self.q {
                    Some(q) => matrix(q)?,
                    None => vec![vec![field.parse_element("int:1")?; t + 1]; t + 1],
                };
                BraidedSpace::poseidon(field, &q, &a)?
            }
        };
        Ok(space)
    }
}

pub fn parse_orders(text: &str) -> Result<Vec<u64>, UsageError> {
    text.split(',')
        .map(|s| s.trim().parse().map_err(|_| UsageError::BadOrders(text.to_string())))
        .collect()
}
