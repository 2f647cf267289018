use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, OnceLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use twofloat::TwoFloat;

use super::ExactError;

/// Product table: `table[i][j]` is the coefficient vector of `β_i · β_j`.
pub type MulTable = Vec<Vec<Vec<BigRational>>>;

/// A declared ℚ-basis `{β₀ = 1, β₁, …}` of real numbers.
///
/// Linear independence of the generators over ℚ is taken as an axiom and is
/// never checked. Generator 0 is always the constant `1`.
pub struct RealBasis {
    tags: Vec<String>,
    values: Vec<TwoFloat>,
    table: Option<MulTable>,
}

impl RealBasis {
    pub fn new(
        generators: Vec<(String, TwoFloat)>,
        table: Option<MulTable>,
    ) -> Result<Arc<Self>, ExactError> {
        if generators.is_empty() {
            return Err(ExactError::InvalidBasis("no generators".into()));
        }
        let (tag0, value0) = &generators[0];
        if tag0 != "1" || value0.hi() != 1.0 || value0.lo() != 0.0 {
            return Err(ExactError::InvalidBasis(
                "generator 0 must be the constant 1".into(),
            ));
        }
        for (i, (t, _)) in generators.iter().enumerate() {
            if generators[..i].iter().any(|(u, _)| u == t) {
                return Err(ExactError::InvalidBasis(format!("duplicate tag `{t}`")));
            }
        }
        let g = generators.len();
        if let Some(tab) = &table {
            if tab.len() != g
                || tab.iter().any(|row| {
                    row.len() != g || row.iter().any(|entry| entry.len() != g)
                })
            {
                return Err(ExactError::InvalidBasis("table has wrong shape".into()));
            }
            for i in 0..g {
                for j in 0..i {
                    if tab[i][j] != tab[j][i] {
                        return Err(ExactError::InvalidBasis(format!(
                            "table is not symmetric at ({i},{j})"
                        )));
                    }
                }
            }
        }
        let (tags, values) = generators.into_iter().unzip();
        Ok(Arc::new(RealBasis {
            tags,
            values,
            table,
        }))
    }

    /// The basis `(1)`: plain rationals.
    pub fn rational() -> Arc<Self> {
        static B: OnceLock<Arc<RealBasis>> = OnceLock::new();
        B.get_or_init(|| build_from_tags(&["1"]).expect("preset")).clone()
    }

    /// `(1, √2)`.
    pub fn sqrt2() -> Arc<Self> {
        static B: OnceLock<Arc<RealBasis>> = OnceLock::new();
        B.get_or_init(|| build_from_tags(&["1", "sqrt2"]).expect("preset"))
            .clone()
    }

    /// `(1, √3)`.
    pub fn sqrt3() -> Arc<Self> {
        static B: OnceLock<Arc<RealBasis>> = OnceLock::new();
        B.get_or_init(|| build_from_tags(&["1", "sqrt3"]).expect("preset"))
            .clone()
    }

    /// `(1, τ)` with `τ = (1+√5)/2`, `τ² = τ + 1`.
    pub fn golden() -> Arc<Self> {
        static B: OnceLock<Arc<RealBasis>> = OnceLock::new();
        B.get_or_init(|| build_from_tags(&["1", "tau"]).expect("preset"))
            .clone()
    }

    /// `(1, √2, √3, √6)`, closed under multiplication.
    pub fn sqrt2_sqrt3() -> Arc<Self> {
        static B: OnceLock<Arc<RealBasis>> = OnceLock::new();
        B.get_or_init(|| {
            build_from_tags(&["1", "sqrt2", "sqrt3", "sqrt6"]).expect("preset")
        })
        .clone()
    }

    fn presets() -> [Arc<Self>; 5] {
        [
            Self::rational(),
            Self::sqrt2(),
            Self::sqrt3(),
            Self::golden(),
            Self::sqrt2_sqrt3(),
        ]
    }

    /// Resolves a tag list to a basis. Known tags are `1`, `tau` and `sqrtN`
    /// for square-free `N ≥ 2`; the product table is attached whenever the
    /// generator set is closed under multiplication.
    pub fn from_tags<S: AsRef<str>>(tags: &[S]) -> Result<Arc<Self>, ExactError> {
        for preset in Self::presets() {
            if preset.tags.len() == tags.len()
                && preset.tags.iter().zip(tags).all(|(a, b)| a == b.as_ref())
            {
                return Ok(preset);
            }
        }
        let tags: Vec<&str> = tags.iter().map(|t| t.as_ref()).collect();
        build_from_tags(&tags)
    }

    /// Smallest canonical basis containing every generator of the inputs.
    pub fn union(bases: &[&Arc<RealBasis>]) -> Result<Arc<Self>, ExactError> {
        let first = match bases.first() {
            Some(b) => *b,
            None => return Ok(Self::rational()),
        };
        if bases.iter().all(|b| b.same_as(first)) {
            return Ok(first.clone());
        }
        let mut tags: Vec<String> = Vec::new();
        for b in bases {
            for t in &b.tags {
                if !tags.contains(t) {
                    tags.push(t.clone());
                }
            }
        }
        tags.sort_by_key(|t| tag_order(t));
        // prefer a preset that contains all requested tags
        for preset in Self::presets() {
            if tags.iter().all(|t| preset.tags.contains(t)) {
                return Ok(preset);
            }
        }
        Self::from_tags(&tags)
    }

    pub fn dim(&self) -> usize {
        self.tags.len()
    }

    pub fn tags(&self) -> &[String] {
        &self.tags
    }

    pub fn value(&self, i: usize) -> TwoFloat {
        self.values[i]
    }

    pub fn values(&self) -> &[TwoFloat] {
        &self.values
    }

    pub fn table(&self) -> Option<&MulTable> {
        self.table.as_ref()
    }

    pub fn has_table(&self) -> bool {
        self.table.is_some()
    }

    pub fn index_of(&self, tag: &str) -> Option<usize> {
        self.tags.iter().position(|t| t == tag)
    }

    pub fn same_as(&self, other: &RealBasis) -> bool {
        std::ptr::eq(self, other) || self.tags == other.tags
    }
}

impl fmt::Debug for RealBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RealBasis({})", self.tags.join(","))
    }
}

fn tag_order(tag: &str) -> (u8, u64) {
    match parse_tag(tag) {
        Some(Generator::One) => (0, 0),
        Some(Generator::Sqrt(n)) => (1, n),
        Some(Generator::Tau) => (2, 0),
        None => (3, 0),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Generator {
    One,
    Sqrt(u64),
    Tau,
}

fn parse_tag(tag: &str) -> Option<Generator> {
    match tag {
        "1" => Some(Generator::One),
        "tau" => Some(Generator::Tau),
        _ => {
            let n: u64 = tag.strip_prefix("sqrt")?.parse().ok()?;
            if n >= 2 && is_squarefree(n) {
                Some(Generator::Sqrt(n))
            } else {
                None
            }
        }
    }
}

fn is_squarefree(n: u64) -> bool {
    let mut p = 2u64;
    while p * p <= n {
        if n % (p * p) == 0 {
            return false;
        }
        p += 1;
    }
    true
}

fn squarefree_split(n: u64) -> (u64, u64) {
    // n = k² · c with c square-free
    let mut k = 1u64;
    let mut c = n;
    let mut p = 2u64;
    while p * p <= c {
        while c % (p * p) == 0 {
            c /= p * p;
            k *= p;
        }
        p += 1;
    }
    (k, c)
}

fn build_from_tags(tags: &[&str]) -> Result<Arc<RealBasis>, ExactError> {
    let gens: Vec<Generator> = tags
        .iter()
        .map(|t| parse_tag(t).ok_or_else(|| ExactError::UnknownTag(t.to_string())))
        .collect::<Result<_, _>>()?;
    let values: Vec<(String, TwoFloat)> = tags
        .iter()
        .zip(&gens)
        .map(|(t, g)| {
            let v = match g {
                Generator::One => TwoFloat::from(1.0),
                Generator::Sqrt(n) => TwoFloat::from(*n as f64).sqrt(),
                Generator::Tau => (TwoFloat::from(1.0) + TwoFloat::from(5.0).sqrt()) / 2.0,
            };
            (t.to_string(), v)
        })
        .collect();
    let table = product_table(&gens);
    RealBasis::new(values, table)
}

fn product_table(gens: &[Generator]) -> Option<MulTable> {
    let g = gens.len();
    let index: HashMap<Generator, usize> =
        gens.iter().enumerate().map(|(i, g)| (*g, i)).collect();
    let one = *index.get(&Generator::One)?;
    let mut table = vec![vec![vec![BigRational::zero(); g]; g]; g];
    for i in 0..g {
        for j in 0..g {
            let entry = &mut table[i][j];
            match (gens[i], gens[j]) {
                (Generator::One, _) => entry[j] = BigRational::one(),
                (_, Generator::One) => entry[i] = BigRational::one(),
                (Generator::Tau, Generator::Tau) => {
                    entry[one] = BigRational::one();
                    entry[i] = BigRational::one();
                }
                (Generator::Sqrt(a), Generator::Sqrt(b)) => {
                    let (k, c) = squarefree_split(a * b);
                    let k = BigRational::from_integer(BigInt::from(k));
                    if c == 1 {
                        entry[one] = k;
                    } else {
                        entry[*index.get(&Generator::Sqrt(c))?] = k;
                    }
                }
                _ => return None,
            }
        }
    }
    Some(table)
}
