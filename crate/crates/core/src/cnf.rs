//! CNF formulas, DIMACS input, and brute-force (projected) solution counting.
//!
//! Counting here is plain enumeration of `{0,1}^n`. It doubles as the
//! counting engine for small instances and as the ground-truth oracle the
//! approximate counter is checked against.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::error::{Error, ParseError, ParseErrorKind, Result};
use crate::hash::{BitVec, CellRef, XorHash};

/// Default limit on the number of variables enumerated by brute force.
pub const DEFAULT_ENUMERATION_CAP: usize = 26;

/// Hard ceiling: assignments are packed into a single `u64`.
pub const MAX_ENUMERATION_CAP: usize = 40;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Formula {
    num_vars: usize,
    clauses: Vec<Vec<i32>>,
    /// Sorted, 1-based, nonempty.
    sampling_set: Vec<usize>,
}

impl Formula {
    /// Builds a formula; `sampling_set = None` projects on every variable.
    pub fn new(num_vars: usize, clauses: Vec<Vec<i32>>, sampling_set: Option<Vec<usize>>) -> Result<Self> {
        if num_vars == 0 {
            return Err(Error::InvalidFormula("formula needs at least one variable".into()));
        }
        for clause in &clauses {
            for &lit in clause {
                if lit == 0 || lit.unsigned_abs() as usize > num_vars {
                    return Err(Error::InvalidFormula(format!("literal {lit} out of range for {num_vars} variables")));
                }
            }
        }
        let sampling_set = match sampling_set {
            None => (1..=num_vars).collect(),
            Some(vars) => {
                let set: BTreeSet<usize> = vars.into_iter().collect();
                if set.is_empty() {
                    return Err(Error::InvalidFormula("sampling set is empty".into()));
                }
                if let Some(&v) = set.iter().find(|&&v| v == 0 || v > num_vars) {
                    return Err(Error::InvalidFormula(format!(
                        "sampling variable {v} out of range for {num_vars} variables"
                    )));
                }
                set.into_iter().collect()
            }
        };
        Ok(Self { num_vars, clauses, sampling_set })
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn clauses(&self) -> &[Vec<i32>] {
        &self.clauses
    }

    pub fn sampling_set(&self) -> &[usize] {
        &self.sampling_set
    }

    pub fn is_projected(&self) -> bool {
        self.sampling_set.len() < self.num_vars
    }

    /// Same clauses, different projection set.
    pub fn with_sampling_set(&self, vars: Vec<usize>) -> Result<Self> {
        Self::new(self.num_vars, self.clauses.clone(), Some(vars))
    }

    pub fn evaluate(&self, x: &Assignment) -> bool {
        assert_eq!(x.len(), self.num_vars, "assignment length mismatch");
        self.clauses.iter().all(|clause| clause.iter().any(|&lit| x.value(lit.unsigned_abs() as usize) == (lit > 0)))
    }

    /// DIMACS text; `c ind` is emitted only for projected formulas.
    pub fn to_dimacs(&self) -> String {
        let mut out = String::new();
        if self.is_projected() {
            out.push_str("c ind");
            for v in &self.sampling_set {
                let _ = write!(out, " {v}");
            }
            out.push_str(" 0\n");
        }
        let _ = writeln!(out, "p cnf {} {}", self.num_vars, self.clauses.len());
        for clause in &self.clauses {
            for lit in clause {
                let _ = write!(out, "{lit} ");
            }
            out.push_str("0\n");
        }
        out
    }

    fn compile(&self, cap: usize) -> Result<Compiled> {
        let cap = cap.min(MAX_ENUMERATION_CAP);
        if self.num_vars > cap {
            return Err(Error::EnumerationCap { vars: self.num_vars, cap });
        }
        let clauses = self
            .clauses
            .iter()
            .map(|clause| {
                clause.iter().fold((0u64, 0u64), |(pos, neg), &lit| {
                    let bit = 1u64 << (lit.unsigned_abs() - 1);
                    if lit > 0 {
                        (pos | bit, neg)
                    } else {
                        (pos, neg | bit)
                    }
                })
            })
            .collect();
        let projection =
            if self.is_projected() { Some(self.sampling_set.iter().map(|v| v - 1).collect()) } else { None };
        Ok(Compiled { num_vars: self.num_vars, clauses, projection })
    }
}

/// Clauses as `(positive mask, negative mask)` pairs over packed assignments.
struct Compiled {
    num_vars: usize,
    clauses: Vec<(u64, u64)>,
    projection: Option<Vec<usize>>,
}

impl Compiled {
    #[inline]
    fn satisfies(&self, x: u64) -> bool {
        self.clauses.iter().all(|&(pos, neg)| (x & pos) != 0 || (!x & neg) != 0)
    }

    #[inline]
    fn project(&self, x: u64) -> u64 {
        match &self.projection {
            None => x,
            Some(idx) => idx.iter().enumerate().fold(0, |acc, (j, &i)| acc | (((x >> i) & 1) << j)),
        }
    }

    /// Visits each distinct projected solution once; stops when `visit` returns false.
    fn for_each_projected_solution(&self, mut visit: impl FnMut(u64) -> bool) {
        let total = 1u64 << self.num_vars;
        match &self.projection {
            None => {
                for x in 0..total {
                    if self.satisfies(x) && !visit(x) {
                        return;
                    }
                }
            }
            Some(idx) => {
                let mut seen = vec![0u64; (1usize << idx.len()).div_ceil(64)];
                for x in 0..total {
                    if !self.satisfies(x) {
                        continue;
                    }
                    let y = self.project(x);
                    let (w, b) = ((y / 64) as usize, y % 64);
                    if seen[w] >> b & 1 == 1 {
                        continue;
                    }
                    seen[w] |= 1 << b;
                    if !visit(y) {
                        return;
                    }
                }
            }
        }
    }
}

/// A full assignment; variable `v` (1-based) is stored at bit `v - 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Assignment(BitVec);

impl Assignment {
    pub fn from_bools(bits: &[bool]) -> Self {
        Self(BitVec::from_bools(bits))
    }

    pub fn from_bits(bits: BitVec) -> Self {
        Self(bits)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Value of 1-based variable `var`.
    pub fn value(&self, var: usize) -> bool {
        self.0.get(var - 1)
    }

    pub fn bits(&self) -> &BitVec {
        &self.0
    }
}

/// Outcome of a bounded enumeration.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BoundedCount {
    pub count: u64,
    /// True iff the true number of solutions is at least the limit.
    pub saturated: bool,
}

/// Counts projected solutions, optionally restricted to one hash cell,
/// stopping at a limit. Hashes act on the projected coordinates, so their
/// dimension is `|sampling_set|`.
///
/// Implementations are bound to one formula. Swapping in an external SAT
/// backend means implementing this trait.
pub trait BoundedCounter {
    /// Dimension of the space the hash acts on.
    fn hash_dim(&self) -> usize;

    fn bounded_count(&self, cell: Option<(&XorHash, &CellRef)>, limit: u64) -> Result<BoundedCount>;
}

fn check_cell<'h>(dim: usize, cell: Option<(&'h XorHash, &CellRef)>) -> Result<Option<(&'h XorHash, u64, usize)>> {
    let Some((h, c)) = cell else { return Ok(None) };
    if h.dim() != dim || c.alpha.len() != dim {
        return Err(Error::Contract(format!("hash dimension {} does not match {dim} projected variables", h.dim())));
    }
    if c.m > dim {
        return Err(Error::Contract(format!("prefix length {} exceeds {dim}", c.m)));
    }
    let alpha = c.alpha.prefix(c.m).as_u64().unwrap_or(0);
    Ok(Some((h, alpha, c.m)))
}

fn check_limit(limit: u64) -> Result<()> {
    if limit == 0 {
        return Err(Error::Contract("limit must be at least 1".into()));
    }
    Ok(())
}

/// On-the-fly scan of all `2^n` assignments with early exit.
pub struct Enumerator<'f> {
    formula: &'f Formula,
    compiled: Compiled,
}

impl<'f> Enumerator<'f> {
    pub fn new(formula: &'f Formula, cap: usize) -> Result<Self> {
        let compiled = formula.compile(cap)?;
        Ok(Self { formula, compiled })
    }

    pub fn formula(&self) -> &Formula {
        self.formula
    }
}

impl BoundedCounter for Enumerator<'_> {
    fn hash_dim(&self) -> usize {
        self.formula.sampling_set.len()
    }

    fn bounded_count(&self, cell: Option<(&XorHash, &CellRef)>, limit: u64) -> Result<BoundedCount> {
        check_limit(limit)?;
        let cell = check_cell(self.hash_dim(), cell)?;
        let mut count = 0u64;
        self.compiled.for_each_projected_solution(|y| {
            let inside = match cell {
                None => true,
                Some((h, alpha, m)) => h.prefix_value_u64(m, y) == alpha,
            };
            if inside {
                count += 1;
            }
            count < limit
        });
        Ok(BoundedCount { count, saturated: count >= limit })
    }
}

/// All distinct projected solutions, enumerated once and then queried per
/// cell. This is the engine the counter uses for repeated cell queries.
#[derive(Clone, Debug)]
pub struct ProjectedSolutions {
    dim: usize,
    solutions: Vec<u64>,
}

impl ProjectedSolutions {
    pub fn new(formula: &Formula, cap: usize) -> Result<Self> {
        let compiled = formula.compile(cap)?;
        let mut solutions = Vec::new();
        compiled.for_each_projected_solution(|y| {
            solutions.push(y);
            true
        });
        Ok(Self { dim: formula.sampling_set.len(), solutions })
    }

    pub fn len(&self) -> usize {
        self.solutions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.solutions.is_empty()
    }

    /// Packed projected solutions; coordinate `j` is the j-th sampling variable.
    pub fn solutions(&self) -> &[u64] {
        &self.solutions
    }
}

impl BoundedCounter for ProjectedSolutions {
    fn hash_dim(&self) -> usize {
        self.dim
    }

    fn bounded_count(&self, cell: Option<(&XorHash, &CellRef)>, limit: u64) -> Result<BoundedCount> {
        check_limit(limit)?;
        let count = match check_cell(self.dim, cell)? {
            None => (self.solutions.len() as u64).min(limit),
            Some((h, alpha, m)) => {
                let mut count = 0u64;
                for &y in &self.solutions {
                    if h.prefix_value_u64(m, y) == alpha {
                        count += 1;
                        if count >= limit {
                            break;
                        }
                    }
                }
                count
            }
        };
        Ok(BoundedCount { count, saturated: count >= limit })
    }
}

/// Exact projected model count by brute force.
pub fn count_exact(f: &Formula) -> Result<u64> {
    count_exact_with_cap(f, DEFAULT_ENUMERATION_CAP)
}

pub fn count_exact_with_cap(f: &Formula, cap: usize) -> Result<u64> {
    let compiled = f.compile(cap)?;
    let mut count = 0u64;
    compiled.for_each_projected_solution(|_| {
        count += 1;
        true
    });
    Ok(count)
}

/// `BoundedSAT` realized by enumeration with the default cap.
pub fn bounded_count(f: &Formula, cell: Option<(&XorHash, &CellRef)>, limit: u64) -> Result<BoundedCount> {
    Enumerator::new(f, DEFAULT_ENUMERATION_CAP)?.bounded_count(cell, limit)
}

/// Parses DIMACS CNF. Every `c ind v1 v2 … 0` line contributes to the
/// sampling set (duplicates and repeated lines are merged by union).
pub fn parse_dimacs(text: &str) -> std::result::Result<Formula, ParseError> {
    let err = |line: usize, kind| ParseError { line, kind };
    let mut header: Option<(usize, usize, usize)> = None;
    let mut ind: Vec<(usize, i64)> = Vec::new();
    let mut saw_ind = false;
    let mut clauses: Vec<Vec<i32>> = Vec::new();
    let mut current: Vec<i32> = Vec::new();
    let mut last_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        last_line = lineno;
        if let Some(rest) = line.strip_prefix('c') {
            let mut toks = rest.split_whitespace();
            if rest.starts_with(char::is_whitespace) && toks.next() == Some("ind") {
                saw_ind = true;
                let mut terminated = false;
                for tok in toks {
                    let v: i64 = tok.parse().map_err(|_| err(lineno, ParseErrorKind::BadToken(tok.into())))?;
                    if v == 0 {
                        terminated = true;
                        break;
                    }
                    ind.push((lineno, v));
                }
                if !terminated {
                    return Err(err(lineno, ParseErrorKind::UnterminatedSamplingSet));
                }
            }
            continue;
        }
        if line.starts_with('%') {
            break;
        }
        if let Some(rest) = line.strip_prefix('p') {
            if header.is_some() {
                return Err(err(lineno, ParseErrorKind::DuplicateHeader));
            }
            let parts: Vec<&str> = rest.split_whitespace().collect();
            let malformed = || err(lineno, ParseErrorKind::MalformedHeader(line.into()));
            if parts.len() != 3 || parts[0] != "cnf" {
                return Err(malformed());
            }
            let n: usize = parts[1].parse().map_err(|_| malformed())?;
            let m: usize = parts[2].parse().map_err(|_| malformed())?;
            if n == 0 {
                return Err(malformed());
            }
            header = Some((n, m, lineno));
            continue;
        }
        let Some((n, _, _)) = header else {
            return Err(err(lineno, ParseErrorKind::ClauseBeforeHeader));
        };
        for tok in line.split_whitespace() {
            let lit: i64 = tok.parse().map_err(|_| err(lineno, ParseErrorKind::BadToken(tok.into())))?;
            if lit == 0 {
                clauses.push(std::mem::take(&mut current));
            } else if lit.unsigned_abs() as usize > n {
                return Err(err(lineno, ParseErrorKind::LiteralOutOfRange { lit, num_vars: n }));
            } else {
                current.push(lit as i32);
            }
        }
    }

    let Some((n, m, header_line)) = header else {
        return Err(err(last_line.max(1), ParseErrorKind::MissingHeader));
    };
    if !current.is_empty() {
        return Err(err(last_line, ParseErrorKind::UnterminatedClause));
    }
    if clauses.len() != m {
        return Err(err(header_line, ParseErrorKind::ClauseCountMismatch { declared: m, found: clauses.len() }));
    }
    let sampling_set = if saw_ind {
        let mut vars = Vec::with_capacity(ind.len());
        for (lineno, v) in ind {
            if v <= 0 || v as usize > n {
                return Err(err(lineno, ParseErrorKind::SamplingVarOutOfRange { var: v, num_vars: n }));
            }
            vars.push(v as usize);
        }
        if vars.is_empty() {
            return Err(err(header_line, ParseErrorKind::EmptySamplingSet));
        }
        Some(vars)
    } else {
        None
    };
    Ok(Formula::new(n, clauses, sampling_set).expect("validated during parsing"))
}
