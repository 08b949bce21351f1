//! Code families: the rotated XZZX, XY and XZ surface codes and the
//! phase-flip repetition code.
//!
//! Surface-code qubits sit on a `d x d` grid enumerated row-major from the
//! top-left (`v = row * d + col`). Checks live on the faces of that grid.
//! Face `(r, c)` has corners `(r, c)`, `(r, c+1)`, `(r+1, c)`, `(r+1, c+1)`,
//! with `r, c` ranging over `-1..d-1`; faces with a row or column of `-1` or
//! `d-1` are weight-2 boundary checks.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{PauliLetter, PauliString};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CodeFamily {
    Xzzx,
    Xy,
    Xz,
    Repetition,
}

impl CodeFamily {
    pub fn is_surface(self) -> bool {
        !matches!(self, CodeFamily::Repetition)
    }

    pub fn name(self) -> &'static str {
        match self {
            CodeFamily::Xzzx => "xzzx",
            CodeFamily::Xy => "xy",
            CodeFamily::Xz => "xz",
            CodeFamily::Repetition => "repetition",
        }
    }

    /// Weight of the pure-Z logical for distance `d`.
    pub fn pure_z_distance(self, d: usize) -> usize {
        match self {
            CodeFamily::Xy => d * d,
            _ => d,
        }
    }
}

impl fmt::Display for CodeFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CodeFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "xzzx" => Ok(CodeFamily::Xzzx),
            "xy" => Ok(CodeFamily::Xy),
            "xz" | "css" => Ok(CodeFamily::Xz),
            "repetition" | "rep" => Ok(CodeFamily::Repetition),
            other => Err(Error::Parse(format!("unknown code family {other:?}"))),
        }
    }
}

/// Logical equivalence class of an error chain.
///
/// The discriminant packs two bits: bit 0 is set when the chain anticommutes
/// with `Z_L`, bit 1 when it anticommutes with `X_L`. Composition of classes
/// is then XOR, and the index order is `(I, X, Z, Y)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EquivClass {
    I = 0,
    X = 1,
    Z = 2,
    Y = 3,
}

impl EquivClass {
    pub const ALL: [EquivClass; 4] = [EquivClass::I, EquivClass::X, EquivClass::Z, EquivClass::Y];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Self {
        Self::ALL[i & 3]
    }

    pub fn compose(self, other: EquivClass) -> EquivClass {
        Self::from_index(self.index() ^ other.index())
    }

    /// Applies a logical bit flip (`X_L`).
    pub fn has_bit_flip(self) -> bool {
        self.index() & 1 == 1
    }

    /// Applies a logical phase flip (`Z_L`).
    pub fn has_phase_flip(self) -> bool {
        self.index() & 2 == 2
    }

    pub fn as_str(self) -> &'static str {
        match self {
            EquivClass::I => "I",
            EquivClass::X => "X",
            EquivClass::Z => "Z",
            EquivClass::Y => "Y",
        }
    }
}

impl fmt::Display for EquivClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One bit per check; `true` means the check anticommutes with the chain.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Syndrome {
    bits: Vec<bool>,
}

impl Syndrome {
    pub fn new(bits: Vec<bool>) -> Self {
        Self { bits }
    }

    pub fn zeros(len: usize) -> Self {
        Self { bits: vec![false; len] }
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn is_trivial(&self) -> bool {
        self.bits.iter().all(|b| !b)
    }

    pub fn weight(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }
}

impl fmt::Display for Syndrome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for Syndrome {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.trim()
            .chars()
            .filter(|c| !c.is_whitespace() && *c != ',')
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::Parse(format!("invalid syndrome digit {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Syndrome::new)
    }
}

/// Face position `(row, col)` of a surface-code check on the `(d+1) x (d+1)` face grid,
/// with coordinates in `-1..d`.
pub type FacePos = (i32, i32);

/// A constructed code instance.
#[derive(Clone, Debug)]
pub struct CodeSpec {
    pub family: CodeFamily,
    pub d: usize,
    pub n: usize,
    pub checks: Vec<PauliString>,
    pub logical_x: PauliString,
    pub logical_z: PauliString,
    pub d_z: usize,
    /// Face position of each check; empty for the repetition code.
    pub faces: Vec<FacePos>,
    supports: Vec<Vec<(usize, PauliLetter)>>,
    pure_z_preimages: OnceLock<Option<Vec<PauliString>>>,
    general_preimages: OnceLock<Option<Vec<PauliString>>>,
}

impl CodeSpec {
    /// Assembles a code from explicit operators. Used by [`build_code`]; also handy
    /// for injecting faults into a code under test.
    pub fn from_parts(
        family: CodeFamily,
        d: usize,
        checks: Vec<PauliString>,
        logical_x: PauliString,
        logical_z: PauliString,
        faces: Vec<FacePos>,
    ) -> Self {
        let n = logical_x.len();
        let supports = checks
            .iter()
            .map(|c| c.support().into_iter().map(|v| (v, c.get(v))).collect())
            .collect();
        Self {
            family,
            d,
            n,
            checks,
            logical_x,
            logical_z,
            d_z: family.pure_z_distance(d),
            faces,
            supports,
            pure_z_preimages: OnceLock::new(),
            general_preimages: OnceLock::new(),
        }
    }

    pub fn num_checks(&self) -> usize {
        self.checks.len()
    }

    pub fn qubit(&self, row: usize, col: usize) -> usize {
        row * self.d + col
    }

    /// Non-identity letters of check `i` as `(qubit, letter)` pairs.
    pub fn check_support(&self, i: usize) -> &[(usize, PauliLetter)] {
        &self.supports[i]
    }

    pub fn logical(&self, class: EquivClass) -> PauliString {
        let mut l = PauliString::identity(self.n);
        if class.has_bit_flip() {
            l.mul_assign_unchecked(&self.logical_x);
        }
        if class.has_phase_flip() {
            l.mul_assign_unchecked(&self.logical_z);
        }
        l
    }

    fn check_chain(&self, chain: &PauliString) -> Result<()> {
        if chain.len() != self.n {
            return Err(Error::LengthMismatch {
                left: chain.len(),
                right: self.n,
            });
        }
        Ok(())
    }

    fn check_syndrome(&self, s: &Syndrome) -> Result<()> {
        if s.len() != self.checks.len() {
            return Err(Error::LengthMismatch {
                left: s.len(),
                right: self.checks.len(),
            });
        }
        Ok(())
    }

    pub fn syndrome(&self, chain: &PauliString) -> Result<Syndrome> {
        self.check_chain(chain)?;
        Ok(self.syndrome_unchecked(chain))
    }

    pub(crate) fn syndrome_unchecked(&self, chain: &PauliString) -> Syndrome {
        let bits = self
            .supports
            .iter()
            .map(|sup| {
                sup.iter()
                    .filter(|&&(v, l)| !l.commutes(chain.get(v)))
                    .count()
                    % 2
                    == 1
            })
            .collect();
        Syndrome::new(bits)
    }

    pub fn equivalence_class(&self, chain: &PauliString) -> Result<EquivClass> {
        self.check_chain(chain)?;
        Ok(self.class_unchecked(chain))
    }

    pub(crate) fn class_unchecked(&self, chain: &PauliString) -> EquivClass {
        let x = !chain.commutes_unchecked(&self.logical_z);
        let z = !chain.commutes_unchecked(&self.logical_x);
        EquivClass::from_index(x as usize | (z as usize) << 1)
    }

    fn preimages(&self, pure_z: bool) -> Option<&[PauliString]> {
        let cell = if pure_z {
            &self.pure_z_preimages
        } else {
            &self.general_preimages
        };
        cell.get_or_init(|| syndrome_preimages(self, pure_z)).as_deref()
    }

    fn combine(&self, s: &Syndrome, preimages: &[PauliString]) -> PauliString {
        let mut chain = PauliString::identity(self.n);
        for (bit, pre) in s.bits().iter().zip(preimages) {
            if *bit {
                chain.mul_assign_unchecked(pre);
            }
        }
        chain
    }

    /// Pure `Z`/`I` chain with syndrome `s` that commutes with `X_L`.
    pub fn pure_z_representative(&self, s: &Syndrome) -> Result<PauliString> {
        if !matches!(self.family, CodeFamily::Xzzx | CodeFamily::Xy) {
            return Err(Error::UnsupportedFamily {
                op: "pure_z_representative",
                family: self.family,
            });
        }
        self.check_syndrome(s)?;
        let pre = self
            .preimages(true)
            .ok_or_else(|| Error::Degenerate("pure-Z chains do not span the syndrome space".into()))?;
        let mut chain = self.combine(s, pre);
        if !chain.commutes_unchecked(&self.logical_x) {
            chain.mul_assign_unchecked(&self.logical_z);
        }
        Ok(chain)
    }

    /// Some chain with syndrome `s`, used as the seed of the coset sums.
    ///
    /// XZZX and XY use the canonical pure-Z representative; the repetition
    /// code uses its pure-Z solution; the XZ code falls back to a GF(2) solve
    /// over all single-qubit X and Z errors.
    pub fn representative(&self, s: &Syndrome) -> Result<PauliString> {
        self.check_syndrome(s)?;
        match self.family {
            CodeFamily::Xzzx | CodeFamily::Xy => self.pure_z_representative(s),
            CodeFamily::Repetition => {
                let pre = self.preimages(true).expect("repetition checks are independent");
                Ok(self.combine(s, pre))
            }
            CodeFamily::Xz => {
                let pre = self
                    .preimages(false)
                    .ok_or_else(|| Error::Degenerate("checks are not independent".into()))?;
                Ok(self.combine(s, pre))
            }
        }
    }

    /// Logical bit-flip operator carrying a single minority (`X` or `Y`) letter.
    pub fn single_minority_logical(&self, site: usize, letter: PauliLetter) -> Result<PauliString> {
        if !matches!(self.family, CodeFamily::Xzzx | CodeFamily::Xy) {
            return Err(Error::UnsupportedFamily {
                op: "single_minority_logical",
                family: self.family,
            });
        }
        if site >= self.n {
            return Err(Error::InvalidSite {
                site,
                reason: "beyond the last qubit",
            });
        }
        if !matches!(letter, PauliLetter::X | PauliLetter::Y) {
            return Err(Error::InvalidSite {
                site,
                reason: "minority letter must be X or Y",
            });
        }
        if self.logical_z.get(site) != PauliLetter::Z {
            return Err(Error::InvalidSite {
                site,
                reason: "not on the support of the pure-Z logical",
            });
        }
        let single = PauliString::from_sites(self.n, &[site], letter);
        let s = self.syndrome_unchecked(&single);
        let mut l = self.pure_z_representative(&s)?;
        l.mul_assign_unchecked(&single);
        if !l.commutes_unchecked(&self.logical_x) {
            l.mul_assign_unchecked(&self.logical_z);
        }
        Ok(l)
    }
}

/// For each check `i`, a chain whose syndrome is the unit vector `e_i`.
///
/// Gauss-Jordan elimination over the syndrome columns of the single-qubit
/// generators (`Z_v` only, or `X_v` and `Z_v`). Returns `None` if the
/// generators do not reach every syndrome.
fn syndrome_preimages(code: &CodeSpec, pure_z: bool) -> Option<Vec<PauliString>> {
    let m = code.checks.len();
    let words = m.div_ceil(64).max(1);
    let mut letters = vec![PauliLetter::Z];
    if !pure_z {
        letters.push(PauliLetter::X);
    }
    let mut rows: Vec<(Vec<u64>, PauliString)> = Vec::with_capacity(code.n * letters.len());
    for &l in &letters {
        for v in 0..code.n {
            let g = PauliString::from_sites(code.n, &[v], l);
            let s = code.syndrome_unchecked(&g);
            let mut bits = vec![0u64; words];
            for (i, &b) in s.bits().iter().enumerate() {
                if b {
                    bits[i / 64] |= 1 << (i % 64);
                }
            }
            rows.push((bits, g));
        }
    }
    let mut pivot_row_of_col = vec![usize::MAX; m];
    let mut next = 0;
    for col in 0..m {
        let (w, b) = (col / 64, col % 64);
        let found = (next..rows.len()).find(|&r| (rows[r].0[w] >> b) & 1 == 1)?;
        rows.swap(next, found);
        let (pivot_bits, pivot_chain) = rows[next].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != next && (row.0[w] >> b) & 1 == 1 {
                for (a, p) in row.0.iter_mut().zip(&pivot_bits) {
                    *a ^= p;
                }
                row.1.mul_assign_unchecked(&pivot_chain);
            }
        }
        pivot_row_of_col[col] = next;
        next += 1;
    }
    Some(pivot_row_of_col.into_iter().map(|r| rows[r].1.clone()).collect())
}

fn face_exists(d: i32, r: i32, c: i32) -> bool {
    let bulk = |x: i32| (0..d - 1).contains(&x);
    match (r, c) {
        _ if bulk(r) && bulk(c) => true,
        (-1, c) if bulk(c) => c % 2 == 1,
        (r, c) if r == d - 1 && bulk(c) => c % 2 == 0,
        (r, -1) if bulk(r) => r % 2 == 0,
        (r, c) if c == d - 1 && bulk(r) => r % 2 == 1,
        _ => false,
    }
}

/// Letter that face `(r, c)` places on its corner `(dr, dc)`.
fn face_letter(family: CodeFamily, r: i32, c: i32, dr: i32, dc: i32) -> PauliLetter {
    let even = (r + c).rem_euclid(2) == 0;
    match family {
        // X on the main-diagonal corners, Z on the anti-diagonal corners.
        CodeFamily::Xzzx => {
            if dr == dc {
                PauliLetter::X
            } else {
                PauliLetter::Z
            }
        }
        CodeFamily::Xy => {
            if even {
                PauliLetter::X
            } else {
                PauliLetter::Y
            }
        }
        CodeFamily::Xz => {
            if even {
                PauliLetter::X
            } else {
                PauliLetter::Z
            }
        }
        CodeFamily::Repetition => unreachable!("repetition code has no faces"),
    }
}

pub fn build_code(family: CodeFamily, d: usize) -> Result<CodeSpec> {
    if d.is_multiple_of(2) {
        return Err(Error::InvalidDistance {
            family,
            d,
            reason: "distance must be odd",
        });
    }
    if family.is_surface() && d < 3 {
        return Err(Error::InvalidDistance {
            family,
            d,
            reason: "surface codes need d >= 3",
        });
    }
    if family == CodeFamily::Repetition {
        return Ok(build_repetition(d));
    }

    let n = d * d;
    let di = d as i32;
    let mut checks = Vec::with_capacity(n - 1);
    let mut faces = Vec::with_capacity(n - 1);
    for r in -1..di {
        for c in -1..di {
            if !face_exists(di, r, c) {
                continue;
            }
            let mut check = PauliString::identity(n);
            for (dr, dc) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
                let (qr, qc) = (r + dr, c + dc);
                if (0..di).contains(&qr) && (0..di).contains(&qc) {
                    check.set(qr as usize * d + qc as usize, face_letter(family, r, c, dr, dc));
                }
            }
            checks.push(check);
            faces.push((r, c));
        }
    }

    let anti_diagonal: Vec<usize> = (0..d).map(|i| i * d + (d - 1 - i)).collect();
    let (logical_x, logical_z) = match family {
        CodeFamily::Xzzx => {
            let main_diagonal: Vec<usize> = (0..d).map(|i| i * d + i).collect();
            (
                PauliString::from_sites(n, &anti_diagonal, PauliLetter::X),
                PauliString::from_sites(n, &main_diagonal, PauliLetter::Z),
            )
        }
        CodeFamily::Xy => (
            PauliString::from_sites(n, &anti_diagonal, PauliLetter::X),
            PauliString::from_sites(n, &(0..n).collect::<Vec<_>>(), PauliLetter::Z),
        ),
        CodeFamily::Xz => {
            let column: Vec<usize> = (0..d).map(|i| i * d).collect();
            let row: Vec<usize> = (0..d).collect();
            (
                PauliString::from_sites(n, &column, PauliLetter::X),
                PauliString::from_sites(n, &row, PauliLetter::Z),
            )
        }
        CodeFamily::Repetition => unreachable!(),
    };
    Ok(CodeSpec::from_parts(family, d, checks, logical_x, logical_z, faces))
}

fn build_repetition(d: usize) -> CodeSpec {
    let checks = (0..d.saturating_sub(1))
        .map(|i| PauliString::from_sites(d, &[i, i + 1], PauliLetter::X))
        .collect();
    CodeSpec::from_parts(
        CodeFamily::Repetition,
        d,
        checks,
        PauliString::from_sites(d, &[0], PauliLetter::X),
        PauliString::from_sites(d, &(0..d).collect::<Vec<_>>(), PauliLetter::Z),
        Vec::new(),
    )
}

/// Outcome of one invariant check in [`validate_code`].
#[derive(Clone, Debug, Serialize)]
pub struct InvariantCheck {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct ValidationReport {
    pub family: CodeFamily,
    pub d: usize,
    pub checks: Vec<InvariantCheck>,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&InvariantCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} d={}", self.family, self.d)?;
        for c in &self.checks {
            let mark = if c.passed { "PASS" } else { "FAIL" };
            writeln!(f, "  [{mark}] {}: {}", c.name, c.detail)?;
        }
        Ok(())
    }
}

/// Rank over GF(2) of a set of Pauli strings (as symplectic vectors).
fn symplectic_rank(ops: &[PauliString]) -> usize {
    let mut rows: Vec<Vec<u64>> = ops
        .iter()
        .map(|p| p.x_words().iter().chain(p.z_words()).copied().collect())
        .collect();
    let bits = rows.first().map_or(0, |r| r.len() * 64);
    let mut rank = 0;
    for col in 0..bits {
        let (w, b) = (col / 64, col % 64);
        let Some(p) = (rank..rows.len()).find(|&r| (rows[r][w] >> b) & 1 == 1) else {
            continue;
        };
        rows.swap(rank, p);
        let pivot = rows[rank].clone();
        for row in rows.iter_mut().skip(rank + 1) {
            if (row[w] >> b) & 1 == 1 {
                for (a, q) in row.iter_mut().zip(&pivot) {
                    *a ^= q;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Runs every structural invariant of a [`CodeSpec`] and reports each outcome.
pub fn validate_code(code: &CodeSpec) -> ValidationReport {
    let mut checks = Vec::new();
    let mut push = |name, passed, detail: String| checks.push(InvariantCheck { name, passed, detail });

    let lengths_ok = code.checks.iter().all(|c| c.len() == code.n)
        && code.logical_x.len() == code.n
        && code.logical_z.len() == code.n;
    push("operator_lengths", lengths_ok, format!("n = {}", code.n));
    if !lengths_ok {
        return ValidationReport {
            family: code.family,
            d: code.d,
            checks,
        };
    }

    let expected_checks = code.n.saturating_sub(1);
    push(
        "check_count",
        code.checks.len() == expected_checks,
        format!("{} checks, expected {expected_checks}", code.checks.len()),
    );

    let mut bad_pairs = Vec::new();
    for i in 0..code.checks.len() {
        for j in i + 1..code.checks.len() {
            if !code.checks[i].commutes_unchecked(&code.checks[j]) {
                bad_pairs.push((i, j));
            }
        }
    }
    push(
        "checks_commute",
        bad_pairs.is_empty(),
        if bad_pairs.is_empty() {
            "all pairs commute".into()
        } else {
            format!("{} anticommuting pairs, first {:?}", bad_pairs.len(), bad_pairs[0])
        },
    );

    let bad_x: Vec<usize> = (0..code.checks.len())
        .filter(|&i| !code.checks[i].commutes_unchecked(&code.logical_x))
        .collect();
    let bad_z: Vec<usize> = (0..code.checks.len())
        .filter(|&i| !code.checks[i].commutes_unchecked(&code.logical_z))
        .collect();
    push(
        "logicals_commute_with_checks",
        bad_x.is_empty() && bad_z.is_empty(),
        format!("X_L violations {bad_x:?}, Z_L violations {bad_z:?}"),
    );

    push(
        "logicals_anticommute",
        !code.logical_x.commutes_unchecked(&code.logical_z),
        String::from("X_L and Z_L"),
    );

    let rank = symplectic_rank(&code.checks);
    push(
        "checks_independent",
        rank == code.checks.len(),
        format!("rank {rank} of {}", code.checks.len()),
    );

    let mut with_logical = code.checks.clone();
    with_logical.push(code.logical_x.clone());
    with_logical.push(code.logical_z.clone());
    let full = symplectic_rank(&with_logical);
    push(
        "logicals_outside_stabilizer_group",
        full == rank + 2,
        format!("rank with logicals {full}"),
    );

    let zw = code.logical_z.weight_counts();
    push(
        "pure_z_logical_weight",
        zw.n_x == 0 && zw.n_y == 0 && zw.n_z == code.d_z,
        format!("Z_L has {} Z letters, d_z = {}", zw.n_z, code.d_z),
    );

    if matches!(code.family, CodeFamily::Xzzx | CodeFamily::Xy) {
        let d = code.d;
        let xw = code.logical_x.weight_counts();
        let on_anti = (0..d).all(|i| code.logical_x.get(i * d + d - 1 - i) == PauliLetter::X);
        push(
            "logical_x_on_anti_diagonal",
            xw.n_x == d && xw.n_y == 0 && xw.n_z == 0 && on_anti,
            format!("X_L = {}", code.logical_x),
        );
        let z_ok = match code.family {
            CodeFamily::Xzzx => (0..d).all(|i| code.logical_z.get(i * d + i) == PauliLetter::Z),
            _ => zw.n_z == code.n,
        };
        push("logical_z_layout", z_ok, format!("Z_L = {}", code.logical_z));
    }

    ValidationReport {
        family: code.family,
        d: code.d,
        checks,
    }
}
