//! Finite counting measures on the circle and their signed counterparts.
//!
//! A [`Configuration`] is the state of the polling system: a multiset of
//! customer locations stored as a sorted list of distinct atoms with positive
//! multiplicities. [`SignedConfiguration`] allows integer weights of either
//! sign and is the domain of the energy form in [`crate::lyapunov`].

use std::cmp::Ordering;
use std::fmt::Write as _;

use crate::error::{invalid, require_positive, Error, Result};
use crate::geometry::{arc_distance_unchecked, wrap, CirclePoint};

/// One distinct location with its (positive) customer count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub location: CirclePoint,
    pub count: u32,
}

/// One distinct location with a nonzero integer weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignedAtom {
    pub location: CirclePoint,
    pub weight: i64,
}

/// Nearest distinct atom to a probe point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Nearest {
    pub index: usize,
    pub distance: f64,
    /// Index of a second atom at exactly the same distance, if any.
    pub tie: Option<usize>,
}

fn cmp_loc(a: f64, b: f64) -> Ordering {
    a.partial_cmp(&b).expect("locations are finite")
}

/// A finite counting measure on the circle of circumference `ℓ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Configuration {
    atoms: Vec<Atom>,
    circumference: f64,
}

impl Configuration {
    /// The empty configuration.
    pub fn empty(circumference: f64) -> Result<Self> {
        require_positive("circumference", circumference)?;
        Ok(Self {
            atoms: Vec::new(),
            circumference,
        })
    }

    /// Builds a configuration with one customer per listed location. Locations
    /// are reduced modulo the circumference; identical positions merge.
    pub fn from_locations<I>(circumference: f64, locations: I) -> Result<Self>
    where
        I: IntoIterator<Item = f64>,
    {
        Self::from_counts(circumference, locations.into_iter().map(|x| (x, 1)))
    }

    /// Builds a configuration from `(location, count)` pairs. Zero counts are
    /// dropped and repeated locations are summed.
    pub fn from_counts<I>(circumference: f64, pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (f64, u32)>,
    {
        require_positive("circumference", circumference)?;
        let mut raw: Vec<(f64, u32)> = Vec::new();
        for (x, c) in pairs {
            if !x.is_finite() {
                return Err(invalid("location", format!("not finite: {x}")));
            }
            if c > 0 {
                raw.push((wrap(x, circumference), c));
            }
        }
        raw.sort_by(|a, b| cmp_loc(a.0, b.0));
        let mut atoms: Vec<Atom> = Vec::with_capacity(raw.len());
        for (x, c) in raw {
            match atoms.last_mut() {
                Some(last) if last.location.position() == x => last.count += c,
                _ => atoms.push(Atom {
                    location: CirclePoint::from_wrapped(x),
                    count: c,
                }),
            }
        }
        Ok(Self {
            atoms,
            circumference,
        })
    }

    /// `n` customers stacked at a single location.
    pub fn cluster(circumference: f64, location: f64, n: u32) -> Result<Self> {
        Self::from_counts(circumference, [(location, n)])
    }

    pub fn circumference(&self) -> f64 {
        self.circumference
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Number of distinct locations.
    pub fn distinct_len(&self) -> usize {
        self.atoms.len()
    }

    /// Total number of customers, `‖ζ‖ = ζ(S)`.
    pub fn total_variation(&self) -> u64 {
        self.atoms.iter().map(|a| u64::from(a.count)).sum()
    }

    pub fn positions(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        self.atoms.iter().map(|a| a.location.position())
    }

    /// Multiplicity at `x` (0 when `x` is not an atom).
    pub fn count_at(&self, x: f64) -> u32 {
        let x = wrap(x, self.circumference);
        self.find(x).map_or(0, |i| self.atoms[i].count)
    }

    /// Index of the atom located exactly at `x` (already wrapped).
    pub fn find(&self, x: f64) -> Option<usize> {
        self.atoms
            .binary_search_by(|a| cmp_loc(a.location.position(), x))
            .ok()
    }

    /// Returns `ζ + δ_x`.
    pub fn add_atom(&self, x: f64) -> Self {
        let mut next = self.clone();
        next.insert(x);
        next
    }

    /// Returns `ζ - δ_x`; `x` must be an atom.
    pub fn remove_atom(&self, x: f64) -> Result<Self> {
        let wrapped = wrap(x, self.circumference);
        let idx = self.find(wrapped).ok_or(Error::NotAnAtom(x))?;
        let mut next = self.clone();
        next.remove_one(idx);
        Ok(next)
    }

    /// In-place `ζ += δ_x`. Returns the index of the affected atom.
    pub fn insert(&mut self, x: f64) -> usize {
        self.insert_many(x, 1)
    }

    /// In-place `ζ += n δ_x`.
    pub fn insert_many(&mut self, x: f64, n: u32) -> usize {
        let x = wrap(x, self.circumference);
        match self
            .atoms
            .binary_search_by(|a| cmp_loc(a.location.position(), x))
        {
            Ok(i) => {
                self.atoms[i].count += n;
                i
            }
            Err(i) => {
                self.atoms.insert(
                    i,
                    Atom {
                        location: CirclePoint::from_wrapped(x),
                        count: n,
                    },
                );
                i
            }
        }
    }

    /// Removes one customer from the atom at `index`, deleting the atom when
    /// its count reaches zero.
    pub fn remove_one(&mut self, index: usize) {
        let atom = &mut self.atoms[index];
        if atom.count > 1 {
            atom.count -= 1;
        } else {
            self.atoms.remove(index);
        }
    }

    /// Nearest distinct atom to `u` (wrapped), `None` for the empty configuration.
    pub fn nearest(&self, u: f64) -> Option<Nearest> {
        let k = self.atoms.len();
        if k == 0 {
            return None;
        }
        let ell = self.circumference;
        let u = wrap(u, ell);
        let right = self
            .atoms
            .partition_point(|a| a.location.position() < u)
            % k;
        let left = (right + k - 1) % k;
        let dr = arc_distance_unchecked(u, self.atoms[right].location.position(), ell);
        let dl = arc_distance_unchecked(u, self.atoms[left].location.position(), ell);
        let nearest = match dl.partial_cmp(&dr).expect("finite") {
            Ordering::Less => Nearest {
                index: left,
                distance: dl,
                tie: None,
            },
            Ordering::Greater => Nearest {
                index: right,
                distance: dr,
                tie: None,
            },
            Ordering::Equal => Nearest {
                index: right,
                distance: dr,
                tie: (left != right).then_some(left),
            },
        };
        Some(nearest)
    }

    /// Debug snapshot: one `location:count` line per atom.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for a in &self.atoms {
            let _ = writeln!(out, "{}:{}", a.location.position(), a.count);
        }
        out
    }

    /// Parses the `location:count` snapshot format. Blank lines are ignored.
    pub fn from_text(circumference: f64, text: &str) -> Result<Self> {
        let mut pairs = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let (loc, count) = line
                .split_once(':')
                .ok_or_else(|| Error::Parse(format!("line {}: expected location:count", lineno + 1)))?;
            let loc: f64 = loc
                .trim()
                .parse()
                .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?;
            let count: u32 = count
                .trim()
                .parse()
                .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?;
            pairs.push((loc, count));
        }
        Self::from_counts(circumference, pairs)
    }

    /// Atomwise signed difference `ζ - η`.
    pub fn difference(&self, other: &Configuration) -> Result<SignedConfiguration> {
        check_same_circle(self.circumference, other.circumference)?;
        SignedConfiguration::from_weights(
            self.circumference,
            self.atoms
                .iter()
                .map(|a| (a.location.position(), i64::from(a.count)))
                .chain(
                    other
                        .atoms
                        .iter()
                        .map(|a| (a.location.position(), -i64::from(a.count))),
                ),
        )
    }

    pub fn to_signed(&self) -> SignedConfiguration {
        SignedConfiguration {
            atoms: self
                .atoms
                .iter()
                .map(|a| SignedAtom {
                    location: a.location,
                    weight: i64::from(a.count),
                })
                .collect(),
            circumference: self.circumference,
        }
    }
}

pub(crate) fn check_same_circle(a: f64, b: f64) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::CircumferenceMismatch(a, b))
    }
}

/// An integer-weighted atom list on the circle.
#[derive(Debug, Clone, PartialEq)]
pub struct SignedConfiguration {
    atoms: Vec<SignedAtom>,
    circumference: f64,
}

impl SignedConfiguration {
    pub fn empty(circumference: f64) -> Result<Self> {
        require_positive("circumference", circumference)?;
        Ok(Self {
            atoms: Vec::new(),
            circumference,
        })
    }

    /// Builds from `(location, weight)` pairs, summing repeated locations and
    /// dropping atoms whose weight cancels to zero.
    pub fn from_weights<I>(circumference: f64, pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (f64, i64)>,
    {
        require_positive("circumference", circumference)?;
        let mut raw: Vec<(f64, i64)> = Vec::new();
        for (x, w) in pairs {
            if !x.is_finite() {
                return Err(invalid("location", format!("not finite: {x}")));
            }
            raw.push((wrap(x, circumference), w));
        }
        raw.sort_by(|a, b| cmp_loc(a.0, b.0));
        let mut atoms: Vec<SignedAtom> = Vec::with_capacity(raw.len());
        for (x, w) in raw {
            match atoms.last_mut() {
                Some(last) if last.location.position() == x => last.weight += w,
                _ => atoms.push(SignedAtom {
                    location: CirclePoint::from_wrapped(x),
                    weight: w,
                }),
            }
        }
        atoms.retain(|a| a.weight != 0);
        Ok(Self {
            atoms,
            circumference,
        })
    }

    pub fn circumference(&self) -> f64 {
        self.circumference
    }

    pub fn atoms(&self) -> &[SignedAtom] {
        &self.atoms
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// `Σ |weights|`.
    pub fn total_variation(&self) -> u64 {
        self.atoms.iter().map(|a| a.weight.unsigned_abs()).sum()
    }

    /// Atomwise sum.
    pub fn add(&self, other: &SignedConfiguration) -> Result<Self> {
        check_same_circle(self.circumference, other.circumference)?;
        Self::from_weights(
            self.circumference,
            self.atoms
                .iter()
                .chain(other.atoms.iter())
                .map(|a| (a.location.position(), a.weight)),
        )
    }

    /// Atomwise `self - other`.
    pub fn sub(&self, other: &SignedConfiguration) -> Result<Self> {
        check_same_circle(self.circumference, other.circumference)?;
        Self::from_weights(
            self.circumference,
            self.atoms
                .iter()
                .map(|a| (a.location.position(), a.weight))
                .chain(other.atoms.iter().map(|a| (a.location.position(), -a.weight))),
        )
    }
}

impl From<&Configuration> for SignedConfiguration {
    fn from(c: &Configuration) -> Self {
        c.to_signed()
    }
}
