//! Single-qubit Pauli symbols and N-qubit Pauli words.
//!
//! Qubit 0 is the leftmost tensor factor, which is also the most significant
//! bit of a computational-basis index. Written as a string, `"XZI"` puts `X`
//! on qubit 0.

use std::fmt;
use std::str::FromStr;

use nalgebra::Matrix2;
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{DaqcError, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const IM: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const NONTRIVIAL: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];

    pub fn matrix(self) -> Matrix2<Complex64> {
        match self {
            Pauli::I => Matrix2::new(ONE, ZERO, ZERO, ONE),
            Pauli::X => Matrix2::new(ZERO, ONE, ONE, ZERO),
            Pauli::Y => Matrix2::new(ZERO, -IM, IM, ZERO),
            Pauli::Z => Matrix2::new(ONE, ZERO, ZERO, -ONE),
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    pub fn from_char(c: char) -> Option<Pauli> {
        match c.to_ascii_uppercase() {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }

    /// `self · other = phase · result`.
    pub fn mul(self, other: Pauli) -> (Complex64, Pauli) {
        use Pauli::*;
        match (self, other) {
            (I, p) | (p, I) => (ONE, p),
            (a, b) if a == b => (ONE, I),
            (X, Y) => (IM, Z),
            (Y, Z) => (IM, X),
            (Z, X) => (IM, Y),
            (Y, X) => (-IM, Z),
            (Z, Y) => (-IM, X),
            (X, Z) => (-IM, Y),
            _ => unreachable!(),
        }
    }

    /// (has X component, has Z component) in the `Y = iXZ` factorization.
    fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }
}

/// Bit-mask form of a Pauli word: `P|b> = i^ny (-1)^{|b & z|} |b ^ x>`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PauliMasks {
    pub x: usize,
    pub z: usize,
    pub ny: u8,
}

impl PauliMasks {
    /// Phase `i^ny` carried by the Y factors.
    pub fn y_phase(&self) -> Complex64 {
        match self.ny % 4 {
            0 => ONE,
            1 => IM,
            2 => -ONE,
            _ => -IM,
        }
    }
}

/// A tensor product of Pauli symbols, one per qubit.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliWord(Vec<Pauli>);

impl PauliWord {
    pub fn new(axes: Vec<Pauli>) -> Self {
        PauliWord(axes)
    }

    pub fn identity(n_qubits: usize) -> Self {
        PauliWord(vec![Pauli::I; n_qubits])
    }

    /// Word with the given (qubit, symbol) pairs and identity elsewhere.
    pub fn from_sparse(n_qubits: usize, factors: &[(usize, Pauli)]) -> Result<Self> {
        let mut axes = vec![Pauli::I; n_qubits];
        for &(q, p) in factors {
            if q >= n_qubits {
                return Err(DaqcError::InvalidArgument(format!(
                    "qubit {q} out of range for {n_qubits} qubits"
                )));
            }
            axes[q] = p;
        }
        Ok(PauliWord(axes))
    }

    pub fn zz(n_qubits: usize, j: usize, k: usize) -> Self {
        let mut axes = vec![Pauli::I; n_qubits];
        axes[j] = Pauli::Z;
        axes[k] = Pauli::Z;
        PauliWord(axes)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn axes(&self) -> &[Pauli] {
        &self.0
    }

    pub fn get(&self, qubit: usize) -> Pauli {
        self.0[qubit]
    }

    pub fn weight(&self) -> usize {
        self.0.iter().filter(|p| **p != Pauli::I).count()
    }

    pub fn is_identity(&self) -> bool {
        self.weight() == 0
    }

    /// Qubits carrying a non-identity symbol, ascending.
    pub fn support(&self) -> Vec<usize> {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, p)| **p != Pauli::I)
            .map(|(q, _)| q)
            .collect()
    }

    /// True when the word only contains `I` and `Z`.
    pub fn is_z_diagonal(&self) -> bool {
        self.0.iter().all(|p| matches!(p, Pauli::I | Pauli::Z))
    }

    pub fn masks(&self) -> PauliMasks {
        let n = self.0.len();
        let mut m = PauliMasks { x: 0, z: 0, ny: 0 };
        for (q, p) in self.0.iter().enumerate() {
            let bit = 1usize << (n - 1 - q);
            let (x, z) = p.bits();
            if x {
                m.x |= bit;
            }
            if z {
                m.z |= bit;
            }
            if *p == Pauli::Y {
                m.ny += 1;
            }
        }
        m
    }

    /// `self · other = phase · word`.
    pub fn mul(&self, other: &PauliWord) -> Result<(Complex64, PauliWord)> {
        if self.len() != other.len() {
            return Err(DaqcError::DimensionMismatch {
                expected: self.len(),
                found: other.len(),
            });
        }
        let mut phase = ONE;
        let axes = self
            .0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| {
                let (ph, p) = a.mul(*b);
                phase *= ph;
                p
            })
            .collect();
        Ok((phase, PauliWord(axes)))
    }

    /// Whether the two words commute.
    pub fn commutes_with(&self, other: &PauliWord) -> bool {
        let anti = self
            .0
            .iter()
            .zip(&other.0)
            .filter(|(a, b)| **a != Pauli::I && **b != Pauli::I && a != b)
            .count();
        anti % 2 == 0
    }
}

impl fmt::Display for PauliWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.0 {
            write!(f, "{}", p.as_char())?;
        }
        Ok(())
    }
}

impl FromStr for PauliWord {
    type Err = DaqcError;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(Pauli::from_char)
            .collect::<Option<Vec<_>>>()
            .map(PauliWord)
            .filter(|w| !w.is_empty())
            .ok_or_else(|| DaqcError::InvalidWord(s.to_string()))
    }
}

impl Serialize for PauliWord {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for PauliWord {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
